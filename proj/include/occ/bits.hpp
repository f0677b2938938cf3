#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace occ {

/// Packed configuration in {0,1}^n. Site i lives in bit i, bit 0 least significant.
using Word = std::uint64_t;

/// Point of [0,1]^n (mean-field state or marginal vector).
using ProbVector = std::vector<double>;

constexpr bool test_bit(Word word, std::size_t site) { return ((word >> site) & 1u) != 0; }
constexpr Word flip_bit(Word word, std::size_t site) { return word ^ (Word{1} << site); }
constexpr Word full_mask(std::size_t n) { return n >= 64 ? ~Word{0} : (Word{1} << n) - 1; }
constexpr std::size_t lattice_size(std::size_t n) { return std::size_t{1} << n; }

/// Writes the lattice point of `word` into `out` (size n).
inline void lattice_point(Word word, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = test_bit(word, i) ? 1.0 : 0.0;
}

inline ProbVector lattice_point(Word word, std::size_t n) {
  ProbVector p(n);
  lattice_point(word, n, p.data());
  return p;
}

class BitState {
 public:
  BitState() = default;
  BitState(Word word, std::size_t n);

  /// Parses a string of '0'/'1' characters; character k is site k.
  static BitState parse(std::string_view bits);
  static BitState zeros(std::size_t n) { return BitState(0, n); }

  Word word() const { return word_; }
  std::size_t size() const { return n_; }
  bool operator[](std::size_t site) const { return test_bit(word_, site); }

  ProbVector as_probabilities() const { return lattice_point(word_, n_); }
  std::string to_string() const;

  friend bool operator==(const BitState&, const BitState&) = default;

 private:
  Word word_ = 0;
  std::size_t n_ = 0;
};

}  // namespace occ
