#include "occ/bits.hpp"

#include "occ/errors.hpp"

namespace occ {

BitState::BitState(Word word, std::size_t n) : word_(word), n_(n) {
  if (n > 64) throw CapacityError("bit states hold at most 64 sites");
  if ((word & ~full_mask(n)) != 0) throw ParameterError("bit state has bits set above site n-1");
}

BitState BitState::parse(std::string_view bits) {
  if (bits.size() > 64) throw CapacityError("bit states hold at most 64 sites");
  Word w = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      w |= Word{1} << i;
    } else if (bits[i] != '0') {
      throw ParameterError("bit state strings may only contain '0' and '1'");
    }
  }
  return BitState(w, bits.size());
}

std::string BitState::to_string() const {
  std::string s(n_, '0');
  for (std::size_t i = 0; i < n_; ++i)
    if (test_bit(word_, i)) s[i] = '1';
  return s;
}

}  // namespace occ
