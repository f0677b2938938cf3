#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "occ/bits.hpp"

namespace occ {

enum class FamilyKind { constant, affine_saturated, product_form, hanski_incidence, tabulated_multilinear };

std::string_view to_string(FamilyKind kind);
FamilyKind parse_family_kind(std::string_view name);

/**
 * A function [0,1]^n -> R built from one of the canonical shapes.
 *
 * The shape ("raw" value) always lies in [0,1]. Output is `offset + slope * raw`,
 * which lets the same families serve as probabilities (offset 0, slope 1), as
 * rates (slope = rate scale) and as the discretised survival 1 - delta * mu.
 * Pinned coordinates are substituted before the shape is evaluated.
 */
class FunctionFamily {
 public:
  struct Constant {
    double value;
  };
  struct AffineSaturated {
    double intercept;
    std::vector<double> weights;
  };
  struct ProductForm {
    std::vector<double> beta;
  };
  struct HanskiIncidence {
    std::vector<double> weights;
    double half_saturation;
  };
  struct TabulatedMultilinear {
    std::vector<double> table;  // indexed by lattice word
  };
  using Shape = std::variant<Constant, AffineSaturated, ProductForm, HanskiIncidence, TabulatedMultilinear>;

  static FunctionFamily constant(std::size_t dim, double value);
  /// min(1, intercept + sum_j weights_j p_j), intercept >= 0, weights >= 0.
  static FunctionFamily affine_saturated(double intercept, std::vector<double> weights);
  /// 1 - prod_j (1 - beta_j p_j), beta_j in [0,1].
  static FunctionFamily product_form(std::vector<double> beta);
  /// M^2 / (M^2 + y^2) with M = sum_j weights_j p_j and y > 0.
  static FunctionFamily hanski_incidence(std::vector<double> weights, double half_saturation);
  /// Multilinear interpolant of 2^dim lattice values in [0,1].
  static FunctionFamily tabulated_multilinear(std::size_t dim, std::vector<double> table);

  /// value -> offset + slope * value. Composes with any existing output map.
  FunctionFamily with_output(double offset, double slope) const;
  FunctionFamily scaled(double factor) const { return with_output(0.0, factor); }
  /// Evaluates with coordinate `coord` replaced by `value`. Later pins override earlier ones.
  FunctionFamily pinned(std::size_t coord, double value) const;

  double eval(std::span<const double> p) const;
  double eval_lattice(Word x) const;
  /// Shape value in [0,1] before the output map.
  double eval_raw(std::span<const double> p) const;

  std::size_t dim() const { return dim_; }
  FamilyKind kind() const { return static_cast<FamilyKind>(shape_.index()); }
  const Shape& shape() const { return shape_; }
  double offset() const { return offset_; }
  double slope() const { return slope_; }
  const std::vector<std::pair<std::size_t, double>>& pins() const { return pins_; }

  /// Lower and upper bound of eval over [0,1]^n implied by the output map.
  double lower_bound() const { return std::min(offset_, offset_ + slope_); }
  double upper_bound() const { return std::max(offset_, offset_ + slope_); }

 private:
  FunctionFamily(std::size_t dim, Shape shape) : dim_(dim), shape_(std::move(shape)) {}
  double eval_shape(const double* p) const;

  std::size_t dim_;
  Shape shape_;
  double offset_ = 0.0;
  double slope_ = 1.0;
  std::vector<std::pair<std::size_t, double>> pins_;
};

/// Occupancy process: colonisation C_i and survival S_i per site, clamped to [0,1].
class ModelSpec {
 public:
  ModelSpec(std::vector<FunctionFamily> colonisation, std::vector<FunctionFamily> survival);

  std::size_t n() const { return colonisation_.size(); }
  const std::vector<FunctionFamily>& colonisation() const { return colonisation_; }
  const std::vector<FunctionFamily>& survival() const { return survival_; }

  double colonisation(std::size_t site, std::span<const double> p) const;
  double survival(std::size_t site, std::span<const double> p) const;
  double colonisation(std::size_t site, Word x) const;
  double survival(std::size_t site, Word x) const;

  /// P(X_{i,t+1} = 1 | X_t = x) = C_i(x)(1 - x_i) + S_i(x) x_i.
  double occupation_probability(std::size_t site, Word x) const;

 private:
  std::vector<FunctionFamily> colonisation_;
  std::vector<FunctionFamily> survival_;
};

/// Spin system: 0 -> 1 at rate birth_i(X), 1 -> 0 at rate death_i(X). Rates floored at 0.
class SpinSpec {
 public:
  SpinSpec(std::vector<FunctionFamily> birth, std::vector<FunctionFamily> death);

  std::size_t n() const { return birth_.size(); }
  const std::vector<FunctionFamily>& birth() const { return birth_; }
  const std::vector<FunctionFamily>& death() const { return death_; }

  double birth(std::size_t site, std::span<const double> p) const;
  double death(std::size_t site, std::span<const double> p) const;
  double birth(std::size_t site, Word x) const;
  double death(std::size_t site, Word x) const;

  /// Rate at which site i flips from configuration x.
  double flip_rate(std::size_t site, Word x) const;

 private:
  std::vector<FunctionFamily> birth_;
  std::vector<FunctionFamily> death_;
};

// ---------------------------------------------------------------------------
// Hypothesis certification

enum class Verdict { pass, fail, inconclusive };
std::string_view to_string(Verdict v);

enum class Hypothesis {
  colonisation_increasing,
  survival_increasing,
  colonisation_concave,
  survival_concave,
  gap_decreasing,    // S - C
  gap_nonnegative,
  gap_convex,
  birth_increasing,
  birth_concave,
  death_decreasing,
  death_convex,
  total_increasing,  // birth + death
  total_concave,
  birth_lipschitz,
  death_lipschitz,
};
std::string_view to_string(Hypothesis h);

struct HypothesisResult {
  Hypothesis hypothesis;
  std::size_t site;
  Verdict verdict;
  /// Smallest observed margin; negative means the inequality was violated.
  /// For Lipschitz entries: cap minus estimate.
  double worst_margin;
  ProbVector witness_x;
  ProbVector witness_y;
  std::size_t instances;
  /// Lipschitz entries only: max |f(x) - f(y)| / |x - y|_1 over sampled pairs.
  double estimate = 0.0;
};

struct AssumptionReport {
  std::vector<HypothesisResult> results;
  std::size_t samples = 0;
  double tol = 0.0;
  std::uint64_t seed = 0;

  Verdict overall() const;
  /// True when every listed hypothesis passed at every site.
  bool certifies(std::span<const Hypothesis> hypotheses) const;
  const HypothesisResult* find(Hypothesis h, std::size_t site) const;
};

inline constexpr Hypothesis theorem1_hypotheses[] = {
    Hypothesis::colonisation_increasing, Hypothesis::survival_increasing, Hypothesis::colonisation_concave,
    Hypothesis::survival_concave,        Hypothesis::gap_decreasing,      Hypothesis::gap_nonnegative};
inline constexpr Hypothesis theorem3_hypotheses[] = {
    Hypothesis::colonisation_increasing, Hypothesis::survival_increasing, Hypothesis::colonisation_concave,
    Hypothesis::survival_concave,        Hypothesis::gap_decreasing,      Hypothesis::gap_nonnegative,
    Hypothesis::gap_convex};
inline constexpr Hypothesis monotone_hypotheses[] = {Hypothesis::colonisation_increasing,
                                                     Hypothesis::survival_increasing};
inline constexpr Hypothesis theorem2_hypotheses[] = {Hypothesis::birth_increasing, Hypothesis::birth_concave,
                                                     Hypothesis::death_decreasing, Hypothesis::death_convex,
                                                     Hypothesis::total_increasing};
inline constexpr Hypothesis theorem4_hypotheses[] = {
    Hypothesis::birth_increasing, Hypothesis::birth_concave, Hypothesis::death_decreasing,
    Hypothesis::death_convex,     Hypothesis::total_increasing, Hypothesis::total_concave,
    Hypothesis::birth_lipschitz,  Hypothesis::death_lipschitz};

struct CheckOptions {
  std::size_t samples = 4096;
  double tol = 1e-9;
  std::uint64_t seed = 0;
  /// Comparable lattice pairs are enumerated exhaustively up to this n.
  std::size_t lattice_pairs_max_n = 10;
  /// Midpoints of all lattice pairs are tested up to this n.
  std::size_t lattice_midpoints_max_n = 6;
  /// Lipschitz estimates above this value are reported inconclusive.
  double lipschitz_cap = 1e6;
};

AssumptionReport check_assumptions(const ModelSpec& spec, const CheckOptions& options = {});
AssumptionReport check_spin_assumptions(const SpinSpec& spec, const CheckOptions& options = {});

/// Sampled sup over [0,1]^n of f (lattice points when n <= 16, plus random points).
double sampled_sup(const FunctionFamily& f, std::size_t samples, std::uint64_t seed);

}  // namespace occ
