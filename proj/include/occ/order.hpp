#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "occ/bits.hpp"
#include "occ/exact.hpp"
#include "occ/meanfield.hpp"
#include "occ/model.hpp"

namespace occ {

/// pass: worst margin >= -tol. fail: violated although the hypotheses are certified.
/// informative: violated, hypotheses not certified (the theorems are only sufficient).
enum class OrderVerdict { pass, fail, informative };
std::string_view to_string(OrderVerdict v);

/// The instance achieving the worst margin. Unused fields stay empty.
struct Witness {
  std::optional<std::size_t> site;
  std::optional<double> time;
  std::optional<Word> subset;
  std::vector<std::uint8_t> omega;
  std::optional<MultiSitePattern> pattern;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct Universe {
  std::size_t n = 0;
  double horizon = 0.0;
  std::size_t instances = 0;
  /// Fraction of the enumerable instance set that was examined.
  double coverage = 1.0;
  std::string description;
};

/// Signed comparison result; margin = lhs - rhs, worst = minimum over the universe.
struct OrderReport {
  std::string check;
  Universe universe;
  double worst_margin = 0.0;
  Witness witness;
  OrderVerdict verdict = OrderVerdict::pass;
  bool hypotheses_certified = false;
  double tol = 0.0;
};

struct OrderOptions {
  double tol = 1e-10;
  /// Hypothesis certification; computed with check_assumptions when unset.
  std::optional<bool> certified;
  CheckOptions check{};
  ExactLimits limits{};
  /// Subsets of sites are enumerated up to this n and sampled beyond it.
  std::size_t max_subset_sites = 12;
  std::size_t subset_samples = 4096;
  /// Multisite patterns with at most this many (site, time) constraints are enumerated.
  std::size_t max_total_constraints = 4;
  /// Beyond this many patterns, a deterministic random sample of this size is taken instead.
  std::size_t max_patterns = 50000;
  std::uint64_t seed = 0;
};

/// Mean-field upper bound on occupancy: margins p_{i,t} - pi_{i,t} for t = 0..horizon.
OrderReport marginal_bound_check(const ModelSpec& spec, const BitState& x0, std::size_t horizon,
                                 const OrderOptions& opt = {});

/// Spin-system analogue on a time grid: ODE solution minus exact marginals.
OrderReport spin_marginal_bound_check(const SpinSpec& spec, const BitState& x0, std::span<const double> grid,
                                      const OrderOptions& opt = {}, const OdeConfig& ode = {});

struct SingleTimeOrthantReport {
  /// P(X_A = 0) - prod (1 - pi_i).
  OrderReport harris;
  /// prod (1 - pi_i) - prod (1 - p_i).
  OrderReport mean_field;
  /// P(X_A = 0) - prod (1 - p_i) = P(X_A = 0) - P(W_A = 0).
  OrderReport combined;
};

SingleTimeOrthantReport single_time_orthant_check(const ModelSpec& spec, const BitState& x0, std::size_t t,
                                                  const OrderOptions& opt = {});

struct PathOrthantReport {
  /// P^X(omega) - P^W(omega) over every site and omega in {0,1}^m.
  OrderReport single_site;
  /// Joint patterns across sites with at most max_total_constraints constraints.
  OrderReport multisite;
  /// P^X(omega) minus the one-step lower bound built from the mean-field schedule.
  OrderReport recursion_bound;
  /// max |direct P^W - decomposed P^W| over every site and omega.
  double decomposition_gap = 0.0;
};

PathOrthantReport path_orthant_check(const ModelSpec& spec, const BitState& x0, std::size_t m,
                                     const OrderOptions& opt = {});

/// E prod_A (1 - X_i) - prod_A E(1 - X_i) over all nonempty A.
OrderReport positive_correlation_check(const DistVector& dist, const OrderOptions& opt = {});

/// All nonempty sets of at most `max_constraints` (site, time) pairs, times in 1..m.
std::vector<MultiSitePattern> enumerate_patterns(std::size_t n, std::size_t m, std::size_t max_constraints);

OrderVerdict order_verdict(double worst_margin, double tol, bool certified);

}  // namespace occ
