#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "occ/bits.hpp"
#include "occ/exact.hpp"
#include "occ/model.hpp"
#include "occ/random.hpp"

namespace occ {

/**
 * One step of the uniform-array construction.
 *
 * Bit i becomes I(u_i < C_i(x)) + x_i I(C_i(x) <= u_i < S_i(x)). When C_i(x) <= S_i(x)
 * this equals (1 - x_i) I(u_i < C_i(x)) + x_i I(u_i < S_i(x)); the latter form is
 * used throughout since it is a valid coupling without the ordering.
 */
Word step_occupancy(const ModelSpec& spec, Word x, std::span<const double> uniforms);

/// Independent-site step: C_i, S_i evaluated at the mean-field state p_t instead of x.
Word step_indep(const ModelSpec& spec, Word w, std::span<const double> p_t, std::span<const double> uniforms);

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
};

/// Estimates indexed [step][site], steps 0..horizon.
struct McMarginals {
  std::vector<std::vector<McEstimate>> by_step;
};

McMarginals simulate_marginals(const ModelSpec& spec, const BitState& x0, std::size_t steps, std::size_t reps,
                               std::uint64_t seed);

/// Same replicates pushed through the independent site approximation.
McMarginals simulate_indep_marginals(const ModelSpec& spec, const BitState& x0, std::size_t steps, std::size_t reps,
                                     std::uint64_t seed);

McEstimate simulate_event_probability(const ModelSpec& spec, const BitState& x0, const MultiSitePattern& pattern,
                                      std::size_t reps, std::uint64_t seed);

struct MonotoneCheckResult {
  /// (replicate, step) instances where X(U^gamma) exceeds X(U) in some bit.
  std::size_t violations = 0;
  std::size_t violating_replicates = 0;
  std::size_t pairs = 0;
};

/// Drives paired paths with U and U' = U^gamma >= U; counts order violations X(U') <= X(U).
MonotoneCheckResult monotone_path_check(const ModelSpec& spec, const BitState& x0, std::size_t steps,
                                        std::size_t reps, std::uint64_t seed, double gamma = 0.5);

/// CSV with columns step, site, mean, se, reps, seed.
void write_estimates_csv(std::ostream& os, const McMarginals& estimates);

}  // namespace occ
