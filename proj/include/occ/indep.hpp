#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "occ/bits.hpp"
#include "occ/exact.hpp"
#include "occ/meanfield.hpp"
#include "occ/model.hpp"

namespace occ {

/// Inhomogeneous two-state chain W_i driven by the mean-field trajectory.
struct SiteChainSchedule {
  std::size_t site = 0;
  bool initially_occupied = false;
  std::vector<double> colonisation;  // C_i(p_t), t = 0..horizon-1
  std::vector<double> survival;      // S_i(p_t), t = 0..horizon-1
  std::vector<double> occupancy;     // p_{i,t}, t = 0..horizon

  std::size_t horizon() const { return colonisation.size(); }
};

SiteChainSchedule build_schedule(const ModelSpec& spec, const BitState& x0, std::size_t site, std::size_t horizon);
std::vector<SiteChainSchedule> build_schedules(const ModelSpec& spec, const BitState& x0, std::size_t horizon);

/// E_0 W_t, which by construction is the mean-field state p_t.
ProbVector indep_marginal(const ModelSpec& spec, const BitState& x0, std::size_t steps);

/// P(W_{i,t} = 0 wherever omega_t = 0) by forward recursion over the two states.
double indep_path_probability(const SiteChainSchedule& schedule, std::span<const std::uint8_t> omega);
double indep_path_probability(const ModelSpec& spec, const BitState& x0, const TimePattern& pattern);

/// Same quantity through the decomposition at the last constrained step m:
/// P(w) = (1 - S(p_{m-1})) P(w with w_m = 1) + (S - C)(p_{m-1}) P(w with w_m = 1, w_{m-1} = 0).
double indep_path_probability_recursive(const SiteChainSchedule& schedule, std::span<const std::uint8_t> omega);

/// Product over sites of single-site path probabilities (sites of W are independent).
double indep_multisite_probability(const ModelSpec& spec, const BitState& x0, const MultiSitePattern& pattern);

/// P(W_{site,t} = 0 at every listed time) for the continuous-time independent site chain.
double indep_spin_path_probability(const SpinSpec& spec, const BitState& x0, std::size_t site,
                                   std::span<const double> times, const OdeConfig& cfg = {});

/// Multisite version for the continuous-time chain.
double indep_spin_multisite_probability(const SpinSpec& spec, const BitState& x0, const RealTimePattern& pattern,
                                        const OdeConfig& cfg = {});

/// CSV with columns step, colonisation, survival, occupancy; the last row carries only p_T.
void write_schedule_csv(std::ostream& os, const SiteChainSchedule& schedule);

}  // namespace occ
