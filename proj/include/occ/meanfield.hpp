#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "occ/bits.hpp"
#include "occ/model.hpp"

namespace occ {

/// p'_i = C_i(p)(1 - p_i) + S_i(p) p_i.
ProbVector recursion_step(const ModelSpec& spec, std::span<const double> p);

/// Trajectory p_0 .. p_steps of the deterministic recursion.
std::vector<ProbVector> iterate(const ModelSpec& spec, const ProbVector& p0, std::size_t steps);

/// Replaces each C_i by C_i with p_i pinned to 0. Survival is untouched.
ModelSpec mask_self_colonisation(const ModelSpec& spec);

/**
 * Pins p_i to `value` inside each S_i.
 *
 * Experimental. The process law is unchanged only for value = 1 (S_i acts where
 * x_i = 1), and pinning to 1 generally raises S_i for increasing extensions, so
 * this is not an improvement transform in the way the colonisation mask is.
 */
ModelSpec pin_self_survival(const ModelSpec& spec, double value);

/// (1 - p_i) birth_i(p) - p_i death_i(p).
std::vector<double> ode_rhs(const SpinSpec& spec, std::span<const double> p);

enum class OdeMethod { rk4, euler };

struct OdeConfig {
  double step = 1e-3;
  OdeMethod method = OdeMethod::rk4;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<ProbVector> states;
};

/// Fixed-step solution of the mean-field ODE on [0, t_end], clamped to [0,1]^n after every step.
/// The final step is shortened to land on t_end.
Trajectory integrate_ode(const SpinSpec& spec, const ProbVector& p0, double t_end, const OdeConfig& cfg = {});

/// Solution sampled at increasing `grid` times, integrating with steps of at most cfg.step between them.
Trajectory integrate_ode_on_grid(const SpinSpec& spec, const ProbVector& p0, std::span<const double> grid,
                                 const OdeConfig& cfg = {});

/// One clamped integrator step of size h.
ProbVector ode_step(const SpinSpec& spec, std::span<const double> p, double h, OdeMethod method);

/// CSV with columns <index_name>, p_1..p_n; rows indexed by step or time.
void write_trajectory_csv(std::ostream& os, std::span<const ProbVector> states, std::span<const double> index,
                          std::string_view index_name);

}  // namespace occ
