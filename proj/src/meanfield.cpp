#include "occ/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "occ/errors.hpp"
#include "occ/format.hpp"

namespace occ {

namespace {

void require_point(std::size_t n, std::span<const double> p) {
  if (p.size() != n) throw DimensionError("state vector does not match model dimension");
  for (double v : p)
    if (!(v >= 0.0 && v <= 1.0)) throw ParameterError("state vector must lie in [0,1]^n");
}

void clamp_unit(ProbVector& p) {
  for (auto& v : p) v = std::clamp(v, 0.0, 1.0);
}

}  // namespace

ProbVector recursion_step(const ModelSpec& spec, std::span<const double> p) {
  require_point(spec.n(), p);
  ProbVector next(spec.n());
  for (std::size_t i = 0; i < spec.n(); ++i) {
    next[i] = spec.colonisation(i, p) * (1.0 - p[i]) + spec.survival(i, p) * p[i];
  }
  return next;
}

std::vector<ProbVector> iterate(const ModelSpec& spec, const ProbVector& p0, std::size_t steps) {
  require_point(spec.n(), p0);
  std::vector<ProbVector> traj;
  traj.reserve(steps + 1);
  traj.push_back(p0);
  for (std::size_t t = 0; t < steps; ++t) traj.push_back(recursion_step(spec, traj.back()));
  return traj;
}

ModelSpec mask_self_colonisation(const ModelSpec& spec) {
  std::vector<FunctionFamily> col;
  col.reserve(spec.n());
  for (std::size_t i = 0; i < spec.n(); ++i) col.push_back(spec.colonisation()[i].pinned(i, 0.0));
  return ModelSpec(std::move(col), spec.survival());
}

ModelSpec pin_self_survival(const ModelSpec& spec, double value) {
  std::vector<FunctionFamily> surv;
  surv.reserve(spec.n());
  for (std::size_t i = 0; i < spec.n(); ++i) surv.push_back(spec.survival()[i].pinned(i, value));
  return ModelSpec(spec.colonisation(), std::move(surv));
}

std::vector<double> ode_rhs(const SpinSpec& spec, std::span<const double> p) {
  require_point(spec.n(), p);
  std::vector<double> rhs(spec.n());
  for (std::size_t i = 0; i < spec.n(); ++i) {
    rhs[i] = (1.0 - p[i]) * spec.birth(i, p) - p[i] * spec.death(i, p);
  }
  return rhs;
}

ProbVector ode_step(const SpinSpec& spec, std::span<const double> p, double h, OdeMethod method) {
  const std::size_t n = spec.n();
  ProbVector next(n);
  if (method == OdeMethod::euler) {
    // Written as h*lambda*(1-p) + (1-h*mu)*p, the discretised occupancy recursion.
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = h * spec.birth(i, p) * (1.0 - p[i]) + (1.0 - h * spec.death(i, p)) * p[i];
    }
  } else {
    // Stages are clamped so the rates are only evaluated inside [0,1]^n.
    auto stage = [&](const std::vector<double>& k, double scale) {
      ProbVector q(n);
      for (std::size_t i = 0; i < n; ++i) q[i] = p[i] + scale * k[i];
      clamp_unit(q);
      return q;
    };
    const auto k1 = ode_rhs(spec, p);
    const auto k2 = ode_rhs(spec, stage(k1, 0.5 * h));
    const auto k3 = ode_rhs(spec, stage(k2, 0.5 * h));
    const auto k4 = ode_rhs(spec, stage(k3, h));
    for (std::size_t i = 0; i < n; ++i) next[i] = p[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  clamp_unit(next);
  return next;
}

Trajectory integrate_ode(const SpinSpec& spec, const ProbVector& p0, double t_end, const OdeConfig& cfg) {
  require_point(spec.n(), p0);
  if (!(cfg.step > 0.0) || !std::isfinite(cfg.step)) throw ParameterError("ODE step must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ParameterError("ODE end time must be finite and >= 0");
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(p0);
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / cfg.step - 1e-9));
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = k == steps ? t_end : static_cast<double>(k) * cfg.step;
    const double h = t - traj.times.back();
    traj.states.push_back(ode_step(spec, traj.states.back(), h, cfg.method));
    traj.times.push_back(t);
  }
  return traj;
}

Trajectory integrate_ode_on_grid(const SpinSpec& spec, const ProbVector& p0, std::span<const double> grid,
                                 const OdeConfig& cfg) {
  require_point(spec.n(), p0);
  if (!(cfg.step > 0.0) || !std::isfinite(cfg.step)) throw ParameterError("ODE step must be positive");
  Trajectory out;
  ProbVector p = p0;
  double now = 0.0;
  for (double t : grid) {
    if (!(t >= now) || !std::isfinite(t)) throw ParameterError("ODE grid must be finite, >= 0 and nondecreasing");
    const double span = t - now;
    const auto steps = static_cast<std::size_t>(std::ceil(span / cfg.step - 1e-9));
    for (std::size_t k = 0; k < steps; ++k) p = ode_step(spec, p, span / static_cast<double>(steps), cfg.method);
    now = t;
    out.times.push_back(t);
    out.states.push_back(p);
  }
  return out;
}

void write_trajectory_csv(std::ostream& os, std::span<const ProbVector> states, std::span<const double> index,
                          std::string_view index_name) {
  const std::size_t n = states.empty() ? 0 : states.front().size();
  os << index_name;
  for (std::size_t i = 0; i < n; ++i) os << ",p_" << (i + 1);
  os << '\n';
  for (std::size_t r = 0; r < states.size(); ++r) {
    os << format_number(index[r]);
    for (double v : states[r]) os << ',' << format_number(v);
    os << '\n';
  }
}

}  // namespace occ
