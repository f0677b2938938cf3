#include "occ/indep.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "occ/errors.hpp"
#include "occ/format.hpp"

namespace occ {

SiteChainSchedule build_schedule(const ModelSpec& spec, const BitState& x0, std::size_t site, std::size_t horizon) {
  if (x0.size() != spec.n()) throw DimensionError("initial state does not match model");
  if (site >= spec.n()) throw DimensionError("schedule site out of range");
  const auto traj = iterate(spec, x0.as_probabilities(), horizon);
  SiteChainSchedule s;
  s.site = site;
  s.initially_occupied = x0[site];
  for (std::size_t t = 0; t < horizon; ++t) {
    s.colonisation.push_back(spec.colonisation(site, traj[t]));
    s.survival.push_back(spec.survival(site, traj[t]));
  }
  for (const auto& p : traj) s.occupancy.push_back(p[site]);
  return s;
}

std::vector<SiteChainSchedule> build_schedules(const ModelSpec& spec, const BitState& x0, std::size_t horizon) {
  if (x0.size() != spec.n()) throw DimensionError("initial state does not match model");
  const auto traj = iterate(spec, x0.as_probabilities(), horizon);
  std::vector<SiteChainSchedule> out(spec.n());
  for (std::size_t i = 0; i < spec.n(); ++i) {
    auto& s = out[i];
    s.site = i;
    s.initially_occupied = x0[i];
    for (std::size_t t = 0; t < horizon; ++t) {
      s.colonisation.push_back(spec.colonisation(i, traj[t]));
      s.survival.push_back(spec.survival(i, traj[t]));
    }
    for (const auto& p : traj) s.occupancy.push_back(p[i]);
  }
  return out;
}

ProbVector indep_marginal(const ModelSpec& spec, const BitState& x0, std::size_t steps) {
  if (x0.size() != spec.n()) throw DimensionError("initial state does not match model");
  return iterate(spec, x0.as_probabilities(), steps).back();
}

namespace {

std::size_t checked_last(const SiteChainSchedule& schedule, std::span<const std::uint8_t> omega) {
  const std::size_t last = last_constrained_step(omega);
  if (last > schedule.horizon()) {
    throw HorizonError("pattern step " + std::to_string(last) + " beyond schedule horizon " +
                       std::to_string(schedule.horizon()));
  }
  return last;
}

}  // namespace

double indep_path_probability(const SiteChainSchedule& schedule, std::span<const std::uint8_t> omega) {
  const std::size_t last = checked_last(schedule, omega);
  double vacant = schedule.initially_occupied ? 0.0 : 1.0;
  double occupied = 1.0 - vacant;
  for (std::size_t t = 1; t <= last; ++t) {
    const double c = schedule.colonisation[t - 1];
    const double s = schedule.survival[t - 1];
    const double next_vacant = vacant * (1.0 - c) + occupied * (1.0 - s);
    const double next_occupied = omega[t - 1] == 0 ? 0.0 : vacant * c + occupied * s;
    vacant = next_vacant;
    occupied = next_occupied;
  }
  return vacant + occupied;
}

double indep_path_probability(const ModelSpec& spec, const BitState& x0, const TimePattern& pattern) {
  const std::size_t last = last_constrained_step(pattern.omega);
  return indep_path_probability(build_schedule(spec, x0, pattern.site, last), pattern.omega);
}

double indep_path_probability_recursive(const SiteChainSchedule& schedule, std::span<const std::uint8_t> omega) {
  const std::size_t last = checked_last(schedule, omega);
  if (last == 0) return 1.0;
  if (last == 1) return 1.0 - schedule.occupancy[1];
  const double s = schedule.survival[last - 1];
  const double c = schedule.colonisation[last - 1];
  std::vector<std::uint8_t> released(omega.begin(), omega.begin() + static_cast<std::ptrdiff_t>(last));
  released[last - 1] = 1;
  auto held_vacant = released;
  held_vacant[last - 2] = 0;
  return (1.0 - s) * indep_path_probability_recursive(schedule, released) +
         (s - c) * indep_path_probability_recursive(schedule, held_vacant);
}

double indep_multisite_probability(const ModelSpec& spec, const BitState& x0, const MultiSitePattern& pattern) {
  pattern.validate(spec.n());
  if (pattern.entries.empty()) return 1.0;
  const std::size_t horizon = pattern.horizon();
  const auto schedules = build_schedules(spec, x0, horizon);
  double prob = 1.0;
  for (const auto& e : pattern.entries) {
    std::vector<std::uint8_t> omega(horizon, 1);
    for (auto t : e.times) omega[t - 1] = 0;
    prob *= indep_path_probability(schedules[e.site], omega);
  }
  return prob;
}

namespace {

// Mean-field state plus (vacant, occupied) mass of the tracked site.
struct Augmented {
  ProbVector p;
  double vacant;
  double occupied;
};

Augmented augmented_rhs(const SpinSpec& spec, std::size_t site, const Augmented& s) {
  Augmented d{ode_rhs(spec, s.p), 0.0, 0.0};
  const double lambda = spec.birth(site, s.p);
  const double mu = spec.death(site, s.p);
  d.vacant = -lambda * s.vacant + mu * s.occupied;
  d.occupied = lambda * s.vacant - mu * s.occupied;
  return d;
}

Augmented axpy(const Augmented& s, double h, const Augmented& d) {
  Augmented out{s.p, s.vacant + h * d.vacant, s.occupied + h * d.occupied};
  for (std::size_t i = 0; i < out.p.size(); ++i) out.p[i] = std::clamp(s.p[i] + h * d.p[i], 0.0, 1.0);
  return out;
}

Augmented augmented_step(const SpinSpec& spec, std::size_t site, const Augmented& s, double h, OdeMethod method) {
  if (method == OdeMethod::euler) return axpy(s, h, augmented_rhs(spec, site, s));
  const auto k1 = augmented_rhs(spec, site, s);
  const auto k2 = augmented_rhs(spec, site, axpy(s, 0.5 * h, k1));
  const auto k3 = augmented_rhs(spec, site, axpy(s, 0.5 * h, k2));
  const auto k4 = augmented_rhs(spec, site, axpy(s, h, k3));
  Augmented out = s;
  for (std::size_t i = 0; i < s.p.size(); ++i) {
    out.p[i] = std::clamp(s.p[i] + h / 6.0 * (k1.p[i] + 2.0 * k2.p[i] + 2.0 * k3.p[i] + k4.p[i]), 0.0, 1.0);
  }
  out.vacant = s.vacant + h / 6.0 * (k1.vacant + 2.0 * k2.vacant + 2.0 * k3.vacant + k4.vacant);
  out.occupied = s.occupied + h / 6.0 * (k1.occupied + 2.0 * k2.occupied + 2.0 * k3.occupied + k4.occupied);
  return out;
}

}  // namespace

double indep_spin_path_probability(const SpinSpec& spec, const BitState& x0, std::size_t site,
                                   std::span<const double> times, const OdeConfig& cfg) {
  if (x0.size() != spec.n()) throw DimensionError("initial state does not match model");
  if (site >= spec.n()) throw DimensionError("site out of range");
  if (!(cfg.step > 0.0)) throw ParameterError("ODE step must be positive");
  double prev = 0.0;
  for (double t : times) {
    if (!std::isfinite(t) || t < prev) throw ParameterError("times must be finite, >= 0 and sorted");
    prev = t;
  }
  Augmented s{x0.as_probabilities(), x0[site] ? 0.0 : 1.0, x0[site] ? 1.0 : 0.0};
  double now = 0.0;
  for (double t : times) {
    const double span = t - now;
    const auto steps = static_cast<std::size_t>(std::ceil(span / cfg.step - 1e-9));
    for (std::size_t k = 0; k < steps; ++k)
      s = augmented_step(spec, site, s, span / static_cast<double>(steps), cfg.method);
    s.occupied = 0.0;
    now = t;
  }
  return s.vacant + s.occupied;
}

double indep_spin_multisite_probability(const SpinSpec& spec, const BitState& x0, const RealTimePattern& pattern,
                                        const OdeConfig& cfg) {
  double prob = 1.0;
  for (const auto& e : pattern.entries) {
    auto times = e.times;
    std::sort(times.begin(), times.end());
    prob *= indep_spin_path_probability(spec, x0, e.site, times, cfg);
  }
  return prob;
}

void write_schedule_csv(std::ostream& os, const SiteChainSchedule& schedule) {
  os << "step,colonisation,survival,occupancy\n";
  for (std::size_t t = 0; t < schedule.horizon(); ++t) {
    os << t << ',' << format_number(schedule.colonisation[t]) << ',' << format_number(schedule.survival[t]) << ','
       << format_number(schedule.occupancy[t]) << '\n';
  }
  os << schedule.horizon() << ",,," << format_number(schedule.occupancy.back()) << '\n';
}

}  // namespace occ
