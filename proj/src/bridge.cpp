#include "occ/bridge.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <ostream>

#include "occ/errors.hpp"
#include "occ/format.hpp"
#include "occ/indep.hpp"
#include "occ/random.hpp"

namespace occ {

namespace {

constexpr std::uint32_t kSupStream = streams::assumptions + 0xFE;

double sup_total_rate(const SpinSpec& spec, std::size_t site, std::size_t samples, std::uint64_t seed) {
  const std::size_t n = spec.n();
  double sup = 0.0;
  if (n <= 16) {
    for (Word w = 0; w < lattice_size(n); ++w) sup = std::max(sup, spec.birth(site, w) + spec.death(site, w));
  }
  const UniformArray rng(seed, kSupStream);
  ProbVector p(n);
  for (std::size_t k = 0; k < samples; ++k) {
    for (std::size_t j = 0; j < n; ++j) p[j] = rng(static_cast<std::uint32_t>(k), 0, static_cast<std::uint32_t>(j));
    sup = std::max(sup, spec.birth(site, p) + spec.death(site, p));
  }
  return sup;
}

void require_delta(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ParameterError("delta must be positive and finite");
}

std::size_t steps_for(double t, double delta) {
  return static_cast<std::size_t>(std::floor(t / delta * (1.0 + 1e-12)));
}

}  // namespace

double admissible_delta(const SpinSpec& spec, std::size_t samples, std::uint64_t seed) {
  double sup = 0.0;
  for (std::size_t i = 0; i < spec.n(); ++i) sup = std::max(sup, sup_total_rate(spec, i, samples, seed));
  return sup == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / sup;
}

void check_admissible(const SpinSpec& spec, const DiscretisationConfig& cfg) {
  require_delta(cfg.delta);
  for (std::size_t i = 0; i < spec.n(); ++i) {
    const double bound = cfg.delta * sup_total_rate(spec, i, cfg.sup_samples, cfg.seed);
    if (bound > 1.0 + 1e-12) {
      throw AdmissibilityError("delta = " + format_number(cfg.delta) + " is not admissible at site " +
                               std::to_string(i + 1) + ": delta * sup(birth + death) = " + format_number(bound) +
                               " > 1");
    }
  }
}

ModelSpec discretise(const SpinSpec& spec, const DiscretisationConfig& cfg) {
  check_admissible(spec, cfg);
  std::vector<FunctionFamily> col, surv;
  for (std::size_t i = 0; i < spec.n(); ++i) {
    col.push_back(spec.birth()[i].scaled(cfg.delta));
    surv.push_back(spec.death()[i].with_output(1.0, -cfg.delta));
  }
  return ModelSpec(std::move(col), std::move(surv));
}

GeneratorMatrix uniformized_rates(const SpinSpec& spec, const DiscretisationConfig& cfg, const ExactLimits& limits) {
  const auto P = build_transition_matrix(discretise(spec, cfg), limits);
  const std::size_t states = P.states();
  std::vector<double> q(states * states, 0.0);
  for (Word x = 0; x < states; ++x) {
    double out = 0.0;
    for (Word y = 0; y < states; ++y) {
      if (y == x) continue;
      q[x * states + y] = P(x, y) / cfg.delta;
      out += q[x * states + y];
    }
    q[x * states + x] = -out;
  }
  return GeneratorMatrix(spec.n(), std::move(q));
}

double max_single_flip_rate_error(const SpinSpec& spec, const DiscretisationConfig& cfg, const ExactLimits& limits) {
  const auto q = uniformized_rates(spec, cfg, limits);
  double worst = 0.0;
  for (Word x = 0; x < q.states(); ++x)
    for (std::size_t i = 0; i < spec.n(); ++i)
      worst = std::max(worst, std::abs(q(x, flip_bit(x, i)) - spec.flip_rate(i, x)));
  return worst;
}

double max_multi_flip_rate(const SpinSpec& spec, const DiscretisationConfig& cfg, const ExactLimits& limits) {
  const auto q = uniformized_rates(spec, cfg, limits);
  double worst = 0.0;
  for (Word x = 0; x < q.states(); ++x)
    for (Word y = 0; y < q.states(); ++y)
      if (std::popcount(x ^ y) >= 2) worst = std::max(worst, q(x, y));
  return worst;
}

DistVector subordinated_law(const SpinSpec& spec, const DiscretisationConfig& cfg, const BitState& x0, double t,
                            double tail_tol, const ExactLimits& limits) {
  if (x0.size() != spec.n()) throw DimensionError("initial state does not match model");
  if (!(t >= 0.0) || !std::isfinite(t)) throw ParameterError("time must be finite and >= 0");
  const auto model = discretise(spec, cfg);
  auto v = DistVector::point_mass(x0);
  if (t == 0.0) return v;
  const double mean = t / cfg.delta;
  const double log_mean = std::log(mean);
  const auto k_max = static_cast<std::size_t>(std::ceil(mean + 50.0 * std::sqrt(mean) + 100.0));
  DistVector acc{spec.n(), std::vector<double>(v.probs.size(), 0.0)};
  double retained = 0.0;
  for (std::size_t k = 0;; ++k) {
    const double w = std::exp(-mean + static_cast<double>(k) * log_mean - std::lgamma(static_cast<double>(k) + 1.0));
    for (std::size_t s = 0; s < v.probs.size(); ++s) acc.probs[s] += w * v.probs[s];
    retained += w;
    if ((static_cast<double>(k) >= mean && 1.0 - retained < tail_tol) || k >= k_max) break;
    v = propagate(model, v, 1, limits);
  }
  for (auto& a : acc.probs) a /= retained;
  normalise(acc);
  return acc;
}

double euler_gap(const SpinSpec& spec, const ProbVector& p0, double t, const DiscretisationConfig& cfg,
                 double reference_step) {
  require_delta(cfg.delta);
  const std::size_t steps = steps_for(t, cfg.delta);
  ProbVector p = p0;
  for (std::size_t k = 0; k < steps; ++k) p = ode_step(spec, p, cfg.delta, OdeMethod::euler);
  const auto ref = integrate_ode(spec, p0, t, {reference_step, OdeMethod::rk4}).states.back();
  double gap = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) gap = std::max(gap, std::abs(p[i] - ref[i]));
  return gap;
}

std::vector<double> ConvergenceTable::values(const std::string& metric) const {
  std::vector<double> out;
  for (const auto& r : rows)
    if (r.metric == metric) out.push_back(r.value);
  return out;
}

std::vector<double> ConvergenceTable::deltas(const std::string& metric) const {
  std::vector<double> out;
  for (const auto& r : rows)
    if (r.metric == metric) out.push_back(r.delta);
  return out;
}

std::vector<double> ConvergenceTable::ratios(const std::string& metric) const {
  const auto v = values(metric);
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < v.size(); ++k) out.push_back(v[k] / v[k + 1]);
  return out;
}

std::vector<double> default_delta_grid() { return {0x1p-4, 0x1p-5, 0x1p-6, 0x1p-7, 0x1p-8}; }

ConvergenceTable convergence_table(const SpinSpec& spec, const BitState& x0, double t, std::span<const double> deltas,
                                   double tail_tol, const ExactLimits& limits) {
  if (deltas.empty()) throw ParameterError("delta grid is empty");
  for (std::size_t k = 1; k < deltas.size(); ++k)
    if (!(deltas[k] < deltas[k - 1])) throw ParameterError("delta grid must be strictly decreasing");
  const auto exact = spin_law(spec, x0, t, tail_tol, limits);
  ConvergenceTable table;
  for (double delta : deltas) {
    DiscretisationConfig cfg;
    cfg.delta = delta;
    table.rows.push_back({delta, metrics::rate_error, max_single_flip_rate_error(spec, cfg, limits)});
    table.rows.push_back({delta, metrics::multi_flip_rate, max_multi_flip_rate(spec, cfg, limits)});
    table.rows.push_back(
        {delta, metrics::tv_distance, total_variation(subordinated_law(spec, cfg, x0, t, tail_tol, limits), exact)});
    table.rows.push_back({delta, metrics::euler_error, euler_gap(spec, x0.as_probabilities(), t, cfg)});
  }
  return table;
}

void write_convergence_csv(std::ostream& os, const ConvergenceTable& table) {
  os << "delta,metric,value\n";
  for (const auto& r : table.rows) os << format_number(r.delta) << ',' << r.metric << ',' << format_number(r.value) << '\n';
}

DiscretisedOrderingReport ordering_under_discretisation(const SpinSpec& spec, std::span<const double> deltas,
                                                        const BitState& x0, const RealTimePattern& pattern, double tol,
                                                        const ExactLimits& limits) {
  if (x0.size() != spec.n()) throw DimensionError("initial state does not match model");
  if (deltas.empty()) throw ParameterError("delta grid is empty");
  DiscretisedOrderingReport report;
  report.tol = tol;
  report.hypotheses_certified = check_spin_assumptions(spec).certifies(theorem4_hypotheses);
  report.continuous_margin =
      spin_constrained_probability(spec, x0, pattern, 1e-12, limits) - indep_spin_multisite_probability(spec, x0, pattern);
  report.worst_margin = std::numeric_limits<double>::infinity();

  for (double delta : deltas) {
    DiscretisationConfig cfg;
    cfg.delta = delta;
    const auto model = discretise(spec, cfg);
    MultiSitePattern steps;
    for (const auto& e : pattern.entries) {
      SiteTimes st{e.site, {}};
      for (double t : e.times) {
        const double k = std::round(t / delta);
        if (k < 1.0 || std::abs(k * delta - t) > 1e-9 * std::max(1.0, t)) {
          throw ParameterError("pattern time " + format_number(t) + " is not a positive multiple of delta = " +
                               format_number(delta));
        }
        st.times.push_back(static_cast<std::size_t>(k));
      }
      if (!st.times.empty()) steps.entries.push_back(std::move(st));
    }
    steps.validate(spec.n());
    const std::size_t horizon = steps.horizon();
    const auto schedules = build_schedules(model, x0, horizon);

    DiscretisedOrderingRow row{delta, 0.0, 1.0, 0.0, std::numeric_limits<double>::infinity()};
    row.x_probability = constrained_probability(model, x0, steps, limits);
    for (const auto& e : steps.entries) {
      std::vector<std::uint8_t> omega(horizon, 1);
      for (auto t : e.times) omega[t - 1] = 0;
      const double pw = indep_path_probability(schedules[e.site], omega);
      row.w_probability *= pw;
      const MultiSitePattern single{{e}};
      row.worst_site_margin = std::min(row.worst_site_margin, constrained_probability(model, x0, single, limits) - pw);
    }
    if (steps.entries.empty()) row.worst_site_margin = 0.0;
    row.margin = row.x_probability - row.w_probability;
    report.worst_margin = std::min({report.worst_margin, row.margin, row.worst_site_margin});
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace occ
