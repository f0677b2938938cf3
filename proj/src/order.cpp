#include "occ/order.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "occ/errors.hpp"
#include "occ/indep.hpp"
#include "occ/random.hpp"

namespace occ {

namespace {

struct Tracker {
  double worst = std::numeric_limits<double>::infinity();
  std::size_t instances = 0;
  Witness witness;

  template <class Fill>
  void offer(double lhs, double rhs, Fill&& fill) {
    ++instances;
    const double margin = lhs - rhs;
    if (margin < worst) {
      worst = margin;
      witness = Witness{};
      witness.lhs = lhs;
      witness.rhs = rhs;
      fill(witness);
    }
  }
};

OrderReport finish(std::string check, Universe universe, const Tracker& tr, double tol, bool certified) {
  OrderReport r;
  r.check = std::move(check);
  universe.instances = tr.instances;
  r.universe = std::move(universe);
  r.worst_margin = tr.instances == 0 ? 0.0 : tr.worst;
  r.witness = tr.witness;
  r.verdict = order_verdict(r.worst_margin, tol, certified);
  r.hypotheses_certified = certified;
  r.tol = tol;
  return r;
}

bool certify(const ModelSpec& spec, const OrderOptions& opt, std::span<const Hypothesis> hyps) {
  if (opt.certified) return *opt.certified;
  return check_assumptions(spec, opt.check).certifies(hyps);
}

// h[A] = P(X_A = 0) for every subset A, via a superset-sum transform.
std::vector<double> vacancy_table(const DistVector& dist) {
  const std::size_t n = dist.n;
  const Word full = full_mask(n);
  std::vector<double> h = dist.probs;
  for (std::size_t i = 0; i < n; ++i) {
    const Word bit = Word{1} << i;
    for (Word b = 0; b < h.size(); ++b)
      if (b & bit) h[b] += h[b ^ bit];
  }
  // h[B] now sums over x subset of B; P(X_A = 0) = h[complement of A].
  std::vector<double> g(h.size());
  for (Word a = 0; a < g.size(); ++a) g[a] = h[full & ~a];
  return g;
}

// prod_{i in A} (1 - v_i) for every subset A.
std::vector<double> product_table(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<double> out(lattice_size(n));
  out[0] = 1.0;
  for (Word a = 1; a < out.size(); ++a) {
    const auto low = static_cast<std::size_t>(std::countr_zero(a));
    out[a] = out[a & (a - 1)] * (1.0 - v[low]);
  }
  return out;
}

// Nonempty subsets to examine: all of them up to the cap, a deterministic sample beyond.
std::vector<Word> subset_universe(std::size_t n, const OrderOptions& opt, double& coverage) {
  const std::size_t total = lattice_size(n) - 1;
  std::vector<Word> out;
  if (n <= opt.max_subset_sites) {
    out.resize(total);
    for (Word a = 1; a <= total; ++a) out[a - 1] = a;
    coverage = 1.0;
    return out;
  }
  const UniformArray U(opt.seed, streams::subsets);
  for (std::size_t s = 0; s < opt.subset_samples; ++s) {
    Word a = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (U(static_cast<std::uint32_t>(s), 0, static_cast<std::uint32_t>(i)) < 0.5) a |= Word{1} << i;
    if (a != 0) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  coverage = static_cast<double>(out.size()) / static_cast<double>(total);
  return out;
}

MultiSitePattern single_site_pattern(std::size_t site, std::span<const std::uint8_t> omega) {
  SiteTimes st{site, {}};
  for (std::size_t t = 1; t <= omega.size(); ++t)
    if (omega[t - 1] == 0) st.times.push_back(t);
  MultiSitePattern p;
  if (!st.times.empty()) p.entries.push_back(std::move(st));
  return p;
}

void add_patterns(std::size_t site, std::size_t n, std::size_t m, std::size_t budget, MultiSitePattern& current,
                  std::vector<MultiSitePattern>& out) {
  if (site == n) {
    if (!current.entries.empty()) out.push_back(current);
    return;
  }
  add_patterns(site + 1, n, m, budget, current, out);
  for (Word times = 1; times < lattice_size(m); ++times) {
    const auto k = static_cast<std::size_t>(std::popcount(times));
    if (k > budget) continue;
    SiteTimes st{site, {}};
    for (std::size_t t = 0; t < m; ++t)
      if (test_bit(times, t)) st.times.push_back(t + 1);
    current.entries.push_back(std::move(st));
    add_patterns(site + 1, n, m, budget - k, current, out);
    current.entries.pop_back();
  }
}

}  // namespace

std::string_view to_string(OrderVerdict v) {
  switch (v) {
    case OrderVerdict::pass:
      return "pass";
    case OrderVerdict::fail:
      return "fail";
    case OrderVerdict::informative:
      return "informative";
  }
  return "?";
}

OrderVerdict order_verdict(double worst_margin, double tol, bool certified) {
  if (worst_margin >= -tol) return OrderVerdict::pass;
  return certified ? OrderVerdict::fail : OrderVerdict::informative;
}

OrderReport marginal_bound_check(const ModelSpec& spec, const BitState& x0, std::size_t horizon,
                                 const OrderOptions& opt) {
  if (x0.size() != spec.n()) throw DimensionError("initial state does not match model");
  const bool certified = certify(spec, opt, theorem1_hypotheses);
  const auto p = iterate(spec, x0.as_probabilities(), horizon);
  Tracker tr;
  auto dist = DistVector::point_mass(x0);
  for (std::size_t t = 0; t <= horizon; ++t) {
    if (t > 0) dist = propagate(spec, dist, 1, opt.limits);
    const auto pi = exact_marginals(dist);
    for (std::size_t i = 0; i < spec.n(); ++i) {
      tr.offer(p[t][i], pi[i], [&](Witness& w) {
        w.site = i;
        w.time = static_cast<double>(t);
      });
    }
  }
  Universe u{spec.n(), static_cast<double>(horizon), 0, 1.0, "sites x steps 0..horizon"};
  return finish("marginal_bound", u, tr, opt.tol, certified);
}

OrderReport spin_marginal_bound_check(const SpinSpec& spec, const BitState& x0, std::span<const double> grid,
                                      const OrderOptions& opt, const OdeConfig& ode) {
  if (x0.size() != spec.n()) throw DimensionError("initial state does not match model");
  if (grid.empty()) throw ParameterError("time grid is empty");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid[k] < 0.0 || (k > 0 && grid[k] <= grid[k - 1]))
      throw ParameterError("time grid must be nonnegative and strictly increasing");
  }
  const bool certified =
      opt.certified ? *opt.certified : check_spin_assumptions(spec, opt.check).certifies(theorem2_hypotheses);
  const auto traj = integrate_ode_on_grid(spec, x0.as_probabilities(), grid, ode);
  Tracker tr;
  auto law = DistVector::point_mass(x0);
  double prev = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    law = spin_law(spec, law, grid[k] - prev, 1e-12, opt.limits);
    prev = grid[k];
    const auto pi = exact_marginals(law);
    for (std::size_t i = 0; i < spec.n(); ++i) {
      tr.offer(traj.states[k][i], pi[i], [&](Witness& w) {
        w.site = i;
        w.time = grid[k];
      });
    }
  }
  Universe u{spec.n(), grid.back(), 0, 1.0, "sites x time grid"};
  return finish("spin_marginal_bound", u, tr, opt.tol, certified);
}

SingleTimeOrthantReport single_time_orthant_check(const ModelSpec& spec, const BitState& x0, std::size_t t,
                                                  const OrderOptions& opt) {
  if (x0.size() != spec.n()) throw DimensionError("initial state does not match model");
  const std::size_t n = spec.n();
  const auto report = opt.certified ? AssumptionReport{} : check_assumptions(spec, opt.check);
  const bool harris_ok = opt.certified ? *opt.certified : report.certifies(monotone_hypotheses);
  const bool mf_ok = opt.certified ? *opt.certified : report.certifies(theorem1_hypotheses);

  const auto dist = exact_distribution(spec, x0, t, opt.limits);
  const auto pi = exact_marginals(dist);
  const auto p = iterate(spec, x0.as_probabilities(), t).back();
  const auto g = vacancy_table(dist);
  const auto prod_pi = product_table(pi);
  const auto prod_p = product_table(p);

  double coverage = 1.0;
  const auto subsets = subset_universe(n, opt, coverage);
  Tracker harris, mean_field, combined;
  for (Word a : subsets) {
    auto fill = [&](Witness& w) {
      w.subset = a;
      w.time = static_cast<double>(t);
    };
    harris.offer(g[a], prod_pi[a], fill);
    mean_field.offer(prod_pi[a], prod_p[a], fill);
    combined.offer(g[a], prod_p[a], fill);
  }
  Universe u{n, static_cast<double>(t), 0, coverage, "nonempty site subsets at a fixed step"};
  return {finish("harris_product", u, harris, opt.tol, harris_ok),
          finish("mean_field_product", u, mean_field, opt.tol, mf_ok),
          finish("single_time_orthant", u, combined, opt.tol, mf_ok)};
}

PathOrthantReport path_orthant_check(const ModelSpec& spec, const BitState& x0, std::size_t m,
                                     const OrderOptions& opt) {
  if (x0.size() != spec.n()) throw DimensionError("initial state does not match model");
  if (m == 0) throw ParameterError("path check needs m >= 1");
  if (m > opt.limits.max_path_bits) {
    throw CapacityError("path check enumerates 2^m patterns per site; m = " + std::to_string(m) + " exceeds " +
                        std::to_string(opt.limits.max_path_bits));
  }
  const std::size_t n = spec.n();
  const bool certified = certify(spec, opt, theorem3_hypotheses);
  const auto schedules = build_schedules(spec, x0, m);
  const std::size_t codes = lattice_size(m);

  Tracker single, recursion;
  double gap = 0.0;
  std::vector<std::uint8_t> omega(m);
  std::vector<double> px(codes);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& sch = schedules[i];
    for (Word code = 0; code < codes; ++code) {
      for (std::size_t t = 0; t < m; ++t) omega[t] = test_bit(code, t) ? 1 : 0;
      px[code] = constrained_probability(spec, x0, single_site_pattern(i, omega), opt.limits);
    }
    for (Word code = 0; code < codes; ++code) {
      for (std::size_t t = 0; t < m; ++t) omega[t] = test_bit(code, t) ? 1 : 0;
      auto fill = [&](Witness& w) {
        w.site = i;
        w.omega = omega;
      };
      const double pw = indep_path_probability(sch, omega);
      single.offer(px[code], pw, fill);
      gap = std::max(gap, std::abs(pw - indep_path_probability_recursive(sch, omega)));

      const std::size_t phi = last_constrained_step(omega);
      if (phi == 0) continue;
      if (phi == 1) {
        recursion.offer(px[code], 1.0 - sch.occupancy[1], fill);
        continue;
      }
      const double s = sch.survival[phi - 1], c = sch.colonisation[phi - 1];
      const Word released = code | (Word{1} << (phi - 1));
      const Word held = released & ~(Word{1} << (phi - 2));
      recursion.offer(px[code], (1.0 - s) * px[released] + (s - c) * px[held], fill);
    }
  }

  auto patterns = enumerate_patterns(n, m, opt.max_total_constraints);
  const std::size_t total = patterns.size();
  if (total > opt.max_patterns) {
    const UniformArray U(opt.seed, streams::patterns);
    std::vector<MultiSitePattern> sample;
    sample.reserve(opt.max_patterns);
    for (std::size_t s = 0; s < opt.max_patterns; ++s) {
      const auto k = static_cast<std::size_t>(U(static_cast<std::uint32_t>(s), 0, 0) * static_cast<double>(total));
      sample.push_back(patterns[std::min(k, total - 1)]);
    }
    patterns.swap(sample);
  }
  Tracker multi;
  for (const auto& pat : patterns) {
    double pw = 1.0;
    for (const auto& e : pat.entries) {
      std::vector<std::uint8_t> om(m, 1);
      for (auto t : e.times) om[t - 1] = 0;
      pw *= indep_path_probability(schedules[e.site], om);
    }
    multi.offer(constrained_probability(spec, x0, pat, opt.limits), pw, [&](Witness& w) { w.pattern = pat; });
  }

  const Universe su{n, static_cast<double>(m), 0, 1.0, "sites x omega in {0,1}^m"};
  const Universe mu{n, static_cast<double>(m), 0,
                    total == 0 ? 1.0 : std::min(1.0, static_cast<double>(patterns.size()) / static_cast<double>(total)),
                    "joint patterns with at most " + std::to_string(opt.max_total_constraints) + " constraints"};
  PathOrthantReport out;
  out.single_site = finish("path_orthant", su, single, opt.tol, certified);
  out.multisite = finish("multisite_orthant", mu, multi, opt.tol, certified);
  out.recursion_bound = finish("recursion_lower_bound", su, recursion, opt.tol, certified);
  out.decomposition_gap = gap;
  return out;
}

OrderReport positive_correlation_check(const DistVector& dist, const OrderOptions& opt) {
  const std::size_t n = dist.n;
  if (dist.probs.size() != lattice_size(n)) throw DimensionError("distribution must have 2^n entries");
  const auto pi = exact_marginals(dist);
  const auto g = vacancy_table(dist);
  const auto prod = product_table(pi);
  double coverage = 1.0;
  Tracker tr;
  for (Word a : subset_universe(n, opt, coverage)) tr.offer(g[a], prod[a], [&](Witness& w) { w.subset = a; });
  Universe u{n, 0.0, 0, coverage, "nonempty site subsets"};
  return finish("positive_correlation", u, tr, opt.tol, opt.certified.value_or(true));
}

std::vector<MultiSitePattern> enumerate_patterns(std::size_t n, std::size_t m, std::size_t max_constraints) {
  if (m > 16) throw CapacityError("pattern enumeration supports m <= 16");
  std::vector<MultiSitePattern> out;
  MultiSitePattern current;
  add_patterns(0, n, m, max_constraints, current, out);
  return out;
}

}  // namespace occ
