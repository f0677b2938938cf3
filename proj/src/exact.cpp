#include "occ/exact.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "occ/errors.hpp"
#include "occ/parallel.hpp"

namespace occ {

namespace {

void require_sites(std::size_t n, std::size_t cap, const char* what) {
  if (n > cap) {
    throw CapacityError(std::string(what) + ": n = " + std::to_string(n) + " exceeds the cap of " +
                        std::to_string(cap) + " sites");
  }
}

void require_paths(std::size_t n, std::size_t horizon, const ExactLimits& limits) {
  if (n * horizon > limits.max_path_bits) {
    throw CapacityError("trajectory enumeration: 2^(n*m) = 2^" + std::to_string(n * horizon) + " exceeds 2^" +
                        std::to_string(limits.max_path_bits));
  }
}

// One pull step out[y] = sum_x in[x] T(x, y) with T the product kernel of `q`.
// Each y is owned by a single task and sums over x in increasing order.
void product_kernel_step(std::size_t n, const std::vector<double>& q, const std::vector<double>& in,
                         std::vector<double>& out) {
  const std::size_t states = lattice_size(n);
  std::vector<Word> support;
  for (Word x = 0; x < states; ++x)
    if (in[x] != 0.0) support.push_back(x);
  out.assign(states, 0.0);
  parallel_for(states, [&](std::size_t y) {
    double acc = 0.0;
    for (Word x : support) {
      const double* qx = q.data() + x * n;
      double t = in[x];
      for (std::size_t i = 0; i < n; ++i) t *= test_bit(y, i) ? qx[i] : 1.0 - qx[i];
      acc += t;
    }
    out[y] = acc;
  });
}

// Depth-first sum over trajectories avoiding the per-step zero masks.
double enumerate_paths(const TransitionMatrix& T, const std::vector<Word>& masks, std::size_t t, Word x) {
  if (t + 1 >= masks.size()) return 1.0;
  const Word mask = masks[t + 1];
  double acc = 0.0;
  const auto row = T.row(x);
  for (Word y = 0; y < T.states(); ++y) {
    if ((y & mask) != 0 || row[y] == 0.0) continue;
    acc += row[y] * enumerate_paths(T, masks, t + 1, y);
  }
  return acc;
}

double sum_masked(const std::vector<double>& v, Word mask) {
  double acc = 0.0;
  for (Word x = 0; x < v.size(); ++x)
    if ((x & mask) == 0) acc += v[x];
  return acc;
}

void zero_masked(std::vector<double>& v, Word mask) {
  if (mask == 0) return;
  for (Word x = 0; x < v.size(); ++x)
    if ((x & mask) != 0) v[x] = 0.0;
}

std::vector<Word> omega_masks(const TimePattern& pattern, std::size_t n) {
  if (pattern.site >= n) throw DimensionError("time pattern site out of range");
  if (pattern.omega.empty()) throw ParameterError("time pattern needs m >= 1");
  for (auto w : pattern.omega)
    if (w > 1) throw ParameterError("time pattern entries must be 0 or 1");
  const std::size_t last = last_constrained_step(pattern.omega);
  std::vector<Word> masks(last + 1, 0);
  for (std::size_t t = 1; t <= last; ++t)
    if (pattern.omega[t - 1] == 0) masks[t] = Word{1} << pattern.site;
  return masks;
}

// Uniformization of a possibly sub-stochastic row vector; the truncated
// Poisson mixture is divided by the retained Poisson mass.
std::vector<double> uniformize(std::size_t n, const std::vector<double>& rates, std::vector<double> v, double t,
                               double tail_tol) {
  const std::size_t states = lattice_size(n);
  std::vector<double> exit(states, 0.0);
  double uniform_rate = 0.0;
  for (Word x = 0; x < states; ++x) {
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) e += rates[x * n + i];
    exit[x] = e;
    uniform_rate = std::max(uniform_rate, e);
  }
  if (t == 0.0 || uniform_rate == 0.0) return v;

  const double mean = uniform_rate * t;
  const double log_mean = std::log(mean);
  const auto k_max = static_cast<std::size_t>(std::ceil(mean + 50.0 * std::sqrt(mean) + 100.0));
  std::vector<double> acc(states, 0.0), next(states);
  double retained = 0.0;
  for (std::size_t k = 0;; ++k) {
    const double w = std::exp(-mean + static_cast<double>(k) * log_mean - std::lgamma(static_cast<double>(k) + 1.0));
    for (std::size_t s = 0; s < states; ++s) acc[s] += w * v[s];
    retained += w;
    if ((static_cast<double>(k) >= mean && 1.0 - retained < tail_tol) || k >= k_max) break;
    parallel_for(states, [&](std::size_t y) {
      double out = v[y] * (1.0 - exit[y] / uniform_rate);
      for (std::size_t i = 0; i < n; ++i) {
        const Word x = flip_bit(y, i);
        out += v[x] * (rates[x * n + i] / uniform_rate);
      }
      next[y] = out;
    });
    v.swap(next);
  }
  for (auto& a : acc) a /= retained;
  return acc;
}

}  // namespace

// ---------------------------------------------------------------------------

DistVector DistVector::point_mass(const BitState& x, const ExactLimits& limits) {
  require_sites(x.size(), limits.max_sites, "point mass");
  DistVector d{x.size(), std::vector<double>(lattice_size(x.size()), 0.0)};
  d.probs[x.word()] = 1.0;
  return d;
}

double DistVector::sum() const { return std::accumulate(probs.begin(), probs.end(), 0.0); }

TransitionMatrix::TransitionMatrix(std::size_t n, std::vector<double> entries) : n_(n), entries_(std::move(entries)) {
  if (entries_.size() != states() * states()) throw DimensionError("transition matrix must be 2^n x 2^n");
}

GeneratorMatrix::GeneratorMatrix(std::size_t n, std::vector<double> entries) : n_(n), entries_(std::move(entries)) {
  if (entries_.size() != states() * states()) throw DimensionError("generator matrix must be 2^n x 2^n");
}

std::size_t MultiSitePattern::horizon() const {
  std::size_t h = 0;
  for (const auto& e : entries)
    for (auto t : e.times) h = std::max(h, t);
  return h;
}

std::vector<Word> MultiSitePattern::step_masks() const {
  std::vector<Word> masks(horizon() + 1, 0);
  for (const auto& e : entries)
    for (auto t : e.times) masks[t] |= Word{1} << e.site;
  return masks;
}

void MultiSitePattern::validate(std::size_t n) const {
  for (std::size_t a = 0; a < entries.size(); ++a) {
    if (entries[a].site >= n) throw DimensionError("pattern site out of range");
    for (std::size_t b = 0; b < a; ++b)
      if (entries[b].site == entries[a].site) throw ParameterError("pattern sites must be distinct");
    auto times = entries[a].times;
    std::sort(times.begin(), times.end());
    if (std::adjacent_find(times.begin(), times.end()) != times.end())
      throw ParameterError("pattern times must be distinct per site");
    for (auto t : times)
      if (t == 0) throw ParameterError("pattern times must be positive");
  }
}

std::size_t last_constrained_step(std::span<const std::uint8_t> omega) {
  for (std::size_t j = omega.size(); j > 0; --j)
    if (omega[j - 1] == 0) return j;
  return 0;
}

std::vector<double> occupation_table(const ModelSpec& spec, const ExactLimits& limits) {
  const std::size_t n = spec.n();
  require_sites(n, limits.max_sites, "occupation table");
  const std::size_t states = lattice_size(n);
  std::vector<double> q(states * n);
  parallel_for(states, [&](std::size_t x) {
    for (std::size_t i = 0; i < n; ++i) q[x * n + i] = spec.occupation_probability(i, x);
  });
  return q;
}

TransitionMatrix build_transition_matrix(const ModelSpec& spec, const ExactLimits& limits) {
  const std::size_t n = spec.n();
  require_sites(n, limits.max_dense_sites, "dense transition matrix");
  const auto q = occupation_table(spec, limits);
  const std::size_t states = lattice_size(n);
  std::vector<double> entries(states * states);
  parallel_for(states, [&](std::size_t x) {
    const double* qx = q.data() + x * n;
    double* row = entries.data() + x * states;
    // Doubling expansion of the product measure over sites.
    row[0] = 1.0;
    for (std::size_t i = 0, filled = 1; i < n; ++i, filled <<= 1) {
      for (std::size_t k = 0; k < filled; ++k) {
        row[k + filled] = row[k] * qx[i];
        row[k] *= 1.0 - qx[i];
      }
    }
  });
  return TransitionMatrix(n, std::move(entries));
}

DistVector propagate(const ModelSpec& spec, const DistVector& start, std::size_t steps, const ExactLimits& limits) {
  const std::size_t n = spec.n();
  if (start.n != n || start.probs.size() != lattice_size(n)) throw DimensionError("distribution does not match model");
  require_sites(n, limits.max_sites, "exact distribution");
  DistVector out = start;
  if (steps == 0) return out;
  const auto q = occupation_table(spec, limits);
  std::vector<double> next;
  for (std::size_t s = 0; s < steps; ++s) {
    product_kernel_step(n, q, out.probs, next);
    out.probs.swap(next);
  }
  normalise(out);
  return out;
}

DistVector exact_distribution(const ModelSpec& spec, const BitState& x0, std::size_t steps,
                              const ExactLimits& limits) {
  if (x0.size() != spec.n()) throw DimensionError("initial state does not match model");
  require_sites(spec.n(), limits.max_sites, "exact distribution");
  return propagate(spec, DistVector::point_mass(x0), steps, limits);
}

ProbVector exact_marginals(const DistVector& dist) {
  ProbVector pi(dist.n, 0.0);
  for (Word x = 0; x < dist.probs.size(); ++x) {
    if (dist.probs[x] == 0.0) continue;
    for (std::size_t i = 0; i < dist.n; ++i)
      if (test_bit(x, i)) pi[i] += dist.probs[x];
  }
  return pi;
}

double exact_path_probability(const TransitionMatrix& T, Word x0, const TimePattern& pattern,
                              const ExactLimits& limits) {
  const auto masks = omega_masks(pattern, T.n());
  if (masks.size() == 1) return 1.0;
  require_paths(T.n(), masks.size() - 1, limits);
  return enumerate_paths(T, masks, 0, x0);
}

double exact_path_probability(const ModelSpec& spec, const BitState& x0, const TimePattern& pattern,
                              const ExactLimits& limits) {
  if (x0.size() != spec.n()) throw DimensionError("initial state does not match model");
  const auto masks = omega_masks(pattern, spec.n());
  if (masks.size() == 1) return 1.0;
  require_paths(spec.n(), masks.size() - 1, limits);
  return exact_path_probability(build_transition_matrix(spec, limits), x0.word(), pattern, limits);
}

double exact_path_probability_conditioned(const ModelSpec& spec, const BitState& x0, const TimePattern& pattern,
                                          const ExactLimits& limits) {
  const std::size_t n = spec.n();
  if (x0.size() != n) throw DimensionError("initial state does not match model");
  require_sites(n, limits.max_sites, "exact path probability");
  const auto masks = omega_masks(pattern, n);
  const std::size_t last = masks.size() - 1;
  if (last == 0) return 1.0;
  const auto q = occupation_table(spec, limits);
  std::vector<double> v(lattice_size(n), 0.0), next;
  v[x0.word()] = 1.0;
  for (std::size_t t = 1; t < last; ++t) {
    product_kernel_step(n, q, v, next);
    v.swap(next);
    zero_masked(v, masks[t]);
  }
  const std::size_t i = pattern.site;
  double acc = 0.0;
  for (Word x = 0; x < v.size(); ++x) {
    if (v[x] == 0.0) continue;
    const double s = spec.survival(i, x);
    const double c = spec.colonisation(i, x);
    const double vacant = test_bit(x, i) ? 0.0 : 1.0;
    acc += v[x] * ((1.0 - s) + vacant * (s - c));
  }
  return acc;
}

double exact_multisite_probability(const TransitionMatrix& T, Word x0, const MultiSitePattern& pattern,
                                   const ExactLimits& limits) {
  pattern.validate(T.n());
  const auto masks = pattern.step_masks();
  if (masks.size() == 1) return 1.0;
  require_paths(T.n(), masks.size() - 1, limits);
  return enumerate_paths(T, masks, 0, x0);
}

double exact_multisite_probability(const ModelSpec& spec, const BitState& x0, const MultiSitePattern& pattern,
                                   const ExactLimits& limits) {
  if (x0.size() != spec.n()) throw DimensionError("initial state does not match model");
  pattern.validate(spec.n());
  const auto masks = pattern.step_masks();
  if (masks.size() == 1) return 1.0;
  require_paths(spec.n(), masks.size() - 1, limits);
  return exact_multisite_probability(build_transition_matrix(spec, limits), x0.word(), pattern, limits);
}

double constrained_probability(const ModelSpec& spec, const BitState& x0, const MultiSitePattern& pattern,
                               const ExactLimits& limits) {
  const std::size_t n = spec.n();
  if (x0.size() != n) throw DimensionError("initial state does not match model");
  require_sites(n, limits.max_sites, "constrained probability");
  pattern.validate(n);
  const auto masks = pattern.step_masks();
  if (masks.size() == 1) return 1.0;
  const auto q = occupation_table(spec, limits);
  std::vector<double> v(lattice_size(n), 0.0), next;
  v[x0.word()] = 1.0;
  for (std::size_t t = 1; t < masks.size(); ++t) {
    product_kernel_step(n, q, v, next);
    v.swap(next);
    zero_masked(v, masks[t]);
  }
  return std::accumulate(v.begin(), v.end(), 0.0);
}

// ---------------------------------------------------------------------------
// Spin systems

std::vector<double> flip_rate_table(const SpinSpec& spec, const ExactLimits& limits) {
  const std::size_t n = spec.n();
  require_sites(n, limits.max_sites, "flip rate table");
  const std::size_t states = lattice_size(n);
  std::vector<double> r(states * n);
  parallel_for(states, [&](std::size_t x) {
    for (std::size_t i = 0; i < n; ++i) r[x * n + i] = spec.flip_rate(i, x);
  });
  return r;
}

GeneratorMatrix build_spin_generator(const SpinSpec& spec, const ExactLimits& limits) {
  const std::size_t n = spec.n();
  require_sites(n, limits.max_dense_sites, "dense generator");
  const auto r = flip_rate_table(spec, limits);
  const std::size_t states = lattice_size(n);
  std::vector<double> entries(states * states, 0.0);
  for (Word x = 0; x < states; ++x) {
    double exit = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      entries[x * states + flip_bit(x, i)] = r[x * n + i];
      exit += r[x * n + i];
    }
    entries[x * states + x] = -exit;
  }
  return GeneratorMatrix(n, std::move(entries));
}

DistVector spin_law(const SpinSpec& spec, const DistVector& start, double t, double tail_tol,
                    const ExactLimits& limits) {
  const std::size_t n = spec.n();
  if (start.n != n || start.probs.size() != lattice_size(n)) throw DimensionError("distribution does not match model");
  if (!(t >= 0.0) || !std::isfinite(t)) throw ParameterError("spin_law needs a finite t >= 0");
  if (!(tail_tol > 0.0)) throw ParameterError("spin_law needs tail_tol > 0");
  require_sites(n, limits.max_sites, "spin law");
  const auto rates = flip_rate_table(spec, limits);
  DistVector out{n, uniformize(n, rates, start.probs, t, tail_tol)};
  normalise(out);
  return out;
}

DistVector spin_law(const SpinSpec& spec, const BitState& x0, double t, double tail_tol, const ExactLimits& limits) {
  if (x0.size() != spec.n()) throw DimensionError("initial state does not match model");
  require_sites(spec.n(), limits.max_sites, "spin law");
  return spin_law(spec, DistVector::point_mass(x0), t, tail_tol, limits);
}

double spin_constrained_probability(const SpinSpec& spec, const BitState& x0, const RealTimePattern& pattern,
                                    double tail_tol, const ExactLimits& limits) {
  const std::size_t n = spec.n();
  if (x0.size() != n) throw DimensionError("initial state does not match model");
  require_sites(n, limits.max_sites, "spin constrained probability");
  std::map<double, Word> events;
  for (const auto& e : pattern.entries) {
    if (e.site >= n) throw DimensionError("pattern site out of range");
    for (double t : e.times) {
      if (!(t >= 0.0) || !std::isfinite(t)) throw ParameterError("pattern times must be finite and >= 0");
      events[t] |= Word{1} << e.site;
    }
  }
  const auto rates = flip_rate_table(spec, limits);
  std::vector<double> v(lattice_size(n), 0.0);
  v[x0.word()] = 1.0;
  double now = 0.0;
  for (const auto& [t, mask] : events) {
    v = uniformize(n, rates, std::move(v), t - now, tail_tol);
    zero_masked(v, mask);
    now = t;
  }
  return sum_masked(v, 0);
}

ProbVector spin_drift(const SpinSpec& spec, const DistVector& dist) {
  const std::size_t n = spec.n();
  ProbVector drift(n, 0.0);
  for (Word x = 0; x < dist.probs.size(); ++x) {
    const double w = dist.probs[x];
    if (w == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i)
      drift[i] += w * (test_bit(x, i) ? -spec.death(i, x) : spec.birth(i, x));
  }
  return drift;
}

double total_variation(const DistVector& a, const DistVector& b) {
  if (a.probs.size() != b.probs.size()) throw DimensionError("distributions differ in size");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.probs.size(); ++k) acc += std::abs(a.probs[k] - b.probs[k]);
  return 0.5 * acc;
}

void normalise(DistVector& dist) {
  double total = 0.0;
  for (auto& p : dist.probs) {
    if (p < 0.0) p = 0.0;
    total += p;
  }
  if (total > 0.0)
    for (auto& p : dist.probs) p /= total;
}

}  // namespace occ
