#include "occ/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "occ/errors.hpp"
#include "occ/random.hpp"

namespace occ {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

bool finite_in(double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; }

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

constexpr std::size_t kMaxTableDim = 24;

}  // namespace

// ---------------------------------------------------------------------------
// FunctionFamily

std::string_view to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::constant: return "constant";
    case FamilyKind::affine_saturated: return "affine-saturated";
    case FamilyKind::product_form: return "product-form";
    case FamilyKind::hanski_incidence: return "hanski-incidence";
    case FamilyKind::tabulated_multilinear: return "tabulated-multilinear";
  }
  return "unknown";
}

FamilyKind parse_family_kind(std::string_view name) {
  for (auto k : {FamilyKind::constant, FamilyKind::affine_saturated, FamilyKind::product_form,
                 FamilyKind::hanski_incidence, FamilyKind::tabulated_multilinear}) {
    if (to_string(k) == name) return k;
  }
  throw ParameterError("unknown function family '" + std::string(name) + "'");
}

FunctionFamily FunctionFamily::constant(std::size_t dim, double value) {
  require(dim >= 1, "constant family needs dimension >= 1");
  require(finite_in(value, 0.0, 1.0), "constant value must lie in [0,1]");
  return FunctionFamily(dim, Constant{value});
}

FunctionFamily FunctionFamily::affine_saturated(double intercept, std::vector<double> weights) {
  require(!weights.empty(), "affine-saturated family needs at least one weight");
  require(std::isfinite(intercept) && intercept >= 0.0, "affine-saturated intercept must be >= 0");
  for (double w : weights) require(std::isfinite(w) && w >= 0.0, "affine-saturated weights must be >= 0");
  const std::size_t dim = weights.size();
  return FunctionFamily(dim, AffineSaturated{intercept, std::move(weights)});
}

FunctionFamily FunctionFamily::product_form(std::vector<double> beta) {
  require(!beta.empty(), "product-form family needs at least one coefficient");
  for (double b : beta) require(finite_in(b, 0.0, 1.0), "product-form coefficients must lie in [0,1]");
  const std::size_t dim = beta.size();
  return FunctionFamily(dim, ProductForm{std::move(beta)});
}

FunctionFamily FunctionFamily::hanski_incidence(std::vector<double> weights, double half_saturation) {
  require(!weights.empty(), "hanski-incidence family needs at least one weight");
  for (double w : weights) require(std::isfinite(w) && w >= 0.0, "hanski-incidence weights must be >= 0");
  require(std::isfinite(half_saturation) && half_saturation > 0.0, "hanski-incidence y must be > 0");
  const std::size_t dim = weights.size();
  return FunctionFamily(dim, HanskiIncidence{std::move(weights), half_saturation});
}

FunctionFamily FunctionFamily::tabulated_multilinear(std::size_t dim, std::vector<double> table) {
  require(dim >= 1 && dim <= kMaxTableDim, "tabulated-multilinear dimension must be in [1, 24]");
  require(table.size() == lattice_size(dim), "tabulated-multilinear table must have 2^n entries");
  for (double v : table) require(finite_in(v, 0.0, 1.0), "tabulated-multilinear entries must lie in [0,1]");
  return FunctionFamily(dim, TabulatedMultilinear{std::move(table)});
}

FunctionFamily FunctionFamily::with_output(double offset, double slope) const {
  require(std::isfinite(offset) && std::isfinite(slope), "output map must be finite");
  FunctionFamily out = *this;
  out.offset_ = offset + slope * offset_;
  out.slope_ = slope * slope_;
  return out;
}

FunctionFamily FunctionFamily::pinned(std::size_t coord, double value) const {
  require(coord < dim_, "pinned coordinate out of range");
  require(finite_in(value, 0.0, 1.0), "pinned value must lie in [0,1]");
  FunctionFamily out = *this;
  std::erase_if(out.pins_, [coord](const auto& pin) { return pin.first == coord; });
  out.pins_.emplace_back(coord, value);
  return out;
}

double FunctionFamily::eval_shape(const double* p) const {
  return std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Constant>) {
          return s.value;
        } else if constexpr (std::is_same_v<S, AffineSaturated>) {
          double acc = s.intercept;
          for (std::size_t j = 0; j < dim_; ++j) acc += s.weights[j] * p[j];
          return std::min(1.0, acc);
        } else if constexpr (std::is_same_v<S, ProductForm>) {
          double miss = 1.0;
          for (std::size_t j = 0; j < dim_; ++j) miss *= 1.0 - s.beta[j] * p[j];
          return 1.0 - miss;
        } else if constexpr (std::is_same_v<S, HanskiIncidence>) {
          double m = 0.0;
          for (std::size_t j = 0; j < dim_; ++j) m += s.weights[j] * p[j];
          const double m2 = m * m;
          return m2 / (m2 + s.half_saturation * s.half_saturation);
        } else {
          // Collapse one coordinate at a time, highest bit first.
          thread_local std::vector<double> work;
          work.assign(s.table.begin(), s.table.end());
          for (std::size_t i = dim_; i-- > 0;) {
            const std::size_t half = std::size_t{1} << i;
            const double pi = p[i];
            for (std::size_t k = 0; k < half; ++k) work[k] = (1.0 - pi) * work[k] + pi * work[k + half];
          }
          return work[0];
        }
      },
      shape_);
}

double FunctionFamily::eval_raw(std::span<const double> p) const {
  if (p.size() != dim_) {
    throw DimensionError("function family of dimension " + std::to_string(dim_) + " evaluated at a point of dimension " +
                         std::to_string(p.size()));
  }
  if (pins_.empty()) return clamp01(eval_shape(p.data()));
  std::array<double, 64> small{};
  std::vector<double> large;
  double* buf = small.data();
  if (dim_ > small.size()) {
    large.resize(dim_);
    buf = large.data();
  }
  std::copy(p.begin(), p.end(), buf);
  for (const auto& [coord, value] : pins_) buf[coord] = value;
  return clamp01(eval_shape(buf));
}

double FunctionFamily::eval(std::span<const double> p) const { return offset_ + slope_ * eval_raw(p); }

double FunctionFamily::eval_lattice(Word x) const {
  if (pins_.empty() && dim_ <= 64) {
    if (const auto* t = std::get_if<TabulatedMultilinear>(&shape_)) {
      return offset_ + slope_ * t->table[static_cast<std::size_t>(x)];
    }
  }
  if (dim_ > 64) throw DimensionError("lattice evaluation needs dimension <= 64");
  std::array<double, 64> point{};
  lattice_point(x, dim_, point.data());
  return eval(std::span<const double>(point.data(), dim_));
}

// ---------------------------------------------------------------------------
// ModelSpec / SpinSpec

namespace {

void require_dims(const std::vector<FunctionFamily>& a, const std::vector<FunctionFamily>& b, const char* what) {
  if (a.empty()) throw ParameterError(std::string(what) + ": model needs at least one site");
  if (a.size() != b.size()) throw DimensionError(std::string(what) + ": family lists differ in length");
  const std::size_t n = a.size();
  if (n > 64) throw CapacityError(std::string(what) + ": at most 64 sites are supported");
  for (const auto* list : {&a, &b}) {
    for (const auto& f : *list) {
      if (f.dim() != n) {
        throw DimensionError(std::string(what) + ": family of dimension " + std::to_string(f.dim()) +
                             " in a model with " + std::to_string(n) + " sites");
      }
    }
  }
}

}  // namespace

ModelSpec::ModelSpec(std::vector<FunctionFamily> colonisation, std::vector<FunctionFamily> survival)
    : colonisation_(std::move(colonisation)), survival_(std::move(survival)) {
  require_dims(colonisation_, survival_, "occupancy model");
}

double ModelSpec::colonisation(std::size_t site, std::span<const double> p) const {
  return clamp01(colonisation_.at(site).eval(p));
}
double ModelSpec::survival(std::size_t site, std::span<const double> p) const {
  return clamp01(survival_.at(site).eval(p));
}
double ModelSpec::colonisation(std::size_t site, Word x) const { return clamp01(colonisation_.at(site).eval_lattice(x)); }
double ModelSpec::survival(std::size_t site, Word x) const { return clamp01(survival_.at(site).eval_lattice(x)); }

double ModelSpec::occupation_probability(std::size_t site, Word x) const {
  return test_bit(x, site) ? survival(site, x) : colonisation(site, x);
}

SpinSpec::SpinSpec(std::vector<FunctionFamily> birth, std::vector<FunctionFamily> death)
    : birth_(std::move(birth)), death_(std::move(death)) {
  require_dims(birth_, death_, "spin system");
  for (const auto* list : {&birth_, &death_}) {
    for (const auto& f : *list) {
      if (f.lower_bound() < 0.0) throw ParameterError("spin rates must be nonnegative on [0,1]^n");
    }
  }
}

double SpinSpec::birth(std::size_t site, std::span<const double> p) const {
  return std::max(0.0, birth_.at(site).eval(p));
}
double SpinSpec::death(std::size_t site, std::span<const double> p) const {
  return std::max(0.0, death_.at(site).eval(p));
}
double SpinSpec::birth(std::size_t site, Word x) const { return std::max(0.0, birth_.at(site).eval_lattice(x)); }
double SpinSpec::death(std::size_t site, Word x) const { return std::max(0.0, death_.at(site).eval_lattice(x)); }

double SpinSpec::flip_rate(std::size_t site, Word x) const {
  return test_bit(x, site) ? death(site, x) : birth(site, x);
}

// ---------------------------------------------------------------------------
// Hypothesis checks

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

std::string_view to_string(Hypothesis h) {
  switch (h) {
    case Hypothesis::colonisation_increasing: return "colonisation_increasing";
    case Hypothesis::survival_increasing: return "survival_increasing";
    case Hypothesis::colonisation_concave: return "colonisation_concave";
    case Hypothesis::survival_concave: return "survival_concave";
    case Hypothesis::gap_decreasing: return "survival_minus_colonisation_decreasing";
    case Hypothesis::gap_nonnegative: return "survival_minus_colonisation_nonnegative";
    case Hypothesis::gap_convex: return "survival_minus_colonisation_convex";
    case Hypothesis::birth_increasing: return "birth_increasing";
    case Hypothesis::birth_concave: return "birth_concave";
    case Hypothesis::death_decreasing: return "death_decreasing";
    case Hypothesis::death_convex: return "death_convex";
    case Hypothesis::total_increasing: return "birth_plus_death_increasing";
    case Hypothesis::total_concave: return "birth_plus_death_concave";
    case Hypothesis::birth_lipschitz: return "birth_lipschitz";
    case Hypothesis::death_lipschitz: return "death_lipschitz";
  }
  return "unknown";
}

Verdict AssumptionReport::overall() const {
  Verdict v = Verdict::pass;
  for (const auto& r : results) {
    if (r.verdict == Verdict::fail) return Verdict::fail;
    if (r.verdict == Verdict::inconclusive) v = Verdict::inconclusive;
  }
  return v;
}

bool AssumptionReport::certifies(std::span<const Hypothesis> hypotheses) const {
  for (const auto& r : results) {
    if (std::find(hypotheses.begin(), hypotheses.end(), r.hypothesis) != hypotheses.end() &&
        r.verdict != Verdict::pass) {
      return false;
    }
  }
  return true;
}

const HypothesisResult* AssumptionReport::find(Hypothesis h, std::size_t site) const {
  for (const auto& r : results)
    if (r.hypothesis == h && r.site == site) return &r;
  return nullptr;
}

namespace {

using ScalarFn = std::function<double(std::span<const double>)>;

enum class Test { increasing, decreasing, concave, convex, nonnegative, lipschitz };

struct Tracker {
  double worst = std::numeric_limits<double>::infinity();
  ProbVector x, y;
  std::size_t count = 0;

  void offer(double margin, std::span<const double> a, std::span<const double> b) {
    ++count;
    if (margin < worst) {
      worst = margin;
      x.assign(a.begin(), a.end());
      y.assign(b.begin(), b.end());
    }
  }
};

class HypothesisSampler {
 public:
  HypothesisSampler(std::size_t n, Hypothesis h, const CheckOptions& opt)
      : n_(n), rng_(opt.seed, streams::assumptions + static_cast<std::uint32_t>(h)), opt_(opt) {}

  void draw(std::size_t sample, std::uint32_t slot, ProbVector& out) const {
    out.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      out[j] = rng_(static_cast<std::uint32_t>(sample), slot, static_cast<std::uint32_t>(j));
    }
  }

  HypothesisResult run(Hypothesis h, std::size_t site, Test test, const ScalarFn& fn) const {
    // Rounding allowance for large-valued rates; negligible for probabilities.
    double scale = 0.0;
    auto f = [&](std::span<const double> p) {
      const double v = fn(p);
      scale = std::max(scale, std::abs(v));
      return v;
    };
    Tracker tr;
    ProbVector x, y, lo, hi, mid;
    const bool lattice = n_ <= opt_.lattice_pairs_max_n;
    std::vector<double> lattice_values;
    const bool need_values = n_ <= std::max(opt_.lattice_pairs_max_n, opt_.lattice_midpoints_max_n);
    if (need_values && test != Test::lipschitz) {
      lattice_values.resize(lattice_size(n_));
      for (Word w = 0; w < lattice_size(n_); ++w) lattice_values[w] = f(lattice_point(w, n_));
    }
    auto monotone_margin = [&](double f_lo, double f_hi) {
      return test == Test::increasing ? f_hi - f_lo : f_lo - f_hi;
    };

    switch (test) {
      case Test::increasing:
      case Test::decreasing: {
        for (std::size_t k = 0; k < opt_.samples; ++k) {
          draw(k, 0, x);
          draw(k, 1, y);
          lo.resize(n_);
          hi.resize(n_);
          for (std::size_t j = 0; j < n_; ++j) {
            lo[j] = std::min(x[j], y[j]);
            hi[j] = std::max(x[j], y[j]);
          }
          tr.offer(monotone_margin(f(lo), f(hi)), lo, hi);
        }
        if (lattice) {
          const Word full = full_mask(n_);
          for (Word a = 0; a <= full; ++a) {
            const Word free = full & ~a;
            // Nonempty submasks s of the complement give all b > a.
            for (Word s = free; s != 0; s = (s - 1) & free) {
              const Word b = a | s;
              const double m = monotone_margin(lattice_values[a], lattice_values[b]);
              if (m < tr.worst) {
                tr.offer(m, lattice_point(a, n_), lattice_point(b, n_));
              } else {
                ++tr.count;
              }
            }
          }
        }
        break;
      }
      case Test::concave:
      case Test::convex: {
        const double sign = test == Test::concave ? 1.0 : -1.0;
        auto midpoint = [&](std::span<const double> a, std::span<const double> b, double fa, double fb) {
          mid.resize(n_);
          for (std::size_t j = 0; j < n_; ++j) mid[j] = 0.5 * (a[j] + b[j]);
          tr.offer(sign * (f(mid) - 0.5 * (fa + fb)), a, b);
        };
        for (std::size_t k = 0; k < opt_.samples; ++k) {
          draw(k, 0, x);
          draw(k, 1, y);
          midpoint(x, y, f(x), f(y));
        }
        if (n_ <= opt_.lattice_midpoints_max_n) {
          const Word full = full_mask(n_);
          for (Word a = 0; a <= full; ++a) {
            for (Word b = a + 1; b <= full; ++b) {
              midpoint(lattice_point(a, n_), lattice_point(b, n_), lattice_values[a], lattice_values[b]);
            }
          }
        }
        break;
      }
      case Test::nonnegative: {
        for (std::size_t k = 0; k < opt_.samples; ++k) {
          draw(k, 0, x);
          tr.offer(f(x), x, x);
        }
        if (lattice) {
          for (Word a = 0; a < lattice_size(n_); ++a) {
            if (lattice_values[a] < tr.worst) {
              const auto p = lattice_point(a, n_);
              tr.offer(lattice_values[a], p, p);
            } else {
              ++tr.count;
            }
          }
        }
        break;
      }
      case Test::lipschitz: {
        double best = 0.0;
        ProbVector bx, by;
        std::size_t count = 0;
        auto offer = [&](std::span<const double> a, std::span<const double> b) {
          double dist = 0.0;
          for (std::size_t j = 0; j < n_; ++j) dist += std::abs(a[j] - b[j]);
          ++count;
          if (dist <= 0.0) return;
          const double ratio = std::abs(f(a) - f(b)) / dist;
          if (!(ratio <= best)) {
            best = ratio;
            bx.assign(a.begin(), a.end());
            by.assign(b.begin(), b.end());
          }
        };
        for (std::size_t k = 0; k < opt_.samples; ++k) {
          draw(k, 0, x);
          draw(k, 1, y);
          offer(x, y);
          // Nearby pair probes local slopes.
          for (std::size_t j = 0; j < n_; ++j) y[j] = std::clamp(x[j] + 1e-4 * (y[j] - 0.5), 0.0, 1.0);
          offer(x, y);
        }
        if (lattice) {
          for (Word a = 0; a < lattice_size(n_); ++a)
            for (std::size_t j = 0; j < n_; ++j) offer(lattice_point(a, n_), lattice_point(flip_bit(a, j), n_));
        }
        HypothesisResult r{h, site, Verdict::pass, opt_.lipschitz_cap - best, bx, by, count, best};
        if (!std::isfinite(best) || best > opt_.lipschitz_cap) r.verdict = Verdict::inconclusive;
        return r;
      }
    }
    HypothesisResult r{h, site, Verdict::pass, tr.worst, tr.x, tr.y, tr.count};
    if (tr.worst < -(opt_.tol + 64.0 * std::numeric_limits<double>::epsilon() * scale)) r.verdict = Verdict::fail;
    return r;
  }

 private:
  std::size_t n_;
  UniformArray rng_;
  const CheckOptions& opt_;
};

void require_options(const CheckOptions& opt) {
  if (opt.samples < 1) throw ParameterError("assumption checks need samples >= 1");
  if (!(opt.tol >= 0.0)) throw ParameterError("assumption checks need tol >= 0");
}

}  // namespace

AssumptionReport check_assumptions(const ModelSpec& spec, const CheckOptions& options) {
  require_options(options);
  AssumptionReport report;
  report.samples = options.samples;
  report.tol = options.tol;
  report.seed = options.seed;
  const std::size_t n = spec.n();
  for (std::size_t i = 0; i < n; ++i) {
    ScalarFn c = [&, i](std::span<const double> p) { return spec.colonisation(i, p); };
    ScalarFn s = [&, i](std::span<const double> p) { return spec.survival(i, p); };
    ScalarFn gap = [&, i](std::span<const double> p) { return spec.survival(i, p) - spec.colonisation(i, p); };
    const std::pair<Hypothesis, std::pair<Test, const ScalarFn*>> plan[] = {
        {Hypothesis::colonisation_increasing, {Test::increasing, &c}},
        {Hypothesis::survival_increasing, {Test::increasing, &s}},
        {Hypothesis::colonisation_concave, {Test::concave, &c}},
        {Hypothesis::survival_concave, {Test::concave, &s}},
        {Hypothesis::gap_decreasing, {Test::decreasing, &gap}},
        {Hypothesis::gap_nonnegative, {Test::nonnegative, &gap}},
        {Hypothesis::gap_convex, {Test::convex, &gap}},
    };
    for (const auto& [h, job] : plan) {
      HypothesisSampler sampler(n, h, options);
      report.results.push_back(sampler.run(h, i, job.first, *job.second));
    }
  }
  return report;
}

AssumptionReport check_spin_assumptions(const SpinSpec& spec, const CheckOptions& options) {
  require_options(options);
  AssumptionReport report;
  report.samples = options.samples;
  report.tol = options.tol;
  report.seed = options.seed;
  const std::size_t n = spec.n();
  for (std::size_t i = 0; i < n; ++i) {
    ScalarFn lambda = [&, i](std::span<const double> p) { return spec.birth(i, p); };
    ScalarFn mu = [&, i](std::span<const double> p) { return spec.death(i, p); };
    ScalarFn total = [&, i](std::span<const double> p) { return spec.birth(i, p) + spec.death(i, p); };
    const std::pair<Hypothesis, std::pair<Test, const ScalarFn*>> plan[] = {
        {Hypothesis::birth_increasing, {Test::increasing, &lambda}},
        {Hypothesis::birth_concave, {Test::concave, &lambda}},
        {Hypothesis::death_decreasing, {Test::decreasing, &mu}},
        {Hypothesis::death_convex, {Test::convex, &mu}},
        {Hypothesis::total_increasing, {Test::increasing, &total}},
        {Hypothesis::total_concave, {Test::concave, &total}},
        {Hypothesis::birth_lipschitz, {Test::lipschitz, &lambda}},
        {Hypothesis::death_lipschitz, {Test::lipschitz, &mu}},
    };
    for (const auto& [h, job] : plan) {
      HypothesisSampler sampler(n, h, options);
      report.results.push_back(sampler.run(h, i, job.first, *job.second));
    }
  }
  return report;
}

double sampled_sup(const FunctionFamily& f, std::size_t samples, std::uint64_t seed) {
  const std::size_t n = f.dim();
  double sup = -std::numeric_limits<double>::infinity();
  if (n <= 16) {
    for (Word w = 0; w < lattice_size(n); ++w) sup = std::max(sup, f.eval_lattice(w));
  }
  UniformArray rng(seed, streams::assumptions + 0xFF);
  ProbVector p(n);
  for (std::size_t k = 0; k < samples; ++k) {
    for (std::size_t j = 0; j < n; ++j) p[j] = rng(static_cast<std::uint32_t>(k), 0, static_cast<std::uint32_t>(j));
    sup = std::max(sup, f.eval(p));
  }
  return sup;
}

}  // namespace occ
