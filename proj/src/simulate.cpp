#include "occ/simulate.hpp"

#include <cmath>
#include <ostream>

#include "occ/errors.hpp"
#include "occ/format.hpp"
#include "occ/meanfield.hpp"
#include "occ/parallel.hpp"

namespace occ {

namespace {

constexpr std::size_t kTableSites = 16;

// Occupation probabilities for the replicate loops, tabulated when small.
class OccupationKernel {
 public:
  explicit OccupationKernel(const ModelSpec& spec) : spec_(spec), n_(spec.n()) {
    if (n_ <= kTableSites) table_ = occupation_table(spec);
  }

  Word step(Word x, const UniformArray& U, std::uint32_t rep, std::uint32_t step) const {
    Word next = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double q = table_.empty() ? spec_.occupation_probability(i, x) : table_[x * n_ + i];
      if (U(rep, step, static_cast<std::uint32_t>(i)) < q) next |= Word{1} << i;
    }
    return next;
  }

 private:
  const ModelSpec& spec_;
  std::size_t n_;
  std::vector<double> table_;
};

void require_sim(const ModelSpec& spec, const BitState& x0, std::size_t reps) {
  if (x0.size() != spec.n()) throw DimensionError("initial state does not match model");
  if (reps < 2) throw ParameterError("simulation needs reps >= 2");
  if (reps > 0xFFFFFFFFull) throw CapacityError("simulation supports at most 2^32 - 1 replicates");
}

McEstimate bernoulli_estimate(std::uint64_t hits, std::size_t reps, std::uint64_t seed) {
  const double n = static_cast<double>(reps);
  const double mean = static_cast<double>(hits) / n;
  const double var = mean * (1.0 - mean) * n / (n - 1.0);
  return {mean, std::sqrt(std::max(0.0, var) / n), reps, seed};
}

// Occupancy counts [step][site] summed over replicates; counts are integers so
// the block decomposition does not affect the result.
template <class Path>
McMarginals count_marginals(std::size_t n, std::size_t steps, std::size_t reps, std::uint64_t seed, Path&& path) {
  const std::size_t blocks = block_count(reps);
  std::vector<std::vector<std::uint64_t>> counts(blocks, std::vector<std::uint64_t>((steps + 1) * n, 0));
  parallel_blocks(reps, [&](std::size_t b, std::size_t lo, std::size_t hi) {
    auto& c = counts[b];
    for (std::size_t r = lo; r < hi; ++r) {
      path(static_cast<std::uint32_t>(r), [&](std::size_t t, Word x) {
        for (std::size_t i = 0; i < n; ++i)
          if (test_bit(x, i)) ++c[t * n + i];
      });
    }
  });
  McMarginals out;
  out.by_step.assign(steps + 1, std::vector<McEstimate>(n));
  for (std::size_t t = 0; t <= steps; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t total = 0;
      for (const auto& c : counts) total += c[t * n + i];
      out.by_step[t][i] = bernoulli_estimate(total, reps, seed);
    }
  }
  return out;
}

}  // namespace

Word step_occupancy(const ModelSpec& spec, Word x, std::span<const double> uniforms) {
  if (uniforms.size() != spec.n()) throw DimensionError("one uniform per site is required");
  Word next = 0;
  for (std::size_t i = 0; i < spec.n(); ++i)
    if (uniforms[i] < spec.occupation_probability(i, x)) next |= Word{1} << i;
  return next;
}

Word step_indep(const ModelSpec& spec, Word w, std::span<const double> p_t, std::span<const double> uniforms) {
  if (uniforms.size() != spec.n()) throw DimensionError("one uniform per site is required");
  Word next = 0;
  for (std::size_t i = 0; i < spec.n(); ++i) {
    const double q = test_bit(w, i) ? spec.survival(i, p_t) : spec.colonisation(i, p_t);
    if (uniforms[i] < q) next |= Word{1} << i;
  }
  return next;
}

McMarginals simulate_marginals(const ModelSpec& spec, const BitState& x0, std::size_t steps, std::size_t reps,
                               std::uint64_t seed) {
  require_sim(spec, x0, reps);
  const OccupationKernel kernel(spec);
  const UniformArray U(seed);
  return count_marginals(spec.n(), steps, reps, seed, [&](std::uint32_t r, auto&& record) {
    Word x = x0.word();
    record(0, x);
    for (std::size_t t = 1; t <= steps; ++t) {
      x = kernel.step(x, U, r, static_cast<std::uint32_t>(t));
      record(t, x);
    }
  });
}

McMarginals simulate_indep_marginals(const ModelSpec& spec, const BitState& x0, std::size_t steps, std::size_t reps,
                                     std::uint64_t seed) {
  require_sim(spec, x0, reps);
  const std::size_t n = spec.n();
  const auto traj = iterate(spec, x0.as_probabilities(), steps);
  std::vector<double> col(steps * n), surv(steps * n);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      col[t * n + i] = spec.colonisation(i, traj[t]);
      surv[t * n + i] = spec.survival(i, traj[t]);
    }
  }
  const UniformArray U(seed);
  return count_marginals(n, steps, reps, seed, [&](std::uint32_t r, auto&& record) {
    Word w = x0.word();
    record(0, w);
    for (std::size_t t = 1; t <= steps; ++t) {
      Word next = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double q = test_bit(w, i) ? surv[(t - 1) * n + i] : col[(t - 1) * n + i];
        if (U(r, static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(i)) < q) next |= Word{1} << i;
      }
      w = next;
      record(t, w);
    }
  });
}

McEstimate simulate_event_probability(const ModelSpec& spec, const BitState& x0, const MultiSitePattern& pattern,
                                      std::size_t reps, std::uint64_t seed) {
  require_sim(spec, x0, reps);
  pattern.validate(spec.n());
  if (pattern.entries.empty()) return {1.0, 0.0, reps, seed};
  const auto masks = pattern.step_masks();
  const OccupationKernel kernel(spec);
  const UniformArray U(seed);
  std::vector<std::uint64_t> hits(block_count(reps), 0);
  parallel_blocks(reps, [&](std::size_t b, std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      Word x = x0.word();
      bool ok = true;
      for (std::size_t t = 1; t < masks.size() && ok; ++t) {
        x = kernel.step(x, U, static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(t));
        ok = (x & masks[t]) == 0;
      }
      if (ok) ++hits[b];
    }
  });
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  return bernoulli_estimate(total, reps, seed);
}

MonotoneCheckResult monotone_path_check(const ModelSpec& spec, const BitState& x0, std::size_t steps,
                                        std::size_t reps, std::uint64_t seed, double gamma) {
  if (x0.size() != spec.n()) throw DimensionError("initial state does not match model");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("monotone check needs gamma in (0,1)");
  if (reps > 0xFFFFFFFFull) throw CapacityError("simulation supports at most 2^32 - 1 replicates");
  const std::size_t n = spec.n();
  const OccupationKernel kernel(spec);
  const UniformArray U(seed);
  struct Tally {
    std::size_t violations = 0, replicates = 0;
  };
  std::vector<Tally> tallies(block_count(reps));
  parallel_blocks(reps, [&](std::size_t b, std::size_t lo, std::size_t hi) {
    std::vector<double> u(n);
    for (std::size_t r = lo; r < hi; ++r) {
      Word base = x0.word(), raised = x0.word();
      std::size_t bad = 0;
      for (std::size_t t = 1; t <= steps; ++t) {
        base = kernel.step(base, U, static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(t));
        for (std::size_t i = 0; i < n; ++i) {
          u[i] = std::pow(U(static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(i)),
                          gamma);
        }
        raised = step_occupancy(spec, raised, u);
        if ((raised & ~base) != 0) ++bad;
      }
      tallies[b].violations += bad;
      if (bad > 0) ++tallies[b].replicates;
    }
  });
  MonotoneCheckResult out;
  out.pairs = reps;
  for (const auto& t : tallies) {
    out.violations += t.violations;
    out.violating_replicates += t.replicates;
  }
  return out;
}

void write_estimates_csv(std::ostream& os, const McMarginals& estimates) {
  os << "step,site,mean,se,reps,seed\n";
  for (std::size_t t = 0; t < estimates.by_step.size(); ++t) {
    for (std::size_t i = 0; i < estimates.by_step[t].size(); ++i) {
      const auto& e = estimates.by_step[t][i];
      os << t << ',' << (i + 1) << ',' << format_number(e.mean) << ',' << format_number(e.se) << ',' << e.reps << ','
         << e.seed << '\n';
    }
  }
}

}  // namespace occ
