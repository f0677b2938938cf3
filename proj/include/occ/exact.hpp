#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "occ/bits.hpp"
#include "occ/model.hpp"

namespace occ {

/// Size caps for the enumerative engines.
struct ExactLimits {
  /// Distribution propagation keeps 2^n probabilities.
  std::size_t max_sites = 20;
  /// Dense 2^n x 2^n matrices (transition and generator).
  std::size_t max_dense_sites = 12;
  /// Trajectory enumeration visits up to 2^(n * horizon) paths.
  std::size_t max_path_bits = 24;
};

/// Probability vector over {0,1}^n indexed by lattice word.
struct DistVector {
  std::size_t n = 0;
  std::vector<double> probs;

  static DistVector point_mass(const BitState& x, const ExactLimits& limits = {});
  double operator[](Word x) const { return probs[static_cast<std::size_t>(x)]; }
  double sum() const;
};

/// Row-stochastic transition matrix of an occupancy process, dense row-major.
class TransitionMatrix {
 public:
  TransitionMatrix(std::size_t n, std::vector<double> entries);
  std::size_t n() const { return n_; }
  std::size_t states() const { return lattice_size(n_); }
  double operator()(Word x, Word y) const { return entries_[x * states() + y]; }
  std::span<const double> row(Word x) const { return {entries_.data() + x * states(), states()}; }

 private:
  std::size_t n_;
  std::vector<double> entries_;
};

/// Generator of a continuous-time chain on {0,1}^n, dense row-major.
class GeneratorMatrix {
 public:
  GeneratorMatrix(std::size_t n, std::vector<double> entries);
  std::size_t n() const { return n_; }
  std::size_t states() const { return lattice_size(n_); }
  double operator()(Word x, Word y) const { return entries_[x * states() + y]; }
  std::span<const double> row(Word x) const { return {entries_.data() + x * states(), states()}; }

 private:
  std::size_t n_;
  std::vector<double> entries_;
};

/// Single-site constraint pattern: omega_t = 0 forces X_{site,t} = 0, t = 1..m.
struct TimePattern {
  std::size_t site = 0;
  std::vector<std::uint8_t> omega;
};

struct SiteTimes {
  std::size_t site = 0;
  std::vector<std::size_t> times;  // positive step indices
};

/// Joint event {X_{i,t} = 0 for every listed (i, t)}.
struct MultiSitePattern {
  std::vector<SiteTimes> entries;

  std::size_t horizon() const;
  /// Zero-constraint mask per step 0..horizon.
  std::vector<Word> step_masks() const;
  void validate(std::size_t n) const;
};

/// Largest index j with omega_j = 0 (1-based), or 0 when omega is all ones.
std::size_t last_constrained_step(std::span<const std::uint8_t> omega);

/// One-step occupation probabilities q[x * n + i] = P(X_{i,t+1} = 1 | X_t = x).
std::vector<double> occupation_table(const ModelSpec& spec, const ExactLimits& limits = {});

TransitionMatrix build_transition_matrix(const ModelSpec& spec, const ExactLimits& limits = {});

/// Advances a distribution `steps` times without forming the transition matrix.
DistVector propagate(const ModelSpec& spec, const DistVector& start, std::size_t steps,
                     const ExactLimits& limits = {});

DistVector exact_distribution(const ModelSpec& spec, const BitState& x0, std::size_t steps,
                              const ExactLimits& limits = {});

ProbVector exact_marginals(const DistVector& dist);

/// P(X_{site,t} = 0 for all t with omega_t = 0), by enumerating trajectories.
double exact_path_probability(const ModelSpec& spec, const BitState& x0, const TimePattern& pattern,
                              const ExactLimits& limits = {});

/// Enumeration against a prebuilt transition matrix.
double exact_path_probability(const TransitionMatrix& T, Word x0, const TimePattern& pattern,
                              const ExactLimits& limits = {});

/// Same quantity through one-step conditioning at the last constrained step:
/// E[((1 - S(X)) + (1 - X_i)(S - C)(X)) * prod_{t < last} (1 - X_{i,t})^{1 - omega_t}] with X at last - 1.
double exact_path_probability_conditioned(const ModelSpec& spec, const BitState& x0, const TimePattern& pattern,
                                          const ExactLimits& limits = {});

/// Joint all-zeros event over several sites and times, by enumerating trajectories.
double exact_multisite_probability(const ModelSpec& spec, const BitState& x0, const MultiSitePattern& pattern,
                                   const ExactLimits& limits = {});

double exact_multisite_probability(const TransitionMatrix& T, Word x0, const MultiSitePattern& pattern,
                                   const ExactLimits& limits = {});

/// Same event by forward propagation with restriction; only the 2^n cap applies.
double constrained_probability(const ModelSpec& spec, const BitState& x0, const MultiSitePattern& pattern,
                               const ExactLimits& limits = {});

/// Per-state flip rates r[x * n + i] of a spin system.
std::vector<double> flip_rate_table(const SpinSpec& spec, const ExactLimits& limits = {});

GeneratorMatrix build_spin_generator(const SpinSpec& spec, const ExactLimits& limits = {});

/// Law of X_t by uniformization; Poisson tail below tail_tol is dropped and the result renormalised.
DistVector spin_law(const SpinSpec& spec, const BitState& x0, double t, double tail_tol = 1e-12,
                    const ExactLimits& limits = {});
DistVector spin_law(const SpinSpec& spec, const DistVector& start, double t, double tail_tol = 1e-12,
                    const ExactLimits& limits = {});

/// Continuous-time joint event {X_{i,t} = 0 for listed real times}.
struct RealTimePattern {
  struct Entry {
    std::size_t site = 0;
    std::vector<double> times;
  };
  std::vector<Entry> entries;
};

double spin_constrained_probability(const SpinSpec& spec, const BitState& x0, const RealTimePattern& pattern,
                                    double tail_tol = 1e-12, const ExactLimits& limits = {});

/// E[(1 - X_i) birth_i(X) - X_i death_i(X)] under `dist`: the drift of E X_i.
ProbVector spin_drift(const SpinSpec& spec, const DistVector& dist);

double total_variation(const DistVector& a, const DistVector& b);

/// Clamps tiny negative entries and rescales to unit mass.
void normalise(DistVector& dist);

}  // namespace occ
