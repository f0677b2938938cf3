#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "occ/bits.hpp"
#include "occ/exact.hpp"
#include "occ/meanfield.hpp"
#include "occ/model.hpp"
#include "occ/order.hpp"

namespace occ {

/// Time step delta of the occupancy discretisation C = delta*lambda, S = 1 - delta*mu.
struct DiscretisationConfig {
  double delta = 1.0 / 16.0;
  /// Random points used (with the lattice) to estimate sup(lambda_i + mu_i).
  std::size_t sup_samples = 4096;
  std::uint64_t seed = 0;
};

/// Largest admissible delta: 1 / max_i sup(lambda_i + mu_i), sampled.
double admissible_delta(const SpinSpec& spec, std::size_t samples = 4096, std::uint64_t seed = 0);

/// Throws AdmissibilityError unless delta * sup(lambda_i + mu_i) <= 1 for every i.
void check_admissible(const SpinSpec& spec, const DiscretisationConfig& cfg);

ModelSpec discretise(const SpinSpec& spec, const DiscretisationConfig& cfg);

/// Jump rates of the subordinated chain: (P_delta(x, y)) / delta for y != x, diagonal = -row sum.
GeneratorMatrix uniformized_rates(const SpinSpec& spec, const DiscretisationConfig& cfg,
                                  const ExactLimits& limits = {});

/// Largest |q_delta(x, x^i) - Q(x, x^i)| over states and sites.
double max_single_flip_rate_error(const SpinSpec& spec, const DiscretisationConfig& cfg,
                                  const ExactLimits& limits = {});
/// Largest rate q_delta(x, y) over pairs differing in two or more sites.
double max_multi_flip_rate(const SpinSpec& spec, const DiscretisationConfig& cfg, const ExactLimits& limits = {});

/// Law of X^delta after a Poisson(t / delta) number of steps.
DistVector subordinated_law(const SpinSpec& spec, const DiscretisationConfig& cfg, const BitState& x0, double t,
                            double tail_tol = 1e-12, const ExactLimits& limits = {});

/// |p^delta_{floor(t/delta)} - p_t|_inf with p_t from RK4 at step `reference_step`.
double euler_gap(const SpinSpec& spec, const ProbVector& p0, double t, const DiscretisationConfig& cfg,
                 double reference_step = 1e-4);

struct ConvergenceRow {
  double delta;
  std::string metric;
  double value;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;

  std::vector<double> values(const std::string& metric) const;
  std::vector<double> deltas(const std::string& metric) const;
  /// value(delta_k) / value(delta_{k+1}) for consecutive rows of `metric`.
  std::vector<double> ratios(const std::string& metric) const;
};

namespace metrics {
inline const std::string rate_error = "max_rate_error";
inline const std::string multi_flip_rate = "max_multi_flip_rate";
inline const std::string tv_distance = "tv_distance";
inline const std::string euler_error = "euler_gap";
}  // namespace metrics

/// Default grid 2^-4 .. 2^-8.
std::vector<double> default_delta_grid();

/// All metrics for every delta (which must be strictly decreasing).
ConvergenceTable convergence_table(const SpinSpec& spec, const BitState& x0, double t, std::span<const double> deltas,
                                   double tail_tol = 1e-12, const ExactLimits& limits = {});

/// CSV with columns delta, metric, value.
void write_convergence_csv(std::ostream& os, const ConvergenceTable& table);

struct DiscretisedOrderingRow {
  double delta;
  double x_probability;  // P(X^delta_{i, t/delta} = 0 for the pattern)
  double w_probability;  // same for W^delta
  double margin;
  double worst_site_margin;  // min over sites of the single-site path margins
};

struct DiscretisedOrderingReport {
  std::vector<DiscretisedOrderingRow> rows;
  /// Continuous-time limit of the margin: spin system law vs independent site chain.
  double continuous_margin = 0.0;
  double worst_margin = 0.0;
  double tol = 0.0;
  bool hypotheses_certified = false;
  OrderVerdict verdict() const { return order_verdict(worst_margin, tol, hypotheses_certified); }
};

/// For each delta maps the real-time pattern to steps (times must be multiples of delta)
/// and compares P(X^delta = 0 on the pattern) against P(W^delta = 0 on the pattern).
DiscretisedOrderingReport ordering_under_discretisation(const SpinSpec& spec, std::span<const double> deltas,
                                                        const BitState& x0, const RealTimePattern& pattern,
                                                        double tol = 1e-10, const ExactLimits& limits = {});

}  // namespace occ
