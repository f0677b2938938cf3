#include "occ/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "occ/bridge.hpp"
#include "occ/errors.hpp"
#include "occ/exact.hpp"
#include "occ/indep.hpp"
#include "occ/io.hpp"
#include "occ/meanfield.hpp"
#include "occ/order.hpp"
#include "occ/parallel.hpp"
#include "occ/simulate.hpp"

namespace occ {

namespace {

struct Options {
  std::string model;
  std::optional<double> t;
  std::size_t reps = 10000;
  std::uint64_t seed = 0;
  std::optional<double> tol;
  std::vector<double> delta_grid;
  std::string out;
  std::string mode = "exact";
  std::string theorem = "thm1";
  std::size_t m = 4;
  std::size_t samples = 4096;
  double dt = 0.25;
  std::size_t threads = 0;
  std::string x0;
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Session {
 public:
  Session(const Options& opt, std::ostream& out) : opt_(opt), out_(out) {}

  void emit(const std::string& name, const std::string& content) {
    if (opt_.out.empty()) {
      out_ << content;
      return;
    }
    std::filesystem::create_directories(opt_.out);
    const auto path = std::filesystem::path(opt_.out) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot write " + path.string());
    f << content;
    out_ << "wrote " << path.string() << '\n';
  }

  void emit_json(const std::string& name, const nlohmann::ordered_json& j) { emit(name, j.dump(2) + "\n"); }

 private:
  const Options& opt_;
  std::ostream& out_;
};

ModelDocument load(const Options& opt) {
  auto doc = load_model(opt.model);
  if (!opt.x0.empty()) {
    doc.x0 = BitState::parse(opt.x0);
    if (doc.x0->size() != doc.n()) throw UsageError("--x0 must have one bit per site");
  }
  return doc;
}

const ModelSpec& need_occupancy(const ModelDocument& doc, const std::string& what) {
  if (!doc.occupancy) throw UsageError(what + " requires an occupancy model (colonisation/survival)");
  return *doc.occupancy;
}

const SpinSpec& need_spin(const ModelDocument& doc, const std::string& what) {
  if (!doc.spin) throw UsageError(what + " requires a spin model (birth/death)");
  return *doc.spin;
}

std::size_t steps_of(double t) {
  if (!(t >= 0.0) || t != std::floor(t) || t > 1e7) throw UsageError("--t must be a nonnegative integer step count");
  return static_cast<std::size_t>(t);
}

std::vector<double> time_grid(double t, double dt) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw UsageError("--t must be finite and >= 0");
  if (!(dt > 0.0)) throw UsageError("--dt must be positive");
  std::vector<double> grid;
  for (std::size_t k = 0;; ++k) {
    const double s = static_cast<double>(k) * dt;
    if (s > t * (1.0 + 1e-12)) break;
    grid.push_back(s);
  }
  if (grid.back() < t * (1.0 - 1e-12)) grid.push_back(t);
  return grid;
}

std::vector<double> step_index(std::size_t steps) {
  std::vector<double> idx(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) idx[k] = static_cast<double>(k);
  return idx;
}

CheckOptions check_options(const Options& opt) {
  CheckOptions c;
  c.samples = opt.samples;
  c.seed = opt.seed;
  if (opt.tol) c.tol = *opt.tol;
  return c;
}

OrderOptions order_options(const Options& opt) {
  OrderOptions o;
  o.check = check_options(opt);
  o.check.tol = CheckOptions{}.tol;
  o.seed = opt.seed;
  if (opt.tol) o.tol = *opt.tol;
  return o;
}

int exit_for(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return exit_code::pass;
    case Verdict::fail:
      return exit_code::fail;
    case Verdict::inconclusive:
      return exit_code::inconclusive;
  }
  return exit_code::usage;
}

int exit_for(OrderVerdict v) {
  switch (v) {
    case OrderVerdict::pass:
      return exit_code::pass;
    case OrderVerdict::fail:
      return exit_code::fail;
    case OrderVerdict::informative:
      return exit_code::inconclusive;
  }
  return exit_code::usage;
}

OrderVerdict combine(std::span<const OrderReport> reports) {
  OrderVerdict v = OrderVerdict::pass;
  for (const auto& r : reports) {
    if (r.verdict == OrderVerdict::fail) return OrderVerdict::fail;
    if (r.verdict == OrderVerdict::informative) v = OrderVerdict::informative;
  }
  return v;
}

// ---------------------------------------------------------------------------

int cmd_check(const Options& opt, Session& s) {
  const auto doc = load(opt);
  const auto report = doc.occupancy ? check_assumptions(*doc.occupancy, check_options(opt))
                                    : check_spin_assumptions(*doc.spin, check_options(opt));
  s.emit_json("check.json", to_json(report));
  return exit_for(report.overall());
}

int cmd_run(const Options& opt, Session& s) {
  const auto doc = load(opt);
  const auto x0 = doc.initial_state();
  std::ostringstream csv;
  if (doc.occupancy) {
    const auto& spec = *doc.occupancy;
    const std::size_t steps = steps_of(opt.t.value_or(10.0));
    const auto index = step_index(steps);
    if (opt.mode == "exact") {
      std::vector<ProbVector> states;
      auto dist = DistVector::point_mass(x0);
      for (std::size_t t = 0; t <= steps; ++t) {
        if (t > 0) dist = propagate(spec, dist, 1);
        states.push_back(exact_marginals(dist));
      }
      write_trajectory_csv(csv, states, index, "step");
    } else if (opt.mode == "mc") {
      write_estimates_csv(csv, simulate_marginals(spec, x0, steps, opt.reps, opt.seed));
    } else if (opt.mode == "meanfield") {
      write_trajectory_csv(csv, iterate(spec, x0.as_probabilities(), steps), index, "step");
    } else if (opt.mode == "indep") {
      const auto schedules = build_schedules(spec, x0, steps);
      std::vector<ProbVector> states(steps + 1, ProbVector(spec.n()));
      for (std::size_t i = 0; i < spec.n(); ++i)
        for (std::size_t t = 0; t <= steps; ++t) states[t][i] = schedules[i].occupancy[t];
      write_trajectory_csv(csv, states, index, "step");
    } else {
      throw UsageError("unknown --mode " + opt.mode);
    }
  } else {
    const auto& spec = *doc.spin;
    const auto grid = time_grid(opt.t.value_or(5.0), opt.dt);
    if (opt.mode == "exact") {
      std::vector<ProbVector> states;
      auto law = DistVector::point_mass(x0);
      double prev = 0.0;
      for (double t : grid) {
        law = spin_law(spec, law, t - prev);
        prev = t;
        states.push_back(exact_marginals(law));
      }
      write_trajectory_csv(csv, states, grid, "time");
    } else if (opt.mode == "meanfield" || opt.mode == "indep") {
      const auto traj = integrate_ode_on_grid(spec, x0.as_probabilities(), grid);
      write_trajectory_csv(csv, traj.states, grid, "time");
    } else if (opt.mode == "mc") {
      throw UsageError("--mode mc requires an occupancy model");
    } else {
      throw UsageError("unknown --mode " + opt.mode);
    }
  }
  s.emit("run_" + opt.mode + ".csv", csv.str());
  return exit_code::pass;
}

int cmd_verify(const Options& opt, Session& s) {
  const auto doc = load(opt);
  const auto x0 = doc.initial_state();
  const auto oo = order_options(opt);
  nlohmann::ordered_json out;
  out["theorem"] = opt.theorem;
  std::vector<OrderReport> reports;
  std::optional<OrderVerdict> verdict;

  if (opt.theorem == "thm1") {
    const auto& spec = need_occupancy(doc, "thm1");
    const std::size_t steps = steps_of(opt.t.value_or(10.0));
    reports.push_back(marginal_bound_check(spec, x0, steps, oo));
    auto single = single_time_orthant_check(spec, x0, steps, oo);
    reports.push_back(single.harris);
    reports.push_back(single.mean_field);
    reports.push_back(single.combined);
  } else if (opt.theorem == "thm3") {
    const auto& spec = need_occupancy(doc, "thm3");
    auto path = path_orthant_check(spec, x0, opt.m, oo);
    reports.push_back(path.single_site);
    reports.push_back(path.multisite);
    reports.push_back(path.recursion_bound);
    out["decomposition_gap"] = path.decomposition_gap;
  } else if (opt.theorem == "thm2") {
    const auto& spec = need_spin(doc, "thm2");
    const auto grid = time_grid(opt.t.value_or(5.0), opt.dt);
    reports.push_back(spin_marginal_bound_check(spec, x0, grid, oo));
    auto po = oo;
    const Hypothesis attractive[] = {Hypothesis::birth_increasing, Hypothesis::death_decreasing};
    po.certified = check_spin_assumptions(spec, oo.check).certifies(attractive);
    reports.push_back(positive_correlation_check(spin_law(spec, x0, grid.back()), po));
  } else if (opt.theorem == "thm4") {
    const auto& spec = need_spin(doc, "thm4");
    const double t = opt.t.value_or(1.0);
    const auto deltas = opt.delta_grid.empty() ? default_delta_grid() : opt.delta_grid;
    std::ostringstream csv;
    write_convergence_csv(csv, convergence_table(spec, x0, t, deltas));
    RealTimePattern pattern;
    for (std::size_t i = 0; i < spec.n(); ++i) pattern.entries.push_back({i, {t}});
    const auto ordering = ordering_under_discretisation(spec, deltas, x0, pattern, oo.tol);
    out["ordering"] = to_json(ordering);
    verdict = ordering.verdict();
    s.emit("convergence.csv", csv.str());
  } else {
    throw UsageError("unknown --theorem " + opt.theorem + " (expected thm1, thm2, thm3 or thm4)");
  }

  if (!verdict) verdict = combine(reports);
  out["verdict"] = std::string(to_string(*verdict));
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  out["reports"] = arr;
  s.emit_json("verify_" + opt.theorem + ".json", out);
  return exit_for(*verdict);
}

int cmd_bridge(const Options& opt, Session& s) {
  const auto doc = load(opt);
  const auto& spec = need_spin(doc, "bridge");
  const auto deltas = opt.delta_grid.empty() ? default_delta_grid() : opt.delta_grid;
  std::ostringstream csv;
  write_convergence_csv(csv, convergence_table(spec, doc.initial_state(), opt.t.value_or(1.0), deltas));
  s.emit("convergence.csv", csv.str());
  return exit_code::pass;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Occupancy processes, spin systems and their mean-field bounds", "occ"};
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--model", opt.model, "Model JSON file")->required();
    sub->add_option("--seed", opt.seed, "Seed for all randomness");
    sub->add_option("--out", opt.out, "Output directory (stdout when omitted)");
    sub->add_option("--x0", opt.x0, "Initial state as a bit string, site 1 first");
    sub->add_option("--threads", opt.threads, "Worker threads (0 = hardware)");
  };
  auto t_option = [&](CLI::App* sub, const char* help) {
    sub->add_option_function<double>("--t", [&](double v) { opt.t = v; }, help);
  };
  auto tol_option = [&](CLI::App* sub) {
    sub->add_option_function<double>("--tol", [&](double v) { opt.tol = v; }, "Tolerance");
  };

  auto* check = app.add_subcommand("check", "Certify the theorem hypotheses of a model");
  common(check);
  tol_option(check);
  check->add_option("--samples", opt.samples, "Random samples per hypothesis");

  auto* run = app.add_subcommand("run", "Trajectories: exact marginals, Monte Carlo, mean field, independent sites");
  common(run);
  t_option(run, "Horizon (steps for occupancy models, time for spin models)");
  run->add_option("--mode", opt.mode, "exact | mc | meanfield | indep")
      ->check(CLI::IsMember({"exact", "mc", "meanfield", "indep"}));
  run->add_option("--reps", opt.reps, "Monte Carlo replicates");
  run->add_option("--dt", opt.dt, "Output time spacing for spin models");

  auto* verify = app.add_subcommand("verify", "Check a comparison theorem on a model");
  common(verify);
  t_option(verify, "Horizon");
  tol_option(verify);
  verify->add_option("--theorem", opt.theorem, "thm1 | thm2 | thm3 | thm4")
      ->check(CLI::IsMember({"thm1", "thm2", "thm3", "thm4"}));
  verify->add_option("--m", opt.m, "Path length for thm3");
  verify->add_option("--samples", opt.samples, "Random samples per hypothesis");
  verify->add_option("--dt", opt.dt, "Time grid spacing for thm2");
  verify->add_option("--delta-grid", opt.delta_grid, "Comma-separated decreasing steps for thm4")->delimiter(',');

  auto* bridge = app.add_subcommand("bridge", "Convergence of the discretised occupancy process to a spin system");
  common(bridge);
  t_option(bridge, "Time at which laws are compared");
  bridge->add_option("--delta-grid", opt.delta_grid, "Comma-separated decreasing steps")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::pass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_code::pass;
  } catch (const CLI::ParseError& e) {
    err << "occ: " << e.what() << '\n';
    return exit_code::usage;
  }

  set_num_threads(opt.threads);
  Session session(opt, out);
  try {
    if (check->parsed()) return cmd_check(opt, session);
    if (run->parsed()) return cmd_run(opt, session);
    if (verify->parsed()) return cmd_verify(opt, session);
    if (bridge->parsed()) return cmd_bridge(opt, session);
  } catch (const ModelFormatError& e) {
    err << "occ: " << opt.model << ": " << e.what() << '\n';
    return exit_code::usage;
  } catch (const CapacityError& e) {
    err << "occ: capacity: " << e.what() << '\n';
    return exit_code::capacity;
  } catch (const std::exception& e) {
    err << "occ: " << e.what() << '\n';
    return exit_code::usage;
  }
  return exit_code::usage;
}

}  // namespace occ
