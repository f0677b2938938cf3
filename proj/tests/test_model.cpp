#include <doctest.h>

#include <cmath>
#include <random>

#include "occ/errors.hpp"
#include "occ/model.hpp"
#include "support.hpp"

using namespace occ;

namespace {

// Straightforward closed forms, written independently of the library's visitor.
double affine_ref(double a, const std::vector<double>& b, const std::vector<double>& p) {
  double s = a;
  for (std::size_t j = 0; j < p.size(); ++j) s += b[j] * p[j];
  return std::min(1.0, s);
}
double product_ref(const std::vector<double>& beta, const std::vector<double>& p) {
  double m = 1.0;
  for (std::size_t j = 0; j < p.size(); ++j) m *= 1.0 - beta[j] * p[j];
  return 1.0 - m;
}
double hanski_ref(const std::vector<double>& w, double y, const std::vector<double>& p) {
  double M = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) M += w[j] * p[j];
  return M * M / (M * M + y * y);
}
double multilinear_ref(const std::vector<double>& table, const std::vector<double>& p) {
  double s = 0.0;
  for (std::size_t x = 0; x < table.size(); ++x) {
    double w = 1.0;
    for (std::size_t j = 0; j < p.size(); ++j) w *= ((x >> j) & 1u) ? p[j] : 1.0 - p[j];
    s += w * table[x];
  }
  return s;
}

const HypothesisResult& result(const AssumptionReport& r, Hypothesis h, std::size_t site) {
  const auto* e = r.find(h, site);
  REQUIRE(e != nullptr);
  return *e;
}

}  // namespace

TEST_CASE("family evaluation: spec examples") {
  const auto affine = FunctionFamily::affine_saturated(0.2, {0.0, 0.3});
  CHECK(affine.eval(std::vector<double>{0.7, 1.0}) == doctest::Approx(0.5).epsilon(1e-15));
  const auto prod = FunctionFamily::product_form({0.5, 0.5});
  CHECK(prod.eval(std::vector<double>{0.5, 0.5}) == doctest::Approx(0.4375).epsilon(1e-15));
  CHECK(FunctionFamily::constant(3, 0.25).eval(std::vector<double>{0.1, 0.9, 0.3}) == 0.25);
  CHECK(FunctionFamily::affine_saturated(0.6, {0.5}).eval(std::vector<double>{1.0}) == 1.0);
}

TEST_CASE("family evaluation agrees with independent closed forms on random points") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 4;
  std::vector<double> b(n), beta(n), w(n), table(16);
  for (auto& x : b) x = 0.4 * u(rng);
  for (auto& x : beta) x = u(rng);
  for (auto& x : w) x = 2.0 * u(rng);
  for (auto& x : table) x = u(rng);
  const auto fa = FunctionFamily::affine_saturated(0.1, b);
  const auto fp = FunctionFamily::product_form(beta);
  const auto fh = FunctionFamily::hanski_incidence(w, 0.7);
  const auto ft = FunctionFamily::tabulated_multilinear(n, table);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> p(n);
    for (auto& x : p) x = u(rng);
    worst = std::max(worst, std::abs(fa.eval(p) - affine_ref(0.1, b, p)));
    worst = std::max(worst, std::abs(fp.eval(p) - product_ref(beta, p)));
    worst = std::max(worst, std::abs(fh.eval(p) - hanski_ref(w, 0.7, p)));
    worst = std::max(worst, std::abs(ft.eval(p) - multilinear_ref(table, p)));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("tabulated-multilinear reproduces its table at every corner exactly") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> table(32);
  for (auto& x : table) x = u(rng);
  const auto f = FunctionFamily::tabulated_multilinear(5, table);
  for (Word x = 0; x < 32; ++x) {
    CHECK(f.eval_lattice(x) == table[x]);
    CHECK(f.eval(testing::corner(x, 5)) == table[x]);
  }
}

TEST_CASE("output map, scaling and pinning") {
  const auto f = FunctionFamily::affine_saturated(0.1, {0.2, 0.3});
  const std::vector<double> p{1.0, 1.0};
  CHECK(f.scaled(2.0).eval(p) == doctest::Approx(1.2));
  CHECK(f.with_output(1.0, -0.5).eval(p) == doctest::Approx(0.7));
  CHECK(f.with_output(1.0, -0.5).with_output(0.0, 2.0).eval(p) == doctest::Approx(1.4));
  CHECK(f.pinned(0, 0.0).eval(p) == doctest::Approx(0.4));
  CHECK(f.pinned(0, 0.0).pinned(0, 1.0).eval(std::vector<double>{0.0, 1.0}) == doctest::Approx(0.6));
  CHECK(f.scaled(3.0).upper_bound() == 3.0);
  CHECK(f.with_output(1.0, -0.5).lower_bound() == 0.5);
}

TEST_CASE("construction-time validation") {
  CHECK_THROWS_AS(FunctionFamily::constant(2, 1.5), ParameterError);
  CHECK_THROWS_AS(FunctionFamily::affine_saturated(-0.1, {0.2}), ParameterError);
  CHECK_THROWS_AS(FunctionFamily::affine_saturated(0.1, {-0.2}), ParameterError);
  CHECK_THROWS_AS(FunctionFamily::product_form({1.2}), ParameterError);
  CHECK_THROWS_AS(FunctionFamily::hanski_incidence({1.0}, 0.0), ParameterError);
  CHECK_THROWS_AS(FunctionFamily::tabulated_multilinear(2, {0, 0, 0}), ParameterError);
  CHECK_THROWS_AS(FunctionFamily::constant(2, 0.5).eval(std::vector<double>{0.5}), DimensionError);
  const auto c = FunctionFamily::constant(2, 0.5);
  CHECK_THROWS_AS(ModelSpec({c}, {c}), DimensionError);
  CHECK_THROWS_AS(SpinSpec({c.with_output(-1.0, 1.0), c}, {c, c}), ParameterError);
  CHECK_THROWS_AS(ModelSpec({c, c}, {c}), DimensionError);
}

TEST_CASE("model clamps probabilities and spin floors rates") {
  const auto f = FunctionFamily::constant(1, 0.5).with_output(0.0, 3.0);
  const ModelSpec spec({f}, {FunctionFamily::constant(1, 0.5).with_output(-1.0, 1.0)});
  CHECK(spec.colonisation(0, Word{0}) == 1.0);
  CHECK(spec.survival(0, Word{1}) == 0.0);
  const SpinSpec spin({f}, {FunctionFamily::constant(1, 0.2)});
  CHECK(spin.flip_rate(0, Word{0}) == 1.5);
  CHECK(spin.flip_rate(0, Word{1}) == 0.2);
}

TEST_CASE("check_assumptions: constants pass everything") {
  const std::size_t n = 3;
  std::vector<FunctionFamily> c(n, FunctionFamily::constant(n, 0.3)), s(n, FunctionFamily::constant(n, 0.8));
  const auto report = check_assumptions(ModelSpec(c, s));
  CHECK(report.overall() == Verdict::pass);
  CHECK(report.certifies(theorem3_hypotheses));
  CHECK(report.results.size() == n * 7);
}

TEST_CASE("check_assumptions: AND table fails concavity with a reproducing witness") {
  const auto andf = FunctionFamily::tabulated_multilinear(2, {0, 0, 0, 1});
  const ModelSpec spec({andf, andf}, {FunctionFamily::constant(2, 1.0), FunctionFamily::constant(2, 1.0)});
  const auto report = check_assumptions(spec);
  const auto& r = result(report, Hypothesis::colonisation_concave, 0);
  CHECK(r.verdict == Verdict::fail);
  CHECK(r.worst_margin <= -0.25 + 1e-12);
  // the (0,0)-(1,1) midpoint gives 0.25 - 0.5
  std::vector<double> mid(2);
  for (std::size_t j = 0; j < 2; ++j) mid[j] = 0.5 * (r.witness_x[j] + r.witness_y[j]);
  const double margin = andf.eval(mid) - 0.5 * (andf.eval(r.witness_x) + andf.eval(r.witness_y));
  CHECK(margin == doctest::Approx(r.worst_margin).epsilon(1e-12));
  CHECK(margin < -report.tol);
  CHECK(report.overall() == Verdict::fail);
  CHECK_FALSE(report.certifies(theorem1_hypotheses));
  CHECK(report.certifies(monotone_hypotheses));
}

TEST_CASE("check_assumptions: affine colonisation against constant survival") {
  const auto c = FunctionFamily::affine_saturated(0.0, {0.0, 0.3});
  const auto c2 = FunctionFamily::affine_saturated(0.0, {0.3, 0.0});
  const auto s = FunctionFamily::constant(2, 0.9);
  const auto report = check_assumptions(ModelSpec({c, c2}, {s, s}));
  CHECK(report.overall() == Verdict::pass);
  CHECK(result(report, Hypothesis::gap_nonnegative, 0).worst_margin == doctest::Approx(0.6));
}

TEST_CASE("check_assumptions: decreasing colonisation fails monotonicity") {
  // 1 - 0.5 p_2 is a product-form complement: build it as tabulated values.
  const auto dec = FunctionFamily::tabulated_multilinear(2, {0.5, 0.5, 0.0, 0.0});
  const auto s = FunctionFamily::constant(2, 0.9);
  const auto report = check_assumptions(ModelSpec({dec, FunctionFamily::constant(2, 0.1)}, {s, s}));
  const auto& r = result(report, Hypothesis::colonisation_increasing, 0);
  CHECK(r.verdict == Verdict::fail);
  for (std::size_t j = 0; j < 2; ++j) CHECK(r.witness_x[j] <= r.witness_y[j]);
  CHECK(dec.eval(r.witness_y) - dec.eval(r.witness_x) == doctest::Approx(r.worst_margin));
}

TEST_CASE("check_assumptions is monotone in tol") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) {
    const auto spec = testing::random_model(3, rng);
    CheckOptions lo, hi;
    lo.samples = hi.samples = 512;
    lo.tol = 1e-9;
    hi.tol = 1e-2;
    const auto a = check_assumptions(spec, lo), b = check_assumptions(spec, hi);
    REQUIRE(a.results.size() == b.results.size());
    for (std::size_t j = 0; j < a.results.size(); ++j) {
      if (a.results[j].verdict == Verdict::pass) CHECK(b.results[j].verdict == Verdict::pass);
    }
  }
}

TEST_CASE("check_assumptions is deterministic per seed") {
  std::mt19937_64 rng(5);
  const auto spec = testing::random_model(4, rng);
  CheckOptions opt;
  opt.samples = 256;
  const auto a = check_assumptions(spec, opt), b = check_assumptions(spec, opt);
  for (std::size_t j = 0; j < a.results.size(); ++j) {
    CHECK(a.results[j].worst_margin == b.results[j].worst_margin);
    CHECK(a.results[j].witness_x == b.results[j].witness_x);
  }
}

TEST_CASE("random certified affine specs pass the Theorem 3 hypotheses") {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 20; ++k) {
    const auto spec = testing::random_certified_affine(2 + k % 5, rng);
    CheckOptions opt;
    opt.samples = 512;
    CHECK(check_assumptions(spec, opt).certifies(theorem3_hypotheses));
  }
}

TEST_CASE("check_spin_assumptions") {
  SUBCASE("affine birth, constant death pass") {
    const auto spec = testing::contact_model(3, 0.1, 0.6, 1.0);
    const auto report = check_spin_assumptions(spec);
    CHECK(report.overall() == Verdict::pass);
    CHECK(report.certifies(theorem4_hypotheses));
    const auto& lip = result(report, Hypothesis::birth_lipschitz, 0);
    CHECK(lip.estimate == doctest::Approx(0.6).epsilon(1e-6));
  }
  SUBCASE("death increasing in a neighbour fails with witness") {
    const auto b = FunctionFamily::constant(2, 0.5);
    const auto d = FunctionFamily::affine_saturated(0.2, {0.0, 0.5});
    const auto report = check_spin_assumptions(SpinSpec({b, b}, {d, FunctionFamily::constant(2, 1.0)}));
    const auto& r = result(report, Hypothesis::death_decreasing, 0);
    CHECK(r.verdict == Verdict::fail);
    CHECK(d.eval(r.witness_x) - d.eval(r.witness_y) == doctest::Approx(r.worst_margin));
  }
  SUBCASE("hanski incidence birth: concavity verdict matches a dense grid scan") {
    const auto h = FunctionFamily::hanski_incidence({0.0, 1.0}, 0.5);
    const auto report = check_spin_assumptions(SpinSpec({h, FunctionFamily::constant(2, 0.1)},
                                                        {FunctionFamily::constant(2, 1.0), FunctionFamily::constant(2, 1.0)}));
    // M^2/(M^2+y^2) in p_2 is convex near 0: scan midpoints along the p_2 axis.
    double worst = 0.0;
    for (int a = 0; a <= 100; ++a)
      for (int c = a; c <= 100; ++c) {
        const std::vector<double> x{0.0, a / 100.0}, y{0.0, c / 100.0}, m{0.0, (a + c) / 200.0};
        worst = std::min(worst, h.eval(m) - 0.5 * (h.eval(x) + h.eval(y)));
      }
    REQUIRE(worst < -1e-3);
    const auto& r = result(report, Hypothesis::birth_concave, 0);
    CHECK(r.verdict != Verdict::pass);
    CHECK(r.worst_margin < -1e-3);
  }
  SUBCASE("steep rates are inconclusive on Lipschitz") {
    const auto steep = FunctionFamily::affine_saturated(0.0, {0.0, 1.0}).scaled(1e8);
    const auto report = check_spin_assumptions(SpinSpec({steep, FunctionFamily::constant(2, 0.1)},
                                                        {FunctionFamily::constant(2, 1.0), FunctionFamily::constant(2, 1.0)}));
    CHECK(result(report, Hypothesis::birth_lipschitz, 0).verdict == Verdict::inconclusive);
    CHECK(report.overall() == Verdict::inconclusive);
  }
}

TEST_CASE("sampled_sup sees lattice maxima") {
  const auto f = FunctionFamily::affine_saturated(0.1, {0.2, 0.3}).scaled(2.0);
  CHECK(sampled_sup(f, 64, 0) == doctest::Approx(1.2));
}
