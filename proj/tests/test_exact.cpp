#include <doctest.h>

#include <cmath>
#include <random>

#include "occ/errors.hpp"
#include "occ/exact.hpp"
#include "occ/parallel.hpp"
#include "support.hpp"

using namespace occ;

namespace {

ModelSpec constant_model(std::size_t n, double c, double s) {
  return ModelSpec(std::vector<FunctionFamily>(n, FunctionFamily::constant(n, c)),
                   std::vector<FunctionFamily>(n, FunctionFamily::constant(n, s)));
}

ModelSpec interacting_pair() {
  return ModelSpec({FunctionFamily::affine_saturated(0.2, {0.0, 0.3}), FunctionFamily::affine_saturated(0.2, {0.3, 0.0})},
                   {FunctionFamily::constant(2, 0.9), FunctionFamily::constant(2, 0.9)});
}

SpinSpec two_state(double lambda, double mu) {
  return SpinSpec({FunctionFamily::constant(1, lambda)}, {FunctionFamily::constant(1, mu)});
}

}  // namespace

TEST_CASE("transition matrix: spec examples") {
  const auto T = build_transition_matrix(constant_model(1, 0.3, 0.8));
  CHECK(T(0, 0) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(T(0, 1) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(T(1, 0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(T(1, 1) == doctest::Approx(0.8).epsilon(1e-15));

  const auto Z = build_transition_matrix(constant_model(2, 0.0, 0.0));
  for (Word x = 0; x < 4; ++x) CHECK(Z(x, 0) == 1.0);

  // x = (0,1): q = (C_1 = 0.5, S_2 = 0.9)
  const auto P = build_transition_matrix(interacting_pair());
  const Word x = 0b10;
  CHECK(P(x, 0b00) == doctest::Approx(0.5 * 0.1));
  CHECK(P(x, 0b01) == doctest::Approx(0.5 * 0.1));
  CHECK(P(x, 0b10) == doctest::Approx(0.5 * 0.9));
  CHECK(P(x, 0b11) == doctest::Approx(0.5 * 0.9));
}

TEST_CASE("transition matrix matches the definition on random models") {
  std::mt19937_64 rng(21);
  for (std::size_t n = 1; n <= 5; ++n) {
    const auto spec = testing::random_model(n, rng);
    const auto T = build_transition_matrix(spec);
    const auto R = testing::transition_oracle(spec);
    double worst = 0.0, row_err = 0.0;
    for (Word x = 0; x < T.states(); ++x) {
      double sum = 0.0;
      for (Word y = 0; y < T.states(); ++y) {
        worst = std::max(worst, std::abs(T(x, y) - R[x][y]));
        sum += T(x, y);
      }
      row_err = std::max(row_err, std::abs(sum - 1.0));
    }
    CHECK(worst <= 1e-15);
    CHECK(row_err <= 1e-12);
  }
}

TEST_CASE("exact distribution and marginals") {
  const auto single = constant_model(1, 0.3, 0.8);
  const auto x0 = BitState::zeros(1);
  CHECK(exact_distribution(single, x0, 0).probs == std::vector<double>{1.0, 0.0});
  CHECK(exact_marginals(exact_distribution(single, x0, 2))[0] == doctest::Approx(0.45).epsilon(1e-15));

  const auto pair = interacting_pair();
  const auto m2 = exact_marginals(exact_distribution(pair, BitState::zeros(2), 2));
  CHECK(m2[0] == doctest::Approx(0.388).epsilon(1e-14));
  CHECK(m2[1] == doctest::Approx(0.388).epsilon(1e-14));

  CHECK(exact_marginals(DistVector::point_mass(BitState::parse("101"))) == ProbVector{1.0, 0.0, 1.0});
  const DistVector uniform{2, {0.25, 0.25, 0.25, 0.25}};
  CHECK(exact_marginals(uniform) == ProbVector{0.5, 0.5});
}

TEST_CASE("propagation matches dense products and Chapman-Kolmogorov") {
  std::mt19937_64 rng(22);
  for (std::size_t n = 2; n <= 5; ++n) {
    const auto spec = testing::random_model(n, rng);
    const BitState x0(1, n);
    const auto d7 = exact_distribution(spec, x0, 7);
    const auto ref = testing::distribution_oracle(spec, 1, 7);
    double worst = 0.0, neg = 0.0;
    for (Word x = 0; x < ref.size(); ++x) {
      worst = std::max(worst, std::abs(d7[x] - ref[x]));
      neg = std::min(neg, d7[x]);
    }
    CHECK(worst <= 1e-13);
    CHECK(neg >= 0.0);
    CHECK(std::abs(d7.sum() - 1.0) <= 1e-12);

    const auto d3 = exact_distribution(spec, x0, 3);
    const auto d34 = propagate(spec, d3, 4);
    for (Word x = 0; x < ref.size(); ++x) CHECK(std::abs(d34[x] - d7[x]) <= 1e-12);
  }
}

TEST_CASE("exact distribution is independent of the thread count") {
  std::mt19937_64 rng(23);
  const auto spec = testing::random_model(8, rng);
  const BitState x0(0b1001, 8);
  set_num_threads(1);
  const auto a = exact_distribution(spec, x0, 5);
  set_num_threads(8);
  const auto b = exact_distribution(spec, x0, 5);
  set_num_threads(0);
  CHECK(a.probs == b.probs);
}

TEST_CASE("path probabilities: enumeration, conditioning, dynamic program, oracle") {
  const auto pair = interacting_pair();
  const auto x0 = BitState::zeros(2);
  CHECK(exact_path_probability(pair, x0, {0, {1, 1, 1}}) == 1.0);
  const auto pi1 = exact_marginals(exact_distribution(pair, x0, 1));
  CHECK(exact_path_probability(pair, x0, {1, {0}}) == doctest::Approx(1.0 - pi1[1]).epsilon(1e-15));

  const double direct = exact_path_probability(pair, x0, {0, {0, 0}});
  const double cond = exact_path_probability_conditioned(pair, x0, {0, {0, 0}});
  CHECK(direct == doctest::Approx(cond).epsilon(1e-14));

  std::mt19937_64 rng(24);
  for (std::size_t n = 1; n <= 3; ++n) {
    const auto spec = testing::random_model(n, rng);
    const BitState start(n > 1 ? 0b10 : 0, n);
    const auto R = testing::transition_oracle(spec);
    const auto T = build_transition_matrix(spec);
    for (std::size_t i = 0; i < n; ++i) {
      for (Word code = 0; code < 16; ++code) {
        std::vector<std::uint8_t> omega(4);
        std::vector<Word> masks(4, 0);
        for (std::size_t t = 0; t < 4; ++t) {
          omega[t] = (code >> t) & 1u;
          if (!omega[t]) masks[t] = Word{1} << i;
        }
        const TimePattern pat{i, omega};
        const double oracle = testing::trajectory_oracle(R, start.word(), masks);
        const double e = exact_path_probability(spec, start, pat);
        CHECK(std::abs(e - oracle) <= 1e-14);
        CHECK(std::abs(exact_path_probability(T, start.word(), pat) - e) == 0.0);
        CHECK(std::abs(exact_path_probability_conditioned(spec, start, pat) - oracle) <= 1e-14);
        MultiSitePattern mp;
        SiteTimes st{i, {}};
        for (std::size_t t = 0; t < 4; ++t)
          if (!omega[t]) st.times.push_back(t + 1);
        if (!st.times.empty()) mp.entries.push_back(st);
        CHECK(std::abs(constrained_probability(spec, start, mp) - oracle) <= 1e-14);
      }
    }
  }
}

TEST_CASE("multisite probabilities") {
  const auto pair = interacting_pair();
  const auto x0 = BitState::zeros(2);
  CHECK(exact_multisite_probability(pair, x0, {}) == 1.0);
  const auto pi2 = exact_marginals(exact_distribution(pair, x0, 2));
  CHECK(exact_multisite_probability(pair, x0, {{{0, {2}}}}) == doctest::Approx(1.0 - pi2[0]).epsilon(1e-15));

  const MultiSitePattern both{{{0, {1}}, {1, {1}}}};
  const double joint = exact_multisite_probability(pair, x0, both);
  const double a = exact_multisite_probability(pair, x0, {{{0, {1}}}});
  const double b = exact_multisite_probability(pair, x0, {{{1, {1}}}});
  CHECK(joint >= a * b - 1e-15);
  CHECK(joint == doctest::Approx(0.64).epsilon(1e-14));  // one step from (0,0): independent 0.8 * 0.8

  const MultiSitePattern later{{{0, {1, 3}}, {1, {2, 3}}}};
  const auto R = testing::transition_oracle(pair);
  const double oracle = testing::trajectory_oracle(R, 0, {0b01, 0b10, 0b11});
  CHECK(exact_multisite_probability(pair, x0, later) == doctest::Approx(oracle).epsilon(1e-14));
  CHECK(constrained_probability(pair, x0, later) == doctest::Approx(oracle).epsilon(1e-14));

  CHECK_THROWS_AS(MultiSitePattern({{{0, {1}}, {0, {2}}}}).validate(2), ParameterError);
  CHECK_THROWS_AS(MultiSitePattern({{{0, {1, 1}}}}).validate(2), ParameterError);
  CHECK_THROWS_AS(MultiSitePattern({{{0, {0}}}}).validate(2), ParameterError);
  CHECK_THROWS_AS(MultiSitePattern({{{2, {1}}}}).validate(2), DimensionError);
}

TEST_CASE("capacity guards") {
  std::mt19937_64 rng(25);
  const auto spec = testing::random_model(13, rng);
  CHECK_THROWS_AS(build_transition_matrix(spec), CapacityError);
  const auto small = testing::random_model(3, rng);
  CHECK_THROWS_AS(exact_path_probability(small, BitState::zeros(3), {0, std::vector<std::uint8_t>(9, 0)}),
                  CapacityError);
  ExactLimits tight;
  tight.max_sites = 2;
  CHECK_THROWS_AS(exact_distribution(small, BitState::zeros(3), 1, tight), CapacityError);
}

TEST_CASE("spin generator") {
  const auto Q = build_spin_generator(two_state(0.5, 1.0));
  CHECK(Q(0, 0) == -0.5);
  CHECK(Q(0, 1) == 0.5);
  CHECK(Q(1, 0) == 1.0);
  CHECK(Q(1, 1) == -1.0);

  const auto Z = build_spin_generator(two_state(0.0, 0.0));
  for (Word x = 0; x < 2; ++x)
    for (Word y = 0; y < 2; ++y) CHECK(Z(x, y) == 0.0);

  const auto contact = testing::contact_model(3, 0.1, 0.6, 1.0);
  const auto G = build_spin_generator(contact);
  const auto R = testing::generator_oracle(contact);
  for (Word x = 0; x < 8; ++x) {
    double row = 0.0;
    for (Word y = 0; y < 8; ++y) {
      const bool neighbour = std::popcount(x ^ y) == 1;
      if (x != y) CHECK((G(x, y) != 0.0) == neighbour);
      CHECK(G(x, y) == doctest::Approx(R[x][y]).epsilon(1e-14));
      row += G(x, y);
    }
    CHECK(std::abs(row) <= 1e-14);
  }
}

TEST_CASE("spin law: closed form, expm oracle, semigroup, drift") {
  const auto spec = two_state(0.5, 1.0);
  CHECK(spin_law(spec, BitState::zeros(1), 0.0).probs == std::vector<double>{1.0, 0.0});
  for (double t : {0.1, 1.0, 3.0, 10.0}) {
    const double exact = (1.0 / 3.0) * (1.0 - std::exp(-1.5 * t));
    CHECK(spin_law(spec, BitState::zeros(1), t)[1] == doctest::Approx(exact).epsilon(1e-11));
  }

  const auto contact = testing::contact_model(4, 0.1, 0.8, 1.0);
  const BitState x0(0b0001, 4);
  const auto E = testing::expm_oracle(testing::generator_oracle(contact), 1.5);
  const auto law = spin_law(contact, x0, 1.5);
  for (Word y = 0; y < 16; ++y) CHECK(std::abs(law[y] - E[1][y]) <= 1e-11);
  CHECK(std::abs(law.sum() - 1.0) <= 1e-12);

  const auto a = spin_law(contact, spin_law(contact, x0, 0.7), 0.8);
  for (Word y = 0; y < 16; ++y) CHECK(std::abs(a[y] - law[y]) <= 1e-9);

  // d/dt E X_i at t = 1 by central differences against the drift under the law.
  const double h = 1e-4;
  const auto plus = exact_marginals(spin_law(contact, x0, 1.0 + h));
  const auto minus = exact_marginals(spin_law(contact, x0, 1.0 - h));
  const auto drift = spin_drift(contact, spin_law(contact, x0, 1.0));
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs((plus[i] - minus[i]) / (2 * h) - drift[i]) <= 1e-6);
}

TEST_CASE("spin constrained probability") {
  const auto spec = two_state(0.5, 1.0);
  const RealTimePattern empty;
  CHECK(spin_constrained_probability(spec, BitState::zeros(1), empty) == doctest::Approx(1.0));
  const RealTimePattern once{{{0, {1.0}}}};
  CHECK(spin_constrained_probability(spec, BitState::zeros(1), once) ==
        doctest::Approx(1.0 - (1.0 - std::exp(-1.5)) / 3.0).epsilon(1e-11));

  // two times: P(X_0.5 = 0) * P_0(X_0.5 = 0) by the Markov property
  const RealTimePattern twice{{{0, {0.5, 1.0}}}};
  const double q = 1.0 - (1.0 - std::exp(-0.75)) / 3.0;
  CHECK(spin_constrained_probability(spec, BitState::zeros(1), twice) == doctest::Approx(q * q).epsilon(1e-11));
}

TEST_CASE("total variation and normalise") {
  DistVector a{1, {1.0, 0.0}}, b{1, {0.25, 0.75}};
  CHECK(total_variation(a, b) == 0.75);
  DistVector c{1, {-1e-17, 2.0}};
  normalise(c);
  CHECK(c.probs == std::vector<double>{0.0, 1.0});
}
