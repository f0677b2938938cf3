#pragma once

// Independent reference computations and model generators for the tests.
// Nothing here calls into the engines it is used to check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "occ/model.hpp"

namespace occ::testing {

using Matrix = std::vector<std::vector<double>>;

inline std::vector<double> corner(Word x, std::size_t n) {
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<double>((x >> i) & 1u);
  return p;
}

/// Transition matrix straight from the definition, evaluating C and S at lattice points.
inline Matrix transition_oracle(const ModelSpec& spec) {
  const std::size_t n = spec.n(), N = std::size_t{1} << n;
  Matrix T(N, std::vector<double>(N));
  for (Word x = 0; x < N; ++x) {
    const auto p = corner(x, n);
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double c = spec.colonisation(i, p), s = spec.survival(i, p);
      q[i] = p[i] == 1.0 ? s : c;
    }
    for (Word y = 0; y < N; ++y) {
      double v = 1.0;
      for (std::size_t i = 0; i < n; ++i) v *= ((y >> i) & 1u) ? q[i] : 1.0 - q[i];
      T[x][y] = v;
    }
  }
  return T;
}

inline std::vector<double> vec_mat(const std::vector<double>& v, const Matrix& T) {
  std::vector<double> out(T.size(), 0.0);
  for (std::size_t x = 0; x < T.size(); ++x)
    for (std::size_t y = 0; y < T.size(); ++y) out[y] += v[x] * T[x][y];
  return out;
}

inline std::vector<double> distribution_oracle(const ModelSpec& spec, Word x0, std::size_t steps) {
  const auto T = transition_oracle(spec);
  std::vector<double> v(T.size(), 0.0);
  v[x0] = 1.0;
  for (std::size_t t = 0; t < steps; ++t) v = vec_mat(v, T);
  return v;
}

inline std::vector<double> marginals_oracle(const std::vector<double>& dist, std::size_t n) {
  std::vector<double> m(n, 0.0);
  for (Word x = 0; x < dist.size(); ++x)
    for (std::size_t i = 0; i < n; ++i)
      if ((x >> i) & 1u) m[i] += dist[x];
  return m;
}

/// P(X_{i,t} = 0 whenever zero[t][i]) for t = 1..m, summing over every trajectory.
inline double trajectory_oracle(const Matrix& T, Word x0, const std::vector<Word>& zero_masks) {
  const std::size_t m = zero_masks.size(), N = T.size();
  std::vector<Word> path(m, 0);
  double total = 0.0;
  for (;;) {
    double w = 1.0;
    Word prev = x0;
    bool ok = true;
    for (std::size_t t = 0; t < m && ok; ++t) {
      ok = (path[t] & zero_masks[t]) == 0;
      w *= T[prev][path[t]];
      prev = path[t];
    }
    if (ok) total += w;
    std::size_t k = 0;
    while (k < m && ++path[k] == N) path[k++] = 0;
    if (k == m) break;
  }
  return total;
}

/// Two-state inhomogeneous chain: sums over all 2^m site paths.
inline double site_chain_oracle(bool start, const std::vector<double>& col, const std::vector<double>& surv,
                                const std::vector<std::uint8_t>& omega) {
  const std::size_t m = omega.size();
  double total = 0.0;
  for (Word path = 0; path < (Word{1} << m); ++path) {
    double w = 1.0;
    bool prev = start;
    for (std::size_t t = 0; t < m; ++t) {
      const bool cur = (path >> t) & 1u;
      if (omega[t] == 0 && cur) {
        w = 0.0;
        break;
      }
      const double q = prev ? surv[t] : col[t];
      w *= cur ? q : 1.0 - q;
      prev = cur;
    }
    total += w;
  }
  return total;
}

/// Dense generator from the rate definition.
inline Matrix generator_oracle(const SpinSpec& spec) {
  const std::size_t n = spec.n(), N = std::size_t{1} << n;
  Matrix Q(N, std::vector<double>(N, 0.0));
  for (Word x = 0; x < N; ++x) {
    const auto p = corner(x, n);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = p[i] == 1.0 ? spec.death(i, p) : spec.birth(i, p);
      Q[x][x ^ (Word{1} << i)] += r;
      Q[x][x] -= r;
    }
  }
  return Q;
}

inline Matrix mat_mul(const Matrix& A, const Matrix& B) {
  const std::size_t N = A.size();
  Matrix C(N, std::vector<double>(N, 0.0));
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t k = 0; k < N; ++k)
      for (std::size_t j = 0; j < N; ++j) C[i][j] += A[i][k] * B[k][j];
  return C;
}

/// exp(Q t) by scaling and squaring of a Taylor series.
inline Matrix expm_oracle(const Matrix& Q, double t) {
  const std::size_t N = Q.size();
  double norm = 0.0;
  for (const auto& row : Q) {
    double s = 0.0;
    for (double v : row) s += std::abs(v);
    norm = std::max(norm, s);
  }
  int squarings = 0;
  double scale = t;
  while (norm * scale > 0.5) {
    scale /= 2.0;
    ++squarings;
  }
  Matrix A(N, std::vector<double>(N));
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) A[i][j] = Q[i][j] * scale;
  Matrix E(N, std::vector<double>(N, 0.0)), term(N, std::vector<double>(N, 0.0));
  for (std::size_t i = 0; i < N; ++i) E[i][i] = term[i][i] = 1.0;
  for (int k = 1; k <= 30; ++k) {
    term = mat_mul(term, A);
    for (auto& row : term)
      for (double& v : row) v /= k;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) E[i][j] += term[i][j];
  }
  for (int s = 0; s < squarings; ++s) E = mat_mul(E, E);
  return E;
}

// ---------------------------------------------------------------------------
// Model generators

/// Affine colonisation and survival satisfying every Theorem 1 and 3 hypothesis by construction:
/// C_i = a + sum b_j p_j, S_i = min(1, c + sum d_j p_j) with d_j <= b_j, S - C >= 0 everywhere.
inline ModelSpec random_certified_affine(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<FunctionFamily> col, surv;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> b(n), d(n);
    const double a = 0.3 * u(rng);
    double bsum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      b[j] = (u(rng) < 0.6) ? 0.5 * u(rng) / static_cast<double>(n) : 0.0;
      bsum += b[j];
    }
    double dsum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      d[j] = b[j] * u(rng);
      dsum += d[j];
    }
    // S - C at p = 1 is c - a - (bsum - dsum); pick c so this is >= 0 (the minimum of S - C).
    const double cmin = a + bsum - dsum;
    const double c = cmin + (1.0 - cmin - dsum) * u(rng);
    col.push_back(FunctionFamily::affine_saturated(a, b));
    surv.push_back(FunctionFamily::affine_saturated(std::min(1.0, c), d));
  }
  return ModelSpec(std::move(col), std::move(surv));
}

/// Any-sign affine model with random families mixed in; used where no hypothesis is needed.
inline ModelSpec random_model(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto pick = [&](std::size_t) {
    const double r = u(rng);
    std::vector<double> w(n);
    for (auto& x : w) x = 0.4 * u(rng);
    if (r < 0.25) return FunctionFamily::constant(n, u(rng));
    if (r < 0.5) return FunctionFamily::affine_saturated(0.5 * u(rng), w);
    if (r < 0.75) return FunctionFamily::product_form(w);
    std::vector<double> table(std::size_t{1} << n);
    for (auto& x : table) x = u(rng);
    return FunctionFamily::tabulated_multilinear(n, table);
  };
  std::vector<FunctionFamily> col, surv;
  for (std::size_t i = 0; i < n; ++i) {
    col.push_back(pick(i));
    surv.push_back(pick(i));
  }
  return ModelSpec(std::move(col), std::move(surv));
}

/// Contact-type spin system on a ring (or complete graph for n <= 3):
/// birth = base + rate * (occupied neighbours), death constant.
inline SpinSpec contact_model(std::size_t n, double base, double rate, double death) {
  std::vector<FunctionFamily> birth, deaths;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> w(n, 0.0);
    if (n <= 3) {
      for (std::size_t j = 0; j < n; ++j) w[j] = j == i ? 0.0 : 1.0;
    } else {
      w[(i + 1) % n] = 1.0;
      w[(i + n - 1) % n] = 1.0;
    }
    // affine shape saturates at 1: scale it so the saturation point is never reached.
    double neighbours = 0.0;
    for (double x : w) neighbours += x;
    const double top = base + rate * neighbours;
    for (auto& x : w) x *= rate / top;
    birth.push_back(FunctionFamily::affine_saturated(base / top, w).scaled(top));
    deaths.push_back(FunctionFamily::constant(n, 1.0).scaled(death));
  }
  return SpinSpec(std::move(birth), std::move(deaths));
}

}  // namespace occ::testing
