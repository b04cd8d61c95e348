#pragma once

// Independent reference computations and random generators for tests.
// Nothing here calls into the code paths it is used to check.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>

#include "equibaire/flow.hpp"
#include "equibaire/moebius.hpp"
#include "equibaire/sphere.hpp"

namespace equibaire::testing {

using C = std::complex<double>;

// Affine value with nullopt for infinity.
using Extended = std::optional<C>;

/// d(z1, z2) = |z1 - z2| / sqrt((1 + |z1|^2)(1 + |z2|^2)), d(z, inf) = (1 + |z|^2)^(-1/2).
inline double affine_chordal(const Extended& z1, const Extended& z2) {
  if (!z1 && !z2) return 0.0;
  if (!z1) return 1.0 / std::sqrt(1.0 + std::norm(*z2));
  if (!z2) return 1.0 / std::sqrt(1.0 + std::norm(*z1));
  return std::abs(*z1 - *z2) / std::sqrt((1.0 + std::norm(*z1)) * (1.0 + std::norm(*z2)));
}

/// (az + b)/(cz + d) with the usual conventions at the pole and at infinity.
inline Extended affine_moebius(C a, C b, C c, C d, const Extended& z) {
  if (!z) {
    if (c == C(0)) return std::nullopt;
    return a / c;
  }
  const C den = c * *z + d;
  if (den == C(0)) return std::nullopt;
  return (a * *z + b) / den;
}

inline C random_complex(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  return {n(rng), n(rng)};
}

/// Random SL(2,C) element with Frobenius norm at most `max_norm`.
inline MoebiusMap random_map(std::mt19937_64& rng, double max_norm = 4.0) {
  for (;;) {
    MoebiusMap f(random_complex(rng), random_complex(rng), random_complex(rng),
                 random_complex(rng));
    if (f.matrix().frobenius_norm() <= max_norm) return f;
  }
}

inline MoebiusMap conjugate(const MoebiusMap& f, const MoebiusMap& g) {
  return compose(compose(g, f), inverse(g));
}

inline Matrix2<double> conjugate(const Matrix2<double>& a, const MoebiusMap& g) {
  const auto& m = g.matrix();
  const Matrix2<double> m_inv{m.d, -m.b, -m.c, m.a};
  return m * a * m_inv;
}

/// Random loxodromic-type map: conjugate of diag(k, 1/k) with |k| away from 1.
inline MoebiusMap random_loxodromic(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> modulus(1.2, 3.0);
  std::uniform_real_distribution<double> angle(0.2, 3.0);
  const C k = std::polar(modulus(rng), angle(rng));
  return conjugate(MoebiusMap(k, 0, 0, 1.0 / k), random_map(rng, 3.0));
}

inline double max_entry_diff(const Matrix2<double>& x, const Matrix2<double>& y) {
  return std::max({std::abs(x.a - y.a), std::abs(x.b - y.b), std::abs(x.c - y.c),
                   std::abs(x.d - y.d)});
}

/// exp(M) by scaling and squaring: Taylor series with `terms` terms on
/// M / 2^squarings, then `squarings` squarings. Runs in long double; in double
/// the squarings alone lose about 1e-9 on entries of size 1e4.
inline Matrix2<double> series_exp(const Matrix2<double>& m, int terms = 30, int squarings = 20) {
  using L = std::complex<long double>;
  const long double s = std::ldexp(1.0L, -squarings);
  const Matrix2<long double> x{L(m.a) * s, L(m.b) * s, L(m.c) * s, L(m.d) * s};
  Matrix2<long double> sum{};
  Matrix2<long double> term{};
  for (int k = 1; k < terms; ++k) {
    term = L(1.0L / k) * (term * x);
    sum = sum + term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return {C(sum.a), C(sum.b), C(sum.c), C(sum.d)};
}

/// Random trace-zero matrix with Frobenius norm uniform in [0, max_norm].
inline Matrix2<double> random_generator_matrix(std::mt19937_64& rng, double max_norm = 2.0) {
  const C a = random_complex(rng), b = random_complex(rng), c = random_complex(rng);
  Matrix2<double> m{a, b, c, -a};
  std::uniform_real_distribution<double> u(0.0, max_norm);
  const double scale = u(rng) / m.frobenius_norm();
  return {m.a * scale, m.b * scale, m.c * scale, m.d * scale};
}

}  // namespace equibaire::testing
