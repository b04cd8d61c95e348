#pragma once

// SL(2,C) matrices acting on the Riemann sphere.
//
// The dynamics operations (normal form, basin membership) accept both trace
// classes with |lambda| != 1, hyperbolic and loxodromic. MapClass keeps the
// finer trace classification.

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "equibaire/error.hpp"
#include "equibaire/sphere.hpp"

namespace equibaire {

/// Plain 2x2 complex matrix. No determinant constraint; used for projective
/// actions whose SL(2,C) representative would overflow.
template <std::floating_point Real>
struct Matrix2 {
  using complex_type = std::complex<Real>;

  complex_type a{1}, b{0}, c{0}, d{1};

  complex_type det() const noexcept { return a * d - b * c; }
  complex_type trace() const noexcept { return a + d; }

  Real max_abs() const noexcept {
    return std::max({std::abs(a.real()), std::abs(a.imag()), std::abs(b.real()),
                     std::abs(b.imag()), std::abs(c.real()), std::abs(c.imag()),
                     std::abs(d.real()), std::abs(d.imag())});
  }

  Real frobenius_norm() const noexcept {
    return std::sqrt(std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d));
  }

  /// Same projective map, largest component scaled to 1.
  Matrix2 rescaled() const noexcept {
    const Real s = max_abs();
    if (s == Real(0) || !std::isfinite(s)) return *this;
    return {a / s, b / s, c / s, d / s};
  }

  BasicSpherePoint<Real> act(const BasicSpherePoint<Real>& p) const {
    return BasicSpherePoint<Real>(a * p.z() + b * p.w(), c * p.z() + d * p.w());
  }

  friend Matrix2 operator*(const Matrix2& m, const Matrix2& n) noexcept {
    return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d, m.c * n.a + m.d * n.c,
            m.c * n.b + m.d * n.d};
  }

  friend Matrix2 operator+(const Matrix2& m, const Matrix2& n) noexcept {
    return {m.a + n.a, m.b + n.b, m.c + n.c, m.d + n.d};
  }

  friend Matrix2 operator*(complex_type s, const Matrix2& m) noexcept {
    return {s * m.a, s * m.b, s * m.c, s * m.d};
  }

  friend bool operator==(const Matrix2&, const Matrix2&) = default;
};

namespace detail {

template <std::floating_point Real>
Matrix2<Real> projective_power(Matrix2<Real> base, std::size_t n) {
  Matrix2<Real> result{};
  base = base.rescaled();
  while (n > 0) {
    if (n & 1U) result = (result * base).rescaled();
    n >>= 1U;
    if (n > 0) base = (base * base).rescaled();
  }
  return result;
}

}  // namespace detail

enum class MapType { identity, elliptic, parabolic, hyperbolic, loxodromic };

constexpr std::string_view to_string(MapType t) noexcept {
  switch (t) {
    case MapType::identity: return "identity";
    case MapType::elliptic: return "elliptic";
    case MapType::parabolic: return "parabolic";
    case MapType::hyperbolic: return "hyperbolic";
    case MapType::loxodromic: return "loxodromic";
  }
  return "unknown";
}

/// Trace classes with |lambda| != 1.
constexpr bool is_loxodromic_type(MapType t) noexcept {
  return t == MapType::hyperbolic || t == MapType::loxodromic;
}

template <std::floating_point Real>
struct MapClass {
  MapType tag;
  std::complex<Real> trace;
};

template <std::floating_point Real>
struct MoebiusTolerances {
  Real classification = Real(1e-9);  // parabolic band on the trace
  Real identity = Real(1e-10);       // entrywise distance to +-I
  Real basin = Real(1e-9);           // chordal exclusion zone around the repelling point
};

template <std::floating_point Real>
class BasicMoebiusMap {
 public:
  using real_type = Real;
  using complex_type = std::complex<Real>;
  using matrix_type = Matrix2<Real>;

  BasicMoebiusMap() = default;

  /// Rescales by 1/sqrt(det); a singular matrix is rejected.
  BasicMoebiusMap(complex_type a, complex_type b, complex_type c, complex_type d)
      : BasicMoebiusMap(matrix_type{a, b, c, d}) {}

  explicit BasicMoebiusMap(const matrix_type& m) {
    const Real scale = m.max_abs();
    if (!std::isfinite(scale)) throw InvalidArgument("matrix", "entries must be finite");
    if (scale == Real(0)) throw InvalidArgument("matrix", "zero matrix is not invertible");
    const matrix_type unit = m.rescaled();
    const complex_type det = unit.det();
    if (!(std::abs(det) >= std::numeric_limits<Real>::min())) {
      throw InvalidArgument("matrix", "determinant is zero; not a Moebius map");
    }
    const complex_type root = std::sqrt(det);
    m_ = {unit.a / root, unit.b / root, unit.c / root, unit.d / root};
    if (m_.max_abs() > std::numeric_limits<Real>::max() / 4) {
      throw InvalidArgument("matrix", "SL(2,C) representative overflows");
    }
  }

  static BasicMoebiusMap identity() { return BasicMoebiusMap(); }

  /// Takes a matrix whose determinant is 1 by construction (a product or a
  /// closed-form exponential) without renormalizing. For large entries the
  /// computed determinant is far less accurate than the entries themselves.
  static BasicMoebiusMap from_unimodular(const matrix_type& m) {
    const Real scale = m.max_abs();
    if (!std::isfinite(scale) || scale > std::numeric_limits<Real>::max() / 4) {
      throw InvalidArgument("matrix", "SL(2,C) representative overflows");
    }
    BasicMoebiusMap f;
    f.m_ = m;
    return f;
  }

  const matrix_type& matrix() const noexcept { return m_; }
  const complex_type& a() const noexcept { return m_.a; }
  const complex_type& b() const noexcept { return m_.b; }
  const complex_type& c() const noexcept { return m_.c; }
  const complex_type& d() const noexcept { return m_.d; }
  complex_type trace() const noexcept { return m_.trace(); }
  complex_type det() const noexcept { return m_.det(); }

  BasicSpherePoint<Real> operator()(const BasicSpherePoint<Real>& p) const { return m_.act(p); }

  bool is_identity(Real tolerance = MoebiusTolerances<Real>{}.identity) const noexcept {
    auto near = [&](const complex_type& s) {
      return std::abs(m_.a - s) <= tolerance && std::abs(m_.d - s) <= tolerance &&
             std::abs(m_.b) <= tolerance && std::abs(m_.c) <= tolerance;
    };
    return near(complex_type(1)) || near(complex_type(-1));
  }

  friend bool operator==(const BasicMoebiusMap&, const BasicMoebiusMap&) = default;

 private:
  matrix_type m_{};
};

using MoebiusMap = BasicMoebiusMap<double>;

/// (f o g)(x) = f(g(x)).
template <std::floating_point Real>
BasicMoebiusMap<Real> compose(const BasicMoebiusMap<Real>& f, const BasicMoebiusMap<Real>& g) {
  return BasicMoebiusMap<Real>::from_unimodular(f.matrix() * g.matrix());
}

template <std::floating_point Real>
BasicMoebiusMap<Real> inverse(const BasicMoebiusMap<Real>& f) {
  return BasicMoebiusMap<Real>::from_unimodular({f.d(), -f.b(), -f.c(), f.a()});
}

template <std::floating_point Real>
BasicSpherePoint<Real> apply(const BasicMoebiusMap<Real>& f, const BasicSpherePoint<Real>& p) {
  return f(p);
}

/// f^n by repeated squaring; intermediate products are rescaled so large
/// powers do not overflow before the final det normalization.
template <std::floating_point Real>
BasicMoebiusMap<Real> power(const BasicMoebiusMap<Real>& f, std::size_t n) {
  return BasicMoebiusMap<Real>(detail::projective_power(f.matrix(), n));
}

/// Trace rules, in order: +-I, parabolic band, elliptic, hyperbolic, loxodromic.
template <std::floating_point Real>
MapClass<Real> classify(const BasicMoebiusMap<Real>& f,
                        const MoebiusTolerances<Real>& tol = {}) {
  const auto tr = f.trace();
  if (f.is_identity(tol.identity)) return {MapType::identity, tr};
  if (std::abs(tr.imag()) <= tol.classification) {
    const Real re = std::abs(tr.real());
    if (std::abs(re - Real(2)) <= tol.classification) return {MapType::parabolic, tr};
    if (re < Real(2)) return {MapType::elliptic, tr};
    return {MapType::hyperbolic, tr};
  }
  return {MapType::loxodromic, tr};
}

template <std::floating_point Real>
struct FixedPointData {
  std::vector<BasicSpherePoint<Real>> points;
  std::vector<Real> multipliers;           // |f'| at each point, chart chosen per point
  std::optional<std::size_t> attracting;   // index with multiplier < 1
  MapType type{MapType::identity};

  std::optional<std::size_t> repelling() const {
    if (!attracting || points.size() != 2) return std::nullopt;
    return 1 - *attracting;
  }
};

namespace detail {

// |f'| at a fixed point: 1/|cz + d|^2 in the affine chart, 1/|a + bu|^2 in the
// chart u = 1/z at infinity. Whichever chart keeps the point inside the unit disk.
template <std::floating_point Real>
Real fixed_point_multiplier(const BasicMoebiusMap<Real>& f, const BasicSpherePoint<Real>& p) {
  if (std::abs(p.w()) >= std::abs(p.z())) {
    const auto z = p.z() / p.w();
    return Real(1) / std::norm(f.c() * z + f.d());
  }
  const auto u = p.w() / p.z();
  return Real(1) / std::norm(f.a() + f.b() * u);
}

}  // namespace detail

/// Roots of c z^2 + (d - a) z - b = 0 on the sphere.
///
/// Solved in homogeneous form c z^2 + (d - a) z w - b w^2 = 0, which covers
/// c = 0 without a special case: infinity is then a root, the other root is
/// b/(d - a), and a translation (d = a) leaves infinity as the only one.
template <std::floating_point Real>
FixedPointData<Real> fixed_points(const BasicMoebiusMap<Real>& f,
                                  const MoebiusTolerances<Real>& tol = {}) {
  using C = std::complex<Real>;
  const auto cls = classify(f, tol);
  if (cls.tag == MapType::identity) {
    throw DomainError("fixed_points: identity map, every point fixed");
  }
  const C qa = f.c();
  const C qb = f.d() - f.a();
  const C qc = -f.b();
  const C root = std::sqrt(qb * qb - Real(4) * qa * qc);
  // Pick the sign that avoids cancellation in -(qb +- root)/2.
  const C q = (std::real(std::conj(qb) * root) >= Real(0)) ? -(qb + root) / Real(2)
                                                           : -(qb - root) / Real(2);
  // Roots are [q : qa] and [qc : q].
  auto usable = [](const C& x, const C& y) { return std::max(std::abs(x), std::abs(y)); };

  FixedPointData<Real> data;
  data.type = cls.tag;
  if (cls.tag == MapType::parabolic) {
    // Double root. The discriminant is pure rounding here and its square root
    // would move the point by sqrt(eps); the midpoint -qb/2 does not.
    const C half = -qb / Real(2);
    if (usable(half, qa) >= usable(qc, half)) {
      data.points.emplace_back(half, qa);
    } else {
      data.points.emplace_back(qc, half);
    }
  } else {
    data.points.emplace_back(q, qa);
    data.points.emplace_back(qc, q);
  }
  for (const auto& p : data.points) data.multipliers.push_back(detail::fixed_point_multiplier(f, p));

  if (is_loxodromic_type(cls.tag)) {
    data.attracting = data.multipliers[0] < data.multipliers[1] ? 0 : 1;
  }
  return data;
}

template <std::floating_point Real>
struct NormalForm {
  BasicMoebiusMap<Real> conjugator;  // h with h o f o h^-1 = (z -> lambda z)
  std::complex<Real> lambda;         // 0 < |lambda| < 1
  BasicSpherePoint<Real> attracting;
  BasicSpherePoint<Real> repelling;
};

/// Conjugator sending the attracting point p to 0 and the repelling point q to
/// infinity: (z - p)/(z - q), or 1/(z - q) when p = inf, or z - p when q = inf.
template <std::floating_point Real>
NormalForm<Real> loxodromic_normal_form(const BasicMoebiusMap<Real>& f,
                                        const MoebiusTolerances<Real>& tol = {}) {
  using C = std::complex<Real>;
  const auto cls = classify(f, tol);
  if (!is_loxodromic_type(cls.tag)) {
    throw DomainError("loxodromic_normal_form: not loxodromic-type (map is " +
                      std::string(to_string(cls.tag)) + ")");
  }
  const auto fp = fixed_points(f, tol);
  auto p = fp.points[*fp.attracting];
  auto q = fp.points[*fp.repelling()];

  auto conjugator_for = [](const BasicSpherePoint<Real>& at_zero,
                           const BasicSpherePoint<Real>& at_inf) {
    const C pz = at_zero.z(), pw = at_zero.w(), qz = at_inf.z(), qw = at_inf.w();
    if (at_zero.is_infinity()) return BasicMoebiusMap<Real>(C(0), qw, qw, -qz);
    if (at_inf.is_infinity()) return BasicMoebiusMap<Real>(pw, -pz, C(0), pw);
    return BasicMoebiusMap<Real>(qw * pw, -qw * pz, pw * qw, -pw * qz);
  };

  auto h = conjugator_for(p, q);
  auto g = compose(compose(h, f), inverse(h));
  C lambda = g.a() / g.d();
  if (std::abs(lambda) > Real(1)) {
    std::swap(p, q);
    h = conjugator_for(p, q);
    g = compose(compose(h, f), inverse(h));
    lambda = g.a() / g.d();
  }
  return {h, lambda, p, q};
}

/// x, f(x), ..., f^n_max(x); entry k uses the k-th power by repeated squaring.
template <std::floating_point Real>
std::vector<BasicSpherePoint<Real>> iterate_orbit(const BasicMoebiusMap<Real>& f,
                                                  const BasicSpherePoint<Real>& x,
                                                  std::size_t n_max) {
  if (n_max == 0) throw InvalidArgument("n_max", "must be at least 1");
  std::vector<BasicSpherePoint<Real>> orbit;
  orbit.reserve(n_max + 1);
  for (std::size_t k = 0; k <= n_max; ++k) {
    orbit.push_back(detail::projective_power(f.matrix(), k).act(x));
  }
  return orbit;
}

enum class BasinMembership { inside, outside, boundary_undecided };

constexpr std::string_view to_string(BasinMembership b) noexcept {
  switch (b) {
    case BasinMembership::inside: return "inside";
    case BasinMembership::outside: return "outside";
    case BasinMembership::boundary_undecided: return "boundary-undecided";
  }
  return "unknown";
}

/// The basin of a loxodromic-type Moebius map is the sphere minus its repelling
/// point, so `outside` never occurs; points within tolerance of q are undecided.
template <std::floating_point Real>
BasinMembership in_attracting_basin(const BasicMoebiusMap<Real>& f,
                                    const BasicSpherePoint<Real>& x,
                                    const MoebiusTolerances<Real>& tol = {}) {
  const auto nf = loxodromic_normal_form(f, tol);
  if (chordal_distance(x, nf.repelling) <= tol.basin) return BasinMembership::boundary_undecided;
  return BasinMembership::inside;
}

}  // namespace equibaire
