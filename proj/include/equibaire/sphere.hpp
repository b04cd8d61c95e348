#pragma once

// Riemann sphere geometry in homogeneous coordinates.
//
// A point [z : w] is stored with |z|^2 + |w|^2 = 1. The chordal metric is then
// the single expression |z1 w2 - z2 w1|, which agrees with
//   d(z1, z2) = |z1 - z2| / sqrt((1 + |z1|^2)(1 + |z2|^2)),  d(z, inf) = (1 + |z|^2)^(-1/2)
// on affine points. With this normalization the sphere has diameter 1, and the
// embedding below places it in R^3 as the sphere of radius 1/2 about the origin,
// with infinity at the north pole (0, 0, 1/2) and 0 at the south pole.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "equibaire/error.hpp"

namespace equibaire {

template <std::floating_point Real>
class BasicSpherePoint {
 public:
  using real_type = Real;
  using complex_type = std::complex<Real>;

  static constexpr Real default_equality_tolerance = Real(1e-10);

  /// Homogeneous pair [z : w]; normalized on construction.
  BasicSpherePoint(complex_type z, complex_type w) {
    if (!is_finite(z) || !is_finite(w)) {
      throw InvalidArgument("point", "homogeneous coordinates must be finite numbers");
    }
    Real scale = std::max({std::abs(z.real()), std::abs(z.imag()), std::abs(w.real()),
                           std::abs(w.imag())});
    if (scale == Real(0)) {
      throw InvalidArgument("point", "[0 : 0] is not a point of the sphere");
    }
    z /= scale;
    w /= scale;
    const Real norm = std::hypot(std::abs(z), std::abs(w));
    z_ = z / norm;
    w_ = w / norm;
  }

  static BasicSpherePoint from_affine(complex_type c) {
    if (std::isnan(c.real()) || std::isnan(c.imag())) {
      throw InvalidArgument("affine", "NaN is not a point of the sphere");
    }
    if (std::isinf(c.real()) || std::isinf(c.imag())) return infinity();
    return BasicSpherePoint(c, complex_type(1));
  }

  static BasicSpherePoint infinity() { return BasicSpherePoint(complex_type(1), complex_type(0)); }
  static BasicSpherePoint zero() { return BasicSpherePoint(complex_type(0), complex_type(1)); }

  const complex_type& z() const noexcept { return z_; }
  const complex_type& w() const noexcept { return w_; }

  /// Exactly the point at infinity (w == 0). Use chordal distance for approximate tests.
  bool is_infinity() const noexcept { return w_ == complex_type(0); }

  /// z / w, or nullopt at infinity.
  std::optional<complex_type> affine() const {
    if (is_infinity()) return std::nullopt;
    return z_ / w_;
  }

  bool approx_equal(const BasicSpherePoint& other,
                    Real tolerance = default_equality_tolerance) const noexcept {
    return std::abs(z_ * other.w_ - other.z_ * w_) <= tolerance;
  }

 private:
  static bool is_finite(const complex_type& c) noexcept {
    return std::isfinite(c.real()) && std::isfinite(c.imag());
  }

  complex_type z_;
  complex_type w_;
};

using SpherePoint = BasicSpherePoint<double>;

template <std::floating_point Real>
Real chordal_distance(const BasicSpherePoint<Real>& p, const BasicSpherePoint<Real>& q) noexcept {
  return std::min(Real(1), std::abs(p.z() * q.w() - q.z() * p.w()));
}

/// Image on the sphere of diameter 1 centred at the origin; Euclidean chord
/// length between images equals the chordal distance.
template <std::floating_point Real>
std::array<Real, 3> stereographic_embed(const BasicSpherePoint<Real>& p) noexcept {
  const auto zw = p.z() * std::conj(p.w());
  return {zw.real(), zw.imag(), (std::norm(p.z()) - std::norm(p.w())) / Real(2)};
}

template <std::floating_point Real>
BasicSpherePoint<Real> stereographic_inverse(std::array<Real, 3> x) {
  const Real len = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  if (!(len > Real(0)) || !std::isfinite(len)) {
    throw InvalidArgument("embedded point", "must be a finite nonzero vector");
  }
  for (auto& c : x) c *= Real(0.5) / len;
  using C = std::complex<Real>;
  const C zw(x[0], x[1]);
  const Real zz = std::clamp(Real(0.5) + x[2], Real(0), Real(1));
  const Real ww = std::clamp(Real(0.5) - x[2], Real(0), Real(1));
  if (zz >= ww) {
    const Real z = std::sqrt(zz);
    return BasicSpherePoint<Real>(C(z), std::conj(zw) / z);
  }
  const Real w = std::sqrt(ww);
  return BasicSpherePoint<Real>(zw / w, C(w));
}

template <std::floating_point Real>
struct BasicChordalBall {
  BasicChordalBall(BasicSpherePoint<Real> c, Real r) : center(c), radius(r) {
    if (!(r > Real(0)) || !(r <= Real(1))) {
      throw InvalidArgument("radius", "chordal ball radius must lie in (0, 1]");
    }
  }

  bool contains(const BasicSpherePoint<Real>& p) const noexcept {
    return chordal_distance(center, p) < radius;
  }

  BasicSpherePoint<Real> center;
  Real radius;
};

using ChordalBall = BasicChordalBall<double>;

// How a grid was generated, kept with the points for reports.
struct FibonacciDescriptor {
  std::size_t count{};
};

template <std::floating_point Real>
struct AffineDescriptor {
  Real re_min{}, re_max{}, im_min{}, im_max{}, step{};
};

template <std::floating_point Real>
struct BallDescriptor {
  BasicSpherePoint<Real> center = BasicSpherePoint<Real>::zero();
  Real radius{};
  std::size_t count{};
};

struct RandomDescriptor {
  std::size_t count{};
};

template <std::floating_point Real>
struct BasicSphereGrid {
  using descriptor_type = std::variant<FibonacciDescriptor, AffineDescriptor<Real>,
                                       BallDescriptor<Real>, RandomDescriptor>;

  std::vector<BasicSpherePoint<Real>> points;
  descriptor_type descriptor;
  std::uint64_t seed{};
};

using SphereGrid = BasicSphereGrid<double>;

namespace detail {

template <std::floating_point Real>
inline const Real golden_angle = std::numbers::pi_v<Real> * (Real(3) - std::sqrt(Real(5)));

// Point at chordal distance s from infinity with longitude phi, in the frame
// where infinity is the north pole.
template <std::floating_point Real>
BasicSpherePoint<Real> polar_point(Real s, Real phi) {
  using C = std::complex<Real>;
  return BasicSpherePoint<Real>(C(std::sqrt(std::max(Real(0), Real(1) - s * s))),
                                std::polar(s, phi));
}

// SU(2) rotation taking infinity = [1 : 0] to `center`; an isometry of the chordal metric.
template <std::floating_point Real>
BasicSpherePoint<Real> rotate_from_pole(const BasicSpherePoint<Real>& center,
                                        const BasicSpherePoint<Real>& p) {
  const auto& cz = center.z();
  const auto& cw = center.w();
  return BasicSpherePoint<Real>(cz * p.z() - std::conj(cw) * p.w(),
                                cw * p.z() + std::conj(cz) * p.w());
}

}  // namespace detail

/// Spherical Fibonacci lattice of n points, area-uniform.
template <std::floating_point Real = double>
BasicSphereGrid<Real> fibonacci_grid(std::size_t n) {
  if (n == 0) throw InvalidArgument("count", "grid size must be positive");
  BasicSphereGrid<Real> grid{{}, FibonacciDescriptor{n}, 0};
  grid.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Real u = (Real(i) + Real(0.5)) / Real(n);  // |w|^2, uniform in area
    grid.points.push_back(
        detail::polar_point(std::sqrt(u), Real(i) * detail::golden_angle<Real>));
  }
  return grid;
}

/// First n points of a Fibonacci lattice that avoid the given ball.
template <std::floating_point Real>
BasicSphereGrid<Real> fibonacci_grid_excluding(std::size_t n, const BasicChordalBall<Real>& hole) {
  if (n == 0) throw InvalidArgument("count", "grid size must be positive");
  // A chordal cap of radius r covers a fraction r^2 of the sphere.
  const Real keep = Real(1) - hole.radius * hole.radius;
  if (keep <= Real(0)) throw InvalidArgument("radius", "excluded ball covers the sphere");
  std::size_t total = static_cast<std::size_t>(std::ceil(Real(n) / keep)) + 1;
  for (;;) {
    auto lattice = fibonacci_grid<Real>(total);
    BasicSphereGrid<Real> grid{{}, FibonacciDescriptor{total}, 0};
    for (const auto& p : lattice.points) {
      if (!hole.contains(p)) grid.points.push_back(p);
      if (grid.points.size() == n) return grid;
    }
    total += total / 16 + 1;
  }
}

/// Rectangular lattice in the affine chart, bounds inclusive.
template <std::floating_point Real>
BasicSphereGrid<Real> affine_grid(Real re_min, Real re_max, Real im_min, Real im_max, Real step) {
  if (!(step > Real(0))) throw InvalidArgument("step", "must be positive");
  if (!(re_min <= re_max) || !(im_min <= im_max)) {
    throw InvalidArgument("bounds", "minimum exceeds maximum");
  }
  BasicSphereGrid<Real> grid{{}, AffineDescriptor<Real>{re_min, re_max, im_min, im_max, step}, 0};
  const auto nx = static_cast<std::size_t>(std::floor((re_max - re_min) / step + Real(1e-9))) + 1;
  const auto ny = static_cast<std::size_t>(std::floor((im_max - im_min) / step + Real(1e-9))) + 1;
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      grid.points.push_back(BasicSpherePoint<Real>::from_affine(
          {re_min + Real(i) * step, im_min + Real(j) * step}));
    }
  }
  return grid;
}

/// n deterministic points strictly inside `ball`.
///
/// Points lie on a Fibonacci spiral over the cap, area-uniform, with a seeded
/// phase and radial offset. The outermost point is pushed beyond 0.96 r so the
/// boundary region is always represented.
template <std::floating_point Real>
BasicSphereGrid<Real> chordal_ball_grid(const BasicChordalBall<Real>& ball, std::size_t n,
                                        std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("n", "sample count must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Real> unit(Real(0), Real(1));
  const Real radial_offset = unit(rng);
  const Real phase = Real(2) * std::numbers::pi_v<Real> * unit(rng);

  BasicSphereGrid<Real> grid{{}, BallDescriptor<Real>{ball.center, ball.radius, n}, seed};
  grid.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Real u = (Real(i) + Real(0.5) + Real(0.5) * radial_offset) / Real(n);
    if (i + 1 == n) u = std::max(u, Real(0.9216));
    Real s = ball.radius * std::sqrt(u);
    const Real phi = phase + Real(i) * detail::golden_angle<Real>;
    auto p = detail::rotate_from_pole(ball.center, detail::polar_point(s, phi));
    // Rejection against rounding at the rim.
    while (!ball.contains(p)) {
      s *= Real(1) - Real(1e-9);
      p = detail::rotate_from_pole(ball.center, detail::polar_point(s, phi));
    }
    grid.points.push_back(p);
  }
  return grid;
}

/// n independent uniform points on the sphere.
template <std::floating_point Real = double>
BasicSphereGrid<Real> random_sphere_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Real> unit(Real(0), Real(1));
  BasicSphereGrid<Real> grid{{}, RandomDescriptor{n}, seed};
  grid.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Real u = unit(rng);
    const Real phi = Real(2) * std::numbers::pi_v<Real> * unit(rng);
    grid.points.push_back(detail::polar_point(std::sqrt(u), phi));
  }
  return grid;
}

}  // namespace equibaire
