#pragma once

// One-parameter subgroups t -> exp(tA) of SL(2,C) for trace-zero A.
//
// For trace-zero A the eigenvalues are +-mu with mu^2 = -det(A), and
//   exp(tA) = cosh(t mu) I + (sinh(t mu) / mu) A,
// with the mu -> 0 limit I + tA. Every formula is even in mu, so the square
// root branch does not matter.

#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "equibaire/error.hpp"
#include "equibaire/moebius.hpp"
#include "equibaire/sphere.hpp"

namespace equibaire {

template <std::floating_point Real>
struct FlowTolerances {
  Real trace = Real(1e-10);       // |tr A| allowed on input
  Real zero = Real(1e-8);         // ||A||_F at or below this is the zero generator
  Real nilpotent = Real(1e-6);    // |mu| <= nilpotent * ||A||_F counts as mu = 0
  Real axis = Real(1e-9);         // |Re mu| or |Im mu| <= axis * max(1, ||A||_F) lies on an axis
  Real unitarity = Real(1e-8);    // compactness certificate check
  Real growth_threshold = Real(10);
  int growth_probe_exponent = 10;      // t in {1, 2, ..., 2^10} first
  int growth_probe_exponent_cap = 62;  // extended geometrically for slow generators
};

template <std::floating_point Real>
class BasicFlowGenerator {
 public:
  using real_type = Real;
  using complex_type = std::complex<Real>;
  using matrix_type = Matrix2<Real>;

  BasicFlowGenerator() : BasicFlowGenerator(matrix_type{0, 0, 0, 0}) {}

  explicit BasicFlowGenerator(const matrix_type& a, const FlowTolerances<Real>& tol = {})
      : a_(a), tol_(tol) {
    for (const auto& e : {a.a, a.b, a.c, a.d}) {
      if (!std::isfinite(e.real()) || !std::isfinite(e.imag())) {
        throw InvalidArgument("A", "generator entries must be finite");
      }
    }
    if (std::abs(a.trace()) > tol.trace) {
      throw InvalidArgument(
          "A", "generator must have trace zero (det(exp(tA)) = e^{t tr A} is 1 for all t "
               "only when tr A = 0)");
    }
    // Eigenvalues of A - (tr A / 2) I; removes the admitted trace residue.
    const complex_type half_diff = (a.a - a.d) / Real(2);
    mu_ = std::sqrt(half_diff * half_diff + a.b * a.c);
  }

  const matrix_type& matrix() const noexcept { return a_; }
  const FlowTolerances<Real>& tolerances() const noexcept { return tol_; }

  /// Principal root of -det(A); eigenvalues are +-mu.
  const complex_type& mu() const noexcept { return mu_; }

  Real norm() const noexcept { return a_.frobenius_norm(); }
  bool is_zero() const noexcept { return norm() <= tol_.zero; }

  bool is_nilpotent_nonzero() const noexcept {
    return !is_zero() && std::abs(mu_) <= tol_.nilpotent * norm();
  }

  bool is_diagonalizable() const noexcept { return !is_nilpotent_nonzero(); }

  /// mu = 0 after applying the nilpotent band.
  bool mu_vanishes() const noexcept { return is_zero() || is_nilpotent_nonzero(); }

  friend bool operator==(const BasicFlowGenerator& x, const BasicFlowGenerator& y) {
    return x.a_ == y.a_;
  }

 private:
  matrix_type a_;
  FlowTolerances<Real> tol_;
  complex_type mu_{};
};

using FlowGenerator = BasicFlowGenerator<double>;

namespace detail {

// exp(tA) divided by e^m with m = |Re(t mu)|; returns (matrix, m).
template <std::floating_point Real>
std::pair<Matrix2<Real>, Real> scaled_exp(const BasicFlowGenerator<Real>& gen, Real t) {
  using C = std::complex<Real>;
  const auto& a = gen.matrix();
  const C mu = gen.mu();
  const C x = t * mu;
  const Real ax = std::abs(x);
  if (mu == C(0)) {
    return {Matrix2<Real>{} + C(t) * a, Real(0)};
  }
  if (ax < Real(1e-3)) {
    const C x2 = x * x;
    const C ch = Real(1) + x2 / Real(2) + x2 * x2 / Real(24) + x2 * x2 * x2 / Real(720);
    const C sh_over_mu =
        t * (Real(1) + x2 / Real(6) + x2 * x2 / Real(120) + x2 * x2 * x2 / Real(5040));
    return {ch * Matrix2<Real>{} + sh_over_mu * a, Real(0)};
  }
  const Real m = std::abs(x.real());
  const C ep = std::exp(x - m);
  const C em = std::exp(-x - m);
  if (ax < Real(1)) {
    const C ch = (ep + em) / Real(2);
    const C sh = (ep - em) / Real(2);
    return {ch * Matrix2<Real>{} + (sh / mu) * a, m};
  }
  // Spectral projectors (I +- A/mu)/2. Same matrix as the cosh/sinh form, but
  // the small eigenvalue's contribution is not lost to cancellation.
  const Matrix2<Real> a_over_mu = (Real(1) / mu) * a;
  const Matrix2<Real> p_plus = C(Real(0.5)) * (Matrix2<Real>{} + a_over_mu);
  const Matrix2<Real> p_minus = C(Real(0.5)) * (Matrix2<Real>{} + C(-1) * a_over_mu);
  return {ep * p_plus + em * p_minus, m};
}

}  // namespace detail

/// Projective representative of exp(tA) for acting on points; finite for all t.
template <std::floating_point Real>
Matrix2<Real> flow_action(const BasicFlowGenerator<Real>& gen, Real t) {
  return detail::scaled_exp(gen, t).first.rescaled();
}

/// log ||exp(tA)||_F, finite even when the norm itself overflows.
template <std::floating_point Real>
Real flow_log_norm(const BasicFlowGenerator<Real>& gen, Real t) {
  const auto [m, shift] = detail::scaled_exp(gen, t);
  return std::log(m.frobenius_norm()) + shift;
}

/// exp(tA) in closed form as an SL(2,C) matrix.
template <std::floating_point Real>
BasicMoebiusMap<Real> flow_exp(const BasicFlowGenerator<Real>& gen, Real t) {
  const auto [m, shift] = detail::scaled_exp(gen, t);
  if (shift > Real(0.45) * std::log(std::numeric_limits<Real>::max())) {
    throw std::overflow_error("flow_exp: exp(tA) is not representable at this t");
  }
  const Real s = std::exp(shift);
  return BasicMoebiusMap<Real>::from_unimodular({m.a * s, m.b * s, m.c * s, m.d * s});
}

enum class SubgroupKind { trivial, elliptic, hyperbolic, parabolic, loxodromic };

constexpr std::string_view to_string(SubgroupKind k) noexcept {
  switch (k) {
    case SubgroupKind::trivial: return "trivial";
    case SubgroupKind::elliptic: return "elliptic";
    case SubgroupKind::hyperbolic: return "hyperbolic";
    case SubgroupKind::parabolic: return "parabolic";
    case SubgroupKind::loxodromic: return "loxodromic";
  }
  return "unknown";
}

template <std::floating_point Real>
struct SubgroupType {
  SubgroupKind tag{SubgroupKind::trivial};
  std::optional<Real> theta;                  // elliptic: eigenvalues +-i theta
  std::optional<Real> rate;                   // hyperbolic: eigenvalues +-rate
  std::optional<std::complex<Real>> exponent; // loxodromic: alpha + i beta, alpha > 0
};

template <std::floating_point Real>
SubgroupType<Real> classify_subgroup(const BasicFlowGenerator<Real>& gen) {
  if (gen.is_zero()) return {SubgroupKind::trivial, std::nullopt, std::nullopt, std::nullopt};
  if (gen.is_nilpotent_nonzero()) return {SubgroupKind::parabolic, std::nullopt, std::nullopt, std::nullopt};
  const auto mu = gen.mu();
  const Real band = gen.tolerances().axis * std::max(Real(1), gen.norm());
  if (std::abs(mu.real()) <= band) {
    return {SubgroupKind::elliptic, std::abs(mu.imag()), std::nullopt, std::nullopt};
  }
  if (std::abs(mu.imag()) <= band) {
    return {SubgroupKind::hyperbolic, std::nullopt, std::abs(mu.real()), std::nullopt};
  }
  const auto oriented = mu.real() > Real(0) ? mu : -mu;
  return {SubgroupKind::loxodromic, std::nullopt, std::nullopt, oriented};
}

template <std::floating_point Real>
struct CompactnessCertificate {
  Matrix2<Real> conjugator;                     // P with P^-1 A P = diag(mu, -mu)
  std::vector<std::pair<Real, Real>> unitarity;  // (t, max |U U* - I|) for U = P^-1 exp(tA) P
};

template <std::floating_point Real>
struct GrowthWitness {
  Real t_star{};
  Real log_norm{};  // log ||exp(t* A)||_F
};

template <std::floating_point Real>
struct CompactnessResult {
  bool compact{};
  std::optional<CompactnessCertificate<Real>> certificate;
  std::optional<GrowthWitness<Real>> witness;
};

namespace detail {

template <std::floating_point Real>
Matrix2<Real> inverse_matrix(const Matrix2<Real>& m) {
  const auto det = m.det();
  return {m.d / det, -m.b / det, -m.c / det, m.a / det};
}

template <std::floating_point Real>
Matrix2<Real> adjoint(const Matrix2<Real>& m) {
  return {std::conj(m.a), std::conj(m.c), std::conj(m.b), std::conj(m.d)};
}

// Unit eigenvector of A for eigenvalue e; picks the better-conditioned of the
// two null-vector formulas of A - eI.
template <std::floating_point Real>
std::pair<std::complex<Real>, std::complex<Real>> eigenvector(const Matrix2<Real>& a,
                                                              std::complex<Real> e) {
  using C = std::complex<Real>;
  C v1 = a.b, v2 = e - a.a;
  C u1 = e - a.d, u2 = a.c;
  if (std::norm(u1) + std::norm(u2) > std::norm(v1) + std::norm(v2)) {
    v1 = u1;
    v2 = u2;
  }
  const Real n = std::sqrt(std::norm(v1) + std::norm(v2));
  return {v1 / n, v2 / n};
}

}  // namespace detail

/// Relatively compact iff A = 0 or A is diagonalizable with purely imaginary
/// eigenvalues. Compact results carry a conjugator into SU(2) checked for
/// unitarity at t in {0.1, 1, 7.3}; others carry a norm growth witness.
template <std::floating_point Real>
CompactnessResult<Real> is_relatively_compact(const BasicFlowGenerator<Real>& gen) {
  using C = std::complex<Real>;
  const auto& tol = gen.tolerances();
  const auto type = classify_subgroup(gen);
  CompactnessResult<Real> result;

  if (type.tag == SubgroupKind::trivial || type.tag == SubgroupKind::elliptic) {
    result.compact = true;
    CompactnessCertificate<Real> cert;
    if (type.tag == SubgroupKind::elliptic) {
      const auto [p1, p2] = detail::eigenvector(gen.matrix(), gen.mu());
      const auto [q1, q2] = detail::eigenvector(gen.matrix(), -gen.mu());
      cert.conjugator = Matrix2<Real>{p1, q1, p2, q2};
    }
    const auto p_inv = detail::inverse_matrix(cert.conjugator);
    for (Real t : {Real(0.1), Real(1), Real(7.3)}) {
      const auto e = flow_exp(gen, t).matrix();
      const auto u = p_inv * e * cert.conjugator;
      const auto uu = u * detail::adjoint(u);
      const Real defect = std::max({std::abs(uu.a - C(1)), std::abs(uu.b), std::abs(uu.c),
                                    std::abs(uu.d - C(1))});
      cert.unitarity.emplace_back(t, defect);
    }
    result.certificate = std::move(cert);
    return result;
  }

  const Real log_threshold = std::log(tol.growth_threshold);
  for (int k = 0; k <= tol.growth_probe_exponent_cap; ++k) {
    const Real t = std::ldexp(Real(1), k);
    const Real ln = flow_log_norm(gen, t);
    if (ln > log_threshold) {
      result.witness = GrowthWitness<Real>{t, ln};
      break;
    }
  }
  return result;
}

/// Images of x under exp(tA) for ascending times.
template <std::floating_point Real>
std::vector<BasicSpherePoint<Real>> flow_trajectory(const BasicFlowGenerator<Real>& gen,
                                                    const BasicSpherePoint<Real>& x,
                                                    const std::vector<Real>& times) {
  if (times.empty()) throw InvalidArgument("times", "must be nonempty");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) throw InvalidArgument("times", "must be finite");
    if (i > 0 && times[i] < times[i - 1]) throw InvalidArgument("times", "must be ascending");
  }
  std::vector<BasicSpherePoint<Real>> out;
  out.reserve(times.size());
  for (Real t : times) out.push_back(flow_action(gen, t).act(x));
  return out;
}

}  // namespace equibaire
