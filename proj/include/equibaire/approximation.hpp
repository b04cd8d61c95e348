#pragma once

// Countable families of flow members that approximate the whole compact flow
// uniformly on a grid.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "equibaire/error.hpp"
#include "equibaire/flow.hpp"
#include "equibaire/moebius.hpp"
#include "equibaire/sphere.hpp"

namespace equibaire {

template <std::floating_point Real>
struct ApproximatingSequence {
  std::vector<Real> times;  // t_m in [0, period)
  std::vector<BasicMoebiusMap<Real>> maps;
  Real period{};  // 2 pi / theta; 0 for the zero generator
  std::optional<std::pair<std::int64_t, std::int64_t>> rotation;  // theta / pi = p / q when rational
};

namespace detail {

/// Best rational p / q with q <= max_den, accepted if within tol of x.
template <std::floating_point Real>
std::optional<std::pair<std::int64_t, std::int64_t>> small_rational(Real x, std::int64_t max_den,
                                                                    Real tol) {
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  Real y = x;
  for (int i = 0; i < 64; ++i) {
    const Real a = std::floor(y);
    if (std::abs(a) > Real(1e15)) break;
    const auto ai = static_cast<std::int64_t>(a);
    const std::int64_t p2 = ai * p1 + p0, q2 = ai * q1 + q0;
    if (q2 > max_den) break;
    if (std::abs(x - Real(p2) / Real(q2)) <= tol * std::max(Real(1), std::abs(x))) {
      return std::pair{p2, q2};
    }
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    const Real frac = y - a;
    if (frac == Real(0)) break;
    y = Real(1) / frac;
  }
  return std::nullopt;
}

/// Fraction of the period for term m of a nested refinement: 20 equal steps,
/// then midpoints of the previous level, level by level.
template <std::floating_point Real>
Real refinement_fraction(std::size_t m) {
  constexpr std::size_t base = 20;
  if (m < base) return Real(m) / Real(base);
  std::size_t level_size = base;  // points added at the current level
  std::size_t start = base;
  std::size_t den = 2 * base;
  while (m >= start + level_size) {
    start += level_size;
    level_size *= 2;
    den *= 2;
  }
  return Real(2 * (m - start) + 1) / Real(den);
}

}  // namespace detail

/// h_m = exp(t_m A) for m < m_max. The zero generator gives identities. For
/// theta / pi rational (denominator <= 1000) the times refine [0, T) level by
/// level, so the 20 probe times jT/20 are hit exactly; otherwise t_m = m mod T,
/// which equidistributes.
template <std::floating_point Real>
ApproximatingSequence<Real> approximating_sequence(const BasicFlowGenerator<Real>& a,
                                                   std::size_t m_max) {
  if (m_max == 0) throw InvalidArgument("m_max", "must be positive");
  const auto type = classify_subgroup(a);
  if (type.tag != SubgroupKind::trivial && type.tag != SubgroupKind::elliptic) {
    throw DomainError("approximating_sequence: generator is not relatively compact");
  }
  ApproximatingSequence<Real> seq;
  seq.times.reserve(m_max);
  seq.maps.reserve(m_max);
  if (type.tag == SubgroupKind::trivial) {
    seq.times.assign(m_max, Real(0));
    seq.maps.assign(m_max, BasicMoebiusMap<Real>::identity());
    return seq;
  }
  const Real theta = *type.theta;
  seq.period = Real(2) * std::numbers::pi_v<Real> / theta;
  seq.rotation = detail::small_rational(theta / std::numbers::pi_v<Real>, 1000, Real(1e-12));
  for (std::size_t m = 0; m < m_max; ++m) {
    const Real t = seq.rotation ? seq.period * detail::refinement_fraction<Real>(m)
                                : std::fmod(Real(m), seq.period);
    seq.times.push_back(t);
    seq.maps.push_back(flow_exp(a, t));
  }
  return seq;
}

/// Upper bound on max over probes t_j = jT/20 of
///   min_m sup_{x in K} d(h_m(x), exp(t_j A)(x)).
/// The min is taken over the few terms nearest to t_j on the circle [0, T),
/// which is where it is attained for a rotation.
template <std::floating_point Real>
Real density_error(const BasicFlowGenerator<Real>& a, const ApproximatingSequence<Real>& seq,
                   const BasicSphereGrid<Real>& k, std::size_t probes = 20,
                   std::size_t neighbours = 3) {
  if (k.points.empty()) throw InvalidArgument("grid", "must be nonempty");
  if (seq.maps.empty()) throw InvalidArgument("sequence", "must be nonempty");
  auto sup_distance = [&](const BasicMoebiusMap<Real>& h, const BasicMoebiusMap<Real>& f) {
    Real s = 0;
    for (const auto& x : k.points) s = std::max(s, chordal_distance(h(x), f(x)));
    return s;
  };

  const std::size_t n = seq.times.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return seq.times[i] < seq.times[j]; });

  Real worst = 0;
  for (std::size_t j = 0; j < probes; ++j) {
    const Real t = seq.period * (Real(j) / Real(probes));
    const auto target = flow_exp(a, t);
    const auto pos = static_cast<std::size_t>(
        std::lower_bound(order.begin(), order.end(), t,
                         [&](std::size_t i, Real v) { return seq.times[i] < v; }) -
        order.begin());
    Real best = Real(1);
    const std::size_t span = std::min(n, 2 * neighbours);
    for (std::size_t s = 0; s < span; ++s) {
      const std::size_t idx = order[(pos + s + n * neighbours - neighbours) % n];
      best = std::min(best, sup_distance(seq.maps[idx], target));
      if (best == Real(0)) break;
    }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace equibaire
