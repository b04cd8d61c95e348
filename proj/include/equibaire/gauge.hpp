#pragma once

// Sampled gauge S(x, r): the largest displacement d(g(y), g(x)) over family
// members g and points y of the chordal ball B_r(x).

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "equibaire/error.hpp"
#include "equibaire/flow.hpp"
#include "equibaire/moebius.hpp"
#include "equibaire/parallel.hpp"
#include "equibaire/sphere.hpp"

namespace equibaire {

enum class FamilyKind { iterates, flow };

constexpr std::string_view to_string(FamilyKind k) noexcept {
  return k == FamilyKind::iterates ? "iterates" : "flow";
}

/// {f^n : 0 <= n <= n_max} or {exp(tA) : t sampled on [0, t_max] plus a tail}.
template <std::floating_point Real>
struct FamilySpec {
  FamilyKind kind{FamilyKind::iterates};
  std::variant<BasicMoebiusMap<Real>, BasicFlowGenerator<Real>> source;
  std::size_t n_max{1000};
  Real t_max{20};
  std::size_t sample_count{200};  // flow: steps of the uniform grid on [0, t_max]

  static FamilySpec iterates(const BasicMoebiusMap<Real>& f, std::size_t n_max = 1000) {
    if (n_max == 0) throw InvalidArgument("nmax", "must be positive");
    return {FamilyKind::iterates, f, n_max, Real(20), 200};
  }

  static FamilySpec flow(const BasicFlowGenerator<Real>& a, Real t_max = 20,
                         std::size_t sample_count = 200) {
    if (!(t_max > Real(0)) || !std::isfinite(t_max)) {
      throw InvalidArgument("tmax", "must be positive and finite");
    }
    if (sample_count == 0) throw InvalidArgument("sample_count", "must be positive");
    return {FamilyKind::flow, a, 1000, t_max, sample_count};
  }

  const BasicMoebiusMap<Real>& map() const { return std::get<BasicMoebiusMap<Real>>(source); }
  const BasicFlowGenerator<Real>& generator() const {
    return std::get<BasicFlowGenerator<Real>>(source);
  }

  /// Iterates: 0, 1, ..., n_max. Flow: k t_max / sample_count for
  /// k = 0..sample_count, then the powers 2^5..2^10 beyond t_max.
  std::vector<Real> parameters() const {
    std::vector<Real> out;
    if (kind == FamilyKind::iterates) {
      out.reserve(n_max + 1);
      for (std::size_t n = 0; n <= n_max; ++n) out.push_back(Real(n));
      return out;
    }
    out.reserve(sample_count + 7);
    for (std::size_t k = 0; k <= sample_count; ++k) {
      out.push_back(t_max * Real(k) / Real(sample_count));
    }
    for (int e = 5; e <= 10; ++e) {
      const Real t = std::ldexp(Real(1), e);
      if (t > t_max) out.push_back(t);
    }
    return out;
  }
};

template <std::floating_point Real>
struct GaugeConfig {
  std::size_t samples_per_ball{512};
  std::uint64_t seed{0};
  std::size_t workers{1};
  Real truncation_fraction{Real(1e-3)};  // stop once the image diameter is below this times r
  Real ratio_band{Real(0.1)};            // decay ratios within this relative band of |lambda|
  std::size_t verify_steps{5};           // extra iterates past truncation used to measure decay
};

/// Per-radius detail behind one gauge value.
template <std::floating_point Real>
struct RadiusSample {
  Real r{};
  Real raw{};         // max displacement seen over the sampled members
  Real tail{};        // bound on members past the truncation index
  std::size_t members{};
  std::optional<std::size_t> truncated_at;
  std::optional<Real> decay_ratio;  // measured per-step contraction near truncation
};

template <std::floating_point Real>
struct GaugeEstimate {
  BasicSpherePoint<Real> center = BasicSpherePoint<Real>::zero();
  std::vector<Real> radii;     // descending
  std::vector<Real> s_values;  // nondecreasing in r
  Real c_prime{};
  std::vector<std::pair<Real, Real>> delta_of_epsilon;  // (epsilon, delta), ascending
  std::vector<RadiusSample<Real>> samples;
  std::size_t samples_per_ball{};
  std::uint64_t seed{};
};

namespace detail {

template <std::floating_point Real>
void validate_radii(const std::vector<Real>& radii) {
  if (radii.empty()) throw InvalidArgument("radii", "must be nonempty");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > Real(0) && radii[i] < Real(1))) {
      throw InvalidArgument("radii", "each radius must lie in (0, 1)");
    }
    if (i > 0 && !(radii[i] < radii[i - 1])) {
      throw InvalidArgument("radii", "must be strictly descending");
    }
  }
}

template <std::floating_point Real>
Real max_displacement(const std::vector<BasicSpherePoint<Real>>& pts,
                      const BasicSpherePoint<Real>& x) {
  Real m = 0;
  for (const auto& p : pts) m = std::max(m, chordal_distance(p, x));
  return m;
}

template <std::floating_point Real>
RadiusSample<Real> iterate_radius(const BasicMoebiusMap<Real>& f, std::optional<Real> lambda_abs,
                                  const BasicSpherePoint<Real>& x, Real r, std::size_t n_max,
                                  std::size_t m, std::uint64_t seed,
                                  const GaugeConfig<Real>& cfg) {
  RadiusSample<Real> out;
  out.r = r;
  auto pts = chordal_ball_grid(BasicChordalBall<Real>(x, r), m, seed).points;
  auto fx = x;
  std::vector<Real> history;
  for (std::size_t n = 0;; ++n) {
    const Real reach = max_displacement(pts, fx);
    out.raw = std::max(out.raw, reach);
    history.push_back(reach);
    out.members = n + 1;

    if (lambda_abs && n >= 3) {
      const Real rho = (Real(1) + cfg.ratio_band) * *lambda_abs;
      bool geometric = rho < Real(1);
      for (std::size_t k = n - 2; geometric && k <= n; ++k) {
        if (!(history[k - 1] > Real(0))) {
          geometric = false;
          break;
        }
        const Real ratio = history[k] / history[k - 1];
        geometric = std::abs(ratio - *lambda_abs) <= cfg.ratio_band * *lambda_abs;
      }
      // The sampled image lies within 2 * reach of f^n(x), so its diameter is
      // at most twice the reach.
      if (geometric && Real(2) * reach < cfg.truncation_fraction * r) {
        out.truncated_at = n;
        out.tail = reach * rho / (Real(1) - rho);
        // Keep iterating a few steps to measure the decay the tail bound
        // relies on; those members also count towards the raw maximum.
        for (std::size_t k = 0; k < cfg.verify_steps; ++k) {
          for (auto& p : pts) p = f(p);
          fx = f(fx);
          history.push_back(max_displacement(pts, fx));
          out.raw = std::max(out.raw, history.back());
        }
        out.members += cfg.verify_steps;
        if (reach > Real(0) && cfg.verify_steps > 0) {
          out.decay_ratio =
              std::pow(history.back() / reach, Real(1) / Real(cfg.verify_steps));
        }
        break;
      }
    }
    if (n == n_max) break;
    for (auto& p : pts) p = f(p);
    fx = f(fx);
  }
  return out;
}

template <std::floating_point Real>
RadiusSample<Real> flow_radius(const BasicFlowGenerator<Real>& a, const std::vector<Real>& times,
                               const BasicSpherePoint<Real>& x, Real r, std::size_t m,
                               std::uint64_t seed) {
  RadiusSample<Real> out;
  out.r = r;
  const auto pts = chordal_ball_grid(BasicChordalBall<Real>(x, r), m, seed).points;
  std::vector<BasicSpherePoint<Real>> img(pts.size(), x);
  for (Real t : times) {
    const auto g = flow_action(a, t);
    for (std::size_t j = 0; j < pts.size(); ++j) img[j] = g.act(pts[j]);
    out.raw = std::max(out.raw, max_displacement(img, g.act(x)));
  }
  out.members = times.size();
  return out;
}

}  // namespace detail

/// Gauge table over descending radii. Each radius gets its own ball grid
/// (seed + index); the value at r is the max over that grid and the grids of
/// all smaller radii, which makes the table monotone in r.
///
/// Loxodromic-type iterates stop once the last three per-step ratios of the
/// reach max d(f^n(y), f^n(x)) sit within ratio_band of |lambda| and the image
/// diameter is below truncation_fraction * r; the remaining members are
/// covered by the geometric series reach * rho / (1 - rho), rho = 1.1 |lambda|,
/// which is added to the value. verify_steps further iterates are still
/// evaluated and give the measured decay ratio.
template <std::floating_point Real>
GaugeEstimate<Real> estimate_gauge(const FamilySpec<Real>& family, const BasicSpherePoint<Real>& x,
                                   const std::vector<Real>& radii,
                                   const GaugeConfig<Real>& cfg = {}) {
  detail::validate_radii(radii);
  if (cfg.samples_per_ball == 0) throw InvalidArgument("samples_per_ball", "must be positive");

  std::optional<Real> lambda_abs;
  std::vector<Real> times;
  if (family.kind == FamilyKind::iterates) {
    if (is_loxodromic_type(classify(family.map()).tag)) {
      lambda_abs = std::abs(loxodromic_normal_form(family.map()).lambda);
    }
  } else {
    times = family.parameters();
  }

  GaugeEstimate<Real> g;
  g.center = x;
  g.radii = radii;
  g.samples_per_ball = cfg.samples_per_ball;
  g.seed = cfg.seed;
  g.samples.resize(radii.size());
  detail::parallel_for(radii.size(), cfg.workers, [&](std::size_t i) {
    const std::uint64_t seed = cfg.seed + i;
    g.samples[i] = family.kind == FamilyKind::iterates
                       ? detail::iterate_radius(family.map(), lambda_abs, x, radii[i],
                                                family.n_max, cfg.samples_per_ball, seed, cfg)
                       : detail::flow_radius(family.generator(), times, x, radii[i],
                                             cfg.samples_per_ball, seed);
  });

  g.s_values.assign(radii.size(), Real(0));
  Real running = 0;
  for (std::size_t i = radii.size(); i-- > 0;) {
    running = std::max(running, g.samples[i].raw + g.samples[i].tail);
    g.s_values[i] = running;
  }
  for (std::size_t i = 0; i < radii.size(); ++i) {
    g.c_prime = std::max(g.c_prime, g.s_values[i] / radii[i]);
  }
  for (std::size_t i = radii.size(); i-- > 0;) g.delta_of_epsilon.emplace_back(g.s_values[i], radii[i]);
  return g;
}

template <std::floating_point Real>
struct LinearBound {
  bool certified{};
  Real c_prime{};
  Real large_radius_ratio{};  // S/r at the largest radius
  Real small_half_ratio{};    // max S/r over the smallest half of the radii
  Real smallest_s{};
  std::string violation;      // empty when certified
};

template <std::floating_point Real>
struct LinearBoundConfig {
  Real epsilon_floor{Real(1e-3)};
  Real stability{Real(1.5)};
};

/// Certified iff S/r over the smaller half of the radii stays within
/// `stability` times its value at the largest radius, and the smallest S is
/// below epsilon_floor. C' is reported either way.
template <std::floating_point Real>
LinearBound<Real> certify_linear_bound(const GaugeEstimate<Real>& g,
                                       const LinearBoundConfig<Real>& cfg = {}) {
  const std::size_t n = g.radii.size();
  if (n < 4) throw InvalidArgument("radii", "need at least 4 radii to certify a linear bound");
  if (g.radii.front() < Real(10) * g.radii.back()) {
    throw InvalidArgument("radii", "radii must span at least a factor of 10");
  }
  LinearBound<Real> out;
  out.c_prime = g.c_prime;
  out.large_radius_ratio = g.s_values.front() / g.radii.front();
  for (std::size_t i = n - n / 2; i < n; ++i) {
    out.small_half_ratio = std::max(out.small_half_ratio, g.s_values[i] / g.radii[i]);
  }
  out.smallest_s = g.s_values.back();

  const bool stable = out.small_half_ratio <= cfg.stability * out.large_radius_ratio;
  const bool vanishing = out.smallest_s < cfg.epsilon_floor;
  out.certified = stable && vanishing;
  if (!stable) {
    out.violation = "S/r grows at small radii: " + std::to_string(out.small_half_ratio) +
                    " against " + std::to_string(out.large_radius_ratio) + " at the largest radius";
  } else if (!vanishing) {
    out.violation = "smallest S = " + std::to_string(out.smallest_s) +
                    " is not below the floor " + std::to_string(cfg.epsilon_floor);
  }
  return out;
}

}  // namespace equibaire
