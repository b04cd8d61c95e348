#pragma once

// Equi-Baire verdicts: the gauge route for iterates of loxodromic-type maps,
// and the compactness / collapse routes for flows.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "equibaire/collapse.hpp"
#include "equibaire/error.hpp"
#include "equibaire/flow.hpp"
#include "equibaire/gauge.hpp"
#include "equibaire/moebius.hpp"
#include "equibaire/sphere.hpp"

namespace equibaire {

enum class Verdict { holds, fails, out_of_scope };
enum class Basis { theorem1_gauge, theorem2_algebraic, theorem2_collapse, theorem2_compact };

constexpr std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::out_of_scope: return "out_of_scope";
  }
  return "unknown";
}

constexpr std::string_view to_string(Basis b) noexcept {
  switch (b) {
    case Basis::theorem1_gauge: return "theorem1-gauge";
    case Basis::theorem2_algebraic: return "theorem2-algebraic";
    case Basis::theorem2_collapse: return "theorem2-collapse";
    case Basis::theorem2_compact: return "theorem2-compact";
  }
  return "unknown";
}

template <std::floating_point Real>
struct EquiBaireReport {
  Verdict verdict{Verdict::out_of_scope};
  Basis basis{Basis::theorem1_gauge};
  std::string reason;

  // Iterates.
  std::optional<MapClass<Real>> map_class;
  std::optional<Real> lambda_abs;
  std::optional<GaugeEstimate<Real>> gauge;
  std::optional<LinearBound<Real>> linear_bound;
  std::optional<bool> decay_consistent;

  // Flows.
  std::optional<SubgroupType<Real>> subgroup;
  std::optional<CompactnessResult<Real>> compactness;
  std::optional<CollapseSearch<Real>> collapse;

  std::vector<std::pair<std::string, Real>> parameters;  // in a fixed order
};

template <std::floating_point Real>
struct Theorem1Config {
  GaugeConfig<Real> gauge{256, 0, 1};
  LinearBoundConfig<Real> linear{};
  MoebiusTolerances<Real> moebius{};
  std::size_t n_cap{100000};
  std::optional<std::vector<Real>> radii;  // adaptive when absent
  Real min_radius{Real(1e-10)};
  Real decay_band{Real(0.1)};
};

/// Orbital gauge verdict for the iterates of f at x.
///
/// Without explicit radii the table starts at min(0.1, d(x, q) / 4) for the
/// repelling point q, steps by sqrt(10), and is extended a decade at a time
/// until the smallest value falls below the epsilon floor.
template <std::floating_point Real>
EquiBaireReport<Real> theorem1_verdict(const BasicMoebiusMap<Real>& f,
                                       const BasicSpherePoint<Real>& x,
                                       const Theorem1Config<Real>& cfg = {}) {
  EquiBaireReport<Real> rep;
  rep.basis = Basis::theorem1_gauge;
  rep.parameters = {
      {"samples_per_ball", Real(cfg.gauge.samples_per_ball)},
      {"seed", Real(cfg.gauge.seed)},
      {"n_cap", Real(cfg.n_cap)},
      {"epsilon_floor", cfg.linear.epsilon_floor},
      {"stability", cfg.linear.stability},
      {"ratio_band", cfg.gauge.ratio_band},
      {"truncation_fraction", cfg.gauge.truncation_fraction},
      {"decay_band", cfg.decay_band},
      {"basin", cfg.moebius.basin},
      {"classification", cfg.moebius.classification},
  };

  const auto cls = classify(f, cfg.moebius);
  rep.map_class = cls;
  if (!is_loxodromic_type(cls.tag)) {
    rep.verdict = Verdict::out_of_scope;
    rep.reason = "map is " + std::string(to_string(cls.tag)) +
                 "; iterates need |lambda| != 1 (hyperbolic or loxodromic)";
    return rep;
  }
  const auto nf = loxodromic_normal_form(f, cfg.moebius);
  rep.lambda_abs = std::abs(nf.lambda);
  if (in_attracting_basin(f, x, cfg.moebius) != BasinMembership::inside) {
    rep.verdict = Verdict::out_of_scope;
    rep.reason = "repelling fixed point excluded: x is not in the attracting basin";
    return rep;
  }

  const auto family = FamilySpec<Real>::iterates(f, cfg.n_cap);
  GaugeEstimate<Real> g;
  if (cfg.radii) {
    g = estimate_gauge(family, x, *cfg.radii, cfg.gauge);
  } else {
    const Real step = std::sqrt(Real(10));
    const Real r0 = std::min(Real(0.1), chordal_distance(x, nf.repelling) / Real(4));
    std::vector<Real> radii{r0};
    while (radii.size() < 5) radii.push_back(radii.back() / step);
    for (;;) {
      g = estimate_gauge(family, x, radii, cfg.gauge);
      if (g.s_values.back() < cfg.linear.epsilon_floor) break;
      if (radii.back() / (step * step) < cfg.min_radius) break;
      radii.push_back(radii.back() / step);
      radii.push_back(radii.back() / step);
    }
  }
  rep.linear_bound = certify_linear_bound(g, cfg.linear);

  bool truncated = true;
  bool consistent = true;
  for (const auto& s : g.samples) {
    if (!s.truncated_at) truncated = false;
    if (s.decay_ratio && std::abs(*s.decay_ratio / *rep.lambda_abs - Real(1)) > cfg.decay_band) {
      consistent = false;
    }
  }
  rep.decay_consistent = truncated && consistent;
  rep.gauge = std::move(g);

  if (!rep.linear_bound->certified) {
    rep.verdict = Verdict::fails;
    rep.reason = "linear bound not certified: " + rep.linear_bound->violation;
  } else if (!truncated) {
    rep.verdict = Verdict::fails;
    rep.reason = "orbit diameters did not reach geometric decay within n_cap iterates";
  } else if (!consistent) {
    rep.verdict = Verdict::fails;
    rep.reason = "measured decay ratio differs from |lambda| by more than the decay band";
  } else {
    rep.verdict = Verdict::holds;
    rep.reason = "gauge certified: S(x, r) <= C' r and S vanishes at the smallest radius";
  }
  return rep;
}

template <std::floating_point Real>
struct Theorem2Config {
  CollapseConfig<Real> collapse{};
  bool cross_check{true};
};

namespace detail {

template <std::floating_point Real>
std::string describe_algebraic(const SubgroupType<Real>& type, const CompactnessResult<Real>& r) {
  std::ostringstream os;
  os.precision(17);
  os << "{\"subgroup\":\"" << to_string(type.tag) << "\",\"compact\":" << (r.compact ? "true" : "false");
  if (r.witness) os << ",\"t_star\":" << r.witness->t_star << ",\"log_norm\":" << r.witness->log_norm;
  os << "}";
  return os.str();
}

template <std::floating_point Real>
std::string describe_dynamical(const CollapseSearch<Real>& s) {
  std::ostringstream os;
  os.precision(17);
  os << "{\"collapse\":" << (s.certificate ? "true" : "false")
     << ",\"candidates_examined\":" << s.candidates_examined
     << ",\"min_diameter_ratio\":" << s.min_diameter_ratio;
  if (s.certificate) {
    os << ",\"final_diameter\":" << s.certificate->diameters.back();
  }
  os << "}";
  return os.str();
}

}  // namespace detail

/// Flow verdict. Relative compactness decides; unless cross_check is off, the
/// collapse search must agree or BasisDisagreement is thrown.
template <std::floating_point Real>
EquiBaireReport<Real> theorem2_verdict(const BasicFlowGenerator<Real>& a,
                                       const BasicSphereGrid<Real>& k,
                                       const Theorem2Config<Real>& cfg = {}) {
  if (k.points.empty()) throw InvalidArgument("grid", "must be nonempty");
  EquiBaireReport<Real> rep;
  const auto& c = cfg.collapse;
  rep.parameters = {
      {"grid_size", Real(k.points.size())},
      {"candidate_radius", c.candidate_radius},
      {"collapse_tol", c.collapse_tol},
      {"ball_samples", Real(c.ball_samples)},
      {"max_exponent", Real(c.max_exponent)},
      {"stability", c.stability},
      {"separation", c.separation},
      {"seed", Real(c.seed)},
      {"growth_threshold", a.tolerances().growth_threshold},
      {"nilpotent", a.tolerances().nilpotent},
      {"axis", a.tolerances().axis},
  };
  rep.subgroup = classify_subgroup(a);
  rep.compactness = is_relatively_compact(a);
  const bool compact = rep.compactness->compact;

  if (cfg.cross_check) {
    rep.collapse = detect_collapse(a, k, c);
    const bool collapsed = rep.collapse->certificate.has_value();
    if (compact == collapsed) {
      throw BasisDisagreement(
          compact ? "relatively compact generator, yet an open set collapses"
                  : "generator is not relatively compact, yet no collapsing open set was found",
          detail::describe_algebraic(*rep.subgroup, *rep.compactness),
          detail::describe_dynamical(*rep.collapse));
    }
  }

  if (compact) {
    rep.verdict = Verdict::holds;
    rep.basis = cfg.cross_check ? Basis::theorem2_compact : Basis::theorem2_algebraic;
    rep.reason = "subgroup is conjugate into SU(2)";
  } else {
    rep.verdict = Verdict::fails;
    rep.basis = cfg.cross_check ? Basis::theorem2_collapse : Basis::theorem2_algebraic;
    rep.reason = "subgroup is not relatively compact";
  }
  return rep;
}

}  // namespace equibaire
