#pragma once

// Search for an open set whose images under exp(tA) shrink to a point.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "equibaire/error.hpp"
#include "equibaire/flow.hpp"
#include "equibaire/parallel.hpp"
#include "equibaire/sphere.hpp"

namespace equibaire {

template <std::floating_point Real>
struct CollapseConfig {
  Real candidate_radius{Real(0.1)};
  Real collapse_tol{Real(1e-4)};
  std::size_t ball_samples{32};  // plus the center
  int max_exponent{10};          // probe times 1, 2, 4, ..., 2^max_exponent
  Real stability{Real(1e-2)};    // limit moves at most this much over the last doubling
  Real separation{Real(1e-3)};   // limit must be this far from the candidate center
  Real stall_fraction{Real(0.1)};
  std::uint64_t seed{0};
  std::size_t workers{1};
};

template <std::floating_point Real>
struct CollapseCertificate {
  BasicChordalBall<Real> region;
  std::vector<Real> times;
  BasicSpherePoint<Real> limit;
  std::vector<Real> diameters;  // image sample diameter at each time
  Real initial_diameter{};
  std::size_t decreasing_from{};  // diameters strictly decrease from this index on
};

template <std::floating_point Real>
struct CollapseSearch {
  std::optional<CollapseCertificate<Real>> certificate;
  std::size_t candidates_examined{};
  Real min_diameter_ratio{1};  // over examined candidates and probe times
  bool all_stalled{true};      // no examined candidate fell below stall_fraction
};

namespace detail {

template <std::floating_point Real>
Real sample_diameter(const std::vector<BasicSpherePoint<Real>>& pts) {
  Real d = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, chordal_distance(pts[i], pts[j]));
  }
  return d;
}

template <std::floating_point Real>
struct CandidateOutcome {
  std::optional<CollapseCertificate<Real>> certificate;
  Real min_ratio{1};
};

template <std::floating_point Real>
CandidateOutcome<Real> probe_candidate(const BasicFlowGenerator<Real>& a,
                                       const BasicSpherePoint<Real>& center, std::uint64_t seed,
                                       const CollapseConfig<Real>& cfg) {
  const BasicChordalBall<Real> ball(center, cfg.candidate_radius);
  std::vector<BasicSpherePoint<Real>> pts{center};
  for (const auto& p : chordal_ball_grid(ball, cfg.ball_samples, seed).points) pts.push_back(p);
  const Real initial = sample_diameter(pts);

  CandidateOutcome<Real> out;
  std::vector<Real> times, diameters;
  std::vector<BasicSpherePoint<Real>> centers;
  std::vector<BasicSpherePoint<Real>> img(pts.size(), center);
  for (int k = 0; k <= cfg.max_exponent; ++k) {
    const Real t = std::ldexp(Real(1), k);
    const auto g = flow_action(a, t);
    for (std::size_t j = 0; j < pts.size(); ++j) img[j] = g.act(pts[j]);
    times.push_back(t);
    diameters.push_back(sample_diameter(img));
    centers.push_back(img[0]);
    if (initial > Real(0)) out.min_ratio = std::min(out.min_ratio, diameters.back() / initial);
  }

  const auto& p = centers.back();
  const bool collapsed = diameters.back() < cfg.collapse_tol;
  const bool stable =
      centers.size() < 2 || chordal_distance(p, centers[centers.size() - 2]) <= cfg.stability;
  const bool separated = chordal_distance(p, center) > cfg.separation;
  if (collapsed && stable && separated) {
    std::size_t from = diameters.size() - 1;
    while (from > 0 && diameters[from - 1] > diameters[from]) --from;
    out.certificate =
        CollapseCertificate<Real>{ball, std::move(times), p, std::move(diameters), initial, from};
  }
  return out;
}

}  // namespace detail

/// Tries candidate balls centered at the points of K, in order, and returns
/// the first collapse found. Candidates are evaluated in blocks of `workers`;
/// statistics cover the candidates up to the certifying one, so the result is
/// the same for every worker count.
template <std::floating_point Real>
CollapseSearch<Real> detect_collapse(const BasicFlowGenerator<Real>& a,
                                     const BasicSphereGrid<Real>& k,
                                     const CollapseConfig<Real>& cfg = {}) {
  if (k.points.empty()) throw InvalidArgument("grid", "must be nonempty");
  if (!(cfg.candidate_radius > Real(0) && cfg.candidate_radius <= Real(1))) {
    throw InvalidArgument("candidate_radius", "must lie in (0, 1]");
  }
  if (cfg.ball_samples == 0) throw InvalidArgument("ball_samples", "must be positive");

  CollapseSearch<Real> out;
  const std::size_t n = k.points.size();
  const std::size_t block = std::max<std::size_t>(cfg.workers, 1);
  std::vector<detail::CandidateOutcome<Real>> slot;
  for (std::size_t start = 0; start < n; start += block) {
    const std::size_t len = std::min(block, n - start);
    slot.assign(len, {});
    detail::parallel_for(len, cfg.workers, [&](std::size_t j) {
      slot[j] = detail::probe_candidate(a, k.points[start + j], cfg.seed + start + j, cfg);
    });
    for (auto& s : slot) {
      ++out.candidates_examined;
      out.min_diameter_ratio = std::min(out.min_diameter_ratio, s.min_ratio);
      if (s.min_ratio < cfg.stall_fraction) out.all_stalled = false;
      if (s.certificate) {
        out.certificate = std::move(s.certificate);
        return out;
      }
    }
  }
  return out;
}

}  // namespace equibaire
