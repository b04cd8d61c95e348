#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "equibaire/approximation.hpp"
#include "equibaire/collapse.hpp"
#include "equibaire/verdict.hpp"
#include "support/oracles.hpp"

using namespace equibaire;
using namespace equibaire::testing;

namespace {

const FlowGenerator kRotation({C(0, 1), 0, 0, C(0, -1)});
const FlowGenerator kBoost({1, 0, 0, -1});
const FlowGenerator kNilpotent({0, 1, 0, 0});
const FlowGenerator kSpiral({C(1, 1), 0, 0, C(-1, -1)});
const FlowGenerator kZero({0, 0, 0, 0});

const SphereGrid& grid() {
  static const auto k = fibonacci_grid(200);
  return k;
}

}  // namespace

TEST(Collapse, BoostCollapsesToInfinity) {
  const auto s = detect_collapse(kBoost, grid());
  ASSERT_TRUE(s.certificate.has_value());
  const auto& c = *s.certificate;
  EXPECT_LT(chordal_distance(c.limit, SpherePoint::infinity()), 1e-6);
  EXPECT_LT(c.diameters.back(), 1e-4);
  EXPECT_EQ(c.times.size(), 11u);
  EXPECT_EQ(c.times.back(), 1024.0);
  for (std::size_t i = c.decreasing_from + 1; i < c.diameters.size(); ++i) {
    EXPECT_LT(c.diameters[i], c.diameters[i - 1]);
  }
  EXPECT_GT(c.initial_diameter, 0.0);
}

TEST(Collapse, NilpotentCollapsesToItsFixedPoint) {
  // exp(t [[0,1],[0,0]]) is z + t; every bounded region drifts to infinity.
  const auto s = detect_collapse(kNilpotent, grid());
  ASSERT_TRUE(s.certificate.has_value());
  EXPECT_LT(chordal_distance(s.certificate->limit, SpherePoint::infinity()), 1e-2);
  EXPECT_LT(s.certificate->diameters.back(), 1e-4);
}

TEST(Collapse, SpiralCollapses) {
  const auto s = detect_collapse(kSpiral, grid());
  ASSERT_TRUE(s.certificate.has_value());
  EXPECT_FALSE(s.all_stalled);
}

TEST(Collapse, RotationAndZeroNeverCollapse) {
  for (const auto& a : {kRotation, kZero}) {
    const auto s = detect_collapse(a, grid());
    EXPECT_FALSE(s.certificate.has_value());
    EXPECT_EQ(s.candidates_examined, grid().points.size());
    EXPECT_TRUE(s.all_stalled);
    EXPECT_GT(s.min_diameter_ratio, 0.5);
  }
}

TEST(Collapse, SameCertificateForAnyWorkerCount) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 4; ++i) {
    const FlowGenerator a(conjugate(Matrix2<double>{C(0.7, 0.2), 0, 0, C(-0.7, -0.2)},
                                    random_map(rng, 3.0)));
    CollapseConfig<double> one, many;
    many.workers = 5;
    const auto s1 = detect_collapse(a, grid(), one);
    const auto s5 = detect_collapse(a, grid(), many);
    ASSERT_EQ(s1.certificate.has_value(), s5.certificate.has_value());
    EXPECT_EQ(s1.candidates_examined, s5.candidates_examined);
    EXPECT_EQ(s1.min_diameter_ratio, s5.min_diameter_ratio);
    if (s1.certificate) {
      EXPECT_EQ(s1.certificate->diameters, s5.certificate->diameters);
      EXPECT_EQ(s1.certificate->limit.z(), s5.certificate->limit.z());
      EXPECT_EQ(s1.certificate->limit.w(), s5.certificate->limit.w());
    }
  }
}

TEST(Collapse, RejectsBadConfig) {
  CollapseConfig<double> cfg;
  cfg.candidate_radius = 0;
  EXPECT_THROW(detect_collapse(kBoost, grid(), cfg), InvalidArgument);
  EXPECT_THROW(detect_collapse(kBoost, SphereGrid{}), InvalidArgument);
}

TEST(FlowVerdict, CanonicalGenerators) {
  struct Case {
    FlowGenerator a;
    Verdict verdict;
    Basis basis;
  };
  const std::vector<Case> cases{
      {kRotation, Verdict::holds, Basis::theorem2_compact},
      {kZero, Verdict::holds, Basis::theorem2_compact},
      {kBoost, Verdict::fails, Basis::theorem2_collapse},
      {kNilpotent, Verdict::fails, Basis::theorem2_collapse},
      {kSpiral, Verdict::fails, Basis::theorem2_collapse},
  };
  for (const auto& c : cases) {
    const auto rep = theorem2_verdict(c.a, grid());
    EXPECT_EQ(rep.verdict, c.verdict) << rep.reason;
    EXPECT_EQ(rep.basis, c.basis);
    EXPECT_TRUE(rep.subgroup.has_value());
    EXPECT_TRUE(rep.compactness.has_value());
    EXPECT_TRUE(rep.collapse.has_value());
  }
}

TEST(FlowVerdict, WithoutCrossCheckUsesAlgebraicRoute) {
  Theorem2Config<double> cfg;
  cfg.cross_check = false;
  const auto holds = theorem2_verdict(kRotation, grid(), cfg);
  EXPECT_EQ(holds.verdict, Verdict::holds);
  EXPECT_EQ(holds.basis, Basis::theorem2_algebraic);
  EXPECT_FALSE(holds.collapse.has_value());
  EXPECT_EQ(theorem2_verdict(kBoost, grid(), cfg).verdict, Verdict::fails);
}

TEST(FlowVerdict, ConjugatesAgreeAcrossRoutes) {
  // A disagreement would throw; every conjugate must land on its type's verdict.
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> par(0.25, 2.0);
  for (int i = 0; i < 40; ++i) {
    const double s = par(rng), u = par(rng);
    const Matrix2<double> forms[] = {{C(0, s), 0, 0, C(0, -s)},
                                     {s, 0, 0, -s},
                                     {0, s, 0, 0},
                                     {C(s, u), 0, 0, C(-s, -u)}};
    const int kind = i % 4;
    auto m = conjugate(forms[kind], random_map(rng, 3.0));
    m.d = -m.a;
    const auto rep = theorem2_verdict(FlowGenerator(m), grid());
    EXPECT_EQ(rep.verdict, kind == 0 ? Verdict::holds : Verdict::fails) << "case " << i;
  }
}

TEST(FlowVerdict, ScaledRotationStillHolds) {
  // Slow rotations are still compact; the collapse search must not be fooled.
  const FlowGenerator slow({C(0, 0.01), 0, 0, C(0, -0.01)});
  EXPECT_EQ(theorem2_verdict(slow, grid()).verdict, Verdict::holds);
}

TEST(ApproximatingSequence, IrrationalRotationDensityImproves) {
  const auto k = fibonacci_grid(200);
  const auto s4 = approximating_sequence(kRotation, 10000);
  const auto s5 = approximating_sequence(kRotation, 100000);
  EXPECT_FALSE(s4.rotation.has_value());
  EXPECT_NEAR(s4.period, 2 * std::numbers::pi, 1e-15);
  const double e4 = density_error(kRotation, s4, k);
  const double e5 = density_error(kRotation, s5, k);
  EXPECT_LT(e4, 0.05);
  EXPECT_LT(e5, e4);
  for (double t : s4.times) {
    EXPECT_GE(t, 0.0);
    EXPECT_LT(t, s4.period);
  }
}

TEST(ApproximatingSequence, RationalRotationHitsProbesExactly) {
  const FlowGenerator half_turn({C(0, std::numbers::pi), 0, 0, C(0, -std::numbers::pi)});
  const auto seq = approximating_sequence(half_turn, 100);
  ASSERT_TRUE(seq.rotation.has_value());
  EXPECT_EQ(seq.rotation->first, 1);
  EXPECT_EQ(seq.rotation->second, 1);
  EXPECT_EQ(density_error(half_turn, seq, fibonacci_grid(100)), 0.0);
  // The first 20 terms step evenly through one period; later ones bisect.
  EXPECT_DOUBLE_EQ(seq.times[5], seq.period / 4);
  EXPECT_DOUBLE_EQ(seq.times[20], seq.period / 40);
}

TEST(ApproximatingSequence, MatchesFlowAtItsTimes) {
  const auto seq = approximating_sequence(kRotation, 50);
  for (std::size_t m = 0; m < seq.maps.size(); ++m) {
    EXPECT_LT(max_entry_diff(seq.maps[m].matrix(), flow_exp(kRotation, seq.times[m]).matrix()), 1e-15);
  }
}

TEST(ApproximatingSequence, ZeroGeneratorAndErrors) {
  const auto seq = approximating_sequence(kZero, 5);
  EXPECT_EQ(seq.maps.size(), 5u);
  for (const auto& h : seq.maps) EXPECT_EQ(h, MoebiusMap::identity());
  EXPECT_EQ(density_error(kZero, seq, fibonacci_grid(20)), 0.0);
  EXPECT_THROW(approximating_sequence(kBoost, 10), DomainError);
  EXPECT_THROW(approximating_sequence(kNilpotent, 10), DomainError);
  try {
    approximating_sequence(kRotation, 0);
    FAIL() << "expected rejection";
  } catch (const InvalidArgument& e) {
    EXPECT_EQ(e.field(), "m_max");
  }
}

TEST(SmallRational, RecoversSimpleFractions) {
  EXPECT_EQ(detail::small_rational(0.75, 1000, 1e-12), (std::pair<std::int64_t, std::int64_t>{3, 4}));
  EXPECT_EQ(detail::small_rational(2.0, 1000, 1e-12), (std::pair<std::int64_t, std::int64_t>{2, 1}));
  EXPECT_FALSE(detail::small_rational(1.0 / std::numbers::pi, 1000, 1e-12).has_value());
  EXPECT_FALSE(detail::small_rational(std::numbers::sqrt2, 1000, 1e-12).has_value());
}
