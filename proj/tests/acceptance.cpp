// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "equibaire/equibaire.hpp"
#include "equibaire/scenario.hpp"
#include "support/oracles.hpp"

using namespace equibaire;
using namespace equibaire::testing;

namespace {

struct Outcome {
  bool pass{};
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Matrix2<double> conjugate_generator(const Matrix2<double>& a, const MoebiusMap& p) {
  auto b = conjugate(a, p);
  b.d = -b.a;
  return b;
}

const double kRt2 = std::sqrt(2.0);

Outcome classification_battery() {
  const auto start = Clock::now();
  const std::array<std::pair<Matrix2<double>, SubgroupKind>, 4> generators{{
      {{C(0, 1), 0, 0, C(0, -1)}, SubgroupKind::elliptic},
      {{1, 0, 0, -1}, SubgroupKind::hyperbolic},
      {{0, 1, 0, 0}, SubgroupKind::parabolic},
      {{C(1, 1), 0, 0, C(-1, -1)}, SubgroupKind::loxodromic},
  }};
  const std::array<std::pair<MoebiusMap, MapType>, 4> maps{{
      {MoebiusMap(1, 1, 0, 1), MapType::parabolic},
      {MoebiusMap(2, 0, 0, 0.5), MapType::hyperbolic},
      {MoebiusMap(0, -1, 1, 0), MapType::elliptic},
      {MoebiusMap(C(1, 1), 0, 0, C(1, -1) / 2.0), MapType::loxodromic},
  }};
  std::mt19937_64 rng(101);
  int wrong = 0, total = 0;
  for (const auto& [a, kind] : generators) {
    ++total;
    if (classify_subgroup(FlowGenerator(a)).tag != kind) ++wrong;
    for (int i = 0; i < 100; ++i, ++total) {
      if (classify_subgroup(FlowGenerator(conjugate_generator(a, random_map(rng, 3.0)))).tag != kind) ++wrong;
    }
  }
  for (const auto& [f, type] : maps) {
    ++total;
    if (classify(f).tag != type) ++wrong;
    for (int i = 0; i < 100; ++i, ++total) {
      if (classify(conjugate(f, random_map(rng, 3.0))).tag != type) ++wrong;
    }
  }
  const double secs = seconds_since(start);
  return {wrong == 0 && secs < 1.0, fmt("%d/%d tags wrong, %.3f s (limit 1 s)", wrong, total, secs)};
}

Outcome fixed_point_residual() {
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> angle(0.1, 3.0), modulus(1.1, 3.0), real(-3.0, 3.0);
  double residual = 0, product = 0;
  int two_point = 0;
  for (int i = 0; i < 1000; ++i) {
    MoebiusMap base = MoebiusMap::identity();
    switch (i % 5) {
      case 0: { const C u = std::polar(1.0, angle(rng)); base = MoebiusMap(u, 0, 0, 1.0 / u); break; }
      case 1: base = MoebiusMap(1, C(real(rng), real(rng)), 0, 1); break;
      case 2: { const double k = modulus(rng); base = MoebiusMap(k, 0, 0, 1 / k); break; }
      case 3: { const C k = std::polar(modulus(rng), angle(rng)); base = MoebiusMap(k, 0, 0, 1.0 / k); break; }
      default: base = random_map(rng); break;
    }
    const auto f = conjugate(base, random_map(rng, 3.0));
    if (classify(f).tag == MapType::identity) continue;
    const auto fp = fixed_points(f);
    for (const auto& p : fp.points) residual = std::max(residual, chordal_distance(f(p), p));
    if (fp.points.size() == 2) {
      ++two_point;
      product = std::max(product, std::abs(fp.multipliers[0] * fp.multipliers[1] - 1.0));
    }
  }
  return {residual < 1e-9 && product < 1e-8,
          fmt("max d(f(p), p) = %.2e (limit 1e-9), max |m1 m2 - 1| = %.2e over %d two-point maps (limit 1e-8)",
              residual, product, two_point)};
}

Outcome normal_form_identity() {
  std::mt19937_64 rng(103);
  const auto grid = fibonacci_grid(100).points;
  double worst = 0, lambda_max = 0;
  for (int i = 0; i < 200; ++i) {
    const auto f = random_loxodromic(rng);
    const auto nf = loxodromic_normal_form(f);
    lambda_max = std::max(lambda_max, std::abs(nf.lambda));
    const auto h_inv = inverse(nf.conjugator);
    for (const auto& x : grid) {
      const SpherePoint scaled(nf.lambda * x.z(), x.w());
      worst = std::max(worst, chordal_distance(nf.conjugator(f(h_inv(x))), scaled));
    }
  }
  return {worst < 1e-8 && lambda_max < 1.0,
          fmt("sup d(h f h^-1 x, lambda x) = %.2e (limit 1e-8), max |lambda| = %.4f", worst, lambda_max)};
}

Outcome uniform_convergence_rate() {
  const auto start = Clock::now();
  const MoebiusMap f(2, 0, 0, 0.5);
  const auto grid = fibonacci_grid_excluding(500, ChordalBall(SpherePoint::zero(), 0.05)).points;
  std::vector<double> sup;
  for (std::size_t n = 0; n <= 60; ++n) {
    const auto m = detail::projective_power(f.matrix(), n);
    double s = 0;
    for (const auto& x : grid) s = std::max(s, chordal_distance(m.act(x), SpherePoint::infinity()));
    sup.push_back(s);
  }
  // Geometric phase: after the sup has dropped below 1e-2, before it nears rounding level.
  std::vector<double> ns, logs;
  for (std::size_t n = 0; n < sup.size(); ++n) {
    if (sup[n] < 1e-2 && sup[n] > 1e-13) {
      ns.push_back(double(n));
      logs.push_back(std::log(sup[n]));
    }
  }
  double slope = std::nan("");
  if (ns.size() >= 3) {
    const double mx = std::accumulate(ns.begin(), ns.end(), 0.0) / double(ns.size());
    const double my = std::accumulate(logs.begin(), logs.end(), 0.0) / double(logs.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      sxy += (ns[i] - mx) * (logs[i] - my);
      sxx += (ns[i] - mx) * (ns[i] - mx);
    }
    slope = sxy / sxx;
  }
  const double target = std::log(0.25);
  const double secs = seconds_since(start);
  const bool ok = std::abs(slope - target) <= 0.1 * std::abs(target) && secs < 5.0;
  return {ok, fmt("slope %.5f vs log(1/4) = %.5f over n in [%g, %g] (band 10%%), %.3f s (limit 5 s)", slope,
                  target, ns.empty() ? 0.0 : ns.front(), ns.empty() ? 0.0 : ns.back(), secs)};
}

Outcome gauge_linear_bound() {
  const MoebiusMap half(1 / kRt2, 0, 0, kRt2);
  const std::vector<double> radii{0.3, 0.1, 0.03, 0.01};
  const auto family = FamilySpec<double>::iterates(half);
  const auto g = estimate_gauge(family, SpherePoint::zero(), radii);
  double worst = 0;
  for (std::size_t i = 0; i < radii.size(); ++i) worst = std::max(worst, std::abs(g.s_values[i] / radii[i] - 1));
  const auto b = certify_linear_bound(g);
  // The four radii stop at S = 0.01, above the epsilon floor, so certification
  // itself needs the table continued down to 1e-4.
  const auto fine = estimate_gauge(family, SpherePoint::zero(),
                                   std::vector<double>{0.3, 0.1, 0.03, 0.01, 1e-3, 1e-4});
  const auto bf = certify_linear_bound(fine);
  const bool ok = worst <= 0.02 && b.c_prime >= 0.98 && b.c_prime <= 1.05 && bf.certified &&
                  bf.c_prime >= 0.98 && bf.c_prime <= 1.05;
  return {ok, fmt("max |S/r - 1| = %.4f (limit 0.02), C' = %.5f; down to r = 1e-4: certified=%s, C' = %.5f "
                  "(range [0.98, 1.05])",
                  worst, b.c_prime, bf.certified ? "yes" : "no", bf.c_prime)};
}

Outcome iterate_verdicts() {
  const auto start = Clock::now();
  std::mt19937_64 rng(106);
  int holds = 0, holds_total = 0, excluded = 0, excluded_total = 0;
  for (int i = 0; i < 50; ++i) {
    const auto f = random_loxodromic(rng);
    const auto nf = loxodromic_normal_form(f);
    int placed = 0;
    for (const auto& x : random_sphere_points(20, 1000 + std::uint64_t(i)).points) {
      if (placed == 5) break;
      if (in_attracting_basin(f, x) != BasinMembership::inside) continue;
      ++placed;
      ++holds_total;
      if (theorem1_verdict(f, x).verdict == Verdict::holds) ++holds;
    }
    ++excluded_total;
    if (theorem1_verdict(f, nf.repelling).verdict == Verdict::out_of_scope) ++excluded;
  }
  std::uniform_real_distribution<double> angle(0.1, 3.0);
  for (int i = 0; i < 10; ++i) {
    const C u = std::polar(1.0, angle(rng));
    const auto elliptic = conjugate(MoebiusMap(u, 0, 0, 1.0 / u), random_map(rng, 3.0));
    const auto parabolic = conjugate(MoebiusMap(1, C(1, 0.5), 0, 1), random_map(rng, 3.0));
    for (const auto& f : {elliptic, parabolic}) {
      ++excluded_total;
      if (theorem1_verdict(f, SpherePoint::from_affine(0.25)).verdict == Verdict::out_of_scope) ++excluded;
    }
  }
  const double secs = seconds_since(start);
  const bool ok = holds == holds_total && holds_total == 250 && excluded == excluded_total && secs < 60.0;
  return {ok, fmt("holds %d/%d basin points, out_of_scope %d/%d excluded inputs, %.2f s (limit 60 s)", holds,
                  holds_total, excluded, excluded_total, secs)};
}

Outcome matrix_exponential() {
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> time(-5.0, 5.0);
  double oracle = 0, group = 0;
  for (int i = 0; i < 500; ++i) {
    const FlowGenerator g(random_generator_matrix(rng));
    const double s = time(rng), t = time(rng);
    const auto& a = g.matrix();
    oracle = std::max(oracle, max_entry_diff(flow_exp(g, t).matrix(), series_exp({a.a * t, a.b * t, a.c * t, a.d * t})));
    group = std::max(group, max_entry_diff(flow_exp(g, s).matrix() * flow_exp(g, t).matrix(),
                                           flow_exp(g, s + t).matrix()));
  }
  return {oracle < 1e-9 && group < 1e-9,
          fmt("closed form vs series: %.2e, group law: %.2e (limit 1e-9 entrywise)", oracle, group)};
}

Outcome flow_verdict_equivalence() {
  const auto start = Clock::now();
  const auto k = fibonacci_grid(200);
  const std::array<std::pair<Matrix2<double>, SubgroupKind>, 4> canonical{{
      {{C(0, 1), 0, 0, C(0, -1)}, SubgroupKind::elliptic},
      {{1, 0, 0, -1}, SubgroupKind::hyperbolic},
      {{0, 1, 0, 0}, SubgroupKind::parabolic},
      {{C(1, 1), 0, 0, C(-1, -1)}, SubgroupKind::loxodromic},
  }};
  int agree = 0, total = 0, correct = 0;
  std::string first_problem;
  auto run = [&](const Matrix2<double>& a, SubgroupKind kind) {
    ++total;
    const Verdict want = kind == SubgroupKind::elliptic ? Verdict::holds : Verdict::fails;
    try {
      const auto rep = theorem2_verdict(FlowGenerator(a), k);
      ++agree;
      if (rep.verdict == want) ++correct;
      else if (first_problem.empty()) first_problem = "wrong verdict for a " + std::string(to_string(kind));
    } catch (const BasisDisagreement& e) {
      if (first_problem.empty()) first_problem = std::string("disagreement: ") + e.algebraic() + " vs " + e.dynamical();
    }
  };
  for (const auto& [a, kind] : canonical) run(a, kind);
  std::mt19937_64 rng(108);
  std::uniform_real_distribution<double> par(0.25, 2.0);
  for (int i = 0; i < 400; ++i) {
    const double s = par(rng), u = par(rng);
    const auto kind = canonical[std::size_t(i % 4)].second;
    Matrix2<double> a;
    switch (kind) {
      case SubgroupKind::elliptic: a = {C(0, s), 0, 0, C(0, -s)}; break;
      case SubgroupKind::hyperbolic: a = {s, 0, 0, -s}; break;
      case SubgroupKind::parabolic: a = {0, s, 0, 0}; break;
      default: a = {C(s, u), 0, 0, C(-s, -u)}; break;
    }
    run(conjugate_generator(a, random_map(rng, 3.0)), kind);
  }
  const double secs = seconds_since(start);
  const bool ok = agree == total && correct == total && secs < 120.0;
  std::string detail = fmt("routes agree %d/%d, expected verdict %d/%d, %.2f s (limit 120 s)", agree, total,
                           correct, total, secs);
  if (!first_problem.empty()) detail += "; first problem: " + first_problem;
  return {ok, detail};
}

Outcome approximating_construction() {
  const FlowGenerator rotation({C(0, 1), 0, 0, C(0, -1)});
  const auto k = fibonacci_grid(200);
  const double e4 = density_error(rotation, approximating_sequence(rotation, 10000), k);
  const double e5 = density_error(rotation, approximating_sequence(rotation, 100000), k);
  return {e4 < 0.05 && e5 < e4,
          fmt("density error %.3e at m_max = 1e4 (limit 0.05), %.3e at 1e5 (must decrease)", e4, e5)};
}

Outcome metric_and_determinism() {
  const auto pts = random_sphere_points(30000, 110).points;
  int violations = 0;
  for (std::size_t i = 0; i + 2 < pts.size(); i += 3) {
    const double dxy = chordal_distance(pts[i], pts[i + 1]);
    const double dyz = chordal_distance(pts[i + 1], pts[i + 2]);
    const double dxz = chordal_distance(pts[i], pts[i + 2]);
    if (dxz > dxy + dyz + 1e-12) ++violations;
    if (dxy != chordal_distance(pts[i + 1], pts[i])) ++violations;
    if (dxy < 0 || dxy > 1 + 1e-12) ++violations;
    if (chordal_distance(pts[i], pts[i]) > 1e-12) ++violations;
  }
  const std::array<const char*, 3> scenarios{
      R"({"map": {"a": [2, 0], "b": [0, 0], "c": [0, 0], "d": [0.5, 0]}, "experiment": "verdict1",
          "parameters": {"x": {"affine": [0.3, -2]}, "seed": 7}})",
      R"({"map": {"a": [0.7071067811865476, 0], "b": 0, "c": 0, "d": [1.4142135623730951, 0]},
          "experiment": "gauge", "parameters": {"x": {"affine": 0}, "seed": 7}})",
      R"({"generator": {"A": [[[0.3, 0.2], [1, 0]], [[0, 0], [-0.3, -0.2]]]}, "experiment": "verdict2",
          "parameters": {"seed": 7}})"};
  int identical = 0;
  for (const char* text : scenarios) {
    const auto s = cli::parse_scenario_text(text);
    if (cli::run_scenario(s).report.dump(2) == cli::run_scenario(s).report.dump(2)) ++identical;
  }
  return {violations == 0 && identical == int(scenarios.size()),
          fmt("%d axiom violations over 10^4 triples (slack 1e-12), %d/%zu reports byte-identical on rerun",
              violations, identical, scenarios.size())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"classification battery", classification_battery},
      {"fixed-point residual", fixed_point_residual},
      {"normal-form identity", normal_form_identity},
      {"uniform convergence rate", uniform_convergence_rate},
      {"gauge linear bound", gauge_linear_bound},
      {"iterate verdict", iterate_verdicts},
      {"matrix exponential", matrix_exponential},
      {"flow verdict equivalence", flow_verdict_equivalence},
      {"approximating sequence", approximating_construction},
      {"metric and determinism", metric_and_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2zu %-26s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
