#pragma once

// Built-in check bundles run by `equibaire battery <suite>`.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "equibaire/equibaire.hpp"

namespace equibaire::cli {

inline constexpr std::array<std::string_view, 4> kSuites{"canonical-forms", "theorem1", "theorem2",
                                                         "metric-axioms"};

struct BatteryRow {
  std::string name;
  std::string expected;
  std::string got;
  bool pass{};
};

namespace detail {

using C = std::complex<double>;

inline C battery_complex(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return {n(rng), n(rng)};
}

/// Random SL(2,C) conjugator with Frobenius norm at most 3.
inline MoebiusMap battery_conjugator(std::mt19937_64& rng) {
  for (;;) {
    MoebiusMap p(battery_complex(rng), battery_complex(rng), battery_complex(rng), battery_complex(rng));
    if (p.matrix().frobenius_norm() <= 3.0) return p;
  }
}

inline Matrix2<double> conjugate_generator(const Matrix2<double>& a, const MoebiusMap& p) {
  const auto& m = p.matrix();
  auto b = m * a * Matrix2<double>{m.d, -m.b, -m.c, m.a};
  b.d = -b.a;  // exact trace zero after rounding
  return b;
}

struct NamedGenerator {
  std::string name;
  Matrix2<double> a;
  SubgroupKind kind;
};

inline std::vector<NamedGenerator> canonical_generators() {
  return {
      {"elliptic diag(i, -i)", {C(0, 1), 0, 0, C(0, -1)}, SubgroupKind::elliptic},
      {"hyperbolic diag(1, -1)", {1, 0, 0, -1}, SubgroupKind::hyperbolic},
      {"parabolic [[0, 1], [0, 0]]", {0, 1, 0, 0}, SubgroupKind::parabolic},
      {"loxodromic diag(1+i, -1-i)", {C(1, 1), 0, 0, C(-1, -1)}, SubgroupKind::loxodromic},
  };
}

inline std::vector<BatteryRow> canonical_forms_suite() {
  std::vector<BatteryRow> rows;
  for (const auto& g : canonical_generators()) {
    const auto got = classify_subgroup(FlowGenerator(g.a)).tag;
    rows.push_back({g.name, std::string(to_string(g.kind)), std::string(to_string(got)), got == g.kind});
  }
  const auto zero = classify_subgroup(FlowGenerator(Matrix2<double>{0, 0, 0, 0})).tag;
  rows.push_back({"zero generator", "trivial", std::string(to_string(zero)), zero == SubgroupKind::trivial});

  const double s = 1.0 / std::sqrt(2.0);
  const std::vector<std::tuple<std::string, MoebiusMap, MapType>> maps{
      {"map [[0, -1], [1, 0]]", MoebiusMap(0, -1, 1, 0), MapType::elliptic},
      {"map z + 1", MoebiusMap(1, 1, 0, 1), MapType::parabolic},
      {"map diag(2, 1/2)", MoebiusMap(2, 0, 0, 0.5), MapType::hyperbolic},
      {"map diag(2i, -i/2)", MoebiusMap(C(0, 2), 0, 0, C(0, -0.5)), MapType::loxodromic},
      {"map z / 2", MoebiusMap(s, 0, 0, 1.0 / s), MapType::hyperbolic},
  };
  for (const auto& [name, f, want] : maps) {
    const auto got = classify(f).tag;
    rows.push_back({name, std::string(to_string(want)), std::string(to_string(got)), got == want});
  }
  return rows;
}

inline std::vector<BatteryRow> theorem1_suite() {
  std::vector<BatteryRow> rows;
  auto check = [&](const std::string& name, const MoebiusMap& f, const SpherePoint& x, Verdict want) {
    const auto rep = theorem1_verdict(f, x);
    rows.push_back({name, std::string(to_string(want)), std::string(to_string(rep.verdict)),
                    rep.verdict == want});
  };
  const MoebiusMap hyper(2, 0, 0, 0.5);
  const MoebiusMap lox(C(0, 2), 0, 0, C(0, -0.5));
  check("diag(2, 1/2) at 1", hyper, SpherePoint::from_affine(1.0), Verdict::holds);
  check("diag(2, 1/2) at 0.3 - 2i", hyper, SpherePoint::from_affine({0.3, -2}), Verdict::holds);
  check("diag(2, 1/2) at its repelling point 0", hyper, SpherePoint::zero(), Verdict::out_of_scope);
  check("diag(2i, -i/2) at 1 + i", lox, SpherePoint::from_affine({1, 1}), Verdict::holds);
  check("diag(2i, -i/2) at its attracting point inf", lox, SpherePoint::infinity(), Verdict::holds);
  check("elliptic [[0, -1], [1, 0]] at 1", MoebiusMap(0, -1, 1, 0), SpherePoint::from_affine(1.0),
        Verdict::out_of_scope);
  check("parabolic z + 1 at 0", MoebiusMap(1, 1, 0, 1), SpherePoint::zero(), Verdict::out_of_scope);

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> modulus(1.2, 3.0), angle(0.2, 3.0);
  const auto pts = random_sphere_points(10, 17).points;
  for (int i = 0; i < 10; ++i) {
    const C k = std::polar(modulus(rng), angle(rng));
    const auto p = battery_conjugator(rng);
    const auto f = compose(compose(p, MoebiusMap(k, 0, 0, 1.0 / k)), inverse(p));
    check("random loxodromic #" + std::to_string(i), f, pts[std::size_t(i)], Verdict::holds);
  }
  return rows;
}

inline std::vector<BatteryRow> theorem2_suite() {
  std::vector<BatteryRow> rows;
  const auto k = fibonacci_grid(200);
  auto check = [&](const std::string& name, const Matrix2<double>& a, Verdict want) {
    std::string got;
    bool pass = false;
    try {
      const auto rep = theorem2_verdict(FlowGenerator(a), k);
      got = std::string(to_string(rep.verdict)) + " (" + std::string(to_string(rep.basis)) + ")";
      pass = rep.verdict == want;
    } catch (const BasisDisagreement& e) {
      got = std::string("basis disagreement: ") + e.what();
    }
    rows.push_back({name, std::string(to_string(want)), got, pass});
  };
  for (const auto& g : canonical_generators()) {
    check(g.name, g.a, g.kind == SubgroupKind::elliptic ? Verdict::holds : Verdict::fails);
  }
  check("zero generator", {0, 0, 0, 0}, Verdict::holds);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> par(0.25, 2.0);
  for (const auto& g : canonical_generators()) {
    for (int i = 0; i < 5; ++i) {
      const double s = par(rng), u = par(rng);
      Matrix2<double> a;
      switch (g.kind) {
        case SubgroupKind::elliptic: a = {C(0, s), 0, 0, C(0, -s)}; break;
        case SubgroupKind::hyperbolic: a = {s, 0, 0, -s}; break;
        case SubgroupKind::parabolic: a = {0, s, 0, 0}; break;
        default: a = {C(s, u), 0, 0, C(-s, -u)}; break;
      }
      check(std::string(to_string(g.kind)) + " conjugate #" + std::to_string(i),
            conjugate_generator(a, battery_conjugator(rng)),
            g.kind == SubgroupKind::elliptic ? Verdict::holds : Verdict::fails);
    }
  }
  return rows;
}

inline std::vector<BatteryRow> metric_axioms_suite() {
  const auto pts = random_sphere_points(3 * 10000, 5).points;
  std::size_t triangle = 0, symmetry = 0, bounds = 0, identity = 0;
  for (std::size_t i = 0; i + 2 < pts.size(); i += 3) {
    const double dxy = chordal_distance(pts[i], pts[i + 1]);
    const double dyz = chordal_distance(pts[i + 1], pts[i + 2]);
    const double dxz = chordal_distance(pts[i], pts[i + 2]);
    if (dxz > dxy + dyz + 1e-12) ++triangle;
    if (dxy != chordal_distance(pts[i + 1], pts[i])) ++symmetry;
    if (dxy < 0 || dxy > 1 + 1e-12) ++bounds;
    if (chordal_distance(pts[i], pts[i]) > 1e-12) ++identity;
  }
  auto row = [](std::string name, std::size_t violations) {
    return BatteryRow{std::move(name), "0 violations", std::to_string(violations) + " violations",
                      violations == 0};
  };
  return {row("triangle inequality, 10^4 triples", triangle), row("symmetry", symmetry),
          row("range [0, 1]", bounds), row("d(x, x) = 0", identity)};
}

}  // namespace detail

inline bool is_suite(std::string_view name) {
  return std::find(kSuites.begin(), kSuites.end(), name) != kSuites.end();
}

inline std::vector<BatteryRow> battery_rows(std::string_view suite) {
  if (suite == "canonical-forms") return detail::canonical_forms_suite();
  if (suite == "theorem1") return detail::theorem1_suite();
  if (suite == "theorem2") return detail::theorem2_suite();
  if (suite == "metric-axioms") return detail::metric_axioms_suite();
  throw InvalidArgument("suite", "unknown suite \"" + std::string(suite) +
                                     "\"; expected canonical-forms, theorem1, theorem2 or metric-axioms");
}

/// Prints the table; true iff every row passes.
inline bool run_battery(std::string_view suite, std::ostream& os) {
  const auto rows = battery_rows(suite);
  std::size_t width = 4;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  bool all = true;
  os << std::left << std::setw(int(width)) << "case" << "  result  expected / got\n";
  for (const auto& r : rows) {
    all = all && r.pass;
    os << std::left << std::setw(int(width)) << r.name << "  " << (r.pass ? "PASS  " : "FAIL  ")
       << "  " << r.expected << " / " << r.got << "\n";
  }
  os << suite << ": " << (all ? "all passed" : "FAILED") << " (" << rows.size() << " cases)\n";
  return all;
}

}  // namespace equibaire::cli
