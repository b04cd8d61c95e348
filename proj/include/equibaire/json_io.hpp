#pragma once

// JSON and CSV encodings of points, maps, generators and results (double only).

#include <charconv>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "equibaire/equibaire.hpp"

namespace equibaire::io {

using json = nlohmann::json;
using C = std::complex<double>;

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Non-finite values have no JSON number form; they become null.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const C& z) { return json::array({number(z.real()), number(z.imag())}); }

inline C complex_from_json(const json& j, const std::string& field) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw InvalidArgument(field, "expected a complex number [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json to_json(const SpherePoint& p) {
  json j{{"z", to_json(p.z())}, {"w", to_json(p.w())}};
  if (const auto a = p.affine()) {
    j["affine"] = to_json(*a);
  } else {
    j["affine"] = "inf";
  }
  return j;
}

inline json to_json(const Matrix2<double>& m) {
  return json::array({json::array({to_json(m.a), to_json(m.b)}),
                      json::array({to_json(m.c), to_json(m.d)})});
}

inline Matrix2<double> matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_array() || j[0].size() != 2 ||
      !j[1].is_array() || j[1].size() != 2) {
    throw InvalidArgument(field, "expected a 2x2 matrix [[a, b], [c, d]] of [re, im] entries");
  }
  return {complex_from_json(j[0][0], field), complex_from_json(j[0][1], field),
          complex_from_json(j[1][0], field), complex_from_json(j[1][1], field)};
}

inline json to_json(const MoebiusMap& f) {
  return {{"a", to_json(f.a())}, {"b", to_json(f.b())}, {"c", to_json(f.c())}, {"d", to_json(f.d())}};
}

inline json to_json(const MapClass<double>& c) {
  return {{"class", to_string(c.tag)}, {"trace", to_json(c.trace)}};
}

inline json to_json(const FixedPointData<double>& fp) {
  json pts = json::array();
  for (std::size_t i = 0; i < fp.points.size(); ++i) {
    pts.push_back({{"point", to_json(fp.points[i])}, {"multiplier", number(fp.multipliers[i])}});
  }
  json j{{"class", to_string(fp.type)}, {"fixed_points", pts}};
  if (fp.attracting) {
    j["attracting_index"] = *fp.attracting;
    j["repelling_index"] = *fp.repelling();
  }
  return j;
}

inline json to_json(const NormalForm<double>& nf) {
  return {{"conjugator", to_json(nf.conjugator)},
          {"lambda", to_json(nf.lambda)},
          {"lambda_abs", number(std::abs(nf.lambda))},
          {"attracting", to_json(nf.attracting)},
          {"repelling", to_json(nf.repelling)}};
}

inline json to_json(const SubgroupType<double>& t) {
  json j{{"type", to_string(t.tag)}};
  if (t.theta) j["theta"] = number(*t.theta);
  if (t.rate) j["rate"] = number(*t.rate);
  if (t.exponent) j["exponent"] = to_json(*t.exponent);
  return j;
}

inline json to_json(const CompactnessResult<double>& r) {
  json j{{"relatively_compact", r.compact}};
  if (r.certificate) {
    json u = json::array();
    for (const auto& [t, defect] : r.certificate->unitarity) u.push_back({{"t", t}, {"defect", number(defect)}});
    j["certificate"] = {{"conjugator", to_json(r.certificate->conjugator)}, {"unitarity", u}};
  }
  if (r.witness) {
    j["growth_witness"] = {{"t_star", number(r.witness->t_star)},
                           {"log_norm", number(r.witness->log_norm)}};
  }
  return j;
}

inline json to_json(const GaugeEstimate<double>& g) {
  json rows = json::array();
  for (std::size_t i = 0; i < g.radii.size(); ++i) {
    const auto& s = g.samples[i];
    json row{{"r", g.radii[i]},
             {"S", number(g.s_values[i])},
             {"raw", number(s.raw)},
             {"tail", number(s.tail)},
             {"members", s.members}};
    if (s.truncated_at) row["truncated_at"] = *s.truncated_at;
    if (s.decay_ratio) row["decay_ratio"] = number(*s.decay_ratio);
    rows.push_back(row);
  }
  json table = json::array();
  for (const auto& [eps, delta] : g.delta_of_epsilon) {
    table.push_back({{"epsilon", number(eps)}, {"delta", delta}});
  }
  return {{"center", to_json(g.center)},
          {"radii", rows},
          {"c_prime", number(g.c_prime)},
          {"delta_of_epsilon", table},
          {"samples_per_ball", g.samples_per_ball},
          {"seed", g.seed}};
}

inline json to_json(const LinearBound<double>& b) {
  json j{{"certified", b.certified},
         {"c_prime", number(b.c_prime)},
         {"large_radius_ratio", number(b.large_radius_ratio)},
         {"small_half_ratio", number(b.small_half_ratio)},
         {"smallest_S", number(b.smallest_s)}};
  if (!b.violation.empty()) j["violation"] = b.violation;
  return j;
}

inline json to_json(const CollapseCertificate<double>& c) {
  json probes = json::array();
  for (std::size_t i = 0; i < c.times.size(); ++i) {
    probes.push_back({{"t", c.times[i]}, {"diameter", number(c.diameters[i])}});
  }
  return {{"region", {{"center", to_json(c.region.center)}, {"radius", c.region.radius}}},
          {"limit", to_json(c.limit)},
          {"initial_diameter", number(c.initial_diameter)},
          {"probes", probes},
          {"decreasing_from", c.decreasing_from}};
}

inline json to_json(const CollapseSearch<double>& s) {
  json j{{"collapse_found", s.certificate.has_value()},
         {"candidates_examined", s.candidates_examined},
         {"min_diameter_ratio", number(s.min_diameter_ratio)},
         {"all_stalled", s.all_stalled}};
  if (s.certificate) j["certificate"] = to_json(*s.certificate);
  return j;
}

inline json to_json(const EquiBaireReport<double>& r) {
  json evidence = json::object();
  if (r.map_class) evidence["map_class"] = to_json(*r.map_class);
  if (r.lambda_abs) evidence["lambda_abs"] = number(*r.lambda_abs);
  if (r.gauge) evidence["gauge"] = to_json(*r.gauge);
  if (r.linear_bound) evidence["linear_bound"] = to_json(*r.linear_bound);
  if (r.decay_consistent) evidence["decay_consistent"] = *r.decay_consistent;
  if (r.subgroup) evidence["subgroup"] = to_json(*r.subgroup);
  if (r.compactness) evidence["compactness"] = to_json(*r.compactness);
  if (r.collapse) evidence["collapse"] = to_json(*r.collapse);
  json params = json::object();
  for (const auto& [k, v] : r.parameters) params[k] = number(v);
  return {{"verdict", to_string(r.verdict)},
          {"basis", to_string(r.basis)},
          {"reason", r.reason},
          {"evidence", evidence},
          {"parameters", params}};
}

inline std::string gauge_csv(const GaugeEstimate<double>& g) {
  std::string out = "r,S,S_over_r\n";
  for (std::size_t i = 0; i < g.radii.size(); ++i) {
    out += format_number(g.radii[i]) + "," + format_number(g.s_values[i]) + "," +
           format_number(g.s_values[i] / g.radii[i]) + "\n";
  }
  return out;
}

/// Rows t_or_n,re,im,is_inf,chordal_dist_to_limit. The point at infinity has
/// re = im = nan; without a limit point the distance column is nan.
inline std::string trajectory_csv(const std::vector<double>& params,
                                  const std::vector<SpherePoint>& points,
                                  const std::optional<SpherePoint>& limit) {
  std::string out = "t_or_n,re,im,is_inf,chordal_dist_to_limit\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto a = points[i].affine();
    const double re = a ? a->real() : std::nan("");
    const double im = a ? a->imag() : std::nan("");
    const double dist = limit ? chordal_distance(points[i], *limit) : std::nan("");
    out += format_number(params[i]) + "," + format_number(re) + "," + format_number(im) + "," +
           (a ? "0" : "1") + "," + format_number(dist) + "\n";
  }
  return out;
}

}  // namespace equibaire::io
