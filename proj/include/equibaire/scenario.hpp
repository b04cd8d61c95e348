#pragma once

// Scenario files: parsing, defaults, flag overrides and execution.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "equibaire/equibaire.hpp"
#include "equibaire/json_io.hpp"

namespace equibaire::cli {

using json = nlohmann::json;
using C = std::complex<double>;

enum class Experiment { classify, fixpoints, normalize, orbit, flow, gauge, verdict1, verdict2, approx_seq };

inline constexpr std::array<std::pair<Experiment, std::string_view>, 9> kExperiments{{
    {Experiment::classify, "classify"},
    {Experiment::fixpoints, "fixpoints"},
    {Experiment::normalize, "normalize"},
    {Experiment::orbit, "orbit"},
    {Experiment::flow, "flow"},
    {Experiment::gauge, "gauge"},
    {Experiment::verdict1, "verdict1"},
    {Experiment::verdict2, "verdict2"},
    {Experiment::approx_seq, "approx-seq"},
}};

constexpr std::string_view to_string(Experiment e) noexcept {
  for (const auto& [k, name] : kExperiments) {
    if (k == e) return name;
  }
  return "unknown";
}

/// Every default in one place; README lists the same table.
struct Defaults {
  static constexpr double x_affine = 1.0;
  static constexpr std::uint64_t seed = 0;
  static constexpr std::size_t samples_per_ball = 256;
  static constexpr std::size_t nmax = 1000;
  static constexpr std::size_t verdict1_nmax = 100000;
  static constexpr double tmax = 20.0;
  static constexpr std::size_t flow_steps = 200;
  static constexpr std::size_t grid_size = 200;
  static constexpr std::size_t m_max = 10000;
  static constexpr std::size_t workers = 1;
  static constexpr std::array<double, 6> radii{0.1, 0.03, 0.01, 0.003, 0.001, 0.0003};
};

inline const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> table{
      {"classification", 1e-9},     {"identity", 1e-10},        {"basin", 1e-9},
      {"trace", 1e-10},             {"zero", 1e-8},             {"nilpotent", 1e-6},
      {"axis", 1e-9},               {"unitarity", 1e-8},        {"growth_threshold", 10.0},
      {"collapse_tol", 1e-4},       {"candidate_radius", 0.1},  {"limit_stability", 1e-2},
      {"limit_separation", 1e-3},   {"epsilon_floor", 1e-3},    {"linear_stability", 1.5},
      {"ratio_band", 0.1},          {"truncation_fraction", 1e-3}, {"decay_band", 0.1},
  };
  return table;
}

/// A point as written in the file; kept verbatim so the echo round-trips.
struct PointInput {
  enum class Kind { affine, infinity, homogeneous };
  Kind kind{Kind::affine};
  C z{}, w{};  // affine value in z for Kind::affine

  SpherePoint point() const {
    switch (kind) {
      case Kind::affine: return SpherePoint::from_affine(z);
      case Kind::infinity: return SpherePoint::infinity();
      case Kind::homogeneous: return SpherePoint(z, w);
    }
    return SpherePoint::infinity();
  }

  json to_json() const {
    switch (kind) {
      case Kind::affine: return {{"affine", io::to_json(z)}};
      case Kind::infinity: return {{"affine", "inf"}};
      case Kind::homogeneous: return {{"z", io::to_json(z)}, {"w", io::to_json(w)}};
    }
    return nullptr;
  }

  static PointInput parse(const json& j, const std::string& field) {
    if (!j.is_object()) throw InvalidArgument(field, R"(expected {"affine": [re, im] | "inf"} or {"z": .., "w": ..})");
    for (const auto& [key, _] : j.items()) {
      if (key != "affine" && key != "z" && key != "w") throw InvalidArgument(field + "." + key, "unknown field");
    }
    PointInput p;
    if (j.contains("affine")) {
      if (j.contains("z") || j.contains("w")) throw InvalidArgument(field, "give either affine or z/w, not both");
      const auto& a = j["affine"];
      if (a.is_string()) {
        if (a.get<std::string>() != "inf") throw InvalidArgument(field + ".affine", "the only string value is \"inf\"");
        p.kind = Kind::infinity;
      } else {
        p.kind = Kind::affine;
        p.z = io::complex_from_json(a, field + ".affine");
      }
    } else {
      if (!j.contains("z") || !j.contains("w")) throw InvalidArgument(field, "needs both z and w");
      p.kind = Kind::homogeneous;
      p.z = io::complex_from_json(j["z"], field + ".z");
      p.w = io::complex_from_json(j["w"], field + ".w");
    }
    try {
      (void)p.point();
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(field, e.what());
    }
    return p;
  }

  friend bool operator==(const PointInput&, const PointInput&) = default;
};

struct Parameters {
  std::optional<PointInput> x;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<double>> radii;
  std::optional<std::size_t> samples_per_ball;
  std::optional<std::size_t> nmax;
  std::optional<double> tmax;
  std::optional<std::vector<double>> times;
  std::optional<std::size_t> grid_size;
  std::optional<std::size_t> m_max;
  std::optional<std::size_t> workers;
  std::map<std::string, double> tolerances;

  friend bool operator==(const Parameters&, const Parameters&) = default;
};

struct Scenario {
  std::optional<Matrix2<double>> map;        // raw entries; normalized when used
  std::optional<Matrix2<double>> generator;
  Experiment experiment{Experiment::classify};
  Parameters parameters;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Command-line values; each one replaces the file's value.
struct Overrides {
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<double>> radii;
  std::optional<double> tmax;
  std::optional<std::size_t> nmax;
  std::optional<json> tolerances;
};

namespace detail {

inline std::uint64_t parse_unsigned(const json& j, const std::string& field) {
  const bool negative = j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0;
  if (!j.is_number_integer() || negative) throw InvalidArgument(field, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

inline std::size_t parse_positive(const json& j, const std::string& field) {
  const auto v = parse_unsigned(j, field);
  if (v == 0) throw InvalidArgument(field, "must be positive");
  return static_cast<std::size_t>(v);
}

inline double parse_real(const json& j, const std::string& field) {
  if (!j.is_number()) throw InvalidArgument(field, "expected a number");
  return j.get<double>();
}

inline std::vector<double> parse_real_list(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw InvalidArgument(field, "expected a nonempty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_real(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

inline void merge_tolerances(std::map<std::string, double>& into, const json& j, const std::string& field) {
  if (!j.is_object()) throw InvalidArgument(field, "expected an object of name: value");
  for (const auto& [key, value] : j.items()) {
    if (!default_tolerances().contains(key)) throw InvalidArgument(field + "." + key, "unknown tolerance");
    const double v = parse_real(value, field + "." + key);
    if (!(v > 0) || !std::isfinite(v)) throw InvalidArgument(field + "." + key, "must be positive and finite");
    into[key] = v;
  }
}

inline Matrix2<double> parse_map(const json& j) {
  if (!j.is_object()) throw InvalidArgument("map", R"(expected {"a": [re, im], "b": .., "c": .., "d": ..})");
  for (const auto& [key, _] : j.items()) {
    if (key != "a" && key != "b" && key != "c" && key != "d") throw InvalidArgument("map." + key, "unknown field");
  }
  Matrix2<double> m;
  for (const char* k : {"a", "b", "c", "d"}) {
    if (!j.contains(k)) throw InvalidArgument(std::string("map.") + k, "missing");
  }
  m.a = io::complex_from_json(j["a"], "map.a");
  m.b = io::complex_from_json(j["b"], "map.b");
  m.c = io::complex_from_json(j["c"], "map.c");
  m.d = io::complex_from_json(j["d"], "map.d");
  return m;
}

inline Matrix2<double> parse_generator(const json& j) {
  if (!j.is_object()) throw InvalidArgument("generator", R"(expected {"A": [[a, b], [c, d]]})");
  for (const auto& [key, _] : j.items()) {
    if (key != "A") throw InvalidArgument("generator." + key, "unknown field");
  }
  if (!j.contains("A")) throw InvalidArgument("generator.A", "missing");
  return io::matrix_from_json(j["A"], "generator.A");
}

inline Parameters parse_parameters(const json& j) {
  if (!j.is_object()) throw InvalidArgument("parameters", "expected an object");
  Parameters p;
  for (const auto& [key, v] : j.items()) {
    const std::string f = "parameters." + key;
    if (key == "x") p.x = PointInput::parse(v, f);
    else if (key == "seed") p.seed = parse_unsigned(v, f);
    else if (key == "radii") p.radii = parse_real_list(v, f);
    else if (key == "samples_per_ball") p.samples_per_ball = parse_positive(v, f);
    else if (key == "nmax") p.nmax = parse_positive(v, f);
    else if (key == "tmax") p.tmax = parse_real(v, f);
    else if (key == "times") p.times = parse_real_list(v, f);
    else if (key == "grid_size") p.grid_size = parse_positive(v, f);
    else if (key == "m_max") p.m_max = parse_positive(v, f);
    else if (key == "workers") p.workers = parse_positive(v, f);
    else if (key == "tolerances") merge_tolerances(p.tolerances, v, f);
    else throw InvalidArgument(f, "unknown field");
  }
  return p;
}

inline json real_list(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

}  // namespace detail

inline Scenario parse_scenario(const json& j) {
  if (!j.is_object()) throw InvalidArgument("scenario", "top level must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "map" && key != "generator" && key != "experiment" && key != "parameters") {
      throw InvalidArgument(key, "unknown field");
    }
  }
  Scenario s;
  if (!j.contains("experiment")) throw InvalidArgument("experiment", "missing");
  if (!j["experiment"].is_string()) throw InvalidArgument("experiment", "expected a string");
  const auto name = j["experiment"].get<std::string>();
  const auto it = std::find_if(kExperiments.begin(), kExperiments.end(),
                               [&](const auto& e) { return e.second == name; });
  if (it == kExperiments.end()) throw InvalidArgument("experiment", "unknown experiment \"" + name + "\"");
  s.experiment = it->first;

  if (j.contains("map")) s.map = detail::parse_map(j["map"]);
  if (j.contains("generator")) s.generator = detail::parse_generator(j["generator"]);
  if (s.map && s.generator) throw InvalidArgument("generator", "give exactly one of map, generator");
  if (!s.map && !s.generator) throw InvalidArgument("map", "give exactly one of map, generator");
  if (j.contains("parameters")) s.parameters = detail::parse_parameters(j["parameters"]);

  switch (s.experiment) {
    case Experiment::fixpoints:
    case Experiment::normalize:
    case Experiment::orbit:
    case Experiment::verdict1:
      if (!s.map) throw InvalidArgument("map", "experiment " + name + " needs a map");
      break;
    case Experiment::flow:
    case Experiment::verdict2:
    case Experiment::approx_seq:
      if (!s.generator) throw InvalidArgument("generator", "experiment " + name + " needs a generator");
      break;
    default: break;
  }
  return s;
}

inline Scenario parse_scenario_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("scenario", std::string("invalid JSON: ") + e.what());
  }
  return parse_scenario(j);
}

inline Scenario read_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("scenario", "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

/// The scenario as JSON, with exactly the fields that were given.
inline json echo(const Scenario& s) {
  json j{{"experiment", to_string(s.experiment)}};
  if (s.map) {
    j["map"] = {{"a", io::to_json(s.map->a)}, {"b", io::to_json(s.map->b)},
                {"c", io::to_json(s.map->c)}, {"d", io::to_json(s.map->d)}};
  }
  if (s.generator) j["generator"] = {{"A", io::to_json(*s.generator)}};
  const auto& p = s.parameters;
  json params = json::object();
  if (p.x) params["x"] = p.x->to_json();
  if (p.seed) params["seed"] = *p.seed;
  if (p.radii) params["radii"] = detail::real_list(*p.radii);
  if (p.samples_per_ball) params["samples_per_ball"] = *p.samples_per_ball;
  if (p.nmax) params["nmax"] = *p.nmax;
  if (p.tmax) params["tmax"] = *p.tmax;
  if (p.times) params["times"] = detail::real_list(*p.times);
  if (p.grid_size) params["grid_size"] = *p.grid_size;
  if (p.m_max) params["m_max"] = *p.m_max;
  if (p.workers) params["workers"] = *p.workers;
  if (!p.tolerances.empty()) {
    json t = json::object();
    for (const auto& [k, v] : p.tolerances) t[k] = v;
    params["tolerances"] = t;
  }
  if (!params.empty()) j["parameters"] = params;
  return j;
}

inline void apply_overrides(Scenario& s, const Overrides& o) {
  auto& p = s.parameters;
  if (o.workers) p.workers = *o.workers;
  if (o.seed) p.seed = *o.seed;
  if (o.radii) p.radii = *o.radii;
  if (o.tmax) p.tmax = *o.tmax;
  if (o.nmax) p.nmax = *o.nmax;
  if (o.tolerances) detail::merge_tolerances(p.tolerances, *o.tolerances, "tolerance-overrides");
}

struct Outputs {
  json report;
  std::optional<std::string> gauge_csv;
  std::optional<std::string> trajectory_csv;
};

namespace detail {

struct Resolved {
  SpherePoint x = SpherePoint::from_affine(Defaults::x_affine);
  std::uint64_t seed = Defaults::seed;
  std::size_t samples_per_ball = Defaults::samples_per_ball;
  std::size_t nmax = Defaults::nmax;
  double tmax = Defaults::tmax;
  std::size_t grid_size = Defaults::grid_size;
  std::size_t m_max = Defaults::m_max;
  std::size_t workers = Defaults::workers;
  std::map<std::string, double> tol = default_tolerances();

  MoebiusTolerances<double> moebius() const {
    return {tol.at("classification"), tol.at("identity"), tol.at("basin")};
  }

  FlowTolerances<double> flow() const {
    FlowTolerances<double> f;
    f.trace = tol.at("trace");
    f.zero = tol.at("zero");
    f.nilpotent = tol.at("nilpotent");
    f.axis = tol.at("axis");
    f.unitarity = tol.at("unitarity");
    f.growth_threshold = tol.at("growth_threshold");
    return f;
  }

  GaugeConfig<double> gauge() const {
    GaugeConfig<double> g;
    g.samples_per_ball = samples_per_ball;
    g.seed = seed;
    g.workers = workers;
    g.ratio_band = tol.at("ratio_band");
    g.truncation_fraction = tol.at("truncation_fraction");
    return g;
  }

  LinearBoundConfig<double> linear() const {
    return {tol.at("epsilon_floor"), tol.at("linear_stability")};
  }

  CollapseConfig<double> collapse() const {
    CollapseConfig<double> c;
    c.candidate_radius = tol.at("candidate_radius");
    c.collapse_tol = tol.at("collapse_tol");
    c.stability = tol.at("limit_stability");
    c.separation = tol.at("limit_separation");
    c.seed = seed;
    c.workers = workers;
    return c;
  }
};

inline Resolved resolve(const Scenario& s) {
  Resolved r;
  const auto& p = s.parameters;
  if (p.x) r.x = p.x->point();
  if (p.seed) r.seed = *p.seed;
  if (p.samples_per_ball) r.samples_per_ball = *p.samples_per_ball;
  if (s.experiment == Experiment::verdict1) r.nmax = Defaults::verdict1_nmax;
  if (p.nmax) r.nmax = *p.nmax;
  if (p.tmax) {
    if (!(*p.tmax > 0) || !std::isfinite(*p.tmax)) throw InvalidArgument("parameters.tmax", "must be positive and finite");
    r.tmax = *p.tmax;
  }
  if (p.grid_size) r.grid_size = *p.grid_size;
  if (p.m_max) r.m_max = *p.m_max;
  if (p.workers) r.workers = *p.workers;
  for (const auto& [k, v] : p.tolerances) r.tol[k] = v;
  return r;
}

// Where the forward trajectory of x under g ends up: the attracting fixed
// point, or x itself when x is the repelling one; nothing for |lambda| = 1
// classes other than parabolic.
inline std::optional<SpherePoint> forward_limit(const MoebiusMap& g, const SpherePoint& x,
                                                const MoebiusTolerances<double>& tol) {
  const auto cls = classify(g, tol);
  if (cls.tag == MapType::parabolic) return fixed_points(g, tol).points.front();
  if (!is_loxodromic_type(cls.tag)) return std::nullopt;
  const auto nf = loxodromic_normal_form(g, tol);
  if (in_attracting_basin(g, x, tol) != BasinMembership::inside) return nf.repelling;
  return nf.attracting;
}

inline json limit_json(const std::optional<SpherePoint>& p) {
  return p ? io::to_json(*p) : json(nullptr);
}

}  // namespace detail

/// Runs one scenario. Malformed input raises InvalidArgument naming the
/// field; a disagreement between the two flow verdict routes raises
/// BasisDisagreement.
inline Outputs run_scenario(const Scenario& s) {
  const auto r = detail::resolve(s);
  const auto mt = r.moebius();
  const auto ft = r.flow();

  std::optional<MoebiusMap> f;
  std::optional<FlowGenerator> a;
  if (s.map) {
    try {
      f = MoebiusMap(*s.map);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("map", e.what());
    }
  }
  if (s.generator) {
    try {
      a = FlowGenerator(*s.generator, ft);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("generator", e.what());
    }
  }
  const std::string payload = f ? "map" : "generator";

  Outputs out;
  json result = json::object();
  json resolved{{"seed", r.seed}, {"workers", r.workers}};
  try {
    switch (s.experiment) {
      case Experiment::classify: {
        if (f) {
          result = io::to_json(classify(*f, mt));
        } else {
          result["subgroup"] = io::to_json(classify_subgroup(*a));
          result["compactness"] = io::to_json(is_relatively_compact(*a));
        }
        break;
      }
      case Experiment::fixpoints: result = io::to_json(fixed_points(*f, mt)); break;
      case Experiment::normalize: result = io::to_json(loxodromic_normal_form(*f, mt)); break;
      case Experiment::orbit: {
        resolved["x"] = io::to_json(r.x);
        resolved["nmax"] = r.nmax;
        const auto orbit = iterate_orbit(*f, r.x, r.nmax);
        const auto limit = detail::forward_limit(*f, r.x, mt);
        std::vector<double> ns;
        for (std::size_t n = 0; n < orbit.size(); ++n) ns.push_back(double(n));
        result = {{"final", io::to_json(orbit.back())}, {"limit", detail::limit_json(limit)}};
        out.trajectory_csv = io::trajectory_csv(ns, orbit, limit);
        break;
      }
      case Experiment::flow: {
        resolved["x"] = io::to_json(r.x);
        std::vector<double> times;
        if (s.parameters.times) {
          times = *s.parameters.times;
        } else {
          resolved["tmax"] = r.tmax;
          for (std::size_t k = 0; k <= Defaults::flow_steps; ++k) {
            times.push_back(r.tmax * double(k) / double(Defaults::flow_steps));
          }
        }
        const auto traj = flow_trajectory(*a, r.x, times);
        const auto type = classify_subgroup(*a).tag;
        std::optional<SpherePoint> limit;
        if (type != SubgroupKind::trivial && type != SubgroupKind::elliptic) {
          limit = detail::forward_limit(flow_exp(*a, 1.0), r.x, mt);
        }
        result = {{"final", io::to_json(traj.back())}, {"limit", detail::limit_json(limit)}};
        out.trajectory_csv = io::trajectory_csv(times, traj, limit);
        break;
      }
      case Experiment::gauge: {
        resolved["x"] = io::to_json(r.x);
        resolved["samples_per_ball"] = r.samples_per_ball;
        const auto family = f ? FamilySpec<double>::iterates(*f, r.nmax)
                              : FamilySpec<double>::flow(*a, r.tmax, Defaults::flow_steps);
        if (f) resolved["nmax"] = r.nmax;
        else resolved["tmax"] = r.tmax;
        const auto radii = s.parameters.radii.value_or(
            std::vector<double>(Defaults::radii.begin(), Defaults::radii.end()));
        resolved["radii"] = detail::real_list(radii);
        const auto g = estimate_gauge(family, r.x, radii, r.gauge());
        result["family"] = to_string(family.kind);
        result["gauge"] = io::to_json(g);
        if (radii.size() >= 4 && radii.front() >= 10 * radii.back()) {
          result["linear_bound"] = io::to_json(certify_linear_bound(g, r.linear()));
        } else {
          result["linear_bound"] = nullptr;
        }
        out.gauge_csv = io::gauge_csv(g);
        break;
      }
      case Experiment::verdict1: {
        resolved["x"] = io::to_json(r.x);
        resolved["samples_per_ball"] = r.samples_per_ball;
        resolved["nmax"] = r.nmax;
        Theorem1Config<double> cfg;
        cfg.gauge = r.gauge();
        cfg.linear = r.linear();
        cfg.moebius = mt;
        cfg.n_cap = r.nmax;
        cfg.decay_band = r.tol.at("decay_band");
        if (s.parameters.radii) cfg.radii = *s.parameters.radii;
        resolved["radii"] = s.parameters.radii ? detail::real_list(*s.parameters.radii) : json("adaptive");
        const auto rep = theorem1_verdict(*f, r.x, cfg);
        result = io::to_json(rep);
        if (rep.gauge) out.gauge_csv = io::gauge_csv(*rep.gauge);
        break;
      }
      case Experiment::verdict2: {
        resolved["grid_size"] = r.grid_size;
        Theorem2Config<double> cfg;
        cfg.collapse = r.collapse();
        result = io::to_json(theorem2_verdict(*a, fibonacci_grid(r.grid_size), cfg));
        break;
      }
      case Experiment::approx_seq: {
        resolved["grid_size"] = r.grid_size;
        resolved["m_max"] = r.m_max;
        const auto seq = approximating_sequence(*a, r.m_max);
        const auto k = fibonacci_grid(r.grid_size);
        json head = json::array();
        for (std::size_t m = 0; m < std::min<std::size_t>(20, seq.times.size()); ++m) head.push_back(seq.times[m]);
        result = {{"count", seq.maps.size()},
                  {"period", seq.period},
                  {"rational_rotation", seq.rotation.has_value()},
                  {"times_head", head},
                  {"probes", 20},
                  {"density_error", io::number(density_error(*a, seq, k))}};
        if (seq.rotation) result["rotation"] = {seq.rotation->first, seq.rotation->second};
        break;
      }
    }
  } catch (const DomainError& e) {
    throw InvalidArgument(payload, e.what());
  }

  json tol = json::object();
  for (const auto& [k, v] : r.tol) tol[k] = v;
  out.report = {{"experiment", to_string(s.experiment)},
                {"scenario", echo(s)},
                {"result", result},
                {"parameters", resolved},
                {"tolerances", tol}};
  return out;
}

/// report.json plus any CSV tables, written into `dir`.
inline void write_outputs(const Outputs& o, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream file(dir / name, std::ios::binary);
    if (!file) throw InvalidArgument("out", "cannot write " + (dir / name).string());
    file << text;
  };
  write("report.json", o.report.dump(2) + "\n");
  if (o.gauge_csv) write("gauge.csv", *o.gauge_csv);
  if (o.trajectory_csv) write("trajectory.csv", *o.trajectory_csv);
}

}  // namespace equibaire::cli
