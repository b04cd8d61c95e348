#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "equibaire/battery.hpp"
#include "equibaire/scenario.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kMalformed = 2;
constexpr int kDisagreement = 3;

const char* kFooter = R"(Exit codes: 0 analysis finished (holds, fails and out_of_scope included),
2 malformed input (the message names the field), 3 the two flow verdict routes disagree.

Outputs of `run`, written to --out:
  report.json     result, scenario echo, resolved parameters and tolerances
  gauge.csv       r,S,S_over_r                       (gauge, verdict1)
  trajectory.csv  t_or_n,re,im,is_inf,chordal_dist_to_limit   (orbit, flow)
                  re and im are nan at infinity; the distance is nan when
                  the trajectory has no limit point.)";

std::vector<double> parse_csv_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw equibaire::InvalidArgument("radii", "not a number: \"" + item + "\"");
    }
  }
  if (out.empty()) throw equibaire::InvalidArgument("radii", "empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moebius dynamics on the Riemann sphere and Equi-Baire verdicts"};
  app.footer(kFooter);
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run one scenario file");
  run->footer(kFooter);
  std::string scenario_path;
  std::string out_dir = ".";
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> radii;
  std::optional<double> tmax;
  std::optional<std::size_t> nmax;
  std::optional<std::string> tolerance_overrides;
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("--workers", workers, "Worker threads (results do not depend on it)");
  run->add_option("--seed", seed, "Seed for sampled grids");
  run->add_option("--radii", radii, "Descending radii, comma separated");
  run->add_option("--tmax", tmax, "Flow time horizon");
  run->add_option("--nmax", nmax, "Iterate count or cap");
  run->add_option("--tolerance-overrides", tolerance_overrides,
                  R"(JSON object of tolerances, e.g. {"collapse_tol": 1e-5})");

  auto* battery = app.add_subcommand("battery", "Run a built-in check suite");
  std::string suite;
  battery->add_option("suite", suite, "canonical-forms, theorem1, theorem2 or metric-axioms")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kMalformed;
  }

  try {
    if (*battery) {
      if (!equibaire::cli::is_suite(suite)) {
        std::cerr << "error: suite: unknown suite \"" << suite
                  << "\"; expected canonical-forms, theorem1, theorem2 or metric-axioms\n";
        return kMalformed;
      }
      return equibaire::cli::run_battery(suite, std::cout) ? kOk : 1;
    }

    equibaire::cli::Overrides overrides;
    overrides.workers = workers;
    overrides.seed = seed;
    overrides.tmax = tmax;
    overrides.nmax = nmax;
    if (radii) overrides.radii = parse_csv_list(*radii);
    if (tolerance_overrides) {
      try {
        overrides.tolerances = nlohmann::json::parse(*tolerance_overrides);
      } catch (const nlohmann::json::parse_error& e) {
        throw equibaire::InvalidArgument("tolerance-overrides", std::string("invalid JSON: ") + e.what());
      }
    }

    auto scenario = equibaire::cli::read_scenario_file(scenario_path);
    equibaire::cli::apply_overrides(scenario, overrides);
    const auto outputs = equibaire::cli::run_scenario(scenario);
    equibaire::cli::write_outputs(outputs, out_dir);
    const auto& result = outputs.report["result"];
    std::cout << equibaire::cli::to_string(scenario.experiment);
    if (result.contains("verdict")) std::cout << ": " << result["verdict"].get<std::string>();
    std::cout << " -> " << out_dir << "/report.json\n";
    return kOk;
  } catch (const equibaire::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMalformed;
  } catch (const equibaire::BasisDisagreement& e) {
    std::cerr << "error: basis disagreement: " << e.what() << "\n"
              << "  algebraic: " << e.algebraic() << "\n"
              << "  dynamical: " << e.dynamical() << "\n";
    return kDisagreement;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
