// Command-line front end: single scenarios, design-space sweeps, cost
// reports, iso-rate extraction and raw backplane sizing.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "lis/lis.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitPartialSweep = 4;

lis::ScenarioConfig resolve_config(const std::string& path, std::optional<std::uint64_t> seed,
                                   std::optional<std::size_t> np) {
  nlohmann::json j = path.empty() ? nlohmann::json::object() : lis::read_json_file(path);
  if (seed) j["rng_seed"] = *seed;
  if (np) j["Np"] = *np;
  return lis::config_from_json(j);
}

/// Writes the resolved config; returns true when the caller should stop.
bool dump_config(const std::string& path, const lis::ScenarioConfig& c) {
  if (path.empty()) return false;
  const std::string text = lis::config_to_json(c).dump(2) + "\n";
  if (path == "-") {
    std::cout << text;
    return true;
  }
  std::ofstream out(path);
  if (!out) throw lis::ConfigError("cannot write '" + path + "'");
  out << text;
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Panelized large-intelligent-surface uplink simulator and cost model"};
  app.require_subcommand(1);

  std::string config_path, dump_path, algo_name = "rmf";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> np;

  auto* simulate = app.add_subcommand("simulate", "Run one scenario and report sum-rate and costs as JSON");
  simulate->add_option("--config", config_path, "Scenario config (JSON); defaults when omitted");
  simulate->add_option("--algo", algo_name, "rmf or iic")->check(CLI::IsMember({"rmf", "iic"}));
  simulate->add_option("--seed", seed, "Override rng_seed");
  simulate->add_option("--np", np, "Override Np");
  simulate->add_option("--dump-config", dump_path, "Write the resolved config to this path ('-' prints and exits)");

  std::string spec_path, out_path;
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  bool quiet = false;
  auto* sweep = app.add_subcommand("sweep", "Run an (algorithm, Ap, Np) sweep and write CSV");
  sweep->add_option("--config", config_path, "Base scenario config (JSON)");
  sweep->add_option("--spec", spec_path, "Sweep spec (JSON); default grid when omitted");
  sweep->add_option("--out", out_path, "Output CSV path ('-' for stdout)")->required();
  sweep->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--dump-config", dump_path, "Write the resolved config to this path ('-' prints and exits)");
  sweep->add_flag("--quiet", quiet, "No progress output");

  std::vector<std::string> cost_algos;
  std::string format = "json";
  auto* cost = app.add_subcommand("cost", "Cost report only (no channel generation)");
  cost->add_option("--config", config_path, "Scenario config (JSON)");
  cost->add_option("--algo", cost_algos, "rmf and/or iic (default both)")->check(CLI::IsMember({"rmf", "iic"}));
  cost->add_option("--np", np, "Override Np");
  cost->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  cost->add_option("--dump-config", dump_path, "Write the resolved config to this path ('-' prints and exits)");

  std::string in_path;
  double target = 610.0;
  auto* iso = app.add_subcommand("iso", "Iso-rate design points from a sweep CSV");
  iso->add_option("--in", in_path, "Sweep CSV")->required();
  iso->add_option("--target", target, "Target sum-rate in bps/Hz");

  std::optional<std::size_t> antennas;
  std::optional<double> height, width;
  double wavelength = 0.075;
  std::size_t bits = 8;
  double bandwidth = 100e6;
  auto* backplane = app.add_subcommand("estimate-backplane", "Raw baseband data-rate without panel processing");
  backplane->add_option("--antennas", antennas, "Antenna count M");
  backplane->add_option("--height", height, "Surface height in m (with --width, instead of --antennas)");
  backplane->add_option("--width", width, "Surface width in m");
  backplane->add_option("--wavelength", wavelength, "Wavelength in m for --height/--width sizing");
  backplane->add_option("--bits", bits, "ADC bits per I and per Q");
  backplane->add_option("--bandwidth", bandwidth, "Signal bandwidth f_B in Hz");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) {
      const auto c = resolve_config(config_path, seed, np);
      if (dump_config(dump_path, c)) return 0;
      const auto result = lis::run_scenario(c, lis::parse_algorithm(algo_name));
      std::cout << lis::to_json(result).dump(2) << "\n";
      return 0;
    }

    if (*sweep) {
      const auto c = resolve_config(config_path, std::nullopt, std::nullopt);
      if (dump_config(dump_path, c)) return 0;
      const lis::SweepSpec spec = spec_path.empty() ? [&] {
        lis::SweepSpec s;
        s.base = c;
        lis::validate(s);
        return s;
      }()
                                                    : lis::sweep_spec_from_json(lis::read_json_file(spec_path), c);
      lis::SweepProgress progress;
      if (!quiet) {
        progress = [](std::size_t done, std::size_t total) {
          std::fprintf(stderr, "\rsweep: %zu/%zu drops", done, total);
          if (done == total) std::fputc('\n', stderr);
        };
      }
      const auto result = lis::run_sweep(spec, workers, progress);
      if (out_path == "-") {
        lis::write_sweep_csv(std::cout, result.rows);
      } else {
        std::ofstream out(out_path);
        if (!out) throw lis::ConfigError("cannot write '" + out_path + "'");
        lis::write_sweep_csv(out, result.rows);
      }
      for (const auto& f : result.failures) {
        std::fprintf(stderr, "row failed: %s Ap=%g Np=%zu: %s\n", lis::to_string(f.algorithm).c_str(), f.Ap, f.Np,
                     f.message.c_str());
      }
      return result.failures.empty() ? 0 : kExitPartialSweep;
    }

    if (*cost) {
      const auto c = resolve_config(config_path, std::nullopt, np);
      if (dump_config(dump_path, c)) return 0;
      if (cost_algos.empty()) cost_algos = {"rmf", "iic"};
      std::vector<lis::CostReport> reports;
      for (const auto& a : cost_algos) reports.push_back(lis::cost_report(c, lis::parse_algorithm(a)));
      if (format == "csv") {
        lis::write_cost_csv(std::cout, reports);
      } else {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : reports) j.push_back(lis::to_json(r));
        std::cout << j.dump(2) << "\n";
      }
      return 0;
    }

    if (*iso) {
      std::ifstream in(in_path);
      if (!in) throw lis::ConfigError("cannot open '" + in_path + "'");
      const auto result = lis::iso_rate_points(lis::read_sweep_csv(in), target);
      std::cout << "algorithm,Ap_m2,Np,mean_sum_rate_bps_per_hz,c_filt_mac_per_s_per_m2,r_global_bps_per_m2\n";
      for (const auto& p : result.points) {
        std::printf("%s,%.17g,%zu,%.17g,%.17g,%.17g\n", lis::to_string(p.algorithm).c_str(), p.Ap, p.Np, p.mean_rate,
                    p.C_filt, p.R_global);
      }
      for (const auto& n : result.notices) std::fprintf(stderr, "notice: %s\n", n.c_str());
      return 0;
    }

    if (*backplane) {
      std::size_t m = 0;
      if (antennas) {
        m = *antennas;
      } else if (height && width) {
        m = lis::estimate_antenna_count(*height, *width, wavelength);
      } else {
        throw lis::ConfigError("estimate-backplane: give --antennas or both --height and --width");
      }
      const double bps = lis::raw_backplane_rate(m, bits, bandwidth);
      std::printf("antennas: %zu\nbits_per_iq: %zu\nbandwidth_hz: %.6g\nrate_bps: %.6g\nrate_tbps: %.4g\n", m, bits,
                  bandwidth, bps, bps / 1e12);
      return 0;
    }
  } catch (const lis::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const lis::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const lis::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
