#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "subrct/driver.hpp"
#include "subrct/errors.hpp"
#include "subrct/report.hpp"

namespace {

using namespace subrct;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitEstimation = 3;

void ensure_out_dir(const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out_dir + "'");
}

int cmd_analyze(const std::string& data_path, const std::string& config_path,
                const std::string& out_dir) {
  const AnalyzeArtifacts art = analyze_from_files(data_path, config_path);
  if (out_dir.empty()) {
    std::cout << (art.format == "csv" ? art.csv : art.json);
  } else {
    ensure_out_dir(out_dir);
    const std::filesystem::path dir(out_dir);
    if (art.format != "csv") write_text_file((dir / "report.json").string(), art.json);
    if (art.format != "json") write_text_file((dir / "report.csv").string(), art.csv);
    std::cerr << "analyze: wrote report to " << out_dir << "\n";
  }
  return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 int threads) {
  std::cerr << "simulate: running " << config_path << "\n";
  const SimulateArtifacts art = simulate_from_file(config_path, threads);
  if (out_dir.empty()) {
    std::cout << art.csv;
  } else {
    ensure_out_dir(out_dir);
    const std::filesystem::path dir(out_dir);
    write_text_file((dir / "simulation.csv").string(), art.csv);
    write_text_file((dir / "simulation.json").string(), art.json);
    std::cerr << "simulate: wrote report to " << out_dir << "\n";
  }
  return kExitOk;
}

int cmd_probe(const std::string& config_path, const std::string& out_dir) {
  const ProbeArtifacts art =
      config_path.empty() ? probe_from_text("") : probe_from_file(config_path);
  if (out_dir.empty()) {
    std::cout << art.summary;
  } else {
    ensure_out_dir(out_dir);
    const std::filesystem::path dir(out_dir);
    write_text_file((dir / "panel_a.csv").string(), art.panel_a);
    write_text_file((dir / "panel_b.csv").string(), art.panel_b);
    write_text_file((dir / "summary.csv").string(), art.summary);
    std::cerr << "probe: wrote curves to " << out_dir << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design-based subgroup analysis for randomized trials"};
  app.require_subcommand(1);

  std::string data_path, config_path, out_dir;
  int threads = 0;

  auto* analyze = app.add_subcommand("analyze", "Estimate subgroup effects from a CSV");
  analyze->add_option("--data", data_path, "input dataset CSV")->required();
  analyze->add_option("--config", config_path, "run configuration file")->required();
  analyze->add_option("--out", out_dir, "output directory (stdout when omitted)");

  auto* simulate = app.add_subcommand("simulate", "Run the Monte Carlo study");
  simulate->add_option("--config", config_path, "run configuration file")->required();
  simulate->add_option("--out", out_dir, "output directory (stdout when omitted)");
  simulate->add_option("--threads", threads, "worker threads, 0 = auto");

  auto* probe = app.add_subcommand("probe", "Evaluate the design-math curves");
  probe->add_option("--config", config_path, "run configuration file");
  probe->add_option("--out", out_dir, "output directory (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (app.got_subcommand(analyze)) return cmd_analyze(data_path, config_path, out_dir);
    if (app.got_subcommand(simulate)) return cmd_simulate(config_path, out_dir, threads);
    return cmd_probe(config_path, out_dir);
  } catch (const EstimationError& e) {
    std::cerr << "estimation error: " << e.what() << "\n";
    return kExitEstimation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEstimation;
  }
}
