#pragma once

#include <string>

namespace subrct {

// Text-in, text-out entry points shared by the command line tool and the
// python module. Configs use the flat key = value format.

struct AnalyzeArtifacts {
  std::string json;
  std::string csv;
  std::string format;  // json | csv | both, resolved from the config
};

AnalyzeArtifacts analyze_from_text(const std::string& csv_text,
                                   const std::string& config_text,
                                   const std::string& data_label = "<memory>");
AnalyzeArtifacts analyze_from_files(const std::string& data_path,
                                    const std::string& config_path);

struct SimulateArtifacts {
  std::string csv;
  std::string json;
};

SimulateArtifacts simulate_from_text(const std::string& config_text, int threads = 0);
SimulateArtifacts simulate_from_file(const std::string& config_path, int threads = 0);

struct ProbeArtifacts {
  std::string panel_a;
  std::string panel_b;
  std::string summary;
};

ProbeArtifacts probe_from_text(const std::string& config_text);
ProbeArtifacts probe_from_file(const std::string& config_path);

}  // namespace subrct
