#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace subrct {

enum class Mechanism { Complete, Bernoulli };
enum class Structure { Simple, Blocked, Clustered, BlockedClustered };
enum class ClusterWeighting { SubgroupSize, EqualCluster };

// How the trial assigned treatment. `p` is the design assignment rate;
// blocked designs may override it per block label.
struct DesignSpec {
  Mechanism mechanism = Mechanism::Complete;
  Structure structure = Structure::Simple;
  double p = 0.5;
  std::map<std::string, double> block_p;
  ClusterWeighting cluster_weighting = ClusterWeighting::SubgroupSize;

  bool blocked() const {
    return structure == Structure::Blocked || structure == Structure::BlockedClustered;
  }
  bool clustered() const {
    return structure == Structure::Clustered || structure == Structure::BlockedClustered;
  }
  double rate_for(const std::string& block_label) const;
};

struct UnitRecord {
  std::string id;
  double y = 0.0;
  int t = 0;
  std::string subgroup;
  std::string block;
  std::string cluster;
  std::vector<double> x;
  int responded = 1;
  double w_r = 1.0;
};

struct Dataset {
  std::vector<UnitRecord> records;
  DesignSpec design;
  std::vector<std::string> covariate_names;
  bool has_response = false;

  // Label tables in first-appearance order; indices elsewhere refer to these.
  std::vector<std::string> subgroup_levels;
  std::vector<std::string> block_levels;
  std::vector<std::string> cluster_levels;

  size_t n() const { return records.size(); }

  // Derives the level tables and enforces structural coherence (covariate
  // dimensions, 0/1 treatment codes, required fields for the structure).
  static Dataset build(std::vector<UnitRecord> records, DesignSpec design,
                       std::vector<std::string> covariate_names = {},
                       bool has_response = false);
};

struct Violation {
  enum class Severity { Error, Warning };
  std::string code;
  Severity severity = Severity::Error;
  std::string context;
  std::string message;
};

// Checks the design-level invariants and returns every violation found:
// empty or singleton (subgroup, arm) cells, non-integral complete-assignment
// arm sizes, invalid rates or weights, clusters spanning blocks or arms.
// Severity Error blocks estimation; Warning flags cells the estimators will
// skip or report without variances.
std::vector<Violation> validate(const Dataset& dataset);

// Column bindings for read_csv. Only y, t and subgroup are required; an empty
// name means the role is absent.
struct CsvSchema {
  std::string id;
  std::string y;
  std::string t;
  std::string subgroup;
  std::string block;
  std::string cluster;
  std::string responded;
  std::string weight;
  std::vector<std::string> covariates;
};

Dataset read_csv(const std::string& path, const CsvSchema& schema, DesignSpec design);
Dataset read_csv_string(const std::string& text, const CsvSchema& schema,
                        DesignSpec design);
std::string write_csv_string(const Dataset& dataset);
void write_csv(const std::string& path, const Dataset& dataset);

// Dense estimation view: label columns resolved to level indices, covariates
// packed into a matrix. Any response-excluded unit keeps its row so subgroup
// counts stay full-sample.
struct TrialFrame {
  int n = 0;
  int K = 0;
  int V = 0;
  Eigen::VectorXd y;
  std::vector<int8_t> t;
  std::vector<int32_t> g;
  std::vector<int32_t> block;    // empty when the design has no blocks
  std::vector<int32_t> cluster;  // empty when the design has no clusters
  Eigen::MatrixXd x;             // n rows, V columns
  std::vector<int8_t> responded; // empty when no response data
  Eigen::VectorXd w_r;           // empty when no response data
  DesignSpec design;
  std::vector<std::string> subgroup_labels;
  std::vector<std::string> block_labels;
  std::vector<std::string> cluster_labels;
  std::vector<std::string> covariate_names;

  bool has_response() const { return !responded.empty(); }
  int n_blocks() const { return static_cast<int>(block_labels.size()); }
  int n_clusters() const { return static_cast<int>(cluster_labels.size()); }
  double rate_for_block(int b) const;
  // True when unit i contributes to estimation samples.
  bool in_sample(int i) const { return responded.empty() || responded[i] != 0; }
};

TrialFrame to_frame(const Dataset& dataset);

std::string to_string(Mechanism m);
std::string to_string(Structure s);
std::string to_string(ClusterWeighting w);
Mechanism mechanism_from_string(const std::string& s);
Structure structure_from_string(const std::string& s);
ClusterWeighting cluster_weighting_from_string(const std::string& s);

}  // namespace subrct
