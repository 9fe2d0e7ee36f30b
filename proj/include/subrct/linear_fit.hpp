#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "subrct/data_model.hpp"

namespace subrct {

enum class CovariateForm { None, Pooled, InteractedBySubgroupAndArm };
enum class Centering { Centered, Raw };

struct ModelSpec {
  CovariateForm covariates = CovariateForm::None;
  bool blocked = false;
  Centering centering = Centering::Centered;
};

struct ColumnInfo {
  enum class Kind { Effect, Intercept, Covariate };
  Kind kind = Kind::Effect;
  int subgroup = -1;
  int block = -1;
  int arm = -1;        // interacted covariate columns only
  int covariate = -1;  // covariate columns only
  std::string name;
};

// One estimable (block, subgroup) cell: the unit of effect estimation.
// Unblocked models have block = -1.
struct EffectCell {
  int subgroup = -1;
  int block = -1;
  int col = -1;            // effect column index
  int intercept_col = -1;
  long n1 = 0;             // units among design rows
  long n0 = 0;
  double sw1 = 0.0;        // weight sums per arm
  double sw0 = 0.0;
  double p = 0.5;          // design assignment rate for the cell
};

// A fully materialized regression problem: the treatment-effect model with
// per-cell effect and intercept columns followed by covariate columns.
// Rows cover the estimation sample only; blocked cells with an empty arm are
// dropped and reported in excluded_cells.
struct DesignData {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::VectorXd w;
  std::vector<ColumnInfo> columns;
  std::vector<int> rows;      // frame row index per design row
  std::vector<int> row_cell;  // cell index per design row
  std::vector<EffectCell> cells;
  std::vector<std::pair<int, int>> excluded_cells;  // (block, subgroup)
  Eigen::MatrixXd cell_xbar;  // centering mean per cell (cells x V)
  ModelSpec spec;
  int K = 0;
  int V = 0;

  int n_rows() const { return static_cast<int>(rows.size()); }
  int n_cols() const { return static_cast<int>(columns.size()); }
  int cell_index(int block, int subgroup) const;  // -1 when not estimable
};

struct FitResult {
  Eigen::VectorXd gamma;
  Eigen::VectorXd residuals;  // unweighted, per design row
  int rank = 0;
};

DesignData build_design(const TrialFrame& frame, const ModelSpec& spec);

// Weighted least squares through a singular value decomposition. Throws
// SingularDesignError naming the dependent columns when the relative rank
// tolerance of 1e-10 is breached.
FitResult solve_least_squares(const DesignData& design);

// Coefficient extraction; hides the centered/raw re-parameterization so both
// centerings yield the same estimand.
double tau_of_cell(const DesignData& design, const FitResult& fit, size_t cell);
double alpha_of_cell(const DesignData& design, const FitResult& fit, size_t cell);
Eigen::VectorXd pooled_beta(const DesignData& design, const FitResult& fit);
Eigen::VectorXd cell_arm_beta(const DesignData& design, const FitResult& fit,
                              size_t cell, int arm);

}  // namespace subrct
