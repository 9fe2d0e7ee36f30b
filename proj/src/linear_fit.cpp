#include "subrct/linear_fit.hpp"

#include <algorithm>
#include <cmath>

#include "subrct/errors.hpp"

namespace subrct {

namespace {

std::string cell_name(const TrialFrame& frame, int block, int subgroup) {
  std::string s;
  if (block >= 0) s += "b=" + frame.block_labels[static_cast<size_t>(block)] + ",";
  s += "g=" + frame.subgroup_labels[static_cast<size_t>(subgroup)];
  return s;
}

}  // namespace

int DesignData::cell_index(int block, int subgroup) const {
  for (size_t c = 0; c < cells.size(); ++c)
    if (cells[c].block == block && cells[c].subgroup == subgroup)
      return static_cast<int>(c);
  return -1;
}

DesignData build_design(const TrialFrame& frame, const ModelSpec& spec) {
  if (spec.covariates == CovariateForm::InteractedBySubgroupAndArm && spec.blocked)
    throw EstimationError(
        "interacted covariates are not supported with blocked models");
  if (spec.blocked && !frame.design.blocked())
    throw EstimationError("blocked model requested but the design has no blocks");

  DesignData d;
  d.spec = spec;
  d.K = frame.K;
  d.V = spec.covariates == CovariateForm::None ? 0 : frame.V;
  if (spec.covariates != CovariateForm::None && frame.V == 0)
    throw EstimationError("covariate adjustment requested but the data has none");

  for (int i = 0; i < frame.n; ++i)
    if (frame.in_sample(i)) d.rows.push_back(i);
  if (d.rows.empty()) throw EstimationError("estimation sample is empty");

  const int nb = spec.blocked ? frame.n_blocks() : 1;

  // Count every candidate cell, then keep the estimable ones.
  std::vector<EffectCell> candidates(static_cast<size_t>(nb) * frame.K);
  for (int b = 0; b < nb; ++b)
    for (int k = 0; k < frame.K; ++k) {
      auto& c = candidates[static_cast<size_t>(b) * frame.K + k];
      c.block = spec.blocked ? b : -1;
      c.subgroup = k;
      c.p = spec.blocked ? frame.rate_for_block(b) : frame.design.p;
    }
  for (int r : d.rows) {
    const int b = spec.blocked ? frame.block[static_cast<size_t>(r)] : 0;
    const int k = frame.g[static_cast<size_t>(r)];
    auto& c = candidates[static_cast<size_t>(b) * frame.K + k];
    const double w = frame.has_response() ? frame.w_r[r] : 1.0;
    if (frame.t[static_cast<size_t>(r)]) {
      c.n1 += 1;
      c.sw1 += w;
    } else {
      c.n0 += 1;
      c.sw0 += w;
    }
  }
  std::vector<long> estimable_per_subgroup(static_cast<size_t>(frame.K), 0);
  for (auto& c : candidates) {
    if (c.n1 + c.n0 == 0) continue;
    if (c.n1 == 0 || c.n0 == 0) {
      if (!spec.blocked)
        throw EstimationError("empty_cell", "subgroup cell has an empty arm (" +
                                                cell_name(frame, -1, c.subgroup) + ")");
      d.excluded_cells.push_back({c.block, c.subgroup});
      continue;
    }
    estimable_per_subgroup[static_cast<size_t>(c.subgroup)] += 1;
    d.cells.push_back(c);
  }
  for (int k = 0; k < frame.K; ++k)
    if (estimable_per_subgroup[static_cast<size_t>(k)] == 0)
      throw EstimationError("no_estimable_cell",
                            "no estimable cell for subgroup " +
                                frame.subgroup_labels[static_cast<size_t>(k)]);

  if (spec.covariates == CovariateForm::InteractedBySubgroupAndArm) {
    for (const auto& c : d.cells)
      if (c.n1 < d.V + 2 || c.n0 < d.V + 2)
        throw EstimationError(
            "interacted model needs at least V + 2 units per (subgroup, arm) "
            "cell; violated at " +
            cell_name(frame, c.block, c.subgroup));
  }

  // Rows belonging to excluded cells carry no estimable effect; drop them.
  if (!d.excluded_cells.empty()) {
    std::vector<int> kept;
    for (int r : d.rows) {
      const int b = frame.block[static_cast<size_t>(r)];
      const int k = frame.g[static_cast<size_t>(r)];
      bool excluded = false;
      for (const auto& [eb, ek] : d.excluded_cells)
        if (eb == b && ek == k) excluded = true;
      if (!excluded) kept.push_back(r);
    }
    d.rows = std::move(kept);
  }

  const int n = static_cast<int>(d.rows.size());
  const int n_cells = static_cast<int>(d.cells.size());
  const bool interacted = spec.covariates == CovariateForm::InteractedBySubgroupAndArm;
  const int n_cov_cols = interacted ? 2 * frame.K * d.V : d.V;
  const int n_cols = 2 * n_cells + n_cov_cols;

  // Per-row cell lookup.
  d.row_cell.assign(static_cast<size_t>(n), -1);
  std::vector<int>& row_cell = d.row_cell;
  for (int r = 0; r < n; ++r) {
    const int fi = d.rows[static_cast<size_t>(r)];
    const int b = spec.blocked ? frame.block[static_cast<size_t>(fi)] : -1;
    row_cell[static_cast<size_t>(r)] =
        d.cell_index(b, frame.g[static_cast<size_t>(fi)]);
  }

  // Weighted centering means per cell.
  d.cell_xbar = Eigen::MatrixXd::Zero(n_cells, std::max(d.V, 1));
  if (d.V > 0) {
    Eigen::VectorXd cell_w = Eigen::VectorXd::Zero(n_cells);
    for (int r = 0; r < n; ++r) {
      const int fi = d.rows[static_cast<size_t>(r)];
      const int c = row_cell[static_cast<size_t>(r)];
      const double w = frame.has_response() ? frame.w_r[fi] : 1.0;
      cell_w[c] += w;
      d.cell_xbar.row(c) += w * frame.x.row(fi).head(d.V);
    }
    for (int c = 0; c < n_cells; ++c) d.cell_xbar.row(c) /= cell_w[c];
  }

  d.X = Eigen::MatrixXd::Zero(n, n_cols);
  d.y.resize(n);
  d.w.resize(n);
  d.columns.resize(static_cast<size_t>(n_cols));

  for (int c = 0; c < n_cells; ++c) {
    auto& cell = d.cells[static_cast<size_t>(c)];
    cell.col = c;
    cell.intercept_col = n_cells + c;
    const std::string nm = cell_name(frame, cell.block, cell.subgroup);
    d.columns[static_cast<size_t>(c)] = {ColumnInfo::Kind::Effect, cell.subgroup,
                                         cell.block, -1, -1, "tau[" + nm + "]"};
    d.columns[static_cast<size_t>(n_cells + c)] = {ColumnInfo::Kind::Intercept,
                                                   cell.subgroup, cell.block, -1, -1,
                                                   "alpha[" + nm + "]"};
  }
  const int cov_base = 2 * n_cells;
  if (d.V > 0 && !interacted) {
    for (int v = 0; v < d.V; ++v)
      d.columns[static_cast<size_t>(cov_base + v)] = {
          ColumnInfo::Kind::Covariate, -1, -1, -1, v,
          "x[" + frame.covariate_names[static_cast<size_t>(v)] + "]"};
  } else if (interacted) {
    for (int k = 0; k < frame.K; ++k)
      for (int a = 0; a < 2; ++a)
        for (int v = 0; v < d.V; ++v) {
          const int col = cov_base + (k * 2 + a) * d.V + v;
          d.columns[static_cast<size_t>(col)] = {
              ColumnInfo::Kind::Covariate, k, -1, a, v,
              "x[" + frame.covariate_names[static_cast<size_t>(v)] +
                  ",g=" + frame.subgroup_labels[static_cast<size_t>(k)] +
                  ",arm=" + std::to_string(a) + "]"};
        }
  }

  const bool centered = spec.centering == Centering::Centered;
  for (int r = 0; r < n; ++r) {
    const int fi = d.rows[static_cast<size_t>(r)];
    const int c = row_cell[static_cast<size_t>(r)];
    const auto& cell = d.cells[static_cast<size_t>(c)];
    const double t = static_cast<double>(frame.t[static_cast<size_t>(fi)]);
    d.y[r] = frame.y[fi];
    d.w[r] = frame.has_response() ? frame.w_r[fi] : 1.0;
    d.X(r, cell.col) = centered ? t - cell.p : t;
    d.X(r, cell.intercept_col) = 1.0;
    if (d.V > 0) {
      for (int v = 0; v < d.V; ++v) {
        const double xv = centered ? frame.x(fi, v) - d.cell_xbar(c, v)
                                   : frame.x(fi, v);
        if (!interacted) {
          d.X(r, cov_base + v) = xv;
        } else {
          const int a = frame.t[static_cast<size_t>(fi)] ? 1 : 0;
          d.X(r, cov_base + (cell.subgroup * 2 + a) * d.V + v) = xv;
        }
      }
    }
  }

  // A covariate that never moves after centering cannot be adjusted for;
  // report it by name instead of failing the rank check anonymously.
  if (d.V > 0 && centered) {
    for (int v = 0; v < d.V; ++v) {
      double spread = 0.0;
      for (int r = 0; r < n; ++r) {
        const int c = row_cell[static_cast<size_t>(r)];
        spread = std::max(spread, std::abs(frame.x(d.rows[static_cast<size_t>(r)], v) -
                                           d.cell_xbar(c, v)));
      }
      if (spread == 0.0)
        throw SingularDesignError(
            "covariate has zero variance within every cell",
            {frame.covariate_names[static_cast<size_t>(v)]});
    }
  }

  return d;
}

namespace {

// With no covariates the model is saturated in (cell, arm) indicators, so the
// weighted least squares solution is the per-cell weighted arm means. Solving
// in closed form keeps the covariate-free estimate bit-identical to a direct
// difference in means and avoids the decomposition in tight loops.
FitResult solve_saturated(const DesignData& design) {
  const size_t n_cells = design.cells.size();
  std::vector<double> sy1(n_cells, 0.0), sy0(n_cells, 0.0);
  for (int r = 0; r < design.n_rows(); ++r) {
    const int c = design.row_cell[static_cast<size_t>(r)];
    const double wy = design.w[r] * design.y[r];
    if (design.X(r, design.cells[static_cast<size_t>(c)].col) > 0.0)
      sy1[static_cast<size_t>(c)] += wy;
    else
      sy0[static_cast<size_t>(c)] += wy;
  }
  FitResult fit;
  fit.rank = design.n_cols();
  fit.gamma = Eigen::VectorXd::Zero(design.n_cols());
  std::vector<double> m1(n_cells), m0(n_cells);
  for (size_t c = 0; c < n_cells; ++c) {
    const EffectCell& cell = design.cells[c];
    m1[c] = sy1[c] / cell.sw1;
    m0[c] = sy0[c] / cell.sw0;
    fit.gamma[cell.col] = m1[c] - m0[c];
    fit.gamma[cell.intercept_col] = design.spec.centering == Centering::Centered
                                        ? cell.p * m1[c] + (1.0 - cell.p) * m0[c]
                                        : m0[c];
  }
  fit.residuals.resize(design.n_rows());
  for (int r = 0; r < design.n_rows(); ++r) {
    const size_t c = static_cast<size_t>(design.row_cell[static_cast<size_t>(r)]);
    const bool treated = design.X(r, design.cells[c].col) > 0.0;
    fit.residuals[r] = design.y[r] - (treated ? m1[c] : m0[c]);
  }
  return fit;
}

}  // namespace

FitResult solve_least_squares(const DesignData& design) {
  const int n = design.n_rows();
  const int m = design.n_cols();
  if (n < m)
    throw EstimationError("fewer rows than design columns (" + std::to_string(n) +
                          " < " + std::to_string(m) + ")");
  if (design.V == 0) return solve_saturated(design);

  const Eigen::VectorXd sw = design.w.array().sqrt();
  const Eigen::MatrixXd A = sw.asDiagonal() * design.X;
  const Eigen::VectorXd b = sw.array() * design.y.array();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double tol = 1e-10 * sv[0];
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > tol) ++rank;
  if (rank < m) {
    // Name the dependent columns through a pivoted QR of the same matrix.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    const auto perm = qr.colsPermutation().indices();
    std::vector<std::string> names;
    for (int i = rank; i < m; ++i)
      names.push_back(design.columns[static_cast<size_t>(perm[i])].name);
    throw SingularDesignError("design matrix is rank deficient (rank " +
                                  std::to_string(rank) + " of " + std::to_string(m) +
                                  ")",
                              names);
  }

  FitResult fit;
  fit.rank = rank;
  fit.gamma = svd.solve(b);
  fit.residuals = design.y - design.X * fit.gamma;
  return fit;
}

double tau_of_cell(const DesignData& design, const FitResult& fit, size_t cell) {
  const EffectCell& c = design.cells.at(cell);
  double tau = fit.gamma[c.col];
  if (design.spec.centering == Centering::Raw &&
      design.spec.covariates == CovariateForm::InteractedBySubgroupAndArm) {
    const Eigen::VectorXd b1 = cell_arm_beta(design, fit, cell, 1);
    const Eigen::VectorXd b0 = cell_arm_beta(design, fit, cell, 0);
    tau += design.cell_xbar.row(static_cast<Eigen::Index>(cell)).head(design.V) *
           (b1 - b0);
  }
  return tau;
}

double alpha_of_cell(const DesignData& design, const FitResult& fit, size_t cell) {
  const EffectCell& c = design.cells.at(cell);
  double alpha = fit.gamma[c.intercept_col];
  if (design.spec.centering == Centering::Raw) {
    alpha += c.p * fit.gamma[c.col];
    if (design.V > 0) {
      Eigen::VectorXd bmix;
      if (design.spec.covariates == CovariateForm::Pooled) {
        bmix = pooled_beta(design, fit);
      } else {
        bmix = c.p * cell_arm_beta(design, fit, cell, 1) +
               (1.0 - c.p) * cell_arm_beta(design, fit, cell, 0);
      }
      alpha += design.cell_xbar.row(static_cast<Eigen::Index>(cell)).head(design.V) *
               bmix;
    }
  }
  return alpha;
}

Eigen::VectorXd pooled_beta(const DesignData& design, const FitResult& fit) {
  if (design.spec.covariates != CovariateForm::Pooled)
    throw DomainError("pooled_beta requires a pooled-covariate model");
  return fit.gamma.segment(2 * static_cast<int>(design.cells.size()), design.V);
}

Eigen::VectorXd cell_arm_beta(const DesignData& design, const FitResult& fit,
                              size_t cell, int arm) {
  if (design.spec.covariates == CovariateForm::None)
    return Eigen::VectorXd::Zero(0);
  if (design.spec.covariates == CovariateForm::Pooled)
    return pooled_beta(design, fit);
  const EffectCell& c = design.cells.at(cell);
  const int base = 2 * static_cast<int>(design.cells.size()) +
                   (c.subgroup * 2 + arm) * design.V;
  return fit.gamma.segment(base, design.V);
}

}  // namespace subrct
