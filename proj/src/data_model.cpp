#include "subrct/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "subrct/errors.hpp"

namespace subrct {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// Index labels in first-appearance order.
class LevelTable {
 public:
  int index_of(const std::string& label) {
    auto it = map_.find(label);
    if (it != map_.end()) return it->second;
    int idx = static_cast<int>(levels_.size());
    map_.emplace(label, idx);
    levels_.push_back(label);
    return idx;
  }
  const std::vector<std::string>& levels() const { return levels_; }

 private:
  std::unordered_map<std::string, int> map_;
  std::vector<std::string> levels_;
};

bool nearly_integral(double v, double tol = 1e-9) {
  return std::abs(v - std::round(v)) <= tol;
}

}  // namespace

double DesignSpec::rate_for(const std::string& block_label) const {
  auto it = block_p.find(block_label);
  return it == block_p.end() ? p : it->second;
}

Dataset Dataset::build(std::vector<UnitRecord> records, DesignSpec design,
                       std::vector<std::string> covariate_names,
                       bool has_response) {
  Dataset d;
  d.design = design;
  d.covariate_names = std::move(covariate_names);
  d.has_response = has_response;
  const size_t v = d.covariate_names.size();

  LevelTable subgroups, blocks, clusters;
  for (size_t i = 0; i < records.size(); ++i) {
    UnitRecord& r = records[i];
    if (r.t != 0 && r.t != 1)
      throw ParseError("treatment code must be 0 or 1, got " + std::to_string(r.t),
                       static_cast<long>(i + 1));
    if (r.x.size() != v)
      throw ParseError("record has " + std::to_string(r.x.size()) +
                           " covariates, schema names " + std::to_string(v),
                       static_cast<long>(i + 1));
    r.subgroup = trim(r.subgroup);
    r.block = trim(r.block);
    r.cluster = trim(r.cluster);
    if (r.subgroup.empty())
      throw ParseError("missing subgroup label", static_cast<long>(i + 1));
    subgroups.index_of(r.subgroup);
    if (design.blocked()) {
      if (r.block.empty())
        throw ParseError("blocked design but missing block label",
                         static_cast<long>(i + 1));
      blocks.index_of(r.block);
    }
    if (design.clustered()) {
      if (r.cluster.empty())
        throw ParseError("clustered design but missing cluster label",
                         static_cast<long>(i + 1));
      clusters.index_of(r.cluster);
    }
    if (!has_response) {
      r.responded = 1;
      r.w_r = 1.0;
    }
    if ((has_response == false || r.responded != 0) && !std::isfinite(r.y))
      throw ParseError("missing outcome for a unit in the estimation sample",
                       static_cast<long>(i + 1));
    for (size_t c = 0; c < r.x.size(); ++c)
      if (!std::isfinite(r.x[c]))
        throw ParseError("missing covariate cell", static_cast<long>(i + 1),
                         static_cast<long>(c + 1));
  }
  d.records = std::move(records);
  d.subgroup_levels = subgroups.levels();
  d.block_levels = blocks.levels();
  d.cluster_levels = clusters.levels();
  return d;
}

namespace {

struct CellCounts {
  long n = 0;
  long n1 = 0;
  long n0 = 0;
};

}  // namespace

std::vector<Violation> validate(const Dataset& dataset) {
  std::vector<Violation> out;
  const DesignSpec& ds = dataset.design;
  auto add = [&out](std::string code, Violation::Severity sev, std::string ctx,
                    std::string msg) {
    out.push_back({std::move(code), sev, std::move(ctx), std::move(msg)});
  };

  auto check_rate = [&](double p, const std::string& ctx) {
    if (!(p > 0.0 && p < 1.0))
      add("invalid_rate", Violation::Severity::Error, ctx,
          "assignment rate must lie strictly between 0 and 1");
  };
  check_rate(ds.p, "design");
  for (const auto& [label, p] : ds.block_p) check_rate(p, "block " + label);

  // Subgroup-by-arm cells over the estimation sample; full-sample counts for
  // the assignment-rate checks.
  std::map<std::string, CellCounts> subgroup_cells;
  std::map<std::string, CellCounts> block_totals;
  CellCounts totals;
  std::map<std::pair<std::string, std::string>, CellCounts> block_subgroup_cells;
  std::map<std::string, std::unordered_set<std::string>> cluster_blocks;
  std::map<std::string, std::unordered_set<int>> cluster_arms;

  for (size_t i = 0; i < dataset.records.size(); ++i) {
    const UnitRecord& r = dataset.records[i];
    const bool in_sample = !dataset.has_response || r.responded != 0;
    totals.n += 1;
    totals.n1 += r.t;
    totals.n0 += 1 - r.t;
    if (ds.blocked()) {
      auto& bt = block_totals[r.block];
      bt.n += 1;
      bt.n1 += r.t;
      bt.n0 += 1 - r.t;
    }
    if (in_sample) {
      auto& c = subgroup_cells[r.subgroup];
      c.n += 1;
      c.n1 += r.t;
      c.n0 += 1 - r.t;
      if (ds.blocked()) {
        auto& bc = block_subgroup_cells[{r.block, r.subgroup}];
        bc.n += 1;
        bc.n1 += r.t;
        bc.n0 += 1 - r.t;
      }
    }
    if (ds.clustered()) {
      cluster_arms[r.cluster].insert(r.t);
      if (ds.blocked()) cluster_blocks[r.cluster].insert(r.block);
    }
    if (dataset.has_response && r.responded != 0 && !(r.w_r > 0.0))
      add("invalid_weight", Violation::Severity::Error, "unit " + r.id,
          "respondent has non-positive nonresponse weight");
  }

  for (const auto& [label, c] : subgroup_cells) {
    if (c.n1 == 0 || c.n0 == 0)
      add("empty_cell", Violation::Severity::Error, "subgroup " + label,
          "subgroup has an empty treatment or control cell");
    else if (c.n1 == 1 || c.n0 == 1)
      add("singleton_cell", Violation::Severity::Warning, "subgroup " + label,
          "subgroup has a single-unit arm; variances are unavailable");
  }
  for (const auto& s : dataset.subgroup_levels)
    if (!subgroup_cells.count(s))
      add("empty_cell", Violation::Severity::Error, "subgroup " + s,
          "subgroup has no units in the estimation sample");

  if (ds.mechanism == Mechanism::Complete) {
    if (ds.blocked()) {
      for (const auto& [label, bt] : block_totals) {
        const double target = bt.n * ds.rate_for(label);
        if (!nearly_integral(target))
          add("nonintegral_arm", Violation::Severity::Error, "block " + label,
              "complete assignment requires an integral treated count (n*p = " +
                  std::to_string(target) + ")");
        else if (bt.n1 != llround(target))
          add("arm_count_mismatch", Violation::Severity::Warning, "block " + label,
              "realized treated count differs from the design rate");
      }
    } else {
      const double target = totals.n * ds.p;
      if (!nearly_integral(target))
        add("nonintegral_arm", Violation::Severity::Error, "design",
            "complete assignment requires an integral treated count (n*p = " +
                std::to_string(target) + ")");
      else if (totals.n1 != llround(target))
        add("arm_count_mismatch", Violation::Severity::Warning, "design",
            "realized treated count differs from the design rate");
    }
  }

  if (ds.blocked()) {
    std::map<std::string, long> estimable_blocks;
    for (const auto& s : dataset.subgroup_levels) estimable_blocks[s] = 0;
    for (const auto& [key, c] : block_subgroup_cells) {
      if (c.n1 == 0 || c.n0 == 0)
        add("excluded_block_cell", Violation::Severity::Warning,
            "block " + key.first + ", subgroup " + key.second,
            "cell has an empty arm; the block is excluded for this subgroup");
      else
        estimable_blocks[key.second] += 1;
    }
    for (const auto& [s, count] : estimable_blocks)
      if (count == 0 && subgroup_cells.count(s))
        add("no_estimable_block", Violation::Severity::Error, "subgroup " + s,
            "no block has both arms populated for this subgroup");
  }

  if (ds.clustered()) {
    for (const auto& [cl, arms] : cluster_arms)
      if (arms.size() > 1)
        add("split_cluster", Violation::Severity::Error, "cluster " + cl,
            "treatment must be constant within a cluster");
    for (const auto& [cl, bls] : cluster_blocks)
      if (bls.size() > 1)
        add("cluster_spans_blocks", Violation::Severity::Error, "cluster " + cl,
            "cluster appears in more than one block");
  }

  return out;
}

namespace {

// Minimal CSV line splitter with double-quote escaping.
std::vector<std::string> split_csv_line(const std::string& line, long row) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  if (quoted) throw ParseError("unterminated quote", row);
  fields.push_back(cur);
  return fields;
}

double parse_number(const std::string& raw, long row, long col) {
  const std::string s = trim(raw);
  if (s.empty() || s == "NA" || s == "nan" || s == "NaN")
    return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError("cannot parse number '" + s + "'", row, col);
  return value;
}

int parse_binary(const std::string& raw, long row, long col, const char* what) {
  const std::string s = trim(raw);
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw ParseError(std::string(what) + " must be 0 or 1, got '" + s + "'", row, col);
}

}  // namespace

Dataset read_csv_string(const std::string& text, const CsvSchema& schema,
                        DesignSpec design) {
  if (schema.y.empty() || schema.t.empty() || schema.subgroup.empty())
    throw ConfigError("schema must bind the outcome, treatment and subgroup columns");

  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file", 1);
  const std::vector<std::string> header = split_csv_line(line, 1);
  std::unordered_map<std::string, long> col_of;
  for (size_t c = 0; c < header.size(); ++c) col_of[trim(header[c])] = static_cast<long>(c);

  auto bind = [&](const std::string& name, bool required) -> long {
    if (name.empty()) {
      if (required) throw ConfigError("schema is missing a required column binding");
      return -1;
    }
    auto it = col_of.find(name);
    if (it == col_of.end())
      throw ConfigError("column '" + name + "' not found in the data header");
    return it->second;
  };

  const long c_id = bind(schema.id, false);
  const long c_y = bind(schema.y, true);
  const long c_t = bind(schema.t, true);
  const long c_g = bind(schema.subgroup, true);
  const long c_b = bind(schema.block, false);
  const long c_cl = bind(schema.cluster, false);
  const long c_resp = bind(schema.responded, false);
  const long c_w = bind(schema.weight, false);
  std::vector<long> c_x;
  for (const auto& name : schema.covariates) c_x.push_back(bind(name, true));

  if (design.blocked() && c_b < 0)
    throw ConfigError("blocked design requires a block column binding");
  if (design.clustered() && c_cl < 0)
    throw ConfigError("clustered design requires a cluster column binding");
  const bool has_response = c_resp >= 0;
  if (c_w >= 0 && !has_response)
    throw ConfigError("a nonresponse weight column requires a responded column");

  std::vector<UnitRecord> records;
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const std::vector<std::string> f = split_csv_line(line, row);
    auto field = [&](long c) -> const std::string& {
      static const std::string empty;
      if (c < 0) return empty;
      if (static_cast<size_t>(c) >= f.size())
        throw ParseError("row has fewer fields than the header", row, c + 1);
      return f[static_cast<size_t>(c)];
    };

    UnitRecord r;
    r.id = c_id >= 0 ? trim(field(c_id)) : "row" + std::to_string(row);
    r.t = parse_binary(field(c_t), row, c_t + 1, "treatment");
    r.subgroup = field(c_g);
    r.block = field(c_b);
    r.cluster = field(c_cl);
    if (has_response) {
      r.responded = parse_binary(field(c_resp), row, c_resp + 1, "responded");
      r.w_r = c_w >= 0 ? parse_number(field(c_w), row, c_w + 1) : 1.0;
      if (c_w >= 0 && !std::isfinite(r.w_r) && r.responded != 0)
        throw ParseError("missing nonresponse weight for a respondent", row, c_w + 1);
    }
    r.y = parse_number(field(c_y), row, c_y + 1);
    if ((has_response == false || r.responded != 0) && !std::isfinite(r.y))
      throw ParseError("missing outcome for a unit in the estimation sample", row,
                       c_y + 1);
    for (size_t j = 0; j < c_x.size(); ++j) {
      const double v = parse_number(field(c_x[j]), row, c_x[j] + 1);
      if (!std::isfinite(v))
        throw ParseError("missing covariate cell", row, c_x[j] + 1);
      r.x.push_back(v);
    }
    records.push_back(std::move(r));
  }
  if (records.empty()) throw ParseError("file has a header but no data rows", row);

  return Dataset::build(std::move(records), design, schema.covariates, has_response);
}

Dataset read_csv(const std::string& path, const CsvSchema& schema, DesignSpec design) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open data file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return read_csv_string(ss.str(), schema, design);
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    out += ch;
  }
  out += '"';
  return out;
}

std::string format_value(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

}  // namespace

std::string write_csv_string(const Dataset& dataset) {
  std::ostringstream out;
  out << "id,y,t,subgroup";
  const bool blocks = dataset.design.blocked();
  const bool clusters = dataset.design.clustered();
  if (blocks) out << ",block";
  if (clusters) out << ",cluster";
  if (dataset.has_response) out << ",responded,weight";
  for (const auto& name : dataset.covariate_names) out << ',' << csv_escape(name);
  out << '\n';
  for (const auto& r : dataset.records) {
    out << csv_escape(r.id) << ',' << format_value(r.y) << ',' << r.t << ','
        << csv_escape(r.subgroup);
    if (blocks) out << ',' << csv_escape(r.block);
    if (clusters) out << ',' << csv_escape(r.cluster);
    if (dataset.has_response) out << ',' << r.responded << ',' << format_value(r.w_r);
    for (double v : r.x) out << ',' << format_value(v);
    out << '\n';
  }
  return out.str();
}

void write_csv(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << write_csv_string(dataset);
}

TrialFrame to_frame(const Dataset& dataset) {
  TrialFrame fr;
  fr.n = static_cast<int>(dataset.n());
  fr.K = static_cast<int>(dataset.subgroup_levels.size());
  fr.V = static_cast<int>(dataset.covariate_names.size());
  fr.design = dataset.design;
  fr.subgroup_labels = dataset.subgroup_levels;
  fr.block_labels = dataset.block_levels;
  fr.cluster_labels = dataset.cluster_levels;
  fr.covariate_names = dataset.covariate_names;

  std::unordered_map<std::string, int> g_idx, b_idx, c_idx;
  for (size_t i = 0; i < dataset.subgroup_levels.size(); ++i)
    g_idx[dataset.subgroup_levels[i]] = static_cast<int>(i);
  for (size_t i = 0; i < dataset.block_levels.size(); ++i)
    b_idx[dataset.block_levels[i]] = static_cast<int>(i);
  for (size_t i = 0; i < dataset.cluster_levels.size(); ++i)
    c_idx[dataset.cluster_levels[i]] = static_cast<int>(i);

  fr.y.resize(fr.n);
  fr.t.resize(fr.n);
  fr.g.resize(fr.n);
  fr.x.resize(fr.n, fr.V);
  if (dataset.design.blocked()) fr.block.resize(fr.n);
  if (dataset.design.clustered()) fr.cluster.resize(fr.n);
  if (dataset.has_response) {
    fr.responded.resize(fr.n);
    fr.w_r.resize(fr.n);
  }
  for (int i = 0; i < fr.n; ++i) {
    const UnitRecord& r = dataset.records[static_cast<size_t>(i)];
    fr.y[i] = r.y;
    fr.t[static_cast<size_t>(i)] = static_cast<int8_t>(r.t);
    fr.g[static_cast<size_t>(i)] = g_idx.at(r.subgroup);
    for (int c = 0; c < fr.V; ++c) fr.x(i, c) = r.x[static_cast<size_t>(c)];
    if (dataset.design.blocked())
      fr.block[static_cast<size_t>(i)] = b_idx.at(r.block);
    if (dataset.design.clustered())
      fr.cluster[static_cast<size_t>(i)] = c_idx.at(r.cluster);
    if (dataset.has_response) {
      fr.responded[static_cast<size_t>(i)] = static_cast<int8_t>(r.responded);
      fr.w_r[i] = r.responded != 0 ? r.w_r : 0.0;
    }
  }
  return fr;
}

double TrialFrame::rate_for_block(int b) const {
  if (b < 0 || block_labels.empty()) return design.p;
  return design.rate_for(block_labels[static_cast<size_t>(b)]);
}

std::string to_string(Mechanism m) {
  return m == Mechanism::Complete ? "complete" : "bernoulli";
}
std::string to_string(Structure s) {
  switch (s) {
    case Structure::Simple: return "simple";
    case Structure::Blocked: return "blocked";
    case Structure::Clustered: return "clustered";
    case Structure::BlockedClustered: return "blocked_clustered";
  }
  return "simple";
}
std::string to_string(ClusterWeighting w) {
  return w == ClusterWeighting::SubgroupSize ? "subgroup_size" : "equal_cluster";
}

Mechanism mechanism_from_string(const std::string& s) {
  if (s == "complete") return Mechanism::Complete;
  if (s == "bernoulli") return Mechanism::Bernoulli;
  throw ConfigError("unknown mechanism '" + s + "' (complete|bernoulli)");
}
Structure structure_from_string(const std::string& s) {
  if (s == "simple") return Structure::Simple;
  if (s == "blocked") return Structure::Blocked;
  if (s == "clustered") return Structure::Clustered;
  if (s == "blocked_clustered") return Structure::BlockedClustered;
  throw ConfigError("unknown structure '" + s +
                    "' (simple|blocked|clustered|blocked_clustered)");
}
ClusterWeighting cluster_weighting_from_string(const std::string& s) {
  if (s == "subgroup_size") return ClusterWeighting::SubgroupSize;
  if (s == "equal_cluster") return ClusterWeighting::EqualCluster;
  throw ConfigError("unknown cluster weighting '" + s +
                    "' (subgroup_size|equal_cluster)");
}

}  // namespace subrct
