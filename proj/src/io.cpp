#include "ssate/io.hpp"

#include <array>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ssate {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_field_double(const std::string& field, const std::string& what, int line_no) {
  try {
    std::size_t pos = 0;
    double v = std::stod(field, &pos);
    if (pos != field.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw InputError("line " + std::to_string(line_no) + ": cannot parse " + what + " value '" +
                     field + "'");
  }
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open data file '" + path + "'");

  std::string header_line;
  if (!std::getline(in, header_line)) throw InputError(path + ": empty file (header required)");
  if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();
  std::vector<std::string> header = split(header_line, ',');

  if (header.size() < 3 || header[0] != "y" || header[1] != "t")
    throw InputError("line 1: header must start with 'y,t' followed by x1.. and w1..");
  int px = 0, pw = 0;
  std::size_t col = 2;
  while (col < header.size() && header[col] == "x" + std::to_string(px + 1)) {
    ++px;
    ++col;
  }
  while (col < header.size() && header[col] == "w" + std::to_string(pw + 1)) {
    ++pw;
    ++col;
  }
  if (col != header.size() || px == 0)
    throw InputError("line 1: header columns must be y,t,x1..x{p},w1..w{q}");

  std::vector<std::array<double, 2>> ty;
  std::vector<double> xs, ws;
  std::vector<int> labeled;
  std::string line;
  int line_no = 1;
  int rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split(line, ',');
    if (fields.size() != header.size())
      throw InputError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(fields.size()));

    double yv = std::numeric_limits<double>::quiet_NaN();
    std::string yfield = trim(fields[0]);
    if (!yfield.empty()) {
      yv = parse_field_double(yfield, "y", line_no);
      labeled.push_back(rows);
    }
    double tv = parse_field_double(trim(fields[1]), "t", line_no);
    if (tv != 0.0 && tv != 1.0)
      throw InputError("line " + std::to_string(line_no) + ": t must be 0 or 1, found '" +
                       fields[1] + "'");
    ty.push_back({tv, yv});
    for (int j = 0; j < px; ++j)
      xs.push_back(parse_field_double(trim(fields[2 + j]), "x" + std::to_string(j + 1), line_no));
    for (int j = 0; j < pw; ++j)
      ws.push_back(
          parse_field_double(trim(fields[2 + px + j]), "w" + std::to_string(j + 1), line_no));
    ++rows;
  }
  if (rows == 0) throw InputError(path + ": no data rows");

  Dataset d;
  d.x.resize(rows, px);
  d.w.resize(rows, pw);
  d.t.resize(rows);
  d.y.resize(rows);
  for (int i = 0; i < rows; ++i) {
    d.t[i] = ty[i][0];
    d.y[i] = ty[i][1];
    for (int j = 0; j < px; ++j) d.x(i, j) = xs[static_cast<std::size_t>(i) * px + j];
    for (int j = 0; j < pw; ++j) d.w(i, j) = ws[static_cast<std::size_t>(i) * pw + j];
  }
  d.labeled = std::move(labeled);
  d.validate();
  return d;
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::ostringstream out;
  out << "y,t";
  for (int j = 0; j < data.p_x(); ++j) out << ",x" << (j + 1);
  for (int j = 0; j < data.p_w(); ++j) out << ",w" << (j + 1);
  out << "\n";
  std::vector<bool> lab(data.rows(), false);
  for (int i : data.labeled) lab[i] = true;
  for (int i = 0; i < data.rows(); ++i) {
    if (lab[i]) out << format_double(data.y[i]);
    out << "," << format_double(data.t[i]);
    for (int j = 0; j < data.p_x(); ++j) out << "," << format_double(data.x(i, j));
    for (int j = 0; j < data.p_w(); ++j) out << "," << format_double(data.w(i, j));
    out << "\n";
  }
  write_text_atomic(path, out.str());
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.estimators = all_estimators();
  return cfg;
}

namespace {

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw InputError("config: key '" + key + "' expects true/false, found '" + value + "'");
}

}  // namespace

RunConfig parse_run_config_text(const std::string& text, const std::string& origin) {
  RunConfig cfg = default_run_config();
  bool seed_seen = false;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string stripped = line;
    std::size_t hash = stripped.find('#');
    if (hash != std::string::npos) stripped = stripped.substr(0, hash);
    stripped = trim(stripped);
    if (stripped.empty()) continue;
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw InputError(origin + " line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));

    try {
      if (key == "estimators") {
        cfg.estimators.clear();
        for (const std::string& name : split(value, ',')) {
          std::string t = trim(name);
          if (!t.empty()) cfg.estimators.push_back(parse_estimator(t));
        }
        if (cfg.estimators.empty()) throw InputError("empty estimator list");
      } else if (key == "link_outcome") {
        cfg.model.link_outcome = parse_link(value);
      } else if (key == "link_imputation") {
        cfg.model.link_imputation = parse_link(value);
      } else if (key == "spline_knots") {
        cfg.model.spline_knots = std::stoi(value);
      } else if (key == "kernel_order") {
        cfg.model.kernel_order = std::stoi(value);
      } else if (key == "bandwidth_alpha") {
        cfg.model.bandwidth_alpha = std::stod(value);
      } else if (key == "bandwidth_scale") {
        cfg.model.bandwidth_scale = std::stod(value);
      } else if (key == "ps_truncation") {
        cfg.model.ps_truncation = std::stod(value);
      } else if (key == "cv_folds") {
        cfg.model.cv_folds = std::stoi(value);
      } else if (key == "n_perturb") {
        cfg.model.n_perturb = std::stoi(value);
      } else if (key == "perturb_dist") {
        if (value == "scaled_beta")
          cfg.model.perturb_dist = PerturbDist::scaled_beta;
        else if (value == "multinomial_bootstrap")
          cfg.model.perturb_dist = PerturbDist::multinomial_bootstrap;
        else
          throw InputError("perturb_dist must be scaled_beta or multinomial_bootstrap");
      } else if (key == "ci_level") {
        cfg.model.ci_level = std::stod(value);
      } else if (key == "seed") {
        cfg.model.seed = std::stoull(value);
        seed_seen = true;
      } else if (key == "count_log_transform") {
        cfg.model.count_log_transform = parse_bool(value, key);
      } else if (key == "perturb_fully_starred") {
        cfg.model.perturb_fully_starred = parse_bool(value, key);
      } else if (key == "interaction_vt") {
        cfg.model.interaction_vt = parse_bool(value, key);
      } else if (key == "cc_reg_all_rows") {
        cfg.model.cc_reg_all_rows = parse_bool(value, key);
      } else {
        throw InputError(origin + " line " + std::to_string(line_no) + ": unknown key '" + key +
                         "'");
      }
    } catch (const InputError&) {
      throw;
    } catch (const std::exception&) {
      throw InputError(origin + " line " + std::to_string(line_no) + ": bad value '" + value +
                       "' for key '" + key + "'");
    }
  }
  if (!seed_seen) throw InputError(origin + ": missing required key 'seed'");
  cfg.model.validate();
  return cfg;
}

RunConfig parse_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config_text(buf.str(), path);
}

std::string format_run_config(const RunConfig& config, const std::vector<std::string>& comments) {
  std::ostringstream out;
  for (const std::string& c : comments) out << "# " << c << "\n";
  out << "estimators = ";
  for (std::size_t i = 0; i < config.estimators.size(); ++i) {
    if (i > 0) out << ",";
    out << estimator_name(config.estimators[i]);
  }
  out << "\n";
  const ModelConfig& m = config.model;
  out << "link_outcome = " << make_link(m.link_outcome).name() << "\n";
  out << "link_imputation = " << make_link(m.link_imputation).name() << "\n";
  out << "spline_knots = " << m.spline_knots << "\n";
  out << "kernel_order = " << m.kernel_order << "\n";
  out << "bandwidth_alpha = " << format_double(m.bandwidth_alpha) << "\n";
  out << "bandwidth_scale = " << format_double(m.bandwidth_scale) << "\n";
  out << "ps_truncation = " << format_double(m.ps_truncation) << "\n";
  out << "cv_folds = " << m.cv_folds << "\n";
  out << "n_perturb = " << m.n_perturb << "\n";
  out << "perturb_dist = "
      << (m.perturb_dist == PerturbDist::scaled_beta ? "scaled_beta" : "multinomial_bootstrap")
      << "\n";
  out << "ci_level = " << format_double(m.ci_level) << "\n";
  out << "seed = " << m.seed << "\n";
  out << "count_log_transform = " << (m.count_log_transform ? "true" : "false") << "\n";
  out << "perturb_fully_starred = " << (m.perturb_fully_starred ? "true" : "false") << "\n";
  out << "interaction_vt = " << (m.interaction_vt ? "true" : "false") << "\n";
  out << "cc_reg_all_rows = " << (m.cc_reg_all_rows ? "true" : "false") << "\n";
  return out.str();
}

void JsonRecord::add(const std::string& key, double value) {
  if (std::isfinite(value))
    fields_.emplace_back(key, format_double(value));
  else
    fields_.emplace_back(key, "null");
}
void JsonRecord::add(const std::string& key, int value) {
  fields_.emplace_back(key, std::to_string(value));
}
void JsonRecord::add(const std::string& key, long value) {
  fields_.emplace_back(key, std::to_string(value));
}
void JsonRecord::add(const std::string& key, const std::string& value) {
  fields_.emplace_back(key, "\"" + json_escape(value) + "\"");
}

std::string JsonRecord::line() const {
  std::string out = "{";
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    if (i > 0) out += ",";
    out += "\"" + json_escape(fields_[i].first) + "\":" + fields_[i].second;
  }
  out += "}";
  return out;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp + "'");
    out << content;
    if (!out) throw InputError("failed writing '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw InputError("cannot rename '" + tmp + "' to '" + path + "'");
}

std::string estimate_records_jsonl(const InferenceResult& result,
                                   const std::vector<EstimatorKind>& order) {
  std::ostringstream out;
  for (EstimatorKind k : order) {
    JsonRecord rec;
    rec.add("estimator", estimator_name(k));
    auto err = result.errors.find(k);
    if (err != result.errors.end()) {
      rec.add("error", err->second);
      out << rec.line() << "\n";
      continue;
    }
    const EstimateReport& rep = result.point.at(k);
    const ResampleSummary& s = result.summaries.at(k);
    rec.add("delta", rep.delta);
    rec.add("mu1", rep.mu1);
    rec.add("mu0", rep.mu0);
    rec.add("se_sd", s.se_sd);
    rec.add("se_mad", s.se_mad);
    rec.add("ci_lo", s.ci_lo);
    rec.add("ci_hi", s.ci_hi);
    rec.add("pvalue", s.pvalue);
    rec.add("draws_used", static_cast<int>(s.draws.size()));
    rec.add("draws_excluded", s.excluded);
    for (const auto& [key, value] : rep.diagnostics) rec.add("diag_" + key, value);
    out << rec.line() << "\n";
  }
  return out.str();
}

std::string estimate_table(const InferenceResult& result,
                           const std::vector<EstimatorKind>& order) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-12s %10s %10s %10s %10s %10s %8s\n", "estimator", "delta",
                "se_sd", "se_mad", "ci_lo", "ci_hi", "pvalue");
  out << buf;
  for (EstimatorKind k : order) {
    auto err = result.errors.find(k);
    if (err != result.errors.end()) {
      std::snprintf(buf, sizeof(buf), "%-12s ERROR: %s\n", estimator_name(k).c_str(),
                    err->second.c_str());
      out << buf;
      continue;
    }
    const EstimateReport& rep = result.point.at(k);
    const ResampleSummary& s = result.summaries.at(k);
    std::snprintf(buf, sizeof(buf), "%-12s %10.4f %10.4f %10.4f %10.4f %10.4f %8.4f\n",
                  estimator_name(k).c_str(), rep.delta, s.se_sd, s.se_mad, s.ci_lo, s.ci_hi,
                  s.pvalue);
    out << buf;
  }
  return out.str();
}

std::string benchmark_records_jsonl(const BenchmarkResult& result) {
  std::ostringstream out;
  for (const BenchmarkRow& row : result.rows) {
    JsonRecord rec;
    rec.add("scenario", scenario_name(row.scenario));
    rec.add("n", row.n);
    rec.add("N", row.total);
    rec.add("estimator", estimator_name(row.kind));
    rec.add("bias", row.bias);
    rec.add("rmse", row.rmse);
    rec.add("re_vs_cc_dr", row.re_vs_cc_dr);
    rec.add("delta_true", row.delta_true);
    rec.add("delta_true_se", row.delta_true_se);
    rec.add("reps_used", row.reps_used);
    rec.add("failures", row.failures);
    out << rec.line() << "\n";
  }
  return out.str();
}

std::string benchmark_table(const BenchmarkResult& result) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-14s %6s %7s %-12s %9s %9s %9s\n", "scenario", "n", "N",
                "estimator", "bias", "rmse", "re");
  out << buf;
  for (const BenchmarkRow& row : result.rows) {
    std::snprintf(buf, sizeof(buf), "%-14s %6d %7d %-12s %9.4f %9.4f %9.3f\n",
                  scenario_name(row.scenario).c_str(), row.n, row.total,
                  estimator_name(row.kind).c_str(), row.bias, row.rmse, row.re_vs_cc_dr);
    out << buf;
  }
  return out.str();
}

std::string benchmark_plot_csv(const BenchmarkResult& result) {
  std::ostringstream out;
  out << "scenario,n,N,estimator,bias,rmse,re_vs_cc_dr\n";
  for (const BenchmarkRow& row : result.rows) {
    out << scenario_name(row.scenario) << "," << row.n << "," << row.total << ","
        << estimator_name(row.kind) << "," << format_double(row.bias) << ","
        << format_double(row.rmse) << "," << format_double(row.re_vs_cc_dr) << "\n";
  }
  return out.str();
}

std::string coverage_record_jsonl(const CoverageReport& report) {
  JsonRecord rec;
  rec.add("n", report.n);
  rec.add("N", report.total);
  rec.add("sims_used", report.sims_used);
  rec.add("failures", report.failures);
  rec.add("bias", report.bias);
  rec.add("emp_se", report.emp_se);
  rec.add("ase", report.ase_sd);
  rec.add("ase_mad", report.ase_mad);
  rec.add("rmse", report.rmse);
  rec.add("coverage", report.coverage);
  rec.add("delta_true", report.delta_true);
  return rec.line() + "\n";
}

std::string coverage_table(const CoverageReport& report) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%6s %7s %8s %8s %8s %8s %8s %9s\n", "n", "N", "bias",
                "emp_se", "ase", "ase_mad", "rmse", "coverage");
  out << buf;
  std::snprintf(buf, sizeof(buf), "%6d %7d %8.4f %8.4f %8.4f %8.4f %8.4f %9.3f\n", report.n,
                report.total, report.bias, report.emp_se, report.ase_sd, report.ase_mad,
                report.rmse, report.coverage);
  out << buf;
  return out.str();
}

}  // namespace ssate
