#ifndef QUICKCOUNT_REPORT_HPP
#define QUICKCOUNT_REPORT_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "quickcount/calibration.hpp"
#include "quickcount/dependence.hpp"
#include "quickcount/frame.hpp"
#include "quickcount/posterior.hpp"

// Report structures shared by the harness and the CLI, with JSON (canonical),
// CSV, and markdown renderings. JSON uses ordered maps so identical studies
// produce byte-identical files.

namespace quickcount {

using Json = nlohmann::ordered_json;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ModelSummary {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double length = 0.0;
  double coverage = kNaN;  // NaN when the frame carries no official totals
  double victory = kNaN;   // NaN for non-registered categories
};

struct CandidateReport {
  int candidate = 0;  // 1-based category id
  std::string role;   // registered | non_registered | null_vote | abstention
  double official_theta = kNaN;
  double official_lambda = kNaN;
  double delta = 0.0;
  ModelSummary copula;
  ModelSummary baseline;
  double ratio_win_rate = kNaN;
};

struct EstimateReport {
  std::string scale = "lambda";
  double alpha = 0.95;
  double gamma = 0.95;
  long long replications = 0;
  long long copula_draws = 0;
  long long baseline_draws = 0;
  std::uint64_t seed = 0;
  int categories = 0;
  std::vector<CandidateReport> candidates;
};

inline std::string category_role(int candidate, int categories) {
  if (candidate <= categories - 3) return "registered";
  if (candidate == categories - 2) return "non_registered";
  if (candidate == categories - 1) return "null_vote";
  return "abstention";
}

namespace detail {

inline Json number_or_null(double x) {
  if (std::isnan(x)) return nullptr;
  return x;
}

inline double number_from(const Json& j) { return j.is_null() ? kNaN : j.get<double>(); }

inline Json model_to_json(const ModelSummary& m) {
  Json j;
  j["point"] = m.point;
  j["lo"] = m.lo;
  j["hi"] = m.hi;
  j["length"] = m.length;
  j["coverage"] = number_or_null(m.coverage);
  j["victory"] = number_or_null(m.victory);
  return j;
}

inline ModelSummary model_from_json(const Json& j) {
  ModelSummary m;
  m.point = j.at("point").get<double>();
  m.lo = j.at("lo").get<double>();
  m.hi = j.at("hi").get<double>();
  m.length = j.at("length").get<double>();
  m.coverage = number_from(j.at("coverage"));
  m.victory = number_from(j.at("victory"));
  return m;
}

inline std::string full_precision(double x) {
  if (std::isnan(x)) return "";
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", x);
  return buffer;
}

inline std::string percent2(double x) {
  if (std::isnan(x)) return "";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.2f", 100.0 * x);
  return buffer;
}

}  // namespace detail

inline Json report_to_json(const EstimateReport& report) {
  Json j;
  j["scale"] = report.scale;
  j["alpha"] = report.alpha;
  j["gamma"] = report.gamma;
  j["replications"] = report.replications;
  j["copula_draws"] = report.copula_draws;
  j["baseline_draws"] = report.baseline_draws;
  j["seed"] = report.seed;
  j["categories"] = report.categories;
  j["candidates"] = Json::array();
  for (const CandidateReport& c : report.candidates) {
    Json row;
    row["candidate"] = c.candidate;
    row["role"] = c.role;
    row["official_theta"] = detail::number_or_null(c.official_theta);
    row["official_lambda"] = detail::number_or_null(c.official_lambda);
    row["delta"] = c.delta;
    row["copula"] = detail::model_to_json(c.copula);
    row["baseline"] = detail::model_to_json(c.baseline);
    row["ratio_win_rate"] = detail::number_or_null(c.ratio_win_rate);
    j["candidates"].push_back(row);
  }
  return j;
}

inline EstimateReport report_from_json(const Json& j) {
  EstimateReport report;
  report.scale = j.at("scale").get<std::string>();
  report.alpha = j.at("alpha").get<double>();
  report.gamma = j.at("gamma").get<double>();
  report.replications = j.at("replications").get<long long>();
  report.copula_draws = j.at("copula_draws").get<long long>();
  report.baseline_draws = j.at("baseline_draws").get<long long>();
  report.seed = j.at("seed").get<std::uint64_t>();
  report.categories = j.at("categories").get<int>();
  for (const Json& row : j.at("candidates")) {
    CandidateReport c;
    c.candidate = row.at("candidate").get<int>();
    c.role = row.at("role").get<std::string>();
    c.official_theta = detail::number_from(row.at("official_theta"));
    c.official_lambda = detail::number_from(row.at("official_lambda"));
    c.delta = row.at("delta").get<double>();
    c.copula = detail::model_from_json(row.at("copula"));
    c.baseline = detail::model_from_json(row.at("baseline"));
    c.ratio_win_rate = detail::number_from(row.at("ratio_win_rate"));
    report.candidates.push_back(c);
  }
  return report;
}

/// CSV rendering: `# key=value` preamble, then one row per (candidate,
/// model) at full precision so a CSV round trip preserves every value.
inline std::string report_to_csv(const EstimateReport& report) {
  std::string out;
  out += "# scale=" + report.scale + "\n";
  out += "# alpha=" + detail::full_precision(report.alpha) + "\n";
  out += "# gamma=" + detail::full_precision(report.gamma) + "\n";
  out += "# replications=" + std::to_string(report.replications) + "\n";
  out += "# copula_draws=" + std::to_string(report.copula_draws) + "\n";
  out += "# baseline_draws=" + std::to_string(report.baseline_draws) + "\n";
  out += "# seed=" + std::to_string(report.seed) + "\n";
  out += "# categories=" + std::to_string(report.categories) + "\n";
  out +=
      "candidate,role,model,official_theta,official_lambda,delta,point,lo,hi,length,"
      "coverage,victory,ratio_win_rate\n";
  for (const CandidateReport& c : report.candidates) {
    for (const char* model : {"copula", "baseline"}) {
      const ModelSummary& m = model == std::string("copula") ? c.copula : c.baseline;
      out += std::to_string(c.candidate) + "," + c.role + "," + model + "," +
             detail::full_precision(c.official_theta) + "," +
             detail::full_precision(c.official_lambda) + "," +
             detail::full_precision(c.delta) + "," + detail::full_precision(m.point) + "," +
             detail::full_precision(m.lo) + "," + detail::full_precision(m.hi) + "," +
             detail::full_precision(m.length) + "," + detail::full_precision(m.coverage) + "," +
             detail::full_precision(m.victory) + "," +
             detail::full_precision(c.ratio_win_rate) + "\n";
    }
  }
  return out;
}

inline EstimateReport report_from_csv(std::istream& in) {
  EstimateReport report;
  report.categories = 0;
  std::string line;
  std::vector<CandidateReport> rows;
  const auto parse_number = [](const std::string& field) {
    return field.empty() ? kNaN : std::stod(field);
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::size_t eq = line.find('=');
      require(eq != std::string::npos, "report: malformed preamble line '", line, "'");
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      if (key == "scale") report.scale = value;
      if (key == "alpha") report.alpha = std::stod(value);
      if (key == "gamma") report.gamma = std::stod(value);
      if (key == "replications") report.replications = std::stoll(value);
      if (key == "copula_draws") report.copula_draws = std::stoll(value);
      if (key == "baseline_draws") report.baseline_draws = std::stoll(value);
      if (key == "seed") report.seed = std::stoull(value);
      if (key == "categories") report.categories = std::stoi(value);
      continue;
    }
    if (line.rfind("candidate,", 0) == 0) continue;
    const std::vector<std::string> f = detail::split_csv_row(line);
    require(f.size() == 13, "report: CSV row with ", f.size(), " fields, expected 13");
    const int candidate = std::stoi(f[0]);
    if (rows.empty() || rows.back().candidate != candidate) {
      CandidateReport c;
      c.candidate = candidate;
      c.role = f[1];
      c.official_theta = parse_number(f[3]);
      c.official_lambda = parse_number(f[4]);
      c.delta = parse_number(f[5]);
      c.ratio_win_rate = parse_number(f[12]);
      rows.push_back(c);
    }
    ModelSummary m;
    m.point = parse_number(f[6]);
    m.lo = parse_number(f[7]);
    m.hi = parse_number(f[8]);
    m.length = parse_number(f[9]);
    m.coverage = parse_number(f[10]);
    m.victory = parse_number(f[11]);
    (f[2] == "copula" ? rows.back().copula : rows.back().baseline) = m;
  }
  report.candidates = std::move(rows);
  return report;
}

/// Markdown rendering: everything in percentage points with two decimals,
/// one row per (candidate, model).
inline std::string report_to_markdown(const EstimateReport& report) {
  std::string out;
  out += "| candidate | role | model | official | point | interval | length | coverage | "
         "victory | ratio wins |\n";
  out += "|---|---|---|---|---|---|---|---|---|---|\n";
  const bool lambda = report.scale == "lambda";
  for (const CandidateReport& c : report.candidates) {
    const double official = lambda ? c.official_lambda : c.official_theta;
    for (const char* model : {"copula", "baseline"}) {
      const ModelSummary& m = model == std::string("copula") ? c.copula : c.baseline;
      out += "| " + std::to_string(c.candidate) + " | " + c.role + " | " + model + " | " +
             detail::percent2(official) + " | " + detail::percent2(m.point) + " | [" +
             detail::percent2(m.lo) + ", " + detail::percent2(m.hi) + "] | " +
             detail::percent2(m.length) + " | " + detail::percent2(m.coverage) + " | " +
             detail::percent2(m.victory) + " | " + detail::percent2(c.ratio_win_rate) + " |\n";
    }
  }
  return out;
}

inline std::string render_report(const EstimateReport& report, const std::string& format) {
  if (format == "json") return report_to_json(report).dump(2) + "\n";
  if (format == "csv") return report_to_csv(report);
  if (format == "md") return report_to_markdown(report);
  fail("report: unknown format '", format, "' (expected json, csv, or md)");
}

inline Json totals_to_json(const OfficialTotals& totals) {
  Json j = Json::array();
  for (std::size_t c = 0; c < totals.theta.size(); ++c) {
    Json row;
    row["candidate"] = static_cast<int>(c) + 1;
    row["theta"] = totals.theta[c];
    row["lambda"] = c < totals.lambda.size() ? Json(totals.lambda[c]) : Json(nullptr);
    j.push_back(row);
  }
  return j;
}

inline Json marginal_to_json(int candidate, const MarginalSummary& m) {
  Json j;
  j["candidate"] = candidate;
  j["mu"] = m.mu;
  j["sigma_perp"] = m.sigma_perp;
  j["sigma_star"] = m.sigma_star;
  j["delta"] = m.delta;
  j["sigma"] = m.sigma;
  j["beta_a"] = m.marginal.a;
  j["beta_b"] = m.marginal.b;
  return j;
}

/// Dense lower-triangular serialization of the correlation matrix.
inline Json dependence_to_json(const DependenceMatrix& dep) {
  Json j;
  j["categories"] = dep.categories;
  Json rho = Json::array();
  for (int row = 1; row < dep.categories; ++row)
    for (int col = 0; col < row; ++col) rho.push_back(dep.at(row, col));
  j["rho_lower"] = rho;
  return j;
}

inline Json calibration_to_json(const CalibrationResult& result) {
  Json j;
  j["alpha"] = result.alpha;
  j["replications"] = result.replications;
  j["seed"] = result.seed;
  j["tolerance"] = result.tolerance;
  j["scale"] = result.scale == Scale::Theta ? "theta" : "lambda";
  j["candidates"] = Json::array();
  for (std::size_t c = 0; c < result.delta.size(); ++c) {
    Json row;
    row["candidate"] = static_cast<int>(c) + 1;
    row["delta"] = result.delta[c];
    row["coverage"] = result.coverage[c];
    row["below_target"] = static_cast<bool>(result.below_target[c]);
    j["candidates"].push_back(row);
  }
  return j;
}

inline std::string calibration_to_csv(const CalibrationResult& result) {
  std::string out = "candidate,delta,coverage,below_target,alpha,replications\n";
  for (std::size_t c = 0; c < result.delta.size(); ++c) {
    out += std::to_string(c + 1) + "," + detail::full_precision(result.delta[c]) + "," +
           detail::full_precision(result.coverage[c]) + "," +
           (result.below_target[c] ? "1" : "0") + "," + detail::full_precision(result.alpha) +
           "," + std::to_string(result.replications) + "\n";
  }
  return out;
}

inline CalibrationResult calibration_from_json(const Json& j) {
  CalibrationResult result;
  result.alpha = j.at("alpha").get<double>();
  result.replications = j.at("replications").get<long long>();
  result.seed = j.at("seed").get<std::uint64_t>();
  result.tolerance = j.at("tolerance").get<double>();
  result.scale = j.at("scale").get<std::string>() == "theta" ? Scale::Theta : Scale::Lambda;
  for (const Json& row : j.at("candidates")) {
    result.delta.push_back(row.at("delta").get<double>());
    result.coverage.push_back(row.at("coverage").get<double>());
    result.below_target.push_back(row.at("below_target").get<bool>());
  }
  return result;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "report: cannot open ", path, " for writing");
  out << content;
  require(static_cast<bool>(out), "report: failed writing ", path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "report: cannot open ", path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return content;
}

}  // namespace quickcount

#endif
