#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "quickcount/cli.hpp"

using namespace quickcount;
using Catch::Approx;

namespace {

const std::string kDataDir = QUICKCOUNT_TEST_DATA;

struct Scratch {
  std::filesystem::path dir;
  Scratch() {
    dir = std::filesystem::temp_directory_path() /
          ("quickcount_cli_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
  }
  ~Scratch() { std::filesystem::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::vector<std::string>& args) { return cli::dispatch(args); }

// a quick synthetic reference frame on disk, fully counted
std::string write_reference_frame(const Scratch& scratch) {
  SyntheticFrameSpec spec;
  spec.strata = 6;
  spec.stations_per_stratum = 12;
  spec.station_voters = {400, 600, 700};
  spec.base_shares = {0.27, 0.24, 0.18, 0.05, 0.05};
  spec.multinomial_counts = true;
  const ElectionFrame frame = generate_frame(spec, 404);
  std::ofstream out(scratch.path("frame.csv"));
  write_frame(frame, out);
  return scratch.path("frame.csv");
}

}  // namespace

TEST_CASE("ingest prints the official totals") {
  Scratch scratch;
  const std::string out = scratch.path("totals.json");
  REQUIRE(run({"ingest", "--frame", kDataDir + std::string("/mini_frame.csv"), "--out", out}) ==
          0);
  const Json j = Json::parse(read_text_file(out));
  REQUIRE(j.at("categories") == 5);
  REQUIRE(j.at("potential_voters") == 500);
  REQUIRE(j.at("totals")[0].at("theta").get<double>() == Approx(0.34));
  REQUIRE(j.at("totals")[4].at("lambda").is_null());
}

TEST_CASE("estimate runs one sample through both models") {
  Scratch scratch;
  const std::string frame = write_reference_frame(scratch);
  const std::string out = scratch.path("estimate.json");
  const std::string marginals = scratch.path("marginals.json");
  REQUIRE(run({"estimate", "--frame", frame, "--sample-size", "30", "--seed", "5",
               "--draws", "1000", "--baseline-draws", "1000", "--out", out,
               "--marginals-out", marginals}) == 0);
  const EstimateReport report = report_from_json(Json::parse(read_text_file(out)));
  REQUIRE(report.replications == 1);
  REQUIRE(report.candidates.size() == 5);
  for (const CandidateReport& row : report.candidates) {
    REQUIRE(row.delta == 0.0);  // estimate defaults to the independence blend
    REQUIRE(row.copula.lo < row.copula.hi);
    REQUIRE(row.baseline.lo < row.baseline.hi);
  }

  const Json extras = Json::parse(read_text_file(marginals));
  REQUIRE(extras.at("marginals").size() == 6);
  const Json& first = extras.at("marginals")[0];
  REQUIRE(first.at("candidate") == 1);
  REQUIRE(first.at("sigma_perp").get<double>() <= first.at("sigma_star").get<double>());
  REQUIRE(first.at("beta_a").get<double>() > 0.0);
  // J x J correlations serialize as the strict lower triangle
  REQUIRE(extras.at("dependence").at("rho_lower").size() == 6 * 5 / 2);
}

TEST_CASE("simulate is reproducible byte for byte") {
  Scratch scratch;
  const std::string frame = write_reference_frame(scratch);
  const std::vector<std::string> args = {
      "simulate", "--frame", frame,   "--sample-size", "30",   "--reps", "100",
      "--draws",  "1000",   "--baseline-draws", "1000", "--delta", "0.25",
      "--seed",   "7",      "--workers", "2",   "--scale", "theta"};
  std::vector<std::string> first = args;
  first.push_back("--out");
  first.push_back(scratch.path("a.json"));
  std::vector<std::string> second = args;
  second.push_back("--out");
  second.push_back(scratch.path("b.json"));
  REQUIRE(run(first) == 0);
  REQUIRE(run(second) == 0);
  REQUIRE(read_text_file(scratch.path("a.json")) == read_text_file(scratch.path("b.json")));
}

TEST_CASE("calibrate then simulate with the stored deltas reaches the target") {
  Scratch scratch;
  const std::string frame = write_reference_frame(scratch);
  const std::string cal = scratch.path("calibration.json");
  REQUIRE(run({"calibrate", "--frame", frame, "--sample-size", "30", "--alpha", "0.9",
               "--reps", "200", "--seed", "9", "--out", cal}) == 0);
  const CalibrationResult result = calibration_from_json(Json::parse(read_text_file(cal)));
  REQUIRE(result.delta.size() == 6);

  const std::string report_path = scratch.path("study.json");
  REQUIRE(run({"simulate", "--frame", frame, "--sample-size", "30", "--reps", "200",
               "--draws", "1000", "--baseline-draws", "1000", "--delta-from", cal,
               "--alpha", "0.9", "--seed", "9", "--scale", "theta", "--out",
               report_path}) == 0);
  const EstimateReport report = report_from_json(Json::parse(read_text_file(report_path)));
  for (std::size_t j = 0; j < 3; ++j) {
    if (!result.below_target[j])
      REQUIRE(report.candidates[j].copula.coverage >= 0.9);
  }
}

TEST_CASE("compare renders the markdown table") {
  Scratch scratch;
  const std::string frame = write_reference_frame(scratch);
  const std::string report_path = scratch.path("report.json");
  REQUIRE(run({"estimate", "--frame", frame, "--sample-size", "30", "--seed", "5", "--draws",
               "1000", "--baseline-draws", "1000", "--out", report_path}) == 0);
  const std::string md_path = scratch.path("report.md");
  REQUIRE(run({"compare", "--in", report_path, "--format", "md", "--out", md_path}) == 0);
  const std::string md = read_text_file(md_path);
  REQUIRE(md.rfind("| candidate |", 0) == 0);
  REQUIRE(md.find("| copula |") != std::string::npos);
  REQUIRE(md.find("| baseline |") != std::string::npos);
}

TEST_CASE("csv and markdown study formats") {
  Scratch scratch;
  const std::string frame = write_reference_frame(scratch);
  const std::string csv_path = scratch.path("study.csv");
  REQUIRE(run({"simulate", "--frame", frame, "--sample-size", "30", "--reps", "100",
               "--draws", "1000", "--baseline-draws", "1000", "--delta", "0",
               "--seed", "3", "--format", "csv", "--out", csv_path}) == 0);
  const std::string csv = read_text_file(csv_path);
  REQUIRE(csv.rfind("# scale=", 0) == 0);
  REQUIRE(csv.find("candidate,role,model") != std::string::npos);
}

TEST_CASE("errors surface as nonzero exits") {
  Scratch scratch;
  REQUIRE(run({"ingest", "--frame", scratch.path("missing.csv")}) == 1);
  REQUIRE(run({"frobnicate"}) != 0);
  REQUIRE(run({"simulate", "--sample-size", "10"}) == 1);  // no frame source
  REQUIRE(run({"ingest", "--no-such-flag"}) != 0);
}
