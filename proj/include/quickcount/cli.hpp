#ifndef QUICKCOUNT_CLI_HPP
#define QUICKCOUNT_CLI_HPP

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quickcount/harness.hpp"
#include "quickcount/report.hpp"

// Command-line front end. Every subcommand is a pure function of
// (input files, flags, seed) to (output files, exit status); the only
// randomness comes from --seed.

namespace quickcount {
namespace cli {

inline void emit(const std::string& content, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << content;
    return;
  }
  write_text_file(out_path, content);
}

inline std::vector<double> load_delta_file(const std::string& path) {
  const Json j = Json::parse(read_text_file(path));
  if (j.is_array()) return j.get<std::vector<double>>();
  return calibration_from_json(j).delta;
}

inline int run_ingest(const std::string& frame_path, const std::string& out_path) {
  const ElectionFrame frame = parse_frame_file(frame_path);
  const OfficialTotals totals = official_totals(frame);
  Json j;
  j["frame"] = frame_path;
  j["categories"] = frame.categories;
  j["strata"] = frame.stratum_count();
  j["stations"] = frame.total_stations();
  j["potential_voters"] = frame.total_voters();
  j["totals"] = totals_to_json(totals);
  emit(j.dump(2) + "\n", out_path);
  return 0;
}

struct SimulateFlags {
  std::string config_path;
  std::string frame_path;
  std::string synthetic_path;
  StudyConfig cfg;
  bool scale_set = false;
  double delta = -1.0;  // <0 means unset
  std::string delta_from;
  std::string out_path;
  std::string marginals_out;
  std::string format = "json";
};

inline StudyConfig resolve_config(SimulateFlags& flags, bool defaults_for_estimate) {
  StudyConfig cfg;
  if (!flags.config_path.empty()) cfg = study_config_from_json(Json::parse(read_text_file(flags.config_path)));
  if (!flags.frame_path.empty()) {
    cfg.frame_file = flags.frame_path;
    cfg.use_synthetic = false;
  }
  if (!flags.synthetic_path.empty()) {
    Json spec = Json::parse(read_text_file(flags.synthetic_path));
    const StudyConfig synthetic = study_config_from_json(
        Json{{"frame", Json{{"synthetic", spec}, {"seed", cfg.frame_seed}}},
             {"sample_size", 1}});
    cfg.synthetic = synthetic.synthetic;
    cfg.use_synthetic = true;
    cfg.frame_file.clear();
  }
  if (flags.cfg.sample_size > 0) cfg.sample_size = flags.cfg.sample_size;
  if (flags.cfg.alpha > 0.0) cfg.alpha = flags.cfg.alpha;
  if (flags.cfg.gamma > 0.0) cfg.gamma = flags.cfg.gamma;
  if (flags.cfg.replications > 0) cfg.replications = flags.cfg.replications;
  if (flags.cfg.calibration_replications > 0)
    cfg.calibration_replications = flags.cfg.calibration_replications;
  if (flags.cfg.copula_draws > 0) cfg.copula_draws = flags.cfg.copula_draws;
  if (flags.cfg.baseline_draws > 0) cfg.baseline_draws = flags.cfg.baseline_draws;
  if (flags.cfg.seed != ~std::uint64_t{0}) cfg.seed = flags.cfg.seed;
  if (flags.cfg.frame_seed != ~std::uint64_t{0}) cfg.frame_seed = flags.cfg.frame_seed;
  if (flags.cfg.workers > 0) cfg.workers = flags.cfg.workers;
  if (flags.scale_set) cfg.scale = flags.cfg.scale;
  if (flags.delta >= 0.0) {
    cfg.calibrate = false;
    cfg.fixed_delta = {flags.delta};
  } else if (!flags.delta_from.empty()) {
    cfg.calibrate = false;
    cfg.fixed_delta = load_delta_file(flags.delta_from);
  }
  if (defaults_for_estimate && cfg.calibrate) {
    // `estimate` does not calibrate implicitly: without --delta or
    // --delta-from it reports the independence-assumption intervals.
    cfg.calibrate = false;
    cfg.fixed_delta = {0.0};
  }
  return cfg;
}

inline int run_simulate(SimulateFlags& flags) {
  const StudyConfig cfg = resolve_config(flags, false);
  const EstimateReport report = simulation_study(cfg);
  emit(render_report(report, flags.format), flags.out_path);
  return 0;
}

inline int run_estimate(SimulateFlags& flags) {
  const StudyConfig cfg = resolve_config(flags, true);
  const EstimateReport report = single_estimate(cfg);
  emit(render_report(report, flags.format), flags.out_path);
  if (!flags.marginals_out.empty()) {
    // per-candidate marginal summaries plus the correlation matrix of the
    // same single draw
    const ElectionFrame frame = study_frame(cfg);
    const Allocation alloc = allocate_proportional(frame, cfg.sample_size);
    const SampleDraw sample =
        draw_sample(frame, alloc, replication_seed(cfg.seed, 0, seedtag::kSample));
    const PosteriorTable table = fit_posteriors(sample);
    const std::vector<double> weights = frame.weights();
    StudyConfig resolved = cfg;
    const std::vector<double> delta = study_deltas(resolved, frame, alloc);
    Json j;
    j["marginals"] = Json::array();
    for (int c = 0; c < frame.categories; ++c)
      j["marginals"].push_back(
          marginal_to_json(c + 1, make_marginal(table, c, weights, delta[c])));
    j["dependence"] = dependence_to_json(estimate_dependence(sample, weights));
    write_text_file(flags.marginals_out, j.dump(2) + "\n");
  }
  return 0;
}

inline int run_calibrate(const std::string& frame_path, int sample_size, double alpha,
                         long long reps, std::uint64_t seed, double tolerance,
                         const std::string& scale, long long draws,
                         const std::string& out_path, const std::string& format) {
  const ElectionFrame frame = parse_frame_file(frame_path);
  const Allocation alloc = allocate_proportional(frame, sample_size);
  const CalibrationResult result =
      calibrate_delta(frame, alloc, alpha, reps, seed, tolerance,
                      scale == "theta" ? Scale::Theta : Scale::Lambda, draws);
  if (format == "csv") {
    emit(calibration_to_csv(result), out_path);
  } else {
    emit(calibration_to_json(result).dump(2) + "\n", out_path);
  }
  return 0;
}

inline int run_compare(const std::string& in_path, const std::string& format,
                       const std::string& out_path) {
  const EstimateReport report = report_from_json(Json::parse(read_text_file(in_path)));
  emit(render_report(report, format), out_path);
  return 0;
}

inline int dispatch(std::vector<std::string> args) {
  CLI::App app{"stratified electoral quick-count estimation"};
  app.require_subcommand(1);

  // ingest
  std::string ingest_frame;
  std::string ingest_out;
  CLI::App* ingest = app.add_subcommand("ingest", "validate a frame file and print official totals");
  ingest->add_option("--frame", ingest_frame, "frame CSV file")->required();
  ingest->add_option("--out", ingest_out, "output path (default stdout)");

  const auto add_study_flags = [](CLI::App* cmd, SimulateFlags& flags, bool with_reps) {
    cmd->add_option("--config", flags.config_path, "study config JSON");
    cmd->add_option("--frame", flags.frame_path, "frame CSV file");
    cmd->add_option("--synthetic", flags.synthetic_path, "synthetic frame spec JSON");
    cmd->add_option("--sample-size", flags.cfg.sample_size, "total stations to sample");
    cmd->add_option("--alpha", flags.cfg.alpha, "interval probability level");
    cmd->add_option("--gamma", flags.cfg.gamma, "effective-share window level");
    cmd->add_option("--delta", flags.delta, "fixed blend parameter for all candidates");
    cmd->add_option("--delta-from", flags.delta_from, "calibration JSON with per-candidate deltas");
    if (with_reps) {
      cmd->add_option("--reps", flags.cfg.replications, "study replications");
      cmd->add_option("--calibration-reps", flags.cfg.calibration_replications,
                      "calibration replications");
    }
    cmd->add_option("--draws", flags.cfg.copula_draws, "copula Monte Carlo draws per pair");
    cmd->add_option("--baseline-draws", flags.cfg.baseline_draws, "baseline posterior draws");
    cmd->add_option("--seed", flags.cfg.seed, "master seed");
    cmd->add_option("--frame-seed", flags.cfg.frame_seed, "synthetic frame seed");
    cmd->add_option("--workers", flags.cfg.workers, "replication worker threads");
    cmd->add_option_function<std::string>(
           "--scale",
           [&flags](const std::string& s) {
             flags.cfg.scale = s == "theta" ? Scale::Theta : Scale::Lambda;
             flags.scale_set = true;
           },
           "reporting scale")
        ->check(CLI::IsMember({"theta", "lambda"}));
    cmd->add_option("--out", flags.out_path, "output path (default stdout)");
    if (!with_reps)
      cmd->add_option("--marginals-out", flags.marginals_out,
                      "also write marginal summaries and the correlation matrix");
    cmd->add_option("--format", flags.format, "output format")
        ->check(CLI::IsMember({"json", "csv", "md"}));
  };

  SimulateFlags estimate_flags;
  estimate_flags.cfg.sample_size = 0;
  estimate_flags.cfg.alpha = 0.0;
  estimate_flags.cfg.gamma = 0.0;
  estimate_flags.cfg.replications = 0;
  estimate_flags.cfg.calibration_replications = 0;
  estimate_flags.cfg.copula_draws = 0;
  estimate_flags.cfg.baseline_draws = 0;
  estimate_flags.cfg.seed = ~std::uint64_t{0};
  estimate_flags.cfg.frame_seed = ~std::uint64_t{0};
  estimate_flags.cfg.workers = 0;
  SimulateFlags simulate_flags = estimate_flags;

  CLI::App* estimate = app.add_subcommand("estimate", "run one sample through both models");
  add_study_flags(estimate, estimate_flags, false);

  CLI::App* simulate = app.add_subcommand("simulate", "run a replication study");
  add_study_flags(simulate, simulate_flags, true);

  // calibrate
  std::string cal_frame;
  int cal_sample_size = 0;
  double cal_alpha = 0.95;
  long long cal_reps = 10000;
  std::uint64_t cal_seed = 1;
  double cal_tolerance = 1.0 / 64.0;
  std::string cal_scale = "theta";
  long long cal_draws = 2000;
  std::string cal_out;
  std::string cal_format = "json";
  CLI::App* calibrate = app.add_subcommand("calibrate", "estimate per-candidate blend parameters");
  calibrate->add_option("--frame", cal_frame, "fully counted reference frame CSV")->required();
  calibrate->add_option("--sample-size", cal_sample_size, "total stations to sample")->required();
  calibrate->add_option("--alpha", cal_alpha, "target coverage");
  calibrate->add_option("--reps", cal_reps, "replications");
  calibrate->add_option("--seed", cal_seed, "master seed");
  calibrate->add_option("--tolerance", cal_tolerance, "delta grid resolution");
  calibrate->add_option("--scale", cal_scale, "coverage scale")
      ->check(CLI::IsMember({"theta", "lambda"}));
  calibrate->add_option("--draws", cal_draws, "copula draws (lambda scale only)");
  calibrate->add_option("--out", cal_out, "output path (default stdout)");
  calibrate->add_option("--format", cal_format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));

  // compare
  std::string cmp_in;
  std::string cmp_format = "md";
  std::string cmp_out;
  CLI::App* compare = app.add_subcommand("compare", "render side-by-side model tables");
  compare->add_option("--in", cmp_in, "report JSON produced by simulate/estimate")->required();
  compare->add_option("--format", cmp_format, "output format")
      ->check(CLI::IsMember({"json", "csv", "md"}));
  compare->add_option("--out", cmp_out, "output path (default stdout)");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (ingest->parsed()) return run_ingest(ingest_frame, ingest_out);
    if (estimate->parsed()) return run_estimate(estimate_flags);
    if (simulate->parsed()) return run_simulate(simulate_flags);
    if (calibrate->parsed())
      return run_calibrate(cal_frame, cal_sample_size, cal_alpha, cal_reps, cal_seed,
                           cal_tolerance, cal_scale, cal_draws, cal_out, cal_format);
    if (compare->parsed()) return run_compare(cmp_in, cmp_format, cmp_out);
  } catch (const std::exception& e) {
    Json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace cli
}  // namespace quickcount

#endif
