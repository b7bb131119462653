#ifndef QUICKCOUNT_HARNESS_HPP
#define QUICKCOUNT_HARNESS_HPP

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "quickcount/baseline.hpp"
#include "quickcount/calibration.hpp"
#include "quickcount/copula.hpp"
#include "quickcount/dependence.hpp"
#include "quickcount/report.hpp"

// End-to-end replication engine: synthetic frame generation, one-sample
// estimation under both models, and aggregate simulation studies.

namespace quickcount {

/// How the per-stratum candidate swing is drawn.
///  - Stratum: one shock per (stratum, candidate); stations within a stratum
///    share it, so strata differ but remain internally homogeneous.
///  - Profile: one shock per (station slot, candidate), shared by every
///    stratum: the same station profiles swing together in all districts at
///    once, which is what breaks independence-based interval widths.
enum class ShockMode { Stratum, Profile };

struct SyntheticFrameSpec {
  int strata = 20;
  int stations_per_stratum = 50;
  std::vector<long long> station_voters = {750};  // cycled across station slots
  std::vector<double> base_shares;                // categories 1..J-1
  double shock_sd = 0.0;
  double noise_sd = 0.0;
  ShockMode shock_mode = ShockMode::Stratum;
  bool multinomial_counts = false;  // realize counts multinomially instead of rounding

  void validate() const {
    require(strata >= 1 && stations_per_stratum >= 1, "harness: empty synthetic spec");
    require(!station_voters.empty(), "harness: station_voters must not be empty");
    for (const long long v : station_voters)
      require(v >= 1, "harness: station sizes must be positive");
    require(base_shares.size() >= 4, "harness: need at least 4 share categories (J >= 5)");
    double sum = 0.0;
    for (const double s : base_shares) {
      require(s > 0.0 && s < 1.0, "harness: base shares must lie in (0,1)");
      sum += s;
    }
    require(sum < 1.0, "harness: base shares must leave room for abstention (sum < 1)");
    require(shock_sd >= 0.0 && noise_sd >= 0.0, "harness: negative spread in synthetic spec");
  }
};

namespace detail {

inline std::string padded_id(const char* prefix, int value, int width) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%s%0*d", prefix, width, value);
  return buffer;
}

// Truncate negative shares and renormalize onto the simplex when the swing
// pushes the recorded categories past a full turnout.
inline void clamp_to_simplex(std::vector<double>& shares) {
  double sum = 0.0;
  for (double& s : shares) {
    s = std::max(s, 0.0);
    sum += s;
  }
  if (sum > 1.0)
    for (double& s : shares) s /= sum;
}

}  // namespace detail

inline ElectionFrame generate_frame(const SyntheticFrameSpec& spec, std::uint64_t seed) {
  spec.validate();
  const int share_count = static_cast<int>(spec.base_shares.size());
  Engine eng = make_engine(seed);

  // Profile-mode swing: drawn once, applied to the same station slot of
  // every stratum.
  std::vector<std::vector<double>> profile;
  if (spec.shock_mode == ShockMode::Profile && spec.shock_sd > 0.0) {
    profile.assign(static_cast<std::size_t>(share_count),
                   std::vector<double>(static_cast<std::size_t>(spec.stations_per_stratum)));
    for (auto& row : profile)
      for (double& g : row) g = spec.shock_sd * draw_normal(eng);
  }

  ElectionFrame frame;
  frame.categories = share_count + 1;
  frame.strata.reserve(static_cast<std::size_t>(spec.strata));
  const int stratum_width = spec.strata >= 100 ? 3 : 2;
  std::vector<double> shares(static_cast<std::size_t>(share_count));
  for (int i = 0; i < spec.strata; ++i) {
    Stratum stratum;
    stratum.id = detail::padded_id("D", i + 1, stratum_width);
    std::vector<double> stratum_shock(static_cast<std::size_t>(share_count), 0.0);
    if (spec.shock_mode == ShockMode::Stratum && spec.shock_sd > 0.0)
      for (double& g : stratum_shock) g = spec.shock_sd * draw_normal(eng);
    for (int k = 0; k < spec.stations_per_stratum; ++k) {
      const long long voters =
          spec.station_voters[static_cast<std::size_t>(k) % spec.station_voters.size()];
      for (int j = 0; j < share_count; ++j) {
        double s = spec.base_shares[static_cast<std::size_t>(j)];
        s += spec.shock_mode == ShockMode::Profile
                 ? (profile.empty() ? 0.0
                                    : profile[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)])
                 : stratum_shock[static_cast<std::size_t>(j)];
        if (spec.noise_sd > 0.0) s += spec.noise_sd * draw_normal(eng);
        shares[static_cast<std::size_t>(j)] = s;
      }
      detail::clamp_to_simplex(shares);
      Station station;
      station.id = detail::padded_id("S", k + 1, 4);
      station.voters = voters;
      station.votes.assign(static_cast<std::size_t>(share_count), 0);
      if (spec.multinomial_counts) {
        // Exact multinomial by per-voter assignment; the trailing residual
        // category is abstention and stays implicit.
        for (long long voter = 0; voter < voters; ++voter) {
          double u = uniform01(eng);
          for (int j = 0; j < share_count; ++j) {
            u -= shares[static_cast<std::size_t>(j)];
            if (u < 0.0) {
              ++station.votes[static_cast<std::size_t>(j)];
              break;
            }
          }
        }
      } else {
        long long cast = 0;
        for (int j = 0; j < share_count; ++j) {
          station.votes[static_cast<std::size_t>(j)] = std::llround(
              shares[static_cast<std::size_t>(j)] * static_cast<double>(voters));
          cast += station.votes[static_cast<std::size_t>(j)];
        }
        // Rounding can overshoot the station total; trim the largest counts
        // until abstention absorbs the residue.
        while (cast > voters) {
          auto largest = std::max_element(station.votes.begin(), station.votes.end());
          --*largest;
          --cast;
        }
      }
      stratum.stations.push_back(std::move(station));
    }
    frame.strata.push_back(std::move(stratum));
  }
  frame.validate();
  return frame;
}

struct StudyConfig {
  std::string frame_file;  // mutually exclusive with the synthetic spec
  bool use_synthetic = false;
  SyntheticFrameSpec synthetic;
  std::uint64_t frame_seed = 1;

  int sample_size = 0;
  double alpha = 0.95;
  double gamma = 0.95;
  bool calibrate = true;            // otherwise use fixed_delta
  std::vector<double> fixed_delta;  // one value (broadcast) or one per category
  long long calibration_replications = 10000;
  long long replications = 10000;
  long long copula_draws = 10000;   // m
  long long baseline_draws = 10000; // T
  std::uint64_t seed = 1;
  Scale scale = Scale::Lambda;
  int workers = 1;

  void validate() const {
    require(use_synthetic == frame_file.empty(), "harness: configure exactly one frame source");
    require(sample_size > 0, "harness: sample_size must be positive");
    require(alpha > 0.0 && alpha < 1.0 && gamma > 0.0 && gamma < 1.0,
            "harness: probability levels must lie in (0,1)");
    require(replications >= 100, "harness: at least 100 replications required, got ",
            replications);
    require(copula_draws >= 1000, "harness: at least 1000 copula draws required, got ",
            copula_draws);
    require(baseline_draws >= 1000, "harness: at least 1000 baseline draws required, got ",
            baseline_draws);
    require(workers >= 1, "harness: workers must be positive");
  }
};

inline Json study_config_to_json(const StudyConfig& cfg) {
  Json j;
  if (cfg.use_synthetic) {
    Json s;
    s["strata"] = cfg.synthetic.strata;
    s["stations_per_stratum"] = cfg.synthetic.stations_per_stratum;
    s["station_voters"] = cfg.synthetic.station_voters;
    s["base_shares"] = cfg.synthetic.base_shares;
    s["shock_sd"] = cfg.synthetic.shock_sd;
    s["noise_sd"] = cfg.synthetic.noise_sd;
    s["shock_mode"] = cfg.synthetic.shock_mode == ShockMode::Profile ? "profile" : "stratum";
    s["multinomial_counts"] = cfg.synthetic.multinomial_counts;
    j["frame"] = Json{{"synthetic", s}, {"seed", cfg.frame_seed}};
  } else {
    j["frame"] = Json{{"file", cfg.frame_file}};
  }
  j["sample_size"] = cfg.sample_size;
  j["alpha"] = cfg.alpha;
  j["gamma"] = cfg.gamma;
  j["delta"] = cfg.calibrate ? Json("calibrated") : Json(cfg.fixed_delta);
  j["calibration_replications"] = cfg.calibration_replications;
  j["replications"] = cfg.replications;
  j["copula_draws"] = cfg.copula_draws;
  j["baseline_draws"] = cfg.baseline_draws;
  j["seed"] = cfg.seed;
  j["scale"] = cfg.scale == Scale::Theta ? "theta" : "lambda";
  j["workers"] = cfg.workers;
  return j;
}

inline StudyConfig study_config_from_json(const Json& j) {
  StudyConfig cfg;
  const Json& frame = j.at("frame");
  if (frame.contains("synthetic")) {
    cfg.use_synthetic = true;
    const Json& s = frame.at("synthetic");
    cfg.synthetic.strata = s.at("strata").get<int>();
    cfg.synthetic.stations_per_stratum = s.at("stations_per_stratum").get<int>();
    cfg.synthetic.station_voters = s.at("station_voters").get<std::vector<long long>>();
    cfg.synthetic.base_shares = s.at("base_shares").get<std::vector<double>>();
    cfg.synthetic.shock_sd = s.value("shock_sd", 0.0);
    cfg.synthetic.noise_sd = s.value("noise_sd", 0.0);
    cfg.synthetic.shock_mode =
        s.value("shock_mode", std::string("stratum")) == "profile" ? ShockMode::Profile
                                                                   : ShockMode::Stratum;
    cfg.synthetic.multinomial_counts = s.value("multinomial_counts", false);
    cfg.frame_seed = frame.value("seed", std::uint64_t{1});
  } else {
    cfg.frame_file = frame.at("file").get<std::string>();
  }
  cfg.sample_size = j.at("sample_size").get<int>();
  cfg.alpha = j.value("alpha", 0.95);
  cfg.gamma = j.value("gamma", 0.95);
  if (j.contains("delta") && j.at("delta").is_array()) {
    cfg.calibrate = false;
    cfg.fixed_delta = j.at("delta").get<std::vector<double>>();
  }
  cfg.calibration_replications = j.value("calibration_replications", 10000LL);
  cfg.replications = j.value("replications", 10000LL);
  cfg.copula_draws = j.value("copula_draws", 10000LL);
  cfg.baseline_draws = j.value("baseline_draws", 10000LL);
  cfg.seed = j.value("seed", std::uint64_t{1});
  cfg.scale = j.value("scale", std::string("lambda")) == "theta" ? Scale::Theta : Scale::Lambda;
  cfg.workers = j.value("workers", 1);
  return cfg;
}

struct ModelOutcome {
  std::vector<double> point;
  std::vector<Interval> interval;
  std::vector<bool> hit;
  std::vector<double> victory;  // registered candidates only
};

struct ReplicationOutcome {
  ModelOutcome copula;
  ModelOutcome baseline;
  int ratio_winner = 0;  // registered candidate index leading under the ratio estimator
};

/// One replication: a fresh stratified sample pushed through the copula
/// pipeline and the baseline, with hit/miss bookkeeping against the official
/// totals.
inline ReplicationOutcome run_replication(const ElectionFrame& frame,
                                          const OfficialTotals& totals, const Allocation& alloc,
                                          const std::vector<double>& delta,
                                          const StudyConfig& cfg, long long rep) {
  const int categories = frame.categories;
  const int registered = frame.registered_candidates();
  const int reported = cfg.scale == Scale::Lambda ? categories - 1 : categories;
  const std::vector<double> weights = frame.weights();

  const SampleDraw sample =
      draw_sample(frame, alloc, replication_seed(cfg.seed, rep, seedtag::kSample));
  const PosteriorTable table = fit_posteriors(sample);

  std::vector<MarginalSummary> marginals;
  marginals.reserve(static_cast<std::size_t>(categories));
  for (int j = 0; j < categories; ++j)
    marginals.push_back(make_marginal(table, j, weights, delta[static_cast<std::size_t>(j)]));

  ReplicationOutcome out;
  out.copula.point.resize(static_cast<std::size_t>(reported));
  out.copula.interval.resize(static_cast<std::size_t>(reported));
  out.copula.hit.resize(static_cast<std::size_t>(reported));

  const int abstention = categories - 1;
  std::vector<double> per_stratum(sample.stations.size());
  for (int j = 0; j < reported; ++j) {
    if (cfg.scale == Scale::Theta) {
      out.copula.point[static_cast<std::size_t>(j)] = marginals[static_cast<std::size_t>(j)].mu;
      out.copula.interval[static_cast<std::size_t>(j)] =
          theta_interval(marginals[static_cast<std::size_t>(j)].marginal, cfg.alpha);
    } else {
      for (std::size_t i = 0; i < sample.stations.size(); ++i)
        per_stratum[i] = stratum_correlation(sample.stations[i], j, abstention, categories);
      const double rho = overall_correlation(per_stratum, weights);
      const CopulaSpec spec{rho, cfg.copula_draws,
                            replication_seed(cfg.seed, rep, seedtag::kCopulaBase + j)};
      const LambdaSample lam =
          lambda_samples(marginals[static_cast<std::size_t>(j)].marginal,
                         marginals[static_cast<std::size_t>(abstention)].marginal,
                         gaussian_pair_sample(spec));
      double mean = 0.0;
      for (const double v : lam.values) mean += v;
      out.copula.point[static_cast<std::size_t>(j)] =
          mean / static_cast<double>(lam.values.size());
      out.copula.interval[static_cast<std::size_t>(j)] =
          minimal_length_interval(lam.values, cfg.gamma);
    }
    const double official = cfg.scale == Scale::Theta
                                ? totals.theta[static_cast<std::size_t>(j)]
                                : totals.lambda[static_cast<std::size_t>(j)];
    out.copula.hit[static_cast<std::size_t>(j)] =
        out.copula.interval[static_cast<std::size_t>(j)].contains(official);
  }

  // Victory probabilities, pairwise: the leading candidate against the
  // runner-up, every other registered candidate against the leader.
  out.copula.victory.assign(static_cast<std::size_t>(registered), 0.0);
  int lead = 0;
  for (int j = 1; j < registered; ++j)
    if (marginals[static_cast<std::size_t>(j)].mu > marginals[static_cast<std::size_t>(lead)].mu)
      lead = j;
  int second = lead == 0 ? 1 : 0;
  for (int j = 0; j < registered; ++j) {
    if (j == lead) continue;
    if (marginals[static_cast<std::size_t>(j)].mu > marginals[static_cast<std::size_t>(second)].mu)
      second = j;
  }
  for (int j = 0; j < registered; ++j) {
    const int opponent = j == lead ? second : lead;
    for (std::size_t i = 0; i < sample.stations.size(); ++i)
      per_stratum[i] = stratum_correlation(sample.stations[i], j, opponent, categories);
    const double rho = overall_correlation(per_stratum, weights);
    const CopulaSpec spec{rho, cfg.copula_draws,
                          replication_seed(cfg.seed, rep, seedtag::kCopulaBase + 16 + j)};
    out.copula.victory[static_cast<std::size_t>(j)] =
        victory_probability(marginals[static_cast<std::size_t>(j)].marginal,
                            marginals[static_cast<std::size_t>(opponent)].marginal,
                            gaussian_pair_sample(spec));
  }

  // Baseline pipeline on the same sample.
  std::vector<std::string> stratum_ids;
  stratum_ids.reserve(frame.strata.size());
  for (const Stratum& s : frame.strata) stratum_ids.push_back(s.id);
  const MnEstimate mn = mn_estimate(
      sample, weights, cfg.scale == Scale::Theta ? cfg.alpha : cfg.gamma, cfg.baseline_draws,
      replication_seed(cfg.seed, rep, seedtag::kBaseline), cfg.scale, &stratum_ids);
  out.baseline.point = mn.point;
  out.baseline.interval = mn.interval;
  out.baseline.victory = mn.victory;
  out.baseline.hit.resize(static_cast<std::size_t>(reported));
  for (int j = 0; j < reported; ++j) {
    const double official = cfg.scale == Scale::Theta
                                ? totals.theta[static_cast<std::size_t>(j)]
                                : totals.lambda[static_cast<std::size_t>(j)];
    out.baseline.hit[static_cast<std::size_t>(j)] =
        out.baseline.interval[static_cast<std::size_t>(j)].contains(official);
  }

  const std::vector<double> ratio = ratio_estimates(sample, frame);
  out.ratio_winner = 0;
  for (int j = 1; j < registered; ++j)
    if (ratio[static_cast<std::size_t>(j)] > ratio[static_cast<std::size_t>(out.ratio_winner)])
      out.ratio_winner = j;
  return out;
}

namespace detail {

// Static block partition over worker threads; outcomes land in a
// replication-indexed vector, so scheduling cannot affect the aggregate.
template <typename Fn>
void parallel_replications(long long replications, int workers, Fn&& fn) {
  if (workers <= 1) {
    for (long long rep = 0; rep < replications; ++rep) fn(rep);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const long long chunk = (replications + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const long long begin = static_cast<long long>(w) * chunk;
    const long long end = std::min(replications, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end]() {
      try {
        for (long long rep = begin; rep < end; ++rep) fn(rep);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

inline ElectionFrame study_frame(const StudyConfig& cfg) {
  return cfg.use_synthetic ? generate_frame(cfg.synthetic, cfg.frame_seed)
                           : parse_frame_file(cfg.frame_file);
}

inline std::vector<double> study_deltas(const StudyConfig& cfg, const ElectionFrame& frame,
                                        const Allocation& alloc,
                                        CalibrationResult* calibration_out = nullptr) {
  if (cfg.calibrate) {
    // Calibration always targets theta-scale coverage (the reference-table
    // convention); the resulting blends feed whichever scale the study
    // reports on.
    const CalibrationResult cal = calibrate_delta(frame, alloc, cfg.alpha,
                                                  cfg.calibration_replications, cfg.seed);
    if (calibration_out) *calibration_out = cal;
    return cal.delta;
  }
  require(!cfg.fixed_delta.empty(), "harness: delta values missing");
  if (cfg.fixed_delta.size() == 1)
    return std::vector<double>(static_cast<std::size_t>(frame.categories), cfg.fixed_delta[0]);
  require(static_cast<int>(cfg.fixed_delta.size()) == frame.categories,
          "harness: expected 1 or ", frame.categories, " delta values, got ",
          cfg.fixed_delta.size());
  return cfg.fixed_delta;
}

namespace detail {

inline EstimateReport study_impl(const StudyConfig& cfg, CalibrationResult* calibration_out) {
  const ElectionFrame frame = study_frame(cfg);
  require(frame.fully_counted(), "harness: simulation studies need a fully counted frame");
  const Allocation alloc = allocate_proportional(frame, cfg.sample_size);
  const OfficialTotals totals = official_totals(frame);
  const std::vector<double> delta = study_deltas(cfg, frame, alloc, calibration_out);

  std::vector<ReplicationOutcome> outcomes(static_cast<std::size_t>(cfg.replications));
  std::vector<std::string> failures(static_cast<std::size_t>(cfg.replications));
  detail::parallel_replications(cfg.replications, cfg.workers, [&](long long rep) {
    try {
      outcomes[static_cast<std::size_t>(rep)] =
          run_replication(frame, totals, alloc, delta, cfg, rep);
    } catch (const Error& e) {
      failures[static_cast<std::size_t>(rep)] = e.what();
    }
  });
  for (long long rep = 0; rep < cfg.replications; ++rep)
    require(failures[static_cast<std::size_t>(rep)].empty(), "harness: replication ", rep,
            " failed: ", failures[static_cast<std::size_t>(rep)]);

  const int categories = frame.categories;
  const int registered = frame.registered_candidates();
  const int reported = cfg.scale == Scale::Lambda ? categories - 1 : categories;
  const double r = static_cast<double>(cfg.replications);

  EstimateReport report;
  report.scale = cfg.scale == Scale::Theta ? "theta" : "lambda";
  report.alpha = cfg.alpha;
  report.gamma = cfg.gamma;
  report.replications = cfg.replications;
  report.copula_draws = cfg.copula_draws;
  report.baseline_draws = cfg.baseline_draws;
  report.seed = cfg.seed;
  report.categories = categories;
  report.candidates.resize(static_cast<std::size_t>(reported));
  for (int j = 0; j < reported; ++j) {
    CandidateReport& row = report.candidates[static_cast<std::size_t>(j)];
    row.candidate = j + 1;
    row.role = category_role(j + 1, categories);
    row.official_theta = totals.theta[static_cast<std::size_t>(j)];
    row.official_lambda =
        j < categories - 1 ? totals.lambda[static_cast<std::size_t>(j)] : kNaN;
    row.delta = delta[static_cast<std::size_t>(j)];
    if (j < registered) row.ratio_win_rate = 0.0;
    for (ModelSummary* m : {&row.copula, &row.baseline}) {
      m->point = 0.0;
      m->lo = 0.0;
      m->hi = 0.0;
      m->length = 0.0;
      m->coverage = 0.0;
      m->victory = j < registered ? 0.0 : kNaN;
    }
  }
  for (const ReplicationOutcome& outcome : outcomes) {
    for (int j = 0; j < reported; ++j) {
      CandidateReport& row = report.candidates[static_cast<std::size_t>(j)];
      const ModelOutcome* models[2] = {&outcome.copula, &outcome.baseline};
      ModelSummary* summaries[2] = {&row.copula, &row.baseline};
      for (int m = 0; m < 2; ++m) {
        summaries[m]->point += models[m]->point[static_cast<std::size_t>(j)] / r;
        summaries[m]->lo += models[m]->interval[static_cast<std::size_t>(j)].lo / r;
        summaries[m]->hi += models[m]->interval[static_cast<std::size_t>(j)].hi / r;
        summaries[m]->length += models[m]->interval[static_cast<std::size_t>(j)].length() / r;
        summaries[m]->coverage += models[m]->hit[static_cast<std::size_t>(j)] ? 1.0 / r : 0.0;
        if (j < registered)
          summaries[m]->victory += models[m]->victory[static_cast<std::size_t>(j)] / r;
      }
      if (j == outcome.ratio_winner) row.ratio_win_rate += 1.0 / r;
    }
  }
  return report;
}

}  // namespace detail

/// Full simulation study. Deterministic for a given config: replications own
/// derived seed streams and the aggregation is order-independent, so the
/// worker count cannot change any reported number.
inline EstimateReport simulation_study(const StudyConfig& cfg,
                                       CalibrationResult* calibration_out = nullptr) {
  cfg.validate();
  return detail::study_impl(cfg, calibration_out);
}

/// One sample draw pushed through both models: a single-replication report
/// whose coverage column records the one hit/miss.
inline EstimateReport single_estimate(StudyConfig cfg) {
  require(cfg.sample_size > 0, "harness: sample_size must be positive");
  require(cfg.alpha > 0.0 && cfg.alpha < 1.0 && cfg.gamma > 0.0 && cfg.gamma < 1.0,
          "harness: probability levels must lie in (0,1)");
  cfg.replications = 1;
  cfg.workers = 1;
  return detail::study_impl(cfg, nullptr);
}

}  // namespace quickcount

#endif
