#ifndef QUICKCOUNT_CALIBRATION_HPP
#define QUICKCOUNT_CALIBRATION_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "quickcount/baseline.hpp"
#include "quickcount/copula.hpp"
#include "quickcount/dependence.hpp"
#include "quickcount/posterior.hpp"

// Calibration of the per-candidate blend parameter delta: simulate repeated
// stratified samples from a fully counted reference frame and pick, on a
// fixed grid, the smallest delta whose blended intervals reach the target
// coverage. Common random numbers across delta values make the coverage
// curve monotone, so a bisection search on the grid is sound.

namespace quickcount {

namespace seedtag {
inline constexpr int kSample = 0;
inline constexpr int kBaseline = 1;
inline constexpr int kCopulaBase = 8;  // + candidate index
}  // namespace seedtag

/// Substream id for replication `rep`; every replication owns its own seed
/// space so execution order and worker count cannot change results.
inline std::uint64_t replication_seed(std::uint64_t master, long long rep, int tag) {
  require(tag >= 0 && tag < 64, "calibration: seed tag out of range");
  return derive_seed(master, static_cast<std::uint64_t>(rep) * 64ULL +
                                 static_cast<std::uint64_t>(tag));
}

/// Sufficient statistics of one replication, cached so that coverage can be
/// re-evaluated across the whole delta grid without redrawing samples.
struct ReplicationStats {
  std::vector<std::array<double, 3>> stat;  // per candidate: mu, sigma_perp, sigma_star
  std::vector<double> rho_abstention;       // per candidate: rho_{j,J}
};

inline ReplicationStats replication_stats(const ElectionFrame& frame, const Allocation& alloc,
                                          std::uint64_t master, long long rep) {
  const SampleDraw sample =
      draw_sample(frame, alloc, replication_seed(master, rep, seedtag::kSample));
  const PosteriorTable table = fit_posteriors(sample);
  const std::vector<double> weights = frame.weights();
  ReplicationStats out;
  out.stat.resize(static_cast<std::size_t>(frame.categories));
  out.rho_abstention.resize(static_cast<std::size_t>(frame.categories), 1.0);
  const int abstention = frame.categories - 1;
  std::vector<double> per_stratum(sample.stations.size());
  for (int j = 0; j < frame.categories; ++j) {
    const double mu = overall_mean(table, j, weights);
    const SigmaBounds bounds = sigma_bounds(table, j, weights);
    out.stat[static_cast<std::size_t>(j)] = {mu, bounds.perp, bounds.star};
    if (j != abstention) {
      for (std::size_t i = 0; i < sample.stations.size(); ++i)
        per_stratum[i] = stratum_correlation(sample.stations[i], j, abstention, frame.categories);
      out.rho_abstention[static_cast<std::size_t>(j)] =
          overall_correlation(per_stratum, weights);
    }
  }
  return out;
}

inline std::vector<ReplicationStats> collect_replication_stats(const ElectionFrame& frame,
                                                               const Allocation& alloc,
                                                               long long replications,
                                                               std::uint64_t master) {
  std::vector<ReplicationStats> all;
  all.reserve(static_cast<std::size_t>(replications));
  for (long long rep = 0; rep < replications; ++rep) {
    try {
      all.push_back(replication_stats(frame, alloc, master, rep));
    } catch (const Error& e) {
      fail("calibration: replication ", rep, " failed: ", e.what());
    }
  }
  return all;
}

namespace detail {

inline Interval blended_theta_interval(const std::array<double, 3>& stat, double delta,
                                       double alpha) {
  const double sigma = blended_sigma(stat[1], stat[2], delta);
  return theta_interval(beta_from_moments(stat[0], sigma * sigma), alpha);
}

// Coverage of the delta-blended theta interval for one candidate over the
// cached replication batch.
inline double theta_coverage(const std::vector<ReplicationStats>& stats, int candidate,
                             double delta, double alpha, double official_theta) {
  long long hits = 0;
  for (const ReplicationStats& rep : stats) {
    const Interval iv =
        blended_theta_interval(rep.stat[static_cast<std::size_t>(candidate)], delta, alpha);
    hits += iv.contains(official_theta) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(stats.size());
}

// Lambda-scale analog: per replication, rebuild the candidate and abstention
// marginals at the blend under test, push a shared copula pair sample
// through Algorithm 3, and check the minimal-length window.
inline double lambda_coverage(const std::vector<ReplicationStats>& stats, int candidate,
                              int abstention, double delta, double delta_abstention,
                              double alpha, double official_lambda, long long draws,
                              std::uint64_t master) {
  long long hits = 0;
  for (long long rep = 0; rep < static_cast<long long>(stats.size()); ++rep) {
    const ReplicationStats& r = stats[static_cast<std::size_t>(rep)];
    const std::array<double, 3>& sj = r.stat[static_cast<std::size_t>(candidate)];
    const std::array<double, 3>& sa = r.stat[static_cast<std::size_t>(abstention)];
    const double sigma_j = blended_sigma(sj[1], sj[2], delta);
    const double sigma_a = blended_sigma(sa[1], sa[2], delta_abstention);
    const BetaDist f_j = beta_from_moments(sj[0], sigma_j * sigma_j);
    const BetaDist f_a = beta_from_moments(sa[0], sigma_a * sigma_a);
    const CopulaSpec spec{r.rho_abstention[static_cast<std::size_t>(candidate)], draws,
                          replication_seed(master, rep, seedtag::kCopulaBase + candidate)};
    const LambdaSample lam = lambda_samples(f_j, f_a, gaussian_pair_sample(spec));
    const Interval iv = minimal_length_interval(lam.values, alpha);
    hits += iv.contains(official_lambda) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(stats.size());
}

}  // namespace detail

/// Coverage of delta-blended intervals (one delta per category) against the
/// frame's official totals, over R seeded replications.
inline std::vector<double> coverage_rate(const ElectionFrame& frame, const Allocation& alloc,
                                         const std::vector<double>& delta, double alpha,
                                         long long replications, std::uint64_t master,
                                         Scale scale = Scale::Theta, long long draws = 2000) {
  require(frame.fully_counted(), "calibration: the reference frame must be fully counted");
  require(replications >= 100, "calibration: at least 100 replications required, got ",
          replications);
  require(static_cast<int>(delta.size()) == frame.categories,
          "calibration: delta vector must have one entry per category");
  const OfficialTotals totals = official_totals(frame);
  const std::vector<ReplicationStats> stats =
      collect_replication_stats(frame, alloc, replications, master);
  const int reported = scale == Scale::Lambda ? frame.categories - 1 : frame.categories;
  std::vector<double> coverage(static_cast<std::size_t>(frame.categories), 0.0);
  for (int j = 0; j < reported; ++j) {
    coverage[static_cast<std::size_t>(j)] =
        scale == Scale::Theta
            ? detail::theta_coverage(stats, j, delta[static_cast<std::size_t>(j)], alpha,
                                     totals.theta[static_cast<std::size_t>(j)])
            : detail::lambda_coverage(stats, j, frame.categories - 1,
                                      delta[static_cast<std::size_t>(j)], delta.back(), alpha,
                                      totals.lambda[static_cast<std::size_t>(j)], draws, master);
  }
  if (scale == Scale::Lambda)
    coverage.back() = detail::theta_coverage(stats, frame.categories - 1, delta.back(), alpha,
                                             totals.theta.back());
  return coverage;
}

struct CalibrationResult {
  double alpha = 0.95;
  long long replications = 0;
  std::uint64_t seed = 0;
  double tolerance = 1.0 / 64.0;
  Scale scale = Scale::Theta;
  std::vector<double> delta;       // per category
  std::vector<double> coverage;    // achieved at the chosen delta
  std::vector<bool> below_target;  // true when even delta = 1 misses alpha
};

/// Algorithm 1: per candidate, the smallest grid delta whose blended
/// interval covers the official value in at least a fraction alpha of the
/// replications. The abstention category is always calibrated on the theta
/// scale; on the lambda scale it only enters through the transform.
inline CalibrationResult calibrate_delta(const ElectionFrame& frame, const Allocation& alloc,
                                         double alpha, long long replications,
                                         std::uint64_t master, double tolerance = 1.0 / 64.0,
                                         Scale scale = Scale::Theta, long long draws = 2000) {
  require(frame.fully_counted(), "calibration: the reference frame must be fully counted");
  require(replications >= 100, "calibration: at least 100 replications required");
  require(tolerance > 0.0 && tolerance <= 0.5, "calibration: bad grid tolerance ", tolerance);
  require(alpha > 0.0 && alpha < 1.0, "calibration: target level must lie in (0,1)");

  const OfficialTotals totals = official_totals(frame);
  const std::vector<ReplicationStats> stats =
      collect_replication_stats(frame, alloc, replications, master);
  const int grid = static_cast<int>(std::lround(1.0 / tolerance));

  CalibrationResult result;
  result.alpha = alpha;
  result.replications = replications;
  result.seed = master;
  result.tolerance = tolerance;
  result.scale = scale;
  result.delta.assign(static_cast<std::size_t>(frame.categories), 0.0);
  result.coverage.assign(static_cast<std::size_t>(frame.categories), 0.0);
  result.below_target.assign(static_cast<std::size_t>(frame.categories), false);

  // Theta-scale search: bisection on the grid, justified by pointwise
  // interval nesting under common random numbers. Evaluated points are
  // checked for monotonicity.
  const auto search_theta = [&](int candidate) {
    const double official = totals.theta[static_cast<std::size_t>(candidate)];
    std::map<int, double> evaluated;
    const auto eval = [&](int k) {
      const auto it = evaluated.find(k);
      if (it != evaluated.end()) return it->second;
      const double cov = detail::theta_coverage(
          stats, candidate, static_cast<double>(k) / grid, alpha, official);
      evaluated.emplace(k, cov);
      return cov;
    };
    int chosen;
    if (eval(0) >= alpha) {
      chosen = 0;
    } else if (eval(grid) < alpha) {
      chosen = grid;
      result.below_target[static_cast<std::size_t>(candidate)] = true;
    } else {
      int lo = 0;
      int hi = grid;  // coverage(hi) >= alpha, coverage(lo) < alpha
      while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        (eval(mid) >= alpha ? hi : lo) = mid;
      }
      chosen = hi;
    }
    double prev = -1.0;
    for (const auto& [k, cov] : evaluated) {
      require(cov >= prev - 1e-12, "calibration: coverage not monotone in delta for candidate ",
              candidate + 1, " (grid point ", k, ")");
      prev = cov;
    }
    result.delta[static_cast<std::size_t>(candidate)] = static_cast<double>(chosen) / grid;
    result.coverage[static_cast<std::size_t>(candidate)] = evaluated.at(chosen);
  };

  search_theta(frame.categories - 1);  // abstention first; lambda mode reuses its delta

  for (int j = 0; j < frame.categories - 1; ++j) {
    if (scale == Scale::Theta) {
      search_theta(j);
      continue;
    }
    // Lambda scale: minimal-length windows are not pointwise nested, so walk
    // the grid from zero and stop at the first covering delta.
    const double official = totals.lambda[static_cast<std::size_t>(j)];
    const double delta_abs = result.delta[static_cast<std::size_t>(frame.categories - 1)];
    bool found = false;
    double cov = 0.0;
    for (int k = 0; k <= grid; ++k) {
      cov = detail::lambda_coverage(stats, j, frame.categories - 1,
                                    static_cast<double>(k) / grid, delta_abs, alpha, official,
                                    draws, master);
      if (cov >= alpha) {
        result.delta[static_cast<std::size_t>(j)] = static_cast<double>(k) / grid;
        result.coverage[static_cast<std::size_t>(j)] = cov;
        found = true;
        break;
      }
    }
    if (!found) {
      result.delta[static_cast<std::size_t>(j)] = 1.0;
      result.coverage[static_cast<std::size_t>(j)] = cov;
      result.below_target[static_cast<std::size_t>(j)] = true;
    }
  }
  return result;
}

}  // namespace quickcount

#endif
