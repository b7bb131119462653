#ifndef QUICKCOUNT_BASELINE_HPP
#define QUICKCOUNT_BASELINE_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "quickcount/copula.hpp"
#include "quickcount/mathfn.hpp"
#include "quickcount/sampling.hpp"

// The Mendoza/Nieto-Barajas Normal-Gamma comparison baseline: per stratum
// and candidate, a truncated-normal location with gamma-distributed
// precision fitted from the sampled stations, simulated independently
// across strata and candidates and aggregated to overall shares.

namespace quickcount {

/// Posterior for one (stratum, candidate): theta | tau ~ Normal(location,
/// precision tau * voters) truncated to (0,1), tau ~ Gamma(shape, rate).
struct NormalGammaPosterior {
  double location = 0.0;      // sum x / sum n
  double gamma_shape = 0.0;   // (c_i - 1) / 2
  double gamma_rate = 0.0;    // (sum x^2/n - (sum x)^2 / sum n) / 2
  double voters = 0.0;        // sum n, scales the normal precision
};

/// Fit the baseline posterior. Proper only when the stratum sample has at
/// least two stations and the observed counts are not an exact multiple of
/// station sizes (which would zero the gamma rate).
inline NormalGammaPosterior mn_fit(std::span<const Station> stations, int candidate,
                                   int categories, const std::string& stratum_id = "") {
  require(stations.size() >= 2, "baseline: stratum ", stratum_id, " sampled ", stations.size(),
          " stations; the Normal-Gamma posterior needs at least 2");
  double sum_x = 0.0;
  double sum_n = 0.0;
  double sum_x2_over_n = 0.0;
  for (const Station& st : stations) {
    require(st.counted(), "baseline: station ", st.id, " has no vote counts");
    const double x = static_cast<double>(st.count(candidate, categories));
    const double n = static_cast<double>(st.voters);
    sum_x += x;
    sum_n += n;
    sum_x2_over_n += x * x / n;
  }
  NormalGammaPosterior post;
  post.location = sum_x / sum_n;
  post.gamma_shape = 0.5 * (static_cast<double>(stations.size()) - 1.0);
  post.gamma_rate = 0.5 * (sum_x2_over_n - sum_x * sum_x / sum_n);
  post.voters = sum_n;
  require(post.gamma_rate > 0.0, "baseline: degenerate within-stratum variance for candidate ",
          candidate + 1, " in stratum ", stratum_id,
          " (gamma rate is zero; the posterior is improper)");
  return post;
}

/// T posterior draws of theta_ij: tau from the gamma, then the truncated
/// normal by inverse CDF on (0,1).
inline std::vector<double> mn_posterior_draw(const NormalGammaPosterior& post, long long draws,
                                             std::uint64_t seed) {
  Engine eng = make_engine(seed);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(draws));
  for (long long t = 0; t < draws; ++t) {
    const double tau = draw_gamma(eng, post.gamma_shape) / post.gamma_rate;
    const double sd = 1.0 / std::sqrt(tau * post.voters);
    out.push_back(draw_truncated_normal(eng, post.location, sd, 0.0, 1.0));
  }
  return out;
}

enum class Scale { Theta, Lambda };

/// Baseline estimate for one sample draw: per-candidate point estimates,
/// minimal-length intervals (shared routine with the copula engine so length
/// comparisons isolate the models), and victory probabilities as the
/// fraction of joint draws where each registered candidate is maximal.
struct MnEstimate {
  Scale scale = Scale::Lambda;
  std::vector<double> point;                 // per candidate (J, or J-1 on lambda scale)
  std::vector<Interval> interval;
  std::vector<double> victory;               // registered candidates only
};

inline MnEstimate mn_estimate(const SampleDraw& sample, std::span<const double> weights,
                              double level, long long draws, std::uint64_t seed, Scale scale,
                              const std::vector<std::string>* stratum_ids = nullptr) {
  const int categories = sample.categories;
  const int strata = sample.stratum_count();
  require(static_cast<int>(weights.size()) == strata, "baseline: weight/stratum mismatch");

  // theta_draws[j][t] aggregates sum_i w_i theta_ij^(t); strata and
  // candidates are simulated independently, which is the model's structural
  // independence assumption.
  std::vector<std::vector<double>> theta_draws(
      static_cast<std::size_t>(categories),
      std::vector<double>(static_cast<std::size_t>(draws), 0.0));
  for (int i = 0; i < strata; ++i) {
    const std::string id = stratum_ids ? (*stratum_ids)[static_cast<std::size_t>(i)]
                                       : std::to_string(i + 1);
    for (int j = 0; j < categories; ++j) {
      const NormalGammaPosterior post =
          mn_fit(sample.stations[static_cast<std::size_t>(i)], j, categories, id);
      Engine eng = make_engine(seed, static_cast<std::uint64_t>(i) * 1000003ULL +
                                         static_cast<std::uint64_t>(j));
      const double w = weights[static_cast<std::size_t>(i)];
      for (long long t = 0; t < draws; ++t) {
        const double tau = draw_gamma(eng, post.gamma_shape) / post.gamma_rate;
        const double sd = 1.0 / std::sqrt(tau * post.voters);
        theta_draws[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)] +=
            w * draw_truncated_normal(eng, post.location, sd, 0.0, 1.0);
      }
    }
  }

  MnEstimate est;
  est.scale = scale;
  const int reported = scale == Scale::Lambda ? categories - 1 : categories;
  est.point.resize(static_cast<std::size_t>(reported));
  est.interval.resize(static_cast<std::size_t>(reported));

  const std::vector<double>& abstention = theta_draws[static_cast<std::size_t>(categories - 1)];
  for (int j = 0; j < reported; ++j) {
    std::vector<double> values(static_cast<std::size_t>(draws));
    for (long long t = 0; t < draws; ++t) {
      const double theta = theta_draws[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)];
      values[static_cast<std::size_t>(t)] =
          scale == Scale::Lambda
              ? std::min(theta / (1.0 - abstention[static_cast<std::size_t>(t)]), 1.0)
              : theta;
    }
    double mean = 0.0;
    for (const double v : values) mean += v;
    est.point[static_cast<std::size_t>(j)] = mean / static_cast<double>(draws);
    est.interval[static_cast<std::size_t>(j)] = minimal_length_interval(std::move(values), level);
  }

  const int registered = categories - 3;
  est.victory.assign(static_cast<std::size_t>(registered), 0.0);
  for (long long t = 0; t < draws; ++t) {
    int winner = 0;
    for (int j = 1; j < registered; ++j) {
      if (theta_draws[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)] >
          theta_draws[static_cast<std::size_t>(winner)][static_cast<std::size_t>(t)])
        winner = j;
    }
    est.victory[static_cast<std::size_t>(winner)] += 1.0;
  }
  for (double& v : est.victory) v /= static_cast<double>(draws);
  return est;
}

}  // namespace quickcount

#endif
