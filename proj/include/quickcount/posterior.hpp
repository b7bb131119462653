#ifndef QUICKCOUNT_POSTERIOR_HPP
#define QUICKCOUNT_POSTERIOR_HPP

#include <cmath>
#include <span>
#include <vector>

#include "quickcount/mathfn.hpp"
#include "quickcount/sampling.hpp"

// Per-stratum Beta posteriors for vote shares and their aggregation into
// overall means, the independence/maximal-covariance standard deviation
// bounds, delta-blended deviations, and moment-matched overall marginals.

namespace quickcount {

/// Beta(alpha, beta) posterior for one (stratum, candidate) share under the
/// noninformative conjugate prior Beta(1/2, 1/2).
struct BetaPosterior {
  double alpha = 0.5;
  double beta = 0.5;

  double mean() const { return alpha / (alpha + beta); }
  double variance() const {
    const double s = alpha + beta;
    return alpha * beta / (s * s * (s + 1.0));
  }
  double sd() const { return std::sqrt(variance()); }
};

inline BetaPosterior stratum_posterior(std::span<const Station> stations, int candidate,
                                       int categories) {
  require(!stations.empty(), "posterior: no stations in stratum sample");
  long long votes = 0;
  long long voters = 0;
  for (const Station& st : stations) {
    require(st.counted(), "posterior: station ", st.id, " has no vote counts");
    votes += st.count(candidate, categories);
    voters += st.voters;
  }
  return BetaPosterior{0.5 + static_cast<double>(votes),
                       0.5 + static_cast<double>(voters - votes)};
}

/// All (stratum, candidate) posteriors of one sample draw.
struct PosteriorTable {
  int categories = 0;
  std::vector<std::vector<BetaPosterior>> cells;  // [stratum][candidate]

  int stratum_count() const { return static_cast<int>(cells.size()); }
  const BetaPosterior& at(int stratum, int candidate) const {
    return cells[static_cast<std::size_t>(stratum)][static_cast<std::size_t>(candidate)];
  }
};

inline PosteriorTable fit_posteriors(const SampleDraw& sample) {
  PosteriorTable table;
  table.categories = sample.categories;
  table.cells.resize(sample.stations.size());
  for (std::size_t i = 0; i < sample.stations.size(); ++i) {
    table.cells[i].reserve(static_cast<std::size_t>(sample.categories));
    for (int j = 0; j < sample.categories; ++j)
      table.cells[i].push_back(stratum_posterior(sample.stations[i], j, sample.categories));
  }
  return table;
}

namespace detail {
inline void check_weights(const PosteriorTable& table, std::span<const double> weights) {
  require(static_cast<int>(weights.size()) == table.stratum_count(),
          "posterior: weight vector covers ", weights.size(), " strata, posterior table has ",
          table.stratum_count());
  double sum = 0.0;
  for (const double w : weights) {
    require(w > 0.0, "posterior: stratum weights must be positive");
    sum += w;
  }
  require(std::fabs(sum - 1.0) <= 1e-12, "posterior: stratum weights sum to ", sum, ", not 1");
}
}  // namespace detail

/// mu_j = sum_i (n_i/n) mu_ij; the mean aggregates linearly no matter how
/// the strata depend on each other.
inline double overall_mean(const PosteriorTable& table, int candidate,
                           std::span<const double> weights) {
  detail::check_weights(table, weights);
  double mu = 0.0;
  for (int i = 0; i < table.stratum_count(); ++i)
    mu += weights[static_cast<std::size_t>(i)] * table.at(i, candidate).mean();
  return mu;
}

struct SigmaBounds {
  double perp = 0.0;  // independent strata
  double star = 0.0;  // maximal pairwise covariances (Cauchy-Schwarz)
};

inline SigmaBounds sigma_bounds(const PosteriorTable& table, int candidate,
                                std::span<const double> weights) {
  detail::check_weights(table, weights);
  double sum_sq = 0.0;
  double sum_sd = 0.0;
  for (int i = 0; i < table.stratum_count(); ++i) {
    const double w = weights[static_cast<std::size_t>(i)];
    const double var = table.at(i, candidate).variance();
    sum_sq += w * w * var;
    sum_sd += w * std::sqrt(var);
  }
  return SigmaBounds{std::sqrt(sum_sq), sum_sd};
}

inline double blended_sigma(double sigma_perp, double sigma_star, double delta) {
  require(delta >= 0.0 && delta <= 1.0, "posterior: delta must lie in [0,1], got ", delta);
  return (1.0 - delta) * sigma_perp + delta * sigma_star;
}

/// Overall marginal for one candidate: mean, deviation bounds, blended
/// deviation, and the moment-matched Beta approximation of F_j.
struct MarginalSummary {
  double mu = 0.0;
  double sigma_perp = 0.0;
  double sigma_star = 0.0;
  double delta = 0.0;
  double sigma = 0.0;
  BetaDist marginal;
};

inline MarginalSummary make_marginal(const PosteriorTable& table, int candidate,
                                     std::span<const double> weights, double delta) {
  MarginalSummary m;
  m.mu = overall_mean(table, candidate, weights);
  const SigmaBounds bounds = sigma_bounds(table, candidate, weights);
  m.sigma_perp = bounds.perp;
  m.sigma_star = bounds.star;
  m.delta = delta;
  m.sigma = blended_sigma(bounds.perp, bounds.star, delta);
  // beta_from_moments rejects sigma^2 >= mu(1-mu); a pathological blend must
  // surface instead of being clamped into a quietly wrong marginal.
  m.marginal = beta_from_moments(m.mu, m.sigma * m.sigma);
  return m;
}

/// Equal-tailed probability-alpha interval on the Beta marginal.
inline Interval theta_interval(const BetaDist& marginal, double alpha) {
  require(alpha > 0.0 && alpha < 1.0, "posterior: interval level must lie in (0,1), got ", alpha);
  return Interval{marginal.quantile(0.5 * (1.0 - alpha)), marginal.quantile(0.5 * (1.0 + alpha))};
}

}  // namespace quickcount

#endif
