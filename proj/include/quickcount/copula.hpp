#ifndef QUICKCOUNT_COPULA_HPP
#define QUICKCOUNT_COPULA_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "quickcount/mathfn.hpp"
#include "quickcount/rng.hpp"

// Bivariate Gaussian-copula Monte Carlo: uniform pair sampling, marginal
// quantile transforms, pairwise victory probabilities, effective-vote-share
// draws, and the minimal-length interval over sorted samples.

namespace quickcount {

struct CopulaSpec {
  double rho = 0.0;
  long long draws = 10000;
  std::uint64_t seed = 0;

  void validate() const {
    require(rho >= -1.0 && rho <= 1.0, "copula: rho must lie in [-1,1], got ", rho);
    require(draws >= 1000, "copula: at least 1000 draws required, got ", draws);
  }
};

struct PairSample {
  std::vector<double> u;
  std::vector<double> v;

  std::size_t size() const { return u.size(); }
  PairSample mirrored() const { return PairSample{v, u}; }
};

/// m pairs (u,v) in (0,1)^2 from the Gaussian copula with parameter rho:
/// z2' = rho z1 + sqrt(1-rho^2) z2 and (u,v) = (Phi(z1), Phi(z2')).
/// rho = +1/-1 short-circuit to the comonotone/countermonotone pairs since
/// the mixing weight sqrt(1-rho^2) degenerates there.
inline PairSample gaussian_pair_sample(const CopulaSpec& spec) {
  spec.validate();
  PairSample pairs;
  pairs.u.resize(static_cast<std::size_t>(spec.draws));
  pairs.v.resize(static_cast<std::size_t>(spec.draws));
  Engine eng = make_engine(spec.seed);
  if (spec.rho == 1.0 || spec.rho == -1.0) {
    for (long long t = 0; t < spec.draws; ++t) {
      const double u = uniform01(eng);
      pairs.u[static_cast<std::size_t>(t)] = u;
      pairs.v[static_cast<std::size_t>(t)] = spec.rho > 0.0 ? u : 1.0 - u;
    }
    return pairs;
  }
  const double mix = std::sqrt(1.0 - spec.rho * spec.rho);
  for (long long t = 0; t < spec.draws; ++t) {
    const double z1 = draw_normal(eng);
    const double z2 = spec.rho * z1 + mix * draw_normal(eng);
    pairs.u[static_cast<std::size_t>(t)] = normal_cdf(z1);
    pairs.v[static_cast<std::size_t>(t)] = normal_cdf(z2);
  }
  return pairs;
}

/// Marginal quantile transform, Algorithm 2 step 2.
inline double beta_quantile(const BetaDist& marginal, double u) { return marginal.quantile(u); }

/// P(Theta_j > Theta_l) estimated on an existing pair sample. Mirroring the
/// pairs swaps the roles exactly, so the two directions sum to one up to
/// ties (which continuous marginals hit with probability zero).
inline double victory_probability(const BetaDist& f_j, const BetaDist& f_l,
                                  const PairSample& pairs) {
  require(pairs.size() > 0, "copula: empty pair sample");
  const std::vector<double> x = f_j.quantiles(pairs.u);
  const std::vector<double> y = f_l.quantiles(pairs.v);
  long long wins = 0;
  for (std::size_t t = 0; t < pairs.size(); ++t) wins += x[t] > y[t] ? 1 : 0;
  return static_cast<double>(wins) / static_cast<double>(pairs.size());
}

inline double victory_probability(const BetaDist& f_j, const BetaDist& f_l, double rho,
                                  long long draws, std::uint64_t seed) {
  return victory_probability(f_j, f_l, gaussian_pair_sample(CopulaSpec{rho, draws, seed}));
}

/// Effective-vote-share draws lambda = theta_j / (1 - theta_J) under the
/// bivariate copula of (Theta_j, Theta_J). The pairwise model cannot see the
/// simplex, so draws above one are clipped and counted; more than 0.1%
/// clipping means the marginals are incoherent and raises an error.
struct LambdaSample {
  std::vector<double> values;
  long long clipped = 0;
};

inline LambdaSample lambda_samples(const BetaDist& f_j, const BetaDist& f_abstention,
                                   const PairSample& pairs) {
  require(pairs.size() > 0, "copula: empty pair sample");
  LambdaSample out;
  out.values.reserve(pairs.size());
  const std::vector<double> theta_j = f_j.quantiles(pairs.u);
  const std::vector<double> theta_abs = f_abstention.quantiles(pairs.v);
  for (std::size_t t = 0; t < pairs.size(); ++t) {
    double lambda = theta_j[t] / (1.0 - theta_abs[t]);
    if (lambda > 1.0) {
      lambda = 1.0;
      ++out.clipped;
    }
    out.values.push_back(lambda);
  }
  require(static_cast<double>(out.clipped) <= 1e-3 * static_cast<double>(pairs.size()),
          "copula: ", out.clipped, " of ", pairs.size(),
          " effective-share draws exceeded 1; marginals incoherent");
  return out;
}

inline LambdaSample lambda_samples(const BetaDist& f_j, const BetaDist& f_abstention, double rho,
                                   long long draws, std::uint64_t seed) {
  return lambda_samples(f_j, f_abstention, gaussian_pair_sample(CopulaSpec{rho, draws, seed}));
}

/// Shortest window covering ceil(gamma*m) sorted draws; ties resolved to the
/// leftmost window.
inline Interval minimal_length_interval(std::vector<double> samples, double gamma) {
  require(!samples.empty(), "copula: minimal-length interval needs samples");
  require(gamma > 0.0 && gamma < 1.0, "copula: window level must lie in (0,1), got ", gamma);
  std::sort(samples.begin(), samples.end());
  const long long m = static_cast<long long>(samples.size());
  const long long k =
      std::clamp(static_cast<long long>(std::ceil(gamma * static_cast<double>(m) - 1e-9)),
                 1LL, m);
  std::size_t best = 0;
  double best_width = samples[static_cast<std::size_t>(k - 1)] - samples[0];
  for (std::size_t i = 1; i + static_cast<std::size_t>(k) <= samples.size(); ++i) {
    const double width = samples[i + static_cast<std::size_t>(k) - 1] - samples[i];
    if (width < best_width) {
      best_width = width;
      best = i;
    }
  }
  return Interval{samples[best], samples[best + static_cast<std::size_t>(k) - 1]};
}

}  // namespace quickcount

#endif
