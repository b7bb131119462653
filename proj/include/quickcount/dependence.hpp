#ifndef QUICKCOUNT_DEPENDENCE_HPP
#define QUICKCOUNT_DEPENDENCE_HPP

#include <cmath>
#include <span>
#include <vector>

#include "quickcount/mathfn.hpp"
#include "quickcount/sampling.hpp"

// Cross-candidate dependence. Within a stratum, the sampled stations give
// paired share observations (theta_ij, theta_il); their Pearson correlation
// is aggregated across strata with weights n_i/n. Covariances are never
// formed: the correlation is the quantity the copula consumes.

namespace quickcount {

/// Symmetric J x J matrix of overall candidate-pair correlations.
struct DependenceMatrix {
  int categories = 0;
  std::vector<double> values;  // row-major J x J

  double at(int j, int l) const {
    return values[static_cast<std::size_t>(j) * static_cast<std::size_t>(categories) +
                  static_cast<std::size_t>(l)];
  }
  double& at(int j, int l) {
    return values[static_cast<std::size_t>(j) * static_cast<std::size_t>(categories) +
                  static_cast<std::size_t>(l)];
  }
};

/// Station-level share series for one candidate within one stratum sample.
inline std::vector<double> station_shares(std::span<const Station> stations, int candidate,
                                          int categories) {
  std::vector<double> shares;
  shares.reserve(stations.size());
  for (const Station& st : stations)
    shares.push_back(static_cast<double>(st.count(candidate, categories)) /
                     static_cast<double>(st.voters));
  return shares;
}

/// Sample Pearson correlation of two candidates' station shares in one
/// stratum. Fewer than two stations or a constant series gives 0.
inline double stratum_correlation(std::span<const Station> stations, int candidate_j,
                                  int candidate_l, int categories) {
  if (stations.size() < 2) return 0.0;
  const std::vector<double> x = station_shares(stations, candidate_j, categories);
  const std::vector<double> y = station_shares(stations, candidate_l, categories);
  return pearson(x, y);
}

/// rho_jl = sum_i (n_i/n) corr(Theta_ij, Theta_il). Degenerate strata enter
/// as 0 so the weights keep summing to one.
inline double overall_correlation(std::span<const double> stratum_corr,
                                  std::span<const double> weights) {
  require(stratum_corr.size() == weights.size(), "dependence: correlation/weight size mismatch");
  double sum_w = 0.0;
  double rho = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    require(std::fabs(stratum_corr[i]) <= 1.0 + 1e-12, "dependence: stratum correlation ",
            stratum_corr[i], " outside [-1,1]");
    rho += weights[i] * stratum_corr[i];
    sum_w += weights[i];
  }
  require(std::fabs(sum_w - 1.0) <= 1e-12, "dependence: weights sum to ", sum_w, ", not 1");
  require(std::fabs(rho) <= 1.0 + 1e-12, "dependence: aggregated correlation ", rho,
          " outside [-1,1]");
  return std::clamp(rho, -1.0, 1.0);
}

inline DependenceMatrix estimate_dependence(const SampleDraw& sample,
                                            std::span<const double> weights) {
  const int j_total = sample.categories;
  DependenceMatrix dep;
  dep.categories = j_total;
  dep.values.assign(static_cast<std::size_t>(j_total) * static_cast<std::size_t>(j_total), 0.0);
  for (int j = 0; j < j_total; ++j) dep.at(j, j) = 1.0;
  std::vector<double> per_stratum(sample.stations.size());
  for (int j = 0; j < j_total; ++j) {
    for (int l = j + 1; l < j_total; ++l) {
      for (std::size_t i = 0; i < sample.stations.size(); ++i)
        per_stratum[i] = stratum_correlation(sample.stations[i], j, l, j_total);
      const double rho = overall_correlation(per_stratum, weights);
      dep.at(j, l) = rho;
      dep.at(l, j) = rho;
    }
  }
  return dep;
}

}  // namespace quickcount

#endif
