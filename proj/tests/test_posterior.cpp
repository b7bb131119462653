#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "quickcount/posterior.hpp"
#include "test_support.hpp"

using namespace quickcount;
using qctest::StationSpec;
using Catch::Approx;

namespace {

PosteriorTable table_from(const std::vector<std::vector<BetaPosterior>>& cells) {
  PosteriorTable table;
  table.categories = static_cast<int>(cells.front().size());
  table.cells = cells;
  return table;
}

// solve F(x) = target for the Beta(2,2) CDF 3x^2 - 2x^3 by plain bisection;
// an oracle independent of inc_beta
double beta22_quantile_oracle(double target) {
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (3.0 * mid * mid - 2.0 * mid * mid * mid < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("stratum posterior: conjugate update") {
  std::vector<Station> stations(2);
  stations[0] = Station{"S1", 100, {30, 20, 5, 5}};
  stations[1] = Station{"S2", 100, {50, 20, 5, 5}};
  const BetaPosterior post = stratum_posterior(stations, 0, 5);
  REQUIRE(post.alpha == Approx(80.5).margin(1e-12));
  REQUIRE(post.beta == Approx(120.5).margin(1e-12));
  REQUIRE(post.mean() == Approx(80.5 / 201.0).margin(1e-14));
  // exact rational value of the closed-form variance
  REQUIRE(post.variance() == Approx(9700.25 / 8161002.0).margin(1e-18));
}

TEST_CASE("stratum posterior: zero votes stay proper") {
  std::vector<Station> stations(2);
  stations[0] = Station{"S1", 100, {0, 20, 5, 5}};
  stations[1] = Station{"S2", 100, {0, 20, 5, 5}};
  const BetaPosterior post = stratum_posterior(stations, 0, 5);
  REQUIRE(post.alpha == Approx(0.5));
  REQUIRE(post.beta == Approx(200.5));
  REQUIRE(post.mean() == Approx(0.5 / 201.0).margin(1e-14));
}

TEST_CASE("overall mean is the weighted average of stratum means") {
  // Beta(4,6) has mean 0.4, Beta(6,4) mean 0.6
  const PosteriorTable table =
      table_from({{BetaPosterior{4, 6}}, {BetaPosterior{6, 4}}});
  const std::vector<double> equal = {0.5, 0.5};
  REQUIRE(overall_mean(table, 0, equal) == Approx(0.5).margin(1e-14));

  const PosteriorTable single = table_from({{BetaPosterior{4, 6}}});
  const std::vector<double> one = {1.0};
  REQUIRE(overall_mean(single, 0, one) == Approx(0.4).margin(1e-14));

  // hand-computed dot product over three strata
  const PosteriorTable three = table_from(
      {{BetaPosterior{2, 8}}, {BetaPosterior{5, 5}}, {BetaPosterior{8, 2}}});
  const std::vector<double> weights = {0.2, 0.3, 0.5};
  REQUIRE(overall_mean(three, 0, weights) ==
          Approx(0.2 * 0.2 + 0.3 * 0.5 + 0.5 * 0.8).margin(1e-14));

  const std::vector<double> bad = {0.2, 0.3};
  REQUIRE_THROWS_AS(overall_mean(three, 0, bad), Error);
}

TEST_CASE("sigma bounds: closed forms and the Cauchy-Schwarz oracle") {
  // Beta(12,12): mean 0.5, variance exactly 0.01
  const PosteriorTable pair =
      table_from({{BetaPosterior{12, 12}}, {BetaPosterior{12, 12}}});
  const std::vector<double> equal = {0.5, 0.5};
  const SigmaBounds bounds = sigma_bounds(pair, 0, equal);
  REQUIRE(bounds.perp == Approx(std::sqrt(0.005)).margin(1e-14));
  REQUIRE(bounds.star == Approx(0.1).margin(1e-14));

  const PosteriorTable single = table_from({{BetaPosterior{12, 12}}});
  const std::vector<double> one = {1.0};
  const SigmaBounds collapsed = sigma_bounds(single, 0, one);
  REQUIRE(collapsed.perp == Approx(collapsed.star).margin(1e-15));

  // 10 strata with scattered posteriors: sigma_star^2 must equal the brute
  // force double sum with unit correlations
  std::vector<std::vector<BetaPosterior>> cells;
  std::vector<double> weights;
  Engine eng = make_engine(99);
  double wsum = 0.0;
  for (int i = 0; i < 10; ++i) {
    cells.push_back({BetaPosterior{1.0 + 30.0 * uniform01(eng), 1.0 + 40.0 * uniform01(eng)}});
    weights.push_back(0.05 + uniform01(eng));
    wsum += weights.back();
  }
  for (double& w : weights) w /= wsum;
  const PosteriorTable table = table_from(cells);
  const SigmaBounds b = sigma_bounds(table, 0, weights);
  double brute = 0.0;
  for (int i = 0; i < 10; ++i)
    for (int r = 0; r < 10; ++r)
      brute += weights[i] * weights[r] * table.at(i, 0).sd() * table.at(r, 0).sd();
  REQUIRE(b.star * b.star == Approx(brute).margin(1e-14));
  REQUIRE(b.perp <= b.star);
}

TEST_CASE("blended sigma is the convex combination") {
  REQUIRE(blended_sigma(0.0707106781186548, 0.1, 0.0) == Approx(0.0707106781186548));
  REQUIRE(blended_sigma(0.0707106781186548, 0.1, 1.0) == Approx(0.1));
  REQUIRE(blended_sigma(0.0707106781186548, 0.1, 0.5) == Approx(0.0853553390593274).margin(1e-15));
  double prev = 0.0;
  for (double delta = 0.0; delta <= 1.0; delta += 0.125) {
    const double s = blended_sigma(0.01, 0.05, delta);
    REQUIRE(s >= prev);
    prev = s;
  }
  REQUIRE_THROWS_AS(blended_sigma(0.1, 0.2, -0.1), Error);
  REQUIRE_THROWS_AS(blended_sigma(0.1, 0.2, 1.1), Error);
}

TEST_CASE("marginal summary: moments survive the moment matching") {
  const PosteriorTable table =
      table_from({{BetaPosterior{40, 60}}, {BetaPosterior{55, 45}}});
  const std::vector<double> weights = {0.4, 0.6};
  const MarginalSummary m = make_marginal(table, 0, weights, 0.25);
  REQUIRE(m.sigma == Approx(blended_sigma(m.sigma_perp, m.sigma_star, 0.25)).margin(1e-15));
  REQUIRE(m.marginal.mean() == Approx(m.mu).margin(1e-12));
  REQUIRE(m.marginal.variance() == Approx(m.sigma * m.sigma).margin(1e-12));
  REQUIRE(m.sigma_perp <= m.sigma);
  REQUIRE(m.sigma <= m.sigma_star);
}

TEST_CASE("theta intervals: uniform case and cubic oracle") {
  const Interval flat = theta_interval(BetaDist{1.0, 1.0}, 0.95);
  REQUIRE(flat.lo == Approx(0.025).margin(1e-12));
  REQUIRE(flat.hi == Approx(0.975).margin(1e-12));

  const Interval cubic = theta_interval(BetaDist{2.0, 2.0}, 0.5);
  REQUIRE(cubic.lo == Approx(beta22_quantile_oracle(0.25)).margin(1e-9));
  REQUIRE(cubic.hi == Approx(beta22_quantile_oracle(0.75)).margin(1e-9));

  REQUIRE_THROWS_AS(theta_interval(BetaDist{2.0, 2.0}, 0.0), Error);
  REQUIRE_THROWS_AS(theta_interval(BetaDist{2.0, 2.0}, 1.0), Error);
}

TEST_CASE("interval nesting in delta") {
  const double mu = 0.4;
  const double sigma_perp = 0.01;
  const double sigma_star = 0.03;
  double prev_lo = 1.0;
  double prev_hi = 0.0;
  for (double delta = 0.0; delta <= 1.0 + 1e-9; delta += 0.1) {
    const double sigma = blended_sigma(sigma_perp, sigma_star, std::min(delta, 1.0));
    const Interval iv = theta_interval(beta_from_moments(mu, sigma * sigma), 0.9);
    REQUIRE(iv.lo <= prev_lo + 1e-12);
    REQUIRE(iv.hi >= prev_hi - 1e-12);
    prev_lo = iv.lo;
    prev_hi = iv.hi;
  }
}

TEST_CASE("posterior means of a sample sum to one up to the prior floor") {
  // Per-category Beta(1/2,1/2) priors bias the sum of means upward by
  // exactly (J/2 - 1)/(n_i + 1) per stratum; verify against that closed
  // form rather than against 1.
  std::vector<std::vector<StationSpec>> spec(2);
  spec[0] = {StationSpec{100, {30, 20, 5, 5}}, StationSpec{200, {80, 60, 10, 10}}};
  spec[1] = {StationSpec{150, {50, 40, 5, 5}}, StationSpec{50, {10, 20, 2, 3}}};
  const ElectionFrame frame = qctest::make_frame(spec, 5);
  const SampleDraw census = draw_sample(frame, Allocation::census(frame), 2);
  const PosteriorTable table = fit_posteriors(census);
  const std::vector<double> weights = frame.weights();
  double total = 0.0;
  for (int j = 0; j < frame.categories; ++j) total += overall_mean(table, j, weights);
  double expected_bias = 0.0;
  for (int i = 0; i < frame.stratum_count(); ++i) {
    const double n_i = static_cast<double>(frame.strata[i].voters());
    expected_bias += weights[i] * (2.5 - 1.0) / (n_i + 1.0);
  }
  REQUIRE(total == Approx(1.0 + expected_bias).margin(1e-12));
  REQUIRE(std::fabs(total - 1.0) < 0.01);
}
