#ifndef QUICKCOUNT_SAMPLING_HPP
#define QUICKCOUNT_SAMPLING_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <vector>

#include "quickcount/frame.hpp"
#include "quickcount/rng.hpp"

namespace quickcount {

struct Allocation {
  std::vector<int> per_stratum;  // c_i, each in [2, K_i]

  int total() const { return std::accumulate(per_stratum.begin(), per_stratum.end(), 0); }

  static Allocation census(const ElectionFrame& frame) {
    Allocation alloc;
    alloc.per_stratum.reserve(frame.strata.size());
    for (const Stratum& s : frame.strata) alloc.per_stratum.push_back(s.station_count());
    return alloc;
  }
};

/// Proportional allocation of c stations: largest-remainder rounding of
/// (n_i/n)*c, then clamped to [2, K_i] and rebalanced back to total c.
/// Ties go to the earlier stratum, so the result is deterministic.
inline Allocation allocate_proportional(const ElectionFrame& frame, int c) {
  const int strata = frame.stratum_count();
  require(c >= 2 * strata, "sampling: total sample size ", c,
          " cannot honor the minimum of 2 stations in each of ", strata, " strata");
  require(static_cast<long long>(c) <= frame.total_stations(), "sampling: sample size ", c,
          " exceeds the ", frame.total_stations(), " stations in the frame");

  const double n = static_cast<double>(frame.total_voters());
  const int count = strata;
  std::vector<double> remainder(static_cast<std::size_t>(count));
  std::vector<int> alloc(static_cast<std::size_t>(count));
  std::vector<int> capacity(static_cast<std::size_t>(count));
  int assigned = 0;
  for (int i = 0; i < count; ++i) {
    capacity[i] = frame.strata[static_cast<std::size_t>(i)].station_count();
    const double quota =
        static_cast<double>(frame.strata[static_cast<std::size_t>(i)].voters()) / n *
        static_cast<double>(c);
    alloc[i] = static_cast<int>(quota);
    remainder[i] = quota - static_cast<double>(alloc[i]);
    assigned += alloc[i];
  }

  // Largest remainders take the leftover units.
  std::vector<int> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&remainder](int lhs, int rhs) { return remainder[lhs] > remainder[rhs]; });
  for (int k = 0; assigned < c; k = (k + 1) % count) {
    ++alloc[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
    ++assigned;
  }

  for (int i = 0; i < count; ++i) alloc[i] = std::clamp(alloc[i], 2, capacity[i]);

  // Clamping can break the total; repair it one unit at a time, adding where
  // the remainder is largest and removing where it is smallest.
  int total = std::accumulate(alloc.begin(), alloc.end(), 0);
  while (total != c) {
    int pick = -1;
    for (int i = 0; i < count; ++i) {
      if (total < c && alloc[i] < capacity[i] &&
          (pick < 0 || remainder[i] > remainder[pick])) {
        pick = i;
      }
      if (total > c && alloc[i] > 2 && (pick < 0 || remainder[i] < remainder[pick])) pick = i;
    }
    require(pick >= 0, "sampling: allocation rebalance stuck; infeasible sample size ", c);
    alloc[pick] += total < c ? 1 : -1;
    total += total < c ? 1 : -1;
  }
  return Allocation{std::move(alloc)};
}

/// A realized stratified sample: per stratum, copies of the drawn stations.
struct SampleDraw {
  int categories = 0;
  std::vector<std::vector<Station>> stations;  // [stratum][draw]
  Allocation allocation;
  std::uint64_t seed = 0;

  int stratum_count() const { return static_cast<int>(stations.size()); }
};

/// Simple random sampling without replacement within every stratum,
/// reproducible from the seed. Selected stations keep frame order.
inline SampleDraw draw_sample(const ElectionFrame& frame, const Allocation& alloc,
                              std::uint64_t seed) {
  require(static_cast<int>(alloc.per_stratum.size()) == frame.stratum_count(),
          "sampling: allocation covers ", alloc.per_stratum.size(), " strata, frame has ",
          frame.stratum_count());
  SampleDraw draw;
  draw.categories = frame.categories;
  draw.allocation = alloc;
  draw.seed = seed;
  draw.stations.resize(frame.strata.size());
  Engine eng = make_engine(seed);
  for (std::size_t i = 0; i < frame.strata.size(); ++i) {
    const Stratum& stratum = frame.strata[i];
    const int k_total = stratum.station_count();
    const int c_i = alloc.per_stratum[i];
    require(c_i >= 1 && c_i <= k_total, "sampling: allocation asks ", c_i, " of ", k_total,
            " stations in stratum ", stratum.id);
    std::vector<int> idx(static_cast<std::size_t>(k_total));
    std::iota(idx.begin(), idx.end(), 0);
    for (int t = 0; t < c_i; ++t) {
      const int j = t + static_cast<int>(uniform_below(eng, static_cast<std::uint64_t>(k_total - t)));
      std::swap(idx[static_cast<std::size_t>(t)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(c_i));
    std::sort(idx.begin(), idx.end());
    draw.stations[i].reserve(static_cast<std::size_t>(c_i));
    for (const int j : idx) draw.stations[i].push_back(stratum.stations[static_cast<std::size_t>(j)]);
  }
  return draw;
}

/// Classical ratio point estimator: stratum sample-mean vote counts weighted
/// by station totals K_i, normalized across all J categories.
inline std::vector<double> ratio_estimates(const SampleDraw& sample, const ElectionFrame& frame) {
  require(sample.stratum_count() == frame.stratum_count(),
          "sampling: sample and frame stratum counts differ");
  const int categories = frame.categories;
  std::vector<double> weighted(static_cast<std::size_t>(categories), 0.0);
  for (int i = 0; i < frame.stratum_count(); ++i) {
    const std::vector<Station>& stations = sample.stations[static_cast<std::size_t>(i)];
    require(!stations.empty(), "sampling: empty sample in stratum ",
            frame.strata[static_cast<std::size_t>(i)].id);
    const double k_i = static_cast<double>(frame.strata[static_cast<std::size_t>(i)].station_count());
    const double c_i = static_cast<double>(stations.size());
    for (const Station& st : stations) {
      require(st.counted(), "sampling: uncounted station ", st.id, " in ratio estimator");
      for (int j = 0; j < categories; ++j)
        weighted[static_cast<std::size_t>(j)] +=
            k_i * static_cast<double>(st.count(j, categories)) / c_i;
    }
  }
  const double denom = std::accumulate(weighted.begin(), weighted.end(), 0.0);
  require(denom > 0.0, "sampling: ratio estimator denominator is zero");
  for (double& w : weighted) w /= denom;
  return weighted;
}

/// Sample serialization: frame schema plus a trailing `replicate` column.
inline void write_sample_csv(const SampleDraw& sample, const ElectionFrame& frame,
                             long long replicate, std::ostream& out, bool header = true) {
  if (header) {
    out << "stratum_id,station_id,potential_voters";
    for (int j = 1; j < sample.categories; ++j) out << ",v" << j;
    out << ",replicate\n";
  }
  for (int i = 0; i < sample.stratum_count(); ++i) {
    for (const Station& st : sample.stations[static_cast<std::size_t>(i)]) {
      out << frame.strata[static_cast<std::size_t>(i)].id << ',' << st.id << ',' << st.voters;
      for (const long long v : st.votes) out << ',' << v;
      out << ',' << replicate << "\n";
    }
  }
}

}  // namespace quickcount

#endif
