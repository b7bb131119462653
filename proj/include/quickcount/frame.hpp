#ifndef QUICKCOUNT_FRAME_HPP
#define QUICKCOUNT_FRAME_HPP

#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "quickcount/common.hpp"

// The election frame: the census of strata and polling stations that serves
// as ground truth for simulation studies. Vote categories are indexed
// 0..J-1 internally; the last three are always non-registered candidates,
// null votes, and abstention, so registered candidates are 0..J-4.
// Abstention (category J-1) is never stored; it is derived as the complement
// of the J-1 recorded categories.

namespace quickcount {

struct Station {
  std::string id;
  long long voters = 0;           // potential voters, >= 1
  std::vector<long long> votes;   // categories 1..J-1; empty when not yet counted

  bool counted() const { return !votes.empty(); }

  long long votes_cast() const {
    long long total = 0;
    for (const long long v : votes) total += v;
    return total;
  }

  long long abstention() const { return voters - votes_cast(); }

  /// Vote count for category j in [0, categories); abstention is derived.
  long long count(int j, int categories) const {
    return j == categories - 1 ? abstention() : votes[static_cast<std::size_t>(j)];
  }
};

struct Stratum {
  std::string id;
  std::vector<Station> stations;

  int station_count() const { return static_cast<int>(stations.size()); }

  long long voters() const {
    long long total = 0;
    for (const Station& s : stations) total += s.voters;
    return total;
  }
};

struct ElectionFrame {
  int categories = 0;  // J
  std::vector<Stratum> strata;

  int stratum_count() const { return static_cast<int>(strata.size()); }
  int registered_candidates() const { return categories - 3; }

  long long total_voters() const {
    long long total = 0;
    for (const Stratum& s : strata) total += s.voters();
    return total;
  }

  long long total_stations() const {
    long long total = 0;
    for (const Stratum& s : strata) total += s.station_count();
    return total;
  }

  std::vector<double> weights() const {
    const double n = static_cast<double>(total_voters());
    std::vector<double> w;
    w.reserve(strata.size());
    for (const Stratum& s : strata) w.push_back(static_cast<double>(s.voters()) / n);
    return w;
  }

  bool fully_counted() const {
    for (const Stratum& s : strata)
      for (const Station& st : s.stations)
        if (!st.counted()) return false;
    return true;
  }

  void validate() const {
    require(categories >= 5, "frame: at least two registered candidates required (J >= 5), got J=",
            categories);
    require(!strata.empty(), "frame: no strata");
    std::set<std::pair<std::string, std::string>> seen;
    for (const Stratum& s : strata) {
      require(!s.stations.empty(), "frame: stratum ", s.id, " has no stations");
      for (const Station& st : s.stations) {
        require(st.voters >= 1, "frame: station ", s.id, "/", st.id,
                " has no potential voters");
        require(seen.emplace(s.id, st.id).second, "frame: duplicate station id ", s.id, "/",
                st.id);
        if (st.counted()) {
          require(static_cast<int>(st.votes.size()) == categories - 1, "frame: station ", s.id,
                  "/", st.id, " has ", st.votes.size(), " vote columns, expected ",
                  categories - 1);
          long long cast = 0;
          for (const long long v : st.votes) {
            require(v >= 0, "frame: negative vote count at station ", s.id, "/", st.id);
            cast += v;
          }
          require(cast <= st.voters, "frame: votes exceed potential voters at station ", s.id,
                  "/", st.id, " (", cast, " > ", st.voters, ")");
        }
      }
    }
  }
};

namespace detail {

inline std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (const char ch : line) {
    if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  fields.push_back(field);
  return fields;
}

inline long long parse_count(const std::string& field, const std::string& context) {
  std::size_t pos = 0;
  long long value = 0;
  try {
    value = std::stoll(field, &pos);
  } catch (const std::exception&) {
    fail("frame: malformed number '", field, "' in ", context);
  }
  require(pos == field.size(), "frame: malformed number '", field, "' in ", context);
  return value;
}

}  // namespace detail

/// Parse a frame CSV: header `stratum_id,station_id,potential_voters,v1,...,v{J-1}`,
/// one row per station, J inferred from the column count. A row whose vote
/// cells are all empty is an uncounted station (live mode).
inline ElectionFrame parse_frame(std::istream& in, const std::string& source = "<stream>") {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "frame: ", source, " is empty");
  const std::vector<std::string> header = detail::split_csv_row(line);
  require(header.size() >= 3 && header[0] == "stratum_id" && header[1] == "station_id" &&
              header[2] == "potential_voters",
          "frame: ", source, " does not start with the frame CSV header");
  const int categories = static_cast<int>(header.size()) - 2;  // J-1 vote columns + abstention
  ElectionFrame frame;
  frame.categories = categories;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const std::vector<std::string> f = detail::split_csv_row(line);
    const std::string context = source + ":" + std::to_string(row);
    require(f.size() == header.size(), "frame: row with ", f.size(), " fields, expected ",
            header.size(), " in ", context);
    Station station;
    station.id = f[1];
    station.voters = detail::parse_count(f[2], context);
    bool any_votes = false;
    bool all_empty = true;
    for (std::size_t j = 3; j < f.size(); ++j) {
      if (f[j].empty()) continue;
      all_empty = false;
      any_votes = true;
    }
    if (any_votes) {
      require(!all_empty, "frame: unreachable");
      for (std::size_t j = 3; j < f.size(); ++j) {
        require(!f[j].empty(), "frame: partially counted station in ", context);
        station.votes.push_back(detail::parse_count(f[j], context));
      }
    }
    if (frame.strata.empty() || frame.strata.back().id != f[0]) {
      bool fresh = true;
      for (const Stratum& s : frame.strata) fresh = fresh && s.id != f[0];
      require(fresh, "frame: stratum ", f[0], " rows are not contiguous in ", context);
      frame.strata.push_back(Stratum{f[0], {}});
    }
    frame.strata.back().stations.push_back(std::move(station));
  }
  frame.validate();
  return frame;
}

inline ElectionFrame parse_frame_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "frame: cannot open ", path);
  return parse_frame(in, path);
}

inline void write_frame(const ElectionFrame& frame, std::ostream& out) {
  out << "stratum_id,station_id,potential_voters";
  for (int j = 1; j < frame.categories; ++j) out << ",v" << j;
  out << "\n";
  for (const Stratum& s : frame.strata) {
    for (const Station& st : s.stations) {
      out << s.id << ',' << st.id << ',' << st.voters;
      if (st.counted()) {
        for (const long long v : st.votes) out << ',' << v;
      } else {
        for (int j = 1; j < frame.categories; ++j) out << ',';
      }
      out << "\n";
    }
  }
}

struct OfficialTotals {
  std::vector<double> theta;   // size J, sums to 1
  std::vector<double> lambda;  // size J-1, effective-vote shares
};

/// Overall vote shares: theta over potential voters (all J categories) and
/// lambda over votes effectively cast (abstention excluded).
inline OfficialTotals official_totals(const ElectionFrame& frame) {
  require(frame.fully_counted(), "frame: official totals need vote counts at every station");
  const double n = static_cast<double>(frame.total_voters());
  OfficialTotals totals;
  totals.theta.assign(static_cast<std::size_t>(frame.categories), 0.0);
  for (const Stratum& s : frame.strata)
    for (const Station& st : s.stations)
      for (int j = 0; j < frame.categories; ++j)
        totals.theta[static_cast<std::size_t>(j)] += static_cast<double>(st.count(j, frame.categories));
  for (double& t : totals.theta) t /= n;
  const double abstention = totals.theta.back();
  require(abstention < 1.0, "frame: nobody voted, effective-vote shares undefined");
  totals.lambda.reserve(static_cast<std::size_t>(frame.categories - 1));
  for (int j = 0; j + 1 < frame.categories; ++j)
    totals.lambda.push_back(totals.theta[static_cast<std::size_t>(j)] / (1.0 - abstention));
  return totals;
}

}  // namespace quickcount

#endif
