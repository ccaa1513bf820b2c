// Copyright 2026 The hleval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HLEVAL_SAMPLING_HPP_
#define HLEVAL_SAMPLING_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "hleval/corpus.hpp"
#include "hleval/random.hpp"
#include "hleval/time.hpp"
#include "json.hpp"

namespace hleval {

inline constexpr Ms kDefaultWindow{60'000};
inline constexpr int kJudgmentsPerSample = 5;

// ---------------------------------------------------------------------------
// Windowing

struct Segmentation {
  std::vector<SampleWindow> windows;
  std::optional<std::string> warning;
};

/// Cuts a dialogue into fixed-length windows starting at 0, hop, 2*hop, ...
/// keeping those that end within the dialogue. Ids are `{dialogue_id}#{i}`.
inline Segmentation segment(const DialogueRecord& dialogue, Ms window = kDefaultWindow,
                            std::optional<Ms> hop = std::nullopt) {
  const Ms step = hop.value_or(window);
  if (window <= Ms{0}) throw std::invalid_argument("window must be positive");
  if (step <= Ms{0} || step > window) {
    throw std::invalid_argument("hop must lie in (0, window]");
  }
  Segmentation out;
  if (window > dialogue.duration) {
    out.warning = "dialogue " + dialogue.dialogue_id + " (" +
                  std::to_string(to_seconds(dialogue.duration)) +
                  " s) is shorter than one window; no samples produced";
    return out;
  }
  std::size_t index = 0;
  for (Ms start{0}; start + window <= dialogue.duration; start += step) {
    out.windows.push_back({dialogue.dialogue_id + "#" + std::to_string(index++),
                           dialogue.dialogue_id, start, start + window, std::nullopt});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Annotator allocation

class AllocationError : public std::runtime_error {
 public:
  AllocationError(const std::string& what, std::int64_t deficit)
      : std::runtime_error(what), deficit_(deficit) {}
  /// Number of judgment slots that cannot be placed.
  std::int64_t deficit() const { return deficit_; }

 private:
  std::int64_t deficit_;
};

struct AllocationParams {
  int k = kJudgmentsPerSample;
  int load_min = 50;
  int load_max = 70;
  std::uint64_t seed = 0;
};

struct Assignment {
  /// annotator_id -> samples in presentation order.
  std::map<std::string, std::vector<std::string>> queues;
  std::uint64_t seed = 0;
  /// Annotators left below load_min because there were too few slots.
  std::vector<std::string> underloaded;

  std::size_t load(const std::string& annotator) const {
    auto it = queues.find(annotator);
    return it == queues.end() ? 0 : it->second.size();
  }
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Assigns each sample to exactly `k` distinct annotators.
///
/// Samples are visited in a seeded random order; each takes the k annotators
/// with the lowest current load (random tie-break) from a priority queue.
/// Loads therefore never differ by more than one, which makes the procedure
/// succeed whenever k * |samples| <= load_max * |annotators|.
inline Assignment allocate(std::span<const std::string> sample_ids,
                           std::span<const std::string> annotators,
                           const AllocationParams& params) {
  if (params.k <= 0) throw std::invalid_argument("k must be positive");
  if (params.load_min < 0 || params.load_max < params.load_min) {
    throw std::invalid_argument("load bounds must satisfy 0 <= load_min <= load_max");
  }
  if (std::set<std::string>(annotators.begin(), annotators.end()).size() !=
      annotators.size()) {
    throw std::invalid_argument("annotator ids must be unique");
  }
  const auto n_annot = static_cast<std::int64_t>(annotators.size());
  if (params.k > n_annot) {
    throw AllocationError("k=" + std::to_string(params.k) + " exceeds the " +
                              std::to_string(n_annot) + " available annotators",
                          static_cast<std::int64_t>(sample_ids.size()) *
                              (params.k - n_annot));
  }
  const std::int64_t slots = static_cast<std::int64_t>(sample_ids.size()) * params.k;
  const std::int64_t capacity = n_annot * params.load_max;
  if (slots > capacity) {
    throw AllocationError("infeasible allocation: " + std::to_string(slots) +
                              " judgment slots exceed capacity " +
                              std::to_string(capacity) + " (deficit " +
                              std::to_string(slots - capacity) + ")",
                          slots - capacity);
  }

  Rng rng(params.seed);
  std::vector<std::size_t> order(sample_ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);

  // (load, tie-break, annotator index); smallest first.
  using Entry = std::tuple<int, std::uint64_t, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (std::size_t a = 0; a < annotators.size(); ++a) heap.emplace(0, rng.next(), a);

  std::vector<std::vector<std::string>> queues(annotators.size());
  std::vector<Entry> taken;
  for (std::size_t idx : order) {
    taken.clear();
    std::set<std::size_t> chosen;
    std::vector<Entry> rejected;
    while (static_cast<int>(taken.size()) < params.k) {
      Entry e = heap.top();
      heap.pop();
      if (!chosen.insert(std::get<2>(e)).second) {
        rejected.push_back(e);
        continue;
      }
      taken.push_back(e);
    }
    for (const auto& e : rejected) heap.push(e);
    for (const auto& [load, tie, a] : taken) {
      queues[a].push_back(sample_ids[idx]);
      heap.emplace(load + 1, rng.next(), a);
    }
  }

  Assignment out;
  out.seed = params.seed;
  for (std::size_t a = 0; a < annotators.size(); ++a) {
    if (static_cast<int>(queues[a].size()) < params.load_min) {
      out.underloaded.push_back(annotators[a]);
    }
    out.queues.emplace(annotators[a], std::move(queues[a]));
  }
  std::sort(out.underloaded.begin(), out.underloaded.end());
  return out;
}

inline nlohmann::ordered_json to_json(const Assignment& a) {
  nlohmann::ordered_json queues = nlohmann::ordered_json::object();
  for (const auto& [annotator, samples] : a.queues) queues[annotator] = samples;
  return {{"seed", a.seed}, {"queues", std::move(queues)}, {"underloaded", a.underloaded}};
}

inline Assignment assignment_from_json(const nlohmann::json& j) {
  Assignment a;
  a.seed = j.at("seed").get<std::uint64_t>();
  for (auto it = j.at("queues").begin(); it != j.at("queues").end(); ++it) {
    a.queues.emplace(it.key(), it.value().get<std::vector<std::string>>());
  }
  a.underloaded = j.at("underloaded").get<std::vector<std::string>>();
  return a;
}

// ---------------------------------------------------------------------------
// Scores

/// Fraction of HUMAN verdicts for one sample, kept as the exact pair (k, n).
struct HumanLikenessScore {
  std::string sample_id;
  std::string dialogue_id;
  int human = 0;
  int total = 0;

  double score() const { return static_cast<double>(human) / total; }
  /// True when the sample did not receive the protocol's five verdicts.
  bool partial() const { return total != kJudgmentsPerSample; }
  friend bool operator==(const HumanLikenessScore&, const HumanLikenessScore&) = default;
};

/// Scores one sample. The dialogue id is taken from a `{dialogue_id}#{i}`
/// sample id, else left empty.
inline HumanLikenessScore aggregate_sample(std::span<const Judgment> judgments) {
  if (judgments.empty()) throw std::invalid_argument("no judgments to aggregate");
  HumanLikenessScore s;
  s.sample_id = judgments.front().sample_id;
  if (auto hash = s.sample_id.rfind('#'); hash != std::string::npos && hash > 0) {
    s.dialogue_id = s.sample_id.substr(0, hash);
  }
  for (const auto& j : judgments) {
    if (j.sample_id != s.sample_id) {
      throw std::invalid_argument("judgments for different samples: " + s.sample_id +
                                  ", " + j.sample_id);
    }
    if (j.verdict == Verdict::kHuman) ++s.human;
    ++s.total;
  }
  return s;
}

/// Scores every judged sample of the bundle, sorted by sample_id.
inline std::vector<HumanLikenessScore> aggregate_bundle(const CorpusBundle& bundle) {
  std::map<std::string, std::vector<Judgment>> by_sample;
  for (const auto& j : bundle.judgments) by_sample[j.sample_id].push_back(j);
  std::map<std::string, std::string> dialogue_of;
  for (const auto& s : bundle.samples) dialogue_of[s.sample_id] = s.dialogue_id;

  std::vector<HumanLikenessScore> out;
  for (const auto& [id, js] : by_sample) {
    HumanLikenessScore s = aggregate_sample(js);
    if (auto it = dialogue_of.find(id); it != dialogue_of.end()) s.dialogue_id = it->second;
    out.push_back(std::move(s));
  }
  return out;
}

/// Mean of the sample scores of one dialogue.
inline double score_dialogue(std::span<const HumanLikenessScore> sample_scores) {
  if (sample_scores.empty()) throw std::invalid_argument("dialogue has no scored samples");
  double sum = 0.0;
  for (const auto& s : sample_scores) sum += s.score();
  return sum / static_cast<double>(sample_scores.size());
}

/// dialogue_id -> mean sample score, for every dialogue with a scored sample.
inline std::map<std::string, double> dialogue_scores(
    std::span<const HumanLikenessScore> scores) {
  std::map<std::string, std::vector<HumanLikenessScore>> grouped;
  for (const auto& s : scores) {
    if (s.dialogue_id.empty()) {
      throw std::invalid_argument("score for " + s.sample_id + " has no dialogue");
    }
    grouped[s.dialogue_id].push_back(s);
  }
  std::map<std::string, double> out;
  for (const auto& [id, v] : grouped) out[id] = score_dialogue(v);
  return out;
}

// ---------------------------------------------------------------------------
// Score distribution

/// Percentage in tenths of a percent, rounded half-up: 66/656 -> 101.
inline std::int64_t percent_tenths(std::int64_t count, std::int64_t total) {
  if (total <= 0) return 0;
  return (2 * count * 1000 + total) / (2 * total);
}

struct HistogramTable {
  struct Row {
    int human = 0;  // level = human / total in lowest terms
    int total = 1;
    std::array<std::int64_t, 2> counts{};  // indexed by SystemType
    std::int64_t all() const { return counts[0] + counts[1]; }
    double level() const { return static_cast<double>(human) / total; }
  };
  std::vector<Row> rows;  // descending level
  std::array<std::int64_t, 2> column_totals{};

  std::int64_t grand_total() const { return column_totals[0] + column_totals[1]; }

  /// Percent of `type`'s column at row `r`, or of the total column when
  /// `type` is empty.
  double percent(std::size_t r, std::optional<SystemType> type) const {
    const auto& row = rows.at(r);
    const std::int64_t count = type ? row.counts[static_cast<int>(*type)] : row.all();
    const std::int64_t total =
        type ? column_totals[static_cast<int>(*type)] : grand_total();
    return static_cast<double>(percent_tenths(count, total)) / 10.0;
  }
};

/// Counts samples per score level and system type. The six levels reachable
/// with five verdicts always appear; other observed levels are added.
inline HistogramTable distribution(std::span<const HumanLikenessScore> scores,
                                   const std::map<std::string, SystemType>& system_types) {
  std::map<std::pair<int, int>, std::array<std::int64_t, 2>> cells;
  auto reduced = [](int k, int n) {
    const int g = std::gcd(k, n);
    return std::pair{k / (g == 0 ? 1 : g), n / (g == 0 ? 1 : g)};
  };
  for (int k = 0; k <= kJudgmentsPerSample; ++k) cells[reduced(k, kJudgmentsPerSample)];

  HistogramTable table;
  for (const auto& s : scores) {
    auto it = system_types.find(s.dialogue_id);
    if (it == system_types.end()) {
      throw std::invalid_argument("sample " + s.sample_id +
                                  " belongs to unknown dialogue \"" + s.dialogue_id + "\"");
    }
    const int col = static_cast<int>(it->second);
    cells[reduced(s.human, s.total)][col] += 1;
    table.column_totals[col] += 1;
  }
  for (const auto& [level, counts] : cells) {
    table.rows.push_back({level.first, level.second, counts});
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const auto& a, const auto& b) {
    return static_cast<std::int64_t>(a.human) * b.total >
           static_cast<std::int64_t>(b.human) * a.total;
  });
  return table;
}

namespace detail {

inline std::string level_label(const HistogramTable::Row& row) {
  std::ostringstream os;
  if (kJudgmentsPerSample % row.total == 0) {
    const int k = row.human * (kJudgmentsPerSample / row.total);
    os << std::fixed << std::setprecision(1) << row.level() << " (" << k << "/"
       << kJudgmentsPerSample << ")";
  } else {
    os << std::fixed << std::setprecision(3) << row.level() << " (" << row.human << "/"
       << row.total << ")";
  }
  return os.str();
}

inline std::string count_cell(std::int64_t count, std::int64_t total) {
  std::ostringstream os;
  const auto tenths = percent_tenths(count, total);
  std::ostringstream pct;
  pct << "(" << tenths / 10 << "." << tenths % 10 << "%)";
  os << std::setw(4) << count << " " << std::setw(7) << pct.str();
  return os.str();
}

}  // namespace detail

/// Plain-text rendering in the layout of the published annotation table.
inline std::string render_histogram(const HistogramTable& t) {
  std::ostringstream os;
  os << std::left << std::setw(14) << "HL score" << std::setw(16) << "Auto."
     << std::setw(16) << "WOZ"
     << "Total\n";
  for (const auto& row : t.rows) {
    os << std::left << std::setw(14) << detail::level_label(row) << std::setw(16)
       << detail::count_cell(row.counts[0], t.column_totals[0]) << std::setw(16)
       << detail::count_cell(row.counts[1], t.column_totals[1])
       << detail::count_cell(row.all(), t.grand_total()) << "\n";
  }
  os << std::left << std::setw(14) << "Total" << std::right << std::setw(4)
     << t.column_totals[0] << std::setw(16) << t.column_totals[1] << std::setw(16)
     << t.grand_total() << "\n";
  return os.str();
}

/// Machine-readable rows `{level, type, count, pct}`, type in
/// {autonomous, woz, total}.
inline std::vector<nlohmann::ordered_json> histogram_rows(const HistogramTable& t) {
  std::vector<nlohmann::ordered_json> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    for (int col = 0; col < 3; ++col) {
      const std::optional<SystemType> type =
          col < 2 ? std::optional(static_cast<SystemType>(col)) : std::nullopt;
      out.push_back({{"level", row.level()},
                     {"type", type ? std::string(to_string(*type)) : "total"},
                     {"count", type ? row.counts[col] : row.all()},
                     {"pct", t.percent(r, type)}});
    }
  }
  return out;
}

}  // namespace hleval

#endif  // HLEVAL_SAMPLING_HPP_
