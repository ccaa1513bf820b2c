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

#ifndef HLEVAL_STATISTICS_HPP_
#define HLEVAL_STATISTICS_HPP_

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hleval/corpus.hpp"
#include "hleval/features.hpp"
#include "json.hpp"

namespace hleval {

inline constexpr double kDefaultHighlightR = 0.20;

/// Raised when a correlation is undefined (constant input).
class UndefinedCorrelation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// 1-based ranks; tied values share the mean of the ranks they span.
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("length mismatch");
  if (x.empty()) throw std::invalid_argument("empty input");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelation("constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Spearman's rank correlation: Pearson correlation of average ranks, so it
/// stays exact under ties.
inline double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("spearman: length mismatch (" + std::to_string(x.size()) +
                                " vs " + std::to_string(y.size()) + ")");
  }
  if (x.size() < 3) throw std::invalid_argument("spearman: need at least 3 pairs");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

inline double mae(std::span<const double> pred, std::span<const double> actual) {
  if (pred.size() != actual.size()) throw std::invalid_argument("mae: length mismatch");
  if (pred.empty()) throw std::invalid_argument("mae: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - actual[i]);
  return sum / static_cast<double>(pred.size());
}

// ---------------------------------------------------------------------------
// Reports

struct CorrelationResult {
  std::string label;
  std::string group;
  std::optional<double> r;  // empty when undefined (constant column)
  std::size_t n = 0;
  bool highlighted = false;
};

namespace detail {

inline CorrelationResult correlate_row(std::string label, std::string group,
                                       const std::vector<double>& x,
                                       const std::vector<double>& y, double threshold) {
  CorrelationResult row{std::move(label), std::move(group), std::nullopt, x.size(), false};
  if (x.size() >= 3) {
    try {
      row.r = spearman(x, y);
      row.highlighted = std::abs(*row.r) >= threshold;
    } catch (const UndefinedCorrelation&) {
    }
  }
  return row;
}

}  // namespace detail

/// One Spearman row per feature against the per-dialogue scores. Dialogues
/// whose value for a feature is missing are left out of that row.
inline std::vector<CorrelationResult> feature_correlation_report(
    std::span<const FeatureVector> features, const std::map<std::string, double>& scores,
    double threshold = kDefaultHighlightR) {
  if (features.size() < 3) throw std::invalid_argument("need at least 3 dialogues");
  for (const auto& fv : features) {
    if (!scores.count(fv.dialogue_id)) {
      throw std::invalid_argument("no score for dialogue " + fv.dialogue_id);
    }
  }
  if (scores.size() != features.size()) {
    throw std::invalid_argument("scores and features cover different dialogues");
  }
  std::vector<CorrelationResult> out;
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    std::vector<double> x, y;
    for (const auto& fv : features) {
      if (fv.missing(f)) continue;
      x.push_back(fv.values[f]);
      y.push_back(scores.at(fv.dialogue_id));
    }
    out.push_back(detail::correlate_row(std::string(kFeatureInfo[f].label),
                                        std::string(kFeatureInfo[f].group), x, y,
                                        threshold));
  }
  return out;
}

inline std::string_view questionnaire_group(std::size_t item) {
  if (item < 6) return "Robot behaviors";
  if (item < 17) return "Impression on the robot";
  return "Impression on the dialogue";
}

/// One Spearman row per questionnaire item Q1..Q19 against the scores of the
/// dialogues that carry a questionnaire.
inline std::vector<CorrelationResult> subjective_correlation_report(
    std::span<const std::pair<std::string, QuestionnaireResponse>> questionnaires,
    const std::map<std::string, double>& scores, double threshold = kDefaultHighlightR) {
  if (questionnaires.size() < 3) {
    throw std::invalid_argument("need at least 3 questionnaires");
  }
  std::vector<double> y;
  for (const auto& [id, q] : questionnaires) {
    auto it = scores.find(id);
    if (it == scores.end()) throw std::invalid_argument("no score for dialogue " + id);
    y.push_back(it->second);
  }
  std::vector<CorrelationResult> out;
  for (std::size_t item = 0; item < kQuestionnaireItems; ++item) {
    std::vector<double> x;
    for (const auto& [id, q] : questionnaires) x.push_back(q.items[item]);
    out.push_back(detail::correlate_row("Q" + std::to_string(item + 1),
                                        std::string(questionnaire_group(item)), x, y,
                                        threshold));
  }
  return out;
}

/// Gathers (dialogue_id, questionnaire) for scored dialogues, in id order.
inline std::vector<std::pair<std::string, QuestionnaireResponse>> scored_questionnaires(
    const CorpusBundle& bundle, const std::map<std::string, double>& scores) {
  std::vector<std::pair<std::string, QuestionnaireResponse>> out;
  for (const auto& d : bundle.dialogues) {
    if (d.questionnaire && scores.count(d.dialogue_id)) {
      out.emplace_back(d.dialogue_id, *d.questionnaire);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

/// Plain-text table with group headers; highlighted rows carry a `*`.
inline std::string render_correlations(std::span<const CorrelationResult> rows,
                                       std::string_view title) {
  std::ostringstream os;
  os << std::left << std::setw(36) << title << "Corr. (r)     n\n";
  std::string group;
  for (const auto& row : rows) {
    if (row.group != group) {
      group = row.group;
      os << "(" << group << ")\n";
    }
    os << "  " << std::left << std::setw(34) << row.label << std::right;
    if (row.r) {
      os << std::fixed << std::setprecision(2) << std::setw(6) << *row.r
         << (row.highlighted ? " *" : "  ");
    } else {
      os << std::setw(6) << "NA" << "  ";
    }
    os << std::setw(6) << row.n << "\n";
  }
  return os.str();
}

inline nlohmann::ordered_json to_json(const CorrelationResult& row) {
  nlohmann::ordered_json j = {{"label", row.label}, {"group", row.group}};
  j["r"] = row.r ? nlohmann::ordered_json(*row.r) : nlohmann::ordered_json(nullptr);
  j["n"] = row.n;
  j["highlighted"] = row.highlighted;
  return j;
}

}  // namespace hleval

#endif  // HLEVAL_STATISTICS_HPP_
