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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "hleval/statistics.hpp"
#include "hleval/synth.hpp"
#include "oracles/rank_oracle.hpp"
#include "support.hpp"

namespace hleval {
namespace {

std::vector<double> random_tied(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  const auto levels = 2 + rng.below(5);
  for (auto& x : v) x = static_cast<double>(rng.below(levels)) * 0.5;
  return v;
}

TEST(Spearman, Monotone) {
  const std::vector<double> x{1, 2, 3};
  EXPECT_DOUBLE_EQ(spearman(x, std::vector<double>{10, 20, 30}), 1.0);
  EXPECT_DOUBLE_EQ(spearman(x, std::vector<double>{3, 2, 1}), -1.0);
}

TEST(Spearman, TiedExampleMatchesRankTable) {
  const std::vector<double> x{1, 2, 2, 4};
  const std::vector<double> y{1, 3, 2, 4};
  EXPECT_EQ(average_ranks(x), (std::vector<double>{1, 2.5, 2.5, 4}));
  // ranks (1, 2.5, 2.5, 4) vs (1, 3, 2, 4): cov 4.5, var 4.5 and 5
  EXPECT_NEAR(spearman(x, y), 4.5 / std::sqrt(4.5 * 5.0), 1e-15);
  EXPECT_NEAR(spearman(x, y), oracle::brute_spearman(x, y), 1e-12);
}

TEST(Spearman, Errors) {
  const std::vector<double> x{1, 2, 3};
  EXPECT_THROW(spearman(x, std::vector<double>{1, 2}), std::invalid_argument);
  EXPECT_THROW(spearman(x, std::vector<double>{5, 5, 5}), UndefinedCorrelation);
  EXPECT_THROW(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2}),
               std::invalid_argument);
}

TEST(Spearman, MatchesBruteForceOracle) {
  Rng rng(31);
  int compared = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 3 + rng.below(8);
    const auto x = random_tied(rng, n);
    const auto y = random_tied(rng, n);
    const double want = oracle::brute_spearman(x, y);
    if (std::isnan(want)) {
      EXPECT_THROW(spearman(x, y), UndefinedCorrelation);
      continue;
    }
    EXPECT_NEAR(spearman(x, y), want, 1e-9);
    ++compared;
  }
  EXPECT_GT(compared, 800);
}

TEST(Spearman, Properties) {
  Rng rng(32);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 3 + rng.below(20);
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = 0.1 + rng.uniform() * 5;
    for (auto& v : y) v = rng.uniform();
    if (trial % 3 == 0) y = random_tied(rng, n);
    double r;
    try {
      r = spearman(x, y);
    } catch (const UndefinedCorrelation&) {
      continue;
    }
    EXPECT_GE(r, -1.0);
    EXPECT_LE(r, 1.0);
    EXPECT_NEAR(spearman(y, x), r, 1e-12);
    std::vector<double> cubed = x;
    for (auto& v : cubed) v = v * v * v;
    EXPECT_NEAR(spearman(cubed, y), r, 1e-12);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    std::vector<double> px(n), py(n);
    for (std::size_t i = 0; i < n; ++i) {
      px[i] = x[perm[i]];
      py[i] = y[perm[i]];
    }
    EXPECT_NEAR(spearman(px, py), r, 1e-12);
  }
}

TEST(Mae, Examples) {
  const std::vector<double> a{0.1, 0.5, 0.9};
  EXPECT_EQ(mae(a, a), 0.0);
  EXPECT_NEAR(mae(std::vector<double>{0.5}, std::vector<double>{0.2}), 0.3, 1e-15);
  EXPECT_THROW(mae(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(mae(a, std::vector<double>{1}), std::invalid_argument);
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> p(10), q(10);
    long double hand = 0;
    for (int i = 0; i < 10; ++i) {
      p[i] = rng.uniform();
      q[i] = rng.uniform();
      hand += std::fabs(static_cast<long double>(p[i]) - q[i]);
    }
    EXPECT_NEAR(mae(p, q), static_cast<double>(hand / 10), 1e-12);
    EXPECT_GT(mae(p, q), 0.0);
  }
}

std::vector<FeatureVector> vectors_from(const std::vector<double>& scores) {
  std::vector<FeatureVector> out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    FeatureVector fv;
    fv.dialogue_id = "d" + std::to_string(i);
    fv.values.fill(1.0);
    fv.values[index(Feature::kTotalUtteranceTime)] = scores[i];
    fv.values[index(Feature::kNumTurns)] = -scores[i];
    fv.values[index(Feature::kNumWords)] = static_cast<double>(i % 2);
    out.push_back(fv);
  }
  return out;
}

TEST(FeatureReport, ScoreAsFeature) {
  const std::vector<double> s{0.1, 0.4, 0.3, 0.8, 0.6};
  const auto features = vectors_from(s);
  std::map<std::string, double> scores;
  for (std::size_t i = 0; i < s.size(); ++i) scores["d" + std::to_string(i)] = s[i];
  const auto rows = feature_correlation_report(features, scores);
  ASSERT_EQ(rows.size(), kNumFeatures);
  EXPECT_EQ(rows[0].label, "Total utterance time");
  EXPECT_DOUBLE_EQ(*rows[index(Feature::kTotalUtteranceTime)].r, 1.0);
  EXPECT_DOUBLE_EQ(*rows[index(Feature::kNumTurns)].r, -1.0);
  EXPECT_TRUE(rows[index(Feature::kNumTurns)].highlighted);
  EXPECT_FALSE(rows[index(Feature::kNumFillers)].r.has_value());
  EXPECT_EQ(rows[index(Feature::kNumFillers)].n, 5u);
  const std::string text = render_correlations(rows, "Behavior");
  EXPECT_NE(text.find("(Voice activity)"), std::string::npos);
  EXPECT_NE(text.find("-1.00 *"), std::string::npos) << text;
}

TEST(FeatureReport, HighlightThreshold) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{3, 5, 1, 4, 2};
  const double r = spearman(x, y);
  const auto row = detail::correlate_row("q", "g", x, y, std::abs(r));
  EXPECT_TRUE(row.highlighted);
  const auto below = detail::correlate_row("q", "g", x, y, std::abs(r) + 1e-9);
  EXPECT_FALSE(below.highlighted);
}

TEST(FeatureReport, MissingValuesDropOut) {
  std::vector<FeatureVector> features = vectors_from({0.1, 0.2, 0.3, 0.4});
  features[2].values[index(Feature::kAvgSwitchingPause)] = std::nan("");
  std::map<std::string, double> scores{{"d0", 0.1}, {"d1", 0.2}, {"d2", 0.3}, {"d3", 0.4}};
  const auto rows = feature_correlation_report(features, scores);
  EXPECT_EQ(rows[index(Feature::kAvgSwitchingPause)].n, 3u);
  scores.erase("d3");
  EXPECT_THROW(feature_correlation_report(features, scores), std::invalid_argument);
}

TEST(SubjectiveReport, AntiMonotoneItem) {
  const std::vector<double> s{0.05, 0.3, 0.5, 0.7, 0.95};
  std::vector<std::pair<std::string, QuestionnaireResponse>> qs;
  std::map<std::string, double> scores;
  for (std::size_t i = 0; i < s.size(); ++i) {
    QuestionnaireResponse q;
    q.items.fill(4);
    q.items[2] = 8 - static_cast<int>(std::ceil(7 * s[i]));
    const std::string id = "d" + std::to_string(i);
    qs.emplace_back(id, q);
    scores[id] = s[i];
  }
  const auto rows = subjective_correlation_report(qs, scores);
  ASSERT_EQ(rows.size(), 19u);
  EXPECT_EQ(rows[2].label, "Q3");
  EXPECT_EQ(rows[2].group, "Robot behaviors");
  EXPECT_EQ(rows[12].group, "Impression on the robot");
  EXPECT_EQ(rows[17].group, "Impression on the dialogue");
  EXPECT_DOUBLE_EQ(*rows[2].r, -1.0);
  qs.resize(2);
  EXPECT_THROW(subjective_correlation_report(qs, scores), std::invalid_argument);
}

TEST(SubjectiveReport, PlantedLinksOnSynthCorpus) {
  SynthConfig cfg;
  cfg.seed = 12;
  const auto [bundle, truth] = generate(cfg);
  const auto scores = dialogue_scores(aggregate_bundle(bundle));
  const auto rows = subjective_correlation_report(scored_questionnaires(bundle, scores), scores);
  EXPECT_GT(*rows[12].r, 0.2);
  EXPECT_LT(*rows[15].r, -0.2);
}

}  // namespace
}  // namespace hleval
