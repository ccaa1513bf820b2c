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

// Generates a small synthetic corpus, scores it, and runs the
// leave-one-out evaluation.

#include <iomanip>
#include <iostream>

#include "hleval/features.hpp"
#include "hleval/loocv.hpp"
#include "hleval/sampling.hpp"
#include "hleval/statistics.hpp"
#include "hleval/synth.hpp"

int main() {
  hleval::SynthConfig cfg;
  cfg.n_dialogues = 24;
  cfg.n_annotators = 30;
  cfg.seed = 7;
  const auto [bundle, truth] = hleval::generate(cfg);

  const auto samples = hleval::aggregate_bundle(bundle);
  const auto scores = hleval::dialogue_scores(samples);
  const auto features = hleval::extract_features(bundle);

  const auto rows = hleval::feature_correlation_report(features, scores);
  std::cout << hleval::render_correlations(rows, "Behavior") << "\n";

  const auto data = hleval::regression_data(features, scores);
  const auto result = hleval::loocv(data.ids, data.x, data.y, {});
  std::cout << std::fixed << std::setprecision(4) << "MAE " << result.mae << "  baseline "
            << result.baseline_mae << "\n";
  return 0;
}
