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

#ifndef HLEVAL_LOOCV_HPP_
#define HLEVAL_LOOCV_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hleval/features.hpp"
#include "hleval/matrix.hpp"
#include "hleval/statistics.hpp"
#include "hleval/svr.hpp"

namespace hleval {

struct LoocvPrediction {
  std::string dialogue_id;
  double actual = 0.0;
  double predicted = 0.0;
  double baseline = 0.0;  // mean of the fold's training targets

  double abs_error() const { return std::abs(predicted - actual); }
  friend bool operator==(const LoocvPrediction&, const LoocvPrediction&) = default;
};

struct EvaluationResult {
  std::vector<LoocvPrediction> predictions;  // sorted by dialogue_id
  double mae = 0.0;
  double baseline_mae = 0.0;
  bool all_converged = true;
  int imputed_folds = 0;  // folds whose training data had missing values

  friend bool operator==(const EvaluationResult&, const EvaluationResult&) = default;
};

/// Model for fold `holdout`: standardizer and SVR fitted on every other row.
inline SvrModel train_fold(const Matrix& x, std::span<const double> y, std::size_t holdout,
                           const SvrHyperparams& hp) {
  std::vector<double> ty;
  ty.reserve(y.size() - 1);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (i != holdout) ty.push_back(y[i]);
  }
  return svr_train(x.without_row(holdout), ty, hp);
}

/// Leave-one-out evaluation. Each held-out row is predicted by a model whose
/// standardization and training never see it; the baseline predicts the
/// training-fold mean.
inline EvaluationResult loocv(std::span<const std::string> ids, const Matrix& x,
                              std::span<const double> y, const SvrHyperparams& hp) {
  const std::size_t n = y.size();
  if (n < 3) throw std::invalid_argument("loocv: need at least 3 rows");
  if (x.rows() != n || ids.size() != n) throw std::invalid_argument("loocv: size mismatch");

  EvaluationResult result;
  const double total = std::accumulate(y.begin(), y.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const SvrModel model = train_fold(x, y, i, hp);
    result.all_converged = result.all_converged && model.converged;
    const auto& imputed = model.standardizer.imputed;
    if (std::any_of(imputed.begin(), imputed.end(), [](int c) { return c > 0; })) {
      ++result.imputed_folds;
    }
    result.predictions.push_back({ids[i], y[i], svr_predict(model, x.row(i)),
                                  (total - y[i]) / static_cast<double>(n - 1)});
  }
  std::sort(result.predictions.begin(), result.predictions.end(),
            [](const auto& a, const auto& b) { return a.dialogue_id < b.dialogue_id; });
  std::vector<double> pred, base, actual;
  for (const auto& p : result.predictions) {
    pred.push_back(p.predicted);
    base.push_back(p.baseline);
    actual.push_back(p.actual);
  }
  result.mae = mae(pred, actual);
  result.baseline_mae = mae(base, actual);
  return result;
}

/// Design matrix and targets for scored dialogues, in feature order.
struct RegressionData {
  std::vector<std::string> ids;
  Matrix x;
  std::vector<double> y;
};

inline RegressionData regression_data(std::span<const FeatureVector> features,
                                      const std::map<std::string, double>& scores) {
  RegressionData data;
  std::vector<std::vector<double>> rows;
  for (const auto& fv : features) {
    auto it = scores.find(fv.dialogue_id);
    if (it == scores.end()) continue;
    data.ids.push_back(fv.dialogue_id);
    rows.emplace_back(fv.values.begin(), fv.values.end());
    data.y.push_back(it->second);
  }
  data.x = rows.empty() ? Matrix(0, kNumFeatures) : Matrix::from_rows(rows);
  return data;
}

}  // namespace hleval

#endif  // HLEVAL_LOOCV_HPP_
