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

#ifndef HLEVAL_TESTS_ORACLES_DUAL_ORACLE_HPP_
#define HLEVAL_TESTS_ORACLES_DUAL_ORACLE_HPP_

// Exhaustive maximizer of the epsilon-SVR dual for tiny problems.
//
// Every coefficient is in one of five states: at -C, free negative, zero,
// free positive, at +C. For each of the 5^n patterns the free coefficients
// and the equality multiplier solve a linear stationarity system; feasible
// solutions are scored and the best one kept. The dual is concave, so its
// maximizer is one of these candidates.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace hleval::oracle {

struct DualOptimum {
  std::vector<double> beta;
  double objective = -std::numeric_limits<double>::infinity();
};

inline double dual_value(const std::vector<std::vector<double>>& k,
                         const std::vector<double>& y, const std::vector<double>& beta,
                         double eps) {
  double quad = 0, lin = 0;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    for (std::size_t j = 0; j < beta.size(); ++j) quad += beta[i] * beta[j] * k[i][j];
    lin += y[i] * beta[i] - eps * std::fabs(beta[i]);
  }
  return -0.5 * quad + lin;
}

// Gaussian elimination with partial pivoting; nullopt when singular.
inline std::optional<std::vector<double>> solve_linear(std::vector<std::vector<double>> a,
                                                       std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::fabs(a[r][c]) > std::fabs(a[p][c])) p = r;
    }
    if (std::fabs(a[p][c]) < 1e-12) return std::nullopt;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

inline DualOptimum brute_force_dual(const std::vector<std::vector<double>>& k,
                                    const std::vector<double>& y, double c, double eps) {
  const std::size_t n = y.size();
  std::size_t patterns = 1;
  for (std::size_t i = 0; i < n; ++i) patterns *= 5;
  DualOptimum best;
  std::vector<int> state(n);
  for (std::size_t code = 0; code < patterns; ++code) {
    std::size_t rest = code;
    for (std::size_t i = 0; i < n; ++i) {
      state[i] = static_cast<int>(rest % 5) - 2;  // -2:-C -1:free- 0:zero 1:free+ 2:+C
      rest /= 5;
    }
    std::vector<double> beta(n, 0.0);
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < n; ++i) {
      if (state[i] == -2) beta[i] = -c;
      if (state[i] == 2) beta[i] = c;
      if (state[i] == -1 || state[i] == 1) free.push_back(i);
    }
    if (!free.empty()) {
      // Unknowns: beta over free set, then b. For free i with sign s:
      //   sum_j K_ij beta_j + b = y_i - eps * s
      // plus sum beta = 0.
      const std::size_t m = free.size() + 1;
      std::vector<std::vector<double>> a(m, std::vector<double>(m, 0.0));
      std::vector<double> rhs(m, 0.0);
      for (std::size_t r = 0; r < free.size(); ++r) {
        const std::size_t i = free[r];
        double fixed = 0;
        for (std::size_t j = 0; j < n; ++j) {
          if (state[j] == -2 || state[j] == 2) fixed += k[i][j] * beta[j];
        }
        for (std::size_t cc = 0; cc < free.size(); ++cc) a[r][cc] = k[i][free[cc]];
        a[r][m - 1] = 1.0;
        rhs[r] = y[i] - eps * state[i] - fixed;
      }
      double fixed_sum = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (state[j] == -2 || state[j] == 2) fixed_sum += beta[j];
      }
      for (std::size_t cc = 0; cc < free.size(); ++cc) a[m - 1][cc] = 1.0;
      rhs[m - 1] = -fixed_sum;
      auto sol = solve_linear(a, rhs);
      if (!sol) continue;
      bool ok = true;
      for (std::size_t r = 0; r < free.size(); ++r) {
        const double v = (*sol)[r];
        const int s = state[free[r]];
        if ((s > 0 && (v < 0 || v > c)) || (s < 0 && (v > 0 || v < -c))) ok = false;
        beta[free[r]] = v;
      }
      if (!ok) continue;
    } else {
      double s = 0;
      for (double b : beta) s += b;
      if (std::fabs(s) > 1e-12) continue;
    }
    const double w = dual_value(k, y, beta, eps);
    if (w > best.objective) {
      best.objective = w;
      best.beta = beta;
    }
  }
  return best;
}

}  // namespace hleval::oracle

#endif  // HLEVAL_TESTS_ORACLES_DUAL_ORACLE_HPP_
