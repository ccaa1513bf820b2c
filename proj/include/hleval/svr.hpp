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

#ifndef HLEVAL_SVR_HPP_
#define HLEVAL_SVR_HPP_

// Epsilon-insensitive support vector regression trained by sequential
// minimal optimization.
//
// The dual is solved in the 2n-variable form
//
//   min  1/2 a'Qa + p'a   s.t.  y'a = 0,  0 <= a <= C
//
// with a = (alpha, alpha*), y = (+1..., -1...), Q = yy' .* [K K; K K] and
// p = (eps - t, eps + t) for targets t. The regression coefficients are
// beta = alpha - alpha*.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hleval/matrix.hpp"
#include "json.hpp"

namespace hleval {

// ---------------------------------------------------------------------------
// Standardization

/// Per-column z-scoring fitted on training rows. Missing entries (NaN) are
/// replaced by the column mean of the observed training values, which maps
/// them to 0.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;  // population standard deviation
  std::vector<bool> constant;
  std::vector<int> imputed;  // missing training entries per column

  static Standardizer fit(const Matrix& x) {
    if (x.rows() < 2) throw std::invalid_argument("standardize: need at least 2 rows");
    Standardizer s;
    const std::size_t d = x.cols();
    s.mean.assign(d, 0.0);
    s.scale.assign(d, 1.0);
    s.constant.assign(d, false);
    s.imputed.assign(d, 0);
    for (std::size_t j = 0; j < d; ++j) {
      double sum = 0.0;
      int observed = 0;
      for (std::size_t i = 0; i < x.rows(); ++i) {
        if (std::isnan(x(i, j))) {
          ++s.imputed[j];
        } else {
          sum += x(i, j);
          ++observed;
        }
      }
      const double m = observed == 0 ? 0.0 : sum / observed;
      double ss = 0.0;
      for (std::size_t i = 0; i < x.rows(); ++i) {
        const double v = std::isnan(x(i, j)) ? m : x(i, j);
        ss += (v - m) * (v - m);
      }
      const double sd = std::sqrt(ss / static_cast<double>(x.rows()));
      s.mean[j] = m;
      if (sd <= 1e-12 * std::max(1.0, std::abs(m))) {
        s.constant[j] = true;
      } else {
        s.scale[j] = sd;
      }
    }
    return s;
  }

  std::size_t dims() const { return mean.size(); }

  std::vector<double> apply(std::span<const double> row) const {
    if (row.size() != dims()) throw std::invalid_argument("standardize: width mismatch");
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
      out[j] = (constant[j] || std::isnan(row[j])) ? 0.0 : (row[j] - mean[j]) / scale[j];
    }
    return out;
  }

  Matrix apply(const Matrix& x) const {
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const auto r = apply(x.row(i));
      std::copy(r.begin(), r.end(), out.row(i).begin());
    }
    return out;
  }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

// ---------------------------------------------------------------------------
// Kernels and hyperparameters

enum class Kernel { kRbf, kLinear };

inline std::string_view to_string(Kernel k) { return k == Kernel::kRbf ? "rbf" : "linear"; }

inline Kernel parse_kernel(std::string_view s) {
  if (s == "rbf") return Kernel::kRbf;
  if (s == "linear") return Kernel::kLinear;
  throw std::invalid_argument("unknown kernel \"" + std::string(s) + "\"");
}

struct SvrHyperparams {
  double c = 1.0;
  double epsilon = 0.05;
  Kernel kernel = Kernel::kRbf;
  double gamma = 0.0;  // 0 selects 1 / n_features
  double tolerance = 1e-3;
  std::int64_t max_iterations = 0;  // 0 selects 100000 + 1000 * n

  void check() const {
    if (!(c > 0.0)) throw std::invalid_argument("C must be positive");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");
    if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be positive");
    if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (max_iterations < 0) throw std::invalid_argument("max_iterations must be >= 0");
  }
  friend bool operator==(const SvrHyperparams&, const SvrHyperparams&) = default;
};

inline double kernel_value(Kernel kernel, double gamma, std::span<const double> a,
                           std::span<const double> b) {
  double acc = 0.0;
  if (kernel == Kernel::kLinear) {
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
  }
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-gamma * acc);
}

inline Matrix kernel_matrix(const Matrix& x, Kernel kernel, double gamma) {
  Matrix k(x.rows(), x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = i; j < x.rows(); ++j) {
      k(i, j) = k(j, i) = kernel_value(kernel, gamma, x.row(i), x.row(j));
    }
  }
  return k;
}

// ---------------------------------------------------------------------------
// Dual solver

struct DualSolution {
  std::vector<double> beta;  // alpha - alpha*, one per training point
  double bias = 0.0;
  bool converged = false;
  std::int64_t iterations = 0;
  double max_violation = 0.0;  // m(a) - M(a) at exit
  double objective = 0.0;      // dual objective W(beta), to be maximized
};

/// W(beta) = -1/2 beta'K beta - eps * sum|beta| + sum t_i beta_i.
inline double svr_dual_objective(const Matrix& k, std::span<const double> targets,
                                 std::span<const double> beta, double epsilon) {
  double quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    for (std::size_t j = 0; j < beta.size(); ++j) quad += beta[i] * beta[j] * k(i, j);
    lin += targets[i] * beta[i] - epsilon * std::abs(beta[i]);
  }
  return -0.5 * quad + lin;
}

/// SMO with maximal-violating-pair selection. Ties go to the lowest index,
/// so the iteration sequence is fully deterministic. Stops when the
/// violation gap drops below `tolerance` or the iteration cap is reached.
inline DualSolution solve_svr_dual(const Matrix& k, std::span<const double> targets,
                                   double c, double epsilon, double tolerance,
                                   std::int64_t max_iterations) {
  const std::size_t n = targets.size();
  if (k.rows() != n || k.cols() != n) throw std::invalid_argument("kernel size mismatch");
  const std::size_t m = 2 * n;
  constexpr double kTau = 1e-12;

  auto sign = [n](std::size_t t) { return t < n ? 1.0 : -1.0; };
  auto q = [&](std::size_t s, std::size_t t) {
    return sign(s) * sign(t) * k(s % n, t % n);
  };

  std::vector<double> a(m, 0.0);
  std::vector<double> grad(m);
  for (std::size_t i = 0; i < n; ++i) {
    grad[i] = epsilon - targets[i];
    grad[i + n] = epsilon + targets[i];
  }
  auto in_up = [&](std::size_t t) { return sign(t) > 0 ? a[t] < c : a[t] > 0.0; };
  auto in_low = [&](std::size_t t) { return sign(t) > 0 ? a[t] > 0.0 : a[t] < c; };

  DualSolution sol;
  if (max_iterations == 0) max_iterations = 100000 + 1000 * static_cast<std::int64_t>(n);
  for (;;) {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    std::size_t i = m, j = m;
    for (std::size_t t = 0; t < m; ++t) {
      const double v = -sign(t) * grad[t];
      if (in_up(t) && v > gmax) {
        gmax = v;
        i = t;
      }
      if (in_low(t) && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    sol.max_violation = (i == m || j == m) ? 0.0 : gmax - gmin;
    if (i == m || j == m || sol.max_violation < tolerance) {
      sol.converged = true;
      break;
    }
    if (sol.iterations >= max_iterations) break;
    ++sol.iterations;

    const double old_i = a[i], old_j = a[j];
    const double qii = q(i, i), qjj = q(j, j), qij = q(i, j);
    if (sign(i) != sign(j)) {
      double quad = qii + qjj + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0.0) {
        if (a[j] < 0.0) {
          a[j] = 0.0;
          a[i] = diff;
        }
      } else if (a[i] < 0.0) {
        a[i] = 0.0;
        a[j] = -diff;
      }
      if (diff > 0.0) {
        if (a[i] > c) {
          a[i] = c;
          a[j] = c - diff;
        }
      } else if (a[j] > c) {
        a[j] = c;
        a[i] = c + diff;
      }
    } else {
      double quad = qii + qjj - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > c) {
        if (a[i] > c) {
          a[i] = c;
          a[j] = sum - c;
        }
      } else if (a[j] < 0.0) {
        a[j] = 0.0;
        a[i] = sum;
      }
      if (sum > c) {
        if (a[j] > c) {
          a[j] = c;
          a[i] = sum - c;
        }
      } else if (a[i] < 0.0) {
        a[i] = 0.0;
        a[j] = sum;
      }
    }
    const double di = a[i] - old_i, dj = a[j] - old_j;
    for (std::size_t t = 0; t < m; ++t) grad[t] += q(t, i) * di + q(t, j) * dj;
  }

  // Bias: average over free variables, else the midpoint of the feasible
  // interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  int n_free = 0;
  for (std::size_t t = 0; t < m; ++t) {
    const double yg = sign(t) * grad[t];
    const bool at_upper = a[t] >= c;
    const bool at_lower = a[t] <= 0.0;
    if (at_upper) {
      if (sign(t) < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (at_lower) {
      if (sign(t) > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      free_sum += yg;
      ++n_free;
    }
  }
  const double rho = n_free > 0 ? free_sum / n_free : (ub + lb) / 2.0;
  sol.bias = -rho;
  sol.beta.resize(n);
  for (std::size_t t = 0; t < n; ++t) sol.beta[t] = a[t] - a[t + n];
  sol.objective = svr_dual_objective(k, targets, sol.beta, epsilon);
  return sol;
}

// ---------------------------------------------------------------------------
// Model

struct SvrModel {
  SvrHyperparams hyperparams;  // gamma resolved
  Standardizer standardizer;
  Matrix support_vectors;  // standardized rows with nonzero beta
  std::vector<double> coefficients;
  double bias = 0.0;
  bool converged = false;
  std::int64_t iterations = 0;
  double dual_objective = 0.0;

  friend bool operator==(const SvrModel&, const SvrModel&) = default;
};

inline constexpr std::string_view kModelFormat = "hleval-svr";
inline constexpr int kModelVersion = 1;

/// Fits the standardizer on `x`, then solves the dual on the standardized
/// rows.
inline SvrModel svr_train(const Matrix& x, std::span<const double> y,
                          const SvrHyperparams& hp) {
  hp.check();
  if (x.rows() < 2) throw std::invalid_argument("svr_train: need at least 2 rows");
  if (x.rows() != y.size()) throw std::invalid_argument("svr_train: row/target mismatch");
  SvrModel model;
  model.hyperparams = hp;
  if (model.hyperparams.gamma == 0.0) {
    model.hyperparams.gamma = 1.0 / static_cast<double>(std::max<std::size_t>(x.cols(), 1));
  }
  model.standardizer = Standardizer::fit(x);
  const Matrix z = model.standardizer.apply(x);
  const Matrix k = kernel_matrix(z, hp.kernel, model.hyperparams.gamma);
  const DualSolution sol =
      solve_svr_dual(k, y, hp.c, hp.epsilon, hp.tolerance, hp.max_iterations);

  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < sol.beta.size(); ++i) {
    if (sol.beta[i] != 0.0) support.push_back(i);
  }
  model.support_vectors = Matrix(support.size(), z.cols());
  for (std::size_t s = 0; s < support.size(); ++s) {
    std::copy(z.row(support[s]).begin(), z.row(support[s]).end(),
              model.support_vectors.row(s).begin());
    model.coefficients.push_back(sol.beta[support[s]]);
  }
  model.bias = sol.bias;
  model.converged = sol.converged;
  model.iterations = sol.iterations;
  model.dual_objective = sol.objective;
  return model;
}

/// Unclamped decision value for a raw feature row.
inline double svr_decision(const SvrModel& model, std::span<const double> x) {
  const std::vector<double> z = model.standardizer.apply(x);
  double f = model.bias;
  for (std::size_t s = 0; s < model.coefficients.size(); ++s) {
    f += model.coefficients[s] * kernel_value(model.hyperparams.kernel,
                                              model.hyperparams.gamma,
                                              model.support_vectors.row(s), z);
  }
  return f;
}

/// Predicted score, clamped to [0, 1].
inline double svr_predict(const SvrModel& model, std::span<const double> x) {
  return std::clamp(svr_decision(model, x), 0.0, 1.0);
}

inline nlohmann::ordered_json to_json(const SvrModel& m) {
  using J = nlohmann::ordered_json;
  J svs = J::array();
  for (std::size_t i = 0; i < m.support_vectors.rows(); ++i) {
    svs.push_back(std::vector<double>(m.support_vectors.row(i).begin(),
                                      m.support_vectors.row(i).end()));
  }
  const auto& hp = m.hyperparams;
  return J{{"format", kModelFormat},
           {"version", kModelVersion},
           {"hyperparams",
            {{"C", hp.c},
             {"epsilon", hp.epsilon},
             {"kernel", to_string(hp.kernel)},
             {"gamma", hp.gamma},
             {"tolerance", hp.tolerance},
             {"max_iterations", hp.max_iterations}}},
           {"standardizer",
            {{"mean", m.standardizer.mean},
             {"scale", m.standardizer.scale},
             {"constant", m.standardizer.constant},
             {"imputed", m.standardizer.imputed}}},
           {"n_features", m.standardizer.dims()},
           {"support_vectors", std::move(svs)},
           {"coefficients", m.coefficients},
           {"bias", m.bias},
           {"converged", m.converged},
           {"iterations", m.iterations},
           {"dual_objective", m.dual_objective}};
}

inline SvrModel model_from_json(const nlohmann::json& j) {
  if (j.at("format").get<std::string>() != kModelFormat ||
      j.at("version").get<int>() != kModelVersion) {
    throw std::invalid_argument("not a version 1 hleval-svr model");
  }
  SvrModel m;
  const auto& hp = j.at("hyperparams");
  m.hyperparams.c = hp.at("C").get<double>();
  m.hyperparams.epsilon = hp.at("epsilon").get<double>();
  m.hyperparams.kernel = parse_kernel(hp.at("kernel").get<std::string>());
  m.hyperparams.gamma = hp.at("gamma").get<double>();
  m.hyperparams.tolerance = hp.at("tolerance").get<double>();
  m.hyperparams.max_iterations = hp.at("max_iterations").get<std::int64_t>();
  const auto& st = j.at("standardizer");
  m.standardizer.mean = st.at("mean").get<std::vector<double>>();
  m.standardizer.scale = st.at("scale").get<std::vector<double>>();
  m.standardizer.constant = st.at("constant").get<std::vector<bool>>();
  m.standardizer.imputed = st.at("imputed").get<std::vector<int>>();
  const auto d = j.at("n_features").get<std::size_t>();
  const auto svs = j.at("support_vectors").get<std::vector<std::vector<double>>>();
  m.support_vectors = svs.empty() ? Matrix(0, d) : Matrix::from_rows(svs);
  m.coefficients = j.at("coefficients").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  m.converged = j.at("converged").get<bool>();
  m.iterations = j.at("iterations").get<std::int64_t>();
  m.dual_objective = j.at("dual_objective").get<double>();
  if (m.coefficients.size() != m.support_vectors.rows() || m.standardizer.dims() != d) {
    throw std::invalid_argument("inconsistent model file");
  }
  return m;
}

}  // namespace hleval

#endif  // HLEVAL_SVR_HPP_
