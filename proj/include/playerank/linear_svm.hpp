#pragma once

// Primal L2-regularized hinge-loss linear SVM with an unregularized bias,
//
//   min_{w,b}  1/2 |w|^2 + C * sum_i max(0, 1 - y_i (w . x_i + b)),
//
// solved through its dual with sequential minimal optimization (two-variable
// working sets picked by second-order gain). The bias appears in the dual as
// the equality constraint sum_i y_i alpha_i = 0, so updates move pairs.
// All loops run in a fixed order, so results are bit-reproducible.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "playerank/error.hpp"

namespace playerank::svm {

/// Dense row-major design matrix with +-1 labels.
struct Problem {
  std::size_t dim = 0;
  std::vector<double> x;  // rows() * dim
  std::vector<int> y;

  std::size_t rows() const noexcept { return y.size(); }
  std::span<const double> row(std::size_t i) const {
    return {x.data() + i * dim, dim};
  }
};

struct Solution {
  std::vector<double> w;
  double b = 0.0;
  long iterations = 0;
  bool converged = false;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

inline double hinge_objective(std::span<const double> w, double b, const Problem& p, double C) {
  double reg = 0.5 * dot(w, w);
  double loss = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    loss += std::max(0.0, 1.0 - p.y[i] * (dot(w, p.row(i)) + b));
  }
  return reg + C * loss;
}

/// Solves the problem until the maximal KKT violation drops below
/// `tolerance` or `max_iterations` pair updates have been made.
inline Solution solve(const Problem& p, double C, double tolerance, long max_iterations) {
  const std::size_t n = p.rows();
  if (n == 0) throw Error(ErrorCode::kEmptyTrainingSet, "no rows");
  if (!(C > 0.0) || !(tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "C and tolerance must be positive");
  }
  constexpr double kTau = 1e-12;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> gram(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = dot(p.row(i), p.row(j));
      gram[i * n + j] = v;
      gram[j * n + i] = v;
    }
  }
  auto K = [&](std::size_t i, std::size_t j) { return gram[i * n + j]; };
  const std::vector<int>& y = p.y;

  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // Q alpha - 1
  auto at_upper = [&](std::size_t t) { return alpha[t] >= C; };
  auto at_lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

  Solution sol;
  while (sol.iterations < max_iterations) {
    // i: maximal violator in the "up" set.
    double gmax = -kInf;
    std::ptrdiff_t i = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] == +1) {
        if (!at_upper(t) && -grad[t] >= gmax) { gmax = -grad[t]; i = static_cast<std::ptrdiff_t>(t); }
      } else {
        if (!at_lower(t) && grad[t] >= gmax) { gmax = grad[t]; i = static_cast<std::ptrdiff_t>(t); }
      }
    }
    // j: best second-order partner in the "low" set.
    double gmax2 = -kInf;
    std::ptrdiff_t j = -1;
    double best_gain = kInf;
    if (i >= 0) {
      const auto ui = static_cast<std::size_t>(i);
      for (std::size_t t = 0; t < n; ++t) {
        double grad_diff;
        double quad;
        if (y[t] == +1) {
          if (at_lower(t)) continue;
          gmax2 = std::max(gmax2, grad[t]);
          grad_diff = gmax + grad[t];
          quad = K(ui, ui) + K(t, t) - 2.0 * y[ui] * K(ui, t);
        } else {
          if (at_upper(t)) continue;
          gmax2 = std::max(gmax2, -grad[t]);
          grad_diff = gmax - grad[t];
          quad = K(ui, ui) + K(t, t) + 2.0 * y[ui] * K(ui, t);
        }
        if (grad_diff > 0.0) {
          const double gain = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
          if (gain <= best_gain) { best_gain = gain; j = static_cast<std::ptrdiff_t>(t); }
        }
      }
    }
    if (i < 0 || j < 0 || gmax + gmax2 < tolerance) {
      sol.converged = true;
      break;
    }
    ++sol.iterations;

    const auto ui = static_cast<std::size_t>(i);
    const auto uj = static_cast<std::size_t>(j);
    const double old_ai = alpha[ui];
    const double old_aj = alpha[uj];
    const double qij = y[ui] * y[uj] * K(ui, uj);
    if (y[ui] != y[uj]) {
      double quad = K(ui, ui) + K(uj, uj) + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[ui] - grad[uj]) / quad;
      const double diff = alpha[ui] - alpha[uj];
      alpha[ui] += delta;
      alpha[uj] += delta;
      if (diff > 0.0) {
        if (alpha[uj] < 0.0) { alpha[uj] = 0.0; alpha[ui] = diff; }
      } else {
        if (alpha[ui] < 0.0) { alpha[ui] = 0.0; alpha[uj] = -diff; }
      }
      if (diff > 0.0) {
        if (alpha[ui] > C) { alpha[ui] = C; alpha[uj] = C - diff; }
      } else {
        if (alpha[uj] > C) { alpha[uj] = C; alpha[ui] = C + diff; }
      }
    } else {
      double quad = K(ui, ui) + K(uj, uj) - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[ui] - grad[uj]) / quad;
      const double sum = alpha[ui] + alpha[uj];
      alpha[ui] -= delta;
      alpha[uj] += delta;
      if (sum > C) {
        if (alpha[ui] > C) { alpha[ui] = C; alpha[uj] = sum - C; }
      } else {
        if (alpha[uj] < 0.0) { alpha[uj] = 0.0; alpha[ui] = sum; }
      }
      if (sum > C) {
        if (alpha[uj] > C) { alpha[uj] = C; alpha[ui] = sum - C; }
      } else {
        if (alpha[ui] < 0.0) { alpha[ui] = 0.0; alpha[uj] = sum; }
      }
    }
    const double dai = alpha[ui] - old_ai;
    const double daj = alpha[uj] - old_aj;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += y[t] * (y[ui] * K(ui, t) * dai + y[uj] * K(uj, t) * daj);
    }
  }

  sol.w.assign(p.dim, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] == 0.0) continue;
    const double coef = alpha[t] * y[t];
    const auto r = p.row(t);
    for (std::size_t k = 0; k < p.dim; ++k) sol.w[k] += coef * r[k];
  }

  // Bias from free multipliers, else the midpoint of the feasible interval.
  double ub = kInf;
  double lb = -kInf;
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (at_upper(t)) {
      if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (at_lower(t)) {
      if (y[t] == +1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  sol.b = -rho;
  return sol;
}

}  // namespace playerank::svm
