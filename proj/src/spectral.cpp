// Copyright 2026 The epilock Authors.
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

#include "epilock/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "epilock/error.hpp"

namespace epilock {

std::vector<int> strongly_connected_components(const Mat& X) {
  const int n = static_cast<int>(X.rows());
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && X(j, i) != 0.0) adj[i].push_back(j);
    }
  }

  std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<bool> on_stack(n, false);
  // Explicit call stack: (node, next edge position).
  std::vector<std::pair<int, std::size_t>> calls;
  int counter = 0;
  int ncomp = 0;
  for (int root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    calls.emplace_back(root, 0);
    while (!calls.empty()) {
      auto& [v, pos] = calls.back();
      if (pos == 0 && index[v] < 0) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
      }
      if (pos < adj[v].size()) {
        const int w = adj[v][pos++];
        if (index[w] < 0) {
          calls.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = ncomp;
        } while (w != v);
        ++ncomp;
      }
      const int done = v;
      calls.pop_back();
      if (!calls.empty()) {
        const int parent = calls.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
    }
  }
  return comp;
}

bool strongly_connected(const Mat& X) {
  if (X.rows() == 0) return false;
  const auto comp = strongly_connected_components(X);
  return std::all_of(comp.begin(), comp.end(), [](int c) { return c == 0; });
}

namespace {

struct Bounds {
  double lo;
  double hi;
};

// Collatz-Wielandt bounds on the Perron root of the nonnegative matrix
// P + sigma I from a positive vector v, with Pv already computed.
Bounds cw_bounds(const Vec& Pv, const Vec& v, double sigma) {
  Bounds b{INFINITY, -INFINITY};
  for (Index i = 0; i < v.size(); ++i) {
    const double ratio = Pv[i] / v[i] + sigma;
    b.lo = std::min(b.lo, ratio);
    b.hi = std::max(b.hi, ratio);
  }
  return b;
}

void require_metzler(const Mat& P) {
  if (P.rows() != P.cols()) throw Error(ErrorCode::kValidation, "matrix is not square");
  for (Index i = 0; i < P.rows(); ++i) {
    for (Index j = 0; j < P.cols(); ++j) {
      if (i != j && P(i, j) < 0) {
        throw Error(ErrorCode::kValidation, "matrix has a negative off-diagonal entry");
      }
      if (!std::isfinite(P(i, j))) {
        throw Error(ErrorCode::kValidation, "matrix has a non-finite entry");
      }
    }
  }
}

}  // namespace

PerronPair perron(const Mat& P, double tol) {
  return perron(P, Vec::Constant(P.rows(), 1.0 / static_cast<double>(P.rows())), tol);
}

PerronPair perron(const Mat& P, const Vec& start, double tol) {
  require_metzler(P);
  const Index n = P.rows();
  PerronPair out;
  if (n == 1) {
    out.value = P(0, 0);
    out.vector = Vec::Ones(1);
    return out;
  }
  if (!strongly_connected(P)) {
    throw Error(ErrorCode::kNotStronglyConnected, "Perron pair requires a strongly connected matrix");
  }
  const double sigma = P.diagonal().cwiseAbs().maxCoeff() + 1.0;
  const double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
  const double gap_tol = 2.0 * tol * scale;

  Vec v = start.cwiseMax(1e-300);
  v /= v.sum();
  Vec Pv = P * v;
  Bounds b = cw_bounds(Pv, v, sigma);

  const int power_cap = static_cast<int>(
      std::ceil(10.0 * static_cast<double>(n) * std::log(1.0 / tol)));
  int it = 0;
  auto power = [&](int limit) {
    for (int k = 0; k < limit && b.hi - b.lo > gap_tol; ++k, ++it) {
      v = Pv + sigma * v;
      v /= v.sum();
      Pv = P * v;
      b = cw_bounds(Pv, v, sigma);
    }
  };
  // Shift-invert: for mu above the Perron root, (mu I - P)^-1 is a positive
  // matrix with the same Perron vector and a much larger spectral gap.
  auto shift_invert = [&] {
    for (int k = 0; k < 200 && b.hi - b.lo > gap_tol; ++k, ++it) {
      const double mu = (b.hi - sigma) + std::max(b.hi - b.lo, 1e-13 * scale);
      Mat shifted = -P;
      shifted.diagonal().array() += mu;
      Vec w = shifted.partialPivLu().solve(v);
      if (!w.allFinite() || w.minCoeff() <= 0) break;
      v = w / w.sum();
      Pv = P * v;
      b = cw_bounds(Pv, v, sigma);
    }
  };
  power(std::min(power_cap, 50));
  shift_invert();
  // Fallback when the solves lose positivity to rounding.
  power(power_cap);
  shift_invert();

  out.value = 0.5 * (b.lo + b.hi) - sigma;
  out.vector = v;
  out.iterations = it;
  out.residual = (Pv - out.value * v).cwiseAbs().maxCoeff() / v.cwiseAbs().maxCoeff();
  if (b.hi - b.lo > gap_tol) {
    throw Error(ErrorCode::kNonConvergence, "Perron iteration did not converge",
                out.residual, out.vector);
  }
  return out;
}

PerronPair perron_left(const Mat& P, double tol) {
  return perron(Mat(P.transpose()), tol);
}

double spectral_abscissa(const Mat& M, double tol) {
  require_metzler(M);
  const Index n = M.rows();
  const auto comp = strongly_connected_components(M);
  const int ncomp = n == 0 ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  if (ncomp == 1) return perron(M, tol).value;
  double best = -INFINITY;
  for (int c = 0; c < ncomp; ++c) {
    std::vector<Index> idx;
    for (Index i = 0; i < n; ++i) {
      if (comp[i] == c) idx.push_back(i);
    }
    Mat block(idx.size(), idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = 0; b < idx.size(); ++b) block(a, b) = M(idx[a], idx[b]);
    }
    best = std::max(best, perron(block, tol).value);
  }
  return best;
}

StabilityCheck is_stabilizing(const Mat& M, double alpha) {
  // Reducible matrices are split into diagonal blocks; a matrix with no
  // nonzero entry has no block structure to certify.
  if (M.size() == 0 || M.cwiseAbs().maxCoeff() == 0.0) {
    throw Error(ErrorCode::kNotStronglyConnected, "stability check on a zero matrix");
  }
  StabilityCheck out;
  out.lambda = spectral_abscissa(M);
  out.margin = -alpha - out.lambda;
  out.stabilizing = out.lambda <= -alpha + 1e-9;
  return out;
}

double initial_growth(const FlowFactors& factors, const DiseaseParams& params,
                      const Vec& s0) {
  const Mat M = assemble_linearization(factors, Vec::Ones(factors.n()), params, s0);
  return spectral_abscissa(M);
}

DiseaseParams calibrate_beta(const FlowFactors& factors, DiseaseParams params,
                             const Vec& s0, double target_growth) {
  params.validate();
  const Index n = factors.n();
  if (params.family != Family::kCOVID) {
    const Mat WA = transmission_weights(params, s0).asDiagonal() *
                   apply_lockdown(factors, Vec::Ones(n));
    const double rho = perron(WA).value;
    if (!(target_growth + params.gamma > 0) || !(rho > 0)) {
      throw Error(ErrorCode::kCalibrationRange,
                  "target growth must exceed -gamma for SIS/SIR calibration");
    }
    params.zeta = (target_growth + params.gamma) / rho;
    return params;
  }

  auto growth = [&](double beta_s) {
    DiseaseParams p = params;
    p.beta_s = beta_s;
    p.beta_a = params.alpha_hat * beta_s;
    return initial_growth(factors, p, s0);
  };
  const double floor = std::max(-(params.epsilon + params.r_a), -params.r_s);
  if (!(target_growth > floor)) {
    throw Error(ErrorCode::kCalibrationRange,
                "target growth must exceed -min(r_s, eps + r_a)");
  }
  double lo = 0.0;
  double hi = 1.0;
  while (growth(hi) < target_growth) {
    lo = hi;
    hi *= 2.0;
    if (hi > std::ldexp(1.0, 40)) {
      throw Error(ErrorCode::kCalibrationRange, "no beta_s up to 2^40 reaches the target growth");
    }
  }
  // lambda_max is increasing in beta_s; the bracket endpoints confirm it.
  if (!(growth(lo) <= target_growth && growth(hi) >= target_growth)) {
    throw Error(ErrorCode::kCalibrationRange, "growth rate is not monotone on the bracket");
  }
  for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    (growth(mid) < target_growth ? lo : hi) = mid;
  }
  params.beta_s = 0.5 * (lo + hi);
  params.beta_a = params.alpha_hat * params.beta_s;
  const double achieved = growth(params.beta_s);
  if (std::abs(achieved - target_growth) > 1e-8) {
    throw Error(ErrorCode::kCalibrationRange,
                "calibration missed the target by " + std::to_string(achieved - target_growth));
  }
  return params;
}

double reproduction_number(const FlowFactors& factors, const Vec& z,
                           const DiseaseParams& params, const Vec& s0) {
  const Mat WA = transmission_weights(params, s0).asDiagonal() * apply_lockdown(factors, z);
  return perron(WA).value * b1(params, 0.0);
}

double alpha_to_r(const DiseaseParams& params) {
  const double limit = params.alpha_limit();
  if (!(params.alpha >= 0 && params.alpha < limit)) {
    throw Error(ErrorCode::kInfeasibleAlpha, "alpha outside [0, " + std::to_string(limit) + ")");
  }
  const double base = b1(params, 0.0);
  if (!(base > 0)) throw Error(ErrorCode::kDegenerateRates, "b1(0) must be positive");
  return base / b1(params, params.alpha);
}

double r_to_alpha(const DiseaseParams& params, double r) {
  if (!(r > 0 && r <= 1)) throw Error(ErrorCode::kValidation, "r must lie in (0, 1]");
  const double limit = params.alpha_limit();
  if (r == 1.0) return 0.0;
  if (params.family != Family::kCOVID) return params.gamma * (1.0 - r);
  const double base = b1(params, 0.0);
  if (!(base > 0)) throw Error(ErrorCode::kDegenerateRates, "b1(0) must be positive");
  // b1(0)/b1(alpha) falls from 1 to 0 on [0, limit).
  double lo = 0.0;
  double hi = limit;
  for (int k = 0; k < 300 && hi - lo > 0; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (base / b1(params, mid) > r ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace epilock
