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

#include "epilock/balancing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "epilock/constrained.hpp"
#include "epilock/error.hpp"
#include "epilock/spectral.hpp"

namespace epilock {

namespace {

// Off-diagonal row and column sums of diag(d) X diag(d)^-1 at index k.
inline void sums_at(const Mat& X, const Vec& d, const Vec& inv, Index k, double& row,
                    double& col) {
  row = 0.0;
  col = 0.0;
  const Index n = X.rows();
  for (Index j = 0; j < n; ++j) {
    if (j == k) continue;
    row += X(k, j) * inv[j];
    col += X(j, k) * d[j];
  }
  row *= d[k];
  col *= inv[k];
}

}  // namespace

double balance_imbalance(const Mat& X, const Vec& d) {
  const Vec inv = d.cwiseInverse();
  double worst = 0.0;
  for (Index k = 0; k < X.rows(); ++k) {
    double row, col;
    sums_at(X, d, inv, k, row, col);
    if (row + col > 0) worst = std::max(worst, std::abs(row - col) / (row + col));
  }
  return worst;
}

Vec balance_gradient(const Mat& X, const Vec& d) {
  const Vec inv = d.cwiseInverse();
  Vec g(X.rows());
  for (Index k = 0; k < X.rows(); ++k) {
    double row, col;
    sums_at(X, d, inv, k, row, col);
    g[k] = row - col;
  }
  return g;
}

BalancingResult balance(const Mat& X, double tol, const Vec& start, int max_sweeps) {
  const Index n = X.rows();
  if (X.cols() != n) throw Error(ErrorCode::kValidation, "balance needs a square matrix");
  if ((X.array() < 0).any()) throw Error(ErrorCode::kValidation, "balance needs a nonnegative matrix");
  BalancingResult out;
  out.d = Vec::Ones(n);
  if (n == 1) return out;
  if (!strongly_connected(X)) {
    throw Error(ErrorCode::kNotStronglyConnected, "matrix cannot be balanced");
  }
  Vec d = start.size() == n ? Vec(start.cwiseMax(1e-300)) : Vec::Ones(n);
  Vec inv = d.cwiseInverse();

  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double worst = 0.0;
    for (Index k = 0; k < n; ++k) {
      double row, col;
      sums_at(X, d, inv, k, row, col);
      // Strong connectivity guarantees both sums are positive.
      worst = std::max(worst, std::abs(row - col) / (row + col));
      const double f = std::sqrt(col / row);
      d[k] *= f;
      inv[k] = 1.0 / d[k];
    }
    if (worst <= tol) {
      const double final_imbalance = balance_imbalance(X, d);
      if (final_imbalance <= tol) {
        out.d = d / d[0];
        out.imbalance = final_imbalance;
        out.iterations = sweep;
        return out;
      }
    }
    // Keep the scaling centred so long runs do not drift to overflow.
    if (sweep % 64 == 0) {
      const double centre = std::exp(d.array().log().mean());
      d /= centre;
      inv = d.cwiseInverse();
    }
  }
  const double last = balance_imbalance(X, d);
  throw Error(ErrorCode::kNonConvergence, "Osborne balancing hit the sweep cap", last,
              d / d[0]);
}

HighSpread check_high_spread(const FlowFactors& factors, const DiseaseParams& params,
                             const Vec& s0) {
  const Vec w = transmission_weights(params, s0);
  const Mat P = factors.B.transpose() * w.asDiagonal() * factors.C;
  double threshold;
  if (params.family == Family::kCOVID) {
    threshold = (params.epsilon + params.r_a) /
                (params.beta_a + params.beta_s * params.epsilon / params.r_s);
  } else {
    threshold = params.gamma / params.zeta;
  }
  HighSpread out;
  out.all = true;
  for (Index j = 0; j < P.rows(); ++j) {
    const bool ok = P(j, j) >= threshold;
    out.per_location.push_back(ok);
    out.all = out.all && ok;
  }
  return out;
}

double stability_threshold(const DiseaseParams& params) {
  const double limit = params.alpha_limit();
  if (!(params.alpha < limit)) {
    throw Error(ErrorCode::kInfeasibleAlpha,
                "alpha = " + std::to_string(params.alpha) + " is not below " +
                    std::to_string(limit) + "; the minimum cost lockdown has no solution");
  }
  return 1.0 / b1(params, params.alpha);
}

StabilityScalingInstance to_stability_scaling(const FlowFactors& factors, const Vec& c,
                                              const DiseaseParams& params, const Vec& s0) {
  params.validate();
  const Index n = factors.n();
  if (c.size() != n || s0.size() != n) {
    throw Error(ErrorCode::kValidation, "cost or s0 length differs from the network");
  }
  if ((c.array() <= 0).any()) throw Error(ErrorCode::kValidation, "costs must be positive");
  const double q = stability_threshold(params);
  StabilityScalingInstance inst;
  inst.P = factors.B.transpose() * transmission_weights(params, s0).asDiagonal() * factors.C;
  inst.D = Vec::Constant(n, q);
  inst.c = c;
  if (!strongly_connected(inst.P)) {
    throw Error(ErrorCode::kNotStronglyConnected, "infection-flow matrix is not strongly connected");
  }
  return inst;
}

const char* to_string(SolveMethod method) {
  return method == SolveMethod::kBalancing ? "balancing" : "constrained_sdp";
}

SolveReport solve_unconstrained(const StabilityScalingInstance& inst) {
  const Vec cp = inst.c.cwiseQuotient(inst.D);
  // Cost scaling does not move the optimum; normalizing keeps the gradient
  // check on a fixed scale.
  const Mat X = (cp / cp.maxCoeff()).asDiagonal() * inst.P;
  const BalancingResult bal = balance(X, 1e-12);
  const Vec y = bal.d.cwiseInverse();
  const Vec Py = inst.P * y;

  SolveReport rep;
  rep.method = SolveMethod::kBalancing;
  rep.z_star = inst.D.cwiseProduct(y).cwiseQuotient(Py);
  rep.cost = lockdown_cost(rep.z_star, inst.c, CostSpec{});
  rep.iterations = bal.iterations;
  rep.imbalance = bal.imbalance;
  rep.d_ratio = bal.d.maxCoeff() / bal.d.minCoeff();

  Mat Xb = bal.d.asDiagonal() * X * y.asDiagonal();
  Xb.diagonal().setZero();
  const double scale = Xb.rowwise().sum().maxCoeff();
  rep.zero_gradient = balance_gradient(X, bal.d).cwiseAbs().maxCoeff() / std::max(scale, 1e-300);

  Mat S = rep.z_star.asDiagonal() * inst.P;
  S.diagonal() -= inst.D;
  rep.lambda_reduced = perron(S).value;
  const double lam_tol = 1e-6 * std::max(1.0, inst.D.cwiseAbs().maxCoeff());
  if (std::abs(rep.lambda_reduced) > lam_tol) {
    throw Error(ErrorCode::kNonConvergence,
                "reduction check failed: lambda_max = " + std::to_string(rep.lambda_reduced),
                rep.lambda_reduced, rep.z_star);
  }
  return rep;
}

SolveReport solve(const FlowFactors& factors, const Vec& c, const DiseaseParams& params,
                  const Vec& s0, const CostSpec& cost, const SolveOptions& options) {
  const HighSpread hs = check_high_spread(factors, params, s0);
  const StabilityScalingInstance inst = to_stability_scaling(factors, c, params, s0);

  SolveReport rep;
  bool fallback = cost.kind != CostKind::kInverse;
  if (!fallback) {
    rep = solve_unconstrained(inst);
    const double zmax = rep.z_star.maxCoeff();
    if (hs.all) {
      rep.dispatch_case = 'a';
      // Guaranteed z <= 1 in exact arithmetic; absorb rounding.
      if (zmax > 1.0 && zmax <= 1.0 + 1e-9) {
        rep.z_star = rep.z_star.cwiseMin(1.0);
        rep.clamped = true;
      } else if (zmax > 1.0) {
        rep.unconstrained_exceeds_one = true;
        fallback = true;
      }
    } else if (zmax <= 1.0) {
      rep.dispatch_case = 'b';
    } else {
      rep.unconstrained_exceeds_one = true;
      fallback = true;
    }
  }
  if (fallback) {
    const bool exceeded = rep.unconstrained_exceeds_one;
    ConstrainedOptions copt;
    copt.max_iter = options.max_iter;
    rep = solve_constrained(to_covering(factors, c, params, s0), cost, copt);
    rep.unconstrained_exceeds_one = exceeded;
    rep.dispatch_case = 'c';
  }
  rep.high_spread_holds = hs.all;
  rep.cost_kind = cost;
  rep.cost = lockdown_cost(rep.z_star, c, cost);

  Mat S = rep.z_star.asDiagonal() * inst.P;
  S.diagonal() -= inst.D;
  rep.lambda_reduced = perron(S).value;
  rep.lambda_achieved = spectral_abscissa(assemble_linearization(factors, rep.z_star, params, s0));
  return rep;
}

}  // namespace epilock
