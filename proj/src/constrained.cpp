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

#include "epilock/constrained.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "epilock/error.hpp"
#include "epilock/spectral.hpp"

namespace epilock {

namespace {

// Cost of location i as a function of t = u_i / lb_i = 1 / z_i.
double phi(const CostSpec& cost, double t) {
  switch (cost.kind) {
    case CostKind::kInverse: return t - 1.0;
    case CostKind::kPower: return std::pow(t, cost.param) - 1.0;
    case CostKind::kCapped: return std::min(t, cost.param) - 1.0;
  }
  return 0.0;
}

double dphi(const CostSpec& cost, double t) {
  switch (cost.kind) {
    case CostKind::kInverse: return 1.0;
    case CostKind::kPower: return cost.param * std::pow(t, cost.param - 1.0);
    case CostKind::kCapped: return t < cost.param ? 1.0 : 0.0;
  }
  return 0.0;
}

double objective(const CoveringInstance& inst, const CostSpec& cost, const Vec& u) {
  double total = 0.0;
  for (Index i = 0; i < u.size(); ++i) total += inst.costs[i] * phi(cost, u[i] / inst.lb[i]);
  return total;
}

bool is_convex(const CostSpec& cost) {
  return cost.kind == CostKind::kInverse ||
         (cost.kind == CostKind::kPower && cost.param >= 1.0);
}

// Lagrangian dual over the balancing weights. For weights w the minimizer of
// sum_i w_i (Q y)_i / y_i over y > 0 is the balancing of diag(w) Q, and
// u = max(lb, (Q y) / y) is always feasible. Weights move multiplicatively
// toward the KKT point.
SolveReport solve_dual(const CoveringInstance& inst, const CostSpec& cost,
                       const ConstrainedOptions& options) {
  const Index n = inst.Q.rows();
  const Vec& lb = inst.lb;
  const Vec& c = inst.costs;
  const bool linear = cost.kind == CostKind::kInverse || cost.param == 1.0;
  const double k = linear ? 1.0 : cost.param;
  const Vec wmax = c.cwiseQuotient(lb);

  auto u_of_w = [&](const Vec& w) {
    if (linear) return Vec(lb);
    Vec u(n);
    for (Index i = 0; i < n; ++i) {
      const double t = std::pow(w[i] * lb[i] / (c[i] * k), 1.0 / (k - 1.0));
      u[i] = lb[i] * std::max(1.0, t);
    }
    return u;
  };

  Vec w = k * wmax;
  if (options.w0.size() == n) {
    w = options.w0.cwiseMax(1e-300);
    if (linear) w = w.cwiseMin(wmax);
  }
  Vec d = Vec::Ones(n);
  Vec r(n), u_w(n);
  double eta = 1.0 / k;
  double resid = INFINITY;
  double prev = INFINITY;
  int rising = 0;
  int it = 0;
  for (; it < options.max_iter; ++it) {
    const BalancingResult bal = balance(w.asDiagonal() * inst.Q, 1e-12, d);
    d = bal.d;
    const Vec y = d.cwiseInverse();
    r = (inst.Q * y).cwiseQuotient(y);
    u_w = u_of_w(w);

    resid = 0.0;
    for (Index i = 0; i < n; ++i) {
      double e;
      if (linear) {
        e = w[i] < wmax[i] * (1.0 - 1e-12) ? std::abs(r[i] / lb[i] - 1.0)
                                           : std::max(0.0, 1.0 - r[i] / lb[i]);
      } else {
        e = std::abs(r[i] / u_w[i] - 1.0);
      }
      resid = std::max(resid, e);
    }
    if (resid <= options.tol) break;
    rising = resid > prev ? rising + 1 : 0;
    if (rising >= 3) {
      eta *= 0.5;
      rising = 0;
    }
    prev = resid;
    for (Index i = 0; i < n; ++i) {
      w[i] *= std::pow(r[i] / u_w[i], eta);
      if (linear) w[i] = std::min(w[i], wmax[i]);
      w[i] = std::max(w[i], 1e-300);
    }
  }

  const Vec u = r.cwiseMax(lb);
  SolveReport rep;
  rep.method = SolveMethod::kConstrained;
  rep.z_star = covering_to_z(inst, u);
  rep.iterations = it;
  rep.kkt_residual = resid;
  double dual = 0.0;
  for (Index i = 0; i < n; ++i) {
    dual += c[i] * phi(cost, u_w[i] / lb[i]) - w[i] * u_w[i] + w[i] * r[i];
  }
  rep.duality_gap = objective(inst, cost, u) - dual;
  rep.converged = resid <= options.tol;
  if (!rep.converged) {
    throw Error(ErrorCode::kNonConvergence,
                "constrained dual iteration did not reach the KKT tolerance", resid,
                rep.z_star);
  }
  return rep;
}

// Smallest feasible u_i with the other coordinates held fixed, from the
// Schur complement of diag(u) - Q. NaN when the remaining block is not
// positive definite.
double min_feasible(const CoveringInstance& inst, const Vec& u, Index i) {
  const Index n = u.size();
  Mat R(n - 1, n - 1);
  Vec q(n - 1);
  for (Index a = 0, ra = 0; a < n; ++a) {
    if (a == i) continue;
    q[ra] = inst.Q(a, i);
    for (Index b = 0, rb = 0; b < n; ++b) {
      if (b == i) continue;
      R(ra, rb) = (a == b ? u[a] : 0.0) - inst.Q(a, b);
      ++rb;
    }
    ++ra;
  }
  Eigen::LLT<Mat> llt(R);
  if (llt.info() != Eigen::Success) return NAN;
  return inst.Q(i, i) + q.dot(llt.solve(q));
}

// Exact coordinate descent: lowers each u_i to its smallest feasible value
// when that lowers the cost. Coordinates past a cap only move if they end
// up below it.
// With ties, coordinates in a flat stretch of the cost are lowered too, so the
// returned point sits on the constraint boundary.
void tighten(const CoveringInstance& inst, const CostSpec& cost, Vec& u, bool ties = false) {
  const Index n = u.size();
  if (n < 2) {
    u[0] = std::max(inst.lb[0], inst.Q(0, 0));
    return;
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return inst.costs[a] > inst.costs[b]; });
  for (int sweep = 0; sweep < 10; ++sweep) {
    bool moved = false;
    for (const Index i : order) {
      const double m = min_feasible(inst, u, i);
      if (!std::isfinite(m)) continue;
      const double next = std::max(inst.lb[i], m * (1.0 + 1e-12));
      if (!(next < u[i] * (1.0 - 1e-12))) continue;
      const double t_old = u[i] / inst.lb[i];
      const double t_new = next / inst.lb[i];
      const double gain = phi(cost, t_old) - phi(cost, t_new);
      if (!(gain > 0 || (ties && gain >= 0))) continue;
      u[i] = next;
      moved = true;
    }
    if (!moved) break;
  }
}

// Exact-penalty projected subgradient on rho * max(0, lambda_max(Q - diag u)),
// started from a tangent-majorization descent on the linear problem,
// Polyak steps against the best feasible value. Each iterate is made feasible
// and tight by a uniform shift of u by lambda_max.
SolveReport solve_penalty(const CoveringInstance& inst, const CostSpec& cost,
                          const ConstrainedOptions& options) {
  const Index n = inst.Q.rows();
  const Vec& lb = inst.lb;
  const Vec ub = 1e6 * lb;

  ConstrainedOptions warm = options;
  warm.w0 = Vec();
  const SolveReport start = solve_dual(inst, CostSpec{}, warm);
  Vec u = lb.cwiseQuotient(start.z_star);

  // Concave costs lie below their tangents, so re-solving the linear problem
  // with tangent slopes as costs never increases the objective. Flat
  // coordinates keep a tiny slope to stay in the balancing's scope.
  {
    CoveringInstance lin = inst;
    const double floor = 1e-9 * inst.costs.maxCoeff();
    double f = objective(inst, cost, u);
    for (int k = 0; k < 100; ++k) {
      for (Index i = 0; i < n; ++i) {
        lin.costs[i] = std::max(inst.costs[i] * dphi(cost, u[i] / lb[i]), floor);
      }
      const Vec next = lb.cwiseQuotient(solve_dual(lin, CostSpec{}, warm).z_star).cwiseMin(ub);
      const double fn = objective(inst, cost, next);
      if (!(fn < f * (1.0 - 1e-12))) break;
      u = next;
      f = fn;
    }
  }
  tighten(inst, cost, u);
  // Past the cap a coordinate costs nothing more, and raising u only helps
  // feasibility.
  auto push = [&](Vec& uu) {
    if (cost.kind != CostKind::kCapped) return;
    for (Index i = 0; i < n; ++i) {
      if (uu[i] >= cost.param * lb[i]) uu[i] = ub[i];
    }
  };
  push(u);

  auto top = [&](const Vec& uu, const Vec& guess) {
    Mat S = inst.Q;
    S.diagonal() -= uu;
    PerronPair pp = perron(S, guess, 1e-15);
    pp.vector /= pp.vector.norm();
    return pp;
  };

  PerronPair pp = top(u, Vec::Ones(n));
  double mu = 0.0;
  for (Index i = 0; i < n; ++i) {
    mu = std::max(mu, inst.costs[i] / (lb[i] * pp.vector[i] * pp.vector[i]));
  }
  const double rho = 2.0 * mu;

  Vec best = u;
  double best_f = objective(inst, cost, u);
  double checkpoint = best_f;
  int it = 0;
  for (; it < options.max_iter; ++it) {
    pp = top(u, pp.vector);
    const double lam = pp.value;
    // Raising u lowers lambda, so clipping at lb keeps the shifted point
    // feasible.
    const Vec uf = (u.array() + (lam + 1e-12 * u.maxCoeff())).matrix().cwiseMax(lb);
    const double ff = objective(inst, cost, uf);
    if (ff < best_f) {
      best_f = ff;
      best = uf;
    }
    if ((it + 1) % 1000 == 0) {
      if (checkpoint - best_f <= 1e-9 * std::abs(best_f)) break;
      checkpoint = best_f;
    }
    Vec g(n);
    for (Index i = 0; i < n; ++i) {
      g[i] = inst.costs[i] * dphi(cost, u[i] / lb[i]) / lb[i];
      if (lam > 0) g[i] -= rho * pp.vector[i] * pp.vector[i];
    }
    const double gg = g.squaredNorm();
    if (gg == 0) break;
    const double value = objective(inst, cost, u) + rho * std::max(0.0, lam);
    const double target = best_f - 0.05 * std::abs(best_f) / std::sqrt(it + 1.0);
    const double step = (value - target) / gg;
    u = (u - step * g).cwiseMax(lb).cwiseMin(ub);
    push(u);
  }

  tighten(inst, cost, best, true);
  SolveReport rep;
  rep.method = SolveMethod::kConstrained;
  rep.z_star = covering_to_z(inst, best);
  rep.iterations = it;
  rep.nonconvex_objective = !is_convex(cost);
  return rep;
}

}  // namespace

CoveringInstance to_covering(const FlowFactors& factors, const Vec& c,
                             const DiseaseParams& params, const Vec& s0) {
  params.validate();
  const Index n = factors.n();
  if (c.size() != n || s0.size() != n) {
    throw Error(ErrorCode::kValidation, "cost or s0 length differs from the network");
  }
  if ((c.array() <= 0).any()) throw Error(ErrorCode::kValidation, "costs must be positive");
  const Mat& tau = factors.C;
  for (Index i = 0; i < n; ++i) {
    if (!(tau(i, i) > 0)) {
      throw Error(ErrorCode::kTauDiagonalZero,
                  "covering form needs a positive tau diagonal (location " + std::to_string(i) + ")");
    }
  }
  CoveringInstance inst;
  inst.q = stability_threshold(params);
  const Vec a = transmission_weights(params, s0);
  const Mat Q = tau.transpose() * factors.population.cwiseProduct(a).asDiagonal() * tau;
  inst.Q = 0.5 * (Q + Q.transpose());
  inst.mass = factors.mass;
  inst.lb = inst.q * factors.mass;
  inst.c_prime = c.cwiseQuotient(factors.mass);
  inst.costs = c;
  return inst;
}

double covering_lambda(const CoveringInstance& inst, const Vec& u) {
  const Vec s = u.cwiseSqrt().cwiseInverse();
  Mat S = s.asDiagonal() * inst.Q * s.asDiagonal();
  S.diagonal().array() -= 1.0;
  return spectral_abscissa(S, 1e-15);
}

Vec covering_to_z(const CoveringInstance& inst, const Vec& u) {
  return inst.lb.cwiseQuotient(u).cwiseMin(1.0);
}

SolveReport solve_constrained(const CoveringInstance& inst, const CostSpec& cost,
                              const ConstrainedOptions& options) {
  const Index n = inst.Q.rows();
  SolveReport rep;
  const std::vector<int> comp = strongly_connected_components(inst.Q);
  const int ncomp = n == 0 ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  if (ncomp <= 1) {
    rep = is_convex(cost) ? solve_dual(inst, cost, options) : solve_penalty(inst, cost, options);
  } else {
    // Q is symmetric, so the semidefinite constraint splits over the
    // connected blocks and each block is solved on its own.
    rep.method = SolveMethod::kConstrained;
    rep.z_star = Vec::Ones(n);
    for (int k = 0; k < ncomp; ++k) {
      std::vector<Index> idx;
      for (Index i = 0; i < n; ++i) {
        if (comp[i] == k) idx.push_back(i);
      }
      const Index m = static_cast<Index>(idx.size());
      CoveringInstance sub;
      sub.q = inst.q;
      sub.Q.resize(m, m);
      sub.lb.resize(m);
      sub.c_prime.resize(m);
      sub.mass.resize(m);
      sub.costs.resize(m);
      for (Index a = 0; a < m; ++a) {
        for (Index b = 0; b < m; ++b) sub.Q(a, b) = inst.Q(idx[a], idx[b]);
        sub.lb[a] = inst.lb[idx[a]];
        sub.c_prime[a] = inst.c_prime[idx[a]];
        sub.mass[a] = inst.mass[idx[a]];
        sub.costs[a] = inst.costs[idx[a]];
      }
      if (m == 1) {
        rep.z_star[idx[0]] = sub.lb[0] / std::max(sub.lb[0], sub.Q(0, 0));
        continue;
      }
      const SolveReport part = solve_constrained(sub, cost, options);
      for (Index a = 0; a < m; ++a) rep.z_star[idx[a]] = part.z_star[a];
      rep.iterations = std::max(rep.iterations, part.iterations);
      rep.converged = rep.converged && part.converged;
      rep.nonconvex_objective = rep.nonconvex_objective || part.nonconvex_objective;
      rep.kkt_residual = std::max(rep.kkt_residual, part.kkt_residual);
      rep.duality_gap += part.duality_gap;
    }
  }
  rep.cost_kind = cost;
  rep.cost = lockdown_cost(rep.z_star, inst.costs, cost);
  rep.lambda_reduced = covering_lambda(inst, inst.lb.cwiseQuotient(rep.z_star));
  return rep;
}

}  // namespace epilock
