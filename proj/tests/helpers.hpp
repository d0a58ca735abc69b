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


// Shared fixtures and independent oracles for the unit tests.

#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "epilock/model.hpp"

namespace epilock::testing {

// Largest real part over all eigenvalues (dense QR oracle).
inline double dense_abscissa(const Mat& M) {
  Eigen::EigenSolver<Mat> es(M, false);
  double best = -INFINITY;
  for (Index i = 0; i < M.rows(); ++i) best = std::max(best, es.eigenvalues()[i].real());
  return best;
}

inline double dense_sym_max(const Mat& S) {
  Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// Dense random network: every tau entry positive, rows summing to
// 1 - h/1440.
inline NetworkData random_network(int n, std::mt19937_64& rng, double density = 1.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat tau = Mat::Zero(n, n);
  Vec h(n), N(n), e(n);
  for (int i = 0; i < n; ++i) {
    h[i] = 600 + 600 * u(rng);
    N[i] = 1000 + 99000 * u(rng);
    e[i] = 100 + 9900 * u(rng);
    for (int j = 0; j < n; ++j) {
      if (i == j || j == (i + 1) % n || u(rng) < density) tau(i, j) = 0.05 + u(rng);
    }
    tau.row(i) *= (1.0 - h[i] / kMinutesPerDay) / tau.row(i).sum();
  }
  return make_network({}, N, e, tau, h);
}

// a_ij = sum_l z_l tau_il tau_jl N_j / sum_k N_k tau_kl, evaluated directly.
inline Mat triple_sum(const NetworkData& net, const Vec& z) {
  const Index n = net.size();
  const Mat& t = net.travel.tau;
  Mat A = Mat::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      double a = 0.0;
      for (Index l = 0; l < n; ++l) {
        double m = 0.0;
        for (Index k = 0; k < n; ++k) m += net.population[k] * t(k, l);
        if (m > 0) a += z[l] * t(i, l) * t(j, l) * net.population[j] / m;
      }
      A(i, j) = a;
    }
  }
  return A;
}

// Brute-force minimum of sum_i c_i phi(z_i) subject to
// lambda_max(diag(z) P - diag(D)) <= 0 and z <= zmax, for n in {2, 3}. The
// leading coordinates are searched on a log grid that is zoomed around the
// incumbent; the last coordinate is the largest feasible value, found by
// bisection (the constraint is monotone in each z_i and phi is decreasing).
template <typename Phi>
double grid_min_cost(const Mat& P, const Vec& D, const Vec& c, Phi phi, double zmax,
                     Vec* argmin = nullptr) {
  const Index n = P.rows();
  // A Metzler S has lambda_max(S) <= 0 iff every leading principal minor of
  // -S is nonnegative (M-matrix test); returns +1 when infeasible.
  auto lam = [&](const Vec& z) {
    Mat S = -(z.asDiagonal() * P);
    S.diagonal() += D;
    for (Index k = 1; k <= n; ++k) {
      if (S.topLeftCorner(k, k).determinant() < 0) return 1.0;
    }
    return 0.0;
  };
  const double scale = (D.array() / P.rowwise().sum().array()).maxCoeff();
  const double top = std::min(zmax, 1e3 * scale);
  const double bottom = 1e-4 * (D.array() / P.rowwise().sum().array()).minCoeff();
  auto complete = [&](Vec z) -> double {
    double lo = bottom * 1e-3;
    double hi = top;
    z[n - 1] = hi;
    if (lam(z) <= 0) {
      lo = hi;
    } else {
      z[n - 1] = lo;
      if (lam(z) > 0) return INFINITY;
      for (int k = 0; k < 60; ++k) {
        z[n - 1] = 0.5 * (lo + hi);
        (lam(z) <= 0 ? lo : hi) = z[n - 1];
      }
    }
    z[n - 1] = lo;
    double total = 0.0;
    for (Index i = 0; i < n; ++i) total += c[i] * phi(z[i]);
    if (argmin) *argmin = z;
    return total;
  };
  const int free = static_cast<int>(n - 1);
  std::vector<double> lo(free, std::log(bottom)), hi(free, std::log(top));
  std::vector<double> best_x(free, 0.0);
  double best = INFINITY;
  Vec best_z;
  const int pts = free == 1 ? 2001 : 41;
  for (int round = 0; round < 12; ++round) {
    std::vector<double> step(free);
    for (int f = 0; f < free; ++f) step[f] = (hi[f] - lo[f]) / (pts - 1);
    const long total = free == 1 ? pts : static_cast<long>(pts) * pts;
    for (long k = 0; k < total; ++k) {
      Vec z(n);
      long r = k;
      std::vector<double> x(free);
      for (int f = 0; f < free; ++f) {
        x[f] = lo[f] + step[f] * static_cast<double>(r % pts);
        r /= pts;
        z[f] = std::exp(x[f]);
      }
      const double v = complete(z);
      if (v < best) {
        best = v;
        best_x = x;
        if (argmin) best_z = *argmin;
      }
    }
    for (int f = 0; f < free; ++f) {
      lo[f] = std::max(std::log(bottom), best_x[f] - 3 * step[f]);
      hi[f] = std::min(std::log(top), best_x[f] + 3 * step[f]);
    }
  }
  if (argmin) *argmin = best_z;
  return best;
}

}  // namespace epilock::testing
