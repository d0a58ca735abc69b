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

#include "epilock/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>

#include "epilock/error.hpp"

namespace epilock {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::kValidation, message);
}

std::string at(const std::vector<std::string>& ids, Index i) {
  return ids.empty() ? std::to_string(i) : ids[static_cast<std::size_t>(i)];
}

}  // namespace

NetworkData make_network(std::vector<std::string> ids, Vec population,
                         Vec employment, Mat tau, Vec home_dwell,
                         const NetworkOptions& options) {
  const Index n = population.size();
  require(n > 0, "network has no locations");
  require(employment.size() == n, "employment length differs from population");
  require(home_dwell.size() == n, "home_dwell length differs from population");
  require(tau.rows() == n && tau.cols() == n, "tau is not n x n");
  if (ids.empty()) {
    for (Index i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  }
  require(static_cast<Index>(ids.size()) == n, "ids length differs from population");

  for (Index i = 0; i < n; ++i) {
    require(std::isfinite(population[i]) && population[i] > 0,
            "population must be positive at location " + at(ids, i));
    require(std::isfinite(employment[i]) && employment[i] >= 0,
            "employment must be nonnegative at location " + at(ids, i));
    require(home_dwell[i] >= 0 && home_dwell[i] <= kMinutesPerDay,
            "home_dwell outside [0, 1440] at location " + at(ids, i));
    for (Index j = 0; j < n; ++j) {
      require(std::isfinite(tau(i, j)) && tau(i, j) >= 0,
              "tau has a negative or non-finite entry in row " + at(ids, i));
    }
  }

  const double e_max = employment.maxCoeff();
  require(e_max > 0, "employment is zero everywhere");
  Vec cost = employment / e_max;
  for (Index i = 0; i < n; ++i) {
    if (cost[i] > 0) continue;
    require(options.cost_floor > 0,
            "zero employment (cost) at location " + at(ids, i));
    cost[i] = std::max(cost[i], options.cost_floor);
  }

  for (Index i = 0; i < n; ++i) {
    const double target = 1.0 - home_dwell[i] / kMinutesPerDay;
    const double sum = tau.row(i).sum();
    if (sum <= 0) {
      throw Error(ErrorCode::kDegenerateLocation,
                  "tau row is zero at location " + at(ids, i));
    }
    if (std::abs(sum - target) > options.row_sum_tol) {
      warn("tau row " + at(ids, i) + " sums to " + std::to_string(sum) +
           ", expected " + std::to_string(target) + "; renormalized");
      tau.row(i) *= target / sum;
    }
    if (options.positive_diagonal && !(tau(i, i) > 0)) {
      throw Error(ErrorCode::kTauDiagonalZero,
                  "tau diagonal is zero at location " + at(ids, i));
    }
  }

  NetworkData net;
  net.ids = std::move(ids);
  net.population = std::move(population);
  net.employment = std::move(employment);
  net.cost = std::move(cost);
  net.home_dwell = std::move(home_dwell);
  net.travel.tau = std::move(tau);
  return net;
}

Vec home_dwell_from_tau(const Mat& tau) {
  return (kMinutesPerDay * (1.0 - tau.rowwise().sum().array())).matrix();
}

const char* to_string(Family family) {
  switch (family) {
    case Family::kSIS: return "sis";
    case Family::kSIR: return "sir";
    case Family::kCOVID: return "covid";
  }
  return "unknown";
}

Family parse_family(const std::string& name) {
  if (name == "sis" || name == "SIS") return Family::kSIS;
  if (name == "sir" || name == "SIR") return Family::kSIR;
  if (name == "covid" || name == "COVID") return Family::kCOVID;
  throw Error(ErrorCode::kValidation, "unknown model family '" + name + "'");
}

double DiseaseParams::alpha_limit() const {
  if (family == Family::kCOVID) return std::min(r_s, epsilon + r_a);
  return gamma;
}

void DiseaseParams::validate() const {
  const double rates[] = {beta_s, beta_a, epsilon, r_a, r_s, gamma, alpha_hat, zeta};
  const char* names[] = {"beta_s", "beta_a", "epsilon", "r_a", "r_s", "gamma", "alpha_hat", "zeta"};
  for (int k = 0; k < 8; ++k) {
    require(std::isfinite(rates[k]) && rates[k] >= 0,
            std::string(names[k]) + " must be a nonnegative rate");
  }
  require(std::isfinite(alpha) && alpha >= 0, "alpha must be nonnegative");
  for (Index i = 0; i < beta_scale.size(); ++i) {
    require(beta_scale[i] > 0, "beta_scale entries must be positive");
  }
}

CostSpec parse_cost(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  CostSpec cost;
  if (kind == "inverse") {
    require(colon == std::string::npos, "inverse cost takes no parameter");
    return cost;
  }
  require(colon != std::string::npos, "cost '" + text + "' needs a parameter");
  double value = 0;
  try {
    value = std::stod(text.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::kValidation, "bad cost parameter in '" + text + "'");
  }
  if (kind == "power") {
    require(value > 0, "power cost exponent must be positive");
    cost.kind = CostKind::kPower;
  } else if (kind == "capped") {
    require(value >= 1, "cost cap must be at least 1");
    cost.kind = CostKind::kCapped;
  } else {
    throw Error(ErrorCode::kValidation, "unknown cost kind '" + kind + "'");
  }
  cost.param = value;
  return cost;
}

std::string to_string(const CostSpec& cost) {
  char buf[64];
  switch (cost.kind) {
    case CostKind::kInverse: return "inverse";
    case CostKind::kPower:
      std::snprintf(buf, sizeof buf, "power:%g", cost.param);
      return buf;
    case CostKind::kCapped:
      std::snprintf(buf, sizeof buf, "capped:%g", cost.param);
      return buf;
  }
  return "unknown";
}

LockdownPolicy make_policy(Vec z, const Vec& c, const CostSpec& cost) {
  LockdownPolicy policy;
  policy.cost_value = lockdown_cost(z, c, cost);
  policy.exceeds_one = (z.array() > 1.0).any();
  policy.z = std::move(z);
  policy.cost = cost;
  return policy;
}

FlowFactors build_flow_matrix(const NetworkData& net) {
  const Mat& tau = net.travel.tau;
  const Index n = tau.rows();
  FlowFactors f;
  f.population = net.population;
  f.mass = tau.transpose() * net.population;
  for (Index l = 0; l < n; ++l) {
    if (!(f.mass[l] > 0)) {
      throw Error(ErrorCode::kDegenerateLocation,
                  "no population visits location " + at(net.ids, l));
    }
  }
  f.C = tau;
  f.B = net.population.asDiagonal() * tau * f.mass.cwiseInverse().asDiagonal();
  return f;
}

Mat apply_lockdown(const FlowFactors& factors, const Vec& z) {
  require(z.size() == factors.n(), "lockdown vector has the wrong length");
  for (Index i = 0; i < z.size(); ++i) {
    require(z[i] > 0, "lockdown rates must be positive");
  }
  return factors.C * z.asDiagonal() * factors.B.transpose();
}

double lockdown_cost(const Vec& z, const Vec& c, const CostSpec& cost) {
  require(z.size() == c.size(), "cost vector length differs from z");
  double total = 0.0;
  for (Index i = 0; i < z.size(); ++i) {
    require(z[i] > 0, "lockdown rates must be positive");
    const double inv = 1.0 / z[i];
    switch (cost.kind) {
      case CostKind::kInverse: total += c[i] * (inv - 1.0); break;
      case CostKind::kPower: total += c[i] * (std::pow(inv, cost.param) - 1.0); break;
      case CostKind::kCapped: total += c[i] * (std::min(inv, cost.param) - 1.0); break;
    }
  }
  return total;
}

Vec transmission_weights(const DiseaseParams& params, const Vec& s0) {
  const Index n = s0.size();
  Vec w = params.family == Family::kSIS ? Vec::Ones(n) : s0;
  if (params.beta_scale.size() > 0) {
    require(params.beta_scale.size() == n, "beta_scale has the wrong length");
    w = w.cwiseProduct(params.beta_scale);
  }
  return w;
}

double b1(const DiseaseParams& params, double alpha) {
  if (params.family != Family::kCOVID) {
    if (!(params.gamma - alpha > 0)) {
      throw Error(ErrorCode::kInfeasibleAlpha, "alpha must be below gamma");
    }
    return params.zeta / (params.gamma - alpha);
  }
  if (!(params.r_s > 0) || !(params.epsilon + params.r_a > 0)) {
    throw Error(ErrorCode::kDegenerateRates, "r_s and eps + r_a must be positive");
  }
  const double rs = params.r_s - alpha;
  const double ea = params.epsilon + params.r_a - alpha;
  if (!(rs > 0) || !(ea > 0)) {
    throw Error(ErrorCode::kInfeasibleAlpha, "alpha must be below min(r_s, eps + r_a)");
  }
  return (params.beta_s * params.epsilon + params.beta_a * rs) / (ea * rs);
}

Mat assemble_linearization(const FlowFactors& factors, const Vec& z,
                           const DiseaseParams& params, const Vec& s0) {
  const Index n = factors.n();
  require(s0.size() == n, "s0 has the wrong length");
  const Mat WA = transmission_weights(params, s0).asDiagonal() * apply_lockdown(factors, z);
  if (params.family != Family::kCOVID) {
    return params.zeta * WA - params.gamma * Mat::Identity(n, n);
  }
  Mat M = Mat::Zero(2 * n, 2 * n);
  M.topLeftCorner(n, n) = params.beta_a * WA;
  M.topLeftCorner(n, n).diagonal().array() -= params.epsilon + params.r_a;
  M.topRightCorner(n, n) = params.beta_s * WA;
  M.bottomLeftCorner(n, n).diagonal().setConstant(params.epsilon);
  M.bottomRightCorner(n, n).diagonal().setConstant(-params.r_s);
  return M;
}

std::vector<bool> group_mask(const Scenario& scenario, const std::string& label) {
  std::vector<bool> mask(static_cast<std::size_t>(scenario.net.size()), false);
  bool any = false;
  for (std::size_t i = 0; i < scenario.group.size() && i < mask.size(); ++i) {
    mask[i] = scenario.group[i] == label;
    any = any || mask[i];
  }
  require(any, "no location belongs to group '" + label + "'");
  return mask;
}

}  // namespace epilock
