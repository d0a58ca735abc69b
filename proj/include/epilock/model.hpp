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

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace epilock {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kMinutesPerDay = 1440.0;

/// Daily travel rates. Row i sums to 1 - h_i/1440.
struct TravelMatrix {
  Mat tau;
  Index n() const { return tau.rows(); }
};

struct NetworkOptions {
  bool positive_diagonal = false;
  // When > 0, zero-employment locations get cost max(c_i, floor) instead of
  // being rejected.
  double cost_floor = 0.0;
  double row_sum_tol = 1e-9;
};

struct NetworkData {
  std::vector<std::string> ids;
  Vec population;
  Vec employment;
  Vec cost;  // c_i = e_i / e_max
  Vec home_dwell;  // minutes per day
  TravelMatrix travel;

  Index size() const { return population.size(); }
};

/// Validates the fields and derives costs. Rows of tau that disagree with
/// the home-dwell times are renormalized with a warning.
NetworkData make_network(std::vector<std::string> ids, Vec population,
                         Vec employment, Mat tau, Vec home_dwell,
                         const NetworkOptions& options = {});

/// Home-dwell minutes implied by the row sums of tau.
Vec home_dwell_from_tau(const Mat& tau);

/// A(z) = C diag(z) B^T with C = tau and B^T = D1 tau^T D2.
struct FlowFactors {
  Mat C;
  Mat B;
  Vec mass;        // m_l = sum_k N_k tau_kl, the inverse of D1
  Vec population;  // diagonal of D2
  Index n() const { return C.rows(); }
};

enum class Family { kSIS, kSIR, kCOVID };

const char* to_string(Family family);
Family parse_family(const std::string& name);

struct DiseaseParams {
  Family family = Family::kCOVID;
  double beta_s = 0.0;
  double beta_a = 0.0;
  double epsilon = 0.0;
  double r_a = 0.0;
  double r_s = 0.0;
  double gamma = 0.0;
  double alpha_hat = 0.0;
  double alpha = 0.0;
  // SIS/SIR transmission scalar.
  double zeta = 1.0;
  // Per-location transmission multiplier; empty means uniform.
  Vec beta_scale;

  /// Supremum of admissible decay rates: min(r_s, eps + r_a) for COVID,
  /// gamma for SIS and SIR.
  double alpha_limit() const;
  void validate() const;
};

enum class CostKind { kInverse, kPower, kCapped };

struct CostSpec {
  CostKind kind = CostKind::kInverse;
  double param = 0.0;  // exponent k for power, cap C for capped
};

CostSpec parse_cost(const std::string& text);
std::string to_string(const CostSpec& cost);

struct LockdownPolicy {
  Vec z;
  CostSpec cost;
  double cost_value = 0.0;
  bool exceeds_one = false;
};

LockdownPolicy make_policy(Vec z, const Vec& c, const CostSpec& cost);

FlowFactors build_flow_matrix(const NetworkData& net);

Mat apply_lockdown(const FlowFactors& factors, const Vec& z);

double lockdown_cost(const Vec& z, const Vec& c, const CostSpec& cost);

/// Per-location weight w so that the stability condition reads
/// lambda_max(diag(w) A(z)) <= q: s0 for COVID/SIR, ones for SIS, times the
/// transmission multiplier when present.
Vec transmission_weights(const DiseaseParams& params, const Vec& s0);

/// COVID: (bs*eps + ba*(rs - alpha)) / ((eps + ra - alpha)(rs - alpha)).
/// SIS/SIR: zeta / (gamma - alpha).
double b1(const DiseaseParams& params, double alpha);

/// COVID: 2n x 2n Jacobian at the disease-free state with susceptibles s0.
/// SIS: zeta A(z) - gamma I. SIR: zeta diag(s0) A(z) - gamma I.
Mat assemble_linearization(const FlowFactors& factors, const Vec& z,
                           const DiseaseParams& params, const Vec& s0);

/// Per-location epidemic state. Recovered and cumulative-infected fractions
/// are carried explicitly so conservation and case counts can be read off.
struct EpidemicState {
  Vec s;
  Vec x_a;
  Vec x_s;
  Vec x;  // SIS only
  Vec r;
  Vec cum;  // cumulative infected fraction
  double t = 0.0;
};

/// A network with its initial epidemic state, optional location groups
/// (e.g. "city") and optional population densities.
struct Scenario {
  std::string name;
  NetworkData net;
  EpidemicState state;  // COVID/SIR form: s, x_a, x_s, r
  std::vector<std::string> group;  // per location; empty string = none
  Vec density;  // persons per square mile; empty if unknown
};

/// Mask of locations whose group equals `label`.
std::vector<bool> group_mask(const Scenario& scenario, const std::string& label);

}  // namespace epilock
