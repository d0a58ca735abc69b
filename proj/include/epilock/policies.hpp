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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "epilock/balancing.hpp"
#include "epilock/model.hpp"
#include "epilock/simulate.hpp"

namespace epilock {

/// Scalar z with sum_i c_i phi(z) = target. Bisection, 1e-10 relative.
double match_cost_uniform(double target, const Vec& c, const CostSpec& cost = {});

/// E[phi(z)] for z ~ U[a, b] (closed forms; a == b gives phi(a)).
double expected_phi(double a, double b, const CostSpec& cost);

struct RandomPolicy {
  Vec z;
  double a = 0.0;
  double b = 0.0;
  double expected_cost = 0.0;  // at the expected-cost lower end
  double realized_cost = 0.0;
  double a_expected = 0.0;     // lower end matching the expected cost
};

/// z_i ~ U[a, b], b = min(1, a + width). The lower end is first set so the
/// expected cost equals the target; the draws are then held fixed and a is
/// re-solved so the realized cost equals the target as well.
RandomPolicy match_cost_random(double target, const Vec& c, double width, std::uint64_t seed,
                               const CostSpec& cost = {});

/// Uniform [0, 1) draws from a seeded 64-bit Mersenne twister, 53-bit
/// mantissa; identical across platforms.
std::vector<double> uniform_draws(std::size_t count, std::uint64_t seed);

struct BoundedDecline {
  Vec z;
  double decline = 0.0;  // alpha' in the reduced units of P
  double lambda = 0.0;   // lambda_max(diag(z) P - q I)
};

/// z_l = min(1, (q - a') / [P 1]_l): every row of diag(z) P - q I sums to at
/// most -a' (Gershgorin). a' is bisected to hit the target cost.
BoundedDecline match_cost_bounded_decline(double target, const FlowFactors& factors,
                                          const Vec& c, const DiseaseParams& params,
                                          const Vec& s0, const CostSpec& cost = {});

/// Uniform z with the same decay guarantee as the optimum: q / rho(P).
double decay_matched_uniform(const FlowFactors& factors, const DiseaseParams& params,
                             const Vec& s0);

/// cost(ours) / cost(decay-matched uniform); empty when the denominator is 0.
std::optional<double> efficiency(double cost_ours, double cost_uniform);

enum class TwoParamOrder { kAny, kInsideLower, kInsideHigher };

struct TwoParamOptions {
  std::vector<bool> inside;
  TwoParamOrder order = TwoParamOrder::kAny;
  double grid_step = 0.01;
  double refine_step = 0.001;
  int threads = 1;
};

struct TwoParamResult {
  double z_inside = 1.0;
  double z_outside = 1.0;
  Vec z;
  double cost = 0.0;
  double final_cumulative = 0.0;  // budget mode only
  int evaluated = 0;
};

/// Equal-budget search: z_inside on the grid, z_outside from the budget,
/// minimizing final cumulative cases over `horizon` days.
TwoParamResult best_two_param_budget(const FlowFactors& factors, const Vec& c,
                                     const DiseaseParams& params, const EpidemicState& state0,
                                     double budget, double horizon,
                                     const TwoParamOptions& options,
                                     const SimOptions& sim = {}, const CostSpec& cost = {});

/// Cheapest two-parameter z with lambda_max(M) <= -rate.
TwoParamResult best_two_param_rate(const FlowFactors& factors, const Vec& c,
                                   const DiseaseParams& params, const Vec& s0, double rate,
                                   const TwoParamOptions& options, const CostSpec& cost = {});

enum class PolicyKind { kOurs, kNone, kUniform, kRandom, kBounded, kTwoParam, kDecayUniform };

struct PolicySpec {
  PolicyKind kind = PolicyKind::kOurs;
  std::string label;
  std::uint64_t seed = 0;
  double width = 0.2;
  std::string partition;
  TwoParamOrder order = TwoParamOrder::kAny;
};

/// ours | none | uniform | decay_uniform | random:SEED[:WIDTH] | bounded |
/// two_param:GROUP[:lt|:gt]
PolicySpec parse_policy(const std::string& text);
std::vector<PolicySpec> parse_policies(const std::string& comma_list);

struct PolicyOutcome {
  std::string label;
  Vec z;
  double cost = 0.0;
  double lambda = 0.0;  // lambda_max of the linearization at z
  double final_active = 0.0;
  double final_cumulative = 0.0;
  Trajectory trajectory;
};

struct CompareOptions {
  double horizon = 500.0;
  SimOptions sim;
  CostSpec cost;
  int threads = 1;
};

/// Solves for the optimum, matches every other policy to its cost and
/// simulates all of them from the scenario state.
std::vector<PolicyOutcome> compare_policies(const Scenario& scenario, const DiseaseParams& params,
                                            const std::vector<PolicySpec>& policies,
                                            const CompareOptions& options = {});

}  // namespace epilock
