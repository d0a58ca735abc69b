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

#include "epilock/model.hpp"

namespace epilock {

/// Fills the bookkeeping fields of a user-supplied state: r defaults to
/// 1 - s - x_a - x_s (COVID/SIR) and cum to the already-infected fraction
/// (1 - s, or x for SIS).
EpidemicState make_state(Family family, Vec s, Vec x_a, Vec x_s, Vec r = Vec());
EpidemicState make_sis_state(Vec x);

/// Scenario state in the family's form (SIS uses x = x_a + x_s).
EpidemicState initial_state_for(const Scenario& scenario, Family family);

/// One classical RK4 step of the family's ODE with post-step clamping to
/// [0, 1]. `clamp` receives the largest clamping correction.
EpidemicState step_rk4(const EpidemicState& state, const Mat& A_z,
                       const DiseaseParams& params, double dt, double* clamp = nullptr);

struct SimOptions {
  double dt = 0.1;
  double sample_every = 1.0;
  // A step whose clamping exceeds this is rejected and retried at dt/2.
  double clamp_tol = 1e-8;
  double min_dt = 1e-9;
};

/// Advances by `dt`, halving on rejected steps. Throws StepRejectionCascade
/// once the step falls below min_dt.
EpidemicState advance(const EpidemicState& state, const Mat& A_z,
                      const DiseaseParams& params, double dt, const SimOptions& options,
                      int* rejected = nullptr);

struct Trajectory {
  Family family = Family::kCOVID;
  std::vector<EpidemicState> samples;
  std::vector<double> active;      // persons infected at time t
  std::vector<double> cumulative;  // persons ever infected by time t
  int rejected_steps = 0;
};

Trajectory simulate(const FlowFactors& factors, const EpidemicState& state0, const Vec& z,
                    const DiseaseParams& params, double horizon,
                    const SimOptions& options = {});

/// Infected compartments stacked as in the linearization: [x_a; x_s] for
/// COVID, x_a for SIR, x for SIS.
Vec infected_vector(const EpidemicState& state, Family family);

/// Left Perron vector of the linearization at (z, s0); v^T p(t) decays at
/// rate alpha when z stabilizes.
Vec decay_weights(const FlowFactors& factors, const Vec& z, const DiseaseParams& params,
                  const Vec& s0);

/// Per-location rows: t, location_id, s, x_a, x_s, active_persons,
/// cumulative_persons. SIS writes s = 1 - x, x_a = x, x_s = 0.
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const std::vector<std::string>& ids, const Vec& population);

/// t, active_persons, cumulative_persons, reported_cumulative_persons where
/// the last column is cumulative_persons * reporting_rate.
void write_aggregate_csv(const std::string& path, const Trajectory& traj,
                         double reporting_rate = 0.14);

}  // namespace epilock
