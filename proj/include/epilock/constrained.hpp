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

#include "epilock/balancing.hpp"
#include "epilock/model.hpp"

namespace epilock {

/// minimize sum_i c_i phi(u_i / lb_i)  s.t.  diag(u) >= Q (PSD order), u >= lb.
/// With u_i = q m_i / z_i this is the lockdown problem with z in (0, 1].
struct CoveringInstance {
  Mat Q;         // tau^T diag(N a) tau
  Vec lb;        // q m_i
  Vec c_prime;   // c_i / m_i
  double q = 0;  // stability threshold
  Vec mass;      // m_i
  Vec costs;     // c_i
};

CoveringInstance to_covering(const FlowFactors& factors, const Vec& c,
                             const DiseaseParams& params, const Vec& s0);

struct ConstrainedOptions {
  int max_iter = 50000;
  double tol = 1e-11;
  // Initial dual weights for the convex path (restarts); empty = default.
  Vec w0;
};

/// Convex costs (inverse, power): dual ascent over balancing weights.
/// Capped costs: exact-penalty projected subgradient from the inverse-cost
/// optimum; the report is tagged nonconvex.
SolveReport solve_constrained(const CoveringInstance& inst, const CostSpec& cost,
                              const ConstrainedOptions& options = {});

/// lambda_max(U^-1/2 Q U^-1/2 - I) with U = diag(u). Congruent to Q - diag(u),
/// so it is <= 0 exactly when u is feasible, but on a unit scale.
double covering_lambda(const CoveringInstance& inst, const Vec& u);

/// Maps a covering point back to lockdown rates z_i = lb_i / u_i.
Vec covering_to_z(const CoveringInstance& inst, const Vec& u);

}  // namespace epilock
