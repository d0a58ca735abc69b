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


#include "epilock/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "epilock/csv.hpp"
#include "epilock/error.hpp"
#include "epilock/spectral.hpp"

namespace epilock {

namespace {

// Effective COVID-form coefficients; SIR runs through the same equations.
struct Rates {
  double beta_a, beta_s, epsilon, r_a, r_s;
};

Rates covid_rates(const DiseaseParams& p) {
  if (p.family == Family::kSIR) return {p.zeta, 0.0, 0.0, p.gamma, 0.0};
  return {p.beta_a, p.beta_s, p.epsilon, p.r_a, p.r_s};
}

Vec multiplier(const DiseaseParams& p, Index n) {
  if (p.beta_scale.size() == 0) return Vec::Ones(n);
  if (p.beta_scale.size() != n) {
    throw Error(ErrorCode::kValidation, "beta_scale has the wrong length");
  }
  return p.beta_scale;
}

struct Deriv {
  Vec s, x_a, x_s, x, r, cum;
};

Deriv rhs(const EpidemicState& st, const Mat& A, const DiseaseParams& p, const Vec& m) {
  Deriv d;
  if (p.family == Family::kSIS) {
    const Vec inc = p.zeta * m.cwiseProduct(Vec::Ones(st.x.size()) - st.x)
                                .cwiseProduct(A * st.x);
    d.x = inc - p.gamma * st.x;
    d.cum = inc;
    return d;
  }
  const Rates k = covid_rates(p);
  const Vec force = m.cwiseProduct(st.s).cwiseProduct(A * (k.beta_a * st.x_a + k.beta_s * st.x_s));
  d.s = -force;
  d.x_a = force - (k.epsilon + k.r_a) * st.x_a;
  d.x_s = k.epsilon * st.x_a - k.r_s * st.x_s;
  d.r = k.r_a * st.x_a + k.r_s * st.x_s;
  d.cum = force;
  return d;
}

EpidemicState axpy(const EpidemicState& st, double h, const Deriv& d) {
  EpidemicState out = st;
  if (d.x.size()) out.x += h * d.x;
  if (d.s.size()) {
    out.s += h * d.s;
    out.x_a += h * d.x_a;
    out.x_s += h * d.x_s;
    out.r += h * d.r;
  }
  out.cum += h * d.cum;
  out.t += h;
  return out;
}

double clamp01(Vec& v) {
  double worst = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double c = std::clamp(v[i], 0.0, 1.0);
    worst = std::max(worst, std::abs(c - v[i]));
    v[i] = c;
  }
  return worst;
}

}  // namespace

EpidemicState make_state(Family family, Vec s, Vec x_a, Vec x_s, Vec r) {
  if (family == Family::kSIS) {
    throw Error(ErrorCode::kValidation, "SIS states are built with make_sis_state");
  }
  const Index n = s.size();
  if (x_a.size() != n || x_s.size() != n || (r.size() && r.size() != n)) {
    throw Error(ErrorCode::kValidation, "state vectors differ in length");
  }
  EpidemicState st;
  if (r.size() == 0) r = (Vec::Ones(n) - s - x_a - x_s).cwiseMax(0.0);
  for (Index i = 0; i < n; ++i) {
    const double total = s[i] + x_a[i] + x_s[i] + r[i];
    if (s[i] < 0 || x_a[i] < 0 || x_s[i] < 0 || r[i] < 0 || total > 1 + 1e-9) {
      throw Error(ErrorCode::kValidation,
                  "state at location " + std::to_string(i) + " is outside the simplex");
    }
  }
  st.cum = Vec::Ones(n) - s;
  st.s = std::move(s);
  st.x_a = std::move(x_a);
  st.x_s = std::move(x_s);
  st.r = std::move(r);
  return st;
}

EpidemicState make_sis_state(Vec x) {
  if ((x.array() < 0).any() || (x.array() > 1).any()) {
    throw Error(ErrorCode::kValidation, "SIS state outside [0, 1]");
  }
  EpidemicState st;
  st.cum = x;
  st.x = std::move(x);
  return st;
}

EpidemicState initial_state_for(const Scenario& scenario, Family family) {
  const EpidemicState& st = scenario.state;
  if (family == Family::kSIS) return make_sis_state((st.x_a + st.x_s).cwiseMin(1.0));
  return make_state(family, st.s, st.x_a, st.x_s, st.r);
}

EpidemicState step_rk4(const EpidemicState& st, const Mat& A_z, const DiseaseParams& p,
                       double dt, double* clamp) {
  const Vec m = multiplier(p, A_z.rows());
  const Deriv k1 = rhs(st, A_z, p, m);
  const Deriv k2 = rhs(axpy(st, dt / 2, k1), A_z, p, m);
  const Deriv k3 = rhs(axpy(st, dt / 2, k2), A_z, p, m);
  const Deriv k4 = rhs(axpy(st, dt, k3), A_z, p, m);

  EpidemicState out = st;
  auto comb = [&](const Vec Deriv::*f, Vec& target) {
    target += dt / 6 * ((k1.*f) + 2 * (k2.*f) + 2 * (k3.*f) + (k4.*f));
  };
  double worst = 0.0;
  if (p.family == Family::kSIS) {
    comb(&Deriv::x, out.x);
    worst = clamp01(out.x);
  } else {
    comb(&Deriv::s, out.s);
    comb(&Deriv::x_a, out.x_a);
    comb(&Deriv::x_s, out.x_s);
    comb(&Deriv::r, out.r);
    for (Vec* v : {&out.s, &out.x_a, &out.x_s, &out.r}) worst = std::max(worst, clamp01(*v));
  }
  comb(&Deriv::cum, out.cum);
  worst = std::max(worst, clamp01(out.cum));
  out.t = st.t + dt;
  if (clamp) *clamp = worst;
  return out;
}

EpidemicState advance(const EpidemicState& st, const Mat& A_z, const DiseaseParams& p,
                      double dt, const SimOptions& options, int* rejected) {
  double clamp = 0.0;
  EpidemicState next = step_rk4(st, A_z, p, dt, &clamp);
  if (clamp < options.clamp_tol) return next;
  if (rejected) ++*rejected;
  const double half = dt / 2;
  if (half < options.min_dt) {
    throw Error(ErrorCode::kStepRejectionCascade,
                "step size fell below " + std::to_string(options.min_dt) + " at t = " +
                    std::to_string(st.t),
                clamp, Vec());
  }
  return advance(advance(st, A_z, p, half, options, rejected), A_z, p, half, options, rejected);
}

Vec infected_vector(const EpidemicState& st, Family family) {
  if (family == Family::kSIS) return st.x;
  if (family == Family::kSIR) return st.x_a;
  Vec out(2 * st.x_a.size());
  out << st.x_a, st.x_s;
  return out;
}

Vec decay_weights(const FlowFactors& factors, const Vec& z, const DiseaseParams& params,
                  const Vec& s0) {
  return perron_left(assemble_linearization(factors, z, params, s0)).vector;
}

Trajectory simulate(const FlowFactors& factors, const EpidemicState& state0, const Vec& z,
                    const DiseaseParams& params, double horizon, const SimOptions& options) {
  params.validate();
  if (!(options.dt > 0) || !(options.sample_every > 0) || !(horizon >= 0)) {
    throw Error(ErrorCode::kValidation, "dt, sample_every and horizon must be positive");
  }
  const Mat A = apply_lockdown(factors, z);
  const Vec& N = factors.population;
  const long per_sample = std::max(1L, std::lround(options.sample_every / options.dt));
  const long total = std::lround(horizon / options.dt);

  Trajectory traj;
  traj.family = params.family;
  auto record = [&](const EpidemicState& st) {
    const double act = params.family == Family::kSIS ? N.dot(st.x) : N.dot(st.x_a + st.x_s);
    traj.samples.push_back(st);
    traj.active.push_back(act);
    traj.cumulative.push_back(N.dot(st.cum));
  };
  EpidemicState st = state0;
  st.t = 0.0;
  record(st);
  for (long k = 1; k <= total; ++k) {
    st = advance(st, A, params, options.dt, options, &traj.rejected_steps);
    st.t = static_cast<double>(k) * options.dt;
    if (k % per_sample == 0 || k == total) record(st);
  }
  return traj;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const std::vector<std::string>& ids, const Vec& population) {
  CsvWriter out(path);
  out.row({"t", "location_id", "s", "x_a", "x_s", "active_persons", "cumulative_persons"});
  const bool sis = traj.family == Family::kSIS;
  for (const auto& st : traj.samples) {
    for (Index i = 0; i < population.size(); ++i) {
      const double s = sis ? 1.0 - st.x[i] : st.s[i];
      const double xa = sis ? st.x[i] : st.x_a[i];
      const double xs = sis ? 0.0 : st.x_s[i];
      out.row({fmt12(st.t), ids[static_cast<std::size_t>(i)], fmt12(s), fmt12(xa), fmt12(xs),
               fmt12(population[i] * (xa + xs)), fmt12(population[i] * st.cum[i])});
    }
  }
  out.commit();
}

void write_aggregate_csv(const std::string& path, const Trajectory& traj,
                         double reporting_rate) {
  CsvWriter out(path);
  out.row({"t", "active_persons", "cumulative_persons", "reported_cumulative_persons"});
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    out.row({fmt12(traj.samples[k].t), fmt12(traj.active[k]), fmt12(traj.cumulative[k]),
             fmt12(reporting_rate * traj.cumulative[k])});
  }
  out.commit();
}

}  // namespace epilock
