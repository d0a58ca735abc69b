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


#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "epilock/balancing.hpp"
#include "epilock/csv.hpp"
#include "epilock/presets.hpp"
#include "epilock/simulate.hpp"
#include "epilock/spectral.hpp"
#include "epilock/synth.hpp"
#include "helpers.hpp"

using namespace epilock;

namespace {

FlowFactors scalar_factors(double a) {
  Mat tau(1, 1);
  tau << 1.0;
  FlowFactors f = build_flow_matrix(make_network({}, Vec::Ones(1), Vec::Ones(1), tau, Vec::Zero(1)));
  f.C *= a;
  return f;
}

}  // namespace

TEST_CASE("disease-free state is a fixed point") {
  const Scenario sc = fig1_network();
  const FlowFactors f = build_flow_matrix(sc.net);
  DiseaseParams p = calibrate_beta(f, preset("bertozzi").params, sc.state.s, 0.71);
  const EpidemicState st = make_state(Family::kCOVID, sc.state.s, Vec::Zero(3), Vec::Zero(3));
  const Trajectory tr = simulate(f, st, Vec::Ones(3), p, 50.0);
  CHECK((tr.samples.back().s - sc.state.s).cwiseAbs().maxCoeff() == 0.0);
  CHECK(tr.active.back() == 0.0);
}

TEST_CASE("scalar SIS follows the logistic closed form") {
  const double a = 1.0;
  DiseaseParams p;
  p.family = Family::kSIS;
  p.zeta = 0.3;
  p.gamma = 0.5;
  const double x0 = 0.1;
  const Trajectory tr = simulate(scalar_factors(a), make_sis_state(Vec::Constant(1, x0)),
                                 Vec::Ones(1), p, 60.0);
  // dx/dt = r x - k x^2 with r = zeta a - gamma, k = zeta a.
  const double r = p.zeta * a - p.gamma;
  const double k = p.zeta * a;
  double prev = INFINITY;
  for (const EpidemicState& st : tr.samples) {
    const double e = std::exp(r * st.t);
    const double exact = r * x0 * e / (r + k * x0 * (e - 1.0));
    CHECK(st.x[0] == doctest::Approx(exact).epsilon(1e-8));
    CHECK(st.x[0] < prev);
    prev = st.x[0];
  }
  const double n = static_cast<double>(tr.samples.size());
  const double slope = std::log(tr.samples.back().x[0] / tr.samples[tr.samples.size() - 11].x[0]) / 10.0;
  CHECK(n > 50);
  CHECK(slope == doctest::Approx(r).epsilon(1e-3));
}

TEST_CASE("COVID dynamics conserve each location's population") {
  const Scenario sc = city_suburb(2);
  const FlowFactors f = build_flow_matrix(sc.net);
  const DiseaseParams p = calibrate_beta(f, preset("bertozzi").params, sc.state.s, 0.71);
  const Trajectory tr = simulate(f, initial_state_for(sc, Family::kCOVID), Vec::Ones(2), p, 100.0);
  const EpidemicState& s0 = tr.samples.front();
  const Vec total0 = s0.s + s0.x_a + s0.x_s + s0.r;
  for (const EpidemicState& st : tr.samples) {
    CHECK(((st.s + st.x_a + st.x_s + st.r) - total0).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((st.cum - (Vec::Ones(2) - st.s)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(st.s.minCoeff() >= 0);
  }
  for (std::size_t k = 1; k < tr.cumulative.size(); ++k) {
    CHECK(tr.cumulative[k] >= tr.cumulative[k - 1]);
  }
}

TEST_CASE("optimal lockdown decays at the target rate") {
  const Scenario sc = fig1_network();
  const FlowFactors f = build_flow_matrix(sc.net);
  const ParamSet ps = preset("bertozzi");
  DiseaseParams p = calibrate_beta(f, ps.params, sc.state.s, ps.target_growth);
  p.alpha = 0.0231;
  const SolveReport r = solve(f, sc.net.cost, p, sc.state.s);
  const Vec v = decay_weights(f, r.z_star, p, sc.state.s);
  CHECK(v.minCoeff() > 0);
  const Trajectory tr = simulate(f, initial_state_for(sc, Family::kCOVID), r.z_star, p, 200.0);
  const double base = v.dot(infected_vector(tr.samples.front(), Family::kCOVID));
  for (const EpidemicState& st : tr.samples) {
    CHECK(v.dot(infected_vector(st, Family::kCOVID)) <=
          base * std::exp(-p.alpha * st.t) * (1 + 1e-6));
  }
}

TEST_CASE("open epidemic grows at the linearization rate") {
  const Scenario sc = city_suburb(1);
  const FlowFactors f = build_flow_matrix(sc.net);
  const DiseaseParams p = calibrate_beta(f, preset("bertozzi").params, sc.state.s, 0.2);
  const double lam = testing::dense_abscissa(assemble_linearization(f, Vec::Ones(2), p, sc.state.s));
  // A tiny seed keeps s at s0 over the fit window.
  const EpidemicState st = make_state(Family::kCOVID, sc.state.s, Vec::Constant(2, 1e-9),
                                      Vec::Constant(2, 1e-10));
  const Trajectory tr = simulate(f, st, Vec::Ones(2), p, 40.0);
  const double slope = std::log(tr.active[40] / tr.active[20]) / 20.0;
  CHECK(slope == doctest::Approx(lam).epsilon(0.05));
}

TEST_CASE("SIR runs through the COVID equations") {
  const Scenario sc = city_suburb(3);
  const FlowFactors f = build_flow_matrix(sc.net);
  DiseaseParams sir = preset("bertozzi").params;
  sir.family = Family::kSIR;
  sir = calibrate_beta(f, sir, sc.state.s, 0.1);
  const Trajectory tr = simulate(f, initial_state_for(sc, Family::kSIR), Vec::Ones(2), sir, 30.0);
  for (const EpidemicState& st : tr.samples) CHECK(st.x_s.cwiseAbs().maxCoeff() <= sc.state.x_s.maxCoeff());
  CHECK(tr.cumulative.back() > tr.cumulative.front());
}

TEST_CASE("simulation is deterministic and writes its CSVs") {
  const Scenario sc = fig1_network();
  const FlowFactors f = build_flow_matrix(sc.net);
  const DiseaseParams p = calibrate_beta(f, preset("bertozzi").params, sc.state.s, 0.71);
  const Vec z = (Vec(3) << 0.3, 0.5, 0.7).finished();
  const Trajectory a = simulate(f, initial_state_for(sc, Family::kCOVID), z, p, 20.0);
  const Trajectory b = simulate(f, initial_state_for(sc, Family::kCOVID), z, p, 20.0);
  CHECK(a.active == b.active);
  CHECK(a.cumulative == b.cumulative);
  CHECK(a.samples.size() == 21);

  const auto dir = std::filesystem::temp_directory_path() / "epilock_sim_test";
  std::filesystem::create_directories(dir);
  write_trajectory_csv((dir / "trajectory.csv").string(), a, sc.net.ids, sc.net.population);
  write_aggregate_csv((dir / "aggregate.csv").string(), a);
  const CsvTable t = read_csv((dir / "trajectory.csv").string());
  CHECK(t.header == std::vector<std::string>{"t", "location_id", "s", "x_a", "x_s",
                                             "active_persons", "cumulative_persons"});
  CHECK(t.rows.size() == 21 * 3);
  const CsvTable g = read_csv((dir / "aggregate.csv").string());
  CHECK(g.rows.size() == 21);
  CHECK(g.num(20, "reported_cumulative_persons") ==
        doctest::Approx(0.14 * g.num(20, "cumulative_persons")).epsilon(1e-10));
  std::filesystem::remove_all(dir);
}

TEST_CASE("invalid simulation input") {
  const Scenario sc = fig1_network();
  const FlowFactors f = build_flow_matrix(sc.net);
  DiseaseParams p = preset("bertozzi").params;
  SimOptions bad;
  bad.dt = 0;
  CHECK_THROWS(simulate(f, initial_state_for(sc, Family::kCOVID), Vec::Ones(3), p, 10.0, bad));
  CHECK_THROWS(make_state(Family::kCOVID, Vec::Constant(3, 0.9), Vec::Constant(3, 0.2),
                          Vec::Zero(3)));
  CHECK_THROWS(make_state(Family::kSIS, Vec::Ones(3), Vec::Zero(3), Vec::Zero(3)));
}
