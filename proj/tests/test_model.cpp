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

#include <random>

#include "epilock/error.hpp"
#include "epilock/model.hpp"
#include "epilock/synth.hpp"
#include "helpers.hpp"

using namespace epilock;

TEST_CASE("single node collapses to tau_11") {
  Mat tau(1, 1);
  tau << 0.5;
  const NetworkData net = make_network({}, Vec::Constant(1, 100), Vec::Constant(1, 10), tau,
                                       Vec::Constant(1, 720));
  const FlowFactors f = build_flow_matrix(net);
  CHECK(apply_lockdown(f, Vec::Ones(1))(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("factorization matches the direct triple sum") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 20);
    const NetworkData net = testing::random_network(n, rng, 0.4);
    const FlowFactors f = build_flow_matrix(net);
    Vec z(n);
    for (int i = 0; i < n; ++i) z[i] = u(rng);
    const Mat direct = testing::triple_sum(net, z);
    const Mat fact = apply_lockdown(f, z);
    const double scale = direct.cwiseAbs().maxCoeff();
    REQUIRE((direct - fact).cwiseAbs().maxCoeff() <= 1e-12 * scale);
  }
}

TEST_CASE("three-node example couples B and C without direct trips") {
  const Scenario sc = fig1_network();
  const Mat A = apply_lockdown(build_flow_matrix(sc.net), Vec::Ones(3));
  CHECK(sc.net.travel.tau(1, 2) == 0.0);
  CHECK(A(1, 2) > 0);
  CHECK(A(2, 1) > 0);
}

TEST_CASE("lockdown identities and monotonicity") {
  std::mt19937_64 rng(5);
  const NetworkData net = testing::random_network(6, rng, 0.5);
  const FlowFactors f = build_flow_matrix(net);
  const Mat A1 = apply_lockdown(f, Vec::Ones(6));
  CHECK((A1 - f.C * f.B.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((apply_lockdown(f, Vec::Constant(6, 0.5)) - 0.5 * A1).cwiseAbs().maxCoeff() < 1e-15);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    Vec z(6);
    for (int i = 0; i < 6; ++i) z[i] = u(rng);
    const Mat Az = apply_lockdown(f, z);
    CHECK((Az.array() <= A1.array() + 1e-15).all());
    Vec z2 = z;
    z2[rep % 6] = std::min(1.0, z2[rep % 6] * 1.5);
    CHECK((apply_lockdown(f, z2).array() >= Az.array() - 1e-15).all());
    CHECK(((Az.array() > 0) == (A1.array() > 0)).all());
  }
  CHECK_THROWS_AS(apply_lockdown(f, Vec::Ones(5)), Error);
}

TEST_CASE("factors carry the population and mass") {
  std::mt19937_64 rng(9);
  const NetworkData net = testing::random_network(5, rng, 0.3);
  const FlowFactors f = build_flow_matrix(net);
  CHECK((f.C - net.travel.tau).cwiseAbs().maxCoeff() == 0.0);
  const Vec m = net.travel.tau.transpose() * net.population;
  CHECK((f.mass - m).cwiseAbs().maxCoeff() <= 1e-12 * m.maxCoeff());
  const Mat Bt = m.cwiseInverse().asDiagonal() * net.travel.tau.transpose() * net.population.asDiagonal();
  CHECK((f.B.transpose() - Bt).cwiseAbs().maxCoeff() <= 1e-15 * Bt.maxCoeff() + 1e-300);
}

TEST_CASE("lockdown cost examples") {
  const Vec c = Vec::Ones(2);
  CHECK(lockdown_cost(Vec::Ones(2), c, CostSpec{}) == 0.0);
  CHECK(lockdown_cost(Vec::Ones(2), c, parse_cost("power:2")) == 0.0);
  CHECK(lockdown_cost(Vec::Ones(2), c, parse_cost("capped:10")) == 0.0);
  CHECK(lockdown_cost((Vec(2) << 0.5, 0.25).finished(), c, CostSpec{}) == doctest::Approx(4.0));
  CHECK(lockdown_cost(Vec::Constant(1, 0.05), Vec::Ones(1), parse_cost("capped:10")) ==
        doctest::Approx(9.0));
  CHECK(lockdown_cost(Vec::Constant(1, 0.5), Vec::Ones(1), parse_cost("power:3")) ==
        doctest::Approx(7.0));
  CHECK_THROWS_AS(lockdown_cost(Vec::Zero(1), Vec::Ones(1), CostSpec{}), Error);
}

TEST_CASE("cost spec parsing round-trips") {
  for (const char* s : {"inverse", "power:1.5", "power:2", "capped:10"}) {
    CHECK(to_string(parse_cost(s)) == s);
  }
  CHECK_THROWS_AS(parse_cost("power"), Error);
  CHECK_THROWS_AS(parse_cost("capped:0.5"), Error);
  CHECK_THROWS_AS(parse_cost("linear"), Error);
}

TEST_CASE("policy records the cost value") {
  const Vec c = (Vec(3) << 1, 0.5, 0.2).finished();
  const LockdownPolicy p = make_policy((Vec(3) << 0.3, 0.7, 1.2).finished(), c, CostSpec{});
  CHECK(p.exceeds_one);
  CHECK(p.cost_value == doctest::Approx(lockdown_cost(p.z, c, CostSpec{})).epsilon(1e-12));
}

TEST_CASE("scalar linearization assembly") {
  Mat tau(1, 1);
  tau << 1.0;
  const FlowFactors f = build_flow_matrix(
      make_network({}, Vec::Ones(1), Vec::Ones(1), tau, Vec::Zero(1)));
  DiseaseParams p;
  p.beta_s = p.beta_a = p.epsilon = p.r_a = p.r_s = 1.0;
  const Mat M = assemble_linearization(f, Vec::Ones(1), p, Vec::Ones(1));
  Mat expect(2, 2);
  expect << -1, 1, 1, -1;
  CHECK((M - expect).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("SIR and SIS linearizations") {
  std::mt19937_64 rng(2);
  const NetworkData net = testing::random_network(4, rng);
  const FlowFactors f = build_flow_matrix(net);
  const Vec s0 = (Vec(4) << 0.9, 0.8, 0.95, 0.7).finished();
  const Vec z = (Vec(4) << 0.5, 0.2, 0.9, 0.4).finished();
  const Mat Az = apply_lockdown(f, z);
  DiseaseParams sir;
  sir.family = Family::kSIR;
  sir.gamma = 0.2;
  sir.zeta = 1.7;
  const Mat M = assemble_linearization(f, z, sir, s0);
  const Mat expect = sir.zeta * s0.asDiagonal() * Az - sir.gamma * Mat::Identity(4, 4);
  CHECK((M - expect).cwiseAbs().maxCoeff() < 1e-14);
  DiseaseParams sis = sir;
  sis.family = Family::kSIS;
  const Mat Ms = assemble_linearization(f, z, sis, s0);
  CHECK((Ms - (sis.zeta * Az - sis.gamma * Mat::Identity(4, 4))).cwiseAbs().maxCoeff() < 1e-14);

  // COVID with beta_s = eps = r_s = 0: the asymptomatic block is the SIR matrix.
  DiseaseParams cov;
  cov.beta_a = 1.7;
  cov.r_a = 0.2;
  const Mat Mc = assemble_linearization(f, z, cov, s0);
  CHECK((Mc.topLeftCorner(4, 4) - expect).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(Mc.bottomRows(4).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("three-node COVID abscissa matches dense eigensolver") {
  const Scenario sc = fig1_network();
  const FlowFactors f = build_flow_matrix(sc.net);
  DiseaseParams p;
  p.beta_s = 0.4;
  p.beta_a = 0.6754 * p.beta_s;
  p.epsilon = 0.32;
  p.r_a = p.r_s = 0.2;
  p.alpha_hat = 0.6754;
  const Mat M = assemble_linearization(f, Vec::Ones(3), p, sc.state.s);
  REQUIRE(M.rows() == 6);
  // Off-diagonal entries are nonnegative, so the abscissa is real.
  Mat off = M;
  off.diagonal().setZero();
  CHECK(off.minCoeff() >= 0);
  CHECK(testing::dense_abscissa(M) > -1.0);
}

TEST_CASE("network validation") {
  Mat tau = Mat::Constant(2, 2, 0.25);
  const Vec h = Vec::Constant(2, 720);
  CHECK_THROWS_AS(make_network({}, (Vec(2) << 1, 0).finished(), Vec::Ones(2), tau, h), Error);
  CHECK_THROWS_AS(make_network({}, Vec::Ones(2), (Vec(2) << 1, 0).finished(), tau, h), Error);
  NetworkOptions floor;
  floor.cost_floor = 1e-6;
  const NetworkData nf = make_network({}, Vec::Ones(2), (Vec(2) << 1, 0).finished(), tau, h, floor);
  CHECK(nf.cost[1] == 1e-6);
  Mat bad = tau;
  bad(0, 1) = -0.1;
  CHECK_THROWS_AS(make_network({}, Vec::Ones(2), Vec::Ones(2), bad, h), Error);

  // Row sums off by more than the tolerance are rescaled to 1 - h/1440.
  Mat off = tau;
  off.row(0) *= 1.2;
  const NetworkData nr = make_network({}, Vec::Ones(2), Vec::Ones(2), off, h);
  CHECK(nr.travel.tau.row(0).sum() == doctest::Approx(0.5).epsilon(1e-15));

  Mat zero_col = Mat::Zero(2, 2);
  zero_col(0, 0) = 0.5;
  zero_col(1, 0) = 0.5;
  const NetworkData nz = make_network({}, Vec::Ones(2), Vec::Ones(2), zero_col, h);
  try {
    build_flow_matrix(nz);
    FAIL("expected DegenerateLocation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateLocation);
  }
}

TEST_CASE("disease parameter domain") {
  DiseaseParams p;
  p.beta_s = 0.5;
  p.beta_a = 0.3;
  p.epsilon = 0.3;
  p.r_a = 0.1;
  p.r_s = 0.2;
  CHECK(p.alpha_limit() == doctest::Approx(0.2));
  CHECK_THROWS_AS(b1(p, 0.25), Error);
  p.alpha = 0.1;
  CHECK_NOTHROW(p.validate());
  p.r_a = -0.1;
  CHECK_THROWS_AS(p.validate(), Error);
  p.r_a = 0.1;
  // b1 at alpha from the closed form.
  const double b = (0.5 * 0.3 + 0.3 * (0.2 - 0.1)) / ((0.3 + 0.1 - 0.1) * (0.2 - 0.1));
  CHECK(b1(p, 0.1) == doctest::Approx(b).epsilon(1e-14));
  DiseaseParams sis;
  sis.family = Family::kSIS;
  sis.gamma = 0.25;
  sis.zeta = 2.0;
  CHECK(b1(sis, 0.05) == doctest::Approx(10.0));
}

TEST_CASE("transmission weights") {
  DiseaseParams p;
  const Vec s0 = (Vec(2) << 0.9, 0.5).finished();
  CHECK((transmission_weights(p, s0) - s0).norm() == 0.0);
  p.family = Family::kSIS;
  CHECK((transmission_weights(p, s0) - Vec::Ones(2)).norm() == 0.0);
  p.beta_scale = (Vec(2) << 0.5, 1.0).finished();
  CHECK(transmission_weights(p, s0)[0] == 0.5);
}
