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
#include <random>
#include <set>

#include "epilock/error.hpp"
#include "epilock/presets.hpp"
#include "epilock/spectral.hpp"
#include "epilock/synth.hpp"
#include "helpers.hpp"

using namespace epilock;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an epilock::Error");
  return ErrorCode::kIo;
}

FlowFactors unit_factors() {
  Mat tau(1, 1);
  tau << 1.0;
  return build_flow_matrix(make_network({}, Vec::Ones(1), Vec::Ones(1), tau, Vec::Zero(1)));
}

}  // namespace

TEST_CASE("perron on two-node examples") {
  Mat P(2, 2);
  P << 0, 1, 1, 0;
  PerronPair pp = perron(P);
  CHECK(pp.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pp.vector[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pp.vector[1] == doctest::Approx(0.5).epsilon(1e-12));
  P << -1, 1, 1, -1;
  pp = perron(P);
  CHECK(std::abs(pp.value) < 1e-12);
  CHECK(pp.vector[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("perron matches dense eigensolver on random matrices") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 8;
    Mat P = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      P(i, (i + 1) % n) = u(rng) + 0.01;
      for (int j = 0; j < n; ++j) {
        if (u(rng) < 0.3) P(i, j) = u(rng);
      }
      P(i, i) = -3 * u(rng);  // Metzler diagonal
    }
    const PerronPair pp = perron(P);
    CHECK(pp.value == doctest::Approx(testing::dense_abscissa(P)).epsilon(1e-9));
    CHECK(pp.vector.minCoeff() > 0);
    CHECK(pp.vector.sum() == doctest::Approx(1.0));
    CHECK((P * pp.vector - pp.value * pp.vector).cwiseAbs().maxCoeff() < 1e-9);
    const PerronPair left = perron_left(P);
    CHECK(left.value == doctest::Approx(pp.value).epsilon(1e-9));
  }
}

TEST_CASE("perron flip identity lambda(XY) = lambda(YX)") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.01, 1);
  Mat X(5, 5), Y(5, 5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      X(i, j) = u(rng);
      Y(i, j) = u(rng);
    }
  }
  CHECK(perron(Mat(X * Y)).value == doctest::Approx(perron(Mat(Y * X)).value).epsilon(1e-10));
}

TEST_CASE("perron rejects bad input") {
  Mat U(3, 3);
  U << 1, 1, 1, 0, 1, 1, 0, 0, 1;
  CHECK(code_of([&] { perron(U); }) == ErrorCode::kNotStronglyConnected);
  Mat N(2, 2);
  N << 0, -1, 1, 0;
  CHECK(code_of([&] { perron(N); }) == ErrorCode::kValidation);
}

TEST_CASE("strongly connected patterns") {
  Mat C(2, 2);
  C << 0, 1, 1, 0;
  CHECK(strongly_connected(C));
  Mat U = Mat::Zero(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) U(i, j) = 1;
  }
  CHECK_FALSE(strongly_connected(U));
  const auto comp = strongly_connected_components(U);
  CHECK(std::set<int>(comp.begin(), comp.end()).size() == 4);
}

TEST_CASE("is_stabilizing examples") {
  const StabilityCheck s = is_stabilizing(-2.0 * Mat::Identity(2, 2), 1.0);
  CHECK(s.stabilizing);
  CHECK(s.margin == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(code_of([] { is_stabilizing(Mat::Zero(2, 2), 1.0); }) ==
        ErrorCode::kNotStronglyConnected);
  Mat M(2, 2);
  M << -1, 1, 1, -1;
  CHECK_FALSE(is_stabilizing(M, 0.1).stabilizing);
  CHECK(is_stabilizing(M, 0.0).stabilizing);
}

TEST_CASE("spectral abscissa of a reducible matrix takes the worst block") {
  Mat M = Mat::Zero(3, 3);
  M(0, 0) = -1;
  M(1, 1) = -0.5;
  M(2, 2) = -3;
  M(0, 1) = 2;
  CHECK(spectral_abscissa(M) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("scalar COVID calibration hits the characteristic-polynomial root") {
  DiseaseParams p;
  p.epsilon = p.r_a = p.r_s = 1.0;
  p.alpha_hat = 1.0;
  const DiseaseParams cal = calibrate_beta(unit_factors(), p, Vec::Ones(1), 0.0);
  // M = [[b - 2, b], [1, -1]]: det = 2 - 2b vanishes at b = 1, trace < 0 there.
  CHECK(cal.beta_s == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(cal.beta_a == doctest::Approx(1.0).epsilon(1e-10));
  // A nonzero target: root of lambda^2 - tr lambda + det with lambda = g.
  const double g = 0.3;
  const DiseaseParams cal2 = calibrate_beta(unit_factors(), p, Vec::Ones(1), g);
  const double b = cal2.beta_s;
  const double tr = b - 3;
  const double det = 2 - 2 * b;
  CHECK(0.5 * (tr + std::sqrt(tr * tr - 4 * det)) == doctest::Approx(g).epsilon(1e-9));
}

TEST_CASE("calibration limits and errors") {
  DiseaseParams p;
  p.epsilon = p.r_a = p.r_s = 1.0;
  p.alpha_hat = 1.0;
  const DiseaseParams low = calibrate_beta(unit_factors(), p, Vec::Ones(1), -1.0 + 1e-6);
  CHECK(low.beta_s < 1e-4);
  CHECK(code_of([&] { calibrate_beta(unit_factors(), p, Vec::Ones(1), -1.0); }) ==
        ErrorCode::kCalibrationRange);
  DiseaseParams sis;
  sis.family = Family::kSIS;
  sis.gamma = 0.2;
  CHECK(calibrate_beta(unit_factors(), sis, Vec::Ones(1), 0.1).zeta ==
        doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("calibrated three-node growth matches dense eigensolver") {
  const Scenario sc = fig1_network();
  const FlowFactors f = build_flow_matrix(sc.net);
  ParamSet ps = preset("bertozzi");
  const DiseaseParams p = calibrate_beta(f, ps.params, sc.state.s, ps.target_growth);
  const Mat M = assemble_linearization(f, Vec::Ones(3), p, sc.state.s);
  CHECK(testing::dense_abscissa(M) == doctest::Approx(ps.target_growth).epsilon(1e-9));
  CHECK(p.beta_a == doctest::Approx(p.alpha_hat * p.beta_s).epsilon(1e-15));
}

TEST_CASE("decay rate and r conversions") {
  for (const auto& name : preset_names()) {
    DiseaseParams p = preset(name).params;
    p.beta_s = 0.5;
    p.beta_a = p.alpha_hat * p.beta_s;
    p.alpha = 0.0;
    CHECK(alpha_to_r(p) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r_to_alpha(p, 1.0) == 0.0);
    for (double a : {0.01, 0.05, 0.1}) {
      if (a >= p.alpha_limit()) continue;
      p.alpha = a;
      const double r = alpha_to_r(p);
      CHECK(r < 1.0);
      CHECK(r_to_alpha(p, r) == doctest::Approx(a).epsilon(1e-10));
    }
    p.alpha = p.alpha_limit() * (1 - 1e-9);
    CHECK(alpha_to_r(p) < 1e-6);
  }
  DiseaseParams sis;
  sis.family = Family::kSIS;
  sis.gamma = 0.25;
  sis.alpha = 0.05;
  CHECK(alpha_to_r(sis) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(r_to_alpha(sis, 0.8) == doctest::Approx(0.05).epsilon(1e-14));
  DiseaseParams degenerate;
  CHECK(code_of([&] { alpha_to_r(degenerate); }) == ErrorCode::kInfeasibleAlpha);
}

TEST_CASE("reproduction number is one at the calibration boundary") {
  // b1(0) rho(W A) = 1 exactly when the zero-growth target is calibrated.
  const Scenario sc = fig1_network();
  const FlowFactors f = build_flow_matrix(sc.net);
  DiseaseParams p = preset("bertozzi").params;
  p = calibrate_beta(f, p, sc.state.s, 0.0);
  CHECK(reproduction_number(f, Vec::Ones(3), p, sc.state.s) ==
        doctest::Approx(1.0).epsilon(1e-8));
  DiseaseParams d = p;
  d.r_s = 0;
  CHECK(code_of([&] { reproduction_number(f, Vec::Ones(3), d, sc.state.s); }) ==
        ErrorCode::kDegenerateRates);
}
