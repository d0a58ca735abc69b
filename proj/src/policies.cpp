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


#include "epilock/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "epilock/error.hpp"
#include "epilock/parallel.hpp"
#include "epilock/spectral.hpp"

namespace epilock {

namespace {

double phi(double z, const CostSpec& cost) {
  switch (cost.kind) {
    case CostKind::kInverse: return 1.0 / z - 1.0;
    case CostKind::kPower: return std::pow(z, -cost.param) - 1.0;
    case CostKind::kCapped: return std::min(1.0 / z, cost.param) - 1.0;
  }
  return 0.0;
}

// Largest value phi can take (infinite unless capped).
double phi_max(const CostSpec& cost) {
  return cost.kind == CostKind::kCapped ? cost.param - 1.0
                                        : std::numeric_limits<double>::infinity();
}

Vec masked(const Vec& v, const std::vector<bool>& mask, bool keep) {
  std::vector<double> out;
  for (Index i = 0; i < v.size(); ++i) {
    if (mask[static_cast<std::size_t>(i)] == keep) out.push_back(v[i]);
  }
  return Eigen::Map<Vec>(out.data(), static_cast<Index>(out.size()));
}

Vec two_level(const std::vector<bool>& inside, double zi, double zo) {
  Vec z(static_cast<Index>(inside.size()));
  for (std::size_t i = 0; i < inside.size(); ++i) z[static_cast<Index>(i)] = inside[i] ? zi : zo;
  return z;
}

bool order_ok(TwoParamOrder order, double zi, double zo) {
  switch (order) {
    case TwoParamOrder::kAny: return true;
    case TwoParamOrder::kInsideLower: return zi <= zo;
    case TwoParamOrder::kInsideHigher: return zi >= zo;
  }
  return true;
}

// Grid points step, 2 step, ..., 1, and a refinement around a centre.
std::vector<double> grid(double step) {
  std::vector<double> out;
  const long k = std::lround(1.0 / step);
  for (long i = 1; i <= k; ++i) out.push_back(std::min(1.0, static_cast<double>(i) * step));
  return out;
}

std::vector<double> refine(double centre, double coarse, double fine) {
  std::vector<double> out;
  const long k = std::lround(coarse / fine);
  for (long i = -k; i <= k; ++i) {
    const double v = centre + static_cast<double>(i) * fine;
    if (v > 0 && v <= 1.0 + 1e-12) out.push_back(std::min(v, 1.0));
  }
  return out;
}

}  // namespace

double match_cost_uniform(double target, const Vec& c, const CostSpec& cost) {
  if (!(target >= 0)) throw Error(ErrorCode::kValidation, "target cost must be nonnegative");
  const double total = c.sum();
  if (!(total > 0)) throw Error(ErrorCode::kValidation, "costs must be positive");
  if (target == 0) return 1.0;
  const double level = target / total;  // required phi(z)
  if (level > phi_max(cost) * (1 + 1e-12)) {
    throw Error(ErrorCode::kInfeasibleTarget, "target cost exceeds the capped maximum");
  }
  switch (cost.kind) {
    case CostKind::kInverse: return 1.0 / (level + 1.0);
    case CostKind::kPower: return std::pow(level + 1.0, -1.0 / cost.param);
    case CostKind::kCapped: return 1.0 / std::min(level + 1.0, cost.param);
  }
  return 1.0;
}

double expected_phi(double a, double b, const CostSpec& cost) {
  if (!(a > 0 && b >= a)) throw Error(ErrorCode::kValidation, "need 0 < a <= b");
  if (b - a <= 1e-14 * b) return phi(a, cost);
  const double w = b - a;
  switch (cost.kind) {
    case CostKind::kInverse: return std::log(b / a) / w - 1.0;
    case CostKind::kPower: {
      const double k = cost.param;
      if (k == 1.0) return std::log(b / a) / w - 1.0;
      return (std::pow(b, 1.0 - k) - std::pow(a, 1.0 - k)) / ((1.0 - k) * w) - 1.0;
    }
    case CostKind::kCapped: {
      const double t = 1.0 / cost.param;  // below t the cap binds
      double integral = 0.0;
      if (a < t) integral += cost.param * (std::min(b, t) - a);
      if (b > t) integral += std::log(b / std::max(a, t));
      return integral / w - 1.0;
    }
  }
  return 0.0;
}

std::vector<double> uniform_draws(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> out(count);
  for (auto& u : out) u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return out;
}

RandomPolicy match_cost_random(double target, const Vec& c, double width, std::uint64_t seed,
                               const CostSpec& cost) {
  if (!(width > 0 && width < 1)) throw Error(ErrorCode::kValidation, "width must lie in (0, 1)");
  if (!(target >= 0)) throw Error(ErrorCode::kValidation, "target cost must be nonnegative");
  const double total = c.sum();
  const auto upper = [&](double a) { return std::min(1.0, a + width); };

  // Both costs fall monotonically as the lower end a rises.
  const auto solve_a = [&](auto&& cost_at, const char* what) {
    constexpr double kTiny = 1e-12;
    if (cost_at(kTiny) < target) {
      throw Error(ErrorCode::kWidthInfeasible,
                  std::string(what) + " cannot reach the target with width " +
                      std::to_string(width));
    }
    double lo = kTiny, hi = 1.0;
    for (int k = 0; k < 200 && hi - lo > 1e-16; ++k) {
      const double mid = 0.5 * (lo + hi);
      (cost_at(mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };

  RandomPolicy out;
  out.a_expected = target == 0 ? 1.0 : solve_a([&](double a) {
    return total * expected_phi(a, upper(a), cost);
  }, "expected cost");
  out.expected_cost = total * expected_phi(out.a_expected, upper(out.a_expected), cost);

  const std::vector<double> u = uniform_draws(static_cast<std::size_t>(c.size()), seed);
  const auto draw = [&](double a) {
    const double b = upper(a);
    Vec z(c.size());
    for (Index i = 0; i < c.size(); ++i) z[i] = a + (b - a) * u[static_cast<std::size_t>(i)];
    return z;
  };
  out.a = target == 0 ? 1.0 : solve_a([&](double a) {
    return lockdown_cost(draw(a), c, cost);
  }, "realized cost");
  out.b = upper(out.a);
  out.z = draw(out.a);
  out.realized_cost = lockdown_cost(out.z, c, cost);
  return out;
}

BoundedDecline match_cost_bounded_decline(double target, const FlowFactors& factors,
                                          const Vec& c, const DiseaseParams& params,
                                          const Vec& s0, const CostSpec& cost) {
  if (!(target >= 0)) throw Error(ErrorCode::kValidation, "target cost must be nonnegative");
  const StabilityScalingInstance inst = to_stability_scaling(factors, c, params, s0);
  const double q = inst.D[0];
  const Vec rows = inst.P.rowwise().sum();
  const auto z_at = [&](double decline) {
    return ((q - decline) * rows.cwiseInverse()).cwiseMin(1.0).eval();
  };
  const auto cost_at = [&](double decline) { return lockdown_cost(z_at(decline), c, cost); };

  double lo = q - rows.maxCoeff();
  double hi = q;
  if (target > 0) {
    if (cost.kind == CostKind::kCapped && c.sum() * phi_max(cost) < target) {
      throw Error(ErrorCode::kInfeasibleTarget, "target cost exceeds the capped maximum");
    }
    for (int k = 0; k < 300; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (cost_at(mid) < target ? lo : hi) = mid;
    }
  }
  BoundedDecline out;
  out.decline = target > 0 ? 0.5 * (lo + hi) : lo;
  out.z = z_at(out.decline);
  out.lambda = perron(out.z.asDiagonal() * inst.P).value - q;
  return out;
}

double decay_matched_uniform(const FlowFactors& factors, const DiseaseParams& params,
                             const Vec& s0) {
  const Vec ones = Vec::Ones(factors.n());
  const StabilityScalingInstance inst = to_stability_scaling(factors, ones, params, s0);
  return std::min(1.0, inst.D[0] / perron(inst.P).value);
}

std::optional<double> efficiency(double cost_ours, double cost_uniform) {
  if (!(cost_uniform > 0)) {
    if (cost_ours == 0 && cost_uniform == 0) return 1.0;
    return std::nullopt;
  }
  return cost_ours / cost_uniform;
}

TwoParamResult best_two_param_budget(const FlowFactors& factors, const Vec& c,
                                     const DiseaseParams& params, const EpidemicState& state0,
                                     double budget, double horizon,
                                     const TwoParamOptions& options, const SimOptions& sim,
                                     const CostSpec& cost) {
  const auto& inside = options.inside;
  if (static_cast<Index>(inside.size()) != c.size()) {
    throw Error(ErrorCode::kValidation, "partition length differs from the network");
  }
  const Vec c_in = masked(c, inside, true);
  const Vec c_out = masked(c, inside, false);

  struct Candidate {
    double zi = 1, zo = 1;
    double metric = std::numeric_limits<double>::infinity();
    bool ok = false;
  };
  const auto candidate = [&](double zi) {
    Candidate k;
    if (c_in.size() == 0 || c_out.size() == 0) {
      const double z = match_cost_uniform(budget, c, cost);
      k.zi = k.zo = z;
      k.ok = true;
      return k;
    }
    const double rest = budget - c_in.sum() * phi(zi, cost);
    if (rest < -1e-12 * std::max(1.0, budget)) return k;
    try {
      k.zo = match_cost_uniform(std::max(0.0, rest), c_out, cost);
    } catch (const Error&) {
      return k;
    }
    k.zi = zi;
    k.ok = order_ok(options.order, k.zi, k.zo);
    return k;
  };

  int evaluated = 0;
  const auto search = [&](const std::vector<double>& values) {
    std::vector<Candidate> cands;
    for (double v : values) {
      Candidate k = candidate(v);
      if (k.ok) cands.push_back(k);
    }
    parallel_for(cands.size(), options.threads, [&](std::size_t i) {
      const Trajectory t =
          simulate(factors, state0, two_level(inside, cands[i].zi, cands[i].zo), params, horizon, sim);
      cands[i].metric = t.cumulative.back();
    });
    evaluated += static_cast<int>(cands.size());
    Candidate best;
    for (const auto& k : cands) {
      if (k.metric < best.metric) best = k;
    }
    return best;
  };

  // The uniform level satisfies every ordering, so it is always a candidate
  // even when it falls between grid points.
  std::vector<double> values = grid(options.grid_step);
  try {
    values.push_back(match_cost_uniform(budget, c, cost));
  } catch (const Error&) {
  }
  Candidate best = search(values);
  if (!best.ok) throw Error(ErrorCode::kEmptyGrid, "no two-parameter lockdown meets the budget");
  if (c_in.size() && c_out.size()) {
    const Candidate fine = search(refine(best.zi, options.grid_step, options.refine_step));
    if (fine.ok && fine.metric < best.metric) best = fine;
  }
  TwoParamResult out;
  out.z_inside = best.zi;
  out.z_outside = best.zo;
  out.z = two_level(inside, best.zi, best.zo);
  out.cost = lockdown_cost(out.z, c, cost);
  out.final_cumulative = best.metric;
  out.evaluated = evaluated;
  return out;
}

TwoParamResult best_two_param_rate(const FlowFactors& factors, const Vec& c,
                                   const DiseaseParams& params, const Vec& s0, double rate,
                                   const TwoParamOptions& options, const CostSpec& cost) {
  const auto& inside = options.inside;
  if (static_cast<Index>(inside.size()) != c.size()) {
    throw Error(ErrorCode::kValidation, "partition length differs from the network");
  }
  DiseaseParams p = params;
  p.alpha = rate;
  const StabilityScalingInstance inst = to_stability_scaling(factors, c, p, s0);
  const double q = inst.D[0];
  const auto rho = [&](double zi, double zo) {
    return perron(two_level(inside, zi, zo).asDiagonal() * inst.P).value;
  };
  const bool split = std::any_of(inside.begin(), inside.end(), [](bool b) { return b; }) &&
                     !std::all_of(inside.begin(), inside.end(), [](bool b) { return b; });

  struct Candidate {
    double zi = 1, zo = 1;
    double cost = std::numeric_limits<double>::infinity();
    bool ok = false;
  };
  // Largest feasible z_outside for a given z_inside (rho rises with it).
  const auto candidate = [&](double zi) {
    Candidate k;
    if (!split) {
      // One group: the uniform level q / rho(P).
      const double z = std::min(1.0, q / perron(inst.P).value);
      k.zi = k.zo = z;
    } else {
      constexpr double kFloor = 1e-9;
      if (rho(zi, kFloor) > q) return k;
      double lo = kFloor, hi = 1.0;
      if (rho(zi, 1.0) <= q) {
        lo = 1.0;
      } else {
        for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
          const double mid = 0.5 * (lo + hi);
          (rho(zi, mid) <= q ? lo : hi) = mid;
        }
      }
      k.zi = zi;
      k.zo = lo;
    }
    k.ok = order_ok(options.order, k.zi, k.zo);
    k.cost = lockdown_cost(two_level(inside, k.zi, k.zo), c, cost);
    return k;
  };

  int evaluated = 0;
  const auto search = [&](const std::vector<double>& values) {
    std::vector<Candidate> cands(values.size());
    parallel_for(values.size(), options.threads,
                 [&](std::size_t i) { cands[i] = candidate(values[i]); });
    evaluated += static_cast<int>(values.size());
    Candidate best;
    for (const auto& k : cands) {
      if (k.ok && k.cost < best.cost) best = k;
    }
    return best;
  };

  Candidate best = search(split ? grid(options.grid_step) : std::vector<double>{1.0});
  if (!best.ok) throw Error(ErrorCode::kEmptyGrid, "no two-parameter lockdown reaches the rate");
  if (split) {
    const Candidate fine = search(refine(best.zi, options.grid_step, options.refine_step));
    if (fine.ok && fine.cost < best.cost) best = fine;
  }
  TwoParamResult out;
  out.z_inside = best.zi;
  out.z_outside = best.zo;
  out.z = two_level(inside, best.zi, best.zo);
  out.cost = best.cost;
  out.evaluated = evaluated;
  return out;
}

PolicySpec parse_policy(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(':', start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  PolicySpec spec;
  spec.label = text;
  const std::string& head = parts[0];
  const auto bad = [&] { return Error(ErrorCode::kValidation, "bad policy spec '" + text + "'"); };
  try {
    if (head == "ours" && parts.size() == 1) {
      spec.kind = PolicyKind::kOurs;
    } else if (head == "none" && parts.size() == 1) {
      spec.kind = PolicyKind::kNone;
    } else if (head == "uniform" && parts.size() == 1) {
      spec.kind = PolicyKind::kUniform;
    } else if (head == "decay_uniform" && parts.size() == 1) {
      spec.kind = PolicyKind::kDecayUniform;
    } else if (head == "bounded" && parts.size() == 1) {
      spec.kind = PolicyKind::kBounded;
    } else if (head == "random" && (parts.size() == 2 || parts.size() == 3)) {
      spec.kind = PolicyKind::kRandom;
      spec.seed = std::stoull(parts[1]);
      if (parts.size() == 3) spec.width = std::stod(parts[2]);
    } else if (head == "two_param" && (parts.size() == 2 || parts.size() == 3)) {
      spec.kind = PolicyKind::kTwoParam;
      spec.partition = parts[1];
      if (parts.size() == 3) {
        if (parts[2] == "lt") {
          spec.order = TwoParamOrder::kInsideLower;
        } else if (parts[2] == "gt") {
          spec.order = TwoParamOrder::kInsideHigher;
        } else {
          throw bad();
        }
      }
    } else {
      throw bad();
    }
  } catch (const std::logic_error&) {
    throw bad();
  }
  return spec;
}

std::vector<PolicySpec> parse_policies(const std::string& comma_list) {
  std::vector<PolicySpec> out;
  std::size_t start = 0;
  while (start <= comma_list.size()) {
    const auto pos = comma_list.find(',', start);
    const std::string item = comma_list.substr(start, pos - start);
    if (!item.empty()) out.push_back(parse_policy(item));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (out.empty()) throw Error(ErrorCode::kValidation, "no policies given");
  return out;
}

std::vector<PolicyOutcome> compare_policies(const Scenario& scenario, const DiseaseParams& params,
                                            const std::vector<PolicySpec>& policies,
                                            const CompareOptions& options) {
  const FlowFactors factors = build_flow_matrix(scenario.net);
  const Vec& c = scenario.net.cost;
  const Vec& s0 = scenario.state.s;
  const EpidemicState state0 = initial_state_for(scenario, params.family);
  const SolveReport ours = solve(factors, c, params, s0, options.cost);
  const double budget = ours.cost;

  std::vector<PolicyOutcome> out(policies.size());
  for (std::size_t i = 0; i < policies.size(); ++i) {
    const PolicySpec& spec = policies[i];
    PolicyOutcome& o = out[i];
    o.label = spec.label;
    switch (spec.kind) {
      case PolicyKind::kOurs: o.z = ours.z_star; break;
      case PolicyKind::kNone: o.z = Vec::Ones(c.size()); break;
      case PolicyKind::kUniform:
        o.z = Vec::Constant(c.size(), match_cost_uniform(budget, c, options.cost));
        break;
      case PolicyKind::kDecayUniform:
        o.z = Vec::Constant(c.size(), decay_matched_uniform(factors, params, s0));
        break;
      case PolicyKind::kRandom:
        o.z = match_cost_random(budget, c, spec.width, spec.seed, options.cost).z;
        break;
      case PolicyKind::kBounded:
        o.z = match_cost_bounded_decline(budget, factors, c, params, s0, options.cost).z;
        break;
      case PolicyKind::kTwoParam: {
        TwoParamOptions tp;
        tp.inside = group_mask(scenario, spec.partition);
        tp.order = spec.order;
        tp.threads = options.threads;
        o.z = best_two_param_budget(factors, c, params, state0, budget, options.horizon, tp,
                                    options.sim, options.cost)
                  .z;
        break;
      }
    }
  }
  parallel_for(out.size(), options.threads, [&](std::size_t i) {
    PolicyOutcome& o = out[i];
    o.cost = lockdown_cost(o.z, c, options.cost);
    o.lambda = spectral_abscissa(assemble_linearization(factors, o.z, params, s0));
    o.trajectory = simulate(factors, state0, o.z, params, options.horizon, options.sim);
    o.final_active = o.trajectory.active.back();
    o.final_cumulative = o.trajectory.cumulative.back();
  });
  return out;
}

}  // namespace epilock
