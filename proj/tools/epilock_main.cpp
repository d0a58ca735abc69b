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


// epilock command-line front end. Every command writes CSV artifacts and a
// run_meta.json into --out.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "epilock/balancing.hpp"
#include "epilock/constrained.hpp"
#include "epilock/csv.hpp"
#include "epilock/error.hpp"
#include "epilock/ingest.hpp"
#include "epilock/parallel.hpp"
#include "epilock/policies.hpp"
#include "epilock/presets.hpp"
#include "epilock/simulate.hpp"
#include "epilock/spectral.hpp"
#include "epilock/synth.hpp"

namespace fs = std::filesystem;
using namespace epilock;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

struct Args {
  std::string bundle;
  std::string params = "bertozzi";
  std::string model;
  std::string cost = "inverse";
  std::string out = ".";
  double target_growth = kUnset;
  double alpha = kUnset;
  double r = kUnset;
  double days = 500;
  int threads = 1;
  std::uint64_t seed = 1;
  std::vector<std::string> argv;
};

struct Context {
  Scenario scenario;
  FlowFactors factors;
  ParamSet set;
  DiseaseParams& params() { return set.params; }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string out_path(const Args& a, const std::string& name) {
  fs::create_directories(a.out);
  return (fs::path(a.out) / name).string();
}

// Family override, growth override and calibration, in that order.
ParamSet resolve_params(const Args& a, const FlowFactors& factors, const Vec& s0) {
  ParamSet set = load_params(a.params);
  if (!a.model.empty()) {
    const Family f = parse_family(a.model);
    if (f != set.params.family) set.calibrated = false;
    set.params.family = f;
  }
  if (!std::isnan(a.target_growth)) {
    set.target_growth = a.target_growth;
    set.calibrated = false;
  }
  if (!set.calibrated) {
    set.params = calibrate_beta(factors, set.params, s0, set.target_growth);
    set.calibrated = true;
  }
  return set;
}

void apply_decay(const Args& a, DiseaseParams& p, bool required) {
  if (!std::isnan(a.alpha)) {
    p.alpha = a.alpha;
  } else if (!std::isnan(a.r)) {
    p.alpha = r_to_alpha(p, a.r);
  } else if (required && !(p.alpha > 0)) {
    throw Error(ErrorCode::kValidation, "--alpha (or --r) is required");
  }
}

Context load_context(const Args& a, bool need_alpha) {
  if (a.bundle.empty()) throw Error(ErrorCode::kValidation, "--bundle is required");
  Context ctx;
  ctx.scenario = read_bundle(a.bundle);
  ctx.factors = build_flow_matrix(ctx.scenario.net);
  ctx.set = resolve_params(a, ctx.factors, ctx.scenario.state.s);
  apply_decay(a, ctx.params(), need_alpha);
  return ctx;
}

void write_meta(const Args& a, const std::string& command, const ParamSet* set,
                const nlohmann::ordered_json& extra = {}) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["version"] = kVersion;
  j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
               "." + std::to_string(EIGEN_MINOR_VERSION);
  j["argv"] = a.argv;
  j["threads"] = a.threads;
  j["seed"] = a.seed;
  if (set) j["params"] = nlohmann::ordered_json::parse(params_to_json(*set));
  for (const auto& [k, v] : extra.items()) j[k] = v;
  write_text(out_path(a, "run_meta.json"), j.dump(2) + "\n");
}

std::string group_of(const Scenario& sc, Index i) {
  const auto u = static_cast<std::size_t>(i);
  return u < sc.group.size() ? sc.group[u] : "";
}

// ---- commands -------------------------------------------------------------

void cmd_build(const Args& a, const std::string& manifest) {
  const RawCountyTables raw = read_manifest(manifest);
  const Scenario sc = ingest(raw);
  write_bundle(sc, a.out, raw.as_of, raw.constants);
  write_meta(a, "build", nullptr, {{"manifest", manifest}, {"locations", sc.net.size()}});
  std::cout << "wrote bundle " << a.out << " (" << sc.net.size() << " locations)\n";
}

void cmd_calibrate(const Args& a) {
  Context ctx = load_context(a, false);
  const std::string json = params_to_json(ctx.set);
  write_text(out_path(a, "params.json"), json);
  write_meta(a, "calibrate", &ctx.set,
             {{"achieved_growth", initial_growth(ctx.factors, ctx.params(), ctx.scenario.state.s)}});
  std::cout << json;
}

void write_solve(const Args& a, const Context& ctx, const SolveReport& rep) {
  const Scenario& sc = ctx.scenario;
  CsvWriter w(out_path(a, "solve.csv"));
  w.row({"location_id", "group", "cost_weight", "z_star"});
  for (Index i = 0; i < sc.net.size(); ++i) {
    w.row({sc.net.ids[static_cast<std::size_t>(i)], group_of(sc, i), fmt12(sc.net.cost[i]),
           fmt12(rep.z_star[i])});
  }
  w.commit();
  CsvWriter s(out_path(a, "solve_summary.csv"));
  s.row({"key", "value"});
  s.row({"method", to_string(rep.method)});
  s.row({"dispatch_case", std::string(1, rep.dispatch_case)});
  s.row({"cost_kind", to_string(rep.cost_kind)});
  s.row({"cost", fmt12(rep.cost)});
  s.row({"alpha", fmt12(ctx.set.params.alpha)});
  s.row({"lambda_reduced", fmt12(rep.lambda_reduced)});
  s.row({"lambda_achieved", fmt12(rep.lambda_achieved)});
  s.row({"high_spread_holds", rep.high_spread_holds ? "1" : "0"});
  s.row({"unconstrained_exceeds_one", rep.unconstrained_exceeds_one ? "1" : "0"});
  s.row({"nonconvex_objective", rep.nonconvex_objective ? "1" : "0"});
  s.row({"iterations", std::to_string(rep.iterations)});
  s.row({"imbalance", fmt12(rep.imbalance)});
  s.row({"zero_gradient", fmt12(rep.zero_gradient)});
  s.row({"d_ratio", fmt12(rep.d_ratio)});
  s.row({"kkt_residual", fmt12(rep.kkt_residual)});
  s.commit();
}

void cmd_solve(const Args& a) {
  Context ctx = load_context(a, true);
  const CostSpec cost = parse_cost(a.cost);
  SolveReport rep;
  try {
    rep = solve(ctx.factors, ctx.scenario.net.cost, ctx.params(), ctx.scenario.state.s, cost);
  } catch (const Error& e) {
    // Leave the best iterate behind as a partial artifact.
    if (e.best().size() == ctx.scenario.net.size()) {
      CsvWriter w(out_path(a, "solve.csv"));
      w.row({"location_id", "group", "cost_weight", "z_star"});
      for (Index i = 0; i < e.best().size(); ++i) {
        w.row({ctx.scenario.net.ids[static_cast<std::size_t>(i)], group_of(ctx.scenario, i),
               fmt12(ctx.scenario.net.cost[i]), fmt12(e.best()[i])});
      }
    }
    throw;
  }
  write_solve(a, ctx, rep);
  write_meta(a, "solve", &ctx.set, {{"cost", to_string(cost)}});
  std::cout << "method " << to_string(rep.method) << " case " << rep.dispatch_case << " cost "
            << fmt12(rep.cost) << " lambda " << fmt12(rep.lambda_achieved) << "\nz*";
  for (Index i = 0; i < rep.z_star.size(); ++i) std::cout << ' ' << fmt12(rep.z_star[i]);
  std::cout << '\n';
}

CompareOptions compare_options(const Args& a) {
  CompareOptions opt;
  opt.horizon = a.days;
  opt.cost = parse_cost(a.cost);
  opt.threads = a.threads;
  return opt;
}

void cmd_simulate(const Args& a, const std::string& policy) {
  const PolicySpec spec = parse_policy(policy);
  Context ctx = load_context(a, spec.kind != PolicyKind::kNone);
  if (spec.kind == PolicyKind::kNone && !(ctx.params().alpha > 0)) {
    // No decay target is needed to leave every location open.
    const Trajectory traj = simulate(ctx.factors, initial_state_for(ctx.scenario, ctx.params().family),
                                     Vec::Ones(ctx.scenario.net.size()), ctx.params(), a.days);
    write_trajectory_csv(out_path(a, "trajectory.csv"), traj, ctx.scenario.net.ids,
                         ctx.scenario.net.population);
    write_aggregate_csv(out_path(a, "aggregate.csv"), traj);
  } else {
    const auto out = compare_policies(ctx.scenario, ctx.params(), {spec}, compare_options(a));
    write_trajectory_csv(out_path(a, "trajectory.csv"), out[0].trajectory, ctx.scenario.net.ids,
                         ctx.scenario.net.population);
    write_aggregate_csv(out_path(a, "aggregate.csv"), out[0].trajectory);
  }
  write_meta(a, "simulate", &ctx.set, {{"policy", policy}, {"days", a.days}});
  std::cout << "wrote " << out_path(a, "trajectory.csv") << '\n';
}

void cmd_compare(const Args& a, const std::string& policies) {
  Context ctx = load_context(a, true);
  const auto specs = parse_policies(policies);
  const CompareOptions opt = compare_options(a);
  const auto out = compare_policies(ctx.scenario, ctx.params(), specs, opt);

  CsvWriter t(out_path(a, "compare.csv"));
  t.row({"policy", "cost", "lambda", "final_active_persons", "final_cumulative_persons"});
  for (const auto& o : out) {
    t.row({o.label, fmt12(o.cost), fmt12(o.lambda), fmt12(o.final_active), fmt12(o.final_cumulative)});
  }
  t.commit();
  CsvWriter z(out_path(a, "compare_z.csv"));
  z.row({"policy", "location_id", "group", "z"});
  for (const auto& o : out) {
    for (Index i = 0; i < o.z.size(); ++i) {
      z.row({o.label, ctx.scenario.net.ids[static_cast<std::size_t>(i)], group_of(ctx.scenario, i),
             fmt12(o.z[i])});
    }
  }
  z.commit();
  CsvWriter c(out_path(a, "compare_curves.csv"));
  c.row({"policy", "t", "active_persons", "cumulative_persons", "reported_cumulative_persons"});
  for (const auto& o : out) {
    const Trajectory& tr = o.trajectory;
    for (std::size_t k = 0; k < tr.samples.size(); ++k) {
      c.row({o.label, fmt12(tr.samples[k].t), fmt12(tr.active[k]), fmt12(tr.cumulative[k]),
             fmt12(0.14 * tr.cumulative[k])});
    }
  }
  c.commit();
  nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
  for (const auto& s : specs) {
    if (s.kind == PolicyKind::kRandom) seeds.push_back(s.seed);
  }
  write_meta(a, "compare", &ctx.set, {{"policies", policies}, {"days", a.days}, {"policy_seeds", seeds}});
  for (const auto& o : out) {
    std::cout << o.label << " cost " << fmt12(o.cost) << " final_cumulative "
              << fmt12(o.final_cumulative) << '\n';
  }
}

struct SweepRange {
  double lo;
  double hi;
  int steps;
};

SweepRange parse_range(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 3) throw Error(ErrorCode::kValidation, "--range must be a:b:steps");
  try {
    SweepRange r{std::stod(parts[0]), std::stod(parts[1]), std::stoi(parts[2])};
    if (r.steps < 1) throw Error(ErrorCode::kValidation, "--range steps must be >= 1");
    return r;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kValidation, "--range: cannot parse '" + text + "'");
  }
}

// Sets one parameter; returns true when transmission must be recalibrated.
bool set_param(ParamSet& set, const std::string& name, double v) {
  DiseaseParams& p = set.params;
  if (name == "alpha") { p.alpha = v; return false; }
  if (name == "r") { p.alpha = r_to_alpha(p, v); return false; }
  if (name == "target_growth") { set.target_growth = v; return true; }
  if (name == "gamma") { p.gamma = v; return true; }
  if (name == "r_a") { p.r_a = v; return true; }
  if (name == "r_s") { p.r_s = v; return true; }
  if (name == "epsilon") { p.epsilon = v; return true; }
  if (name == "alpha_hat") { p.alpha_hat = v; return true; }
  throw Error(ErrorCode::kValidation,
              "--vary: unknown parameter '" + name +
                  "' (alpha, r, target_growth, gamma, r_a, r_s, epsilon, alpha_hat)");
}

void cmd_sweep(const Args& a, const std::string& vary, const std::string& range_text) {
  Context ctx = load_context(a, false);
  const SweepRange range = parse_range(range_text);
  const CostSpec cost = parse_cost(a.cost);
  const Vec& s0 = ctx.scenario.state.s;
  std::vector<double> values;
  for (int k = 0; k < range.steps; ++k) {
    values.push_back(range.steps == 1 ? range.lo
                                      : range.lo + (range.hi - range.lo) * k / (range.steps - 1));
  }
  std::vector<SolveReport> reports(values.size());
  std::vector<std::optional<Error>> errors(values.size());
  parallel_for(values.size(), a.threads, [&](std::size_t k) {
    try {
      ParamSet set = ctx.set;
      if (set_param(set, vary, values[k])) {
        set.params = calibrate_beta(ctx.factors, set.params, s0, set.target_growth);
      }
      reports[k] = solve(ctx.factors, ctx.scenario.net.cost, set.params, s0, cost);
    } catch (const Error& e) {
      errors[k] = e;
    }
  });
  CsvWriter z(out_path(a, "sweep.csv"));
  CsvWriter s(out_path(a, "sweep_summary.csv"));
  z.row({"value", "location_id", "group", "z_star"});
  s.row({"value", "method", "dispatch_case", "cost", "lambda_achieved", "mean_z"});
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (errors[k]) throw *errors[k];  // rows so far stay in the .partial files
    const SolveReport& rep = reports[k];
    for (Index i = 0; i < rep.z_star.size(); ++i) {
      z.row({fmt12(values[k]), ctx.scenario.net.ids[static_cast<std::size_t>(i)],
             group_of(ctx.scenario, i), fmt12(rep.z_star[i])});
    }
    s.row({fmt12(values[k]), to_string(rep.method), std::string(1, rep.dispatch_case),
           fmt12(rep.cost), fmt12(rep.lambda_achieved), fmt12(rep.z_star.mean())});
  }
  z.commit();
  s.commit();
  write_meta(a, "sweep", &ctx.set, {{"vary", vary}, {"range", range_text}});
  std::cout << "wrote " << values.size() << " sweep points\n";
}

void cmd_synth(const Args& a, const std::string& config_path) {
  const SynthConfig cfg = parse_synth_config(slurp(config_path));
  const SynthResult res = generate(cfg);
  write_bundle(res.scenario, a.out);
  if (res.adjacency.size()) {
    CsvWriter w(out_path(a, "adjacency.csv"));
    w.row({"origin_id", "dest_id"});
    const auto& ids = res.scenario.net.ids;
    for (Index i = 0; i < res.adjacency.rows(); ++i) {
      for (Index j = 0; j < res.adjacency.cols(); ++j) {
        if (res.adjacency(i, j) != 0) {
          w.row({ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]});
        }
      }
    }
    w.commit();
  }
  write_meta(a, "synth", nullptr, {{"config", config_path}, {"config_seed", cfg.seed}});
  std::cout << "wrote bundle " << a.out << " (" << res.scenario.net.size() << " locations)\n";
}

struct PerturbKind {
  std::string name;
  double value;
};

PerturbKind parse_kind(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::kValidation, "--kind must be noise:T, dropout:P, density:H, activity:K or permute:FIELD");
  }
  PerturbKind k{text.substr(0, colon), 0.0};
  const std::string arg = text.substr(colon + 1);
  if (k.name == "permute") {
    parse_permute_field(arg);
    return k;
  }
  try {
    k.value = std::stod(arg);
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kValidation, "--kind: cannot parse '" + arg + "'");
  }
  if (k.name != "noise" && k.name != "dropout" && k.name != "density" && k.name != "activity") {
    throw Error(ErrorCode::kValidation, "--kind: unknown perturbation '" + k.name + "'");
  }
  return k;
}

void cmd_perturb(const Args& a, const std::string& kind_text, int repeats, const std::string& group) {
  Context ctx = load_context(a, true);
  const PerturbKind kind = parse_kind(kind_text);
  const Scenario& sc = ctx.scenario;
  const Vec& s0 = sc.state.s;
  const std::vector<bool> inside = group_mask(sc, group);
  const CostSpec cost = parse_cost(a.cost);

  if (kind.name == "permute") {
    const std::string field = kind_text.substr(kind_text.find(':') + 1);
    const PermutationStudy st = random_permutation_study(
        sc, parse_permute_field(field), repeats, a.seed, ctx.params(), ctx.set.target_growth, a.threads);
    CsvWriter w(out_path(a, "perturb.csv"));
    w.row({"repeat", "emd", "mean_z"});
    for (std::size_t k = 0; k < st.z.size(); ++k) {
      w.row({std::to_string(k), fmt12(st.emd[k]), fmt12(st.z[k].mean())});
    }
    w.commit();
    CsvWriter h(out_path(a, "perturb_histogram.csv"));
    h.row({"bin_lo", "bin_hi", "baseline_count", "mean_count"});
    for (Index b = 0; b < 20; ++b) {
      h.row({fmt12(b / 20.0), fmt12((b + 1) / 20.0), fmt12(st.baseline_histogram[b]),
             fmt12(st.histogram[b])});
    }
    h.commit();
    write_meta(a, "perturb", &ctx.set, {{"kind", kind_text}, {"repeats", repeats}, {"mean_emd", st.mean_emd}});
    std::cout << "mean emd " << fmt12(st.mean_emd) << '\n';
    return;
  }

  const bool deterministic = kind.name == "density" || kind.name == "activity";
  const int runs = deterministic ? 1 : repeats;
  std::vector<Vec> z(static_cast<std::size_t>(runs));
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(runs));
  parallel_for(z.size(), a.threads, [&](std::size_t k) {
    seeds[k] = derive_seed(a.seed, k);
    FlowFactors f = ctx.factors;
    DiseaseParams p = ctx.params();
    if (kind.name == "noise" || kind.name == "dropout") {
      const NetworkData net = kind.name == "noise" ? perturb_noise(sc.net, kind.value, seeds[k])
                                                   : perturb_dropout(sc.net, kind.value, seeds[k]);
      f = build_flow_matrix(net);
      p = calibrate_beta(f, p, s0, ctx.set.target_growth);
    } else if (kind.name == "density") {
      if (sc.density.size() != sc.net.size()) {
        throw Error(ErrorCode::kValidation, "density perturbation needs a density column in the bundle");
      }
      p = density_scaled_beta(f, p, s0, sc.density, kind.value, ctx.set.target_growth);
    } else {
      p = symptomatic_activity_scaling(f, p, s0, kind.value, ctx.set.target_growth);
    }
    z[k] = solve(f, sc.net.cost, p, s0, cost).z_star;
  });

  CsvWriter w(out_path(a, "perturb.csv"));
  w.row({"repeat", "seed", "location_id", "group", "z_star"});
  CsvWriter s(out_path(a, "perturb_summary.csv"));
  s.row({"repeat", "seed", "mean_z_group", "mean_z_rest", "group_exceeds_rest"});
  for (std::size_t k = 0; k < z.size(); ++k) {
    double in = 0, out = 0;
    int nin = 0, nout = 0;
    for (Index i = 0; i < z[k].size(); ++i) {
      w.row({std::to_string(k), std::to_string(seeds[k]), sc.net.ids[static_cast<std::size_t>(i)],
             group_of(sc, i), fmt12(z[k][i])});
      if (inside[static_cast<std::size_t>(i)]) {
        in += z[k][i];
        ++nin;
      } else {
        out += z[k][i];
        ++nout;
      }
    }
    in /= nin;
    out = nout ? out / nout : 0.0;
    s.row({std::to_string(k), std::to_string(seeds[k]), fmt12(in), fmt12(out), in > out ? "1" : "0"});
  }
  w.commit();
  s.commit();
  write_meta(a, "perturb", &ctx.set, {{"kind", kind_text}, {"repeats", runs}, {"group", group}});
  std::cout << "wrote " << runs << " perturbed solves\n";
}

void cmd_r0(const Args& a) {
  ParamSet set;
  std::optional<Context> ctx;
  if (!a.bundle.empty()) {
    ctx = load_context(a, false);
    set = ctx->set;
  } else {
    set = load_params(a.params);
    if (!a.model.empty()) set.params.family = parse_family(a.model);
    if (!set.calibrated && set.params.family == Family::kCOVID) {
      // r depends on the transmission rates only through their ratio.
      set.params.beta_s = 1.0;
      set.params.beta_a = set.params.alpha_hat;
    }
    apply_decay(a, set.params, false);
  }
  DiseaseParams& p = set.params;
  if (std::isnan(a.alpha) && std::isnan(a.r)) p.alpha = 0.0;
  const double r = alpha_to_r(p);
  CsvWriter w(out_path(a, "r0.csv"));
  std::vector<std::string> header{"alpha", "r"};
  std::vector<std::string> row{fmt12(p.alpha), fmt12(r)};
  if (ctx) {
    const Vec& s0 = ctx->scenario.state.s;
    const double r_open = reproduction_number(ctx->factors, Vec::Ones(s0.size()), p, s0);
    header.insert(header.end(), {"reproduction_number_open", "reproduction_number_optimal"});
    row.push_back(fmt12(r_open));
    if (p.alpha > 0) {
      const Vec z = solve(ctx->factors, ctx->scenario.net.cost, p, s0).z_star;
      row.push_back(fmt12(reproduction_number(ctx->factors, z, p, s0)));
    } else {
      row.push_back(fmt12(r_open > 1 ? 1.0 : r_open));
    }
  }
  w.row(header);
  w.row(row);
  w.commit();
  write_meta(a, "r0", &set);
  std::cout << "alpha " << fmt12(p.alpha) << " r " << fmt12(r) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimum-cost stabilizing lockdowns on mobility networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Args a;
  a.threads = default_threads();
  for (int i = 0; i < argc; ++i) a.argv.emplace_back(argv[i]);

  auto common = [&](CLI::App* sub, bool bundle) {
    if (bundle) sub->add_option("--bundle", a.bundle, "canonical bundle directory")->required();
    sub->add_option("--params", a.params, "preset name or JSON file")->capture_default_str();
    sub->add_option("--model", a.model, "sis, sir or covid");
    sub->add_option("--target-growth", a.target_growth, "initial growth rate to calibrate to");
    sub->add_option("--out", a.out, "output directory")->capture_default_str();
    sub->add_option("--threads", a.threads, "worker threads (default EPILOCK_THREADS)");
  };
  auto decay = [&](CLI::App* sub) {
    auto* opt_alpha = sub->add_option("--alpha", a.alpha, "required decay rate");
    sub->add_option("--r", a.r, "decay as the reproduction-number ratio r in (0, 1]")->excludes(opt_alpha);
  };

  std::string manifest, policy = "ours", policies = "ours,none,uniform,random:1,bounded",
                        vary, range, config, kind, group = "city";
  int repeats = 50;

  auto* build = app.add_subcommand("build", "ingest raw county tables into a bundle");
  build->add_option("--manifest", manifest)->required();
  build->add_option("--out", a.out)->required();

  auto* calibrate = app.add_subcommand("calibrate", "calibrate transmission to a growth rate");
  common(calibrate, true);

  auto* solve_cmd = app.add_subcommand("solve", "minimum-cost stabilizing lockdown");
  common(solve_cmd, true);
  decay(solve_cmd);
  solve_cmd->add_option("--cost", a.cost, "inverse, power:k or capped:C")->capture_default_str();

  auto* simulate_cmd = app.add_subcommand("simulate", "simulate one policy");
  common(simulate_cmd, true);
  decay(simulate_cmd);
  simulate_cmd->add_option("--policy", policy)->capture_default_str();
  simulate_cmd->add_option("--days", a.days)->capture_default_str();
  simulate_cmd->add_option("--cost", a.cost)->capture_default_str();

  auto* compare = app.add_subcommand("compare", "cost-matched policy comparison");
  common(compare, true);
  decay(compare);
  compare->add_option("--policies", policies)->capture_default_str();
  compare->add_option("--days", a.days)->capture_default_str();
  compare->add_option("--cost", a.cost)->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "parameter sensitivity sweep");
  common(sweep, true);
  decay(sweep);
  sweep->add_option("--vary", vary)->required();
  sweep->add_option("--range", range, "a:b:steps")->required();
  sweep->add_option("--cost", a.cost)->capture_default_str();

  auto* synth = app.add_subcommand("synth", "generate a synthetic bundle");
  synth->add_option("--config", config)->required();
  synth->add_option("--out", a.out)->required();

  auto* perturb = app.add_subcommand("perturb", "robustness study");
  common(perturb, true);
  decay(perturb);
  perturb->add_option("--kind", kind, "noise:T, dropout:P, density:H, activity:K, permute:FIELD")->required();
  perturb->add_option("--repeats", repeats)->capture_default_str();
  perturb->add_option("--seed", a.seed)->capture_default_str();
  perturb->add_option("--group", group)->capture_default_str();
  perturb->add_option("--cost", a.cost)->capture_default_str();

  auto* r0 = app.add_subcommand("r0", "reproduction number and alpha/r conversion");
  common(r0, false);
  r0->add_option("--bundle", a.bundle);
  decay(r0);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (a.threads < 1) a.threads = 1;

  try {
    if (*build) cmd_build(a, manifest);
    else if (*calibrate) cmd_calibrate(a);
    else if (*solve_cmd) cmd_solve(a);
    else if (*simulate_cmd) cmd_simulate(a, policy);
    else if (*compare) cmd_compare(a, policies);
    else if (*sweep) cmd_sweep(a, vary, range);
    else if (*synth) cmd_synth(a, config);
    else if (*perturb) cmd_perturb(a, kind, repeats, group);
    else if (*r0) cmd_r0(a);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return e.numerical() ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
