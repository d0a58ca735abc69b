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


#include "epilock/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "epilock/error.hpp"
#include "epilock/parallel.hpp"
#include "epilock/spectral.hpp"

namespace epilock {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::size_t Rng::index(std::size_t count) {
  return std::min(count - 1, static_cast<std::size_t>(uniform() * static_cast<double>(count)));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

GraphKind parse_graph_kind(const std::string& name) {
  if (name == "geometric") return GraphKind::kGeometric;
  if (name == "barabasi_albert") return GraphKind::kBarabasiAlbert;
  if (name == "custom_prob") return GraphKind::kCustomProb;
  if (name == "city_suburb") return GraphKind::kCitySuburb;
  if (name == "fig1_three_node") return GraphKind::kFig1;
  throw Error(ErrorCode::kValidation, "unknown graph kind '" + name + "'");
}

namespace {

using nlohmann::json;

Range read_range(const json& j, const char* key, Range fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (v.is_number()) return {v.get<double>(), v.get<double>()};
  if (v.is_array() && v.size() == 2) return {v[0].get<double>(), v[1].get<double>()};
  throw Error(ErrorCode::kValidation, std::string("config field '") + key +
                                          "' must be a number or [lo, hi]");
}

bool connected(const Mat& adj) {
  const Index n = adj.rows();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<Index> stack{0};
  seen[0] = true;
  Index count = 1;
  while (!stack.empty()) {
    const Index v = stack.back();
    stack.pop_back();
    for (Index w = 0; w < n; ++w) {
      if (adj(v, w) != 0 && !seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = true;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == n;
}

Mat geometric(int n, double mean_degree, Rng& rng) {
  std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    x[static_cast<std::size_t>(i)] = rng.uniform();
    y[static_cast<std::size_t>(i)] = rng.uniform();
  }
  // Expected degree (n - 1) pi r^2, ignoring boundary effects.
  const double r = std::sqrt(mean_degree / (M_PI * std::max(1, n - 1)));
  Mat adj = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double dx = x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)];
      const double dy = y[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(j)];
      if (dx * dx + dy * dy <= r * r) adj(i, j) = adj(j, i) = 1;
    }
  }
  return adj;
}

Mat barabasi_albert(int n, int m, Rng& rng) {
  if (m < 1 || m >= n) throw Error(ErrorCode::kValidation, "Barabasi-Albert needs 1 <= m < n");
  Mat adj = Mat::Zero(n, n);
  std::vector<int> ends;  // each node once per incident edge
  for (int i = 0; i <= m; ++i) {
    for (int j = i + 1; j <= m; ++j) {
      adj(i, j) = adj(j, i) = 1;
      ends.push_back(i);
      ends.push_back(j);
    }
  }
  for (int v = m + 1; v < n; ++v) {
    std::vector<int> targets;
    while (static_cast<int>(targets.size()) < m) {
      const int t = ends[rng.index(ends.size())];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (int t : targets) {
      adj(v, t) = adj(t, v) = 1;
      ends.push_back(v);
      ends.push_back(t);
    }
  }
  return adj;
}

Mat custom_prob(const std::vector<double>& p, Rng& rng) {
  const int n = static_cast<int>(p.size());
  Mat adj = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.uniform() < p[static_cast<std::size_t>(i)]) adj(i, j) = adj(j, i) = 1;
    }
  }
  return adj;
}

Mat tau_from_adjacency(const Mat& adj, const Vec& home_stay) {
  const Index n = adj.rows();
  Mat tau = Mat::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const double deg = adj.row(i).sum() - adj(i, i);
    for (Index j = 0; j < n; ++j) {
      if (i != j && adj(i, j) != 0) tau(i, j) = 0.8 * (1.0 - home_stay[i]) * adj(i, j) / deg;
    }
    tau(i, i) = 0.2 * home_stay[i];
  }
  return tau;
}

Mat tau_from_trips(const Mat& k, const Vec& home_dwell) {
  Mat tau(k.rows(), k.cols());
  for (Index i = 0; i < k.rows(); ++i) {
    tau.row(i) = (1.0 - home_dwell[i] / kMinutesPerDay) * k.row(i) / k.row(i).sum();
  }
  return tau;
}

// Active infections are `active_share` of 1 - s0, split 86/14 between
// asymptomatic and symptomatic; the rest of 1 - s0 has recovered.
EpidemicState split_state(const Vec& s0, double active_share) {
  EpidemicState st;
  const Vec infected = Vec::Ones(s0.size()) - s0;
  st.s = s0;
  st.x_a = 0.86 * active_share * infected;
  st.x_s = 0.14 * active_share * infected;
  st.r = infected - st.x_a - st.x_s;
  st.cum = infected;
  return st;
}

Vec draw(Range r, int n, Rng& rng) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = r.lo == r.hi ? r.lo : rng.uniform(r.lo, r.hi);
  return v;
}

NetworkData with_tau(const NetworkData& net, Mat tau) {
  return make_network(net.ids, net.population, net.employment, std::move(tau), net.home_dwell);
}

void rescale_rows(Mat& tau, const Vec& sums, const std::vector<std::string>& ids) {
  for (Index i = 0; i < tau.rows(); ++i) {
    const double s = tau.row(i).sum();
    if (!(s > 0)) {
      throw Error(ErrorCode::kRowCollapse, "travel row of location " +
                                               ids[static_cast<std::size_t>(i)] +
                                               " collapsed to zero");
    }
    tau.row(i) *= sums[i] / s;
  }
}

}  // namespace

SynthConfig parse_synth_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("synth config is not valid JSON: ") + e.what());
  }
  SynthConfig c;
  try {
    c.kind = parse_graph_kind(j.value("graph", std::string("geometric")));
    c.n = j.value("n", c.n);
    c.seed = j.value("seed", c.seed);
    c.mean_degree = j.value("mean_degree", c.mean_degree);
    c.ba_m = j.value("ba_m", c.ba_m);
    if (j.contains("edge_prob")) c.edge_prob = j.at("edge_prob").get<std::vector<double>>();
    c.population = read_range(j, "population", c.population);
    c.home_stay = read_range(j, "home_stay", c.home_stay);
    c.s0 = read_range(j, "s0", c.s0);
    if (j.contains("hotspots")) {
      const json& h = j.at("hotspots");
      c.hotspots = h.value("count", 0);
      c.hotspot_prob = h.value("prob", c.hotspot_prob);
    }
    c.city_case = j.value("case", c.city_case);
    c.active_share = j.value("active_share", c.active_share);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("synth config: ") + e.what());
  }
  return c;
}

Scenario city_suburb(int case_number) {
  Vec N(2), s0(2);
  switch (case_number) {
    case 1: N << 20000, 2000; s0 << 0.7, 0.95; break;
    case 2: N << 200000, 2000; s0 << 0.7, 0.95; break;
    case 3: N << 200000, 2000; s0 << 0.95, 0.95; break;
    default: throw Error(ErrorCode::kValidation, "city-suburb case must be 1, 2 or 3");
  }
  Mat k(2, 2);
  k << 8000, 200, 20, 850;
  const Vec h = Vec::Constant(2, 800.0);
  Scenario sc;
  sc.name = "city_suburb_case" + std::to_string(case_number);
  sc.net = make_network({"city", "suburb"}, N, N, tau_from_trips(k, h), h);
  sc.state = split_state(s0, 0.1);
  sc.group = {"city", "suburb"};
  return sc;
}

Scenario fig1_network() {
  Mat k(3, 3);
  k << 8000, 1000, 2000, 2000, 8500, 0, 1500, 0, 8000;
  const Vec h = Vec::Constant(3, 800.0);
  Vec N(3);
  N << 200000, 2000, 4000;
  Scenario sc;
  sc.name = "fig1";
  sc.net = make_network({"A", "B", "C"}, N, N, tau_from_trips(k, h), h);
  sc.state.s = (Vec(3) << 0.90, 0.92, 0.95).finished();
  sc.state.x_a = (Vec(3) << 0.0825, 0.0660, 0.0412).finished();
  sc.state.x_s = (Vec(3) << 0.0134, 0.0107, 0.0067).finished();
  sc.state.r = (Vec(3) << 0.0041, 0.0033, 0.0021).finished();
  sc.state.cum = Vec::Ones(3) - sc.state.s;
  sc.group = {"city", "suburb", "suburb"};
  return sc;
}

SynthResult generate(const SynthConfig& config) {
  if (config.kind == GraphKind::kCitySuburb) return {city_suburb(config.city_case), Mat()};
  if (config.kind == GraphKind::kFig1) return {fig1_network(), Mat()};

  int n = config.n;
  if (config.kind == GraphKind::kCustomProb) n = static_cast<int>(config.edge_prob.size());
  if (n < 2) throw Error(ErrorCode::kValidation, "synthetic networks need n >= 2");
  if (config.hotspots < 0 || config.hotspots > n) {
    throw Error(ErrorCode::kValidation, "hotspot count outside [0, n]");
  }
  for (int attempt = 0; attempt < 100; ++attempt) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(attempt)));
    Mat adj;
    switch (config.kind) {
      case GraphKind::kGeometric: adj = geometric(n, config.mean_degree, rng); break;
      case GraphKind::kBarabasiAlbert: adj = barabasi_albert(n, config.ba_m, rng); break;
      default: adj = custom_prob(config.edge_prob, rng); break;
    }
    std::vector<std::string> group(static_cast<std::size_t>(n));
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (int h = 0; h < config.hotspots; ++h) {
      const std::size_t pick = static_cast<std::size_t>(h) + rng.index(order.size() - static_cast<std::size_t>(h));
      std::swap(order[static_cast<std::size_t>(h)], order[pick]);
      const int v = order[static_cast<std::size_t>(h)];
      group[static_cast<std::size_t>(v)] = "hotspot";
      for (int w = 0; w < n; ++w) {
        if (w != v && rng.uniform() < config.hotspot_prob) adj(v, w) = adj(w, v) = 1;
      }
    }
    if (!connected(adj)) continue;

    const Vec N = draw(config.population, n, rng);
    const Vec hs = draw(config.home_stay, n, rng);
    const Vec s0 = draw(config.s0, n, rng);
    const Mat tau = tau_from_adjacency(adj, hs);
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) ids.push_back("n" + std::to_string(i));
    SynthResult out;
    out.scenario.name = "synthetic";
    out.scenario.net = make_network(ids, N, N, tau, home_dwell_from_tau(tau));
    out.scenario.state = split_state(s0, config.active_share);
    out.scenario.group = std::move(group);
    out.adjacency = std::move(adj);
    return out;
  }
  throw Error(ErrorCode::kValidation, "generated graph stayed disconnected after 100 attempts");
}

NetworkData perturb_noise(const NetworkData& net, double theta, std::uint64_t seed) {
  if (!(theta >= 0)) throw Error(ErrorCode::kValidation, "theta must be nonnegative");
  if (theta == 0) return net;
  const Mat& tau = net.travel.tau;
  const Vec sums = tau.rowwise().sum();
  Rng rng(seed);
  const double sd = std::sqrt(theta);
  Mat out = tau;
  for (Index i = 0; i < tau.rows(); ++i) {
    for (Index j = 0; j < tau.cols(); ++j) {
      if (tau(i, j) == 0) continue;  // zero variance
      out(i, j) = std::max(tau(i, j) + sd * tau(i, j) * rng.normal(), 0.0);
    }
  }
  rescale_rows(out, sums, net.ids);
  return with_tau(net, std::move(out));
}

NetworkData perturb_dropout(const NetworkData& net, double p, std::uint64_t seed) {
  if (!(p >= 0 && p < 1)) throw Error(ErrorCode::kValidation, "dropout p must lie in [0, 1)");
  if (p == 0) return net;
  const Mat& tau = net.travel.tau;
  const Vec sums = tau.rowwise().sum();
  Rng rng(seed);
  Mat out = tau;
  for (Index i = 0; i < tau.rows(); ++i) {
    std::vector<Index> nz;
    for (Index j = 0; j < tau.cols(); ++j) {
      if (j != i && tau(i, j) != 0) nz.push_back(j);
    }
    const auto drop = static_cast<std::size_t>(std::floor(p * static_cast<double>(nz.size())));
    for (std::size_t k = 0; k < drop; ++k) {
      const std::size_t pick = k + rng.index(nz.size() - k);
      std::swap(nz[k], nz[pick]);
      out(i, nz[k]) = 0.0;
    }
  }
  rescale_rows(out, sums, net.ids);
  return with_tau(net, std::move(out));
}

DiseaseParams density_scaled_beta(const FlowFactors& factors, DiseaseParams params,
                                  const Vec& s0, const Vec& density, double h,
                                  double target_growth) {
  if (density.size() != factors.n() || (density.array() <= 0).any()) {
    throw Error(ErrorCode::kValidation, "densities must be positive, one per location");
  }
  if (!(h >= 0)) throw Error(ErrorCode::kValidation, "density exponent must be nonnegative");
  params.beta_scale = (density / density.maxCoeff()).array().pow(h).matrix();
  return calibrate_beta(factors, params, s0, target_growth);
}

DiseaseParams symptomatic_activity_scaling(const FlowFactors& factors, DiseaseParams params,
                                           const Vec& s0, double kappa, double target_growth) {
  if (!(kappa > 0 && kappa <= 1)) {
    throw Error(ErrorCode::kValidation,
                "kappa must lie in (0, 1]; immobile symptomatics are the SIR family");
  }
  if (params.family != Family::kCOVID) {
    throw Error(ErrorCode::kValidation, "symptomatic activity applies to the COVID family");
  }
  params.alpha_hat /= kappa;
  return calibrate_beta(factors, params, s0, target_growth);
}

PermuteField parse_permute_field(const std::string& name) {
  if (name == "degree") return PermuteField::kDegree;
  if (name == "home_stay") return PermuteField::kHomeStay;
  if (name == "population") return PermuteField::kPopulation;
  if (name == "employment") return PermuteField::kEmployment;
  if (name == "s0") return PermuteField::kS0;
  throw Error(ErrorCode::kValidation, "unknown permutation field '" + name + "'");
}

Scenario permute_field(const Scenario& scenario, PermuteField field,
                       const std::vector<Index>& perm) {
  const NetworkData& net = scenario.net;
  const Index n = net.size();
  auto apply = [&](const Vec& v) {
    Vec out(n);
    for (Index i = 0; i < n; ++i) out[i] = v[perm[static_cast<std::size_t>(i)]];
    return out;
  };
  Scenario out = scenario;
  Mat tau = net.travel.tau;
  Vec home = net.home_dwell;
  Vec pop = net.population;
  Vec emp = net.employment;
  switch (field) {
    case PermuteField::kDegree: {
      // Location i takes the travel pattern of perm[i], keeping its own
      // diagonal and row sum.
      const Vec sums = tau.rowwise().sum();
      Mat moved(n, n);
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
          moved(i, j) = tau(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
        }
      }
      for (Index i = 0; i < n; ++i) {
        const double off = moved.row(i).sum() - moved(i, i);
        const double want = sums[i] - tau(i, i);
        for (Index j = 0; j < n; ++j) {
          if (j != i) moved(i, j) = off > 0 ? moved(i, j) * want / off : 0.0;
        }
        moved(i, i) = tau(i, i);
      }
      tau = moved;
      break;
    }
    case PermuteField::kHomeStay: {
      home = apply(home);
      for (Index i = 0; i < n; ++i) tau.row(i) *= (1.0 - home[i] / kMinutesPerDay) / tau.row(i).sum();
      break;
    }
    case PermuteField::kPopulation: pop = apply(pop); break;
    case PermuteField::kEmployment: emp = apply(emp); break;
    case PermuteField::kS0: {
      out.state.s = apply(scenario.state.s);
      out.state.x_a = apply(scenario.state.x_a);
      out.state.x_s = apply(scenario.state.x_s);
      out.state.r = apply(scenario.state.r);
      out.state.cum = apply(scenario.state.cum);
      break;
    }
  }
  out.net = make_network(net.ids, pop, emp, tau, home);
  return out;
}

double emd_1d(Vec a, Vec b) {
  if (a.size() != b.size() || a.size() == 0) {
    throw Error(ErrorCode::kValidation, "emd_1d needs equal nonempty samples");
  }
  std::sort(a.data(), a.data() + a.size());
  std::sort(b.data(), b.data() + b.size());
  return (a - b).cwiseAbs().mean();
}

Vec histogram20(const Vec& values) {
  Vec h = Vec::Zero(20);
  for (Index i = 0; i < values.size(); ++i) {
    const int bin = std::clamp(static_cast<int>(values[i] * 20.0), 0, 19);
    h[bin] += 1.0;
  }
  return h;
}

PermutationStudy random_permutation_study(const Scenario& scenario, PermuteField field,
                                          int repeats, std::uint64_t seed,
                                          const DiseaseParams& params, double target_growth,
                                          int threads) {
  if (repeats < 1) throw Error(ErrorCode::kValidation, "repeats must be positive");
  const auto solve_z = [&](const Scenario& sc) {
    const FlowFactors f = build_flow_matrix(sc.net);
    const DiseaseParams p = calibrate_beta(f, params, sc.state.s, target_growth);
    return solve(f, sc.net.cost, p, sc.state.s).z_star;
  };
  PermutationStudy out;
  out.baseline = solve_z(scenario);
  out.baseline_histogram = histogram20(out.baseline);
  out.z.resize(static_cast<std::size_t>(repeats));
  out.emd.resize(static_cast<std::size_t>(repeats));
  const Index n = scenario.net.size();
  parallel_for(static_cast<std::size_t>(repeats), threads, [&](std::size_t k) {
    Rng rng(derive_seed(seed, k));
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
    out.z[k] = solve_z(permute_field(scenario, field, perm));
    out.emd[k] = emd_1d(out.z[k], out.baseline);
  });
  out.histogram = Vec::Zero(20);
  for (const Vec& z : out.z) out.histogram += histogram20(z);
  out.histogram /= repeats;
  out.mean_emd = std::accumulate(out.emd.begin(), out.emd.end(), 0.0) / repeats;
  return out;
}

}  // namespace epilock
