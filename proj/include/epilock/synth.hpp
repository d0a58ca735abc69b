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
#include <random>
#include <string>
#include <vector>

#include "epilock/balancing.hpp"
#include "epilock/model.hpp"

namespace epilock {

/// Seeded source of uniform and normal draws with a platform-independent
/// bit stream (64-bit Mersenne twister, 53-bit mantissas, Box-Muller).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  std::size_t index(std::size_t count);  // uniform in [0, count)

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Stream seed for repeat `k` of a study seeded with `seed` (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k);

enum class GraphKind { kGeometric, kBarabasiAlbert, kCustomProb, kCitySuburb, kFig1 };

GraphKind parse_graph_kind(const std::string& name);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct SynthConfig {
  GraphKind kind = GraphKind::kGeometric;
  int n = 50;
  std::uint64_t seed = 1;
  double mean_degree = 6.0;  // geometric
  int ba_m = 2;              // Barabasi-Albert edges per new node
  std::vector<double> edge_prob;  // custom_prob, one per node
  Range population{4000, 4000};
  Range home_stay{0.8, 0.8};  // fraction h' of the day
  Range s0{0.8, 0.9};
  int hotspots = 0;
  double hotspot_prob = 0.9;
  int city_case = 1;  // city_suburb: 1, 2 or 3
  // Active infections as a share of 1 - s0; the rest has recovered.
  double active_share = 0.1;
};

/// Reads a JSON config; numbers or [lo, hi] pairs for the ranges.
SynthConfig parse_synth_config(const std::string& json_text);

struct SynthResult {
  Scenario scenario;
  Mat adjacency;  // undirected 0/1, empty for the fixed networks
};

/// Builds the network. Graphs use tau_ij = 0.8 (1 - h'_i) A_ij / deg_i off
/// the diagonal and tau_ii = 0.2 h'_i. Disconnected draws are regenerated
/// up to 100 times. Hotspot nodes get group "hotspot".
SynthResult generate(const SynthConfig& config);

/// The two-location network with trip matrix [[8000, 200], [20, 850]].
Scenario city_suburb(int case_number);

/// The three-location example network.
Scenario fig1_network();

/// tau_ij <- max(tau_ij + g_ij, 0), g_ij ~ N(0, theta tau_ij^2); rows rescaled
/// to their original sums.
NetworkData perturb_noise(const NetworkData& net, double theta, std::uint64_t seed);

/// Removes floor(p * k) of the k off-diagonal nonzeros in every row (the
/// diagonal is kept) and rescales the row to its original sum.
NetworkData perturb_dropout(const NetworkData& net, double p, std::uint64_t seed);

/// Transmission proportional to density^h: sets beta_scale = (p / max p)^h
/// and recalibrates to the target growth rate.
DiseaseParams density_scaled_beta(const FlowFactors& factors, DiseaseParams params,
                                  const Vec& s0, const Vec& density, double h,
                                  double target_growth);

/// Symptomatic travellers move at kappa times the asymptomatic rate. This is
/// the same linearization as alpha_hat / kappa with beta_s recalibrated.
DiseaseParams symptomatic_activity_scaling(const FlowFactors& factors, DiseaseParams params,
                                           const Vec& s0, double kappa, double target_growth);

enum class PermuteField { kDegree, kHomeStay, kPopulation, kEmployment, kS0 };

PermuteField parse_permute_field(const std::string& name);

/// Applies a permutation of one field across locations.
Scenario permute_field(const Scenario& scenario, PermuteField field,
                       const std::vector<Index>& perm);

struct PermutationStudy {
  Vec baseline;           // z* on the unpermuted scenario
  std::vector<Vec> z;     // z* per repeat
  std::vector<double> emd;  // Wasserstein-1 distance to the baseline distribution
  Vec histogram;          // mean counts over 20 bins on [0, 1]
  Vec baseline_histogram;
  double mean_emd = 0.0;
};

/// Recalibrates and re-solves for `repeats` random permutations of a field.
PermutationStudy random_permutation_study(const Scenario& scenario, PermuteField field,
                                          int repeats, std::uint64_t seed,
                                          const DiseaseParams& params, double target_growth,
                                          int threads = 1);

/// Wasserstein-1 distance between two equal-size empirical samples.
double emd_1d(Vec a, Vec b);

/// Twenty-bin histogram on [0, 1].
Vec histogram20(const Vec& values);

}  // namespace epilock
