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


#include "epilock/presets.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include <json.hpp>

#include "epilock/csv.hpp"
#include "epilock/error.hpp"

namespace epilock {

namespace {

// gamma, r_a, r_s, epsilon, alpha_hat, target growth. The growth rates share
// (g + r_a) / r_a = 4.55.
ParamSet make(const char* name, double gamma, double r_a, double r_s, double eps,
              double alpha_hat, double growth) {
  ParamSet s;
  s.name = name;
  s.params.family = Family::kCOVID;
  s.params.gamma = gamma;
  s.params.r_a = r_a;
  s.params.r_s = r_s;
  s.params.epsilon = eps;
  s.params.alpha_hat = alpha_hat;
  s.target_growth = growth;
  return s;
}

}  // namespace

std::vector<std::string> preset_names() { return {"bertozzi", "giordano", "birge"}; }

ParamSet preset(const std::string& name) {
  if (name == "bertozzi") return make("bertozzi", 0.20, 0.20, 0.20, 0.32, 0.6754, 0.71);
  if (name == "giordano") return make("giordano", 0.034, 0.034, 0.017, 0.125, 0.6754, 0.1207);
  if (name == "birge") return make("birge", 0.29, 0.29, 0.29, 0.14, 0.55, 1.0295);
  throw Error(ErrorCode::kValidation, "unknown parameter preset '" + name + "'");
}

ParamSet parse_params_json(const std::string& json_text) {
  using nlohmann::json;
  ParamSet s;
  try {
    const json j = json::parse(json_text);
    if (j.contains("preset")) s = preset(j.at("preset").get<std::string>());
    s.name = j.value("name", s.name);
    DiseaseParams& p = s.params;
    if (j.contains("family")) p.family = parse_family(j.at("family").get<std::string>());
    p.gamma = j.value("gamma", p.gamma);
    p.r_a = j.value("r_a", p.r_a);
    p.r_s = j.value("r_s", p.r_s);
    p.epsilon = j.value("epsilon", p.epsilon);
    p.alpha_hat = j.value("alpha_hat", p.alpha_hat);
    p.alpha = j.value("alpha", p.alpha);
    s.target_growth = j.value("target_growth", s.target_growth);
    if (j.contains("beta_s")) {
      p.beta_s = j.at("beta_s").get<double>();
      p.beta_a = j.value("beta_a", p.alpha_hat * p.beta_s);
      s.calibrated = true;
    }
    if (j.contains("zeta")) {
      p.zeta = j.at("zeta").get<double>();
      s.calibrated = true;
    }
    if (j.contains("beta_scale")) {
      const auto v = j.at("beta_scale").get<std::vector<double>>();
      p.beta_scale = Eigen::Map<const Vec>(v.data(), static_cast<Index>(v.size()));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("parameter file: ") + e.what());
  }
  s.params.validate();
  return s;
}

ParamSet load_params(const std::string& name_or_path) {
  for (const auto& n : preset_names()) {
    if (n == name_or_path) return preset(n);
  }
  std::ifstream in(name_or_path);
  if (!in) {
    throw Error(ErrorCode::kValidation,
                "'" + name_or_path + "' is neither a preset nor a readable parameter file");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  ParamSet s = parse_params_json(ss.str());
  if (s.name.empty()) s.name = std::filesystem::path(name_or_path).stem().string();
  return s;
}

std::string params_to_json(const ParamSet& set) {
  const DiseaseParams& p = set.params;
  std::vector<std::pair<std::string, std::string>> fields = {
      {"name", "\"" + set.name + "\""},
      {"family", std::string("\"") + to_string(p.family) + "\""},
      {"gamma", fmt12(p.gamma)},
      {"r_a", fmt12(p.r_a)},
      {"r_s", fmt12(p.r_s)},
      {"epsilon", fmt12(p.epsilon)},
      {"alpha_hat", fmt12(p.alpha_hat)},
      {"alpha", fmt12(p.alpha)},
      {"target_growth", fmt12(set.target_growth)},
  };
  if (p.beta_scale.size()) {
    std::string list = "[";
    for (Index i = 0; i < p.beta_scale.size(); ++i) list += (i ? ", " : "") + fmt12(p.beta_scale[i]);
    fields.emplace_back("beta_scale", list + "]");
  }
  if (set.calibrated) {
    fields.emplace_back("beta_s", fmt12(p.beta_s));
    fields.emplace_back("beta_a", fmt12(p.beta_a));
    fields.emplace_back("zeta", fmt12(p.zeta));
  }
  std::string out = "{\n";
  for (std::size_t i = 0; i < fields.size(); ++i) {
    out += "  \"" + fields[i].first + "\": " + fields[i].second;
    out += i + 1 < fields.size() ? ",\n" : "\n";
  }
  return out + "}\n";
}

}  // namespace epilock
