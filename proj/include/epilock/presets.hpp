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

#include <string>
#include <vector>

#include "epilock/model.hpp"

namespace epilock {

/// Disease parameters plus the initial growth rate they are calibrated to.
/// Transmission (beta_s or zeta) is left for calibrate_beta unless the
/// source fixes it.
struct ParamSet {
  std::string name;
  DiseaseParams params;
  double target_growth = 0.0;
  bool calibrated = false;  // true when beta_s / zeta came from the file
};

/// bertozzi, giordano, birge (COVID family).
ParamSet preset(const std::string& name);
std::vector<std::string> preset_names();

/// A preset name or a JSON file with the fields of DiseaseParams,
/// "target_growth" and optionally "family".
ParamSet load_params(const std::string& name_or_path);
ParamSet parse_params_json(const std::string& json_text);

/// JSON with 12 significant digits, keys in a fixed order.
std::string params_to_json(const ParamSet& set);

}  // namespace epilock
