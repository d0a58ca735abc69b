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

#include <map>
#include <string>
#include <vector>

#include "epilock/model.hpp"

namespace epilock {

struct IngestConstants {
  double reporting_rate = 0.14;
  double national_recovered = 8878;
  double national_cases = 215215;
  double asymptomatic_share = 0.86;
};

struct TripRecord {
  std::string origin;
  std::string dest;
  double count = 0.0;
};

/// County tables keyed by id. `ids` fixes the location order (the order of
/// the population table).
struct RawCountyTables {
  std::string name;
  std::string as_of;
  std::vector<std::string> ids;
  std::vector<TripRecord> trips;
  std::map<std::string, double> home_dwell;  // median minutes at home
  std::map<std::string, double> population;
  std::map<std::string, double> employment;
  std::map<std::string, double> cases;   // cumulative confirmed at as_of
  std::map<std::string, double> deaths;  // cumulative at as_of
  std::map<std::string, double> density;  // optional
  std::map<std::string, std::string> groups;  // optional
  IngestConstants constants;
  double cost_floor = 0.0;
};

/// Reads a JSON manifest:
///   {"name", "as_of", "files": {"trips", "home_dwell", "population",
///    "employment", "cases", "deaths", ["density"], ["groups"]},
///    ["constants": {...}], ["cost_floor"]}
/// Paths are relative to the manifest. Column names:
///   trips: origin_id,dest_id,count        home_dwell: id,median_minutes
///   population: id,persons                employment: id,persons
///   cases: id,cumulative_confirmed[,date] deaths: id,cumulative_deaths[,date]
///   density: id,persons_per_sq_mile       groups: id,group
/// Rows with a date column are kept only when date == as_of.
RawCountyTables read_manifest(const std::string& manifest_path);

/// tau_ij = (1 - h_i / 1440) k_ij / sum_a k_ia over in-scope destinations.
TravelMatrix build_tau(const RawCountyTables& raw);

/// s = 1 - I / (rho N); recovered = (D + I R / C) / (rho N); the rest of
/// 1 - s is active, split by the asymptomatic share.
EpidemicState initial_state(const Vec& cases, const Vec& deaths, const Vec& population,
                            const IngestConstants& constants = {});

Scenario ingest(const RawCountyTables& raw);

/// Canonical bundle: network.csv, tau.csv, state.csv, meta.json. Numbers use
/// 17 significant digits, so read_bundle(write_bundle(x)) == x bit for bit.
void write_bundle(const Scenario& scenario, const std::string& dir,
                  const std::string& as_of = "", const IngestConstants& constants = {});
Scenario read_bundle(const std::string& dir);

}  // namespace epilock
