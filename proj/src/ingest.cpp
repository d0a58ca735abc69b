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


#include "epilock/ingest.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "epilock/csv.hpp"
#include "epilock/error.hpp"
#include "epilock/spectral.hpp"

namespace epilock {

namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, double> keyed(const CsvTable& t, const std::string& column,
                                    const std::string& as_of) {
  std::map<std::string, double> out;
  const bool dated = t.has_column("date");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (dated && t.str(r, "date") != as_of) continue;
    const std::string& id = t.str(r, "id");
    const double v = t.num(r, column);
    if (!(v >= 0)) {
      throw Error(ErrorCode::kValidation,
                  t.path + " row " + std::to_string(r + 2) + ": negative " + column);
    }
    if (!out.emplace(id, v).second) {
      throw Error(ErrorCode::kValidation, t.path + ": duplicate id " + id);
    }
  }
  return out;
}

double lookup(const std::map<std::string, double>& m, const std::string& id, const char* what) {
  const auto it = m.find(id);
  if (it == m.end()) throw Error(ErrorCode::kValidation, std::string("missing ") + what + " for id " + id);
  return it->second;
}

}  // namespace

RawCountyTables read_manifest(const std::string& manifest_path) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(slurp(manifest_path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidation, manifest_path + ": " + e.what());
  }
  const fs::path base = fs::path(manifest_path).parent_path();
  RawCountyTables raw;
  try {
    raw.name = j.value("name", fs::path(manifest_path).stem().string());
    raw.as_of = j.value("as_of", std::string());
    raw.cost_floor = j.value("cost_floor", 0.0);
    if (j.contains("constants")) {
      const json& c = j.at("constants");
      raw.constants.reporting_rate = c.value("reporting_rate", raw.constants.reporting_rate);
      raw.constants.national_recovered = c.value("national_recovered", raw.constants.national_recovered);
      raw.constants.national_cases = c.value("national_cases", raw.constants.national_cases);
      raw.constants.asymptomatic_share = c.value("asymptomatic_share", raw.constants.asymptomatic_share);
    }
    const json& files = j.at("files");
    const auto file = [&](const char* key) { return (base / files.at(key).get<std::string>()).string(); };

    const CsvTable pop = read_csv(file("population"));
    for (std::size_t r = 0; r < pop.rows.size(); ++r) raw.ids.push_back(pop.str(r, "id"));
    raw.population = keyed(pop, "persons", raw.as_of);
    raw.employment = keyed(read_csv(file("employment")), "persons", raw.as_of);
    raw.home_dwell = keyed(read_csv(file("home_dwell")), "median_minutes", raw.as_of);
    raw.cases = keyed(read_csv(file("cases")), "cumulative_confirmed", raw.as_of);
    raw.deaths = keyed(read_csv(file("deaths")), "cumulative_deaths", raw.as_of);
    if (files.contains("density")) {
      raw.density = keyed(read_csv(file("density")), "persons_per_sq_mile", raw.as_of);
    }
    if (files.contains("groups")) {
      const CsvTable g = read_csv(file("groups"));
      for (std::size_t r = 0; r < g.rows.size(); ++r) raw.groups[g.str(r, "id")] = g.str(r, "group");
    }
    const CsvTable trips = read_csv(file("trips"));
    for (std::size_t r = 0; r < trips.rows.size(); ++r) {
      TripRecord t{trips.str(r, "origin_id"), trips.str(r, "dest_id"), trips.num(r, "count")};
      if (!(t.count >= 0)) {
        throw Error(ErrorCode::kValidation, trips.path + " row " + std::to_string(r + 2) + ": negative count");
      }
      raw.trips.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidation, manifest_path + ": " + e.what());
  }
  return raw;
}

TravelMatrix build_tau(const RawCountyTables& raw) {
  const Index n = static_cast<Index>(raw.ids.size());
  std::map<std::string, Index> index;
  for (Index i = 0; i < n; ++i) index[raw.ids[static_cast<std::size_t>(i)]] = i;
  Mat k = Mat::Zero(n, n);
  for (const auto& t : raw.trips) {
    const auto o = index.find(t.origin);
    const auto d = index.find(t.dest);
    if (o == index.end() || d == index.end()) continue;  // out of scope
    k(o->second, d->second) += t.count;
  }
  TravelMatrix out;
  out.tau = Mat::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const std::string& id = raw.ids[static_cast<std::size_t>(i)];
    const double h = lookup(raw.home_dwell, id, "home_dwell");
    const double total = k.row(i).sum();
    if (!(total > 0)) {
      throw Error(ErrorCode::kDegenerateLocation, "no in-scope trips leave location " + id);
    }
    out.tau.row(i) = (1.0 - h / kMinutesPerDay) * k.row(i) / total;
  }
  return out;
}

EpidemicState initial_state(const Vec& cases, const Vec& deaths, const Vec& population,
                            const IngestConstants& k) {
  const Index n = population.size();
  if (cases.size() != n || deaths.size() != n) {
    throw Error(ErrorCode::kValidation, "cases, deaths and population differ in length");
  }
  EpidemicState st;
  st.s.resize(n);
  st.x_a.resize(n);
  st.x_s.resize(n);
  st.r.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double scale = k.reporting_rate * population[i];
    double I = cases[i];
    if (I > scale) {
      warn("location " + std::to_string(i) + ": cases exceed reporting_rate * N; clamped");
      I = scale;
    }
    const double infected = I / scale;
    const double recovered = (deaths[i] + I * k.national_recovered / k.national_cases) / scale;
    const double active = infected - recovered;
    if (active < 0) {
      throw Error(ErrorCode::kDataInconsistency,
                  "location " + std::to_string(i) + ": recovered exceeds total infected");
    }
    st.s[i] = 1.0 - infected;
    st.r[i] = recovered;
    st.x_a[i] = k.asymptomatic_share * active;
    st.x_s[i] = (1.0 - k.asymptomatic_share) * active;
  }
  st.cum = Vec::Ones(n) - st.s;
  return st;
}

Scenario ingest(const RawCountyTables& raw) {
  const Index n = static_cast<Index>(raw.ids.size());
  Vec N(n), e(n), h(n), I(n), D(n);
  for (Index i = 0; i < n; ++i) {
    const std::string& id = raw.ids[static_cast<std::size_t>(i)];
    N[i] = lookup(raw.population, id, "population");
    e[i] = lookup(raw.employment, id, "employment");
    h[i] = lookup(raw.home_dwell, id, "home_dwell");
    I[i] = lookup(raw.cases, id, "cases");
    D[i] = lookup(raw.deaths, id, "deaths");
  }
  NetworkOptions opt;
  opt.cost_floor = raw.cost_floor;
  Scenario sc;
  sc.name = raw.name;
  sc.net = make_network(raw.ids, N, e, build_tau(raw).tau, h, opt);
  sc.state = initial_state(I, D, N, raw.constants);
  for (const auto& id : raw.ids) {
    const auto g = raw.groups.find(id);
    sc.group.push_back(g == raw.groups.end() ? "" : g->second);
  }
  if (!raw.density.empty()) {
    sc.density.resize(n);
    for (Index i = 0; i < n; ++i) sc.density[i] = lookup(raw.density, raw.ids[static_cast<std::size_t>(i)], "density");
  }
  return sc;
}

void write_bundle(const Scenario& sc, const std::string& dir, const std::string& as_of,
                  const IngestConstants& k) {
  fs::create_directories(dir);
  const NetworkData& net = sc.net;
  const Index n = net.size();
  const fs::path base(dir);
  {
    CsvWriter w((base / "network.csv").string());
    w.row({"id", "population", "employment", "cost", "home_dwell", "group", "density"});
    for (Index i = 0; i < n; ++i) {
      const auto u = static_cast<std::size_t>(i);
      w.row({net.ids[u], fmt17(net.population[i]), fmt17(net.employment[i]), fmt17(net.cost[i]),
             fmt17(net.home_dwell[i]), u < sc.group.size() ? sc.group[u] : "",
             sc.density.size() ? fmt17(sc.density[i]) : ""});
    }
    w.commit();
  }
  {
    CsvWriter w((base / "tau.csv").string());
    w.row({"origin_id", "dest_id", "tau"});
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        if (net.travel.tau(i, j) != 0) {
          w.row({net.ids[static_cast<std::size_t>(i)], net.ids[static_cast<std::size_t>(j)],
                 fmt17(net.travel.tau(i, j))});
        }
      }
    }
    w.commit();
  }
  {
    CsvWriter w((base / "state.csv").string());
    w.row({"id", "s", "x_a", "x_s", "r"});
    const EpidemicState& st = sc.state;
    for (Index i = 0; i < n; ++i) {
      w.row({net.ids[static_cast<std::size_t>(i)], fmt17(st.s[i]), fmt17(st.x_a[i]),
             fmt17(st.x_s[i]), fmt17(st.r[i])});
    }
    w.commit();
  }
  nlohmann::ordered_json meta;
  meta["name"] = sc.name;
  meta["as_of"] = as_of;
  meta["locations"] = n;
  meta["constants"] = {{"reporting_rate", k.reporting_rate},
                       {"national_recovered", k.national_recovered},
                       {"national_cases", k.national_cases},
                       {"asymptomatic_share", k.asymptomatic_share}};
  write_text((base / "meta.json").string(), meta.dump(2) + "\n");
}

Scenario read_bundle(const std::string& dir) {
  const fs::path base(dir);
  if (!fs::is_directory(base)) throw Error(ErrorCode::kIo, "bundle directory not found: " + dir);
  const CsvTable net = read_csv((base / "network.csv").string());
  const Index n = static_cast<Index>(net.rows.size());
  std::vector<std::string> ids;
  std::map<std::string, Index> index;
  Vec N(n), e(n), c(n), h(n), dens(n);
  bool has_density = true;
  Scenario sc;
  for (Index i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    ids.push_back(net.str(r, "id"));
    if (!index.emplace(ids.back(), i).second) {
      throw Error(ErrorCode::kValidation, net.path + ": duplicate id " + ids.back());
    }
    N[i] = net.num(r, "population");
    e[i] = net.num(r, "employment");
    c[i] = net.num(r, "cost");
    h[i] = net.num(r, "home_dwell");
    sc.group.push_back(net.str(r, "group"));
    if (net.str(r, "density").empty()) {
      has_density = false;
    } else {
      dens[i] = net.num(r, "density");
    }
  }
  const CsvTable tt = read_csv((base / "tau.csv").string());
  Mat tau = Mat::Zero(n, n);
  for (std::size_t r = 0; r < tt.rows.size(); ++r) {
    const auto o = index.find(tt.str(r, "origin_id"));
    const auto d = index.find(tt.str(r, "dest_id"));
    if (o == index.end() || d == index.end()) {
      throw Error(ErrorCode::kValidation, tt.path + " row " + std::to_string(r + 2) + ": unknown id");
    }
    tau(o->second, d->second) = tt.num(r, "tau");
  }
  NetworkOptions opt;
  opt.cost_floor = c.minCoeff() > 0 ? c.minCoeff() : 0.0;
  sc.net = make_network(ids, N, e, tau, h, opt);
  for (Index i = 0; i < n; ++i) {
    if (!(c[i] > 0)) throw Error(ErrorCode::kValidation, net.path + ": nonpositive cost for " + ids[static_cast<std::size_t>(i)]);
  }
  sc.net.cost = c;  // stored costs are authoritative (they may carry a floor)
  if (has_density) sc.density = dens;

  const CsvTable st = read_csv((base / "state.csv").string());
  if (static_cast<Index>(st.rows.size()) != n) {
    throw Error(ErrorCode::kValidation, st.path + ": expected one row per location");
  }
  Vec s(n), xa(n), xs(n), rec(n);
  for (std::size_t r = 0; r < st.rows.size(); ++r) {
    const auto it = index.find(st.str(r, "id"));
    if (it == index.end()) throw Error(ErrorCode::kValidation, st.path + ": unknown id " + st.str(r, "id"));
    s[it->second] = st.num(r, "s");
    xa[it->second] = st.num(r, "x_a");
    xs[it->second] = st.num(r, "x_s");
    rec[it->second] = st.num(r, "r");
  }
  sc.state.s = s;
  sc.state.x_a = xa;
  sc.state.x_s = xs;
  sc.state.r = rec;
  sc.state.cum = Vec::Ones(n) - s;
  sc.name = base.filename().string();
  const fs::path meta = base / "meta.json";
  if (fs::exists(meta)) {
    try {
      const auto j = nlohmann::json::parse(slurp(meta.string()));
      sc.name = j.value("name", sc.name);
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::kValidation, meta.string() + ": " + ex.what());
    }
  }
  return sc;
}

}  // namespace epilock
