#!/usr/bin/env python3
# Copyright 2026 The epilock Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes a synthetic 62-county raw data set shaped like New York State.

The numbers are made up. Five dense, heavily infected "city" counties sit
close together; the rest are smaller and spread over the state. Trips follow
a gravity model. Run `epilock build --manifest <out>/manifest.json` on the
result to get a bundle.
"""

import argparse
import csv
import json
import os

import numpy as np

CITY = ["36005", "36047", "36061", "36081", "36085"]


def write(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", required=True)
    ap.add_argument("--seed", type=int, default=20200401)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    os.makedirs(args.out, exist_ok=True)

    ids = [str(36001 + 2 * k) for k in range(62)]
    city = np.array([i in CITY for i in ids])
    n = len(ids)

    pop = np.where(city, rng.uniform(4.5e5, 2.6e6, n), np.exp(rng.uniform(np.log(5e3), np.log(9e5), n)))
    pop = np.round(pop)
    jobs_per_person = np.where(city, rng.uniform(0.55, 0.9, n), rng.uniform(0.3, 0.5, n))
    employment = np.round(pop * jobs_per_person)

    xy = rng.uniform(0.0, 300.0, (n, 2))
    xy[city] = rng.uniform(0.0, 12.0, (city.sum(), 2))
    area = np.where(city, rng.uniform(30, 110, n), rng.uniform(300, 2700, n))
    density = pop / area

    dist = np.sqrt(((xy[:, None, :] - xy[None, :, :]) ** 2).sum(-1)) + 5.0
    attract = employment[None, :] / dist**2
    np.fill_diagonal(attract, 0.0)
    # Share of trips that leave the home county: high between the boroughs,
    # lower upstate.
    leave = np.where(city, rng.uniform(0.35, 0.6, n), rng.uniform(0.1, 0.3, n))
    total = pop * rng.uniform(0.2, 0.35, n)
    trips = (leave * total)[:, None] * attract / attract.sum(1, keepdims=True)
    self_trips = (1.0 - leave) * total
    trips[np.arange(n), np.arange(n)] = self_trips
    trips = np.round(trips)

    home = np.where(city, rng.uniform(1000, 1130, n), rng.uniform(900, 1040, n))

    infected_share = np.where(city, rng.uniform(0.04, 0.08, n), rng.uniform(0.002, 0.02, n))
    cases_now = np.round(0.14 * pop * infected_share)
    cases_before = np.round(cases_now * rng.uniform(0.3, 0.6, n))
    deaths = np.round(cases_now * rng.uniform(0.01, 0.06, n))

    write(os.path.join(args.out, "population.csv"), ["id", "persons"],
          [[i, int(p)] for i, p in zip(ids, pop)])
    write(os.path.join(args.out, "employment.csv"), ["id", "persons"],
          [[i, int(e)] for i, e in zip(ids, employment)])
    write(os.path.join(args.out, "home_dwell.csv"), ["id", "median_minutes"],
          [[i, f"{h:.1f}"] for i, h in zip(ids, home)])
    write(os.path.join(args.out, "density.csv"), ["id", "persons_per_sq_mile"],
          [[i, f"{d:.2f}"] for i, d in zip(ids, density)])
    write(os.path.join(args.out, "groups.csv"), ["id", "group"],
          [[i, "city" if c else "upstate"] for i, c in zip(ids, city)])
    write(os.path.join(args.out, "cases.csv"), ["date", "id", "cumulative_confirmed"],
          [["2020-03-25", i, int(c)] for i, c in zip(ids, cases_before)]
          + [["2020-04-01", i, int(c)] for i, c in zip(ids, cases_now)])
    write(os.path.join(args.out, "deaths.csv"), ["date", "id", "cumulative_deaths"],
          [["2020-04-01", i, int(d)] for i, d in zip(ids, deaths)])
    rows = []
    for a in range(n):
        for b in range(n):
            if trips[a, b] > 0:
                rows.append([ids[a], ids[b], int(trips[a, b])])
    # A few trips leave the state; ingest must drop them.
    rows += [[ids[k], "34003", 500] for k in range(0, n, 7)]
    write(os.path.join(args.out, "trips.csv"), ["origin_id", "dest_id", "count"], rows)

    manifest = {
        "name": "ny_like",
        "as_of": "2020-04-01",
        "files": {
            "trips": "trips.csv",
            "home_dwell": "home_dwell.csv",
            "population": "population.csv",
            "employment": "employment.csv",
            "cases": "cases.csv",
            "deaths": "deaths.csv",
            "density": "density.csv",
            "groups": "groups.csv",
        },
        "constants": {
            "reporting_rate": 0.14,
            "national_recovered": 8878,
            "national_cases": 215215,
            "asymptomatic_share": 0.86,
        },
    }
    with open(os.path.join(args.out, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
