#!/usr/bin/env python3
# Copyright 2026 The Recourse Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates the lending demo: schema, model, scenario profiles, dataset.

The model weights are fixed by hand. The bias is solved so that the
scenario-3 income boundary sits just below $42000, and every other scenario
gets one unstated "slack" feature chosen so its boundary lands where the
scenario's explanation puts it.
"""

import argparse
import csv
import json
import pathlib

import numpy as np

GRADES = ["A", "B", "C", "D", "E", "F"]
PURPOSES = ["business", "travel", "debt_consolidation", "personal", "other"]

SCHEMA = [
    dict(name="loan_amount", kind="continuous", lo=500, hi=40000, unit="$",
         step=500, display_name="loan amount"),
    dict(name="term", kind="ordinal", levels=[36, 60], unit="months",
         display_name="loan term"),
    dict(name="interest_rate", kind="continuous", lo=5, hi=31, unit="%",
         mutability="immutable", step=0.01, precision=2,
         display_name="interest rate"),
    dict(name="grade", kind="ordinal", levels=[1, 2, 3, 4, 5, 6],
         labels=GRADES, display_name="credit rating"),
    dict(name="employment_years", kind="ordinal", levels=list(range(11)),
         mutability="immutable", display_name="years of employment"),
    dict(name="income", kind="continuous", lo=0, hi=250000, unit="$",
         step=1000, display_name="income"),
    dict(name="num_credit_cards", kind="ordinal", levels=list(range(11)),
         mutability="conditionally-mutable",
         condition=[dict(feature="num_credit_cards", op=">=", value=1)],
         display_name="number of credit cards"),
    dict(name="credit_limit", kind="continuous", lo=0, hi=60000, unit="$",
         step=500, display_name="total spending limit"),
    dict(name="inquiries_6m", kind="ordinal", levels=list(range(31)),
         display_name="number of credit inquiries"),
    dict(name="credit_utilisation", kind="continuous", lo=0, hi=100,
         unit="%", step=1, display_name="credit utilisation rate"),
    dict(name="dti", kind="continuous", lo=0, hi=100, unit="%", step=1,
         display_name="debt to income ratio"),
    dict(name="defaults_2y", kind="ordinal", levels=list(range(11)),
         display_name="number of defaults"),
    dict(name="purpose", kind="categorical", labels=PURPOSES,
         mutability="immutable", display_name="loan purpose"),
]

WEIGHTS = {
    "loan_amount": -8e-5,
    "term": -0.05,
    "interest_rate": -0.08,
    "grade": -0.5,
    "employment_years": 0.05,
    "income": 8e-5,
    "num_credit_cards": -0.6,
    "credit_limit": -1.2e-4,
    "inquiries_6m": -0.15,
    "credit_utilisation": -0.04,
    "dti": -0.06,
    "defaults_2y": -0.8,
}
PURPOSE_WEIGHTS = {"business": -0.2, "travel": -0.1,
                   "debt_consolidation": 0.1, "personal": 0.0, "other": 0.0}

DEFAULTS = dict(loan_amount=10000, term=36, interest_rate=12, grade=3,
                employment_years=5, income=40000, num_credit_cards=1,
                credit_limit=5000, inquiries_6m=1, credit_utilisation=30,
                dti=20, defaults_2y=0, purpose="other")

# Slack candidates: (feature, step, lo, hi).
SLACK = [("credit_limit", 100, 0, 60000), ("dti", 0.1, 0, 60),
         ("credit_utilisation", 0.1, 0, 90), ("inquiries_6m", 1, 0, 10),
         ("loan_amount", 100, 500, 40000)]

# id, stated values, focus, desired, boundary feature, boundary target.
# Ordinal targets sit halfway between the two levels of the crossing.
SCENARIOS = [
    (1, dict(loan_amount=5600, term=60, interest_rate=21.5, grade=6,
             income=30000, purpose="business"), ["grade"], "approve",
     "grade", 3.5),
    (2, dict(loan_amount=11000, term=36, interest_rate=16.5, grade=5,
             employment_years=6, income=28000, num_credit_cards=2,
             credit_limit=6000), ["num_credit_cards", "credit_limit"],
     "approve", None, None),
    (3, dict(loan_amount=12500, term=60, interest_rate=17.5, grade=5,
             employment_years=5, income=30000), ["income"], "approve",
     "income", None),
    (4, dict(loan_amount=6000, term=60, interest_rate=12, employment_years=8,
             income=30000, inquiries_6m=15, purpose="travel"),
     ["inquiries_6m"], "approve", "inquiries_6m", 4.5),
    (5, dict(loan_amount=20000, term=36, interest_rate=10, grade=3,
             employment_years=10, income=80000, credit_limit=25000,
             num_credit_cards=4, inquiries_6m=3),
     ["credit_limit"], "approve", "credit_limit", 10000),
    (6, dict(loan_amount=20000, term=60, interest_rate=13.5,
             employment_years=10, income=35000, grade=3, purpose="business"),
     ["loan_amount", "term"], "approve", None, None),
    (7, dict(loan_amount=8000, term=36, interest_rate=10.5, income=75000,
             grade=2, credit_limit=3000, defaults_2y=2, inquiries_6m=4),
     ["credit_limit"], "approve",
     "credit_limit", 5000),
    (8, dict(loan_amount=1000, term=36, interest_rate=16.29, grade=3,
             income=28000, purpose="debt_consolidation"), ["grade"],
     "approve", "grade", 3.5),
    (9, dict(loan_amount=4600, term=36, interest_rate=6.5, grade=1,
             income=33000, inquiries_6m=2), ["inquiries_6m"], "approve",
     "inquiries_6m", 6.5),
    (10, dict(loan_amount=3000, term=36, interest_rate=15.6, grade=4,
              credit_utilisation=29, income=30000), ["credit_utilisation"],
     "approve", "credit_utilisation", 30),
    (11, dict(loan_amount=18000, term=60, interest_rate=18.5, income=55000,
              grade=5, dti=52), ["dti"], "approve", "dti", 33.3),
    (12, dict(loan_amount=5000, term=36, interest_rate=10.5, income=65000,
              grade=3, dti=34), ["dti"], "approve", "dti", 42.3),
    (13, dict(loan_amount=1200, term=36, interest_rate=18.4, income=20500,
              grade=4, defaults_2y=6), ["defaults_2y"], "approve",
     "defaults_2y", 0.5),
    (14, dict(loan_amount=18000, term=60, interest_rate=18.5, grade=3,
              credit_utilisation=80, income=58000), ["credit_utilisation"],
     "approve", "credit_utilisation", 30),
    (15, dict(loan_amount=4000, term=36, interest_rate=11, grade=3, dti=38,
              income=45000), ["dti"], "approve", "dti", 42.3),
]

S3_INCOME_BOUNDARY = 41999.6


def logit(profile, bias):
    z = bias + PURPOSE_WEIGHTS[profile["purpose"]]
    for name, w in WEIGHTS.items():
        z += w * profile[name]
    return z


def crossing(profile, bias, feature):
    rest = logit(profile, bias) - WEIGHTS[feature] * profile[feature]
    return -rest / WEIGHTS[feature]


def solve_bias():
    profile = dict(DEFAULTS, **SCENARIOS[2][1])
    profile["income"] = S3_INCOME_BOUNDARY
    return -logit(profile, 0.0)


def add_slack(profile, stated, focus, bias, feature, target, tolerance):
    for name, step, lo, hi in SLACK:
        if name in stated or name in focus:
            continue
        best = None
        for value in np.arange(lo, hi + step / 2, step):
            trial = dict(profile, **{name: float(value)})
            err = abs(crossing(trial, bias, feature) - target)
            if best is None or err < best[0]:
                best = (err, float(value))
        err, value = best
        profile[name] = int(value) if value == int(value) else round(value, 2)
        if err <= tolerance:
            break
    return profile


def build_profiles(bias):
    profiles = {}
    for sid, stated, focus, desired, feature, target in SCENARIOS:
        profile = dict(DEFAULTS, **stated)
        if sid == 2:
            # Fix the one-card limit boundary at 3250.
            probe = dict(profile, num_credit_cards=1)
            probe = add_slack(probe, stated, focus, bias, "credit_limit", 3250,
                              25)
            profile = dict(probe, num_credit_cards=2, credit_limit=6000)
        elif sid == 6:
            # Fix the 36-month loan boundary at 8250.
            probe = dict(profile, term=36)
            probe = add_slack(probe, stated, focus, bias, "loan_amount", 8250,
                              25)
            profile = dict(probe, term=60, loan_amount=20000)
        elif target is not None:
            step = next(f.get("step", 1) for f in SCHEMA if f["name"] == feature)
            profile = add_slack(profile, stated, focus, bias, feature, target,
                                0.05 * step)
        profiles[sid] = (profile, focus, desired)
    return profiles


def synthetic_dataset(bias, rows, seed):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(rows):
        r = dict(
            loan_amount=float(rng.integers(1, 61) * 500),
            # Alternating terms keep the column's MAD positive.
            term=36 if i % 2 == 0 else 60,
            interest_rate=round(float(rng.uniform(5, 31)), 2),
            grade=int(rng.integers(1, 7)),
            employment_years=int(rng.integers(0, 11)),
            income=float(rng.integers(10, 151) * 1000),
            num_credit_cards=int(rng.integers(0, 7)),
            credit_limit=float(rng.integers(0, 61) * 500),
            inquiries_6m=int(min(30, rng.poisson(3))),
            credit_utilisation=float(rng.integers(0, 101)),
            dti=float(rng.integers(0, 71)),
            defaults_2y=int(rng.integers(0, 5)),
            purpose=PURPOSES[int(rng.integers(0, 5))],
        )
        r["label"] = 1 if logit(r, bias) >= 0 else 0
        out.append(r)
    return out


def mad(values):
    values = np.asarray(values, dtype=float)
    return float(np.median(np.abs(values - np.median(values))))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=pathlib.Path,
                        default=pathlib.Path(__file__).resolve().parent.parent
                        / "data" / "lending_demo")
    parser.add_argument("--rows", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    bias = solve_bias()
    schema = {"features": SCHEMA}
    (args.out / "scenarios").mkdir(parents=True, exist_ok=True)
    (args.out / "schema.json").write_text(json.dumps(schema, indent=2) + "\n")

    data = synthetic_dataset(bias, args.rows, args.seed)
    names = [f["name"] for f in SCHEMA]
    with open(args.out / "applications.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names + ["label"])
        for r in data:
            writer.writerow([r[n] for n in names] + [r["label"]])

    coefficients = dict(WEIGHTS)
    coefficients["purpose"] = PURPOSE_WEIGHTS
    model = {
        "schema": schema,
        "coefficients": {n: coefficients[n] for n in names},
        "bias": bias,
        "threshold": 0.5,
        "mad": {f["name"]: mad([r[f["name"]] for r in data])
                for f in SCHEMA if f["kind"] != "categorical"},
    }
    (args.out / "model.json").write_text(json.dumps(model, indent=2) + "\n")

    for sid, (profile, focus, desired) in build_profiles(bias).items():
        body = {
            "scenario": f"scenario-{sid}",
            "desired": desired,
            "focus": focus,
            "profile": {n: (GRADES[profile[n] - 1] if n == "grade" else profile[n])
                        for n in names},
        }
        path = args.out / "scenarios" / f"scenario-{sid}.json"
        path.write_text(json.dumps(body, indent=2) + "\n")
        z = logit(profile, bias)
        line = f"scenario {sid:2d}: logit {z:+.4f}"
        for feature in focus:
            line += f", {feature} boundary {crossing(profile, bias, feature):.3f}"
        print(line)


if __name__ == "__main__":
    main()
