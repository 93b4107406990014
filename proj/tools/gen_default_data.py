#!/usr/bin/env python3
"""Generate the default input files under data/.

Eight named countries carry approximate public figures (UN WPP 2020 age structure,
World Bank GDP/GNI, OECD/WHO bed counts). Every other row is synthetic: a stable
population pyramid with a user-assigned ISO3 code (X..), drawn per income group.
Output is deterministic for a fixed seed.
"""

import argparse
import csv
import json
import math
from pathlib import Path

import numpy as np

BANDS = 16
MIDPOINTS = np.array([2.5 + 5 * b for b in range(15)] + [82.0])

# name, income group, population by band (millions), GDP (USD), GNI per capita (USD),
# hospital beds, ICU beds, annual births, informal employment share
NAMED = [
    ("JPN", "Japan", "high",
     [4.8, 5.1, 5.4, 5.7, 6.1, 6.3, 6.8, 7.6, 8.5, 9.6, 8.6, 7.8, 7.4, 8.7, 8.9, 18.5],
     5.08e12, 41690, 1_640_000, 9_200, 870_000, 0.10),
    ("GBR", "United Kingdom", "high",
     [3.9, 4.1, 3.9, 3.7, 4.1, 4.6, 4.6, 4.5, 4.3, 4.6, 4.8, 4.5, 3.9, 3.5, 3.4, 5.5],
     2.83e12, 42370, 168_000, 4_400, 720_000, 0.13),
    ("USA", "United States", "high",
     [19.6, 20.2, 20.8, 21.0, 21.6, 23.5, 22.4, 21.6, 20.0, 20.3, 20.6, 21.6, 20.4, 17.4, 14.0, 22.7],
     21.43e12, 65760, 924_000, 114_000, 3_750_000, 0.06),
    ("BRA", "Brazil", "upper-middle",
     [14.7, 14.9, 15.3, 16.3, 17.0, 16.6, 17.1, 17.3, 15.5, 13.6, 12.3, 11.0, 9.3, 7.4, 5.4, 7.3],
     1.84e12, 9130, 464_000, 42_000, 2_850_000, 0.46),
    ("IDN", "Indonesia", "upper-middle",
     [22.4, 22.2, 22.1, 22.0, 21.9, 21.6, 21.3, 20.7, 19.6, 17.9, 15.6, 13.2, 10.4, 7.4, 4.6, 4.8],
     1.12e12, 4050, 270_000, 7_300, 4_700_000, 0.81),
    ("ZAF", "South Africa", "lower-middle",
     [5.7, 5.7, 5.3, 4.7, 4.7, 5.4, 5.5, 4.7, 3.8, 3.1, 2.7, 2.4, 2.0, 1.5, 1.1, 1.1],
     0.351e12, 6040, 133_000, 5_200, 1_160_000, 0.34),
    ("BGD", "Bangladesh", "lower-middle",
     [14.6, 14.6, 15.4, 15.9, 15.6, 14.3, 13.1, 12.2, 10.5, 9.3, 8.0, 6.4, 4.9, 3.6, 2.4, 2.8],
     0.303e12, 1940, 130_000, 1_100, 2_900_000, 0.95),
    ("NGA", "Nigeria", "lower-middle",
     [32.6, 28.7, 25.2, 22.2, 19.1, 16.2, 13.8, 11.7, 9.7, 7.9, 6.3, 4.9, 3.7, 2.6, 1.7, 1.6],
     0.448e12, 2030, 103_000, 350, 7_600_000, 0.93),
]

# Sub-Saharan Africa aggregate age shares (percent), 2020.
SSA_SHARES = [15.9, 14.2, 12.6, 11.1, 9.7, 8.3, 7.0, 5.9, 4.8, 3.9, 3.2, 2.6, 2.0, 1.5, 1.0, 0.9]

GROUPS = {
    # count, elderly-share mean/sd, GNI range, beds/1000, ICU/100k, births/1000, informal
    "high": (50, 0.174, 0.030, (12_600, 80_000), (2.5, 8.0), (5.0, 30.0), 10.0, (0.08, 0.25)),
    "upper-middle": (50, 0.090, 0.025, (4_100, 12_500), (1.5, 4.5), (3.0, 15.0), 15.0, (0.30, 0.60)),
    "lower-middle": (50, 0.055, 0.012, (1_050, 4_000), (0.7, 2.0), (0.5, 4.0), 22.0, (0.60, 0.90)),
    "low": (34, 0.030, 0.005, (400, 1_040), (0.4, 1.2), (0.1, 1.0), 36.0, (0.85, 0.97)),
}

# Hospitalisation: log-linear squire default scaled by 1.1, 75+ merged. ICU shares and
# treated death probabilities follow squire; untreated death probabilities are 0.15/0.6
# (squire: 0.6/0.95). Calibration notes are in the README.
_P_HOSP_SQUIRE = [0.000840764, 0.001182411, 0.001662887, 0.002338607, 0.003288934, 0.004625123,
                  0.006504778, 0.009148056, 0.012865579, 0.018093032, 0.025445059, 0.035784349,
                  0.050324558, 0.070773078, 0.099530225, 0.17]
_D_HOSP_T = [0.0125] * 13 + [0.05, 0.1, 0.2]
SEVERITY = {
    "p_hosp": [round(1.1 * p, 9) for p in _P_HOSP_SQUIRE],
    "p_icu": [0.181, 0.181, 0.181, 0.137, 0.122, 0.123, 0.127, 0.132, 0.145, 0.176, 0.242,
              0.349, 0.524, 0.614, 0.646, 0.66],
    "d_hosp_t": _D_HOSP_T,
    "d_hosp_u": [max(0.15, d) for d in _D_HOSP_T],
    "d_icu_t": [0.50] * BANDS,
    "d_icu_u": [0.60] * BANDS,
}
DURATIONS = {"latent_period": 4.6, "infectious_period": 4.5, "hosp_stay_general": 9.5,
             "hosp_stay_icu": 11.3}

TABLE_COUNTRIES = ["JPN", "GBR", "USA", "BRA", "IDN", "ZAF", "BGD", "NGA"]


def survival(age, scale):
    """Gompertz-Makeham survivorship; `scale` stretches adult mortality."""
    a, b, g = 0.0008 * scale, 0.00003 * scale, 0.09
    return np.exp(-a * age - b / g * (np.exp(g * age) - 1.0))


def stable_pyramid(growth, scale):
    weights = []
    for band in range(BANDS):
        lo, hi = 5.0 * band, (5.0 * band + 5.0 if band < BANDS - 1 else 105.0)
        ages = np.linspace(lo, hi, 41)
        w = np.exp(-growth * ages) * survival(ages, scale)
        weights.append(float(np.trapezoid(w, ages)))
    w = np.array(weights)
    return w / w.sum()


def elderly(shares):
    return float(shares[13:].sum() / shares.sum())


def pyramid_with_share(target, scale):
    lo, hi = -0.03, 0.08
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if elderly(stable_pyramid(mid, scale)) > target:
            lo = mid
        else:
            hi = mid
    shares = stable_pyramid(0.5 * (lo + hi), scale)
    young, old = shares[:13].sum(), shares[13:].sum()
    shares[13:] *= target * young / ((1.0 - target) * old)
    return shares / shares.sum()


def exact_share(shares, target):
    """Rescale the 65+ bands so the share equals `target` to rounding."""
    shares = np.array(shares, dtype=float)
    young, old = shares[:13].sum(), shares[13:].sum()
    shares[13:] *= target * young / ((1.0 - target) * old)
    return shares


def contact_matrix(elderly_boost):
    m = np.zeros((BANDS, BANDS))
    activity = np.array([5.0, 7.5, 8.0, 7.0, 4.5, 4.0, 4.0, 4.0, 3.8, 3.5, 3.2, 2.8, 2.4, 2.0,
                         1.8, 1.5])
    for i in range(BANDS):
        for j in range(BANDS):
            d = MIDPOINTS[i] - MIDPOINTS[j]
            same = activity[i] * math.exp(-(d / 6.0) ** 2)
            parent = 0.55 * (math.exp(-((d - 30.0) / 6.0) ** 2) + math.exp(-((d + 30.0) / 6.0) ** 2))
            grand = 0.20 * (math.exp(-((d - 55.0) / 8.0) ** 2) + math.exp(-((d + 55.0) / 8.0) ** 2))
            work = 0.35 if 4 <= i <= 12 and 4 <= j <= 12 else 0.0
            m[i, j] = same + parent + grand + work + 0.12
    if elderly_boost != 1.0:
        for i in range(12, BANDS):
            m[i, :] *= elderly_boost
            m[:, i] *= elderly_boost
    return m


def fmt(x):
    return repr(float(x))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    parser.add_argument("--seed", type=int, default=2020)
    args = parser.parse_args()
    rng = np.random.default_rng(args.seed)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    for iso, name, group, pop_m, gdp, gni, beds, icu, births, informal in NAMED:
        pop = [round(v * 1e6) for v in pop_m]
        rows.append([iso, name, group, *pop, gdp, gni, beds, icu, births, informal])

    def synthetic_row(iso, name, group, shares, total, gni, beds_pk, icu_pk, cbr, informal):
        pop = [round(s * total) for s in shares]
        total = sum(pop)
        return [iso, name, group, *pop, round(total * gni * rng.uniform(0.95, 1.1)), gni,
                round(beds_pk * total / 1000.0), round(icu_pk * total / 100000.0),
                round(cbr * total / 1000.0), informal]

    # Reference pyramids with pinned elderly shares.
    ssa = exact_share(SSA_SHARES, 0.034)
    rows.append(synthetic_row("XSA", "Synthetic Sub-Saharan Africa", "low", ssa / ssa.sum(),
                              1.1e9, 1_550, 1.0, 0.5, 36.0, 0.89))
    low3 = pyramid_with_share(0.03, 1.6)
    rows.append(synthetic_row("XLO", "Synthetic low income (3% aged 65+)", "low", low3, 20e6,
                              700, 0.8, 0.5, 36.0, 0.9))
    high174 = pyramid_with_share(0.174, 0.8)
    rows.append(synthetic_row("XHI", "Synthetic high income (17.4% aged 65+)", "high", high174,
                              20e6, 45_000, 4.0, 12.0, 10.0, 0.15))

    code = 0
    letters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    used = {r[0] for r in rows}
    lmic_ids = ["BGD", "NGA", "ZAF", "XSA", "XLO"]
    for group, (count, mean, sd, gni_range, beds_range, icu_range, cbr, informal_range) in GROUPS.items():
        scale = {"high": 0.8, "upper-middle": 1.0, "lower-middle": 1.3, "low": 1.6}[group]
        for k in range(count):
            while True:
                iso = "X" + letters[code // 26] + letters[code % 26]
                code += 1
                if iso not in used:
                    break
            used.add(iso)
            target = float(np.clip(rng.normal(mean, sd), 0.02, 0.30))
            shares = pyramid_with_share(target, scale)
            total = float(np.exp(rng.normal(math.log(15e6), 1.0)))
            gni = round(float(np.exp(rng.uniform(*np.log(gni_range)))))
            informal = round(float(rng.uniform(*informal_range)), 3) if rng.random() > 0.1 else ""
            rows.append(synthetic_row(iso, f"Synthetic {group} {k + 1:02d}", group, shares, total,
                                      gni, rng.uniform(*beds_range), rng.uniform(*icu_range),
                                      cbr, informal))
            if group in ("low", "lower-middle"):
                lmic_ids.append(iso)

    header = ["iso3", "name", "income_group", *[f"pop_band_{b}" for b in range(BANDS)], "gdp_usd",
              "gni_pc_usd", "hosp_beds", "icu_beds", "births", "informal_share"]
    with open(out / "countries.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(r)

    with open(out / "economics.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["iso3", "gdp_usd", "gni_pc_usd"])
        for iso, _, _, _, gdp, gni, *_ in NAMED:
            w.writerow([iso, gdp, gni])

    with open(out / "contacts.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["iso3", "row_band", "col_band", "contacts_per_day"])
        blocks = [("DEFAULT", contact_matrix(1.0))]
        lmic = contact_matrix(1.35)
        blocks += [(iso, lmic) for iso in sorted(lmic_ids)]
        for key, m in blocks:
            for i in range(BANDS):
                for j in range(BANDS):
                    w.writerow([key, i, j, f"{m[i, j]:.6f}"])

    with open(out / "severity.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        cols = ["p_hosp", "p_icu", "d_hosp_t", "d_hosp_u", "d_icu_t", "d_icu_u"]
        w.writerow(["band", *cols])
        for b in range(BANDS):
            w.writerow([b, *[SEVERITY[c][b] for c in cols]])
        w.writerow(["[durations]"])
        w.writerow(["key", "value"])
        for k, v in DURATIONS.items():
            w.writerow([k, v])

    run = {
        "countries": "countries.csv",
        "contacts": "contacts.csv",
        "severity": "severity.csv",
        "economics": "economics.csv",
        "scenarios": [
            {"kind": "unmitigated"},
            {"kind": "social_distancing", "uniform_reduction": 0.45},
            {"kind": "social_distancing_plus", "uniform_reduction": 0.45, "elderly_reduction": 0.60},
            {"kind": "late_suppression", "suppression_reduction": 0.75, "trigger_threshold": 1.6},
            {"kind": "early_suppression", "suppression_reduction": 0.75, "trigger_threshold": 0.2},
        ],
        "epi": {"r0_target": 3.0, "dt": 0.25, "horizon": 365, "seed_infections": 20},
        "valuation": {"base_vsl_usd": 9.6e6, "reference_income_usd": 65760, "elasticity": 1.0,
                      "floor_usd": 0},
        "output_dir": "../results",
        "country_filter": "all",
        "table_countries": TABLE_COUNTRIES,
        "workers": 4,
        "write_trajectories": False,
    }
    with open(out / "run.json", "w") as f:
        json.dump(run, f, indent=2)
        f.write("\n")
    print(f"{len(rows)} countries written to {out}")


if __name__ == "__main__":
    main()
