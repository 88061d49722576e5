#!/usr/bin/env python3
"""Regenerate the bundled test fixtures (deterministic, seeded).

Three small survey tables mimicking the schemas of the real datasets, with
planted demographic effects so regressions and trees have signal to find.
Total rows: 400 + 400 + 200 = 1000.
"""

import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "crates" / "cli" / "fixtures"

TRAITS = ["E", "N", "A", "C", "O"]

# Marker keying per trait: True = positively keyed.
KEYS = {
    "E": [True, False, True, False, True, False, True, False, True, False],
    "N": [True, False, True, False, True, True, True, True, True, True],
    "A": [False, True, False, True, False, True, False, True, True, True],
    "C": [True, False, True, False, True, False, True, False, True, True],
    "O": [True, False, True, False, True, False, True, True, True, True],
}


def items_for_score(rng, trait, target_mean):
    """Ten item responses whose keyed sum lands near target_mean."""
    per_item = target_mean / 10.0
    out = []
    for pos in KEYS[trait]:
        keyed = min(5, max(1, round(per_item + rng.uniform(-1.2, 1.2))))
        out.append(keyed if pos else 6 - keyed)
    return out


def sample1(rng):
    header = ["race", "age", "engnat", "gender", "hand", "source", "country"]
    for t in TRAITS:
        header += [f"{t}{i}" for i in range(1, 11)]
    rows = [header]
    countries = ["US", "US", "US", "GB", "GB", "CA", "IN", "AU", "DE", "PH"]
    for i in range(400):
        gender = [1, 2, 1, 2, 1, 2, 2, 1, 3, 0][i % 10]
        age = rng.choice([16, 19, 22, 28, 33, 38, 45, 52, 58, 64, 70, 15, 30])
        if i % 97 == 0:
            age = rng.choice([0, 7, 110])  # out-of-range ages
        engnat = rng.choice([1, 1, 2])
        hand = rng.choice([1, 1, 1, 2, 3])
        race = rng.randint(1, 13)
        growth = 1 if age <= 24 else 2 if age <= 40 else 3 if age <= 60 else 4
        if not 12 <= age <= 100:
            growth = 0
        means = {
            "E": 26 + 1.2 * growth + (4.0 if gender == 2 else 0.0),
            "N": 31 + (1.5 if gender == 2 else 0.0) - 0.4 * growth,
            "A": 27 - 1.0 * growth - (2.0 if gender == 2 else 0.0),
            "C": 28 + 1.5 * growth,
            "O": 35 + 0.5 * growth + (0.8 if hand == 3 else 0.0),
        }
        row = [race, age, engnat, gender, hand, 1, rng.choice(countries)]
        for t in TRAITS:
            items = items_for_score(rng, t, means[t] + rng.gauss(0, 2))
            if i % 113 == 0 and t == "E":
                items[3] = 0  # invalid item -> E missing for this row
            row += items
        rows.append(row)
    return rows


def sample2(rng):
    header = [
        "country", "age", "education", "urban", "gender", "engnat", "hand",
        "religion", "orientation", "race", "voted", "married", "familysize",
    ]
    for t in TRAITS:
        header += [f"{t}{i}" for i in range(1, 11)]
    rows = [header]
    for i in range(400):
        gender = [1, 2, 1, 2, 1, 2, 2, 1, 3, 1][i % 10]
        age = rng.choice([18, 21, 26, 31, 36, 44, 50, 57, 63, 68])
        education = rng.randint(1, 4)
        urban = rng.randint(1, 3)
        engnat = rng.choice([1, 1, 2])
        hand = rng.choice([1, 1, 1, 2, 3])
        religion = rng.randint(1, 12)
        orientation = rng.randint(1, 5)
        race = rng.randint(1, 7)
        voted = rng.choice([1, 2])
        married = rng.choice([1, 1, 2, 2, 3])
        familysize = rng.choice([1, 2, 3, 4, 5, 6, 8, 12])
        if i % 89 == 0:
            familysize = 0
        growth = 1 if age <= 24 else 2 if age <= 40 else 3 if age <= 60 else 4
        means = {
            "E": 26 + 1.2 * growth + (4.0 if gender == 2 else 0.0) - 0.8 * voted,
            "N": 31 + (1.5 if gender == 2 else 0.0) - 0.4 * growth,
            "A": 27 - 1.0 * growth - (2.0 if gender == 2 else 0.0),
            "C": 26 + 1.5 * growth + 1.0 * education + 0.7 * married,
            "O": 34 + 0.5 * growth + 0.6 * education,
        }
        row = [
            rng.choice(["US", "US", "GB", "CA", "IN"]), age, education, urban,
            gender, engnat, hand, religion, orientation, race, voted, married,
            familysize,
        ]
        for t in TRAITS:
            row += items_for_score(rng, t, means[t] + rng.gauss(0, 2))
        rows.append(row)
    return rows


def sample3(rng):
    header = []
    for prefix in ["EXT", "EST", "AGR", "CSN", "OPN"]:
        header += [f"{prefix}{i}" for i in range(1, 11)]
    header.append("country")
    rows = [header]
    countries = ["US"] * 8 + ["GB"] * 4 + ["CA"] * 3 + ["IN"] * 2 + ["AU", "DE", "NO"]
    trait_of = {"EXT": "E", "EST": "N", "AGR": "A", "CSN": "C", "OPN": "O"}
    for i in range(200):
        country = countries[i % len(countries)]
        shift = {"US": 0.0, "GB": -1.0, "CA": 0.5, "IN": 2.0}.get(country, 1.0)
        base = {"E": 29.5, "N": 32.0, "A": 23.9, "C": 32.4, "O": 36.6}
        row = []
        for prefix in ["EXT", "EST", "AGR", "CSN", "OPN"]:
            t = trait_of[prefix]
            row += items_for_score(rng, t, base[t] + shift + rng.gauss(0, 2))
        row.append(country)
        rows.append(row)
    return rows


def write_tsv(name, rows):
    OUT.mkdir(parents=True, exist_ok=True)
    path = OUT / name
    with open(path, "w", newline="") as fh:
        for row in rows:
            fh.write("\t".join(str(c) for c in row))
            fh.write("\n")
    print(f"wrote {path} ({len(rows) - 1} rows)")


def main():
    rng = random.Random(20240817)
    write_tsv("sample1.tsv", sample1(rng))
    write_tsv("sample2.tsv", sample2(rng))
    write_tsv("sample3.tsv", sample3(rng))


if __name__ == "__main__":
    main()
