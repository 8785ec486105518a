"""Regenerate the checked-in desk-scale fixtures. Run from the repo root:

    python3 fixtures/generate.py
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from bridgekit.io import write_dataset  # noqa: E402
from bridgekit.synth import make_weather_dataset  # noqa: E402

HERE = Path(__file__).resolve().parent

LAYOUT = """\
# fixed-width inventory layout: name,start,end,type[,scale]
structure_id,1,8,code
state,10,11,code
year_built,13,16,integer
latitude,18,25,real,0.000001
longitude,27,36,real,0.000001
material,38,39,code
design_type,41,42,code
deck_type,44,45,code
spans,47,49,integer
max_span,51,55,real,0.1
total_length,57,62,real,0.1
"""

MATERIALS = ["ST", "CO", "PS", "TI"]
DESIGNS = ["SG", "CU", "SL", "BB", "TB", "TR"]
DECKS = ["C1", "C2", "OG", "WD"]


def field(value: str, width: int) -> str:
    return value.rjust(width)


def make_line(sid, state, year, lat, lon, mat, design, deck, spans, max_span, total):
    parts = [
        field(sid, 8), field(state, 2), field(str(year), 4),
        field(str(int(round(lat * 1e6))), 8),
        field(str(int(round(lon * 1e6))), 10),
        field(mat, 2), field(design, 2), field(deck, 2),
        field(str(spans), 3),
        field(str(int(round(max_span * 10))), 5),
        field(str(int(round(total * 10))), 6),
    ]
    return " ".join(parts)


def make_sample() -> str:
    rng = np.random.default_rng(20160101)
    lines = []
    sid = 1000
    for i in range(24):  # California cluster
        lat = 36.95 + rng.uniform(0, 0.18)
        lon = -122.08 + rng.uniform(0, 0.2)
        year = int(rng.integers(1973, 1991))
        mat = MATERIALS[int(rng.integers(0, 4))]
        design = DESIGNS[int(rng.integers(0, 6))]
        deck = DECKS[int(rng.integers(0, 4))]
        spans = int(rng.integers(1, 8))
        max_span = float(rng.uniform(8, 55))
        total = max_span * spans * float(rng.uniform(0.7, 1.0))
        lines.append(make_line(f"CA{sid}", "CA", year, lat, lon, mat, design,
                               deck, spans, max_span, total))
        sid += 1
    for i in range(20):  # Virginia cluster
        lat = 38.82 + rng.uniform(0, 0.2)
        lon = -77.13 + rng.uniform(0, 0.2)
        year = int(rng.integers(1973, 1991))
        mat = MATERIALS[int(rng.integers(0, 4))]
        design = DESIGNS[int(rng.integers(0, 6))]
        deck = DECKS[int(rng.integers(0, 4))]
        spans = int(rng.integers(1, 6))
        max_span = float(rng.uniform(8, 45))
        total = max_span * spans * float(rng.uniform(0.7, 1.0))
        lines.append(make_line(f"VA{sid}", "VA", year, lat, lon, mat, design,
                               deck, spans, max_span, total))
        sid += 1
    # cleaning-rule cases
    lines.append(make_line("CA9901", "CA", 1969, 37.01, -121.99, "ST", "SG", "C1", 3, 30.0, 85.0))
    lines.append(make_line("VA9902", "VA", 1970, 38.90, -77.04, "CO", "SL", "C1", 1, 12.0, 12.0))
    lines.append(make_line("AK9903", "AK", 1984, 61.20, -149.90, "ST", "SG", "OG", 2, 40.0, 75.0))
    bad = make_line("CA9904", "CA", 1980, 37.05, -122.00, "CO", "CU", "C2", 2, 15.0, 28.0)
    lines.append(bad[:50] + "XX9.0" + bad[55:])  # digits corrupted in max_span
    lines.append(lines[0])  # duplicate structure_id
    # a record with an unknown span count (blank spans field)
    zero = make_line("VA9905", "VA", 1985, 38.95, -77.10, "PS", "BB", "C2", 1, 22.0, 22.0)
    lines.append(zero[:46] + "   " + zero[49:])
    return "\n".join(lines) + "\n"


def make_grid() -> str:
    lines = ["# lon lat pga (g)"]
    rng = np.random.default_rng(7)
    for lat100 in range(3680, 3730, 5):  # 36.80 .. 37.25
        for lon100 in range(-12220, -12170, 5):
            pga = 0.45 + 0.3 * rng.random()
            lines.append(f"{lon100 / 100:.2f} {lat100 / 100:.2f} {pga:.4f}")
    for lat100 in range(3875, 3915, 5):  # 38.75 .. 39.10
        for lon100 in range(-7725, -7675, 5):
            pga = 0.08 + 0.05 * rng.random()
            lines.append(f"{lon100 / 100:.2f} {lat100 / 100:.2f} {pga:.4f}")
    return "\n".join(lines) + "\n"


def make_costs() -> str:
    rng = np.random.default_rng(1976)
    cities = [
        ("San Francisco", 37.7749, -122.4194),
        ("Los Angeles", 34.0522, -118.2437),
        ("Richmond", 37.5407, -77.4360),
        ("Baltimore", 39.2904, -76.6122),
        ("Seattle", 47.6062, -122.3321),
    ]
    lines = ["city,lat,lon,year,steel,concrete"]
    for name, lat, lon in cities:
        for year in range(1970, 1992):
            # sparse table: some (city, year) pairs are deliberately absent
            if rng.random() < 0.15:
                continue
            steel = 280 + 18 * (year - 1970) + rng.uniform(-25, 25)
            conc = 58 + 3.1 * (year - 1970) + rng.uniform(-6, 6)
            lines.append(f"{name},{lat},{lon},{year},{steel:.2f},{conc:.2f}")
    return "\n".join(lines) + "\n"


def make_deflator() -> str:
    lines = ["year,multiplier"]
    for year in range(1970, 1992):
        # rough CPI-style multiplier to 2016 dollars
        mult = 6.2 * (0.95 ** (year - 1970))
        lines.append(f"{year},{mult:.4f}")
    return "\n".join(lines) + "\n"


def make_climate() -> str:
    rows = [
        ("GA", 17.5, 71.0, 1270.0, 2.0),
        ("MN", 5.9, 70.0, 690.0, 132.0),
        ("PA", 9.9, 68.0, 1070.0, 97.0),
        ("VA", 13.0, 69.0, 1120.0, 38.0),
        ("WA", 9.1, 73.0, 970.0, 76.0),
    ]
    lines = ["state,temp,humidity,rain,snow"]
    for r in rows:
        lines.append(",".join(str(v) for v in r))
    return "\n".join(lines) + "\n"


def make_experiment_grid() -> str:
    return """\
# per-state experiment grid over the synthetic five-state inventory
[nbi3]
attrs = deck_type,max_span_length,avg_span_length
spec = dtree
k = 10
seed = 7

[nbi4]
attrs = material,deck_type,max_span_length,avg_span_length
spec = dtree
k = 10
seed = 7
baseline = nbi3

[nbi4_hazard]
attrs = material,deck_type,max_span_length,avg_span_length,seismic_pga
spec = dtree
k = 10
seed = 7
baseline = nbi4

[nbi4_hazard_resampled]
attrs = material,deck_type,max_span_length,avg_span_length,seismic_pga
spec = dtree
bias = 0.10
k = 10
seed = 7
baseline = nbi4_hazard
"""


def main() -> None:
    (HERE / "nbi_layout.cfg").write_text(LAYOUT, encoding="utf-8")
    (HERE / "nbi_sample.dat").write_text(make_sample(), encoding="utf-8")
    (HERE / "seismic_grid.dat").write_text(make_grid(), encoding="utf-8")
    (HERE / "costs.csv").write_text(make_costs(), encoding="utf-8")
    (HERE / "deflator.csv").write_text(make_deflator(), encoding="utf-8")
    (HERE / "climate.csv").write_text(make_climate(), encoding="utf-8")
    (HERE / "experiment_grid.cfg").write_text(make_experiment_grid(), encoding="utf-8")
    write_dataset(make_weather_dataset(), HERE / "weather.csv", HERE / "weather.schema")
    print(f"fixtures written to {HERE}")


if __name__ == "__main__":
    main()
