"""Generated fixtures: desk-scale datasets with known, planted structure.

The bridge fixture plants the effects the experiment protocols are meant to
surface: per-state rule differences (so pooled models trail per-state
models), a hazard override that only varies within one state, material as a
load-bearing attribute everywhere, and two rare classes confined to overlap
regions where a more balanced training sample flips the local majority.
Tests and demos treat the generator's parameters as the ground truth oracle.
"""

from __future__ import annotations

import numpy as np

from .data import (
    NOMINAL,
    NUMERIC,
    ROLE_CLASS,
    ROLE_FEATURE,
    ROLE_META,
    AttributeSchema,
    Dataset,
)
from .evaluate import ClimateTable

CLASSES = ("Stringer", "Culvert", "Slab", "BoxBeam", "TeeBeam", "Truss", "Arch", "Frame")
MATERIALS = ("steel", "concrete", "prestressed", "timber")
DECKS = ("cast_in_place", "precast_panels", "open_grating", "wood_plank")
STATES = ("GA", "MN", "PA", "VA", "WA")

#: the two classes rare enough that plain training under-predicts them
MINORITY_CLASSES = ("Arch", "Frame")
#: the state whose hazard values actually vary (elsewhere they are near-constant)
HIGH_HAZARD_STATE = "WA"

_CLS = {c: i for i, c in enumerate(CLASSES)}

# per-state generative parameters ------------------------------------------------

_MATERIAL_P = {
    "GA": (0.28, 0.42, 0.16, 0.14),
    "MN": (0.30, 0.38, 0.15, 0.17),
    "PA": (0.36, 0.36, 0.16, 0.12),
    "VA": (0.30, 0.40, 0.17, 0.13),
    "WA": (0.26, 0.44, 0.16, 0.14),
}

_DECK_P = {  # per material
    "steel": (0.50, 0.25, 0.20, 0.05),
    "concrete": (0.55, 0.40, 0.03, 0.02),
    "prestressed": (0.35, 0.60, 0.03, 0.02),
    "timber": (0.15, 0.10, 0.00, 0.75),
}

_SPAN_LOGNORM = {  # per material: (mu, sigma) of log max span
    "steel": (3.1, 0.50),
    "concrete": (2.6, 0.50),
    "prestressed": (2.9, 0.50),
    "timber": (2.2, 0.40),
}

_T_LONG = {"GA": 36.0, "MN": 40.0, "PA": 34.0, "VA": 38.0, "WA": 36.0}
_T_SHORT = {"GA": 7.0, "MN": 8.5, "PA": 6.5, "VA": 7.5, "WA": 7.0}
_T_ARCH = 55.0
_T_PGA = 0.35

_STEEL_SHORT = {"GA": "Stringer", "MN": "Stringer", "PA": "TeeBeam",
                "VA": "Stringer", "WA": "Stringer"}
_CONC_CIP = {"GA": "Slab", "MN": "Slab", "PA": "Slab", "VA": "TeeBeam", "WA": "Slab"}
_CONC_PRE = {"GA": "BoxBeam", "MN": "Slab", "PA": "BoxBeam", "VA": "BoxBeam", "WA": "BoxBeam"}
_PRE_SHORT = {"GA": "Slab", "MN": "Stringer", "PA": "Slab", "VA": "Slab", "WA": "Stringer"}
_TIMBER_WOOD = {"GA": "Stringer", "MN": "TeeBeam", "PA": "Stringer",
                "VA": "Stringer", "WA": "TeeBeam"}

_NOISE_RATE = 0.05
_NOISE_P = (0.392, 0.21, 0.15, 0.12, 0.07, 0.05, 0.004, 0.004)

_FRAME_BAND = (9.8, 11.8)   # avg span band where prestressed bridges may be frames
_FRAME_P = 0.30
_ARCH_P = 0.30
#: open-grating decks tolerate shorter spans before a truss is preferred
_GRATING_TRUSS_DISCOUNT = 8.0


def bridge_rule(state: str, material: str, deck: str, max_span: float,
                avg_span: float, pga: float, u: float) -> str:
    """Noise-free design-type rule; ``u`` in [0,1) decides the overlap regions."""
    if material == "steel":
        if max_span > _T_ARCH:
            return "Arch" if u < _ARCH_P else "Truss"
        t_long = _T_LONG[state]
        if deck == "open_grating":
            t_long -= _GRATING_TRUSS_DISCOUNT
        if max_span > t_long:
            return "Truss"
        return _STEEL_SHORT[state]
    if material == "concrete":
        if avg_span <= _T_SHORT[state]:
            return "Culvert"
        if pga > _T_PGA:
            return "BoxBeam"  # seismic detailing: only triggers where pga varies
        if deck == "cast_in_place":
            return _CONC_CIP[state]
        if deck == "precast_panels":
            return _CONC_PRE[state]
        return "Slab"
    if material == "prestressed":
        if _FRAME_BAND[0] < avg_span <= _FRAME_BAND[1]:
            return "Frame" if u < _FRAME_P else "BoxBeam"
        if avg_span > _FRAME_BAND[1]:
            return "BoxBeam"
        return _PRE_SHORT[state]
    # timber
    if deck == "wood_plank":
        return _TIMBER_WOOD[state]
    return "Stringer"


def bridge_schema() -> list[AttributeSchema]:
    return [
        AttributeSchema("state", NOMINAL, STATES, ROLE_META),
        AttributeSchema("material", NOMINAL, MATERIALS, ROLE_FEATURE),
        AttributeSchema("deck_type", NOMINAL, DECKS, ROLE_FEATURE),
        AttributeSchema("max_span_length", NUMERIC, (), ROLE_FEATURE),
        AttributeSchema("avg_span_length", NUMERIC, (), ROLE_FEATURE),
        AttributeSchema("seismic_pga", NUMERIC, (), ROLE_FEATURE),
        AttributeSchema("design_type", NOMINAL, CLASSES, ROLE_CLASS),
    ]


def _draw_pga(state: str, n: int, rng: np.random.Generator) -> np.ndarray:
    if state == HIGH_HAZARD_STATE:
        low = rng.uniform(0.04, 0.22, size=n)
        high = rng.uniform(0.38, 0.75, size=n)
        pick = rng.random(n) < 0.5
        return np.where(pick, high, low)
    mean, sd = {"GA": (0.080, 0.007), "MN": (0.052, 0.005),
                "PA": (0.105, 0.007), "VA": (0.138, 0.009)}[state]
    return np.clip(rng.normal(mean, sd, size=n), 0.01, None)


def make_bridge_dataset(n: int = 20000, seed: int = 0,
                        noise_rate: float = _NOISE_RATE,
                        quantize_spans: bool = True) -> Dataset:
    """The synthetic five-state bridge inventory (noise-free rule + label noise).

    Spans snap to standard increments (0.5 m maximum span, 0.25 m average)
    unless ``quantize_spans`` is off; continuous spans make tree thresholds
    jittery, which is the regime where the network's noise tolerance shows.
    """
    rng = np.random.default_rng(seed)
    schema = bridge_schema()
    per_state = [n // len(STATES)] * len(STATES)
    per_state[-1] += n - sum(per_state)

    cols_state, cols_mat, cols_deck = [], [], []
    cols_max, cols_avg, cols_pga, cols_y = [], [], [], []
    for si, state in enumerate(STATES):
        m = per_state[si]
        mat = rng.choice(len(MATERIALS), size=m, p=_MATERIAL_P[state])
        deck = np.empty(m, dtype=np.int64)
        max_span = np.empty(m)
        for mi, mname in enumerate(MATERIALS):
            mask = mat == mi
            k = int(mask.sum())
            deck[mask] = rng.choice(len(DECKS), size=k, p=_DECK_P[mname])
            mu, sigma = _SPAN_LOGNORM[mname]
            max_span[mask] = np.exp(rng.normal(mu, sigma, size=k))
        avg_span = max_span * rng.beta(8.0, 2.0, size=m)
        pga = _draw_pga(state, m, rng)
        u = rng.random(m)

        y = np.empty(m, dtype=np.int64)
        for i in range(m):
            label = bridge_rule(state, MATERIALS[mat[i]], DECKS[deck[i]],
                                float(max_span[i]), float(avg_span[i]),
                                float(pga[i]), float(u[i]))
            y[i] = _CLS[label]
        noisy = rng.random(m) < noise_rate
        y[noisy] = rng.choice(len(CLASSES), size=int(noisy.sum()), p=_NOISE_P)

        cols_state.append(np.full(m, si, dtype=np.int32))
        cols_mat.append(mat)
        cols_deck.append(deck)
        if quantize_spans:
            # spans come in standard increments, like engineered girder lengths
            cols_max.append(np.round(max_span * 2.0) / 2.0)
            cols_avg.append(np.round(avg_span * 4.0) / 4.0)
        else:
            cols_max.append(np.round(max_span, 3))
            cols_avg.append(np.round(avg_span, 3))
        cols_pga.append(np.round(pga, 4))
        cols_y.append(y)

    return Dataset(schema, [
        np.concatenate(cols_state),
        np.concatenate(cols_mat),
        np.concatenate(cols_deck),
        np.concatenate(cols_max),
        np.concatenate(cols_avg),
        np.concatenate(cols_pga),
        np.concatenate(cols_y),
    ])


# -- other fixtures ---------------------------------------------------------------


def make_weather_dataset() -> Dataset:
    """The classic 14-instance play/don't-play table."""
    schema = [
        AttributeSchema("outlook", NOMINAL, ("sunny", "overcast", "rainy")),
        AttributeSchema("temperature", NOMINAL, ("hot", "mild", "cool")),
        AttributeSchema("humidity", NOMINAL, ("high", "normal")),
        AttributeSchema("windy", NOMINAL, ("false", "true")),
        AttributeSchema("play", NOMINAL, ("yes", "no"), ROLE_CLASS),
    ]
    raw = [
        ("sunny", "hot", "high", "false", "no"),
        ("sunny", "hot", "high", "true", "no"),
        ("overcast", "hot", "high", "false", "yes"),
        ("rainy", "mild", "high", "false", "yes"),
        ("rainy", "cool", "normal", "false", "yes"),
        ("rainy", "cool", "normal", "true", "no"),
        ("overcast", "cool", "normal", "true", "yes"),
        ("sunny", "mild", "high", "false", "no"),
        ("sunny", "cool", "normal", "false", "yes"),
        ("rainy", "mild", "normal", "false", "yes"),
        ("sunny", "mild", "normal", "true", "yes"),
        ("overcast", "mild", "high", "true", "yes"),
        ("overcast", "hot", "normal", "false", "yes"),
        ("rainy", "mild", "high", "true", "no"),
    ]
    rows = [[a.index_of(v) for a, v in zip(schema, row)] for row in raw]
    return Dataset.from_rows(schema, rows)


def make_k2_fixture(n: int = 5000, seed: int = 0) -> Dataset:
    """Samples from a 3-node network: class -> a, class -> b, and a -> b."""
    rng = np.random.default_rng(seed)
    schema = [
        AttributeSchema("a", NOMINAL, ("a0", "a1")),
        AttributeSchema("b", NOMINAL, ("b0", "b1")),
        AttributeSchema("cls", NOMINAL, ("c0", "c1"), ROLE_CLASS),
    ]
    y = (rng.random(n) < 0.5).astype(np.int32)
    p_a = np.where(y == 0, 0.25, 0.75)
    a = (rng.random(n) < p_a).astype(np.int32)
    p_b = np.select(
        [(y == 0) & (a == 0), (y == 0) & (a == 1), (y == 1) & (a == 0)],
        [0.20, 0.70, 0.35],
        default=0.85,
    )
    b = (rng.random(n) < p_b).astype(np.int32)
    return Dataset(schema, [a, b, y])


def make_consistent_dataset(n: int = 300, seed: int = 0) -> Dataset:
    """Nominal data whose class is a deterministic function of the features.

    Every distinct feature vector appears at least twice, so a tree with the
    default minimum leaf size can still isolate it.
    """
    rng = np.random.default_rng(seed)
    arity = 3
    n_attrs = 4
    schema = [AttributeSchema(f"x{j}", NOMINAL, tuple(f"v{k}" for k in range(arity)))
              for j in range(n_attrs)]
    schema.append(AttributeSchema("cls", NOMINAL, ("c0", "c1", "c2"), ROLE_CLASS))
    table = rng.integers(0, 3, size=arity ** n_attrs)

    rows = []
    while len(rows) < n:
        vec = rng.integers(0, arity, size=n_attrs)
        code = 0
        for v in vec:
            code = code * arity + int(v)
        row = [int(v) for v in vec] + [int(table[code])]
        rows.append(row)
        rows.append(list(row))
    return Dataset.from_rows(schema, rows[:n + (n % 2)])


def random_small_dataset(rng: np.random.Generator, max_n: int = 40,
                         missing_rate: float = 0.0) -> Dataset:
    """A small random nominal dataset for oracle sweeps."""
    n = int(rng.integers(8, max_n + 1))
    n_attrs = int(rng.integers(2, 5))
    n_classes = int(rng.integers(2, 4))
    schema = []
    for j in range(n_attrs):
        arity = int(rng.integers(2, 5))
        schema.append(AttributeSchema(f"a{j}", NOMINAL,
                                      tuple(f"v{k}" for k in range(arity))))
    schema.append(AttributeSchema("cls", NOMINAL,
                                  tuple(f"c{k}" for k in range(n_classes)), ROLE_CLASS))
    rows = []
    for _ in range(n):
        row = []
        for a in schema[:-1]:
            if missing_rate > 0 and rng.random() < missing_rate:
                from .data import MISSING
                row.append(MISSING)
            else:
                row.append(int(rng.integers(0, a.arity)))
        row.append(int(rng.integers(0, n_classes)))
        rows.append(row)
    return Dataset.from_rows(schema, rows)


def make_independent_climate(states: list[str], seed: int = 0) -> ClimateTable:
    """Climate columns drawn independently of anything else."""
    rng = np.random.default_rng(seed)
    rows = {}
    for s in states:
        rows[s] = {
            "temp": float(rng.uniform(5, 25)),
            "humidity": float(rng.uniform(40, 90)),
            "rain": float(rng.uniform(300, 1600)),
            "snow": float(rng.uniform(0, 300)),
        }
    return ClimateTable(rows)
