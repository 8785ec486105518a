"""Fixed-width inventory ingestion and hazard/cost fusion.

A layout schema (external configuration, one line per field) drives the
parser, so other fixed-width inventories can be ingested without code
changes. Cleaning rules: whole lines with malformed fields are rejected,
construction years before 1972 can be filtered, rows in excluded regions
dropped, and duplicate structure keys de-duplicated; every dropped line is
accounted for exactly once in the reject report.

Fusion joins a gridded peak-ground-acceleration table by nearest grid point
and a per-city material-cost table by great-circle-nearest city at the
completion year.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
import numpy as np

from .data import (
    MISSING,
    NOMINAL,
    NUMERIC,
    ROLE_CLASS,
    ROLE_FEATURE,
    ROLE_META,
    AttributeSchema,
    DataError,
    Dataset,
)

log = logging.getLogger(__name__)

EARTH_RADIUS_KM = 6371.0
#: penalty (km-equivalent) per year of gap when falling back to another cost source
YEAR_GAP_PENALTY_KM = 50.0

FIELD_TYPES = ("integer", "real", "code")

REASON_MALFORMED = "malformed-field"
REASON_PRE_1971 = "pre-1971"
REASON_EXCLUDED = "excluded-region"
REASON_DUPLICATE = "duplicate"


@dataclass(frozen=True)
class LayoutField:
    name: str
    start: int  # 1-indexed, inclusive
    end: int    # inclusive
    type: str
    scale: float = 1.0

    def __post_init__(self):
        if self.type not in FIELD_TYPES:
            raise DataError(f"field {self.name!r}: unknown type {self.type!r}")
        if self.start < 1 or self.end < self.start:
            raise DataError(f"field {self.name!r}: bad span {self.start}..{self.end}")


@dataclass(frozen=True)
class LayoutSchema:
    fields: tuple[LayoutField, ...]

    def __post_init__(self):
        names = [f.name for f in self.fields]
        if len(set(names)) != len(names):
            raise DataError("layout field names must be unique")
        spans = sorted((f.start, f.end, f.name) for f in self.fields)
        for (s1, e1, n1), (s2, e2, n2) in zip(spans, spans[1:]):
            if s2 <= e1:
                raise DataError(f"layout fields {n1!r} and {n2!r} overlap")

    @property
    def record_length(self) -> int:
        return max(f.end for f in self.fields)

    @classmethod
    def parse(cls, text: str) -> "LayoutSchema":
        fields = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) not in (4, 5):
                raise DataError(f"layout line {lineno}: expected "
                                "'name,start,end,type[,scale]'")
            try:
                scale = float(parts[4]) if len(parts) == 5 else 1.0
                fields.append(LayoutField(parts[0], int(parts[1]), int(parts[2]),
                                          parts[3], scale))
            except ValueError as exc:
                raise DataError(f"layout line {lineno}: {exc}") from None
        if not fields:
            raise DataError("layout defines no fields")
        return cls(tuple(fields))

    @classmethod
    def load(cls, path: str | Path) -> "LayoutSchema":
        return cls.parse(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class RejectedLine:
    line_number: int
    raw: str
    reason: str


@dataclass
class RejectReport:
    rejects: list[RejectedLine] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def add(self, line_number: int, raw: str, reason: str) -> None:
        self.rejects.append(RejectedLine(line_number, raw, reason))

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for r in self.rejects:
            out[r.reason] = out.get(r.reason, 0) + 1
        return out

    def to_csv_text(self) -> str:
        lines = ["line,reason,raw"]
        for r in self.rejects:
            raw = r.raw.replace('"', '""')
            lines.append(f'{r.line_number},{r.reason},"{raw}"')
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ParseOptions:
    """Cleaning and role assignment applied while parsing.

    ``class_field`` becomes the class attribute; ``meta_fields`` keep their
    values but are not offered to models. With ``post_1971`` set, rows whose
    ``year_field`` is 1971 or earlier are rejected. ``exclude_states`` drops
    listed region codes; ``dedupe_on`` drops repeats of a key field.
    """

    class_field: str = "design_type"
    meta_fields: tuple[str, ...] = ()
    post_1971: bool = False
    year_field: str = "year_built"
    exclude_states: tuple[str, ...] = ()
    state_field: str = "state"
    dedupe_on: str | None = None


def parse_nbi(path: str | Path, layout: LayoutSchema,
              opts: ParseOptions | None = None) -> tuple[Dataset, RejectReport]:
    """Parse a fixed-width inventory file into a dataset plus a reject report.

    Accepted + rejected always equals the number of data lines. Numeric
    fields apply their declared scale; code fields become nominal attributes
    whose categories are collected in first-appearance order, so parsing is
    deterministic and order-preserving.
    """
    opts = opts or ParseOptions()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None

    names = [f.name for f in layout.fields]
    if opts.class_field not in names:
        raise DataError(f"layout has no class field {opts.class_field!r}")

    report = RejectReport()
    values_seen: dict[str, dict[str, int]] = {f.name: {} for f in layout.fields
                                              if f.type == "code"}
    value_order: dict[str, list[str]] = {name: [] for name in values_seen}
    rows: list[list] = []
    seen_keys: set[str] = set()

    lines = text.splitlines()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        if len(line) < layout.record_length:
            report.add(lineno, line, REASON_MALFORMED)
            continue
        row: list = []
        bad = False
        raw_by_name: dict[str, str] = {}
        for f in layout.fields:
            cell = line[f.start - 1:f.end]
            raw_by_name[f.name] = cell.strip()
            if f.type == "code":
                row.append(cell.strip())
                continue
            stripped = cell.strip()
            if not stripped:
                row.append(MISSING)
                continue
            try:
                if f.type == "integer":
                    value = int(stripped) * f.scale
                else:
                    value = float(stripped) * f.scale
            except ValueError:
                bad = True
                break
            row.append(value)
        if bad:
            report.add(lineno, line, REASON_MALFORMED)
            continue

        if opts.post_1971:
            year = raw_by_name.get(opts.year_field, "")
            try:
                year_val = int(year) if year else None
            except ValueError:
                year_val = None
            if year_val is not None and year_val <= 1971:
                report.add(lineno, line, REASON_PRE_1971)
                continue
        if opts.exclude_states:
            state = raw_by_name.get(opts.state_field, "")
            if state in opts.exclude_states:
                report.add(lineno, line, REASON_EXCLUDED)
                continue
        if opts.dedupe_on is not None:
            key = raw_by_name.get(opts.dedupe_on, "")
            if key in seen_keys:
                report.add(lineno, line, REASON_DUPLICATE)
                continue
            seen_keys.add(key)

        for f, cell in zip(layout.fields, row):
            if f.type == "code":
                label = cell
                if label == "":
                    continue
                table = values_seen[f.name]
                if label not in table:
                    table[label] = len(table)
                    value_order[f.name].append(label)
        rows.append(row)

    schema = []
    for f in layout.fields:
        if f.name == opts.class_field:
            role = ROLE_CLASS
        elif f.name in opts.meta_fields:
            role = ROLE_META
        else:
            role = ROLE_FEATURE
        if f.type == "code":
            values = tuple(value_order[f.name]) or ("__none__",)
            schema.append(AttributeSchema(f.name, NOMINAL, values, role))
        else:
            schema.append(AttributeSchema(f.name, NUMERIC, (), role))

    encoded_rows = []
    for row in rows:
        out = []
        for f, cell in zip(layout.fields, row):
            if f.type == "code":
                out.append(MISSING if cell == "" else values_seen[f.name][cell])
            else:
                out.append(cell)
        encoded_rows.append(out)

    accepted = Dataset.from_rows(schema, encoded_rows)
    data_lines = sum(1 for l in lines if l.strip())
    if len(accepted) + len(report.rejects) != data_lines:
        raise AssertionError("accepted + rejected does not equal input line count")
    return accepted, report


# -- derived features ----------------------------------------------------------


def derive_average_span(total_length, span_count):
    """Total structure length divided by the span count.

    A zero or missing span count yields MISSING (the record is retained),
    with a warning; single-span records return the full length.
    """
    if total_length is MISSING or span_count is MISSING:
        return MISSING
    if span_count < 1:
        log.warning("average span undefined: span count %s", span_count)
        return MISSING
    if total_length <= 0:
        log.warning("average span undefined: total length %s", total_length)
        return MISSING
    return float(total_length) / float(span_count)


def add_average_span(d: Dataset, length_attr: str = "total_length",
                     spans_attr: str = "spans", name: str = "avg_span_length") -> Dataset:
    """Append the derived average-span attribute to every instance."""
    length = d.column(length_attr)
    spans = d.column(spans_attr)
    out = np.full(len(d), np.nan)
    valid = (~np.isnan(length)) & (~np.isnan(spans)) & (spans >= 1) & (length > 0)
    out[valid] = length[valid] / spans[valid]
    n_bad = int((~valid & ~(np.isnan(length) | np.isnan(spans))).sum())
    if n_bad:
        log.warning("average span undefined for %d records", n_bad)
    return d.add_column(AttributeSchema(name, NUMERIC, (), ROLE_FEATURE), out)


# -- seismic grid ---------------------------------------------------------------


@dataclass(frozen=True)
class SeismicGrid:
    """Peak ground acceleration at regular lat/lon grid points."""

    resolution: float
    cells: dict[tuple[int, int], float]

    def __post_init__(self):
        if self.resolution <= 0:
            raise DataError("grid resolution must be positive")
        if any(v < 0 for v in self.cells.values()):
            raise DataError("accelerations must be non-negative")

    @classmethod
    def parse(cls, text: str, resolution: float = 0.05) -> "SeismicGrid":
        """Whitespace-separated ``lon lat pga`` lines."""
        cells = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise DataError(f"grid line {lineno}: expected 'lon lat pga'")
            lon, lat, pga = (float(p) for p in parts)
            cells[(snap_index(lat, resolution), snap_index(lon, resolution))] = pga
        if not cells:
            raise DataError("seismic grid is empty")
        return cls(resolution, cells)

    @classmethod
    def load(cls, path: str | Path, resolution: float = 0.05) -> "SeismicGrid":
        return cls.parse(Path(path).read_text(encoding="utf-8"), resolution)

    def lookup(self, lat: float, lon: float) -> float | None:
        """Acceleration at the nearest grid point, or None outside the grid."""
        key = (snap_index(lat, self.resolution), snap_index(lon, self.resolution))
        return self.cells.get(key)


def snap_index(coord: float, resolution: float) -> int:
    """Nearest grid index; exact halfway points round toward the larger coordinate."""
    return int(math.floor(coord / resolution + 0.5))


def attach_seismic(d: Dataset, grid: SeismicGrid, lat_attr: str = "latitude",
                   lon_attr: str = "longitude", name: str = "seismic_pga") -> Dataset:
    """Add the nearest-grid-point acceleration as a numeric feature.

    Instances outside the grid (or with missing coordinates) get MISSING and
    are reported in a warning.
    """
    if not grid.cells:
        raise DataError("seismic grid is empty")
    lat = d.column(lat_attr)
    lon = d.column(lon_attr)
    out = np.full(len(d), np.nan)
    outside = 0
    for i in range(len(d)):
        if np.isnan(lat[i]) or np.isnan(lon[i]):
            continue
        v = grid.lookup(float(lat[i]), float(lon[i]))
        if v is None:
            outside += 1
            continue
        out[i] = v
    if outside:
        log.warning("attach_seismic: %d instances outside the grid (excluded region); "
                    "acceleration left MISSING", outside)
    return d.add_column(AttributeSchema(name, NUMERIC, (), ROLE_FEATURE), out)


# -- material costs ---------------------------------------------------------------


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance on a spherical Earth (radius 6371 km)."""
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(math.sqrt(a))


@dataclass(frozen=True)
class CostTable:
    """Steel and concrete unit costs per (city, year), in 2016 dollars."""

    cities: tuple[tuple[str, float, float], ...]  # (name, lat, lon)
    entries: dict[tuple[str, int], tuple[float, float]]  # (city, year) -> (steel, concrete)

    def __post_init__(self):
        for (city, year), (steel, conc) in self.entries.items():
            if steel <= 0 or conc <= 0:
                raise DataError(f"non-positive cost for {city} {year}")

    @classmethod
    def load(cls, path: str | Path, deflator: dict[int, float] | None = None) -> "CostTable":
        """CSV columns: city, lat, lon, year, steel, concrete.

        A deflator table (year -> multiplier) converts nominal dollars to
        2016 dollars at load time.
        """
        cities: dict[str, tuple[float, float]] = {}
        entries: dict[tuple[str, int], tuple[float, float]] = {}
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        header = [h.strip() for h in lines[0].split(",")]
        if header != ["city", "lat", "lon", "year", "steel", "concrete"]:
            raise DataError("cost table header must be city,lat,lon,year,steel,concrete")
        for line in lines[1:]:
            if not line.strip():
                continue
            city, lat, lon, year, steel, conc = [c.strip() for c in line.split(",")]
            year = int(year)
            mult = 1.0 if deflator is None else deflator.get(year, None)
            if mult is None:
                raise DataError(f"deflator table has no multiplier for year {year}")
            cities[city] = (float(lat), float(lon))
            entries[(city, year)] = (float(steel) * mult, float(conc) * mult)
        if not entries:
            raise DataError("cost table is empty")
        return cls(tuple((n, la, lo) for n, (la, lo) in cities.items()), entries)

    def nearest_city(self, lat: float, lon: float) -> str:
        best, best_d = None, math.inf
        for name, clat, clon in self.cities:
            dist = haversine_km(lat, lon, clat, clon)
            if dist < best_d:
                best, best_d = name, dist
        return best

    def lookup(self, lat: float, lon: float, year: int) -> tuple[float, float]:
        """Costs from the nearest city at the given year.

        When that (city, year) is absent, the nearest available source wins,
        ranked by distance in km plus 50 km per year of gap, so the join is
        deterministic.
        """
        city = self.nearest_city(lat, lon)
        if (city, year) in self.entries:
            return self.entries[(city, year)]
        coords = {name: (la, lo) for name, la, lo in self.cities}
        best, best_penalty = None, math.inf
        for (ecity, eyear), costs in sorted(self.entries.items()):
            la, lo = coords[ecity]
            penalty = haversine_km(lat, lon, la, lo) + YEAR_GAP_PENALTY_KM * abs(eyear - year)
            if penalty < best_penalty:
                best, best_penalty = costs, penalty
        return best


def load_deflator(path: str | Path) -> dict[int, float]:
    """CSV columns: year, multiplier (to 2016 dollars)."""
    out = {}
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = [h.strip() for h in lines[0].split(",")]
    if header != ["year", "multiplier"]:
        raise DataError("deflator header must be year,multiplier")
    for line in lines[1:]:
        if not line.strip():
            continue
        year, mult = line.split(",")
        out[int(year)] = float(mult)
    return out


def attach_costs(d: Dataset, costs: CostTable, lat_attr: str = "latitude",
                 lon_attr: str = "longitude", year_attr: str = "year_built") -> Dataset:
    """Add steel cost, concrete cost, and their ratio from the nearest city.

    Uses the costs at the bridge's completion year, falling back to the
    nearest available source. Instances with missing coordinates or year get
    MISSING costs.
    """
    if not costs.entries:
        raise DataError("cost table is empty")
    lat = d.column(lat_attr)
    lon = d.column(lon_attr)
    year = d.column(year_attr)
    steel = np.full(len(d), np.nan)
    conc = np.full(len(d), np.nan)
    for i in range(len(d)):
        if np.isnan(lat[i]) or np.isnan(lon[i]) or np.isnan(year[i]):
            continue
        s, c = costs.lookup(float(lat[i]), float(lon[i]), int(round(year[i])))
        steel[i], conc[i] = s, c
    out = d.add_column(AttributeSchema("steel_cost", NUMERIC, (), ROLE_FEATURE), steel)
    out = out.add_column(AttributeSchema("concrete_cost", NUMERIC, (), ROLE_FEATURE), conc)
    with np.errstate(invalid="ignore"):
        ratio = steel / conc
    return out.add_column(AttributeSchema("cost_ratio", NUMERIC, (), ROLE_FEATURE), ratio)
