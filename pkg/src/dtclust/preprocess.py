"""Column transforms that make shallow trees effective: binning and class-frequency ordering.

Binning cuts the number of distinct codes a column carries; class-frequency
encoding reorders a symbolic column so that values correlated with the target
class become separable by a single threshold split. Every transform is recorded
in a TransformLog so extracted rules can always be rendered over original values.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .dataset import Column, ColumnKind, Dataset, MISSING_CODE, format_value
from .errors import ConfigError, DataError

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Bin containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntervalBin:
    """A contiguous run of codes of an ordered column.

    code_lo..code_hi (inclusive) index the previous encoding's dictionary;
    lo/hi are the natural-value bounds used for display.
    """

    id: int
    code_lo: int
    code_hi: int
    lo: float
    hi: float
    representative: str
    rep_value: float

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(range(self.code_lo, self.code_hi + 1))


@dataclass(frozen=True)
class SetBin:
    """An arbitrary group of symbolic codes."""

    id: int
    member_codes: tuple[int, ...]
    representative: str

    @property
    def members(self) -> tuple[int, ...]:
        return self.member_codes


Bin = IntervalBin | SetBin


@dataclass(frozen=True)
class BinningSpec:
    column: str
    method: str
    k: int
    bins: tuple[Bin, ...]

    def member_map(self) -> dict[int, tuple[int, ...]]:
        return {b.id: b.members for b in self.bins}


@dataclass(frozen=True)
class OrdinalEncoding:
    """A bijective remap of codes; permutation[old_code] = new_code, sentinel fixed."""

    column: str
    permutation: tuple[int, ...]

    def inverse(self) -> tuple[int, ...]:
        inv = [0] * len(self.permutation)
        for old, new in enumerate(self.permutation):
            inv[new] = old
        return tuple(inv)


Transform = BinningSpec | OrdinalEncoding


# ---------------------------------------------------------------------------
# Numeric / datetime binning
# ---------------------------------------------------------------------------

def bin_numeric(col: Column, k: int, method: str = "percentile") -> tuple[BinningSpec, Column]:
    """Replace a numeric column's codes by k (or fewer) interval-bin ids.

    equal-width cuts [min, max] into k spans of equal width (last span closed);
    percentile places edges at the i*n/k rank quantiles of the row values, so
    each bin holds roughly the same number of rows. Duplicate edges collapse.
    """
    if col.kind is not ColumnKind.NUMERIC:
        raise ConfigError(f"column {col.name!r} is {col.kind.value}, not numeric")
    return _bin_ordered(col, k, method, f"numeric-{method}")


def bin_datetime(col: Column, k: int, method: str = "frequency") -> tuple[BinningSpec, Column]:
    """Bin a datetime column into k time intervals, by row frequency or equal duration."""
    if col.kind is not ColumnKind.DATETIME:
        raise ConfigError(f"column {col.name!r} is {col.kind.value}, not datetime")
    inner = {"frequency": "percentile", "equal-width": "equal-width"}.get(method)
    if inner is None:
        raise ConfigError(f"unknown datetime binning method {method!r}")
    return _bin_ordered(col, k, inner, f"datetime-{method}")


def _bin_ordered(col: Column, k: int, method: str, label: str) -> tuple[BinningSpec, Column]:
    if k < 2:
        raise ConfigError(f"binning needs k >= 2, got {k}")
    present = col.codes[col.codes != MISSING_CODE]
    if present.size == 0:
        raise DataError(f"column {col.name!r} has no non-missing values to bin")
    values = col.values
    row_values = values[present - 1]

    vmin, vmax = float(row_values.min()), float(row_values.max())
    if method == "equal-width":
        all_edges = np.linspace(vmin, vmax, k + 1)
        inner = all_edges[1:-1]
        # value v lands in bin j iff edges[j] <= v < edges[j+1]; max joins the last bin
        dict_bins = np.searchsorted(inner, values, side="right")
        intervals = [(all_edges[j], all_edges[j + 1]) for j in range(k)]
        reps = [(a + b) / 2 for a, b in intervals]
    elif method == "percentile":
        srt = np.sort(row_values)
        n = srt.size
        ranks = [int(np.ceil(i * n / k)) for i in range(1, k)]
        edges = sorted({float(srt[r - 1]) for r in ranks if r >= 1} - {vmax})
        # value v lands in bin j iff edges[j-1] < v <= edges[j]
        dict_bins = np.searchsorted(np.array(edges), values, side="left")
        bounds = [vmin] + edges + [vmax]
        intervals = [(bounds[j], bounds[j + 1]) for j in range(len(edges) + 1)]
        reps = [b for _, b in intervals]
    else:
        raise ConfigError(f"unknown binning method {method!r}")

    # keep only bins with observed values, renumbered 1..m in value order
    observed = np.unique(dict_bins[np.unique(present) - 1])
    renumber = {int(b): i + 1 for i, b in enumerate(observed)}
    bins = []
    for b in observed:
        in_bin = np.where(dict_bins == b)[0] + 1  # original codes are dictionary index + 1
        lo, hi = intervals[int(b)]
        bins.append(IntervalBin(
            id=renumber[int(b)],
            code_lo=int(in_bin.min()),
            code_hi=int(in_bin.max()),
            lo=lo,
            hi=hi,
            representative=format_value(reps[int(b)], col.kind, col.pattern),
            rep_value=float(reps[int(b)]),
        ))
    spec = BinningSpec(col.name, label, k, tuple(bins))
    return spec, _rewrite(col, spec, kind=col.kind)


# ---------------------------------------------------------------------------
# Symbolic binning
# ---------------------------------------------------------------------------

def bin_symbolic(col: Column, k: int, method: str = "frequency") -> tuple[BinningSpec, Column]:
    """Group a symbolic column's values into at most k bins.

    equal-width chops the current dictionary order into near-equal groups;
    frequency sorts values by occurrence count and greedily packs them so each
    bin's joint mass approaches rows/k; similarity sorts values lexicographically
    and cuts at the k-1 adjacent pairs with the largest Jaro-Winkler distance.
    """
    if col.kind not in (ColumnKind.SYMBOLIC_NOMINAL, ColumnKind.SYMBOLIC_ORDINAL):
        raise ConfigError(f"column {col.name!r} is {col.kind.value}, not symbolic")
    if k < 2:
        raise ConfigError(f"binning needs k >= 2, got {k}")
    m = col.n_values
    if m < 2:
        raise DataError(f"column {col.name!r} needs >= 2 unique values to bin")

    if k >= m:
        log.warning("column %r: k=%d >= %d unique values, identity binning", col.name, k, m)
        groups = [[c] for c in range(1, m + 1)]
    elif method == "equal-width":
        groups = [list(part) for part in np.array_split(np.arange(1, m + 1), k)]
    elif method == "frequency":
        counts = np.bincount(col.codes, minlength=m + 1)
        total = int(counts[1:].sum())
        order = sorted(range(1, m + 1), key=lambda c: (-counts[c], c))
        target = total / k
        groups, current, mass = [], [], 0
        for c in order:
            current.append(c)
            mass += int(counts[c])
            if mass >= target and len(groups) < k - 1:
                groups.append(current)
                current, mass = [], 0
        if current:
            groups.append(current)
    elif method == "similarity":
        order = sorted(range(1, m + 1), key=lambda c: col.dictionary[c - 1])
        gaps = [1.0 - jaro_winkler(col.dictionary[order[i] - 1], col.dictionary[order[i + 1] - 1])
                for i in range(m - 1)]
        cuts = sorted(sorted(range(m - 1), key=lambda i: (-gaps[i], i))[: k - 1])
        groups, start = [], 0
        for cut in cuts:
            groups.append(order[start:cut + 1])
            start = cut + 1
        groups.append(order[start:])
    else:
        raise ConfigError(f"unknown symbolic binning method {method!r}")

    bins = tuple(
        SetBin(
            id=i + 1,
            member_codes=tuple(int(c) for c in g),
            representative=(col.dictionary[g[0] - 1] if len(g) == 1
                            else "{" + ",".join(col.dictionary[c - 1] for c in g) + "}"),
        )
        for i, g in enumerate(groups)
    )
    spec = BinningSpec(col.name, f"symbolic-{method}", k, bins)
    return spec, _rewrite(col, spec, kind=ColumnKind.SYMBOLIC_NOMINAL)


def _rewrite(col: Column, spec: BinningSpec, kind: ColumnKind) -> Column:
    remap = np.zeros(col.n_values + 1, dtype=np.int32)
    for b in spec.bins:
        for c in b.members:
            remap[c] = b.id
    rep_values = None
    if kind in (ColumnKind.NUMERIC, ColumnKind.DATETIME):
        rep_values = np.array([b.rep_value for b in spec.bins], dtype=np.float64)
    return Column(
        col.name,
        kind,
        remap[col.codes],
        tuple(b.representative for b in spec.bins),
        values=rep_values,
        pattern=col.pattern,
    )


# ---------------------------------------------------------------------------
# String similarity
# ---------------------------------------------------------------------------

def jaro_winkler(a: str, b: str) -> float:
    """Jaro-Winkler similarity in [0, 1]; prefix scale 0.1, prefix cap 4, boost above 0.7."""
    if a == b:
        return 1.0
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        return 0.0

    window = max(max(la, lb) // 2 - 1, 0)
    matched_a = [False] * la
    matched_b = [False] * lb
    matches = 0
    for i in range(la):
        lo = max(0, i - window)
        hi = min(lb, i + window + 1)
        for j in range(lo, hi):
            if not matched_b[j] and a[i] == b[j]:
                matched_a[i] = matched_b[j] = True
                matches += 1
                break
    if matches == 0:
        return 0.0

    seq_a = [a[i] for i in range(la) if matched_a[i]]
    seq_b = [b[j] for j in range(lb) if matched_b[j]]
    transpositions = sum(x != y for x, y in zip(seq_a, seq_b)) / 2

    jaro = (matches / la + matches / lb + (matches - transpositions) / matches) / 3
    if jaro > 0.7:
        prefix = 0
        for x, y in zip(a, b):
            if x != y or prefix == 4:
                break
            prefix += 1
        jaro += prefix * 0.1 * (1.0 - jaro)
    return jaro


# ---------------------------------------------------------------------------
# Class-frequency ordinal encoding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValueClassCount:
    code: int
    value: str
    in_class: int
    total: int

    @property
    def frequency(self) -> float:
        return self.in_class / self.total if self.total else 0.0


@dataclass(frozen=True)
class ContingencyTable:
    column: str
    target_class: int
    entries: tuple[ValueClassCount, ...]

    def frequency(self, value: str) -> float:
        for e in self.entries:
            if e.value == value:
                return e.frequency
        raise KeyError(f"{value!r} not in contingency table for {self.column!r}")


def build_contingency(col: Column, labels: np.ndarray, target_class: int) -> ContingencyTable:
    """Per unique value: how often its rows belong to the target class."""
    if col.kind not in (ColumnKind.SYMBOLIC_NOMINAL, ColumnKind.SYMBOLIC_ORDINAL, ColumnKind.BOOLEAN):
        raise ConfigError(f"contingency table expects a symbolic column, got {col.kind.value}")
    m = col.n_values
    totals = np.bincount(col.codes, minlength=m + 1)
    in_class = np.bincount(col.codes[labels == target_class], minlength=m + 1)
    entries = tuple(
        ValueClassCount(c, col.dictionary[c - 1], int(in_class[c]), int(totals[c]))
        for c in range(1, m + 1)
        if totals[c] > 0
    )
    return ContingencyTable(col.name, target_class, entries)


def encode_by_class_frequency(
    col: Column, labels: np.ndarray, target_class: int
) -> tuple[OrdinalEncoding, Column]:
    """Reorder a symbolic column's dictionary by target-class frequency, descending.

    Values that concentrate the target class end up adjacent at the low-code end,
    so one <= split can separate them. Ties keep the prior dictionary order.
    The returned column is symbolic-ordinal.
    """
    if col.kind not in (ColumnKind.SYMBOLIC_NOMINAL, ColumnKind.SYMBOLIC_ORDINAL):
        raise ConfigError(f"cannot frequency-encode a {col.kind.value} column")
    m = col.n_values
    totals = np.bincount(col.codes, minlength=m + 1).astype(np.float64)
    in_class = np.bincount(col.codes[labels == target_class], minlength=m + 1).astype(np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        freqs = np.where(totals[1:] > 0, in_class[1:] / totals[1:], 0.0)

    order = np.argsort(-freqs, kind="stable") + 1  # old codes, best class rate first
    permutation = [0] * (m + 1)
    for new, old in enumerate(order, start=1):
        permutation[int(old)] = new
    enc = OrdinalEncoding(col.name, tuple(permutation))

    perm = np.array(permutation, dtype=np.int32)
    new_col = Column(
        col.name,
        ColumnKind.SYMBOLIC_ORDINAL,
        perm[col.codes],
        tuple(col.dictionary[int(old) - 1] for old in order),
    )
    return enc, new_col


# ---------------------------------------------------------------------------
# Whole-table plans and the transform log
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BinDirective:
    method: str
    k: int


@dataclass
class PreprocessPlan:
    """What to do to each column before training.

    numeric_bins, when set, percentile-bins every numeric column with that k.
    per_column overrides or adds directives by column name. reorder_symbolic
    applies class-frequency encoding to every (post-binning) nominal symbolic
    column. Symbolic columns that still exceed high_cardinality_threshold
    distinct values are dropped with a warning.
    """

    numeric_bins: int | None = None
    per_column: dict[str, BinDirective] = field(default_factory=dict)
    reorder_symbolic: bool = True
    high_cardinality_threshold: int = 100

    def to_dict(self) -> dict:
        return {
            "numeric_bins": self.numeric_bins,
            "per_column": {name: {"method": d.method, "k": d.k} for name, d in self.per_column.items()},
            "reorder_symbolic": self.reorder_symbolic,
            "high_cardinality_threshold": self.high_cardinality_threshold,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "PreprocessPlan":
        per_column = {
            name: BinDirective(entry["method"], int(entry["k"]))
            for name, entry in (raw.get("per_column") or {}).items()
        }
        return cls(
            numeric_bins=raw.get("numeric_bins"),
            per_column=per_column,
            reorder_symbolic=bool(raw.get("reorder_symbolic", True)),
            high_cardinality_threshold=int(raw.get("high_cardinality_threshold", 100)),
        )


@dataclass
class ColumnLog:
    """Everything needed to map a transformed column's codes back to original values."""

    name: str
    original_kind: ColumnKind
    original_dictionary: tuple[str, ...]
    original_values: np.ndarray | None
    original_pattern: str | None
    had_missing: bool
    steps: list[Transform]
    final_kind: ColumnKind


@dataclass
class TransformLog:
    entries: dict[str, ColumnLog] = field(default_factory=dict)
    dropped: dict[str, str] = field(default_factory=dict)

    def for_column(self, name: str) -> ColumnLog:
        try:
            return self.entries[name]
        except KeyError:
            raise ConfigError(f"no transform record for column {name!r}") from None

    def to_dict(self) -> dict:
        out: dict = {"columns": {}, "dropped": dict(self.dropped)}
        for name, entry in self.entries.items():
            steps = []
            for step in entry.steps:
                if isinstance(step, BinningSpec):
                    steps.append({
                        "transform": "binning",
                        "method": step.method,
                        "k": step.k,
                        "bins": [
                            {"id": b.id, "members": list(b.members), "representative": b.representative}
                            for b in step.bins
                        ],
                    })
                else:
                    steps.append({"transform": "reorder", "permutation": list(step.permutation)})
            out["columns"][name] = {
                "kind": entry.original_kind.value,
                "final_kind": entry.final_kind.value,
                "dictionary": list(entry.original_dictionary),
                "steps": steps,
            }
        return out


_SYMBOLIC = (ColumnKind.SYMBOLIC_NOMINAL, ColumnKind.SYMBOLIC_ORDINAL)


def apply_plan(
    ds: Dataset, plan: PreprocessPlan, target_class: int | None = None
) -> tuple[Dataset, TransformLog]:
    """Run the plan over every column, returning the transformed dataset and its log.

    The log gets one entry per surviving column (identity entries included), so
    rule rendering never lacks a record.
    """
    if plan.reorder_symbolic and target_class is None:
        raise ConfigError("reorder_symbolic requires a target class")
    for name in plan.per_column:
        ds.column(name)

    out_columns: list[Column] = []
    logbook = TransformLog()
    for col in ds.columns:
        entry = ColumnLog(
            name=col.name,
            original_kind=col.kind,
            original_dictionary=col.dictionary,
            original_values=col.values,
            original_pattern=col.pattern,
            had_missing=col.has_missing,
            steps=[],
            final_kind=col.kind,
        )
        current = col

        directive = plan.per_column.get(col.name)
        if directive is None and plan.numeric_bins and col.kind is ColumnKind.NUMERIC:
            directive = BinDirective("percentile", plan.numeric_bins)
        if directive is not None:
            try:
                spec, current = _apply_directive(current, directive)
                entry.steps.append(spec)
            except DataError as exc:
                log.warning("skipped binning for %r: %s", col.name, exc)

        if current.kind in _SYMBOLIC and current.n_values > plan.high_cardinality_threshold:
            log.warning(
                "dropping column %r: %d unique values exceed threshold %d and no binning applied",
                col.name, current.n_values, plan.high_cardinality_threshold,
            )
            logbook.dropped[col.name] = (
                f"{current.n_values} unique values exceed threshold {plan.high_cardinality_threshold}"
            )
            continue

        if plan.reorder_symbolic and current.kind is ColumnKind.SYMBOLIC_NOMINAL and current.n_values > 1:
            enc, current = encode_by_class_frequency(current, ds.labels, target_class)
            entry.steps.append(enc)

        entry.final_kind = current.kind
        out_columns.append(current)
        logbook.entries[col.name] = entry

    return Dataset(tuple(out_columns), ds.labels, ds.class_names), logbook


def _apply_directive(col: Column, directive: BinDirective) -> tuple[BinningSpec, Column]:
    if col.kind is ColumnKind.NUMERIC:
        return bin_numeric(col, directive.k, directive.method)
    if col.kind is ColumnKind.DATETIME:
        return bin_datetime(col, directive.k, directive.method)
    if col.kind in _SYMBOLIC:
        return bin_symbolic(col, directive.k, directive.method)
    raise ConfigError(f"cannot bin a {col.kind.value} column ({col.name!r})")
