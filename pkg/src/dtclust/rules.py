"""Human-readable rules: conjunctions of attribute tests over original values.

A Rule is what a tree path becomes after decoding: every predicate speaks the
language of the raw CSV (value sets, numeric bounds), not internal codes, so a
rule can be checked against the original table or quoted in a report.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, MISSING_CODE, MISSING_DISPLAY
from .errors import ConfigError


class _Missing:
    """Marker for the missing value inside predicate operands."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "MISSING"


MISSING = _Missing()


@dataclass(frozen=True)
class Bound:
    """A numeric/datetime endpoint with its display text."""

    value: float
    text: str


@dataclass(frozen=True)
class Interval:
    """lo < x <= hi; either side may be open (None)."""

    lo: Bound | None
    hi: Bound | None


@dataclass(frozen=True)
class Predicate:
    """One attribute test.

    op and operand pair up as:
      "<=" / ">"        Bound              ordered comparison
      "in"              Interval or tuple  merged range, or value-set membership
      "not_in"          tuple              value-set exclusion
      "==" / "!="       str or MISSING     single-value test
    include_missing widens ordered comparisons to also accept missing cells.
    """

    attribute: str
    op: str
    operand: object
    include_missing: bool = False

    def text(self) -> str:
        a = self.attribute
        if self.op == "<=":
            s = f"{a} <= {self.operand.text}"
        elif self.op == ">":
            s = f"{a} > {self.operand.text}"
        elif self.op == "in" and isinstance(self.operand, Interval):
            s = f"{self.operand.lo.text} < {a} <= {self.operand.hi.text}"
        elif self.op == "in":
            s = f"{a} is in {{{_join(self.operand)}}}"
        elif self.op == "not_in":
            s = f"{a} is not in {{{_join(self.operand)}}}"
        elif self.op == "==":
            s = f"{a} is missing" if self.operand is MISSING else f"{a} = {self.operand}"
        elif self.op == "!=":
            s = f"{a} is not missing" if self.operand is MISSING else f"{a} != {self.operand}"
        else:
            raise ConfigError(f"unknown predicate op {self.op!r}")
        if self.include_missing and self.op in ("<=", ">", "in") and not isinstance(self.operand, tuple):
            s += " (or missing)"
        return s


def _join(values: tuple) -> str:
    return ", ".join(MISSING_DISPLAY if v is MISSING else str(v) for v in values)


@dataclass(frozen=True)
class Rule:
    """A conjunction of predicates characterizing rows of one target class."""

    predicates: tuple[Predicate, ...]
    target_class: int

    def text(self) -> str:
        if not self.predicates:
            return "(always)"
        return " AND ".join(p.text() for p in self.predicates)


def render_rule_text(
    rule: Rule,
    class_names: tuple[str, ...],
    precision: float | None = None,
    size: int | None = None,
    share: float | None = None,
) -> str:
    """One-sentence rendering: IF <conditions> THEN <class> (precision, coverage)."""
    sentence = f"IF {rule.text()} THEN {class_names[rule.target_class]}"
    notes = []
    if precision is not None:
        notes.append(f"precision {precision:.3f}")
    if size is not None:
        notes.append(f"covers {size} rows")
    if share is not None:
        notes.append(f"{100 * share:.1f}% of population")
    if notes:
        sentence += f" ({', '.join(notes)})"
    return sentence


# ---------------------------------------------------------------------------
# JSON round-trip (reports, synthetic-group spec files)
# ---------------------------------------------------------------------------

def _bound_to_dict(b: Bound | None):
    return None if b is None else {"value": b.value, "text": b.text}


def _bound_from_dict(raw) -> Bound | None:
    if raw is None:
        return None
    if isinstance(raw, dict):
        return Bound(float(raw["value"]), str(raw.get("text", raw["value"])))
    return Bound(float(raw), str(raw))


def predicate_to_dict(pred: Predicate) -> dict:
    out: dict = {"attribute": pred.attribute, "op": pred.op}
    if pred.op in ("<=", ">"):
        out["value"] = pred.operand.value
        out["text"] = pred.operand.text
        out["include_missing"] = pred.include_missing
    elif pred.op == "in" and isinstance(pred.operand, Interval):
        out["lo"] = _bound_to_dict(pred.operand.lo)
        out["hi"] = _bound_to_dict(pred.operand.hi)
        out["include_missing"] = pred.include_missing
    elif pred.op in ("in", "not_in"):
        out["values"] = [None if v is MISSING else v for v in pred.operand]
    else:
        out["value"] = None if pred.operand is MISSING else pred.operand
    return out


def predicate_from_dict(raw: dict) -> Predicate:
    attr, op = raw["attribute"], raw["op"]
    if op in ("<=", ">"):
        bound = Bound(float(raw["value"]), str(raw.get("text", raw["value"])))
        return Predicate(attr, op, bound, include_missing=bool(raw.get("include_missing", False)))
    if op == "in" and ("lo" in raw or "hi" in raw):
        return Predicate(attr, op, Interval(_bound_from_dict(raw.get("lo")), _bound_from_dict(raw.get("hi"))),
                         include_missing=bool(raw.get("include_missing", False)))
    if op in ("in", "not_in"):
        return Predicate(attr, op, tuple(MISSING if v is None else str(v) for v in raw["values"]))
    if op in ("==", "!="):
        v = raw.get("value")
        return Predicate(attr, op, MISSING if v is None else str(v))
    raise ConfigError(f"unknown predicate op {op!r}")


def rule_to_dict(rule: Rule) -> dict:
    return {
        "target_class": rule.target_class,
        "predicates": [predicate_to_dict(p) for p in rule.predicates],
        "text": rule.text(),
    }


def rule_from_dict(raw: dict) -> Rule:
    return Rule(
        tuple(predicate_from_dict(p) for p in raw.get("predicates", [])),
        int(raw.get("target_class", 0)),
    )


# ---------------------------------------------------------------------------
# Evaluation against a dataset
# ---------------------------------------------------------------------------

def apply_rule(rule: Rule, ds: Dataset, rows: np.ndarray | None = None) -> np.ndarray:
    """Row ids (of ds, or of the given subset) satisfying every predicate.

    Predicates are evaluated over original values: numeric bounds against the
    parsed numbers, set membership against the display texts.
    """
    if rows is None:
        rows = np.arange(ds.row_count)
    mask = np.ones(len(rows), dtype=bool)
    for pred in rule.predicates:
        mask &= _eval_predicate(pred, ds, rows)
    return rows[mask]


def _eval_predicate(pred: Predicate, ds: Dataset, rows: np.ndarray) -> np.ndarray:
    col = ds.column(pred.attribute)
    codes = col.codes[rows]
    missing = codes == MISSING_CODE

    if pred.op in ("<=", ">") or (pred.op == "in" and isinstance(pred.operand, Interval)):
        if col.values is None:
            raise ConfigError(f"ordered predicate on unordered column {col.name!r}")
        padded = np.concatenate(([np.nan], col.values))
        v = padded[codes]
        if pred.op == "<=":
            sat = v <= pred.operand.value
        elif pred.op == ">":
            sat = v > pred.operand.value
        else:
            iv = pred.operand
            sat = np.ones(len(v), dtype=bool)
            if iv.lo is not None:
                sat &= v > iv.lo.value
            if iv.hi is not None:
                sat &= v <= iv.hi.value
        sat[missing] = pred.include_missing
        return sat

    if pred.op in ("in", "not_in"):
        wanted = _codes_for(col, pred.operand)
        sat = np.isin(codes, wanted)
        return sat if pred.op == "in" else ~sat

    if pred.op in ("==", "!="):
        wanted = _codes_for(col, (pred.operand,))
        sat = np.isin(codes, wanted)
        return sat if pred.op == "==" else ~sat

    raise ConfigError(f"unknown predicate op {pred.op!r}")


def _codes_for(col, values: tuple) -> np.ndarray:
    lookup = {text: i + 1 for i, text in enumerate(col.dictionary)}
    out = []
    for v in values:
        if v is MISSING:
            out.append(MISSING_CODE)
        elif v in lookup:
            out.append(lookup[v])
    return np.array(out, dtype=np.int32)
