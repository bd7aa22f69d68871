"""Inequality reports shared by every checker, plus their JSON/CSV serialisation."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable

CSV_COLUMNS = ("theorem_id", "instance", "lhs", "lhs_se", "rhs0", "rhs0_se",
               "ratio", "flags", "seed", "n_samples")

DEGENERATE = "degenerate"
OUTSIDE_PHI = "outside-phi-regime"
MC_PATH = "mc-path"
INFLUENCE_ABOVE_ONE = "influence-above-one"

EXACT_TOL = 1e-10
MC_SIGMAS = 3.0


def talagrand_phi(x: float) -> float:
    """x / log(e / x), the correction in Talagrand-type lower bounds, for x in (0, 1]."""
    if x <= 0.0:
        return 0.0
    return x / (1.0 - math.log(x))


@dataclass
class InequalityReport:
    """One evaluated instance of an inequality or identity.

    ``rhs0`` is the right-hand side with any universal constant dropped, so
    ``ratio`` is an empirical lower estimate of that constant.
    """

    theorem_id: str
    lhs: float
    rhs0: float | None
    lhs_se: float | None = None
    rhs0_se: float | None = None
    ratio: float | None = None
    flags: list[str] = field(default_factory=list)
    instance_descriptor: str = ""
    seed: int | None = None
    n_samples: int | None = None
    methods: dict[str, str] = field(default_factory=dict)
    tolerance: float | None = None
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.ratio is None and self.rhs0 is not None and self.rhs0 > 0:
            self.ratio = self.lhs / self.rhs0
        if self.ratio is None and DEGENERATE not in self.flags:
            self.flags.append(DEGENERATE)

    @property
    def margin(self) -> float | None:
        return None if self.rhs0 is None else self.lhs - self.rhs0

    def lhs_nonnegative(self) -> bool:
        """LHS >= -tolerance: 1e-10 on exact paths, 3 standard errors on MC paths."""
        if self.lhs_se:
            return self.lhs >= -MC_SIGMAS * self.lhs_se
        return self.lhs >= -(self.tolerance if self.tolerance is not None else 1e-12)

    def to_dict(self) -> dict:
        return asdict(self)

    def csv_row(self) -> list:
        return [self.theorem_id, self.instance_descriptor, _fmt(self.lhs), _fmt(self.lhs_se),
                _fmt(self.rhs0), _fmt(self.rhs0_se), _fmt(self.ratio), ";".join(self.flags),
                "" if self.seed is None else self.seed,
                "" if self.n_samples is None else self.n_samples]


def _fmt(x) -> str:
    if x is None:
        return ""
    return format(x, ".12g")


def round_sig(obj):
    """Recursively round floats to 12 significant digits; non-finite floats become None."""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return float(format(obj, ".12g"))
    if isinstance(obj, dict):
        return {k: round_sig(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_sig(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalars
        return round_sig(obj.item())
    return obj


def dumps_json(payload: dict) -> str:
    return json.dumps(round_sig(payload), indent=2, sort_keys=False, allow_nan=False) + "\n"


def dumps_csv(reports: Iterable[InequalityReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rep in reports:
        w.writerow(rep.csv_row())
    return buf.getvalue()
