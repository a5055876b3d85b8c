from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable, Mapping

from ..engine.check import Verdict


@dataclass(frozen=True)
class KpiReport:
    num_properties: int
    num_proven: int
    proven_pct: float
    coverage_pct: float

    def to_json(self) -> dict:
        return asdict(self)


def kpis_from_statuses(generated: Iterable[str], statuses: Mapping[str, Verdict],
                       coverage_pct: float) -> KpiReport:
    """Proven share over every approved generated property.

    Only PROVEN counts as proven; a property without a verdict counts against
    the share.  With nothing generated the share is 100 by convention.
    """
    names = list(dict.fromkeys(generated))
    proven = sum(1 for n in names if statuses.get(n) is Verdict.PROVEN)
    pct = round(100.0 * proven / len(names), 2) if names else 100.0
    return KpiReport(len(names), proven, pct, coverage_pct)
