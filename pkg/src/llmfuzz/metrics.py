"""Campaign statistics: ratios, rank tables, latency summaries, CSV io.

Everything here is a pure computation over finished run data.  Ranks
follow the average-rank tie convention (rank 1 = highest improvement)
and keep full precision in memory; CSV emission rounds ranks to one
decimal.  All CSV writers go through write-then-rename so a partial
file is never observed, and each schema has a matching reader so
emitted reports round-trip.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence, Union

import numpy as np
from scipy.stats import rankdata

from .errors import MissingCell, UndefinedRatio, UndefinedStats


def unique_ratio(documents: Sequence[bytes]) -> float:
    """Distinct documents (by content digest) over total documents.

    Raises UndefinedRatio on an empty list.
    """
    if not documents:
        raise UndefinedRatio("unique ratio over zero documents")
    digests = {hashlib.md5(doc).hexdigest() for doc in documents}
    return len(digests) / len(documents)


# ---------------------------------------------------------------------------
# rank tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RankRow:
    """Average rank per temperature for one model configuration."""

    config: str
    temperatures: tuple[float, ...]
    average_ranks: tuple[float, ...]


@dataclass(frozen=True)
class RankTable:
    rows: tuple[RankRow, ...]

    def rounded(self, digits: int = 1) -> "RankTable":
        return RankTable(
            rows=tuple(
                RankRow(
                    config=row.config,
                    temperatures=row.temperatures,
                    average_ranks=tuple(round(r, digits) for r in row.average_ranks),
                )
                for row in self.rows
            )
        )


def average_ranks(
    improvements: Mapping[str, Sequence[float]],
    temperatures: Sequence[float],
) -> tuple[float, ...]:
    """Per-temperature average rank across programs, rank 1 = highest.

    Each program's improvements are ranked over the temperatures
    (average-rank ties), then ranks are averaged across programs.
    Raises MissingCell on NaN values or ragged rows.
    """
    if not improvements:
        raise MissingCell("no program rows")
    n_temps = len(temperatures)
    all_ranks = []
    for program in sorted(improvements):
        values = list(improvements[program])
        if len(values) != n_temps:
            raise MissingCell(
                f"program {program!r} has {len(values)} cells, expected {n_temps}"
            )
        if any(math.isnan(v) for v in values):
            raise MissingCell(f"program {program!r} has a NaN improvement")
        # rankdata ranks ascending; negate so the best improvement ranks 1
        all_ranks.append(rankdata([-v for v in values], method="average"))
    return tuple(float(x) for x in np.mean(all_ranks, axis=0))


def rank_table(
    improvements: Mapping[str, Sequence[float]],
    temperatures: Sequence[float],
    config: str = "default",
) -> RankTable:
    """Rank one model configuration's program x temperature matrix."""
    ranks = average_ranks(improvements, temperatures)
    row = RankRow(
        config=config,
        temperatures=tuple(float(t) for t in temperatures),
        average_ranks=ranks,
    )
    return RankTable(rows=(row,))


# ---------------------------------------------------------------------------
# latency summaries
# ---------------------------------------------------------------------------


def latency_summary(records: Sequence) -> dict[str, float]:
    """Order statistics over latencies: mean, median, p25, p75, min, max.

    Accepts MutationRecords (their latency_s is used) or plain numbers.
    Raises UndefinedStats on an empty sequence.
    """
    if len(records) == 0:
        raise UndefinedStats("latency summary over zero records")
    values = np.array(
        [float(getattr(r, "latency_s", r)) for r in records], dtype=float
    )
    return {
        "mean": float(values.mean()),
        "median": float(np.median(values)),
        "p25": float(np.percentile(values, 25)),
        "p75": float(np.percentile(values, 75)),
        "min": float(values.min()),
        "max": float(values.max()),
    }


# ---------------------------------------------------------------------------
# report rows and CSV io
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepCell:
    """One temperature point of a sweep over one program."""

    program: str
    temperature: float
    unique_ratio: float
    valid_ratio: float
    cov_improvement: float


@dataclass(frozen=True)
class SweepReport:
    cells: tuple[SweepCell, ...]


@dataclass(frozen=True)
class CampaignRow:
    """Summary line for one finished campaign."""

    target: str
    config: str
    duration_s: float
    edges: int
    queue_len: int
    imported_ai: int
    import_ratio: float
    valid_ratio_queue: float


SWEEP_HEADER = ["program", "temperature", "unique_ratio", "valid_ratio", "cov_improvement"]
CAMPAIGN_HEADER = [
    "target", "config", "duration_s", "edges", "queue_len",
    "imported_ai", "import_ratio", "valid_ratio_queue",
]


def _write_atomic_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


def _float_cell(value: float) -> str:
    return repr(float(value))


def emit_csv(report: Union[SweepReport, Sequence[CampaignRow], RankTable], path: Union[str, Path]) -> None:
    """Write a report in its CSV schema via write-then-rename."""
    path = Path(path)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if isinstance(report, SweepReport):
        writer.writerow(SWEEP_HEADER)
        for cell in report.cells:
            writer.writerow([
                cell.program,
                _float_cell(cell.temperature),
                _float_cell(cell.unique_ratio),
                _float_cell(cell.valid_ratio),
                _float_cell(cell.cov_improvement),
            ])
    elif isinstance(report, RankTable):
        temps = report.rows[0].temperatures if report.rows else ()
        writer.writerow(["config"] + [f"t{temp:.2f}" for temp in temps])
        for row in report.rows:
            writer.writerow([row.config] + [f"{rank:.1f}" for rank in row.average_ranks])
    else:
        writer.writerow(CAMPAIGN_HEADER)
        for row in report:
            writer.writerow([
                row.target,
                row.config,
                _float_cell(row.duration_s),
                str(row.edges),
                str(row.queue_len),
                str(row.imported_ai),
                _float_cell(row.import_ratio),
                _float_cell(row.valid_ratio_queue),
            ])
    _write_atomic_text(path, buf.getvalue())


def read_sweep_csv(path: Union[str, Path]) -> SweepReport:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if header != SWEEP_HEADER:
            raise ValueError(f"unexpected sweep header: {header}")
        cells = tuple(
            SweepCell(
                program=row[0],
                temperature=float(row[1]),
                unique_ratio=float(row[2]),
                valid_ratio=float(row[3]),
                cov_improvement=float(row[4]),
            )
            for row in reader
        )
    return SweepReport(cells=cells)


def read_campaign_csv(path: Union[str, Path]) -> list[CampaignRow]:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if header != CAMPAIGN_HEADER:
            raise ValueError(f"unexpected campaign header: {header}")
        return [
            CampaignRow(
                target=row[0],
                config=row[1],
                duration_s=float(row[2]),
                edges=int(row[3]),
                queue_len=int(row[4]),
                imported_ai=int(row[5]),
                import_ratio=float(row[6]),
                valid_ratio_queue=float(row[7]),
            )
            for row in reader
        ]


def read_ranks_csv(path: Union[str, Path]) -> RankTable:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if not header or header[0] != "config":
            raise ValueError(f"unexpected ranks header: {header}")
        temps = tuple(float(col[1:]) for col in header[1:])
        rows = tuple(
            RankRow(
                config=row[0],
                temperatures=temps,
                average_ranks=tuple(float(cell) for cell in row[1:]),
            )
            for row in reader
        )
    return RankTable(rows=rows)
