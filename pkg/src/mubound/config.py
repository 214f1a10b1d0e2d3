"""Run configuration and batch curve ingestion."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

from .curve import CurveError, CurveModel, KNOWN_CURVES, named_curve, validate_curve

log = logging.getLogger(__name__)

TOL_RANGE = (1e-14, 1e-6)
N_MAX_LIMIT = 4
MODULUS_LIMIT = 100_000


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    curves: List[CurveModel] = field(default_factory=list)
    p: Optional[int] = None
    p_min: int = 3
    p_max: Optional[int] = None
    r: int = 1
    n: int = 1
    n_max: int = 2
    k: Optional[int] = None
    tol: float = 1e-9
    Qmax: int = 10_000
    seed: int = 0
    cache_dir: Optional[str] = None
    use_cache: bool = True
    output: str = "text"

    @property
    def precision(self) -> int:
        """k, defaulting to one guard digit beyond r + 1."""
        return self.k if self.k is not None else self.r + 2

    def validate(self) -> "RunConfig":
        lo, hi = TOL_RANGE
        if not lo <= self.tol <= hi:
            raise ConfigError(f"tol={self.tol:g} outside [{lo:g}, {hi:g}]")
        if not 1 <= self.n_max <= N_MAX_LIMIT:
            raise ConfigError(f"n_max={self.n_max} outside [1, {N_MAX_LIMIT}]")
        if self.n < 1:
            raise ConfigError("level n must be at least 1")
        if self.r < 0:
            raise ConfigError("r must be non-negative")
        if self.k is not None and self.k < 1:
            raise ConfigError("precision k must be positive")
        if self.Qmax < 1:
            raise ConfigError("Qmax must be positive")
        if self.p is not None:
            if self.p < 3:
                raise ConfigError(f"p must be an odd prime, got {self.p}")
            top = max(self.n, self.n_max)
            if self.p ** top > MODULUS_LIMIT:
                raise ConfigError(f"p^n = {self.p}^{top} exceeds {MODULUS_LIMIT}")
        if self.p_max is not None and self.p_max < 3:
            raise ConfigError("pmax must be at least 3")
        if self.output not in ("text", "json", "csv"):
            raise ConfigError(f"unknown output format {self.output!r}")
        return self


def parse_curve(spec: str) -> CurveModel:
    """A known label such as ``11a``, or ``a1,a2,a3,a4,a6,N``."""
    spec = spec.strip()
    if spec in KNOWN_CURVES:
        return named_curve(spec)
    parts = [s.strip() for s in spec.split(",")]
    if len(parts) not in (6, 7):
        raise ConfigError(f"curve {spec!r}: expected a label or a1,a2,a3,a4,a6,N[,label]")
    try:
        return validate_curve(*parts[:6], label=parts[6] if len(parts) == 7 else None)
    except CurveError as exc:
        raise ConfigError(f"curve {spec!r}: {exc}") from None


def ingest_curves(path, errors: Optional[List[Tuple[int, str]]] = None) -> List[CurveModel]:
    """Curves from a CSV of rows ``a1,a2,a3,a4,a6,N[,label]``.

    A first row whose leading field is not an integer is taken as a header.
    Bad rows are logged with their line numbers (and appended to ``errors``)
    while the remaining rows proceed.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if not text.strip():
        raise ConfigError(f"{path}: empty curve file")
    curves = []
    for lineno, row in enumerate(csv.reader(text.splitlines()), start=1):
        row = [c.strip() for c in row]
        if not row or not any(row) or row[0].startswith("#"):
            continue
        if lineno == 1 and not _is_int(row[0]):
            continue
        try:
            if len(row) not in (6, 7):
                raise CurveError(f"expected 6 or 7 fields, got {len(row)}")
            label = row[6] if len(row) == 7 and row[6] else None
            curves.append(validate_curve(*row[:6], label=label))
        except CurveError as exc:
            msg = f"{path}:{lineno}: {exc}"
            log.warning(msg)
            if errors is not None:
                errors.append((lineno, str(exc)))
    if not curves:
        log.warning("%s: no curves found", path)
    return curves


def _is_int(s: str) -> bool:
    try:
        int(s)
        return True
    except ValueError:
        return False
