"""On-disk cache of exact modular symbols, one file per curve.

File layout (text, UTF-8)::

    mubound-symbols v1
    curve <fingerprint> <a1,a2,a3,a4,a6,N>
    sha256 <hex digest of the body>
    <body: one "a/m = num/den" line per symbol>

Writes go to a temporary file in the same directory followed by an atomic
rename.  A file whose header or checksum does not verify is discarded and
rebuilt; it is never used.
"""

from __future__ import annotations

import hashlib
import logging
import os
import tempfile
from pathlib import Path
from typing import Optional

from .curve import CurveModel
from .periods import ModularSymbolTable

log = logging.getLogger(__name__)

FORMAT = "mubound-symbols v1"
ENV_VAR = "MUBOUND_CACHE_DIR"


class CacheCorrupt(ValueError):
    pass


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "mubound"


class SymbolCache:
    def __init__(self, directory=None):
        self.directory = Path(directory) if directory is not None else default_cache_dir()

    def path(self, curve: CurveModel) -> Path:
        return self.directory / f"{curve.fingerprint()}.symbols"

    @staticmethod
    def _curve_line(curve: CurveModel) -> str:
        return "curve {} {}".format(curve.fingerprint(), ",".join(map(str, (*curve.ainvs, curve.N))))

    def serialize(self, curve: CurveModel, table: ModularSymbolTable) -> str:
        body = "".join(line + "\n" for line in table.lines())
        digest = hashlib.sha256(body.encode()).hexdigest()
        return f"{FORMAT}\n{self._curve_line(curve)}\nsha256 {digest}\n{body}"

    def parse(self, curve: CurveModel, text: str) -> ModularSymbolTable:
        head = text.split("\n", 3)
        if len(head) < 4:
            raise CacheCorrupt("truncated header")
        fmt, curve_line, digest_line, body = head
        if fmt != FORMAT:
            raise CacheCorrupt(f"unknown format {fmt!r}")
        if curve_line != self._curve_line(curve):
            raise CacheCorrupt("curve mismatch")
        if not digest_line.startswith("sha256 "):
            raise CacheCorrupt("missing checksum")
        if hashlib.sha256(body.encode()).hexdigest() != digest_line[7:]:
            raise CacheCorrupt("checksum mismatch")
        try:
            return ModularSymbolTable.from_lines(body.splitlines())
        except (ValueError, ZeroDivisionError, AssertionError) as exc:
            raise CacheCorrupt(f"bad entry: {exc}") from None

    def load(self, curve: CurveModel) -> Optional[ModularSymbolTable]:
        """The cached table, or None when absent or corrupt (a corrupt file is removed)."""
        path = self.path(curve)
        try:
            text = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            return None
        try:
            return self.parse(curve, text)
        except CacheCorrupt as exc:
            log.warning("discarding corrupt cache %s: %s", path, exc)
            try:
                path.unlink()
            except OSError:
                pass
            return None

    def save(self, curve: CurveModel, table: ModularSymbolTable) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.path(curve)
        data = self.serialize(curve, table)
        fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(data)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return path
