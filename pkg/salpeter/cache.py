import logging
import os
import threading
from pathlib import Path
from typing import Any

import joblib  # type: ignore
import numpy as np
from joblib import Memory  # type: ignore

from salpeter.grid import Grid, make_grid
from salpeter.kernel import EigenBasis, solve
from salpeter.potential import Potential, parse_potential
from salpeter.types import Units

logger = logging.getLogger(__name__)

# --- Configuration ---
# Shared cache directory; default is .eigencache beside the outputs
CACHE_ENV = "SALPETER_CACHE_DIR"


# --- Cache key ---
def physics_key(g: Grid, v: Potential, u: Units) -> dict[str, Any]:
    """Arguments that determine the eigenbasis; packet and times do not enter."""
    return {
        "grid": {"x_min": g.x_min, "x_max": g.x_max, "n_points": g.n_points},
        "potential": v.model_dump(),
        "units": u.model_dump(),
    }


def physics_hash(g: Grid, v: Potential, u: Units) -> str:
    return str(joblib.hash(physics_key(g, v, u)))


def _solve_arrays(key: dict[str, Any]) -> tuple[np.ndarray, np.ndarray]:
    """Cached unit of work. Takes plain data so joblib can hash it."""
    grid = make_grid(**key["grid"])
    basis = solve(grid, parse_potential(key["potential"]), Units(**key["units"]))
    return basis.eps, basis.vecs


# --- Disk cache ---
class EigenCache:
    """
    On-disk eigenbasis store keyed by (grid, potential, units).
    With `location=None` every call diagonalizes afresh.
    """

    def __init__(self, location: str | os.PathLike[str] | None) -> None:
        self.location = Path(location) if location is not None else None
        if self.location is not None:
            self._memory = Memory(str(self.location), verbose=0)
            self._solve = self._memory.cache(_solve_arrays)  # type: ignore[misc]
        else:
            self._memory = None
            self._solve = None
        self.hits = 0
        self.misses = 0
        self._lock = threading.Lock()
        self._key_locks: dict[str, threading.Lock] = {}

    @classmethod
    def beside(cls, out_dir: str | os.PathLike[str], enabled: bool = True) -> "EigenCache":
        if not enabled:
            return cls(None)
        return cls(os.getenv(CACHE_ENV) or Path(out_dir) / ".eigencache")

    def _key_lock(self, digest: str) -> threading.Lock:
        with self._lock:
            return self._key_locks.setdefault(digest, threading.Lock())

    def load_or_solve(self, g: Grid, v: Potential, u: Units) -> EigenBasis:
        key = physics_key(g, v, u)
        if self._solve is None:
            with self._lock:
                self.misses += 1
            eps, vecs = _solve_arrays(key)
            return EigenBasis(eps, vecs, g)

        digest = physics_hash(g, v, u)
        # one solver per key; a second thread with the same key waits and then hits
        with self._key_lock(digest):
            hit = self._solve.check_call_in_cache(key)  # type: ignore[union-attr]
            with self._lock:
                if hit:
                    self.hits += 1
                else:
                    self.misses += 1
            if hit:
                logger.info(f"Eigenbasis cache hit ({digest[:12]})")
            else:
                logger.info(f"Eigenbasis cache miss ({digest[:12]}), diagonalizing N={g.n_points}...")
            eps, vecs = self._solve(key)  # type: ignore[misc]
        return EigenBasis(np.asarray(eps), np.asarray(vecs), g)
