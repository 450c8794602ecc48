"""Handover probability matrix and the resource-reservation policies derived from it."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ConfigError

log = logging.getLogger(__name__)

APPROACHES = ("none", "blocklist", "offset-reduction", "combined")


def build_H(events, n_cells: int) -> np.ndarray:
    """Row-normalised counts of successful handovers i -> j."""
    counts = np.zeros((n_cells, n_cells))
    for ev in events:
        if ev.kind == "ho_success":
            counts[ev.from_cell, ev.to_cell] += 1
    np.fill_diagonal(counts, 0.0)
    if counts.sum() == 0:
        log.warning("no successful handovers in the training log; H is all zero")
    rows = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        H = np.where(rows > 0, counts / rows, 0.0)
    return H


@dataclass
class MroPolicy:
    approach: str
    blocked: np.ndarray  # (C, C) bool
    o_prep_db: np.ndarray  # (C, C)
    p_block: float = 0.0
    p_reduce: float = 0.12
    entries_touched: int = field(default=0, compare=False)

    @property
    def n_cells(self) -> int:
        return self.blocked.shape[0]

    @property
    def blocks_anything(self) -> bool:
        return bool(self.blocked.any())

    def gate(self, serving: int, candidate: int) -> float | None:
        """Preparation offset for the pair, or None when the pair is blocked."""
        if self.blocked[serving, candidate]:
            return None
        return float(self.o_prep_db[serving, candidate])

    def reactive_prune(self, prepared, serving: int) -> list:
        """Cells of ``prepared`` that the new serving cell's block list discards."""
        return [c for c in prepared if self.blocked[serving, c]]

    # persistence ----------------------------------------------------------
    def save(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "blocked", "o_prep_db"])
            n = self.n_cells
            for i in range(n):
                for j in range(n):
                    if i != j:
                        w.writerow([i, j, int(self.blocked[i, j]), f"{self.o_prep_db[i, j]:g}"])

    @classmethod
    def load(cls, path, approach: str = "file") -> "MroPolicy":
        rows = []
        with open(Path(path), newline="") as fh:
            for rec in csv.DictReader(fh):
                rows.append((int(rec["i"]), int(rec["j"]), int(rec["blocked"]),
                             float(rec["o_prep_db"])))
        if not rows:
            raise ConfigError([f"policy file {path} has no rows"])
        n = max(max(i, j) for i, j, _, _ in rows) + 1
        blocked = np.zeros((n, n), dtype=bool)
        o = np.full((n, n), np.nan)
        for i, j, b, off in rows:
            blocked[i, j] = bool(b)
            o[i, j] = off
        np.fill_diagonal(o, 0.0)
        if np.isnan(o).any():
            raise ConfigError([f"policy file {path} does not cover every cell pair"])
        return cls(approach, blocked, o)


def identity_policy(n_cells: int, o_prep_db: float = 10.0) -> MroPolicy:
    return MroPolicy("none", np.zeros((n_cells, n_cells), dtype=bool),
                     np.full((n_cells, n_cells), float(o_prep_db)))


def derive_policy(H, approach: str, o_prep_db: float = 10.0, reduced_db: float = 7.0,
                  p_block: float = 0.0, p_reduce: float = 0.12) -> MroPolicy:
    """Block list and per-pair preparation offsets from H. Pure; O(N_cells^2)."""
    if approach not in APPROACHES:
        raise ConfigError([f"approach must be one of {APPROACHES}"])
    H = np.asarray(H, dtype=float)
    n = H.shape[0]
    off_diag = ~np.eye(n, dtype=bool)
    blocked = np.zeros((n, n), dtype=bool)
    o = np.full((n, n), float(o_prep_db))
    if approach == "blocklist":
        blocked = (H <= p_block) & off_diag
    elif approach == "offset-reduction":
        o = np.where((H <= p_reduce) & off_diag, reduced_db, o_prep_db)
    elif approach == "combined":
        blocked = (H <= p_block) & off_diag
        o = np.where((H > p_block) & (H <= p_reduce) & off_diag, reduced_db, o_prep_db)
    # one visit per cell pair
    touched = n * n
    return MroPolicy(approach, blocked, o.astype(float), p_block, p_reduce, touched)


def save_H(path, H) -> None:
    n = H.shape[0]
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cell"] + list(range(n)))
        for i in range(n):
            w.writerow([i] + [f"{x:.12g}" for x in H[i]])


def load_H(path) -> np.ndarray:
    with open(Path(path), newline="") as fh:
        rows = list(csv.reader(fh))
    return np.array([[float(x) for x in r[1:]] for r in rows[1:]])
