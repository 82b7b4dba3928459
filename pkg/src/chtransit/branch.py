"""Bifurcation branch container shared by the PDE and reduced-system sweeps."""

from __future__ import annotations

from dataclasses import dataclass, field

STATUSES = ("converged", "jumped", "max_time", "failed")


@dataclass
class BranchRow:
    lam: float
    amplitudes: dict[str, float]
    amplitude: float
    energy: float
    mass: float
    status: str
    time: float = 0.0
    message: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown row status {self.status!r}")

    @property
    def converged(self) -> bool:
        """Steady state reached (a jump row is still a converged steady state)."""
        return self.status in ("converged", "jumped")


@dataclass
class BifurcationBranch:
    rows: list[BranchRow] = field(default_factory=list)
    tracked: list[str] = field(default_factory=list)

    def append(self, row: BranchRow):
        if self.rows:
            prev = self.rows[-1].lam
            direction = None
            if len(self.rows) > 1:
                direction = self.rows[-1].lam > self.rows[-2].lam
            if row.lam == prev or (direction is not None and (row.lam > prev) != direction):
                raise ValueError("lambda must be strictly monotone along a branch")
        self.rows.append(row)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def lams(self) -> list[float]:
        return [r.lam for r in self.rows]

    @property
    def amplitudes(self) -> list[float]:
        return [r.amplitude for r in self.rows]

    def jumps(self) -> list[BranchRow]:
        return [r for r in self.rows if r.status == "jumped"]
