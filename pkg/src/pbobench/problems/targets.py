"""Published ERT targets for n=64 and n=625, and analytic optima per (fid, n)."""

from __future__ import annotations

from pbobench.problems.instances import ProblemInstance

PUBLISHED_TARGETS = {
    64: (
        64, 64, 2080, 32, 57, 21, 64, 33, 64, 63.2, 32, 57,
        21, 43.8, 33, 64, 64, 3.981492, 128, 230.4, 384, 28, 8,
    ),
    625: (
        625, 625, 195625, 312, 562, 208, 576.4, 314, 625, 625, 312, 562,
        208, 36.6, 314, 625, 625, 4.2655266, 1242, 2420, 3532.8, 268.4, 24,
    ),
}


def published_target(fid: int, dim: int) -> float | None:
    row = PUBLISHED_TARGETS.get(dim)
    return None if row is None else float(row[fid - 1])


def analytic_optimum(fid: int, dim: int, master_seed: int = 0) -> float | None:
    """Raw optimum of F``fid`` at ``dim``; ``None`` when unknown or undefined at ``dim``."""
    try:
        return ProblemInstance.build(fid, dim, 1, master_seed).optimum_raw
    except ValueError:
        return None


def target_table(dim: int, master_seed: int = 0) -> list[dict]:
    """One row per fid: analytic optimum and published target (either may be ``None``)."""
    return [
        {
            "fid": fid,
            "optimum": analytic_optimum(fid, dim, master_seed),
            "published": published_target(fid, dim),
        }
        for fid in range(1, 24)
    ]
