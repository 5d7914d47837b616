"""Golden single-cell Rippler proposal on the 100-individual SIR study.

Re-implements the non-centred forward map independently of the Rust code:
each cell's state is the categorical outcome of its uniform under the
transition row of the previous state, with state s owning [cum_{s-1}, cum_s)
and the last positive state's interval closed at 1.

Steps: draw U with Python's own generator, map it to X, move one
susceptible cell's uniform above its reproducing interval so that the
individual is infected at that time, and map the perturbed grid U* to X*.
Files are written in the library's `t,j,value` CSV format (1-based).

Usage: python3 scripts/oracles/golden_forward_map.py crates/core/tests/fixtures
"""

import math
import random
import sys
from pathlib import Path

N, T = 100, 50
BETA, GAMMA = 1 / 80, 1 / 10
SEED = 2024
# Changed cell, 0-based: individual 7 at time 4.
T0, J0 = 4, 7


def row(frm, infectives):
    if frm == 0:
        stay = math.exp(-BETA * infectives)
        return [stay, 1 - stay, 0.0]
    if frm == 1:
        stay = math.exp(-GAMMA)
        return [0.0, stay, 1 - stay]
    return [0.0, 0.0, 1.0]


def interval(probs, state):
    last = max(s for s, p in enumerate(probs) if p > 0)
    low = 0.0
    for p in probs[:min(state, last)]:
        low += p
    if state < last:
        return low, low + probs[state]
    if state == last:
        return low, 1.0
    return 1.0, 1.0


def lookup(u, probs):
    for s in range(len(probs)):
        lo, hi = interval(probs, s)
        if lo <= u < hi:
            return s
    raise ValueError("no state for u")


def forward(u):
    # Individual 0 starts infective, everyone else susceptible.
    x = [[1 if j == 0 else 0 for j in range(N)]]
    for t in range(1, T):
        prev = x[-1]
        infectives = sum(1 for s in prev if s == 1)
        x.append([lookup(u[t][j], row(prev[j], infectives)) for j in range(N)])
    return x


def open_unit(rng):
    while True:
        v = rng.random()
        if v > 0.0:
            return v


def write_grid(path, grid, fmt):
    lines = ["t,j,value"]
    for t, r in enumerate(grid):
        for j, v in enumerate(r):
            lines.append(f"{t + 1},{j + 1},{fmt(v)}")
    path.write_text("\n".join(lines) + "\n")


def main(out_dir):
    out_dir = Path(out_dir)
    rng = random.Random(SEED)
    u = [[open_unit(rng) for _ in range(N)] for _ in range(T)]
    x = forward(u)
    prev = x[T0 - 1]
    assert prev[J0] == 0 and x[T0][J0] == 0, "chosen cell must stay susceptible"
    infectives = sum(1 for s in prev if s == 1)
    assert infectives > 0
    lo, hi = interval(row(0, infectives), 0)
    u_star = [r[:] for r in u]
    u_star[T0][J0] = (hi + 1.0) / 2
    x_star = forward(u_star)
    assert x_star[T0][J0] == 1
    write_grid(out_dir / "sir_golden_u.csv", u, repr)
    write_grid(out_dir / "sir_golden_u_star.csv", u_star, repr)
    write_grid(out_dir / "sir_golden_x.csv", x, lambda s: str(s + 1))
    write_grid(out_dir / "sir_golden_x_star.csv", x_star, lambda s: str(s + 1))
    changed = sum(a != b for ra, rb in zip(x, x_star) for a, b in zip(ra, rb))
    print(f"cells changed by the ripple: {changed}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/core/tests/fixtures")
