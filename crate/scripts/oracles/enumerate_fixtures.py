"""Exact posteriors of the two tiny test fixtures by brute force.

Independent of the Rust code: the transition and observation models are
written out by hand below and evaluated with mpmath at 40 digits.

Configuration ids follow the library convention: with 0-based states and
cells ordered time-major, id = sum_{t,j} x[t][j] * S**(t*N + j).

Usage: python3 scripts/oracles/enumerate_fixtures.py crates/core/tests/fixtures
"""

import itertools
import sys
from pathlib import Path

from mpmath import mp, mpf, exp

mp.dps = 40

N, T = 2, 3
SE, SP = mpf("0.8"), mpf("0.9")


def sis_row(frm, infectives):
    beta, gamma = mpf("0.8"), mpf("0.5")
    if frm == 0:
        rate = beta * infectives
        return [exp(-rate), 1 - exp(-rate)]
    return [1 - exp(-gamma), exp(-gamma)]


def sir_row(frm, infectives):
    beta, gamma = mpf("0.9"), mpf("0.6")
    if frm == 0:
        rate = beta * infectives
        return [exp(-rate), 1 - exp(-rate), mpf(0)]
    if frm == 1:
        return [mpf(0), exp(-gamma), 1 - exp(-gamma)]
    return [mpf(0), mpf(0), mpf(1)]


def test_lik(positive, state):
    infected = state == 1
    if positive:
        return SE if infected else 1 - SP
    return 1 - SE if infected else SP


FIXTURES = {
    "sis": {
        "S": 2,
        "row": sis_row,
        "initial": [mpf("0.6"), mpf("0.4")],
        "tests": {(0, 0): True, (1, 1): False, (2, 0): True},
    },
    "sir": {
        "S": 3,
        "row": sir_row,
        "initial": [mpf("0.5"), mpf("0.5"), mpf(0)],
        "tests": {(0, 1): False, (1, 0): True, (2, 1): True},
    },
}


def unnormalised(fx, x):
    w = mpf(1)
    for j in range(N):
        w *= fx["initial"][x[0][j]]
    for t in range(T - 1):
        infectives = sum(1 for s in x[t] if s == 1)
        for j in range(N):
            w *= fx["row"](x[t][j], infectives)[x[t + 1][j]]
    for (t, j), positive in fx["tests"].items():
        w *= test_lik(positive, x[t][j])
    return w


def config_id(x, s):
    return sum(x[t][j] * s ** (t * N + j) for t in range(T) for j in range(N))


def main(out_dir):
    out_dir = Path(out_dir)
    for name, fx in FIXTURES.items():
        s = fx["S"]
        table = {}
        for cells in itertools.product(range(s), repeat=N * T):
            x = [list(cells[t * N:(t + 1) * N]) for t in range(T)]
            table[config_id(x, s)] = unnormalised(fx, x)
        z = sum(table.values())
        lines = ["config_id,probability"]
        for cid in sorted(table):
            lines.append(f"{cid},{mp.nstr(table[cid] / z, 20, min_fixed=-30, max_fixed=30)}")
        (out_dir / f"{name}_posterior.csv").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/core/tests/fixtures")
