#!/usr/bin/env python3
"""Smoke test for the qdep Python extension module.

Builds nothing itself: run `cargo build -p qdep-py` first, then
`python3 python/smoke_test.py`. The script stages the compiled cdylib into a
temporary directory under the importable name `qdep` and exercises the main
types and operations.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]


def stage_module() -> None:
    candidates = [
        ROOT / "target" / "debug" / "libqdep_py.so",
        ROOT / "target" / "release" / "libqdep_py.so",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("build the extension first: cargo build -p qdep-py")
    stage = Path(tempfile.mkdtemp(prefix="qdep_smoke_"))
    shutil.copy2(built, stage / "qdep.so")
    sys.path.insert(0, str(stage))


stage_module()
import qdep  # noqa: E402


def check_models() -> None:
    upper = qdep.Model("frechet-upper")
    assert upper.cdf(0.3, 0.7) == 0.3
    assert upper.label() == "frechet-upper"

    indep = qdep.Model("independence")
    assert indep.q(0.25, 0.75) == 0.0
    assert indep.cdf(0.5, 0.25) == 0.125

    mixture = qdep.Model("frechet-mixture:0.5")
    assert mixture.cdf(0.25, 0.5) == 0.1875

    ms = qdep.Model("mai-scherer:0.9,0.5")
    assert ms.cdf(0.25, 0.25) == 0.14358729437462936

    assert qdep.bounds(0.5, 0.5) == (-1.0, 1.0)
    lo, hi = qdep.bounds(0.25, 0.75)
    assert lo == -1.0 and 0.0 < hi < 1.0

    mo = qdep.Model("marshall-olkin:0.5,0.75")
    diff = mo.q(0.37, 0.62) - mo.q_via_correlation(0.37, 0.62)
    assert abs(diff) <= 1e-12

    surface = mo.q_surface(16)
    assert len(surface) == 225
    assert all(lo_ <= 1.0 for (_, _, lo_) in surface)

    try:
        qdep.Model("nonsense:1")
    except ValueError:
        pass
    else:
        raise AssertionError("bad model spec should raise ValueError")

    try:
        qdep.Model("quasi-cc:0.5").sample(10, 0)
    except ValueError:
        pass
    else:
        raise AssertionError("sampling a non-copula should raise ValueError")


def check_sampling() -> None:
    model = qdep.Model("marshall-olkin:0.5,0.75")
    first = model.sample(200, 7)
    again = model.sample(200, 7)
    assert first == again, "sampling must be deterministic in the seed"
    assert all(0.0 < u < 1.0 and 0.0 < v < 1.0 for (u, v) in first)
    other = model.sample(200, 8)
    assert first != other


def check_rank_statistics() -> None:
    pairs = [(float(i), float(i * i)) for i in range(1, 41)]  # comonotone
    data = qdep.RankData(pairs, ties="strict")
    assert data.n == 40
    assert not data.has_ties
    assert data.dn(1.0, 1.0) == 1.0
    assert data.ln(0.5, 0.5) > 0.0
    obs = data.pseudo_obs()
    assert len(obs) == 40 and all(0.0 < u < 1.0 for (u, _) in obs)

    l_star, l_upper, l_o = data.summary()
    assert l_star <= l_upper
    assert l_o == max(abs(l_star), abs(l_upper))
    assert math.isfinite(l_o) and l_o > 3.0

    rows = data.surface(g=8, standardized=False)
    assert len(rows) == 49

    tied = qdep.RankData([(1.0, 2.0), (1.0, 3.0), (2.0, 1.0)], ties="midrank")
    assert tied.has_ties
    try:
        qdep.RankData([(1.0, 2.0), (1.0, 3.0), (2.0, 1.0)], ties="strict")
    except ValueError:
        pass
    else:
        raise AssertionError("strict policy should reject ties")


def check_inference() -> None:
    cv = qdep.critical_value(200, 0.5, 0.5, 0.05, b=10_000, seed=1)
    assert abs(cv - 1.980) <= 0.10

    quantiles = qdep.signed_quantiles(100, 0.5, 0.5, [0.05, 0.95], b=2000, seed=3)
    assert quantiles[0] < 0.0 < quantiles[1]

    counter = [(float(i), float(-i)) for i in range(1, 61)]  # countermonotone
    nqd = qdep.run_test("nqd", counter, b=500, seed=1, ties="strict")
    assert nqd.test == "global_nqd_Lupper"
    assert nqd.p_value >= 0.99
    assert nqd.n == 60 and nqd.b == 500

    mono = [(float(i), float(i)) for i in range(1, 51)]
    indep = qdep.run_test("independence", mono, b=500, seed=2, ties="strict")
    assert indep.p_value < 0.05

    try:
        qdep.run_test("pointwise", mono, b=100)
    except ValueError:
        pass
    else:
        raise AssertionError("pointwise without a point should raise ValueError")

    stats = qdep.classical_stats(mono, b=400, seed=5)
    assert [s.name for s in stats] == ["pearson", "spearman", "kendall", "blomqvist"]
    by_name = {s.name: s for s in stats}
    assert by_name["spearman"].estimate == 1.0
    assert by_name["kendall"].estimate == 1.0
    assert all(0.0 <= s.p_value <= 1.0 for s in stats)


def main() -> None:
    assert qdep.__version__
    check_models()
    check_sampling()
    check_rank_statistics()
    check_inference()
    print("qdep python smoke test: all checks passed")


if __name__ == "__main__":
    main()
