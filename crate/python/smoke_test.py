"""Smoke test for the pyrisloc extension.

Build and install first:
    maturin build --release -m crates/python/Cargo.toml
    pip install target/wheels/pyrisloc-*.whl
"""

import math

import pyrisloc


def main():
    zc = pyrisloc.generate_zc(63, 5)
    assert len(zc) == 63
    assert all(abs(abs(s) - 1.0) < 1e-12 for s in zc)

    # a cyclic shift by 10 samples peaks at lag 10
    shifted = zc[-10:] + zc[:-10]
    corr = pyrisloc.cross_correlate(shifted, 63, 5)
    assert max(range(63), key=corr.__getitem__) == 10

    target = (400.0, 750.0)
    theta, tau = pyrisloc.forward_sensing(target)
    x, y = pyrisloc.map_to_position(theta, tau)
    assert math.hypot(x - target[0], y - target[1]) < 1e-6

    out = pyrisloc.run_trial([target, (500.0, 300.0)], ris_elements=64, seed=3)
    assert out["k_hat"] == 2, out
    pairs = pyrisloc.pair_targets(out["true_positions"], out["estimated_positions"])
    assert len(pairs) == 2
    err = pyrisloc.total_squared_distance(out["true_positions"], out["estimated_positions"])
    assert err < 0.5, err

    config = """
trials = 4
record_timing = false
[axes]
snr_db = [0.0]
ris_elements = [16]
targets = [1, 2]
"""
    rows = pyrisloc.run_sweep(config, ["master_seed=7"])
    assert [r["K"] for r in rows] == [1, 2]
    assert all(r["P"] == 4 and 0.0 <= r["p_d"] <= 1.0 for r in rows)
    assert pyrisloc.CSV_HEADER.startswith("snr_db,M,K,P")

    try:
        pyrisloc.run_sweep("trials = 0")
    except ValueError:
        pass
    else:
        raise AssertionError("invalid config accepted")

    print("pyrisloc smoke test passed")


if __name__ == "__main__":
    main()
