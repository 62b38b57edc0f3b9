"""Quick end-to-end check of the bindings. Run after `maturin develop`."""

import json
import math

import solitonlab_py as sl


def main():
    c = sl.curvature("nil3")
    assert c["scalar"] == "-1/2", c
    assert c["ricci"][2][2] == "2"

    v = sl.verify_soliton("sol3", gamma="1/3", samples=20)
    assert v["exact"] and v["nongradient"], v
    assert v["residual_max"] < 1e-10

    s = sl.stability("sol3")
    assert abs(s["omega_optimal"] - (5 - math.sqrt(17)) / 2) < 1e-9, s
    assert len(s["M"]) == 6

    times, metrics = sl.ricci_flow("nil3", t0=1.0, t1=100.0, per_decade=2)
    assert len(times) == len(metrics) == 5
    assert all(abs(m[0][1]) < 1e-12 for m in metrics)

    r = sl.resolvent_bound("nil3", grid=10)
    assert r["slack_u0"] <= 0.0, r

    report = json.loads(sl.run_criteria([1, 3]))
    ids = [c["id"] for c in report["criteria"]]
    assert ids == [1, 3], ids

    try:
        sl.stability("nil5")
    except KeyError:
        pass
    else:
        raise AssertionError("unknown geometry accepted")
    print("smoke test ok")


if __name__ == "__main__":
    main()
