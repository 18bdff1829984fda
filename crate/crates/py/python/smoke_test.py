"""Smoke test for the pyrde3 extension module.

Build and install first, e.g. ``maturin develop`` inside crates/py, then run
``python python/smoke_test.py``.
"""

import math

import pyrde3


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    assert pyrde3.presets() == ["example1", "example2", "example3", "example4"]

    params, x0, y0 = pyrde3.preset("example1")
    assert (params.alpha, params.p, params.q) == (2.0, 0.6, 0.9)
    assert params.equilibrium() == (3.0, 3.0)

    x1, y1 = pyrde3.step(params, x0, y0)
    assert close(x1, 3.143262629818316, 1e-12) and close(y1, 2.818052146050858, 1e-12)

    orbit = pyrde3.simulate(params, x0, y0, 200)
    assert orbit.termination == "completed" and len(orbit) == 203
    assert orbit.n[0] == -2 and orbit.last_index == 200
    assert orbit.final_distance() < 1e-6
    assert orbit.to_csv().startswith("n,x,y\n-2,2.5,4\n")

    checked, violations = pyrde3.audit_bounds(pyrde3.simulate(params, x0, y0, 500))
    assert checked == 1000 and violations == []

    a, b, c = pyrde3.envelope(params)
    assert close(a, 2 ** -1.5, 1e-15) and close(b, 2 ** 0.4 + 2, 1e-14)
    assert close(pyrde3.envelope_at(params, "x", 3.5, 200), b / (1 - a), 1e-12)

    report = pyrde3.classify(params)
    assert report["classification"] == "globally-asymptotically-stable"
    assert close(report["spectral_radius"], 0.66507231892392464, 1e-10)
    assert close(report["certificate"]["norm_value"], 12 / 13, 1e-12)
    assert all(isinstance(z, complex) for z in report["eigenvalues"])

    rate = pyrde3.perron_rate(params, x0, y0)
    assert rate["gap"] < 1e-3
    assert abs(rate["ratio_estimate"] - rate["root_estimate"]) < 1e-2

    cycles, rule_holds = pyrde3.semicycles(params, x0, y0, 300)
    assert rule_holds and cycles[0][:3] == ("x", "negative", -2)
    assert pyrde3.oscillation(params, x0, y0, 300)[2] == "oscillatory"
    assert pyrde3.find_period2(params, points=4)[0] is False

    ratio, root = pyrde3.estimate_rate([0.5 ** n for n in range(100)], 20, 50)
    assert ratio == 0.5 and math.isclose(root, 0.5)

    bad, bx, by = pyrde3.preset("example4")
    report = pyrde3.classify(bad)
    assert not report["hypotheses_hold"] and report["certificate"] is None
    try:
        pyrde3.perron_rate(bad, bx, by)
    except RuntimeError as e:
        assert "does not converge" in str(e)
    else:
        raise AssertionError("example4 should not yield a rate")

    for call in (lambda: pyrde3.Params(2.0, -1.0, 0.5), lambda: pyrde3.envelope(bad)):
        try:
            call()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")
    try:
        pyrde3.preset("example9")
    except KeyError:
        pass
    else:
        raise AssertionError("expected KeyError")

    print("pyrde3 smoke test passed")


if __name__ == "__main__":
    main()
