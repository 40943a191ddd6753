"""Smoke test for the `jps` extension module."""

import math

import jps


def main():
    c = jps.coefficients("jps", 2, 2)
    assert c["v_c1"] == 0.125 and c["e_j1c1sq"] == 0.25, c

    sm = jps.stratum_moments("uniform", 2)
    assert abs(sm["mu_r"][0] - 1 / 3) < 1e-12 and abs(sm["mu_r"][1] - 2 / 3) < 1e-12
    assert abs(sm["delta_g"] - 1 / 3) < 1e-12

    assert jps.optimal_h("normal", 20) == (6, 2.01)
    assert abs(jps.re_vs_srs("uniform", 10, 1) - 1.0) < 1e-12

    v = jps.theoretical_variance("uniform", 7, 1, scheme="srs")
    assert abs(v - 1 / 84) < 1e-14

    assert jps.estimate([1.0, 3.0, 5.0], [1, 1, 2], 2) == 3.5
    assert jps.estimate([1.0, 3.0, 5.0], [1, 1, 2], 2, scheme="srs") == 3.0

    xs, ranks = jps.simulate_jps("normal", 50, 4, seed=3)
    assert len(xs) == 50 and all(1 <= r <= 4 for r in ranks)
    assert (xs, ranks) == jps.simulate_jps("normal", 50, 4, seed=3)
    assert math.isfinite(jps.estimate(xs, ranks, 4, scheme="ff"))

    try:
        jps.stratum_moments("t3", 2, g="pow:2")
    except ValueError as e:
        assert "moment does not exist" in str(e)
    else:
        raise AssertionError("expected ValueError")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
