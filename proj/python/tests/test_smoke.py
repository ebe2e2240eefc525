import math

import pytest

import perclab


def test_family_and_patch():
    fam = perclab.GraphFamily.parse("HyperCubic(2)")
    assert fam.name == "HyperCubic(2)"
    g = perclab.build_patch("HyperCubic(2)", 3)
    assert g.num_vertices == 2 * 3 * 3 + 2 * 3 + 1
    assert g.growth(2) == 13
    assert perclab.growth_of("RegularTree(3)", 2) == 10
    assert len(g.sphere(3)) == 12
    assert all(abs(g.dist(a) - g.dist(b)) <= 1 for a, b in g.edges())
    assert g.to_text().startswith("perclab-patch")


def test_sprinkle_roundtrip():
    for p in (0.1, 0.5, 0.9):
        q = perclab.sprinkle(p, 0.3)
        assert q > p
        assert math.isclose(perclab.delta(p, q), 0.3, rel_tol=1e-12)


def test_heat_kernel_two_steps():
    mass = perclab.heat_kernel("HyperCubic(2)", 4, 2)
    assert math.isclose(mass[0], 5 / 16, rel_tol=1e-14)
    assert math.isclose(sum(mass), 1.0, rel_tol=1e-12)


def test_schedule_and_estimates():
    s = perclab.schedule(16, 0.5, i_max=6)
    assert math.isclose(s["delta"][1] / s["delta"][2], 3.0, rel_tol=1e-12)
    assert s["p"][-1] <= s["p_infinity"] <= s["p_infinity_bound"]
    est = perclab.sphere_connection("HyperCubic(2)", 4, 1.0, 3, 20, 1)
    assert est["mean"] == 1.0


def test_errors_map_to_value_error():
    with pytest.raises(ValueError):
        perclab.schedule(10, 0.5)
    with pytest.raises(ValueError):
        perclab.run_config("[experiment]\nname = nope\n")


def test_run_config_replays():
    cfg = "[experiment]\nname = walk-checks\nfamily = HyperCubic(2)\nt_max = 3\nradius = 5\nkernel_t = 4\nseed = 2\n"
    ok, h, recs = perclab.run_config(cfg, record_timing=False)
    ok2, h2, recs2 = perclab.run_config(cfg, record_timing=False)
    assert ok and ok2 and h == h2
    assert recs == recs2
    assert all(r["config_hash"] == h for r in recs)
    names = [name for name, _ in perclab.list_experiments()]
    assert "walk-checks" in names
