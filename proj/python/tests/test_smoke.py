import numpy as np
import pytest

import cennq


def test_quant_set():
    assert cennq.bit_width(-2, 2) == 5
    assert cennq.quant_values(0, 0) == [-1.0, 0.0, 1.0]
    assert cennq.quantize_value(0.74, -2, 2) == 0.5
    assert cennq.quantize_value(0.76, -2, 2) == 1.0
    assert cennq.nn_distance(3.5) == 0.5


def test_identity_run_keeps_binary_input():
    u = np.where(np.arange(64).reshape(8, 8) % 3 == 0, 1.0, -1.0)
    b = [0, 0, 0, 0, 1, 0, 0, 0, 0]
    y = cennq.run(u, [0] * 9, b, dt=0.5, iterations=10)
    assert y.shape == (8, 8)
    assert np.array_equal(y, u)


def test_fixed_run_matches_float():
    rng = np.random.default_rng(3)
    u = rng.uniform(-1, 1, size=(8, 8))
    a = [0, 0.5, 0, 0.5, 2, 0.5, 0, 0.5, 0]
    b = [0.25, 0, 0.25, 0, 1, 0, 0.25, 0, 0.25]
    ref = cennq.run(u, a, b, bias=-0.25, dt=0.5, iterations=10)
    out, saturations, cycles = cennq.fixed_run(u, a, b, bias=-0.25, dt=0.5, iterations=10)
    assert saturations == 0
    assert cycles == 11
    wide, _, _ = cennq.fixed_run(u, a, b, bias=-0.25, dt=0.5, iterations=10, frac_bits=16)
    assert np.max(np.abs(wide - ref)) < np.max(np.abs(out - ref))
    assert np.max(np.abs(wide - ref)) < 1e-2


def test_fixed_run_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        cennq.fixed_run(np.zeros((4, 4)), [0.3] + [0] * 8, [0] * 9)


def test_schedule_cycles():
    k = [0, 0.5, 0, 0.5, -2, 0.5, 1, 0, 0.25]
    assert cennq.schedule_cycles(k) == 9
    assert cennq.schedule_cycles(k, sparsity=True) == 6
    assert cennq.schedule_cycles(k, sparsity=True, repetition=True) == 4


def test_minimize_finds_quadratic_minimum():
    pos, val, hist = cennq.minimize(lambda x: (x[0] - 1.5) ** 2 + (x[1] + 0.5) ** 2, 2, -4, 4,
                                    iterations=200, seed=1)
    assert val < 1e-6
    assert abs(pos[0] - 1.5) < 1e-3 and abs(pos[1] + 0.5) < 1e-3
    assert all(b <= a for a, b in zip(hist, hist[1:]))


def test_synthesize_flip_count():
    (u, ideal), = cennq.synthesize("noise", 32, 1, 0.1, 5)
    assert int(np.sum(u != ideal)) == 102


def test_project_tables():
    rows = {(r["table"], r["label"]): r for r in cennq.project()}
    assert rows[("3", "Ours (1 shif.)")]["stages"] == 28
    assert rows[("4", "Ours (9 Shif.)")]["speedup"] == pytest.approx(3.5)
    assert all(r["speedup"] is None for (t, _), r in rows.items() if t == "5")


def test_cli_usage_error():
    code, out, err = cennq.cli(["quantize"])
    assert code == 1
    assert "error" in err
