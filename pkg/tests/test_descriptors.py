"""Descriptor values against closed forms and hand-computed orbits."""
import math

import numpy as np
import pytest

from ldesc.descriptors import (
    DescriptorSpec,
    KIND_ALIASES,
    MissingInverse,
    NonFiniteOrbit,
    compute_Lf,
    compute_M,
    compute_MDp,
    evaluate_batch,
)
from ldesc.integrate import OverflowGuard
from ldesc.systems import (
    DiscreteMap2D,
    basin2d,
    duffing_damped,
    linear_map,
    perturbed_map,
    rotation2d,
    saddle2d,
    shear_tanh,
)


def test_shear_stable_axis_value():
    # on the y-axis the two-sided arc is y0 (e^tau - e^-tau) exactly
    want = 0.5 * (math.exp(3.0) - math.exp(-3.0))
    got = compute_M(shear_tanh(), (0.0, 0.5), 0.0, 3.0)
    assert abs(got - want) < 1e-6 * want


def test_rotation_value():
    got = compute_M(rotation2d(), (3.0, 4.0), 0.0, 5.0)
    assert abs(got - 50.0) < 1e-6 * 50.0


def test_one_sided_kinds_sum_to_both():
    system = saddle2d(1.0)
    x0 = np.array([[0.3, 0.4]])
    both, _ = evaluate_batch(system, x0, DescriptorSpec(kind="M_both", tau=2.0))
    fwd, _ = evaluate_batch(system, x0, DescriptorSpec(kind="M_forward", tau=2.0))
    bwd, _ = evaluate_batch(system, x0, DescriptorSpec(kind="M_backward", tau=2.0))
    assert both[0] == fwd[0] + bwd[0]
    assert fwd[0] > 0 and bwd[0] > 0


def test_forward_arc_on_relaxing_ray():
    # from (1.1, 1.0) the basin flow relaxes along y = 1: x(t) = 1 + 0.1 e^-t,
    # so the forward arc is 0.1 (1 - e^-tau)
    want = 0.1 * (1.0 - math.exp(-2.0))
    got = compute_Lf(basin2d(), (1.1, 1.0), 0.0, 2.0)
    assert abs(got - want) < 1e-8 * want


def test_config_speed_restricts_integrand():
    # on the saddle, config speed counts only |x'| = x0 e^t
    want = 0.1 * (math.exp(1.0) - 1.0)
    got = compute_Lf(saddle2d(1.0), (0.1, 0.7), 0.0, 1.0, speed="config")
    assert abs(got - want) < 1e-8 * want
    full = compute_Lf(saddle2d(1.0), (0.1, 0.7), 0.0, 1.0)
    assert got < full


def test_config_speed_needs_even_dimension():
    from ldesc.systems import linear3d

    with pytest.raises(ValueError, match="even"):
        compute_Lf(linear3d(), (0.1, 0.1, 0.1), 0.0, 1.0, speed="config")


def test_config_speed_on_oscillator():
    # (q, qdot) system: config speed is |qdot|, so the arc is the total
    # variation of q; from rest at an equilibrium it stays 0
    got = compute_Lf(duffing_damped(), (1.0, 0.0), 0.0, 5.0, speed="config")
    assert got < 1e-9


def test_mdp_hand_value():
    # one step each way of (2x, y/2) from (1,1): 1 + sqrt(1/2) twice over
    want = 2.0 + math.sqrt(2.0)
    got = compute_MDp(linear_map(2.0), (1.0, 1.0), 1, 0.5)
    assert abs(got - want) <= 1e-12


def test_mdp_fixed_point_is_zero():
    assert compute_MDp(linear_map(2.0), (0.0, 0.0), 5, 0.5) == 0.0


def test_mdp_brute_force_loop():
    # independent scalar loop over the same orbit
    mp = linear_map(2.0)
    rng = np.random.default_rng(11)
    pts = rng.uniform(-2.0, 2.0, size=(20, 2))
    for n, p in ((1, 0.3), (3, 0.5), (5, 0.8)):
        vals, failures = evaluate_batch(mp, pts, DescriptorSpec(kind="MD_p", p=p, n=n))
        assert not failures
        for row, (x0, y0) in enumerate(pts):
            total = 0.0
            for seq_x, seq_y in (
                ([x0 * 2.0**i for i in range(n + 1)], [y0 / 2.0**i for i in range(n + 1)]),
                ([x0 / 2.0**i for i in range(n + 1)], [y0 * 2.0**i for i in range(n + 1)]),
            ):
                for i in range(n):
                    total += abs(seq_x[i + 1] - seq_x[i]) ** p
                    total += abs(seq_y[i + 1] - seq_y[i]) ** p
            assert abs(vals[row] - total) < 1e-12 * max(1.0, total)


def test_mdp_needs_inverse():
    one_way = DiscreteMap2D(name="one_way", step=lambda x, y: (2.0 * x, y / 2.0))
    with pytest.raises(MissingInverse):
        compute_MDp(one_way, (1.0, 1.0), 3, 0.5)


def test_mdp_non_finite_orbit():
    runaway = DiscreteMap2D(
        name="runaway",
        step=lambda x, y: (x * 1e200, y),
        inverse=lambda x, y: (x / 1e200, y),
    )
    with pytest.raises(NonFiniteOrbit):
        compute_MDp(runaway, (1.0, 1.0), 3, 0.5)


def test_perturbed_map_descriptor_positive_off_axis():
    mp = perturbed_map()
    on_axis = compute_MDp(mp, (3.0, 0.0), 5, 0.5)
    off_axis = compute_MDp(mp, (3.0 + 1e-6, 0.0), 5, 0.5)
    assert off_axis > on_axis > 0.0


def test_batch_failures_reported_per_row():
    system = saddle2d(1.0)
    X = np.array([[0.0, 0.5], [1.0, 0.0]])
    vals, failures = evaluate_batch(
        system, X, DescriptorSpec(kind="M_forward", tau=800.0)
    )
    assert np.isfinite(vals[0]) and np.isnan(vals[1])
    assert failures == [(1, "forward:overflow_guard")]


def test_single_point_failure_raises():
    with pytest.raises(OverflowGuard, match="forward"):
        compute_M(saddle2d(1.0), (1.0, 0.0), 0.0, 800.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        DescriptorSpec(kind="M_both")  # missing tau
    with pytest.raises(ValueError):
        DescriptorSpec(kind="M_both", tau=-1.0)
    with pytest.raises(ValueError):
        DescriptorSpec(kind="MD_p", p=1.5, n=3)
    with pytest.raises(ValueError):
        DescriptorSpec(kind="MD_p", p=0.5, n=0)
    with pytest.raises(ValueError):
        DescriptorSpec(kind="M_both", tau=1.0, speed="config")
    with pytest.raises(ValueError):
        DescriptorSpec(kind="nope", tau=1.0)


def test_kind_mismatch():
    with pytest.raises(ValueError):
        evaluate_batch(linear_map(2.0), np.zeros((1, 2)), DescriptorSpec(tau=1.0))
    with pytest.raises(ValueError):
        evaluate_batch(
            saddle2d(1.0), np.zeros((1, 2)), DescriptorSpec(kind="MD_p", p=0.5, n=1)
        )


def test_aliases():
    assert KIND_ALIASES == {
        "M": "M_both",
        "Mf": "M_forward",
        "Mb": "M_backward",
        "Lf": "L_forward",
    }


def test_spec_to_dict():
    spec = DescriptorSpec(kind="M_both", tau=5.0, t0=1.0)
    assert spec.to_dict() == {"kind": "M_both", "tau": 5.0, "t0": 1.0}
    spec = DescriptorSpec(kind="L_forward", tau=2.0, speed="config")
    assert spec.to_dict()["speed"] == "config"
    spec = DescriptorSpec(kind="MD_p", p=0.5, n=4)
    assert spec.to_dict() == {"kind": "MD_p", "p": 0.5, "n": 4}
