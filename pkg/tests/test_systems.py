"""Catalog field definitions, invariants, and config loading."""
import json
import math

import numpy as np
import pytest

from ldesc import systems
from ldesc.systems import (
    ConfigError,
    NotInCatalog,
    bump_g,
    basin2d,
    catalog,
    duffing_damped,
    estimate_divergence,
    get,
    linear3d,
    linearNd,
    linear_map,
    load_config,
    perturbed_map,
    rotation2d,
    saddle2d,
    shear_piecewise,
    shear_tanh,
)


def vel(system, point, t=0.0):
    return system.velocity(np.asarray(point, dtype=float)[None, :], t)[0]


def test_saddle_velocity():
    np.testing.assert_array_equal(vel(saddle2d(1.0), (1.0, 1.0)), [1.0, -1.0])
    np.testing.assert_array_equal(vel(saddle2d(2.0), (1.0, 3.0)), [2.0, -6.0])


def test_rotation_velocity():
    np.testing.assert_array_equal(vel(rotation2d(), (3.0, 4.0)), [-4.0, 3.0])


def test_rotation_closed_form():
    orc = rotation2d().oracle
    assert orc.value(5.0, 0.0, np.array([3.0, 4.0])) == 2.0 * 5.0 * 5.0


def test_basin_equilibria():
    sys2 = basin2d()
    assert (1.0, 1.0) in sys2.attractors and (-1.0, -1.0) in sys2.attractors
    np.testing.assert_array_equal(vel(sys2, (2.0, 1.0)), [-1.0, 0.0])
    # odd symmetry of the y-dynamics
    for y in (0.3, 1.7):
        up = vel(sys2, (0.0, y))[1]
        down = vel(sys2, (0.0, -y))[1]
        assert up == -down


def test_equilibria_have_zero_velocity():
    for system in catalog():
        if not isinstance(system, systems.FlowSystem):
            continue
        for point in system.equilibria:
            for t in (0.0, 1.0):
                residual = np.max(np.abs(vel(system, point, t)))
                assert residual == 0.0, f"{system.name} at {point}: {residual}"


def test_divergence_free_fields():
    rng = np.random.default_rng(0)
    for system in catalog():
        if not isinstance(system, systems.FlowSystem) or not system.incompressible:
            continue
        bounds = np.array(system.reference_region)
        for _ in range(25):
            point = bounds[:, 0] + rng.random(system.dimension) * (
                bounds[:, 1] - bounds[:, 0]
            )
            div = estimate_divergence(system, point)
            assert abs(div) < 1e-6, f"{system.name} at {point}: div {div}"


def test_linear3d_divergence_is_trace():
    system = linear3d(0.5, 1.5, 2.0)
    assert system.incompressible  # rates balance: 0.5 + 1.5 - 2.0 = 0
    div = estimate_divergence(system, (0.2, -0.1, 0.3))
    assert abs(div) < 1e-9
    skewed = linearNd((0.5, 1.5, -1.0))
    assert not skewed.incompressible
    assert abs(estimate_divergence(skewed, (0.1, 0.2, 0.3)) - 1.0) < 1e-9


def test_shear_profiles():
    # drift must vanish only at the origin, be odd, bounded, and have its
    # steepest slope there
    for system in (shear_tanh(), shear_piecewise()):
        xs = np.linspace(-10.0, 10.0, 2001)
        states = np.stack([xs, np.zeros_like(xs)], axis=1)
        fx = system.velocity(states, 0.0)[:, 0]
        assert fx[xs == 0.0] == 0.0
        assert np.all(np.sign(fx[xs != 0.0]) == np.sign(xs[xs != 0.0]))
        assert np.all(np.abs(fx) <= np.pi / 2 + 1.0 + 1e-12)
        slopes = np.gradient(fx, xs)
        assert slopes.max() <= 1.0 + 1e-6


def test_piecewise_shear_plateau_is_exact():
    system = shear_piecewise()
    xs = np.linspace(-1.0, 1.0, 41)
    states = np.stack([xs, np.full_like(xs, 0.7)], axis=1)
    v = system.velocity(states, 0.0)
    np.testing.assert_array_equal(v[:, 0], xs)       # f(x) = x on the plateau
    np.testing.assert_array_equal(v[:, 1], np.full_like(xs, -0.7))  # f' = 1
    # C1 at the seam: slope from the tail side approaches 1
    eps = 1e-7
    tail = system.velocity(np.array([[1.0 + eps, 0.0], [1.0 + 2 * eps, 0.0]]), 0.0)
    slope = (tail[1, 0] - tail[0, 0]) / eps
    assert abs(slope - 1.0) < 1e-6


def test_bump_support():
    assert bump_g(0.0) == 0.0
    assert bump_g(1.0) == 0.0
    assert bump_g(2.0) == 0.0
    assert bump_g(-0.5) == 0.0
    assert bump_g(0.5) == math.exp(-4.0)
    assert bump_g(1e-12) == 0.0  # underflows cleanly, no warning
    arr = bump_g(np.array([-1.0, 0.25, 0.5, 0.75, 1.5]))
    assert arr[0] == 0.0 and arr[4] == 0.0
    assert arr[1] == arr[3] > 0.0  # symmetric about 1/2
    assert arr[2] == math.exp(-4.0)


def test_map_round_trips():
    rng = np.random.default_rng(1)
    pts = rng.uniform(-2.0, 2.0, size=(50, 2))
    for mp in (linear_map(2.0), perturbed_map()):
        fx, fy = mp.step(pts[:, 0], pts[:, 1])
        bx, by = mp.inverse(fx, fy)
        np.testing.assert_allclose(bx, pts[:, 0], rtol=0, atol=1e-12)
        np.testing.assert_allclose(by, pts[:, 1], rtol=0, atol=1e-12)
        bx, by = mp.inverse(pts[:, 0], pts[:, 1])
        fx, fy = mp.step(bx, by)
        np.testing.assert_allclose(fx, pts[:, 0], rtol=0, atol=1e-12)
        np.testing.assert_allclose(fy, pts[:, 1], rtol=0, atol=1e-12)


def test_map_fixed_points():
    for mp in (linear_map(), perturbed_map()):
        for x, y in mp.fixed_points:
            fx, fy = mp.step(x, y)
            assert (fx, fy) == (x, y)


def test_perturbed_backward_orbit_leaves_axis():
    mp = perturbed_map()
    x, y = 3.0, 0.0
    x, y = mp.inverse(x, y)
    assert (x, y) == (1.5, 0.0)  # g vanishes outside (0, 1)
    x, y = mp.inverse(x, y)
    assert x == 0.75
    assert y == -2.0 * bump_g(0.75)
    assert y != 0.0


def test_perturbed_forward_orbit_stays_on_axis():
    mp = perturbed_map()
    x, y = 1.0, 0.0
    for _ in range(20):
        x, y = mp.step(x, y)
        assert y == 0.0


def test_catalog_names():
    names = [s.name for s in catalog()]
    for expected in (
        "saddle2d",
        "rotation2d",
        "shear_tanh",
        "shear_piecewise",
        "linear3d",
        "linearNd",
        "basin2d",
        "duffing_damped",
        "linear_map",
        "perturbed_map",
    ):
        assert expected in names
    assert get("duffing_damped").dimension == 2


def test_not_in_catalog():
    with pytest.raises(NotInCatalog):
        get("no_such_system")


def test_bad_factory_params():
    with pytest.raises(ConfigError):
        saddle2d(0.0)
    with pytest.raises(ConfigError):
        linear_map(1.0)
    with pytest.raises(ConfigError):
        linearNd((1.0, 0.0))


def test_load_config_round_trip(tmp_path):
    cfg = {
        "name": "custom_saddle",
        "dimension": 2,
        "components": ["x", "-y"],
        "equilibria": [[0.0, 0.0]],
        "region": [[-2.0, 2.0], [-2.0, 2.0]],
    }
    path = tmp_path / "sys.json"
    path.write_text(json.dumps(cfg))
    system = load_config(path)
    assert system.name == "custom_saddle"
    np.testing.assert_array_equal(vel(system, (0.5, 0.25)), [0.5, -0.25])
    # batched evaluation broadcasts constants and t
    pts = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(system.velocity(pts, 0.0)[:, 0], [1.0, 3.0])


def test_load_config_time_dependent():
    system = load_config(
        {"name": "driven", "dimension": 1, "components": ["sin(t)-x"]}
    )
    assert vel(system, (0.0,), t=math.pi / 2)[0] == 1.0


def test_load_config_rejects_bad_equilibrium():
    with pytest.raises(ConfigError, match="residual"):
        load_config(
            {
                "name": "broken",
                "dimension": 2,
                "components": ["x+1", "-y"],
                "equilibria": [[0.0, 0.0]],
            }
        )


def test_load_config_rejects_out_of_dimension_vars():
    with pytest.raises(ConfigError, match="component 1"):
        load_config({"name": "bad", "dimension": 2, "components": ["x", "z"]})
    with pytest.raises(ConfigError):
        load_config({"name": "bad", "dimension": 2, "components": ["x", "w4"]})


def test_load_config_rejects_syntax_and_unknown_names():
    with pytest.raises(ConfigError, match="component 0"):
        load_config({"name": "bad", "dimension": 1, "components": ["1+"]})
    with pytest.raises(ConfigError, match="component 0"):
        load_config({"name": "bad", "dimension": 1, "components": ["foo(x)"]})


def test_load_config_missing_key():
    with pytest.raises(ConfigError, match="components"):
        load_config({"name": "bad", "dimension": 2})


def test_config_aliases_w1_w2():
    system = load_config(
        {"name": "alias", "dimension": 2, "components": ["w2", "-w1"]}
    )
    np.testing.assert_array_equal(vel(system, (3.0, 4.0)), [4.0, -3.0])
