import math
import warnings

import numpy as np
import pytest

from fragspec import (DetectorImage, FocusModel, PopulationModel, focal_radii,
                      gaussian_overlap_factor, intensity_average,
                      load_population_file, mn_average, normalize,
                      peak_intensity, rotational_average, vibrational_average)
from fragspec.averaging import rotational_weights
from fragspec.constants import BOLTZMANN_HARTREE_PER_K
from fragspec.errors import ConfigError, ValidationError

PAPER_FOCUS = dict(e0_mj=0.7, t_ac_fs=240.0, wavelength_nm=785.0,
                   f_mm=1000.0, b_x_mm=2.6, b_y_mm=2.4, half_width_um=50.0)


def image(p, krho=None, alpha=None):
    krho = krho if krho is not None else np.linspace(0, 10, p.shape[0])
    alpha = alpha if alpha is not None else np.linspace(0, np.pi / 2, p.shape[1])
    return DetectorImage(p=np.asarray(p, float), krho=krho, alpha=alpha)


def const_images(values, shape=(40, 9)):
    return [image(np.full(shape, v)) for v in values]


# -- focus formulas -------------------------------------------------------------


def test_focal_radii_match_experiment():
    model = FocusModel(**PAPER_FOCUS)
    r_x, r_y = focal_radii(model)
    assert abs(r_x - 48.0) <= 1.0
    assert abs(r_y - 52.0) <= 1.0


def test_focal_radius_linear_in_f():
    m1 = FocusModel(**PAPER_FOCUS)
    m2 = FocusModel(**{**PAPER_FOCUS, "f_mm": 2000.0})
    assert focal_radii(m2)[0] == pytest.approx(2.0 * focal_radii(m1)[0], rel=1e-12)


def test_peak_intensity_formula():
    model = FocusModel(**PAPER_FOCUS)
    # independent evaluation of the same closed form
    r_x_cm, r_y_cm = (r * 1e-4 for r in focal_radii(model))
    expect = (2.0 * math.sqrt(2.0 * math.log(2.0)) * 0.7e-3
              / (math.pi**1.5 * r_x_cm * r_y_cm * 240e-15))
    assert peak_intensity(model) == pytest.approx(expect, rel=1e-12)
    assert expect == pytest.approx(4.9e13, rel=0.02)


def test_peak_intensity_override():
    model = FocusModel(**PAPER_FOCUS, override_i0=1.6e13)
    assert model.i0 == 1.6e13
    assert model.i0_formula == pytest.approx(4.93e13, rel=0.01)


def test_peak_intensity_linear_in_energy():
    m1 = FocusModel(**PAPER_FOCUS)
    m2 = FocusModel(**{**PAPER_FOCUS, "e0_mj": 1.4})
    assert peak_intensity(m2) == pytest.approx(2.0 * peak_intensity(m1), rel=1e-12)


# -- M_N sum ---------------------------------------------------------------------


def test_mn_average_identity_for_n0():
    img = const_images([3.3])[0]
    out = mn_average({0: img}, 0)
    assert np.array_equal(out.p, img.p)


def test_mn_average_equal_images():
    imgs = const_images([2.0, 2.0])
    out = mn_average({0: imgs[0], 1: imgs[1]}, 1)
    assert np.allclose(out.p, 2.0)


def test_mn_average_coefficients():
    p1 = np.ones((40, 9))
    imgs = {0: image(3.0 * p1), 1: image(p1)}
    out = mn_average(imgs, 1)
    assert np.allclose(out.p, 5.0 / 3.0)  # (1*3P + 2*P)/3


def test_mn_average_missing():
    with pytest.raises(ConfigError, match="M_N"):
        mn_average({0: const_images([1.0])[0]}, 1)


# -- rotational average ----------------------------------------------------------


def test_rotational_high_temperature_limit():
    pops = PopulationModel(a_v={0: 1.0}, t_rot={0: 1e12}, n_max=2)
    shifts = {0: 0.0, 1: 1e-9, 2: 3e-9}
    w = rotational_weights(pops, 0, shifts)
    assert w[0] == pytest.approx(1.0)
    assert w[1] == pytest.approx(3.0)   # ortho factor
    assert w[2] == pytest.approx(1.0)
    imgs = {0: image(np.full((20, 5), 1.0)), 1: image(np.full((20, 5), 2.0)),
            2: image(np.full((20, 5), 3.0))}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")   # deliberate fat tail at n_max
        out = rotational_average(imgs, 0, pops, shifts)
    assert np.allclose(out.p, (1.0 + 6.0 + 3.0) / 5.0)


def test_boltzmann_factor_definition():
    t_v = 300.0
    pops = PopulationModel(a_v={2: 1.0}, t_rot={2: t_v}, n_max=1)
    shifts = {0: 0.0, 1: BOLTZMANN_HARTREE_PER_K * t_v}
    w = rotational_weights(pops, 2, shifts)
    assert w[1] / 3.0 == pytest.approx(math.exp(-1.0), abs=1e-12)
    # weight normalization by construction
    total = sum(w.values())
    assert sum(wv / total for wv in w.values()) == pytest.approx(1.0, abs=1e-12)


def test_rotational_average_convexity():
    pops = PopulationModel(a_v={1: 1.0}, t_rot={1: 200.0}, n_max=2)
    shifts = {0: 0.0, 1: 2e-4, 2: 6e-4}
    base = np.full((20, 5), 4.2)
    imgs = {n: image(base) for n in range(3)}
    out = rotational_average(imgs, 1, pops, shifts)
    assert np.allclose(out.p, 4.2)


def test_rotational_missing_shift():
    pops = PopulationModel(a_v={0: 1.0}, t_rot={0: 300.0}, n_max=1)
    with pytest.raises(ValidationError, match="missing level energy"):
        rotational_average({0: const_images([1.0])[0],
                            1: const_images([1.0])[0]}, 0, pops, {0: 0.0})


def test_rotational_truncation_warning():
    pops = PopulationModel(a_v={0: 1.0}, t_rot={0: 1e12}, n_max=1)
    imgs = {0: const_images([1.0])[0], 1: const_images([1.0])[0]}
    with pytest.warns(UserWarning, match="truncation"):
        rotational_average(imgs, 0, pops, {0: 0.0, 1: 0.0})


# -- vibrational average ---------------------------------------------------------


def test_vibrational_single_identity():
    pops = PopulationModel(a_v={7: 0.8}, t_rot={7: 300.0})
    img = const_images([1.7])[0]
    out = vibrational_average({7: img}, pops)
    assert np.allclose(out.p, 1.7)


def test_vibrational_weights():
    pops = PopulationModel(a_v={6: 1.0, 7: 0.0}, t_rot={6: 300.0, 7: 300.0})
    pa, pb = const_images([2.0, 9.0])
    out = vibrational_average({6: pa, 7: pb}, pops)
    assert np.array_equal(out.p, pa.p)


def test_vibrational_missing_population():
    pops = PopulationModel(a_v={6: 1.0}, t_rot={6: 300.0})
    with pytest.raises(ConfigError, match="no a_v"):
        vibrational_average({6: const_images([1.0])[0],
                             7: const_images([1.0])[0]}, pops)


def test_population_file_round_trip(tmp_path):
    p = tmp_path / "pops.txt"
    p.write_text("# v a T\n6 1.0 375\n7 0.9 290\n")
    pops = load_population_file(p)
    assert pops.a_v == {6: 1.0, 7: 0.9}
    assert pops.t_rot[7] == 290.0
    p2 = tmp_path / "bad.txt"
    p2.write_text("6 1.0\n")
    with pytest.raises(ConfigError):
        load_population_file(p2)


# -- intensity average -----------------------------------------------------------


def focus16():
    return FocusModel(**PAPER_FOCUS, override_i0=1.6e13)


def intensity_grid(model, n):
    g = np.geomspace(model.i_edge * 0.999, model.i0, n)
    g[-1] = model.i0
    return g


def test_intensity_average_linear_probe():
    model = focus16()
    c = 2.3e-14
    curves = {i: image(np.full((30, 7), c * i))
              for i in intensity_grid(model, 8)}
    out = intensity_average(curves, model)
    expect = c * model.i0 * gaussian_overlap_factor(model)
    assert np.max(np.abs(out.p / expect - 1.0)) < 1e-3


def test_intensity_average_constant_shape():
    model = focus16()
    rng = np.random.default_rng(11)
    shape = 1.0 + rng.random((30, 7))
    curves = {i: image(shape.copy()) for i in intensity_grid(model, 8)}
    out = normalize(intensity_average(curves, model))
    ref = normalize(image(shape))
    assert np.max(np.abs(out.p - ref.p)) < 1e-12 * ref.p.max()


def test_intensity_average_refinement():
    model = focus16()
    rng = np.random.default_rng(2)
    shape = 1.0 + rng.random((30, 7))

    def curves(n):
        return {i: image(shape * (i / model.i0) ** 2.5)
                for i in intensity_grid(model, n)}

    a8 = intensity_average(curves(8), model)
    a16 = intensity_average(curves(16), model)
    assert np.linalg.norm(a8.p - a16.p) / np.linalg.norm(a16.p) < 1e-3


def test_intensity_average_convexity_and_monotonicity():
    model = focus16()
    grid = intensity_grid(model, 8)
    curves = {i: image(np.full((10, 3), (i / model.i0) ** 3)) for i in grid}
    weight = intensity_average(
        {i: image(np.ones((10, 3))) for i in grid}, model)
    out = intensity_average(curves, model)
    scaled = out.p / weight.p
    assert np.all(scaled <= 1.0 + 1e-9)           # <= max over I
    assert np.all(scaled >= 0.0)                  # >= min over I
    # non-decreasing in I: average bounded by the peak-intensity image
    assert np.all(out.p / weight.p <= curves[grid[-1]].p + 1e-12)


def test_intensity_average_input_validation():
    model = focus16()
    grid = intensity_grid(model, 8)
    imgs = {i: image(np.ones((8, 3))) for i in grid}
    with pytest.raises(ValidationError, match="at least 4"):
        intensity_average({g: imgs[g] for g in grid[:3]}, model)
    shifted = {i * 0.5: img for i, img in imgs.items()}
    with pytest.raises(ConfigError, match="I0"):
        intensity_average(shifted, model)
    high = {i: imgs[i] for i in grid[3:]}
    with pytest.raises(ConfigError, match="I_L"):
        intensity_average(high, model)
    bad = dict(imgs)
    bad[grid[0]] = image(np.ones((8, 3)), krho=np.linspace(0, 5, 8))
    with pytest.raises(ConfigError, match="grid"):
        intensity_average(bad, model)
