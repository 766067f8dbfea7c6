import json
import hashlib
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from fragspec import DetectorGridSpec, FocusModel, intensity_average, abel_project
from fragspec.cli import main as cli_main
from fragspec.config import load_config, parse_quantity
from fragspec.engine import execute, plan
from fragspec.errors import ConfigError

MICRO = """\
[potential]
table = builtin
[pulse]
wavelength = 785 nm
w_t = 2 fs
dt = 0.5 au
dt_tail = 2.0 au
tail_time = 400 au
[beam]
velocity = 1e6 m/s
half_width = 50 um
[focus]
pulse_energy = 0.7 mJ
autocorrelation_time = 240 fs
focal_length = 1000 mm
b_x = 2.6 mm
b_y = 2.4 mm
override_i0 = 16 TWcm2
n_intensities = {n_int}
[grid]
n_r = 256
r_min = 0.2 au
r_max = 30 au
n_l = 4
r_split = 20 au
mask_width = 2 au
split_stride = 50
diag_stride = 100
[populations]
file = pops.txt
n_max = {n_max}
[output]
directory = out
krho_max = 10 au
n_krho = 51
n_alpha = 9
window = 0.4 au
cuts = 5.5 au, 6.5 au
"""


def write_micro(tmp_path, pops="0 1.0 300\n", n_int=4, n_max=0):
    (tmp_path / "pops.txt").write_text(pops)
    cfg = tmp_path / "run.ini"
    cfg.write_text(MICRO.format(n_int=n_int, n_max=n_max))
    return cfg


def out_hashes(out_dir):
    return {
        p.name: hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(Path(out_dir).glob("*"))
        if p.is_file() and p.name != "manifest.json"
    }


# -- config parsing -------------------------------------------------------------


def test_parse_quantity_units():
    assert parse_quantity("785 nm", "wavelength_nm", "k") == 785.0
    assert parse_quantity("16 TWcm2", "intensity_w_cm2", "k") == 16e12
    with pytest.raises(ConfigError, match="unit suffix"):
        parse_quantity("785", "wavelength_nm", "k")
    with pytest.raises(ConfigError, match="expected a"):
        parse_quantity("785 fs", "wavelength_nm", "k")
    with pytest.raises(ConfigError, match="unknown unit"):
        parse_quantity("785 parsec", "wavelength_nm", "k")


def test_unknown_keys_listed(tmp_path):
    cfg = write_micro(tmp_path)
    body = cfg.read_text().replace(
        "[grid]\nn_r = 256", "[grid]\nwarp_factor = 9\nn_r = 256", 1)
    cfg.write_text(body)
    with pytest.raises(ConfigError, match="warp_factor"):
        load_config(cfg)


def test_missing_potential_file_named(tmp_path):
    cfg = write_micro(tmp_path)
    cfg.write_text(cfg.read_text().replace("table = builtin", "table = nowhere.txt"))
    with pytest.raises(ConfigError, match="nowhere.txt"):
        load_config(cfg)


# -- planning -------------------------------------------------------------------


def test_lattice_counting(tmp_path):
    # v={7}, n_max=1, 12 intensities: (N=0 -> 1 M) + (N=1 -> 2 M) = 3 angular
    # jobs x 12 intensities = 36
    cfg = write_micro(tmp_path, pops="7 1.0 300\n", n_int=12, n_max=1)
    rp = plan(load_config(cfg))
    assert rp.job_count == 36


def test_plan_deterministic(tmp_path):
    cfg = write_micro(tmp_path)
    rp1 = plan(load_config(cfg))
    rp2 = plan(load_config(cfg))
    assert rp1.digest == rp2.digest
    assert [str(j) for j in rp1.jobs] == [str(j) for j in rp2.jobs]


def test_dry_run_prints_lattice(tmp_path, capsys):
    cfg = write_micro(tmp_path)
    assert cli_main(["plan", "--config", str(cfg), "--dry-run"]) == 0
    out = capsys.readouterr().out
    assert "4 jobs" in out and "v=0" in out


# -- execution, cache, determinism ------------------------------------------------


@pytest.fixture(scope="module")
def micro_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("micro")
    cfg = write_micro(tmp)
    rp = plan(load_config(cfg))
    manifest = execute(rp, workers=1, log=lambda *_: None)
    return tmp, cfg, rp, manifest


def test_run_produces_outputs(micro_run):
    tmp, cfg, rp, manifest = micro_run
    assert manifest["exit_code"] == 0
    out = tmp / "out"
    for name in ("detector_image.bin", "detector_image.csv", "cut_alpha0.csv",
                 "cut_krho_5p5.csv", "manifest.json", "diagnostics_v0.csv"):
        assert (out / name).exists(), name


def test_rerun_all_cache_hits(micro_run):
    tmp, cfg, rp, _ = micro_run
    before = out_hashes(tmp / "out")
    rp2 = plan(load_config(cfg))
    man = execute(rp2, workers=1, log=lambda *_: None)
    assert man["cache_hits"] == rp2.job_count
    assert man["propagated"] == 0
    assert out_hashes(tmp / "out") == before  # bit-identical outputs


def test_delete_one_cache_entry_reruns_one(micro_run):
    tmp, cfg, rp, _ = micro_run
    amps = sorted((tmp / "out" / "cache").glob("amp_*.bin"))
    amps[0].unlink()
    man = execute(plan(load_config(cfg)), workers=1, log=lambda *_: None)
    assert man["propagated"] == 1


def test_corrupt_cache_entry_rerun_with_warning(micro_run):
    tmp, cfg, rp, _ = micro_run
    amps = sorted((tmp / "out" / "cache").glob("amp_*.bin"))
    amps[0].write_bytes(amps[0].read_bytes()[:-16] + b"\x00" * 16)
    messages = []
    man = execute(plan(load_config(cfg)), workers=1, log=messages.append)
    assert man["propagated"] == 1
    assert any("corrupt" in m for m in messages)


def test_code_version_in_cache_key(micro_run, monkeypatch):
    tmp, cfg, rp, _ = micro_run
    import fragspec.engine as eng
    monkeypatch.setattr(eng, "__version__", "999.0")
    rp2 = plan(load_config(cfg))
    assert rp2.digest != rp.digest


# -- averaging-order equivalence ---------------------------------------------------


def test_project_average_order_equivalence():
    # intensity averaging commutes with projection when P(I) is linear in I
    # (both stages are linear maps); toy case with 4 intensities
    import warnings
    from fragspec.spectra import MolecularSpectrum

    model = FocusModel(e0_mj=0.7, t_ac_fs=240.0, wavelength_nm=785.0,
                       f_mm=1000.0, b_x_mm=2.6, b_y_mm=2.4,
                       half_width_um=50.0, override_i0=1.6e13)
    grid_i = np.geomspace(model.i_edge * 0.99, model.i0, 4)
    grid_i[-1] = model.i0
    k = np.linspace(1e-3, 8.0, 300)
    x, w = np.polynomial.legendre.leggauss(16)
    base = np.outer(k**2 * np.exp(-((k - 4) ** 2)), 1.0 + x**2)
    out = DetectorGridSpec(krho_max=6.0, n_krho=61, n_alpha=9)

    def spec_at(i):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return MolecularSpectrum(p=base * (i / model.i0), k=k, x=x, w=w)

    imgs = {i: abel_project(spec_at(i), out) for i in grid_i}
    avg_then = intensity_average(imgs, model)

    weight = intensity_average(
        {i: abel_project(spec_at(model.i0), out) for i in grid_i}, model)
    # projection of the averaged spectrum: average the spectra first
    mean_scale = np.ones_like(base)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        avg_spec_img = abel_project(
            MolecularSpectrum(p=base, k=k, x=x, w=w), out)
    # linear probe: averaged image = (avg of I)/I0 * projection of base...
    # compare shapes after normalization instead (scale-free statement)
    from fragspec.spectra import normalize
    n1 = normalize(avg_then)
    n2 = normalize(avg_spec_img)
    assert np.max(np.abs(n1.p - n2.p)) < 1e-9 * n2.p.max()


# -- CLI ---------------------------------------------------------------------------


def test_seedless_rejected(tmp_path, capsys):
    cfg = write_micro(tmp_path)
    code = cli_main(["run", "--config", str(cfg), "--seedless"])
    assert code == 2
    assert "reserved" in capsys.readouterr().err


def test_config_error_exit_code(tmp_path):
    cfg = tmp_path / "nope.ini"
    assert cli_main(["run", "--config", str(cfg)]) == 2


def test_levels_subcommand(tmp_path, capsys):
    cfg = write_micro(tmp_path)
    out = tmp_path / "levels.csv"
    code = cli_main(["levels", "--config", str(cfg), "--out", str(out),
                     "--v-max", "2", "--n-rot-max", "1"])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "v,N,E_hartree"
    assert len(lines) == 7  # 3 v x 2 N + header


def test_cut_subcommand(micro_run, tmp_path):
    tmp, *_ = micro_run
    out = tmp_path / "c.csv"
    code = cli_main(["cut", str(tmp / "out" / "detector_image.bin"),
                     "--axis", "fixed_krho", "--value", "5.5",
                     "--out", str(out)])
    assert code == 0
    assert out.exists()


def test_cli_entry_point_installed():
    r = subprocess.run([sys.executable, "-m", "fragspec.cli", "--version"],
                       capture_output=True, text=True)
    assert r.returncode == 0
