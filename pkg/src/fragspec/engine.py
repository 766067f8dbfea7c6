"""Job engine: expand a configuration into the (v, N, M_N, I) lattice, run
propagations with content-addressed caching and process fan-out, chain the
projection and averaging stages, and emit outputs plus a provenance manifest.

Averaging order is mn -> rotation -> intensity -> vibration (all linear, so
the order is equivalent to the presentation order; this one minimizes the
number of intensity interpolants), followed by the detector window and a
single final normalization.  Reductions iterate in sorted key order and cache
writes are write-then-rename, so identical config + code version gives
bit-identical outputs and a crash-safe cache.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import blockio
from .angular import AngularBasis
from .averaging import (FocusModel, intensity_average, load_population_file,
                        mn_average, rotational_average, vibrational_average)
from .boundstates import rotational_shift, solve_bound_state
from .config import RunConfig
from .errors import ConfigError, FragspecError
from .grids import RadialGrid
from .potentials import load_potential_table, shipped_table_path
from .propagator import Numerics, run_job
from .pulse import LaserPulse
from .spectra import (DetectorGridSpec, convolve_detector, cut,
                      momentum_spectrum, normalize, abel_project,
                      small_velocity_check)



@dataclass(frozen=True)
class JobSpec:
    """One propagation: initial state (v, N, M_N) at one peak intensity."""

    v: int
    n_rot: int
    m_n: int
    intensity: float

    def key(self, context_digest: str) -> str:
        h = hashlib.sha256()
        h.update(context_digest.encode())
        h.update(f"{self.v}:{self.n_rot}:{self.m_n}:{self.intensity:.12e}".encode())
        return h.hexdigest()[:24]


@dataclass
class RunPlan:
    config: RunConfig
    jobs: list[JobSpec]
    intensities: np.ndarray
    digest: str          # config + potential + code version
    out_dir: Path
    cache_dir: Path

    @property
    def job_count(self) -> int:
        return len(self.jobs)

    def describe(self) -> str:
        lines = [
            f"plan digest {self.digest[:16]}  ({self.job_count} jobs, "
            f"{len(self.intensities)} intensities)",
        ]
        for job in self.jobs:
            lines.append(
                f"  v={job.v} N={job.n_rot} M={job.m_n} I={job.intensity:.4e} W/cm2"
            )
        return "\n".join(lines)


def _focus_model(cfg: RunConfig) -> FocusModel:
    return FocusModel(
        e0_mj=cfg.pulse_energy_mj, t_ac_fs=cfg.t_ac_fs,
        wavelength_nm=cfg.wavelength_nm, f_mm=cfg.focal_length_mm,
        b_x_mm=cfg.b_x_mm, b_y_mm=cfg.b_y_mm,
        half_width_um=cfg.half_width_um, override_i0=cfg.override_i0,
    )


def plan(cfg: RunConfig, cache_dir=None, out_dir=None) -> RunPlan:
    """Deterministic job lattice: every v with a_v > 0, N <= n_max, M_N = 0..N,
    each intensity sample (geometric between I_L and I0)."""
    pops = load_population_file(cfg.population_file)
    focus = _focus_model(cfg)
    i0 = focus.i0
    i_l = focus.i_edge
    n_i = cfg.n_intensities
    if n_i < 4:
        raise ConfigError("[focus] n_intensities must be >= 4")
    intensities = np.geomspace(i_l, i0, n_i)
    intensities[-1] = i0

    jobs = []
    for v in sorted(vv for vv, a in pops.a_v.items() if a > 0):
        for n_rot in range(min(pops.n_max, cfg.n_max) + 1):
            for m_n in range(n_rot + 1):
                for inten in intensities:
                    jobs.append(JobSpec(v=v, n_rot=n_rot, m_n=m_n,
                                        intensity=float(inten)))
    seen = set()
    for job in jobs:
        if job in seen:
            raise ConfigError(f"duplicate job in lattice: {job}")
        seen.add(job)

    h = hashlib.sha256()
    h.update(cfg.digest.encode())
    table = cfg.potential_table or shipped_table_path()
    h.update(blockio.content_hash(table).encode())
    h.update(__version__.encode())
    digest = h.hexdigest()

    out = Path(out_dir) if out_dir else cfg.out_dir
    cache = Path(cache_dir) if cache_dir else out / "cache"
    return RunPlan(config=cfg, jobs=jobs, intensities=intensities,
                   digest=digest, out_dir=out, cache_dir=cache)


# -- single propagation (child-process entry point) ---------------------------


def _job_paths(rp: RunPlan, job: JobSpec) -> tuple[Path, Path]:
    key = job.key(rp.digest)
    return rp.cache_dir / f"amp_{key}.bin", rp.cache_dir / f"diag_{key}.csv"


def _run_one(cfg: RunConfig, job: JobSpec, digest: str, cache_dir: Path) -> dict:
    os.environ.setdefault("OMP_NUM_THREADS", "1")
    t0 = time.time()
    pot = load_potential_table(cfg.potential_table or shipped_table_path())
    grid = RadialGrid(n_r=cfg.n_r, r_min=cfg.r_min, r_max=cfg.r_max)
    basis = AngularBasis(m_n=abs(job.m_n), n_l=cfg.n_l)
    # the field-free tail is appended by run_job (Numerics), not the window
    pulse = LaserPulse.gaussian(
        cfg.wavelength_nm, job.intensity, cfg.w_t_fs,
        pre_center_widths=cfg.pre_center_widths,
    )
    numerics = Numerics(
        dt=cfg.dt, r_split=cfg.r_split, mask_width=cfg.mask_width,
        split_stride=cfg.split_stride, diag_stride=cfg.diag_stride,
        asymptotic_phase=cfg.asymptotic_phase, dt_tail=cfg.dt_tail,
        tail_time=cfg.tail_time, tail_k_ref=cfg.tail_k_ref,
    )
    state = solve_bound_state(pot, job.n_rot, job.v, grid)
    result = run_job(pot, state, job.m_n, pulse, grid, basis, numerics)

    budget = abs(result.final_internal_norm + result.amplitude.norm()
                 - result.initial_norm)
    amp_path, diag_path = (cache_dir / f"amp_{job.key(digest)}.bin",
                           cache_dir / f"diag_{job.key(digest)}.csv")
    params = dict(v=job.v, n_rot=job.n_rot, m_n=job.m_n,
                  intensity=job.intensity, level_energy=state.energy,
                  final_internal_norm=result.final_internal_norm,
                  initial_norm=result.initial_norm, norm_budget=budget,
                  code_version=__version__)
    tmp = amp_path.with_suffix(".tmp")
    blockio.write_amplitude(tmp, result.amplitude, params)
    tmp_hdr = Path(str(tmp) + ".hdr")
    os.replace(tmp, amp_path)
    os.replace(tmp_hdr, Path(str(amp_path) + ".hdr"))
    dtmp = diag_path.with_suffix(".tmp")
    blockio.write_diagnostics_csv(dtmp, result.diagnostics)
    os.replace(dtmp, diag_path)
    params["seconds"] = time.time() - t0
    return params


def _cache_valid(amp_path: Path) -> bool:
    if not amp_path.exists() or not Path(str(amp_path) + ".hdr").exists():
        return False
    meta = blockio.read_sidecar(amp_path)
    return meta.get("content_sha256") == blockio.content_hash(amp_path)


def execute(rp: RunPlan, workers: int = 1, stages: str = "all",
            log=print) -> dict:
    """Run the plan; returns the manifest dict (also written to out/manifest.json)."""
    cfg = rp.config
    rp.out_dir.mkdir(parents=True, exist_ok=True)
    rp.cache_dir.mkdir(parents=True, exist_ok=True)
    manifest: dict = {
        "tool_version": __version__,
        "plan_digest": rp.digest,
        "config": str(cfg.path),
        "job_count": rp.job_count,
        "jobs": {},
        "failures": [],
        "timings": {},
    }
    t_start = time.time()

    # ---- propagate stage -----------------------------------------------
    todo = []
    for job in rp.jobs:
        amp_path, _ = _job_paths(rp, job)
        if _cache_valid(amp_path):
            manifest["jobs"][job.key(rp.digest)] = {"cached": True}
        else:
            if amp_path.exists():
                log(f"cache entry corrupt, re-running: {amp_path.name}")
            todo.append(job)
    manifest["cache_hits"] = rp.job_count - len(todo)
    manifest["propagated"] = len(todo)

    if stages in ("propagate", "all") and todo:
        log(f"propagating {len(todo)} job(s) on {workers} worker(s) "
            f"({manifest['cache_hits']} cache hits)")
        if workers > 1:
            ctx_env = dict(OMP_NUM_THREADS="1", OPENBLAS_NUM_THREADS="1")
            os.environ.update(ctx_env)
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = {
                    pool.submit(_run_one, cfg, job, rp.digest, rp.cache_dir): job
                    for job in todo
                }
                for fut, job in futures.items():
                    try:
                        info = fut.result()
                        manifest["jobs"][job.key(rp.digest)] = info
                        log(f"  done v={job.v} N={job.n_rot} M={job.m_n} "
                            f"I={job.intensity:.3e} [{info['seconds']:.1f}s]")
                    except FragspecError as exc:
                        manifest["failures"].append(
                            {"job": asdict(job), "error": str(exc)})
                        log(f"  FAILED v={job.v}: {exc}")
        else:
            for job in todo:
                try:
                    info = _run_one(cfg, job, rp.digest, rp.cache_dir)
                    manifest["jobs"][job.key(rp.digest)] = info
                    log(f"  done v={job.v} N={job.n_rot} M={job.m_n} "
                        f"I={job.intensity:.3e} [{info['seconds']:.1f}s]")
                except FragspecError as exc:
                    manifest["failures"].append({"job": asdict(job), "error": str(exc)})
                    log(f"  FAILED v={job.v}: {exc}")
    manifest["timings"]["propagate"] = time.time() - t_start

    if stages == "propagate":
        _finish(rp, manifest)
        return manifest

    # ---- project + average stage -----------------------------------------
    t_proj = time.time()
    small_velocity_check(cfg.beam_velocity_m_s, cfg.krho_max)
    out_grid = DetectorGridSpec(
        krho_max=cfg.krho_max, n_krho=cfg.n_krho, n_alpha=cfg.n_alpha,
        beam_velocity=cfg.beam_velocity_m_s,
    )
    pops = load_population_file(cfg.population_file)
    focus = _focus_model(cfg)
    pot = load_potential_table(cfg.potential_table or shipped_table_path())
    grid = RadialGrid(n_r=cfg.n_r, r_min=cfg.r_min, r_max=cfg.r_max)
    n_max = min(pops.n_max, cfg.n_max)

    def image_for(job: JobSpec):
        amp_path, _ = _job_paths(rp, job)
        img_path = rp.cache_dir / f"img_{job.key(rp.digest)}.bin"
        if _cache_valid(img_path):
            return blockio.read_image(img_path)
        if not amp_path.exists():
            raise ConfigError(f"missing cached amplitude for {job}")
        acc = blockio.read_amplitude(amp_path)
        img = abel_project(momentum_spectrum(acc, cfg.channel_combine), out_grid)
        tmp = img_path.with_suffix(".tmp")
        blockio.write_image(tmp, img, asdict(job))
        os.replace(tmp, img_path)
        os.replace(Path(str(tmp) + ".hdr"), Path(str(img_path) + ".hdr"))
        return img

    vs = sorted(vv for vv, a in pops.a_v.items() if a > 0)
    per_v_avg: dict[int, object] = {}
    per_v_i0: dict[int, object] = {}
    shifts_cache: dict[tuple[int, int], float] = {}
    failed_vs = []
    for v in vs:
        try:
            per_i = {}
            for inten in rp.intensities:
                per_n = {}
                for n_rot in range(n_max + 1):
                    per_m = {
                        m: image_for(JobSpec(v, n_rot, m, float(inten)))
                        for m in range(n_rot + 1)
                    }
                    per_n[n_rot] = mn_average(per_m, n_rot)
                if n_max == 0:
                    rot = per_n[0]
                else:
                    for n_rot in range(n_max + 1):
                        if (v, n_rot) not in shifts_cache:
                            shifts_cache[(v, n_rot)] = rotational_shift(
                                pot, v, n_rot, grid)
                    pops_v = pops if pops.n_max == n_max else \
                        load_population_file(cfg.population_file)
                    pops_v.n_max = n_max
                    rot = rotational_average(
                        per_n, v, pops_v,
                        {n: shifts_cache[(v, n)] for n in range(n_max + 1)})
                per_i[float(inten)] = rot
            per_v_i0[v] = per_i[float(rp.intensities[-1])]
            per_v_avg[v] = intensity_average(per_i, focus)
        except FragspecError as exc:
            manifest["failures"].append({"job": {"v": v}, "error": str(exc)})
            failed_vs.append(v)
            log(f"  averaging FAILED for v={v}: {exc}")
    manifest["timings"]["project"] = time.time() - t_proj

    if not per_v_avg:
        _finish(rp, manifest)
        return manifest

    # ---- final combination: vibrational average, window, one normalization --
    live_pops = load_population_file(cfg.population_file)
    live_pops.a_v = {v: a for v, a in live_pops.a_v.items()
                     if a > 0 and v in per_v_avg}
    final = vibrational_average(per_v_avg, live_pops)
    final_unavg = vibrational_average(per_v_i0, live_pops)
    final = convolve_detector(final, cfg.window)
    final_unavg = convolve_detector(final_unavg, cfg.window)
    # normalization is applied exactly once, as the last stage
    final = normalize(final)
    final_unavg = normalize(final_unavg)

    blockio.write_image(rp.out_dir / "detector_image.bin", final,
                        {"stage": "final", "plan": rp.digest})
    blockio.write_image_csv(rp.out_dir / "detector_image.csv", final)
    blockio.write_image(rp.out_dir / "detector_image_no_volume_avg.bin",
                        final_unavg, {"stage": "final_i0", "plan": rp.digest})
    blockio.write_image_csv(rp.out_dir / "detector_image_no_volume_avg.csv",
                            final_unavg)
    blockio.write_cut_csv(rp.out_dir / "cut_alpha0.csv", cut(final, "alpha0"))
    blockio.write_cut_csv(rp.out_dir / "cut_alpha0_no_volume_avg.csv",
                          cut(final_unavg, "alpha0"))
    for pos in cfg.cut_positions:
        c = cut(final, "fixed_krho", pos)
        blockio.write_cut_csv(
            rp.out_dir / f"cut_krho_{pos:g}.csv".replace(".", "p", 1), c)

    # per-v diagnostics at the strongest intensity (decay / alignment series)
    for v in vs:
        if v in failed_vs:
            continue
        job = JobSpec(v, 0, 0, float(rp.intensities[-1]))
        _, diag_path = _job_paths(rp, job)
        if diag_path.exists():
            target = rp.out_dir / f"diagnostics_v{v}.csv"
            target.write_bytes(diag_path.read_bytes())

    manifest["timings"]["total"] = time.time() - t_start
    _finish(rp, manifest)
    return manifest


def _finish(rp: RunPlan, manifest: dict):
    manifest["exit_code"] = 4 if manifest["failures"] else 0
    path = rp.out_dir / "manifest.json"
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    os.replace(tmp, path)
