"""On-disk formats.

Binary block: 16-byte header (8-byte magic + u16 version + u16 kind + u32
reserved), little-endian u64 dims (n_k, n_theta), payload, then the k grid and
the cos(theta) nodes as f64.  Kind 1 (momentum amplitude) stores two channels
of interleaved (re, im) f64 pairs; kind 2 (detector image) is a real-valued
variant whose payload is one f64 block and whose axis vectors are k_rho and
alpha.  A sidecar text header alongside each block records job parameters and
the block's SHA-256 content hash.

CSV exports: diagnostics time series (t, internal_norm, cos2_expect,
envelope), detector images (k_rho, alpha, P), cuts (coordinate, value), and
level tables (v, N, E).
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .propagator import MomentumAmplitude
from .spectra import Cut, DetectorImage

MAGIC = b"FRAGSPEC"
VERSION = 1
KIND_AMPLITUDE = 1
KIND_IMAGE = 2


def _header(kind: int, n0: int, n1: int) -> bytes:
    return struct.pack("<8sHHI", MAGIC, VERSION, kind, 0) + struct.pack(
        "<QQ", n0, n1
    )


def _parse_header(buf: bytes):
    magic, version, kind, _ = struct.unpack_from("<8sHHI", buf, 0)
    if magic != MAGIC:
        raise ValidationError("bad magic in binary block")
    if version != VERSION:
        raise ValidationError(f"unsupported block version {version}")
    n0, n1 = struct.unpack_from("<QQ", buf, 16)
    return kind, n0, n1


def content_hash(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_sidecar(path: Path, params: dict):
    side = path.with_suffix(path.suffix + ".hdr")
    payload = dict(params)
    payload["content_sha256"] = content_hash(path)
    with open(side, "w", encoding="utf-8") as fh:
        for key in sorted(payload):
            fh.write(f"{key} = {json.dumps(payload[key])}\n")
    return side


def read_sidecar(path) -> dict:
    out = {}
    for line in open(Path(str(path) + ".hdr"), encoding="utf-8"):
        key, _, val = line.partition("=")
        out[key.strip()] = json.loads(val.strip())
    return out


def write_amplitude(path, acc: MomentumAmplitude, params: dict | None = None):
    path = Path(path)
    n_k, n_t = acc.phi_hat.shape[1], acc.phi_hat.shape[2]
    with open(path, "wb") as fh:
        fh.write(_header(KIND_AMPLITUDE, n_k, n_t))
        for ch in range(2):
            inter = np.empty((n_k, n_t, 2))
            inter[..., 0] = acc.phi_hat[ch].real
            inter[..., 1] = acc.phi_hat[ch].imag
            fh.write(inter.astype("<f8").tobytes())
        fh.write(acc.k.astype("<f8").tobytes())
        fh.write(acc.x.astype("<f8").tobytes())
        fh.write(acc.w.astype("<f8").tobytes())
        fh.write(struct.pack("<ddq", acc.dk, acc.t_ref, acc.m_n))
    meta = dict(params or {})
    meta.update(kind="momentum_amplitude", n_k=n_k, n_theta=n_t)
    _write_sidecar(path, meta)
    return path


def read_amplitude(path) -> MomentumAmplitude:
    buf = Path(path).read_bytes()
    kind, n_k, n_t = _parse_header(buf)
    if kind != KIND_AMPLITUDE:
        raise ValidationError("block is not a momentum amplitude")
    off = 32
    phi = np.empty((2, n_k, n_t), dtype=np.complex128)
    for ch in range(2):
        raw = np.frombuffer(buf, dtype="<f8", count=2 * n_k * n_t, offset=off)
        off += raw.nbytes
        raw = raw.reshape(n_k, n_t, 2)
        phi[ch] = raw[..., 0] + 1j * raw[..., 1]
    k = np.frombuffer(buf, dtype="<f8", count=n_k, offset=off).copy(); off += 8 * n_k
    x = np.frombuffer(buf, dtype="<f8", count=n_t, offset=off).copy(); off += 8 * n_t
    w = np.frombuffer(buf, dtype="<f8", count=n_t, offset=off).copy(); off += 8 * n_t
    dk, t_ref, m_n = struct.unpack_from("<ddq", buf, off)
    return MomentumAmplitude(phi_hat=phi, k=k, x=x, w=w, dk=dk, t_ref=t_ref,
                             m_n=int(m_n))


def write_image(path, img: DetectorImage, params: dict | None = None):
    path = Path(path)
    n_r, n_a = img.p.shape
    with open(path, "wb") as fh:
        fh.write(_header(KIND_IMAGE, n_r, n_a))
        fh.write(img.p.astype("<f8").tobytes())
        fh.write(img.krho.astype("<f8").tobytes())
        fh.write(img.alpha.astype("<f8").tobytes())
        fh.write(struct.pack("<dd", img.beam_velocity, img.drift_length))
    meta = dict(params or {})
    meta.update(kind="detector_image", n_krho=n_r, n_alpha=n_a)
    _write_sidecar(path, meta)
    return path


def read_image(path) -> DetectorImage:
    buf = Path(path).read_bytes()
    kind, n_r, n_a = _parse_header(buf)
    if kind != KIND_IMAGE:
        raise ValidationError("block is not a detector image")
    off = 32
    p = np.frombuffer(buf, dtype="<f8", count=n_r * n_a, offset=off).reshape(n_r, n_a).copy()
    off += 8 * n_r * n_a
    krho = np.frombuffer(buf, dtype="<f8", count=n_r, offset=off).copy(); off += 8 * n_r
    alpha = np.frombuffer(buf, dtype="<f8", count=n_a, offset=off).copy(); off += 8 * n_a
    v, d = struct.unpack_from("<dd", buf, off)
    return DetectorImage(p=p, krho=krho, alpha=alpha, beam_velocity=v, drift_length=d)


# -- CSV ----------------------------------------------------------------------


def write_diagnostics_csv(path, diagnostics: np.ndarray):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,internal_norm,cos2_expect,envelope\n")
        for row in diagnostics:
            fh.write(f"{row['t']:.17g},{row['internal_norm']:.17g},"
                     f"{row['cos2']:.17g},{row['envelope']:.17g}\n")
    return path


def write_image_csv(path, img: DetectorImage):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("krho,alpha,P\n")
        for i, kr in enumerate(img.krho):
            for j, al in enumerate(img.alpha):
                fh.write(f"{kr:.17g},{al:.17g},{img.p[i, j]:.17g}\n")
    return path


def write_cut_csv(path, c: Cut):
    label = "krho" if c.kind == "alpha0" else "alpha"
    with open(path, "w", encoding="utf-8") as fh:
        if c.snapped is not None:
            fh.write(f"# fixed_krho cut: requested {c.requested:g}, "
                     f"snapped to {c.snapped:.17g}\n")
        fh.write(f"{label},P\n")
        for coord, val in zip(c.coordinate, c.values):
            fh.write(f"{coord:.17g},{val:.17g}\n")
    return path


def write_levels_csv(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("v,N,E_hartree\n")
        for v, n, e in rows:
            fh.write(f"{v},{n},{e:.17g}\n")
    return path
