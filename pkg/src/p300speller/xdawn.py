"""Spatial filter estimation that maximizes the evoked-response ratio.

The evoked response is modelled as a fixed waveform added at every target
onset: X = D A + noise, where D is a T x L 0/1 Toeplitz-structured design
(one shifted copy of the onset indicator per waveform sample) and A the
L x C waveform.  With A estimated by least squares, the spatial filters u
maximize the Rayleigh quotient

    rho(u) = ||D A u||^2 / ||X u||^2,

found through two thin QR decompositions and one SVD: with D = Qd Rd and
X = Qx Rx, the least-squares projection gives D A = Qd Qd' X, so
rho(u) = ||Qd' Qx w||^2 / ||w||^2 for w = Rx u.  The singular vectors of
Qd' Qx therefore solve the problem, and the singular values are cosines
of principal angles, so every rho lies in [0, 1].
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import PipelineError, ValidationError
from .dsp import Recording
from .scheduler import FLASH


@dataclass
class ToeplitzDesign:
    """T x L 0/1 design: d[t, l] = 1 iff t = onset + l for some onset."""

    d: np.ndarray
    onsets: np.ndarray
    erp_len: int


@dataclass
class SpatialFilterModel:
    """Fitted spatial filters: columns of ``u`` map C channels to one component."""

    u: np.ndarray  # (C, n_f)
    n_f: int
    rho: np.ndarray  # Rayleigh quotient per component, descending
    erp_len: int

    def to_json(self) -> dict:
        return {
            "n_f": self.n_f,
            "erp_len": self.erp_len,
            "u": self.u.tolist(),
            "rho": self.rho.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SpatialFilterModel":
        return cls(
            u=np.asarray(obj["u"], dtype=float),
            n_f=int(obj["n_f"]),
            rho=np.asarray(obj["rho"], dtype=float),
            erp_len=int(obj["erp_len"]),
        )


def build_toeplitz(onsets, erp_len: int, total_samples: int) -> ToeplitzDesign:
    """Design matrix with one 1 per (onset, waveform-sample) pair."""
    onsets = np.asarray(onsets, dtype=int)
    if onsets.size and (np.any(np.diff(onsets) <= 0)):
        raise ValidationError("onsets must be sorted and distinct")
    if onsets.size and (onsets.min() < 0 or onsets.max() + erp_len > total_samples):
        raise ValidationError(
            f"onset {int(onsets.max())} too close to the end: needs {erp_len} samples "
            f"of {total_samples}"
        )
    d = np.zeros((total_samples, erp_len))
    for lag in range(erp_len):
        d[onsets + lag, lag] = 1.0
    return ToeplitzDesign(d=d, onsets=onsets, erp_len=erp_len)


def fit_xdawn(rec: Recording, erp_len: int = 15, n_f: int = 4) -> SpatialFilterModel:
    """Estimate spatial filters from a filtered, decimated recording.

    Filters are normalized to unit Euclidean length with the
    largest-magnitude coefficient positive (the objective is invariant to
    scale and sign, tests are not).
    """
    x = np.asarray(rec.samples, dtype=float)
    t_total, n_ch = x.shape
    if t_total <= erp_len or t_total <= n_ch:
        raise ValidationError("recording too short for the ERP window / channel count")
    onsets = sorted(
        rec.sample_index(e.onset_s) for e in rec.events if e.kind == FLASH and e.is_target
    )
    if len(onsets) < 2:
        raise PipelineError("need at least two target flashes to fit spatial filters")

    design = build_toeplitz(onsets, erp_len, t_total)
    qd = _orthonormal_basis(design.d)
    qx, rx = np.linalg.qr(x)
    diag = np.abs(np.diag(rx))
    if diag.min() <= 1e-12 * max(diag.max(), 1.0):
        raise PipelineError("degenerate signal: channel covariance is rank-deficient")

    _, lam, psi_t = np.linalg.svd(qd.T @ qx, full_matrices=False)
    available = lam.size
    if available < n_f:
        warnings.warn(
            f"only {available} spatial components available; clamping n_f from {n_f}",
            stacklevel=2,
        )
        n_f = available
    u = linalg.solve_triangular(rx, psi_t[:n_f].T)
    u /= np.linalg.norm(u, axis=0, keepdims=True)
    flip = np.sign(u[np.argmax(np.abs(u), axis=0), np.arange(n_f)])
    u *= flip
    return SpatialFilterModel(u=u, n_f=n_f, rho=lam[:n_f] ** 2, erp_len=erp_len)


def _orthonormal_basis(d: np.ndarray) -> np.ndarray:
    """Orthonormal basis of col(d); falls back to SVD if d is rank-deficient."""
    q, r = np.linalg.qr(d)
    diag = np.abs(np.diag(r))
    if diag.min() > 1e-12 * max(diag.max(), 1.0):
        return q
    u, s, _ = np.linalg.svd(d, full_matrices=False)
    rank = int(np.sum(s > 1e-12 * s[0]))
    return u[:, :rank]


def apply_spatial_filter(m: SpatialFilterModel, rec: Recording) -> Recording:
    """Project a recording onto the fitted components."""
    if rec.n_channels != m.u.shape[0]:
        raise ValidationError(
            f"filter expects {m.u.shape[0]} channels, recording has {rec.n_channels}"
        )
    return Recording(
        fs_hz=rec.fs_hz,
        samples=rec.samples @ m.u,
        channel_names=tuple(f"xDAWN-{k + 1}" for k in range(m.n_f)),
        events=list(rec.events),
    )
