"""Information metric and connection coefficients for signal charts.

For the circular complex Gaussian observation law with known per-bin noise
power, the information matrix of a magnitude/phase chart is block diagonal:

    g_uv = sum_nu (2/gamma0) drho/du drho/dv            (magnitude block)
    g_qr = sum_nu (2/gamma0) rho^2 dpsi/dq dpsi/dr      (phase block)

with zero cross block.  The first-kind connection coefficients
``Gamma_{ij,m} = (d_i g_jm + d_j g_mi - d_m g_ij) / 2`` then have exactly four
non-zero index families, all computed here in closed form.  Two independent
oracles are provided: a Monte Carlo estimate of the metric from score outer
products, and central finite differences of the metric for the connection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .band import FrequencyGrid, NoiseProfile
from .models import ParametricSignalModel

__all__ = [
    "ChristoffelTensor",
    "FisherMatrix",
    "christoffel",
    "christoffel_fd",
    "fisher_matrix",
    "monte_carlo_fisher",
    "path_speed",
]


@dataclass(frozen=True)
class FisherMatrix:
    """Block-diagonal information matrix of a magnitude/phase chart."""

    mag_block: np.ndarray
    phase_block: np.ndarray

    def __post_init__(self):
        for name in ("mag_block", "phase_block"):
            block = np.array(getattr(self, name), dtype=float)
            block.flags.writeable = False
            object.__setattr__(self, name, block)
            if block.ndim != 2 or block.shape[0] != block.shape[1]:
                raise ValueError(f"{name} must be square")
            if not np.all(np.isfinite(block)):
                raise ValueError(f"{name} has non-finite entries")
            scale = float(np.max(np.abs(block))) if block.size else 0.0
            if scale > 0.0 and float(np.max(np.abs(block - block.T))) > 1e-12 * scale:
                raise ValueError(f"{name} is not symmetric")
            eigvals = np.linalg.eigvalsh(0.5 * (block + block.T))
            norm = float(np.max(np.abs(eigvals))) if eigvals.size else 0.0
            # rank deficiency is allowed (a parameter may have no effect on
            # the grid); genuinely negative curvature of the quadratic form
            # is not
            if eigvals.size and float(eigvals[0]) < -1e-10 * norm:
                raise ValueError(f"{name} is not positive semidefinite")

    @property
    def n_mag_params(self) -> int:
        return self.mag_block.shape[0]

    @property
    def n_params(self) -> int:
        return self.mag_block.shape[0] + self.phase_block.shape[0]

    def full(self) -> np.ndarray:
        """Assemble the dense block-diagonal parameter-space metric."""
        p = self.n_mag_params
        n = self.n_params
        out = np.zeros((n, n))
        out[:p, :p] = self.mag_block
        out[p:, p:] = self.phase_block
        return out

    def to_json_dict(self) -> dict:
        return {
            "n_mag_params": self.n_mag_params,
            "n_phase_params": self.phase_block.shape[0],
            "mag_block": self.mag_block.tolist(),
            "phase_block": self.phase_block.tolist(),
        }


@dataclass(frozen=True)
class ChristoffelTensor:
    """Dense first-kind symbols, lowered index last: values[i, j, m].

    Only four index families can be non-zero for a magnitude/phase chart
    (all-magnitude; phase-phase lowered magnitude; all-phase; and the mixed
    family with a lowered phase index); ``validate=True`` enforces the exact
    structural zeros, the i<->j symmetry and the sign relation tying the two
    mixed families together.
    """

    values: np.ndarray
    n_mag_params: int
    validate: bool = True

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        n = values.shape[0]
        if values.shape != (n, n, n):
            raise ValueError("values must be a cubic array")
        if not 1 <= self.n_mag_params <= n - 1:
            raise ValueError("n_mag_params out of range")
        if not np.all(np.isfinite(values)):
            raise ValueError("non-finite connection coefficients")
        if not self.validate:
            return
        if not np.array_equal(values, values.transpose(1, 0, 2)):
            raise ValueError("symbols are not symmetric in the upper pair")
        if np.any(values[~structural_mask(n, self.n_mag_params)] != 0.0):
            raise ValueError("structural zeros violated")
        p = self.n_mag_params
        # Gamma_{q'u,q} and -Gamma_{q'q,u} are the same frequency sum
        if not np.array_equal(values[p:, :p, p:], -values[p:, p:, :p].transpose(0, 2, 1)):
            raise ValueError("mixed-family sign relation violated")

    @property
    def n_params(self) -> int:
        return self.values.shape[0]

    def to_json_dict(self) -> dict:
        return {
            "n_params": self.n_params,
            "n_mag_params": self.n_mag_params,
            "values": self.values.tolist(),
        }


def structural_mask(n_params: int, n_mag_params: int) -> np.ndarray:
    """Boolean mask of index triples that may carry non-zero symbols."""
    p = n_mag_params
    is_mag = np.arange(n_params) < p
    i = is_mag[:, None, None]
    j = is_mag[None, :, None]
    m = is_mag[None, None, :]
    allowed = (
        (i & j & m)  # all-magnitude family
        | (~i & ~j)  # phase-phase pair, either lowered index
        | ((i ^ j) & ~m)  # mixed pair with a lowered phase index
    )
    return allowed


def _chart_data(model: ParametricSignalModel, xi, grid: FrequencyGrid, noise: NoiseProfile):
    if grid.n_freqs != noise.n_freqs:
        raise ValueError("grid and noise profile are misaligned")
    phi, varphi = model.split(xi)
    rho = np.asarray(model.magnitude(phi, grid), dtype=float)
    mag_jac = np.asarray(model.magnitude_jacobian(phi, grid), dtype=float)
    phase_jac = np.asarray(model.phase_jacobian(varphi, grid), dtype=float)
    for arr, name in ((rho, "magnitude"), (mag_jac, "magnitude jacobian"), (phase_jac, "phase jacobian")):
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"non-finite {name} at the requested point")
    return phi, varphi, rho, mag_jac, phase_jac


def fisher_matrix(
    model: ParametricSignalModel, xi, grid: FrequencyGrid, noise: NoiseProfile
) -> FisherMatrix:
    """Analytic block-diagonal information matrix at a parameter point."""
    _, _, rho, mag_jac, phase_jac = _chart_data(model, xi, grid, noise)
    w = noise.weights
    mag = np.einsum("ik,k,jk->ij", mag_jac, w, mag_jac)
    phase = np.einsum("ik,k,jk->ij", phase_jac, w * rho**2, phase_jac)
    return FisherMatrix(mag, phase)


def path_speed(model: ParametricSignalModel, xi, xi_dot, grid: FrequencyGrid, noise: NoiseProfile) -> float:
    """Quadratic form ``g_ij(xi) xi_dot^i xi_dot^j`` of the chart metric.

    Chained through the model this equals the per-bin form
    ``sum (2/gamma0) [(drho/ds)^2 + rho^2 (dpsi/ds)^2]``.
    """
    xi_dot = np.asarray(xi_dot, dtype=float)
    if xi_dot.shape != (model.n_params,):
        raise ValueError("velocity dimension mismatch")
    fm = fisher_matrix(model, xi, grid, noise)
    p = model.n_mag_params
    v_mag, v_phase = xi_dot[:p], xi_dot[p:]
    return float(v_mag @ fm.mag_block @ v_mag + v_phase @ fm.phase_block @ v_phase)


def monte_carlo_fisher(
    model: ParametricSignalModel,
    xi,
    grid: FrequencyGrid,
    noise: NoiseProfile,
    n_samples: int,
    seed,
    return_stderr: bool = False,
):
    """Estimate the information matrix as the mean score outer product.

    Observations are drawn at ``xi`` and the score uses the model's analytic
    partials, so the expectation over the noise is the only stochastic
    element.  Sampling is chunked with a fixed chunk size from a single
    generator stream, which makes the reduction order (and hence the result)
    deterministic for a given seed.

    Returns the dense N x N estimate; with ``return_stderr=True`` also the
    per-entry standard error of the mean.
    """
    if n_samples < 1000:
        raise ValueError("n_samples must be at least 1000")
    phi, varphi, rho, mag_jac, phase_jac = _chart_data(model, xi, grid, noise)
    psi = np.asarray(model.phase_unwrapped(varphi, grid), dtype=float)
    carrier = np.exp(1j * psi)
    # d s / d xi^i per bin; magnitude rows then phase rows
    d_sig = np.vstack([mag_jac * carrier, 1j * rho * phase_jac * carrier])
    n_params = model.n_params
    w = noise.weights
    scale = np.sqrt(0.5 * noise.gamma0)

    rng = np.random.default_rng(seed)
    chunk = 8192
    acc = np.zeros((n_params, n_params))
    acc_sq = np.zeros((n_params, n_params))
    remaining = int(n_samples)
    while remaining > 0:
        m = min(chunk, remaining)
        z = rng.standard_normal((m, 2, grid.n_freqs))
        noise_draw = scale * (z[:, 0] + 1j * z[:, 1])
        # score_i = sum_nu (2/gamma0) Re{ n* ds/dxi^i }
        scores = (noise_draw.conj() @ (d_sig * w).T).real
        outer = np.einsum("si,sj->sij", scores, scores)
        acc += outer.sum(axis=0)
        acc_sq += (outer**2).sum(axis=0)
        remaining -= m
    estimate = acc / n_samples
    if not return_stderr:
        return estimate
    variance = np.maximum(acc_sq / n_samples - estimate**2, 0.0)
    stderr = np.sqrt(variance / n_samples)
    return estimate, stderr


def christoffel(
    model: ParametricSignalModel, xi, grid: FrequencyGrid, noise: NoiseProfile
) -> ChristoffelTensor:
    """Analytic first-kind symbols from the four non-zero index families."""
    if not model.analytic_second_partials:
        raise ValueError(
            "model lacks analytic second partials; use christoffel_fd instead"
        )
    phi, varphi, rho, mag_jac, phase_jac = _chart_data(model, xi, grid, noise)
    mag_hess = np.asarray(model.magnitude_hessian(phi, grid), dtype=float)
    phase_hess = np.asarray(model.phase_hessian(varphi, grid), dtype=float)
    if not (np.all(np.isfinite(mag_hess)) and np.all(np.isfinite(phase_hess))):
        raise ValueError("non-finite second partials at the requested point")

    p = model.n_mag_params
    n = model.n_params
    w = noise.weights
    values = np.zeros((n, n, n))

    # all-magnitude: sum w * drho_u * d2rho_{u'v'}
    values[:p, :p, :p] = np.einsum("abk,ck,k->abc", mag_hess, mag_jac, w)
    # all-phase: sum w rho^2 * dpsi_q * d2psi_{q'r'}
    values[p:, p:, p:] = np.einsum("abk,ck,k->abc", phase_hess, phase_jac, w * rho**2)
    # mixed: one frequency sum feeds both remaining families so the sign
    # relation between them holds bit-exactly
    mixed = np.einsum("ak,bk,ck,k->abc", phase_jac, phase_jac, mag_jac, w * rho)
    values[p:, p:, :p] = -mixed  # lowered magnitude index
    values[p:, :p, p:] = mixed.transpose(0, 2, 1)  # lowered phase index
    values[:p, p:, p:] = mixed.transpose(2, 0, 1)
    return ChristoffelTensor(values, p)


def christoffel_fd(
    model: ParametricSignalModel,
    xi,
    grid: FrequencyGrid,
    noise: NoiseProfile,
    step: float = 1e-5,
) -> ChristoffelTensor:
    """First-kind symbols from central differences of the metric.

    Independent of the closed-form families above; used as an oracle.  The
    per-coordinate step is ``step * (1 + |xi^i|)``.
    """
    if step <= 0.0:
        raise ValueError("step must be positive")
    xi = np.asarray(xi, dtype=float)
    n = model.n_params
    grads = np.empty((n, n, n))
    for i in range(n):
        h = step * (1.0 + abs(float(xi[i])))
        if h == 0.0 or not np.isfinite(h):
            raise ValueError("finite-difference step underflow")
        hi = np.zeros(n)
        hi[i] = h
        g_plus = fisher_matrix(model, xi + hi, grid, noise).full()
        g_minus = fisher_matrix(model, xi - hi, grid, noise).full()
        diff = (g_plus - g_minus) / (2.0 * h)
        grads[i] = 0.5 * (diff + diff.T)  # exact symmetry of each d_i g
    # values[i,j,m] = (d_i g_jm + d_j g_mi - d_m g_ij) / 2; with symmetric
    # d_i g this is exactly symmetric in (i, j)
    term2 = grads.transpose(2, 0, 1)  # [i,j,m] -> grads[j,m,i]
    term3 = grads.transpose(1, 2, 0)  # [i,j,m] -> grads[m,i,j]
    values = 0.5 * (grads + term2 - term3)
    return ChristoffelTensor(values, model.n_mag_params, validate=False)
