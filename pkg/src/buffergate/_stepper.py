"""Compiled fixed-step core of the Magnus propagator.

The generator is packed into flat arrays (static part, stacked term
matrices, cosine-series coefficient table) so the whole stepping loop runs
inside one numba kernel.  Each step applies two exact matrix exponentials
of real-symmetric combinations of the generator at the two Gauss nodes
(fourth-order commutator-free scheme); exponentials are taken by
eigendecomposition, so every step is unitary to rounding.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .waveform import WaveformKind

TWO_PI = 2.0 * math.pi

_C1 = 0.5 - math.sqrt(3.0) / 6.0
_C2 = 0.5 + math.sqrt(3.0) / 6.0
_A1 = 0.25 - math.sqrt(3.0) / 6.0
_A2 = 0.25 + math.sqrt(3.0) / 6.0


def pack(ham) -> tuple:
    """Flatten a BranchHamiltonian into kernel-ready arrays."""
    dim = ham.dim
    static = np.ascontiguousarray(ham.static, dtype=np.float64)
    n_terms = len(ham.terms)
    width = max((len(spec.coefficients) for spec, _ in ham.terms), default=1)
    terms = np.zeros((n_terms, dim, dim))
    coefs = np.zeros((n_terms, width))
    ncoef = np.zeros(n_terms, dtype=np.int64)
    const = np.zeros(n_terms, dtype=np.uint8)
    for k, (spec, mat) in enumerate(ham.terms):
        terms[k] = mat
        ncoef[k] = len(spec.coefficients)
        coefs[k, : ncoef[k]] = spec.coefficients
        const[k] = 1 if spec.kind is WaveformKind.CONSTANT else 0
    return static, terms, const, coefs, ncoef, float(ham.duration)


def norm_bound(ham) -> float:
    """Upper bound on the row-sum norm of H(t) over the pulse window."""
    bound = np.abs(np.asarray(ham.static, dtype=float))
    for spec, mat in ham.terms:
        a = np.abs(np.asarray(spec.coefficients))
        if spec.kind is WaveformKind.CONSTANT:
            peak = TWO_PI * a[0]
        else:
            peak = TWO_PI * (a[0] + 2.0 * a[1:].sum()) / (2 * (len(a) - 1) + 1)
        bound = bound + peak * np.abs(mat)
    return float(np.max(bound.sum(axis=1))) if bound.size else 0.0


@njit(cache=True)
def _channel_values(t, const, coefs, ncoef, duration, out):
    for k in range(out.shape[0]):
        if const[k] == 1:
            out[k] = TWO_PI * coefs[k, 0]
        else:
            n = ncoef[k]
            acc = coefs[k, 0]
            for j in range(1, n):
                acc += 2.0 * coefs[k, j] * math.cos(TWO_PI * j * t / duration)
            out[k] = TWO_PI * acc / (2.0 * (n - 1) + 1.0)


@njit(cache=True)
def _expm_apply(matrix, dt, psi, term, work):
    """psi <- exp(-i dt matrix) psi by substepped Taylor summation.

    The step is split so each substep has |dt * matrix| <= 1 in the row-sum
    norm; a 24-term series then converges far below double rounding, so the
    map is unitary to machine precision.
    """
    dim = matrix.shape[0]
    amax = 0.0
    for i in range(dim):
        row = 0.0
        for j in range(dim):
            row += abs(matrix[i, j])
        if row > amax:
            amax = row
    nsub = int(amax * abs(dt)) + 1
    dtau = dt / nsub
    for _ in range(nsub):
        for i in range(dim):
            term[i] = psi[i]
        for k in range(1, 25):
            coef = -1j * dtau / k
            for i in range(dim):
                acc = 0.0j
                for j in range(dim):
                    acc += matrix[i, j] * term[j]
                work[i] = coef * acc
            small = True
            for i in range(dim):
                term[i] = work[i]
                psi[i] += term[i]
                if abs(term[i].real) + abs(term[i].imag) > 1e-18:
                    small = False
            if small:
                break
    return psi


@njit(cache=True)
def cf4_fixed(static, terms, const, coefs, ncoef, duration, t0, t1, steps, psi0):
    """Propagate psi0 from t0 to t1 with ``steps`` uniform CF4 steps.

    Returns (psi, status, t_fail); status 0 on success, 1 on a non-finite
    generator value at time t_fail.
    """
    dim = static.shape[0]
    n_terms = terms.shape[0]
    f1 = np.empty(n_terms)
    f2 = np.empty(n_terms)
    h1 = np.empty((dim, dim))
    h2 = np.empty((dim, dim))
    a = np.empty((dim, dim))
    term = np.empty(dim, dtype=np.complex128)
    work = np.empty(dim, dtype=np.complex128)
    psi = psi0.copy()
    h = (t1 - t0) / steps
    for step in range(steps):
        t = t0 + step * h
        _channel_values(t + _C1 * h, const, coefs, ncoef, duration, f1)
        _channel_values(t + _C2 * h, const, coefs, ncoef, duration, f2)
        for i in range(dim):
            for j in range(dim):
                v1 = static[i, j]
                v2 = static[i, j]
                for k in range(n_terms):
                    v1 += f1[k] * terms[k, i, j]
                    v2 += f2[k] * terms[k, i, j]
                h1[i, j] = v1
                h2[i, j] = v2
                if not (math.isfinite(v1) and math.isfinite(v2)):
                    return psi, 1, t
        # first exponential weights the early node, second the late node
        for i in range(dim):
            for j in range(dim):
                a[i, j] = _A2 * h1[i, j] + _A1 * h2[i, j]
        psi = _expm_apply(a, h, psi, term, work)
        for i in range(dim):
            for j in range(dim):
                a[i, j] = _A1 * h1[i, j] + _A2 * h2[i, j]
        psi = _expm_apply(a, h, psi, term, work)
    return psi, 0, 0.0
