"""Numba inner loops for state-vector evolution.

Everything here works on split real/imaginary float64 arrays in place. The
driver term sum_i (I - X_i)/2 is applied as n independent one-qubit rotations
(a butterfly pass per qubit), the problem term as a diagonal phase, so one
split step costs O(n * 2^n) instead of a 2^n x 2^n matrix product.

The one-qubit unitary for exp(-i*theta*(I - X)/2), including its global
phase, is [[A, B], [B, A]] with A = cos(h)^2 - i*sin(h)*cos(h),
B = sin(h)^2 + i*sin(h)*cos(h), h = theta/2. (Check: A + B = 1 on the |+>
eigenvector, A - B = exp(-i*theta) on |->.)
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange


@njit(cache=True)
def apply_problem_phase(re, im, viol, phi):
    """psi <- exp(-i * phi * viol) * psi, elementwise."""
    for z in range(re.shape[0]):
        ang = phi * viol[z]
        c = np.cos(ang)
        s = np.sin(ang)
        r = re[z]
        i = im[z]
        re[z] = r * c + i * s
        im[z] = i * c - r * s


@njit(cache=True)
def apply_driver(re, im, n, theta):
    """psi <- exp(-i * theta * sum_i (I - X_i)/2) * psi via per-qubit butterflies."""
    h = 0.5 * theta
    ch = np.cos(h)
    sh = np.sin(h)
    ar = ch * ch
    ai = -sh * ch
    br = sh * sh
    bi = sh * ch
    size = re.shape[0]
    for q in range(n):
        stride = 1 << (n - 1 - q)
        block = stride * 2
        for base in range(0, size, block):
            for off in range(stride):
                a = base + off
                b = a + stride
                ur = re[a]
                ui = im[a]
                vr = re[b]
                vi = im[b]
                re[a] = ar * ur - ai * ui + br * vr - bi * vi
                im[a] = ar * ui + ai * ur + br * vi + bi * vr
                re[b] = br * ur - bi * ui + ar * vr - ai * vi
                im[b] = br * ui + bi * ur + ar * vi + ai * vr


@njit(cache=True)
def strang_segment(re, im, viol, thetas, phis, n):
    """One contiguous run of symmetric split steps, in place.

    Step k is driver(thetas[k]/2), phase(phis[k]), driver(thetas[k]/2);
    adjacent half-drivers are merged, which is exact because all driver
    rotations commute with each other.
    """
    steps = thetas.shape[0]
    apply_driver(re, im, n, 0.5 * thetas[0])
    for k in range(steps - 1):
        apply_problem_phase(re, im, viol, phis[k])
        apply_driver(re, im, n, 0.5 * (thetas[k] + thetas[k + 1]))
    apply_problem_phase(re, im, viol, phis[steps - 1])
    apply_driver(re, im, n, 0.5 * thetas[steps - 1])


@njit(cache=True, parallel=True)
def strang_segment_batch(re, im, viol, thetas, phis, n):
    """Row-parallel version: row b evolves under viol[b] with angles [b, :]."""
    for b in prange(re.shape[0]):
        strang_segment(re[b], im[b], viol[b], thetas[b], phis[b], n)


@njit(cache=True)
def digitized_evolve(re, im, viol, gammas, betas, n):
    """Alternating exact pulses: phase(gammas[j]) then driver(betas[j]), in time order."""
    for j in range(gammas.shape[0]):
        apply_problem_phase(re, im, viol, gammas[j])
        apply_driver(re, im, n, betas[j])
