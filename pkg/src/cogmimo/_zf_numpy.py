"""Pure numpy implementation of the batched zero-forcing SNR kernel."""

import numpy as np


def zf_snr_batch(est, err, noise, pivot_rtol):
    """Post-ZF SNR of every stream in every trial.

    ``est`` and ``err`` are ``(T, N, K)`` and ``(T, N, K2)`` complex arrays,
    ``noise`` the per-trial noise variance.  Returns ``(snr, valid)`` where
    ``valid[t]`` is False when the Gram matrix of ``est[t]`` has a Cholesky
    pivot below ``pivot_rtol`` times its trace.
    """
    est = np.asarray(est, dtype=complex)
    err = np.asarray(err, dtype=complex)
    noise = np.asarray(noise, dtype=float)
    est_h = np.conj(np.swapaxes(est, -1, -2))
    gram = est_h @ est
    trace = np.real(np.trace(gram, axis1=-2, axis2=-1))
    valid = np.ones(len(est), dtype=bool)
    try:
        chol = np.linalg.cholesky(gram)
        pivots = np.real(np.diagonal(chol, axis1=-2, axis2=-1)) ** 2
        valid &= pivots.min(axis=-1) > pivot_rtol * trace
    except np.linalg.LinAlgError:
        for t in range(len(est)):
            try:
                chol_t = np.linalg.cholesky(gram[t])
            except np.linalg.LinAlgError:
                valid[t] = False
                continue
            piv = np.real(np.diag(chol_t)) ** 2
            valid[t] = piv.min() > pivot_rtol * trace[t]

    snr = np.zeros(est.shape[:1] + est.shape[2:3])
    if not valid.any():
        return snr, valid
    gram_ok = gram[valid]
    pinv = np.linalg.solve(gram_ok, est_h[valid])
    rownorm = np.sum(np.abs(pinv) ** 2, axis=-1)
    interf = np.sum(np.abs(pinv @ err[valid]) ** 2, axis=-1)
    snr[valid] = 1.0 / (interf + noise[valid, None] * rownorm)
    return snr, valid
