"""Weighted least-squares fit of y0 + A cos(wt) + B cos(2wt)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class FitError(RuntimeError):
    pass


@dataclass(frozen=True)
class OscillationFit:
    y0: float
    A: float
    B: float
    omega: float
    residual_rms: float
    covariance: np.ndarray  # 4x4 over (y0, A, B, omega)
    chi2: float
    n_points: int
    omega_fixed: bool = False

    @property
    def params(self) -> np.ndarray:
        return np.array([self.y0, self.A, self.B, self.omega])

    @property
    def errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    def __call__(self, t):
        return oscillation_model(t, self.y0, self.A, self.B, self.omega)

    def at_angle(self, theta: float) -> float:
        """Model value at rotation angle ``theta = omega * t``."""
        return float(self.y0 + self.A * np.cos(theta) + self.B * np.cos(2 * theta))


def oscillation_model(t, y0, A, B, omega):
    t = np.asarray(t, dtype=float)
    return y0 + A * np.cos(omega * t) + B * np.cos(2 * omega * t)


def _design(t, omega, A, B):
    wt = omega * t
    return np.column_stack(
        [
            np.ones_like(t),
            np.cos(wt),
            np.cos(2 * wt),
            -A * t * np.sin(wt) - 2 * B * t * np.sin(2 * wt),
        ]
    )


def _linear_solve(t, y, err, omega):
    X = _design(t, omega, 0.0, 0.0)[:, :3] / err[:, None]
    coef, *_ = np.linalg.lstsq(X, y / err, rcond=None)
    return coef


def fit_oscillation(
    t,
    y,
    err,
    omega0: float,
    fix_omega: bool = False,
    max_iter: int = 200,
    rtol: float = 1e-10,
) -> OscillationFit:
    """Fit ``y0 + A cos(omega t) + B cos(2 omega t)`` weighted by ``1/err**2``.

    Parameters
    ----------
    t, y, err : array_like
        Sample times (s), values and one-sigma errors (all > 0).
    omega0 : float
        Starting angular frequency (rad/s), normally the calibrated Raman
        Rabi frequency.
    fix_omega : bool
        Hold omega at ``omega0``; the fit is then linear.

    Raises
    ------
    FitError
        Fewer than 8 points, singular normal equations, or no convergence
        within ``max_iter`` Levenberg-Marquardt iterations.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    err = np.asarray(err, dtype=float)
    if not (t.shape == y.shape == err.shape) or t.ndim != 1:
        raise ValueError("t, y and err must be 1-D arrays of equal length")
    if t.size < 8:
        raise FitError(f"need at least 8 points, got {t.size}")
    if np.any(err <= 0) or not np.all(np.isfinite(err)):
        raise ValueError("errors must be positive and finite")
    if omega0 <= 0:
        raise ValueError("omega0 must be positive")

    y0, A, B = _linear_solve(t, y, err, omega0)
    p = np.array([y0, A, B, omega0], dtype=float)

    def cost(q):
        r = (y - oscillation_model(t, *q)) / err
        return float(r @ r)

    # omega is unidentifiable when both oscillating amplitudes vanish
    omega_col = _design(t, p[3], p[1], p[2])[:, 3] / err
    scale = np.sqrt(np.sum((1.0 / err) ** 2)) * (np.max(t) - np.min(t) + 1e-300)
    if not fix_omega and np.linalg.norm(omega_col) <= 1e-9 * scale:
        fix_omega = True

    free = slice(0, 3) if fix_omega else slice(0, 4)
    if not fix_omega:
        lam = 1e-3
        c = cost(p)
        converged = False
        for _ in range(max_iter):
            J = _design(t, p[3], p[1], p[2]) / err[:, None]
            r = (y - oscillation_model(t, *p)) / err
            JTJ = J.T @ J
            g = J.T @ r
            while True:
                M = JTJ + lam * np.diag(np.diag(JTJ))
                try:
                    step = np.linalg.solve(M, g)
                except np.linalg.LinAlgError as exc:
                    raise FitError("singular normal equations") from exc
                trial = p + step
                c_trial = cost(trial)
                if c_trial <= c:
                    break
                lam *= 10.0
                if lam > 1e12:
                    step = np.zeros(4)
                    trial, c_trial = p, c
                    break
            p, c = trial, c_trial
            lam = max(lam / 10.0, 1e-12)
            tol = rtol * np.abs(p)
            tol[:3] += 1e-13 * (np.max(np.abs(y)) + 1e-300)
            if np.all(np.abs(step) <= tol):
                converged = True
                break
        if not converged:
            raise FitError(f"no convergence after {max_iter} iterations")
        p[3] = abs(p[3])

    J = (_design(t, p[3], p[1], p[2]) / err[:, None])[:, free]
    JTJ = J.T @ J
    d = np.sqrt(np.diag(JTJ))
    if np.any(d == 0):
        raise FitError("singular normal equations")
    corr = JTJ / np.outer(d, d)
    if np.linalg.cond(corr) > 1e12:
        raise FitError("singular normal equations")
    cov = np.zeros((4, 4))
    cov[free, free] = np.linalg.inv(corr) / np.outer(d, d)
    resid = y - oscillation_model(t, *p)
    return OscillationFit(
        y0=float(p[0]),
        A=float(p[1]),
        B=float(p[2]),
        omega=float(p[3]),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        covariance=cov,
        chi2=float(np.sum((resid / err) ** 2)),
        n_points=int(t.size),
        omega_fixed=fix_omega,
    )


def dominant_frequency(t, y) -> float:
    """Angular frequency of the largest non-DC peak of a uniformly sampled signal."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    dt = t[1] - t[0]
    n = 16 * t.size
    spec = np.abs(np.fft.rfft(y - y.mean(), n=n))
    freqs = np.fft.rfftfreq(n, dt)
    k = int(np.argmax(spec[1:]) + 1)
    return float(2 * np.pi * freqs[k])
