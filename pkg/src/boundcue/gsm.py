"""Gaussian scale mixture penalty used by the smoothness priors.

The penalty is the negative log-likelihood of a zero-mean mixture of
Gaussians, shifted so that c(0) = 0.  Heavy tails make it robust: large
differences are penalised sublinearly compared to a quadratic.
"""

from dataclasses import dataclass, field

import numpy as np

# Stand-in mixture for the out-of-scope trained parameters; replaceable
# via the gsm.* config keys.
DEFAULT_SIGMAS = (0.01, 0.05, 0.2, 1.0)
DEFAULT_WEIGHTS = (0.4, 0.3, 0.2, 0.1)


@dataclass(frozen=True)
class GsmParams:
    sigmas: np.ndarray = field(default_factory=lambda: np.array(DEFAULT_SIGMAS))
    weights: np.ndarray = field(default_factory=lambda: np.array(DEFAULT_WEIGHTS))

    def __post_init__(self):
        sig = np.asarray(self.sigmas, dtype=np.float64)
        w = np.asarray(self.weights, dtype=np.float64)
        if sig.ndim != 1 or sig.shape != w.shape:
            raise ValueError("sigmas and weights must be 1-D and the same length")
        if not np.all(sig > 0) or not np.all(np.diff(sig) > 0):
            raise ValueError("sigmas must be positive and strictly increasing")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "sigmas", sig)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_dict(cls, d):
        return cls(
            sigmas=np.asarray(d.get("sigmas", DEFAULT_SIGMAS), dtype=np.float64),
            weights=np.asarray(d.get("weights", DEFAULT_WEIGHTS), dtype=np.float64),
        )

    # precomputed pieces consumed by the jitted kernels
    @property
    def a_log(self):
        return np.log(self.weights_safe / self.sigmas)

    @property
    def inv2s2(self):
        return 1.0 / (2.0 * self.sigmas**2)

    @property
    def invs2(self):
        return 1.0 / self.sigmas**2

    @property
    def weights_safe(self):
        # zero weights would produce -inf logs; drop them from the logs
        w = self.weights.copy()
        w[w == 0] = 1e-300
        return w


def nll(t, params: GsmParams):
    """Penalty c(t) with c(0) = 0; accepts scalars or arrays."""
    t = np.asarray(t, dtype=np.float64)
    a = params.a_log
    e = a.reshape((-1,) + (1,) * t.ndim) - (t * t)[None, ...] * params.inv2s2.reshape(
        (-1,) + (1,) * t.ndim
    )
    m = np.max(e, axis=0)
    s = np.sum(np.exp(e - m[None, ...]), axis=0)
    lse0 = _lse(a)
    return lse0 - (m + np.log(s))


def slope_ratio(t, params: GsmParams):
    """rho(t) such that c'(t) = t * rho(t); finite and positive at t = 0."""
    t = np.asarray(t, dtype=np.float64)
    a = params.a_log
    shape = (-1,) + (1,) * t.ndim
    e = a.reshape(shape) - (t * t)[None, ...] * params.inv2s2.reshape(shape)
    m = np.max(e, axis=0)
    w = np.exp(e - m[None, ...])
    return np.sum(w * params.invs2.reshape(shape), axis=0) / np.sum(w, axis=0)


def _lse(a):
    m = np.max(a)
    return m + np.log(np.sum(np.exp(a - m)))
