"""Parametric bootstrap engine with order-independent seeding.

Replicates are grouped in fixed blocks of :data:`BLOCK`.  Block ``k`` draws
from its own generator, derived from ``(master_seed, path, k)`` by
:class:`numpy.random.SeedSequence`, so a batch depends only on the seed and
never on how many worker threads produced it.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._accel import thread_count
from .dist import Kernel, family_cdf, family_draw
from .errors import EmptyBatchError, ExcessiveFailureError, InvalidParameterError, UnsupportedFamilyError
from .fit import FITTABLE, FitResult, SampleShape, fit_ml_batch

__all__ = [
    "BLOCK",
    "MAX_FAILURE_FRACTION",
    "RngPolicy",
    "BootstrapBatch",
    "as_policy",
    "run_blocks",
    "parametric_bootstrap",
    "calibration_u_values",
]

BLOCK = 512
MAX_FAILURE_FRACTION = 0.1


@dataclass(frozen=True)
class RngPolicy:
    """Counter-based stream derivation.

    ``generator(*key)`` returns the same stream for the same
    ``(master_seed, path + key)`` no matter when or where it is called.
    ``child(*key)`` extends the path for an independent sub-namespace.
    """

    master_seed: int
    path: tuple = ()

    def __post_init__(self):
        seed = int(self.master_seed)
        if not 0 <= seed < 2**64:
            raise InvalidParameterError("master_seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "master_seed", seed)
        object.__setattr__(self, "path", tuple(int(k) for k in self.path))

    def child(self, *key):
        return RngPolicy(self.master_seed, self.path + tuple(int(k) for k in key))

    def seed_sequence(self, *key):
        return np.random.SeedSequence(self.master_seed,
                                      spawn_key=self.path + tuple(int(k) for k in key))

    def generator(self, *key):
        return np.random.Generator(np.random.PCG64(self.seed_sequence(*key)))


def as_policy(rng):
    """Accept an :class:`RngPolicy` or an integer seed."""
    if isinstance(rng, RngPolicy):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RngPolicy(int(rng))
    raise InvalidParameterError("rng must be an RngPolicy or an integer seed")


def run_blocks(fn, count, threads=None):
    """Evaluate ``fn(k)`` for ``k < count`` and return the results in index order."""
    workers = min(thread_count(threads), max(count, 1))
    if workers <= 1 or count <= 1:
        return [fn(k) for k in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))


@dataclass(frozen=True, eq=False)
class BootstrapBatch:
    """Retained bootstrap refits.

    Attributes
    ----------
    B : int
        Requested replicate count.
    family : str
    theta : tuple
        Parameters the replicates were drawn from.
    estimates : ndarray, shape (B - failures, 2)
        One row of refitted parameters per retained replicate.
    index : ndarray of int
        Replicate number of each retained row.
    failures : int
        Replicates discarded because the refit was degenerate or did not converge.
    u_values : ndarray or None
        Calibration values ``G(y*; theta*_b)`` once computed.
    """

    B: int
    family: str
    theta: tuple
    estimates: np.ndarray
    index: np.ndarray
    failures: int = 0
    u_values: np.ndarray | None = field(default=None)

    def __post_init__(self):
        est = np.asarray(self.estimates, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "estimates", est)
        object.__setattr__(self, "index", np.asarray(self.index, dtype=np.int64))
        if est.shape[0] != self.B - self.failures:
            raise InvalidParameterError("estimates length must equal B - failures")

    def __len__(self):
        return self.estimates.shape[0]

    @property
    def models(self):
        return [Kernel(self.family, tuple(row)) for row in self.estimates]

    def with_u_values(self, u):
        return replace(self, u_values=np.asarray(u, dtype=float))

    def require_nonempty(self):
        if len(self) == 0:
            raise EmptyBatchError("bootstrap batch has no retained replicates")

    @classmethod
    def identity(cls, fit, B):
        """A batch whose every replicate equals the original estimate."""
        theta = np.asarray(fit.theta, dtype=float)
        return cls(B, fit.family, tuple(theta), np.tile(theta, (B, 1)), np.arange(B), 0)

    @classmethod
    def from_estimates(cls, fit, estimates):
        est = np.asarray(estimates, dtype=float).reshape(-1, 2)
        return cls(est.shape[0], fit.family, tuple(fit.theta), est, np.arange(est.shape[0]), 0)


def _draw_block(family, theta, gen, count, shape):
    X = family_draw(family, gen, (count, shape.n), *theta)
    if shape.censored:
        X.sort(axis=1)
        X[:, shape.r:] = X[:, shape.r - 1:shape.r]
    return X


def parametric_bootstrap(fit, shape=None, B=5000, rng=0, threads=None):
    """Draw ``B`` samples from the fitted model and refit each one.

    Parameters
    ----------
    fit : FitResult
        Converged fit supplying the generating parameters.
    shape : SampleShape or Sample, optional
        Size and censoring of each bootstrap sample; defaults to the fitted sample's.
    B : int
        Number of replicates.
    rng : RngPolicy or int
    threads : int, optional
        Worker threads; ``None`` reads ``PREDINT_THREADS``.

    Returns
    -------
    BootstrapBatch

    Raises
    ------
    UnsupportedFamilyError
        Discrete families.
    ExcessiveFailureError
        More than 10% of refits were discarded.
    """
    if not isinstance(fit, FitResult):
        raise InvalidParameterError("fit must be a FitResult")
    family = fit.family
    if family not in FITTABLE:
        raise UnsupportedFamilyError(f"parametric bootstrap is not defined for {family!r}")
    if not fit.converged:
        raise InvalidParameterError("bootstrap requires a converged fit")
    if shape is None:
        shape = fit.shape
    elif not isinstance(shape, SampleShape):
        shape = shape.shape
    B = int(B)
    if B < 1:
        raise InvalidParameterError("B must be a positive integer")
    policy = as_policy(rng)
    theta = fit.theta
    r = shape.r if shape.censored else None
    nblocks = math.ceil(B / BLOCK)

    def block(k):
        count = min(BLOCK, B - k * BLOCK)
        X = _draw_block(family, theta, policy.generator(k), count, shape)
        res = fit_ml_batch(family, X, r)
        return res.params, res.ok

    parts = run_blocks(block, nblocks, threads)
    params = np.concatenate([p for p, _ in parts])
    ok = np.concatenate([o for _, o in parts])
    failures = int(B - ok.sum())
    if failures > MAX_FAILURE_FRACTION * B:
        raise ExcessiveFailureError(
            f"{failures} of {B} bootstrap refits were degenerate or did not converge",
            failures=failures, total=B)
    return BootstrapBatch(B, family, tuple(theta), params[ok], np.flatnonzero(ok), failures)


def calibration_u_values(fit, batch, rng=1, threads=None):
    """Return ``u*_b = G(y*_b; theta*_b)`` with ``y*_b`` drawn from the fitted model.

    The predictand for replicate ``b`` comes from block ``b // BLOCK`` of
    ``rng``, so discarded replicates do not shift the draws of retained ones.
    """
    batch.require_nonempty()
    policy = as_policy(rng)
    theta = fit.theta
    nblocks = math.ceil(batch.B / BLOCK)

    def block(k):
        count = min(BLOCK, batch.B - k * BLOCK)
        return family_draw(fit.family, policy.generator(k), count, *theta)

    y = np.concatenate(run_blocks(block, nblocks, threads))[batch.index]
    est = batch.estimates
    u = family_cdf(batch.family, y, est[:, 0], est[:, 1])
    if not np.all((u >= 0.0) & (u <= 1.0)):
        raise AssertionError("calibration value outside [0, 1]")
    return u
