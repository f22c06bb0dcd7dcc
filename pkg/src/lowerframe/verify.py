"""Independent numerical checks for a scaling certificate.

Every check records both sides of the inequality it tests, so a failing
report says by how much it failed. Nothing here raises on a failed check;
failures are data.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import DegenerateError, InputError
from .linalg import hermitian_min_eig, operator_norm, weighted_gram_min_eig

OPERATOR_TOL = 1e-8
RELATIVE_TOL = 1e-8
Z_BOUND_TOL = 1e-10


@dataclass(frozen=True)
class Check:
    """One instrumented inequality ``lhs <= rhs (+ tol)``."""

    name: str
    passed: bool
    lhs: float
    rhs: float
    tol: float = 0.0

    @property
    def slack(self):
        return self.rhs - self.lhs

    def to_dict(self):
        out = asdict(self)
        out["slack"] = self.slack
        return out


def make_check(name, lhs, rhs, tol=0.0):
    lhs, rhs = float(lhs), float(rhs)
    return Check(name, bool(lhs <= rhs + tol), lhs, rhs, tol)


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)
    seed: int = 0
    sample_count: int = 0

    def __post_init__(self):
        self.checks = sorted(self.checks, key=lambda c: c.name)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_list(self):
        return [c.to_dict() for c in self.checks]


def sample_unit_vectors(dim, samples, seed=0):
    """``samples`` complex Gaussian directions in C^dim, normalized, as rows.

    The same ``(dim, samples, seed)`` always yields the same array.
    """
    if samples < 1:
        raise InputError("samples must be at least 1")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((samples, dim)) + 1j * rng.standard_normal((samples, dim))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def frame_operator(family, lambda_eff):
    """``S = sum_k lambda_eff[k] v_k v_k^*`` over the stored vectors."""
    V = family.vectors
    lam = np.asarray(lambda_eff, dtype=float)
    return (V.T * lam) @ V.conj()


def min_frame_eig(family, lambda_eff):
    """Smallest eigenvalue of the weighted frame operator (graded-accurate)."""
    return weighted_gram_min_eig(family.vectors.T, lambda_eff)


def check_lower_frame(family, lambda_eff, samples=1000, seed=0, xs=None):
    """Test ``||x||^2 <= sum_k lambda_eff[k] |v_k^* x|^2``.

    Returns three checks: the worst of ``samples`` random unit vectors, the
    eigenvalue form ``1 <= min eig(S)``, and a consistency check that a
    passing eigenvalue bound is never contradicted by a sample.
    """
    lam = np.asarray(lambda_eff, dtype=float)
    if lam.shape != (family.count,):
        raise InputError(f"expected {family.count} weights, got shape {lam.shape}")
    if xs is None:
        xs = sample_unit_vectors(family.dim, samples, seed)
    proj = xs @ family.vectors.conj().T
    rhs = (np.abs(proj) ** 2) @ lam
    norms = np.sum(np.abs(xs) ** 2, axis=1)
    worst = int(np.argmin(rhs - norms))
    sampled = make_check("lower_frame.sampled", norms[worst], rhs[worst], OPERATOR_TOL)
    eig = make_check("lower_frame.eigen", 1.0, min_frame_eig(family, lam), OPERATOR_TOL)
    consistent = not (eig.passed and not sampled.passed)
    meta = Check("lower_frame.consistency", consistent, float(not consistent), 0.0)
    return [sampled, eig, meta]


def check_identity(w, z):
    """Operator norm of ``I - sum_n w_n z_n^*``; passes at or below 1e-8."""
    W = np.asarray(w, dtype=complex)
    Z = np.asarray(getattr(z, "vectors", z), dtype=complex)
    if W.shape != Z.shape:
        raise InputError(f"w has shape {W.shape} but z has {Z.shape}")
    R = np.eye(W.shape[1]) - W.T @ Z.conj()
    return make_check("identity", operator_norm(R), OPERATOR_TOL)


def weighted_cs_gap(beta):
    """Both sides of ``(sum beta_n)^2 <= sum 2^n beta_n^2`` (``n`` from 1)."""
    b = np.asarray(beta, dtype=float).ravel()
    if np.any(b < 0) or not np.all(np.isfinite(b)):
        raise InputError("beta must be finite and nonnegative")
    lhs = math.fsum(b) ** 2
    rhs = math.fsum(math.ldexp(float(x) ** 2, n) for n, x in enumerate(b, start=1))
    return lhs, rhs


def check_z_bound(z, family, x):
    """Per-approximant Cauchy-Schwarz bound on ``|z_n^* x|^2``.

    For each ``n`` with a nonempty coefficient map,
    ``|z_n^* x|^2 <= 2^{1 - n/2} sum_k 2^k |gamma_n[k]|^2 |v_k^* x|^2``.
    ``x`` may be a single vector or a stack of rows; each check reports the
    sample with the smallest margin.
    """
    X = np.atleast_2d(np.asarray(x, dtype=complex))
    out = []
    for i, gamma in enumerate(z.gammas):
        n = i + 1
        if not gamma:
            continue
        lhs = np.abs(X @ z.vectors[i].conj()) ** 2
        rhs = np.zeros(X.shape[0])
        for k, g in gamma.items():
            vx = X @ family.effective_vector(k).conj()
            rhs += 2.0 ** (k - n / 2 + 1) * abs(g) ** 2 * np.abs(vx) ** 2
        margin = rhs + Z_BOUND_TOL * (1 + rhs) - lhs
        j = int(np.argmin(margin))
        out.append(make_check(f"z_bound[{n}]", lhs[j], rhs[j], Z_BOUND_TOL * (1 + rhs[j])))
    return out


def chained_sums(w, z, family, lambda_eff, xs):
    """The three sides of the chained lower bound for each sample row.

    Returns ``(norms, middle, outer)`` with ``norms = ||x||^2``,
    ``middle = sum_n 2^n ||w_n||^2 |z_n^* x|^2`` and
    ``outer = sum_k lambda_eff[k] |v_k^* x|^2``.
    """
    W = np.asarray(w, dtype=complex)
    n = np.arange(1, W.shape[0] + 1)
    coef = np.ldexp(np.sum(np.abs(W) ** 2, axis=1), n)
    middle = (np.abs(xs @ z.vectors.conj().T) ** 2) @ coef
    outer = (np.abs(xs @ family.vectors.conj().T) ** 2) @ np.asarray(lambda_eff, dtype=float)
    norms = np.sum(np.abs(xs) ** 2, axis=1)
    return norms, middle, outer


def check_chained(w, z, family, lambda_eff, xs):
    """``||x||^2 <= middle <= outer`` with 1e-8 relative slack, worst sample."""
    norms, middle, outer = chained_sums(w, z, family, lambda_eff, xs)
    checks = []
    for name, a, b in (("chained.first", norms, middle), ("chained.second", middle, outer)):
        tol = RELATIVE_TOL * np.abs(b)
        j = int(np.argmin(b + tol - a))
        checks.append(make_check(name, a[j], b[j], tol[j]))
    return checks


def check_chain(chain, u):
    """Structural checks on the tail chain and the canonical basis."""
    from .chain import GRAM_TOL, NESTING_TOL, membership_residuals, nesting_residuals

    drops = np.array(chain.drops)
    bad_drop = drops[(drops != 0) & (drops != 1)]
    drop_check = Check(
        "chain.dim_drop",
        bad_drop.size == 0,
        float(drops.max(initial=0)),
        1.0,
    )
    accounting = abs(int(drops.sum()) + chain.core.shape[1] - chain.dim)
    return [
        drop_check,
        make_check("chain.dimension_count", accounting, 0),
        make_check("chain.nesting", nesting_residuals(chain).max(initial=0.0), NESTING_TOL),
        make_check("chain.gram", u.gram_deviation(), GRAM_TOL),
        make_check("chain.membership", membership_residuals(chain, u).max(initial=0.0), NESTING_TOL),
    ]


def uniform_baseline(family):
    """Smallest uniform weight making the stored vectors a frame: ``1 / A``.

    ``A`` is the smallest eigenvalue of ``sum_k v_k v_k^*``.
    """
    S = frame_operator(family, np.ones(family.count))
    A = hermitian_min_eig(S)
    if A <= 1e-10 * max(operator_norm(S), 1e-300):
        raise DegenerateError(f"unweighted frame operator is singular (min eigenvalue {A:.3e})")
    return 1.0 / A


def first_failing_scale(family, lambda_eff, max_halvings=2000):
    """Halve the weights until the eigenvalue bound drops below 1.

    Returns the first scale factor ``2^-j`` at which ``1 <= min eig`` fails.
    """
    lam = np.asarray(lambda_eff, dtype=float)
    scale = 1.0
    for _ in range(max_halvings):
        if min_frame_eig(family, scale * lam) < 1 - OPERATOR_TOL:
            return scale
        scale /= 2
    raise InputError("weights never fail the lower frame bound")
