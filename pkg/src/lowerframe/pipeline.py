"""Approximants, perturbation, resolvent vectors and scaling weights.

Given the canonical basis ``u_n`` of a family, each ``u_n`` is approximated
by a finite combination ``z_n = sum_{k >= ⌈n/2⌉} gamma_n[k] v_k`` with
``||u_n - z_n|| < 3^-n``. Then ``T = sum_n u_n (u_n - z_n)^*`` has norm
below 1/2, ``w_n = (I - T)^{-1} u_n`` satisfies ``I = sum_n w_n z_n^*``,
and the weights

    lambda_k = sum_{n <= 2k} 2^{n/2 + k + 1} ||w_n||^2 |gamma_n[k]|^2

make ``||x||^2 <= sum_k lambda_k |v_k^* x|^2`` hold for every ``x``.
"""

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import verify
from .chain import build_canonical_basis, compute_tail_chain
from .exceptions import (
    ApproximationError,
    DegenerateError,
    InputError,
    InvertibilityError,
    LowerFrameError,
    WeightOverflowError,
)
from .linalg import DEFAULT_RANK_TOL, min_norm_least_squares, operator_norm

MODES = ("exact", "quantized")
METHODS = ("direct", "neumann")

# binary64 cannot resolve residuals far below this; 3^-n is floored here
RESIDUAL_FLOOR = 1e-9
# coefficients below this fraction of the largest one are dropped
PRUNE_RTOL = 1e-14
# ceiling on 2M; past it lambda_k leaves the binary64 range
MAX_SLOTS = 512
NEUMANN_TARGET = 1e-14
AGREEMENT_TOL = 1e-9
RESOLVENT_RTOL = 1e-12


def residual_budget(n):
    """Largest admissible ``||u_n - z_n||``: ``3^-n``, floored for binary64."""
    return max(3.0**-n, RESIDUAL_FLOOR)


@dataclass(frozen=True)
class ApproximantSet:
    """Rows ``z_1..z_{2M}``, their coefficient maps and residuals.

    ``gammas[n - 1]`` maps absolute family indices ``k >= ⌈n/2⌉`` to
    coefficients; ``steps[n - 1]`` is the rounding step used in quantized
    mode (``None`` when coefficients were left exact).
    """

    vectors: np.ndarray
    gammas: tuple
    residuals: np.ndarray
    steps: tuple

    def __len__(self):
        return self.vectors.shape[0]

    @property
    def supports(self):
        return [sorted(g) for g in self.gammas]


def _quantize(c, A, u, target):
    """Round ``c`` to the coarsest power-of-two grid keeping ``||u - Ac|| < target``."""
    top = max(float(np.abs(c.real).max()), float(np.abs(c.imag).max()))
    if top == 0:
        return c, None
    e = math.frexp(top)[1]
    for j in range(0, 60):
        step = math.ldexp(1.0, e - j)
        q = step * np.round(c.real / step) + 1j * step * np.round(c.imag / step)
        if np.linalg.norm(u - A @ q) < target:
            return q, step
    return c, None


def approximate_basis(u, family, mode="exact", rank_tol=DEFAULT_RANK_TOL):
    """Approximate every ``u_n`` from the tail ``{v_k : k >= ⌈n/2⌉}``.

    In exact mode the coefficients are the minimum-norm least-squares
    solution over one window of the tail (``k = ⌈n/2⌉..N`` for a zero tail,
    one full period for a cyclic tail). Quantized mode then rounds them to
    the coarsest power-of-two grid that keeps the residual under
    ``3^-n / 2``, so that ``T`` is genuinely nonzero.

    Raises
    ------
    ApproximationError
        If some residual is not below :func:`residual_budget`.
    """
    if mode not in MODES:
        raise InputError(f"mode must be one of {MODES}, got {mode!r}")
    U = u.vectors
    L, d = U.shape
    N = family.count
    Z = np.zeros((L, d), dtype=complex)
    gammas, steps = [], []
    residuals = np.zeros(L)
    for i in range(L):
        n = i + 1
        un = U[i]
        if not np.any(un):
            gammas.append({})
            steps.append(None)
            continue
        lo = (n + 1) // 2
        hi = N if family.tail_mode == "zero" else lo + N - 1
        if lo > hi:
            raise ApproximationError(n, 1.0, residual_budget(n))
        A = family.columns(lo, hi)
        c = min_norm_least_squares(A, un, rank_tol)
        c[np.abs(c) <= PRUNE_RTOL * np.abs(c).max(initial=0.0)] = 0
        step = None
        if mode == "quantized":
            c, step = _quantize(c, A, un, 3.0**-n / 2)
        idx = np.flatnonzero(c)
        gamma = {lo + int(j): complex(c[j]) for j in idx}
        z = A[:, idx] @ c[idx]
        rho = float(np.linalg.norm(un - z))
        if not rho < residual_budget(n):
            raise ApproximationError(n, rho, residual_budget(n))
        Z[i] = z
        residuals[i] = rho
        gammas.append(gamma)
        steps.append(step)
    Z.setflags(write=False)
    residuals.setflags(write=False)
    return ApproximantSet(Z, tuple(gammas), residuals, tuple(steps))


@dataclass(frozen=True)
class PerturbationOperator:
    matrix: np.ndarray
    norm: float
    series_bound: float


def build_perturbation(u, z):
    """``T = sum_n u_n (u_n - z_n)^*`` with its operator norm.

    Raises :class:`InvertibilityError` when ``||T|| >= 1``.
    """
    U = np.asarray(getattr(u, "vectors", u), dtype=complex)
    Z = np.asarray(getattr(z, "vectors", z), dtype=complex)
    if U.shape != Z.shape:
        raise InputError(f"u has shape {U.shape} but z has {Z.shape}")
    T = U.T @ (U - Z).conj()
    norm = operator_norm(T)
    if isinstance(z, ApproximantSet):
        series = float(math.fsum(z.residuals))
    else:
        series = float(math.fsum(np.linalg.norm(U - Z, axis=1)))
    if norm >= 1:
        raise InvertibilityError(f"||T|| = {norm:.6g} >= 1; I - T may be singular")
    T.setflags(write=False)
    return PerturbationOperator(T, norm, series)


def neumann_terms(norm):
    """Number of powers ``J`` so that ``norm^J <= 1e-14`` (0 when ``norm == 0``)."""
    if norm == 0:
        return 0
    return max(0, math.ceil(math.log(NEUMANN_TARGET) / math.log(norm)))


def resolve_frame(T, u, method="direct"):
    """Rows ``w_n = (I - T)^{-1} u_n``.

    ``method="direct"`` uses an LU solve; ``"neumann"`` sums
    ``sum_{j<=J} T^j u_n`` with ``J`` from :func:`neumann_terms`.
    """
    if method not in METHODS:
        raise InputError(f"method must be one of {METHODS}, got {method!r}")
    if T.norm >= 1:
        raise InvertibilityError(f"||T|| = {T.norm:.6g} >= 1")
    U = np.asarray(getattr(u, "vectors", u), dtype=complex)
    d = U.shape[1]
    if method == "direct":
        Wc = np.linalg.solve(np.eye(d) - T.matrix, U.T)
    else:
        term = U.T.copy()
        Wc = term.copy()
        for _ in range(neumann_terms(T.norm)):
            term = T.matrix @ term
            Wc += term
    W = Wc.T.copy()
    W[~np.any(U != 0, axis=1)] = 0
    return W


def scaling_weights(w, z, lambda_floor=0.0, count=None):
    """Weights ``lambda_k`` as a ``{k: value}`` dict with ``k`` ascending.

    Keys are the union of the coefficient supports. With a positive
    ``lambda_floor`` every index ``1..max(count, largest key)`` is present
    and the floor is added to each value.

    Raises
    ------
    WeightOverflowError
        When a weight exceeds the binary64 range.
    """
    if lambda_floor < 0:
        raise InputError("lambda_floor must be nonnegative")
    W = np.asarray(w, dtype=complex)
    wnorm2 = np.sum(np.abs(W) ** 2, axis=1)
    terms = {}
    for i, gamma in enumerate(z.gammas):
        n = i + 1
        half = math.sqrt(2.0) if n % 2 else 1.0
        for k, g in gamma.items():
            mant = float(wnorm2[i]) * abs(g) ** 2 * half
            terms.setdefault(k, []).append((mant, n // 2 + k + 1))
    lam = {}
    for k in sorted(terms):
        try:
            lam[k] = math.fsum(math.ldexp(m, e) for m, e in terms[k])
        except OverflowError:
            lam[k] = math.inf
        if not math.isfinite(lam[k]):
            log2 = max(math.log2(m) + e for m, e in terms[k] if m > 0)
            raise WeightOverflowError(k, log2)
    if lambda_floor > 0:
        top = max([count or 0, *lam])
        lam = {k: lam.get(k, 0.0) + lambda_floor for k in range(1, top + 1)}
    return lam


def effective_weights(lam, family):
    """Fold ``{k: lambda_k}`` onto the stored indices ``1..N``.

    A cyclic tail sums weights over each residue class ``k ≡ j (mod N)``;
    a zero tail has no weights past ``N``.
    """
    N = family.count
    eff = np.zeros(N)
    for k, value in lam.items():
        if k < 1:
            raise InputError(f"weight index {k} is below 1")
        if k > N and family.tail_mode == "zero":
            raise InputError(f"weight index {k} exceeds N = {N} for a zero-tail family")
        eff[(k - 1) % N] += value
    return eff


@dataclass(frozen=True)
class PipelineConfig:
    mode: str = "exact"
    method: str = "direct"
    rank_tol: float = DEFAULT_RANK_TOL
    lambda_floor: float = 0.0
    samples: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise InputError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.method not in METHODS:
            raise InputError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.rank_tol > 0:
            raise InputError("rank_tol must be positive")
        if self.lambda_floor < 0:
            raise InputError("lambda_floor must be nonnegative")
        if self.samples < 1:
            raise InputError("samples must be at least 1")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class ScalingCertificate:
    """Everything one run produced, plus the verification report."""

    family: object
    config: PipelineConfig
    chain: object
    basis: object
    approximants: ApproximantSet
    perturbation: PerturbationOperator
    w: np.ndarray
    lambdas: dict
    lambda_eff: np.ndarray
    report: verify.VerificationReport
    diagnostics: dict

    @property
    def passed(self):
        return self.report.passed

    @property
    def min_frame_eig(self):
        return self.diagnostics["min_frame_eig"]

    @property
    def T_norm(self):
        return self.perturbation.norm

    def to_dict(self, extra_config=None):
        config = self.config.to_dict()
        if extra_config:
            config.update(extra_config)
        lam = [
            {"k": k, "value": float(v), "log2": float(math.log2(v)) if v > 0 else None}
            for k, v in self.lambdas.items()
        ]
        return {
            "dim": self.family.dim,
            "count": self.family.count,
            "tail": self.family.tail_mode,
            "field": self.family.field,
            "mode": self.config.mode,
            "method": self.config.method,
            "T_norm": float(self.perturbation.norm),
            "series_bound": float(self.perturbation.series_bound),
            "identity_residual": float(self.diagnostics["identity_residual"]),
            "min_frame_eig": float(self.diagnostics["min_frame_eig"]),
            "uniform_baseline": self.diagnostics["uniform_baseline"],
            "passed": self.passed,
            "lambda": lam,
            "lambda_eff": [float(x) for x in self.lambda_eff],
            "w_norms": [float(x) for x in np.linalg.norm(self.w, axis=1)],
            "residuals": [float(x) for x in self.approximants.residuals],
            "gamma_supports": self.approximants.supports,
            "checks": self.report.to_list(),
            "seed": self.report.seed,
            "sample_count": self.report.sample_count,
            "config": config,
        }

    def to_json(self, extra_config=None):
        return json.dumps(self.to_dict(extra_config), indent=2, allow_nan=False) + "\n"


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except LowerFrameError as exc:
        if exc.stage is None:
            exc.stage = name
        raise


def _verification(family, config, chain, basis, z, T, W, lam_eff):
    xs = verify.sample_unit_vectors(family.dim, config.samples, config.seed)
    checks = []
    checks += verify.check_chain(chain, basis)
    identity = verify.check_identity(W, z)
    checks.append(identity)
    checks += verify.check_lower_frame(family, lam_eff, xs=xs)
    checks += verify.check_chained(W, z, family, lam_eff, xs)

    per_n = verify.check_z_bound(z, family, xs)
    if per_n:
        worst = min(per_n, key=lambda c: c.rhs + c.tol - c.lhs)
        checks.append(verify.Check("z_bound", all(c.passed for c in per_n), worst.lhs, worst.rhs, worst.tol))

    ratio = max(
        (float(r) / residual_budget(i + 1) for i, r in enumerate(z.residuals)), default=0.0
    )
    checks.append(verify.Check("approximation.residual_budget", ratio < 1, ratio, 1.0))
    checks.append(verify.make_check("perturbation.series_bound", T.norm, T.series_bound, 1e-10))
    checks.append(verify.Check("perturbation.contraction", T.norm < 1, T.norm, 1.0))

    U = basis.vectors
    resid = np.linalg.norm(W @ (np.eye(family.dim) - T.matrix).T - U, axis=1)
    scale = np.maximum(np.linalg.norm(U, axis=1), 1.0)
    checks.append(
        verify.make_check("resolvent.residual", float(np.max(resid / scale, initial=0.0)), RESOLVENT_RTOL)
    )
    other = "neumann" if config.method == "direct" else "direct"
    W_other = resolve_frame(T, basis, other)
    agreement = float(np.max(np.linalg.norm(W - W_other, axis=1), initial=0.0))
    checks.append(verify.make_check("resolvent.agreement", agreement, AGREEMENT_TOL))

    report = verify.VerificationReport(checks, seed=config.seed, sample_count=config.samples)
    return report, identity.lhs, agreement


def run_pipeline(family, config=None, **kwargs):
    """Run every stage on ``family`` and return a :class:`ScalingCertificate`.

    ``config`` may be a :class:`PipelineConfig`; keyword arguments build or
    override one. Stage errors propagate with ``exc.stage`` set.
    """
    if config is None:
        config = PipelineConfig(**kwargs)
    elif kwargs:
        config = PipelineConfig(**{**config.to_dict(), **kwargs})
    if 2 * family.count > MAX_SLOTS:
        raise InputError(
            f"family of {family.count} vectors needs {2 * family.count} slots; "
            f"the supported maximum is {MAX_SLOTS}"
        )

    chain = _stage("tail-chain", compute_tail_chain, family, config.rank_tol)
    basis = _stage("canonical-basis", build_canonical_basis, chain)
    z = _stage("approximation", approximate_basis, basis, family, config.mode, config.rank_tol)
    T = _stage("perturbation", build_perturbation, basis, z)
    W = _stage("resolvent", resolve_frame, T, basis, config.method)
    lam = _stage("weights", scaling_weights, W, z, config.lambda_floor, family.count)
    lam_eff = effective_weights(lam, family)

    report, identity_residual, agreement = _stage(
        "verification", _verification, family, config, chain, basis, z, T, W, lam_eff
    )
    baseline = None
    if family.tail_mode == "zero":
        try:
            baseline = verify.uniform_baseline(family)
        except DegenerateError:
            baseline = None
    diagnostics = {
        "T_norm": T.norm,
        "series_bound": T.series_bound,
        "identity_residual": identity_residual,
        "min_frame_eig": report["lower_frame.eigen"].rhs,
        "neumann_agreement": agreement,
        "uniform_baseline": baseline,
        "mode": config.mode,
        "method": config.method,
        "config": config.to_dict(),
    }
    W.setflags(write=False)
    lam_eff.setflags(write=False)
    return ScalingCertificate(
        family=family,
        config=config,
        chain=chain,
        basis=basis,
        approximants=z,
        perturbation=T,
        w=W,
        lambdas=lam,
        lambda_eff=lam_eff,
        report=report,
        diagnostics=diagnostics,
    )
