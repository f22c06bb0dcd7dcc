"""Finite models of a total sequence, with tail semantics and file I/O."""

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import FamilyFormatError, GenerationError, InputError
from .linalg import DEFAULT_RANK_TOL, orthonormal_basis

TAIL_MODES = ("zero", "cyclic")
FIELDS = ("real", "complex")
GENERATOR_KINDS = (
    "orthonormal",
    "shifted_sum",
    "damped_tail",
    "random_gaussian",
    "cyclic_spanning",
)


@dataclass(frozen=True, eq=False)
class VectorFamily:
    """Vectors ``v_1..v_N`` in C^d plus a rule for indices past ``N``.

    With ``tail_mode="zero"`` every ``v_k`` with ``k > N`` is the zero
    vector; with ``"cyclic"`` the list repeats with period ``N``.

    ``vectors`` is stored as a read-only ``(N, d)`` complex array, one
    vector per row. Real families keep ``field="real"`` so they serialize
    back without imaginary parts.
    """

    vectors: np.ndarray
    tail_mode: str = "zero"
    field: str = "complex"

    def __post_init__(self):
        V = np.array(self.vectors, dtype=complex)
        if V.ndim != 2:
            raise InputError(f"vectors must form a 2-D array, got shape {V.shape}")
        if V.shape[0] < 1:
            raise InputError("a family needs at least one vector")
        if V.shape[1] < 1:
            raise InputError("ambient dimension must be at least 1")
        if not np.all(np.isfinite(V)):
            bad = int(np.argwhere(~np.isfinite(V))[0][0])
            raise InputError(f"vector {bad + 1} has a non-finite entry")
        if self.tail_mode not in TAIL_MODES:
            raise InputError(f"tail_mode must be one of {TAIL_MODES}, got {self.tail_mode!r}")
        if self.field not in FIELDS:
            raise InputError(f"field must be one of {FIELDS}, got {self.field!r}")
        if self.field == "real" and np.any(V.imag):
            raise InputError("real family has entries with nonzero imaginary part")
        V.setflags(write=False)
        object.__setattr__(self, "vectors", V)

    @property
    def dim(self):
        return self.vectors.shape[1]

    @property
    def count(self):
        return self.vectors.shape[0]

    def __len__(self):
        return self.count

    def __eq__(self, other):
        if not isinstance(other, VectorFamily):
            return NotImplemented
        return (
            self.tail_mode == other.tail_mode
            and self.field == other.field
            and self.vectors.shape == other.vectors.shape
            and bool(np.array_equal(self.vectors, other.vectors))
        )

    __hash__ = None

    def effective_vector(self, k):
        """``v_k`` for any 1-based ``k`` under the family's tail rule."""
        if k < 1:
            raise InputError(f"indices start at 1, got {k}")
        N = self.count
        if k <= N:
            return self.vectors[k - 1]
        if self.tail_mode == "zero":
            return np.zeros(self.dim, dtype=complex)
        return self.vectors[(k - 1) % N]

    def columns(self, start, stop):
        """Effective vectors ``v_start..v_stop`` (inclusive) as columns."""
        if stop < start:
            return np.zeros((self.dim, 0), dtype=complex)
        return np.column_stack([self.effective_vector(k) for k in range(start, stop + 1)])

    def rank(self, rank_tol=DEFAULT_RANK_TOL):
        return orthonormal_basis(self.vectors.T, rank_tol).shape[1]

    def is_total(self, rank_tol=DEFAULT_RANK_TOL):
        return self.rank(rank_tol) == self.dim


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for a built-in family.

    ``count`` defaults to ``dim`` (``dim + 1`` for ``cyclic_spanning``).
    Recognized ``params``: ``delta`` (damped_tail, default 0.9), ``seed``
    (random_gaussian, default 0), ``field`` (random_gaussian, default
    ``"complex"``).
    """

    kind: str
    dim: int
    count: int = None
    tail: str = None
    params: dict = field(default_factory=dict)


def _unit(d, i):
    e = np.zeros(d, dtype=complex)
    e[i] = 1
    return e


def generate_family(spec, rank_tol=DEFAULT_RANK_TOL):
    """Build the family described by ``spec`` and confirm it is total.

    Raises
    ------
    GenerationError
        If the generated vectors do not span C^d at ``rank_tol``.
    InputError
        For an unknown kind or invalid sizes.
    """
    kind, d = spec.kind, spec.dim
    if kind not in GENERATOR_KINDS:
        raise InputError(f"unknown generator kind {kind!r}; choose from {GENERATOR_KINDS}")
    if d is None or d < 1:
        raise InputError(f"dimension must be at least 1, got {d}")
    N = spec.count if spec.count is not None else (d + 1 if kind == "cyclic_spanning" else d)
    if N < 1:
        raise InputError(f"count must be at least 1, got {N}")
    tail = spec.tail or ("cyclic" if kind == "cyclic_spanning" else "zero")
    fld = "real"

    if kind == "orthonormal":
        if N != d:
            raise InputError("orthonormal family has exactly dim vectors")
        V = np.eye(d, dtype=complex)
    elif kind == "shifted_sum":
        if N != d:
            raise InputError("shifted_sum family has exactly dim vectors")
        V = np.eye(d, dtype=complex)
        V[np.arange(d - 1), np.arange(1, d)] = 1
    elif kind == "damped_tail":
        delta = float(spec.params.get("delta", 0.9))
        if not 0 < delta < 1:
            raise InputError(f"delta must lie in (0, 1), got {delta}")
        V = np.zeros((N, d), dtype=complex)
        for n in range(1, N + 1):
            V[n - 1] = _unit(d, 0) + delta**n * _unit(d, min(n + 1, d) - 1)
    elif kind == "random_gaussian":
        seed = int(spec.params.get("seed", 0))
        fld = spec.params.get("field", "complex")
        rng = np.random.default_rng(seed)
        if fld == "complex":
            V = (rng.standard_normal((N, d)) + 1j * rng.standard_normal((N, d))) / math.sqrt(2)
        elif fld == "real":
            V = rng.standard_normal((N, d)).astype(complex)
        else:
            raise InputError(f"field must be one of {FIELDS}, got {fld!r}")
    else:  # cyclic_spanning
        V = np.zeros((N, d), dtype=complex)
        for n in range(N):
            j = n % d
            V[n, j] = 1
            if n >= d and d > 1:
                V[n, (j + 1) % d] = 1

    family = VectorFamily(V, tail_mode=tail, field=fld)
    r = family.rank(rank_tol)
    if r != d:
        raise GenerationError(
            f"{kind} generator with dim={d}, count={N} produced rank {r} < {d}"
        )
    return family


# -- file formats -----------------------------------------------------------


def _parse_entry(raw, fld, where):
    if fld == "real":
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise FamilyFormatError("real entry must be a number", where)
        val = complex(float(raw), 0.0)
    else:
        if isinstance(raw, (int, float)) and not isinstance(raw, bool):
            val = complex(float(raw), 0.0)
        elif (
            isinstance(raw, list)
            and len(raw) == 2
            and all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in raw)
        ):
            val = complex(float(raw[0]), float(raw[1]))
        else:
            raise FamilyFormatError("complex entry must be a number or a [re, im] pair", where)
    if not (math.isfinite(val.real) and math.isfinite(val.imag)):
        raise FamilyFormatError("non-finite entry", where)
    return val


def family_from_dict(doc, source="<family>"):
    """Validate a decoded JSON family document and build the family."""
    if not isinstance(doc, dict):
        raise FamilyFormatError("top level must be an object", source)
    fld = doc.get("field", "complex")
    if fld not in FIELDS:
        raise FamilyFormatError(f"field must be one of {FIELDS}, got {fld!r}", f"{source}: field")
    tail = doc.get("tail", "zero")
    if tail not in TAIL_MODES:
        raise FamilyFormatError(f"tail must be one of {TAIL_MODES}, got {tail!r}", f"{source}: tail")
    if "dim" not in doc:
        raise FamilyFormatError("missing key 'dim'", source)
    d = doc["dim"]
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise FamilyFormatError(f"dim must be a positive integer, got {d!r}", f"{source}: dim")
    vecs = doc.get("vectors")
    if not isinstance(vecs, list):
        raise FamilyFormatError("'vectors' must be an array", f"{source}: vectors")
    if not vecs:
        raise FamilyFormatError("family has no vectors (N = 0)", f"{source}: vectors")
    rows = []
    for i, vec in enumerate(vecs):
        where = f"{source}: vectors[{i}]"
        if not isinstance(vec, list):
            raise FamilyFormatError("vector must be an array", where)
        if len(vec) != d:
            raise FamilyFormatError(
                f"dimension mismatch: vector {i} has {len(vec)} entries, expected {d}", where
            )
        rows.append([_parse_entry(x, fld, f"{where}[{j}]") for j, x in enumerate(vec)])
    return VectorFamily(np.array(rows, dtype=complex), tail_mode=tail, field=fld)


def family_to_dict(family):
    if family.field == "real":
        vecs = [[float(x.real) for x in row] for row in family.vectors]
    else:
        vecs = [[[float(x.real), float(x.imag)] for x in row] for row in family.vectors]
    return {
        "field": family.field,
        "dim": family.dim,
        "tail": family.tail_mode,
        "vectors": vecs,
    }


def _load_csv(path):
    rows = []
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(not c.strip() for c in rec):
                continue
            vals = []
            for j, cell in enumerate(rec):
                try:
                    x = float(cell)
                except ValueError:
                    raise FamilyFormatError(f"not a number: {cell!r}", f"{path}:{lineno}: column {j + 1}")
                if not math.isfinite(x):
                    raise FamilyFormatError("non-finite entry", f"{path}:{lineno}: column {j + 1}")
                vals.append(x)
            if rows and len(vals) != len(rows[0]):
                raise FamilyFormatError(
                    f"dimension mismatch: {len(vals)} entries, expected {len(rows[0])}",
                    f"{path}:{lineno}",
                )
            rows.append(vals)
    if not rows:
        raise FamilyFormatError("family has no vectors (N = 0)", str(path))
    return VectorFamily(np.array(rows, dtype=complex), tail_mode="zero", field="real")


def load_family(path, format=None):
    """Read a family from a JSON or CSV file.

    ``format`` defaults to the file extension (``.csv`` means CSV, anything
    else JSON). CSV files hold one real vector per row and imply a zero
    tail.
    """
    path = str(path)
    if format is None:
        format = "csv" if path.lower().endswith(".csv") else "json"
    if format == "csv":
        return _load_csv(path)
    if format != "json":
        raise InputError(f"unknown family format {format!r}")
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FamilyFormatError(f"invalid JSON: {exc.msg}", f"{path}:{exc.lineno}:{exc.colno}")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}")
    return family_from_dict(doc, path)


def save_family(family, path, format=None):
    path = str(path)
    if format is None:
        format = "csv" if path.lower().endswith(".csv") else "json"
    if format == "csv":
        if family.field != "real" or family.tail_mode != "zero":
            raise InputError("CSV holds only real, zero-tail families")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            for row in family.vectors:
                w.writerow([repr(float(x.real)) for x in row])
        return
    with open(path, "w") as fh:
        json.dump(family_to_dict(family), fh)
        fh.write("\n")
