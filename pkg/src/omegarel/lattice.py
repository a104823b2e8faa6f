"""Complete residuated lattices and the semiring flavors built on top of them.

Truth values live in numpy arrays. The unit-interval lattices use float64
(or object arrays of ``fractions.Fraction`` when exact arithmetic is wanted),
finite lattices use integer codes into their element list, and product
lattices use a two-field structured dtype.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import (
    DistributivityViolation,
    FlavorLawViolation,
    LatticeError,
    OutOfCarrier,
    UnknownKind,
    UnknownOperation,
)

DEFAULT_EPS = 1e-9

OPERATIONS = ("tensor", "implies", "meet", "join", "oplus")

_OP_ALIASES = {
    "tensor": "tensor", "otimes": "tensor", "⊗": "tensor", "conj": "tensor",
    "prod": "tensor", "product": "tensor", "·": "tensor", "*": "tensor",
    "×": "tensor", "x": "tensor", "times": "tensor",
    "meet": "meet", "∧": "meet", "min": "meet", "and": "meet", "wedge": "meet", "inf": "meet",
    "oplus": "oplus", "⊕": "oplus", "bsum": "oplus", "sum": "oplus", "+": "oplus",
    "join": "join", "∨": "join", "max": "join", "or": "join", "vee": "join", "sup": "join",
    "implies": "implies", "⇒": "implies", "->": "implies", "residuum": "implies",
}


def default_eps() -> float:
    """Tolerance for verdict comparisons, overridable through ``OMEGAREL_EPS``."""
    raw = os.environ.get("OMEGAREL_EPS")
    if raw is None or not raw.strip():
        return DEFAULT_EPS
    value = float(raw)
    if value < 0 or math.isnan(value):
        raise ValueError(f"OMEGAREL_EPS must be a non-negative number, got {raw!r}")
    return value


def canonical_op(name: str) -> str:
    key = name.strip()
    found = _OP_ALIASES.get(key.lower(), _OP_ALIASES.get(key))
    if found is None:
        raise UnknownOperation(f"unknown lattice operation {name!r}")
    return found


def format_real(value) -> str:
    """Shortest decimal string that reads back within 1e-12."""
    v = float(value)
    if v == 0:
        return "0"
    for digits in range(1, 18):
        text = f"{v:.{digits}g}"
        if abs(float(text) - v) <= 1e-12:
            return text
    return repr(v)


def _is_exact(arr: np.ndarray) -> bool:
    return arr.dtype == object


class Lattice:
    """Common interface. Subclasses supply the carrier encoding and the operations."""

    name: str
    finite = False
    dtype: np.dtype

    def __init__(self, name: str, eps: float | None = None):
        self.name = name
        self.eps = default_eps() if eps is None else eps

    # carrier -----------------------------------------------------------
    @property
    def top(self):
        raise NotImplementedError

    @property
    def bottom(self):
        raise NotImplementedError

    def asarray(self, values) -> np.ndarray:
        raise NotImplementedError

    def full(self, shape, value, like: np.ndarray | None = None) -> np.ndarray:
        dtype = like.dtype if like is not None else self.dtype
        out = np.empty(shape, dtype=dtype)
        out[...] = value
        return out

    def law_sample(self) -> np.ndarray:
        """Points used when checking algebraic laws on construction."""
        raise NotImplementedError

    def random(self, rng: np.random.Generator, size) -> np.ndarray:
        raise NotImplementedError

    def parse(self, text: str):
        raise NotImplementedError

    def format(self, value) -> str:
        raise NotImplementedError

    def number(self, value):
        """Raw numeric form of an element (the code for finite lattices)."""
        raise NotImplementedError

    def scalar(self, value):
        """Plain Python scalar for a 0-d result."""
        arr = np.asarray(value)
        return arr.item() if arr.dtype.names is None else tuple(arr[()].tolist())

    # operations ----------------------------------------------------------
    def tensor(self, x, y):
        raise NotImplementedError

    def implies(self, x, y):
        raise NotImplementedError

    def meet(self, x, y):
        raise NotImplementedError

    def join(self, x, y):
        raise NotImplementedError

    def oplus(self, x, y):
        raise UnknownOperation(f"the {self.name} lattice has no strong disjunction ⊕")

    def has(self, op: str) -> bool:
        op = canonical_op(op)
        if op == "oplus":
            try:
                self.oplus(self.top, self.bottom)
            except UnknownOperation:
                return False
        return True

    def op(self, name: str):
        op = canonical_op(name)
        if not self.has(op):
            raise UnknownOperation(f"the {self.name} lattice has no operation {name!r}")
        return getattr(self, op)

    def identity_of(self, op: str):
        op = canonical_op(op)
        if op in ("tensor", "meet"):
            return self.top
        if op in ("join", "oplus"):
            return self.bottom
        raise UnknownOperation(f"{op} is not a monoid operation")

    def fold(self, op: str, arr, axis=None) -> np.ndarray:
        """Reduce ``arr`` over ``axis`` (int, tuple, or None for all) with a monoid op."""
        op = canonical_op(op)
        arr = np.asarray(arr)
        axis = _normalize_axis(axis, arr.ndim)
        if not axis:
            return arr
        return self._fold(op, arr, axis)

    def _fold(self, op, arr, axis):
        return _generic_fold(self.op(op), arr, axis, self.identity_of(op))

    # order ---------------------------------------------------------------
    def leq(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def eq(self, x, y) -> np.ndarray:
        return self.leq(x, y) & self.leq(y, x)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


def _normalize_axis(axis, ndim):
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, (int, np.integer)):
        axis = (int(axis),)
    return tuple(sorted(a % ndim for a in axis)) if ndim else ()


def _generic_fold(fn, arr, axis, identity):
    moved = np.moveaxis(arr, axis, range(arr.ndim - len(axis), arr.ndim))
    lead = moved.shape[: arr.ndim - len(axis)]
    count = int(np.prod(moved.shape[arr.ndim - len(axis):], dtype=np.int64))
    flat = moved.reshape(lead + (count,))
    out = np.empty(lead, dtype=arr.dtype)
    out[...] = identity
    for k in range(count):
        out = fn(out, flat[..., k])
    return np.asarray(out)


# ---------------------------------------------------------------------------
# unit interval


class UnitInterval(Lattice):
    """[0,1] with min/max order operations; subclasses pick the t-norm."""

    dtype = np.dtype(np.float64)

    @property
    def top(self):
        return 1.0

    @property
    def bottom(self):
        return 0.0

    def asarray(self, values) -> np.ndarray:
        arr = np.asarray(values)
        if arr.dtype != object:
            if arr.dtype.names is not None or arr.dtype.kind not in "biuf":
                try:
                    arr = arr.astype(np.float64)
                except (TypeError, ValueError):
                    raise OutOfCarrier(f"{self.name}: values are not real numbers") from None
            else:
                arr = arr.astype(np.float64, copy=False)
            if np.isnan(arr).any():
                raise OutOfCarrier(f"{self.name}: NaN is not a truth value")
        if arr.size and (np.any(arr < 0) or np.any(arr > 1)):
            bad = arr[(arr < 0) | (arr > 1)].flat[0]
            raise OutOfCarrier(f"{self.name}: {bad} lies outside [0,1]")
        return arr

    def law_sample(self):
        return np.arange(9) / 8.0

    def random(self, rng, size):
        return rng.random(size)

    def parse(self, text: str):
        text = text.strip()
        try:
            value = float(Fraction(text)) if "/" in text else float(text)
        except (ValueError, ZeroDivisionError):
            raise OutOfCarrier(f"{self.name}: cannot read {text!r} as a truth value") from None
        self.asarray(value)
        return value

    def format(self, value) -> str:
        return format_real(value)

    def number(self, value):
        return float(value)

    def meet(self, x, y):
        return np.minimum(x, y)

    def join(self, x, y):
        return np.maximum(x, y)

    def leq(self, x, y):
        x = np.asarray(x)
        y = np.asarray(y)
        if _is_exact(x) or _is_exact(y):
            return np.asarray(x <= y, dtype=bool)
        return x <= y + self.eps

    def _fold(self, op, arr, axis):
        if op == "join":
            return np.max(arr, axis=axis, initial=0)
        if op == "meet":
            return np.min(arr, axis=axis, initial=1)
        return self._fold_tnorm(op, arr, axis)

    def _fold_tnorm(self, op, arr, axis):
        return _generic_fold(self.op(op), arr, axis, self.identity_of(op))


class Lukasiewicz(UnitInterval):
    def __init__(self, eps=None):
        super().__init__("lukasiewicz", eps)

    def tensor(self, x, y):
        return np.maximum(np.add(x, y) - 1, 0)

    def implies(self, x, y):
        return np.minimum(1, 1 - np.asarray(x) + y)

    def oplus(self, x, y):
        return np.minimum(np.add(x, y), 1)

    def _fold_tnorm(self, op, arr, axis):
        if op == "oplus":
            return np.minimum(np.sum(arr, axis=axis), 1)
        if op == "tensor":
            count = int(np.prod([arr.shape[a] for a in axis]))
            return np.maximum(np.sum(arr, axis=axis) - (count - 1), 0)
        return super()._fold_tnorm(op, arr, axis)


class Goedel(UnitInterval):
    def __init__(self, eps=None):
        super().__init__("goedel", eps)

    def tensor(self, x, y):
        return np.minimum(x, y)

    def implies(self, x, y):
        x = np.asarray(x)
        y = np.asarray(y)
        return np.where(x <= y, 1, y) if _is_exact(x) or _is_exact(y) else np.where(x <= y, 1.0, y)

    def _fold_tnorm(self, op, arr, axis):
        if op == "tensor":
            return np.min(arr, axis=axis, initial=1)
        return super()._fold_tnorm(op, arr, axis)


class ProductLogic(UnitInterval):
    def __init__(self, eps=None):
        super().__init__("product", eps)

    def tensor(self, x, y):
        return np.multiply(x, y)

    def implies(self, x, y):
        x = np.asarray(x)
        y = np.asarray(y)
        exact = _is_exact(x) or _is_exact(y)
        # residuum at x=0 is the top element; avoid dividing by zero there
        safe = np.where(x == 0, 1, x)
        ratio = y / safe
        return np.where(x <= y, 1, ratio) if exact else np.where(x <= y, 1.0, ratio)

    def _fold_tnorm(self, op, arr, axis):
        if op == "tensor":
            return np.prod(arr, axis=axis)
        return super()._fold_tnorm(op, arr, axis)


# ---------------------------------------------------------------------------
# finite lattices


class FiniteLattice(Lattice):
    """Lattice over an explicit element list; elements are encoded by their index."""

    finite = True
    dtype = np.dtype(np.int64)

    def __init__(self, name, labels, leq_matrix, tensor_table, implies_table=None,
                 oplus_table=None, eps=None):
        super().__init__(name, eps)
        self.labels = tuple(str(lab) for lab in labels)
        n = len(self.labels)
        if n == 0:
            raise LatticeError(f"{name}: a lattice needs at least one element")
        if len(set(self.labels)) != n:
            raise LatticeError(f"{name}: duplicate element labels")
        self._code = {lab: i for i, lab in enumerate(self.labels)}
        order = np.asarray(leq_matrix, dtype=bool)
        if order.shape != (n, n):
            raise LatticeError(f"{name}: order matrix must be {n}x{n}")
        _check_partial_order(name, order, self.labels)
        self.order = order
        self._meet = _bound_table(name, order, self.labels, lower=True)
        self._join = _bound_table(name, order, self.labels, lower=False)
        self._top = _extremum(name, order, self.labels, greatest=True)
        self._bottom = _extremum(name, order, self.labels, greatest=False)
        self._tensor = self._table(tensor_table, "tensor")
        self._check_tensor()
        if implies_table is None:
            self._implies = self._derive_implies()
        else:
            self._implies = self._table(implies_table, "implies")
            self._check_residuation()
        self._oplus = None if oplus_table is None else self._table(oplus_table, "oplus")
        # chains allow vectorized folds through ranks
        ranks = order.sum(axis=0) - 1
        self._chain = bool(np.all(order | order.T))
        self._rank = ranks.astype(np.int64)
        self._by_rank = np.argsort(ranks).astype(np.int64)

    def _table(self, table, what):
        n = len(self.labels)
        rows = [list(r) for r in table]
        if len(rows) != n or any(len(r) != n for r in rows):
            raise LatticeError(f"{self.name}: {what} table must be {n}x{n}")
        out = np.empty((n, n), dtype=np.int64)
        for i, row in enumerate(rows):
            for j, cell in enumerate(row):
                out[i, j] = self._lookup(cell, what)
        return out

    def _lookup(self, cell, what="value"):
        if isinstance(cell, (int, np.integer)) and not isinstance(cell, bool) and str(cell) not in self._code:
            if 0 <= cell < len(self.labels):
                return int(cell)
        key = str(cell)
        if key not in self._code:
            raise OutOfCarrier(f"{self.name}: {what} entry {cell!r} is not an element")
        return self._code[key]

    def _check_tensor(self):
        t = self._tensor
        n = len(self.labels)
        lab = self.labels
        for a in range(n):
            if t[self._top, a] != a:
                raise LatticeError(f"{self.name}: top is not a unit for tensor at {lab[a]}")
            for b in range(n):
                if t[a, b] != t[b, a]:
                    raise LatticeError(f"{self.name}: tensor is not commutative at ({lab[a]},{lab[b]})")
                for c in range(n):
                    if t[t[a, b], c] != t[a, t[b, c]]:
                        raise LatticeError(
                            f"{self.name}: tensor is not associative at ({lab[a]},{lab[b]},{lab[c]})")
                    if self.order[a, b] and not self.order[t[a, c], t[b, c]]:
                        raise LatticeError(
                            f"{self.name}: tensor is not monotone at ({lab[a]},{lab[b]},{lab[c]})")

    def _derive_implies(self):
        n = len(self.labels)
        out = np.empty((n, n), dtype=np.int64)
        for x in range(n):
            for y in range(n):
                cands = [z for z in range(n) if self.order[self._tensor[x, z], y]]
                best = [z for z in cands if all(self.order[w, z] for w in cands)]
                if not best:
                    raise LatticeError(
                        f"{self.name}: no residuum for ({self.labels[x]},{self.labels[y]})")
                out[x, y] = best[0]
        return out

    def _check_residuation(self):
        n = len(self.labels)
        for x, y, z in itertools.product(range(n), repeat=3):
            lhs = self.order[z, self._implies[x, y]]
            rhs = self.order[self._tensor[x, z], y]
            if lhs != rhs:
                lab = self.labels
                raise LatticeError(
                    f"{self.name}: residuation fails at x={lab[x]}, y={lab[y]}, z={lab[z]}")

    @property
    def top(self):
        return self._top

    @property
    def bottom(self):
        return self._bottom

    @property
    def elements(self):
        return np.arange(len(self.labels), dtype=np.int64)

    def asarray(self, values):
        arr = np.asarray(values)
        if arr.dtype.kind == "b":
            arr = arr.astype(np.int64)
        if arr.dtype.kind in "iu":
            arr = arr.astype(np.int64, copy=False)
            if arr.size and (arr.min() < 0 or arr.max() >= len(self.labels)):
                raise OutOfCarrier(f"{self.name}: element code out of range")
            return arr
        if arr.dtype.kind == "f":
            codes = arr.astype(np.int64)
            if np.any(codes != arr):
                raise OutOfCarrier(f"{self.name}: non-integer element code")
            return self.asarray(codes)
        flat = [self._lookup(v) for v in arr.ravel().tolist()]
        return np.asarray(flat, dtype=np.int64).reshape(arr.shape)

    def law_sample(self):
        return self.elements

    def random(self, rng, size):
        return rng.integers(0, len(self.labels), size=size)

    def parse(self, text):
        text = text.strip()
        if text in self._code:
            return self._code[text]
        try:
            num = float(text)
        except ValueError:
            num = None
        if num is not None and num.is_integer() and str(int(num)) in self._code:
            return self._code[str(int(num))]
        raise OutOfCarrier(f"{self.name}: {text!r} is not an element")

    def format(self, value):
        return self.labels[int(value)]

    def number(self, value):
        return int(value)

    def tensor(self, x, y):
        return self._tensor[np.asarray(x), np.asarray(y)]

    def implies(self, x, y):
        return self._implies[np.asarray(x), np.asarray(y)]

    def meet(self, x, y):
        return self._meet[np.asarray(x), np.asarray(y)]

    def join(self, x, y):
        return self._join[np.asarray(x), np.asarray(y)]

    def oplus(self, x, y):
        if self._oplus is None:
            raise UnknownOperation(f"the {self.name} lattice has no strong disjunction ⊕")
        return self._oplus[np.asarray(x), np.asarray(y)]

    def leq(self, x, y):
        return self.order[np.asarray(x), np.asarray(y)]

    def eq(self, x, y):
        return np.asarray(x) == np.asarray(y)

    def _fold(self, op, arr, axis):
        if self._chain and op in ("join", "meet"):
            ranks = self._rank[arr]
            if op == "join":
                return self._by_rank[np.max(ranks, axis=axis, initial=0)]
            return self._by_rank[np.min(ranks, axis=axis, initial=len(self.labels) - 1)]
        return super()._fold(op, arr, axis)


def _check_partial_order(name, order, labels):
    n = len(labels)
    if not order.diagonal().all():
        raise LatticeError(f"{name}: order is not reflexive")
    for a in range(n):
        for b in range(n):
            if a != b and order[a, b] and order[b, a]:
                raise LatticeError(f"{name}: order is not antisymmetric at ({labels[a]},{labels[b]})")
    closure = order.copy()
    for k in range(n):
        closure |= closure[:, [k]] & closure[[k], :]
    if (closure != order).any():
        raise LatticeError(f"{name}: order is not transitive")


def _bound_table(name, order, labels, lower):
    n = len(labels)
    out = np.empty((n, n), dtype=np.int64)
    rel = order if lower else order.T  # rel[a, b]: a is below b (or above, for joins)
    for a in range(n):
        for b in range(n):
            cands = [c for c in range(n) if rel[c, a] and rel[c, b]]
            best = [c for c in cands if all(rel[d, c] for d in cands)]
            if not best:
                kind = "meet" if lower else "join"
                raise LatticeError(f"{name}: no {kind} for ({labels[a]},{labels[b]}); not a lattice")
            out[a, b] = best[0]
    return out


def _extremum(name, order, labels, greatest):
    n = len(labels)
    for a in range(n):
        if all(order[b, a] if greatest else order[a, b] for b in range(n)):
            return a
    raise LatticeError(f"{name}: no {'top' if greatest else 'bottom'} element")


def boolean_lattice(eps=None) -> FiniteLattice:
    return FiniteLattice(
        "boolean", ["0", "1"], [[True, True], [False, True]],
        tensor_table=[[0, 0], [0, 1]], oplus_table=[[0, 1], [1, 1]], eps=eps)


def load_finite_lattice(path) -> FiniteLattice:
    """Read a finite lattice from JSON.

    Keys: ``elements`` (labels), ``order`` (list of ``[lower, upper]`` pairs, closed
    reflexively and transitively) or ``chain: true`` for the listed order,
    ``tensor`` (label matrix), optional ``implies`` and ``oplus`` matrices.
    """
    path = Path(path)
    spec = json.loads(path.read_text(encoding="utf-8"))
    labels = [str(v) for v in spec["elements"]]
    n = len(labels)
    idx = {lab: i for i, lab in enumerate(labels)}
    order = np.eye(n, dtype=bool)
    if spec.get("chain"):
        order = np.triu(np.ones((n, n), dtype=bool))
    for lo, hi in spec.get("order", []):
        try:
            order[idx[str(lo)], idx[str(hi)]] = True
        except KeyError as exc:
            raise LatticeError(f"{path}: order mentions unknown element {exc.args[0]!r}") from None
    for k in range(n):
        order |= order[:, [k]] & order[[k], :]
    return FiniteLattice(spec.get("name", path.stem), labels, order, spec["tensor"],
                         spec.get("implies"), spec.get("oplus"))


# ---------------------------------------------------------------------------
# product lattice


class ProductLattice(Lattice):
    """Cartesian product of two lattices with componentwise operations."""

    def __init__(self, first: Lattice, second: Lattice, eps=None):
        super().__init__(f"{first.name}*{second.name}", eps)
        self.first = first
        self.second = second
        self.finite = first.finite and second.finite
        self.dtype = np.dtype([("c0", first.dtype), ("c1", second.dtype)])

    def _pack(self, a, b):
        a = np.asarray(a)
        b = np.asarray(b)
        out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=self.dtype)
        out["c0"] = a
        out["c1"] = b
        return out

    def pair(self, a, b):
        return self._pack(self.first.asarray(a), self.second.asarray(b))

    @property
    def top(self):
        return self._pack(self.first.top, self.second.top)[()]

    @property
    def bottom(self):
        return self._pack(self.first.bottom, self.second.bottom)[()]

    def embed(self, value):
        """λ ↦ (λ, ⊤) into the first factor."""
        return self._pack(self.first.asarray(value), self.second.top)

    def asarray(self, values):
        arr = np.asarray(values) if not isinstance(values, (tuple, list)) else None
        if arr is not None and arr.dtype == self.dtype:
            return arr
        if arr is not None and arr.dtype.names is not None and len(arr.dtype.names) == 2:
            n0, n1 = arr.dtype.names
            return self._pack(self.first.asarray(arr[n0]), self.second.asarray(arr[n1]))
        try:
            raw = np.array(values, dtype=np.dtype([("c0", object), ("c1", object)]))
        except (TypeError, ValueError):
            raise OutOfCarrier(f"{self.name}: expected pairs of component values") from None
        return self._pack(self.first.asarray(raw["c0"].tolist() if raw.ndim else raw["c0"][()]),
                          self.second.asarray(raw["c1"].tolist() if raw.ndim else raw["c1"][()]))

    def _binary(self, op, x, y):
        x = self.asarray(x)
        y = self.asarray(y)
        return self._pack(self.first.op(op)(x["c0"], y["c0"]),
                          self.second.op(op)(x["c1"], y["c1"]))

    def tensor(self, x, y):
        return self._binary("tensor", x, y)

    def implies(self, x, y):
        return self._binary("implies", x, y)

    def meet(self, x, y):
        return self._binary("meet", x, y)

    def join(self, x, y):
        return self._binary("join", x, y)

    def oplus(self, x, y):
        return self._binary("oplus", x, y)

    def has(self, op):
        return self.first.has(op) and self.second.has(op)

    def leq(self, x, y):
        x = self.asarray(x)
        y = self.asarray(y)
        return self.first.leq(x["c0"], y["c0"]) & self.second.leq(x["c1"], y["c1"])

    def eq(self, x, y):
        x = self.asarray(x)
        y = self.asarray(y)
        return self.first.eq(x["c0"], y["c0"]) & self.second.eq(x["c1"], y["c1"])

    def _fold(self, op, arr, axis):
        return self._pack(self.first.fold(op, arr["c0"], axis),
                          self.second.fold(op, arr["c1"], axis))

    def law_sample(self):
        a = self.first.law_sample()
        b = self.second.law_sample()
        return self._pack(np.repeat(a, len(b)), np.tile(b, len(a)))

    def random(self, rng, size):
        return self._pack(self.first.random(rng, size), self.second.random(rng, size))

    def parse(self, text):
        text = text.strip().strip("()")
        parts = text.split(";") if ";" in text else text.split(",")
        if len(parts) != 2:
            raise OutOfCarrier(f"{self.name}: expected a pair, got {text!r}")
        return self._pack(self.first.parse(parts[0]), self.second.parse(parts[1]))[()]

    def format(self, value):
        v = np.asarray(value, dtype=self.dtype)
        return f"({self.first.format(v['c0'][()])};{self.second.format(v['c1'][()])})"

    def number(self, value):
        v = np.asarray(value, dtype=self.dtype)
        return (self.first.number(v["c0"][()]), self.second.number(v["c1"][()]))


def product_lattice(a: Lattice, b: Lattice) -> ProductLattice:
    return ProductLattice(a, b)


_KINDS = {
    "lukasiewicz": Lukasiewicz,
    "łukasiewicz": Lukasiewicz,
    "goedel": Goedel,
    "godel": Goedel,
    "gödel": Goedel,
    "product": ProductLogic,
    "boolean": boolean_lattice,
    "bool": boolean_lattice,
}


def make_lattice(kind: str, eps: float | None = None) -> Lattice:
    try:
        factory = _KINDS[kind.strip().lower()]
    except KeyError:
        raise UnknownKind(
            f"unknown lattice kind {kind!r}; expected lukasiewicz, goedel, product or boolean") from None
    return factory(eps=eps)


# ---------------------------------------------------------------------------
# flavors


@dataclass(frozen=True)
class Flavor:
    """A semiring (Ω, times, ⊤, plus) used for composition and aggregation."""

    lattice: Lattice
    times_op: str
    plus_op: str
    distributive: bool = True
    plus_idempotent: bool = True
    witness: tuple | None = None

    @property
    def one(self):
        return self.lattice.top

    @property
    def zero(self):
        return self.lattice.bottom

    def times(self, x, y):
        return getattr(self.lattice, self.times_op)(x, y)

    def plus(self, x, y):
        return getattr(self.lattice, self.plus_op)(x, y)

    def sum(self, arr, axis=None):
        return self.lattice.fold(self.plus_op, arr, axis)

    def product(self, arr, axis=None):
        return self.lattice.fold(self.times_op, arr, axis)

    @property
    def label(self):
        return f"({self.lattice.name}, times={self.times_op}, plus={self.plus_op})"

    def __repr__(self):
        return f"Flavor{self.label}"


def _first_failure(mask: np.ndarray):
    bad = np.argwhere(~mask)
    return None if bad.size == 0 else tuple(int(i) for i in bad[0])


def make_flavor(lattice: Lattice, times: str = "tensor", plus: str = "join",
                allow_nondistributive: bool = False) -> Flavor:
    """Build and validate a flavor on a law sample of the lattice.

    Non-distributive combinations raise :class:`DistributivityViolation` unless
    ``allow_nondistributive`` is set, in which case the flavor is returned with
    ``distributive=False`` and the witnessing triple attached.
    """
    t = canonical_op(times)
    p = canonical_op(plus)
    if t not in ("tensor", "meet"):
        raise UnknownOperation(f"times must be tensor or meet, got {times!r}")
    if p not in ("oplus", "join"):
        raise UnknownOperation(f"plus must be oplus or join, got {plus!r}")
    mul = lattice.op(t)
    add = lattice.op(p)
    s = lattice.law_sample()
    x = s[:, None, None]
    y = s[None, :, None]
    z = s[None, None, :]

    def triple(pos):
        return tuple(lattice.format(s[i]) for i in pos)

    checks = [
        ("times is not associative", lattice.eq(mul(mul(x, y), z), mul(x, mul(y, z)))),
        ("times is not commutative", lattice.eq(mul(x, y), mul(y, x))),
        ("plus is not associative", lattice.eq(add(add(x, y), z), add(x, add(y, z)))),
        ("plus is not commutative", lattice.eq(add(x, y), add(y, x))),
        ("top is not a unit for times", np.broadcast_to(lattice.eq(mul(lattice.top, x), x), (len(s),) * 3)),
        ("times is not monotone", ~lattice.leq(x, y) | lattice.leq(mul(x, z), mul(y, z))),
        ("plus is not monotone", ~lattice.leq(x, y) | lattice.leq(add(x, z), add(y, z))),
    ]
    for message, mask in checks:
        pos = _first_failure(np.broadcast_to(mask, (len(s),) * 3))
        if pos is not None:
            raise FlavorLawViolation(f"{lattice.name}: {message} at {triple(pos)}", triple(pos))
    dist = lattice.eq(mul(x, add(y, z)), add(mul(x, y), mul(x, z)))
    pos = _first_failure(dist)
    witness = None
    if pos is not None:
        witness = triple(pos)
        if not allow_nondistributive:
            raise DistributivityViolation(
                f"{lattice.name}: {t} does not distribute over {p}; witness x,y,z = {witness}", witness)
    idem = bool(np.all(lattice.eq(add(s, s), s)))
    return Flavor(lattice, t, p, distributive=pos is None, plus_idempotent=idem, witness=witness)


def parse_flavor_arg(text: str) -> tuple[str, str]:
    """Read ``times=<op>,plus=<op>`` (comma or space separated)."""
    fields = {}
    for part in text.replace(",", " ").split():
        if "=" not in part:
            raise UnknownOperation(f"flavor field {part!r} must look like key=op")
        key, _, value = part.partition("=")
        fields[key.strip().lower()] = value.strip()
    unknown = set(fields) - {"times", "plus"}
    if unknown:
        raise UnknownOperation(f"unknown flavor field(s): {', '.join(sorted(unknown))}")
    return fields.get("times", "tensor"), fields.get("plus", "join")

