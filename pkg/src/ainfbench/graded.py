"""Z/2-graded based vector spaces, sparse multilinear maps, and Koszul signs.

Sign discipline
---------------

Every sign in this package is produced by this module; nothing else writes a
``(-1)**...`` literal.  The two primitives are:

* ``sign_of(e)``      -- (-1)^e for an integer parity exponent e;
* ``koszul_sign(...)``-- the sign of a permutation of homogeneous elements.

Degree conventions.  An element x of parity |x| (0 even, 1 odd) has *reduced*
parity |x|' = |x| - 1 mod 2, computed by ``reduced``.  All the structural
formulas of the higher operations weigh prefixes of arguments by reduced
parities; use sites assemble their sign exponents from ``reduced`` sums and
feed them to ``sign_of``.

Vectors over a ``GradedSpace`` are plain dicts ``{basis label: NovikovScalar}``
with zero entries dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import StructureError

__all__ = [
    "GradedSpace",
    "MultilinearMap",
    "sign_of",
    "reduced",
    "reduced_sum",
    "koszul_sign",
    "contract",
    "vadd",
    "vscale",
    "vacc",
    "v_is_zero",
    "vector_parity",
]


def sign_of(exponent: int) -> int:
    """(-1)^exponent.  The only sign literal in the package lives here."""
    return -1 if exponent & 1 else 1


def reduced(parity: int) -> int:
    """Reduced parity |x|' = |x| - 1 mod 2."""
    return (parity + 1) & 1


@dataclass(frozen=True)
class GradedSpace:
    """Ordered basis with Z/2 parities and optional integer degrees.

    ``zdegrees`` records the integer cohomological degree of each basis vector
    when a fixture declares one; parities are authoritative for signs.
    """

    labels: tuple[str, ...]
    parities: tuple[int, ...]
    zdegrees: tuple[int, ...] | None = None

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise StructureError("duplicate basis labels")
        if len(self.parities) != len(self.labels):
            raise StructureError("parities do not match basis")
        if any(p not in (0, 1) for p in self.parities):
            raise StructureError("parities must be 0 or 1")
        if self.zdegrees is not None:
            if len(self.zdegrees) != len(self.labels):
                raise StructureError("zdegrees do not match basis")
            for p, z in zip(self.parities, self.zdegrees):
                if z % 2 != p:
                    raise StructureError("zdegree parity mismatch")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def parity(self, label: str) -> int:
        try:
            return self.parities[self.labels.index(label)]
        except ValueError:
            raise StructureError(f"unknown basis label {label!r}") from None

    def zdegree(self, label: str) -> int:
        if self.zdegrees is None:
            raise StructureError("space carries no integer degrees")
        return self.zdegrees[self.labels.index(label)]


def reduced_sum(space_parities) -> int:
    """Sum of reduced parities of a list of (unreduced) parities, mod 2."""
    s = 0
    for p in space_parities:
        s += reduced(p)
    return s & 1


def koszul_sign(parities, permutation, use_reduced: bool = True) -> int:
    """Sign acquired by reordering homogeneous elements.

    ``permutation[k]`` is the original position of the element now at slot k;
    each inverted pair contributes (-1)^{|x|'|y|'} (reduced parities unless
    ``use_reduced`` is False).
    """
    if sorted(permutation) != list(range(len(parities))):
        raise StructureError("not a permutation")
    ps = [reduced(p) for p in parities] if use_reduced else list(parities)
    e = 0
    n = len(permutation)
    for k in range(n):
        for l in range(k + 1, n):
            if permutation[k] > permutation[l]:
                e += ps[permutation[k]] * ps[permutation[l]]
    return sign_of(e)


# -- sparse vectors --------------------------------------------------------

def vadd(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        if k in out:
            s = out[k] + v
            if s.is_zero():
                del out[k]
            else:
                out[k] = s
        else:
            out[k] = v
    return out


def vscale(c, v: dict) -> dict:
    out = {}
    for k, x in v.items():
        y = c * x
        if not y.is_zero():
            out[k] = y
    return out


def vacc(dst: dict, coeff, src: dict) -> None:
    """dst += coeff * src, in place."""
    for k, x in src.items():
        y = coeff * x
        if k in dst:
            s = dst[k] + y
            if s.is_zero():
                del dst[k]
            else:
                dst[k] = s
        elif not y.is_zero():
            dst[k] = y


def v_is_zero(v: dict) -> bool:
    return all(x.is_zero() for x in v.values())


def vector_parity(space: GradedSpace, v: dict) -> int | None:
    """Common parity of the support, or None if zero or mixed."""
    seen = None
    for k, x in v.items():
        if x.is_zero():
            continue
        p = space.parity(k)
        if seen is None:
            seen = p
        elif seen != p:
            return None
    return seen


class MultilinearMap:
    """Sparse multilinear map between graded spaces.

    ``table[args][out]`` is the coefficient of basis vector ``out`` in the
    image of the basis tuple ``args``.  The declared ``parity`` must satisfy
      parity(out) = parity(args) + parity  (mod 2)
    for every stored entry; ``validate`` enforces this.
    """

    __slots__ = ("sources", "target", "parity", "table")

    def __init__(self, sources, target, parity, table=None):
        self.sources = tuple(sources)
        self.target = target
        self.parity = parity & 1
        self.table: dict[tuple, dict] = table if table is not None else {}

    @property
    def arity(self) -> int:
        return len(self.sources)

    def add_entry(self, args, out, scalar) -> None:
        args = tuple(args)
        row = self.table.setdefault(args, {})
        cur = row.get(out)
        new = scalar if cur is None else cur + scalar
        if new.is_zero():
            row.pop(out, None)
            if not row:
                del self.table[args]
        else:
            row[out] = new

    def apply(self, args) -> dict:
        return dict(self.table.get(tuple(args), {}))

    def apply_to_vectors(self, vectors) -> dict:
        """Multilinear extension to sparse vectors."""
        if len(vectors) != self.arity:
            raise StructureError("arity mismatch")
        out: dict = {}
        def rec(k, prefix, coeff):
            if k == len(vectors):
                row = self.table.get(tuple(prefix))
                if not row:
                    return
                if coeff is None:
                    for o, x in row.items():
                        cur = out.get(o)
                        s = x if cur is None else cur + x
                        if s.is_zero():
                            out.pop(o, None)
                        else:
                            out[o] = s
                else:
                    vacc(out, coeff, row)
                return
            for label, c in vectors[k].items():
                if not c.is_zero():
                    rec(k + 1, prefix + [label], c if coeff is None else coeff * c)
        rec(0, [], None)
        return out

    def validate(self) -> None:
        for args, row in self.table.items():
            if len(args) != self.arity:
                raise StructureError("entry arity mismatch")
            pin = 0
            for a, sp in zip(args, self.sources):
                pin += sp.parity(a)
            for out in row:
                if self.target.parity(out) != (pin + self.parity) & 1:
                    raise StructureError(
                        f"entry {args} -> {out} violates declared parity"
                    )

    def is_zero(self) -> bool:
        return all(all(x.is_zero() for x in row.values()) for row in self.table.values())

    def __add__(self, other):
        if (self.sources, self.target, self.parity) != (
            other.sources, other.target, other.parity
        ):
            raise StructureError("adding incompatible multilinear maps")
        out = MultilinearMap(self.sources, self.target, self.parity)
        for args, row in self.table.items():
            for o, x in row.items():
                out.add_entry(args, o, x)
        for args, row in other.table.items():
            for o, x in row.items():
                out.add_entry(args, o, x)
        return out

    def scale(self, c) -> "MultilinearMap":
        out = MultilinearMap(self.sources, self.target, self.parity)
        for args, row in self.table.items():
            for o, x in row.items():
                y = c * x
                if not y.is_zero():
                    out.add_entry(args, o, y)
        return out

    def __repr__(self):
        return (
            f"MultilinearMap(arity={self.arity}, parity={self.parity}, "
            f"entries={sum(len(r) for r in self.table.values())})"
        )


def contract(f: MultilinearMap, position: int, g: MultilinearMap) -> MultilinearMap:
    """Insert g into slot ``position`` of f with the structural prefix sign.

    The result evaluates as
        (x_1,...,x_n) |-> (-1)^{|x_1|'+...+|x_p|'} f(x_1,...,x_p, g(...), ...)
    where p = ``position``, matching the sign convention of the structural
    relations (the inserted operation is weighed by the reduced parities of
    the arguments standing before it).
    """
    if not 0 <= position < f.arity:
        raise StructureError("contract position out of range")
    if f.sources[position] is not g.target and f.sources[position] != g.target:
        raise StructureError("slot space does not match g.target")
    sources = f.sources[:position] + g.sources + f.sources[position + 1:]
    h = MultilinearMap(sources, f.target, (f.parity + g.parity) & 1)
    for fargs, frow in f.table.items():
        slot = fargs[position]
        prefix = fargs[:position]
        e = 0
        for a, sp in zip(prefix, f.sources[:position]):
            e += reduced(sp.parity(a))
        sgn = sign_of(e)
        for gargs, grow in g.table.items():
            c = grow.get(slot)
            if c is None or c.is_zero():
                continue
            new_args = prefix + gargs + fargs[position + 1:]
            for out, x in frow.items():
                val = x * c
                if sgn < 0:
                    val = -val
                if not val.is_zero():
                    h.add_entry(new_args, out, val)
    return h
