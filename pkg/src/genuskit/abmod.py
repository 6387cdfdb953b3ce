"""Finitely presented modules over localized integers, with exact kernels.

A module here is a presentation: generators, integer relation rows, and a
prime set X naming the ring (integers with every prime outside X
inverted).  Maps between modules over different prime sets are allowed as
long as the target ring is the larger one, which is the only direction a
homomorphism can canonically exist in; all the squares this package
studies (restriction to a block, collapse to the common core, comparison
of two groups over their core) point that way.

The workhorse is ``mixed_kernel``: an exact finite presentation of the
kernel of a map between products of modules living over different
localizations.  Elements of the kernel may need denominators that no
single ring contains, so the computation runs at an explicit denominator
level, solves a purely integer system there, and deepens the level until
the answer stabilizes as a lattice.  Saturated relation lattices keep the
level-bounded picture faithful: each normalized relation row generates
exactly the integer points of the rational relation span, so no torsion is
ever over- or under-counted.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .errors import DomainError, VerificationError
from .intlinalg import (
    hnf_rows,
    hnf_with_transform,
    identity_matrix,
    invert_rational,
    invert_unimodular,
    lattice_equal,
    left_kernel_basis,
    mat_det,
    mat_mul,
    rational_row_solve,
    row_span_solve,
    smith_normal_form,
)
from .primeset import PartitionFamily, PrimeSet, XNumber, factorize, is_x_number, valuation


def xpart(n: int, X: PrimeSet) -> int:
    """The largest divisor of n supported entirely on the primes of X."""
    if n == 0:
        raise ValueError("0 has no X-part")
    out = 1
    for p, e in factorize(abs(n)).items():
        if X._contains_known_prime(p):
            out *= p**e
    return out


def _as_fraction_rows(rows, width=None):
    out = tuple(tuple(Fraction(x) for x in row) for row in rows)
    if width is not None:
        for row in out:
            if len(row) != width:
                raise ValueError(f"expected rows of width {width}, got {len(row)}")
    return out


class FGModule:
    """A finitely presented module over the integers localized at ``primes``.

    ``relations`` rows are integer combinations of the generators declared
    to vanish.  Instances are treated as immutable; the Smith form and the
    normalized relation lattice are computed once and cached.
    """

    def __init__(self, primes: PrimeSet, relations, ngens: int):
        if ngens < 0:
            raise ValueError("a module cannot have negatively many generators")
        rel = []
        for row in relations:
            row = tuple(int(x) for x in row)
            if len(row) != ngens:
                raise ValueError(f"relation {row} does not match {ngens} generators")
            if any(row):
                rel.append(row)
        self.primes = primes
        self.relations = tuple(rel)
        self.ngens = ngens
        self._snf = None
        self._normalized = None

    @classmethod
    def free(cls, primes: PrimeSet, rank: int) -> "FGModule":
        return cls(primes, (), rank)

    @classmethod
    def from_parts(cls, primes: PrimeSet, free_rank: int, torsion=()) -> "FGModule":
        """Direct sum of a free part and cyclic pieces of the given orders."""
        torsion = tuple(int(t) for t in torsion)
        n = free_rank + len(torsion)
        rel = []
        for k, t in enumerate(torsion):
            if t <= 1:
                raise ValueError(f"cyclic order must exceed 1, got {t}")
            row = [0] * n
            row[free_rank + k] = t
            rel.append(row)
        return cls(primes, rel, n)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FGModule)
            and self.primes == other.primes
            and self.relations == other.relations
            and self.ngens == other.ngens
        )

    def __hash__(self):
        return hash((self.primes, self.relations, self.ngens))

    def _snf_data(self):
        if self._snf is None:
            rel = [list(r) for r in self.relations]
            if rel:
                d, left, right = smith_normal_form(rel)
                diag = [d[i][i] for i in range(min(len(d), self.ngens))]
            else:
                left, right, diag = [], identity_matrix(self.ngens), []
            rank = sum(1 for x in diag if x != 0)
            stripped = [xpart(x, self.primes) for x in diag[:rank]]
            units = [diag[i] // stripped[i] for i in range(rank)]
            self._snf = {
                "diag": diag,
                "left": left,
                "right": right,
                "rank": rank,
                "stripped": stripped,
                "units": units,
            }
        return self._snf

    @property
    def invariants(self) -> tuple[int, ...]:
        data = self._snf_data()
        return tuple(s for s in data["stripped"] if s != 1)

    @property
    def free_rank(self) -> int:
        return self.ngens - self._snf_data()["rank"]

    def iso_class(self):
        """(free rank, sorted multiset of prime-power cyclic orders)."""
        pieces = []
        for s in self.invariants:
            for p, e in factorize(s).items():
                pieces.append((p, e))
        return (self.free_rank, tuple(sorted(pieces)))

    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.invariants

    def normalized_relation_rows(self):
        """Basis of the saturated integer lattice of vanishing rows.

        Row j is Xpart(d_j) times the j-th row of the inverse right
        transform: together they span the integer points of the rational
        relation span with every unit (non-X) content stripped, so they
        stay a basis after localizing anywhere inside X.
        """
        if self._normalized is None:
            if not self.relations:
                self._normalized = ()
            else:
                data = self._snf_data()
                rinv = invert_unimodular(data["right"])
                rows = []
                for j in range(data["rank"]):
                    scale = data["stripped"][j]
                    rows.append(tuple(scale * x for x in rinv[j]))
                self._normalized = tuple(rows)
        return self._normalized

    def element_is_zero(self, row) -> bool:
        """Is this coefficient row the zero element of the module?"""
        row = [Fraction(x) for x in row]
        if all(x == 0 for x in row):
            return True
        basis = self.normalized_relation_rows()
        if not basis:
            return False
        coeffs = rational_row_solve([list(r) for r in basis], row)
        if coeffs is None:
            return False
        return all(is_x_number(c.denominator, self.primes) for c in coeffs)

    def localize(self, sub: PrimeSet):
        """Same presentation over a smaller prime set, with the unit map."""
        if not sub.issubset(self.primes):
            raise ValueError(f"{sub} is not contained in {self.primes}")
        target = FGModule(sub, self.relations, self.ngens)
        return target, ModuleMap(self, target, identity_matrix(self.ngens))

    def __str__(self) -> str:
        rel = "[" + ",".join("[" + ",".join(str(x) for x in row) + "]" for row in self.relations) + "]"
        return f"module(T={self.primes}; gens={self.ngens}; rel={rel})"

    __repr__ = __str__


class ModuleMap:
    """A homomorphism given by generator images, one row per source generator.

    The target must live over a subset of the source's primes: inverting
    more primes downstream is the only direction in which the map is
    automatically defined on a localized module.  Entries may have
    denominators invertible in the target ring, and every source relation
    must land in the target's relation span over that ring; both are
    checked at construction.
    """

    def __init__(self, source: FGModule, target: FGModule, rows):
        if not target.primes.issubset(source.primes):
            raise ValueError(
                f"target over {target.primes} is not reachable from source over {source.primes}"
            )
        self.source = source
        self.target = target
        self.rows = _as_fraction_rows(rows, target.ngens)
        if len(self.rows) != source.ngens:
            raise ValueError(f"expected {source.ngens} rows, got {len(self.rows)}")
        for row in self.rows:
            for x in row:
                if not is_x_number(x.denominator, target.primes):
                    raise ValueError(f"denominator of {x} is not invertible in the target ring")
        for rel in source.relations:
            image = self.apply_row(rel)
            if not target.element_is_zero(image):
                raise ValueError(f"relation {rel} does not map to zero in the target")

    def apply_row(self, v):
        return [
            sum((Fraction(x) * self.rows[i][j] for i, x in enumerate(v)), Fraction(0))
            for j in range(self.target.ngens)
        ]

    def compose(self, then: "ModuleMap") -> "ModuleMap":
        """The map ``x -> then(self(x))``."""
        if then.source != self.target:
            raise ValueError("maps do not chain: target and source presentations differ")
        rows = mat_mul([list(r) for r in self.rows], [list(r) for r in then.rows])
        return ModuleMap(self.source, then.target, rows)

    def is_zero_map(self) -> bool:
        return all(self.target.element_is_zero(row) for row in self.rows)

    def equal_map(self, other: "ModuleMap") -> bool:
        """Equality as homomorphisms, i.e. entrywise modulo target relations."""
        if self.source != other.source or self.target != other.target:
            return False
        diff = [
            [a - b for a, b in zip(ra, rb)]
            for ra, rb in zip(self.rows, other.rows)
        ]
        return all(self.target.element_is_zero(row) for row in diff)

    def __str__(self) -> str:
        return f"map({self.source} -> {self.target})"

    __repr__ = __str__


def identity_map(module: FGModule) -> ModuleMap:
    return ModuleMap(module, module, identity_matrix(module.ngens))


@dataclass
class MixedKernel:
    module: FGModule
    inclusions: list
    level: int


def _clearing_lcm(blocks) -> int:
    d = 1
    for matrix in blocks.values():
        for row in matrix:
            for x in row:
                d = lcm(d, Fraction(x).denominator)
    return d


def mixed_kernel(sources, targets, blocks, extra_active: int = 1) -> MixedKernel:
    """Present the kernel of a block map between products of modules.

    ``blocks[(j, t)]`` is the matrix of the component map from source j to
    target t; missing blocks are zero.  The kernel is returned over the
    union of the source prime sets together with inclusion maps back into
    each source.

    The computation picks a denominator level w supported on the union
    primes, solves one integer linear system whose unknowns are the source
    coordinates at level w plus bookkeeping coordinates expressing
    membership in each target's relation span, and reads off a generator
    lattice.  The level is deepened until the lattice stabilizes;
    ``extra_active`` feeds known-relevant denominators into the initial
    level so the loop usually finishes first try.
    """
    union = PrimeSet.finite([])
    for m in sources:
        union = union | m.primes
    checked = {}
    for (j, t), matrix in blocks.items():
        if not targets[t].primes.issubset(sources[j].primes):
            raise ValueError(
                f"block ({j},{t}) maps into a ring over {targets[t].primes}, "
                f"not reachable from {sources[j].primes}"
            )
        matrix = _as_fraction_rows(matrix, targets[t].ngens)
        if len(matrix) != sources[j].ngens:
            raise ValueError(f"block ({j},{t}) has the wrong number of rows")
        checked[(j, t)] = matrix
    blocks = checked

    d_clear = _clearing_lcm(blocks)
    prod_elem = 1
    for m in list(sources) + list(targets):
        for x in m._snf_data()["diag"]:
            if x != 0:
                prod_elem *= abs(x)

    base = d_clear * prod_elem * abs(extra_active)
    active = sorted(p for p in factorize(base) if union._contains_known_prime(p))
    w = 1
    for p in active:
        w *= p ** (valuation(base, p) + 1)
    deepen = 1
    for p in active:
        deepen *= p

    widths = [m.ngens for m in sources]
    offsets = []
    pos = 0
    for n in widths:
        offsets.append(pos)
        pos += n

    # Deepen the level until it stops producing new elements.  Lattice rows
    # for one element differ between levels by invertible rescalings, so the
    # comparison has to happen modulo the deeper level's zero lattice.
    result = _kernel_at_level(sources, targets, blocks, d_clear, prod_elem, union, w)
    for _ in range(8):
        if deepen == 1:
            break
        deeper = _kernel_at_level(
            sources, targets, blocks, d_clear, prod_elem, union, w * deepen
        )
        scaled = [[x * deepen for x in row] for row in result]
        lam_deep = _zero_lattice_rows(sources, union, w * deepen, offsets, pos)
        if lattice_equal(scaled + lam_deep, deeper):
            break
        w *= deepen
        result = deeper
    else:
        raise RuntimeError("kernel lattice failed to stabilize; presentation too deep")

    b_sum = result
    lam_rows = _zero_lattice_rows(sources, union, w, offsets, pos)
    relations = [row_span_solve(b_sum, lam) for lam in lam_rows]
    assert all(r is not None for r in relations), "zero lattice escaped the generator span"
    kernel = FGModule(union, relations, len(b_sum))

    inclusions = []
    for j, m in enumerate(sources):
        rows = [
            [Fraction(row[offsets[j] + c], w) for c in range(widths[j])]
            for row in b_sum
        ]
        inclusions.append(ModuleMap(kernel, m, rows))
    return MixedKernel(kernel, inclusions, w)


def _level_parts(union: PrimeSet, inside: PrimeSet, w: int) -> int:
    """The part of w supported on union-but-not-inside primes."""
    out = 1
    for p, e in factorize(w).items():
        if union._contains_known_prime(p) and not inside._contains_known_prime(p):
            out *= p**e
    return out


def _zero_lattice_rows(sources, union, w, offsets, total):
    rows = []
    for j, m in enumerate(sources):
        w_j = _level_parts(union, m.primes, w)
        scale = w // w_j
        for nb in m.normalized_relation_rows():
            row = [0] * total
            for c, x in enumerate(nb):
                row[offsets[j] + c] = scale * x
            rows.append(row)
    return rows


def _kernel_at_level(sources, targets, blocks, d_clear, prod_elem, union, w):
    widths = [m.ngens for m in sources]
    offsets = []
    pos = 0
    for n in widths:
        offsets.append(pos)
        pos += n
    total_v = pos

    aux_bases = [t.normalized_relation_rows() for t in targets]
    aux_offsets = []
    for rows in aux_bases:
        aux_offsets.append(pos)
        pos += len(rows)
    total = pos

    col_offsets = []
    cpos = 0
    for t in targets:
        col_offsets.append(cpos)
        cpos += t.ngens
    eq = [[0] * cpos for _ in range(total)]

    for t_idx, t in enumerate(targets):
        non_target = w * d_clear * prod_elem
        w_yt = 1
        for p, e in factorize(non_target).items():
            if not t.primes._contains_known_prime(p):
                w_yt *= p**e
        for j, m in enumerate(sources):
            matrix = blocks.get((j, t_idx))
            if matrix is None:
                continue
            w_j = _level_parts(union, m.primes, w)
            scale = (w // w_j) * w_yt * d_clear
            for r in range(m.ngens):
                for c in range(t.ngens):
                    x = matrix[r][c] * scale
                    assert x.denominator == 1
                    eq[offsets[j] + r][col_offsets[t_idx] + c] += int(x)
        for r, nb in enumerate(aux_bases[t_idx]):
            for c, x in enumerate(nb):
                eq[aux_offsets[t_idx] + r][col_offsets[t_idx] + c] = -w * d_clear * x

    kernel_rows = left_kernel_basis(eq)
    gen_rows = []
    for krow in kernel_rows:
        row = [0] * total_v
        for j, m in enumerate(sources):
            w_j = _level_parts(union, m.primes, w)
            scale = w // w_j
            for c in range(m.ngens):
                row[offsets[j] + c] = krow[offsets[j] + c] * scale
        gen_rows.append(row)

    lam = _zero_lattice_rows(sources, union, w, offsets, total_v)
    return hnf_rows(gen_rows + lam)


@dataclass
class LocalizationCheck:
    name: str
    passed: bool
    witness: str


@dataclass
class LocalizationDecision:
    passed: bool
    checks: tuple

    def __bool__(self) -> bool:
        return self.passed


def is_localization(f: ModuleMap, at: PrimeSet) -> LocalizationDecision:
    """Does f behave like inverting everything outside ``at``?

    Two conditions, each witnessed: the kernel must die after inverting
    the primes outside ``at`` (it is torsion of order coprime to ``at``),
    and every target generator must have a multiple by such an invertible
    integer inside the image.
    """
    if not at.issubset(f.target.primes):
        raise ValueError(f"{at} is not contained in the target's prime set")
    checks = []

    kernel = mixed_kernel([f.source], [f.target], {(0, 0): [list(r) for r in f.rows]})
    km = kernel.module
    bad = [d for d in km.invariants if xpart(d, at) != 1]
    if km.free_rank > 0 or bad:
        reason = (
            f"kernel has free rank {km.free_rank}" if km.free_rank else f"kernel carries orders {bad}"
        )
        checks.append(LocalizationCheck("kernel-invertible-torsion", False, reason))
    else:
        killer = 1
        for d in km.invariants:
            killer = lcm(killer, d)
        checks.append(
            LocalizationCheck(
                "kernel-invertible-torsion",
                True,
                f"kernel killed by {XNumber(killer, at)}",
            )
        )

    coker_ok, coker_witness = _cokernel_killed(f, at)
    checks.append(LocalizationCheck("cokernel-killed", coker_ok, coker_witness))

    return LocalizationDecision(all(c.passed for c in checks), tuple(checks))


def _cokernel_killed(f: ModuleMap, at: PrimeSet):
    target = f.target
    lam = 1
    for row in f.rows:
        for x in row:
            lam = lcm(lam, x.denominator)
    cleared = [[int(x * lam) for x in row] for row in f.rows]
    coker = FGModule(target.primes, list(target.relations) + cleared, target.ngens)
    data = coker._snf_data()
    diag, rank, right = data["diag"], data["rank"], data["right"]

    witness = 1
    for j in range(coker.ngens):
        coords = right[j] if right else []
        for i, c in enumerate(coords):
            if c == 0:
                continue
            if i >= rank or (i < len(diag) and diag[i] == 0):
                return False, f"generator {j} survives with infinite order at coordinate {i}"
            d = diag[i]
            for p, e in factorize(xpart(d, target.primes)).items():
                have = valuation(c, p)
                if at._contains_known_prime(p):
                    if have < e:
                        return False, (
                            f"generator {j} keeps a nontrivial {p}-part "
                            f"(needs {p}^{e}, coordinate has {p}^{have})"
                        )
                elif have < e:
                    witness *= p ** (e - have)
    return True, f"cokernel killed by {XNumber(witness, at)}"


@dataclass
class FractureSquare:
    """One group over T split along the blocks of a partition family.

    Holds the localizations at each block and at the core, the product of
    the block localizations pushed down to the core, and the comparison
    maps between them, all certified at construction.
    """

    group: FGModule
    family: PartitionFamily
    block_indices: tuple
    local_modules: dict
    to_local: dict
    core: FGModule
    to_core: ModuleMap
    local_to_core: dict
    product_at_core: FGModule
    core_product: FGModule
    spread: ModuleMap
    unscramble: ModuleMap
    diagonal: ModuleMap


def build_fracture(group: FGModule, family: PartitionFamily) -> FractureSquare:
    """Assemble and certify the localization square of a group over T.

    Requires finitely many blocks.  Every structural identity is checked
    on the spot: restriction then collapse equals direct collapse, the
    unscrambling of the product matches the diagonal, and each arrow is
    certified as a localization at its prime set.
    """
    if group.primes != family.T:
        raise ValueError(f"group lives over {group.primes}, family over {family.T}")
    if family.block_count() is None:
        raise DomainError("infinitely many blocks; materialize a finite family first")
    indices = family.sample_indices(family.block_count())

    locals_, psi, phi = {}, {}, {}
    core, sigma = group.localize(family.S)
    for i in indices:
        loc, to_loc = group.localize(family.block(i))
        locals_[i] = loc
        psi[i] = to_loc
        _, down = loc.localize(family.S)
        phi[i] = down
        if not psi[i].compose(phi[i]).equal_map(sigma):
            raise VerificationError(f"block {i}: restrict-then-collapse differs from collapse")

    k = len(indices)
    n = group.ngens
    block_rel = []
    for pos in range(k):
        for rel in group.relations:
            row = [0] * (k * n)
            row[pos * n : (pos + 1) * n] = rel
            block_rel.append(row)
    product_at_core = FGModule(family.S, block_rel, k * n)
    core_product = FGModule(family.S, block_rel, k * n)

    spread_rows = [[0] * (k * n) for _ in range(n)]
    for pos in range(k):
        for g in range(n):
            spread_rows[g][pos * n + g] = 1
    spread = ModuleMap(core, product_at_core, spread_rows)
    unscramble = ModuleMap(product_at_core, core_product, identity_matrix(k * n))
    diagonal = ModuleMap(core, core_product, spread_rows)
    if not spread.compose(unscramble).equal_map(diagonal):
        raise VerificationError("unscrambled spread does not match the diagonal")

    for i in indices:
        for mapping, at, what in (
            (psi[i], family.block(i), f"restriction to block {i}"),
            (phi[i], family.S, f"collapse of block {i}"),
        ):
            decision = is_localization(mapping, at)
            if not decision:
                raise VerificationError(f"{what} failed: {decision.checks}")
    if not is_localization(sigma, family.S):
        raise VerificationError("collapse to the core failed its certification")

    return FractureSquare(
        group=group,
        family=family,
        block_indices=tuple(indices),
        local_modules=locals_,
        to_local=psi,
        core=core,
        to_core=sigma,
        local_to_core=phi,
        product_at_core=product_at_core,
        core_product=core_product,
        spread=spread,
        unscramble=unscramble,
        diagonal=diagonal,
    )


@dataclass
class BlockTorsionReport:
    per_block: dict
    injective_blocks: dict
    product_kernel_trivial: bool

    def all_injective(self) -> bool:
        return all(self.injective_blocks.values())


def torsion_check(square: FractureSquare) -> BlockTorsionReport:
    """Residual torsion per block, and the kernel of the unscrambling map.

    A block's collapse map kills exactly the torsion supported on its own
    residual primes, so that torsion is read off the local invariants; the
    product-level kernel is computed honestly rather than assumed.
    """
    per_block, injective = {}, {}
    for i in square.block_indices:
        res = square.family.block_residual(i)
        parts = tuple(
            xpart(d, res) for d in square.local_modules[i].invariants if xpart(d, res) != 1
        )
        per_block[i] = parts
        injective[i] = not parts
    kernel = mixed_kernel(
        [square.product_at_core],
        [square.core_product],
        {(0, 0): [list(r) for r in square.unscramble.rows]},
    )
    return BlockTorsionReport(per_block, injective, kernel.module.is_zero())


@dataclass
class PullbackData:
    square: FractureSquare
    twists: tuple
    module: FGModule
    to_core: ModuleMap
    projections: dict
    level: int


def _validate_twist(core: FGModule, matrix, S: PrimeSet):
    matrix = _as_fraction_rows(matrix, core.ngens)
    if len(matrix) != core.ngens:
        raise ValueError("a twist must be a square matrix over the core generators")
    det = mat_det([list(r) for r in matrix])
    if det == 0:
        raise ValueError("a twist must be invertible")
    if not (is_x_number(abs(det.numerator), S) and is_x_number(det.denominator, S)):
        raise ValueError(f"twist determinant {det} is not a unit at the core primes")
    forward = ModuleMap(core, core, matrix)
    inverse = ModuleMap(core, core, invert_rational([list(r) for r in matrix]))
    return forward, inverse, det


def pullback(square: FractureSquare, twists) -> PullbackData:
    """Limit of the block localizations glued over twisted collapse maps.

    ``twists`` lists one core automorphism matrix per block, in block
    order.  The returned module lives over the whole prime set T and
    comes with its map to the core and one projection per block; the
    defining commutation is re-checked on the computed maps.
    """
    indices = square.block_indices
    if len(twists) != len(indices):
        raise ValueError(f"expected {len(indices)} twists, got {len(twists)}")
    core = square.core
    S = square.family.S

    autos = {}
    extra = 1
    for i, matrix in zip(indices, twists):
        forward, inverse, det = _validate_twist(core, matrix, S)
        autos[i] = (forward, inverse)
        for row in inverse.rows:
            for x in row:
                extra = lcm(extra, x.denominator)
        for row in forward.rows:
            for x in row:
                extra = lcm(extra, x.denominator)
        extra *= abs(det.numerator) * det.denominator

    sources = [core] + [square.local_modules[i] for i in indices]
    targets = [core for _ in indices]
    blocks = {}
    for t, i in enumerate(indices):
        blocks[(0, t)] = identity_matrix(core.ngens)
        twisted = square.local_to_core[i].compose(autos[i][0])
        blocks[(t + 1, t)] = [[-x for x in row] for row in twisted.rows]

    kernel = mixed_kernel(sources, targets, blocks, extra_active=extra)
    mu = kernel.inclusions[0]
    projections = {i: kernel.inclusions[t + 1] for t, i in enumerate(indices)}

    for t, i in enumerate(indices):
        via_block = projections[i].compose(square.local_to_core[i]).compose(autos[i][0])
        if not via_block.equal_map(mu):
            raise VerificationError(f"pullback square fails to commute at block {i}")

    return PullbackData(square, tuple(_as_fraction_rows(m, core.ngens) for m in twists),
                        kernel.module, mu, projections, kernel.level)


def mediate(data: PullbackData, cone_core: ModuleMap, cone_blocks: dict) -> ModuleMap:
    """The unique map into the pullback matching a compatible cone.

    ``cone_core`` maps a test module to the core; ``cone_blocks[i]`` maps
    it to block i's localization.  Each generator's image tuple is solved
    for at the pullback's own denominator level; an incompatible or too
    deep cone raises instead of returning a near miss.
    """
    z = cone_core.source
    indices = data.square.block_indices
    for i in indices:
        if cone_blocks[i].source != z:
            raise ValueError("cone legs start from different test modules")
    w = data.level
    legs = [cone_core] + [cone_blocks[i] for i in indices]

    stacked = [list(r) for r in _stack_generator_rows(data)]
    h, u = hnf_with_transform(stacked)

    rows = []
    for g in range(z.ngens):
        tup = []
        for leg in legs:
            tup.extend(Fraction(x) * w for x in leg.rows[g])
        clear = 1
        for x in tup:
            clear = lcm(clear, x.denominator)
        if not is_x_number(clear, data.module.primes):
            raise DomainError("cone needs denominators deeper than the pullback level")
        target = [int(x * clear) for x in tup]
        coords = row_span_solve(h, target)
        if coords is None:
            raise DomainError(f"cone is incompatible: generator {g} has no preimage")
        full = [0] * len(stacked)
        for r, c in enumerate(coords):
            for k in range(len(stacked)):
                full[k] += c * u[r][k]
        rows.append([Fraction(full[k], clear) for k in range(data.module.ngens)])

    mediating = ModuleMap(z, data.module, rows)
    if not mediating.compose(data.to_core).equal_map(cone_core):
        raise VerificationError("mediating map fails against the core leg")
    for i in indices:
        if not mediating.compose(data.projections[i]).equal_map(cone_blocks[i]):
            raise VerificationError(f"mediating map fails against block {i}")
    return mediating


def _stack_generator_rows(data: PullbackData):
    w = data.level
    indices = data.square.block_indices
    sources = [data.square.core] + [data.square.local_modules[i] for i in indices]
    legs = [data.to_core] + [data.projections[i] for i in indices]
    gen_rows = []
    for g in range(data.module.ngens):
        row = []
        for leg in legs:
            for x in leg.rows[g]:
                scaled = Fraction(x) * w
                assert scaled.denominator == 1
                row.append(int(scaled))
        gen_rows.append(row)
    union = data.module.primes
    widths = [m.ngens for m in sources]
    offsets = []
    pos = 0
    for n in widths:
        offsets.append(pos)
        pos += n
    lam = _zero_lattice_rows(sources, union, w, offsets, pos)
    return gen_rows + lam


def is_bounded_above_matrix(square: FractureSquare, twists) -> XNumber:
    """Least core-invertible s dividing the core into every twisted image.

    Works on the inverse twists: a generator of the core lands in block
    i's image once s clears the denominators the inverse row carries at
    block i's residual primes, read in coordinates where the relation
    lattice is diagonal and coordinates invisible at the core are skipped.
    """
    return _matrix_bound(square, twists, inverse_only=True)


def is_bounded_matrix(square: FractureSquare, twists) -> XNumber:
    """Least core-invertible s taming every twist in both directions."""
    return _matrix_bound(square, twists, inverse_only=False)


def _matrix_bound(square: FractureSquare, twists, inverse_only: bool) -> XNumber:
    group = square.group
    S = square.family.S
    data = group._snf_data()
    right = data["right"] if group.relations else identity_matrix(group.ngens)
    rank = data["rank"]
    diag = data["diag"]

    s = 1
    for i, matrix in zip(square.block_indices, twists):
        forward, inverse, _ = _validate_twist(square.core, matrix, S)
        probes = [inverse.rows] if inverse_only else [inverse.rows, forward.rows]
        res = square.family.block_residual(i)
        worst: dict[int, int] = {}
        for rows in probes:
            coords = mat_mul([list(r) for r in rows], right)
            for row in coords:
                for pos, x in enumerate(row):
                    x = Fraction(x)
                    if x == 0 or x.denominator == 1:
                        continue
                    if pos < rank and xpart(diag[pos], S) == 1:
                        continue  # this coordinate is invisible at the core
                    for p, e in factorize(x.denominator).items():
                        if res._contains_known_prime(p):
                            worst[p] = max(worst.get(p, 0), e)
        for p, e in worst.items():
            s *= p**e
    return XNumber(s, S)


@dataclass
class GenusWitness:
    module: FGModule
    to_first: ModuleMap
    to_second: ModuleMap
    core_iso: ModuleMap
    first_certificate: LocalizationDecision
    second_certificate: LocalizationDecision


def _canonical_iso(a: FGModule, b: FGModule) -> ModuleMap:
    """An isomorphism a -> b of modules with equal invariant data.

    Both sides are rotated into diagonal coordinates; matching nonunit
    positions pair off because invariant chains sorted by divisibility are
    unique.  Unit positions on either side are zero summands and map to
    nothing / from nothing.
    """
    da, db = a._snf_data(), b._snf_data()
    ra = da["right"] if a.relations else identity_matrix(a.ngens)
    rb = db["right"] if b.relations else identity_matrix(b.ngens)

    def live_positions(m, data):
        strip = data["stripped"]
        torsion = [j for j in range(data["rank"]) if strip[j] != 1]
        free = list(range(data["rank"], m.ngens))
        return torsion + free

    live_a, live_b = live_positions(a, da), live_positions(b, db)
    assert len(live_a) == len(live_b), "iso classes were checked before pairing"

    can_a = [list(row) for row in ra]
    for j in range(da["rank"]):
        unit = da["units"][j]
        for r in range(a.ngens):
            can_a[r][j] = Fraction(can_a[r][j], unit)

    pair = [[0] * b.ngens for _ in range(a.ngens)]
    for pa, pb in zip(live_a, live_b):
        pair[pa][pb] = 1

    rb_inv = invert_unimodular(rb)
    undo_b = [list(row) for row in rb_inv]
    for j in range(db["rank"]):
        unit = db["units"][j]
        undo_b[j] = [unit * x for x in undo_b[j]]

    rows = mat_mul(mat_mul(can_a, pair), undo_b)
    return ModuleMap(a, b, rows)


def genus_witness(first: FGModule, second: FGModule, core: PrimeSet) -> GenusWitness:
    """Common refinement of two groups agreeing after collapse to the core.

    Demands isomorphic core localizations, builds the canonical core
    isomorphism, and intersects the two groups across it.  Both
    projections are certified to become isomorphisms at the core.
    """
    if first.primes != second.primes:
        raise ValueError("both groups must live over the same prime set")
    core_first, down_first = first.localize(core)
    core_second, down_second = second.localize(core)
    if core_first.iso_class() != core_second.iso_class():
        raise DomainError(
            "not in the same genus: core invariants "
            f"{core_first.iso_class()} vs {core_second.iso_class()}"
        )

    theta = _canonical_iso(core_first, core_second)
    theta_back = _canonical_iso(core_second, core_first)
    if not theta.compose(theta_back).equal_map(identity_map(core_first)):
        raise VerificationError("canonical core isomorphism failed its round trip")

    back_rows = mat_mul([list(r) for r in down_second.rows], [list(r) for r in theta_back.rows])
    kernel = mixed_kernel(
        [first, second],
        [core_first],
        {
            (0, 0): [list(r) for r in down_first.rows],
            (1, 0): [[-x for x in row] for row in back_rows],
        },
    )
    to_first, to_second = kernel.inclusions
    return GenusWitness(
        module=kernel.module,
        to_first=to_first,
        to_second=to_second,
        core_iso=theta,
        first_certificate=is_localization(to_first, core),
        second_certificate=is_localization(to_second, core),
    )
