import random
from fractions import Fraction

import pytest

from genuskit.errors import DomainError, FamilyError
from genuskit.primeset import ALL_PRIMES, EMPTY_SET, PrimeSet, make_family, valuation
from genuskit.rank1 import (
    AutFamily1,
    ConstantRational,
    ExtGenusClass,
    HeightSequence,
    Identity,
    IndexPrimePower,
    double_coset_class,
    is_bounded,
    is_bounded_above,
    is_finitely_generated,
    make_aut,
    pullback_rank1,
    rank1_iso,
    valuation_profile,
    verify_localization_properties,
)

SINGLETONS_ALL = make_family(ALL_PRIMES, EMPTY_SET)
PROBE_PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]


def direct_height(alpha, p):
    """Height at p straight from the defining value, bypassing the profile."""
    return valuation(alpha.value_at(alpha.family.block_of_prime(p)), p)


def in_pullback(alpha, x: Fraction, probes=PROBE_PRIMES) -> bool:
    """Membership in the limit group, checked prime by prime on a window."""
    if x == 0:
        return True
    fam = alpha.family
    for q in probes:
        if fam.S.contains(q) and valuation(x, q) < 0:
            return False
        if fam.residual().contains(q) and valuation(x, q) < direct_height(alpha, q):
            return False
    return True


def random_aut(rng, family=SINGLETONS_ALL, allow_index_power=True):
    choice = rng.randrange(3 if allow_index_power and family.is_singleton_shape else 2)
    if choice == 0:
        tail = Identity()
    elif choice == 1:
        num = rng.choice([n for n in range(-20, 21) if n])
        tail = ConstantRational(Fraction(num, rng.randint(1, 20)))
    else:
        tail = IndexPrimePower(rng.randint(-3, 3))
    exceptions = {}
    if family.is_singleton_shape:
        indices = [p for p in PROBE_PRIMES if family.residual().contains(p)]
    else:
        indices = list(range(family.block_count()))
    for i in rng.sample(indices, rng.randint(0, min(3, len(indices)))):
        num = rng.choice([n for n in range(-30, 31) if n])
        exceptions[i] = Fraction(num, rng.randint(1, 30))
    return make_aut(family, tail, exceptions)


class TestConstruction:
    def test_value_lookup(self):
        alpha = make_aut(SINGLETONS_ALL, Identity(), {2: Fraction(3, 2), 5: Fraction(5)})
        assert alpha.value_at(2) == Fraction(3, 2)
        assert alpha.value_at(5) == 5
        assert alpha.value_at(7) == 1

    def test_rejects_zero_value(self):
        with pytest.raises(ValueError):
            make_aut(SINGLETONS_ALL, Identity(), {3: Fraction(0)})
        with pytest.raises(ValueError):
            ConstantRational(0)

    def test_rejects_bad_index(self):
        with pytest.raises(FamilyError):
            make_aut(SINGLETONS_ALL, Identity(), {4: Fraction(1)})
        fam = make_family(PrimeSet.finite([2, 3]), PrimeSet.finite([2]))
        with pytest.raises(FamilyError):
            make_aut(fam, Identity(), {5: Fraction(1)})

    def test_rejects_duplicate_exception(self):
        with pytest.raises(ValueError):
            AutFamily1(SINGLETONS_ALL, Identity(), ((3, Fraction(2)), (3, Fraction(4))))

    def test_index_power_needs_singleton_shape(self):
        fam = make_family(
            PrimeSet.finite([2, 3, 5]),
            PrimeSet.finite([2]),
            [PrimeSet.finite([2, 3]), PrimeSet.finite([2, 5])],
        )
        with pytest.raises(ValueError):
            make_aut(fam, IndexPrimePower(1))

    def test_inverse_inverts_values(self):
        rng = random.Random(3)
        for _ in range(50):
            alpha = random_aut(rng)
            inv = alpha.inverse()
            for p in PROBE_PRIMES[:6]:
                assert alpha.value_at(p) * inv.value_at(p) == 1


class TestValuationProfile:
    def test_pinned_bounded_example(self):
        alpha = make_aut(SINGLETONS_ALL, Identity(), {2: Fraction(3, 2), 5: Fraction(5)})
        overrides, default = valuation_profile(alpha)
        assert overrides == {2: -1, 5: 1}
        assert default == 0

    def test_constant_tail_support_materializes(self):
        alpha = make_aut(SINGLETONS_ALL, ConstantRational(Fraction(10, 3)))
        overrides, default = valuation_profile(alpha)
        assert overrides == {2: 1, 3: -1, 5: 1}
        assert default == 0

    def test_core_primes_never_counted(self):
        fam = make_family(ALL_PRIMES, PrimeSet.finite([3]))
        alpha = make_aut(fam, ConstantRational(Fraction(10, 3)))
        overrides, _ = valuation_profile(alpha)
        assert 3 not in overrides
        assert overrides == {2: 1, 5: 1}

    def test_index_power_default(self):
        overrides, default = valuation_profile(make_aut(SINGLETONS_ALL, IndexPrimePower(-2)))
        assert (overrides, default) == ({}, -2)

    def test_exception_matching_default_is_not_an_override(self):
        alpha = make_aut(SINGLETONS_ALL, IndexPrimePower(1), {3: Fraction(6)})
        overrides, default = valuation_profile(alpha)
        # v_3(6) = 1 equals the generic exponent even though the value differs
        assert default == 1 and 3 not in overrides

    def test_finite_family_materializes_fully(self):
        fam = make_family(PrimeSet.finite([2, 3, 5]), PrimeSet.finite([2]))
        alpha = make_aut(fam, ConstantRational(Fraction(9)))
        overrides, default = valuation_profile(alpha)
        assert (overrides, default) == ({3: 2}, 0)

    def test_explicit_family_with_cofinite_block(self):
        fam = make_family(
            ALL_PRIMES,
            PrimeSet.finite([2]),
            [PrimeSet.all_except([3]), PrimeSet.finite([2, 3])],
        )
        alpha = make_aut(fam, Identity(), {0: Fraction(5, 3), 1: Fraction(12)})
        overrides, default = valuation_profile(alpha)
        # 3 lives in block 1 (value 12 = 4*3), 5 in block 0; the 1/3 in
        # block 0's value is invisible because 3 is outside that block
        assert (overrides, default) == ({3: 1, 5: 1}, 0)

    def test_profile_matches_direct_evaluation(self):
        rng = random.Random(41)
        for _ in range(200):
            alpha = random_aut(rng)
            overrides, default = valuation_profile(alpha)
            for p in PROBE_PRIMES:
                assert overrides.get(p, default) == direct_height(alpha, p)


class TestBoundedness:
    def test_pinned_witness(self):
        alpha = make_aut(SINGLETONS_ALL, Identity(), {2: Fraction(3, 2), 5: Fraction(5)})
        decision = is_bounded(alpha)
        assert decision.bounded and int(decision.witness) == 10
        above = is_bounded_above(alpha)
        assert above.bounded and int(above.witness) == 5

    def test_growing_tail(self):
        alpha = make_aut(SINGLETONS_ALL, IndexPrimePower(1))
        decision = is_bounded(alpha)
        assert not decision.bounded
        assert decision.violation == ALL_PRIMES
        assert not is_bounded_above(alpha).bounded

    def test_shrinking_tail(self):
        alpha = make_aut(SINGLETONS_ALL, IndexPrimePower(-1))
        assert not is_bounded(alpha).bounded
        above = is_bounded_above(alpha)
        assert above.bounded and int(above.witness) == 1

    def test_violation_excludes_quiet_exceptions(self):
        alpha = make_aut(SINGLETONS_ALL, IndexPrimePower(1), {7: Fraction(3)})
        decision = is_bounded(alpha)
        # v_7(3) = 0, so 7 is the one calm prime
        assert decision.violation == PrimeSet.all_except([7])

    def test_bounded_implies_bounded_above(self):
        rng = random.Random(59)
        for _ in range(300):
            alpha = random_aut(rng)
            if is_bounded(alpha).bounded:
                assert is_bounded_above(alpha).bounded

    def test_witness_minimality(self):
        # the witness clears every height and no smaller multiple does
        rng = random.Random(61)
        for _ in range(100):
            alpha = random_aut(rng)
            decision = is_bounded(alpha)
            if not decision.bounded:
                continue
            s = int(decision.witness)
            overrides, _ = valuation_profile(alpha)
            for p, c in overrides.items():
                assert valuation(s, p) == abs(c)
            assert all(valuation(s, p) == 0 for p in PROBE_PRIMES if p not in overrides)

    def test_finite_families_always_bounded(self):
        rng = random.Random(67)
        fam = make_family(PrimeSet.finite([2, 3, 5, 7]), PrimeSet.finite([2]))
        for _ in range(50):
            alpha = random_aut(rng, fam, allow_index_power=False)
            assert is_bounded(alpha).bounded
            assert is_bounded_above(alpha).bounded


class TestPullback:
    def test_identity_gives_exact_zero_heights(self):
        h = pullback_rank1(make_aut(SINGLETONS_ALL, Identity()))
        assert h == HeightSequence(SINGLETONS_ALL, False, (), 0)

    def test_pinned_bounded_pullback(self):
        alpha = make_aut(SINGLETONS_ALL, Identity(), {2: Fraction(3, 2), 5: Fraction(5)})
        h = pullback_rank1(alpha)
        assert not h.trivial
        assert h.overrides == ((2, -1), (5, 1))
        assert h.default == 0
        assert is_finitely_generated(h)

    def test_growing_tail_collapses(self):
        h = pullback_rank1(make_aut(SINGLETONS_ALL, IndexPrimePower(1)))
        assert h.trivial
        with pytest.raises(DomainError):
            h.height_at(3)
        with pytest.raises(ValueError):
            is_finitely_generated(h)

    def test_shrinking_tail_not_finitely_generated(self):
        h = pullback_rank1(make_aut(SINGLETONS_ALL, IndexPrimePower(-1)))
        assert not h.trivial and h.default == -1
        assert not is_finitely_generated(h)

    def test_height_sequence_validation(self):
        with pytest.raises(ValueError):
            HeightSequence(SINGLETONS_ALL, True, ((2, 1),), 0)
        with pytest.raises(ValueError):
            HeightSequence(SINGLETONS_ALL, False, (), 1)
        with pytest.raises(ValueError):
            HeightSequence(SINGLETONS_ALL, False, ((2, 0),), 0)
        with pytest.raises(FamilyError):
            fam = make_family(ALL_PRIMES, PrimeSet.finite([2]))
            HeightSequence(fam, False, ((2, 1),), 0)

    def test_membership_oracle(self):
        rng = random.Random(73)
        for _ in range(60):
            alpha = random_aut(rng)
            h = pullback_rank1(alpha)
            if h.trivial:
                continue
            for _ in range(40):
                x = Fraction(rng.randint(-64, 64), rng.randint(1, 64))
                predicted = x == 0 or all(
                    valuation(x, p) >= h.height_at(p)
                    for p in PROBE_PRIMES
                    if SINGLETONS_ALL.residual().contains(p)
                )
                assert predicted == in_pullback(alpha, x)


class TestIsomorphism:
    def test_pinned_multiplier(self):
        h1 = HeightSequence(SINGLETONS_ALL, False, ((2, -1), (5, 1)), 0)
        h2 = HeightSequence(SINGLETONS_ALL, False, (), 0)
        decision = rank1_iso(h1, h2)
        assert decision.isomorphic
        assert decision.multiplier == Fraction(5, 2)

    def test_multiplier_transports_membership(self):
        rng = random.Random(79)
        for _ in range(80):
            a1, a2 = random_aut(rng), random_aut(rng)
            h1, h2 = pullback_rank1(a1), pullback_rank1(a2)
            if h1.trivial or h2.trivial:
                continue
            decision = rank1_iso(h1, h2)
            if not decision.isomorphic:
                continue
            lam = decision.multiplier
            for _ in range(25):
                x = Fraction(rng.randint(-64, 64), rng.randint(1, 64))
                if in_pullback(a2, x):
                    assert in_pullback(a1, lam * x)
                if in_pullback(a1, x):
                    assert in_pullback(a2, x / lam)

    def test_defaults_must_agree(self):
        h1 = pullback_rank1(make_aut(SINGLETONS_ALL, IndexPrimePower(-1)))
        h2 = pullback_rank1(make_aut(SINGLETONS_ALL, IndexPrimePower(-2)))
        decision = rank1_iso(h1, h2)
        assert not decision.isomorphic and decision.multiplier is None

    def test_trivial_cases(self):
        t = pullback_rank1(make_aut(SINGLETONS_ALL, IndexPrimePower(1)))
        z = pullback_rank1(make_aut(SINGLETONS_ALL, Identity()))
        assert rank1_iso(t, t).isomorphic
        assert not rank1_iso(t, z).isomorphic

    def test_family_mismatch_rejected(self):
        other = make_family(ALL_PRIMES, PrimeSet.finite([2]))
        h1 = pullback_rank1(make_aut(SINGLETONS_ALL, Identity()))
        h2 = pullback_rank1(make_aut(other, Identity()))
        with pytest.raises(ValueError):
            rank1_iso(h1, h2)

    def test_iso_is_an_equivalence(self):
        rng = random.Random(83)
        seqs = []
        for _ in range(40):
            h = pullback_rank1(random_aut(rng))
            seqs.append(h)
        for h in seqs:
            assert rank1_iso(h, h).isomorphic
        for h1 in seqs[:12]:
            for h2 in seqs[:12]:
                d12, d21 = rank1_iso(h1, h2), rank1_iso(h2, h1)
                assert d12.isomorphic == d21.isomorphic
                if d12.isomorphic and not h1.trivial:
                    assert d12.multiplier * d21.multiplier == 1


class TestExtendedGenus:
    def test_tail_exponent_is_the_whole_class(self):
        a1 = make_aut(SINGLETONS_ALL, IndexPrimePower(-3), {2: Fraction(7)})
        a2 = make_aut(SINGLETONS_ALL, IndexPrimePower(-3))
        assert double_coset_class(a1) == double_coset_class(a2)
        assert double_coset_class(a1) == ExtGenusClass(SINGLETONS_ALL, -3)
        a3 = make_aut(SINGLETONS_ALL, IndexPrimePower(-2))
        assert double_coset_class(a3) != double_coset_class(a1)

    def test_finite_families_collapse_to_one_class(self):
        fam = make_family(PrimeSet.finite([2, 3, 5]), PrimeSet.finite([2]))
        rng = random.Random(89)
        for _ in range(30):
            alpha = random_aut(rng, fam, allow_index_power=False)
            assert double_coset_class(alpha) == ExtGenusClass(fam, 0)

    def test_trivial_pullback_rejected(self):
        with pytest.raises(DomainError):
            double_coset_class(make_aut(SINGLETONS_ALL, IndexPrimePower(1)))

    def test_class_agrees_with_isomorphism(self):
        rng = random.Random(97)
        pairs = 0
        while pairs < 150:
            a1, a2 = random_aut(rng), random_aut(rng)
            if not (is_bounded_above(a1).bounded and is_bounded_above(a2).bounded):
                continue
            pairs += 1
            same_class = double_coset_class(a1) == double_coset_class(a2)
            iso = rank1_iso(pullback_rank1(a1), pullback_rank1(a2)).isomorphic
            assert same_class == iso

    def test_canonical_heights(self):
        cls = ExtGenusClass(SINGLETONS_ALL, -2)
        h = cls.canonical_heights()
        assert h.default == -2 and h.overrides == ()
        with pytest.raises(ValueError):
            ExtGenusClass(SINGLETONS_ALL, 1)


class TestLocalizationChecks:
    def test_pinned_witnesses(self):
        alpha = make_aut(SINGLETONS_ALL, Identity(), {2: Fraction(3, 2), 5: Fraction(5)})
        report = verify_localization_properties(alpha, 3)
        assert report.all_passed()
        by_name = {c.name: c for c in report.checks}
        assert "t = 5" in by_name["epi-up-to-block-number"].witness
        assert "r = 5" in by_name["core-map-mono-epi"].witness

        report5 = verify_localization_properties(alpha, 5)
        assert "t = 1" in {c.name: c for c in report5.checks}["epi-up-to-block-number"].witness

    def test_block_value_denominator_feeds_t(self):
        alpha = make_aut(SINGLETONS_ALL, Identity(), {2: Fraction(3, 2), 5: Fraction(5)})
        report = verify_localization_properties(alpha, 2)
        # clearing the height at 5 against v_5(3/2) = 0 still needs a 5
        assert "t = 5" in {c.name: c for c in report.checks}["epi-up-to-block-number"].witness

    def test_trivial_pullback_fails_two_of_three(self):
        report = verify_localization_properties(make_aut(SINGLETONS_ALL, IndexPrimePower(1)), 2)
        assert not report.all_passed()
        results = {c.name: c.passed for c in report.checks}
        assert results == {
            "kernel-trivial": True,
            "epi-up-to-block-number": False,
            "core-map-mono-epi": False,
        }

    def test_shrinking_tail_passes_everywhere(self):
        alpha = make_aut(SINGLETONS_ALL, IndexPrimePower(-1))
        for p in (2, 3, 7):
            assert verify_localization_properties(alpha, p).all_passed()

    def test_witness_actually_lands_in_image(self):
        # t * generator must be expressible as a pullback element over the
        # block value; check by direct membership of t * value
        rng = random.Random(101)
        for _ in range(80):
            alpha = random_aut(rng)
            if pullback_rank1(alpha).trivial:
                continue
            for p in (2, 3, 5):
                report = verify_localization_properties(alpha, p)
                row = {c.name: c for c in report.checks}["epi-up-to-block-number"]
                t = int(row.witness.split("=")[1].split()[0])
                assert in_pullback(alpha, t * alpha.value_at(p))

    def test_bad_block_rejected(self):
        with pytest.raises(FamilyError):
            verify_localization_properties(make_aut(SINGLETONS_ALL, Identity()), 4)
