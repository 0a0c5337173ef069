"""
Tests for the metric abelian groups.

This module checks group laws and metric axioms on every built-in group
with property-based tests, plus the witness constructors and text forms.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from src.stability.exceptions import (
    DoublingBounded,
    GroupMismatch,
    InvalidParameter,
    NotDivisible,
    ParseError,
    WitnessOutOfRange,
)
from src.stability.groups import (
    BitSupport,
    DyadicVector,
    GroupDescriptor,
    IntVector,
    binary_sequences,
    distance,
    doubling_witness,
    dyadic_lattice,
    halve,
    harmonic_number,
    int_lattice,
    parse_element,
    to_rational,
    unbounded_witness,
)


small_ints = st.integers(min_value=-20, max_value=20)

int_elements = st.lists(small_ints, min_size=2, max_size=2).map(lambda c: IntVector(tuple(c)))

dyadic_elements = st.lists(
    st.tuples(small_ints, st.integers(min_value=0, max_value=4)), min_size=1, max_size=1
).map(DyadicVector.from_pairs)

bit_elements = st.frozensets(st.integers(min_value=1, max_value=12), max_size=6).map(BitSupport)


def triples(elements):
    return st.tuples(elements, elements, elements)


any_triple = st.one_of(triples(int_elements), triples(dyadic_elements), triples(bit_elements))


class TestGroupLaws:
    """Property-based checks of the group and metric axioms."""

    @given(any_triple)
    @settings(max_examples=150)
    def test_addition_is_associative_and_commutative(self, triple):
        """Test that addition is associative and commutative.

        Args:
            triple: Three elements of one group.
        """
        a, b, c = triple
        assert (a + b) + c == a + (b + c)
        assert a + b == b + a

    @given(any_triple)
    @settings(max_examples=150)
    def test_zero_and_inverse(self, triple):
        """Test the neutral element and inverses.

        Args:
            triple: Three elements of one group.
        """
        a = triple[0]
        zero = a.group.zero()
        assert a + zero == a
        assert (a + (-a)).is_zero
        assert a - a == zero

    @given(any_triple)
    @settings(max_examples=150)
    def test_metric_axioms(self, triple):
        """Test symmetry, identity of indiscernibles and the triangle inequality.

        Args:
            triple: Three elements of one group.
        """
        a, b, c = triple
        assert distance(a, b) == distance(b, a)
        assert (distance(a, b) == 0) == (a == b)
        assert distance(a, c) <= distance(a, b) + distance(b, c)

    @given(any_triple)
    @settings(max_examples=150)
    def test_translation_invariance(self, triple):
        """Test that d(a + c, b + c) = d(a, b).

        Args:
            triple: Three elements of one group.
        """
        a, b, c = triple
        assert distance(a + c, b + c) == distance(a, b)

    @given(any_triple)
    @settings(max_examples=150)
    def test_norm_is_even_and_subadditive(self, triple):
        """Test norm(-a) = norm(a), subadditivity and norm(2a) <= 2 norm(a).

        Args:
            triple: Three elements of one group.
        """
        a, b, _ = triple
        assert (-a).norm == a.norm
        assert (a + b).norm <= a.norm + b.norm
        assert (a + a).norm <= 2 * a.norm

    @given(bit_elements)
    def test_binary_sequences_have_exponent_two(self, a):
        """Test that every binary sequence doubles to zero.

        Args:
            a: A binary sequence.
        """
        assert (a + a).is_zero
        assert -a == a


class TestNorms:
    """Tests for concrete norms."""

    def test_integer_norm_is_l1(self):
        """Test the L1 norm on Z^2."""
        assert IntVector((3, -4)).norm == 7

    def test_dyadic_norm_is_exact(self):
        """Test that dyadic norms are exact fractions."""
        x = DyadicVector.from_pairs([(3, 1), (-1, 2)])
        assert x.norm == Fraction(7, 4)

    def test_harmonic_norm(self):
        """Test the harmonic norm of a binary sequence."""
        assert BitSupport(frozenset({1, 3})).norm == Fraction(4, 3)

    def test_harmonic_number(self):
        """Test H_4 = 25/12."""
        assert harmonic_number(4) == Fraction(25, 12)
        assert harmonic_number(0) == 0


class TestWitnesses:
    """Tests for the deterministic large-element constructors."""

    def test_lattice_witness_uses_ceiling(self):
        """Test that the lattice witness is ceil(M) times e1."""
        assert unbounded_witness(int_lattice(), Fraction(7, 2)) == IntVector((4,))
        assert unbounded_witness(int_lattice(2), 3) == IntVector((3, 0))

    def test_harmonic_witness(self):
        """Test that the bits witness is the shortest prefix with H_n >= M."""
        assert unbounded_witness(binary_sequences(), 3) == BitSupport(frozenset(range(1, 12)))

    def test_harmonic_witness_zero_target(self):
        """Test that a zero target gives the empty support."""
        assert unbounded_witness(binary_sequences(), 0).is_zero

    def test_harmonic_witness_out_of_range(self):
        """Test that huge harmonic targets are refused."""
        with pytest.raises(WitnessOutOfRange):
            unbounded_witness(binary_sequences(), 40)

    def test_negative_target_rejected(self):
        """Test that negative norm targets are rejected."""
        with pytest.raises(InvalidParameter):
            unbounded_witness(int_lattice(), -1)

    def test_doubling_witness(self):
        """Test that the doubling witness has norm(2u) >= M."""
        u = doubling_witness(dyadic_lattice(), 5)
        assert u == DyadicVector((Fraction(3),))
        assert (u + u).norm >= 5

    def test_doubling_witness_on_bits(self):
        """Test that 2X bounded is reported on binary sequences."""
        with pytest.raises(DoublingBounded):
            doubling_witness(binary_sequences(), 1)


class TestHalving:
    """Tests for 2-divisibility."""

    def test_halve_dyadic(self):
        """Test halving on the dyadic lattice."""
        x = parse_element('dyadic:[3/2^0]')
        assert halve(x) == DyadicVector((Fraction(3, 2),))

    @pytest.mark.parametrize('text', ['int:[4]', 'bits:{1}'])
    def test_halve_refused(self, text):
        """Test that non-divisible groups refuse to halve.

        Args:
            text: Element text in a group that is not uniquely 2-divisible.
        """
        with pytest.raises(NotDivisible):
            halve(parse_element(text))


class TestParsing:
    """Tests for text forms of groups, elements and rationals."""

    def test_parse_group_specs(self):
        """Test group spec parsing."""
        assert GroupDescriptor.parse('int:2') == int_lattice(2)
        assert GroupDescriptor.parse('dyadic') == dyadic_lattice(1)
        assert GroupDescriptor.parse('bits') == binary_sequences()

    @pytest.mark.parametrize('text', ['real:1', 'bits:2', ''])
    def test_parse_bad_group_specs(self, text):
        """Test that unknown group specs fail.

        Args:
            text: A malformed group spec.
        """
        with pytest.raises(ParseError):
            GroupDescriptor.parse(text)

    def test_canonical_text_forms(self):
        """Test the canonical text of each element kind."""
        assert IntVector((1, -2)).to_text() == 'int:[1,-2]'
        assert DyadicVector((Fraction(3, 2),)).to_text() == 'dyadic:[3/2^1]'
        assert BitSupport(frozenset({3, 1})).to_text() == 'bits:{1,3}'

    def test_parse_prefixless_forms(self):
        """Test that a group lets the prefix be dropped."""
        assert parse_element('-5', int_lattice()) == IntVector((-5,))
        assert parse_element('3/2', dyadic_lattice()) == DyadicVector((Fraction(3, 2),))
        assert parse_element('{2}', binary_sequences()) == BitSupport(frozenset({2}))

    def test_parse_rejects_non_dyadic(self):
        """Test that 1/3 is not a dyadic rational."""
        with pytest.raises(ParseError):
            parse_element('1/3', dyadic_lattice())

    def test_parse_checks_group(self):
        """Test that a prefixed element must match the requested group."""
        with pytest.raises(GroupMismatch):
            parse_element('int:[1,2]', int_lattice(1))

    def test_mixed_groups_do_not_add(self):
        """Test that elements of different groups cannot be added."""
        with pytest.raises(GroupMismatch):
            IntVector((1,)) + DyadicVector((Fraction(1),))

    def test_rationals_are_exact(self):
        """Test rational parsing and the rejection of floats."""
        assert to_rational('-6/4') == Fraction(-3, 2)
        with pytest.raises(ParseError):
            to_rational(0.5)
        with pytest.raises(ParseError):
            to_rational('1/0')
