"""
Tests for CSV and JSON rendering.
"""

import json

import pytest

from src.stability.certify import StabilityBudget, certify_cauchy
from src.stability.defect import Equation, Window, sup_defect_scan
from src.stability.functions import make_extremal_cauchy
from src.stability.groups import IntVector, int_lattice
from src.stability.reports import (
    certificate_to_csv,
    certificates_to_csv,
    render,
    scan_to_csv,
    to_json,
)


@pytest.fixture
def extremal():
    """The extremal Cauchy function with eps = 1 and x0 = 1."""
    return make_extremal_cauchy(1, IntVector((1,)))


class TestCsv:
    """Tests for the plot-ready CSV form."""

    def test_scan_csv(self, extremal):
        """Test the max row followed by one row per shell."""
        report = sup_defect_scan(extremal, Equation.CAUCHY, Window.box(int_lattice(), -2, 2),
                                 shells=[1, 2])
        assert scan_to_csv(report) == (
            "kind,r,value,x,y\n"
            "max,,5,int:[1],int:[1]\n"
            "shell,1,5,int:[1],int:[1]\n"
            "shell,2,1,int:[2],int:[2]\n"
        )

    def test_certificate_csv(self, extremal):
        """Test term rows, then the bound and defect rows."""
        one = IntVector((1,))
        certificate = certify_cauchy(extremal, StabilityBudget(5, 1), one, one)
        lines = certificate_to_csv(certificate).splitlines()
        assert lines[0] == 'kind,r,value,x,y'
        assert lines[1] == 'term,5,1,int:[-5],int:[6]'
        assert lines[-2] == 'bound,5,5,int:[1],int:[1]'
        assert lines[-1] == 'defect,5,5,int:[1],int:[1]'
        assert len(lines) == 8

    def test_several_certificates_share_a_header(self, extremal):
        """Test that multiple certificates are written under one header."""
        one = IntVector((1,))
        certificate = certify_cauchy(extremal, StabilityBudget(5, 1), one, one)
        text = certificates_to_csv([certificate, certificate])
        assert text.count('kind,r,value,x,y') == 1
        assert len(text.splitlines()) == 15

    def test_commas_in_elements_are_quoted(self):
        """Test that two-dimensional elements survive CSV quoting."""
        f = make_extremal_cauchy(1, IntVector((1, 0)))
        report = sup_defect_scan(f, Equation.CAUCHY, Window.box(int_lattice(2), 0, 1))
        assert scan_to_csv(report).splitlines()[1] == 'max,,5,"int:[1,0]","int:[1,0]"'


class TestJson:
    """Tests for canonical JSON."""

    def test_sorted_and_terminated(self):
        """Test key order, indentation and the trailing newline."""
        assert to_json({'b': 1, 'a': [1]}) == '{\n  "a": [\n    1\n  ],\n  "b": 1\n}\n'

    def test_render_json_matches_to_dict(self, extremal):
        """Test that rendered JSON parses back to the dictionary form."""
        one = IntVector((1,))
        certificate = certify_cauchy(extremal, StabilityBudget(5, 1), one, one)
        assert json.loads(render(certificate, 'json')) == certificate.to_dict()

    def test_render_rejects_unknown_csv(self):
        """Test that arbitrary objects have no CSV form."""
        with pytest.raises(ValueError):
            render(object(), 'csv')
