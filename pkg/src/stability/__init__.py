"""
Stability package for stabkit.

This package provides the exact groups, test functions, defect scans,
certificate chains, hyperstability machinery and the sharpness search.
"""

from .groups import (
    BitSupport,
    DyadicVector,
    Element,
    GroupDescriptor,
    GroupKind,
    IntVector,
    binary_sequences,
    doubling_witness,
    dyadic_lattice,
    harmonic_number,
    int_lattice,
    parse_element,
    unbounded_witness,
)
from .functions import (
    BaseRule,
    GroupValue,
    Scalar,
    TestFunction,
    make_additive,
    make_constant,
    make_extremal_cauchy,
    make_extremal_jensen,
    make_hyper_counterexample,
    make_zero,
    perturb,
)
from .defect import (
    Equation,
    ScanReport,
    Window,
    cauchy_defect,
    jensen_defect,
    jensen_quad_defect,
    sup_defect_scan,
    weighted_defect,
)
from .search import SharpnessResult, ValueGrid, adversarial_sharpness_search
from .certify import (
    CauchyCertificate,
    JensenCertificate,
    StabilityBudget,
    budget_from_scan,
    certify_cauchy,
    certify_jensen,
    pick_cauchy_witnesses,
    pick_jensen_witness,
)
from .hyper import (
    HyperBudget,
    HyperCertificate,
    WeightFunction,
    WeightKind,
    binseq_counterexample_report,
    certify_hyper_cauchy,
    certify_hyper_jensen,
    pick_hyper_cauchy_witnesses,
    pick_hyper_jensen_witness,
    weighted_profile,
)
from .audit import verify_certificate
from .exceptions import StabilityError

__all__ = [
    'BitSupport',
    'DyadicVector',
    'Element',
    'GroupDescriptor',
    'GroupKind',
    'IntVector',
    'binary_sequences',
    'doubling_witness',
    'dyadic_lattice',
    'harmonic_number',
    'int_lattice',
    'parse_element',
    'unbounded_witness',
    'BaseRule',
    'GroupValue',
    'Scalar',
    'TestFunction',
    'make_additive',
    'make_constant',
    'make_extremal_cauchy',
    'make_extremal_jensen',
    'make_hyper_counterexample',
    'make_zero',
    'perturb',
    'Equation',
    'ScanReport',
    'Window',
    'cauchy_defect',
    'jensen_defect',
    'jensen_quad_defect',
    'sup_defect_scan',
    'weighted_defect',
    'SharpnessResult',
    'ValueGrid',
    'adversarial_sharpness_search',
    'CauchyCertificate',
    'JensenCertificate',
    'StabilityBudget',
    'budget_from_scan',
    'certify_cauchy',
    'certify_jensen',
    'pick_cauchy_witnesses',
    'pick_jensen_witness',
    'HyperBudget',
    'HyperCertificate',
    'WeightFunction',
    'WeightKind',
    'binseq_counterexample_report',
    'certify_hyper_cauchy',
    'certify_hyper_jensen',
    'pick_hyper_cauchy_witnesses',
    'pick_hyper_jensen_witness',
    'weighted_profile',
    'verify_certificate',
    'StabilityError',
]
