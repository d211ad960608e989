import pytest

from pxlaplace import SUITES, run_suites
from pxlaplace.verification import (gradient_check_suite, holder_suite,
                                    inequality_gap_suite, monotonicity_suite,
                                    norm_modular_suite)


def test_registry_names():
    assert set(SUITES) == {'norm-modular', 'holder', 'inequality-gap',
                           'monotonicity', 'gradient-check'}


def test_norm_modular_suite_small():
    report = norm_modular_suite(seed=1, n_functions=60, resolution=32)
    assert report.passed
    assert report.failures == []
    assert report.cases > 0
    assert report.name == 'norm-modular'


def test_holder_suite_small():
    report = holder_suite(seed=1, n_pairs=80, resolution=32)
    assert report.passed and report.failures == []


def test_inequality_gap_suite_small():
    report = inequality_gap_suite(seed=1, n_samples=2000)
    assert report.passed and report.failures == []
    assert report.cases == 2000 * 2 * 5  # dims x exponents


def test_monotonicity_suite_small():
    report = monotonicity_suite(seed=1, n_pairs=50, resolution=16)
    assert report.passed and report.failures == []


def test_gradient_check_suite_small():
    report = gradient_check_suite(seed=1, n_samples=10, resolution=12)
    assert report.passed and report.failures == []
    assert report.details['per_preset'] == 10


def test_reports_reproducible_per_seed():
    a = norm_modular_suite(seed=3, n_functions=25, resolution=16)
    b = norm_modular_suite(seed=3, n_functions=25, resolution=16)
    assert a.as_dict() == b.as_dict()
    c = norm_modular_suite(seed=4, n_functions=25, resolution=16)
    assert c.as_dict() != a.as_dict() or c.seed != a.seed


def test_as_dict_excludes_wall_time():
    report = holder_suite(seed=1, n_pairs=10, resolution=16)
    assert 'elapsed' not in report.as_dict()
    assert report.elapsed >= 0.0


def test_run_suites_selection_and_unknown():
    reports = run_suites(['holder'], seed=2)
    assert len(reports) == 1
    assert reports[0].name == 'holder'
    with pytest.raises(ValueError, match='suite'):
        run_suites(['no-such-suite'])
