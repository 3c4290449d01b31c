from eigenchaos.oracles import (
    classical_position_check,
    diff_cov_check,
    fd_gradient_check,
    fd_hessian_check,
    oracle_suite,
    reconstruction_check,
)
from eigenchaos.spectral import eig_hess_tensor


def test_individual_oracles_pass():
    for res in (fd_gradient_check(draws=10), fd_hessian_check(draws=10), reconstruction_check(),
                diff_cov_check(trials=20_000), classical_position_check()):
        assert res.passed, res


def test_hessian_mutation_is_caught():
    res = fd_hessian_check(draws=5, hess_fn=lambda s, a: -eig_hess_tensor(s, a))
    assert not res.passed


def test_dropped_cross_term_is_caught():
    # keeping only one of the two symmetric terms halves the off-diagonal response
    res = fd_hessian_check(draws=5, hess_fn=lambda s, a: 0.5 * eig_hess_tensor(s, a))
    assert not res.passed


def test_suite_report():
    rep = oracle_suite(seed=3, draws=10)
    assert rep.passed and rep.failures() == []
    assert "FAIL" not in rep.summary()
