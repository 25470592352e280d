import math

import pytest

import cbp


def test_offspring_distribution_basics():
    p = cbp.OffspringDistribution([0.25, 0.75])
    assert p.s_max == 1
    assert p.mean() == pytest.approx(0.75)
    assert p.variance() == pytest.approx(0.1875)
    assert list(p.probs) == [0.25, 0.75]
    assert len(p) == 2
    assert p[1] == 0.75
    with pytest.raises(IndexError):
        p[2]


def test_validation_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        cbp.OffspringDistribution([0.5])  # a single entry is not a law on 0..s
    with pytest.raises(ValueError):
        cbp.OffspringDistribution([0.5, 0.6])
    with pytest.raises(ValueError):
        cbp.ControlFamily("negative_binomial", 1.5)  # theta must sit in (0,1)
    with pytest.raises(ValueError):
        cbp.ControlFamily("geometric", 0.5)  # unknown family name
    with pytest.raises(OSError):
        cbp.read_full_tree_csv("/no/such/file.csv")
    with pytest.raises(ValueError):
        cbp.SizesSample([2, 0, 3])  # resurrection after extinction


def test_control_family():
    f = cbp.ControlFamily("binomial", 1.5)
    assert f.mu == pytest.approx(0.6)
    assert f.pmf(1, 1) == pytest.approx(0.6)
    assert cbp.mu_value("poisson", 2.0) == 2.0
    assert cbp.mu_inverse("binomial", 0.6) == pytest.approx(1.5)


def test_simulate_is_deterministic():
    a = cbp.simulate([0.3, 0.3, 0.4], theta=2.0, z0=2, generations=10, seed=7)
    b = cbp.simulate([0.3, 0.3, 0.4], theta=2.0, z0=2, generations=10, seed=7)
    assert a.sizes() == b.sizes()
    assert a.counts == b.counts
    c = cbp.simulate([0.3, 0.3, 0.4], theta=2.0, z0=2, generations=10, seed=8)
    assert a.sizes() != c.sizes() or a.counts != c.counts


def test_complete_mle_closed_form():
    # one transition: two initial individuals, one progenitor with two offspring
    tree = cbp.FullTreeSample(2, [[0, 0, 1]])
    mle = cbp.estimate(tree)
    assert mle.p_hat == [0.0, 0.0, 1.0]
    assert mle.m_hat == 2.0
    assert mle.mu_hat == 0.5
    assert mle.theta_hat == pytest.approx(1.0)
    assert mle.sigma2_hat == 0.0
    assert mle.tau_hat == 1.0

    cis = cbp.confidence_intervals(mle, tree, level=0.95)
    assert cis.level == 0.95
    assert cis.m.lo <= mle.m_hat <= cis.m.hi


def test_progenitor_em_deterministic_chain():
    # all three progenitors have exactly one offspring: p = (0, 1), mu = 3/5
    sample = cbp.ProgenitorSample([3, 2, 1], [2, 1])
    fit = cbp.em_fit_progenitors(sample, s_max=1)
    assert fit.converged
    assert fit.p[1] == pytest.approx(1.0, abs=1e-8)
    assert fit.mu == pytest.approx(0.6, abs=1e-9)
    assert fit.theta == pytest.approx(1.5, abs=1e-6)


def test_sizes_em_and_multi_start_run():
    tree = cbp.simulate([0.2, 0.2, 0.6], theta=4.0, z0=3, generations=6, seed=11)
    sizes = cbp.project_sizes(tree)
    fit = cbp.em_fit_sizes(sizes, s_max=2, max_iters=300)
    assert math.isfinite(fit.loglik)

    ms = cbp.multi_start(sizes, n_starts=3, seed=5, s_max=2, max_iters=300)
    assert ms["n_starts"] == 3
    assert 0 <= ms["best_start"] < 3
    assert math.isfinite(ms["best"].loglik)
    again = cbp.multi_start(sizes, n_starts=3, seed=5, s_max=2, max_iters=300)
    assert again["best"].loglik == ms["best"].loglik  # seeded, thread-independent


def test_loglik_two_term_example():
    # certain extinction in one step has probability one
    value, offending = cbp.loglik_sizes(cbp.SizesSample([1, 0]), [1.0, 0.0],
                                        family="binomial", theta=1.0)
    assert value == pytest.approx(0.0, abs=1e-12)
    assert offending == -1

    value, offending = cbp.loglik_sizes(cbp.SizesSample([1, 2]), [1.0, 0.0],
                                        family="binomial", theta=1.0)
    assert value == -math.inf
    assert offending == 0


def test_scan_smoke():
    tree = cbp.simulate([0.2, 0.2, 0.6], theta=4.0, z0=3, generations=8, seed=2)
    prog = cbp.project_progenitors(tree)
    result = cbp.scan_progenitors(prog, families=["binomial", "poisson"],
                                  s_max_grid=[2, 3], max_iters=2000)
    assert len(result["cells"]) == 4
    ok = [c for c in result["cells"] if not c["failed"]]
    assert ok, "at least one cell must fit"
    best = result["cells"][result["best_index"]]
    assert best["aic"] == min(c["aic"] for c in ok)


def test_bootstrap_smoke():
    s = cbp.bootstrap([0.2, 0.2, 0.6], theta=4.0, scheme="progenitors", reps=8,
                      generations=5, z0=3, seed=7)
    assert s.n_success + s.n_failed == 8
    assert s.param_names == ["p0", "p1", "p2", "m", "sigma2", "mu"]
    assert len(s.mse) == 6
    assert all(m >= 0 for m in s.mse)


def test_tree_counts():
    assert cbp.count_b_star(7, 0, 3) == 7  # one all-zeros configuration per phi* in 1..7
    assert cbp.enumerate_fixed(2, 3, 3) == [[0, 1, 1, 0], [1, 0, 0, 1]]
    rows = cbp.bmax_table(4, 3)
    assert rows == [(1, 1, 1), (2, 2, 3), (3, 3, 6), (4, 5, 9)]
    with pytest.raises(ValueError):
        cbp.count_b(450, 450, 450)  # counts overflow 64 bits


def test_csv_round_trip(tmp_path):
    tree = cbp.simulate([0.3, 0.3, 0.4], theta=2.0, z0=2, generations=6, seed=9)
    path = str(tmp_path / "tree.csv")
    cbp.write_full_tree_csv(path, tree)
    back = cbp.read_full_tree_csv(path)
    assert back.sizes() == tree.sizes()
    assert back.counts == tree.counts
    assert cbp.project_sizes(back).z == tree.sizes()
