import numpy as np
import pytest

from qfin import qubo as qb


def random_qubo(n, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(n, n)) * scale
    return qb.Qubo(n=n, quadratic=(m + m.T) / 2, linear=rng.normal(size=n) * scale,
                   constant=float(rng.normal()))


def enumerate_energies(qubo):
    """Independent oracle: per-bitstring python loop."""
    out = []
    for index in range(1 << qubo.n):
        bits = np.array([(index >> i) & 1 for i in range(qubo.n)], dtype=float)
        out.append(float(qubo.linear @ bits + bits @ qubo.quadratic @ bits
                         + qubo.constant))
    return np.array(out)


def test_energy_constant_objective():
    qubo = qb.Qubo(n=3, quadratic=np.zeros((3, 3)), linear=np.zeros(3), constant=2.5)
    assert qb.energy(qubo, [0, 1, 1]) == pytest.approx(2.5)


def test_energy_direct_arithmetic():
    qubo = qb.Qubo(n=2, quadratic=np.array([[0.0, 1.0], [1.0, 0.0]]),
                   linear=np.zeros(2))
    assert qb.energy(qubo, [1, 1]) == pytest.approx(2.0)
    assert qb.energy(qubo, [1, 0]) == pytest.approx(0.0)


def test_energy_length_mismatch():
    qubo = random_qubo(3, 0)
    with pytest.raises(ValueError):
        qb.energy(qubo, [0, 1])


def test_symmetry_validation():
    with pytest.raises(ValueError):
        qb.Qubo(n=2, quadratic=np.array([[0.0, 1.0], [0.0, 0.0]]), linear=np.zeros(2))


@pytest.mark.parametrize("seed", range(5))
def test_all_energies_matches_enumeration(seed):
    qubo = random_qubo(6, seed)
    assert np.allclose(qb.all_energies(qubo), enumerate_energies(qubo), atol=1e-12)


def test_fold_equality_feasible_points_unchanged():
    qubo = random_qubo(4, 1)
    eq = qb.EqualityConstraint(np.ones((1, 4)), np.array([2.0]))
    folded = qb.fold_equality(qubo, eq, 7.0)
    x = [1, 0, 1, 0]
    assert qb.energy(folded, x) == pytest.approx(qb.energy(qubo, x), abs=1e-12)


def test_fold_equality_budget_example():
    base = qb.Qubo(n=2, quadratic=np.zeros((2, 2)), linear=np.zeros(2))
    folded = qb.fold_equality(base, qb.EqualityConstraint(np.ones((1, 2)),
                                                          np.array([1.0])), 10.0)
    assert qb.energy(folded, [0, 0]) == pytest.approx(10.0)
    assert qb.energy(folded, [1, 1]) == pytest.approx(10.0)
    assert qb.energy(folded, [0, 1]) == pytest.approx(0.0)
    assert qb.energy(folded, [1, 0]) == pytest.approx(0.0)


@pytest.mark.parametrize("seed", range(4))
def test_fold_equality_random_instances(seed):
    rng = np.random.default_rng(seed + 100)
    n = 6
    qubo = random_qubo(n, seed)
    a = rng.normal(size=(2, n))
    b = rng.normal(size=2)
    weight = float(rng.uniform(0.5, 5.0))
    folded = qb.fold_equality(qubo, qb.EqualityConstraint(a, b), weight)
    for index in range(1 << n):
        bits = np.array([(index >> i) & 1 for i in range(n)], dtype=float)
        residual = a @ bits - b
        want = qb.energy(qubo, bits) + weight * float(residual @ residual)
        assert qb.energy(folded, bits) == pytest.approx(want, abs=1e-9)


def test_to_ising_single_variable():
    qubo = qb.Qubo(n=1, quadratic=np.zeros((1, 1)), linear=np.array([1.0]))
    obs = qb.to_ising(qubo)
    assert obs.offset == pytest.approx(0.5)
    assert obs.terms == (((0,), -0.5),)


def test_to_ising_zero_qubo():
    qubo = qb.Qubo(n=3, quadratic=np.zeros((3, 3)), linear=np.zeros(3))
    obs = qb.to_ising(qubo)
    assert obs.terms == ()
    assert obs.offset == 0.0


@pytest.mark.parametrize("seed", range(5))
def test_to_ising_energy_table_equality(seed):
    qubo = random_qubo(6, seed + 10)
    obs = qb.to_ising(qubo)
    assert np.allclose(obs.energy_table(6), enumerate_energies(qubo), atol=1e-10)


def test_brute_force_tie_break_lowest_index():
    qubo = qb.Qubo(n=4, quadratic=np.zeros((4, 4)), linear=np.zeros(4), constant=1.0)
    bits, value = qb.brute_force(qubo)
    assert value == pytest.approx(1.0)
    assert bits.tolist() == [0, 0, 0, 0]


@pytest.mark.parametrize("seed", range(5))
def test_brute_force_matches_enumeration(seed):
    qubo = random_qubo(7, seed + 20)
    bits, value = qb.brute_force(qubo)
    energies = enumerate_energies(qubo)
    assert value == pytest.approx(energies.min(), abs=1e-12)
    index = int(sum(b << i for i, b in enumerate(bits)))
    assert energies[index] == pytest.approx(value, abs=1e-12)


def test_penalty_soundness_sweep():
    rng = np.random.default_rng(77)
    for _ in range(3):
        n = 5
        qubo = random_qubo(n, int(rng.integers(1 << 30)))
        spread = qb.energy_spread(qubo)
        eq = qb.EqualityConstraint(np.ones((1, n)), np.array([2.0]))
        folded = qb.fold_equality(qubo, eq, spread * 1.01 + 1e-9)
        bits, _ = qb.brute_force(folded)
        assert bits.sum() == 2


def test_portfolio_single_budget_symmetric():
    spec = qb.PortfolioSpec(mu=np.zeros(3), sigma=np.eye(3), q=1.0, budget=1)
    bits, _ = qb.brute_force(qb.build_portfolio_qubo(spec))
    assert bits.sum() == 1


def test_portfolio_budget_feasible_above_penalty_bound():
    rng = np.random.default_rng(123)
    w = rng.normal(size=(6, 6))
    sigma = w @ w.T / 6
    mu = rng.uniform(0.0, 0.1, size=6)
    unpenalized = qb.Qubo(n=6, quadratic=0.5 * sigma, linear=-mu)
    spread = qb.energy_spread(unpenalized)
    spec = qb.PortfolioSpec(mu=mu, sigma=sigma, q=0.5, budget=3,
                            penalty=spread * 1.5)
    bits, _ = qb.brute_force(qb.build_portfolio_qubo(spec))
    assert bits.sum() == 3


def test_portfolio_validation():
    with pytest.raises(ValueError):
        qb.PortfolioSpec(mu=np.zeros(3), sigma=np.eye(2), q=1.0, budget=1)
    with pytest.raises(ValueError):
        qb.PortfolioSpec(mu=np.zeros(3), sigma=np.eye(3), q=-1.0, budget=1)
    with pytest.raises(ValueError):
        qb.PortfolioSpec(mu=np.zeros(3), sigma=np.eye(3), q=1.0, budget=3)
    with pytest.raises(ValueError):
        qb.PortfolioSpec(mu=np.zeros(2), sigma=-np.eye(2), q=1.0, budget=1)


def test_frontier_high_risk_aversion_empties_portfolio():
    rng = np.random.default_rng(3)
    w = rng.normal(size=(4, 4))
    sigma = w @ w.T / 4 + 0.5 * np.eye(4)
    mu = rng.uniform(0.0, 0.1, size=4)
    points = qb.efficient_frontier(mu, sigma, [1e6])
    assert points[0].x.sum() == 0
    assert points[0].risk == pytest.approx(0.0)


def test_frontier_enumerates_pareto_nondominated_points():
    rng = np.random.default_rng(123)
    w = rng.normal(size=(6, 6))
    sigma = w @ w.T / 6
    mu = rng.uniform(0.0, 0.1, size=6)
    combos = [np.array([(i >> k) & 1 for k in range(6)], dtype=float)
              for i in range(64)]
    risks = np.array([c @ sigma @ c for c in combos])
    rets = np.array([mu @ c for c in combos])
    assert len(combos) == 64
    for point in qb.efficient_frontier(mu, sigma, [0.1, 0.5, 1.0, 2.0]):
        dominated = np.any((risks <= point.risk + 1e-12) & (rets >= point.ret - 1e-12)
                           & ((risks < point.risk - 1e-12) | (rets > point.ret + 1e-12)))
        assert not dominated


def test_frontier_rejects_nonpositive_q():
    with pytest.raises(ValueError):
        qb.efficient_frontier(np.zeros(2), np.eye(2), [0.0])


def test_diversification_forced_single_stock():
    spec = qb.DiversificationSpec(rho=np.eye(1), q_clusters=1)
    qubo = qb.build_diversification_qubo(spec)
    bits, value = qb.brute_force(qubo)
    decode = qb.decode_diversification(bits, 1)
    assert decode.feasible
    assert decode.selected == (0,)
    assert value == pytest.approx(-1.0)


def test_diversification_variable_count():
    rho = np.eye(3)
    spec = qb.DiversificationSpec(rho=rho, q_clusters=2)
    assert qb.build_diversification_qubo(spec).n == 12
    assert qb.diversification_variable_count(3) == 12


def test_diversification_penalty_separates_feasible_energy():
    rho = np.array([[1.0, 0.6, 0.1], [0.6, 1.0, 0.2], [0.1, 0.2, 1.0]])
    weight = 25.0
    spec = qb.DiversificationSpec(rho=rho, q_clusters=2, penalty=weight)
    qubo = qb.build_diversification_qubo(spec)
    n = 3
    for index in range(1 << 12):
        bits = np.array([(index >> i) & 1 for i in range(12)])
        x_mat = bits[:9].reshape(3, 3)
        y = bits[9:]
        penalty = (y.sum() - 2) ** 2 + ((x_mat.sum(axis=1) - 1) ** 2).sum()
        penalty += ((np.diag(x_mat) - y) ** 2).sum()
        penalty += (x_mat * (1 - y[None, :])).sum()
        similarity = float((rho * x_mat).sum())
        want = -similarity + weight * float(penalty)
        assert qb.energy(qubo, bits) == pytest.approx(want, abs=1e-9)


def test_diversification_decode_all_zero_is_infeasible():
    decode = qb.decode_diversification(np.zeros(12, dtype=int), 2)
    assert not decode.feasible
    assert "budget" in decode.violations


def test_diversification_brute_force_feasible_with_large_penalty():
    rho = np.array([[1.0, 0.8, 0.2], [0.8, 1.0, 0.3], [0.2, 0.3, 1.0]])
    base = qb.build_diversification_qubo(
        qb.DiversificationSpec(rho=rho, q_clusters=2, penalty=1e-9))
    # derived bound: spread of the (essentially unpenalized) objective
    spread = qb.energy_spread(qb.Qubo(n=12, quadratic=np.zeros((12, 12)),
                                      linear=base.linear))
    spec = qb.DiversificationSpec(rho=rho, q_clusters=2, penalty=spread * 1.05)
    bits, _ = qb.brute_force(qb.build_diversification_qubo(spec))
    decode = qb.decode_diversification(bits, 2)
    assert decode.feasible
    assert len(decode.selected) == 2
    assert set(decode.assignment) == {0, 1, 2}


def test_qubo_text_roundtrip(tmp_path):
    qubo = random_qubo(5, 42)
    path = tmp_path / "instance.qubo"
    qb.write_qubo_text(path, qubo)
    loaded = qb.read_qubo_text(path)
    assert np.allclose(qb.all_energies(loaded), qb.all_energies(qubo), atol=1e-12)


def test_qubo_text_rejects_bad_entries(tmp_path):
    path = tmp_path / "bad.qubo"
    path.write_text("2\n1 0 3.0\n")
    with pytest.raises(ValueError, match="line 2"):
        qb.read_qubo_text(path)


def test_portfolio_instance_roundtrip(tmp_path):
    rng = np.random.default_rng(5)
    w = rng.normal(size=(4, 4))
    spec = qb.PortfolioSpec(mu=rng.uniform(0, 0.2, 4), sigma=w @ w.T / 4,
                            q=0.7, budget=2, penalty=3.5)
    path = tmp_path / "portfolio.txt"
    qb.write_portfolio_instance(path, spec)
    loaded = qb.read_portfolio_instance(path)
    assert np.allclose(loaded.mu, spec.mu)
    assert np.allclose(loaded.sigma, spec.sigma)
    assert loaded.q == spec.q
    assert loaded.budget == spec.budget
    assert loaded.penalty == spec.penalty


def test_similarity_reader_rejects_ragged(tmp_path):
    path = tmp_path / "rho.csv"
    path.write_text("1.0,0.5\n0.5,1.0\n0.1,0.2\n")
    with pytest.raises(ValueError):
        qb.read_similarity_csv(path)
