"""Three-block ADMM heuristic for mixed-binary optimization.

The problem splits into a QUBO block over the binaries (solved by brute
force, VQE, or QAOA), a convex block over the continuous variables, and a
quadratically-penalized auxiliary block with a closed form, glued by a dual
update and a merit-ranked incumbent. The recorded residual is
``A0 x - A1 xbar - y``; the dual update drives ``A0 x + A1 xbar - y`` to
zero, so for builders with A1 = -I the two coincide up to the sign of xbar.
"""

import csv
from dataclasses import dataclass

import numpy as np

from . import qubo as qb
from .optimizers import OptimizerConfig
from .variational import qaoa_minimize, ry_ansatz, vqe_minimize

QUBO_SOLVERS = ("brute-force", "vqe", "qaoa")


@dataclass(frozen=True)
class MboProblem:
    """min x'Qx + a'x + phi(u) over binary x and box-bounded continuous u.

    Constraints: Gx = b (equality), g(x) <= 0 and l(x, u) <= 0 as linear rows,
    and the consensus structure A0 x + A1 u - y ~ 0 exploited by the solver.
    phi(u) = 0.5 u' P u + r' u.
    """

    q_quadratic: np.ndarray
    q_linear: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    ineq_matrix: np.ndarray
    ineq_rhs: np.ndarray
    phi_quadratic: np.ndarray
    phi_linear: np.ndarray
    u_lower: np.ndarray
    u_upper: np.ndarray
    joint_x: np.ndarray
    joint_u: np.ndarray
    joint_rhs: np.ndarray
    a0: np.ndarray
    a1: np.ndarray

    def __post_init__(self):
        n, l = self.n_binary, self.n_continuous
        checks = [
            (self.q_quadratic.shape, (n, n), "q_quadratic"),
            (self.eq_matrix.shape[1:], (n,), "eq_matrix") if self.eq_matrix.size else None,
            (self.ineq_matrix.shape[1:], (n,), "ineq_matrix") if self.ineq_matrix.size else None,
            (self.phi_quadratic.shape, (l, l), "phi_quadratic"),
            (self.a0.shape, (self.n_consensus, n), "a0"),
            (self.a1.shape, (self.n_consensus, l), "a1"),
        ]
        for item in checks:
            if item and item[0] != item[1]:
                raise ValueError(f"inconsistent dimensions for {item[2]}")
        if np.max(np.abs(self.q_quadratic - self.q_quadratic.T), initial=0.0) > 1e-12:
            raise ValueError("q_quadratic must be symmetric")

    @property
    def n_binary(self) -> int:
        return self.q_linear.size

    @property
    def n_continuous(self) -> int:
        return self.phi_linear.size

    @property
    def n_consensus(self) -> int:
        return self.a0.shape[0]

    def binary_objective(self, x: np.ndarray) -> float:
        return float(x @ self.q_quadratic @ x + self.q_linear @ x)

    def continuous_objective(self, u: np.ndarray) -> float:
        if u.size == 0:
            return 0.0
        return float(0.5 * u @ self.phi_quadratic @ u + self.phi_linear @ u)


def pure_binary_problem(quadratic, linear) -> MboProblem:
    """MBO with no continuous part and no constraints: blocks decouple."""
    quadratic = np.asarray(quadratic, dtype=float)
    linear = np.asarray(linear, dtype=float)
    n = linear.size
    empty_rows = np.zeros((0, n))
    return MboProblem(
        q_quadratic=quadratic, q_linear=linear,
        eq_matrix=empty_rows, eq_rhs=np.zeros(0),
        ineq_matrix=empty_rows, ineq_rhs=np.zeros(0),
        phi_quadratic=np.zeros((0, 0)), phi_linear=np.zeros(0),
        u_lower=np.zeros(0), u_upper=np.zeros(0),
        joint_x=np.zeros((0, n)), joint_u=np.zeros((0, 0)), joint_rhs=np.zeros(0),
        a0=np.zeros((0, n)), a1=np.zeros((0, 0)),
    )


@dataclass(frozen=True)
class AdmmConfig:
    rho: float = 12.0
    beta: float = 11.0
    c: float = 10.0
    merit_weight: float | None = None
    tolerance: float = 1e-4
    max_iterations: int = 100
    qubo_solver: str = "brute-force"
    seed: int = 0
    vqe_iterations: int = 200
    qaoa_depth: int = 2

    def __post_init__(self):
        if min(self.rho, self.beta, self.c, self.tolerance) <= 0.0:
            raise ValueError("rho, beta, c, and tolerance must be positive")
        if self.merit_weight is not None and self.merit_weight <= 0.0:
            raise ValueError("merit_weight must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.qubo_solver not in QUBO_SOLVERS:
            raise ValueError(f"qubo_solver must be one of {QUBO_SOLVERS}")


def resolve_merit_weight(problem: MboProblem, config: AdmmConfig) -> float:
    """Ten times the largest linear objective coefficient, unless configured."""
    if config.merit_weight is not None:
        return config.merit_weight
    scale = float(np.max(np.abs(problem.q_linear), initial=0.0))
    return 10.0 * scale if scale > 0.0 else 10.0


@dataclass
class AdmmIterate:
    k: int
    x: np.ndarray
    x_bar: np.ndarray
    y: np.ndarray
    lam: np.ndarray
    residual_norm: float
    merit: float
    block3_gradient_norm: float


@dataclass
class AdmmResult:
    x: np.ndarray
    x_bar: np.ndarray
    y: np.ndarray
    k_star: int
    merit: float
    trace: list[AdmmIterate]

    @property
    def residual_history(self) -> list[float]:
        return [it.residual_norm for it in self.trace]

    @property
    def merit_history(self) -> list[float]:
        return [it.merit for it in self.trace]


def block1_qubo(problem: MboProblem, x_bar: np.ndarray, y: np.ndarray,
                lam: np.ndarray, config: AdmmConfig) -> qb.Qubo:
    """QUBO for the binary update with the other blocks frozen.

    Expands q(x) + (c/2)||Gx - b||^2 + lam'A0 x + (rho/2)||A0 x + A1 xbar - y||^2.
    """
    n = problem.n_binary
    quadratic = problem.q_quadratic.copy()
    linear = problem.q_linear.copy()
    constant = 0.0
    if problem.eq_matrix.size:
        g_mat, b_vec = problem.eq_matrix, problem.eq_rhs
        quadratic = quadratic + 0.5 * config.c * (g_mat.T @ g_mat)
        linear = linear - config.c * (g_mat.T @ b_vec)
        constant += 0.5 * config.c * float(b_vec @ b_vec)
    if problem.n_consensus:
        drift = problem.a1 @ x_bar - y if problem.n_continuous else -y
        quadratic = quadratic + 0.5 * config.rho * (problem.a0.T @ problem.a0)
        linear = linear + problem.a0.T @ lam + config.rho * (problem.a0.T @ drift)
        constant += 0.5 * config.rho * float(drift @ drift)
    return qb.Qubo(n=n, quadratic=0.5 * (quadratic + quadratic.T), linear=linear,
                   constant=constant)


def _project_box(u: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    return np.minimum(np.maximum(u, lower), upper)


def _project_feasible(u, lower, upper, halfspace_a, halfspace_b, sweeps=200):
    """Dykstra alternating projection onto the box intersected with halfspaces."""
    if halfspace_a.size == 0:
        return _project_box(u, lower, upper)
    rows = [(halfspace_a[i], float(halfspace_b[i])) for i in range(halfspace_a.shape[0])]
    corrections = [np.zeros_like(u) for _ in range(len(rows) + 1)]
    z = u.copy()
    for _ in range(sweeps):
        previous = z.copy()
        w = z + corrections[0]
        z = _project_box(w, lower, upper)
        corrections[0] = w - z
        for i, (a_row, b_val) in enumerate(rows, start=1):
            w = z + corrections[i]
            excess = a_row @ w - b_val
            z = w - max(0.0, excess) / (a_row @ a_row) * a_row if excess > 0 else w
            corrections[i] = w - z
        if np.linalg.norm(z - previous) < 1e-14:
            break
    return z


class InfeasibleContinuousBlock(Exception):
    """The continuous feasible region for the current binaries is empty."""


def block2_convex(problem: MboProblem, x: np.ndarray, y: np.ndarray,
                  lam: np.ndarray, config: AdmmConfig,
                  max_steps: int = 5000, tol: float = 1e-8) -> np.ndarray:
    """Projected gradient descent for the continuous update.

    Minimizes phi(u) + lam'A1 u + (rho/2)||A0 x + A1 u - y||^2 over the box
    intersected with the joint rows l(x, u) <= 0, to first-order
    stationarity measured by the projected-gradient mapping.
    """
    l = problem.n_continuous
    if l == 0:
        return np.zeros(0)
    rho = config.rho
    offset = problem.a0 @ x - y
    hess = problem.phi_quadratic + rho * (problem.a1.T @ problem.a1)
    grad0 = problem.phi_linear + problem.a1.T @ lam + rho * (problem.a1.T @ offset)

    if problem.joint_u.size:
        half_a = problem.joint_u
        half_b = problem.joint_rhs - problem.joint_x @ x
    else:
        half_a = np.zeros((0, l))
        half_b = np.zeros(0)

    def project(u):
        return _project_feasible(u, problem.u_lower, problem.u_upper, half_a, half_b)

    u = project(np.clip(np.zeros(l), problem.u_lower, problem.u_upper))
    if half_a.size and np.any(half_a @ u - half_b > 1e-6):
        raise InfeasibleContinuousBlock("joint constraints admit no continuous point")

    eigs = np.linalg.eigvalsh(hess) if l else np.zeros(1)
    lipschitz = max(float(eigs.max(initial=0.0)), 1e-12)
    step = 1.0 / lipschitz

    def value(u):
        return float(0.5 * u @ hess @ u + grad0 @ u)

    for _ in range(max_steps):
        grad = hess @ u + grad0
        candidate = project(u - step * grad)
        # backtracking on the projected step
        shrink = 0
        while value(candidate) > value(u) + grad @ (candidate - u) \
                + 0.5 / step * float((candidate - u) @ (candidate - u)) + 1e-15 and shrink < 60:
            step *= 0.5
            shrink += 1
            candidate = project(u - step * grad)
        mapping_norm = np.linalg.norm(candidate - u) / step
        u = candidate
        if mapping_norm <= tol:
            break
    return u


def block3_y(problem: MboProblem, x: np.ndarray, x_bar: np.ndarray,
             lam: np.ndarray, config: AdmmConfig) -> np.ndarray:
    """Closed-form auxiliary update y = (lam + rho (A0 x + A1 xbar)) / (beta + rho)."""
    if problem.n_consensus == 0:
        return np.zeros(0)
    consensus = problem.a0 @ x + (problem.a1 @ x_bar if problem.n_continuous else 0.0)
    return (lam + config.rho * consensus) / (config.beta + config.rho)


def dual_update(problem: MboProblem, x, x_bar, y, lam, config: AdmmConfig) -> np.ndarray:
    consensus = problem.a0 @ x + (problem.a1 @ x_bar if problem.n_continuous else 0.0)
    return lam + config.rho * (consensus - y)


def merit(problem: MboProblem, x: np.ndarray, x_bar: np.ndarray,
          merit_weight: float) -> float:
    """Objective plus weighted rowwise positive-part constraint violations."""
    value = problem.binary_objective(x) + problem.continuous_objective(x_bar)
    violation = 0.0
    if problem.ineq_matrix.size:
        violation += float(np.maximum(problem.ineq_matrix @ x - problem.ineq_rhs, 0.0).sum())
    if problem.joint_x.size or problem.joint_u.size:
        rows = problem.joint_x @ x
        if problem.n_continuous:
            rows = rows + problem.joint_u @ x_bar
        violation += float(np.maximum(rows - problem.joint_rhs, 0.0).sum())
    return value + merit_weight * violation


def _solve_qubo(block: qb.Qubo, config: AdmmConfig, iteration: int) -> np.ndarray:
    if config.qubo_solver == "brute-force":
        bits, _ = qb.brute_force(block)
        return bits.astype(float)
    observable = qb.to_ising(block)
    opt = OptimizerConfig(method="spsa", iterations=config.vqe_iterations,
                          seed=config.seed * 100003 + iteration)
    if config.qubo_solver == "vqe":
        result = vqe_minimize(observable, ry_ansatz(block.n, 3), opt,
                              top_k=min(16, 1 << block.n))
    else:
        result = qaoa_minimize(observable, config.qaoa_depth, opt,
                               n_qubits=block.n, top_k=min(16, 1 << block.n))
    # take the lowest-energy state among the most probable samples
    best = min(result.top_states, key=lambda entry: entry[2])
    return np.array([float(ch) for ch in best[0]])


def run(problem: MboProblem, config: AdmmConfig) -> AdmmResult:
    """Iterate the three blocks and dual update, returning the merit-best iterate.

    The continuous variable starts at its finite upper bound (falling back to
    the lower bound, then zero) so capacity-style consensus rows begin from
    full availability. Stops when the recorded residual drops below the
    tolerance or after max_iterations.
    """
    n, l, d = problem.n_binary, problem.n_continuous, problem.n_consensus
    mu = resolve_merit_weight(problem, config)
    x = np.zeros(n)
    x_bar = np.where(np.isfinite(problem.u_upper), problem.u_upper,
                     np.where(np.isfinite(problem.u_lower), problem.u_lower, 0.0)) \
        if l else np.zeros(0)
    y = np.zeros(d)
    lam = np.zeros(d)
    trace: list[AdmmIterate] = []

    for k in range(1, config.max_iterations + 1):
        block = block1_qubo(problem, x_bar, y, lam, config)
        x = _solve_qubo(block, config, k)
        x_bar = block2_convex(problem, x, y, lam, config)
        y = block3_y(problem, x, x_bar, lam, config)
        gradient = config.beta * y - lam - config.rho * (
            problem.a0 @ x + (problem.a1 @ x_bar if l else 0.0) - y)
        lam = dual_update(problem, x, x_bar, y, lam, config)
        residual = problem.a0 @ x - (problem.a1 @ x_bar if l else 0.0) - y
        trace.append(AdmmIterate(
            k=k, x=x.copy(), x_bar=x_bar.copy(), y=y.copy(), lam=lam.copy(),
            residual_norm=float(np.linalg.norm(residual)),
            merit=merit(problem, x, x_bar, mu),
            block3_gradient_norm=float(np.abs(gradient).max(initial=0.0)),
        ))
        if trace[-1].residual_norm < config.tolerance:
            break

    best = min(trace, key=lambda it: (it.merit, it.k))
    return AdmmResult(x=best.x, x_bar=best.x_bar, y=best.y, k_star=best.k,
                      merit=best.merit, trace=trace)


# ---------------------------------------------------------------------------
# combinatorial auction


@dataclass(frozen=True)
class Bid:
    quantities: tuple[int, ...]
    price: float

    def __post_init__(self):
        if any(q < 0 for q in self.quantities) or self.price < 0:
            raise ValueError("quantities and price must be nonnegative")


def build_auction(bids, units) -> MboProblem:
    """Winner determination with multiple units per item.

    Maximizing revenue becomes minimizing -sum p_j x_j. Each capacity row
    ``sum_j qty[i][j] x_j <= u_i`` is routed through the continuous machinery
    with a nonnegative slack: the continuous variable holds the used capacity
    in [0, u_i] (its slack against u_i implicit), A0 is the capacity matrix,
    and A1 = -I ties the two through the consensus rows. The raw capacity
    rows also enter g(x) so the merit function prices violations.
    """
    bids = [b if isinstance(b, Bid) else Bid(tuple(b[0]), float(b[1])) for b in bids]
    units = np.asarray(units, dtype=float)
    m = units.size
    n = len(bids)
    if any(len(b.quantities) != m for b in bids):
        raise ValueError("every bid must quote all items")
    capacity = np.array([[b.quantities[i] for b in bids] for i in range(m)], dtype=float)
    prices = np.array([b.price for b in bids])
    return MboProblem(
        q_quadratic=np.zeros((n, n)), q_linear=-prices,
        eq_matrix=np.zeros((0, n)), eq_rhs=np.zeros(0),
        ineq_matrix=capacity, ineq_rhs=units,
        phi_quadratic=np.zeros((m, m)), phi_linear=np.zeros(m),
        u_lower=np.zeros(m), u_upper=units,
        joint_x=np.zeros((0, n)), joint_u=np.zeros((0, m)), joint_rhs=np.zeros(0),
        a0=capacity, a1=-np.eye(m),
    )


def auction_profit(bids, x) -> float:
    prices = np.array([b.price if isinstance(b, Bid) else float(b[1]) for b in bids])
    return float(prices @ np.asarray(x, dtype=float))


def solve_auction_exact(bids, units) -> tuple[np.ndarray, float]:
    """Exhaustive winner determination; feasible subsets only."""
    bids = [b if isinstance(b, Bid) else Bid(tuple(b[0]), float(b[1])) for b in bids]
    units = np.asarray(units, dtype=float)
    n = len(bids)
    if n > 24:
        raise ValueError("exhaustive search supports at most 24 bids")
    best_x = np.zeros(n)
    best_profit = 0.0
    for mask in range(1 << n):
        load = np.zeros(units.size)
        profit = 0.0
        for j in range(n):
            if (mask >> j) & 1:
                load += np.asarray(bids[j].quantities, dtype=float)
                profit += bids[j].price
        if np.all(load <= units + 1e-9) and profit > best_profit:
            best_profit = profit
            best_x = np.array([(mask >> j) & 1 for j in range(n)], dtype=float)
    return best_x, best_profit


def random_auction(n_bids: int, n_items: int, units_per_item: int,
                   seed: int, max_quantity: int = 6,
                   price_range: tuple[float, float] = (1.0, 30.0)) -> tuple[list[Bid], np.ndarray]:
    """Seeded instance in the paper's shape: quantities in [1, max_quantity]."""
    rng = np.random.default_rng(seed)
    bids = []
    for _ in range(n_bids):
        quantities = rng.integers(1, max_quantity + 1, size=n_items)
        price = float(np.round(rng.uniform(*price_range), 2))
        bids.append(Bid(tuple(int(q) for q in quantities), price))
    return bids, np.full(n_items, float(units_per_item))


def write_auction_csv(path, bids, units) -> None:
    """Header ``price,qty_item_1,..`` rows per bid, then a ``units`` line."""
    bids = [b if isinstance(b, Bid) else Bid(tuple(b[0]), float(b[1])) for b in bids]
    m = len(units)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["price"] + [f"qty_item_{i + 1}" for i in range(m)])
        for b in bids:
            writer.writerow([repr(float(b.price))] + [int(q) for q in b.quantities])
        writer.writerow(["units"] + [repr(float(u)) for u in units])


def read_auction_csv(path) -> tuple[list[Bid], np.ndarray]:
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if len(rows) < 3 or not rows[0] or rows[0][0] != "price":
        raise ValueError("auction CSV needs a price,qty_item_* header, bids, and a units line")
    m = len(rows[0]) - 1
    bids = []
    units = None
    for line_no, row in enumerate(rows[1:], start=2):
        if row[0] == "units":
            units = np.array([float(v) for v in row[1:]])
            continue
        if len(row) != m + 1:
            raise ValueError(f"bad auction row at line {line_no}")
        bids.append(Bid(tuple(int(float(v)) for v in row[1:]), float(row[0])))
    if units is None or units.size != m:
        raise ValueError("auction CSV is missing its units line")
    if not bids:
        raise ValueError("auction CSV contains no bids")
    return bids, units
