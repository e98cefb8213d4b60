"""QUBO containers, penalty folding, Ising conversion, and problem builders.

Minimization convention everywhere: maximization problems are negated at
build time. Variable i of a bitstring corresponds to qubit i, i.e. bit i of
the basis index.
"""

import math
from dataclasses import dataclass

import numpy as np

from .simulator import CapacityError, IsingObservable


@dataclass(frozen=True)
class Qubo:
    """energy(x) = linear . x + x^T quadratic x + constant over binary x."""

    n: int
    quadratic: np.ndarray
    linear: np.ndarray
    constant: float = 0.0

    def __post_init__(self):
        q = np.asarray(self.quadratic, dtype=float)
        c = np.asarray(self.linear, dtype=float)
        if q.shape != (self.n, self.n):
            raise ValueError("quadratic must be n by n")
        if c.shape != (self.n,):
            raise ValueError("linear must have length n")
        if np.max(np.abs(q - q.T), initial=0.0) > 1e-12:
            raise ValueError("quadratic matrix must be symmetric")
        object.__setattr__(self, "quadratic", q)
        object.__setattr__(self, "linear", c)


@dataclass(frozen=True)
class EqualityConstraint:
    """Rows of A x = b."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if a.shape[0] != b.shape[0]:
            raise ValueError("row count of a must equal length of b")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)


def energy(qubo: Qubo, bits) -> float:
    bits = np.asarray(bits, dtype=float)
    if bits.shape != (qubo.n,):
        raise ValueError(f"bitstring length {bits.size} does not match n={qubo.n}")
    return float(qubo.linear @ bits + bits @ qubo.quadratic @ bits + qubo.constant)


def all_energies(qubo: Qubo, chunk: int = 1 << 16) -> np.ndarray:
    """Energies of all 2^n assignments, indexed by basis index (bit i = x_i)."""
    if qubo.n > 24:
        raise CapacityError("enumeration supports at most 24 variables")
    dim = 1 << qubo.n
    out = np.empty(dim)
    shifts = np.arange(qubo.n)
    for start in range(0, dim, chunk):
        idx = np.arange(start, min(start + chunk, dim))
        bits = ((idx[:, None] >> shifts) & 1).astype(float)
        out[start:start + idx.size] = (
            bits @ qubo.linear + np.einsum("ij,jk,ik->i", bits, qubo.quadratic, bits)
            + qubo.constant)
    return out


def bits_of_index(index: int, n: int) -> np.ndarray:
    return (index >> np.arange(n)) & 1


def brute_force(qubo: Qubo) -> tuple[np.ndarray, float]:
    """Global minimizer; ties break to the lowest basis index."""
    energies = all_energies(qubo)
    best = int(np.argmin(energies))
    return bits_of_index(best, qubo.n), float(energies[best])


def energy_spread(qubo: Qubo) -> float:
    """max - min energy over all assignments; a sufficient penalty scale."""
    energies = all_energies(qubo)
    return float(energies.max() - energies.min())


def fold_equality(qubo: Qubo, eq: EqualityConstraint, weight: float) -> Qubo:
    """Add weight * ||A x - b||^2, expanded into quadratic, linear, and constant."""
    if weight <= 0.0:
        raise ValueError("penalty weight must be positive")
    a, b = eq.a, eq.b
    if a.shape[1] != qubo.n:
        raise ValueError("constraint width does not match variable count")
    return Qubo(
        n=qubo.n,
        quadratic=qubo.quadratic + weight * (a.T @ a),
        linear=qubo.linear - 2.0 * weight * (a.T @ b),
        constant=qubo.constant + weight * float(b @ b),
    )


def to_ising(qubo: Qubo) -> IsingObservable:
    """Spin image under x = (1 - s)/2 with s the Z eigenvalue of the qubit.

    The resulting observable's energy on every basis state equals the QUBO
    energy of the corresponding bitstring exactly.
    """
    n = qubo.n
    offset = qubo.constant
    h_lin = np.zeros(n)
    j_quad: dict[tuple[int, int], float] = {}
    for i in range(n):
        c = qubo.linear[i]
        if c != 0.0:
            offset += 0.5 * c
            h_lin[i] -= 0.5 * c
    for i in range(n):
        for j in range(n):
            q = qubo.quadratic[i, j]
            if q == 0.0:
                continue
            offset += 0.25 * q
            h_lin[i] -= 0.25 * q
            h_lin[j] -= 0.25 * q
            if i == j:
                offset += 0.25 * q
            else:
                key = (min(i, j), max(i, j))
                j_quad[key] = j_quad.get(key, 0.0) + 0.25 * q
    terms: list[tuple[tuple[int, ...], float]] = []
    terms.extend(((i,), float(h_lin[i])) for i in range(n) if h_lin[i] != 0.0)
    terms.extend((pair, coeff) for pair, coeff in sorted(j_quad.items()) if coeff != 0.0)
    return IsingObservable(terms=tuple(terms), offset=float(offset))


def _auto_penalty(quadratic: np.ndarray, linear: np.ndarray) -> float:
    """Default penalty weight: twice the unpenalized coefficient l1 mass."""
    mass = float(np.abs(quadratic).sum() + np.abs(linear).sum())
    return 2.0 * mass if mass > 0.0 else 1.0


@dataclass(frozen=True)
class PortfolioSpec:
    """Mean-variance selection: min q x' Sigma x - mu' x subject to 1' x = B."""

    mu: np.ndarray
    sigma: np.ndarray
    q: float
    budget: int
    penalty: float | None = None

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        sigma = np.asarray(self.sigma, dtype=float)
        n = mu.size
        if sigma.shape != (n, n):
            raise ValueError("sigma must be square and match mu")
        if np.max(np.abs(sigma - sigma.T), initial=0.0) > 1e-9:
            raise ValueError("sigma must be symmetric")
        if np.linalg.eigvalsh(sigma).min() < -1e-8:
            raise ValueError("sigma must be positive semidefinite within tolerance")
        if self.q <= 0.0:
            raise ValueError("risk aversion q must be positive")
        if not 0 < self.budget < n:
            raise ValueError("budget must satisfy 0 < B < n")
        if self.penalty is not None and self.penalty <= 0.0:
            raise ValueError("penalty must be positive")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def n(self) -> int:
        return self.mu.size


def build_portfolio_qubo(spec: PortfolioSpec) -> Qubo:
    """Risk-return objective with the budget equality folded as a penalty."""
    quadratic = spec.q * spec.sigma
    linear = -spec.mu
    weight = spec.penalty if spec.penalty is not None else _auto_penalty(quadratic, linear)
    base = Qubo(n=spec.n, quadratic=quadratic, linear=linear)
    eq = EqualityConstraint(a=np.ones((1, spec.n)), b=np.array([float(spec.budget)]))
    return fold_equality(base, eq, weight)


@dataclass(frozen=True)
class FrontierPoint:
    risk: float
    ret: float
    x: np.ndarray


def efficient_frontier(mu, sigma, q_values) -> list[FrontierPoint]:
    """Brute-force optimum of q x'Sigma x - mu'x for each q, without a budget."""
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    points = []
    for q in q_values:
        if q <= 0.0:
            raise ValueError("q values must be positive")
        qubo = Qubo(n=mu.size, quadratic=q * sigma, linear=-mu)
        x_opt, _ = brute_force(qubo)
        points.append(FrontierPoint(risk=float(x_opt @ sigma @ x_opt),
                                    ret=float(mu @ x_opt), x=x_opt))
    return points


@dataclass(frozen=True)
class DiversificationSpec:
    """Select q_clusters representative stocks maximizing intra-cluster similarity."""

    rho: np.ndarray
    q_clusters: int
    penalty: float | None = None

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        n = rho.shape[0]
        if rho.shape != (n, n):
            raise ValueError("rho must be square")
        if np.max(np.abs(rho - rho.T), initial=0.0) > 1e-9:
            raise ValueError("rho must be symmetric")
        if not np.allclose(np.diag(rho), 1.0, atol=1e-9):
            raise ValueError("rho must have unit diagonal")
        if np.any(rho > 1.0 + 1e-9):
            raise ValueError("similarities must not exceed 1")
        if not 1 <= self.q_clusters <= n:
            raise ValueError("q_clusters must lie in [1, n]")
        if self.penalty is not None and self.penalty <= 0.0:
            raise ValueError("penalty must be positive")
        object.__setattr__(self, "rho", rho)

    @property
    def n(self) -> int:
        return self.rho.shape[0]


def diversification_variable_count(n: int) -> int:
    return n * n + n


def build_diversification_qubo(spec: DiversificationSpec) -> Qubo:
    """Negated similarity sum plus penalty families, over x_ij (row-major) then y_j.

    Variable index(x_ij) = i*n + j and index(y_j) = n^2 + j. Penalty families:
    cluster budget (sum_j y_j - q)^2, one representative per row, diagonal
    consistency (x_jj - y_j)^2, and the product x_ij (1 - y_j) added linearly
    since it is already nonnegative on binaries.
    """
    n = spec.n
    n_vars = diversification_variable_count(n)
    rho = spec.rho
    weight = spec.penalty if spec.penalty is not None else _auto_penalty(
        np.zeros((1, 1)), rho.flatten())

    def xi(i: int, j: int) -> int:
        return i * n + j

    def yi(j: int) -> int:
        return n * n + j

    linear = np.zeros(n_vars)
    for i in range(n):
        for j in range(n):
            linear[xi(i, j)] -= rho[i, j]
    base = Qubo(n=n_vars, quadratic=np.zeros((n_vars, n_vars)), linear=linear)

    budget_row = np.zeros((1, n_vars))
    for j in range(n):
        budget_row[0, yi(j)] = 1.0
    base = fold_equality(base, EqualityConstraint(budget_row, np.array([float(spec.q_clusters)])),
                         weight)

    assign_rows = np.zeros((n, n_vars))
    for i in range(n):
        for j in range(n):
            assign_rows[i, xi(i, j)] = 1.0
    base = fold_equality(base, EqualityConstraint(assign_rows, np.ones(n)), weight)

    diag_rows = np.zeros((n, n_vars))
    for j in range(n):
        diag_rows[j, xi(j, j)] = 1.0
        diag_rows[j, yi(j)] = -1.0
    base = fold_equality(base, EqualityConstraint(diag_rows, np.zeros(n)), weight)

    # x_ij (1 - y_j): linear on x_ij minus the product coupling
    quadratic = base.quadratic.copy()
    linear = base.linear.copy()
    for i in range(n):
        for j in range(n):
            linear[xi(i, j)] += weight
            quadratic[xi(i, j), yi(j)] -= 0.5 * weight
            quadratic[yi(j), xi(i, j)] -= 0.5 * weight
    return Qubo(n=n_vars, quadratic=quadratic, linear=linear, constant=base.constant)


@dataclass(frozen=True)
class DiversificationDecode:
    selected: tuple[int, ...]
    assignment: dict[int, int]
    feasible: bool
    violations: tuple[str, ...]


def decode_diversification(bits, q_clusters: int | None = None) -> DiversificationDecode:
    """Recover stock selection and representative map; report violated families."""
    bits = np.asarray(bits, dtype=int)
    n = int((math.isqrt(4 * bits.size + 1) - 1) // 2)
    if n * n + n != bits.size:
        raise ValueError("bitstring length must be n^2 + n")
    x_mat = bits[:n * n].reshape(n, n)
    y_vec = bits[n * n:]
    selected = tuple(int(j) for j in range(n) if y_vec[j])
    assignment: dict[int, int] = {}
    violations = []
    for i in range(n):
        row = np.nonzero(x_mat[i])[0]
        if row.size == 1:
            assignment[i] = int(row[0])
        else:
            violations.append("row-assignment")
    if q_clusters is not None and len(selected) != q_clusters:
        violations.append("budget")
    if q_clusters is None and len(selected) == 0:
        violations.append("budget")
    for j in range(n):
        if x_mat[j, j] != y_vec[j]:
            violations.append("diagonal-consistency")
            break
    if any(x_mat[i, j] and not y_vec[j] for i in range(n) for j in range(n)):
        violations.append("representative-selected")
    violations = tuple(dict.fromkeys(violations))
    return DiversificationDecode(selected=selected, assignment=assignment,
                                 feasible=not violations, violations=violations)


# ---------------------------------------------------------------------------
# file formats


def write_qubo_text(path, qubo: Qubo) -> None:
    """Serialize: first line n, then `const v`, `i v` linear, `i j v` quadratic (i <= j)."""
    lines = [str(qubo.n)]
    if qubo.constant != 0.0:
        lines.append(f"const {float(qubo.constant)!r}")
    for i in range(qubo.n):
        if qubo.linear[i] != 0.0:
            lines.append(f"{i} {float(qubo.linear[i])!r}")
    for i in range(qubo.n):
        for j in range(i, qubo.n):
            coeff = qubo.quadratic[i, j] if i == j else 2.0 * qubo.quadratic[i, j]
            if coeff != 0.0:
                lines.append(f"{i} {j} {float(coeff)!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_qubo_text(path) -> Qubo:
    with open(path) as fh:
        raw = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if not raw:
        raise ValueError("empty QUBO file")
    n = int(raw[0])
    quadratic = np.zeros((n, n))
    linear = np.zeros(n)
    constant = 0.0
    for line_no, line in enumerate(raw[1:], start=2):
        parts = line.split()
        try:
            if parts[0] == "const":
                constant += float(parts[1])
            elif len(parts) == 2:
                linear[int(parts[0])] += float(parts[1])
            elif len(parts) == 3:
                i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
                if i > j:
                    raise ValueError("quadratic entries need i <= j")
                if i == j:
                    quadratic[i, i] += v
                else:
                    quadratic[i, j] += 0.5 * v
                    quadratic[j, i] += 0.5 * v
            else:
                raise ValueError("expected 2 or 3 fields")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"bad QUBO entry at line {line_no}: {exc}") from exc
    return Qubo(n=n, quadratic=quadratic, linear=linear, constant=constant)


def write_portfolio_instance(path, spec: PortfolioSpec) -> None:
    """Labeled-line format: mu row, n sigma rows, q, budget, optional penalty."""
    lines = ["mu," + ",".join(repr(float(v)) for v in spec.mu)]
    for row in spec.sigma:
        lines.append("sigma," + ",".join(repr(float(v)) for v in row))
    lines.append(f"q,{spec.q!r}")
    lines.append(f"budget,{spec.budget}")
    if spec.penalty is not None:
        lines.append(f"penalty,{spec.penalty!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_portfolio_instance(path) -> PortfolioSpec:
    mu = None
    sigma_rows = []
    q = None
    budget = None
    penalty = None
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            label, _, rest = line.partition(",")
            try:
                if label == "mu":
                    mu = np.array([float(v) for v in rest.split(",")])
                elif label == "sigma":
                    sigma_rows.append([float(v) for v in rest.split(",")])
                elif label == "q":
                    q = float(rest)
                elif label == "budget":
                    budget = int(rest)
                elif label == "penalty":
                    penalty = float(rest)
                else:
                    raise ValueError(f"unknown label {label!r}")
            except ValueError as exc:
                raise ValueError(f"bad portfolio instance line {line_no}: {exc}") from exc
    if mu is None or not sigma_rows or q is None or budget is None:
        raise ValueError("portfolio instance needs mu, sigma, q, and budget")
    return PortfolioSpec(mu=mu, sigma=np.array(sigma_rows), q=q, budget=budget,
                         penalty=penalty)


def read_similarity_csv(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append([float(v) for v in line.split(",")])
    matrix = np.array(rows)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("similarity file must hold a square matrix")
    return matrix
