"""Quantization, symbol recovery, composition/adjoint expansions, parametrix.

An operator acts on a grid function through its symbol as
T f(x) = sum_j sigma(x, j) f_hat(j) u_j(x); the dense coefficient-space
matrix of that action has column xi equal to the forward transform of
x -> sigma(x, xi) u_xi(x).  Composition and adjoint are realized as
truncated asymptotic expansions in the difference and Taylor-derivative
operators; truncation shrinks the frequency window, so residual quality
is always measured on interior modes.

The parametrix recursion follows the left-composition convention
sigma_{BA} ~ sum (1/gamma!) (Delta^gamma sigma_B)(D^(gamma) sigma_A):
each correction term cancels the next order of the residual, with no
extra phase factor, which keeps the x-independent (multiplier) case
exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .model import GeometryError, ModelSystem
from .symbols import (
    SymbolGrid,
    d_derivative,
    delta_backward,
    delta_forward,
    m_ellipticity_check,
)
from .transform import (
    KIND_L,
    KIND_LSTAR,
    CoefficientVector,
    GridFunction,
    coeff_norm,
    forward_L,
    forward_Lstar,
)


class EllipticityError(ValueError):
    """Parametrix construction requires a verified elliptic symbol."""


class DivisionGuardError(ValueError):
    """Symbol recovery hit a vanishing eigenfunction value."""


# -- quantization ----------------------------------------------------------------


def _check_geometry(sym: SymbolGrid, f: GridFunction) -> None:
    if sym.system is not f.system and (
        sym.system.grid.n_x != f.system.grid.n_x
        or sym.system.window.J != f.system.window.J
    ):
        raise GeometryError("symbol and function live on different geometries")


def quantize_apply(sym: SymbolGrid, f: GridFunction) -> GridFunction:
    """(T_sigma f)(x) = sum_j sigma(x, j) f_hat(j) u_j(x) over the symbol window."""
    _check_geometry(sym, f)
    system = f.system
    a = forward_L(f)
    cols = [system.window.position(int(j)) for j in sym.indices]
    u_cols = system.u_table[:, cols]
    vals = (sym.values * u_cols) @ a.values[cols]
    return GridFunction(vals, system)


def quantize_apply_star(sym: SymbolGrid, f: GridFunction) -> GridFunction:
    """Star quantization: sum_j tau(x, j) f_hat_*(j) v_j(x)."""
    _check_geometry(sym, f)
    system = f.system
    a = forward_Lstar(f)
    cols = [system.window.position(int(j)) for j in sym.indices]
    v_cols = system.v_table[:, cols]
    vals = (sym.values * v_cols) @ a.values[cols]
    return GridFunction(vals, system)


# -- dense coefficient-space representation ---------------------------------------


@dataclass
class OperatorMatrix:
    """Dense action on L-coefficient vectors.

    Rows run over the full model window (output coefficients); columns
    over the symbol's own window (input modes outside it are dropped, as
    in the truncated quantization).
    """

    values: np.ndarray
    col_indices: np.ndarray
    system: ModelSystem

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        self.col_indices = np.asarray(self.col_indices, dtype=int)
        expected = (self.system.window.size, self.col_indices.size)
        if self.values.shape != expected:
            raise GeometryError(f"matrix shape {self.values.shape} != {expected}")

    @property
    def is_square(self) -> bool:
        return self.values.shape[0] == self.values.shape[1]

    def matvec(self, a: np.ndarray) -> np.ndarray:
        """Apply to a full-window coefficient array."""
        cols = [self.system.window.position(int(j)) for j in self.col_indices]
        return self.values @ np.asarray(a, dtype=complex)[cols]

    def column_block(self, indices: Sequence[int]) -> np.ndarray:
        pos = [int(j) - int(self.col_indices[0]) for j in indices]
        return self.values[:, pos]

    def l2_frame(self) -> np.ndarray:
        """Representation in an L2-orthonormal basis: L^H M L^{-H}.

        Requires a square (full-window) matrix; for h = 1 the Cholesky
        factor is the identity and this is a no-op.
        """
        if not self.is_square:
            raise GeometryError("L2 frame needs the full-window square matrix")
        L = self.system.cholesky_u
        return L.conj().T @ np.linalg.solve(L.conj().T, self.values.T).T

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.l2_frame(), compute_uv=False)

    def export_npy(self, path) -> None:
        np.save(path, self.values)

    def export_csv(self, path) -> None:
        import csv as _csv

        with open(path, "w", newline="") as fh:
            writer = _csv.writer(fh)
            header = ["eta"]
            for j in self.col_indices:
                header += [f"re_{j}", f"im_{j}"]
            writer.writerow(header)
            for eta, row in zip(self.system.window.indices, self.values):
                out = [int(eta)]
                for z in row:
                    out += [repr(float(z.real)), repr(float(z.imag))]
                writer.writerow(out)


def assemble_matrix(sym: SymbolGrid) -> OperatorMatrix:
    """Column xi = forward transform of sigma(., xi) u_xi(.).

    The u-weight cancels against the transform weight, leaving a plain
    DFT of sigma(x, xi) e^{2 pi i xi x} per column.
    """
    system = sym.system
    x = system.x
    phases = np.exp(2j * math.pi * np.outer(x, sym.indices))
    full = np.fft.fft(sym.values * phases, axis=0) / system.grid.n_x
    rows = system.window.indices % system.grid.n_x
    return OperatorMatrix(full[rows, :], sym.indices, system)


def symbol_from_operator(
    apply_fn: Callable[[GridFunction], GridFunction],
    system: ModelSystem,
    weight,
    order: float = 0.0,
    rho: float = 1.0,
    tag: str = "recovered",
) -> SymbolGrid:
    """Recover sigma(x, j) = (A u_j)(x) / u_j(x) column by column.

    Well defined because the eigenfunctions of this model never vanish; a
    guard trips on |u_j(x)| < 1e-14, which signals an operator foreign to
    the system rather than a property of the model.
    """
    guard = np.min(np.abs(system.u_table))
    if guard < 1e-14:
        raise DivisionGuardError(f"eigenfunction magnitude {guard} below guard")
    columns = []
    for pos in range(system.window.size):
        u_j = GridFunction(system.u_table[:, pos], system)
        columns.append(apply_fn(u_j).values / u_j.values)
    return SymbolGrid(
        values=np.stack(columns, axis=1),
        indices=system.window.indices,
        order=order,
        rho=rho,
        weight=weight,
        system=system,
        tag=tag,
    )


# -- window alignment helpers ------------------------------------------------------


def _common_window(*syms: SymbolGrid) -> tuple[int, int]:
    lo = max(int(s.indices[0]) for s in syms)
    hi = min(int(s.indices[-1]) for s in syms)
    if lo > hi:
        raise GeometryError("symbol windows do not overlap")
    return lo, hi


def _on_window(sym: SymbolGrid, lo: int, hi: int) -> np.ndarray:
    a = lo - int(sym.indices[0])
    b = hi - int(sym.indices[0]) + 1
    return sym.values[:, a:b]


# -- composition and adjoint --------------------------------------------------------


def compose_symbols(sym_a: SymbolGrid, sym_b: SymbolGrid, n_terms: int) -> SymbolGrid:
    """Truncated composition sum_{alpha < N} (1/alpha!) (Delta^alpha a)(D^(alpha) b).

    Exact (single term, any N) when b is x-independent, since D^(alpha) b
    vanishes for alpha >= 1.  The result window loses N-1 indices at the
    upper edge.
    """
    if n_terms < 1:
        raise ValueError("need at least one expansion term")
    if sym_a.weight.label != sym_b.weight.label:
        raise ValueError("operands use different weight functions")
    shrink = n_terms - 1
    if sym_a.n_j <= shrink:
        raise GeometryError("window too small for the requested expansion order")
    lo, hi = _common_window(delta_forward(sym_a, shrink) if shrink else sym_a, sym_b)
    acc = None
    for alpha in range(n_terms):
        da = delta_forward(sym_a, alpha) if alpha else sym_a
        db = d_derivative(sym_b, alpha) if alpha else sym_b
        term = _on_window(da, lo, hi) * _on_window(db, lo, hi) / math.factorial(alpha)
        acc = term if acc is None else acc + term
    return SymbolGrid(
        values=acc,
        indices=np.arange(lo, hi + 1),
        order=sym_a.order + sym_b.order,
        rho=min(sym_a.rho, sym_b.rho),
        weight=sym_a.weight,
        system=sym_a.system,
        tag=f"compose({sym_a.tag}, {sym_b.tag}, N={n_terms})",
    )


def adjoint_symbol(sym: SymbolGrid, n_terms: int) -> SymbolGrid:
    """Star-symbol of the adjoint: sum (1/alpha!) Delta~^alpha D~^(alpha) conj(sigma).

    Both operators are the conjugate-admissible variants: the difference
    acts downward in frequency (shrinking the lower window edge) and the
    Taylor operators carry (-2 pi i) coefficients.  With this pairing the
    expansion reproduces the exact shift structure of the model adjoint;
    x-independent symbols terminate at the first term.
    """
    if n_terms < 1:
        raise ValueError("need at least one expansion term")
    shrink = n_terms - 1
    if sym.n_j <= shrink:
        raise GeometryError("window too small for the requested expansion order")
    conj = replace(sym, values=np.conj(sym.values))
    lo, hi = int(sym.indices[0]) + shrink, int(sym.indices[-1])
    acc = None
    for alpha in range(n_terms):
        term_sym = d_derivative(conj, alpha, conjugate=True) if alpha else conj
        term_sym = delta_backward(term_sym, alpha) if alpha else term_sym
        term = _on_window(term_sym, lo, hi) / math.factorial(alpha)
        acc = term if acc is None else acc + term
    return SymbolGrid(
        values=acc,
        indices=np.arange(lo, hi + 1),
        order=sym.order,
        rho=sym.rho,
        weight=sym.weight,
        system=sym.system,
        tag=f"adjoint({sym.tag}, N={n_terms})",
        kind=KIND_LSTAR,
    )


# -- asymptotic sums -----------------------------------------------------------------


def smoothstep(t: np.ndarray) -> np.ndarray:
    """C^1 ramp: 0 for t <= 0, 1 for t >= 1, 3t^2 - 2t^3 between."""
    s = np.clip(t, 0.0, 1.0)
    return s * s * (3.0 - 2.0 * s)


def excision_cutoff(t: np.ndarray) -> np.ndarray:
    """chi: 0 for |t| <= 1/2, 1 for |t| >= 1, C^1 polynomial between."""
    return smoothstep(2.0 * np.abs(t) - 1.0)


def asymptotic_sum(
    terms: Sequence[SymbolGrid], epsilons: Sequence[float] | None = None
) -> SymbolGrid:
    """sum_j chi(eps_j Lambda(.)) sigma_j for strictly decreasing orders.

    The excision argument is the weight value (the size function of the
    calculus, bounded below by 1 for the built-ins) rather than the bare
    index: chi(eps j) would excise the zero mode for every eps.  The
    default schedule eps_j = 2^{-j} leaves the leading term untouched and
    pushes each correction's support outward by an octave.
    """
    terms = list(terms)
    if not terms:
        raise ValueError("empty term list")
    orders = [t.order for t in terms]
    if any(b >= a for a, b in zip(orders, orders[1:])):
        raise ValueError(f"orders must be strictly decreasing, got {orders}")
    if epsilons is None:
        epsilons = [2.0 ** (-j) for j in range(len(terms))]
    if len(epsilons) != len(terms):
        raise ValueError("need one cutoff scale per term")
    lo, hi = _common_window(*terms)
    idx = np.arange(lo, hi + 1)
    lam = terms[0].weight(idx)
    acc = np.zeros((terms[0].system.grid.n_x, idx.size), dtype=complex)
    for eps, term in zip(epsilons, terms):
        chi = excision_cutoff(eps * lam)
        acc += chi[None, :] * _on_window(term, lo, hi)
    return SymbolGrid(
        values=acc,
        indices=idx,
        order=terms[0].order,
        rho=min(t.rho for t in terms),
        weight=terms[0].weight,
        system=terms[0].system,
        tag=f"asymptotic_sum({len(terms)} terms)",
    )


# -- parametrix -----------------------------------------------------------------------


@dataclass
class ParametrixResult:
    terms: list[SymbolGrid]
    sigma_b: SymbolGrid
    cutoff_radius: int
    n_terms: int
    ellipticity_c: float
    mode_residuals: dict[int, float] = field(default_factory=dict)
    clear_band: tuple[int, int] = (0, 0)
    max_mode_residual: float = math.nan
    edge_max_residual: float = math.nan
    residual_symbol_sup: float = math.nan

    def to_dict(self) -> dict:
        return {
            "cutoff_radius": self.cutoff_radius,
            "n_terms": self.n_terms,
            "ellipticity_c": self.ellipticity_c,
            "term_orders": [t.order for t in self.terms],
            "clear_band": list(self.clear_band),
            "max_mode_residual": self.max_mode_residual,
            "edge_max_residual": self.edge_max_residual,
            "residual_symbol_sup": self.residual_symbol_sup,
            "mode_residuals": {str(k): v for k, v in sorted(self.mode_residuals.items())},
        }


def radial_cutoff(indices: np.ndarray, R: int) -> np.ndarray:
    """psi: 0 for |j| <= R, 1 for |j| >= 2R, C^1 in between; all ones for R = 0."""
    if R == 0:
        return np.ones(indices.size)
    return smoothstep((np.abs(indices.astype(float)) - R) / R)


def parametrix(
    sym: SymbolGrid,
    n_terms: int = 3,
    R: int = 8,
    ellipticity_threshold: float = 1e-6,
    measure_residual: bool = True,
    clear_margin: int = 6,
) -> ParametrixResult:
    """Approximate-inverse symbol for an elliptic operator.

    sigma_0 = psi(j) / sigma with psi flat outside |j| >= 2R, then
    sigma_l = -(sum_{gamma + k = l, k < l} (1/gamma!)
               (Delta^gamma sigma_k)(D^(gamma) sigma)) sigma_0,
    combined by :func:`asymptotic_sum`.  For x-independent symbols every
    correction vanishes and the composition is exact where psi = 1.

    With R = 0 the excision is dropped entirely (global reciprocal);
    allowed only when |sigma| is bounded away from zero on the whole
    window, as happens for shifted positive symbols.
    """
    check = m_ellipticity_check(sym, R=max(R, 0), threshold=ellipticity_threshold) \
        if R > 0 else None
    if R > 0 and not check.verdict:
        raise EllipticityError(
            f"ellipticity constant {check.c_est:.3e} below threshold on |j| >= {R}"
        )
    if R == 0:
        floor = float(np.min(np.abs(sym.values)))
        if floor <= ellipticity_threshold:
            raise EllipticityError(
                f"global reciprocal needs |sigma| > {ellipticity_threshold}, min {floor:.3e}"
            )
        c_est = floor
    else:
        c_est = check.c_est
    if 2 * R > int(sym.indices[-1]):
        raise GeometryError("window does not reach the psi plateau |j| >= 2R")

    psi = radial_cutoff(sym.indices, R)
    safe = np.where(psi[None, :] > 0.0, sym.values, 1.0)
    sigma0_vals = np.where(psi[None, :] > 0.0, psi[None, :] / safe, 0.0)
    sigma0 = replace(
        sym, values=sigma0_vals, order=-sym.order, tag=f"parametrix0({sym.tag})"
    )
    terms = [sigma0]
    for ell in range(1, n_terms):
        lo = int(sym.indices[0])
        hi = int(sym.indices[-1]) - ell
        acc = np.zeros((sym.system.grid.n_x, hi - lo + 1), dtype=complex)
        for gamma in range(1, ell + 1):
            k = ell - gamma
            d_sig = delta_forward(terms[k], gamma)
            d_op = d_derivative(sym, gamma)
            acc += (
                _on_window(d_sig, lo, hi)
                * _on_window(d_op, lo, hi)
                / math.factorial(gamma)
            )
        vals = -acc * _on_window(sigma0, lo, hi)
        terms.append(
            SymbolGrid(
                values=vals,
                indices=np.arange(lo, hi + 1),
                order=-sym.order - sym.rho * ell,
                rho=sym.rho,
                weight=sym.weight,
                system=sym.system,
                tag=f"parametrix{ell}({sym.tag})",
            )
        )
    sigma_b = asymptotic_sum(terms)
    result = ParametrixResult(
        terms=terms,
        sigma_b=sigma_b,
        cutoff_radius=R,
        n_terms=n_terms,
        ellipticity_c=c_est,
    )
    if measure_residual:
        _measure_parametrix_residual(result, sym, clear_margin)
    return result


def _measure_parametrix_residual(
    result: ParametrixResult, sym: SymbolGrid, clear_margin: int = 6
) -> None:
    """Per-mode relative residuals of B T_sigma - I on the plateau modes.

    Residuals are recorded for every mode 2R <= |j| <= J/2.  Modes within
    ``clear_margin`` of the psi-ramp see cutoff leakage through the
    operator's frequency spreading and the reach of the difference
    operators; that leakage does not shrink with the expansion order, so
    the summary ``max_mode_residual`` (the asymptotic-quality signal) is
    taken over the clear band [2R + clear_margin, J/2] only, while
    ``edge_max_residual`` covers the full recorded band.
    """
    system = sym.system
    J = system.window.J
    R = result.cutoff_radius
    b_mat = assemble_matrix(result.sigma_b)
    m_mat = assemble_matrix(sym)
    residuals: dict[int, float] = {}
    for j in range(-J, J + 1):
        if abs(j) < max(2 * R, 1) or abs(j) > J // 2:
            continue
        e = np.zeros(system.window.size, dtype=complex)
        e[system.window.position(j)] = 1.0
        tu = m_mat.matvec(e)
        btu = b_mat.matvec(tu)
        diff = btu - e
        residuals[j] = coeff_norm(system, diff) / coeff_norm(system, e)
    result.mode_residuals = residuals
    lo_clear = max(2 * R, 1) + clear_margin
    result.clear_band = (lo_clear, J // 2)
    clear = [v for j, v in residuals.items() if abs(j) >= lo_clear]
    result.max_mode_residual = max(clear) if clear else math.nan
    result.edge_max_residual = max(residuals.values()) if residuals else math.nan
    # symbol-level residual: truncated composition of sigma_b with sigma vs 1
    try:
        comp = compose_symbols(result.sigma_b, sym, result.n_terms)
        mask = (np.abs(comp.indices) >= lo_clear) & (np.abs(comp.indices) <= J // 2)
        if np.any(mask):
            result.residual_symbol_sup = float(
                np.max(np.abs(comp.values[:, mask] - 1.0))
            )
    except GeometryError:
        pass


# -- convenience -----------------------------------------------------------------------


def unit_coefficient(system: ModelSystem, j: int, kind: str = KIND_L) -> CoefficientVector:
    values = np.zeros(system.window.size, dtype=complex)
    values[system.window.position(j)] = 1.0
    return CoefficientVector(values, kind, system)
