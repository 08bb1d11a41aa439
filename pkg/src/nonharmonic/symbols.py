"""Symbols on grid x window: storage, difference/derivative operators, classes.

A symbol is a complex table sigma(x_k, j) over the spatial grid and a
contiguous range of integer frequencies, carrying its claimed order m,
the parameter rho, and a weight function.  Frequency-side difference
operators shrink the index range (no padding or extrapolation); the
spatial Taylor-derivative operators D^(beta) are triangular combinations
of plain x-derivatives whose coefficient matrix is the inverse of
[(2 pi i)^beta S(beta, alpha)] with S the Stirling numbers of the second
kind, i.e. signed first-kind Stirling numbers over powers of (2 pi i).

Class membership (bounded seminorm ratios with a non-growing tail) is a
numerical verdict, not a proof; reports always carry the raw ratio
tables.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .model import GeometryError, ModelSystem
from .weights import WeightFunction

# -- spatial profiles (trigonometric polynomials, exactly band-limited) --------

SPATIAL_PROFILES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "one": lambda x: np.ones_like(x),
    "sin": lambda x: np.sin(2 * math.pi * x),
    "cos": lambda x: np.cos(2 * math.pi * x),
    "two_plus_sin": lambda x: 2.0 + np.sin(2 * math.pi * x),
    "two_plus_cos": lambda x: 2.0 + np.cos(2 * math.pi * x),
}


def spatial_profile(name: str) -> Callable[[np.ndarray], np.ndarray]:
    try:
        return SPATIAL_PROFILES[name]
    except KeyError:
        raise ValueError(
            f"unknown spatial profile {name!r}; choices: {sorted(SPATIAL_PROFILES)}"
        ) from None


@dataclass
class SymbolGrid:
    """sigma(x_k, j) with class metadata.

    ``indices`` is a contiguous ascending integer range; it may be a
    sub-range of the model window after difference operators have been
    applied.  ``kind`` records whether the symbol quantizes against the
    u-family ("L") or the v-family ("Lstar").
    """

    values: np.ndarray
    indices: np.ndarray
    order: float
    rho: float
    weight: WeightFunction
    system: ModelSystem
    tag: str = ""
    kind: str = "L"
    family: "SymbolFamilySpec | None" = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        self.indices = np.asarray(self.indices, dtype=int)
        if self.values.shape != (self.system.grid.n_x, self.indices.size):
            raise GeometryError(
                f"symbol shape {self.values.shape} does not match grid x window "
                f"({self.system.grid.n_x}, {self.indices.size})"
            )
        if self.indices.size > 1 and not np.all(np.diff(self.indices) == 1):
            raise GeometryError("symbol window must be a contiguous index range")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("symbol contains non-finite entries")
        if not (0.0 < self.rho <= 1.0 / self.weight.mu):
            raise ValueError(f"rho must lie in (0, {1.0 / self.weight.mu}]")

    @property
    def n_j(self) -> int:
        return int(self.indices.size)

    def lambda_values(self) -> np.ndarray:
        return self.weight(self.indices)

    def column(self, j: int) -> np.ndarray:
        pos = int(j) - int(self.indices[0])
        if pos < 0 or pos >= self.n_j:
            raise GeometryError(f"index {j} outside symbol window")
        return self.values[:, pos]

    def restrict(self, lo: int, hi: int) -> "SymbolGrid":
        """Restrict to indices lo..hi (inclusive)."""
        if lo < self.indices[0] or hi > self.indices[-1] or lo > hi:
            raise GeometryError("restriction outside the symbol window")
        a = lo - int(self.indices[0])
        b = hi - int(self.indices[0]) + 1
        return replace(self, values=self.values[:, a:b], indices=self.indices[a:b])

    def with_system(self, system: ModelSystem) -> "SymbolGrid":
        """Rebind to another system sharing the grid (window must cover)."""
        if system.grid.n_x != self.system.grid.n_x:
            raise GeometryError("systems differ in spatial grid")
        if self.indices[0] < -system.window.J or self.indices[-1] > system.window.J:
            raise GeometryError("symbol window exceeds the target system window")
        return replace(self, system=system)

    def sup_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def export_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            header = ["x"]
            for j in self.indices:
                header += [f"re_{j}", f"im_{j}"]
            writer.writerow(header)
            for k, x in enumerate(self.system.x):
                row = [repr(float(x))]
                for z in self.values[k]:
                    row += [repr(float(z.real)), repr(float(z.imag))]
                writer.writerow(row)


def load_symbol_csv(
    path, system: ModelSystem, weight: WeightFunction, order: float, rho: float = 1.0
) -> SymbolGrid:
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        js = [int(name.split("_", 1)[1]) for name in header[1::2]]
        rows = [[complex(float(r), float(i)) for r, i in zip(row[1::2], row[2::2])]
                for row in reader]
    values = np.array(rows, dtype=complex)
    return SymbolGrid(
        values=values,
        indices=np.array(js),
        order=order,
        rho=rho,
        weight=weight,
        system=system,
        tag=f"csv({path})",
        family=SymbolFamilySpec("csv", m=order, rho=rho, csv_path=str(path)),
    )


# -- built-in symbol families ---------------------------------------------------


@dataclass(frozen=True)
class SymbolFamilySpec:
    """Catalogue entry: a named analytic family plus its parameters."""

    family: str
    m: float = 0.0
    profile: str = "one"
    shift: float = 0.0
    rho: float = 1.0
    csv_path: str | None = None


def build_symbol(
    spec: SymbolFamilySpec,
    system: ModelSystem,
    weight: WeightFunction,
    indices: np.ndarray | None = None,
) -> SymbolGrid:
    """Evaluate a built-in family on the given (or full) window."""
    idx = system.window.indices if indices is None else np.asarray(indices, dtype=int)
    x = system.x
    lam = weight(idx)
    if spec.family == "multiplier_power":
        values = np.broadcast_to(lam**spec.m, (x.size, idx.size)).astype(complex)
        order = spec.m
    elif spec.family == "separable":
        g = spatial_profile(spec.profile)(x)
        values = np.outer(g, lam**spec.m).astype(complex)
        order = spec.m
    elif spec.family == "elliptic_demo":
        g = 2.0 + np.sin(2 * math.pi * x)
        values = np.outer(g, lam**spec.m).astype(complex)
        order = spec.m
    elif spec.family == "shifted":
        g = spatial_profile(spec.profile)(x)
        values = spec.shift + np.outer(g, lam**-1.0).astype(complex)
        order = 0.0 if spec.shift != 0.0 else -1.0
    elif spec.family == "csv":
        return load_symbol_csv(spec.csv_path, system, weight, spec.m, spec.rho)
    else:
        raise ValueError(f"unknown symbol family {spec.family!r}")
    tag = f"{spec.family}(m={spec.m}, profile={spec.profile}, shift={spec.shift})"
    return SymbolGrid(
        values=np.ascontiguousarray(values),
        indices=idx,
        order=order,
        rho=spec.rho,
        weight=weight,
        system=system,
        tag=tag,
        family=spec,
    )


def multiplier_power(system, weight, m: float, indices=None) -> SymbolGrid:
    return build_symbol(SymbolFamilySpec("multiplier_power", m=m), system, weight, indices)


def elliptic_demo(system, weight, m: float, indices=None) -> SymbolGrid:
    return build_symbol(SymbolFamilySpec("elliptic_demo", m=m), system, weight, indices)


def separable(system, weight, profile: str, m: float, indices=None) -> SymbolGrid:
    return build_symbol(
        SymbolFamilySpec("separable", m=m, profile=profile), system, weight, indices
    )


def shifted(system, weight, profile: str, c: float, indices=None) -> SymbolGrid:
    return build_symbol(
        SymbolFamilySpec("shifted", profile=profile, shift=c), system, weight, indices
    )


def catalogue(system: ModelSystem, weight: WeightFunction) -> dict[str, SymbolGrid]:
    """The demo symbols exercised by the verification battery."""
    return {
        "identity": multiplier_power(system, weight, 0.0),
        "multiplier_2": multiplier_power(system, weight, 2.0),
        "multiplier_minus_1": multiplier_power(system, weight, -1.0),
        "elliptic_demo_0": elliptic_demo(system, weight, 0.0),
        "elliptic_demo_1": elliptic_demo(system, weight, 1.0),
        "elliptic_demo_2": elliptic_demo(system, weight, 2.0),
        "separable_cos_1": separable(system, weight, "cos", 1.0),
        "shifted_cos_half": shifted(system, weight, "cos", 0.5),
    }


def from_values(
    values, system, weight, order: float, rho: float = 1.0, tag: str = "", kind: str = "L"
) -> SymbolGrid:
    return SymbolGrid(
        values=values,
        indices=system.window.indices,
        order=order,
        rho=rho,
        weight=weight,
        system=system,
        tag=tag,
        kind=kind,
    )


# -- frequency-side difference operators ----------------------------------------


def delta_forward(sym: SymbolGrid, alpha: int) -> SymbolGrid:
    """alpha-fold forward difference sigma(x, j+1) - sigma(x, j).

    The admissible function q(x, y) = e^{2 pi i (y - x)} - 1 of the model
    reduces the kernel-integral difference exactly to this index
    difference (cross-checked by :func:`delta_kernel_oracle`).  The window
    shrinks by alpha at the upper edge.
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if sym.n_j <= alpha:
        raise GeometryError(f"window of size {sym.n_j} too small for {alpha} differences")
    values = sym.values
    for _ in range(alpha):
        values = values[:, 1:] - values[:, :-1]
    return replace(
        sym,
        values=values,
        indices=sym.indices[: sym.n_j - alpha],
        order=sym.order - sym.rho * alpha,
    )


def delta_backward(sym: SymbolGrid, alpha: int) -> SymbolGrid:
    """Conjugate-admissible difference sigma(x, j-1) - sigma(x, j).

    Arises from q~ = conj(q); shrinks the window at the lower edge.  Used
    by the adjoint expansion.
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if sym.n_j <= alpha:
        raise GeometryError(f"window of size {sym.n_j} too small for {alpha} differences")
    values = sym.values
    for _ in range(alpha):
        values = values[:, :-1] - values[:, 1:]
    return replace(
        sym,
        values=values,
        indices=sym.indices[alpha:],
        order=sym.order - sym.rho * alpha,
    )


def delta_kernel_oracle(sym: SymbolGrid, alpha: int, x_positions) -> np.ndarray:
    """Difference operator via the Schwartz-kernel quadrature.

    Reconstructs K(x, y) = sum_eta u_eta(x) sigma(x, eta) conj(v_eta(y))
    from the stored columns and integrates q^alpha(x, y) K(x, y) u_xi(y)
    over the grid.  Returns values of shape (len(x_positions), n_j - alpha)
    on the forward-shrunken window.  O(N_x * n_j) per point: use a small
    x subset.
    """
    system = sym.system
    x_positions = np.asarray(x_positions, dtype=int)
    n_x = system.grid.n_x
    y = system.x
    xs = y[x_positions]
    win = system.window
    cols = [win.position(int(j)) for j in sym.indices]
    U_s = system.u_table[x_positions][:, cols]  # u_eta(x_s)
    V = system.v_table[:, cols]  # v_eta(y)
    # truncated kernel on the symbol's own window
    K = (U_s * sym.values[x_positions]) @ V.conj().T  # (n_s, N_x)
    q = np.exp(2j * math.pi * (y[None, :] - xs[:, None])) - 1.0
    out_idx = sym.indices[: sym.n_j - alpha]
    out_cols = [win.position(int(j)) for j in out_idx]
    U_out_y = system.u_table[:, out_cols]  # u_xi(y)
    U_out_x = system.u_table[x_positions][:, out_cols]  # u_xi(x_s)
    integ = (q**alpha * K) @ U_out_y / n_x  # (n_s, n_out)
    return integ / U_out_x


# -- Taylor-derivative operators -------------------------------------------------


def stirling2_matrix(n: int) -> np.ndarray:
    """S(b, a), second kind, 0 <= a, b <= n (exact integers)."""
    S = np.zeros((n + 1, n + 1), dtype=object)
    S[0, 0] = 1
    for b in range(1, n + 1):
        for a in range(1, b + 1):
            S[b, a] = a * S[b - 1, a] + S[b - 1, a - 1]
    return S


def stirling1_signed_matrix(n: int) -> np.ndarray:
    """s(b, a), signed first kind: sum_a s(b, a) x^a = x (x-1) ... (x-b+1)."""
    s = np.zeros((n + 1, n + 1), dtype=object)
    s[0, 0] = 1
    for b in range(1, n + 1):
        for a in range(1, b + 1):
            s[b, a] = s[b - 1, a - 1] - (b - 1) * s[b - 1, a]
    return s


def taylor_matrix(beta_max: int, conjugate: bool = False) -> np.ndarray:
    """Lower-triangular M[b, a] = t^b S(b, a), t = +-2 pi i.

    Expresses plain x-derivatives of periodic functions through the
    admissible-function Taylor operators: d^b = sum_a M[b, a] D^(a).
    """
    t = -2j * math.pi if conjugate else 2j * math.pi
    S = stirling2_matrix(beta_max).astype(complex)
    powers = np.cumprod(np.concatenate([[1.0 + 0j], np.full(beta_max, t)]))
    return powers[:, None] * S


def taylor_inverse_matrix(beta_max: int, conjugate: bool = False) -> np.ndarray:
    """Closed-form inverse of :func:`taylor_matrix`: s(b, a) t^{-a}."""
    t = -2j * math.pi if conjugate else 2j * math.pi
    s1 = stirling1_signed_matrix(beta_max).astype(complex)
    powers = np.cumprod(np.concatenate([[1.0 + 0j], np.full(beta_max, 1.0 / t)]))
    return s1 * powers[None, :]


def spectral_x_derivative(values: np.ndarray, order: int) -> np.ndarray:
    """order-th x-derivative along axis 0, spectral (periodic data).

    Fourier modes below a relative roundoff threshold are zeroed before the
    frequency multiplier is applied; otherwise differentiating a symbol of
    amplitude A leaks noise of size eps * A * (pi N_x)^order into rows that
    are exactly zero in exact arithmetic.
    """
    if order == 0:
        return values
    n_x = values.shape[0]
    freqs = np.fft.fftfreq(n_x, d=1.0 / n_x)
    mult = (2j * math.pi * freqs) ** order
    spec = np.fft.fft(values, axis=0)
    floor = 32.0 * np.finfo(float).eps * np.max(np.abs(spec), axis=0, initial=0.0)
    spec[np.abs(spec) < floor[None, :]] = 0.0
    return np.fft.ifft(spec * mult[:, None], axis=0)


def _fd_weights(offsets: np.ndarray, order: int) -> np.ndarray:
    """Finite-difference weights for the given stencil offsets (Fornberg-style
    via a Vandermonde solve; stencils here are small)."""
    n = offsets.size
    A = np.vander(offsets, n, increasing=True).T.astype(float)
    b = np.zeros(n)
    b[order] = math.factorial(order)
    return np.linalg.solve(A, b)


def finite_difference_x_derivative(values: np.ndarray, order: int) -> np.ndarray:
    """6th-order central first derivative iterated ``order`` times.

    Boundary rows use one-sided 7-point stencils.  Intended for CSV
    symbols that lack a periodic analytic generator.
    """
    out = np.asarray(values, dtype=complex)
    n_x = out.shape[0]
    if n_x < 8:
        raise GeometryError("grid too small for 6th-order stencils")
    h = 1.0 / n_x
    central = _fd_weights(np.arange(-3, 4), 1) / h
    for _ in range(order):
        nxt = np.empty_like(out)
        for k in range(n_x):
            if 3 <= k <= n_x - 4:
                offs = np.arange(-3, 4)
                w = central
            else:
                base = max(0, min(k - 3, n_x - 7))
                offs = np.arange(base - k, base - k + 7)
                w = _fd_weights(offs, 1) / h
            nxt[k] = w @ out[k + offs]
        out = nxt
    return out


def d_derivative(
    sym: SymbolGrid,
    beta: int,
    conjugate: bool = False,
    mode: str = "spectral",
) -> SymbolGrid:
    """Taylor-derivative operator D^(beta) in x.

    D^(0) is the identity and D^(1) = (2 pi i)^{-1} d/dx; higher orders
    follow from triangular inversion of the Stirling system.  ``conjugate``
    selects the adjoint-side operators built from conj(q).  ``mode`` is
    "spectral" for periodic (built-in) symbols or "fd" for tabulated ones.
    """
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if beta == 0:
        return replace(sym, values=sym.values.copy())
    if mode not in ("spectral", "fd"):
        raise ValueError("mode must be 'spectral' or 'fd'")
    if mode == "spectral" and sym.family is not None and sym.family.family == "csv":
        raise ValueError(
            "tabulated symbol is not known to be periodic in x; "
            "request finite-difference mode explicitly (mode='fd')"
        )
    deriv = spectral_x_derivative if mode == "spectral" else finite_difference_x_derivative
    minv = taylor_inverse_matrix(beta, conjugate=conjugate)
    out = np.zeros_like(sym.values)
    for gamma in range(beta + 1):
        coeff = minv[beta, gamma]
        if coeff != 0:
            out += coeff * deriv(sym.values, gamma)
    return replace(sym, values=out)


# -- seminorms and class membership ----------------------------------------------


@dataclass(frozen=True)
class SeminormRow:
    alpha: int
    beta: int
    gamma: int
    sup_ratio: float
    tail_slope: float
    per_index_max: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class SeminormReport:
    """Ratio table |j^gamma Delta^{alpha+gamma} D^(beta) sigma| / Lambda^{m - rho alpha}."""

    order: float
    rho: float
    rows: list[SeminormRow]
    effective_window: tuple[int, int]
    slope_tolerance: float
    member_S: bool
    member_M: bool

    def row(self, alpha: int, beta: int, gamma: int) -> SeminormRow:
        for r in self.rows:
            if (r.alpha, r.beta, r.gamma) == (alpha, beta, gamma):
                return r
        raise KeyError((alpha, beta, gamma))

    def to_dict(self, include_tables: bool = True) -> dict:
        rows = []
        for r in self.rows:
            entry = {
                "alpha": r.alpha,
                "beta": r.beta,
                "gamma": r.gamma,
                "sup_ratio": r.sup_ratio,
                "tail_slope": r.tail_slope,
            }
            if include_tables and r.per_index_max is not None:
                entry["per_index_max"] = [float(v) for v in r.per_index_max]
            rows.append(entry)
        return {
            "order": self.order,
            "rho": self.rho,
            "effective_window": list(self.effective_window),
            "slope_tolerance": self.slope_tolerance,
            "member_S": self.member_S,
            "member_M": self.member_M,
            "rows": rows,
        }


def _tail_slope(indices: np.ndarray, per_index_max: np.ndarray, lam: np.ndarray) -> float:
    """Slope of log(ratio) against log(Lambda) over the outer half-window."""
    mask = np.abs(indices) >= max(np.max(np.abs(indices)) // 2, 1)
    vals = per_index_max[mask]
    if np.all(vals < 1e-14):
        return 0.0
    lv = np.log(np.maximum(vals, 1e-300))
    ll = np.log(lam[mask])
    slope = np.polyfit(ll, lv, 1)[0]
    return float(slope)


def seminorm_estimate(
    sym: SymbolGrid,
    alpha_max: int = 3,
    beta_max: int = 2,
    gammas: tuple[int, ...] = (0, 1),
    slope_tolerance: float = 0.15,
    noise_floor: float = 1e-4,
    derivative_mode: str = "spectral",
) -> SeminormReport:
    """Scan the class-defining seminorm ratios and fit their frequency trend.

    Membership in the plain class needs the gamma = 0 rows bounded with a
    non-growing tail; the weighted class additionally requires the
    gamma = 1 rows.  Rows whose supremum sits below ``noise_floor`` are
    treated as numerically zero (difference cancellation leaves roundoff
    that would otherwise fit a spurious growing trend).  Verdicts are
    numerical (bounded suprema, tail slope below tolerance), never proofs.
    """
    max_shrink = alpha_max + max(gammas)
    if sym.n_j <= max_shrink:
        raise GeometryError("window too small for the requested differences")
    rows = []
    for beta in range(beta_max + 1):
        dsym = d_derivative(sym, beta, mode=derivative_mode)
        for alpha in range(alpha_max + 1):
            for gamma in gammas:
                diff = delta_forward(dsym, alpha + gamma)
                idx = diff.indices
                lam = sym.weight(idx)
                denom = lam ** (sym.order - sym.rho * alpha)
                numer = np.abs(idx, dtype=float)[None, :] ** gamma * np.abs(diff.values)
                ratio = numer / denom[None, :]
                per_index = np.max(ratio, axis=0)
                sup = float(np.max(per_index))
                slope = 0.0 if sup < noise_floor else _tail_slope(idx, per_index, lam)
                rows.append(
                    SeminormRow(
                        alpha=alpha,
                        beta=beta,
                        gamma=gamma,
                        sup_ratio=sup,
                        tail_slope=slope,
                        per_index_max=per_index,
                    )
                )
    finite = all(np.isfinite(r.sup_ratio) for r in rows)
    ok_S = finite and all(
        r.tail_slope <= slope_tolerance for r in rows if r.gamma == 0
    )
    ok_M = finite and all(r.tail_slope <= slope_tolerance for r in rows)
    effective = (int(sym.indices[0]), int(sym.indices[-1] - max_shrink))
    return SeminormReport(
        order=sym.order,
        rho=sym.rho,
        rows=rows,
        effective_window=effective,
        slope_tolerance=slope_tolerance,
        member_S=bool(ok_S),
        member_M=bool(ok_M),
    )


@dataclass(frozen=True)
class EllipticityReport:
    c_est: float
    verdict: bool
    cutoff: int
    order: float
    argmin: tuple[float, int]

    def to_dict(self) -> dict:
        return {
            "c_est": self.c_est,
            "verdict": self.verdict,
            "cutoff": self.cutoff,
            "order": self.order,
            "argmin": {"x": self.argmin[0], "j": self.argmin[1]},
        }


def m_ellipticity_check(
    sym: SymbolGrid, R: int, threshold: float = 1e-6
) -> EllipticityReport:
    """min |sigma| / Lambda^m over the shell |j| >= R."""
    shell = np.abs(sym.indices) >= R
    if not np.any(shell):
        raise GeometryError(f"cutoff R = {R} leaves an empty shell")
    lam = sym.lambda_values()[shell]
    ratios = np.abs(sym.values[:, shell]) / lam[None, :] ** sym.order
    k, p = np.unravel_index(np.argmin(ratios), ratios.shape)
    c_est = float(ratios[k, p])
    return EllipticityReport(
        c_est=c_est,
        verdict=bool(c_est > threshold),
        cutoff=R,
        order=sym.order,
        argmin=(float(sym.system.x[k]), int(sym.indices[shell][p])),
    )


@dataclass(frozen=True)
class HypoellipticityReport:
    c1_fit: float
    c2_fit: float
    domination: dict
    verdict: bool
    cutoff: int
    orders: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "c1_fit": self.c1_fit,
            "c2_fit": self.c2_fit,
            "domination": {str(k): v for k, v in self.domination.items()},
            "verdict": self.verdict,
            "cutoff": self.cutoff,
            "orders": list(self.orders),
        }


def hypoellipticity_check(
    sym: SymbolGrid,
    m: float,
    ell: float,
    R: int,
    alpha_max: int = 2,
    beta_max: int = 2,
    lower_threshold: float = 1e-6,
    domination_cap: float = 100.0,
    derivative_mode: str = "spectral",
) -> HypoellipticityReport:
    """Two-sided shell bounds plus derivative domination by |sigma| itself.

    c1 = min |sigma| / Lambda^ell and c2 = max |sigma| / Lambda^m over the
    shell; for each (alpha, beta, gamma) != 0 the table holds
    sup |j^gamma Delta^{alpha+gamma} D^(beta) sigma| / (|sigma| Lambda^{-rho alpha}).
    """
    if ell > m:
        raise ValueError("need ell <= m")
    shell_full = np.abs(sym.indices) >= R
    if not np.any(shell_full):
        raise GeometryError(f"cutoff R = {R} leaves an empty shell")
    lam_full = sym.lambda_values()
    abs_sigma = np.abs(sym.values)
    c1 = float(np.min(abs_sigma[:, shell_full] / lam_full[shell_full] ** ell))
    c2 = float(np.max(abs_sigma[:, shell_full] / lam_full[shell_full] ** m))
    domination: dict[tuple[int, int, int], float] = {}
    tiny = 1e-300
    for beta in range(beta_max + 1):
        dsym = d_derivative(sym, beta, mode=derivative_mode)
        for alpha in range(alpha_max + 1):
            for gamma in (0, 1):
                if alpha + beta + gamma == 0:
                    continue
                diff = delta_forward(dsym, alpha + gamma)
                idx = diff.indices
                keep = np.abs(idx) >= R
                if not np.any(keep):
                    continue
                lam = sym.weight(idx[keep])
                numer = np.abs(idx[keep], dtype=float)[None, :] ** gamma * np.abs(
                    diff.values[:, keep]
                )
                pos = [int(j) - int(sym.indices[0]) for j in idx[keep]]
                denom = np.maximum(abs_sigma[:, pos], tiny) * lam[None, :] ** (
                    -sym.rho * alpha
                )
                domination[(alpha, beta, gamma)] = float(np.max(numer / denom))
    dom_ok = all(np.isfinite(v) and v <= domination_cap for v in domination.values())
    verdict = bool(c1 > lower_threshold and np.isfinite(c2) and dom_ok)
    return HypoellipticityReport(
        c1_fit=c1,
        c2_fit=c2,
        domination=domination,
        verdict=verdict,
        cutoff=R,
        orders=(m, ell),
    )
