"""Model boundary-value operator and its biorthogonal eigensystem.

The model operator is -i d/dx on (0, 1) with the boundary condition
f(1) = h f(0), h > 0.  Its eigenfunctions u_j(x) = c h^x e^{2 pi i j x}
(eigenvalue 2 pi j - i ln h) together with the adjoint family
v_j(x) = c^{-1} h^{-x} e^{2 pi i j x} form an exactly biorthogonal pair:
<u_j, v_k> = delta_{jk} for every h and every c.  For h = 1 both families
collapse to the classical Fourier basis.

Everything downstream (transforms, symbol calculus, diagnostics) is built
on a truncated symmetric frequency window |j| <= J and a uniform spatial
grid x_k = k/N_x.  The grid is oversampled (N_x > 4J + 2) so that every
trigonometric-polynomial pairing used internally is integrated exactly by
the uniform rule.  Pairings of two u-family members involve the weight
h^{2x}, which is *not* a trigonometric polynomial; those inner products
are provided in closed form through the Gram matrices below.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

TWO_PI = 2.0 * math.pi


class GeometryError(ValueError):
    """Raised when window/grid parameters are inconsistent."""


@dataclass(frozen=True)
class ModelSpec:
    """Parameters of the model boundary condition f(1) = h f(0).

    h = 1 is the degenerate self-adjoint (periodic) case.  When
    ``normalize_u`` is set the u-family is scaled to unit L2 norm and the
    v-family is compensated so the biorthogonal pairing stays exact.
    """

    h: float = 2.0
    normalize_u: bool = False
    operator_order: int = 1

    def __post_init__(self):
        if not (self.h > 0.0):
            raise ValueError(f"boundary parameter h must be positive, got {self.h}")
        if self.operator_order != 1:
            raise ValueError("only the first-order model operator is supported")

    @property
    def log_h(self) -> float:
        return math.log(self.h)

    @cached_property
    def c(self) -> float:
        """Scaling of the u-family (1 unless normalize_u is set)."""
        if not self.normalize_u or self.h == 1.0:
            return 1.0
        # ||h^x||_{L2}^2 = (h^2 - 1) / (2 ln h)
        return ((self.h**2 - 1.0) / (2.0 * self.log_h)) ** -0.5


@dataclass(frozen=True)
class FrequencyWindow:
    """Symmetric integer frequency window {j : |j| <= J}."""

    J: int

    def __post_init__(self):
        if self.J < 1:
            raise ValueError("window radius J must be >= 1")

    @property
    def size(self) -> int:
        return 2 * self.J + 1

    @cached_property
    def indices(self) -> np.ndarray:
        return np.arange(-self.J, self.J + 1)

    def position(self, j: int) -> int:
        if abs(j) > self.J:
            raise GeometryError(f"index {j} outside window |j| <= {self.J}")
        return j + self.J


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform grid x_k = k/N_x on [0, 1)."""

    n_x: int

    def __post_init__(self):
        if self.n_x < 8:
            raise ValueError("grid needs at least 8 nodes")

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n_x) / self.n_x

    @property
    def spacing(self) -> float:
        return 1.0 / self.n_x


def eigenvalue(spec: ModelSpec, j: int | np.ndarray) -> complex | np.ndarray:
    """lambda_j = 2 pi j - i ln h."""
    return TWO_PI * np.asarray(j, dtype=float) - 1j * spec.log_h


def bracket(spec: ModelSpec, j: int | np.ndarray) -> float | np.ndarray:
    """Weight <j> = (1 + |lambda_j|^2)^(1/2) for the first-order model."""
    lam = eigenvalue(spec, j)
    return np.sqrt(1.0 + np.abs(lam) ** 2)


def eval_u(spec: ModelSpec, j: int, x: float | np.ndarray) -> complex | np.ndarray:
    x = np.asarray(x, dtype=float)
    return spec.c * spec.h**x * np.exp(2j * math.pi * j * x)


def eval_v(spec: ModelSpec, j: int, x: float | np.ndarray) -> complex | np.ndarray:
    x = np.asarray(x, dtype=float)
    return (1.0 / spec.c) * spec.h ** (-x) * np.exp(2j * math.pi * j * x)


class ModelSystem:
    """Eigensystem of the model operator on a concrete window/grid geometry.

    Caches the sampled eigenfunction tables and the closed-form Gram
    matrices of both families.  All exact inner products on the window
    span go through :meth:`gram_u` / :meth:`gram_v`.
    """

    def __init__(self, spec: ModelSpec, window: FrequencyWindow, grid: SpatialGrid):
        if grid.n_x <= 4 * window.J + 2:
            raise GeometryError(
                f"N_x = {grid.n_x} too small for J = {window.J}; need N_x > 4J + 2"
            )
        self.spec = spec
        self.window = window
        self.grid = grid

    # -- eigendata ---------------------------------------------------------

    @cached_property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    @cached_property
    def lambdas(self) -> np.ndarray:
        return eigenvalue(self.spec, self.window.indices)

    @cached_property
    def brackets(self) -> np.ndarray:
        return bracket(self.spec, self.window.indices)

    @cached_property
    def u_table(self) -> np.ndarray:
        """u_j(x_k), shape (N_x, 2J+1)."""
        phase = np.exp(2j * math.pi * np.outer(self.x, self.window.indices))
        return (self.spec.c * self.spec.h**self.x)[:, None] * phase

    @cached_property
    def v_table(self) -> np.ndarray:
        """v_j(x_k), shape (N_x, 2J+1)."""
        phase = np.exp(2j * math.pi * np.outer(self.x, self.window.indices))
        return (self.spec.h ** (-self.x) / self.spec.c)[:, None] * phase

    # -- exact Gram matrices -------------------------------------------------

    def _exp_integral(self, a: float, r: np.ndarray) -> np.ndarray:
        """Exact integral of e^{a x} e^{2 pi i r x} over [0, 1], integer r."""
        r = np.asarray(r)
        if a == 0.0:
            return (r == 0).astype(complex)
        return (math.exp(a) - 1.0) / (a + 2j * math.pi * r)

    @cached_property
    def gram_u(self) -> np.ndarray:
        """A[k, j] = <u_j, u_k>; Hermitian positive definite Toeplitz."""
        idx = self.window.indices
        r = idx[None, :] - idx[:, None]  # j - k
        return self.spec.c**2 * self._exp_integral(2.0 * self.spec.log_h, r)

    @cached_property
    def gram_v(self) -> np.ndarray:
        """A[k, j] = <v_j, v_k>."""
        idx = self.window.indices
        r = idx[None, :] - idx[:, None]
        return self._exp_integral(-2.0 * self.spec.log_h, r) / self.spec.c**2

    @cached_property
    def cholesky_u(self) -> np.ndarray:
        """Lower factor L with gram_u = L L^H (identity when h = 1)."""
        return np.linalg.cholesky(self.gram_u)

    # -- diagnostics ---------------------------------------------------------

    def biorthogonality_defect(self) -> float:
        """max |<u_j, v_k> - delta_{jk}| under the uniform-grid rule."""
        pair = (self.v_table.conj().T @ self.u_table) / self.grid.n_x
        return float(np.max(np.abs(pair - np.eye(self.window.size))))

    def eigendata_rows(self) -> list[tuple[int, float, float, float]]:
        return [
            (int(j), float(lam.real), float(lam.imag), float(br))
            for j, lam, br in zip(self.window.indices, self.lambdas, self.brackets)
        ]

    def export_eigendata_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["j", "re_lambda", "im_lambda", "bracket"])
            writer.writerows(self.eigendata_rows())


def verify_eigenpair(system: ModelSystem, j: int) -> float:
    """Relative sup-norm residual of -i u_j' - lambda_j u_j.

    The periodic factor e^{2 pi i j x} is differentiated spectrally on the
    grid; the h^x factor contributes its exact logarithmic derivative.
    """
    spec, grid = system.spec, system.grid
    x = system.x
    p = np.exp(2j * math.pi * j * x)
    freqs = np.fft.fftfreq(grid.n_x, d=1.0 / grid.n_x)  # integer frequencies
    dp = np.fft.ifft(np.fft.fft(p) * (2j * math.pi * freqs))
    uj = eval_u(spec, j, x)
    du = spec.log_h * uj + spec.c * spec.h**x * dp
    lam = eigenvalue(spec, j)
    residual = -1j * du - lam * uj
    return float(np.max(np.abs(residual)) / np.max(np.abs(uj)))


@dataclass(frozen=True)
class WZReport:
    """Grid infima of |u_j|, |v_j| and the fitted decay exponent N."""

    inf_u: np.ndarray
    inf_v: np.ndarray
    exponent: float
    constant: float

    @property
    def verdict(self) -> bool:
        return bool(np.all(self.inf_u > 0) and np.all(self.inf_v > 0))


def wz_check(system: ModelSystem) -> WZReport:
    """Check the nowhere-zero property with polynomially controlled infima.

    For this model |u_j| and |v_j| do not depend on j, so the fitted
    exponent in inf >= C <j>^{-N} is zero.
    """
    inf_u = np.min(np.abs(system.u_table), axis=0)
    inf_v = np.min(np.abs(system.v_table), axis=0)
    log_br = np.log(system.brackets)
    log_inf = np.log(np.minimum(inf_u, inf_v))
    slope, intercept = np.polyfit(log_br, log_inf, 1)
    return WZReport(
        inf_u=inf_u,
        inf_v=inf_v,
        exponent=float(-slope),
        constant=float(math.exp(intercept)),
    )


def make_system(
    h: float = 2.0,
    J: int = 64,
    n_x: int = 512,
    normalize_u: bool = False,
) -> ModelSystem:
    """Convenience constructor used by the CLI and tests."""
    return ModelSystem(
        ModelSpec(h=h, normalize_u=normalize_u),
        FrequencyWindow(J),
        SpatialGrid(n_x),
    )
