"""Prior families for the two variance components and the correlation.

All priors are evaluated on the internal inference scale

    theta1 = log(1 / sigma_phi^2),  theta2 = log(1 / sigma_psi^2),
    z      = atanh(rho),

with the Jacobian from each family's native scale included. Native scales:
standard deviation for PC / truncated-normal / half-Cauchy / uniform,
variance for inverse-gamma and variance tables, correlation for the
correlation families. The Gaussian correlation prior lives on the
transformed correlation log((1+rho)/(1-rho)) (twice Fisher's z), the scale
on which its (mean, variance) hyperparameters are interpreted.

The penalised-complexity (PC) priors are exponential in the distance
d = sqrt(2 * KLD) from a base model: sigma = 0 for the variances, rho_0 for
the correlation. Correlation calibration turns probability contrasts
(strategies 1-3) into the exponential rate and the left-of-base mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import betaln, gammaln

VARIANCE_FAMILIES = ("pc", "tnormal", "hcauchy", "unif", "invgamma", "table")
CORRELATION_FAMILIES = ("pc", "normal", "beta", "table")

LOG_2PI = math.log(2.0 * math.pi)

# Validity intervals for hyperparameters, shared with the web UI sliders.
PRIOR_BOUNDS = {
    "pc_variance": {"u": [0.0, None], "a": [0.0, 1.0]},
    "pc_correlation": {
        "rho0": [-1.0, 1.0],
        "omega": [0.0, 1.0],
        "u1": [-1.0, 1.0],
        "a1": [0.0, 1.0],
        "u2": [-1.0, 1.0],
        "a2": [0.0, 1.0],
    },
    "normal_correlation": {"mean": [None, None], "variance": [0.0, None]},
}


class PriorError(ValueError):
    """Raised for invalid or infeasible prior specifications."""


# ---------------------------------------------------------------------------
# variance priors


def calibrate_pc_variance(u: float, a: float) -> float:
    """Exponential rate lambda with P(sigma > u) = a, i.e. -log(a)/u."""
    if not u > 0.0:
        raise PriorError(f"PC variance prior needs u > 0, got {u}")
    if not 0.0 < a < 1.0:
        raise PriorError(f"PC variance prior needs 0 < a < 1, got {a}")
    return -math.log(a) / u


def _table_prepare(table, lo: float, hi: float, what: str):
    pts = np.asarray([p for p, _ in table], dtype=float)
    dens = np.asarray([d for _, d in table], dtype=float)
    if pts.size == 0:
        raise PriorError(f"{what} table prior is empty")
    if pts.size == 1:
        return pts, dens  # point mass
    if np.any(np.diff(pts) <= 0):
        raise PriorError(f"{what} table support points must be strictly increasing")
    if np.any(dens < 0):
        raise PriorError(f"{what} table densities must be >= 0")
    if pts[0] < lo or pts[-1] > hi:
        raise PriorError(f"{what} table support must lie within [{lo}, {hi}]")
    mass = np.trapezoid(dens, pts)
    if mass <= 0:
        raise PriorError(f"{what} table prior has zero mass")
    return pts, dens / mass


@dataclass(frozen=True)
class VariancePrior:
    family: str
    params: tuple[float, ...] = ()
    table: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        family = self.family.strip().lower()
        if family not in VARIANCE_FAMILIES:
            raise PriorError(
                f"unknown variance prior {self.family!r}; options: {', '.join(VARIANCE_FAMILIES)}"
            )
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if family == "pc":
            u, a = self._expect(2)
            calibrate_pc_variance(u, a)
        elif family == "tnormal":
            _, v = self._expect(2)
            if v <= 0:
                raise PriorError("truncated normal prior needs variance > 0")
        elif family == "hcauchy":
            (g,) = self._expect(1)
            if g <= 0:
                raise PriorError("half-Cauchy prior needs scale > 0")
        elif family == "unif":
            p = self.params
            lo, hi = (0.0, p[0]) if len(p) == 1 else self._expect(2)
            if not 0 <= lo < hi:
                raise PriorError("uniform sd prior needs 0 <= low < high")
            object.__setattr__(self, "params", (lo, hi))
        elif family == "invgamma":
            a, b = self._expect(2)
            if a <= 0 or b <= 0:
                raise PriorError("inverse gamma prior needs shape > 0 and scale > 0")
        elif family == "table":
            if not self.table:
                raise PriorError("table variance prior needs a (point, density) table")
            pts, dens = _table_prepare(self.table, 0.0, math.inf, "variance")
            object.__setattr__(self, "table", tuple(zip(pts.tolist(), dens.tolist())))

    def _expect(self, k: int) -> tuple[float, ...]:
        if len(self.params) != k:
            raise PriorError(
                f"{self.family} variance prior needs {k} parameter(s), got {len(self.params)}"
            )
        return self.params

    @property
    def native_scale(self) -> str:
        return "variance" if self.family in ("invgamma", "table") else "sd"

    @property
    def point_mass(self) -> float | None:
        """Fixed variance value when the table degenerates to a single point."""
        if self.family == "table" and len(self.table) == 1:
            return self.table[0][0]
        return None

    def native_logdensity(self, x) -> np.ndarray:
        """Log density at native-scale points (sd or variance, see native_scale)."""
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, -np.inf)
        if self.family == "pc":
            lam = calibrate_pc_variance(*self.params)
            ok = x >= 0
            out[ok] = math.log(lam) - lam * x[ok]
        elif self.family == "tnormal":
            m, v = self.params
            s = math.sqrt(v)
            from scipy.special import log_ndtr

            lognorm = log_ndtr(m / s)  # P(N(m,v) > 0)
            ok = x >= 0
            out[ok] = -0.5 * LOG_2PI - math.log(s) - 0.5 * ((x[ok] - m) / s) ** 2 - lognorm
        elif self.family == "hcauchy":
            (g,) = self.params
            ok = x >= 0
            out[ok] = math.log(2.0 / (math.pi * g)) - np.log1p((x[ok] / g) ** 2)
        elif self.family == "unif":
            lo, hi = self.params
            ok = (x >= lo) & (x <= hi)
            out[ok] = -math.log(hi - lo)
        elif self.family == "invgamma":
            a, b = self.params
            ok = x > 0
            out[ok] = a * math.log(b) - gammaln(a) - (a + 1.0) * np.log(x[ok]) - b / x[ok]
        elif self.family == "table":
            pts = np.array([p for p, _ in self.table])
            dens = np.array([d for _, d in self.table])
            if pts.size == 1:
                out[np.isclose(x, pts[0])] = np.inf
            else:
                ok = (x >= pts[0]) & (x <= pts[-1])
                vals = np.interp(x[ok], pts, dens)
                with np.errstate(divide="ignore"):
                    out[ok] = np.log(vals)
        return out

    def internal_logdensity(self, theta) -> np.ndarray:
        """Log density of theta = log(1/sigma^2), Jacobian included."""
        theta = np.asarray(theta, dtype=float)
        if self.native_scale == "sd":
            sd = np.exp(-0.5 * theta)
            return self.native_logdensity(sd) + np.log(0.5 * sd)
        var = np.exp(-theta)
        return self.native_logdensity(var) + np.log(var)


# ---------------------------------------------------------------------------
# correlation priors


def pc_correlation_distance(rho, rho0: float):
    """d(rho; rho0) = sqrt(2 KLD) between unit-variance bivariate Gaussians."""
    rho = np.asarray(rho, dtype=float)
    if not -1.0 < rho0 < 1.0:
        raise PriorError(f"rho0 must lie in (-1, 1), got {rho0}")
    with np.errstate(divide="ignore"):
        kld = (
            (1.0 - rho * rho0) / (1.0 - rho0 * rho0)
            - 1.0
            + 0.5 * (np.log1p(-rho0 * rho0) - np.log1p(-rho * rho))
        )
    return np.sqrt(2.0 * np.maximum(kld, 0.0))


def _pc_distance_deriv(rho, rho0: float):
    """|d'(rho)|, with the analytic limit sqrt(KLD'') at the base model."""
    rho = np.asarray(rho, dtype=float)
    d = pc_correlation_distance(rho, rho0)
    kld_prime = -rho0 / (1.0 - rho0 * rho0) + rho / (1.0 - rho * rho)
    limit = math.sqrt(1.0 + rho0 * rho0) / (1.0 - rho0 * rho0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.abs(kld_prime) / d
    return np.where(d < 1e-8, limit, out)


@dataclass(frozen=True)
class CalibratedCorPrior:
    rho0: float
    omega: float
    lam_left: float
    lam_right: float

    def cdf(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        d = pc_correlation_distance(rho, self.rho0)
        left = self.omega * np.exp(-self.lam_left * d)
        right = self.omega + (1.0 - self.omega) * (1.0 - np.exp(-self.lam_right * d))
        return np.where(rho < self.rho0, left, right)

    def native_logdensity(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            d = pc_correlation_distance(rho, self.rho0)
            dd = _pc_distance_deriv(rho, self.rho0)
            left = math.log(self.omega * self.lam_left) - self.lam_left * d
            right = math.log((1.0 - self.omega) * self.lam_right) - self.lam_right * d
            out = np.where(rho < self.rho0, left, right) + np.log(dd)
        return np.where(np.abs(rho) < 1.0, out, -np.inf)

    def internal_logdensity(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        rho = np.tanh(z)
        # log(1 - tanh^2 z) computed stably as -2*log(cosh z)
        logjac = -2.0 * (np.abs(z) + np.log1p(np.exp(-2.0 * np.abs(z))) - math.log(2.0))
        return self.native_logdensity(rho) + logjac


def _exp_clip(x: float) -> float:
    return math.exp(min(x, 700.0))


def _bisect_lograte(contrast: Callable[[float], float]) -> float:
    """Find lambda with contrast(lambda) = 0; contrast decreasing in lambda."""
    lo, hi = -20.0, 20.0
    flo, fhi = contrast(math.exp(lo)), contrast(math.exp(hi))
    if not (flo > 0.0 > fhi):
        raise PriorError("infeasible contrast: no exponential rate satisfies it")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = contrast(math.exp(mid))
        if abs(fmid) < 1e-10:
            return math.exp(mid)
        if fmid > 0.0:
            lo = mid
        else:
            hi = mid
    return math.exp(0.5 * (lo + hi))


@dataclass(frozen=True)
class CorrelationPrior:
    family: str
    params: tuple[float, ...] = ()
    table: tuple[tuple[float, float], ...] | None = None
    strategy: int | None = None
    rho0: float | None = None
    omega: float | None = None
    u1: float | None = None
    a1: float | None = None
    u2: float | None = None
    a2: float | None = None

    def __post_init__(self):
        family = self.family.strip().lower()
        if family not in CORRELATION_FAMILIES:
            raise PriorError(
                f"unknown correlation prior {self.family!r}; options: {', '.join(CORRELATION_FAMILIES)}"
            )
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if family == "normal":
            if len(self.params) != 2:
                raise PriorError("normal correlation prior needs (mean, variance)")
            if self.params[1] <= 0:
                raise PriorError("normal correlation prior needs variance > 0")
        elif family == "beta":
            if len(self.params) != 2 or min(self.params) <= 0:
                raise PriorError("beta correlation prior needs shape parameters > 0")
        elif family == "table":
            if not self.table:
                raise PriorError("table correlation prior needs a (point, density) table")
            pts, dens = _table_prepare(self.table, -1.0, 1.0, "correlation")
            object.__setattr__(self, "table", tuple(zip(pts.tolist(), dens.tolist())))
        elif family == "pc":
            self._check_pc()

    def _check_pc(self):
        if self.strategy not in (1, 2, 3):
            raise PriorError(f"PC correlation strategy must be 1, 2 or 3, got {self.strategy}")
        if self.rho0 is None or not -1.0 < self.rho0 < 1.0:
            raise PriorError(f"PC correlation prior needs rho0 in (-1, 1), got {self.rho0}")
        need = {1: ("omega", "u1", "a1"), 2: ("omega", "u2", "a2"), 3: ("u1", "a1", "u2", "a2")}
        for field_name in need[self.strategy]:
            if getattr(self, field_name) is None:
                raise PriorError(f"PC correlation strategy {self.strategy} needs {field_name}")
        for prob in ("omega", "a1", "a2"):
            v = getattr(self, prob)
            if v is not None and not 0.0 < v < 1.0:
                raise PriorError(f"PC correlation prior needs 0 < {prob} < 1, got {v}")
        if self.u1 is not None and not -1.0 < self.u1 < self.rho0:
            raise PriorError(f"PC correlation prior needs -1 < u1 < rho0, got u1={self.u1}")
        if self.u2 is not None and not self.rho0 < self.u2 < 1.0:
            raise PriorError(f"PC correlation prior needs rho0 < u2 < 1, got u2={self.u2}")

    @classmethod
    def pc_from_slots(cls, slots) -> "CorrelationPrior":
        """Build a PC prior from the 7-slot layout (strategy, rho0, omega, u1, a1, u2, a2)."""
        vals = [None if s is None or (isinstance(s, float) and math.isnan(s)) else float(s) for s in slots]
        if len(vals) != 7 or vals[0] is None:
            raise PriorError("PC correlation prior needs 7 slots: strategy, rho0, omega, u1, a1, u2, a2")
        return cls(
            family="pc",
            strategy=int(vals[0]),
            rho0=vals[1],
            omega=vals[2],
            u1=vals[3],
            a1=vals[4],
            u2=vals[5],
            a2=vals[6],
        )

    @property
    def point_mass(self) -> float | None:
        if self.family == "table" and len(self.table) == 1:
            return self.table[0][0]
        return None

    def calibrate(self) -> CalibratedCorPrior:
        if self.family != "pc":
            raise PriorError("only PC correlation priors are calibrated")
        rho0 = self.rho0
        if self.strategy == 1:
            d1 = float(pc_correlation_distance(self.u1, rho0))
            omega = self.omega
            if self.a1 >= omega:
                raise PriorError(
                    f"infeasible contrast: strategy 1 needs a1 < omega (a1={self.a1}, omega={omega})"
                )
            lam = _bisect_lograte(lambda lam: omega * math.exp(-lam * d1) - self.a1)
        elif self.strategy == 2:
            d2 = float(pc_correlation_distance(self.u2, rho0))
            omega = self.omega
            if self.a2 >= 1.0 - omega:
                raise PriorError(
                    f"infeasible contrast: strategy 2 needs a2 < 1 - omega (a2={self.a2}, omega={omega})"
                )
            lam = _bisect_lograte(lambda lam: (1.0 - omega) * math.exp(-lam * d2) - self.a2)
        else:
            d1 = float(pc_correlation_distance(self.u1, rho0))
            d2 = float(pc_correlation_distance(self.u2, rho0))
            if self.a1 + self.a2 >= 1.0:
                raise PriorError(
                    f"infeasible contrast: strategy 3 needs a1 + a2 < 1 (got {self.a1 + self.a2})"
                )
            # both tails shrink as lambda grows: a1 e^{lam d1} + a2 e^{lam d2} = 1
            lam = _bisect_lograte(
                lambda lam: 1.0 - self.a1 * _exp_clip(lam * d1) - self.a2 * _exp_clip(lam * d2)
            )
            omega = self.a1 * math.exp(lam * d1)
        if not (math.isfinite(lam) and 1e-8 < lam < 1e8):
            raise PriorError("infeasible contrast: calibrated rate out of range")
        return CalibratedCorPrior(rho0=rho0, omega=omega, lam_left=lam, lam_right=lam)

    def native_logdensity(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        out = np.full(rho.shape, -np.inf)
        inside = np.abs(rho) < 1.0
        if self.family == "pc":
            return self.calibrate().native_logdensity(rho)
        if self.family == "normal":
            m, v = self.params
            t = 2.0 * np.arctanh(rho[inside])  # log((1+rho)/(1-rho))
            out[inside] = (
                -0.5 * LOG_2PI
                - 0.5 * math.log(v)
                - 0.5 * (t - m) ** 2 / v
                + math.log(2.0)
                - np.log1p(-rho[inside] ** 2)
            )
        elif self.family == "beta":
            a, b = self.params
            x = 0.5 * (rho[inside] + 1.0)
            out[inside] = (
                (a - 1.0) * np.log(x)
                + (b - 1.0) * np.log1p(-x)
                - betaln(a, b)
                - math.log(2.0)
            )
        elif self.family == "table":
            pts = np.array([p for p, _ in self.table])
            dens = np.array([d for _, d in self.table])
            if pts.size == 1:
                out[np.isclose(rho, pts[0])] = np.inf
            else:
                ok = (rho >= pts[0]) & (rho <= pts[-1])
                with np.errstate(divide="ignore"):
                    out[ok] = np.log(np.interp(rho[ok], pts, dens))
        return out

    def internal_logdensity(self, z) -> np.ndarray:
        """Log density of z = atanh(rho), Jacobian included for rho-scale families."""
        z = np.asarray(z, dtype=float)
        if self.family == "pc":
            return self.calibrate().internal_logdensity(z)
        if self.family == "normal":
            m, v = self.params
            t = 2.0 * z
            return -0.5 * LOG_2PI - 0.5 * math.log(v) - 0.5 * (t - m) ** 2 / v + math.log(2.0)
        rho = np.tanh(z)
        logjac = -2.0 * (np.abs(z) + np.log1p(np.exp(-2.0 * np.abs(z))) - math.log(2.0))
        return self.native_logdensity(rho) + logjac


# ---------------------------------------------------------------------------
# inverse Wishart on the whole covariance matrix


@dataclass(frozen=True)
class WishartPrior:
    df: float
    r11: float
    r22: float
    r12: float = 0.0

    def __post_init__(self):
        if self.df <= 1.0:
            raise PriorError(f"inverse Wishart prior needs df > 1, got {self.df}")
        if self.r11 <= 0 or self.r22 <= 0 or self.r11 * self.r22 - self.r12**2 <= 0:
            raise PriorError("inverse Wishart scale matrix must be positive definite")

    @property
    def scale(self) -> np.ndarray:
        return np.array([[self.r11, self.r12], [self.r12, self.r22]])


def invwishart_logpdf_2x2(sigma: np.ndarray, df: float, scale: np.ndarray) -> float:
    det_s = sigma[0, 0] * sigma[1, 1] - sigma[0, 1] * sigma[1, 0]
    if det_s <= 0 or sigma[0, 0] <= 0:
        raise PriorError("covariance matrix must be positive definite")
    det_r = scale[0, 0] * scale[1, 1] - scale[0, 1] * scale[1, 0]
    inv_s = np.array([[sigma[1, 1], -sigma[0, 1]], [-sigma[1, 0], sigma[0, 0]]]) / det_s
    tr = scale[0, 0] * inv_s[0, 0] + scale[0, 1] * inv_s[1, 0] + scale[1, 0] * inv_s[0, 1] + scale[1, 1] * inv_s[1, 1]
    log_gamma2 = 0.5 * math.log(math.pi) + gammaln(0.5 * df) + gammaln(0.5 * df - 0.5)
    return (
        0.5 * df * math.log(det_r)
        - df * math.log(2.0)
        - log_gamma2
        - 0.5 * (df + 3.0) * math.log(det_s)
        - 0.5 * tr
    )


def wishart_logdensity(prior: WishartPrior, sigma: np.ndarray) -> float:
    """Inverse-Wishart log density of Sigma plus the (theta1, theta2, z) Jacobian."""
    var1, var2 = sigma[0, 0], sigma[1, 1]
    det = var1 * var2 - sigma[0, 1] * sigma[1, 0]
    if det <= 0 or var1 <= 0 or var2 <= 0:
        raise PriorError("covariance matrix must be positive definite")
    rho2 = sigma[0, 1] * sigma[1, 0] / (var1 * var2)
    base = invwishart_logpdf_2x2(sigma, prior.df, prior.scale)
    # |d Sigma / d(theta1, theta2, z)| = sigma1^3 sigma2^3 (1 - rho^2)
    logjac = 1.5 * math.log(var1) + 1.5 * math.log(var2) + math.log1p(-rho2)
    return base + logjac


def wishart_internal_logdensity(prior: WishartPrior, theta1: float, theta2: float, z: float) -> float:
    var1 = math.exp(-theta1)
    var2 = math.exp(-theta2)
    rho = math.tanh(z)
    cov = rho * math.sqrt(var1 * var2)
    return wishart_logdensity(prior, np.array([[var1, cov], [cov, var2]]))


# ---------------------------------------------------------------------------
# configuration bundle


def tabulate_prior(prior, grid) -> list[tuple[float, float]]:
    """Density table on native-scale grid points, renormalised by trapezoid."""
    grid = np.asarray(list(grid), dtype=float)
    if grid.size == 0:
        raise PriorError("empty grid")
    with np.errstate(over="ignore"):
        dens = np.exp(prior.native_logdensity(grid))
    if not np.all(np.isfinite(dens)):
        raise PriorError("density not finite on the requested grid")
    mass = np.trapezoid(dens, grid)
    if mass <= 0:
        raise PriorError("prior has no mass on the requested grid")
    dens = dens / mass
    return list(zip(grid.tolist(), dens.tolist()))


@dataclass(frozen=True)
class PriorConfig:
    var: VariancePrior
    var2: VariancePrior
    cor: CorrelationPrior
    wishart: WishartPrior | None = None
    fixed_effect_variance: float = 1000.0

    @classmethod
    def default(cls) -> "PriorConfig":
        return cls(
            var=VariancePrior("pc", (3.0, 0.05)),
            var2=VariancePrior("pc", (3.0, 0.05)),
            cor=CorrelationPrior.pc_from_slots([1, -0.1, 0.5, -0.95, 0.05, None, None]),
        )

    def theta_logprior(self) -> Callable[[np.ndarray], float]:
        """Joint internal-scale log prior density over (theta1, theta2, z)."""
        if self.wishart is not None:
            w = self.wishart

            def joint(theta: np.ndarray) -> float:
                return wishart_internal_logdensity(w, theta[0], theta[1], theta[2])

            return joint

        var, var2, cor = self.var, self.var2, self.cor
        cor_eval = cor.calibrate() if cor.family == "pc" else cor

        def separate(theta: np.ndarray) -> float:
            total = 0.0
            if var.point_mass is None:
                total += float(var.internal_logdensity(theta[0]))
            if var2.point_mass is None:
                total += float(var2.internal_logdensity(theta[1]))
            if cor.point_mass is None:
                total += float(cor_eval.internal_logdensity(theta[2]))
            return total

        return separate

    def fixed_theta(self) -> dict[int, float]:
        """Internal-scale values of axes pinned by point-mass table priors."""
        fixed: dict[int, float] = {}
        if self.wishart is not None:
            return fixed
        if self.var.point_mass is not None:
            fixed[0] = -math.log(self.var.point_mass)
        if self.var2.point_mass is not None:
            fixed[1] = -math.log(self.var2.point_mass)
        if self.cor.point_mass is not None:
            fixed[2] = math.atanh(self.cor.point_mass)
        return fixed

    def to_json_dict(self) -> dict:
        doc: dict = {}
        if self.wishart is not None:
            w = self.wishart
            doc["wishart.par"] = [w.df, w.r11, w.r22, w.r12]
            return doc
        for key, p in (("var", self.var), ("var2", self.var2)):
            doc[f"{key}.prior"] = p.family.upper() if p.family == "pc" else p.family.capitalize()
            doc[f"{key}.par"] = (
                [[pt, de] for pt, de in p.table] if p.family == "table" else list(p.params)
            )
        c = self.cor
        doc["cor.prior"] = c.family.upper() if c.family == "pc" else c.family.capitalize()
        if c.family == "pc":
            doc["cor.par"] = [c.strategy, c.rho0, c.omega, c.u1, c.a1, c.u2, c.a2]
        elif c.family == "table":
            doc["cor.par"] = [[pt, de] for pt, de in c.table]
        else:
            doc["cor.par"] = list(c.params)
        return doc


def _as_table(par) -> tuple[tuple[float, float], ...]:
    rows = []
    for row in par:
        if not isinstance(row, (list, tuple)) or len(row) != 2:
            raise PriorError("table priors need [point, density] rows")
        rows.append((float(row[0]), float(row[1])))
    return tuple(rows)


def variance_prior_from_config(family: str, par) -> VariancePrior:
    family = str(family).strip().lower()
    if family == "table":
        return VariancePrior("table", (), _as_table(par))
    return VariancePrior(family, tuple(float(p) for p in par))


def correlation_prior_from_config(family: str, par) -> CorrelationPrior:
    family = str(family).strip().lower()
    if family == "pc":
        return CorrelationPrior.pc_from_slots(list(par))
    if family == "table":
        return CorrelationPrior("table", (), _as_table(par))
    return CorrelationPrior(family, tuple(float(p) for p in par))


def prior_config_from_json(doc: dict) -> PriorConfig:
    """Build a PriorConfig from the CLI-flag-shaped JSON layout."""
    fams = [str(doc.get(k, "")).strip().lower() for k in ("var.prior", "var2.prior", "cor.prior")]
    if "invwishart" in fams or "wishart.par" in doc:
        par = doc.get("wishart.par")
        if not par or len(par) < 3:
            raise PriorError("inverse Wishart prior needs wishart.par = [df, r11, r22, r12]")
        vals = [float(p) for p in par]
        r12 = vals[3] if len(vals) > 3 else 0.0
        return PriorConfig(
            var=VariancePrior("pc", (3.0, 0.05)),
            var2=VariancePrior("pc", (3.0, 0.05)),
            cor=CorrelationPrior("normal", (0.0, 5.0)),
            wishart=WishartPrior(vals[0], vals[1], vals[2], r12),
        )
    default = PriorConfig.default()
    var = (
        variance_prior_from_config(doc["var.prior"], doc.get("var.par", ()))
        if "var.prior" in doc
        else default.var
    )
    var2 = (
        variance_prior_from_config(doc["var2.prior"], doc.get("var2.par", ()))
        if "var2.prior" in doc
        else default.var2
    )
    cor = (
        correlation_prior_from_config(doc["cor.prior"], doc.get("cor.par", ()))
        if "cor.prior" in doc
        else default.cor
    )
    fev = float(doc.get("fixed.effect.variance", 1000.0))
    return PriorConfig(var=var, var2=var2, cor=cor, fixed_effect_variance=fev)
