"""Least-squares extraction of BIC-mode and Purcell-profile parameters.

The optimizer is a bounded Levenberg-Marquardt loop (damped Gauss-Newton
with central-difference Jacobians) seeded from a coarse grid, because the
Bessel envelope makes the (beta, k_res) landscape multimodal. Residuals
are weighted uniformly.
"""
from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .cdos import BicMode, oscillation
from .errors import DomainError, IngestError

UNIT_SCALE = {"m": 1.0, "nm": 1e-9, "um": 1e-6, "µm": 1e-6, "μm": 1e-6, "micron": 1e-6}


@dataclass(frozen=True)
class SampleSeries:
    """Abscissae in m, ordinates in units of the free-space rate."""

    x: tuple
    y: tuple
    label: str = ""

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise DomainError("x and y must be 1-D sequences of equal length")
        if x.size < 2:
            raise DomainError("a series needs at least 2 points")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DomainError("series contains non-finite values")
        if np.any(np.diff(x) <= 0):
            i = int(np.nonzero(np.diff(x) <= 0)[0][0]) + 1
            raise DomainError(f"x must be strictly increasing (point {i})")
        object.__setattr__(self, "x", tuple(x.tolist()))
        object.__setattr__(self, "y", tuple(y.tolist()))

    def __len__(self):
        return len(self.x)

    def arrays(self):
        return np.asarray(self.x), np.asarray(self.y)

    def restrict(self, x_min):
        x, y = self.arrays()
        keep = x >= x_min * (1 - 1e-12)
        return x[keep], y[keep]


@dataclass
class FitResult:
    params: dict
    residual_rms: float
    n_points: int
    converged: bool
    covariance_diag: dict
    iterations: int = 0
    message: str = ""
    cost_history: list = field(default_factory=list, repr=False)

    def to_json(self):
        return json.dumps(
            {
                "params": self.params,
                "residual_rms": self.residual_rms,
                "n_points": self.n_points,
                "converged": self.converged,
                "covariance_diag": self.covariance_diag,
                "iterations": self.iterations,
                "message": self.message,
            },
            indent=2,
            sort_keys=True,
        )


@dataclass
class _LMOutcome:
    p: np.ndarray
    cost: float
    jac: np.ndarray
    grad_norm: float
    converged: bool
    iterations: int
    message: str
    history: list


def _jacobian(fun, p, lo, hi, scale, r0):
    jac = np.empty((r0.size, p.size))
    for j in range(p.size):
        h = 1e-6 * scale[j]
        up = p.copy()
        dn = p.copy()
        up[j] = min(p[j] + h, hi[j])
        dn[j] = max(p[j] - h, lo[j])
        jac[:, j] = (fun(up) - fun(dn)) / (up[j] - dn[j])
    return jac


def _projected_gradient(g, p, lo, hi):
    g = g.copy()
    # at a bound, a gradient pushing outward is not a descent direction
    g[(p <= lo) & (g > 0)] = 0.0
    g[(p >= hi) & (g < 0)] = 0.0
    return g


def levenberg_marquardt(fun, p0, lo, hi, scale, max_iter=200, ftol=1e-15, xtol=1e-13, gtol=1e-9):
    """Minimize 0.5*|fun(p)|^2 within the box [lo, hi].

    Steps are projected onto the box and accepted only when they lower the
    cost, so the recorded cost history is non-increasing. ``gtol`` applies
    to the projected gradient in ``scale``-normalized coordinates.
    """
    p = np.clip(np.asarray(p0, dtype=float), lo, hi)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    scale = np.asarray(scale, dtype=float)
    r = fun(p)
    cost = 0.5 * float(r @ r)
    history = [cost]
    lam = 1e-3
    jac = _jacobian(fun, p, lo, hi, scale, r)
    message = "maximum iterations reached"
    it = 0
    for it in range(1, max_iter + 1):
        g = jac.T @ r
        gs = _projected_gradient(g, p, lo, hi) * scale
        if np.max(np.abs(gs)) <= gtol * max(1.0, math.sqrt(2.0 * cost)):
            message = "gradient below tolerance"
            break
        a = jac.T @ jac
        diag = np.maximum(np.diag(a), 1e-30)
        accepted = False
        while lam < 1e16:
            try:
                step = np.linalg.solve(a + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            p_new = np.clip(p + step, lo, hi)
            r_new = fun(p_new)
            cost_new = 0.5 * float(r_new @ r_new)
            if cost_new < cost:
                accepted = True
                break
            lam *= 4.0
        if not accepted:
            message = "no cost-reducing step"
            break
        dx = np.max(np.abs((p_new - p) / scale))
        dcost = cost - cost_new
        p, r, cost = p_new, r_new, cost_new
        history.append(cost)
        lam = max(lam / 3.0, 1e-12)
        jac = _jacobian(fun, p, lo, hi, scale, r)
        if dx < xtol or dcost <= ftol * max(cost, 1e-300):
            message = "step below tolerance"
            break
    g = _projected_gradient(jac.T @ r, p, lo, hi) * scale
    gnorm = float(np.max(np.abs(g)))
    converged = gnorm <= 1e3 * gtol * max(1.0, math.sqrt(2.0 * cost))
    return _LMOutcome(p, cost, jac, gnorm, converged, it, message, history)


def _covariance_diag(jac, cost, n, names):
    dof = max(n - jac.shape[1], 1)
    s2 = 2.0 * cost / dof
    try:
        cov = np.linalg.inv(jac.T @ jac) * s2
        d = np.diag(cov)
    except np.linalg.LinAlgError:
        d = np.full(jac.shape[1], math.inf)
    return {k: float(v) for k, v in zip(names, d)}


def _identifiable(jac, scale):
    js = jac * scale
    norms = np.linalg.norm(js, axis=0)
    if np.any(norms <= 1e-10 * max(np.max(norms), 1e-300)):
        return False
    sv = np.linalg.svd(js / norms, compute_uv=False)
    return sv[-1] > 1e-8 * sv[0]


def cdos_model(d, beta, k_res, mode: BicMode):
    """Normalized collective rate gamma12 / gamma11 for given (beta, k_res)."""
    return beta * kernels.j0_array(k_res * np.abs(np.asarray(d, dtype=float))) * oscillation(d, mode)


def fit_cdos(data: SampleSeries, mode_template: BicMode, d_min=None, gamma11=None, grid=50, max_iter=200):
    """Fit (beta, k_res) of the single-mode model to a collective-rate line cut.

    ``data.y`` is gamma12 in the units of ``gamma11``, which defaults to the
    template's Purcell factor (rates in units of the free-space rate).
    Only points with d >= d_min enter; the default is the model's
    validity distance (5a for ED, 2a for MD).
    """
    if d_min is None:
        d_min = mode_template.validity_distance
    gamma11 = mode_template.purcell if gamma11 is None else float(gamma11)
    if not gamma11 > 0:
        raise DomainError("gamma11 must be positive")
    d, y = data.restrict(d_min)
    if d.size < 3:
        raise DomainError(f"need at least 3 points with d >= d_min, got {d.size}")
    y = y / gamma11
    osc = oscillation(d, mode_template)
    k_hi = 0.1 * 2.0 * math.pi / mode_template.a

    def resid(p):
        return p[0] * kernels.j0_array(p[1] * d) * osc - y

    betas = np.linspace(0.0, 1.0, grid)
    ks = np.linspace(0.0, k_hi, grid)
    env = kernels.j0_array(np.multiply.outer(ks, d)) * osc
    costs = np.sum((betas[:, None, None] * env[None, :, :] - y) ** 2, axis=-1)
    ib, ik = np.unravel_index(int(np.argmin(costs)), costs.shape)
    lo = np.array([0.0, 0.0])
    hi = np.array([1.0, k_hi])
    scale = np.array([1.0, k_hi])
    out = levenberg_marquardt(resid, [betas[ib], ks[ik]], lo, hi, scale, max_iter=max_iter)
    names = ("beta", "k_res")
    ok = out.converged and _identifiable(out.jac, scale)
    msg = out.message if ok or not out.converged else "parameters not identifiable from the data"
    return FitResult(
        params={"beta": float(out.p[0]), "k_res": float(out.p[1])},
        residual_rms=math.sqrt(2.0 * out.cost / d.size),
        n_points=int(d.size),
        converged=bool(ok),
        covariance_diag=_covariance_diag(out.jac, out.cost, d.size, names),
        iterations=out.iterations,
        message=msg,
        cost_history=out.history,
    )


def purcell_profile(z, A, B, a, r_sphere):
    """1 + A exp(-B (z - R) / a)."""
    return 1.0 + A * np.exp(-B * (np.asarray(z, dtype=float) - r_sphere) / a)


def fit_purcell(data: SampleSeries, a, r_sphere, max_iter=200):
    """Fit 1 + A exp(-B (z - R)/a) to a Purcell-factor height profile."""
    z, y = data.arrays()
    if np.any(z <= r_sphere):
        raise DomainError("all heights must lie above the sphere top (z > r_sphere)")
    if z.size < 3:
        raise DomainError("need at least 3 points")
    u = (z - r_sphere) / a
    excess = y - 1.0

    def resid(p):
        return p[0] * np.exp(-p[1] * u) - excess

    # Seed: for each B on a log grid the best A is a linear projection.
    best = None
    for b in np.geomspace(1e-2, 1e3, 200):
        e = np.exp(-b * u)
        den = float(e @ e)
        A = max(float(e @ excess) / den, 0.0) if den > 0 else 0.0
        c = float(np.sum((A * e - excess) ** 2))
        if best is None or c < best[0]:
            best = (c, A, b)
    _, A0, B0 = best
    a_scale = max(abs(A0), float(np.max(np.abs(excess))), 1.0)
    lo = np.array([0.0, 0.0])
    hi = np.array([np.inf, 1e4])
    scale = np.array([a_scale, max(B0, 1.0)])
    out = levenberg_marquardt(resid, [A0, B0], lo, hi, scale, max_iter=max_iter)
    names = ("A", "B")
    msg = out.message
    ok = out.converged
    if not _identifiable(out.jac, scale):
        ok = False
        msg = "B unidentifiable: fitted amplitude A is zero (flat profile)" if out.p[0] <= 0 else \
            "parameters not identifiable from the data"
    return FitResult(
        params={"A": float(out.p[0]), "B": float(out.p[1])},
        residual_rms=math.sqrt(2.0 * out.cost / z.size),
        n_points=int(z.size),
        converged=bool(ok),
        covariance_diag=_covariance_diag(out.jac, out.cost, z.size, names),
        iterations=out.iterations,
        message=msg,
        cost_history=out.history,
    )


def synthetic_cdos_series(mode: BicMode, d, noise=0.0, seed=None, label="synthetic"):
    """gamma12 / gamma0 on separations ``d`` with optional multiplicative noise."""
    d = np.asarray(d, dtype=float)
    y = mode.purcell * cdos_model(d, mode.beta, mode.k_res, mode)
    if noise:
        rng = np.random.default_rng(seed)
        y = y * (1.0 + noise * rng.standard_normal(d.size))
    return SampleSeries(tuple(d), tuple(y), label)


def synthetic_purcell_series(A, B, a, r_sphere, heights, noise=0.0, seed=None, label="synthetic"):
    """Purcell factor at heights ``heights`` above the sphere top."""
    z = r_sphere + np.asarray(heights, dtype=float)
    y = purcell_profile(z, A, B, a, r_sphere)
    if noise:
        rng = np.random.default_rng(seed)
        y = y * (1.0 + noise * rng.standard_normal(z.size))
    return SampleSeries(tuple(z), tuple(y), label)


_UNIT_RE = re.compile(r"[\[(_ ]\s*(nm|um|µm|μm|micron|m)\s*[\])]?\s*$", re.IGNORECASE)
_UNIT_COMMENT = re.compile(r"#\s*unit\s*[:=]\s*(\S+)", re.IGNORECASE)


def _unit_scale(unit):
    key = unit.strip()
    key = key if key in UNIT_SCALE else key.lower()
    if key not in UNIT_SCALE:
        raise IngestError(f"unknown length unit {unit!r} (use nm, um or m)")
    return UNIT_SCALE[key]


def _parse_csv(text, unit, label):
    declared = None
    rows = []
    seen = {}
    header_done = False
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _UNIT_COMMENT.match(line)
            if m:
                declared = m.group(1)
            continue
        fields = next(csv.reader([line]))
        if len(fields) != 2:
            raise IngestError(f"line {lineno}: expected 2 columns, got {len(fields)}")
        try:
            x, y = float(fields[0]), float(fields[1])
        except ValueError:
            if header_done or rows:
                raise IngestError(f"line {lineno}: non-numeric value in {line!r}") from None
            header_done = True
            m = _UNIT_RE.search(fields[0].strip())
            if m:
                declared = m.group(1)
            continue
        if not (math.isfinite(x) and math.isfinite(y)):
            raise IngestError(f"line {lineno}: non-finite value")
        if x in seen:
            raise IngestError(f"line {lineno}: duplicate abscissa {fields[0]} (first on line {seen[x]})")
        if rows and x < rows[-1][0]:
            raise IngestError(f"line {lineno}: abscissae must be increasing")
        seen[x] = lineno
        rows.append((x, y))
    if not rows:
        raise IngestError("no data rows found")
    return _build(rows, unit or declared or "m", label)


def _build(rows, unit, label):
    s = _unit_scale(unit)
    xs = [r[0] * s for r in rows]
    ys = [r[1] for r in rows]
    try:
        return SampleSeries(tuple(xs), tuple(ys), label)
    except DomainError as exc:
        raise IngestError(str(exc)) from None


def _parse_json(text, unit, label):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IngestError(f"line {exc.lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(obj, dict) or "x" not in obj or "y" not in obj:
        raise IngestError("JSON series needs 'x' and 'y' arrays")
    x, y = obj["x"], obj["y"]
    if len(x) != len(y):
        raise IngestError(f"'x' has {len(x)} entries but 'y' has {len(y)}")
    if not x:
        raise IngestError("no data points found")
    seen = set()
    for i, v in enumerate(x):
        if v in seen:
            raise IngestError(f"duplicate abscissa {v!r} at index {i}")
        seen.add(v)
    return _build(list(zip(map(float, x), map(float, y))), unit or obj.get("unit", "m"), obj.get("label", label))


def load_series(path, format=None, unit=None):
    """Read a two-column series from CSV or JSON.

    CSV headers may declare the abscissa unit as ``d [nm]``, ``d_um`` or a
    ``# unit: um`` comment; an explicit ``unit`` argument wins. JSON files
    carry ``{"x": [...], "y": [...], "unit": "nm", "label": "..."}``.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc.strerror}") from None
    fmt = (format or path.suffix.lstrip(".") or "csv").lower()
    if fmt == "json":
        return _parse_json(text, unit, path.stem)
    if fmt == "csv":
        return _parse_csv(text, unit, path.stem)
    raise IngestError(f"unknown series format {fmt!r}")


def parse_series_text(text, format="csv", unit=None, label=""):
    """Like load_series, from an in-memory string."""
    if format == "json":
        return _parse_json(text, unit, label)
    return _parse_csv(text, unit, label)
