"""Tensor pipeline: metric, geodesic spray, Berwald and Landsberg tensors.

Everything here is a pure function of a :class:`FinslerField` (a scalar
function of base point x and direction y, evaluable on jets) and/or a
:class:`SprayField`.  Two spray routes exist:

* closed-form sprays supplied by the catalog (cheap; fiber order 3 is
  enough for the Berwald tensor), and
* the variational route, which derives the spray from the field itself,
  ``G^i = 1/4 g^{ih} (y^r d_r dot_h F^2 - d_h F^2)``, needing fiber
  order 5 and base order 1.  This is the oracle the closed forms are
  checked against.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .jets import JetUsageError, jet_space

__all__ = [
    "FinslerField",
    "SprayField",
    "PointTensors",
    "DegenerateMetricError",
    "DegenerateMetricWarning",
    "metric_tensor",
    "geodesic_spray",
    "ad_spray_field",
    "berwald_tensor",
    "landsberg_tensor",
    "horizontal_differential",
    "euler_residual",
    "point_tensors",
]

#: |det g| below DET_RTOL times the Frobenius scale of g counts as degenerate.
DET_RTOL = 1e-10


class DegenerateMetricError(RuntimeError):
    """Metric tensor (numerically) singular; carries the determinant."""

    def __init__(self, message, det=None):
        if det is not None:
            message = f"{message}: det(g) = {det:.3e}"
        super().__init__(message)
        self.det = det


class DegenerateMetricWarning(RuntimeWarning):
    pass


class FinslerField:
    """A scalar function F(x, y) evaluable on Taylor-value arguments.

    ``evaluate(xs, ys)`` receives one TaylorValue per coordinate (the x
    entries may be constant jets) and must return a TaylorValue in the
    same space.  ``domain_guard(x, y)`` is a cheap float-only test for
    admissibility of a sample; the non-regular catalog metrics use it to
    stay away from their singular directions.
    """

    def __init__(self, n, evaluate, domain_guard=None, label=""):
        self.n = n
        self._evaluate = evaluate
        self.domain_guard = domain_guard if domain_guard is not None else (
            lambda x, y: bool(np.linalg.norm(y) > 0)
        )
        self.label = label

    def __repr__(self):
        return f"FinslerField(n={self.n}, label={self.label!r})"

    def evaluate(self, xs, ys):
        return self._evaluate(xs, ys)

    def jet(self, x, y, x_cap, y_cap):
        """Evaluate on freshly seeded arguments at the given caps."""
        xs, ys = seeded_arguments(self.n, x, y, x_cap, y_cap)
        return self.evaluate(xs, ys)

    def value(self, x, y):
        return self.jet(x, y, 0, 1).value


def seeded_arguments(n, x, y, x_cap, y_cap):
    """Seed (x, y) coordinates into a shared jet space.

    With ``x_cap == 0`` the x coordinates enter as constants in a space
    with no x variables, which keeps fiber-only work cheap.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (n,) or y.shape != (n,):
        raise JetUsageError(f"expected {n} coordinates in each group")
    if x_cap > 0:
        space = jet_space(n, n, x_cap, y_cap)
        xs = [space.seed_x(i, x[i]) for i in range(n)]
    else:
        space = jet_space(0, n, 0, y_cap)
        xs = [space.constant(x[i]) for i in range(n)]
    ys = [space.seed_y(i, y[i]) for i in range(n)]
    return xs, ys


class SprayField:
    """Spray coefficients G^i evaluable as fiber jets.

    ``jets_fn(x, y, order)`` returns the n coefficients as TaylorValues
    in the pure-y space (0, n, 0, order).  The optional ``domain_guard``
    is inherited from whatever field or setup produced the spray so
    sampling can respect the same admissible cone.
    """

    def __init__(self, n, jets_fn, label="", domain_guard=None):
        self.n = n
        self._jets_fn = jets_fn
        self.label = label
        self.domain_guard = domain_guard if domain_guard is not None else (
            lambda x, y: bool(np.linalg.norm(y) > 0)
        )

    def __repr__(self):
        return f"SprayField(n={self.n}, label={self.label!r})"

    def jets(self, x, y, order):
        return self._jets_fn(np.asarray(x, float), np.asarray(y, float), order)

    def values(self, x, y):
        return np.array([g.value for g in self.jets(x, y, 0)])


# ---------------------------------------------------------------------------
# variational spray (the oracle path)
# ---------------------------------------------------------------------------


def _solve_jet_system(a, b, context=""):
    """Solve A X = B for jet entries by Gaussian elimination.

    Pivoting is by the largest constant term; a pivot below the
    degeneracy threshold raises, naming the determinant of the constant
    part.
    """
    n = len(b)
    a = [row[:] for row in a]
    b = list(b)
    g0 = np.array([[entry.value for entry in row] for row in a])
    scale = np.linalg.norm(g0) / max(1, np.sqrt(n))
    det = float(np.linalg.det(g0))
    if abs(det) < DET_RTOL * max(scale, 1e-300) ** n:
        raise DegenerateMetricError(
            f"degenerate metric{context}", det=det
        )
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col].value))
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            b[col], b[piv] = b[piv], b[col]
        inv = a[col][col].reciprocal()
        for r in range(n):
            if r == col:
                continue
            factor = a[r][col] * inv
            for c in range(col + 1, n):
                a[r][c] = a[r][c] - factor * a[col][c]
            b[r] = b[r] - factor * b[col]
    return [b[i] * a[i][i].reciprocal() for i in range(n)]


def _ad_spray_jets(field, x, y, order):
    """Spray jets from the energy function via the variational formula."""
    n = field.n
    xs, ys = seeded_arguments(n, x, y, 1, order + 2)
    f_jet = field.evaluate(xs, ys)
    f2 = f_jet * f_jet
    ys_mid = [ysi.drop_x().truncate(0, order + 1) for ysi in ys]
    rhs = []
    for h in range(n):
        ah = f2.dy(h)  # caps (1, order+1)
        t = None
        for r in range(n):
            term = ys_mid[r] * ah.dx(r).drop_x()
            t = term if t is None else t + term
        ch = f2.dx(h).drop_x().truncate(0, order + 1)
        rhs.append((t - ch).truncate(0, order))
    g = [
        [
            (f2.dy(i).dy(j) * 0.5).drop_x().truncate(0, order)
            for j in range(n)
        ]
        for i in range(n)
    ]
    sol = _solve_jet_system(g, rhs, context=f" for {field.label or 'field'}")
    return [gi * 0.25 for gi in sol]


def ad_spray_field(field):
    """SprayField computing the geodesic spray of ``field`` by jets."""
    return SprayField(
        field.n,
        lambda x, y, order: _ad_spray_jets(field, x, y, order),
        label=f"ad:{field.label}",
        domain_guard=field.domain_guard,
    )


def geodesic_spray(field, x, y):
    """Geodesic spray coefficients G^i as floats (variational route)."""
    return np.array([g.value for g in _ad_spray_jets(field, x, y, 0)])


# ---------------------------------------------------------------------------
# pointwise tensors
# ---------------------------------------------------------------------------


def metric_tensor(field, x, y):
    """Hessian of the energy F^2/2 in the fiber variables."""
    e = field.jet(x, y, 0, 2)
    e = e * e * 0.5
    n = field.n
    g = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            idx = [0] * n
            idx[i] += 1
            idx[j] += 1
            g[i, j] = g[j, i] = e.extract_y(idx)
    scale = np.linalg.norm(g) / max(1, np.sqrt(n))
    det = float(np.linalg.det(g))
    if abs(det) < DET_RTOL * max(scale, 1e-300) ** n:
        warnings.warn(
            f"metric tensor nearly degenerate: det(g) = {det:.3e}",
            DegenerateMetricWarning,
            stacklevel=2,
        )
    return g


def _ell(field, x, y):
    fj = field.jet(x, y, 0, 1)
    n = field.n
    ell = np.array([fj.extract_y(_unit(n, i)) for i in range(n)])
    return fj.value, ell


def _unit(n, i, k=1):
    e = [0] * n
    e[i] = k
    return e


def berwald_tensor(spray, x, y):
    """Third fiber derivatives of the spray coefficients."""
    n = spray.n
    gj = spray.jets(x, y, 3)
    out = np.empty((n, n, n, n))
    for j in range(n):
        for k in range(j, n):
            for h in range(k, n):
                idx = [0] * n
                idx[j] += 1
                idx[k] += 1
                idx[h] += 1
                for i in range(n):
                    v = gj[i].extract_y(idx)
                    out[i, j, k, h] = out[i, j, h, k] = v
                    out[i, k, j, h] = out[i, k, h, j] = v
                    out[i, h, j, k] = out[i, h, k, j] = v
    return out


def landsberg_tensor(field, spray, x, y):
    """L_jkh = -1/2 F ell_i G^i_jkh."""
    fval, ell = _ell(field, x, y)
    gb = berwald_tensor(spray, x, y)
    return -0.5 * fval * np.einsum("i,ijkh->jkh", ell, gb)


def horizontal_differential(field, spray, x, y):
    """Components of dF along the horizontal lifts, d_iF - G^j_i dot_jF.

    Vanishes identically exactly when F is a first integral of the
    horizontal distribution of the spray, i.e. the first metrizability
    equation holds.
    """
    n = field.n
    fj = field.jet(x, y, 1, 1)
    dxf = np.array([fj.extract(_unit(2 * n, i)) for i in range(n)])
    dyf = np.array([fj.extract(_unit(2 * n, n + i)) for i in range(n)])
    sj = spray.jets(x, y, 1)
    gji = np.array(
        [[sj[j].extract_y(_unit(n, i)) for i in range(n)] for j in range(n)]
    )
    return dxf - gji.T @ dyf


def euler_residual(field, x, y):
    """|y^i dot_iF - F|; zero for 1-homogeneous F by Euler's theorem."""
    fval, ell = _ell(field, x, y)
    return abs(float(np.dot(np.asarray(y, float), ell)) - fval)


@dataclass(frozen=True)
class PointTensors:
    """All pointwise tensors of one (field, spray, sample) triple."""

    x: np.ndarray
    y: np.ndarray
    F: float
    g: np.ndarray
    g_inv: np.ndarray
    ell: np.ndarray
    G: np.ndarray
    Gij: np.ndarray
    Gijk: np.ndarray
    Gijkh: np.ndarray
    L: np.ndarray

    @property
    def det_g(self):
        return float(np.linalg.det(self.g))


def point_tensors(field, spray, x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n = field.n
    g = metric_tensor(field, x, y)
    fval, ell = _ell(field, x, y)
    gj = spray.jets(x, y, 3)
    gvals = np.array([t.value for t in gj])
    gij = np.array(
        [[gj[i].extract_y(_unit(n, j)) for j in range(n)] for i in range(n)]
    )
    gijk = np.empty((n, n, n))
    gijkh = np.empty((n, n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(j, n):
                idx = [0] * n
                idx[j] += 1
                idx[k] += 1
                gijk[i, j, k] = gijk[i, k, j] = gj[i].extract_y(idx)
    for j in range(n):
        for k in range(j, n):
            for h in range(k, n):
                idx = [0] * n
                idx[j] += 1
                idx[k] += 1
                idx[h] += 1
                for i in range(n):
                    v = gj[i].extract_y(idx)
                    gijkh[i, j, k, h] = gijkh[i, j, h, k] = v
                    gijkh[i, k, j, h] = gijkh[i, k, h, j] = v
                    gijkh[i, h, j, k] = gijkh[i, h, k, j] = v
    lans = -0.5 * fval * np.einsum("i,ijkh->jkh", ell, gijkh)
    return PointTensors(
        x=x,
        y=y,
        F=fval,
        g=g,
        g_inv=np.linalg.inv(g),
        ell=ell,
        G=gvals,
        Gij=gij,
        Gijk=gijk,
        Gijkh=gijkh,
        L=lans,
    )
