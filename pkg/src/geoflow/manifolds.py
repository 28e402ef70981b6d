"""Model Riemannian manifolds and pointwise curvature evaluation.

A :class:`ManifoldModel` bundles one or more overlapping charts with the
closed-form curvature data of the model (when available) and provides the
pointwise operations everything else builds on: metric, Christoffel symbols,
the symmetric Jacobi curvature operator ``w -> R(w, v)v`` restricted to the
orthogonal complement of ``v``, directional Ricci curvature, curvature
extremes, and seeded sampling of the unit sphere bundle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import charts as _charts
from .errors import ChartDomainError, NumericsError

_TWO_PI = 2.0 * np.pi


@dataclass
class TangentState:
    """A point of the unit sphere bundle: chart id, chart point, unit vector."""

    chart_id: int
    x: np.ndarray
    v: np.ndarray

    def copy(self):
        return TangentState(self.chart_id, self.x.copy(), self.v.copy())


@dataclass
class CurvatureSpectrum:
    """Eigen-decomposition of the Jacobi curvature operator at a tangent state.

    ``eigenvalues`` are ascending; ``eigenvectors[i]`` is the chart-coordinate
    vector of the i-th eigendirection, orthonormal under g(x) and orthogonal
    to v.
    """

    theta: TangentState
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def ricci(self):
        return float(np.sum(self.eigenvalues))


@dataclass
class ManifoldModel:
    kind: str
    dim: int
    charts: list
    params: dict = field(default_factory=dict)
    homogeneous: bool = False
    isotropic: bool = False
    analytic_curvature: bool = False
    spec_string: str = ""
    # closed-form curvature payload, interpreted per kind
    _curv: dict = field(default_factory=dict)
    # chart-0 coordinates of a generic base point
    base_x: np.ndarray | None = None

    # -- basic pointwise evaluators ------------------------------------------------

    def chart(self, chart_id=0):
        return self.charts[chart_id]

    def metric(self, x, chart_id=0):
        x = np.asarray(x, dtype=float)
        _charts.require_in_domain(self.chart(chart_id), x)
        g = self.chart(chart_id).metric(x)
        if not np.all(np.isfinite(g)):
            raise NumericsError("metric evaluation produced non-finite entries")
        return g

    def christoffel(self, x, chart_id=0):
        x = np.asarray(x, dtype=float)
        _charts.require_in_domain(self.chart(chart_id), x)
        gam = _charts.christoffel(self.chart(chart_id), x)
        if not np.all(np.isfinite(gam)):
            raise NumericsError("Christoffel evaluation produced non-finite entries")
        return gam

    def inner(self, x, a, b, chart_id=0):
        g = self.chart(chart_id).metric(x)
        return np.einsum("...i,...ij,...j->...", a, g, b)

    def norm(self, x, a, chart_id=0):
        return np.sqrt(self.inner(x, a, a, chart_id))

    def unit_tangent(self, x, v, chart_id=0):
        """Normalized TangentState; the one place a vector is rescaled."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        nrm = self.norm(x, v, chart_id)
        if not np.all(nrm > 0.0):
            raise ValueError("cannot normalize a zero tangent vector")
        return TangentState(chart_id, x, v / nrm)

    def base_state(self, direction=None):
        """A deterministic unit tangent state at the model base point."""
        x = self.base_x.copy()
        if direction is None:
            direction = np.zeros(self.dim)
            direction[0] = 1.0
        return self.unit_tangent(x, direction, 0)

    # -- frames ---------------------------------------------------------------------

    def orthonormal_frame(self, x, v, chart_id=0):
        """Batched g-orthonormal frame of the complement of v, shape (..., n-1, n).

        Deterministic: coordinate directions are Gram-Schmidt'ed against v in
        the order of increasing alignment with v.
        """
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        n = self.dim
        g = self.chart(chart_id).metric(x)
        batch = x.shape[:-1]
        eye = np.broadcast_to(np.eye(n), batch + (n, n))
        gdiag = np.einsum("...ii->...i", g)
        scores = np.abs(np.einsum("...ij,...j->...i", g, v)) / np.sqrt(gdiag)
        order = np.argsort(scores, axis=-1)  # ascending: least aligned first
        kept = order[..., : n - 1]
        cand = np.take_along_axis(eye, kept[..., None], axis=-2)
        frame = np.empty(batch + (n - 1, n))
        vn = v / np.sqrt(np.einsum("...i,...ij,...j->...", v, g, v))[..., None]
        for k in range(n - 1):
            w = cand[..., k, :]
            w = w - np.einsum("...i,...ij,...j->...", w, g, vn)[..., None] * vn
            for j in range(k):
                ej = frame[..., j, :]
                w = w - np.einsum("...i,...ij,...j->...", w, g, ej)[..., None] * ej
            nrm = np.sqrt(np.einsum("...i,...ij,...j->...", w, g, w))
            frame[..., k, :] = w / nrm[..., None]
        return frame

    # -- curvature ------------------------------------------------------------------

    def curvature_frame_matrix(self, x, v, frame, chart_id=0, force_fd=False, g=None):
        """Matrix K_ij = <R(E_i, v)v, E_j> of the Jacobi operator in a frame.

        Uses the model closed form when available, otherwise (or when forced)
        finite differences of the Christoffel symbols.  ``g`` may pass in a
        metric already evaluated at ``x``.
        """
        if self.analytic_curvature and not force_fd:
            return self._analytic_K(x, v, frame, chart_id, g)
        return self._fd_K(x, v, frame, chart_id)

    def _analytic_K(self, x, v, frame, chart_id, g=None):
        kindof = self._curv["form"]
        k = self.dim - 1
        batch = np.asarray(x, dtype=float).shape[:-1]
        if kindof == "constant":
            K0 = self._curv["K"]
            out = np.zeros(batch + (k, k))
            idx = np.arange(k)
            out[..., idx, idx] = K0
            return out
        if kindof == "gauss":
            p = self.chart(chart_id).embed(x)
            K0 = self._gauss_curvature(p)
            return K0[..., None, None] * np.eye(1)
        if kindof == "product":
            return self._product_K(x, v, frame, chart_id, g)
        raise NumericsError(f"no analytic curvature for kind {self.kind}")

    def _gauss_curvature(self, p):
        a, b, c = self._curv["semi_axes"]
        f = p[..., 0] ** 2 / a**4 + p[..., 1] ** 2 / b**4 + p[..., 2] ** 2 / c**4
        return 1.0 / ((a * b * c) ** 2 * f**2)

    def _product_K(self, x, v, frame, chart_id, g=None):
        ch = self.chart(chart_id)
        s = ch.split
        K1, K2 = self._curv["factor_K"]
        if g is None:
            g = ch.metric(x)
        out = 0.0
        for sl, Kf in (((slice(None, s)), K1), ((slice(s, None)), K2)):
            gf = g[..., sl, sl]
            vf = np.asarray(v, dtype=float)[..., sl]
            Ef = np.asarray(frame, dtype=float)[..., sl]
            vv = np.einsum("...i,...ij,...j->...", vf, gf, vf)
            Ev = np.einsum("...ki,...ij,...j->...k", Ef, gf, vf)
            EE = np.einsum("...ki,...ij,...lj->...kl", Ef, gf, Ef)
            out = out + Kf * (vv[..., None, None] * EE - Ev[..., :, None] * Ev[..., None, :])
        return out

    def _fd_K(self, x, v, frame, chart_id):
        ch = self.chart(chart_id)
        R = _charts.riemann(ch, x)
        g = ch.metric(x)
        Rv = np.einsum("...labc,...ka,...b,...c->...kl", R, frame, v, v)
        K = np.einsum("...kl,...lm,...jm->...kj", Rv, g, frame)
        return 0.5 * (K + np.swapaxes(K, -1, -2))

    def curvature_operator(self, theta, force_fd=False):
        """Eigen-decomposition of the Jacobi operator at a unit tangent state."""
        self._check_unit(theta)
        frame = self.orthonormal_frame(theta.x, theta.v, theta.chart_id)
        K = self.curvature_frame_matrix(theta.x, theta.v, frame, theta.chart_id, force_fd)
        w, V = np.linalg.eigh(K)
        vecs = np.einsum("...ik,...im->...km", V, frame)
        return CurvatureSpectrum(theta, w, vecs)

    def ricci(self, theta, force_fd=False):
        """Ricci curvature in the direction of a unit tangent vector."""
        self._check_unit(theta)
        frame = self.orthonormal_frame(theta.x, theta.v, theta.chart_id)
        K = self.curvature_frame_matrix(theta.x, theta.v, frame, theta.chart_id, force_fd)
        return float(np.trace(K))

    def sectional(self, x, u, w, chart_id=0, force_fd=False):
        """Sectional curvature of the plane spanned by u, w at x."""
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        w = np.asarray(w, dtype=float)
        g = self.chart(chart_id).metric(x)
        if self.analytic_curvature and not force_fd:
            Ruw = self._apply_R(x, u, w, chart_id)
        else:
            R = _charts.riemann(self.chart(chart_id), x)
            Ruw = np.einsum("...labc,...a,...b,...c->...l", R, u, w, w)
        num = np.einsum("...i,...ij,...j->...", u, g, Ruw)
        uu = np.einsum("...i,...ij,...j->...", u, g, u)
        ww = np.einsum("...i,...ij,...j->...", w, g, w)
        uw = np.einsum("...i,...ij,...j->...", u, g, w)
        den = uu * ww - uw**2
        return num / den

    def _apply_R(self, x, u, w, chart_id):
        """Closed-form R(u, w)w for the analytic kinds."""
        form = self._curv["form"]
        g = self.chart(chart_id).metric(x)
        if form == "constant":
            K0 = self._curv["K"]
            ww = np.einsum("...i,...ij,...j->...", w, g, w)
            uw = np.einsum("...i,...ij,...j->...", u, g, w)
            return K0 * (ww[..., None] * u - uw[..., None] * w)
        if form == "gauss":
            p = self.chart(chart_id).embed(x)
            K0 = self._gauss_curvature(p)
            ww = np.einsum("...i,...ij,...j->...", w, g, w)
            uw = np.einsum("...i,...ij,...j->...", u, g, w)
            return K0[..., None] * (ww[..., None] * u - uw[..., None] * w)
        if form == "product":
            ch = self.chart(chart_id)
            s = ch.split
            K1, K2 = self._curv["factor_K"]
            out = np.zeros_like(np.asarray(u, dtype=float))
            for sl, Kf in ((slice(None, s), K1), (slice(s, None), K2)):
                gf = g[..., sl, sl]
                uf, wf = u[..., sl], w[..., sl]
                ww = np.einsum("...i,...ij,...j->...", wf, gf, wf)
                uw = np.einsum("...i,...ij,...j->...", uf, gf, wf)
                out[..., sl] = Kf * (ww[..., None] * uf - uw[..., None] * wf)
            return out
        raise NumericsError(f"no analytic curvature for kind {self.kind}")

    def _check_unit(self, theta, tol=1e-8):
        nrm = self.norm(theta.x, theta.v, theta.chart_id)
        if abs(float(nrm) - 1.0) > tol:
            raise ValueError(f"tangent vector is not unit: |v|={float(nrm)!r}")

    # -- curvature extremes -----------------------------------------------------------

    def extremal_curvatures(self, sample_count=200, seed=0, force_sampling=False):
        """(K_max, K_min, min_ricci).

        Closed forms for the analytic kinds; otherwise sampled 2-planes and
        directions refined by shrinking-step coordinate ascent, with the
        returned extremes inflated by a 1e-3 relative safety factor so K_max
        stays an upper bound (and K_min / min_ricci lower bounds) at the
        sampled resolution.
        """
        if sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        if self.analytic_curvature and not force_sampling:
            return self._exact_extremes()
        return self._sampled_extremes(sample_count, seed)

    def _exact_extremes(self):
        n = self.dim
        form = self._curv["form"]
        if form == "constant":
            K0 = self._curv["K"]
            return K0, K0, (n - 1) * K0
        if form == "gauss":
            a, b, c = self._curv["semi_axes"]
            hi, lo = max(a, b, c), min(a, b, c)
            return hi**4 / (a * b * c) ** 2, lo**4 / (a * b * c) ** 2, lo**4 / (a * b * c) ** 2
        if form == "product":
            K1, K2 = self._curv["factor_K"]
            p, q = self._curv["factor_dims"]
            kmax = max(K1, K2)
            kmin = 0.0 if (p >= 2 and q >= 2) else min(K1, K2)
            return kmax, kmin, min((p - 1) * K1, (q - 1) * K2)
        raise NumericsError(f"no exact extremes for kind {self.kind}")

    def _sampled_extremes(self, sample_count, seed):
        rng = np.random.default_rng(seed)
        states = self.sample_sphere_bundle(10 * sample_count, seed)
        X = np.stack([s.x for s in states])
        V = np.stack([s.v for s in states])
        g = self.chart(0).metric(X)
        # random unit vector in the complement of V: combine frame vectors
        frame = self.orthonormal_frame(X, V)
        coeff = rng.standard_normal(X.shape[:-1] + (self.dim - 1,))
        coeff = coeff / np.linalg.norm(coeff, axis=-1, keepdims=True)
        W = np.einsum("...k,...ki->...i", coeff, frame)
        K = self.sectional(X, V, W)
        ric = np.array([self.ricci(s) for s in states])

        def refine(idx_sorted, direction):
            best = None
            for i in idx_sorted:
                val = self._ascend_plane(X[i], V[i], W[i], direction)
                if best is None or direction * val > direction * best:
                    best = val
            return best

        top = max(1, len(states) // 100)
        kmax = refine(np.argsort(K)[::-1][:top], +1.0)
        kmin = refine(np.argsort(K)[:top], -1.0)
        rmin = min(self._ascend_ricci(states[i]) for i in np.argsort(ric)[:top])
        tol = 1e-3
        kmax = kmax + tol * abs(kmax)
        kmin = kmin - tol * abs(kmin)
        rmin = rmin - tol * abs(rmin)
        return float(kmax), float(kmin), float(rmin)

    def _ascend_plane(self, x, u, w, direction, rounds=8, step0=0.2):
        """Shrinking-step coordinate ascent of the sectional curvature."""
        x, u, w = x.copy(), u.copy(), w.copy()
        cur = float(self.sectional(x, u, w))
        step = step0
        n = self.dim
        for _ in range(rounds):
            improved = False
            for which in range(3):
                for k in range(n):
                    for sgn in (+1.0, -1.0):
                        xx, uu, ww = x.copy(), u.copy(), w.copy()
                        if which == 0:
                            xx[k] += sgn * step
                            if float(self.chart(0).margin(xx)) <= 1e-6:
                                continue
                        elif which == 1:
                            uu[k] += sgn * step
                        else:
                            ww[k] += sgn * step
                        try:
                            val = float(self.sectional(xx, uu, ww))
                        except (ChartDomainError, NumericsError, FloatingPointError):
                            continue
                        if direction * val > direction * cur + 1e-14:
                            x, u, w, cur = xx, uu, ww, val
                            improved = True
            if not improved:
                step *= 0.5
        return cur

    def _ascend_ricci(self, state, rounds=8, step0=0.2):
        x, v = state.x.copy(), state.v.copy()
        cur = self.ricci(self.unit_tangent(x, v))
        step = step0
        for _ in range(rounds):
            improved = False
            for which in range(2):
                for k in range(self.dim):
                    for sgn in (+1.0, -1.0):
                        xx, vv = x.copy(), v.copy()
                        if which == 0:
                            xx[k] += sgn * step
                            if float(self.chart(0).margin(xx)) <= 1e-6:
                                continue
                        else:
                            vv[k] += sgn * step
                        try:
                            val = self.ricci(self.unit_tangent(xx, vv))
                        except (ChartDomainError, NumericsError, ValueError):
                            continue
                        if val < cur - 1e-14:
                            x, v, cur = xx, vv, val
                            improved = True
            if not improved:
                step *= 0.5
        return cur

    # -- sampling ---------------------------------------------------------------------

    def sample_sphere_bundle(self, count, seed=0):
        """Seeded sample of unit tangent states.

        Positions follow the Riemannian volume density sqrt(det g) over chart 0
        (pinned at the base point for homogeneous models); directions are
        uniform on the g(x)-unit sphere.
        """
        if count < 1:
            raise ValueError("count must be >= 1")
        rng = np.random.default_rng(seed)
        if self.homogeneous:
            X = np.tile(self.base_x, (count, 1))
        else:
            X = self._rejection_positions(count, rng)
        g = self.chart(0).metric(X)
        L = np.linalg.cholesky(g)
        Z = rng.standard_normal((count, self.dim))
        Z = Z / np.linalg.norm(Z, axis=-1, keepdims=True)
        V = np.linalg.solve(np.swapaxes(L, -1, -2), Z[..., None])[..., 0]
        nrm = np.sqrt(np.einsum("...i,...ij,...j->...", V, g, V))
        V = V / nrm[..., None]
        return [TangentState(0, X[i], V[i]) for i in range(count)]

    def _rejection_positions(self, count, rng):
        box, bound = self._sample_box()
        lo, hi = box[:, 0], box[:, 1]
        out = np.empty((count, self.dim))
        have = 0
        while have < count:
            m = max(4 * (count - have), 64)
            X = lo + (hi - lo) * rng.random((m, self.dim))
            dens = np.sqrt(np.abs(np.linalg.det(self.chart(0).metric(X))))
            keep = rng.random(m) * bound < dens
            keep &= self.chart(0).margin(X) > 1e-6
            Xk = X[keep]
            take = min(len(Xk), count - have)
            out[have : have + take] = Xk[:take]
            have += take
        return out

    def _sample_box(self):
        """Chart-0 sampling box and an upper bound for sqrt(det g) on it."""
        ch = self.chart(0)
        if self.kind == "torus":
            box = np.stack([np.zeros(self.dim), ch.periods], axis=1)
            return box, 1.0
        if self.kind == "sphere":
            box = np.array([[1e-3, np.pi - 1e-3]] * (self.dim - 1) + [[0.0, _TWO_PI]])
            return box, ch.radius**self.dim * 1.0001
        if self.kind == "ellipsoid":
            box = np.array([[1e-3, np.pi - 1e-3], [0.0, _TWO_PI]])
        elif self.kind == "hyperbolic":
            box = np.array([[1e-3, 3.0]] + [[1e-3, np.pi - 1e-3]] * (self.dim - 2) + [[0.0, _TWO_PI]])
        elif self.kind == "sphereprod":
            p = self._curv["factor_dims"][0]
            box = np.array(
                [[1e-3, np.pi - 1e-3]] * (p - 1) + [[0.0, _TWO_PI]]
                + [[1e-3, np.pi - 1e-3]] * (self.dim - p - 1) + [[0.0, _TWO_PI]]
            )
        elif getattr(ch, "domain", None) is not None:
            box = ch.domain
        else:
            box = np.array([[-np.pi, np.pi]] * self.dim)
        # numeric bound with a safety factor
        grid = np.stack(
            np.meshgrid(*[np.linspace(b[0] + 1e-6, b[1] - 1e-6, 13) for b in box], indexing="ij"),
            axis=-1,
        ).reshape(-1, self.dim)
        dens = np.sqrt(np.abs(np.linalg.det(ch.metric(grid))))
        return box, float(dens.max()) * 1.5

    # -- misc -------------------------------------------------------------------------

    def position_embedding(self, x, chart_id=0):
        """Chart-independent ambient representative of a chart point."""
        return self.chart(chart_id).embed(np.asarray(x, dtype=float))


# -- factories --------------------------------------------------------------------------


def _perm_rotation(m, shift):
    """Orthogonal matrix cyclically shifting the m ambient coordinates."""
    Q = np.zeros((m, m))
    for i in range(m):
        Q[(i + shift) % m, i] = 1.0
    return Q


def sphere(n=2, radius=1.0):
    if n < 2:
        raise ValueError("sphere dimension must be >= 2")
    # cyclic-permutation pole frames cover every hyperspherical singularity
    chs = [_charts.SphereChart(n, radius, _perm_rotation(n + 1, s)) for s in range(n + 1)]
    model = ManifoldModel(
        kind="sphere",
        dim=n,
        charts=chs,
        params={"n": n, "r": radius},
        homogeneous=True,
        isotropic=True,
        analytic_curvature=True,
        spec_string=f"sphere:n={n},r={radius}",
        _curv={"form": "constant", "K": 1.0 / radius**2},
        base_x=np.array([np.pi / 2] * (n - 1) + [0.0]),
    )
    return model


def flat_torus(n=2, period=_TWO_PI):
    periods = np.full(n, float(period))
    model = ManifoldModel(
        kind="torus",
        dim=n,
        charts=[_charts.FlatTorusChart(periods)],
        params={"n": n, "l": float(period)},
        homogeneous=True,
        isotropic=True,
        analytic_curvature=True,
        spec_string=f"torus:n={n}",
        _curv={"form": "constant", "K": 0.0},
        base_x=np.zeros(n),
    )
    return model


def hyperbolic(n=2, c=1.0):
    if c <= 0:
        raise ValueError("curvature scale c must be positive (curvature is -c)")
    kappa = np.sqrt(c)
    boost = np.eye(n + 1)
    s = kappa * 1.0  # rapidity placing the second chart at distance 1
    boost[0, 0] = boost[1, 1] = np.cosh(s)
    boost[0, 1] = boost[1, 0] = np.sinh(s)
    chs = [_charts.HyperbolicChart(n, c), _charts.HyperbolicChart(n, c, boost)]
    if n > 2:
        # extra spatial-permutation frames cover angular singularities
        for shift in range(1, n):
            Q = np.eye(n + 1)
            Q[1:, 1:] = _perm_rotation(n, shift)
            chs.append(_charts.HyperbolicChart(n, c, Q))
    model = ManifoldModel(
        kind="hyperbolic",
        dim=n,
        charts=chs,
        params={"n": n, "c": c},
        homogeneous=True,
        isotropic=True,
        analytic_curvature=True,
        spec_string=f"hyperbolic:n={n},c={c}",
        _curv={"form": "constant", "K": -c},
        base_x=np.array([1.0] + [np.pi / 2] * (n - 2) + [0.0]),
    )
    return model


def ellipsoid(a=1.0, b=1.0, c=2.0):
    chs = [
        _charts.EllipsoidChart([a, b, c], axes=(0, 1, 2)),
        _charts.EllipsoidChart([a, b, c], axes=(1, 2, 0)),
    ]
    model = ManifoldModel(
        kind="ellipsoid",
        dim=2,
        charts=chs,
        params={"a": a, "b": b, "c": c},
        homogeneous=False,
        isotropic=False,
        analytic_curvature=True,
        spec_string=f"ellipsoid:a={a},b={b},c={c}",
        _curv={"form": "gauss", "semi_axes": (float(a), float(b), float(c))},
        base_x=np.array([np.pi / 2, 0.3]),
    )
    return model


def sphere_product(p=2, q=2, r1=1.0, r2=1.0):
    if p < 2 or q < 2:
        raise ValueError("factor dimensions must be >= 2")
    f1 = [_charts.SphereChart(p, r1, _perm_rotation(p + 1, s)) for s in range(p + 1)]
    f2 = [_charts.SphereChart(q, r2, _perm_rotation(q + 1, s)) for s in range(q + 1)]
    chs = [_charts.ProductChart(c1, c2) for c1 in f1 for c2 in f2]
    model = ManifoldModel(
        kind="sphereprod",
        dim=p + q,
        charts=chs,
        params={"p": p, "q": q, "r1": r1, "r2": r2},
        homogeneous=True,
        isotropic=False,
        analytic_curvature=True,
        spec_string=f"sphereprod:p={p},q={q},r1={r1},r2={r2}",
        _curv={
            "form": "product",
            "factor_K": (1.0 / r1**2, 1.0 / r2**2),
            "factor_dims": (p, q),
        },
        base_x=np.array(
            [np.pi / 2] * (p - 1) + [0.0] + [np.pi / 2] * (q - 1) + [0.0]
        ),
    )
    return model


def chart_metric(func, dim, domain=None, name="chart-metric", vectorized=False):
    """Model from a user metric function on a single chart (no switching)."""
    ch = _charts.CallableMetricChart(func, dim, domain=domain, vectorized=vectorized)
    base = np.zeros(dim) if domain is None else np.asarray(domain, dtype=float).mean(axis=1)
    return ManifoldModel(
        kind="chart-metric",
        dim=dim,
        charts=[ch],
        params={"name": name, "n": dim},
        homogeneous=False,
        isotropic=False,
        analytic_curvature=False,
        spec_string=f"chart-metric:{name}",
        base_x=base,
    )


_PARSERS = {
    "sphere": lambda kw: sphere(int(kw.get("n", 2)), float(kw.get("r", 1.0))),
    "torus": lambda kw: flat_torus(int(kw.get("n", 2)), float(kw.get("l", _TWO_PI))),
    "hyperbolic": lambda kw: hyperbolic(int(kw.get("n", 2)), float(kw.get("c", 1.0))),
    "ellipsoid": lambda kw: ellipsoid(
        float(kw.get("a", 1.0)), float(kw.get("b", 1.0)), float(kw.get("c", 2.0))
    ),
    "sphereprod": lambda kw: sphere_product(
        int(kw.get("p", 2)), int(kw.get("q", 2)),
        float(kw.get("r1", 1.0)), float(kw.get("r2", 1.0)),
    ),
}


def parse_manifold(spec):
    """Build a model from a spec string like ``sphere:n=2,r=1.0`` or a JSON dict."""
    if isinstance(spec, dict):
        kw = dict(spec)
        kind = kw.pop("kind", None)
        if kind not in _PARSERS:
            raise ValueError(f"unknown manifold kind: {kind!r}")
        return _PARSERS[kind](kw)
    text = str(spec).strip()
    if text.startswith("{"):
        return parse_manifold(json.loads(text))
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    if kind not in _PARSERS:
        raise ValueError(f"unknown manifold kind: {kind!r}")
    kw = {}
    if rest.strip():
        for item in rest.split(","):
            key, _, val = item.partition("=")
            if not _:
                raise ValueError(f"malformed manifold parameter: {item!r}")
            kw[key.strip()] = val.strip()
    return _PARSERS[kind](kw)
