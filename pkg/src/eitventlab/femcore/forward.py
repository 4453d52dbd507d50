"""P1 tetrahedral FEM for the conduction equation div(sigma grad u) = 0 with
point-electrode current sources, plus the adjoint (lead-field) Jacobian.

sigma is piecewise constant per tet. The stiffness matrix is factorized once
per conductivity and reused for every right-hand side, so the Jacobian costs
one factorization plus one solve per injection and per distinct measurement
pair. One reference node (index 0) is grounded.
"""

import weakref
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import splu

from .. import ioutil
from .errors import SingularSystem

GROUND_NODE = 0
RESIDUAL_TOL = 1e-10


@dataclass
class ConductivityField:
    sigma: np.ndarray

    def __post_init__(self):
        self.sigma = np.asarray(self.sigma, dtype=np.float64)
        if self.sigma.ndim != 1 or np.any(self.sigma <= 0):
            raise ValueError("sigma must be a positive per-tet vector")


@dataclass
class VoltageSeries:
    values: np.ndarray  # (T, M), frame-major
    fps: float = 20.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("voltage series must be (T, M)")

    @property
    def num_frames(self):
        return self.values.shape[0]

    @property
    def num_channels(self):
        return self.values.shape[1]


def save_voltage_series(prefix, series, pattern_hash=""):
    t, m = series.values.shape
    ioutil.write_json(
        str(prefix) + ".json",
        {"fps": series.fps, "M": m, "T": t, "pattern_hash": pattern_hash},
    )
    ioutil.write_f64(str(prefix) + ".bin", series.values)


def load_voltage_series(prefix):
    hdr = ioutil.read_json(str(prefix) + ".json")
    values = ioutil.read_f64(str(prefix) + ".bin", (hdr["T"], hdr["M"]))
    return VoltageSeries(values, fps=hdr["fps"])


class _Geometry:
    """Per-tet P1 gradients and volumes; sigma-independent."""

    def __init__(self, mesh):
        p = mesh.nodes[mesh.tets]
        edges = p[:, 1:] - p[:, :1]  # (E, 3, 3)
        self.volumes = np.linalg.det(edges) / 6.0
        inv = np.linalg.inv(edges)  # rows of inv.T are grads of phi_1..3
        g123 = inv.transpose(0, 2, 1)
        g0 = -g123.sum(axis=1, keepdims=True)
        self.grads = np.concatenate([g0, g123], axis=1)  # (E, 4, 3)
        self.rows = np.repeat(mesh.tets, 4, axis=1).reshape(-1)
        self.cols = np.tile(mesh.tets, (1, 4)).reshape(-1)


_geom_cache = weakref.WeakKeyDictionary()


def geometry(mesh):
    geo = _geom_cache.get(mesh)
    if geo is None:
        geo = _Geometry(mesh)
        _geom_cache[mesh] = geo
    return geo


def assemble_stiffness(mesh, sigma):
    geo = geometry(mesh)
    coeff = sigma.sigma * geo.volumes
    local = np.einsum("e,eik,ejk->eij", coeff, geo.grads, geo.grads)
    n = mesh.num_nodes
    return coo_matrix((local.reshape(-1), (geo.rows, geo.cols)), shape=(n, n)).tocsc()


def electrode_split(mesh, idx):
    """Node ids and current-split weights of one electrode group."""
    nodes = np.asarray(mesh.electrode_nodes[idx], dtype=np.int64)
    if getattr(mesh, "electrode_weights", None) is not None:
        return nodes, mesh.electrode_weights[idx]
    return nodes, np.full(len(nodes), 1.0 / len(nodes))


def injection_rhs(mesh, pattern):
    """One column per injection; currents sum to zero per column."""
    b = np.zeros((mesh.num_nodes, len(pattern.injections)))
    for col, (src, sink, amp) in enumerate(pattern.injections):
        n, w = electrode_split(mesh, src)
        b[n, col] += amp * w
        n, w = electrode_split(mesh, sink)
        b[n, col] -= amp * w
    return b


def pair_rhs(mesh, pairs, amplitude=1.0):
    b = np.zeros((mesh.num_nodes, len(pairs)))
    for col, (pos, neg) in enumerate(pairs):
        n, w = electrode_split(mesh, pos)
        b[n, col] += amplitude * w
        n, w = electrode_split(mesh, neg)
        b[n, col] -= amplitude * w
    return b


class _Factorization:
    def __init__(self, mesh, sigma):
        self.mesh = mesh
        k = assemble_stiffness(mesh, sigma)
        keep = np.arange(mesh.num_nodes) != GROUND_NODE
        self._keep = keep
        self._k_red = k[keep][:, keep].tocsc()
        try:
            self._lu = splu(self._k_red)
        except RuntimeError as exc:  # pragma: no cover - singular factorization
            raise SingularSystem(str(exc)) from exc

    def solve(self, b):
        """Solve for full nodal potentials with the ground node pinned to 0."""
        b = np.atleast_2d(b.T).T
        br = b[self._keep]
        ur = self._lu.solve(br)
        res = self._k_red @ ur - br
        scale = max(np.abs(br).max(), 1e-300)
        if np.abs(res).max() / scale > RESIDUAL_TOL:
            raise SingularSystem(
                f"solver residual {np.abs(res).max() / scale:.2e} above {RESIDUAL_TOL}"
            )
        u = np.zeros((self.mesh.num_nodes, b.shape[1]))
        u[self._keep] = ur
        return u


def electrode_potential(mesh, u, group_idx):
    """Weighted patch-average potential; same weights as the current split,
    which is what keeps discrete reciprocity exact."""
    nodes, w = electrode_split(mesh, group_idx)
    return np.tensordot(w, u[nodes], axes=(0, 0))


def _measure(mesh, u_cols, pattern):
    out = []
    for col, pairs in enumerate(pattern.measurements):
        u = u_cols[:, col]
        for pos, neg in pairs:
            out.append(electrode_potential(mesh, u, pos) - electrode_potential(mesh, u, neg))
    return np.array(out)


def solve_forward(mesh, sigma, pattern):
    """Boundary voltages for every (injection, measurement pair), in pattern
    order, as one flat frame."""
    fact = _Factorization(mesh, sigma)
    u = fact.solve(injection_rhs(mesh, pattern))
    return _measure(mesh, u, pattern)


def simulate_series(mesh, sigma_series, pattern, fps=20.0):
    if len(sigma_series) == 0:
        raise ValueError("empty conductivity series")
    frames = [solve_forward(mesh, s, pattern) for s in sigma_series]
    return VoltageSeries(np.stack(frames), fps=fps)


def _field_gradients(mesh, u_cols):
    geo = geometry(mesh)
    return np.einsum("eic,eif->fec", geo.grads, u_cols[mesh.tets])


def compute_jacobian(mesh, sigma0, pattern):
    """d(voltage)/d(sigma_e) rows in pattern order: the lead-field integral
    -int_e grad(u_inj) . grad(w_meas) dV at sigma0."""
    fact = _Factorization(mesh, sigma0)
    gu = _field_gradients(mesh, fact.solve(injection_rhs(mesh, pattern)))

    distinct = sorted({p for pairs in pattern.measurements for p in pairs})
    pair_col = {p: i for i, p in enumerate(distinct)}
    gw = _field_gradients(mesh, fact.solve(pair_rhs(mesh, distinct)))

    vol = geometry(mesh).volumes
    rows = []
    for inj, pairs in enumerate(pattern.measurements):
        if not pairs:
            continue
        sel = gw[[pair_col[p] for p in pairs]]
        rows.append(-np.einsum("ec,pec->pe", gu[inj], sel) * vol)
    return np.vstack(rows)


class ForwardOperator:
    """Bundles mesh + pattern + reference conductivity with a lazy Jacobian."""

    def __init__(self, mesh, pattern, sigma0):
        self.mesh = mesh
        self.pattern = pattern
        self.sigma0 = sigma0
        self._jacobian = None

    @property
    def jacobian(self):
        if self._jacobian is None:
            self._jacobian = compute_jacobian(self.mesh, self.sigma0, self.pattern)
        return self._jacobian

    def solve(self, sigma):
        return solve_forward(self.mesh, sigma, self.pattern)
