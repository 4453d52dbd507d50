"""Time-difference Tikhonov reconstruction onto a regular voxel grid.

The per-tet solution solves (J^T J + lambda^2 D)^-1 J^T with the diagonal
penalty D = diag(J^T J)^alpha. alpha=0 is plain identity Tikhonov; the
default alpha=0.5 weights the penalty by sensitivity, which is what keeps
low-sensitivity regions near the axis localizable on the desk-scale grid.
Substituting Jw = J D^-1/2 turns it into an identity-penalty problem, and
that is evaluated through the algebraically identical dual form
Jw^T (Jw Jw^T + lambda^2 I)^-1, which only ever factorizes an M x M system.

Voxelization samples the tet containing each voxel center; voxel centers
outside the mesh get all-zero rows.
"""

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.spatial import cKDTree

from ..femcore.forward import geometry
from .errors import ShapeMismatch, SingularRegularization
from .grid import ImageGrid3D


def default_grid_bounds(mesh):
    lo = mesh.nodes.min(axis=0)
    hi = mesh.nodes.max(axis=0)
    return tuple((float(a), float(b)) for a, b in zip(lo, hi))


def voxel_centers(dims, bounds):
    axes = [
        lo + (hi - lo) * (np.arange(n) + 0.5) / n for n, (lo, hi) in zip(dims, bounds)
    ]
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel(), gz.ravel()])


def containing_tets(mesh, points, k=48, tol=1e-10):
    """Index of the tet containing each point, -1 if outside the mesh."""
    geo = geometry(mesh)
    p0 = mesh.nodes[mesh.tets[:, 0]]
    g123 = geo.grads[:, 1:, :]
    centroids = mesh.nodes[mesh.tets].mean(axis=1)
    tree = cKDTree(centroids)
    k = min(k, mesh.num_tets)
    _, cand = tree.query(points, k=k)
    cand = np.atleast_2d(cand)
    result = np.full(len(points), -1, dtype=np.int64)
    unresolved = np.arange(len(points))
    for rank in range(k):
        if not len(unresolved):
            break
        tets = cand[unresolved, rank]
        rel = points[unresolved] - p0[tets]
        lam = np.einsum("eic,ec->ei", g123[tets], rel)
        lam0 = 1.0 - lam.sum(axis=1)
        inside = (lam.min(axis=1) >= -tol) & (lam0 >= -tol)
        result[unresolved[inside]] = tets[inside]
        unresolved = unresolved[~inside]
    return result


class ReconMatrix:
    def __init__(self, r, lam, dims, bounds, tet_of_voxel, penalty_alpha=0.5):
        self.r = r  # (G, M)
        self.lam = lam
        self.penalty_alpha = penalty_alpha
        self.dims = tuple(dims)
        self.bounds = bounds
        self.tet_of_voxel = tet_of_voxel

    @property
    def num_voxels(self):
        return int(np.prod(self.dims))


def build_recon_matrix(forward_op, lam=None, dims=(24, 16, 24), bounds=None, penalty_alpha=0.5):
    """Map voltage differences to voxel conductivity changes.

    lam=None selects lambda^2 = 1e-3 * max(diag(Jw^T Jw)) on the whitened
    system; with penalty_alpha=0 that is exactly 1e-3 * max(diag(J^T J)).
    """
    j = forward_op.jacobian
    m, n_tets = j.shape
    col_sq = np.einsum("me,me->e", j, j)  # diag of J^T J without forming it
    if np.any(col_sq <= 0) and penalty_alpha != 0:
        raise SingularRegularization("zero-sensitivity element; cannot whiten")
    whiten = col_sq ** (-0.5 * penalty_alpha) if penalty_alpha else np.ones(n_tets)
    jw = j * whiten[None, :]
    if lam is None:
        lam = float(np.sqrt(1e-3 * np.einsum("me,me->e", jw, jw).max()))
    if lam == 0.0:
        if m < n_tets or np.linalg.matrix_rank(jw) < n_tets:
            raise SingularRegularization(
                "lambda=0 with rank-deficient J^T J; choose lambda > 0"
            )
    gram = jw @ jw.T
    gram[np.diag_indices_from(gram)] += lam * lam
    try:
        chol = cho_factor(gram)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise SingularRegularization(str(exc)) from exc
    r_tet = (jw.T @ cho_solve(chol, np.eye(m))) * whiten[:, None]  # (E, M)

    mesh = forward_op.mesh
    if bounds is None:
        bounds = default_grid_bounds(mesh)
    tet_of_voxel = containing_tets(mesh, voxel_centers(dims, bounds))
    g = int(np.prod(dims))
    r = np.zeros((g, m))
    inside = tet_of_voxel >= 0
    r[inside] = r_tet[tet_of_voxel[inside]]
    return ReconMatrix(r, lam, dims, bounds, tet_of_voxel, penalty_alpha)


def reconstruct_frame(recon, d_ref, d_t):
    """Linear time-difference image R @ (d_t - d_ref)."""
    d_ref = np.asarray(d_ref, dtype=np.float64)
    d_t = np.asarray(d_t, dtype=np.float64)
    if d_ref.shape != d_t.shape or d_ref.shape != (recon.r.shape[1],):
        raise ShapeMismatch(
            f"frames {d_ref.shape}/{d_t.shape} vs matrix M={recon.r.shape[1]}"
        )
    return ImageGrid3D((recon.r @ (d_t - d_ref)).reshape(recon.dims))


def reconstruct_series_values(recon, d_ref, frames):
    """Batched reconstruction of many frames against one reference."""
    diff = np.asarray(frames) - np.asarray(d_ref)[None, :]
    out = diff @ recon.r.T  # (T, G)
    return out.reshape((len(frames), *recon.dims))
