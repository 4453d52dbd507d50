"""Structured tetrahedral cylinder meshes with two 16-electrode rings.

Construction: a triangulated half disk (center node, concentric rings with
8k nodes on full ring k) is mirrored across y=0, so the layer triangulation
is exactly symmetric under y -> -y. Layers are extruded to prisms and each
prism is split into 3 tets with the lowest-global-index diagonal rule, which
keeps shared quad faces conforming.

Electrode j of a ring sits at angle 2*pi*j/16 on the outer ring of the layer
nearest the requested height; groups are single boundary nodes (point
electrode model). Groups 0-15 belong to the lower ring, 16-31 to the upper.
"""

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .. import ioutil
from .errors import MeshGenFailure


class TetMesh:
    def __init__(self, nodes, tets, boundary_faces, electrode_nodes, electrode_weights=None):
        self.nodes = np.asarray(nodes, dtype=np.float64)
        self.tets = np.asarray(tets, dtype=np.int64)
        self.boundary_faces = np.asarray(boundary_faces, dtype=np.int64)
        self.electrode_nodes = [list(map(int, g)) for g in electrode_nodes]
        # per-group current-split weights (gap model); None means equal split.
        # Derived data: not part of the mesh file format.
        self.electrode_weights = electrode_weights

    @property
    def num_nodes(self):
        return len(self.nodes)

    @property
    def num_tets(self):
        return len(self.tets)

    def tet_volumes(self):
        p = self.nodes[self.tets]
        return np.linalg.det(p[:, 1:] - p[:, :1]) / 6.0

    def save(self, path):
        ioutil.write_json(
            path,
            {
                "nodes": self.nodes.tolist(),
                "tets": self.tets.tolist(),
                "boundary_faces": self.boundary_faces.tolist(),
                "electrodes": self.electrode_nodes,
            },
        )

    @classmethod
    def load(cls, path):
        d = ioutil.read_json(path)
        return cls(d["nodes"], d["tets"], d["boundary_faces"], d["electrodes"])


def _half_disk(radius, nr):
    """Nodes and triangles of the upper half disk (angles 0..pi)."""
    pts = [(0.0, 0.0)]
    keys = [(0, 0)]  # (ring, angle index in the ring's own units)
    ring_ids = []  # per ring: node ids ordered by angle 0..pi
    for k in range(1, nr + 1):
        nk = 8 * k
        ids = []
        for j in range(nk // 2 + 1):
            theta = 2.0 * np.pi * j / nk
            r = radius * k / nr
            ids.append(len(pts))
            pts.append((r * np.cos(theta), r * np.sin(theta)))
            keys.append((k, j))
        ring_ids.append(ids)

    tris = []
    inner = ring_ids[0]
    for j in range(len(inner) - 1):
        tris.append((0, inner[j], inner[j + 1]))
    for k in range(nr - 1):
        tris.extend(_strip(ring_ids[k], ring_ids[k + 1]))
    return np.array(pts), tris, keys, ring_ids


def _strip(inner, outer):
    """Two-pointer triangulation of a half annulus; both id lists span 0..pi."""
    m_in, m_out = len(inner) - 1, len(outer) - 1
    tris = []
    i = o = 0
    while i < m_in or o < m_out:
        adv_outer = o < m_out and (i == m_in or (o + 1) * m_in <= (i + 1) * m_out)
        if adv_outer:
            tris.append((inner[i], outer[o], outer[o + 1]))
            o += 1
        else:
            tris.append((inner[i], outer[o], inner[i + 1]))
            i += 1
    return tris


def _mirror_disk(pts, tris, keys):
    """Reflect across y=0; y=0 nodes are shared, orientation is re-fixed."""
    mirror = np.arange(len(pts))
    full_pts = list(map(tuple, pts))
    full_keys = [(k, j, 0) for k, j in keys]
    for idx, (x, y) in enumerate(pts):
        if y > 1e-14:
            mirror[idx] = len(full_pts)
            full_pts.append((x, -y))
            full_keys.append((keys[idx][0], keys[idx][1], 1))
    full_tris = list(tris)
    for a, b, c in tris:
        ma, mb, mc = mirror[a], mirror[b], mirror[c]
        if (ma, mb, mc) != (a, b, c):
            full_tris.append((ma, mc, mb))
    pts_arr = np.array(full_pts)
    fixed = []
    for a, b, c in full_tris:
        pa, pb, pc = pts_arr[a], pts_arr[b], pts_arr[c]
        area2 = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1])
        fixed.append((a, b, c) if area2 > 0 else (a, c, b))
    # total node order for the prism-split diagonals, invariant under the
    # mirror map: partners tie on (ring, folded angle) but never share an edge
    rank = np.empty(len(full_pts), dtype=np.int64)
    order = sorted(range(len(full_pts)), key=lambda i: full_keys[i])
    rank[order] = np.arange(len(full_pts))
    return pts_arr, fixed, mirror, rank


def _split_prism(a, b, c, np_layer, rank):
    """3-tet split of the prism over triangle (a,b,c); on every quad the
    diagonal runs from the bottom of the lower-ranked node to the top of the
    higher-ranked one, so shared faces conform."""
    p, q, r = sorted((a, b, c), key=lambda g: rank[g % np_layer])
    top = np_layer
    return [
        (p, q, r, r + top),
        (p, q, r + top, q + top),
        (p, q + top, r + top, p + top),
    ]


def _orient_positive(nodes, tets):
    p = nodes[tets]
    vol = np.linalg.det(p[:, 1:] - p[:, :1]) / 6.0
    flip = vol < 0
    tets[flip, 2], tets[flip, 3] = tets[flip, 3].copy(), tets[flip, 2].copy()
    return tets


def boundary_faces_of(tets):
    counts = {}
    for tet in tets:
        for f in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)):
            key = tuple(sorted((tet[f[0]], tet[f[1]], tet[f[2]])))
            counts[key] = counts.get(key, 0) + 1
    return np.array([k for k, v in counts.items() if v == 1], dtype=np.int64)


def min_dihedral_deg(nodes, tets):
    p = nodes[tets]
    # inward normal of the face opposite each vertex
    normals = np.empty((len(tets), 4, 3))
    for i in range(4):
        others = [j for j in range(4) if j != i]
        va = p[:, others[1]] - p[:, others[0]]
        vb = p[:, others[2]] - p[:, others[0]]
        n = np.cross(va, vb)
        sign = np.sign(np.einsum("ej,ej->e", n, p[:, i] - p[:, others[0]]))
        normals[:, i] = n * sign[:, None]
    norms = np.linalg.norm(normals, axis=2)
    worst = 180.0
    for i in range(4):
        for j in range(i + 1, 4):
            cosang = -np.einsum("ek,ek->e", normals[:, i], normals[:, j]) / (
                norms[:, i] * norms[:, j]
            )
            ang = np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0)))
            worst = min(worst, ang.min())
    return worst


def nodal_boundary_area(nodes, boundary_faces):
    """Lumped boundary area per node (1/3 of each adjacent boundary face)."""
    area = np.zeros(len(nodes))
    p = nodes[boundary_faces]
    fa = 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)
    for i in range(3):
        np.add.at(area, boundary_faces[:, i], fa / 3.0)
    return area


def is_connected(num_nodes, tets):
    pairs = []
    for i in range(4):
        for j in range(i + 1, 4):
            pairs.append(tets[:, (i, j)])
    edges = np.concatenate(pairs)
    adj = coo_matrix(
        (np.ones(len(edges)), (edges[:, 0], edges[:, 1])),
        shape=(num_nodes, num_nodes),
    )
    ncomp, _ = connected_components(adj, directed=False)
    return ncomp == 1


def build_cylinder_mesh(radius, height, target_edge, ring_heights=(0.3, 0.7), electrode_size=None):
    """Cylinder mesh with 16 equally spaced electrodes on each of two rings."""
    if not target_edge < radius / 2:
        raise ValueError("target_edge must be smaller than radius/2")
    nr = max(2, round(radius / target_edge))
    nr += nr % 2  # outer ring needs a node at every multiple of 2*pi/16
    nz = max(2, round(height / target_edge))

    half_pts, half_tris, half_keys, _ = _half_disk(radius, nr)
    pts2d, tris, mirror, rank = _mirror_disk(half_pts, half_tris, half_keys)
    np_layer = len(pts2d)

    nodes = np.concatenate(
        [
            np.column_stack([pts2d[:, 0], pts2d[:, 1], np.full(np_layer, l * height / nz)])
            for l in range(nz + 1)
        ]
    )
    tets = []
    for l in range(nz):
        base = l * np_layer
        for a, b, c in tris:
            tets.extend(_split_prism(a + base, b + base, c + base, np_layer, rank))
    tets = _orient_positive(nodes, np.array(tets, dtype=np.int64))

    # outer-ring 2D node at angle index j (units of 2*pi / (8*nr))
    n_outer = 8 * nr
    outer_start = 1 + sum(8 * k // 2 + 1 for k in range(1, nr))
    outer_half = list(range(outer_start, outer_start + n_outer // 2 + 1))

    def outer_node(angle_idx):
        angle_idx %= n_outer
        if angle_idx <= n_outer // 2:
            return outer_half[angle_idx]
        return int(mirror[outer_half[n_outer - angle_idx]])

    step = n_outer // 16
    centers = []
    for frac in ring_heights:
        layer = min(nz, max(0, round(frac * nz)))
        centers.extend(layer * np_layer + outer_node(j * step) for j in range(16))

    bfaces = boundary_faces_of(tets)
    if electrode_size is None:
        # ellipse cut (2*sr) must stay inside half the electrode chord
        # spacing 2R sin(pi/16); factor 0.246 leaves a 1% margin
        sr = 0.246 * (2.0 * np.pi * radius / 16.0)
        gap = abs(ring_heights[1] - ring_heights[0]) * height
        sz = min(1.7 * sr, 0.24 * gap)
        electrode_size = (sr, sz)
    electrodes, weights = _gaussian_patches(nodes, bfaces, centers, electrode_size)

    mesh = TetMesh(nodes, tets, bfaces, electrodes, weights)

    if mesh.tet_volumes().min() <= 0:
        raise MeshGenFailure("degenerate tet produced")
    quality = min_dihedral_deg(nodes, tets)
    if quality <= 10.0:
        raise MeshGenFailure(f"min dihedral angle {quality:.2f} deg below bound")
    if not is_connected(mesh.num_nodes, tets):
        raise MeshGenFailure("mesh is not connected")
    boundary_nodes = set(mesh.boundary_faces.ravel().tolist())
    seen = set()
    for group in mesh.electrode_nodes:
        if not set(group) <= boundary_nodes:
            raise MeshGenFailure("electrode node not on the boundary")
        if seen & set(group):
            raise MeshGenFailure("electrode groups overlap")
        seen |= set(group)
    return mesh


def _gaussian_patches(nodes, bfaces, centers, electrode_size, cut=2.0):
    """Finite electrode patches: boundary nodes inside an ellipse around each
    center (sr along the wall, sz vertically), current split by a Gaussian
    taper times lumped boundary area. sr=sz=0 degenerates to point groups."""
    sr, sz = electrode_size
    if sr <= 0 or sz <= 0:
        return [[int(c)] for c in centers], [np.array([1.0]) for _ in centers]
    area = nodal_boundary_area(nodes, bfaces)
    bset = np.unique(bfaces)
    groups, weights = [], []
    for c in centers:
        dxy = np.linalg.norm(nodes[bset, :2] - nodes[c, :2], axis=1)
        dz = np.abs(nodes[bset, 2] - nodes[c, 2])
        q = (dxy / sr) ** 2 + (dz / sz) ** 2
        inside = q < cut * cut
        order = np.lexsort((bset[inside], q[inside]))
        sel = bset[inside][order]
        w = area[sel] * np.exp(-q[inside][order] / 2.0)
        weights.append(w / w.sum())
        groups.append(sel.tolist())
    return groups, weights
