"""Reconstruction matrix properties, thresholding, and series normalization."""

import numpy as np
import pytest

from eitventlab import femcore as fc
from eitventlab import recon as rc

DIMS = (24, 16, 24)


@pytest.fixture(scope="session")
def setup():
    mesh = fc.build_cylinder_mesh(0.15, 0.30, 0.0375)
    pattern = fc.two_loop_pattern()
    sigma0 = fc.ConductivityField(np.ones(mesh.num_tets))
    op = fc.ForwardOperator(mesh, pattern, sigma0)
    recon = rc.build_recon_matrix(op, dims=DIMS)
    return mesh, op, recon


def voxel_of(point, recon):
    return np.array(
        [
            (point[i] - recon.bounds[i][0])
            / (recon.bounds[i][1] - recon.bounds[i][0])
            * recon.dims[i]
            - 0.5
            for i in range(3)
        ]
    )


def blob_centroid(img):
    pos = np.clip(img.voxels, 0.0, None)
    mask = pos > 0.5 * pos.max()
    idx = np.argwhere(mask)
    w = pos[mask]
    return (idx * w[:, None]).sum(axis=0) / w.sum()


class TestReconMatrix:
    def test_zero_difference_gives_zero_image(self, setup):
        _, op, recon = setup
        d = np.ones(op.pattern.num_measurements)
        img = rc.reconstruct_frame(recon, d, d)
        assert np.all(img.voxels == 0.0)

    def test_linearity_is_exact(self, setup):
        _, op, recon = setup
        rng = np.random.default_rng(5)
        zero = np.zeros(op.pattern.num_measurements)
        delta = rng.normal(size=op.pattern.num_measurements)
        img1 = rc.reconstruct_frame(recon, zero, delta)
        img3 = rc.reconstruct_frame(recon, zero, 3.0 * delta)
        assert np.array_equal(img3.voxels, (recon.r @ (3.0 * delta)).reshape(DIMS))
        scale = np.abs(img1.voxels).max()
        assert np.abs(img3.voxels - 3.0 * img1.voxels).max() < 1e-12 * scale

    def test_huge_lambda_kills_reconstruction(self, setup):
        _, op, _ = setup
        small = rc.build_recon_matrix(op, dims=(8, 8, 8))
        big = rc.build_recon_matrix(op, lam=1e9 * small.lam, dims=(8, 8, 8))
        delta = np.ones(op.pattern.num_measurements)
        img = rc.reconstruct_frame(big, np.zeros_like(delta), delta)
        ref = rc.reconstruct_frame(small, np.zeros_like(delta), delta)
        assert np.abs(img.voxels).max() < 1e-12 * np.abs(ref.voxels).max()

    def test_lambda_zero_rank_deficient_raises(self, setup):
        _, op, _ = setup
        with pytest.raises(rc.SingularRegularization):
            rc.build_recon_matrix(op, lam=0.0, dims=(8, 8, 8))

    def test_shape_mismatch(self, setup):
        _, op, recon = setup
        with pytest.raises(rc.ShapeMismatch):
            rc.reconstruct_frame(recon, np.zeros(3), np.zeros(3))

    def test_out_of_domain_voxels_are_zero_rows(self, setup):
        _, _, recon = setup
        outside = recon.tet_of_voxel < 0
        assert outside.any()
        assert np.all(recon.r[outside] == 0.0)

    def test_jacobian_column_image_concentrates_at_element(self, setup):
        mesh, op, recon = setup
        centroids = mesh.nodes[mesh.tets].mean(axis=1)
        # pick a mid-band element away from the axis
        cand = np.where(
            (np.abs(centroids[:, 2] - 0.15) < 0.03)
            & (np.linalg.norm(centroids[:, :2], axis=1) > 0.05)
            & (np.linalg.norm(centroids[:, :2], axis=1) < 0.10)
        )[0]
        e = int(cand[0])
        delta_d = op.jacobian[:, e] * 1e-3
        img = rc.reconstruct_frame(recon, np.zeros_like(delta_d), delta_d)
        err = np.linalg.norm(blob_centroid(img) - voxel_of(centroids[e], recon))
        assert err <= 2.0

    def test_single_inclusion_localization(self, setup):
        mesh, op, recon = setup
        centroids = mesh.nodes[mesh.tets].mean(axis=1)
        d_ref = op.solve(fc.ConductivityField(np.ones(mesh.num_tets)))
        rng = np.random.default_rng(11)
        for _ in range(3):  # acceptance runs the full ten
            r = 0.5 * 0.15 * np.sqrt(rng.uniform())
            theta = rng.uniform(0, 2 * np.pi)
            z = rng.uniform(0.11, 0.19)
            center = np.array([r * np.cos(theta), r * np.sin(theta), z])
            s = np.ones(mesh.num_tets)
            s[np.linalg.norm(centroids - center, axis=1) < 0.035] += 0.5
            img = rc.reconstruct_frame(
                recon, d_ref, op.solve(fc.ConductivityField(s))
            )
            assert img.voxels.reshape(-1)[np.abs(img.voxels).argmax()] > 0
            err = np.linalg.norm(blob_centroid(img) - voxel_of(center, recon))
            assert err <= 2.0

    def test_two_blob_mass_ratio(self, setup):
        mesh, op, recon = setup
        centroids = mesh.nodes[mesh.tets].mean(axis=1)
        d_ref = op.solve(fc.ConductivityField(np.ones(mesh.num_tets)))
        left = np.array([-0.07, 0.0, 0.15])
        right = np.array([0.07, 0.0, 0.15])
        s = np.ones(mesh.num_tets)
        s[np.linalg.norm(centroids - left, axis=1) < 0.04] += 0.5
        s[np.linalg.norm(centroids - right, axis=1) < 0.04] += 0.25
        img = rc.reconstruct_frame(recon, d_ref, op.solve(fc.ConductivityField(s)))
        pos = np.clip(img.voxels, 0.0, None)
        nx = DIMS[0]
        # true swing ratio weighted by affected tet volumes
        vol = fc.geometry(mesh).volumes
        lmask = np.linalg.norm(centroids - left, axis=1) < 0.04
        rmask = np.linalg.norm(centroids - right, axis=1) < 0.04
        true_ratio = (0.5 * vol[lmask].sum()) / (0.25 * vol[rmask].sum())
        got_ratio = pos[: nx // 2].sum() / pos[nx // 2 :].sum()
        assert abs(got_ratio - true_ratio) / true_ratio < 0.25


class TestImageOps:
    def test_threshold_ranked_values(self):
        img = rc.ImageGrid3D(np.arange(1.0, 11.0).reshape(10, 1, 1))
        out = rc.threshold_lowest(img, 0.2)
        assert np.array_equal(out.voxels.reshape(-1)[:2], [0.0, 0.0])
        assert np.array_equal(out.voxels.reshape(-1)[2:], np.arange(3.0, 11.0))

    def test_threshold_fraction_zero_is_identity(self, rng):
        img = rc.ImageGrid3D(rng.normal(size=(4, 3, 2)))
        out = rc.threshold_lowest(img, 0.0)
        assert np.array_equal(out.voxels, img.voxels)

    def test_threshold_tie_break_by_index(self):
        img = rc.ImageGrid3D(np.ones((5, 2, 1)))
        out = rc.threshold_lowest(img, 0.2)
        flat = out.voxels.reshape(-1)
        assert np.array_equal(flat[:2], [0.0, 0.0])
        assert np.all(flat[2:] == 1.0)

    def test_threshold_zeroes_exactly_floor_fraction(self, rng):
        img = rc.ImageGrid3D(rng.normal(size=(7, 5, 3)) + 10.0)
        out = rc.threshold_lowest(img, 0.37)
        assert (out.voxels == 0.0).sum() == int(np.floor(0.37 * 7 * 5 * 3))

    def test_normalize_known_extrema(self):
        frames = np.array([[[[-2.0, 6.0]]], [[[2.0, 0.0]]]])
        series = rc.ImageSeries(frames)
        out = rc.normalize_series(series)
        assert out.data.min() == 0.0 and out.data.max() == 1.0
        assert np.allclose(out.data[1, 0, 0, 0], 0.5)

    def test_normalize_identity_on_unit_range(self, rng):
        data = rng.uniform(size=(3, 4, 4, 4))
        data[0, 0, 0, 0] = 0.0
        data[1, 0, 0, 0] = 1.0
        out = rc.normalize_series(rc.ImageSeries(data))
        assert np.abs(out.data - data).max() < 1e-15

    def test_normalize_uses_series_extrema_not_frame(self):
        frames = np.zeros((2, 2, 2, 2))
        frames[0] = 1.0  # inspiration peak
        frames[1] = 0.25  # mid-expiration
        out = rc.normalize_series(rc.ImageSeries(frames))
        assert out.data[1].max() < 1.0

    def test_normalize_degenerate_raises(self):
        with pytest.raises(rc.DegenerateRange):
            rc.normalize_series(rc.ImageSeries(np.ones((2, 2, 2, 2))))

    def test_series_file_round_trip(self, rng, tmp_path):
        series = rc.ImageSeries(rng.uniform(size=(3, 4, 5, 6)), fps=20.0)
        rc.save_image_series(tmp_path / "img", series)
        loaded = rc.load_image_series(tmp_path / "img")
        assert loaded.fps == 20.0
        assert loaded.data.tobytes() == series.data.tobytes()

    def test_pgm_export(self, tmp_path):
        plane = np.zeros((4, 6))
        rc.write_pgm(tmp_path / "z.pgm", plane)
        raw = (tmp_path / "z.pgm").read_bytes()
        assert raw.startswith(b"P5\n4 6\n255\n")
        assert raw.endswith(b"\x00" * 24)
