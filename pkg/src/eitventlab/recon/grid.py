"""Voxel images, image series, file formats, and PGM slice export."""

import numpy as np

from .. import ioutil
from .errors import DegenerateRange, ShapeMismatch


class ImageGrid3D:
    def __init__(self, voxels):
        self.voxels = np.asarray(voxels, dtype=np.float64)
        if self.voxels.ndim != 3:
            raise ShapeMismatch("image must be a 3-axis voxel grid")

    @property
    def dims(self):
        return self.voxels.shape

    def copy(self):
        return ImageGrid3D(self.voxels.copy())


class ImageSeries:
    def __init__(self, frames, fps=20.0):
        if isinstance(frames, np.ndarray):
            data = np.asarray(frames, dtype=np.float64)
        else:
            frames = list(frames)
            if not frames:
                raise ShapeMismatch("empty image series")
            dims = frames[0].dims
            if any(f.dims != dims for f in frames):
                raise ShapeMismatch("frames must share dims")
            data = np.stack([f.voxels for f in frames])
        if data.ndim != 4:
            raise ShapeMismatch("series must be (T, nx, ny, nz)")
        self.data = data
        self.fps = fps

    @property
    def num_frames(self):
        return self.data.shape[0]

    @property
    def dims(self):
        return self.data.shape[1:]

    def frame(self, i):
        return ImageGrid3D(self.data[i])

    @property
    def p_min(self):
        return float(self.data.min())

    @property
    def p_max(self):
        return float(self.data.max())


def save_image_series(prefix, series):
    t = series.num_frames
    ioutil.write_json(
        str(prefix) + ".json",
        {"dims": list(series.dims), "fps": series.fps, "T": t},
    )
    ioutil.write_f64(str(prefix) + ".bin", series.data)


def load_image_series(prefix):
    hdr = ioutil.read_json(str(prefix) + ".json")
    data = ioutil.read_f64(str(prefix) + ".bin", (hdr["T"], *hdr["dims"]))
    return ImageSeries(data, fps=hdr["fps"])


def threshold_lowest(image, fraction=0.20):
    """Zero the voxels ranking in the lowest `fraction` by value; ties break
    by voxel index order, exactly floor(fraction * G) voxels are zeroed."""
    if not 0.0 <= fraction < 1.0:
        raise ValueError("fraction must be in [0, 1)")
    flat = image.voxels.reshape(-1).copy()
    n_zero = int(np.floor(fraction * flat.size))
    if n_zero:
        order = np.argsort(flat, kind="stable")
        flat[order[:n_zero]] = 0.0
    return ImageGrid3D(flat.reshape(image.dims))


def normalize_series(series):
    """Min-max normalize with extrema taken over the whole series (not per
    frame), mapping the series range onto [0, 1]."""
    lo, hi = series.p_min, series.p_max
    if not hi > lo:
        raise DegenerateRange(f"series range is degenerate: [{lo}, {hi}]")
    return ImageSeries((series.data - lo) / (hi - lo), fps=series.fps)


# ---------------------------------------------------------------------------
# slice views (axes: x lateral, y anterior-posterior depth, z vertical)


def coronal_slice(image, y_index=None):
    n = image.dims[1]
    return image.voxels[:, n // 2 if y_index is None else y_index, :]


def axial_slice(image, z_index=None):
    n = image.dims[2]
    return image.voxels[:, :, n // 2 if z_index is None else z_index]


def sagittal_slice(image, x_index):
    return image.voxels[x_index, :, :]


def four_view(image):
    """Central coronal, central axial, and the two lung-center sagittals."""
    nx = image.dims[0]
    return {
        "coronal": coronal_slice(image),
        "axial": axial_slice(image),
        "sagittal_left": sagittal_slice(image, nx // 4),
        "sagittal_right": sagittal_slice(image, 3 * nx // 4),
    }


def write_pgm(path, plane, lo=0.0, hi=1.0):
    """8-bit binary PGM; rows are the second axis, top row = max index."""
    arr = np.asarray(plane, dtype=np.float64)
    if hi <= lo:
        hi = lo + 1.0
    scaled = np.clip((arr - lo) / (hi - lo), 0.0, 1.0)
    img = np.round(scaled.T[::-1] * 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (img.shape[1], img.shape[0]))
        fh.write(img.tobytes())
