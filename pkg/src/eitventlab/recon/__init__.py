from .errors import DegenerateRange, ReconError, ShapeMismatch, SingularRegularization
from .grid import (
    ImageGrid3D,
    ImageSeries,
    axial_slice,
    coronal_slice,
    four_view,
    load_image_series,
    normalize_series,
    sagittal_slice,
    save_image_series,
    threshold_lowest,
    write_pgm,
)
from .tikhonov import (
    ReconMatrix,
    build_recon_matrix,
    containing_tets,
    default_grid_bounds,
    reconstruct_frame,
    reconstruct_series_values,
    voxel_centers,
)
