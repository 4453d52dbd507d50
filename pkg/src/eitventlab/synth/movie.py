"""Map ventilation waveforms onto per-tet conductivity series.

Air is resistive: sigma_e(t) = sigma_bg - amplitude * v_e(t) * w_e with
w_e in [0, 1] the regional ventilation weight. Defects multiply the weight
by (1 - severity) inside their radius and slow the local time constant.
"""

import numpy as np

from ..femcore.forward import ConductivityField
from .errors import NonPositiveConductivity

SIGMA_BG = 1.0
AMPLITUDE_FRAC = 0.3  # of sigma_bg; keeps positivity with margin


def lung_weights(mesh, geometry, fvc_scale=1.0):
    """Smooth ventilation weight per tet: 1 - rho^2 inside each ellipsoid."""
    centroids = mesh.nodes[mesh.tets].mean(axis=1)
    axes = geometry.axes(fvc_scale)
    weights = np.zeros(mesh.num_tets)
    masks = []
    for center in geometry.centers():
        rho2 = (((centroids - center) / axes) ** 2).sum(axis=1)
        w = np.clip(1.0 - rho2, 0.0, None)
        masks.append(w > 0)
        weights = np.maximum(weights, w)
    return weights, masks


def conductivity_movie(
    mesh,
    spec,
    record,
    geometry,
    sigma_bg=SIGMA_BG,
    amplitude_frac=AMPLITUDE_FRAC,
):
    """One ConductivityField per record frame."""
    weights, _ = lung_weights(mesh, geometry, spec.fvc_scale)
    centroids = mesh.nodes[mesh.tets].mean(axis=1)

    # per-tet waveform index: 0 = main curve, i+1 = defect i's slowed curve
    curve_idx = np.zeros(mesh.num_tets, dtype=np.intp)
    damp = np.ones(mesh.num_tets)
    best_sev = np.full(mesh.num_tets, -1.0)
    for i, d in enumerate(spec.defects):
        inside = np.linalg.norm(centroids - np.asarray(d.center), axis=1) < d.radius
        damp[inside] *= 1.0 - d.severity
        take = inside & (d.severity > best_sev)
        curve_idx[take] = i + 1
        best_sev[take] = d.severity

    curves = np.stack([record.main] + record.defect_curves)  # (1+D, T)
    amp = amplitude_frac * sigma_bg
    movie = []
    w_eff = weights * damp
    for t in range(record.num_frames):
        sigma = sigma_bg - amp * curves[curve_idx, t] * w_eff
        if sigma.min() <= 0:
            raise NonPositiveConductivity(
                f"min sigma {sigma.min():.3e} at frame {t}; lower the amplitude"
            )
        movie.append(ConductivityField(sigma))
    return movie
