"""Synthetic 3D EIT lung-ventilation laboratory.

Subpackages
-----------
ndtensor  dense float64 tensors with reverse-mode autodiff and Adam
femcore   tetrahedral FEM forward model of thoracic EIT
recon     time-difference Tikhonov reconstruction onto a voxel grid
synth     synthetic subjects, contamination, filtering, windowing
vae       MultiRes-block 3D variational autoencoder
clf       latent feature maps, 2D CNN classifier, cross-validation
cli       staged pipeline orchestration
"""

__version__ = "0.1.0"
