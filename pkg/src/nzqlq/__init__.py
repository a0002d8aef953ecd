"""Spectral analysis of Nakajima-Zwanzig projected Liouvillians for Jaynes-Cummings models."""
from .model import (BathSpec, JCParams, LadderSpec, Operator, VACUUM, build_deformed, build_jc,
                    build_ladder, build_spin_boson, counter_rotating, thermal_weights)
from .liouville import (Superoperator, commutator_superoperator, lindblad_dissipator, nz_projector,
                        qlq, sector_decompose, sector_diagnostics, liouville_parity_blocks)
from .spectra import (SpectralData, MetricResult, build_metric, eigendecompose, reality_report,
                      resolvent_norm, sector_metric, spectral_projector, reduced_weights,
                      zero_mode_count)

__version__ = "0.1.0"
