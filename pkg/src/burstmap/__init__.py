"""Adaptation maps of integrate-and-fire models with resets."""

import types

from .adaptmap import (Branch, MapSample, SlopeBand, fixed_point, invert_on_branch, phi,
                       phi_iter, phi_values, plateau, schwarzian, second_derivative_at_wstar,
                       slope_band, w_star)
from .chaos import (ChaosReport, DensityEstimate, acip_histogram, chaos_conditions,
                    tune_misiurewicz, turbulence_witness)
from .errors import (AmbiguousItinerary, BracketError, BurstmapError, ConfigError,
                     FlightError, PreconditionError)
from .flow import FlightMode, SpikeFlight, fly, fly_direct, fly_loop, variational
from .model import (Family, Landmarks, ModelParams, check_assumptions, eval_field, find_fold,
                    landmarks, standard_params)
from .orbits import (AttractorResult, Certificate, Failure, Kind, basin_gap, certify_k,
                     detect_attractor, itinerary, lyapunov)
from .singular import (SingularMap, c1_discrepancy, hausdorff_distance, phi0, phi0_orbit,
                       phi0_period)
from .sweep import SweepProtocol, SweepRow, WindowTable, extract_windows, sweep_eps, sweep_vr

__version__ = "0.1.0"

__all__ = [n for n, v in list(globals().items())
           if not n.startswith("_") and not isinstance(v, types.ModuleType)]
