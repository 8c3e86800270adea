"""Numerics for logarithmic capacity, grid potential envelopes, log-weighted
Bergman spaces, and the log-domain chain recursion, with a unified CLI."""

from ._backend import BACKEND, HAS_NUMBA
from .geometry import (IntervalUnionSet, PlanarGridDomain,
                       HartogsProfileDomain, FiberRegion, disk_spec,
                       annulus_spec, disk_minus_set_spec, polygon_spec,
                       domain_spec_from_json, rasterize_domain, grid_to_csv,
                       interior_connected)
from .capacity import (PlanarCompactSet, EquilibriumSolution,
                       DensityIndexReport, NoConvergence, chebyshev_pattern,
                       interval_capacity, log_capacity, closed_form_bounds,
                       annulus_complement_slice, carleson_totik_set,
                       gamma_density_set, interval_union_slicer,
                       punctured_disk_slicer, staircase_set, verify_example5)
from .envelopes import (GridFunction, SublevelSet, IndexCertificate,
                        relative_extremal, green_function, sublevel,
                        check_blocki_bounds, fit_index_certificate,
                        check_lemma21, check_lemma22, field_to_csv)
from .orlicz_bergman import (OrliczParams, SampledFunction, KernelApprox,
                             function_from_json, disk_samples,
                             annulus_samples, rectangle_samples,
                             hartogs_samples, hartogs_orbit_samples, lp_norm,
                             luxemburg_norm, orlicz_props_check, disk_kernel,
                             annulus_kernel, coefficient_check, kernel_eval,
                             reproducing_check, span_density_test,
                             sublevel_integral_scan, dyadic_orlicz_certifier,
                             lemma41_integrals, rotational_average,
                             contour_coefficient, laurent_tail_masses)
from .chain import (ChainParams, ChainTrace, admissibility, step_map,
                    closed_form_start, chain_length)

__version__ = "0.1.0"
