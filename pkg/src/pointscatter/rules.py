"""Bundled quadrature settings for a scenario, with a single refinement level.

Level 0 is the default resolution; every level doubles the panel counts of
all rules (heavy grid, shift-variable rule, pair rule, dim-3 rules).
"""
from dataclasses import dataclass, field

import numpy as np

from .operators import KRule, symmetric_rule
from .quadrature import (LineGrid, composite_nodes, graded_edges, make_line, make_rotations,
                         make_sphere)


@dataclass(frozen=True, eq=False)
class PairTemplate:
    """Rule on [0, 1] graded geometrically toward the ends flagged in `graded`.

    Used for the light-momentum integral of the second-order term, whose
    integrand has a kink and a Lorentzian peak of width ~ λα₀ at each end.
    """
    t: np.ndarray
    w: np.ndarray


def pair_template(n_uniform, n_per_panel, left=True, right=True, t_min=1e-6, t_grade=0.125,
                  ratio=8.0):
    ng = int(np.ceil(np.log(t_grade / t_min) / np.log(ratio)))
    geo = t_grade * ratio ** -np.arange(ng, -1, -1.0)
    lo = np.concatenate([[0.0], geo]) if left else np.array([0.0])
    hi = 1 - lo[::-1] if right else np.array([1.0])
    a = lo[-1]
    b = hi[0]
    mid = np.linspace(a, b, n_uniform + 1)
    edges = np.concatenate([lo[:-1], mid, hi[1:]])
    t, w = composite_nodes(edges, n_per_panel)
    return PairTemplate(t, w)


@dataclass(frozen=True, eq=False)
class Rules:
    dim: int
    level: int
    heavy: LineGrid = None
    krule: KRule = None
    k_extent: float = 11.0
    pair_outer: PairTemplate = None
    pair_inner: PairTemplate = None
    pair_n: int = 6
    merge_h: float = 1.0
    k_panel_outer: float = 0.5
    # dim-3 isotropic-sector rules
    radial_K: tuple = None     # (nodes, weights) on [0, K_max] for |K_cm| or |K'|
    radial_k: tuple = None     # (nodes, weights) on [0, k_max] for |d| or |k'|
    cos_rule: tuple = None     # Gauss-Legendre in cos(theta) on [-1, 1]
    sphere: object = None
    rotations: object = None
    radial_panel: float = None  # panel width of the rules built on the fly for each integral
    radial_n: int = None
    basis: tuple = None        # (size, scale) of the s-wave compression basis
    ft_K: tuple = None         # fine rules for radial Fourier transforms
    ft_r: tuple = None
    meta: dict = field(default_factory=dict)

    def refined(self, by=1):
        return make_rules(self.dim, self.level + by, **self.meta)


def make_rules(dim=1, level=0, heavy_L=26.0, heavy_panel=2.0, heavy_n=8, k_extent=11.0,
               k_first=1e-5, k_panel=0.5, k_n=10, pair_n=6, pair_outer_panels=32,
               pair_inner_panels=4, radial_n=8, cos_n=24, sphere_degree=8, so3_res=6,
               K_extent=12.0, merge_h=1.0, k_panel_outer=0.5, radial_panel=0.5,
               basis_size=10, basis_scale=1.0, ft_n=12):
    meta = dict(heavy_L=heavy_L, heavy_panel=heavy_panel, heavy_n=heavy_n, k_extent=k_extent,
                k_first=k_first, k_panel=k_panel, k_n=k_n, pair_n=pair_n,
                pair_outer_panels=pair_outer_panels, pair_inner_panels=pair_inner_panels,
                radial_n=radial_n, cos_n=cos_n, sphere_degree=sphere_degree, so3_res=so3_res,
                K_extent=K_extent, merge_h=merge_h, k_panel_outer=k_panel_outer,
                radial_panel=radial_panel, basis_size=basis_size, basis_scale=basis_scale,
                ft_n=ft_n)
    f = 2**level
    if dim == 1:
        npan = int(round(2 * heavy_L / heavy_panel)) * f
        heavy = make_line(-heavy_L, heavy_L, heavy_n, npan)
        edges = graded_edges(k_extent, panel=k_panel / f, k_first=k_first / f)
        r, w = composite_nodes(edges, k_n)
        krule = symmetric_rule(r, w)
        outer = pair_template(pair_outer_panels * f, pair_n, left=False, right=True)
        inner = pair_template(pair_inner_panels * f, pair_n, left=True, right=True)
        return Rules(1, level, heavy, krule, k_extent, outer, inner, pair_n, merge_h / f,
                     k_panel_outer / f, meta=meta)
    if dim == 3:
        from numpy.polynomial.legendre import leggauss

        h = radial_panel / f
        rK = radial_rule(K_extent, h, radial_n)
        rk = radial_rule(k_extent, h, radial_n)
        ftK = radial_rule(K_extent, 0.5 / f, ft_n)
        ftr = radial_rule(K_extent / basis_scale, 0.5 / f, ft_n)
        return Rules(3, level, None, None, k_extent, radial_K=rK, radial_k=rk,
                     cos_rule=leggauss(cos_n * f), sphere=make_sphere(3, sphere_degree * f),
                     rotations=make_rotations(3, so3_res * f), radial_panel=h,
                     radial_n=radial_n, basis=(basis_size, basis_scale), ft_K=ftK, ft_r=ftr,
                     meta=meta)
    raise ValueError(f"unsupported dim {dim}")


def radial_rule(length, panel, n):
    """Composite Gauss-Legendre rule on [0, length] with panels of width <= panel."""
    m = max(1, int(np.ceil(length / panel - 1e-12)))
    return composite_nodes(np.linspace(0.0, length, m + 1), n)
