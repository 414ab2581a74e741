import numpy as np
import pytest

from pointscatter import checks, exactmap, exactmap3
from pointscatter.errors import UnsupportedError
from pointscatter.observables import identity, radial_rank1, shift
from pointscatter.radial import radial_space
from pointscatter.scattering import ScatteringParams

P1 = ScatteringParams(3, 1.0, 0.1)


@pytest.fixture(scope="module")
def space(rules3):
    return radial_space(rules3, identity())


def test_oscillator_basis_orthonormal(space):
    assert np.max(np.abs(space.gram - np.eye(space.M))) < 1e-13


def test_fourier_transform_unitary(space):
    # position-space Gram equals momentum-space Gram
    G = 4 * np.pi * (np.conj(space.Fr) * space.wr * space.r**2) @ space.Fr.T
    assert np.max(np.abs(G - space.gram)) < 1e-12


def test_fast_path_matches_energy_shell(state3, rules3, space):
    fast = exactmap3.b_star_matrix(state3, P1, space, rules3, "fast")
    shell = exactmap3.b_star_matrix(state3, P1, space, rules3, "shell")
    assert np.linalg.norm(fast - shell, 2) < 1e-8


def test_single_angle_matches_so3_average(state3, rules3):
    rng = np.random.default_rng(0)
    space_fn = radial_space(rules3, identity()).fs
    for _ in range(5):
        K, d = rng.normal(size=3), rng.normal(size=3)
        for n in range(3):
            f = lambda r, n=n: space_fn(np.atleast_1d(r))[n]
            a = exactmap3.sigma_average(state3, P1, f, K, d, mu_rule=rules3.cos_rule)
            b = exactmap3.sigma_average(state3, P1, f, K, d, rotations=rules3.refined().rotations)
            assert abs(a - b) < 1e-9


def test_identity_and_unitality(state3, rules3):
    assert all(c.passed for c in checks.identity_b(state3, P1, rules3))
    assert all(c.passed for c in checks.unitality(state3, P1, rules3))


def test_norm_bounds_dim3(state3, rules3):
    for G in (identity(), radial_rank1()):
        assert all(c.passed for c in checks.norm_bound_checks(state3, ScatteringParams(3, 1.0, 0.3), G,
                                                        rules3))


def test_remainder_is_third_order(state3, rules3):
    # ε/λ³ stays bounded as λ halves (ratio of consecutive values near 1)
    from pointscatter import analysis

    G = radial_rank1()
    r = []
    for lam in (0.04, 0.08):
        e = analysis.epsilon(state3, ScatteringParams(3, 1.0, lam), G, rules3)
        r.append(np.linalg.norm(e, 2) / lam**3)
    assert 0.7 < r[1] / r[0] < 1.3


def test_unsupported_observables(state3, rules3):
    with pytest.raises(UnsupportedError):
        exactmap.full_reduced_map(state3, P1, shift(1.0), rules3)
    with pytest.raises(UnsupportedError):
        exactmap3.weighted_norm(identity(), rules3)
