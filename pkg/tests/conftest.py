import numpy as np
import pytest

from gvf3d import (AircraftParams, FieldParams, builtin_cylinder_intersection,
                   builtin_helix, path_from_expressions)

# Reference scenario 1: bounded cylinder-intersection path, k1 = k2 = 2.
CYL_A, CYL_B, CYL_R, CYL_SMALL_R = 0.0, 1.5, 2.0, 1.0


@pytest.fixture(scope="session")
def cylinder_path():
    return builtin_cylinder_intersection(CYL_A, CYL_B, CYL_R, CYL_SMALL_R)


@pytest.fixture(scope="session")
def cylinder_params():
    return FieldParams(2.0, 2.0)


@pytest.fixture(scope="session")
def helix_path():
    return builtin_helix()


@pytest.fixture(scope="session")
def helix_params():
    return FieldParams(1.0, 1.0)


@pytest.fixture(scope="session")
def straight_line_path():
    # phi1 = y, phi2 = z: the desired path is the x-axis and the planar
    # field direction on it is constant.
    return path_from_expressions("y", "z", boundedness_hint="unbounded")


@pytest.fixture(scope="session")
def aircraft_params():
    return AircraftParams(tau_z=1.0, tau_theta=1.0, tau_s=1.0, k_theta=1.0,
                          s_star=1.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260809)
