import numpy as np
import pytest

import smcsynth as sm

PAPER_K_VSC_EX1 = np.array([[-33.2438, 19.1933],
                            [-19.1933, -33.2438]])
PAPER_K_UVC_EX1 = np.array([[-52.8970, 30.5401],
                            [-30.5401, -52.8970]])


@pytest.fixture(scope="session")
def ex1_system():
    return sm.visual_servo_polytope(np.pi / 6, np.pi / 4)


@pytest.fixture(scope="session")
def ex2_system():
    return sm.rov_polytope(290.0, 290.0, np.sqrt(2) / 2, 0.35, 0.5, 1.0)


@pytest.fixture(scope="session")
def ex1_vsc(ex1_system):
    return sm.synth_vsc(ex1_system, 0.001, 0.1, optimize=False, rho_fixed=0.25)


@pytest.fixture(scope="session")
def ex1_uvc(ex1_system):
    return sm.synth_uvc(ex1_system, 1000.0, 0.1, optimize=False, rho_fixed=0.5)


@pytest.fixture(scope="session")
def ex2_vsc(ex2_system):
    return sm.synth_vsc(ex2_system, 0.2395, 0.4, optimize=True)


@pytest.fixture(scope="session")
def ex2_uvc(ex2_system):
    return sm.synth_uvc(ex2_system, 32.9034, 0.4, optimize=True)


@pytest.fixture(scope="session")
def scalar_interval_system():
    return sm.PolytopicSystem(1, 1, (np.array([[1.0]]), np.array([[2.0]])))
