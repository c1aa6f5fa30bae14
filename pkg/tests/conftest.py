import pytest

from tempora import moment, numerics, scenarios, sdp


@pytest.fixture(params=numerics.available_backends())
def backend(request):
    """Run the test under each available kernel backend."""
    with numerics.use_backend(request.param):
        yield request.param


@pytest.fixture(scope="session")
def gyni_problem():
    return moment.build_problem(scenarios.gyni())


@pytest.fixture(scope="session")
def gyni_ipm(gyni_problem):
    return sdp.solve_moment_ipm(gyni_problem, tol=1e-6)


@pytest.fixture(scope="session")
def s5_problem():
    return moment.build_problem(scenarios.ncycle_scenario(5))


@pytest.fixture(scope="session")
def yu_oh_admm():
    # the one expensive solve of the suite, shared across tests
    problem = moment.build_problem(scenarios.yu_oh())
    solution = sdp.solve_moment_admm(problem, tol=1e-6)
    return problem, solution
