import pytest

from ql1.drivers import reference_objective
from ql1.fileio import read_problem
from ql1.probgen import desk_suite


@pytest.fixture(scope="session")
def desk_manifest(tmp_path_factory):
    """The default 48-instance suite, generated once per session."""
    outdir = tmp_path_factory.mktemp("desk_suite")
    return desk_suite(outdir)


@pytest.fixture(scope="session")
def desk_fstars(desk_manifest):
    """High-accuracy reference objectives for the desk suite."""
    return {
        row.problem: reference_objective(read_problem(row.path))
        for row in desk_manifest
    }
