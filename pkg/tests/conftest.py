import mpmath as mp
import pytest

from padelab import algebra, cli, measure as ms, pade, potential as pt, scheme as sch
from padelab.oracles import arcsine_measure


@pytest.fixture(autouse=True)
def _default_precision():
    algebra.set_precision(256)
    yield


QUAD_TOL = mp.mpf("1e-40")


@pytest.fixture(scope="session")
def arcsine():
    algebra.set_precision(256)
    return arcsine_measure()


@pytest.fixture(scope="session")
def arcsine_family(arcsine):
    """Classical approximants to the arcsine transform, small n plus 20 and 40."""
    algebra.set_precision(256)
    ns = list(range(1, 11)) + [20, 40]
    family = pade.solve_family(
        arcsine, ms.RationalPart.empty(), sch.ClassicalScheme(), ns, QUAD_TOL
    )
    assert not family.failures, family.failures
    return family


@pytest.fixture(scope="session")
def unit_interval_system():
    algebra.set_precision(256)
    return pt.IntervalSystem([(-1, 1)])


@pytest.fixture(scope="session")
def section4_record(tmp_path_factory):
    """Full run of the bundled three-pole config at its default n range."""
    algebra.set_precision(256)
    config = cli.load_config("paper_section4")
    out = tmp_path_factory.mktemp("section4")
    record = cli.run(config, out_dir=str(out))
    assert not record.family.failures, record.family.failures
    return record
