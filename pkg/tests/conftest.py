from configparser import ConfigParser

import pytest
from bernstein_lite import _params as blt_params
from bernstein_lite import _symbolic as blt_symbolic
from bernstein_lite._util import get_resource_path


@pytest.fixture(scope="function")
def tmp_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("cli")


@pytest.fixture(scope="session")
def half_params():
    # r = 1/2, a single grid point fills each tail block
    return blt_params.ConstructionParams(
        a=0.3,
        b=3.3,
        s=0.5,
        p=2,
        q=1,
        eps0=0.5,
        c=0.5,
    )


@pytest.fixture(scope="session")
def half_tower(half_params):
    return blt_symbolic.build_tower(half_params, depth=2, n1_hint=3)


@pytest.fixture(scope="session")
def worked_params():
    # r = 5/6
    return blt_params.ConstructionParams(
        a=0.0,
        b=3.0,
        s=1.0,
        p=5,
        q=3,
        eps0=0.5,
        c=0.2,
    )


@pytest.fixture(scope="session")
def worked_tower(worked_params):
    return blt_symbolic.build_tower(worked_params, depth=2, n1_hint=6)


@pytest.fixture(scope="function")
def tmp_config(tmp_dir, half_params):
    # a small literal config, quick to run end to end
    parser = ConfigParser()
    parser.read(get_resource_path("sample.cfg"))
    for key, value in half_params.to_dict().items():
        parser.set("construction", key, value=value)
    parser.set("run", "outdir", value=str(tmp_dir / "out"))
    parser.set("run", "coeff_radius", value="60")
    parser.set("run", "trials", value="20")
    config_path = tmp_dir / "small.cfg"
    with open(config_path, "w") as out:
        parser.write(out)

    return config_path
