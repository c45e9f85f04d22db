import pytest

from diskbio.config import RunConfig, load_config
from diskbio.core.assembly import QuadConfig
from diskbio.errors import ConfigError


def test_defaults():
    config = load_config()
    assert config == RunConfig()
    assert config.a == 1.0
    assert config.levels == (2, 3, 4, 5)
    assert config.suite == "wolfe"
    assert config.tol is None


def test_empty_file(tmp_path):
    path = tmp_path / "empty.toml"
    path.write_text("")
    assert load_config(path) == RunConfig()


def test_file_values(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text('a = 2.0\nlevels = [1, 2]\nsuite = "krenk"\n')
    config = load_config(path)
    assert config.a == 2.0
    assert config.levels == (1, 2)
    assert config.suite == "krenk"


def test_overrides(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text("level = 2\nsingular_order = 6\n")
    config = load_config(path, level=4)
    assert config.level == 4
    assert config.singular_order == 6


def test_unknown_key(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text("radius = 2.0\n")
    with pytest.raises(ConfigError, match="radius"):
        load_config(path)


def test_malformed_file(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text("a = [1.0\n")
    with pytest.raises(ConfigError, match="Malformed"):
        load_config(path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="Cannot read"):
        load_config(tmp_path / "nowhere.toml")


@pytest.mark.parametrize(
    "values",
    [
        dict(a=0.0),
        dict(a="1"),
        dict(level=7),
        dict(level=True),
        dict(levels=()),
        dict(levels=(3, 2)),
        dict(levels=(1, 1)),
        dict(regular_order=11),
        dict(singular_order=1),
        dict(n_r=0),
        dict(threads=-1),
        dict(lanczos_steps=0),
        dict(cg_tol=0.0),
        dict(tol=-1e-3),
        dict(operator="K"),
        dict(space="P2"),
        dict(suite="all"),
        dict(pair="V-W"),
    ],
)
def test_invalid_values(values):
    with pytest.raises(ConfigError):
        RunConfig(values)


def test_missing_output_directory(tmp_path):
    with pytest.raises(ConfigError, match="does not exist"):
        RunConfig(out=str(tmp_path / "missing" / "out.csv"))
    assert RunConfig(out=str(tmp_path / "out.csv")).out.endswith("out.csv")


def test_quad_config():
    config = RunConfig(regular_order=6, n_r=40, threads=2)
    quad = config.quad_config()
    assert isinstance(quad, QuadConfig)
    assert quad.regular_order == 6
    assert quad.weighted_n_r == 40
    assert quad.weighted_n_theta is None
    assert quad.threads == 2
