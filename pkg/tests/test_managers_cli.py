import orjson
import pytest

from pathlib import Path

from app import app
from config import MyConfig, RunConfig, estimate_basis_size
from managers.dims_manager import DimsManager
from managers.export_manager import ExportManager
from managers import verify_manager
from managers.holonomy_manager import HolonomyManager
from managers.verify_manager import VerifyManager
from services.branes import coordinate_square, sample_surface
from utils.exceptions import ConfigurationError

FIXTURES = Path(__file__).parent / "fixtures"


def write(path, payload):
    path.write_bytes(orjson.dumps(payload))
    return path


def parsed(result):
    return orjson.loads(result.stdout)


@pytest.fixture
def square_file(tmp_path):
    surface = sample_surface(coordinate_square(2), 8, 8)
    return write(tmp_path / "square.json", surface.to_dict())


#############
# RunConfig #
#############


def test_run_config_defaults_come_from_the_environment_config():
    run = RunConfig.build(n=None, seed=7)
    assert run.n == MyConfig.HOLONOMY_N
    assert run.seed == 7


def test_run_config_rejects_bad_values():
    with pytest.raises(ConfigurationError):
        RunConfig.build(n=0)
    with pytest.raises(ConfigurationError):
        RunConfig.build(output_format="xml")
    with pytest.raises(ConfigurationError):
        RunConfig.build(n=MyConfig.MAX_N, max_letters=MyConfig.MAX_LETTERS)


def test_basis_size_estimate():
    assert estimate_basis_size(2, 2) == 3 + 9


@pytest.mark.parametrize("manager", [DimsManager, ExportManager, HolonomyManager, VerifyManager])
def test_managers_document_their_config(manager):
    assert "config: Application configuration object" in manager.__init__.__doc__


############
# Managers #
############


def test_dims_manager_pairs_slices_with_predictions():
    result, code = DimsManager(MyConfig()).dims({"n": 2, "max_letters": 3})
    assert code == 0
    rows = {(row["i"], row["letters"]): row for row in result["data"]["rows"]}
    assert rows[(0, 2)]["schur"] == rows[(0, 2)]["gamma_cl"] == 1
    assert rows[(0, 3)]["dim_ab"] == rows[(0, 3)]["schur"] == 2
    assert rows[(0, 1)]["gamma"] is None


def test_holonomy_manager_reports_bad_input(tmp_path):
    manager = HolonomyManager(MyConfig())
    missing = tmp_path / "missing.json"
    result, code = manager.signature(missing, {})
    assert code == 2 and not result["success"]
    path_file = write(tmp_path / "path.json", {"n": 2, "points": [[0, 0], [1, 1]]})
    result, code = manager.signature(path_file, {"n": 3})
    assert code == 2


def test_holonomy_manager_checks_the_brane_dimension(square_file):
    result, code = HolonomyManager(MyConfig()).holonomy(square_file, {"degree": 2}, p=3)
    assert code == 2
    assert "3-brane" in result["error"]


def test_export_manager_rejects_bad_config():
    result, code = ExportManager(MyConfig()).export_cc({"n": 0})
    assert code == 2 and not result["success"]


def test_cube_check_reports_the_grid_it_samples(engines, monkeypatch):
    monkeypatch.setattr(verify_manager, "CUBE_INTERVALS", 7)
    run = RunConfig.build(n=3, degree=3)
    _, value, tolerance = VerifyManager(MyConfig())._check_cube(engines(3, 3), run)
    assert tolerance == {"tolerance": run.p_tol, "grid": [6, 6, 6], "requestedGrid": [7, 7, 7]}
    assert abs(value["Z123"] - 1.0) <= 1e-10


def test_convergence_check_demands_second_order(engines):
    run = RunConfig.build(n=3, degree=3, grid=96)
    passed, study, order = VerifyManager(MyConfig())._check_convergence(engines(3, 3), run)
    assert order == verify_manager.CONVERGENCE_ORDER == 1.8
    assert study["grids"] == [24, 48, 96]
    assert passed and min(study["orders"]) >= 1.8


#####################
# Command line      #
#####################


def test_verify_rejects_bad_configuration(runner):
    result = runner.invoke(app, ["verify", "--n", "0"])
    assert result.exit_code == 2


def test_verify_small_truncation_passes(runner):
    result = runner.invoke(
        app, ["verify", "--n", "2", "--max-letters", "3", "--degree", "2", "--samples", "5", "--json"]
    )
    assert result.exit_code == 0
    report = parsed(result)["data"]
    assert report["failures"] == 0
    assert {check["name"] for check in report["checks"]} >= {"d_squared", "reutenauer", "crossed_complex_laws"}


def test_dims_csv_header(runner):
    result = runner.invoke(app, ["dims", "--n", "2", "--max-letters", "3", "--format", "csv"])
    assert result.exit_code == 0
    header = result.stdout.splitlines()[0]
    assert header == "i,letters,dim,ker_d,im_d,H,dim_sab,H_sab,dim_ab,gamma,gamma_cl,schur"


def test_dims_json(runner):
    result = runner.invoke(app, ["dims", "--n", "2", "--max-letters", "2", "--json"])
    assert result.exit_code == 0
    rows = parsed(result)["data"]["rows"]
    single = next(row for row in rows if (row["i"], row["letters"]) == (0, 1))
    assert single["H"] == 2


def test_sig_command(runner, tmp_path):
    path_file = write(tmp_path / "path.json", {"n": 2, "points": [[0, 0], [1, 0], [1, 1]]})
    result = runner.invoke(app, ["sig", str(path_file), "--degree", "2"])
    assert result.exit_code == 0
    data = parsed(result)["data"]
    terms = {str(entry["word"]): (entry["num"], entry["den"]) for entry in data["signature"]["terms"]}
    assert terms[str([[1], [2]])] == ("1", "1")
    assert str([[2], [1]]) not in terms
    assert data["groupLike"] is True

    coords = dict(zip(data["logLabels"], data["logCoords"]["coords"]))
    assert data["logCoords"]["degree"] == 0
    assert coords == {"Z1": "1", "Z2": "1", "[Z1,Z2]": "1/2"}


def test_hol2_command(runner, square_file):
    result = runner.invoke(app, ["hol2", str(square_file), "--degree", "2", "--json"])
    assert result.exit_code == 0
    data = parsed(result)["data"]
    z12 = data["value"][data["labels"].index("Z12")]
    assert abs(z12 - 1.0) <= 1e-12
    assert data["diagnostics"]["withinTolerance"] is True


def test_hol2_rejects_unreadable_input(runner, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    result = runner.invoke(app, ["hol2", str(broken), "--degree", "2"])
    assert result.exit_code == 2


def test_export_then_import(runner, tmp_path):
    target = tmp_path / "cc.json"
    result = runner.invoke(app, ["export-cc", "--n", "2", "--degree", "2", "--out", str(target)])
    assert result.exit_code == 0
    golden = orjson.loads((FIXTURES / "cc_n2_d2.json").read_bytes())
    assert orjson.loads(target.read_bytes()) == golden

    result = runner.invoke(app, ["import-cc", str(target)])
    assert result.exit_code == 0
    data = parsed(result)["data"]
    assert data["roundTrip"] is True
    assert data["dims"] == [3, 3]


def test_import_rejects_tampered_complex(runner, tmp_path):
    target = tmp_path / "cc.json"
    runner.invoke(app, ["export-cc", "--n", "2", "--degree", "2", "--out", str(target)])
    payload = orjson.loads(target.read_bytes())
    payload["bracket"].append({"i": 0, "a": 0, "b": 0, "terms": [{"c": 2, "coeff": "1"}]})
    write(target, payload)

    result = runner.invoke(app, ["import-cc", str(target)])
    assert result.exit_code == 1
    assert parsed(result)["success"] is False
