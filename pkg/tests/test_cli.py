import json

import pytest

from filteropt.cli import main
from filteropt.spectra import load_library


@pytest.fixture()
def config_path(tmp_path):
    doc = {
        "library": {"seed": 7, "L": 200, "Q": 256},
        "simulator": {"c_star": 1.0, "photon_noise_alpha": 1.0, "read_noise_sigma": 300.0,
                      "gain": 30000.0, "N": 64, "M": 8, "retrieval_iters": 2, "K": 5},
        "solvers": [
            {"algorithm_id": "ea_plus", "mu": 5, "lambda": 10, "budget_b": 30},
            {"algorithm_id": "umda_u_pls_dist", "mu": 3, "lambda": 10, "budget_b": 30,
             "metric_id": "d1"},
        ],
        "n_runs": 2,
        "master_seed": 31,
        "baseline_K_big": 40,
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return path


def test_generate_library_cli(tmp_path):
    out = tmp_path / "lib.json"
    assert main(["generate-library", "--seed", "5", "--L", "30", "--Q", "64",
                 "--out", str(out)]) == 0
    lib = load_library(out)
    assert lib.size == 30


def test_full_pipeline_cli(tmp_path, config_path):
    camp = tmp_path / "camp"
    assert main(["run", "--config", str(config_path), "--out", str(camp)]) == 0
    assert (camp / "manifest.json").exists()

    rank_out = tmp_path / "rank.json"
    assert main(["rank", "--campaign", str(camp), "--reference", "umda_u_pls_dist_d1",
                 "--out", str(rank_out)]) == 0
    table = json.loads(rank_out.read_text())
    assert {r["solver"] for r in table["rows"]} == {"ea_plus", "umda_u_pls_dist_d1"}

    div_out = tmp_path / "diverse.json"
    assert main(["select", "--campaign", str(camp), "--solver", "umda_u_pls_dist_d1",
                 "--out", str(div_out)]) == 0
    doc = json.loads(div_out.read_text())
    assert "members" in doc and doc["d_min"] > 0

    reev_out = tmp_path / "diverse_reeval.json"
    samples_out = tmp_path / "samples.json"
    assert main(["reevaluate", "--config", str(config_path), "--in", str(div_out),
                 "--k-big", "20", "--out", str(reev_out),
                 "--samples-out", str(samples_out)]) == 0
    reev = json.loads(reev_out.read_text())
    assert reev["K"] == 20
    values = [m["value"] for m in reev["members"]]
    assert values == sorted(values)
    samples = json.loads(samples_out.read_text())
    assert len(samples["baseline_samples"]) == 20


def test_neighborhood_cli(tmp_path, config_path):
    out = tmp_path / "report.csv"
    assert main(["neighborhood", "--config", str(config_path), "--metric", "hamming",
                 "--n", "2", "--K", "10", "--out", str(out)]) == 0
    assert out.exists() and out.with_suffix(".json").exists()


def test_precision_cli(tmp_path, config_path):
    out = tmp_path / "precision.json"
    assert main(["precision", "--config", str(config_path), "--metric", "d1",
                 "--grid", "4", "--repeats", "2", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["mean_deviation"]) == 4


def test_run_requires_output(tmp_path, config_path):
    assert main(["run", "--config", str(config_path)]) == 2
