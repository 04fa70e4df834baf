import csv
import json
from pathlib import Path

import numpy as np
import pytest

from cvbias.cli import main
from cvbias.conjlm import Dataset, NigPrior, draw_posterior, fit, pointwise_loglik
from cvbias.sim import BlockDgpSpec, gen_block


def write_pointwise(path: Path, values) -> Path:
    path.write_text("elpd\n" + "\n".join(repr(float(v)) for v in values))
    return path


def write_dataset(path: Path, data: Dataset, target: str = "y") -> Path:
    cols = data.columns or tuple(f"x{i}" for i in range(data.p))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(cols) + [target])
        for row, yv in zip(data.X, data.y):
            w.writerow([repr(float(v)) for v in row] + [repr(float(yv))])
    return path


@pytest.fixture
def toy_block(tmp_path):
    train, test = gen_block(
        BlockDgpSpec(n=60, p=10, rho=0.0, block_size=5, seed=91, n_test=60)
    )
    return (
        write_dataset(tmp_path / "train.csv", train),
        write_dataset(tmp_path / "test.csv", test),
    )


class TestCompare:
    def test_identical_models_equivalent(self, tmp_path, capsys):
        rng = np.random.default_rng(90)
        pw = rng.standard_normal(25) - 1.0
        a = write_pointwise(tmp_path / "a.csv", pw)
        b = write_pointwise(tmp_path / "b.csv", pw)
        assert main(["compare", str(a), str(b), "--baseline", "a"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["comparison"]["all_equivalent"] is True
        assert report["comparison"]["max_diff"] == 0.0
        assert all(w["pseudo_bma"] == 0.5 for w in report["weights"])

    def test_injected_winner_flagged(self, tmp_path, capsys):
        rng = np.random.default_rng(92)
        base = rng.standard_normal((10, 40)) * 0.3 - 1.0
        paths = [
            write_pointwise(tmp_path / f"m{i}.csv", base[i]) for i in range(9)
        ]
        paths.append(
            write_pointwise(tmp_path / "winner.csv", base[9] + 10.0 / 40)
        )
        assert main(["compare"] + [str(p) for p in paths]) == 0
        report = json.loads(capsys.readouterr().out)
        cmp_ = report["comparison"]
        assert cmp_["K"] == 9
        assert not cmp_["all_equivalent"]
        above = [d for d in cmp_["diffs"] if d["above_threshold"]]
        assert any(d["model"] == "winner" for d in above)

    def test_loglik_inputs_autodetected(self, tmp_path, capsys):
        rng = np.random.default_rng(93)
        data = Dataset(rng.standard_normal((20, 1)), rng.standard_normal(20))
        prior = NigPrior.diffuse()
        for name in ("m1", "m2"):
            draws = draw_posterior(fit(data, prior), 400, seed=hash(name) % 2**32)
            ll = pointwise_loglik(data, draws)
            with open(tmp_path / f"{name}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                for row in ll:
                    w.writerow([repr(float(v)) for v in row])
        rc = main(
            ["compare", str(tmp_path / "m1.csv"), str(tmp_path / "m2.csv"),
             "--baseline", "m1"]
        )
        assert rc == 0
        report = json.loads(capsys.readouterr().out)
        names = {d["name"] for d in report["diagnostics"]}
        assert "psis_khat:m2" in names

    def test_inconsistent_lengths_fail(self, tmp_path, capsys):
        a = write_pointwise(tmp_path / "a.csv", np.zeros(10))
        b = write_pointwise(tmp_path / "b.csv", np.zeros(12))
        assert main(["compare", str(a), str(b)]) == 1

    def test_csv_output(self, tmp_path):
        rng = np.random.default_rng(94)
        paths = [
            write_pointwise(tmp_path / f"m{i}.csv", rng.standard_normal(15))
            for i in range(3)
        ]
        out = tmp_path / "weights.csv"
        rc = main(
            ["compare", *map(str, paths), "--format", "csv", "--output", str(out)]
        )
        assert rc == 0
        rows = list(csv.DictReader(open(out)))
        assert len(rows) == 2
        assert set(rows[0]) >= {"model", "delta", "pseudo_bma"}


class TestForward:
    def test_toy_path_sizes(self, tmp_path, capsys):
        rng = np.random.default_rng(95)
        X = rng.standard_normal((40, 3))
        y = X @ np.array([1.0, 0.5, 0.0]) + rng.standard_normal(40)
        data_csv = write_dataset(
            tmp_path / "toy.csv", Dataset(X, y, columns=("a", "b", "c"))
        )
        assert main(["forward", str(data_csv), "--target", "y"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert len(report["path"]) == 4  # sizes 0..3
        verdicts = report["verdicts"]
        assert all(0 <= verdicts[k] <= 3 for k in verdicts)

    def test_missing_target_column(self, toy_block, capsys):
        train, _ = toy_block
        assert main(["forward", str(train), "--target", "zzz"]) == 1
        assert "zzz" in capsys.readouterr().err

    def test_output_files_and_determinism(self, toy_block, tmp_path):
        train, test = toy_block
        args = [
            "forward", str(train), "--target", "y", "--test", str(test),
            "--max-size", "6", "--output",
        ]
        assert main(args + [str(tmp_path / "run1")]) == 0
        assert main(args + [str(tmp_path / "run2")]) == 0
        csv1 = (tmp_path / "run1.path.csv").read_bytes()
        csv2 = (tmp_path / "run2.path.csv").read_bytes()
        assert csv1 == csv2
        report = json.loads((tmp_path / "run1.report.json").read_text())
        assert report["provenance"]["tool_version"]
        rows = list(csv.DictReader((tmp_path / "run1.path.csv").open()))
        assert len(rows) == 7
        assert rows[1]["test_mlpd"] != ""


class TestSimulate:
    def test_empty_config_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "empty.json"
        cfg.write_text("{}")
        assert main(["simulate", str(cfg), "--output", str(tmp_path / "o")]) == 1
        assert "config" in capsys.readouterr().err

    def test_unknown_experiment(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text('{"experiment": "bogus"}')
        assert main(["simulate", str(cfg), "--output", str(tmp_path / "o")]) == 1

    def test_many_k_smoke(self, tmp_path, capsys):
        cfg = tmp_path / "mk.json"
        cfg.write_text(
            json.dumps(
                {
                    "experiment": "many_k",
                    "base_seed": 7,
                    "n": 40,
                    "beta_delta": 0.0,
                    "k_grid": [2, 5],
                    "replications": 3,
                    "n_test": 50,
                }
            )
        )
        out = tmp_path / "out"
        assert main(["simulate", str(cfg), "--output", str(out)]) == 0
        summary = list(csv.DictReader((out / "many_k_summary.csv").open()))
        assert [int(r["K"]) for r in summary] == [2, 5]
        assert {"mean_max_diff", "predicted_threshold"} <= set(summary[0])
        runs = list(csv.DictReader((out / "many_k_runs.csv").open()))
        assert len(runs) == 6
        assert all(r["seed"] and r["spec_hash"] for r in runs)

    def test_forward_smoke_and_multiplier_fanout(self, tmp_path):
        cfg = tmp_path / "fw.json"
        cfg.write_text(
            json.dumps(
                {
                    "experiment": "forward",
                    "base_seed": 7,
                    "p": 10,
                    "n_grid": [50],
                    "rho_grid": [0.0],
                    "n_test": 100,
                    "multipliers": [1.0, 1.5, 2.0],
                    "replications": 2,
                }
            )
        )
        out = tmp_path / "out"
        assert main(["simulate", str(cfg), "--output", str(out)]) == 0
        runs = list(csv.DictReader((out / "forward_runs.csv").open()))
        assert len(runs) == 6  # 2 reps x 3 multipliers
        assert {r["multiplier"] for r in runs} == {"1.0", "1.5", "2.0"}
        assert (out / "summary.json").exists()
        for m in ("1.0", "1.5", "2.0"):
            per = list(csv.DictReader((out / f"forward_path_m{m}.csv").open()))
            assert len(per) == 2 * 11  # 2 reps x sizes 0..10
            assert {r["multiplier"] for r in per} == {m}

    def test_bundled_configs_well_formed(self):
        root = Path(__file__).resolve().parent.parent / "configs"
        required = {
            "null_expected_max.json": {"experiment", "k_grid", "n", "replications"},
            "forward_correction.json": {
                "experiment", "p", "n_grid", "rho_grid", "replications",
            },
            "multiplier_sweep.json": {"experiment", "multipliers", "replications"},
        }
        for name, keys in required.items():
            config = json.loads((root / name).read_text())
            assert keys <= set(config), name
        sweep = json.loads((root / "multiplier_sweep.json").read_text())
        assert sweep["multipliers"] == [1.0, 1.5, 2.0]

    def test_rerun_byte_identical(self, tmp_path):
        cfg = tmp_path / "mk.json"
        cfg.write_text(
            json.dumps(
                {
                    "experiment": "many_k",
                    "base_seed": 3,
                    "n": 30,
                    "k_grid": [3],
                    "replications": 2,
                    "n_test": 30,
                }
            )
        )
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert main(["simulate", str(cfg), "--output", str(out1)]) == 0
        assert main(["simulate", str(cfg), "--output", str(out2)]) == 0
        assert (out1 / "many_k_runs.csv").read_bytes() == (
            out2 / "many_k_runs.csv"
        ).read_bytes()
