import re

import numpy as np
import pytest

from lrdpp import config as config_module
from lrdpp.__main__ import main
from lrdpp.data import load_counts, load_model, read_baskets

TRAIN_FLAGS = ["--k", "3", "--epsilon0", "1e-4", "--init-scale", "1.0", "--max-iters", "20", "--batch", "30"]


@pytest.fixture(autouse=True)
def no_user_config(monkeypatch, tmp_path):
    monkeypatch.setattr(config_module, "DEFAULT_CONFIG_PATH", tmp_path / "no-config.yaml")


@pytest.fixture
def trained(tmp_path, basket_file):
    model = tmp_path / "toys.model"
    assert main(["train", "--data", str(basket_file), "--out", str(model), *TRAIN_FLAGS]) == 0
    return model


class TestTrain:
    def test_writes_model_and_sidecars(self, trained, basket_file):
        V = load_model(trained)
        assert (V.M, V.K) == (read_baskets(basket_file).M, 3)
        for suffix in (".trace", ".counts", ".test.txt"):
            assert trained.with_name(trained.name + suffix).exists()
        test = read_baskets(trained.with_name(trained.name + ".test.txt"))
        assert test.N == 30
        counts = load_counts(V.catalog, trained.with_name(trained.name + ".counts"))
        assert counts.sum() == sum(read_baskets(basket_file).sizes()) - sum(test.sizes())

    def test_trace_format(self, trained):
        lines = trained.with_name(trained.name + ".trace").read_text(encoding="utf-8").splitlines()
        assert lines[0].startswith("epoch 0 ")
        assert all(re.match(r"^epoch \d+ lr \S+ objective \S+ test_ll \S+$", line) for line in lines)

    def test_deterministic(self, tmp_path, basket_file):
        first, second = tmp_path / "a.model", tmp_path / "b.model"
        for out in (first, second):
            assert main(["train", "--data", str(basket_file), "--out", str(out), *TRAIN_FLAGS]) == 0
        assert first.read_bytes() == second.read_bytes()
        np.testing.assert_array_equal(load_model(first).entries, load_model(second).entries)

    def test_basket_larger_than_k(self, tmp_path, capsys):
        data = tmp_path / "big.txt"
        data.write_text("a,b,c,d\na,b\n", encoding="utf-8")
        code = main(["train", "--data", str(data), "--out", str(tmp_path / "m"), "--k", "2", "--test-fraction", "0"])
        assert code == 1
        assert "--k 4" in " ".join(capsys.readouterr().err.split())

    def test_config_file_defaults(self, tmp_path, basket_file):
        config = tmp_path / "train.yaml"
        config.write_text("k: 2\ninit_scale: 1.0\nmax_iters: 5\nepsilon0: 1.0e-4\n", encoding="utf-8")
        data = tmp_path / "pairs.txt"
        data.write_text("a,b\nb,c\nc,d\na,d\nb,d\n", encoding="utf-8")
        out = tmp_path / "pairs.model"
        args = ["train", "--config", str(config), "--data", str(data), "--out", str(out), "--test-fraction", "0"]
        assert main(args) == 0
        assert load_model(out).K == 2
        assert not out.with_name(out.name + ".test.txt").exists()

    def test_missing_data_flag(self, tmp_path):
        with pytest.raises(SystemExit) as excinfo:
            main(["train", "--out", str(tmp_path / "m")])
        assert excinfo.value.code == 2

    def test_missing_data_file(self, tmp_path):
        assert main(["train", "--data", str(tmp_path / "absent.txt"), "--out", str(tmp_path / "m")]) == 1


class TestPredict:
    def test_top_items(self, trained, basket_file, capsys):
        observed = basket_file.read_text(encoding="utf-8").splitlines()[0].split(",")[0]
        capsys.readouterr()
        assert main(["predict", "--model", str(trained), "--basket", observed, "--top", "4"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 4
        ids = [line.split("\t")[0] for line in lines]
        probs = [float(line.split("\t")[1]) for line in lines]
        assert observed not in ids
        assert probs == sorted(probs, reverse=True)

    def test_empty_basket(self, trained, basket_file, capsys):
        capsys.readouterr()
        assert main(["predict", "--model", str(trained), "--top", "100"]) == 0
        probs = [float(line.split("\t")[1]) for line in capsys.readouterr().out.strip().splitlines()]
        assert len(probs) == read_baskets(basket_file).M
        assert sum(probs) == pytest.approx(1.0)

    def test_unknown_item(self, trained, capsys):
        assert main(["predict", "--model", str(trained), "--basket", "item0,gizmo"]) == 1
        assert "gizmo" in capsys.readouterr().err


class TestEvaluate:
    def test_report(self, trained, tmp_path):
        report = tmp_path / "report.txt"
        test_file = trained.with_name(trained.name + ".test.txt")
        code = main(
            ["evaluate", "--model", str(trained), "--data", str(test_file), "--ks", "1,3", "--report", str(report)]
        )
        assert code == 0
        metrics = {}
        for line in report.read_text(encoding="utf-8").splitlines():
            name, k, value = line.split(" ")
            metrics[(name, k)] = value
        assert 0.0 <= float(metrics[("mpr", "-")]) <= 100.0
        assert ("precision_at", "3") in metrics
        assert int(metrics[("n_instances", "-")]) == 30
        assert ("test_ll", "-") in metrics

    def test_beta_zero_matches_plain_precision(self, trained, tmp_path):
        report = tmp_path / "report.txt"
        test_file = trained.with_name(trained.name + ".test.txt")
        args = ["evaluate", "--model", str(trained), "--data", str(test_file), "--beta-pop", "0", "--report", str(report)]
        assert main(args) == 0
        values = {}
        for line in report.read_text(encoding="utf-8").splitlines():
            name, k, value = line.split(" ")
            values[(name, k)] = value
        for k in ("1", "5", "10", "20"):
            assert values[("pop_weighted_precision_at", k)] == values[("precision_at", k)]

    def test_unknown_items(self, trained, tmp_path, capsys):
        data = tmp_path / "other.txt"
        data.write_text("item0,widget\n", encoding="utf-8")
        assert main(["evaluate", "--model", str(trained), "--data", str(data)]) == 1
        assert "Catalog mismatch" in " ".join(capsys.readouterr().err.split())


class TestCheckAndBench:
    def test_check(self):
        assert main(["check", "--trials", "3"]) == 0

    def test_check_defaults(self):
        assert main(["check"]) == 0

    def test_bench(self):
        assert main(["bench", "--m-values", "20,40", "--k", "4", "--basket-size", "2", "--trials", "1"]) == 0

    def test_bad_int_list(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["bench", "--m-values", "ten"])
        assert excinfo.value.code == 2


class TestHelp:
    def test_no_command(self):
        assert main([]) == 2

    def test_help(self, capsys):
        assert main(["--help"]) == 0
        assert "train" in capsys.readouterr().out

    def test_command_help(self, capsys):
        assert main(["train", "--help"]) == 0
        assert "--test-fraction" in capsys.readouterr().out
