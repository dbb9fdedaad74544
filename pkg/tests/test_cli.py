import json
from pathlib import Path

import numpy as np
import pytest

from divbalance import io
from divbalance.cli import main, summary_from_jsonl

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write_json(path, data):
    path.write_text(json.dumps(data))
    return str(path)


@pytest.fixture
def small_circles(tmp_path):
    cfg = write_json(tmp_path / "c.json", {"num_rings": 4, "base_count": 20, "odd_ratio": 4, "seed": 1})
    out = tmp_path / "circles.csv"
    assert main(["gen-circles", cfg, "--out", str(out)]) == 0
    return out


def test_gen_circles_4500(tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert main(["gen-circles", str(CONFIGS / "circles_4500.json"), "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "points: 4500" in stdout
    assert "800 100 800 100" in stdout
    assert (tmp_path / "c.json").exists()
    first = out.read_bytes()
    main(["gen-circles", str(CONFIGS / "circles_4500.json"), "--out", str(out)])
    assert out.read_bytes() == first


def test_gen_blobs(tmp_path, capsys):
    assert main(["gen-blobs", str(CONFIGS / "blobs.json"), "--out", str(tmp_path / "b.csv")]) == 0
    assert "points: 525" in capsys.readouterr().out


def test_missing_config_exit_2(tmp_path, capsys):
    assert main(["gen-circles", str(tmp_path / "nope.json"), "--out", str(tmp_path / "x.csv")]) == 2
    assert "not found" in capsys.readouterr().err


def test_bad_config_exit_2(tmp_path):
    cfg = write_json(tmp_path / "c.json", {"num_rings": 0})
    assert main(["gen-circles", cfg, "--out", str(tmp_path / "x.csv")]) == 2
    cfg = write_json(tmp_path / "d.json", {"rings": 3})
    assert main(["gen-circles", cfg, "--out", str(tmp_path / "x.csv")]) == 2


def test_unwritable_output_exit_1(tmp_path, small_circles):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code = main(["select", "--dataset", str(small_circles), "--n", "5", "--out", str(blocker / "sub")])
    assert code == 1


@pytest.mark.parametrize("strategy", ["diverse", "random", "cluster_balanced"])
def test_select(tmp_path, small_circles, capsys, strategy):
    out = tmp_path / strategy
    args = ["select", "--dataset", str(small_circles), "--strategy", strategy, "--n", "20", "--seed", "3",
            "--out", str(out)]
    if strategy == "cluster_balanced":
        args += ["--clusters", "4"]
    assert main(args) == 0
    assert "class_size_std" in capsys.readouterr().out
    sel = io.read_selection(out / "selection.json")
    subset = io.read_dataset(out / "subset.csv")
    assert len(subset) == len(sel.indices) <= 20
    full = io.read_dataset(small_circles)
    assert subset.ids == [full.ids[i] for i in sel.indices]


def test_select_bad_n(tmp_path, small_circles):
    assert main(["select", "--dataset", str(small_circles), "--n", "0", "--out", str(tmp_path / "s")]) == 2
    assert main(["select", "--dataset", str(small_circles), "--n", "10000", "--out", str(tmp_path / "s")]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["select", "--dataset", str(small_circles), "--n", "x", "--out", str(tmp_path / "s")])
    assert exc.value.code == 2


def test_embed_then_select(tmp_path):
    data = tmp_path / "b.csv"
    main(["gen-blobs", str(CONFIGS / "blobs.json"), "--out", str(data)])
    cfg = write_json(tmp_path / "e.json", {"embedder": {"layer_dims": [8, 6, 3, 6, 8]}, "train": {"epochs": 3}})
    assert main(["embed", "--dataset", str(data), "--config", cfg, "--out", str(tmp_path / "emb")]) == 0
    ids, emb = io.read_embeddings(tmp_path / "emb" / "embeddings.csv")
    assert emb.shape == (525, 3)
    assert io.read_params(tmp_path / "emb" / "params.json").layer_dims == [8, 6, 3, 6, 8]
    assert main(["select", "--dataset", str(data), "--embeddings", str(tmp_path / "emb" / "embeddings.csv"),
                 "--n", "30", "--out", str(tmp_path / "sel")]) == 0


def test_embed_dim_mismatch(tmp_path, small_circles):
    cfg = write_json(tmp_path / "e.json", {"embedder": {"layer_dims": [3, 2, 3]}})
    assert main(["embed", "--dataset", str(small_circles), "--config", cfg, "--out", str(tmp_path / "e")]) == 2


def test_evaluate(tmp_path, small_circles, capsys):
    ds = io.read_dataset(small_circles)
    io.write_dataset(ds.subset(range(0, len(ds), 7)), tmp_path / "test.csv")
    out = tmp_path / "metrics.csv"
    assert main(["evaluate", "--train-subset", str(small_circles), "--test", str(tmp_path / "test.csv"),
                 "--k", "1", "--out", str(out)]) == 0
    assert "accuracy: 1.000000" in capsys.readouterr().out
    assert out.read_text().splitlines()[0] == "accuracy,class_size_std,k,n_train,n_test"


def test_evaluate_dim_mismatch(tmp_path, small_circles):
    main(["gen-blobs", str(CONFIGS / "blobs.json"), "--out", str(tmp_path / "b.csv")])
    assert main(["evaluate", "--train-subset", str(small_circles), "--test", str(tmp_path / "b.csv")]) == 2


def test_iterate_and_replay(tmp_path, capsys):
    data = tmp_path / "b.csv"
    main(["gen-blobs", str(CONFIGS / "blobs.json"), "--out", str(data)])
    ds = io.read_dataset(data)
    io.write_dataset(ds.subset(range(1, len(ds), 5)), tmp_path / "test.csv")
    io.write_dataset(ds.subset([i for i in range(len(ds)) if i % 5 != 1]), tmp_path / "train.csv")
    cfg = write_json(tmp_path / "p.json", {
        "iterations": 2, "n_select": 40, "strategies": ["diverse", "random"], "seeds": [0, 1],
        "embedder": {"layer_dims": [8, 6, 3, 6, 8]}, "train": {"epochs": 2},
    })
    out = tmp_path / "run"
    assert main(["iterate", "--dataset", str(tmp_path / "train.csv"), "--test", str(tmp_path / "test.csv"),
                 "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "summary.csv").read_text().splitlines()
    assert lines[0] == "strategy,seed,iteration,accuracy,class_size_std"
    assert len(lines) == 1 + 2 * 2 * 2
    assert {tuple(l.split(",")[:3]) for l in lines[1:]} == {
        (s, str(seed), str(it)) for s in ("diverse", "random") for seed in (0, 1) for it in (0, 1)}
    replayed = ["strategy,seed,iteration,accuracy,class_size_std"] + [
        ",".join(map(str, r)) for r in summary_from_jsonl(out / "reports.jsonl")]
    assert replayed == lines


def test_iterate_unknown_key(tmp_path):
    data = tmp_path / "b.csv"
    main(["gen-blobs", str(CONFIGS / "blobs.json"), "--out", str(data)])
    cfg = write_json(tmp_path / "p.json", {"n_select": 5, "bogus": 1})
    assert main(["iterate", "--dataset", str(data), "--test", str(data), "--config", cfg,
                 "--out", str(tmp_path / "o")]) == 2


def test_crossover_small(tmp_path, small_circles, capsys):
    out = tmp_path / "x.csv"
    assert main(["crossover", "--dataset", str(small_circles), "--n-diverse", "20", "--k", "1",
                 "--seed-count", "2", "--out", str(out)]) == 0
    assert "crossover ratio:" in capsys.readouterr().out
    assert out.read_text().startswith("strategy,n_diverse,n_random")
