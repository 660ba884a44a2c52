import json
import socket
import subprocess
import sys
import time
import urllib.request

import pytest

import _synth
from topicflux.cli import main


def invoke(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_run")
    paths = _synth.generate(root / "data", n_docs=400, seed=5)
    config = root / "config.toml"
    config.write_text(
        _synth.config_toml(paths, min_cluster_size=20, reduce_k=15, subsample_fraction=1.0)
    )
    return {"root": root, "paths": paths, "config": config}


def test_prepare_writes_outputs_and_provenance(small_run, capsys):
    out = small_run["root"] / "prepared"
    code, stdout, _ = invoke(capsys, "prepare", "--config", str(small_run["config"]), "--out", str(out))
    assert code == 0
    payload = json.loads(stdout)
    assert payload["retained"] == 400
    assert payload["dropped"]["duplicate"] == 1
    assert payload["dropped"]["date_precision"] == 1
    assert payload["dropped"]["language"] == 1
    assert payload["dropped"]["missing_fields"] == 1
    for name in ("corpus.jsonl", "provenance.json", "profile.json"):
        assert (out / name).exists()


def test_prepare_rerun_idempotent(small_run, capsys):
    out = small_run["root"] / "prepared_idem"
    code1, out1, _ = invoke(capsys, "prepare", "--config", str(small_run["config"]), "--out", str(out))
    body1 = (out / "corpus.jsonl").read_bytes()
    code2, out2, _ = invoke(capsys, "prepare", "--config", str(small_run["config"]), "--out", str(out))
    assert code1 == code2 == 0
    assert out1 == out2
    assert (out / "corpus.jsonl").read_bytes() == body1


def test_missing_config_key_exit_2_names_key(small_run, tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('seed = 1\n[corpus]\nformat = "csv"\n')  # no corpus.path
    code, _, err = invoke(capsys, "prepare", "--config", str(bad), "--out", str(tmp_path / "x"))
    assert code == 2
    assert "corpus.path" in err


def test_missing_required_flag_exit_2(capsys):
    code = main(["fit", "--config", "c.toml"])  # --corpus/--emb/--out missing
    capsys.readouterr()
    assert code == 2


def test_tune_single_combo_one_row(small_run, capsys):
    prepared = small_run["root"] / "prepared"
    if not prepared.exists():
        invoke(capsys, "prepare", "--config", str(small_run["config"]), "--out", str(prepared))
    trials = small_run["root"] / "trials.csv"
    code, stdout, _ = invoke(
        capsys,
        "tune",
        "--config", str(small_run["config"]),
        "--corpus", str(prepared),
        "--emb", small_run["paths"]["embeddings"],
        "--out", str(trials),
    )
    assert code == 0
    lines = trials.read_text().strip().split("\n")
    assert len(lines) == 2  # header + single combination
    summary = json.loads(stdout)
    assert summary["trials"] == 1
    assert summary["best_params"]["min_cluster_size"] == 20


def test_tune_same_seed_identical_csv(small_run, capsys):
    prepared = small_run["root"] / "prepared"
    outs = []
    for name in ("t1.csv", "t2.csv"):
        path = small_run["root"] / name
        code, _, _ = invoke(
            capsys,
            "tune",
            "--config", str(small_run["config"]),
            "--corpus", str(prepared),
            "--emb", small_run["paths"]["embeddings"],
            "--out", str(path),
            "--seed", "77",
        )
        assert code == 0
        outs.append(strip_ms_column(path.read_text()))
    assert outs[0] == outs[1]


def strip_ms_column(csv_text: str) -> str:
    lines = []
    for line in csv_text.strip().split("\n"):
        lines.append(",".join(line.split(",")[:-1]))  # drop wall-clock ms
    return "\n".join(lines)


def test_fit_and_refit_bit_identical_labels(small_run, capsys):
    prepared = small_run["root"] / "prepared"
    models = []
    for name in ("m1", "m2"):
        out = small_run["root"] / name
        code, stdout, err = invoke(
            capsys,
            "fit",
            "--config", str(small_run["config"]),
            "--corpus", str(prepared),
            "--emb", small_run["paths"]["embeddings"],
            "--out", str(out),
        )
        assert code == 0, err
        models.append(out)
    a = (models[0] / "labels.i32").read_bytes()
    b = (models[1] / "labels.i32").read_bytes()
    assert a == b
    assert (models[0] / "weights_values.f32").read_bytes() == (models[1] / "weights_values.f32").read_bytes()
    assert (models[0] / "vocabulary.json").read_bytes() == (models[1] / "vocabulary.json").read_bytes()


def test_fit_topic_count_in_expected_band(small_run, capsys):
    # planted corpus has 10 topics; the fit above must recover close to that
    model_dir = small_run["root"] / "m1"
    manifest = json.loads((model_dir / "manifest.json").read_text())
    assert 8 <= manifest["counts"]["topics"] <= 12


def test_cli_test_subcommand_outputs_result(small_run, capsys):
    model_dir = small_run["root"] / "m1"
    code, stdout, err = invoke(
        capsys,
        "test",
        "--model", str(model_dir),
        "--topic", "0",
        "--w1", "2020-01-01,2021-03-31",
        "--w2", "2021-04-01,2022-06-30",
        "--bins", "2",
    )
    assert code == 0, err
    body = json.loads(stdout)
    assert set(body) >= {"h", "p_value", "significant", "df", "group_sizes"}
    assert body["df"] == 1


def test_cli_test_alpha_flag_honored(small_run, capsys):
    model_dir = small_run["root"] / "m1"
    code, stdout, _ = invoke(
        capsys,
        "test",
        "--model", str(model_dir),
        "--topic", "0",
        "--w1", "2020-01-01,2021-03-31",
        "--w2", "2021-04-01,2022-06-30",
        "--bins", "2",
        "--alpha", "0.001",
    )
    assert code == 0
    assert json.loads(stdout)["alpha"] == 0.001


def test_cli_test_bad_window_exit_3(small_run, capsys):
    model_dir = small_run["root"] / "m1"
    code, _, err = invoke(
        capsys,
        "test",
        "--model", str(model_dir),
        "--topic", "0",
        "--w1", "2020-01-01,2020-01-02",  # narrower than one 2-week bin
        "--w2", "2021-04-01,2022-06-30",
        "--bins", "2",
    )
    assert code == 3
    assert "too narrow" in err


def test_cli_missing_model_dir_exit_4(capsys, tmp_path):
    code, _, err = invoke(
        capsys,
        "test",
        "--model", str(tmp_path / "nope"),
        "--topic", "0",
        "--w1", "2020-01-01,2020-06-01",
        "--w2", "2020-06-02,2020-12-01",
    )
    assert code == 4


def test_serve_port_in_use_clear_error(small_run, capsys):
    blocker = socket.socket()
    blocker.bind(("127.0.0.1", 0))
    port = blocker.getsockname()[1]
    try:
        code, _, err = invoke(
            capsys,
            "serve",
            "--model", str(small_run["root"] / "m1"),
            "--bind", f"127.0.0.1:{port}",
        )
        assert code == 4
        assert "cannot bind" in err
    finally:
        blocker.close()


def test_serve_reads_bind_from_config(small_run, capsys, tmp_path):
    # malformed serve.bind_addr from config surfaces as a usage error,
    # proving the config path is consulted when --bind is omitted
    bad_cfg = tmp_path / "serve.toml"
    bad_cfg.write_text('[serve]\nbind_addr = "nohostport"\n')
    code, _, err = invoke(
        capsys,
        "serve",
        "--model", str(small_run["root"] / "m1"),
        "--config", str(bad_cfg),
    )
    assert code == 2
    assert "host:port" in err


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def test_serve_healthz_and_missing_model(small_run, tmp_path):
    code = main(["serve", "--model", str(tmp_path / "missing"), "--bind", "127.0.0.1:1"])
    assert code == 4

    port = _free_port()
    proc = subprocess.Popen(
        [
            sys.executable, "-m", "topicflux.cli",
            "serve",
            "--model", str(small_run["root"] / "m1"),
            "--bind", f"127.0.0.1:{port}",
        ],
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
    )
    try:
        deadline = time.time() + 30
        last_error = None
        while time.time() < deadline:
            try:
                with urllib.request.urlopen(f"http://127.0.0.1:{port}/healthz", timeout=1) as r:
                    assert json.loads(r.read()) == {"status": "ok"}
                    break
            except OSError as exc:
                last_error = exc
                time.sleep(0.2)
        else:
            raise AssertionError(f"server never came up: {last_error}")
        with urllib.request.urlopen(f"http://127.0.0.1:{port}/api/v1/model", timeout=2) as r:
            info = json.loads(r.read())
            assert info["topics"] >= 1
    finally:
        proc.terminate()
        proc.wait(timeout=10)
