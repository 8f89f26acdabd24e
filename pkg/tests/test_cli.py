import json
import subprocess
import sys
from pathlib import Path


from commevo.cli import STAGES, main
from commevo.partition import read_partition

DATA = Path(__file__).parent / "data" / "tiny_events.csv"
FAST = ["--window", "14d", "--step", "7d", "--half-life", "7d", "--trials", "10", "-k", "1", "--top-k", "2"]


def run(stage, out, *extra):
    return main([stage, "-i", str(DATA), "-o", str(out), *FAST, *extra])


def run_all(out, *extra):
    for stage in STAGES:
        assert run(stage, out, *extra) == 0, stage


def test_snapshot_count_on_fixture(tmp_path):
    assert run("snapshots", tmp_path) == 0
    manifest = json.loads((tmp_path / "snapshots" / "manifest.json").read_text())
    # first event 2018-01-02T08:00, last 2018-02-09T12:00; windows end on
    # Jan 16, 23, 30, Feb 6 and Feb 13 (the first end at or after the last event)
    assert [s["window_end_utc"][:10] for s in manifest["snapshots"]] == [
        "2018-01-16", "2018-01-23", "2018-01-30", "2018-02-06", "2018-02-13",
    ]
    assert manifest["events"] == 48
    assert manifest["dropped_self_retweets"] == 2
    assert json.loads((tmp_path / "config.json").read_text())["window"] == "14d"


def test_detect_twice_is_identical(tmp_path):
    run("snapshots", tmp_path)
    run("detect", tmp_path, "--seed", "5")
    first = {p.name: p.read_bytes() for p in (tmp_path / "partitions").iterdir()}
    run("detect", tmp_path, "--seed", "5")
    second = {p.name: p.read_bytes() for p in (tmp_path / "partitions").iterdir()}
    assert first == second
    p0 = read_partition(tmp_path / "partitions" / "partition_0.csv")
    assert p0.n_communities >= 2


def test_full_pipeline_artifacts(tmp_path):
    run_all(tmp_path)
    for rel in ("scores.csv", "timeline.json", "flows.json", "hindex.csv", "report.json",
                "influence/totals.json", "influence/influence_0.csv", "influence/meta_network_0.json"):
        assert (tmp_path / rel).exists(), rel
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["selected"][0] == 0 and report["selected"][-1] == 4
    assert len(report["selected"]) == 3
    assert len(report["f1_curve"]) == 4
    flows = json.loads((tmp_path / "flows.json").read_text())
    for pair in flows["pairs"] if isinstance(flows, dict) else flows:
        assert {"core", "new", "lost", "matrix"} <= set(pair)
    header = (tmp_path / "hindex.csv").read_text().splitlines()[0]
    assert header.startswith("user,h,h_rank,out_deg,h@t0,")


def test_compare_needs_two_partitions(tmp_path, capsys):
    assert run("snapshots", tmp_path, "--start", "2018-01-02", "--end", "2018-01-16") == 0
    assert run("detect", tmp_path) == 0
    assert run("compare", tmp_path) == 2
    assert "at least 2" in capsys.readouterr().err


def test_missing_stage_names_prerequisite(tmp_path, capsys):
    assert run("detect", tmp_path) == 2
    assert "'snapshots' stage" in capsys.readouterr().err
    run("snapshots", tmp_path)
    assert run("compare", tmp_path) == 2
    assert "'detect' stage" in capsys.readouterr().err


def test_config_violations_all_listed(tmp_path, capsys):
    code = main(["snapshots", "-i", str(DATA), "-o", str(tmp_path),
                 "--trials", "0", "--threshold", "1.5", "--window", "nonsense", "--top-k", "0"])
    assert code == 1
    err = capsys.readouterr().err
    for needle in ("trials", "threshold", "window", "top_k"):
        assert needle in err


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"input = {DATA}\nwindow = 14d\nstep = 7d\nhalf_life = 7d\ntrials = 3\nseed = 9\n")
    out = tmp_path / "o"
    assert main(["snapshots", "--config", str(cfg), "-o", str(out), "--seed", "4"]) == 0
    echo = json.loads((out / "config.json").read_text())
    assert echo["seed"] == 4 and echo["trials"] == 3
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert main(["snapshots", "--config", str(bad), "-o", str(out)]) == 1


def test_data_error_exit_code(tmp_path):
    broken = tmp_path / "broken.csv"
    broken.write_text("time,author,retweeter,post_id\nyesterday,a,b,p\n")
    assert main(["snapshots", "-i", str(broken), "-o", str(tmp_path / "o")]) == 2
    assert main(["snapshots", "-i", str(tmp_path / "absent.csv"), "-o", str(tmp_path / "o")]) == 2


def test_help_lists_every_flag():
    res = subprocess.run([sys.executable, "-m", "commevo", "detect", "--help"],
                         capture_output=True, text=True, check=True)
    for flag in ("--config", "--input", "--window", "--step", "--half-life", "--trials", "--threshold",
                 "--seed", "-k", "--top-k", "--min-size", "--edge-threshold", "--threads", "--on-error"):
        assert flag in res.stdout
    top = subprocess.run([sys.executable, "-m", "commevo", "--help"], capture_output=True, text=True, check=True)
    for stage in STAGES:
        assert stage in top.stdout
