"""File emitters: formats, manifests, determinism."""

import json
import math
import struct

import numpy as np

from ftbalance import (
    StepConfig,
    build_measures,
    emit_outputs,
    fmt,
    make_model,
    run,
    write_csv,
)
from ftbalance.engine import Profile

FILES = ["snapshots.csv", "fronts.csv", "events.csv", "series.csv",
         "atoms.csv", "curves.csv", "summary.json", "manifest.json"]


def _run_burgers_rp(tmp_path, u_left=1.0, u_right=0.0):
    m = make_model("burgers")
    datum = Profile(np.array([0.0]), np.array([[u_left], [u_right]]))
    rep = run(m, datum, StepConfig(accuracy=0.05, time_step=0.05, horizon=0.5,
                                   delta_bar=10.0, delta_fence=100.0))
    ledger = build_measures(rep)
    manifest = emit_outputs(rep, ledger, [], str(tmp_path))
    return rep, manifest


def test_fmt_round_trips_floats(rng):
    for _ in range(200):
        x = float(struct.unpack("<d", rng.bytes(8))[0])
        if math.isnan(x):
            continue
        assert float(fmt(x)) == x
    assert fmt(1) == "1"
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(math.inf) == "inf"
    assert fmt(float("nan")) == "nan"


def test_write_csv_counts_and_line_endings(tmp_path):
    p = tmp_path / "t.csv"
    n = write_csv(str(p), ["a", "b"], [(1, 0.5), (2, 0.25)])
    assert n == 2
    raw = p.read_bytes()
    assert b"\r" not in raw
    assert raw.decode().splitlines()[0] == "a,b"


def test_constant_run_emits_all_files_with_empty_tables(tmp_path):
    m = make_model("burgers")
    datum = Profile(np.empty(0), np.array([[0.3]]))
    rep = run(m, datum, StepConfig(accuracy=0.05, time_step=0.05, horizon=0.5))
    manifest = emit_outputs(rep, build_measures(rep), [], str(tmp_path))
    for name in FILES:
        assert (tmp_path / name).exists(), name
    assert manifest["fronts.csv"] == 0
    assert manifest["events.csv"] == 0
    assert manifest["atoms.csv"] == 0
    assert manifest["curves.csv"] == 0
    assert manifest["snapshots.csv"] >= 1


def test_single_shock_front_log_one_row_per_window(tmp_path):
    rep, manifest = _run_burgers_rp(tmp_path)
    # one shock, no sources: one segment per fractional-step window
    assert manifest["fronts.csv"] == len(rep.windows)
    header, *rows = (tmp_path / "fronts.csv").read_text().splitlines()
    assert header.split(",")[:2] == ["front_id", "family"]
    for row in rows:
        cells = row.split(",")
        assert cells[7] == "SHOCK"
        assert abs(float(cells[6]) + 1.0) < 1e-12  # size -1 jump


def test_manifest_counts_match_event_log(tmp_path):
    m = make_model("elasticity")
    datum = Profile(np.array([-0.2, 0.0, 0.15]),
                    np.array([[1.0, 0.0], [1.02, 0.01],
                              [0.99, -0.02], [1.0, 0.0]]))
    rep = run(m, datum, StepConfig(accuracy=0.02, time_step=0.02, horizon=0.5,
                                   delta_bar=10.0, delta_fence=100.0))
    manifest = emit_outputs(rep, build_measures(rep), [], str(tmp_path))
    assert manifest["events.csv"] == len(rep.events)
    assert manifest["fronts.csv"] == len(rep.front_segments())
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["events"] == len(rep.events)
    assert summary["fronts"] == len(rep.front_segments())
    assert summary["model"] == "elasticity"


def test_outputs_byte_identical_across_runs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    _run_burgers_rp(a)
    _run_burgers_rp(b)
    for name in FILES:
        if name == "summary.json":
            continue  # wall_seconds differs between runs
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_snapshot_rows_tile_the_line(tmp_path):
    rep, _ = _run_burgers_rp(tmp_path)
    lines = (tmp_path / "snapshots.csv").read_text().splitlines()[1:]
    starts = [line.split(",")[1] for line in lines]
    ends = [line.split(",")[2] for line in lines]
    assert starts[0] == "-inf" and ends[-1] == "inf"
    for left_end, right_start in zip(ends[:-1], starts[1:]):
        assert left_end == right_start


def test_series_table_has_functional_columns(tmp_path):
    rep, _ = _run_burgers_rp(tmp_path)
    header = (tmp_path / "series.csv").read_text().splitlines()[0]
    assert header == "t,tv,v,q,upsilon"
