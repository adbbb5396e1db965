"""Python smoke tests for the compiled extension."""

import json
import os
import pathlib
import subprocess

import pytest

import chartattrib


def test_table_html_round_trip():
    table = {
        "column_headers": ["2020", "2021"],
        "row_headers": ["A"],
        "cells": [[10, "n/a"]],
    }
    html = chartattrib.serialize_table_html(table)
    assert html.count("<td>") == 2
    assert chartattrib.parse_table_html(html) == table


def test_iou_fixture():
    assert chartattrib.iou([0, 0, 1, 1], [0, 0, 1, 1]) == 1.0
    got = chartattrib.iou([0, 0, 0.10, 0.10], [0.05, 0.05, 0.15, 0.15])
    assert abs(got - 1.0 / 7.0) < 1e-12


def test_match_and_coverage():
    matches, best = chartattrib.match_regions(
        [[0, 0, 0.2, 0.2]], [[0, 0, 0.2, 0.2], [0.5, 0.5, 0.9, 0.9]], 0.9
    )
    assert len(matches) == 1
    assert best == [1.0, 0.0]
    covered = chartattrib.line_coverage(
        [[0, 0, 0.6, 0.6]], [(0.1, 0.1), (0.5, 0.5), (0.9, 0.9)]
    )
    assert covered == pytest.approx(2 / 3)


def test_render_and_rasterize_check():
    table = {
        "column_headers": ["q1", "q2", "q3"],
        "row_headers": ["sales"],
        "cells": [[30.0, 55.0, 80.0]],
    }
    png, gt = chartattrib.render(table, "bar", style_seed=5)
    assert png[:4] == b"\x89PNG"
    assert len(gt["entries"]) == 3
    checks = chartattrib.rasterize_check(png, json.dumps(gt))
    assert all(iou >= 0.98 for (_, _, iou) in checks)


def test_oracle_pipeline_end_to_end(tmp_path):
    tables = tmp_path / "tables"
    tables.mkdir()
    (tables / "t0.json").write_text(
        json.dumps(
            {
                "column_headers": ["Apy", "Bpy", "Cpy"],
                "row_headers": ["Spy"],
                "cells": [[25.0, 50.0, 75.0]],
            }
        )
    )
    samples = tmp_path / "samples"
    written, skipped = chartattrib.synthesize(str(tables), str(samples), ["bar"], 9)
    assert written == ["t0__bar"]
    assert skipped == []

    out = tmp_path / "out"
    config = {
        "backend": f"oracle:{samples}",
        "detector": "oracle",
        "oracle_mapping": True,
        "top_k": 1,
        "out": str(out),
    }
    sample_files = sorted(str(p) for p in samples.glob("*.sample.json"))
    out_dir, completed, failures = chartattrib.attribute(sample_files, json.dumps(config))
    assert failures == []
    assert completed == ["t0__bar"]

    report = json.loads(
        chartattrib.evaluate(str(out / "citations"), str(samples), str(tmp_path / "eval"))
    )
    assert report["overall"]["mean_iou"] == 1.0
    assert report["overall"]["match_rate"] == 1.0


def test_cli_binary_available_and_coherent(tmp_path):
    cli = os.environ.get("CHARTATTRIB_CLI")
    if not cli or not pathlib.Path(cli).exists():
        pytest.skip("CHARTATTRIB_CLI not set")
    result = subprocess.run([cli, "--help"], capture_output=True, text=True)
    assert result.returncode == 0
    for command in ("attribute", "synthesize", "evaluate", "baseline", "replay"):
        assert command in result.stdout
