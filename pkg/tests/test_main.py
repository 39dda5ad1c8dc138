"""
End-to-end tests of the detcov command line.
"""

# First-party imports
import json
import math

# Third-party imports
import pytest

# Project imports
from detcov.coverage import coverage
from detcov.keypoints import ImageDims, KeyPointSet
from detcov.main import main
from detcov.synthetic import gen_grid

GRID = [(p.x, p.y) for p in gen_grid(4, 4, ImageDims(100, 100)).points]
CLUSTER = [(10, 10), (11, 10), (10, 11)]


def coverage_of(coordinates):
    return coverage(KeyPointSet.from_xy("", "", coordinates))


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def _json(capsys, *argv):
    code, out = _run(capsys, *argv, "--json", "--no-timing")
    return code, json.loads(out)


def _column(document, table, column):
    data = document["tables"][table]
    position = data["columns"].index(column)
    return [row[position] for row in data["rows"]]


@pytest.fixture
def evaluation_manifest(make_dataset):
    images = [f"img{i:02d}" for i in range(40)]
    return make_dataset(
        {
            "U": {image_id: GRID for image_id in images},
            "C": {image_id: GRID if i < 10 else CLUSTER for i, image_id in enumerate(images)},
        },
        images=images,
    )


def test_coverage_two_points_fails(capsys, write_csv):
    path = write_csv("two.csv", [(0, 0), (3, 4)])
    code, document = _json(capsys, "coverage", "--dims", "900x600", str(path))
    assert code == 0
    assert document["schema_version"] == 1 and document["command"] == "coverage"
    assert _column(document, "coverage", "coverage") == [5.0]
    assert _column(document, "coverage", "threshold") == [180.0]
    assert _column(document, "coverage", "result") == ["FAIL"]
    assert "time_ms" not in document["tables"]["coverage"]["columns"]


def test_coverage_grid_passes_with_hull_and_means(capsys, write_csv):
    path = write_csv("grid.csv", [(25, 25), (75, 25), (25, 75), (75, 75)])
    code, document = _json(capsys, "coverage", "--dims", "100x100", "--hull", "--means", str(path))
    assert code == 0
    assert _column(document, "coverage", "coverage")[0] == pytest.approx(55.41, abs=0.005)
    assert _column(document, "coverage", "threshold") == [25.0]
    assert _column(document, "coverage", "result") == ["PASS"]
    assert _column(document, "coverage", "hull_ratio") == [0.25]
    assert _column(document, "coverage", "arithmetic")[0] > 55.41


def test_coverage_without_dims_has_no_verdict(capsys, write_csv):
    path = write_csv("two.csv", [(0, 0), (3, 4)])
    code, document = _json(capsys, "coverage", str(path))
    assert code == 0
    assert _column(document, "coverage", "result") == ["-"]
    assert _column(document, "coverage", "threshold") == [None]


def test_coverage_reports_bad_files_and_keeps_going(capsys, write_csv, tmp_path):
    good = write_csv("good.csv", [(0, 0), (3, 4)])
    missing = tmp_path / "missing.csv"
    code, document = _json(capsys, "coverage", str(missing), str(good))
    assert code == 2
    assert any(str(missing) in message for message in document["errors"])
    assert _column(document, "coverage", "result") == ["ERROR", "-"]
    assert _column(document, "coverage", "coverage") == [None, 5.0]


def test_coverage_parse_error_names_the_line(capsys, tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,y\n1,2\noops,3\n")
    code, document = _json(capsys, "coverage", str(path))
    assert code == 2
    assert f"{path}:3:" in document["errors"][0]


def test_coverage_with_too_few_points_is_a_partial_failure(capsys, write_csv):
    path = write_csv("one.csv", [(1, 1), (1, 1)])
    code, document = _json(capsys, "coverage", str(path))
    assert code == 1
    assert _column(document, "coverage", "distinct") == [1]


def test_reports_are_byte_stable(capsys, write_csv):
    path = write_csv("grid.csv", GRID)
    first = _run(capsys, "coverage", "--dims", "100x100", "--no-timing", str(path))
    second = _run(capsys, "coverage", "--dims", "100x100", "--no-timing", str(path))
    assert first == second
    assert "[coverage]" in first[1] and "PASS" in first[1]


def test_csv_output_separates_tables(capsys, evaluation_manifest):
    code, out = _run(
        capsys, "evaluate", "--manifest", str(evaluation_manifest), "--csv", "--no-timing"
    )
    assert code == 0
    headers = [line for line in out.splitlines() if line.startswith("# ")]
    assert headers == ["# records", "# curves", "# summary", "# mcnemar", "# matrix"]


def test_output_file(capsys, write_csv, tmp_path):
    path = write_csv("two.csv", [(0, 0), (3, 4)])
    report = tmp_path / "report.json"
    code, out = _run(capsys, "coverage", "--json", "--out", str(report), str(path))
    assert code == 0 and out == ""
    assert json.loads(report.read_text())["tables"]["coverage"]["rows"][0][3] == 5.0


def test_mutual(capsys, write_csv):
    left = write_csv("left.csv", [(0, 0), (2, 0)])
    right = write_csv("right.csv", [(1, 0)])
    code, document = _json(capsys, "mutual", "--full-precision", str(left), str(right))
    assert code == 1
    assert _column(document, "mutual", "detectors") == ["left", "right", "left+right"]
    values = _column(document, "mutual", "coverage")
    assert values[0] == 2.0 and values[1] is None
    assert values[2] == pytest.approx(1.2, abs=1e-12)


def test_hull_needs_dims(capsys, write_csv):
    path = write_csv("grid.csv", GRID)
    assert main(["hull", str(path)]) == 2
    code, document = _json(capsys, "hull", "--dims", "100x100", str(path))
    assert code == 0
    assert _column(document, "hull", "hull_ratio") == [0.5625]


def test_invalid_arguments(capsys):
    assert main(["coverage", "--dims", "100by100", "x.csv"]) == 2
    assert main(["bench", "--n", "1", "--no-timing"]) == 2
    assert main(["bench", "--n", "100", "--reps", "0"]) == 2
    assert main(["mcnemar", "-3", "4"]) == 2
    assert main(["nonsense"]) == 2


def test_mcnemar(capsys):
    code, document = _json(capsys, "mcnemar", "174", "1")
    assert code == 0
    assert _column(document, "mcnemar", "z")[0] == pytest.approx(13.0, abs=0.05)
    assert _column(document, "mcnemar", "reliability") == ["reliable"]

    code, document = _json(capsys, "mcnemar", "10", "56", "--ss", "300", "--ff", "154")
    assert _column(document, "mcnemar", "signed_z")[0] == pytest.approx(-5.53, abs=0.05)

    code, document = _json(capsys, "mcnemar", "5", "2")
    assert _column(document, "mcnemar", "reliability") == ["unreliable"]


def test_mcnemar_without_discordant_counts(capsys):
    code, document = _json(capsys, "mcnemar", "0", "0", "--ss", "12")
    assert code == 2
    assert document["tables"]["mcnemar"]["rows"] == []


def test_evaluate(capsys, evaluation_manifest):
    code, document = _json(capsys, "evaluate", "--manifest", str(evaluation_manifest))
    assert code == 0
    assert len(document["tables"]["records"]["rows"]) == 80
    assert _column(document, "summary", "detector") == ["U", "C"]
    assert _column(document, "summary", "passed") == [40, 10]

    (row,) = document["tables"]["mcnemar"]["rows"]
    assert row[:6] == ["U", "C", 10, 30, 0, 0]
    assert row[6] == pytest.approx(29 / math.sqrt(30), abs=1e-3)
    assert row[8] == "reliable"
    assert document["tables"]["matrix"]["columns"] == ["detector", "C"]
    assert document["tables"]["matrix"]["rows"][0][1] == pytest.approx(row[7])

    curves = document["tables"]["curves"]
    assert curves["columns"] == ["image_id", "U", "C"]
    assert curves["rows"][0][1] == pytest.approx(coverage_of(GRID), abs=1e-4)


def test_evaluate_single_detector(capsys, evaluation_manifest):
    code, document = _json(
        capsys, "evaluate", "--manifest", str(evaluation_manifest), "--detectors", "U"
    )
    assert code == 0
    assert document["tables"]["mcnemar"]["rows"] == []
    (summary,) = document["tables"]["summary"]["rows"]
    assert summary[3] == pytest.approx(coverage_of(GRID), abs=1e-4)
    assert summary[4] == pytest.approx(summary[3], abs=1e-4)


def test_evaluate_reports_absent_files(capsys, make_dataset):
    manifest = make_dataset(
        {"U": {"a": GRID, "b": GRID}, "C": {"a": CLUSTER}}, images=["a", "b"]
    )
    code, document = _json(capsys, "evaluate", "--manifest", str(manifest))
    assert code == 0
    assert len(document["tables"]["records"]["rows"]) == 3
    assert any(message.startswith("absent: C/b") for message in document["errors"])
    assert document["tables"]["curves"]["rows"][1] == ["b", pytest.approx(coverage_of(GRID), abs=1e-4), None]


def test_evaluate_detector_pairs(capsys, make_dataset):
    corner = [(90, 90), (91, 90)]
    manifest = make_dataset(
        {
            "U": {"a": GRID, "b": GRID},
            "C": {"a": CLUSTER, "b": CLUSTER},
            "S": {"a": corner},
        },
        images=["a", "b"],
    )
    code, document = _json(capsys, "evaluate", "--manifest", str(manifest), "--pairs")
    assert code == 0
    union = coverage_of(GRID + CLUSTER)
    values = document["tables"]["pair_values"]
    assert values["columns"] == ["image_id", "left", "right", "mutual_coverage"]
    assert [row[:3] for row in values["rows"]] == [
        ["a", "U", "C"],
        ["b", "U", "C"],
        ["a", "U", "S"],
        ["a", "C", "S"],
    ]
    assert values["rows"][0][3] == pytest.approx(union, abs=1e-4)
    assert values["rows"][3][3] == pytest.approx(coverage_of(CLUSTER + corner), abs=1e-4)

    pairs = document["tables"]["pairs"]["rows"]
    assert [row[:3] for row in pairs] == [["U", "C", 2], ["U", "S", 1], ["C", "S", 1]]
    assert pairs[0][3:] == [pytest.approx(union, abs=1e-4)] * 3
    assert pairs[1][4:] == [None, None]

    _, plain = _json(capsys, "evaluate", "--manifest", str(manifest))
    assert "pairs" not in plain["tables"]


def test_evaluate_usage_errors(capsys, evaluation_manifest, tmp_path):
    assert _json(capsys, "evaluate", "--manifest", str(tmp_path / "none.json"))[0] == 2
    assert _json(
        capsys, "evaluate", "--manifest", str(evaluation_manifest), "--detectors", "ZZZ"
    )[0] == 2


@pytest.fixture
def framework_setup(make_dataset, tmp_path):
    manifest = make_dataset(
        {
            "A": {"p1a": GRID, "p1b": GRID, "p2a": [(10, 10), (30, 10)], "p2b": [(10, 10), (30, 10)]},
            "M": {
                image_id: [(0, 0), (99, 0), (0, 99), (99, 99)]
                for image_id in ("p1a", "p1b", "p2a", "p2b")
            },
        },
        images=["p1a", "p1b", "p2a", "p2b"],
        pairs=[["p1a", "p1b"], ["p2a", "p2b"]],
    )
    kb = tmp_path / "kb.json"
    kb.write_text(
        json.dumps(
            {
                "schema": 1,
                "detectors": {"spiral": ["A"], "segmentation-based": ["M"]},
                "preferences": {"spiral": ["segmentation-based"]},
            }
        )
    )
    return manifest, kb


def test_framework(capsys, framework_setup):
    manifest, kb = framework_setup
    code, document = _json(
        capsys, "framework", "--manifest", str(manifest), "--start", "A", "--kb", str(kb),
        "--full-precision",
    )
    assert code == 0
    decisions = document["tables"]["decisions"]["rows"]
    assert [(d[0], d[1], d[2], d[3]) for d in decisions] == [
        ("pair01", 0, "A", 0),
        ("pair02", 1, "A+M", 0),
    ]
    trace = document["tables"]["trace"]
    assert trace["columns"] == [
        "pair_id", "image_id", "step", "detectors", "value", "threshold", "mode", "fallback"
    ]
    assert [row[:4] for row in trace["rows"]] == [
        ["pair01", "p1a", 0, "A"],
        ["pair01", "p1b", 0, "A"],
        ["pair02", "p2a", 0, "A"],
        ["pair02", "p2b", 0, "A"],
        ["pair02", "p2a", 1, "A+M"],
        ["pair02", "p2b", 1, "A+M"],
    ]


def test_framework_trace_matches_coverage_command(capsys, framework_setup):
    manifest, kb = framework_setup
    _, document = _json(
        capsys, "framework", "--manifest", str(manifest), "--start", "A", "--kb", str(kb),
        "--full-precision",
    )
    keypoints = manifest.parent / "keypoints"
    for pair_id, image_id, step, detectors, value, *_ in document["tables"]["trace"]["rows"]:
        files = [str(keypoints / name.lower() / f"{image_id}.csv") for name in detectors.split("+")]
        if step == 0:
            subcommand, extra = "coverage", []
        else:
            subcommand, extra = "mutual", ["--image-id", image_id]
        _, measured = _json(capsys, subcommand, "--full-precision", *extra, *files)
        table = measured["tables"][subcommand]
        assert table["rows"][-1][table["columns"].index("coverage")] == value


def test_framework_with_default_knowledge_base(capsys, framework_setup):
    manifest, _ = framework_setup
    code, document = _json(capsys, "framework", "--manifest", str(manifest), "--start", "A")
    assert code == 2
    assert "knowledge base" in document["errors"][0]


def test_framework_usage_errors(capsys, framework_setup):
    manifest, kb = framework_setup
    assert main(["framework", "--manifest", str(manifest), "--start", "A", "--choose", "bad"]) == 2
    capsys.readouterr()
    code, _ = _json(capsys, "framework", "--manifest", str(manifest), "--start", "Z", "--kb", str(kb))
    assert code == 2


def test_synth_roundtrip(capsys, tmp_path):
    out = tmp_path / "grid.csv"
    assert main(["synth", "grid", "--rows", "2", "--cols", "2", "--dims", "100x100", "--out", str(out)]) == 0
    code, document = _json(capsys, "coverage", "--dims", "100x100", str(out))
    assert _column(document, "coverage", "coverage")[0] == pytest.approx(55.41, abs=0.005)


def test_synth_to_stdout_is_seeded(capsys):
    argv = ["synth", "clustered", "--dims", "1440x956", "--n", "20", "--k", "2", "--seed", "7"]
    first = _run(capsys, *argv)
    second = _run(capsys, *argv)
    assert first == second
    lines = first[1].splitlines()
    assert lines[0] == "x,y" and len(lines) == 21


def test_synth_needs_dims():
    assert main(["synth", "uniform", "--n", "5"]) == 2


def test_bench(capsys):
    code, document = _json(capsys, "bench", "--n", "100", "500", "--reps", "3")
    assert code == 0
    bench = document["tables"]["bench"]
    assert bench["columns"] == ["n", "repetitions", "coverage"]
    assert [row[:2] for row in bench["rows"]] == [[100, 3], [500, 3]]

    code, out = _run(capsys, "bench", "--n", "100", "--reps", "3", "--json")
    assert json.loads(out)["tables"]["bench"]["columns"][-3:] == ["median_ms", "min_ms", "max_ms"]
