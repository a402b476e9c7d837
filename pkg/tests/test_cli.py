import json

import pytest

from studyatlas.cli import main
from studyatlas.fixtures import fixture_dir


@pytest.fixture(scope="module")
def snapshot_dir(tmp_path_factory):
    base = fixture_dir()
    out = tmp_path_factory.mktemp("cli") / "snap"
    code = main([
        "ingest",
        "--corpus", str(base / "corpus.csv"),
        "--schema", str(base / "schema.yaml"),
        "--abstracts", str(base / "abstracts.csv"),
        "--bib", str(base / "corpus.bib"),
        "--refs", str(base / "refs"),
        "--out", str(out),
    ])
    assert code == 0
    return out


def test_validate_clean_corpus(capsys):
    base = fixture_dir()
    code = main(["validate", "--corpus", str(base / "corpus.csv"), "--schema", str(base / "schema.yaml")])
    assert code == 0
    assert "10 records, 0 violations" in capsys.readouterr().out


def test_snapshot_summary(snapshot_dir, capsys):
    assert main(["snapshot", str(snapshot_dir)]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["records"] == 10
    assert info["matrices"] == ["abstract", "database"]


def test_neighbors_output(snapshot_dir, capsys):
    assert main(["neighbors", "alder2016tap", "--dir", str(snapshot_dir), "--threshold", "0.5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("alder2016tapx")


def test_similarity_edges_format(snapshot_dir, capsys):
    assert main(["similarity", "--mode", "abstract", "--dir", str(snapshot_dir)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "id_a,id_b,raw,z"
    assert len(lines) == 1 + 10 * 9 // 2
    assert "np.float64" not in lines[1]


def test_similarity_csv_format(snapshot_dir, capsys):
    assert main(["similarity", "--mode", "db", "--dir", str(snapshot_dir), "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 11
    assert lines[0].startswith(",alder2016tap,")


def test_review_accept_persists(snapshot_dir, tmp_path, capsys):
    decisions = tmp_path / "decisions.jsonl"
    assert main(["graph", "review", "list", "--dir", str(snapshot_dir), "--decisions", str(decisions)]) == 0
    listing = capsys.readouterr().out.splitlines()
    key = next(line.split()[0] for line in listing if "davis2020blink" in line)
    assert main(["graph", "review", "accept", key, "--dir", str(snapshot_dir),
                 "--decisions", str(decisions)]) == 0
    capsys.readouterr()
    assert main(["snapshot", str(snapshot_dir)]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["author_edges"] == 8
    assert info["review_queue"] == 5
    assert decisions.exists()


def test_unknown_mode_fails_cleanly(snapshot_dir, capsys):
    assert main(["similarity", "--mode", "vibes", "--dir", str(snapshot_dir)]) == 2


def test_missing_corpus_is_error(capsys):
    code = main(["validate", "--corpus", "/nonexistent/x.csv"])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_review_csv_export_and_import(tmp_path, capsys):
    from studyatlas.fixtures import fixture_dir

    base = fixture_dir()
    out = tmp_path / "snap"
    decisions = tmp_path / "decisions.jsonl"
    assert main([
        "ingest", "--corpus", str(base / "corpus.csv"), "--schema", str(base / "schema.yaml"),
        "--abstracts", str(base / "abstracts.csv"), "--bib", str(base / "corpus.bib"),
        "--refs", str(base / "refs"), "--out", str(out),
    ]) == 0
    capsys.readouterr()

    assert main(["graph", "review", "list", "--csv", "--dir", str(out),
                 "--decisions", str(decisions)]) == 0
    exported = capsys.readouterr().out
    lines = exported.splitlines()
    assert lines[0] == "key,kind,id_a,id_b,score,evidence,verdict"
    assert len(lines) == 7  # header + 6 queued candidates

    # A reviewer fills the verdict column for two rows and re-imports.
    reviewed = []
    verdicts = iter(["accept", "reject"])
    for line in lines[1:]:
        if "citation" in line:
            reviewed.append(line.rsplit(",", 1)[0] + "," + next(verdicts, ""))
        else:
            reviewed.append(line)
    review_file = tmp_path / "reviewed.csv"
    review_file.write_text(lines[0] + "\n" + "\n".join(reviewed) + "\n", "utf-8")
    assert main(["graph", "review", "import", str(review_file), "--dir", str(out),
                 "--decisions", str(decisions)]) == 0
    assert "applied 2 verdicts" in capsys.readouterr().out

    assert main(["snapshot", str(out)]) == 0
    import json as json_module
    info = json_module.loads(capsys.readouterr().out)
    assert info["review_queue"] == 4
    assert info["citation_edges"] == 6  # one accepted mid-band candidate


def test_graph_extract_persists_decisions_replay(tmp_path, capsys):
    import json as json_module

    from studyatlas.fixtures import fixture_dir

    base = fixture_dir()
    out = tmp_path / "snap"
    decisions = tmp_path / "decisions.jsonl"
    assert main([
        "ingest", "--corpus", str(base / "corpus.csv"), "--schema", str(base / "schema.yaml"),
        "--abstracts", str(base / "abstracts.csv"), "--bib", str(base / "corpus.bib"),
        "--refs", str(base / "refs"), "--out", str(out), "--decisions", str(decisions),
    ]) == 0
    capsys.readouterr()
    assert main(["graph", "review", "list", "--dir", str(out), "--decisions", str(decisions)]) == 0
    key = next(line.split()[0] for line in capsys.readouterr().out.splitlines() if "citation" in line)
    assert main(["graph", "review", "reject", key, "--dir", str(out), "--decisions", str(decisions)]) == 0
    capsys.readouterr()

    # Re-extraction replays the stored verdict and persists the graph.
    assert main(["graph", "extract", "--dir", str(out), "--decisions", str(decisions)]) == 0
    capsys.readouterr()
    assert main(["snapshot", str(out)]) == 0
    info = json_module.loads(capsys.readouterr().out)
    assert info["review_queue"] == 5
