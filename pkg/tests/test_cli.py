import pytest

from main import main
from phimdp.context_tree import parse_tree, root_tree, serialize_tree, split
from phimdp.history import Alphabets, History
from phimdp.utils.csv_io import history_to_csv


@pytest.mark.parametrize("depth,expected", [(0, "1"), (1, "2"), (2, "5")])
def test_count_trees(capsys, depth, expected):
    assert main(["count-trees", "--depth", str(depth)]) == 0
    assert capsys.readouterr().out.strip() == expected


def test_count_trees_negative_depth(capsys):
    assert main(["count-trees", "--depth", "-1"]) == 2
    assert "depth" in capsys.readouterr().err


def test_inspect_root_tree(tmp_path, capsys):
    path = tmp_path / "tree.txt"
    path.write_text(serialize_tree(root_tree(Alphabets(2, 2, (0.0, 1.0)), 4)), encoding="utf-8")
    assert main(["inspect-tree", str(path)]) == 0
    out = capsys.readouterr().out
    assert "1 state," in out
    assert "Markov: yes" in out


def test_inspect_tree_lists_suffixes(tmp_path, capsys):
    tree = split(root_tree(Alphabets(1, 2, (0.0, 1.0)), 4), ())
    path = tmp_path / "tree.txt"
    path.write_text(serialize_tree(tree), encoding="utf-8")
    assert main(["inspect-tree", str(path)]) == 0
    out = capsys.readouterr().out
    assert "2 states" in out
    assert "s0: 0" in out and "s1: 1" in out


def test_inspect_corrupted_tree(tmp_path, capsys):
    lines = serialize_tree(root_tree(Alphabets(2, 2, (0.0, 1.0)), 4)).splitlines()
    lines.append("1,7,1,1")
    path = tmp_path / "tree.txt"
    path.write_text("\n".join(lines), encoding="utf-8")
    assert main(["inspect-tree", str(path)]) == 2
    assert "line" in capsys.readouterr().err


def test_unknown_environment(capsys, tmp_path):
    assert main(["run", "--env", "pacman", "--output-dir", str(tmp_path)]) == 2
    assert "unknown environment" in capsys.readouterr().err


def test_bad_checkpoints_are_rejected(tmp_path):
    with pytest.raises(SystemExit):
        main(["run", "--env", "tiger", "--checkpoints", "10,x", "--output-dir", str(tmp_path)])


def test_small_run_writes_outputs(tmp_path):
    out = tmp_path / "out"
    code = main([
        "run", "--env", "tiger", "--seed", "2",
        "--initial-samples", "200", "--additional-samples", "100",
        "--pt-iters", "3", "--replicas", "2", "--max-depth", "4",
        "--checkpoints", "200,300,400", "--eval-runs", "2", "--eval-actions", "50",
        "--output-dir", str(out), "--trace", "--dump-cost",
    ])
    assert code == 0
    for name in ("curve.csv", "tree.txt", "manifest.txt", "qtable.csv", "history.csv", "trace.csv",
                 "cost_rows.csv"):
        assert (out / name).exists(), name

    curve = (out / "curve.csv").read_text(encoding="utf-8").splitlines()
    assert curve[0].startswith("checkpoint,mean")
    assert [row.split(",")[0] for row in curve[1:]] == ["200", "300", "400"]

    manifest = (out / "manifest.txt").read_text(encoding="utf-8")
    assert "alpha: 0.1" in manifest
    assert "history_length: 400" in manifest

    tree = parse_tree((out / "tree.txt").read_text(encoding="utf-8"))
    assert tree.alphabets.num_actions == 3

    history_rows = (out / "history.csv").read_text(encoding="utf-8").splitlines()
    assert len(history_rows) == 1 + 1 + 400


def test_same_seed_gives_identical_files(tmp_path):
    def run(directory):
        assert main([
            "run", "--env", "grid4x4", "--seed", "3",
            "--initial-samples", "200", "--additional-samples", "100",
            "--pt-iters", "4", "--replicas", "2", "--max-depth", "4",
            "--checkpoints", "200,300", "--eval-runs", "2", "--eval-actions", "50",
            "--output-dir", str(directory),
        ]) == 0
        return (directory / "curve.csv").read_bytes(), (directory / "tree.txt").read_bytes()

    assert run(tmp_path / "a") == run(tmp_path / "b")


def small_run(directory, env, *extra):
    assert main([
        "run", "--env", env, "--seed", "2",
        "--initial-samples", "200", "--additional-samples", "100",
        "--pt-iters", "3", "--replicas", "2",
        "--checkpoints", "200,300", "--eval-runs", "2", "--eval-actions", "50",
        "--output-dir", str(directory), *extra,
    ]) == 0
    return (directory / "manifest.txt").read_text(encoding="utf-8")


def test_manifest_reports_targets_and_band(tmp_path):
    manifest = small_run(tmp_path, "tiger", "--max-depth", "4", "--trace")
    assert "target_0:" in manifest
    assert "not evaluated" in manifest
    assert "tree_states_band: 10-200" in manifest
    assert "reference_tree_states" not in manifest
    header = (tmp_path / "trace.csv").read_text(encoding="utf-8").splitlines()[0]
    assert "best_cost" in header.split(",")


def test_maze_manifest_compares_reference_tree(tmp_path):
    manifest = small_run(tmp_path, "cheese-maze", "--max-depth", "4")
    assert "reference_tree_states: 32" in manifest
    assert "reference_cost_bits:" in manifest
    assert "known_gap:" in manifest


def test_inspect_tree_costs_a_history(tmp_path, capsys):
    alphabets = Alphabets(2, 2, (0.0, 1.0))
    history = History(alphabets, initial_observation=0)
    for t in range(40):
        history.append_step(t % 2, (t + 1) % 2, float(t % 2))
    tree_path, history_path = tmp_path / "tree.txt", tmp_path / "history.csv"
    tree_path.write_text(serialize_tree(split(root_tree(alphabets, 4), ())), encoding="utf-8")
    history_path.write_text(history_to_csv(history), encoding="utf-8")
    assert main(["inspect-tree", str(tree_path), "--history", str(history_path), "--alpha", "0.5"]) == 0
    out = capsys.readouterr().out
    assert "cost on 40 steps:" in out
    assert "alpha=0.5" in out
