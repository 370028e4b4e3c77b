"""The treepack command: output formats, exit codes and settings handling."""
import json

import pytest

from app.cli import main

STAR_9 = ",".join(["8"] + ["1"] * 8)


def run(capsys, *argv):
    status = main(list(argv))
    captured = capsys.readouterr()
    return status, captured.out.strip(), captured.err


def test_count_trees(capsys):
    assert run(capsys, "count-trees", "--d", "3,1,1,1")[:2] == (0, "1")


def test_graphical_answers_false_with_exit_zero(capsys):
    status, out, _ = run(capsys, "graphical", "--d", "4,2,2")
    assert (status, out) == (0, "false")


def test_classify(capsys):
    assert run(capsys, "classify", "--d", "2,2,1,1")[:2] == (0, "path")


def test_kundu_not_packable(capsys):
    status, out, _ = run(capsys, "kundu", "--d", "3,1,1,1", "--f", "3,1,1,1")
    assert status == 2
    assert out == "sum not graphical"


def test_pack_caterpillar_json(capsys):
    status, out, _ = run(capsys, "pack-caterpillar", "--d", "2,2,1,1", "--f", "1,1,2,2", "--format", "json")
    assert status == 0
    assert json.loads(out) == {"n": 4, "trees": [[[1, 2], [1, 3], [2, 4]], [[1, 4], [2, 3], [3, 4]]]}


def test_pack_caterpillar_text(capsys):
    _, out, _ = run(capsys, "pack-caterpillar", "--d", "2,2,1,1", "--f", "1,1,2,2")
    assert out == "n=4\n1 2\n1 3\n2 4\n\nn=4\n1 4\n2 3\n3 4"


def test_same_seed_same_output(capsys):
    argv = ["random-tree", "--d", "5,2,2,2,2,2,1,1,1,1,1", "--seed", "17"]
    first = run(capsys, *argv)[:2]
    assert first[0] == 0
    assert run(capsys, *argv)[:2] == first


def test_random_tree_attachment_method(capsys):
    status, out, _ = run(capsys, "random-tree", "--d", "3,1,1,1", "--seed", "1", "--method", "attachment")
    assert (status, out) == (0, "n=4\n1 2\n1 3\n1 4")


def test_missing_seed_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as exit_info:
        main(["random-tree", "--d", "2,2,1,1"])
    assert exit_info.value.code == 1


def test_unknown_command_is_a_usage_error():
    with pytest.raises(SystemExit) as exit_info:
        main(["frobnicate"])
    assert exit_info.value.code == 1


def test_bad_sequence_text(capsys):
    status, _, err = run(capsys, "count-trees", "--d", "2,x,1")
    assert status == 1
    assert "count-trees" in err


def test_exact_count_guard(capsys):
    status, _, err = run(capsys, "exact-count", "--d", STAR_9, "--f", STAR_9)
    assert status == 3
    assert "n <= 8" in err
    assert run(capsys, "exact-count", "--d", STAR_9, "--f", STAR_9, "--guard-n", "9")[:2] == (0, "0")


def test_input_file(capsys, tmp_path):
    instance = tmp_path / "pair.json"
    instance.write_text(json.dumps({"D": [2, 2, 1, 1], "F": [1, 1, 2, 2]}))
    assert run(capsys, "kundu", "--input", str(instance))[:2] == (0, "packable")


def test_input_and_inline_flags_conflict(capsys, tmp_path):
    instance = tmp_path / "pair.json"
    instance.write_text(json.dumps({"D": [2, 2, 1, 1], "F": [1, 1, 2, 2]}))
    status, _, err = run(capsys, "kundu", "--input", str(instance), "--d", "2,2,1,1")
    assert status == 1
    assert "--input" in err


def test_missing_input_file(capsys, tmp_path):
    assert run(capsys, "kundu", "--input", str(tmp_path / "absent.json"))[0] == 1


def test_config_file_sets_guard(capsys, tmp_path):
    config = tmp_path / "treepack.env"
    config.write_text("TREEPACK_GUARD_N_ENUMERATION=3\n")
    assert run(capsys, "enum-trees", "--d", "2,2,1,1", "--config", str(config))[0] == 3
    assert run(capsys, "enum-trees", "--d", "2,2,1,1")[0] == 0


def test_missing_config_file(capsys, tmp_path):
    assert run(capsys, "count-trees", "--d", "1,1", "--config", str(tmp_path / "none.env"))[0] == 1


def test_pack_leaves_star_is_infeasible(capsys):
    status, _, _ = run(capsys, "pack-leaves", "--d", "4,1,1,1,1", "--f", "1,2,2,2,1", "--seed", "1")
    assert status == 2


def test_pack_multi(capsys):
    status, out, _ = run(
        capsys,
        "pack-multi",
        "--row", "4,5,1,1,1,1,1,1,1",
        "--row", "1,1,4,5,1,1,1,1,1",
        "--row", "1,1,1,1,3,6,1,1,1",
        "--seed", "3",
        "--format", "json",
    )
    assert status == 0
    body = json.loads(out)
    assert body["n"] == 9
    assert len(body["trees"]) == 3


def test_ham_paths(capsys):
    assert run(capsys, "ham-paths", "--n", "5")[:2] == (0, "1 2 3 4 5\n2 4 1 5 3")


def test_samples_needed(capsys):
    assert run(capsys, "samples-needed", "--p", "1/4", "--epsilon", "0.2", "--delta", "0.1")[:2] == (0, "1798")


def test_analyze(capsys):
    _, out, _ = run(capsys, "analyze", "--d", "2,2,1,1", "--f", "1,1,2,2")
    assert out == "A=1,2\nB=3,4\nexpected_common=1\np_lower=1/4"


def test_estimate_key_value_lines(capsys):
    _, out, _ = run(
        capsys, "estimate", "--d", "2,2,1,1", "--f", "1,1,2,2", "--seed", "2", "--epsilon", "0.2", "--delta", "0.1"
    )
    lines = dict(line.split("=", 1) for line in out.splitlines())
    assert lines["samples_used"] == "1798"
    assert lines["seed"] == "2"


def test_reduce_bipartite(capsys):
    status, out, _ = run(capsys, "reduce-bipartite", "--n1", "2", "--n2", "2", "--d", "1,1;1,1", "--f", "1,1;1,1")
    assert (status, out) == (0, "D=2,2,1,1\nF=1,1,2,2")


def test_reduce_bipartite_json_uses_upper_case_keys(capsys):
    _, out, _ = run(
        capsys, "reduce-bipartite", "--n1", "2", "--n2", "2", "--d", "1,1;1,1", "--f", "1,1;1,1", "--format", "json"
    )
    assert json.loads(out) == {"D": [2, 2, 1, 1], "F": [1, 1, 2, 2]}


def test_reduce_tree_odd_sum(capsys):
    assert run(capsys, "reduce-tree", "--d", "3,2,2,2", "--f", "0,0,0,0")[0] == 1


def test_decide_brute(capsys):
    assert run(capsys, "decide-brute", "--d", "1,1", "--f", "1,1")[:2] == (2, "false")
    assert run(capsys, "decide-brute", "--d", "2,2,1,1", "--f", "1,1,2,2")[:2] == (0, "true")


def test_decide_bipartite(capsys):
    argv = ["decide-bipartite", "--n1", "2", "--n2", "2", "--d", "1,1;1,1", "--f", "1,1;1,1"]
    assert run(capsys, *argv)[:2] == (0, "true")


def test_tv(capsys):
    assert run(capsys, "tv", "--p", "0.75,0.25", "--q", "0.5,0.5")[:2] == (0, "0.25")


def test_tv_rejects_nan(capsys):
    status, _, err = run(capsys, "tv", "--p", "nan,1", "--q", "0.5,0.5")
    assert status == 1
    assert "non-finite" in err
