"""CLI contract tests: output is deterministic, exit codes follow the
0=positive / 1=negative / 2=usage / 3=io contract."""

import os
import subprocess
import sys
from pathlib import Path

import pytest
from click.testing import CliRunner

import scentag as st
from scentag.cli import main

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name in st.FIXTURE_NAMES:
        p = tmp_path / name
        p.write_text(st.fixture_text(name))
        paths[name.split(".")[0]] = str(p)
    paths["dir"] = tmp_path
    return paths


def invoke(runner, args, **kw):
    return runner.invoke(main, args, catch_exceptions=False, **kw)


class TestTrees:
    def test_list(self, runner):
        result = invoke(runner, ["trees", "list"])
        assert result.exit_code == 0
        lines = result.output.splitlines()
        assert len(lines) == 11
        assert lines[0] == "actor_type\tactor\t8"

    def test_show_text(self, runner):
        result = invoke(runner, ["trees", "show", "lead_vehicle"])
        assert result.exit_code == 0
        assert 'lead_vehicle [actor] "Lead vehicle"' in result.output
        assert '  leader "Leader"' in result.output

    def test_export_dot_golden(self, runner):
        result = invoke(runner, ["trees", "export-dot", "lead_vehicle"])
        assert result.exit_code == 0
        assert result.output == (GOLDEN / "lead_vehicle.dot").read_text()

    def test_show_dot_format_matches_export(self, runner):
        a = invoke(runner, ["trees", "show", "lead_vehicle", "--format", "dot"])
        b = invoke(runner, ["trees", "export-dot", "lead_vehicle"])
        assert a.output == b.output

    def test_unknown_tree_is_usage_error(self, runner):
        result = invoke(runner, ["trees", "show", "nope"])
        assert result.exit_code == 2

    def test_doc_round_trips(self, runner, tmp_path):
        result = invoke(runner, ["trees", "doc"])
        assert result.exit_code == 0
        custom = tmp_path / "reg.txt"
        custom.write_text(result.output)
        again = invoke(runner, ["--registry", str(custom), "trees", "list"])
        assert again.exit_code == 0
        assert len(again.output.splitlines()) == 11

    def test_custom_registry(self, runner, tmp_path):
        reg = tmp_path / "tiny.txt"
        reg.write_text('tree mood scope=condition\n  happy "Happy"\n')
        result = invoke(runner, ["--registry", str(reg), "trees", "list"])
        assert result.output == "mood\tcondition\t2\n"


class TestCategoryScenario:
    def test_lint_clean_fixtures(self, runner, files):
        result = invoke(runner, ["category", "lint", files["paper_categories"]])
        assert result.exit_code == 0
        assert result.output == ""

    def test_lint_reports_warnings(self, runner, tmp_path):
        f = tmp_path / "redundant.cat"
        f.write_text(
            'category "x" { actor a1 { actor_type:vehicle actor_type:vehicle/category_m } }'
        )
        result = invoke(runner, ["category", "lint", str(f)])
        assert result.exit_code == 0
        assert "redundant-requirement" in result.output

    def test_lint_parse_error_is_usage(self, runner, tmp_path):
        f = tmp_path / "broken.cat"
        f.write_text('category "x" {')
        result = invoke(runner, ["category", "lint", str(f)])
        assert result.exit_code == 2

    def test_missing_file_is_io(self, runner):
        result = invoke(runner, ["category", "lint", "/does/not/exist.cat"])
        assert result.exit_code == 3

    def test_scenario_validate(self, runner, files):
        result = invoke(runner, ["scenario", "validate", files["cutin"]])
        assert result.exit_code == 0
        assert result.output == "OK cutin_merge\n"

    def test_scenario_invalid(self, runner, tmp_path):
        f = tmp_path / "bad.scn"
        f.write_text('scenario "bad" { actor ego { phase 2 { lead_vehicle:leader } phase 1 { lead_vehicle:no_leader } } }')
        result = invoke(runner, ["scenario", "validate", str(f)])
        assert result.exit_code == 2


class TestMatch:
    def test_cutin_match_golden(self, runner, files):
        result = invoke(
            runner,
            ["match", files["paper_categories"], "cut-in at merging lanes", files["cutin"]],
        )
        assert result.exit_code == 0
        assert result.output == (GOLDEN / "cutin_match.txt").read_text()

    def test_no_match_exit_one(self, runner, files):
        result = invoke(
            runner,
            ["match", files["paper_categories"], "cut-in at merging lanes", files["straight_road"]],
        )
        assert result.exit_code == 1
        assert result.output == "NO MATCH\n"

    def test_byte_identical_across_runs(self, runner, files):
        args = ["match", files["paper_categories"], "driving on a straight road", files["straight_road"]]
        assert invoke(runner, args).output == invoke(runner, args).output

    def test_byte_identical_across_processes(self, files, tmp_path):
        # different hash seeds shake out any set-iteration-order leaks
        store = str(tmp_path / "d.store")
        commands = [
            ["match", files["paper_categories"], "cut-in at merging lanes", files["cutin"]],
            ["trees", "list"],
            ["trees", "export-dot", "initial_state"],
        ]

        def run_all(seed: str) -> list[bytes]:
            env = dict(os.environ, PYTHONHASHSEED=seed)
            out = []
            for cmd in commands:
                proc = subprocess.run(
                    [sys.executable, "-m", "scentag.cli", *cmd],
                    capture_output=True,
                    env=env,
                )
                assert proc.returncode == 0, proc.stderr
                out.append(proc.stdout)
            return out

        assert run_all("1") == run_all("31337")


class TestIncludes:
    FIG2 = (
        'category "daylight" { static { lighting:day } }\n'
        'category "rain" { static { weather:rain } }\n'
        'category "day and rain" { static { lighting:day weather:rain } }\n'
        'category "anything" {}\n'
    )

    @pytest.fixture
    def lib(self, tmp_path):
        f = tmp_path / "lib.cat"
        f.write_text(self.FIG2)
        return str(f)

    def test_universal_includes(self, runner, lib):
        result = invoke(runner, ["includes", lib, "anything", "daylight"])
        assert result.exit_code == 0
        assert result.output.splitlines()[0] == "INCLUDES"

    def test_syntactic_includes(self, runner, lib):
        result = invoke(runner, ["includes", lib, "daylight", "day and rain"])
        assert result.exit_code == 0
        assert "ungrouped lighting:day => ungrouped lighting:day" in result.output

    def test_unknown_without_semantic(self, runner, lib):
        result = invoke(runner, ["includes", lib, "day and rain", "daylight"])
        assert result.exit_code == 1
        assert result.output.splitlines()[0] == "UNKNOWN"
        assert "--semantic" in result.stderr

    def test_semantic_refutation(self, runner, lib):
        result = invoke(
            runner, ["includes", lib, "day and rain", "daylight", "--semantic"]
        )
        assert result.exit_code == 1
        lines = result.output.splitlines()
        assert lines[0] == "NOT_INCLUDES"
        assert "counterexample:" in result.output

    def test_semantic_confirmation(self, runner, lib):
        result = invoke(
            runner, ["includes", lib, "daylight", "day and rain", "--semantic"]
        )
        assert result.exit_code == 0

    def test_global_library_flag(self, runner, lib):
        result = invoke(runner, ["--library", lib, "includes", "anything", "rain"])
        assert result.exit_code == 0

    def test_unknown_name_is_usage(self, runner, lib):
        result = invoke(runner, ["includes", lib, "nope", "rain"])
        assert result.exit_code == 2

    def test_explicit_tag_pool_file(self, runner, lib, tmp_path):
        pool = tmp_path / "pool.txt"
        pool.write_text("lighting:day\nweather:rain\nweather:clear\n")
        result = invoke(
            runner,
            ["includes", lib, "day and rain", "daylight", "--semantic",
             "--tag-pool", str(pool)],
        )
        assert result.exit_code == 1
        assert result.output.splitlines()[0] == "NOT_INCLUDES"


class TestStore:
    def test_full_workflow(self, runner, files, tmp_path):
        store = str(tmp_path / "flow.store")
        assert invoke(runner, ["store", "init", "--store", store]).exit_code == 0

        result = invoke(runner, ["store", "add", files["straight_road"], "--store", store])
        assert result.exit_code == 0
        assert result.output == "added straight_road_cruise (1 records)\n"

        invoke(runner, ["store", "add", files["cutin"], "--store", store])
        result = invoke(runner, ["store", "query", "road_layout:straight", "--store", store])
        assert result.exit_code == 0
        assert result.output == "cutin_merge\nstraight_road_cruise\n"

    def test_query_empty_store_exits_one(self, runner, tmp_path):
        store = str(tmp_path / "empty.store")
        invoke(runner, ["store", "init", "--store", store])
        result = invoke(
            runner,
            ["store", "query", "weather:rain AND NOT lighting:dark", "--store", store],
        )
        assert result.exit_code == 1
        assert result.output == ""

    def test_query_missing_store_is_io(self, runner, tmp_path):
        result = invoke(
            runner, ["store", "query", "weather:", "--store", str(tmp_path / "no.store")]
        )
        assert result.exit_code == 3

    def test_reinit_is_usage_error(self, runner, tmp_path):
        store = str(tmp_path / "dup.store")
        invoke(runner, ["store", "init", "--store", store])
        assert invoke(runner, ["store", "init", "--store", store]).exit_code == 2

    def test_duplicate_add_is_usage_error(self, runner, files, tmp_path):
        store = str(tmp_path / "dup2.store")
        invoke(runner, ["store", "init", "--store", store])
        invoke(runner, ["store", "add", files["cutin"], "--store", store])
        result = invoke(runner, ["store", "add", files["cutin"], "--store", store])
        assert result.exit_code == 2

    def test_add_from_stdin(self, runner, tmp_path):
        store = str(tmp_path / "stdin.store")
        invoke(runner, ["store", "init", "--store", store])
        doc = 'scenario "piped" { conditions { weather:fog } }'
        result = invoke(runner, ["store", "add", "-", "--store", store], input=doc)
        assert result.exit_code == 0
        assert "added piped" in result.output

    def test_bad_query_is_usage(self, runner, tmp_path):
        store = str(tmp_path / "q.store")
        invoke(runner, ["store", "init", "--store", store])
        result = invoke(runner, ["store", "query", "weather:rain AND", "--store", store])
        assert result.exit_code == 2


class TestTestcases:
    def test_select(self, runner, files, tmp_path):
        store = str(tmp_path / "tc.store")
        invoke(runner, ["store", "init", "--store", store])
        for key in ("straight_road", "oncoming_turn", "cutin"):
            invoke(runner, ["store", "add", files[key], "--store", store])
        result = invoke(
            runner,
            [
                "testcases", "select",
                "--library", files["paper_categories"],
                "--odd", "driving on a straight road,cut-in at merging lanes",
                "--store", store,
            ],
        )
        assert result.exit_code == 0
        assert result.output == (
            "cutin_merge\tcut-in at merging lanes\n"
            "straight_road_cruise\tdriving on a straight road\n"
        )

    def test_empty_selection_exits_one(self, runner, files, tmp_path):
        store = str(tmp_path / "none.store")
        invoke(runner, ["store", "init", "--store", store])
        result = invoke(
            runner,
            [
                "testcases", "select",
                "--library", files["paper_categories"],
                "--odd", "driving on a straight road",
                "--store", store,
            ],
        )
        assert result.exit_code == 1

    def test_unknown_odd_name_is_usage(self, runner, files, tmp_path):
        store = str(tmp_path / "u.store")
        invoke(runner, ["store", "init", "--store", store])
        result = invoke(
            runner,
            [
                "testcases", "select",
                "--library", files["paper_categories"],
                "--odd", "no such category",
                "--store", store,
            ],
        )
        assert result.exit_code == 2


class TestUsage:
    def test_missing_subcommand_args(self, runner):
        assert invoke(runner, ["match"]).exit_code == 2

    def test_unknown_subcommand(self, runner):
        assert invoke(runner, ["frobnicate"]).exit_code == 2
