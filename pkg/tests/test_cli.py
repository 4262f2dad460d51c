"""Command-line interface: exit codes, determinism, and option precedence."""

import argparse
import json

import numpy as np
import pytest

import termspace.cli as cli
from termspace import ProviderError, write_fixture_files
from termspace.cli import Settings, _UsageError

TERMS6 = """id,term,label
1,liver tissue,organ
2,liver sample,organ
3,liver section,organ
4,crimson paint,color
5,crimson dye,color
6,crimson ink,color
"""


@pytest.fixture()
def fixture_files(tmp_path):
    return write_fixture_files(tmp_path / "fixtures")


@pytest.fixture()
def terms6(tmp_path):
    path = tmp_path / "terms6.csv"
    path.write_text(TERMS6, encoding="utf-8")
    return str(path)


class ExplodingProvider:
    provider_id = "exploding"
    model_id = "exploding-test"

    def transform(self, texts):
        raise ProviderError("backend unavailable")


class TestExitCodes:
    def test_no_arguments_is_a_usage_error(self, capsys):
        assert cli.main([]) == 1
        assert "usage error" in capsys.readouterr().err

    def test_help_exits_zero(self, capsys):
        assert cli.main(["--help"]) == 0
        assert "comply" in capsys.readouterr().out
        assert cli.main(["comply", "--help"]) == 0
        assert "--spec" in capsys.readouterr().out

    def test_missing_input_file(self, tmp_path, capsys):
        code = cli.main(
            ["comply", "--spec", str(tmp_path / "nope.csv"), "--queries", str(tmp_path / "nope2.csv")]
        )
        assert code == 1
        assert "cannot read" in capsys.readouterr().err

    def test_unknown_provider(self, terms6, capsys):
        code = cli.main(["unify", "--input", terms6, "--k", "2", "--provider", "word2vec"])
        assert code == 1
        assert "unknown provider" in capsys.readouterr().err

    def test_more_clusters_than_terms(self, terms6, capsys):
        assert cli.main(["unify", "--input", terms6, "--k", "20"]) == 1

    def test_sweep_without_out_path(self, terms6, capsys):
        code = cli.main(["unify", "--input", terms6, "--k", "2,3"])
        assert code == 1
        assert "--out" in capsys.readouterr().err

    def test_impossible_perturbation(self, tmp_path, capsys):
        spec = tmp_path / "tiny.txt"
        spec.write_text("a\n", encoding="utf-8")
        code = cli.main(["perturb", "--spec", str(spec), "--substitutions", "2"])
        assert code == 1

    def test_provider_failure_exits_two(self, fixture_files, capsys, monkeypatch):
        monkeypatch.setattr(cli, "_build_provider", lambda settings: ExplodingProvider())
        code = cli.main(
            [
                "comply",
                "--spec", str(fixture_files["tissue_spec"]),
                "--queries", str(fixture_files["tissue_queries"]),
            ]
        )
        assert code == 2
        assert "provider error" in capsys.readouterr().err

    def test_unknown_experiment_track(self, capsys):
        assert cli.main(["experiment", "--track", "nope"]) == 1


class TestByteIdenticalReruns:
    def run_twice(self, argv_for, tmp_path, capsys):
        a = tmp_path / "first.out"
        b = tmp_path / "second.out"
        assert cli.main(argv_for(a)) == 0
        assert cli.main(argv_for(b)) == 0
        capsys.readouterr()
        return a.read_bytes(), b.read_bytes()

    def test_comply(self, fixture_files, tmp_path, capsys):
        def argv(out):
            return [
                "comply",
                "--spec", str(fixture_files["tissue_spec"]),
                "--queries", str(fixture_files["tissue_queries"]),
                "--use-definitions",
                "--out", str(out),
            ]

        first, second = self.run_twice(argv, tmp_path, capsys)
        assert first == second

    def test_unify(self, terms6, tmp_path, capsys):
        def argv(out):
            return ["unify", "--input", terms6, "--k", "2", "--out", str(out)]

        first, second = self.run_twice(argv, tmp_path, capsys)
        assert first == second

    def test_project_pca(self, terms6, tmp_path, capsys):
        def argv(out):
            return ["project", "--input", terms6, "--method", "pca", "--out", str(out)]

        first, second = self.run_twice(argv, tmp_path, capsys)
        assert first == second

    def test_perturb(self, fixture_files, tmp_path, capsys):
        def argv(out):
            return ["perturb", "--spec", str(fixture_files["noise50"]), "--out", str(out)]

        first, second = self.run_twice(argv, tmp_path, capsys)
        assert first == second


class TestComply:
    def test_stdout_report_is_json(self, fixture_files, capsys):
        code = cli.main(
            [
                "comply",
                "--spec", str(fixture_files["tissue_spec"]),
                "--queries", str(fixture_files["tissue_queries"]),
                "--use-definitions",
            ]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["spec"] == "tissue_spec"
        assert len(payload["results"]) == 6
        assert payload["accuracy"] == 1.0
        assert payload["n"] == 6

    def test_definitions_flip_via_environment(self, fixture_files, capsys, monkeypatch):
        argv = [
            "comply",
            "--spec", str(fixture_files["tissue_spec"]),
            "--queries", str(fixture_files["tissue_queries"]),
            "--provider", "tfidf",
        ]
        assert cli.main(argv) == 0
        bare = json.loads(capsys.readouterr().out)["accuracy"]
        monkeypatch.setenv("TERMSPACE_USE_DEFINITIONS", "1")
        assert cli.main(argv) == 0
        augmented = json.loads(capsys.readouterr().out)["accuracy"]
        assert bare == pytest.approx(2.0 / 3.0)
        assert augmented == 1.0

    def test_pretty_summary(self, fixture_files, capsys):
        code = cli.main(
            [
                "comply",
                "--spec", str(fixture_files["tissue_spec"]),
                "--queries", str(fixture_files["tissue_queries"]),
                "--use-definitions",
                "--pretty",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "accuracy: 100.00% of n=6" in out

    def test_cache_roundtrip_reports_full_hits(self, fixture_files, tmp_path, capsys):
        argv = [
            "comply",
            "--spec", str(fixture_files["tissue_spec"]),
            "--queries", str(fixture_files["tissue_queries"]),
            "--cache-dir", str(tmp_path / "cache"),
            "--out", str(tmp_path / "r.json"),
        ]
        assert cli.main(argv) == 0
        first_err = capsys.readouterr().err
        assert "cache:" in first_err and "(0% hits)" in first_err
        assert cli.main(argv) == 0
        second_err = capsys.readouterr().err
        assert "(100% hits)" in second_err


class TestUnify:
    def test_stdout_report(self, terms6, capsys):
        assert cli.main(["unify", "--input", terms6, "--k", "2"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["k"] == 2
        assert payload["purity"] == 1.0
        assert payload["label_groups"] == 2
        assert len(payload["clusters"]) == 2

    def test_sweep_writes_suffixed_files(self, terms6, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = cli.main(["unify", "--input", terms6, "--k", "2,3", "--out", str(out)])
        assert code == 0
        assert not out.exists()
        for k in (2, 3):
            sweep_file = tmp_path / f"report_k{k}.json"
            assert sweep_file.exists()
            assert json.loads(sweep_file.read_text(encoding="utf-8"))["k"] == k

    def test_assignments_csv(self, terms6, tmp_path, capsys):
        csv_path = tmp_path / "assign.csv"
        code = cli.main(
            ["unify", "--input", terms6, "--k", "2", "--out", str(tmp_path / "r.json"), "--csv", str(csv_path)]
        )
        assert code == 0
        lines = csv_path.read_text(encoding="utf-8").strip().split("\n")
        assert lines[0] == "term_id,term_text,cluster,label"
        assert len(lines) == 7

    def test_pretty_purity_line(self, terms6, capsys):
        assert cli.main(["unify", "--input", terms6, "--k", "2", "--pretty"]) == 0
        assert "purity 100.00%" in capsys.readouterr().out


class TestOptionPrecedence:
    def parse(self, argv):
        return cli.build_parser().parse_args(argv)

    def test_environment_is_the_outermost_layer(self, terms6, capsys, monkeypatch):
        monkeypatch.setenv("TERMSPACE_K", "2")
        assert cli.main(["unify", "--input", terms6]) == 0
        assert json.loads(capsys.readouterr().out)["k"] == 2

    def test_config_file_overrides_environment(self, terms6, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("TERMSPACE_K", "2")
        conf = tmp_path / "run.conf"
        conf.write_text("# sweep setup\nk = 3\n", encoding="utf-8")
        assert cli.main(["unify", "--input", terms6, "--config", str(conf)]) == 0
        assert json.loads(capsys.readouterr().out)["k"] == 3

    def test_flag_overrides_config_file(self, terms6, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("TERMSPACE_K", "2")
        conf = tmp_path / "run.conf"
        conf.write_text("k = 3\n", encoding="utf-8")
        code = cli.main(["unify", "--input", terms6, "--config", str(conf), "--k", "4"])
        assert code == 0
        assert json.loads(capsys.readouterr().out)["k"] == 4

    def test_settings_layering_unit(self, tmp_path, monkeypatch):
        conf = tmp_path / "c.conf"
        conf.write_text('alpha = "from-file"\n', encoding="utf-8")
        args = argparse.Namespace(config=str(conf), alpha=None, beta=None, gamma="cli")
        settings = Settings(args)
        monkeypatch.setenv("TERMSPACE_ALPHA", "from-env")
        monkeypatch.setenv("TERMSPACE_BETA", "from-env")
        assert settings.get("gamma") == "cli"
        assert settings.get("alpha") == "from-file"
        assert settings.get("beta") == "from-env"
        assert settings.get("delta", default="fallback") == "fallback"

    def test_settings_casts(self, monkeypatch):
        settings = Settings(argparse.Namespace(config=None, flag=None, count=None))
        monkeypatch.setenv("TERMSPACE_FLAG", "yes")
        monkeypatch.setenv("TERMSPACE_COUNT", "not-a-number")
        assert settings.get("flag", cast=bool) is True
        monkeypatch.setenv("TERMSPACE_FLAG", "off")
        assert settings.get("flag", cast=bool) is False
        monkeypatch.setenv("TERMSPACE_FLAG", "maybe")
        with pytest.raises(_UsageError):
            settings.get("flag", cast=bool)
        with pytest.raises(_UsageError):
            settings.get("count", cast=int)

    def test_missing_config_file(self):
        with pytest.raises(_UsageError, match="config"):
            Settings(argparse.Namespace(config="/definitely/not/here.conf"))

    def test_malformed_config_line(self, tmp_path):
        conf = tmp_path / "bad.conf"
        conf.write_text("just-a-word\n", encoding="utf-8")
        with pytest.raises(_UsageError, match="line 1"):
            Settings(argparse.Namespace(config=str(conf)))


class TestProject:
    def test_csv_with_clusters_and_labels(self, terms6, tmp_path, capsys):
        out = tmp_path / "points.csv"
        svg = tmp_path / "points.svg"
        code = cli.main(
            [
                "project",
                "--input", terms6,
                "--method", "pca",
                "--cluster-k", "2",
                "--out", str(out),
                "--svg", str(svg),
            ]
        )
        assert code == 0
        lines = out.read_text(encoding="utf-8").strip().split("\n")
        assert lines[0] == "term_id,term_text,x,y,cluster,label"
        assert len(lines) == 7
        svg_text = svg.read_text(encoding="utf-8")
        assert svg_text.startswith("<svg ")
        assert svg_text.count("<circle") == 6

    def test_tsne_method(self, terms6, capsys):
        code = cli.main(
            ["project", "--input", terms6, "--method", "tsne", "--iterations", "20", "--perplexity", "1"]
        )
        assert code == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0] == "term_id,term_text,x,y,label"
        assert len(lines) == 7
        for row in lines[1:]:
            parts = row.split(",")
            float(parts[2]), float(parts[3])  # coordinates parse back

    def test_unknown_method(self, terms6, capsys):
        assert cli.main(["project", "--input", terms6, "--method", "umap"]) == 1


class TestPerturbCommand:
    def test_emits_one_row_per_term(self, fixture_files, capsys):
        assert cli.main(["perturb", "--spec", str(fixture_files["noise50"])]) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0] == "query,expected"
        assert len(lines) == 51

    def test_repeats_multiply_rows(self, fixture_files, capsys):
        code = cli.main(
            ["perturb", "--spec", str(fixture_files["noise50"]), "--repeats", "3"]
        )
        assert code == 0
        assert len(capsys.readouterr().out.strip().split("\n")) == 151


class TestExperimentCommand:
    def test_compliance_track_shape(self, capsys):
        assert cli.main(["experiment", "--track", "compliance"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["seed"] == 0
        assert "unification" not in payload
        rows = payload["compliance"]
        by_provider = {(r["provider"], r["dataset"], r["setting"]): r for r in rows}
        noise = [r for r in rows if r["dataset"] == "noise50"]
        assert [r["provider"] for r in noise] == ["levenshtein", "one-hot", "tfidf", "char-ngram"]
        assert all(r["n"] == 50 for r in noise)
        assert by_provider[("levenshtein", "noise50", "perturbed-1")]["accuracy"] == 1.0
        assert by_provider[("char-ngram", "noise50", "perturbed-1")]["accuracy"] == 1.0
        assert by_provider[("tfidf", "tissue", "no-definitions")]["accuracy"] == pytest.approx(2.0 / 3.0)
        assert by_provider[("tfidf", "tissue", "with-definitions")]["accuracy"] == 1.0

    def test_unify_track_shape(self, capsys):
        assert cli.main(["experiment", "--track", "unify", "--k", "20"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert "compliance" not in payload
        row = payload["unification"][0]
        assert list(row) == ["provider", "dataset", "k", "n", "purity", "label_groups"]
        assert row["provider"] == "char-ngram"
        assert row["dataset"] == "synonyms1500"
        assert row["k"] == 20
        assert row["n"] == 1500
        assert row["label_groups"] == 300
        assert 0.0 < row["purity"] <= 1.0


class TestFixturesCommand:
    def test_writes_and_lists_files(self, tmp_path, capsys):
        out = tmp_path / "fx"
        assert cli.main(["fixtures", "--out", str(out)]) == 0
        listing = capsys.readouterr().out.strip().split("\n")
        assert [line.split(":")[0] for line in listing] == [
            "noise50",
            "synonyms1500",
            "tissue_queries",
            "tissue_spec",
        ]
        assert len(list(out.glob("*.csv"))) == 4
