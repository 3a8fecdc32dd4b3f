import pytest

from wandset import cli


@pytest.fixture(scope="module")
def church_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("u") / "church3.json"
    assert cli.main(["build", "--spec", "church:2", "--depth", "3",
                     "--out", str(path)]) == 0
    return str(path)


@pytest.fixture(scope="module")
def pure_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("u") / "pure4.json"
    assert cli.main(["build", "--spec", "pure", "--depth", "4",
                     "--out", str(path)]) == 0
    return str(path)


def test_build_prints_stage_counts(capsys, tmp_path):
    out = tmp_path / "p.json"
    assert cli.main(["build", "--spec", "pure", "--depth", "4",
                     "--out", str(out)]) == 0
    lines = capsys.readouterr().out.splitlines()
    counts = [int(l.split(":")[1].split()[0]) for l in lines if l.startswith("stage")]
    assert counts == [0, 1, 2, 4, 16]


def test_build_reports_church_census(capsys, tmp_path):
    out = tmp_path / "c.json"
    assert cli.main(["build", "--spec", "church:2", "--depth", "3",
                     "--out", str(out)]) == 0
    assert "total 11 objects" in capsys.readouterr().out


def test_build_unknown_spec(tmp_path):
    assert cli.main(["build", "--spec", "nope", "--depth", "2",
                     "--out", str(tmp_path / "x.json")]) == 64


def test_build_cap_exceeded(tmp_path):
    assert cli.main(["build", "--spec", "pure", "--depth", "5",
                     "--max-objects", "100",
                     "--out", str(tmp_path / "x.json")]) == 2


def test_env_var_sets_default_cap(tmp_path, monkeypatch):
    monkeypatch.setenv("WANDSET_MAX_OBJECTS", "100")
    assert cli.main(["build", "--spec", "pure", "--depth", "5",
                     "--out", str(tmp_path / "x.json")]) == 2


def test_export_import_roundtrip_bytes(church_file, pure_file):
    for path in (church_file, pure_file):
        text = open(path).read()
        assert cli.export_fragment(cli.import_fragment(text)) == text


def test_independent_builds_export_identically():
    from wandset import universe, wandspec

    spec = wandspec.get_spec("church:2")
    a = cli.export_fragment(universe.build(spec, 3))
    b = cli.export_fragment(universe.build(wandspec.get_spec("church:2"), 3))
    assert a == b


def test_universe_file_matches_golden(tmp_path):
    import pathlib

    golden = pathlib.Path(__file__).parent / "data" / "church2_d2.json"
    out = tmp_path / "u.json"
    assert cli.main(["build", "--spec", "church:2", "--depth", "2",
                     "--out", str(out)]) == 0
    assert out.read_bytes() == golden.read_bytes()


def test_dot_export_matches_golden(tmp_path):
    import pathlib

    data = pathlib.Path(__file__).parent / "data"
    dot = tmp_path / "u.dot"
    assert cli.main(["export", "--in", str(data / "church2_d2.json"),
                     "--dot", str(dot), "--labels"]) == 0
    assert dot.read_bytes() == (data / "church2_d2.dot").read_bytes()


def test_import_rejects_malformed(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"header": {"format_version": 1}}')
    assert cli.main(["query", "rank", "--obj", "0", "--in", str(bad)]) == 65


def test_query_tap(capsys, church_file):
    assert cli.main(["query", "tap", "--wand", "0", "--arg", "{}",
                     "--in", church_file]) == 0
    tap_id = int(capsys.readouterr().out.strip())
    frag = cli.import_fragment(open(church_file).read())
    assert frag.render(tap_id) == "*0{}"


def test_query_member_expansive(capsys, church_file):
    frag = cli.import_fragment(open(church_file).read())
    universal = next(i for i in frag.ids() if frag.render(i) == "*0{}")
    assert cli.main(["query", "member", "--expansive", "--x", "{}",
                     "--of", str(universal), "--in", church_file]) == 0
    assert capsys.readouterr().out.strip() == "true"
    # primitively, nothing is in a tap
    assert cli.main(["query", "member", "--x", "{}",
                     "--of", str(universal), "--in", church_file]) == 0
    assert capsys.readouterr().out.strip() == "false"


def test_query_expansive_requires_church(pure_file):
    assert cli.main(["query", "member", "--expansive", "--x", "{}",
                     "--of", "0", "--in", pure_file]) == 64


def test_query_decompose(capsys, church_file):
    frag = cli.import_fragment(open(church_file).read())
    comp = next(i for i in frag.ids() if frag.render(i) == "*0{{}}")
    single = next(i for i in frag.ids() if frag.render(i) == "{{}}")
    assert cli.main(["query", "decompose", "--obj", str(comp),
                     "--in", church_file]) == 0
    assert capsys.readouterr().out.strip() == f"base={single} path=[0]"


def test_query_kind(capsys, church_file):
    frag = cli.import_fragment(open(church_file).read())
    card = next(i for i in frag.ids() if frag.render(i) == "*1{{}}")
    assert cli.main(["query", "kind", "--obj", str(card),
                     "--in", church_file]) == 0
    out = capsys.readouterr().out.strip()
    assert out.startswith("tap_of_bland n=1")


def test_verify_all_on_conway(tmp_path, capsys):
    path = tmp_path / "conway3.json"
    assert cli.main(["build", "--spec", "conway", "--depth", "3",
                     "--out", str(path)]) == 0
    capsys.readouterr()
    assert cli.main(["verify", "--suite", "all", "--in", str(path)]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert "# suite core" in out and "# suite conch" in out


def test_verify_church_suite(capsys, church_file):
    assert cli.main(["verify", "--suite", "church", "--in", church_file]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_verify_suite_spec_mismatch(pure_file):
    assert cli.main(["verify", "--suite", "church", "--in", pure_file]) == 64


def test_verify_conch_requires_exhaustive(tmp_path):
    path = tmp_path / "sampled.json"
    assert cli.main(["build", "--spec", "church:2", "--depth", "3",
                     "--mode", "sampled", "--out", str(path)]) == 0
    assert cli.main(["verify", "--suite", "conch", "--in", str(path)]) == 64


def test_verify_conch_reports_slack(capsys, church_file):
    assert cli.main(["verify", "--suite", "conch", "--in", church_file]) == 0
    out = capsys.readouterr().out
    assert "slack" in out


def test_eval_and_translate(capsys, tmp_path, church_file):
    sent = tmp_path / "ax.sent"
    sent.write_text("ext: forall a. forall b. (Bland(a) & Bland(b)) -> "
                    "((forall x. In(x,a) <-> In(x,b)) -> a = b)\n")
    assert cli.main(["eval", "--formula", str(sent), "--src", church_file]) == 0
    assert capsys.readouterr().out.strip() == "ext: true"
    assert cli.main(["translate", "--formula", str(sent), "--translation", "tolt",
                     "--src", church_file, "--dst", church_file]) == 0
    assert "preserved" in capsys.readouterr().out


def test_translate_without_dst_prints(capsys, tmp_path, church_file):
    sent = tmp_path / "one.sent"
    sent.write_text("forall x. ~In(x,x)\n")
    assert cli.main(["translate", "--formula", str(sent), "--translation", "bullet",
                     "--src", church_file]) == 0
    assert "line-1:" in capsys.readouterr().out


def test_eval_parse_error(tmp_path, church_file):
    sent = tmp_path / "bad.sent"
    sent.write_text("forall x In(x\n")
    assert cli.main(["eval", "--formula", str(sent), "--src", church_file]) == 65


def test_export_dot_deterministic(capsys, tmp_path, church_file):
    d1, d2 = tmp_path / "a.dot", tmp_path / "b.dot"
    assert cli.main(["export", "--in", church_file, "--dot", str(d1)]) == 0
    assert cli.main(["export", "--in", church_file, "--dot", str(d2)]) == 0
    assert d1.read_bytes() == d2.read_bytes()
    text = d1.read_text()
    assert "digraph" in text and '[label="w0"]' in text


def test_export_dot_pure_is_layered(tmp_path, capsys):
    path = tmp_path / "pure3.json"
    assert cli.main(["build", "--spec", "pure", "--depth", "3",
                     "--out", str(path)]) == 0
    dot = tmp_path / "p.dot"
    assert cli.main(["export", "--in", str(path), "--dot", str(dot)]) == 0
    text = dot.read_text()
    assert text.count("shape=box") == 4
    assert "->" in text
