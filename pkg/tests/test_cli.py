import io
import json

import pytest

from ssact.cli import EXIT_INVALID, EXIT_OK, EXIT_UNCERTIFIED, main
from ssact.instance import corpus_names, dump_instance, load_corpus, load_instance


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def test_trace_partial():
    code, text = run("trace", "partial", "--discount", "1/4")
    assert code == EXIT_OK
    assert "theta[c] = 0.5" in text
    assert "theta[sigma] = 0" in text
    assert "theta[id_v] = 1" in text
    assert "N = 2\n" in text and "Z = 2\n" in text


def test_trace_exact():
    code, text = run("trace", "partial", "--discount", "1/4", "--exact")
    assert code == EXIT_OK and "theta[c] = 1/2" in text


def test_critical():
    code, text = run("critical", "partial", "--mu", "0", "--g", "c", "--nu", "0", "--census")
    assert code == EXIT_OK
    assert text.splitlines() == ["0.25", "census = 0.25"]


def test_kms():
    code, text = run("kms", "odometer", "--discount", "1/4", "--exact", "--mu", "0", "--g", "id", "--nu", "0")
    assert code == EXIT_OK and text.strip() == "1/4"


def test_validate_dangling(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"graph": {"vertices": ["v"], "edges": [
        {"name": "e", "range": "v", "source": "x"},
        {"name": "e", "range": "v", "source": "v"},
    ]}, "generators": []}))
    code, _ = run("validate", str(bad))
    assert code == EXIT_INVALID
    err = capsys.readouterr().err
    assert "dangling endpoint" in err and "duplicate label" in err


def test_validate_corpus():
    for name in corpus_names():
        code, text = run("validate", name)
        assert code == EXIT_OK and text.rstrip().endswith("valid")


def test_subcritical_discount(capsys):
    code, _ = run("trace", "odometer", "--discount", "1/2")
    assert code == EXIT_INVALID
    assert "log rho" in capsys.readouterr().err


def test_beta_rejected_in_exact_mode():
    code, _ = run("trace", "odometer", "--beta", "2", "--exact")
    assert code == EXIT_INVALID


def test_beta_float_mode():
    code, text = run("trace", "odometer", "--beta", "2")
    assert code == EXIT_OK and "theta[a] = 0" in text


def test_nonconvergence_exit_code():
    code, _ = run("trace", "partial", "--discount", "1/4", "--max-iter", "2", "--tol", "1e-15")
    assert code == EXIT_UNCERTIFIED


def test_closure_bound_exit_code(monkeypatch):
    monkeypatch.setenv("SSACT_MAX_CLOSURE", "3")
    code, _ = run("closure", "grigorchuk")
    assert code == EXIT_UNCERTIFIED


def test_unknown_class():
    code, _ = run("critical", "partial", "--g", "nope")
    assert code == EXIT_INVALID


def test_closure_output():
    code, text = run("closure", "partial")
    lines = text.splitlines()
    assert lines[0] == "class,domain,terminus,inverse,unit"
    assert "M,c,sigma,id_v" in lines
    assert "c,0,1,1" in lines


def test_spectral_exact():
    code, text = run("spectral", "cycle2", "--exact", "--csv")
    assert code == EXIT_OK
    assert "rho = 1" in text and "m[v] = 1/2" in text
    assert text.endswith("0,1\n1,0\n")


def test_iterate_exact_csv_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    init = tmp_path / "init.json"
    init.write_text(json.dumps({"a": "1", "a^-1": "1"}))
    for path in (a, b):
        code, _ = run("iterate", "odometer", "--discount", "1/4", "--exact", "--steps", "6",
                      "--init", str(init), "--csv", str(path))
        assert code == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    rows = [r.split(",") for r in a.read_text().splitlines()[1:] if r.split(",")[1] == "a"]
    assert [r[2] for r in rows] == ["1", "1/2", "1/4", "1/8", "1/16", "1/32", "1/64"]


def test_diagnose(tmp_path):
    census = tmp_path / "census.csv"
    conv = tmp_path / "conv.csv"
    code, text = run("diagnose", "partial", "--g", "c", "--exact", "--census-csv", str(census),
                     "--convergence-csv", str(conv), "--steps", "10")
    assert code == EXIT_OK
    assert "alpha[c] = 5/8" in text and "certified = True" in text
    assert census.read_text().startswith("g,k,vertex,G,F\n")
    assert conv.read_text().startswith("step,class,delta,ratio,Z\n")


@pytest.mark.parametrize("name", corpus_names())
def test_instance_round_trip(name, tmp_path):
    inst = load_corpus(name)
    path = tmp_path / f"{name}.json"
    dump_instance(inst, path)
    again = load_instance(str(path))
    assert again.to_dict() == inst.to_dict()
    assert again.closure().keys == inst.closure().keys
