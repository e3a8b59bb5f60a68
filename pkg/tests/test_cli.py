import io

import pytest

from imred.cli import main


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def record(text):
    out = {}
    for line in text.splitlines():
        key, _, value = line.partition("\t")
        out.setdefault(key, value)
    return out


def test_translate_full_report():
    code, text = run(["translate", "p1 -> p1"])
    fields = record(text)
    assert code == 0
    assert fields["input"] == "p1 -> p1"
    assert fields["input_length"] == "5"
    assert fields["fresh_var"] == "p2"
    assert fields["base_size"] == "122"
    assert fields["stable_level"] == "6"
    assert fields["input_level"] == "0"
    assert fields["bound_ok"] == "true"
    out_text = fields["output"]
    assert "p1" in out_text and "p2" not in out_text
    assert int(fields["output_length"]) < int(fields["bound_limit"])


def test_translate_positive_stage():
    code, text = run(["translate", "--stage", "positive", "<>false"])
    fields = record(text)
    assert code == 0
    assert fields["fresh_var"] == "p1"
    assert fields["body"] == "<>p1"
    assert "guard" in fields and "positive_form" in fields
    assert "output" not in fields


def test_translate_star_stage_requires_positive():
    code, _ = run(["translate", "--stage", "star", "false"])
    assert code == 2
    code, text = run(["translate", "--stage", "star", "p1 -> p1"])
    assert code == 0
    assert "output" in record(text)


def test_translate_is_byte_deterministic():
    first = run(["translate", "<>p1 & false -> p2"])
    second = run(["translate", "<>p1 & false -> p2"])
    assert first == second


def test_translate_parse_error_exits_2():
    code, _ = run(["translate", "p1 ->"])
    assert code == 2


def test_family_subcommands():
    assert run(["family", "--ginv", "4"]) == (0, "(2,3)\n")
    assert run(["family", "--g", "2", "3"]) == (0, "4\n")
    assert run(["family", "--count", "5"]) == (0, "3969\n")
    code, text = run(["family", "A", "1", "1"])
    assert code == 0
    assert text.count("->") > 0
    code, _ = run(["family"])
    assert code == 2


def test_family_out_of_range_mentions_range():
    code, _ = run(["family", "A", "1", "9"])
    assert code == 2


def test_check_and_exit_codes(tmp_path):
    model = tmp_path / "m.model"
    model.write_text("world w\npoint w a\nval w p1 a\n", encoding="utf-8")
    code, text = run(["check", str(model), "p1 -> p1"])
    assert code == 0
    assert text == "w\ta\ttrue\n"
    code, text = run(["check", str(model), "--global", "<>p1"])
    assert (code, text) == (1, "false\n")
    code, _ = run(["check", str(model), "p1 ->"])
    assert code == 2


def test_check_rejects_invalid_model(tmp_path):
    model = tmp_path / "bad.model"
    model.write_text("world u\nworld v\nle u v\npoint u a\npoint v b\n",
                     encoding="utf-8")
    code, _ = run(["check", str(model), "p1"])
    assert code == 2


def test_refute_certificate_and_exhaustion():
    code, text = run(["refute", "<>p1 -> []p1",
                      "--max-worlds", "2", "--max-points", "2"])
    assert code == 1
    assert text.endswith("refutes w0 x0\n")
    code, text = run(["refute", "p1 -> p1",
                      "--max-worlds", "2", "--max-points", "2"])
    assert code == 0
    assert text.startswith("exhausted\t")
    assert "models_tested=" in text


def test_refute_output_is_a_parseable_certificate():
    from imred.syntax import parse_certificate, parse_formula
    from imred.semantics import eval_formula_plain

    code, text = run(["refute", "<>p1 -> []p1",
                      "--max-worlds", "2", "--max-points", "2"])
    assert code == 1
    model, w, x = parse_certificate(text)
    assert not eval_formula_plain(model, w, x, parse_formula("<>p1 -> []p1"))


def test_refute_mipc_flag():
    code, text = run(["refute", "--mipc", "<>p1 -> []p1",
                      "--max-worlds", "1", "--max-points", "2"])
    assert code == 1
    assert "kind mipc" in text


def test_audit_subsets_pass():
    code, text = run(["audit", "--spiral", "500"])
    assert code == 0
    assert "spiral\tpass" in text
    code, text = run(["audit", "--growth-cert"])
    assert code == 0
    assert "growth-cert\tpass\tk0=6" in text
    code, text = run(["audit", "--family-sizes", "--max-level", "3"])
    assert code == 0
    assert "family-sizes\tpass" in text
    code, text = run(["audit", "--sizes", "--corpus", "5",
                      "--max-length", "120", "--seed", "3"])
    assert code == 0
    assert "sizes\tpass" in text


def test_audit_is_byte_deterministic():
    argv = ["audit", "--sizes", "--corpus", "4", "--max-length", "80",
            "--seed", "11"]
    assert run(argv) == run(argv)


def test_bench_smoke():
    code, text = run(["bench", "--sizes", "60,120,240,480", "--repeats", "1",
                      "--seed", "5"])
    assert code == 0
    assert "fit\tdegree=3" in text
    assert text.startswith("seed\t5\n")
