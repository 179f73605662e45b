import io
import json

import numpy as np
import pytest

from schutzkit.cli import CommandConfig, main, parse_images, parse_language, run_command
from schutzkit.core import InputError, OutputSemiring
from schutzkit.corpus import CORPUS, document_text, load
from schutzkit.documents import from_document, parse_monoid_spec, serialize_monoid, to_document
from schutzkit.dmonoid import validate_dmonoid

Z2 = {"variety": "set", "elements": ["1", "g"], "unit": "1", "mult": [["1", "g"], ["g", "1"]]}


class TestDocuments:
    def test_parse_z2(self):
        m = from_document(Z2)
        assert m.size == 2 and m.name(m.mul(1, 1)) == "1"

    @pytest.mark.parametrize("name", CORPUS)
    def test_roundtrip(self, name):
        m = load(name)
        again = parse_monoid_spec(serialize_monoid(m))
        assert again.names == m.names
        assert np.array_equal(again.table, m.table)
        assert again.unit == m.unit
        assert to_document(again) == to_document(m)

    @pytest.mark.parametrize("name", CORPUS)
    def test_bundled_text_matches_serializer(self, name):
        assert json.loads(document_text(name)) == to_document(load(name))

    def test_syntax_error_location(self):
        with pytest.raises(InputError, match="line 2, column"):
            parse_monoid_spec('{"variety": "set",\n  "elements" ["1"]}')

    def test_unknown_unit(self):
        with pytest.raises(InputError, match="unknown unit element"):
            from_document({**Z2, "unit": "x"})

    def test_missing_and_extra_keys(self):
        with pytest.raises(InputError, match="missing keys: mult"):
            from_document({k: v for k, v in Z2.items() if k != "mult"})
        with pytest.raises(InputError, match="unexpected keys: join"):
            from_document({**Z2, "join": []})

    def test_unknown_variety(self):
        with pytest.raises(InputError, match="unknown variety"):
            from_document({**Z2, "variety": "ring"})

    def test_non_prime_modulus(self):
        doc = to_document(load("gf2"))
        with pytest.raises(InputError, match="modulus must be prime"):
            from_document({**doc, "field_modulus": 4})

    def test_invalid_monoid(self):
        doc = {**Z2, "mult": [["g", "1"], ["1", "g"]]}
        with pytest.raises(InputError, match="invalid monoid"):
            from_document(doc)
        assert validate_dmonoid(from_document(doc, validate=False)) != []

    def test_bad_table_shape(self):
        with pytest.raises(InputError, match="2x2"):
            from_document({**Z2, "mult": [["1", "g"]]})

    def test_unknown_table_element(self):
        with pytest.raises(InputError, match="unknown element"):
            from_document({**Z2, "mult": [["1", "g"], ["g", "h"]]})


class TestParsers:
    def test_images(self):
        f = parse_images("a=g, b=1", ("a", "b"), load("z2"))
        assert f.images == (1, 0)

    @pytest.mark.parametrize("text", ["a=g", "a=g,b=1,c=1", "a=g,b=x", "a:g,b=1"])
    def test_bad_images(self, text):
        with pytest.raises(InputError):
            parse_images(text, ("a", "b"), load("z2"))

    def test_languages(self):
        s = OutputSemiring()
        assert parse_language("words:ε|ab", "ab", 2, s).support() == ["", "ab"]
        assert parse_language("contains:ab", "ab", 3, s).support() == ["ab", "aab", "aba", "abb", "bab"]
        assert parse_language("length-mod:2:1", "ab", 1, s).support() == ["a", "b"]
        assert parse_language("count:a", "ab", 2, OutputSemiring(3))("aa") == 2

    def test_unknown_language(self):
        with pytest.raises(InputError):
            parse_language("regex:a*", "ab", 2, OutputSemiring())


def cli_json(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out else None), out.err


class TestCli:
    def test_validate(self, capsys):
        code, doc, _ = cli_json(capsys, "validate", "--left", "z2")
        assert code == 0 and doc["verdict"] == "pass"

    def test_validate_invalid_file(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({**Z2, "mult": [["g", "1"], ["1", "g"]]}))
        code, _, err = cli_json(capsys, "validate", "--left", str(p))
        assert code == 2 and "invalid monoid" in err

    def test_schutzenberger_z2(self, capsys):
        code, doc, _ = cli_json(capsys, "schutzenberger", "--left", "z2", "--right", "z2")
        assert code == 0 and doc["size"] == 64 and doc["star_size"] == 4 and doc["middle_size"] == 16

    def test_export_roundtrip(self, tmp_path, capsys):
        p = tmp_path / "zz.json"
        code, _, _ = cli_json(capsys, "schutzenberger", "--left", "z2", "--right", "z2", "--export", str(p))
        assert code == 0
        m = parse_monoid_spec(p.read_text())
        assert m.size == 64 and validate_dmonoid(m) == []

    def test_star_mismatch(self, capsys):
        code, _, err = cli_json(capsys, "star", "--left", "z2", "--right", "chain2")
        assert code == 2 and "variety mismatch" in err

    def test_star_bool(self, capsys):
        code, doc, _ = cli_json(capsys, "star", "--left", "bool", "--right", "bool")
        assert code == 0 and doc["size"] == 2

    def test_size_guard(self, tmp_path, capsys):
        n = 70
        doc = {"variety": "set", "elements": [str(i) for i in range(n)], "unit": "0",
               "mult": [[str(j) for j in range(n)] for _ in range(n)]}
        doc["mult"] = [[str(j) if i == 0 else str(i) for j in range(n)] for i in range(n)]
        p = tmp_path / "big.json"
        p.write_text(json.dumps(doc))
        code = main(["star", "--left", str(p), "--right", str(p)])
        assert code == 3

    def test_recognize(self, capsys):
        code, doc, _ = cli_json(capsys, "recognize", "--left", "z2", "--images", "a=g,b=1",
                                "--language", "length-mod:1:0")
        assert code == 0
        code, doc, _ = cli_json(capsys, "recognize", "--left", "z2", "--images", "a=g,b=1",
                                "--language", "contains:a")
        assert code == 1 and doc["verdict"] == "fail"

    def test_marked_product(self, capsys):
        code, doc, _ = cli_json(capsys, "marked-product", "--language", "words:ε|b", "--language", "words:b",
                                "--mark", "a", "--max-len", "4")
        assert code == 0 and sorted(doc["values"]) == ["ab", "bab"]

    def test_marked_product_bad_modulus(self, capsys):
        code, _, err = cli_json(capsys, "marked-product", "--language", "all", "--language", "all",
                                "--mark", "a", "--modulus", "4")
        assert code == 2 and "prime" in err

    @pytest.mark.parametrize("theorem", ["schurec", "reutenauer", "decompose", "closure"])
    def test_verify_passes(self, capsys, theorem):
        code, doc, _ = cli_json(capsys, "verify", theorem, "--left", "z2", "--right", "b2",
                                "--images", "a=g,b=1;a=0,b=1", "--max-len", "5")
        assert code == 0, doc
        assert doc["verdict"] == "pass"

    def test_verify_universal_one_letter(self, capsys):
        code, doc, _ = cli_json(capsys, "verify", "universal", "--left", "z2", "--right", "b2",
                                "--alphabet", "a", "--images", "a=g;a=0", "--max-len", "6")
        assert code == 0 and doc["reports"][0]["witness"]["h"]

    def test_verify_universal_two_letters_needs_more_than_f(self, capsys):
        code, doc, _ = cli_json(capsys, "verify", "universal", "--left", "z2", "--right", "b2",
                                "--images", "a=g,b=1;a=0,b=1", "--max-len", "5")
        assert code == 2 and doc["reports"][0]["counterexample"].startswith("K")

    def test_verify_universal_trivial(self, capsys):
        code, doc, _ = cli_json(capsys, "verify", "universal", "--left", "z2", "--right", "z2",
                                "--via", "trivial", "--max-len", "4")
        assert code == 2 and doc["verdict"] == "precondition-violated"

    def test_verify_needs_theorem(self, capsys):
        assert main(["verify", "--left", "z2", "--right", "z2"]) == 2

    def test_json_is_deterministic(self, capsys):
        argv = ["verify", "closure", "--left", "z2", "--right", "z2", "--max-len", "4"]
        main(argv)
        first = capsys.readouterr().out
        main(argv)
        assert capsys.readouterr().out == first
        assert "timing" not in first

    def test_timing_flag(self, capsys):
        _, doc, _ = cli_json(capsys, "verify", "reutenauer", "--left", "z2", "--right", "z2", "--timing")
        assert "timing" in doc["reports"][0]

    def test_table_format(self):
        buf = io.StringIO()
        code = run_command(CommandConfig("verify", theorem="reutenauer", left="z2", right="z2", max_len=4,
                                         format="table"), buf)
        assert code == 0 and "1/1 passed" in buf.getvalue()

    def test_bad_max_len(self):
        with pytest.raises(InputError):
            CommandConfig("validate", max_len=0)

    def test_missing_monoid(self, capsys):
        code, _, err = cli_json(capsys, "validate", "--left", "nonexistent")
        assert code == 2 and "no such document" in err
