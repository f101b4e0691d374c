import hashlib
import json

import numpy as np
import pytest

from embexport.cli import main
from embexport.encoders import EncoderError, HashEncoder, make_encoder
from embexport.export import ExportError, ExportJob, export

HEADER = "pair_id,lang,sentence_1,sentence_2,label\n"


def write_csv(path, rows):
    path.write_text(HEADER + "".join(rows), encoding="utf-8")
    return path


def read_store(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    return [json.loads(line) for line in lines]


class TestHashEncoder:
    def test_deterministic(self):
        enc = HashEncoder(16)
        a = enc.encode(["hello", "world"])
        b = enc.encode(["hello", "world"])
        assert np.array_equal(a, b)
        assert a.shape == (2, 16)

    def test_distinct_texts_differ(self):
        enc = HashEncoder(8)
        out = enc.encode(["a", "b"])
        assert not np.array_equal(out[0], out[1])

    def test_empty(self):
        assert HashEncoder(4).encode([]).shape == (0, 4)

    def test_make_encoder_parses_spec(self):
        enc = make_encoder("hash:768")
        assert isinstance(enc, HashEncoder) and enc.dim == 768

    def test_bad_spec(self):
        with pytest.raises(EncoderError):
            make_encoder("hash:banana")


class TestExport:
    def test_dedup_three_unique_sentences(self, tmp_path):
        src = write_csv(
            tmp_path / "pairs.csv",
            ["p1,esp,shared,unique one,0.5\n", "p2,esp,shared,unique two,\n"],
        )
        out = tmp_path / "store.jsonl"
        count = export(ExportJob(str(src), str(out), model_name="hash:12"))
        assert count == 3
        records = read_store(out)
        assert len(records) == 4  # meta + 3
        assert records[0] == {
            "meta": {"model": "hash:12", "pooling": "mean_last_layer", "dim": 12}
        }
        keys = {r["key"] for r in records[1:]}
        expected = {
            hashlib.sha256(t.encode()).hexdigest()
            for t in ("shared", "unique one", "unique two")
        }
        assert keys == expected
        assert all(r["dim"] == 12 and len(r["vector"]) == 12 for r in records[1:])

    def test_repeated_sentence_single_record(self, tmp_path):
        src = write_csv(
            tmp_path / "pairs.csv",
            ["p1,esp,same,same,\n"],
        )
        out = tmp_path / "store.jsonl"
        assert export(ExportJob(str(src), str(out), model_name="hash:6")) == 1

    def test_lang_is_first_occurrence(self, tmp_path):
        src = write_csv(
            tmp_path / "pairs.csv",
            ["p1,esp,shared,other a,\n", "p2,kin,shared,other b,\n"],
        )
        out = tmp_path / "store.jsonl"
        export(ExportJob(str(src), str(out), model_name="hash:4"))
        by_key = {r["key"]: r for r in read_store(out)[1:]}
        shared_key = hashlib.sha256(b"shared").hexdigest()
        assert by_key[shared_key]["lang"] == "esp"

    def test_deterministic_output(self, tmp_path):
        src = write_csv(tmp_path / "pairs.csv", ["p1,esp,alpha,beta,0.5\n"])
        out1 = tmp_path / "a.jsonl"
        out2 = tmp_path / "b.jsonl"
        export(ExportJob(str(src), str(out1), model_name="hash:8"))
        export(ExportJob(str(src), str(out2), model_name="hash:8"))
        assert out1.read_bytes() == out2.read_bytes()

    def test_malformed_csv_propagates(self, tmp_path):
        src = tmp_path / "bad.csv"
        src.write_text(HEADER + "p1,esp,only\n", encoding="utf-8")
        with pytest.raises(ExportError, match="fields"):
            export(ExportJob(str(src), str(tmp_path / "o.jsonl"), model_name="hash:4"))

    def test_missing_input(self, tmp_path):
        with pytest.raises(ExportError, match="not found"):
            export(ExportJob(str(tmp_path / "no.csv"), str(tmp_path / "o.jsonl"),
                             model_name="hash:4"))

    def test_vectors_match_encoder(self, tmp_path):
        src = write_csv(tmp_path / "pairs.csv", ["p1,esp,alpha,beta,\n"])
        out = tmp_path / "store.jsonl"
        export(ExportJob(str(src), str(out), model_name="hash:8"))
        records = {r["key"]: r["vector"] for r in read_store(out)[1:]}
        enc = HashEncoder(8)
        for text in ("alpha", "beta"):
            key = hashlib.sha256(text.encode()).hexdigest()
            assert records[key] == enc.encode([text])[0].tolist()


class TestCli:
    def test_export_command(self, tmp_path, capsys):
        src = write_csv(tmp_path / "pairs.csv", ["p1,esp,uno,dos,\n"])
        out = tmp_path / "store.jsonl"
        rc = main(["export", "--model", "hash:16", "--input", str(src),
                   "--output", str(out)])
        assert rc == 0
        assert "exported 2 unique sentences" in capsys.readouterr().out
        assert out.is_file()

    def test_export_error_json(self, tmp_path, capsys):
        rc = main(["export", "--model", "hash:16", "--input",
                   str(tmp_path / "no.csv"), "--output", str(tmp_path / "o.jsonl")])
        assert rc == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"]["type"] == "ExportError"
