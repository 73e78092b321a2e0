import io
import json
from pathlib import Path

import pytest

from annopipe.bio import serialize_bio
from annopipe.cli import main
from annopipe.conllu import read_conllu_file, serialize_corpus, write_conllu_file
from annopipe.toycorpus import toy_ner_sentences, toy_treebank


@pytest.fixture()
def treebank_file(tmp_path):
    path = tmp_path / "train.conllu"
    write_conllu_file(path, toy_treebank(12, seed=21))
    return path


@pytest.fixture()
def ner_file(tmp_path):
    path = tmp_path / "train.bio"
    path.write_text(serialize_bio(toy_ner_sentences(10, seed=3)), encoding="utf-8")
    return path


def fast_config(tmp_path, **kwargs):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(kwargs))
    return str(path)


class TestTrainSubcommand:
    def test_tokenize_with_explicit_dev(self, tmp_path, treebank_file, capsys):
        dev = tmp_path / "dev.conllu"
        write_conllu_file(dev, toy_treebank(4, seed=22))
        out = tmp_path / "out.conllu"
        code = main([
            "train", "tokenize",
            "--train_file", str(treebank_file),
            "--eval_file", str(dev),
            "--gold_file", str(dev),
            "--output_file", str(out),
            "--config", fast_config(tmp_path, epochs=25, hidden=16, char_dim=10,
                                    dropout=0.0, seed=7),
            "--quiet",
        ])
        assert code == 0
        assert "Tokens" in capsys.readouterr().out
        assert read_conllu_file(out)  # predictions parse back

    def test_dev_split_when_no_eval_file(self, tmp_path, treebank_file, capsys):
        code = main([
            "train", "pos",
            "--train_file", str(treebank_file),
            "--config", fast_config(tmp_path, epochs=2, dropout=0.0),
        ])
        captured = capsys.readouterr()
        assert code == 0
        assert "held out" in captured.err
        assert "UPOS" in captured.out

    def test_save_model_loadable(self, tmp_path, treebank_file):
        model_path = tmp_path / "pos.apm"
        main([
            "train", "pos",
            "--train_file", str(treebank_file),
            "--save_model", str(model_path),
            "--config", fast_config(tmp_path, epochs=1, dropout=0.0),
            "--quiet",
        ])
        from annopipe.tagger import TaggerModel
        assert TaggerModel.load(model_path).upos_vocab.symbols

    def test_depparse_output_valid(self, tmp_path, treebank_file, capsys):
        out = tmp_path / "parsed.conllu"
        code = main([
            "train", "depparse",
            "--train_file", str(treebank_file),
            "--output_file", str(out),
            "--config", fast_config(tmp_path, epochs=3, dropout=0.0),
            "--quiet",
        ])
        assert code == 0
        docs = read_conllu_file(out)
        for doc in docs:
            for sentence in doc.sentences:
                roots = [w for w in sentence.words if w.head == 0]
                assert len(roots) == 1

    def test_ner_prints_micro_f1(self, tmp_path, ner_file, capsys):
        code = main([
            "train", "ner",
            "--train_file", str(ner_file),
            "--config", fast_config(tmp_path, epochs=3, dropout=0.0),
            "--quiet",
        ])
        assert code == 0
        assert "entity micro-F1" in capsys.readouterr().out

    def test_charlm_prints_perplexity(self, tmp_path, capsys):
        corpus = tmp_path / "raw.txt"
        corpus.write_text("le chat mange la pomme . " * 20)
        code = main([
            "train", "charlm",
            "--train_file", str(corpus),
            "--direction", "backward",
            "--save_model", str(tmp_path / "bwd.apm"),
            "--config", fast_config(tmp_path, epochs=2),
            "--quiet",
        ])
        assert code == 0
        assert "perplexity" in capsys.readouterr().out
        from annopipe.charlm import CharLM
        assert CharLM.load(tmp_path / "bwd.apm").direction == "backward"

    def test_mwt_and_lemma_train(self, tmp_path, treebank_file, capsys):
        for processor in ("mwt", "lemma"):
            code = main([
                "train", processor,
                "--train_file", str(treebank_file),
                "--config", fast_config(tmp_path, epochs=1),
                "--quiet",
            ])
            assert code == 0


class TestEvaluateSubcommand:
    def test_system_equals_gold_scores_100(self, tmp_path, treebank_file, capsys):
        code = main(["evaluate", "--system", str(treebank_file),
                     "--gold", str(treebank_file)])
        assert code == 0
        out = capsys.readouterr().out
        assert "Tokens" in out and "100.00" in out

    def test_json_format(self, tmp_path, treebank_file, capsys):
        main(["evaluate", "--system", str(treebank_file),
              "--gold", str(treebank_file), "--format", "json"])
        data = json.loads(capsys.readouterr().out)
        assert data["LAS"]["f1"] == 100.0

    def test_ner_mode(self, tmp_path, ner_file, capsys):
        code = main(["evaluate", "--ner", "--system", str(ner_file),
                     "--gold", str(ner_file)])
        assert code == 0
        assert "100.00" in capsys.readouterr().out


class TestModelsSubcommand:
    def test_pack_fetch_list_verify(self, tmp_path, toy_models, capsys):
        registry = tmp_path / "registry"
        archive = tmp_path / "fx.tgz"
        model_args = []
        for processor, path in toy_models.model_files.items():
            model_args += ["--model", f"{processor}={path}"]
        assert main(["models", "pack", "--lang", "fx", "--out", str(archive),
                     *model_args]) == 0
        assert main(["models", "fetch", "--lang", "fx", "--source", str(archive),
                     "--registry", str(registry)]) == 0
        assert main(["models", "list", "--registry", str(registry)]) == 0
        out = capsys.readouterr().out
        assert "fx:" in out and "tokenize" in out
        assert main(["models", "verify", "--lang", "fx",
                     "--registry", str(registry)]) == 0

    def test_fetch_error_exit_code(self, tmp_path, capsys):
        code = main(["models", "fetch", "--lang", "xx",
                     "--source", str(tmp_path / "none.tgz"),
                     "--registry", str(tmp_path / "reg")])
        assert code == 1
        assert "error" in capsys.readouterr().err


class TestAnnotateSubcommand:
    def test_stdin_to_conllu(self, toy_models, capsys, monkeypatch):
        monkeypatch.setattr("sys.stdin", io.StringIO("le chat mange la pomme ."))
        code = main(["annotate", "--lang", "fx",
                     "--registry", str(toy_models.registry_root)])
        assert code == 0
        out = capsys.readouterr().out
        assert "# text = le chat mange la pomme ." in out
        assert "\tNOUN\t" in out

    def test_file_to_json(self, tmp_path, toy_models, capsys):
        source = tmp_path / "input.txt"
        source.write_text("Marie visite Paris .", encoding="utf-8")
        code = main(["annotate", "--lang", "fx", "--input", str(source),
                     "--output", "json", "--processors", "tokenize,ner",
                     "--registry", str(toy_models.registry_root)])
        assert code == 0
        data = json.loads(capsys.readouterr().out)
        assert data["schema_version"] == 1
        kinds = {e["type"] for s in data["sentences"] for e in s["entities"]}
        assert kinds == {"PER", "LOC"}

    def test_bad_processors_exit_code(self, toy_models, capsys, monkeypatch):
        monkeypatch.setattr("sys.stdin", io.StringIO("x"))
        code = main(["annotate", "--lang", "fx", "--processors", "depparse",
                     "--registry", str(toy_models.registry_root)])
        assert code == 1
        assert "requires" in capsys.readouterr().err
