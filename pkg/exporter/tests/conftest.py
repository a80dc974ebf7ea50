"""Shared fixtures: a miniature bidirectional encoder checkpoint on disk.

No hub access exists in this environment, so the smoke corpus gets a
WordPiece tokenizer built from scratch and a small randomly initialized
BERT-architecture model, saved and re-loaded through the standard
pretrained-model machinery.  Proper nouns are deliberately left out of the
whole-word vocabulary so they split into several wordpieces and exercise
subword merging downstream.
"""

import pathlib
import string
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).parent))

SMOKE_SENTENCES = [
    "Dylan was born in Minnesota.",
    "Dylan was awarded the Nobel Prize.",
    "Marie Curie studied radium in Paris.",
    "Einstein developed the theory.",
    "The museum was founded by Anna.",
    "Tesla built a laboratory in Colorado.",
    "Ada Lovelace wrote the first program.",
    "Shakespeare lived in London.",
    "Mozart performed many operas in Vienna.",
    "Darwin traveled to the Galapagos Islands.",
    "The company was established by Henry Ford.",
    "Picasso created murals in Barcelona.",
    "Newton wrote books about gravity.",
    "The tower was built in Paris.",
    "Curie won the Nobel Prize in Stockholm.",
    "Armstrong walked on the moon.",
    "Bell created the telephone.",
    "Tolstoy lived in Russia.",
    "The university was founded in Boston.",
    "Turing studied mathematics in Cambridge.",
]

_WHOLE_WORDS = """
    was born in the a by to about on of and first many
    museum company university tower theory program laboratory telephone
    books gravity moon operas murals mathematics prize
    awarded studied developed founded built wrote lived performed traveled
    established created won walked
""".split()


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    import torch
    from tokenizers import BertWordPieceTokenizer
    from transformers import BertConfig, BertModel, PreTrainedTokenizerFast

    directory = tmp_path_factory.mktemp("tiny-model")
    specials = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    characters = list(string.ascii_lowercase + string.digits + ".,'-?!")
    vocab = list(
        dict.fromkeys(
            specials
            + sorted(set(_WHOLE_WORDS))
            + characters
            + ["##" + c for c in characters]
        )
    )
    vocab_file = directory / "vocab.txt"
    vocab_file.write_text("\n".join(vocab), encoding="utf-8")

    wordpiece = BertWordPieceTokenizer(str(vocab_file), lowercase=True)
    tokenizer_json = directory / "tokenizer.json"
    wordpiece.save(str(tokenizer_json))
    tokenizer = PreTrainedTokenizerFast(
        tokenizer_file=str(tokenizer_json),
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
    )
    tokenizer.save_pretrained(directory)

    torch.manual_seed(0)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=512,
    )
    BertModel(config).save_pretrained(directory)
    return directory


@pytest.fixture(scope="session")
def smoke_corpus(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "smoke.txt"
    path.write_text("\n".join(SMOKE_SENTENCES) + "\n", encoding="utf-8")
    return path
