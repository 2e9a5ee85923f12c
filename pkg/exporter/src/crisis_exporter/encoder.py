"""Encoder construction and the classification head.

``base_model_id`` is either a pretrained checkpoint name/path (downloads
weights the usual way) or the sentinel ``tiny-random``: a small randomly
initialized encoder with a character-level WordPiece vocabulary, which runs
fully offline and still exercises subword averaging. Attention is forced to
the eager implementation so attention weights can be exported.
"""

from __future__ import annotations

import os
import string

import torch
from torch import nn
from transformers import AutoModel, AutoTokenizer, BertConfig, BertModel, BertTokenizer

TINY_SENTINEL = "tiny-random"
TINY_MAX_LENGTH = 64


def _tiny_vocab() -> list[str]:
    chars = list(string.ascii_lowercase) + list(string.digits)
    return (
        ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
        + chars
        + ["##" + c for c in chars]
    )


def build_tiny(seed: int = 0):
    vocab = {tok: i for i, tok in enumerate(_tiny_vocab())}
    tokenizer = BertTokenizer(vocab=vocab, do_lower_case=True)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=TINY_MAX_LENGTH,
        attn_implementation="eager",
    )
    torch.manual_seed(seed)
    return tokenizer, BertModel(config)


def load_encoder(base_model_id: str, seed: int = 0):
    if base_model_id == TINY_SENTINEL:
        return build_tiny(seed)
    tokenizer = AutoTokenizer.from_pretrained(base_model_id)
    encoder = AutoModel.from_pretrained(base_model_id, attn_implementation="eager")
    return tokenizer, encoder


class TweetClassifier(nn.Module):
    """Dropout + linear head on the classification token's last hidden state."""

    def __init__(self, encoder, n_labels: int, dropout: float = 0.1):
        super().__init__()
        self.encoder = encoder
        self.dropout = nn.Dropout(dropout)
        self.head = nn.Linear(encoder.config.hidden_size, n_labels)

    def forward(self, input_ids, attention_mask):
        out = self.encoder(input_ids=input_ids, attention_mask=attention_mask)
        cls_state = out.last_hidden_state[:, 0]
        return self.head(self.dropout(cls_state))


def save_checkpoint(directory, tokenizer, encoder, head_state, metadata: dict):
    os.makedirs(directory, exist_ok=True)
    tokenizer.save_pretrained(directory)
    encoder.config.save_pretrained(directory)
    torch.save(
        {"encoder": encoder.state_dict(), "head": head_state, "meta": metadata},
        os.path.join(directory, "weights.pt"),
    )


def load_checkpoint(directory):
    tokenizer = AutoTokenizer.from_pretrained(directory)
    config = BertConfig.from_pretrained(directory, attn_implementation="eager")
    encoder = BertModel(config)
    payload = torch.load(
        os.path.join(directory, "weights.pt"), map_location="cpu", weights_only=True
    )
    encoder.load_state_dict(payload["encoder"])
    return tokenizer, encoder, payload["meta"]
