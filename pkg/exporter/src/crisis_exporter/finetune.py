"""Finetuning on the 9-label crisis classification task."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass

import numpy as np
import torch
from torch.utils.data import DataLoader, Dataset

from crisis_exporter.data import LABELS, LabeledTweet
from crisis_exporter.encoder import TweetClassifier, load_encoder, save_checkpoint
from crisis_exporter.split import stratified_split


@dataclass(frozen=True)
class FinetuneConfig:
    base_model_id: str = "bert-base-uncased"
    split_fraction: float = 0.8
    batch_size: int = 4
    epochs: int = 1
    learning_rate: float = 5e-5
    weight_decay: float = 0.01
    dropout: float = 0.1
    max_length: int = 64
    seed: int = 0


class _TweetDataset(Dataset):
    def __init__(self, rows: list[LabeledTweet]):
        self.rows = rows

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, idx):
        row = self.rows[idx]
        return row.text, row.label - 1  # labels 1..9 -> class indices 0..8


def _collate(tokenizer, max_length):
    def collate(batch):
        texts = [t for t, _ in batch]
        labels = torch.tensor([lab for _, lab in batch], dtype=torch.long)
        enc = tokenizer(
            texts,
            padding=True,
            truncation=True,
            max_length=max_length,
            return_tensors="pt",
        )
        return enc["input_ids"], enc["attention_mask"], labels

    return collate


def finetune(rows: list[LabeledTweet], cfg: FinetuneConfig, out_dir: str) -> dict:
    """Train the classifier and persist checkpoint + metrics.

    Returns the metrics dict (with ``validation_accuracy``).
    """
    torch.manual_seed(cfg.seed)
    np.random.seed(cfg.seed)
    train_rows, val_rows = stratified_split(rows, cfg.split_fraction, cfg.seed)
    tokenizer, encoder = load_encoder(cfg.base_model_id, seed=cfg.seed)
    model = TweetClassifier(encoder, n_labels=len(LABELS), dropout=cfg.dropout)
    optimizer = torch.optim.AdamW(
        model.parameters(), lr=cfg.learning_rate, weight_decay=cfg.weight_decay
    )
    loss_fn = torch.nn.CrossEntropyLoss()
    collate = _collate(tokenizer, cfg.max_length)
    loader = DataLoader(
        _TweetDataset(train_rows),
        batch_size=cfg.batch_size,
        shuffle=True,
        generator=torch.Generator().manual_seed(cfg.seed),
        collate_fn=collate,
    )

    model.train()
    for _ in range(cfg.epochs):
        for input_ids, attention_mask, labels in loader:
            optimizer.zero_grad()
            logits = model(input_ids, attention_mask)
            loss = loss_fn(logits, labels)
            loss.backward()
            optimizer.step()

    model.eval()
    correct = 0
    val_loader = DataLoader(
        _TweetDataset(val_rows), batch_size=max(cfg.batch_size, 16),
        shuffle=False, collate_fn=collate,
    )
    with torch.no_grad():
        for input_ids, attention_mask, labels in val_loader:
            pred = model(input_ids, attention_mask).argmax(dim=1)
            correct += int((pred == labels).sum())
    accuracy = correct / len(val_rows) if val_rows else float("nan")

    metrics = {
        "validation_accuracy": accuracy,
        "n_train": len(train_rows),
        "n_val": len(val_rows),
        "config": asdict(cfg),
    }
    save_checkpoint(out_dir, tokenizer, encoder, model.head.state_dict(), metrics)
    with open(os.path.join(out_dir, "metrics.json"), "w", encoding="utf-8") as fh:
        json.dump(metrics, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return metrics
