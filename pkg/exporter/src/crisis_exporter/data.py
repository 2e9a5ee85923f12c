"""CrisisNLP-style labeled tweet CSVs.

The published layout has one CSV per crisis dataset with a tweet id, the
tweet text and a label id 1..9. Column names vary slightly between dumps,
so the loader takes a column mapping (defaults match the published files).
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

LABELS = {
    1: "injured_or_dead_people",
    2: "missing_trapped_or_found_people",
    3: "displaced_people_and_evacuations",
    4: "infrastructure_and_utilities_damage",
    5: "donation_needs_or_offers_or_volunteering_services",
    6: "caution_and_advice",
    7: "sympathy_and_emotional_support",
    8: "other_useful_information",
    9: "not_related_or_irrelevant",
}


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledTweet:
    tweet_id: str
    text: str
    label: int
    dataset: str


def load_crisisnlp(
    paths,
    id_col: str = "tweet_id",
    text_col: str = "tweet_text",
    label_col: str = "label",
) -> list[LabeledTweet]:
    """Load one or more dataset CSVs; the dataset name is the file stem."""
    rows: list[LabeledTweet] = []
    for path in paths:
        dataset = os.path.splitext(os.path.basename(path))[0]
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            fields = set(reader.fieldnames or [])
            if not {id_col, text_col, label_col} <= fields:
                raise DataError(
                    f"{path}: expected columns {id_col},{text_col},{label_col}, "
                    f"found {sorted(fields)}"
                )
            for line_no, rec in enumerate(reader, start=2):
                raw_label = (rec.get(label_col) or "").strip()
                try:
                    label = int(raw_label)
                except ValueError:
                    raise DataError(
                        f"{path}: line {line_no}: non-integer label {raw_label!r}"
                    ) from None
                if label not in LABELS:
                    raise DataError(
                        f"{path}: line {line_no}: label {label} outside 1..9"
                    )
                rows.append(
                    LabeledTweet(
                        tweet_id=str(rec[id_col]),
                        text=str(rec[text_col]),
                        label=label,
                        dataset=dataset,
                    )
                )
    if not rows:
        raise DataError("no labeled tweets loaded")
    return rows
