#!/usr/bin/env python3
"""Regenerate the bundled fixtures: the climate passage with its recorded
extraction responses, and the scoring corpora used by the CLI demo.

Run from the repository root:  python3 scripts/build_fixtures.py
"""

import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from prosegraph.backends import (
    FIXTURE,
    INSTRUCTION_REFINE,
    INSTRUCTION_TOP_LEVEL,
    request_key,
)

DATA = os.path.join(os.path.dirname(__file__), "..", "src", "prosegraph", "data")

SENTENCES = [
    "Deforestation contributes to the rise of carbon dioxide in the atmosphere.",
    "Carbon dioxide traps heat and warms the planet.",
    "Agricultural practices, including livestock farming and soil degradation, "
    "also release carbon dioxide.",
    "Industrial activities burn fossil fuels and add more carbon dioxide.",
    "The rise of carbon dioxide creates an issue for the climate.",
    "Experts address the issue by promoting sustainability and implementing policies.",
]


def ents(*labels):
    return [{"key": f"e{i + 1}", "label": label} for i, label in enumerate(labels)]


def rels(*triples):
    return [{"source": s, "target": t, "label": label} for s, t, label in triples]


EXTRACTIONS = {
    SENTENCES[0]: {
        "entities": ents("Deforestation", "the rise of carbon dioxide in the atmosphere"),
        "relations": rels(("e1", "e2", "contributes to")),
    },
    SENTENCES[1]: {
        "entities": ents("Carbon dioxide", "heat", "the planet"),
        "relations": rels(("e1", "e2", "traps"), ("e1", "e3", "warms")),
    },
    SENTENCES[2]: {
        "entities": ents("Agricultural practices", "livestock farming",
                         "soil degradation", "carbon dioxide"),
        "relations": rels(("e1", "e2", "includes"), ("e1", "e3", "includes"),
                          ("e1", "e4", "release")),
    },
    SENTENCES[3]: {
        "entities": ents("Industrial activities", "fossil fuels", "carbon dioxide"),
        "relations": rels(("e1", "e2", "burn"), ("e1", "e3", "add")),
    },
    SENTENCES[4]: {
        "entities": ents("The rise of carbon dioxide", "an issue", "the climate"),
        "relations": rels(("e1", "e2", "creates"), ("e2", "e3", "for")),
    },
    SENTENCES[5]: {
        "entities": ents("Experts", "the issue", "sustainability", "policies"),
        "relations": rels(("e1", "e2", "address"), ("e1", "e3", "promoting"),
                          ("e1", "e4", "implementing")),
    },
}

REFINEMENTS = {
    "the rise of carbon dioxide in the atmosphere": {
        "entities": [{"key": "r1", "label": "rise"},
                     {"key": "r2", "label": "carbon dioxide"},
                     {"key": "r3", "label": "atmosphere"}],
        "relations": rels(("r1", "r2", "of"), ("r2", "r3", "in")),
    },
    "The rise of carbon dioxide": {
        "entities": [{"key": "r1", "label": "rise"},
                     {"key": "r2", "label": "carbon dioxide"}],
        "relations": rels(("r1", "r2", "of")),
    },
    # phrases the pipeline probes but that have no internal structure
    "Carbon dioxide": {"entities": [{"key": "r1", "label": "Carbon dioxide"}], "relations": []},
    "carbon dioxide": {"entities": [{"key": "r1", "label": "carbon dioxide"}], "relations": []},
    "rise": {"entities": [{"key": "r1", "label": "rise"}], "relations": []},
}


def build_climate():
    passage = " ".join(SENTENCES) + "\n"
    with open(os.path.join(DATA, "climate_passage.txt"), "w", encoding="utf-8") as f:
        f.write(passage)
    responses = {}
    for text, payload in EXTRACTIONS.items():
        responses[request_key(FIXTURE, text, INSTRUCTION_TOP_LEVEL)] = payload
    for label, payload in REFINEMENTS.items():
        responses[request_key(FIXTURE, label, INSTRUCTION_REFINE)] = payload
    with open(os.path.join(DATA, "climate_fixtures.json"), "w", encoding="utf-8") as f:
        json.dump(responses, f, indent=2, sort_keys=True)
        f.write("\n")


def _corpus_sentence(sid, n_gold_ents, n_correct_ents, n_extra_ents,
                     n_gold_rels, n_correct_rels, n_extra_rels):
    """One aligned (gold, predicted) sentence pair with exact counts."""
    gold_entities = [{"key": f"g{i}", "label": f"{sid} concept {i:04d}"}
                     for i in range(n_gold_ents)]
    pred_entities = [{"key": f"p{i}", "label": f"{sid} concept {i:04d}"}
                     for i in range(n_correct_ents)]
    pred_entities += [{"key": f"x{i}", "label": f"{sid} spurious {i:04d}"}
                      for i in range(n_extra_ents)]

    def chain(keys, count, tag):
        out = []
        for i in range(count):
            a = keys[i % (len(keys) - 1)]
            b = keys[(i % (len(keys) - 1)) + 1]
            out.append({"source": a, "target": b, "label": f"{tag} {i:04d}"})
        return out

    gold_keys = [e["key"] for e in gold_entities]
    correct_keys = [e["key"] for e in pred_entities[:n_correct_ents]]
    gold_relations = chain(gold_keys, n_correct_rels, f"{sid} link")
    gold_relations += chain(gold_keys, n_gold_rels - n_correct_rels, f"{sid} gold-only")
    pred_relations = chain(correct_keys, n_correct_rels, f"{sid} link")
    pred_relations += chain(correct_keys, n_extra_rels, f"{sid} bogus")
    gold = {"sentence_id": sid, "entities": gold_entities, "relations": gold_relations}
    pred = {"sentence_id": sid, "entities": pred_entities, "relations": pred_relations}
    return gold, pred


def build_scoring():
    # totals: entities 1046 gold / 1069 extracted / 995 correct,
    # relations 637 gold / 601 extracted / 534 correct
    g0, p0 = _corpus_sentence("t0", 523, 497, 37, 318, 267, 33)
    g1, p1 = _corpus_sentence("t1", 523, 498, 37, 319, 267, 34)
    with open(os.path.join(DATA, "score_gold.json"), "w", encoding="utf-8") as f:
        json.dump([g0, g1], f)
        f.write("\n")
    with open(os.path.join(DATA, "score_pred.json"), "w", encoding="utf-8") as f:
        json.dump([p0, p1], f)
        f.write("\n")


if __name__ == "__main__":
    os.makedirs(DATA, exist_ok=True)
    build_climate()
    build_scoring()
    print("fixtures written to", os.path.abspath(DATA))
