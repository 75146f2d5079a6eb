"""Seeded random nested-document generator for the test suites.

Builds valid documents the same way the ingestion pipeline would: sentences
arrive in order, each introducing new nodes, reusing earlier ones, sometimes
splitting an earlier atomic node open or wrapping new nodes in a composite,
including overlapping containment (one node under two parents).
"""

from __future__ import annotations

import random
from dataclasses import replace

from prosegraph.model import (
    ATOMIC,
    COMPOSITE,
    Document,
    Edge,
    Membership,
    Node,
    Sentence,
    TextSpan,
)

WORDS = [
    "amber", "basalt", "cobalt", "delta", "ember", "fjord", "garnet", "harbor",
    "indigo", "juniper", "krypton", "lagoon", "marble", "nectar", "onyx",
    "pallet", "quartz", "russet", "sable", "tundra", "umber", "velvet",
    "willow", "xenon", "yarrow", "zephyr",
]


class _Builder:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.nodes: dict[str, Node] = {}
        self.edges: list[Edge] = []
        self.edge_triples: set[tuple[str, str, str]] = set()
        self.memberships: list[Membership] = []
        self.sentences: list[Sentence] = []
        self.text = ""
        self.label_count = 0

    def fresh_label(self, words: int) -> str:
        parts = []
        for _ in range(words):
            parts.append(self.rng.choice(WORDS))
        self.label_count += 1
        return " ".join(parts) + f" {self.label_count}"

    def node_id(self, label: str) -> str:
        return "n-" + label.replace(" ", "-")

    def add_edge(self, source: str, target: str, sentence_id: str) -> None:
        if source == target:
            return
        label = self.rng.choice(["links", "feeds", "guards", "maps to", "holds"])
        if (source, target, label) in self.edge_triples:
            return
        eid = f"e{len(self.edges) + 1:04d}"
        self.edges.append(Edge(eid, source, target, label, sentence_id))
        self.edge_triples.add((source, target, label))

    def document(self, doc_id: str) -> Document:
        return Document(
            id=doc_id,
            text=self.text,
            sentences=tuple(self.sentences),
            nodes=tuple(self.nodes.values()),
            edges=tuple(self.edges),
            memberships=tuple(self.memberships),
        )


def build_document_steps(seed: int, max_nodes: int = 40,
                         max_sentences: int = 5) -> list[tuple[Document, str]]:
    """Per-sentence growing document prefixes, last one final."""
    rng = random.Random(seed)
    b = _Builder(rng)
    steps: list[tuple[Document, str]] = []
    n_sentences = rng.randint(1, max_sentences)
    doc_id = f"gen-{seed}"

    for order in range(n_sentences):
        if len(b.nodes) >= max_nodes:
            break
        sid = f"s{order}"
        pieces: list[tuple[str, str]] = []  # (node_id, label) in sentence order
        participants: list[str] = []

        # reuse earlier nodes so sentences share entities
        if b.nodes and rng.random() < 0.8:
            reusable = sorted(b.nodes)
            for nid in rng.sample(reusable, k=min(len(reusable), rng.randint(1, 2))):
                pieces.append((nid, b.nodes[nid].label))
                participants.append(nid)

        # brand-new atomic nodes
        for _ in range(rng.randint(1, 4)):
            if len(b.nodes) >= max_nodes:
                break
            words = 3 if rng.random() < 0.25 else rng.randint(1, 2)
            label = b.fresh_label(words)
            nid = b.node_id(label)
            b.nodes[nid] = Node(nid, label, ATOMIC, (), order)
            pieces.append((nid, label))
            participants.append(nid)

        # a composite born in this sentence around some of the new atomics
        new_ids = [nid for nid, _ in pieces if b.nodes[nid].first_sentence == order
                   and not b.nodes[nid].spans]
        if len(new_ids) >= 2 and rng.random() < 0.45 and len(b.nodes) < max_nodes:
            members = rng.sample(new_ids, k=rng.randint(2, min(3, len(new_ids))))
            label = " ".join(b.nodes[m].label for m in members)
            cid = b.node_id("grp " + label)
            b.nodes[cid] = Node(cid, label, COMPOSITE, (), order)
            for m in members:
                b.memberships.append(Membership(cid, m))
            # third nesting level: wrap this composite with a sibling
            others = [nid for nid in new_ids if nid not in members]
            if others and rng.random() < 0.3:
                outer_members = [cid, others[0]]
                outer_label = label + " " + b.nodes[others[0]].label
                oid = b.node_id("outer " + outer_label)
                b.nodes[oid] = Node(oid, outer_label, COMPOSITE, (), order)
                for m in outer_members:
                    b.memberships.append(Membership(oid, m))

        # build the sentence text and spans
        start = len(b.text)
        cursor = 0
        sentence_text_parts = []
        span_at: dict[str, tuple[int, int]] = {}
        for nid, label in pieces:
            if sentence_text_parts:
                cursor += 1  # joining space
            span_at[nid] = (cursor, cursor + len(label))
            sentence_text_parts.append(label)
            cursor += len(label)
        sentence_text = " ".join(sentence_text_parts) + "."
        b.text = b.text + (" " if b.text else "") + sentence_text
        s_start = len(b.text) - len(sentence_text)
        b.sentences.append(Sentence(sid, order, s_start, s_start + len(sentence_text)))

        for nid, (a, z) in span_at.items():
            node = b.nodes[nid]
            b.nodes[nid] = replace(
                node,
                spans=node.spans + (TextSpan(sid, a, z),),
                first_sentence=min(node.first_sentence, order),
            )

        # composites cover their members' text: give members spans inside the
        # composite's span and the composite keeps its own
        for m in list(b.memberships):
            parent = b.nodes.get(m.parent)
            child = b.nodes.get(m.child)
            if parent is None or child is None or not parent.spans:
                continue
            if child.spans:
                continue
            psp = parent.spans[0]
            s = next(s for s in b.sentences if s.id == psp.sentence_id)
            region = b.text[s.start + psp.start:s.start + psp.end]
            idx = region.find(child.label)
            if idx >= 0:
                b.nodes[m.child] = replace(
                    child,
                    spans=(TextSpan(psp.sentence_id, psp.start + idx,
                                    psp.start + idx + len(child.label)),),
                    first_sentence=min(child.first_sentence, s.order),
                )

        # split an earlier 3-word atomic open (sub-concept reuse)
        if order > 0 and rng.random() < 0.5:
            candidates = sorted(
                nid for nid, n in b.nodes.items()
                if n.kind == ATOMIC and n.first_sentence < order
                and len(n.label.split()) >= 3 and n.spans
            )
            if candidates:
                target = rng.choice(candidates)
                parent = b.nodes[target]
                words = parent.label.split()
                if len(b.nodes) + len(words) <= max_nodes:
                    psp = parent.spans[0]
                    b.nodes[target] = replace(parent, kind=COMPOSITE)
                    offset = 0
                    member_ids = []
                    for i, w in enumerate(words):
                        idx = parent.label.find(w, offset)
                        offset = idx + len(w)
                        mid = b.node_id(f"{w} {i} in {target[2:]}")
                        b.nodes[mid] = Node(
                            mid, w, ATOMIC,
                            (TextSpan(psp.sentence_id, psp.start + idx,
                                      psp.start + idx + len(w)),),
                            parent.first_sentence,
                        )
                        b.memberships.append(Membership(target, mid))
                        member_ids.append(mid)
                    for a, z in zip(member_ids, member_ids[1:]):
                        b.add_edge(a, z, sid)
                    participants.extend(member_ids[:1])

        # overlapping containment: an existing composite adopts an atom that
        # already lives in another composite
        contained = {m.child for m in b.memberships}
        composites = sorted(n.id for n in b.nodes.values() if n.kind == COMPOSITE)
        if composites and contained and rng.random() < 0.35:
            comp = rng.choice(composites)
            adoptable = sorted(
                c for c in contained
                if b.nodes[c].kind == ATOMIC and b.nodes[c].spans
                and (comp, c) not in {(m.parent, m.child) for m in b.memberships}
            )
            if adoptable:
                b.memberships.append(Membership(comp, rng.choice(adoptable)))

        # relations among this sentence's participants (reused nodes included,
        # which is how cross-sentence links arise in extracted documents)
        unique = sorted(set(participants))
        for _ in range(rng.randint(1, max(1, len(unique)))):
            if len(unique) >= 2:
                a, z = rng.sample(unique, k=2)
                b.add_edge(a, z, sid)

        steps.append((b.document(doc_id), sid))
    return steps


def build_document(seed: int, max_nodes: int = 40, max_sentences: int = 5) -> Document:
    return build_document_steps(seed, max_nodes, max_sentences)[-1][0]
