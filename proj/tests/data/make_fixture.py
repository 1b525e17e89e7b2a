#!/usr/bin/env python3
"""Writes the seeded 50-tree fixture corpus (normalized schema) to stdout.

Usage: make_fixture.py > fixture50.jsonl
"""
import json
import random

SEED = 20240601
rng = random.Random(SEED)

STOP = ("the a an and or but of to in on for with that this is are was be it "
        "as at by from not i you we they he she my your their our if so because "
        "would could should can will just very more most some any all").split()

TOPICS = [
    "tax income wealth policy rate government spending welfare economy market".split(),
    "school teacher student education college tuition learning exam degree class".split(),
    "gun rifle crime police safety law weapon violence owner ban".split(),
    "meat animal diet vegan farm health protein food cruelty plant".split(),
    "vote election democracy party candidate ballot turnout system citizen campaign".split(),
    "car transit city traffic bike road train commute parking urban".split(),
    "religion faith god belief church science evidence morality prayer doubt".split(),
    "privacy data internet surveillance phone company security encryption online tracking".split(),
]
FILLER = ("people think really point argument reason example evidence view often "
          "actually problem idea world society person different important question "
          "matter value change fact case history research study opinion").split()

USERS = [f"user{k:02d}" for k in range(60)]
# A handful of prolific challengers so experience tables have long histories.
USER_WEIGHTS = [12 if k < 6 else 3 if k < 20 else 1 for k in range(60)]

TRAIN_START = 1357000000 + 86400 * 40
HELDOUT_START = 1431043200 + 86400 * 3


def words(n, topic, topic_share):
    out = []
    for _ in range(n):
        r = rng.random()
        if r < topic_share:
            out.append(rng.choice(topic))
        elif r < topic_share + 0.45:
            out.append(rng.choice(STOP))
        else:
            out.append(rng.choice(FILLER))
    return out


def sentences(ws):
    out, i = [], 0
    while i < len(ws):
        k = rng.randint(6, 14)
        chunk = ws[i:i + k]
        i += k
        s = " ".join(chunk)
        s = s[0].upper() + s[1:]
        out.append(s + rng.choice([".", ".", ".", "?", "!"]))
    return out


def decorate(text, topic):
    """Adds Markdown, links, quotes and edits at random."""
    paras = []
    sents = sentences(text)
    while sents:
        k = rng.randint(1, 4)
        paras.append(" ".join(sents[:k]))
        sents = sents[k:]
    if rng.random() < 0.3:
        w = rng.choice(topic)
        paras[0] = paras[0].replace(w, f"**{w}**", 1)
    if rng.random() < 0.3:
        w = rng.choice(FILLER)
        paras[-1] = paras[-1].replace(w, f"*{w}*", 1)
    if rng.random() < 0.25:
        host = rng.choice(["http://www.example.com/page", "https://research.example.edu/paper.pdf",
                           "http://news.example.org/story"])
        paras.append(f"Source: {host}")
    if rng.random() < 0.2:
        paras.insert(0, "> " + " ".join(words(8, topic, 0.4)))
    if rng.random() < 0.2:
        paras.append("* " + " ".join(words(5, topic, 0.3)) + "\n* " + " ".join(words(5, topic, 0.3)))
    if rng.random() < 0.1:
        paras.append("1. first " + " ".join(words(4, topic, 0.3)) + "\n2. second " + " ".join(words(4, topic, 0.3)))
    if rng.random() < 0.15:
        paras.append("EDIT: " + " ".join(words(10, topic, 0.2)))
    return "\n\n".join(paras)


class Tree:
    def __init__(self, idx, created, op, topic):
        self.id = f"t{idx:03d}"
        self.created = created
        self.op = op
        self.topic = topic
        self.comments = []
        self.clock = created
        self.n = 0

    def tick(self):
        self.clock += rng.randint(60, 1800)
        return self.clock

    def add(self, author, body, parent):
        self.n += 1
        cid = f"{self.id}c{self.n:03d}"
        self.comments.append({"id": cid, "author": author, "created_utc": self.tick(),
                              "body": body, "parent_id": parent})
        return cid


def make_tree(idx, created, op):
    topic = rng.choice(TOPICS)
    t = Tree(idx, created, op, topic)
    op_words = words(rng.randint(80, 150), topic, 0.35)
    if rng.random() < 0.08:
        op_words += ["and", "i", "changed", "my", "mind", "before"]
    body = decorate(op_words, topic)
    title = "CMV: " + " ".join(words(8, topic, 0.5))
    pool = [u for u in USERS if u != op]
    weights = [USER_WEIGHTS[USERS.index(u)] for u in pool]
    n_chal = rng.randint(9, 16)
    challengers = []
    while len(challengers) < n_chal:
        u = rng.choices(pool, weights)[0]
        if u not in challengers:
            challengers.append(u)
    will_award = rng.random() < 0.45
    winners = set(rng.sample(challengers, rng.choice([1, 1, 2]))) if will_award else set()
    roots = []
    for u in challengers:
        share = 0.45 if u in winners else 0.2
        n = rng.randint(55, 170) if u in winners else rng.randint(30, 140)
        author = u if rng.random() > 0.04 else "[deleted]"
        cid = t.add(author, decorate(words(n, topic, share), topic), None)
        roots.append((u, cid))
        if rng.random() < 0.15:
            t.add(u, decorate(words(rng.randint(40, 90), topic, share), topic), None)
    for u, root in roots:
        parent = root
        depth = rng.choice([0, 0, 1, 1, 2, 3]) if u not in winners else rng.choice([1, 2, 2, 3])
        for d in range(depth):
            parent = t.add(op, " ".join(sentences(words(rng.randint(15, 40), topic, 0.3))), parent)
            if rng.random() < 0.15:
                other = rng.choice([c for c in challengers if c != u])
                t.add(other, " ".join(sentences(words(rng.randint(20, 50), topic, 0.25))), parent)
            parent = t.add(u, decorate(words(rng.randint(25, 80), topic, 0.4 if u in winners else 0.2), topic), parent)
        if u in winners:
            award = t.add(op, "∆ " + " ".join(sentences(words(rng.randint(10, 25), topic, 0.3))), parent)
            t.add("DeltaBot", f"Confirmed: 1 delta awarded to /u/{u}.", award)
        elif rng.random() < 0.1:
            t.add(rng.choice(pool), " ".join(sentences(words(20, topic, 0.2))), root)
    # A late OP comment keeps every root reply eligible as a negative.
    t.add(op, "Thanks everyone " + " ".join(sentences(words(12, topic, 0.3))), roots[0][1])
    if rng.random() < 0.1:
        # Marker directly under the original post: dangling, never an award.
        t.add(op, "∆ to everyone here", None)
    rec = {"id": t.id, "title": title, "author": op, "body": body, "created_utc": created,
           "comments": t.comments}
    return rec


def main():
    ops = [f"op{k:02d}" for k in range(30)]
    records = []
    for i in range(50):
        if i < 2:
            created = 1340000000 + i * 86400 * 20  # before the training period
        elif i < 38:
            created = TRAIN_START + (i - 2) * 86400 * 23
        else:
            created = HELDOUT_START + (i - 38) * 86400 * 9
        records.append(make_tree(i, created, ops[i % len(ops)]))
    deleted = make_tree(50, TRAIN_START + 86400 * 5, "[deleted]")
    deleted["author"] = "[deleted]"
    records.insert(17, deleted)
    for r in records:
        print(json.dumps(r, ensure_ascii=False, sort_keys=True))


if __name__ == "__main__":
    main()
