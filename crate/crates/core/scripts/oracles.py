#!/usr/bin/env python3
"""Independent reference computations used to freeze expected values in the
Rust tests. Each function re-derives a value from the written rule with a
direct, unoptimized implementation.

Usage: python3 scripts/oracles.py
"""

import json
import re
from collections import Counter
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def lev(a, b):
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def token_ratio(x, y):
    return 1.0 - lev(x, y) / max(len(x), len(y))


def similarity(a, b):
    if a == b:
        return 1.0
    ta, tb = a.split(), b.split()
    ca, cb = Counter(ta), Counter(tb)
    shared = sum((ca & cb).values())
    dice = 2 * shared / (len(ta) + len(tb))
    best = [max(token_ratio(x, y) for y in tb) for x in ta]
    best += [max(token_ratio(y, x) for x in ta) for y in tb]
    pairing = sum(best) / len(best)
    return (dice + pairing) / 2


def key_terms(text, stopwords, k):
    toks = [t.lower() for t in re.findall(r"[^\W\d_]+", text)]
    toks = [t for t in toks if len(t) > 1 and t not in stopwords]
    counts = Counter(toks)
    return [t for t, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))][:k]


def citation_identity(citation, title, date):
    """Identity tuple of one corpus entry, read straight off the citation
    grammar: neutral, then bracketed reporter, then title and year."""
    words = citation.replace("(", " ").replace(")", " ").replace(",", " ").split()
    for i in range(len(words) - 2):
        y, court, n = words[i], words[i + 1], words[i + 2]
        if len(y) == 4 and y.isdigit() and n.isdigit() and court.isalnum() \
                and court[0].isalpha() and 2 <= len(court) <= 10:
            return ("neutral", court.lower(), int(y), int(n))
    m = re.search(r"\[(\d{4})\]\s*(\d+)\s+([A-Za-z. ]+?)\s*(\d+)", citation)
    if m:
        rep = "".join(c for c in m.group(3).lower() if c.isalnum())
        return ("reporter", int(m.group(1)), int(m.group(2)), rep, int(m.group(4)))
    norm = " ".join("".join(c for c in title.lower() if c.isalnum() or c.isspace()).split())
    return ("metadata", norm, date[:4])


def dedup_groups(entries):
    """O(n^2) pairwise comparison with union-find."""
    ids = [citation_identity(e["citation_string"], e["title"], e["date"]) for e in entries]
    parent = list(range(len(entries)))

    def find(i):
        while parent[i] != i:
            i = parent[i]
        return i

    for i in range(len(entries)):
        for j in range(i + 1, len(entries)):
            if ids[i] == ids[j]:
                parent[find(j)] = find(i)
    groups = {}
    for i, e in enumerate(entries):
        groups.setdefault(find(i), []).append(f"{e['provider_id']}/{e['doc_id']}")
    return sorted(sorted(g) for g in groups.values())


def main():
    print("similarity(john smith, jon smith) =", repr(similarity("john smith", "jon smith")))
    print("similarity(acme widgets, zzz qqq) =", repr(similarity("acme widgets", "zzz qqq")))
    print("similarity(jane oneil, jane o neil) =", repr(similarity("jane oneil", "jane o neil")))
    stop = {l.strip() for l in open(ROOT / "data/stopwords.txt") if l.strip() and not l.startswith("#")}
    contract = (ROOT / "fixtures/documents/lease_agreement.txt").read_text()
    print("key_terms(lease_agreement.txt, 10) =", json.dumps(key_terms(contract, stop, 10)))
    entries = [json.loads(l) for l in open(ROOT / "fixtures/corpus.jsonl") if l.strip()]
    groups = dedup_groups(entries)
    with open(ROOT / "fixtures/dedup_oracle.json", "w") as f:
        json.dump({"entries": len(entries), "unique": len(groups), "groups": groups}, f, indent=1)
        f.write("\n")
    print("dedup groups over corpus.jsonl =", len(groups))


if __name__ == "__main__":
    main()
