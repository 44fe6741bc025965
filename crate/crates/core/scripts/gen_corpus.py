#!/usr/bin/env python3
"""Generate the synthetic provider corpus, its ground-truth manifest, and the
bench query set.

Every authority is created once with a unique identity (neutral citation,
reporter citation, or title+year for citation-less records). Cross-provider
duplicates are then planted by copying an authority into a second provider
with perturbed metadata. The manifest records how many distinct authorities
exist so the Rust dedup can be checked against bookkeeping that never touches
its code path.

Usage: python3 scripts/gen_corpus.py [out_dir]
"""

import json
import random
import sys
from pathlib import Path

SEED = 20240917

# (terms, class). Classes: ca_case, us_case, ca_statute.
TOPICS = [
    (["lease", "breach"], "ca_case"),
    (["negligence", "causation"], "ca_case"),
    (["wrongful", "dismissal"], "ca_case"),
    (["defamation", "malice"], "ca_case"),
    (["custody", "parenting"], "ca_case"),
    (["copyright", "infringement"], "ca_case"),
    (["trademark", "confusion"], "ca_case"),
    (["privacy", "intrusion"], "ca_case"),
    (["repudiation", "damages"], "ca_case"),
    (["estoppel", "reliance"], "ca_case"),
    (["mortgage", "foreclosure"], "ca_case"),
    (["insurance", "coverage"], "ca_case"),
    (["charter", "seizure"], "ca_case"),
    (["sentencing", "parole"], "ca_case"),
    (["securities", "fraud"], "us_case"),
    (["antitrust", "monopoly"], "us_case"),
    (["patent", "obviousness"], "us_case"),
    (["refugee", "admissibility"], "ca_statute"),
    (["tenancy", "eviction"], "ca_statute"),
    (["firearms", "licence"], "ca_statute"),
]

ENTRIES_PER_TOPIC = 25
# 14 ca_case topics x4 + 3 us_case x4 + statute topics 3,2,2 = 75
DUPS = {"ca_case": 4, "us_case": 4}
STATUTE_DUPS = [3, 2, 2]

SURNAMES = [
    "Smith", "Tremblay", "Martin", "Roy", "Wilson", "Macdonald", "Gagnon",
    "Johnson", "Taylor", "Brown", "Campbell", "Anderson", "Leblanc", "Lee",
    "Bouchard", "Gauthier", "Morin", "Lavoie", "Fortin", "Gelinas", "Ouellet",
    "Singh", "Chen", "Wong", "Patel", "Nguyen", "Kowalski", "Okafor",
    "Ferreira", "Rossi", "Novak", "Haddad", "Kaur", "Dubois", "Fraser",
]
COMPANIES = [
    "Northgate Properties", "Maple Leaf Holdings", "Laurentian Insurance",
    "Prairie Grain", "Harbourfront Developments", "Cascade Timber",
    "Bayview Capital", "Granite Mining", "Pinecrest Homes", "Ridgeway Transit",
    "Atlantic Fisheries", "Summit Software", "Keystone Logistics",
    "Riverbend Foods", "Ironwood Manufacturing", "Silverline Media",
]
CA_COURTS = [
    ("ONCA", "CA-ON", "Court of Appeal for Ontario"),
    ("ONSC", "CA-ON", "Ontario Superior Court of Justice"),
    ("BCCA", "CA-BC", "Court of Appeal for British Columbia"),
    ("BCSC", "CA-BC", "Supreme Court of British Columbia"),
    ("ABCA", "CA-AB", "Court of Appeal of Alberta"),
    ("ABQB", "CA-AB", "Court of Queen's Bench of Alberta"),
    ("QCCA", "CA-QC", "Court of Appeal of Quebec"),
    ("NSCA", "CA-NS", "Nova Scotia Court of Appeal"),
    ("FCA", "CA", "Federal Court of Appeal"),
    ("ONLTB", "CA-ON", "Landlord and Tenant Board"),
]
US_COURTS = [
    ("SCOTUS", "US", "U.S. Reports", "U.S."),
    ("CA9", "US-CA", "Ninth Circuit", "F.3d"),
    ("CA2", "US-NY", "Second Circuit", "F.3d"),
    ("SDNY", "US-NY", "S.D.N.Y.", "F. Supp. 3d"),
    ("NDCAL", "US-CA", "N.D. Cal.", "F. Supp. 3d"),
]
FILLER = (
    "court considered evidence record submissions parties argument standard "
    "review appeal trial judge finding principle analysis applied held reasons "
    "application test factors context remedy order costs matter issue"
).split()


class Gen:
    def __init__(self, seed):
        self.rng = random.Random(seed)
        self.used_neutral = set()
        self.used_reporter = set()
        self.used_meta = set()
        self.used_doc_ids = set()
        self.doc_counter = {}

    def doc_id(self, provider):
        n = self.doc_counter.get(provider, 0) + 1
        self.doc_counter[provider] = n
        prefix = {
            "lexisnexis_sim": "LN",
            "westlaw_sim": "WL",
            "canlii": "CL",
            "justice_laws": "JL",
            "scc": "SCC",
        }[provider]
        return f"{prefix}-{n:05d}"

    def date(self, lo=1985, hi=2023):
        y = self.rng.randint(lo, hi)
        m = self.rng.randint(1, 12)
        d = self.rng.randint(1, 28)
        return f"{y:04d}-{m:02d}-{d:02d}"

    def party(self):
        if self.rng.random() < 0.4:
            return self.rng.choice(COMPANIES) + " " + self.rng.choice(["Inc.", "Ltd.", "Corp."])
        return self.rng.choice(SURNAMES)

    def title(self, year):
        for _ in range(1000):
            a, b = self.party(), self.party()
            if a == b:
                continue
            t = f"{a} v. {b}"
            key = (norm_title(t), year)
            if key not in self.used_meta:
                self.used_meta.add(key)
                return t
        raise RuntimeError("title space exhausted")

    def text(self, terms, n):
        words = [self.rng.choice(FILLER) for _ in range(n)]
        # every document mentions each topic term at least once, some twice
        for t in terms:
            for _ in range(self.rng.randint(1, 3)):
                words.insert(self.rng.randrange(len(words) + 1), t)
        return " ".join(words)


def norm_title(t):
    out = []
    for ch in t.lower():
        if ch.isalnum() or ch.isspace():
            out.append(ch)
    return " ".join("".join(out).split())


def make_ca_case(g, terms):
    r = g.rng.random()
    if r < 0.2:
        # Supreme Court of Canada decision, hosted by the scc repository
        date = g.date(1980, 2023)
        year = int(date[:4])
        if year < 2000:
            while True:
                vol, page = g.rng.randint(1, 4), g.rng.randint(1, 999)
                if (year, vol, page) not in g.used_reporter:
                    g.used_reporter.add((year, vol, page))
                    break
            citation = f"[{year}] {vol} S.C.R. {page}"
        else:
            while True:
                n = g.rng.randint(1, 80)
                if ("SCC", year, n) not in g.used_neutral:
                    g.used_neutral.add(("SCC", year, n))
                    break
            citation = f"{year} SCC {n}"
        return dict(home="scc", court="SCC", jurisdiction="CA", date=date, citation=citation,
                    court_name="Supreme Court of Canada")
    court, juris, court_name = g.rng.choice(CA_COURTS)
    date = g.date(2000, 2023)
    year = int(date[:4])
    while True:
        n = g.rng.randint(1, 999)
        if (court, year, n) not in g.used_neutral:
            g.used_neutral.add((court, year, n))
            break
    home = g.rng.choices(["canlii", "lexisnexis_sim", "westlaw_sim"], [0.5, 0.3, 0.2])[0]
    return dict(home=home, court=court, jurisdiction=juris, date=date,
                citation=f"{year} {court} {n}", court_name=court_name)


def make_us_case(g, terms):
    court, juris, court_name, reporter = g.rng.choice(US_COURTS)
    date = g.date(1990, 2023)
    year = int(date[:4])
    vol, page = g.rng.randint(100, 999), g.rng.randint(1, 1500)
    citation = f"{vol} {reporter} {page} ({court_name} {year})"
    home = g.rng.choice(["lexisnexis_sim", "westlaw_sim"])
    return dict(home=home, court=court, jurisdiction=juris, date=date, citation=citation,
                court_name=court_name)


STATUTE_WORDS = ["Protection", "Administration", "Regulation", "Control", "Reform",
                 "Modernization", "Enforcement", "Standards", "Oversight", "Review"]


def make_statute(g, terms):
    date = g.date(1985, 2023)
    year = int(date[:4])
    for _ in range(1000):
        title = f"{terms[0].capitalize()} {g.rng.choice(STATUTE_WORDS)} {g.rng.choice(['Act', 'Regulations', 'Code'])}"
        key = (norm_title(title), year)
        if key not in g.used_meta:
            g.used_meta.add(key)
            break
    else:
        raise RuntimeError("statute title space exhausted")
    chapter = g.rng.randint(1, 60)
    prefix = "R.S.C." if g.rng.random() < 0.3 else "S.C."
    return dict(home="justice_laws", court="PARL", jurisdiction="CA", date=date,
                citation=f"{prefix} {year}, c. {chapter}", court_name="Parliament of Canada",
                title=title)


def dup_targets(cls, home):
    if cls == "ca_case":
        return [p for p in ["canlii", "lexisnexis_sim", "westlaw_sim"] if p != home]
    if cls == "us_case":
        return [p for p in ["lexisnexis_sim", "westlaw_sim"] if p != home]
    return ["canlii"]


def variant_title(g, title):
    choice = g.rng.randrange(3)
    if choice == 0:
        return title.upper()
    if choice == 1:
        return title.replace(" v. ", " v ").replace(".", "")
    return title.replace(",", "")


def variant_citation(g, citation, cls):
    if cls == "ca_statute":
        return citation.replace(".", "")
    if cls == "us_case":
        return citation.replace(".", "")
    choice = g.rng.randrange(3)
    if choice == 0:
        return citation + " (CanLII)"
    if choice == 1:
        return citation.replace(".", "")  # S.C.R. -> SCR; neutral unchanged
    return citation.lower() if not citation.startswith("[") else citation.replace("S.C.R.", "SCR")


def main(out_dir):
    out = Path(out_dir)
    g = Gen(SEED)
    entries = []
    unique = 0
    planted = 0
    statute_idx = 0
    per_topic = []
    for terms, cls in TOPICS:
        if cls == "ca_statute":
            ndup = STATUTE_DUPS[statute_idx]
            statute_idx += 1
        else:
            ndup = DUPS[cls]
        nuniq = ENTRIES_PER_TOPIC - ndup
        authorities = []
        for _ in range(nuniq):
            if cls == "ca_case":
                a = make_ca_case(g, terms)
            elif cls == "us_case":
                a = make_us_case(g, terms)
            else:
                a = make_statute(g, terms)
            if "title" not in a:
                a["title"] = g.title(int(a["date"][:4]))
            a["headnote"] = g.text(terms, g.rng.randint(12, 20))
            a["body"] = g.text(terms, g.rng.randint(40, 80))
            a["providers"] = {a["home"]}
            authorities.append(a)
        unique += nuniq
        # plant duplicates on distinct authorities first, then allow a second copy
        eligible = [a for a in authorities
                    if any(p not in a["providers"] for p in dup_targets(cls, a["home"]))]
        g.rng.shuffle(eligible)
        dups = []
        i = 0
        while len(dups) < ndup:
            a = eligible[i % len(eligible)]
            i += 1
            options = [p for p in dup_targets(cls, a["home"]) if p not in a["providers"]]
            if not options:
                continue
            target = g.rng.choice(options)
            a["providers"].add(target)
            d = dict(a)
            d["home"] = target
            d["title"] = variant_title(g, a["title"]) if cls != "ca_statute" else a["title"].upper()
            d["citation"] = variant_citation(g, a["citation"], cls)
            d["headnote"] = " ".join(a["headnote"].split()[: g.rng.randint(8, 12)])
            dups.append(d)
        planted += len(dups)
        per_topic.append({"terms": terms, "class": cls, "unique": nuniq, "duplicates": len(dups)})
        for a in authorities + dups:
            provider = a["home"]
            doc_id = g.doc_id(provider)
            entries.append({
                "provider_id": provider,
                "doc_id": doc_id,
                "title": a["title"],
                "citation_string": a["citation"],
                "neutral_citation": a["citation"] if " SCC " in a["citation"] or a["citation"].split(" ")[1:2] == [a["court"]] else None,
                "court": a["court"],
                "jurisdiction": a["jurisdiction"],
                "date": a["date"],
                "headnote": a["headnote"],
                "body": a["body"],
                "url": f"https://{provider.replace('_', '-')}.example/{doc_id}",
            })
    entries.sort(key=lambda e: (e["provider_id"], e["doc_id"]))
    with open(out / "corpus.jsonl", "w") as f:
        for e in entries:
            if e["neutral_citation"] is None:
                del e["neutral_citation"]
            f.write(json.dumps(e, sort_keys=False) + "\n")
    counts = {}
    for e in entries:
        counts[e["provider_id"]] = counts.get(e["provider_id"], 0) + 1
    manifest = {
        "seed": SEED,
        "entries": len(entries),
        "unique_authorities": unique,
        "planted_duplicates": planted,
        "planted_rate": planted / len(entries),
        "per_provider": dict(sorted(counts.items())),
        "topics": per_topic,
    }
    with open(out / "corpus_manifest.json", "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    with open(out / "bench_queries.jsonl", "w") as f:
        for terms, cls in TOPICS:
            category = "statute" if cls == "ca_statute" else "case_law"
            juris = "US" if cls == "us_case" else "CA"
            f.write(json.dumps({"terms": terms, "jurisdiction": juris, "issue_category": category}) + "\n")
    print(json.dumps({k: manifest[k] for k in ("entries", "unique_authorities", "planted_duplicates", "per_provider")}))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else str(Path(__file__).resolve().parent.parent / "fixtures"))
