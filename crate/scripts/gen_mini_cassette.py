#!/usr/bin/env python3
"""Regenerates the replay cassette and relevance judgments of the MINI dataset.

PubMed is simulated over a small synthetic collection: every topic owns 200
PMIDs, each query atom matches a deterministic pseudo-random subset of them,
OR takes the union within a clause and AND intersects clauses. MeSH atoms are
biased towards the relevant documents so that attaching good headings raises
recall, as it does on the real collection.

Usage: gen_mini_cassette.py [QUERIES_TSV ...]
esearch answers are written for every `topic<TAB>query` line of
data/mini/cassette_queries.tsv and of any extra `.queries.tsv` files given.
"""
import hashlib
import json
import os
import re
import sys

MINI = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "data", "mini")
ESEARCH = "https://eutils.ncbi.nlm.nih.gov/entrez/eutils/esearch.fcgi"
TOPICS = ["MINI-01", "MINI-02", "MINI-03"]
DATES = {"MINI-01": ("2000/01/01", "2017/12/31"), "MINI-02": ("1990/01/01", "2016/06/30")}
UNIVERSE = 200
MESH_TAGS = {"mesh", "mesh terms", "mh"}

ATM = {
    "TB": '"tuberculosis"[MeSH Terms] OR "tuberculosis"[All Fields] OR "tb"[All Fields]',
    "tuberculosis": '"tuberculosis"[MeSH Terms] OR "tuberculosis"[All Fields]',
    "XDR-TB": '"extensively drug-resistant tuberculosis"[MeSH Terms] OR "xdr-tb"[All Fields]',
    "child": '"child"[MeSH Terms] OR "child"[All Fields]',
    "children": '"child"[MeSH Terms] OR "child"[All Fields] OR "children"[All Fields]',
    "diabetes": '"diabetes mellitus"[MeSH Terms] OR ("diabetes"[All Fields] AND "mellitus"[All Fields]) OR "diabetes"[All Fields]',
    "type 2 diabetes": '"diabetes mellitus, type 2"[MeSH Terms] OR "type 2 diabetes"[All Fields]',
    "insulin": '"insulin"[MeSH Terms] OR "insulin"[All Fields] OR "insulin s"[All Fields]',
    "hypertension": '"hypertension"[MeSH Terms] OR "hypertension"[All Fields]',
    "blood pressure": '"blood pressure"[MeSH Terms] OR ("blood"[All Fields] AND "pressure"[All Fields]) OR "blood pressure"[All Fields]',
    "antihypertensive": '"antihypertensive agents"[MeSH Terms] OR "antihypertensive"[All Fields]',
    "hypertensive crisis": '"hypertensive crisis"[All Fields]',
}


def h(*parts):
    return int(hashlib.sha256("|".join(parts).encode()).hexdigest()[:8], 16) % 100


def pmids(topic):
    base = 30_000_000 + 1_000 * TOPICS.index(topic)
    return [str(base + i) for i in range(UNIVERSE)]


def relevant(topic, pmid):
    return h("rel", topic, pmid) < 12


def matches(topic, pmid, term, tag):
    if tag in MESH_TAGS:
        return h("mesh", term, pmid) < (70 if relevant(topic, pmid) else 12)
    return h("kw", term, pmid) < (45 if relevant(topic, pmid) else 20)


ATOM = re.compile(r'("[^"]*"|[^\s()"]+)\[([^\]]+)\]')


def clauses(query):
    """Top-level parenthesised groups, or the whole query as one clause."""
    out, depth, start = [], 0, None
    for i, c in enumerate(query):
        if c == "(":
            if depth == 0:
                start = i + 1
            depth += 1
        elif c == ")":
            depth -= 1
            if depth == 0:
                out.append(query[start:i])
    return out or [query]


def search(topic, query):
    hits = None
    for clause in clauses(query):
        atoms = [(t.strip('"').lower(), tag.lower()) for t, tag in ATOM.findall(clause)]
        union = {p for p in pmids(topic) if any(matches(topic, p, t, g) for t, g in atoms)}
        hits = union if hits is None else hits & union
    return sorted(hits or [], key=int)


def esearch_request(term, retmax, dates=None):
    query = [["db", "pubmed"], ["term", term], ["retmode", "json"],
             ["retstart", "0"], ["retmax", str(retmax)], ["tool", "meshsuggest"]]
    if dates:
        query += [["datetype", "edat"], ["mindate", dates[0]], ["maxdate", dates[1]]]
    return {"method": "GET", "url": ESEARCH, "query": query}


def envelope(**fields):
    return json.dumps({"header": {"type": "esearch", "version": "0.3"}, "esearchresult": fields})


def main():
    interactions = []
    for kw, translation in ATM.items():
        body = envelope(count="0", retmax="0", retstart="0", idlist=[],
                        translationset=[], querytranslation=translation)
        interactions.append({"request": esearch_request(kw, 0), "response": {"status": 200, "body": body}})

    seen = set()
    for path in [os.path.join(MINI, "cassette_queries.tsv")] + sys.argv[1:]:
        with open(path) as f:
            next(f)
            for line in f:
                topic, query = line.rstrip("\n").split("\t", 1)
                if (topic, query) in seen:
                    continue
                seen.add((topic, query))
                ids = search(topic, query)
                body = envelope(count=str(len(ids)), retmax=str(len(ids)), retstart="0",
                                idlist=ids, querytranslation=query)
                interactions.append({"request": esearch_request(query, 10000, DATES.get(topic)),
                                     "response": {"status": 200, "body": body}})

    with open(os.path.join(MINI, "cassette.json"), "w") as f:
        json.dump({"interactions": interactions}, f, indent=2)
        f.write("\n")

    with open(os.path.join(MINI, "qrels.txt"), "w") as f:
        for topic in TOPICS:
            for p in pmids(topic):
                f.write(f"{topic}\t0\t{p}\t{1 if relevant(topic, p) else 0}\n")


if __name__ == "__main__":
    main()
