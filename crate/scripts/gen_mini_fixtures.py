#!/usr/bin/env python3
"""Regenerates the vector fixtures of the bundled MINI dataset.

Vectors are built from a handful of planted concept directions plus small
seeded noise and written with four decimals, so the text files are stable.
"""
import os
import random

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "data", "mini")
rng = random.Random(20221017)

# Concept axes of the 8-dimensional dense space.
AXES = ["tb", "age", "diabetes", "drug", "pressure", "anatomy", "resistance", "trial"]


def dense(weights, noise=0.05):
    v = [weights.get(a, 0.0) + rng.uniform(-noise, noise) for a in AXES]
    norm = sum(x * x for x in v) ** 0.5
    return [round(x / norm, 4) for x in v]


MESH = {
    "D014376": {"tb": 1.0},
    "D018088": {"tb": 0.8, "resistance": 0.6},
    "D055985": {"tb": 0.7, "resistance": 0.9},
    "D014397": {"tb": 0.9, "anatomy": 0.4},
    "D000995": {"tb": 0.6, "drug": 0.8},
    "D002648": {"age": 1.0},
    "D000293": {"age": 0.9, "trial": 0.2},
    "D007223": {"age": 0.9, "anatomy": 0.2},
    "D003920": {"diabetes": 1.0},
    "D003924": {"diabetes": 0.9, "age": 0.2},
    "D007328": {"diabetes": 0.5, "drug": 0.8},
    "D007004": {"diabetes": 0.6, "drug": 0.6, "pressure": 0.1},
    "D006973": {"pressure": 1.0},
    "D001794": {"pressure": 0.8, "anatomy": 0.3},
    "D000959": {"pressure": 0.7, "drug": 0.7},
    "D001829": {"anatomy": 1.0},
    "D006257": {"anatomy": 0.9, "age": 0.1},
    "D005123": {"anatomy": 0.8, "trial": 0.3},
    "D005145": {"anatomy": 0.85, "trial": 0.2},
    "D016032": {"trial": 1.0},
}

KEYWORDS = {
    "TB": {"tb": 0.95, "resistance": 0.2},
    "tuberculosis": {"tb": 1.0, "anatomy": 0.1},
    "XDR-TB": {"tb": 0.7, "resistance": 0.95},
    "child": {"age": 1.0},
    "children": {"age": 0.95, "trial": 0.1},
    "diabetes": {"diabetes": 1.0, "age": 0.05},
    "type 2 diabetes": {"diabetes": 0.9, "age": 0.25},
    "insulin": {"diabetes": 0.45, "drug": 0.85},
    "hypertension": {"pressure": 1.0},
    "blood pressure": {"pressure": 0.75, "anatomy": 0.4},
    "antihypertensive": {"pressure": 0.65, "drug": 0.75},
    "eye": {"anatomy": 0.8, "trial": 0.35},
    "k1": {"tb": 0.6, "age": 0.6},
    "k2": {"tb": 0.5, "age": 0.3, "drug": 0.5},
}

# Word vectors for grouping: 6 semantic axes.
W_AXES = ["infection", "paediatric", "metabolic", "therapy", "vascular", "misc"]
WORDS = {
    "tb": {"infection": 1.0},
    "tuberculosis": {"infection": 0.95, "misc": 0.1},
    "xdr-tb": {"infection": 0.9, "therapy": 0.3},
    "child": {"paediatric": 1.0},
    "children": {"paediatric": 0.98},
    "diabetes": {"metabolic": 1.0},
    "type": {"misc": 1.0},
    "2": {"misc": 0.8, "metabolic": 0.2},
    "insulin": {"therapy": 0.9, "metabolic": 0.35},
    "hypertension": {"vascular": 1.0},
    "blood": {"vascular": 0.6, "misc": 0.7},
    "pressure": {"vascular": 0.5, "misc": 0.8},
    "antihypertensive": {"vascular": 0.8, "therapy": 0.45},
    "eye": {"misc": 0.6, "paediatric": 0.1},
    "k1": {"infection": 0.7, "paediatric": 0.7},
    "k2": {"infection": 0.6, "paediatric": 0.2, "therapy": 0.7},
}


def word(weights):
    v = [weights.get(a, 0.0) + rng.uniform(-0.03, 0.03) for a in W_AXES]
    return [round(x, 4) for x in v]


def write(name, dim, rows):
    with open(os.path.join(OUT, name), "w") as f:
        f.write(f"{dim}\n")
        for key, vec in rows:
            f.write(key + "\t" + " ".join(f"{x:.4f}" for x in vec) + "\n")


write("mesh_encoding.vec", len(AXES), [(k, dense(w)) for k, w in MESH.items()])
write("keywords.vec", len(AXES), [(k, dense(w)) for k, w in KEYWORDS.items()])
write("w2v.vec", len(W_AXES), [(k, word(w)) for k, w in WORDS.items()])
