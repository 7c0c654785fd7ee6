#!/usr/bin/env python3
"""Regenerate the bundled lexical resources under crates/core/resources/.

Inputs come from the `pattern3` 3.0.0 source distribution (BSD licensed),
which vendors the Brill tagger lexicon (MIT), a Norvig-style spelling list
and the WordNet 3.0 index files (WordNet license).

    pip download --no-deps pattern3==3.0.0 && tar xzf pattern3-3.0.0.tar.gz
    python3 scripts/build_resources.py pattern3-3.0.0/pattern3/text/en
"""
import os
import re
import sys
from collections import defaultdict

ALPHA = re.compile(r"^[a-z]+$")

COARSE = [
    (("NN", "NNS", "NNP", "NNPS"), "noun"),
    (("VB", "VBD", "VBG", "VBN", "VBP", "VBZ"), "verb"),
    (("JJ", "JJR", "JJS"), "adj"),
    (("RB", "RBR", "RBS"), "adv"),
]

MORPH = {
    "noun": [("s", ""), ("ses", "s"), ("xes", "x"), ("zes", "z"), ("ches", "ch"),
             ("shes", "sh"), ("men", "man"), ("ies", "y")],
    "verb": [("s", ""), ("ies", "y"), ("es", "e"), ("es", ""), ("ed", "e"),
             ("ed", ""), ("ing", "e"), ("ing", "")],
    "adj": [("er", ""), ("est", ""), ("er", "e"), ("est", "e")],
    "adv": [],
}

FRAGMENTS = ["s", "t", "d", "ll", "re", "ve", "m", "a", "i", "o"]


def coarse(tag):
    for tags, name in COARSE:
        if tag in tags:
            return name
    return "other"


def read_lines(path):
    with open(path, encoding="utf-8", errors="replace") as fh:
        for line in fh:
            if line.startswith(";;;") or not line.strip():
                continue
            yield line.rstrip("\n")


def main(src, out):
    # Tag lexicon: first listed tag is the most frequent one. Lowercase
    # entries win over capitalised ones when both fold to the same key.
    tags = {}
    lower_seen = set()
    for line in read_lines(os.path.join(src, "en-lexicon.txt")):
        parts = line.split()
        if len(parts) < 2:
            continue
        word, tag = parts[0], parts[1]
        key = word.lower()
        if not ALPHA.match(key):
            continue
        is_lower = word == key
        if key in tags and (key in lower_seen or not is_lower):
            continue
        tags[key] = coarse(tag)
        if is_lower:
            lower_seen.add(key)

    # WordNet lemma -> senses per part of speech.
    senses = {p: {} for p in MORPH}
    files = {"noun": "index.noun", "verb": "index.verb", "adj": "index.adj", "adv": "index.adv"}
    for pos, name in files.items():
        for line in read_lines(os.path.join(src, "wordnet", "dict", name)):
            if line.startswith(" "):
                continue
            parts = line.split()
            lemma = parts[0]
            if ALPHA.match(lemma):
                senses[pos][lemma] = int(parts[2])

    def lemma_for(word, pos):
        table = senses[pos]
        if word in table:
            return word
        for suffix, repl in MORPH[pos]:
            if word.endswith(suffix) and len(word) > len(suffix):
                base = word[: len(word) - len(suffix)] + repl
                if base in table:
                    return base
        return None

    spelling = set()
    for line in read_lines(os.path.join(src, "en-spelling.txt")):
        word = line.split()[0].lower()
        if ALPHA.match(word):
            spelling.add(word)

    lemmas = set()
    for table in senses.values():
        lemmas.update(table)

    dictionary = set(spelling) | lemmas | set(FRAGMENTS)
    for word in tags:
        if any(lemma_for(word, pos) for pos in MORPH):
            dictionary.add(word)

    sense_counts = {}
    for word in sorted(dictionary):
        total = 0
        for pos in MORPH:
            base = lemma_for(word, pos)
            if base:
                total += senses[pos][base]
        if total > 0:
            sense_counts[word] = total

    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "tags.tsv"), "w") as fh:
        for word in sorted(tags):
            fh.write(f"{word}\t{tags[word]}\n")
    with open(os.path.join(out, "senses.tsv"), "w") as fh:
        for word, count in sense_counts.items():
            fh.write(f"{word}\t{count}\n")
    with open(os.path.join(out, "dictionary.txt"), "w") as fh:
        for word in sorted(dictionary):
            fh.write(word + "\n")
    print(f"tags={len(tags)} senses={len(sense_counts)} dictionary={len(dictionary)}")


if __name__ == "__main__":
    here = os.path.dirname(os.path.abspath(__file__))
    main(sys.argv[1], os.path.join(here, "..", "crates", "core", "resources"))
