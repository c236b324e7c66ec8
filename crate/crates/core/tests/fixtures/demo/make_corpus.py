#!/usr/bin/env python3
"""Regenerates train.jsonl and validation.jsonl from bracketed templates.

A template marks each gold mention as [surface|entity_id]; the script strips
the markup and records character offsets (Unicode scalar values) of every
mention. Run from this directory: python3 make_corpus.py
"""

import json
import re

MARK = re.compile(r"\[([^|\]]+)\|([^\]]+)\]")

TRAIN = [
    # Apple the company
    "[Tim Cook|Tim_Cook] said [Apple|Apple_Inc.] will ship a new [iPhone|iPhone] with [iOS|iOS] next year.",
    "[Apple|Apple_Inc.] sells the [iPhone|iPhone] and competes with [Samsung|Samsung] in the [smartphone|Smartphone] market.",
    "Shares of [Apple|Apple_Inc.] rose after the [iPhone|iPhone] launch across the [tech industry|Technology].",
    "[Tim Cook|Tim_Cook] is the [CEO|Chief_Executive] of [Apple|Apple_Inc.].",
    "Every [iPhone|iPhone] runs [iOS|iOS], which [Apple|Apple_Inc.] updates each autumn.",
    "Analysts expect [Apple|Apple_Inc.] and [Samsung|Samsung] to dominate the [tech industry|Technology] again.",
    # Apple the fruit
    "The [orchard|Orchard] grows [apple|Apple_(fruit)] and [banana|Banana] trees for [cider|Cider].",
    "She baked an [apple|Apple_(fruit)] pie with [banana|Banana] slices from the [orchard|Orchard].",
    "Pressing a ripe [apple|Apple_(fruit)] is the first step in making [cider|Cider].",
    "Farmers at the [orchard|Orchard] picked every [apple|Apple_(fruit)] before the frost.",
    "A [banana|Banana] and an [apple|Apple_(fruit)] make a quick breakfast.",
    "Dry [cider|Cider] tastes best when each [apple|Apple_(fruit)] comes from one [orchard|Orchard].",
    # Apple the label
    "[The Beatles|The_Beatles] founded [Apple|Apple_Records] as their own [record label|Record_label].",
    "The [record label|Record_label] [Apple|Apple_Records] released albums by [The Beatles|The_Beatles].",
    "[Apple|Apple_Records] was the [record label|Record_label] behind several [The Beatles|The_Beatles] singles.",
    # Android the operating system
    "[Samsung|Samsung] phones run [Android|Android_(OS)] while the [iPhone|iPhone] runs [iOS|iOS].",
    "[Google|Google_Inc.] develops [Android|Android_(OS)] for nearly every [smartphone|Smartphone].",
    "The latest [smartphone|Smartphone] from [Samsung|Samsung] ships with [Android|Android_(OS)].",
    "Developers compare [iOS|iOS] and [Android|Android_(OS)] before choosing a [smartphone|Smartphone] platform.",
    "[Android|Android_(OS)] dominates the [tech industry|Technology] by market share.",
    # Android the robot
    "[Isaac Asimov|Isaac_Asimov] wrote [science fiction|Science_fiction] about a [robot|Robot] and an [android|Android_(robot)].",
    "The [android|Android_(robot)] in the [science fiction|Science_fiction] film was a friendly [robot|Robot].",
    "Every [robot|Robot] story by [Isaac Asimov|Isaac_Asimov] features at least one [android|Android_(robot)].",
    "In [science fiction|Science_fiction] an [android|Android_(robot)] is a [robot|Robot] built to look human.",
    # Google and its CEO
    "[Google|Google_Inc.] built the most popular [search engine|Search_engine] in the world.",
    "[Eric Schmidt|Eric_Schmidt] led [Google|Google_Inc.] for a decade as [CEO|Chief_Executive].",
    "The [search engine|Search_engine] made [Google|Google_Inc.] a giant of the [tech industry|Technology].",
    "As [CEO|Chief_Executive], [Eric Schmidt|Eric_Schmidt] expanded [Google|Google_Inc.] beyond its [search engine|Search_engine].",
    "[Google|Google_Inc.] and [Samsung|Samsung] partnered on a new [smartphone|Smartphone].",
    # Unlinked occurrences
    "The [company|__NIL__] said nothing further about the matter.",
    "A spokesperson for the [company|__NIL__] declined to comment.",
    "Nobody at the [company|__NIL__] answered the phone on Friday.",
    "The [company|__NIL__] plans to hire more staff next spring.",
    "Try to [google|__NIL__] the recipe before dinner.",
    "You can always [google|__NIL__] it later.",
]

# Ambiguous mentions whose prior favourite is wrong. A low easy threshold
# resolves them from priors alone; the second pass fixes them.
VALIDATION = [
    "We walked through the [orchard|Orchard] and ate an [apple|Apple_(fruit)] with a [banana|Banana].",
    "Fresh [cider|Cider] needs a sweet [apple|Apple_(fruit)] from a local [orchard|Orchard].",
    "A [banana|Banana] bread recipe calls for one grated [apple|Apple_(fruit)] and a splash of [cider|Cider].",
    "[Isaac Asimov|Isaac_Asimov] imagined an [android|Android_(robot)] that behaves like any [robot|Robot].",
    "The [science fiction|Science_fiction] novel follows an [android|Android_(robot)] and a [robot|Robot] dog.",
    "[The Beatles|The_Beatles] signed to [Apple|Apple_Records], their own [record label|Record_label].",
    "[Tim Cook|Tim_Cook] announced that [Apple|Apple_Inc.] will sell a cheaper [iPhone|iPhone].",
    "[Samsung|Samsung] updated [Android|Android_(OS)] on its flagship [smartphone|Smartphone].",
]


def render(template, doc_id):
    text = ""
    mentions = []
    pos = 0
    for m in MARK.finditer(template):
        text += template[pos : m.start()]
        start = len(text)
        text += m.group(1)
        mentions.append(
            {"surface": m.group(1), "char_start": start, "char_end": len(text), "entity": m.group(2)}
        )
        pos = m.end()
    text += template[pos:]
    return {"id": doc_id, "language": "en", "text": text, "mentions": mentions}


def write(path, templates, prefix):
    with open(path, "w", encoding="utf-8") as f:
        for i, t in enumerate(templates):
            f.write(json.dumps(render(t, f"{prefix}{i:03d}"), ensure_ascii=False) + "\n")


if __name__ == "__main__":
    write("train.jsonl", TRAIN, "train-")
    write("validation.jsonl", VALIDATION, "val-")
