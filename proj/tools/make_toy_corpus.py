#!/usr/bin/env python3
"""Writes the small BioC toy corpus under data/toy/.

The corpus mimics the layout of the recipe and abstract corpora: one file per
(corpus, ontology), identical document text across the ontology variants,
uppercased annotation text, and offsets that are not character positions.
Identifiers for foods outside the worked example are placeholders.
"""

import json
import pathlib
import random

OBO = "http://purl.obolibrary.org/obo/"
SNOMED = "http://purl.bioontology.org/ontology/SNOMEDCT/"

# name -> (foodon tags, snomed ids, hansard tags); empty list = not linked there
FOODS = {
    "cream cheese": (["FOODON_03301889", "FOODON_00001013"], ["226849005", "255621006"], ["AG.01.e [Dairy produce]", "AG.01.e.02 [Cheese]"]),
    "beef": ([], ["226916002"], ["AG.01.d.03 [Beef]"]),
    "olives": (["FOODON_03301625"], ["227436000"], ["AG.01.h.01.e [Fruit containing stone]"]),
    "onion": (["FOODON_03301704", "NCBITaxon_4679"], ["735047000"], ["AG.01.h.02.e [Onion/leek/garlic]"]),
    "walnuts": (["NCBITaxon_16718"], ["227493005"], ["AG.01.h.01.f [Nut]"]),
    "cheese": (["FOODON_00001013"], ["102264005"], ["AG.01.e.02 [Cheese]"]),
    "butter": (["FOODON_03310351"], ["226885004"], ["AG.01.e.03 [Butter]"]),
    "flour": (["FOODON_03301063"], ["226773001"], ["AG.01.i.02 [Flour]"]),
    "sugar": (["FOODON_03301073"], ["227550009"], ["AG.01.k.01 [Sugar]"]),
    "eggs": (["FOODON_03310272"], ["102263004"], ["AG.01.e.05 [Egg]"]),
    "milk": (["FOODON_03301303"], ["226760005"], ["AG.01.e.01 [Milk]"]),
    "garlic": (["FOODON_03301844", "NCBITaxon_4682"], ["227421003"], ["AG.01.h.02.e [Onion/leek/garlic]"]),
    "tomatoes": (["FOODON_03309927"], ["734881000"], ["AG.01.h.02.c [Tomato]"]),
    "salt": (["FOODON_03301457"], ["387390002"], ["AG.01.l.01 [Salt]"]),
    "olive oil": (["FOODON_03301826"], ["227564004"], ["AG.01.l.03 [Oil]"]),
    "chicken": (["FOODON_03411457"], ["227001002"], ["AG.01.d.05 [Poultry]"]),
    "rice": (["FOODON_03301389"], ["226773002"], ["AG.01.i.01 [Rice]"]),
    "green tea": (["FOODON_03301464"], ["227361007"], ["AG.01.x.02 [Tea]"]),
    "salmon": (["FOODON_03411222", "NCBITaxon_8030"], ["227116005"], ["AG.01.f.02 [Fish]"]),
    "lettuce": (["FOODON_03301597"], ["227410002"], ["AG.01.h.02.a [Salad vegetables]"]),
    "honey": (["FOODON_03301358"], ["227514009"], ["AG.01.k.02 [Honey]"]),
    "lemon juice": (["FOODON_03301627"], ["227519001"], ["AG.01.h.01.c [Citrus fruit]"]),
    "potatoes": (["FOODON_03315354"], ["227351000"], ["AG.01.h.02.b [Potato]"]),
    "carrots": (["FOODON_03301111"], ["227377002"], ["AG.01.h.02.d [Root vegetables]"]),
    "yogurt": (["FOODON_03300286"], ["256349000"], ["AG.01.e.04 [Yogurt]"]),
    "soy sauce": (["FOODON_03301115"], [], ["AG.01.l.04 [Sauce/dressing]"]),
    "coffee": (["FOODON_03301442"], ["53410008"], ["AG.01.x.01 [Coffee]"]),
    "red wine": (["FOODON_03301463"], ["227743005"], []),
    "spinach": (["FOODON_03301843"], ["227413000"], ["AG.01.h.02.a [Salad vegetables]"]),
    "pepper": (["FOODON_03301066"], ["227565003"], ["AG.01.l.02 [Spice]"]),
}

RECIPE_VERBS = [
    "Combine the {a} and {b} in a large bowl.",
    "Stir in the {a} until smooth.",
    "Add {a}, {b} and a pinch of {c}.",
    "Heat the {a} in a skillet over medium heat.",
    "Season with {a} to taste.",
    "Fold the {a} into the {b} gently.",
    "Serve warm with {a} on the side.",
    "Whisk the {a} with the {b} and set aside.",
]

ABSTRACT_VERBS = [
    "Consumption of {a} was associated with lower risk in the cohort.",
    "We measured the polyphenol content of {a} and {b} across 120 samples.",
    "Participants who reported daily intake of {a} showed improved markers.",
    "Dietary patterns rich in {a}, {b} and {c} were examined.",
    "No association was found between {a} intake and the outcome.",
    "The effect of {a} supplementation was compared with {b}.",
]

CATEGORIES = ["Main dish", "Desserts", "Salad", "Soups, stews and chili", "Side dish"]


def make_documents(rng, count, prefix, verbs, with_category):
    docs = []
    names = list(FOODS)
    for i in range(count):
        picked = rng.sample(names, rng.randint(3, 6))
        sentences, mentions = [], []
        for _ in range(rng.randint(3, 5)):
            tmpl = rng.choice(verbs)
            slots = {k: rng.choice(picked) for k in "abc"}
            sentences.append(tmpl.format(**slots))
            for k in "abc":
                if "{" + k + "}" in tmpl:
                    mentions.append(slots[k])
        text = " " + " ".join(sentences) + " "
        doc_id = f"{i}{prefix}{1000 + i}"
        docs.append((doc_id, text, mentions, rng.choice(CATEGORIES) if with_category else None))
    return docs


def render(docs, ontology):
    col = 0 if ontology == "foodon" else 1 if ontology == "snomedct" else 2
    out = ['<?xml version="1.0" encoding="UTF-8"?>', "<collection>"]
    for doc_id, text, mentions, category in docs:
        suffix = "" if ontology == "foodon" else "_" + ontology
        out.append("  <document>")
        out.append(f"    <id>{doc_id}{suffix}</id>")
        out.append(f'    <infon key="full_text">{text}</infon>')
        ann = 0
        for word_index, m in enumerate(mentions):
            tags = FOODS[m][col]
            if not tags:
                continue
            if ontology == "foodon":
                uris = [OBO + t for t in tags]
            elif ontology == "snomedct":
                uris = [SNOMED + t for t in tags]
            else:
                uris = tags
            ann += 1
            out.append(f'    <annotation id="{ann}"> <infon key="semantic_tags">{";".join(uris)}</infon>')
            out.append(f'      <location offset="{word_index + 3}" length="{len(m)}" /> <text>{m.upper()}</text> </annotation>')
        if category:
            out.append(f'    <infon key="category">{category}</infon>')
        out.append("  </document>")
    out.append("</collection>")
    return "\n".join(out) + "\n"


def main():
    root = pathlib.Path(__file__).resolve().parent.parent / "data" / "toy"
    root.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20240611)
    recipes = make_documents(rng, 24, "recipe", RECIPE_VERBS, True)
    abstracts = make_documents(rng, 8, "abstract", ABSTRACT_VERBS, False)
    for ontology in ("foodon", "snomedct", "hansard"):
        (root / f"cafeteriafcd_{ontology}.xml").write_text(render(recipes, ontology))
        (root / f"cafeteriasa_{ontology}.xml").write_text(render(abstracts, ontology))
    write_general(rng, root.parent / "general_sample.jsonl")


def write_general(rng, path):
    # Dolly-style lines; every tenth one is long enough to exceed the token budget.
    topics = ["bread", "tea", "rice", "olive oil", "lentils", "yogurt", "apples", "coffee"]
    lines = []
    for i in range(60):
        topic = rng.choice(topics)
        row = {"instruction": f"Give one fact about {topic}.", "context": "", "response": f"{topic.capitalize()} is a food."}
        if i % 10 == 0:
            row["context"] = " ".join([f"{topic} notes"] * 1200)
        lines.append(json.dumps(row))
    path.write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
