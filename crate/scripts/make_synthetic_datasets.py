"""Writes the small synthetic datasets used by the offline tests and demos.

The records follow the published field layouts of each benchmark so the
loaders are exercised exactly as they would be on the real files. Output is
deterministic.
"""

import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "crates" / "core" / "fixtures" / "datasets"

ANIMALS = [
    "amberjack", "carp", "dog", "catfish", "mosquito", "eel", "kiwi", "panda",
    "lobster", "hare", "cricket", "salmon", "tiger", "whale", "octopus", "bat",
    "goldfish", "moose", "oscar", "zander", "buffalo", "grizzly", "starfish", "sun bear",
]
ACTIONS = [
    ("removes from the board one of the pieces of", "remove_piece"),
    ("burns the warehouse of", "burn_warehouse"),
    ("respects", "respect"),
    ("needs support from", "need_support"),
    ("prepares armor for", "prepare_armor"),
    ("steals five points from", "steal_points"),
    ("winks at", "wink"),
    ("knocks down the fortress of", "knock_down_fortress"),
]
TRAITS = [
    ("struggles to find food", "has difficulty to find food"),
    ("has a card that is red in color", "has a card whose color starts with r"),
    ("is named Lola", "has a name whose first letter is l"),
    ("has a violin", "has a musical instrument"),
    ("has 7 friends", "has more than five friends"),
    ("is watching a movie from 1995", "is watching a movie released before 2000"),
    ("has a knife", "has a sharp object"),
    ("recently read a high-quality paper", "has published a high-quality paper"),
]


def bgqa_record(rng, hops, idx):
    actors = rng.sample(ANIMALS, hops + 2)
    actions = rng.sample(ACTIONS, hops)
    label = rng.choice(["proved", "disproved", "unknown"])
    facts, rules, proof = [], [], []
    trait = rng.choice(TRAITS)
    known = label != "unknown"
    if known:
        facts.append(f"The {actors[0]} {trait[0]}.")
    else:
        facts.append(f"The {actors[-1]} {trait[0]}.")
    facts.append(f"The {actors[-1]} has {rng.randint(1, 9)} friends that are playful.")
    prev_subject = actors[0]
    for h in range(hops):
        verb, _ = actions[h]
        target = actors[h + 1]
        if h == 0:
            cond = f"the {actors[0]} {trait[1]}"
        else:
            cond = f"the {prev_subject} {actions[h - 1][0]} the {actors[h]}"
        last = h == hops - 1
        negate = last and label == "disproved"
        outcome = f"does not {verb.split(' ', 1)[0][:-1]} {verb.split(' ', 1)[1] if ' ' in verb else ''}".replace("  ", " ").strip() if negate else verb
        subject = actors[h]
        rules.append(f"Rule{h + 1}: If {cond}, then the {subject} {outcome} the {target}.")
        if known:
            proof.append(
                f"We know {cond}, and according to Rule{h + 1} \"if {cond}, then the {subject} {outcome} the {target}\", "
                f"so we can conclude \"the {subject} {outcome} the {target}\"."
            )
        prev_subject = subject
    verb, _ = actions[hops - 1]
    question = f"Based on the game state and the rules and preferences, does the {actors[hops - 1]} {verb.replace('removes', 'remove').replace('burns', 'burn').replace('respects', 'respect').replace('needs', 'need').replace('prepares', 'prepare').replace('steals', 'steal').replace('winks', 'wink').replace('knocks', 'knock')} the {actors[hops]}?"
    if not known:
        proof.append("The provided information is not enough to prove or disprove the statement.")
    example = (
        "A few players are playing a boardgame. The current state of the game is as follows. "
        + " ".join(facts)
        + " And the rules of the game are as follows. "
        + " ".join(rules)
        + " "
        + question
    )
    return {
        "id": f"b{hops}-{idx:04d}",
        "example": example,
        "facts": " ".join(facts),
        "rules": " ".join(rules),
        "proof": "\n".join(proof),
        "label": label,
    }


TOPICS = [
    ("Carer's Allowance", "you look after someone for at least 35 hours a week", "care_35_hours"),
    ("Bereavement Support Payment", "your husband, wife or civil partner died", "partner_died"),
    ("Maternity Allowance", "you have been employed for at least 26 weeks", "employed_26_weeks"),
    ("Winter Fuel Payment", "you were born before 1957", "born_before_1957"),
    ("a Blue Badge", "you get the higher rate of the mobility component", "higher_mobility_rate"),
    ("Pension Credit", "you have reached State Pension age", "reached_pension_age"),
    ("Housing Benefit", "you pay rent and you are on a low income", "pays_rent_low_income"),
    ("a Special Guardianship Order", "the child cannot live with their birth parents", "child_cannot_live_with_parents"),
]
SPANS = [
    "within 10 days", "up to 8 weeks", "within 3 months", "at least 6 weeks",
    "within 2 working days", "about 4 weeks", "up to 12 weeks", "within 28 days",
]


def condqa_record(rng, idx, forced=None):
    name, cond, _ = rng.choice(TOPICS)
    span = rng.choice(SPANS)
    cls = forced or rng.choice(["yes", "no", "span"])
    contents = [
        f"<h1>Overview</h1>",
        f"<p>You can get {name} if {cond}.</p>",
        f"<p>You cannot get {name} if you are under 16.</p>",
        "<h1>How to claim</h1>",
        f"<p>You will usually get a decision {span} after you apply.</p>",
        "<li>by phone</li>",
        "<li>online</li>",
        "<h1>Other help</h1>",
        "<p>You may be able to get other benefits as well.</p>",
    ]
    if cls == "yes":
        scenario = f"I am 40 years old and {cond.replace('you ', 'I ').replace('your ', 'my ')}."
        question = f"Can I get {name}?"
        answers = [["yes", []]]
        evidences = [contents[1]]
    elif cls == "no":
        scenario = "I am 15 years old and still at school."
        question = f"Can I get {name}?"
        answers = [["no", []]]
        evidences = [contents[2]]
    else:
        scenario = f"I applied for {name} last week."
        question = "How long will it take to get a decision?"
        answers = [[span, []]]
        evidences = [contents[4]]
    if rng.random() < 0.5:
        evidences.append(contents[8])
    if rng.random() < 0.5:
        evidences.insert(0, contents[0])
    return {
        "id": f"c-{idx:04d}",
        "url": f"https://www.gov.uk/example-{idx}",
        "scenario": scenario,
        "question": question,
        "answers": answers,
        "evidences": evidences,
        "contents": contents,
    }


ITEMS = [
    ("equipment for making talking books and newspapers", "selling_talking_book_equipment"),
    ("lifeboats and associated equipment, including fuel", "selling_lifeboats"),
    ("medicine or ingredients for medicine", "selling_medicine"),
    ("resuscitation training models", "selling_resuscitation_models"),
    ("rescue equipment", "selling_rescue_equipment"),
    ("aids for disabled people", "selling_disability_aids"),
]


def sharc_record(rng, idx, forced=None):
    items = rng.sample(ITEMS, 3)
    snippet = "## Items that qualify for the zero rate\n\nYou may be able to apply zero VAT when you sell the following to an eligible charity:\n\n" + "\n\n".join(
        f"* {i[0]}" for i in items
    )
    cls = forced or rng.choice(["yes", "no", "nei"])
    history = []
    if cls == "yes":
        hit = rng.randrange(3)
        for j in range(hit + 1):
            history.append({
                "follow_up_question": f"Are you selling {items[j][0]}?",
                "follow_up_answer": "Yes" if j == hit else "No",
            })
        answer = "Yes"
        scenario = f"I run a shop that sells {items[hit][0]} to charities."
    elif cls == "no":
        for j in range(3):
            history.append({"follow_up_question": f"Are you selling {items[j][0]}?", "follow_up_answer": "No"})
        answer = "No"
        scenario = "I sell office furniture."
    else:
        answer = rng.choice([f"Are you selling {items[0][0]}?", "Irrelevant"])
        scenario = ""
    return {
        "utterance_id": f"s-{idx:04d}",
        "tree_id": f"t-{idx % 7}",
        "source_url": "https://www.gov.uk/vat-charities",
        "snippet": snippet,
        "question": "Can I apply zero VAT to this item?",
        "scenario": scenario,
        "history": history,
        "evidence": [],
        "answer": answer,
    }


def balanced(rng, make, n, classes):
    return [make(rng, i, classes[i % len(classes)]) for i in range(n)]


def write(path, records):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n")


def main():
    rng = random.Random(20240101)
    write(OUT / "condqa" / "train.jsonl", balanced(rng, condqa_record, 30, ["yes", "no", "span"]))
    write(OUT / "condqa" / "dev.jsonl", balanced(rng, condqa_record, 24, ["yes", "no", "span", "span"]))
    write(OUT / "sharc" / "train.jsonl", balanced(rng, sharc_record, 30, ["yes", "no", "nei"]))
    write(OUT / "sharc" / "dev.jsonl", balanced(rng, sharc_record, 24, ["yes", "no", "nei"]))
    for hops, n_train, n_dev in [(1, 100, 500), (2, 30, 24), (3, 30, 24)]:
        write(OUT / f"bgqa-{hops}" / "train.jsonl", [bgqa_record(rng, hops, i) for i in range(n_train)])
        write(OUT / f"bgqa-{hops}" / "dev.jsonl", [bgqa_record(rng, hops, 10000 + i) for i in range(n_dev)])


if __name__ == "__main__":
    main()
