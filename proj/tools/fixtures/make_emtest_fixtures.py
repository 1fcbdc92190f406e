#!/usr/bin/env python3
"""Writes the EM-Test fixture files under core/data/emtest/.

Output is deterministic; rerun after editing and commit the result.

    python3 tools/fixtures/make_emtest_fixtures.py [--out DIR]
"""

import argparse
import datetime as dt
import json
import pathlib
import random

SPANS = ["just_now", "one_day", "few_days", "one_month", "few_months", "one_year", "few_years", "several_decades"]

# (easy, hard) points per span in the with-time set.
WITH_TIME_COUNTS = {
    "just_now": (18, 7),
    "one_day": (5, 5),
    "few_days": (10, 8),
    "one_month": (4, 4),
    "few_months": (4, 7),
    "one_year": (5, 4),
    "few_years": (7, 9),
    "several_decades": (4, 5),
}
WITHOUT_TIME_COUNTS = (89, 34)

DAY = 86400
YEAR = 365 * DAY

# Seconds between the stated fact and the question, per span. Chosen well
# inside the linter windows.
GAPS = {
    "just_now": (60, 1500),
    "one_day": (5 * 3600, 30 * 3600),
    "few_days": (2 * DAY, 10 * DAY),
    "one_month": (25 * DAY, 40 * DAY),
    "few_months": (60 * DAY, 250 * DAY),
    "one_year": (340 * DAY, 420 * DAY),
    "few_years": (2 * YEAR, 10 * YEAR),
    "several_decades": (20 * YEAR, 45 * YEAR),
}

SLOTS = {
    "color": ["grey", "red", "dark green", "yellow", "navy blue", "white", "orange"],
    "pet": ["Pepper", "Miso", "Biscuit", "Luna", "Olive", "Pixel", "Juniper"],
    "person": ["Anna", "Kofi", "Mei", "Lucas", "Priya", "Tomasz", "Ines", "Hiro"],
    "city": ["Lisbon", "Osaka", "Nairobi", "Montreal", "Krakow", "Valparaiso", "Tbilisi"],
    "lang": ["Portuguese", "Korean", "Swahili", "German", "Italian", "Arabic"],
    "book": ["The Left Hand of Darkness", "Middlemarch", "Beloved", "The Name of the Rose", "Pachinko"],
    "digits": ["4417", "0932", "7781", "2056", "6624"],
    "n": ["six", "eight", "eleven", "fourteen", "twenty"],
    "restaurant": ["Casa Lume", "The Copper Pot", "Sora Noodle Bar", "Little Fig", "Harbor Grill"],
    "km": ["five", "eight", "ten", "twelve", "fifteen"],
    "project": ["warehouse migration", "mobile checkout", "river cleanup", "payroll audit", "archive scanning"],
    "instrument": ["cello", "banjo", "piano", "clarinet", "drums"],
    "weekday": ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday"],
    "tea": ["jasmine green tea", "rooibos", "genmaicha", "earl grey", "chamomile"],
    "item": ["umbrella", "reading glasses", "blue scarf", "notebook", "headphones"],
    "plant": ["fern", "lemon tree", "snake plant", "bonsai", "peace lily"],
}

# (statement, question, answer, topic)
FACTS = [
    ("I adopted a {color} cat and named her {pet}.", "What did I name the cat I adopted?",
     "You named your cat {pet}.", "adopting {pet}"),
    ("My sister {person} is moving to {city} for work.", "Where is my sister moving?",
     "Your sister {person} is moving to {city}.", "your sister's move"),
    ("I signed up for a {lang} class at the community center.", "Which language class did I sign up for?",
     "You signed up for a {lang} class.", "the {lang} class"),
    ("I finally finished reading {book}.", "Which book did I say I finished?",
     "You finished reading {book}.", "finishing {book}"),
    ("My new phone number ends in {digits}.", "What are the last digits of my new phone number?",
     "Your new number ends in {digits}.", "your new phone number"),
    ("I planted {n} tomato seedlings in the garden.", "How many tomato seedlings did I plant?",
     "You planted {n} tomato seedlings.", "the tomato seedlings"),
    ("My friend {person} recommended a restaurant called {restaurant}.",
     "What was the restaurant my friend recommended?", "{person} recommended {restaurant}.",
     "the restaurant tip"),
    ("I ran {km} kilometers this morning.", "How far did I say I ran?", "You ran {km} kilometers.",
     "your run"),
    ("I bought a {color} bicycle from a shop in {city}.", "What color is the bicycle I bought?",
     "Your bicycle is {color}.", "the new bicycle"),
    ("My manager asked me to lead the {project} project.", "Which project was I asked to lead?",
     "You were asked to lead the {project} project.", "the {project} project"),
    ("I'm learning to play the {instrument}.", "What instrument am I learning?",
     "You are learning the {instrument}.", "the {instrument} lessons"),
    ("Our team meeting moved to {weekday}s.", "Which day did our team meeting move to?",
     "Your team meeting moved to {weekday}s.", "the meeting change"),
    ("I booked a trip to {city} with {person}.", "Where did I book a trip to?",
     "You booked a trip to {city} with {person}.", "the trip to {city}"),
    ("My favorite tea lately is {tea}.", "What tea have I been enjoying lately?",
     "You have been enjoying {tea}.", "your favorite tea"),
    ("I lost my {item} on the bus.", "What did I lose on the bus?", "You lost your {item}.",
     "losing your {item}"),
    ("My neighbor {person} gave me a {plant}.", "What plant did my neighbor give me?",
     "{person} gave you a {plant}.", "the {plant}"),
]

ACKS = [
    "Thanks for telling me, I will remember that.",
    "Got it. That sounds nice.",
    "Noted! Let me know how it goes.",
    "That is good to hear.",
    "I'll keep that in mind.",
]


def fill(rng, fact):
    values = {k: rng.choice(v) for k, v in SLOTS.items()}
    return tuple(part.format(**values) for part in fact)


def fmt_ts(t):
    return f"{t.strftime('%A')}, {t.strftime('%B')} {t.day}, {t.year}, {t.strftime('%H:%M:%S')}"


def fmt_date(t):
    return f"{t.strftime('%A')}, {t.strftime('%B')} {t.day}, {t.year}"


def elapsed_phrase(seconds):
    minutes = seconds // 60
    hours = seconds // 3600
    days = seconds // DAY
    if seconds < 3600:
        return f"{max(minutes, 1)} minutes"
    if seconds < 2 * DAY:
        return f"{hours} hours"
    if seconds < 14 * DAY:
        return f"{days} days"
    if seconds < 60 * DAY:
        return f"{days // 7} weeks"
    if seconds < 330 * DAY:
        return f"{days // 30} months"
    if seconds < 2 * YEAR:
        return "about a year"
    return f"{days // 365} years"


def chunks(n, size):
    while n > 0:
        yield min(n, size)
        n -= size


def base_time(rng, span):
    year = rng.randint(1975, 1992) if span == "several_decades" else rng.randint(2008, 2021)
    start = dt.datetime(year, 1, 1)
    return start + dt.timedelta(seconds=rng.randrange(300 * DAY) + 8 * 3600)


def with_time(rng):
    instances = []
    serial = 0
    for span in SPANS:
        for difficulty, total in zip(("easy", "hard"), WITH_TIME_COUNTS[span]):
            point_no = 0
            for size in chunks(total, 4):
                facts = [fill(rng, f) for f in rng.sample(FACTS, size)]
                t = base_time(rng, span)
                step = (40, 120) if span == "just_now" else (300, 900)
                history, stamps = [], []
                for statement, *_ in facts:
                    t += dt.timedelta(seconds=rng.randint(*step))
                    stamps.append(t)
                    history += [
                        {"role": "user", "content": statement},
                        {"role": "observation", "content": fmt_ts(t)},
                        {"role": "assistant", "content": rng.choice(ACKS)},
                    ]
                lo, hi = GAPS[span]
                points = []
                for k, (statement, question, answer, topic) in enumerate(facts):
                    # measured from the fact itself so every point lands in its window
                    obs = stamps[k] + dt.timedelta(seconds=rng.randint(lo, hi))
                    obs = max(obs, stamps[-1] + dt.timedelta(seconds=30))
                    gap = int((obs - stamps[k]).total_seconds())
                    if difficulty == "hard":
                        question = f"{question} And when did I tell you about it?"
                        answer = f"{answer} You told me {elapsed_phrase(gap)} ago, on {fmt_date(stamps[k])}."
                    points.append({
                        "id": f"wt-{span}-{difficulty}-{point_no:02}",
                        "position": len(history),
                        "question": question,
                        "observation": fmt_ts(obs),
                        "span": span,
                        "difficulty": difficulty,
                        "reference_answer": answer,
                        "evidence": 3 * k,
                    })
                    point_no += 1
                instances.append({"id": f"wt-{serial:03}", "variant": "with_time", "history": history,
                                  "points": points})
                serial += 1
    return instances


def without_time(rng):
    instances = []
    easy_left, hard_left = WITHOUT_TIME_COUNTS
    serial = 0
    point_no = {"easy": 0, "hard": 0}
    while easy_left or hard_left:
        facts = [fill(rng, f) for f in rng.sample(FACTS, 5)]
        history = []
        for statement, *_ in facts:
            history += [{"role": "user", "content": statement},
                        {"role": "assistant", "content": rng.choice(ACKS)}]
        points = []
        for k in range(3):
            if easy_left:
                _, question, answer, _ = facts[k]
                difficulty = "easy"
                easy_left -= 1
                evidence = 2 * k
            elif hard_left:
                a, b = facts[k], facts[k + 2]
                if hard_left % 2:
                    question = f"Which did I mention first: {a[3]} or {b[3]}?"
                    answer = f"You told me about {a[3]} first, then {b[3]}."
                else:
                    question = f"{a[1]} Also, {b[1][0].lower()}{b[1][1:]}"
                    answer = f"{a[2]} {b[2]}"
                difficulty = "hard"
                hard_left -= 1
                evidence = 2 * k
            else:
                break
            points.append({
                "id": f"wo-{difficulty}-{point_no[difficulty]:03}",
                "position": len(history),
                "question": question,
                "difficulty": difficulty,
                "reference_answer": answer,
                "evidence": evidence,
            })
            point_no[difficulty] += 1
        instances.append({"id": f"wo-{serial:03}", "variant": "without_time", "history": history,
                          "points": points})
        serial += 1
    return instances


def write(path, instances):
    with open(path, "w", encoding="utf-8") as f:
        for inst in instances:
            f.write(json.dumps(inst, ensure_ascii=False, separators=(",", ":")) + "\n")


def main():
    root = pathlib.Path(__file__).resolve().parents[2]
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=pathlib.Path, default=root / "core" / "data" / "emtest")
    ap.add_argument("--seed", type=int, default=20240915)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    write(args.out / "emtest_with_time.jsonl", with_time(random.Random(args.seed)))
    write(args.out / "emtest_without_time.jsonl", without_time(random.Random(args.seed + 1)))


if __name__ == "__main__":
    main()
