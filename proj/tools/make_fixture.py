#!/usr/bin/env python3
"""Writes the end-to-end fixture corpora.

history.jsonl holds a month of earlier submissions used for training;
release.jsonl holds three consecutive release days. Every abstract is drawn
from one dominant topic with some words from the others, so the dominant
topic of each paper is known (it is recorded in the title's first word).
"""

import argparse
import datetime as dt
import json
import random
from pathlib import Path

TOPICS = {
    "collider": "collider luminosity detector jet hadron trigger calorimeter beam proton muon "
                "boson higgs resonance channel background signal tracker vertex pileup dijet",
    "neutrino": "neutrino oscillation mixing flavor sterile reactor solar atmospheric majorana "
                "seesaw hierarchy baseline appearance disappearance leptogenesis antineutrino "
                "sensitivity angle phase octant",
    "darkmatter": "halo wimp annihilation relic abundance axion galactic scattering nucleon "
                  "freeze thermal mediator portal indirect underground xenon recoil "
                  "subhalo velocity density",
    "lattice": "lattice gluon confinement chiral pion meson spectroscopy propagator gauge "
               "continuum extrapolation ensemble fermion wilson simulation correlator "
               "renormalization spacing volume baryon",
}
ASTRO = ("galaxy cluster redshift star formation stellar survey luminous quasar merger disk "
         "spiral bulge accretion supernova emission spectrum photometric cosmic filament void")
FILLER = ("we study present show new results analysis approach using based first find "
          "obtain method recent also both well large small provide").split()
SURNAMES = ("Abe Baker Chen Diaz Evans Fischer Garcia Hoffmann Ito Jensen Kowalski Lopez "
            "Meyer Novak Okafor Petrov Quinn Rossi Sato Tanaka Ueda Varga Weber Xu Young Zhou").split()

HEP_TOPICS = list(TOPICS)


def words_for(rng, main, n, main_share=0.8, filler_share=0.15):
    vocab = {k: v.split() for k, v in TOPICS.items()}
    vocab["astro"] = ASTRO.split()
    others = [k for k in HEP_TOPICS if k != main]
    out = []
    for _ in range(n):
        u = rng.random()
        if u < filler_share:
            out.append(rng.choice(FILLER))
        elif u < filler_share + main_share:
            out.append(rng.choice(vocab[main]))
        else:
            out.append(rng.choice(vocab[rng.choice(others)]))
    return out


def paper(rng, pid, day, main, categories):
    title = [main.capitalize()] + words_for(rng, main, 6)
    abstract = words_for(rng, main, 70)
    text = " ".join(abstract)
    return {
        "id": pid,
        "title": " ".join(title),
        "abstract": text[0].upper() + text[1:] + ".",
        "submitted": day.isoformat(),
        "authors": sorted({f"{rng.choice('ABCDEFGHJKLMNPRST')}. {rng.choice(SURNAMES)}"
                           for _ in range(rng.randint(1, 4))}),
        "categories": categories,
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "fixtures")
    ap.add_argument("--seed", type=int, default=20200106)
    args = ap.parse_args()
    rng = random.Random(args.seed)

    history = []
    start = dt.date(2019, 12, 1)
    n = 0
    for i in range(600):
        n += 1
        day = start + dt.timedelta(days=i % 31)
        history.append(paper(rng, f"1912.{n:05d}", day, HEP_TOPICS[i % 4], ["hep-ph"]))
    for i in range(200):
        n += 1
        day = start + dt.timedelta(days=i % 31)
        history.append(paper(rng, f"1912.{n:05d}", day, "astro", ["astro-ph.GA"]))

    release = []
    n = 0
    days = [dt.date(2020, 1, 6), dt.date(2020, 1, 7), dt.date(2020, 1, 8)]
    layout = [
        (days[0], [t for t in HEP_TOPICS for _ in range(3)], 2),
        (days[1], [t for t in HEP_TOPICS for _ in range(3)], 2),
        (days[2], HEP_TOPICS + ["lattice"], 0),
    ]
    for day, topics, n_astro in layout:
        for t in topics:
            n += 1
            release.append(paper(rng, f"2001.{n:05d}", day, t, ["hep-ph"]))
        for j in range(n_astro):
            n += 1
            cats = ["astro-ph.CO", "hep-ph"] if j == 1 else ["astro-ph.GA"]
            release.append(paper(rng, f"2001.{n:05d}", day, "astro", cats))

    args.out.mkdir(parents=True, exist_ok=True)
    for name, rows in (("history.jsonl", history), ("release.jsonl", release)):
        with open(args.out / name, "w", encoding="utf-8") as f:
            for r in rows:
                f.write(json.dumps(r, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
