#!/usr/bin/env python3
"""Seeded five-category newsgroup-style corpus for offline desk runs.

Usage: make_synthetic_corpus.py [--docs 2000] [--seed 7] [--out data/newsgroups5.jsonl]
"""
import argparse
import json
import random

CATEGORIES = {
    "sci.space": """orbit launch shuttle nasa satellite rocket moon mars lunar payload booster
        astronaut spacecraft mission probe telescope planetary solar jupiter saturn
        comet asteroid gravity thrust propulsion capsule station module docking
        reentry apollo voyager galileo hubble mir orbital altitude trajectory
        spacewalk cosmonaut venus mercury eclipse meteor observatory astronomy
        launchpad countdown engines fuel oxidizer kerosene hydrogen heatshield
        cosmic galaxy nebula star stellar""",
    "rec.sport.hockey": """hockey puck goalie nhl playoffs stanley cup team season game goals
        penguins bruins rangers leafs canadiens flyers islanders devils wings
        blackhawks oilers flames canucks kings sabres whalers nordiques jets
        defenseman winger center coach trade draft roster period overtime shutout
        powerplay penalty faceoff rink skate stick assist hat trick lemieux gretzky
        messier bourque roy fedorov jagr standings division conference""",
    "comp.graphics": """graphics image pixel rendering polygon texture shading raytracing bitmap
        vga svga jpeg gif tiff format palette colormap framebuffer resolution
        opengl vertex triangle mesh surface spline bezier curve algorithm
        viewer animation frame display monitor scanner conversion compression
        dithering antialiasing lighting shader camera projection rasterize
        postscript vector software package library routine utility windows
        filter contrast brightness""",
    "sci.med": """patient doctor disease treatment symptoms diagnosis medicine clinical
        infection antibiotic virus bacteria vaccine immune therapy surgery
        hospital physician nurse drug dosage prescription chronic acute pain
        headache migraine cancer tumor diabetes insulin blood pressure heart
        cholesterol diet nutrition vitamin allergy asthma syndrome study trial
        placebo research medical health kidney liver lung skin sleep fatigue
        pregnancy""",
    "talk.politics.guns": """gun firearms weapon rifle handgun pistol ammunition amendment
        constitution militia nra atf fbi waco raid compound koresh batf
        government federal law legislation ban assault semiauto background
        check permit license carry concealed self defense crime criminal
        violence police rights citizens congress senate vote bill control
        registration owners hunting shotgun caliber magazine trigger
        amendment""",
}

GENERAL = """people time year week day thing way problem question answer reason idea
    point fact case part number group system information place world state
    work example news article post reply list mail address phone book page
    line word name help interest issue change end result level order area
    person friend family home office school city country program report
    letter note comment discussion opinion view argument evidence source
    data support experience history story money cost price market business
    company service product version copy file request offer deal trouble
    attention effect matter kind sort lot bit couple pair""".split()

FILLER = """the a an and or but of to in on at for with by from about as is are was
    were be been being have has had do does did will would can could should may
    might must i you he she it we they this that these those my your his her
    its our their not no so if then than just also very really think know
    say said get got make made see seen go going come""".split()

START = 725846400  # 1993-01-01
SPAN = 365 * 86400


def zipf_weights(n, s=1.05):
    return [1.0 / (r + 1) ** s for r in range(n)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--docs", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", default="data/newsgroups5.jsonl")
    args = ap.parse_args()

    rng = random.Random(args.seed)
    names = sorted(CATEGORIES)
    lex = {c: CATEGORIES[c].split() for c in names}
    for c in names:
        rng.shuffle(lex[c])
    lw = {c: zipf_weights(len(lex[c])) for c in names}
    general = GENERAL[:]
    rng.shuffle(general)
    gw = zipf_weights(len(general))
    fw = zipf_weights(len(FILLER), 0.8)

    with open(args.out, "w", encoding="utf-8") as out:
        for i in range(args.docs):
            cat = names[i % len(names)]
            # a few posts carry no topical vocabulary at all
            share = 0.0 if rng.random() < 0.04 else rng.uniform(0.12, 0.45)
            length = rng.randint(40, 160)
            words = []
            for _ in range(length):
                u = rng.random()
                if u < share:
                    words.append(rng.choices(lex[cat], lw[cat])[0])
                elif u < share + 0.06:
                    other = rng.choice(names)
                    words.append(rng.choices(lex[other], lw[other])[0])
                elif u < share + 0.36:
                    words.append(rng.choices(general, gw)[0])
                else:
                    words.append(rng.choices(FILLER, fw)[0])
            sentences = []
            pos = 0
            while pos < len(words):
                step = rng.randint(6, 16)
                chunk = words[pos:pos + step]
                chunk[0] = chunk[0].capitalize()
                sentences.append(" ".join(chunk) + rng.choice([".", ".", "?", "!"]))
                pos += step
            doc = {
                "id": f"ng{i:05d}",
                "text": " ".join(sentences),
                "timestamp": START + rng.randrange(SPAN),
                "category": cat if share > 0 else "misc",
            }
            out.write(json.dumps(doc, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
