#!/usr/bin/env python3
"""Builds crates/core/data/lexicon.tsv and tagged.txt from the CMU Pronouncing
Dictionary (pip package `cmudict`) and hand-curated part-of-speech word lists.

    pip download cmudict --no-deps && python3 tools/build_lexicon.py <cmudict.dict>
"""
import random
import re
import sys
from collections import OrderedDict
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "crates" / "core" / "data"

VOWELS = {"aa", "ae", "ah", "ao", "aw", "ay", "eh", "er", "ey", "ih", "iy", "ow", "oy", "uh", "uw"}
ONSETS = {
    ("p", "r"), ("p", "l"), ("b", "r"), ("b", "l"), ("t", "r"), ("d", "r"), ("k", "r"), ("k", "l"),
    ("g", "r"), ("g", "l"), ("f", "r"), ("f", "l"), ("th", "r"), ("sh", "r"), ("s", "p"), ("s", "t"),
    ("s", "k"), ("s", "m"), ("s", "n"), ("s", "l"), ("s", "w"), ("s", "p", "r"), ("s", "p", "l"),
    ("s", "t", "r"), ("s", "k", "r"), ("s", "k", "w"), ("t", "w"), ("d", "w"), ("k", "w"),
    ("g", "w"), ("th", "w"), ("p", "y"), ("b", "y"), ("f", "y"), ("v", "y"), ("m", "y"),
    ("k", "y"), ("hh", "y"), ("s", "k", "y"),
}

DET = "the a an this that these those every some no each all".split()
PRP = "i you we they he she it".split()
PRP_OBJ = "me us them him her".split()
IN = "in on at with from for by under over near after before of into about through".split()
CC = "and but or".split()
MD = "will can could should must may would".split()
RB = ("quickly slowly often never always here there now today soon very well again still not "
      "really almost later early together outside inside finally suddenly").split()
NUM = ("zero one two three four five six seven eight nine ten eleven twelve thirteen fourteen "
       "fifteen sixteen seventeen eighteen nineteen twenty thirty forty fifty sixty seventy "
       "eighty ninety hundred thousand million").split()
NNP = "john mary london paris peter susan texas chicago robert linda".split()

NOUNS = """
dog cat house water tree car road river city street letter paper table window door garden
bird fish horse mother father sister brother child teacher doctor student farmer river
computer system market money number problem question answer story picture music morning evening
night summer winter season country mountain island ocean beach forest field flower apple
butter bottle kitten mitten button cotton daughter matter ladder meadow metal model motor
party pocket rabbit sugar tiger wagon winter bucket basket blanket carpet castle cattle
chapter chicken circle coffee copper corner cottage council county cradle desert dinner
doctor engine factory fever finger forest gallon hammer harbor helmet hunter jacket kettle
kitchen lemon lesson letter lizard lumber magnet marble market meter minute mirror monkey
motor muscle napkin needle nickel orange oyster palace parrot pepper pillow planet potato
powder puppet rocket saddle salad salmon scooter shadow shoulder silver sister spider
station sweater tablet temple ticket timber tomato tunnel turtle village visitor waiter
walnut weather whistle wizard writer boat bread chair cloud coat dream friend glass grass
hand heart king light moon night plant queen rain ring rock school ship shoe song star
stone storm sun train voice wall wind wire wood word world year bell book box cab cup
desk egg hat lamp map nest pen pot rug sock tent toy van web yard bed bus fox jar kid
leg mud pig rat sun tub wax zoo
""".split()

ADJ = """
big small red green blue happy sad pretty little bitter better quiet simple gentle
early late old new young warm cold hot cool dark bright heavy light fast slow strong weak
rich poor clean dirty empty full hungry lucky lazy busy easy funny silly sunny windy rainy
tiny huge great good bad short tall long wide narrow deep soft hard loud calm proud brave
wild kind fresh sweet sour safe free clever curious famous gentle honest modern natural
perfect private public rapid recent rotten sudden tender total vital wooden yellow golden
""".split()

# base, 3sg, past, gerund
VERBS = [
    ("walk", "walks", "walked", "walking"), ("talk", "talks", "talked", "talking"),
    ("jump", "jumps", "jumped", "jumping"), ("play", "plays", "played", "playing"),
    ("work", "works", "worked", "working"), ("look", "looks", "looked", "looking"),
    ("need", "needs", "needed", "needing"), ("want", "wants", "wanted", "wanting"),
    ("start", "starts", "started", "starting"), ("wait", "waits", "waited", "waiting"),
    ("visit", "visits", "visited", "visiting"), ("paint", "paints", "painted", "painting"),
    ("plant", "plants", "planted", "planting"), ("count", "counts", "counted", "counting"),
    ("hunt", "hunts", "hunted", "hunting"), ("lift", "lifts", "lifted", "lifting"),
    ("test", "tests", "tested", "testing"), ("rest", "rests", "rested", "resting"),
    ("print", "prints", "printed", "printing"), ("write", "writes", "wrote", "writing"),
    ("eat", "eats", "ate", "eating"), ("sit", "sits", "sat", "sitting"),
    ("get", "gets", "got", "getting"), ("hit", "hits", "hit", "hitting"),
    ("put", "puts", "put", "putting"), ("let", "lets", "let", "letting"),
    ("cut", "cuts", "cut", "cutting"), ("meet", "meets", "met", "meeting"),
    ("see", "sees", "saw", "seeing"), ("go", "goes", "went", "going"),
    ("run", "runs", "ran", "running"), ("swim", "swims", "swam", "swimming"),
    ("sing", "sings", "sang", "singing"), ("find", "finds", "found", "finding"),
    ("make", "makes", "made", "making"), ("take", "takes", "took", "taking"),
    ("give", "gives", "gave", "giving"), ("know", "knows", "knew", "knowing"),
    ("think", "thinks", "thought", "thinking"), ("bring", "brings", "brought", "bringing"),
    ("build", "builds", "built", "building"), ("send", "sends", "sent", "sending"),
    ("hold", "holds", "held", "holding"), ("stand", "stands", "stood", "standing"),
    ("sleep", "sleeps", "slept", "sleeping"), ("keep", "keeps", "kept", "keeping"),
    ("leave", "leaves", "left", "leaving"), ("feel", "feels", "felt", "feeling"),
    ("fight", "fights", "fought", "fighting"), ("teach", "teaches", "taught", "teaching"),
    ("catch", "catches", "caught", "catching"), ("buy", "buys", "bought", "buying"),
    ("carry", "carries", "carried", "carrying"), ("study", "studies", "studied", "studying"),
    ("open", "opens", "opened", "opening"), ("listen", "listens", "listened", "listening"),
    ("follow", "follows", "followed", "following"), ("answer", "answers", "answered", "answering"),
    ("travel", "travels", "traveled", "traveling"), ("wonder", "wonders", "wondered", "wondering"),
    ("live", "lives", "lived", "living"), ("read", "reads", "read", "reading"),
    ("lead", "leads", "led", "leading"), ("wind", "winds", "wound", "winding"),
    ("close", "closes", "closed", "closing"), ("like", "likes", "liked", "liking"),
    ("love", "loves", "loved", "loving"), ("help", "helps", "helped", "helping"),
]
TRANSITIVE = {"walk", "play", "need", "want", "start", "visit", "paint", "plant", "count", "hunt",
              "lift", "test", "print", "write", "eat", "get", "hit", "put", "cut", "meet", "see",
              "find", "make", "take", "give", "know", "bring", "build", "send", "hold", "keep",
              "leave", "feel", "fight", "teach", "catch", "buy", "carry", "study", "open",
              "follow", "answer", "read", "lead", "close", "like", "love", "help"}

# POS-conditioned homograph pronunciations: word -> {tag: ARPAbet}
HOMOGRAPHS = {
    "live": {("VB", "VBP"): "L IH1 V", ("JJ",): "L AY1 V"},
    "read": {("VB", "VBP"): "R IY1 D", ("VBD", "VBN"): "R EH1 D"},
    "lead": {("VB", "VBP"): "L IY1 D", ("NN",): "L EH1 D"},
    "wind": {("NN",): "W IH1 N D", ("VB", "VBP"): "W AY1 N D"},
    "close": {("VB", "VBP"): "K L OW1 Z", ("JJ", "RB"): "K L OW1 S"},
    "wound": {("NN",): "W UW1 N D", ("VBD", "VBN"): "W AW1 N D"},
    "lives": {("VBZ",): "L IH1 V Z", ("NNS",): "L AY1 V Z"},
    "record": {("NN",): "R EH1 K ER0 D", ("VB", "VBP"): "R IH0 K AO1 R D"},
    "object": {("NN",): "AA1 B JH EH0 K T", ("VB", "VBP"): "AH0 B JH EH1 K T"},
    "present": {("NN", "JJ"): "P R EH1 Z AH0 N T", ("VB", "VBP"): "P R IY0 Z EH1 N T"},
    "tear": {("NN",): "T IH1 R", ("VB", "VBP"): "T EH1 R"},
    "bass": {("NN",): "B EY1 S"},
    "use": {("NN",): "Y UW1 S", ("VB", "VBP"): "Y UW1 Z"},
    "house": {("NN",): "HH AW1 S", ("VB", "VBP"): "HH AW1 Z"},
}


def syllabify(phones):
    """phones: list of (symbol, stress or None). Returns list of syllables (list of indices)."""
    nuclei = [i for i, (p, _) in enumerate(phones) if p in VOWELS]
    if not nuclei:
        return [list(range(len(phones)))]
    sylls = []
    start = 0
    for k, n in enumerate(nuclei):
        if k + 1 < len(nuclei):
            nxt = nuclei[k + 1]
            cons = [phones[i][0] for i in range(n + 1, nxt)]
            # maximal legal onset for the next syllable
            split = len(cons)
            for j in range(len(cons) + 1):
                onset = tuple(cons[j:])
                if len(onset) == 0 or (len(onset) == 1 and onset[0] != "ng") or onset in ONSETS:
                    split = j
                    break
            end = n + 1 + split
            sylls.append(list(range(start, end)))
            start = end
        else:
            sylls.append(list(range(start, len(phones))))
    return sylls


def to_pron(arpa):
    phones = []
    for tok in arpa.split():
        m = re.match(r"([A-Z]+)([012])?$", tok)
        phones.append((m.group(1).lower(), m.group(2)))
    out = []
    for syl in syllabify(phones):
        out.append("-".join(phones[i][0] + (phones[i][1] or "") for i in syl))
    return ".".join(out)


def main():
    cmu = {}
    for line in open(sys.argv[1], encoding="utf-8"):
        line = line.split("#")[0].strip()
        if not line:
            continue
        word, pron = line.split(" ", 1)
        if "(" in word:
            continue
        cmu.setdefault(word, pron)

    entries = OrderedDict()  # word -> list of [tags, arpa]

    def add(word, tag, arpa=None):
        if word in HOMOGRAPHS:
            for tags, pron in HOMOGRAPHS[word].items():
                if tag in tags:
                    arpa = pron
                    break
            else:
                arpa = next(iter(HOMOGRAPHS[word].values()))
        if arpa is None:
            arpa = cmu.get(word)
        if arpa is None:
            return False
        variants = entries.setdefault(word, [])
        for v in variants:
            if v[1] == arpa:
                if tag not in v[0]:
                    v[0].append(tag)
                return True
        variants.append([[tag], arpa])
        return True

    for w in DET: add(w, "DT")
    for w in PRP + PRP_OBJ: add(w, "PRP")
    for w in IN: add(w, "IN")
    add("to", "TO")
    for w in CC: add(w, "CC")
    for w in MD: add(w, "MD")
    for w in RB: add(w, "RB")
    for w in NUM: add(w, "CD")
    for w in NNP: add(w, "NNP")
    nouns = []
    for w in dict.fromkeys(NOUNS):
        if add(w, "NN"):
            pl = w + "es" if re.search(r"(s|x|ch|sh)$", w) else w + "s"
            if add(pl, "NNS"):
                nouns.append((w, pl))
    adjs = [w for w in dict.fromkeys(ADJ) if add(w, "JJ")]
    add("live", "JJ")
    add("close", "JJ")
    verbs = []
    for base, s3, past, ger in VERBS:
        ok = add(base, "VB") and add(base, "VBP") and add(s3, "VBZ") and add(past, "VBD") and add(ger, "VBG")
        if ok:
            verbs.append((base, s3, past, ger))
    for w, tags in (("lead", "NN"), ("wind", "NN"), ("wound", "NN"), ("record", "NN"), ("record", "VB"),
                    ("object", "NN"), ("object", "VB"), ("present", "NN"), ("present", "JJ"),
                    ("present", "VB"), ("tear", "NN"), ("tear", "VB"), ("bass", "NN"), ("use", "NN"),
                    ("use", "VB"), ("house", "VB"), ("lives", "NNS"), ("read", "VBN"), ("close", "RB")):
        add(w, tags)
    for w, tags in (("record", "VBP"), ("object", "VBP"), ("present", "VBP"), ("tear", "VBP"),
                    ("use", "VBP"), ("house", "VBP"), ("wind", "VBP"), ("lead", "VBP")):
        add(w, tags)

    with open(OUT / "lexicon.tsv", "w", encoding="utf-8") as f:
        f.write("# orthography\tPOS[,POS...]\tsyllabified pronunciation\n")
        f.write("# pronunciations derived from the CMU Pronouncing Dictionary (see LICENSE.cmudict)\n")
        for word in sorted(entries):
            for tags, arpa in entries[word]:
                f.write(f"{word}\t{','.join(tags)}\t{to_pron(arpa)}\n")

    rng = random.Random(1997)
    verbs_t = [v for v in verbs if v[0] in TRANSITIVE]
    subj_prp = ["i", "you", "we", "they"]
    subj_3 = ["he", "she", "it"]

    def np():
        d = rng.choice(["the", "a", "this", "every", "some", "that", "each", "no"])
        n, pl = rng.choice(nouns)
        out = [(d, "DT")]
        if rng.random() < 0.5:
            out.append((rng.choice(adjs), "JJ"))
        if d in ("some", "no", "the") and rng.random() < 0.3:
            out.append((pl, "NNS"))
        else:
            if d == "a" and out[-1][0][0] in "aeiou":
                out[0] = ("an", "DT")
            out.append((n, "NN"))
        return out

    def pp():
        return [(rng.choice(IN), "IN")] + np()

    sentences = []
    for _ in range(900):
        t = rng.randrange(12)
        s = []
        if t == 0:
            s = np() + [(rng.choice(verbs_t)[1], "VBZ")] + np()
        elif t == 1:
            s = [(rng.choice(subj_prp), "PRP"), (rng.choice(verbs_t)[0], "VBP")] + np()
        elif t == 2:
            s = [(rng.choice(subj_3), "PRP"), (rng.choice(verbs)[2], "VBD")] + pp()
        elif t == 3:
            s = [(rng.choice(subj_prp + subj_3), "PRP"), (rng.choice(MD), "MD"), (rng.choice(verbs_t)[0], "VB")] + np()
        elif t == 4:
            s = [(rng.choice(NNP), "NNP"), (rng.choice(verbs)[2], "VBD"), (rng.choice(RB), "RB")]
        elif t == 5:
            s = [(rng.choice(subj_prp), "PRP"), ("live", "VBP")] + pp()
        elif t == 6:
            s = np() + [("is", "VBZ"), (rng.choice(adjs + ["live"]), "JJ")]
        elif t == 7:
            s = [(rng.choice(subj_3), "PRP"), ("is", "VBZ"), (rng.choice(verbs)[3], "VBG")] + np()
        elif t == 8:
            s = [(rng.choice(subj_prp), "PRP"), (rng.choice(verbs_t)[0], "VBP")] + np() + [(",", ","), (rng.choice(CC), "CC")] + \
                [(rng.choice(subj_3), "PRP"), (rng.choice(verbs)[2], "VBD"), (rng.choice(RB), "RB")]
        elif t == 10:
            s = [(rng.choice(subj_prp), "PRP"), (rng.choice(["want", "need"]), "VBP"), ("to", "TO"),
                 (rng.choice(verbs_t)[0], "VB")] + np()
        elif t == 11:
            s = [(rng.choice(subj_3), "PRP"), ("has", "VBZ"), (rng.choice(["read", "wound"]), "VBN")] + np()
        else:
            s = [("a", "DT"), ("live", "JJ"), rng.choice(nouns)[0:1] + ("NN",)] + [(rng.choice(verbs_t)[1], "VBZ")] + np()
            s[2] = (s[2][0], "NN")
        if rng.random() < 0.15:
            s = [(rng.choice(NUM[1:20]), "CD")] + [(rng.choice(nouns)[1], "NNS"), (rng.choice(verbs)[2], "VBD")]
        s.append((rng.choice([".", ".", ".", "!", "?"]), "."))
        sentences.append(" ".join(f"{w}/{t}" for w, t in s))
    add("is", "VBZ")
    add("has", "VBZ")
    with open(OUT / "tagged.txt", "w", encoding="utf-8") as f:
        f.write("\n".join(sentences) + "\n")
    # rewrite lexicon to include late additions
    with open(OUT / "lexicon.tsv", "w", encoding="utf-8") as f:
        f.write("# orthography\tPOS[,POS...]\tsyllabified pronunciation\n")
        f.write("# pronunciations derived from the CMU Pronouncing Dictionary (see LICENSE.cmudict)\n")
        for word in sorted(entries):
            for tags, arpa in entries[word]:
                f.write(f"{word}\t{','.join(tags)}\t{to_pron(arpa)}\n")
    print(len(entries), "words", len(sentences), "sentences")


if __name__ == "__main__":
    main()
