"""Writes a small GoEmotions-format fixture (28 labels, compact CSV layout).

Texts are templated English sentences built around a few cue words per
emotion, so a bag-of-words model can learn them. Output is deterministic.
"""
import csv
import random
from pathlib import Path

LABELS = [
    "admiration", "amusement", "anger", "annoyance", "approval", "caring",
    "confusion", "curiosity", "desire", "disappointment", "disapproval",
    "disgust", "embarrassment", "excitement", "fear", "gratitude", "grief",
    "joy", "love", "nervousness", "optimism", "pride", "realization",
    "relief", "remorse", "sadness", "surprise", "neutral",
]

CUES = {
    "admiration": ["amazing", "impressive", "brilliant", "respect"],
    "amusement": ["lol", "hilarious", "funny", "haha"],
    "anger": ["furious", "rage", "hate", "damn"],
    "annoyance": ["annoying", "ugh", "irritating", "tired"],
    "approval": ["agree", "yes", "exactly", "right"],
    "caring": ["hope", "careful", "hug", "support"],
    "confusion": ["confused", "understand", "unclear", "huh"],
    "curiosity": ["wonder", "curious", "why", "how"],
    "desire": ["wish", "want", "crave", "dream"],
    "disappointment": ["disappointed", "letdown", "expected", "shame"],
    "disapproval": ["wrong", "disagree", "nope", "bad"],
    "disgust": ["gross", "disgusting", "eww", "nasty"],
    "embarrassment": ["embarrassed", "awkward", "cringe", "blush"],
    "excitement": ["excited", "cant", "wait", "hype"],
    "fear": ["scared", "afraid", "terrifying", "panic"],
    "gratitude": ["thanks", "thank", "grateful", "appreciate"],
    "grief": ["rip", "mourning", "loss", "passed"],
    "joy": ["happy", "glad", "delighted", "yay"],
    "love": ["love", "adore", "sweetheart", "heart"],
    "nervousness": ["nervous", "anxious", "jittery", "worried"],
    "optimism": ["better", "hopeful", "soon", "bright"],
    "pride": ["proud", "accomplished", "earned", "achievement"],
    "realization": ["realized", "oh", "noticed", "turns"],
    "relief": ["relieved", "phew", "finally", "whew"],
    "remorse": ["sorry", "apologize", "regret", "fault"],
    "sadness": ["sad", "cry", "depressing", "lonely"],
    "surprise": ["wow", "shocked", "unexpected", "omg"],
    "neutral": ["the", "game", "today", "post"],
}

FILLER = ["this", "that", "is", "it", "just", "really", "so", "my", "your",
          "thread", "comment", "guy", "people", "time", "thing", "here"]

WEIGHTS = [4, 3, 2, 3, 4, 2, 2, 3, 1, 2, 2, 1, 1, 2, 1, 4, 1, 2, 3, 1, 2, 1,
           1, 1, 1, 2, 2, 12]


def sentence(rng, labels):
    words = []
    for label in labels:
        words += rng.sample(CUES[LABELS[label]], 2)
    words += rng.sample(FILLER, rng.randint(3, 7))
    rng.shuffle(words)
    text = " ".join(words)
    return text[0].upper() + text[1:] + rng.choice([".", "!", "?", "..."])


def rows(rng, count, prefix):
    out = []
    for i in range(count):
        first = rng.choices(range(len(LABELS)), WEIGHTS)[0]
        labels = {first}
        if rng.random() < 0.15:
            labels.add(rng.choices(range(len(LABELS)), WEIGHTS)[0])
        labels = sorted(labels)
        out.append((sentence(rng, labels), ",".join(map(str, labels)), f"{prefix}{i:04d}"))
    return out


def write(path, data):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
        w.writerow(["text", "labels", "id"])
        w.writerows(data)


def main():
    here = Path(__file__).resolve().parent
    rng = random.Random(20240601)
    write(here / "goemotions_train.csv", rows(rng, 600, "tr"))
    write(here / "goemotions_test.csv", rows(rng, 150, "te"))
    (here / "emotions.txt").write_text("\n".join(LABELS) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
