#!/usr/bin/env python3
"""Writes the synthetic VET corpora under data/vet/ (deterministic)."""
import random
import sys
from pathlib import Path

FORMS = ["🔒", "⚠️", "🛡️", "元宇宙", "网络安全"]

SUBJECTS = ["the avatar", "a player", "the guard", "an npc", "the trader", "my friend"]
VERBS = ["opens", "locks", "checks", "reports", "scans", "shares"]
OBJECTS = ["the vault", "a portal", "the market", "a message", "the badge", "a link"]
PLACES = ["元宇宙", "the plaza", "the lobby", "the arena"]
ENDINGS = {
    "locks": "🔒",
    "reports": "⚠️",
    "checks": "🛡️",
    "scans": "🛡️",
    "opens": "🔒",
    "shares": "⚠️",
}


def sentence(rng: random.Random) -> str:
    verb = rng.choice(VERBS)
    parts = [rng.choice(SUBJECTS), verb, rng.choice(OBJECTS), "in", rng.choice(PLACES), ENDINGS[verb]]
    if rng.random() < 0.3:
        parts.append("for 网络安全")
    return " ".join(parts) + " ."


def write(path: Path, seed: int, lines: int) -> None:
    rng = random.Random(seed)
    path.write_text("\n".join(sentence(rng) for _ in range(lines)) + "\n", encoding="utf-8")


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data" / "vet"
    out.mkdir(parents=True, exist_ok=True)
    write(out / "train.txt", 20240501, 1500)
    write(out / "heldout.txt", 20240502, 200)
    (out / "expansion.txt").write_text("\n".join(FORMS) + "\n", encoding="utf-8")
    return 0


if __name__ == "__main__":
    sys.exit(main())
