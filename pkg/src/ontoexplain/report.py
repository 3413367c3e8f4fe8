"""Report serialization and the plain-text rank table."""

from __future__ import annotations

import json
from pathlib import Path


def serialize(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def parse(text: str) -> dict:
    return json.loads(text)


def format_table(explanations: list[dict]) -> str:
    """Rank rows side by side: uniform concepts left, contrastive right."""
    head = ("rank", "uniform", "contrastive")
    lines = []
    for row in explanations:
        uni, con = list(row["uniform"]), list(row["contrastive"])
        height = max(len(uni), len(con), 1)
        for i in range(height):
            lines.append((
                str(row["rank"]) if i == 0 else "",
                uni[i] if i < len(uni) else ("-" if i == 0 else ""),
                con[i] if i < len(con) else ("-" if i == 0 else ""),
            ))
    widths = [max(len(r[c]) for r in [head, *lines]) for c in range(3)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    out = [fmt.format(*head).rstrip(), "  ".join("-" * w for w in widths)]
    out += [fmt.format(*r).rstrip() for r in lines]
    return "\n".join(out) + "\n"


def write_text(path, text: str):
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
