"""
Corpus report from Python
=========================

Same run as ``semsketch synth`` followed by ``semsketch report``.
"""
import json
import tempfile
from pathlib import Path

from semsketch.cli import main

root = Path(tempfile.mkdtemp())
main(["synth", "--out", str(root / "corpus"), "--seed", "0", "--videos", "2"])
main(["report", str(root / "corpus"), "--out", str(root / "report")])

summary = json.loads((root / "report" / "report.json").read_text())
for k, v in summary["corpus_mean"].items():
    print(f"{k:>16}: {v:.4f}")
