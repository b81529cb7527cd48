#!/usr/bin/env python3
"""Rebuild the bundled language profiles from the seed corpora.

Run from the repo root after editing any seed file:
    PYTHONPATH=src python3 tools/build_langid_profiles.py
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from corpuskit.langid import PROFILE_FORMAT_VERSION, train_profile

DATA = Path(__file__).resolve().parents[1] / "src" / "corpuskit" / "data" / "langid"


def main() -> None:
    profiles = []
    for seed in sorted((DATA / "seeds").glob("*.txt")):
        code = seed.stem
        text = seed.read_text(encoding="utf-8")
        profile = train_profile(code, [text], note=f"seed corpus {seed.name}")
        profiles.append(profile.to_dict())
        print(f"{code}: {len(text)} chars, {len(profile.ngrams)} ngrams")
    payload = {"format_version": PROFILE_FORMAT_VERSION, "profiles": profiles}
    out = DATA / "profiles.json"
    out.write_text(json.dumps(payload, sort_keys=True, ensure_ascii=False), encoding="utf-8")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
