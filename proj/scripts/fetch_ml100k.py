#!/usr/bin/env python3
"""Fetch MovieLens 100K ratings into data/ml-100k/u.data.

Tries the GroupLens archive first. If that is unreachable, falls back to the
copy of the same ratings bundled in the RecBole wheel (fetched through pip),
whose ml-100k.inter file is u.data plus a one-line header.
"""
import io
import pathlib
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

GROUPLENS_URL = "https://files.grouplens.org/datasets/movielens/ml-100k.zip"
RECBOLE_MEMBER = "recbole/dataset_example/ml-100k/ml-100k.inter"


def from_grouplens():
    with urllib.request.urlopen(GROUPLENS_URL, timeout=20) as resp:
        archive = zipfile.ZipFile(io.BytesIO(resp.read()))
    return archive.read("ml-100k/u.data").decode()


def from_recbole():
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "recbole==1.2.1",
             "--no-deps", "-q", "-d", tmp],
            check=True)
        wheel = next(pathlib.Path(tmp).glob("recbole-*.whl"))
        lines = zipfile.ZipFile(wheel).read(RECBOLE_MEMBER).decode().splitlines()
    return "\n".join(lines[1:]) + "\n"


def main():
    root = pathlib.Path(__file__).resolve().parent.parent
    out = root / "data" / "ml-100k" / "u.data"
    if out.exists():
        print(f"{out} already present")
        return 0
    try:
        text = from_grouplens()
    except Exception as err:  # network or archive failure
        print(f"grouplens download failed ({err}); using pip fallback", file=sys.stderr)
        text = from_recbole()
    rows = text.strip().splitlines()
    if len(rows) != 100000:
        print(f"expected 100000 ratings, got {len(rows)}", file=sys.stderr)
        return 1
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    print(f"wrote {len(rows)} ratings to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
