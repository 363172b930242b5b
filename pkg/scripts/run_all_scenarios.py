"""Run every shipped scenario through the CLI and print a one-line status each."""

import argparse
import os
import sys

from bergman_hankel.lab import cli

KINDS = {"classify": "classify-weight", "kernel": "kernel-check", "carleson": "carleson-test",
         "bda": "bda-profile", "decompose": "decompose", "hankel": "hankel-verify"}


def kind_for(name):
    for prefix, kind in KINDS.items():
        if name.startswith(prefix):
            return kind
    raise SystemExit(f"cannot infer the subcommand for {name}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scenarios", default=os.path.join(os.path.dirname(__file__), "..", "scenarios"))
    ap.add_argument("--out", default="out")
    args = ap.parse_args()
    worst = 0
    for fname in sorted(os.listdir(args.scenarios)):
        if not fname.endswith(".cfg"):
            continue
        name = fname[:-4]
        code = cli.run([kind_for(name), "--config", os.path.join(args.scenarios, fname),
                        "--out", os.path.join(args.out, name)])
        worst = max(worst, code)
    sys.exit(worst)


if __name__ == "__main__":
    main()
