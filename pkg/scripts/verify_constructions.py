"""Run every construction check and write verify.csv into the given directory."""

import sys

from samplinglab.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "out"
    sys.exit(main(["verify", "--out", out]))
