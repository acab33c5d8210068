#!/usr/bin/env python3
"""Noise robustness: train on a noise-extended dataset, evaluate across
test noise levels.

    python3 scripts/run_example2.py --set max_epochs=50
"""

import sys

from semisub_motion.cli import main

if __name__ == "__main__":
    sys.exit(main(["sweep", "--set", "example_id=2", *sys.argv[1:]]))
