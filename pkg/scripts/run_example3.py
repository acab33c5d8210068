#!/usr/bin/env python3
"""Motion-only prediction: sweeps over LSTM depth/width and FC depth/width.

    python3 scripts/run_example3.py --set channel=surge
"""

import sys

from semisub_motion.cli import main

if __name__ == "__main__":
    sys.exit(main(["sweep", "--set", "example_id=3", *sys.argv[1:]]))
