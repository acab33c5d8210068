#!/usr/bin/env python3
"""Wave-assisted prediction sweeps: time window n, wave lag w, length m.

Any config field can be overridden, e.g.:

    python3 scripts/run_example1.py --set channel=surge --set max_epochs=50
"""

import sys

from semisub_motion.cli import main

if __name__ == "__main__":
    sys.exit(main(["sweep", "--set", "example_id=1", *sys.argv[1:]]))
