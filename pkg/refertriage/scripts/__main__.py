"""
Entry point for running refertriage.scripts.run as a module.

This allows the CLI to be run as:
    python -m refertriage.scripts stats --data referrals.csv --seed 7
"""

import sys
from refertriage.scripts.run import main

if __name__ == "__main__":
    sys.exit(main())
