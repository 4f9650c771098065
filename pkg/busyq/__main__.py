"""Allow ``python -m busyq``."""

import sys

from busyq.cli import main

if __name__ == "__main__":
    sys.exit(main())
