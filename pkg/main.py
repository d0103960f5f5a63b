"""Development entrypoint for running the command-line interface."""

import sys

from minmax.cli import main


if __name__ == "__main__":
    sys.exit(main())
