"""Run the case2a preset and write records and summary under results/."""
import sys

from mtginf.cli import main

if __name__ == "__main__":
    sys.exit(main(["run", "--preset", "case2a", "--threads", "4", *sys.argv[1:]]))
