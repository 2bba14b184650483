"""Run the case1b preset and write records and summary under results/."""
import sys

from mtginf.cli import main

if __name__ == "__main__":
    sys.exit(main(["run", "--preset", "case1b", "--threads", "4", *sys.argv[1:]]))
