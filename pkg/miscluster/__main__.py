"""Main entry point for CLI"""
import sys

from miscluster.cli import main

if __name__ == "__main__":
    sys.exit(main())
