"""
Main entry point for the GSV Mode Share package when executed with -m flag.
"""
import sys

from gsv_mode_share import main

if __name__ == "__main__":
    sys.exit(main())
