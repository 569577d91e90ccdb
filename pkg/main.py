#!/usr/bin/env python3
"""
hpds-reduce
HOSVD-based model reduction and system analysis for tensor homogeneous
polynomial dynamical systems.
"""

import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
