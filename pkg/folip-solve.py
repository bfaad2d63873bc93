#!/usr/bin/env python3
"""
folip solver
Entry point script that uses the folip package.
Solves .fol problems, computes MAP states of .mln programs and checks models.
"""

import logging
import os

from folip.cli import main

# Configure logging
logging.basicConfig(
    level=os.getenv("FOLIP_LOG_LEVEL", "INFO").upper(),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)


if __name__ == "__main__":
    main()
