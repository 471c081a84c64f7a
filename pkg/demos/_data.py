"""Locate the bundled MUTAG files shared by the demos."""

import os

MUTAG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "tests", "data", "MUTAG")
