"""Train, evaluate and export a model through the command-line entry point.

Equivalent shell commands::

    graphmetric train --dataset-dir tests/data/MUTAG --dataset-name MUTAG \\
        --output model --set max_pattern_size=5 --set n_lambdas=30
    graphmetric evaluate model
    graphmetric export-subgraphs model --top 5
"""

import tempfile

from _data import MUTAG_DIR
from graphmetric.cli import main

out = tempfile.mkdtemp(prefix="graphmetric-")
main(["train", "--dataset-dir", MUTAG_DIR, "--dataset-name", "MUTAG", "--output", out,
      "--set", "max_pattern_size=5", "--set", "n_lambdas=30"])
main(["evaluate", out])
main(["export-subgraphs", out, "--top", "5"])
