#!/usr/bin/env python3
"""Build the demo corpora from the bundled fixtures into out/.

Equivalent to:
  biogds build --config fixtures/pipeline_config.json
"""
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent

sys.path.insert(0, str(ROOT / "src"))

from biogds.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main(["build", "--config", str(ROOT / "fixtures" / "pipeline_config.json")]))
