import sys
from pathlib import Path

# Make tests/oracles.py importable as `oracles` from any invocation directory.
sys.path.insert(0, str(Path(__file__).parent))
