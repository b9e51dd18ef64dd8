"""Repository-level pytest configuration: import path and markers."""

import sys
from pathlib import Path

# Add the repository root to the path so tests can `import src...`
sys.path.insert(0, str(Path(__file__).parent))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: seeded end-to-end corpora (deselect with -m 'not slow')")
