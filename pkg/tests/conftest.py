from pathlib import Path

import pytest

from builders import write_toy_corpus


@pytest.fixture
def toy_corpus(tmp_path) -> Path:
    """Run config of a 3-piece MIDI corpus (12 s each)."""
    return write_toy_corpus(tmp_path / "corpus")
