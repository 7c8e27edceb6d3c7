import shutil
from pathlib import Path

import pytest

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures" / "aldrovandi"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURE_DIR


@pytest.fixture
def work_fixture(tmp_path: Path) -> Path:
    """Writable copy of the fixture directory (builds write into out/)."""
    target = tmp_path / "aldrovandi"
    shutil.copytree(FIXTURE_DIR, target)
    return target


@pytest.fixture(scope="session")
def fixture_graph():
    """The materialized fixture graph, built once per session."""
    from lodstory.cli import run_build
    from lodstory.config import load_pipeline_config
    from lodstory.rdf import parse_ntriples

    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        target = Path(tmp) / "aldrovandi"
        shutil.copytree(FIXTURE_DIR, target)
        config = load_pipeline_config(target / "pipeline.json")
        assert run_build(config) == 0
        return parse_ntriples(config.output_nt.read_text(encoding="utf-8"))
