import sys
import threading
from contextlib import contextmanager
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for `import oracles`

from parabench.annotation import AnnotationStore
from parabench.backends import Backend, BackendConfig, BeamParams, build_registry
from parabench.corpus import SynonymLexicon, load_pairs_tsv, load_synonyms_csv
from parabench.pipelines import PipelineSpec
from parabench.service import serve
from parabench.synonyms import ReplacementPolicy

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def fixture_pairs():
    return load_pairs_tsv(DATA_DIR / "pairs_fixture.tsv")


@pytest.fixture
def fixture_lexicon() -> SynonymLexicon:
    lexicon, _ = load_synonyms_csv(DATA_DIR / "synonyms_fixture.csv")
    return lexicon


def make_registry(translate: str = "mock:tag",
                  paraphrase: str = "mock:rotate") -> dict[str, Backend]:
    return build_registry([
        BackendConfig(id="mt", kind="translate", endpoint=translate),
        BackendConfig(id="mt-beams", kind="translate", endpoint=translate),
        BackendConfig(id="pp", kind="paraphrase", endpoint=paraphrase),
    ])


def make_specs(lexicon: SynonymLexicon,
               policy: ReplacementPolicy | None = None) -> dict[str, PipelineSpec]:
    """One spec per pipeline, wired to the ids make_registry uses."""
    policy = policy or ReplacementPolicy()
    return {
        "m1": PipelineSpec(id="m1", translate_backend="mt", paraphrase_backend="pp",
                           params=BeamParams(num_beams=4, num_return_sequences=1)),
        "m2": PipelineSpec(id="m2", translate_backend="mt",
                           lexicon=lexicon, policy=policy),
        "m3": PipelineSpec(id="m3", translate_backend="mt", paraphrase_backend="pp",
                           params=BeamParams(num_beams=4, num_return_sequences=1)),
        "m4": PipelineSpec(id="m4", translate_backend="mt",
                           paraphrase_backend="mt-beams",
                           params=BeamParams(num_beams=4, num_return_sequences=2)),
    }


@pytest.fixture
def tag_registry():
    return make_registry()


@pytest.fixture
def identity_registry():
    return make_registry("mock:identity", "mock:echo")


@contextmanager
def running_server(store: AnnotationStore, static_dir: Path | None = None):
    server = serve(store, port=0, static_dir=static_dir)
    # tight poll so shutdown() returns promptly in tests
    thread = threading.Thread(
        target=lambda: server.serve_forever(poll_interval=0.02), daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_address[1]}"
    finally:
        server.shutdown()
        server.server_close()
        thread.join(timeout=5)
