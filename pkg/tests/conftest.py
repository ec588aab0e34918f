import pytest

from simulmt.corpus import SentencePair
from simulmt.model.lexicon import LexiconModel, LexiconModelSpec, Permutation
from simulmt.prompting import PromptStructure

SPANISH = {"el": "the", "gato": "cat", "negro": "black", "duerme": "sleeps",
           "perro": "dog", "come": "eats", "pan": "bread", "y": "and"}


@pytest.fixture
def spanish():
    return dict(SPANISH)


@pytest.fixture
def structure():
    return PromptStructure()


def lexicon_model(lexicon=None, permutation="", structure=None, recall=None, **kw):
    spec = LexiconModelSpec(SPANISH if lexicon is None else lexicon,
                            Permutation.parse(permutation), **kw)
    return LexiconModel(spec, structure or PromptStructure(), recall=recall)


def pair(src: str, spec: LexiconModelSpec, id_=1) -> SentencePair:
    return SentencePair(id_, src, " ".join(spec.reference(src.split())))


_acceptance: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        doc = getattr(report, "criterion", None) or report.nodeid.split("::")[-1]
        _acceptance[report.nodeid] = (report.outcome, doc)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    doc = (item.obj.__doc__ or "").strip().splitlines()
    outcome.get_result().criterion = doc[0] if doc else None


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for outcome, doc in _acceptance.values():
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{mark}  {doc}")
