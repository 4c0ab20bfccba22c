"""Shared fixtures: canonical lexicon, stub detector/backend, acceptance lines."""

import pytest

from polifilter.langdetect import LangGuess
from polifilter.lexicon import load_lexicon
from polifilter.records import MetadataRecord
from polifilter.softclf import Classification, TransportError

TABLE1_TSV = (
    "keyword\tscore\n"
    "politi*\t1\n"
    "*politik\t1\n"
    "bürgerkrieg\t0.6\n"
    "policy\t0.4\n"
)


@pytest.fixture
def table1_lexicon():
    return load_lexicon(TABLE1_TSV)


class StubDetector:
    """Always answers with a fixed guess; counts invocations."""

    def __init__(self, code="en", confidence=1.0):
        self.code = code
        self.confidence = confidence
        self.calls = 0

    def detect(self, text):
        self.calls += 1
        if self.code is None:
            return None
        return LangGuess(code=self.code, confidence=self.confidence)


class StubBackend:
    """Fixed-label classifier; counts invocations; can simulate outages."""

    def __init__(self, label="politics", score=0.9, fail=False):
        self.label = label
        self.score = score
        self.fail = fail
        self.calls = 0

    def classify(self, input):
        self.calls += 1
        if self.fail:
            raise TransportError("stub backend down")
        return Classification(label=self.label, score=self.score)


@pytest.fixture
def stub_detector():
    return StubDetector()


@pytest.fixture
def stub_backend():
    return StubBackend()


def make_record(**overrides):
    fields = {"id": "r1", "title": "Untitled", "doctype": "article"}
    fields.update(overrides)
    return MetadataRecord(**fields)


@pytest.fixture
def record_factory():
    return make_record


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(name): a primary acceptance criterion"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        report.acceptance_name = marker.args[0]


def pytest_runtest_logreport(report):
    name = getattr(report, "acceptance_name", None)
    if name is None:
        return
    if report.failed:
        print(f"\nACCEPTANCE FAIL: {name}", flush=True)
    elif report.skipped:
        print(f"\nACCEPTANCE SKIP: {name}", flush=True)
    elif report.when == "call" and report.passed:
        print(f"\nACCEPTANCE PASS: {name}", flush=True)
