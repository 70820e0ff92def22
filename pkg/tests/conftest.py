import os
import random
from pathlib import Path

import pytest

from tsetlin_news.data import ArticleRecord, write_corpus
from tsetlin_news.machine import BooleanDocument

WALL_SENTENCE = "Building a wall on the U.S-Mexico border will take literally years."

_COMMON = ("report state people government official week said year house court "
           "president city country plan group").split()
_FAKE = "shocking hoax secret exposed miracle banned conspiracy viral leaked cover".split()
_REAL = "committee budget senate analysis percent hearing statement data filing quarter".split()


def synthetic_records(n: int = 160, seed: int = 1, fake_every: int = 3) -> list[ArticleRecord]:
    """Articles whose class is signalled by a few class-specific words."""
    rng = random.Random(seed)
    out = []
    for i in range(n):
        fake = i % fake_every == 0
        words = rng.sample(_COMMON, 6) + rng.sample(_FAKE if fake else _REAL, 3) \
            + rng.sample(_FAKE + _REAL, 1)
        rng.shuffle(words)
        out.append(ArticleRecord(f"doc{i:04d}", f"News about {words[0]}", " ".join(words),
                                 int(fake)))
    return out


@pytest.fixture
def synthetic_csv(tmp_path) -> Path:
    path = tmp_path / "corpus.csv"
    write_corpus(path, synthetic_records())
    return path


def xor_docs() -> list[BooleanDocument]:
    return [BooleanDocument.from_dense([a, b], label=a ^ b) for a in (0, 1) for b in (0, 1)]


def dataset_dir() -> Path | None:
    d = os.environ.get("FAKENEWSNET_DIR")
    return Path(d) if d else None


# ---- acceptance summary -------------------------------------------------

_CRITERIA: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    num, title = marker
    if report.when == "call" or report.outcome != "passed":
        if hasattr(report, "wasxfail"):
            # a pinned check that is known not to hold still reads as a failure
            status = ("FAIL", f"known: {report.wasxfail.removeprefix('reason: ')}")
        elif report.skipped:
            reason = report.longrepr[2] if isinstance(report.longrepr, tuple) else ""
            status = ("SKIP", reason.removeprefix("Skipped: "))
        elif report.failed:
            status = ("FAIL", report.head_line or "")
        else:
            status = ("PASS", "")
        prev = _CRITERIA.get(num)
        # one line per criterion; any failure wins over other outcomes
        if prev is None or status[0] == "FAIL" or (prev[1] == "SKIP" and status[0] == "PASS"):
            _CRITERIA[num] = (title, *status)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep.criterion = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, status, detail = _CRITERIA[num]
        line = f"criterion {num}: {status}  {title}"
        if detail:
            line += f"  ({detail})"
        tr.write_line(line)
