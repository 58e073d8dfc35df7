import random

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

BATMAN = b"BATMAN-AND-ANNA-SING-NANANANA-AND-EAT-BANANAS"
ABAC = b"ABACABACDABDACDABDAC"

_acceptance_lines = []


def random_text(rng: random.Random, n: int, sigma: int) -> bytes:
    return bytes(65 + rng.randrange(sigma) for _ in range(n))


def fibonacci_word(n: int) -> bytes:
    a, b = b"A", b"AB"
    while len(b) < n:
        a, b = b, b + a
    return b[:n]


def substring_pattern(rng: random.Random, text: bytes, max_len: int = 6) -> bytes:
    i = rng.randrange(len(text))
    return text[i:i + rng.randint(1, min(max_len, len(text) - i))]


@pytest.fixture
def batman():
    return BATMAN


@pytest.fixture
def acceptance_report():
    return _acceptance_lines.append


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines):
            terminalreporter.write_line(line)
