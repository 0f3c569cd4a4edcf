"""Seeded text generation for the five structural classes.

Also provides the rule-based string classifier used as the consistency
oracle: every generated string re-classifies to its own class.
"""

from __future__ import annotations

import calendar
import re
from dataclasses import dataclass, field
from importlib import resources

from ..errors import ConfigurationError

import numpy as np

CLASSES = ("word", "number", "date", "alphanumeric", "zip_code")

DEFAULT_DATE_PATTERNS = ("DD.MM.YYYY", "D.M.YY", "DD-MM-YYYY")

_LETTERS = "abcdefghijklmnopqrstuvwxyz"
_DIGITS = "0123456789"


def load_wordlist(path=None) -> tuple[str, ...]:
    """Load a one-word-per-line list; defaults to the packaged list."""
    if path is None:
        text = resources.files("hwclassify.data").joinpath("words.txt").read_text("utf-8")
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    words = []
    for line in text.splitlines():
        word = line.strip()
        if not word:
            continue
        if not re.fullmatch(r"[a-z]+", word):
            raise ConfigurationError(f"wordlist entry {word!r} is not a lowercase word")
        words.append(word)
    return tuple(words)


@dataclass(frozen=True)
class TextGenConfig:
    date_patterns: tuple[str, ...] = DEFAULT_DATE_PATTERNS
    year_range: tuple[int, int] = (1900, 2099)
    number_max_digits: int = 10
    alnum_length_range: tuple[int, int] = (4, 12)
    wordlist: tuple[str, ...] = field(default_factory=load_wordlist)

    def __post_init__(self):
        if self.alnum_length_range[0] < 2:
            raise ConfigurationError("alphanumeric strings need length >= 2")
        if not 1 <= self.number_max_digits <= 18:
            raise ConfigurationError("number_max_digits must be in [1, 18]")
        if self.year_range[0] > self.year_range[1] or self.year_range[0] < 1:
            raise ConfigurationError("invalid year_range")


def generate_text(label: str, cfg: TextGenConfig, rng_seed: int) -> str:
    """Generate one string of the requested structural class, seeded."""
    if label not in CLASSES:
        raise ValueError(f"unknown class {label!r}; expected one of {CLASSES}")
    rng = np.random.default_rng(rng_seed)
    if label == "word":
        if not cfg.wordlist:
            raise ConfigurationError("word class requires a non-empty wordlist")
        return cfg.wordlist[int(rng.integers(len(cfg.wordlist)))]
    if label == "number":
        return _gen_number(rng, cfg.number_max_digits)
    if label == "date":
        return _gen_date(rng, cfg)
    if label == "zip_code":
        return "".join(str(d) for d in rng.integers(0, 10, size=5))
    return _gen_alnum(rng, cfg.alnum_length_range)


def _gen_number(rng: np.random.Generator, max_digits: int) -> str:
    # Length 5 is reserved for zip codes so the class oracle stays
    # unambiguous; numbers draw from the remaining lengths.
    lengths = [n for n in range(1, max_digits + 1) if n != 5]
    n = lengths[int(rng.integers(len(lengths)))]
    if n == 1:
        return str(rng.integers(0, 10))
    first = str(rng.integers(1, 10))
    rest = "".join(str(d) for d in rng.integers(0, 10, size=n - 1))
    return first + rest


def _gen_date(rng: np.random.Generator, cfg: TextGenConfig) -> str:
    pattern = cfg.date_patterns[int(rng.integers(len(cfg.date_patterns)))]
    year = int(rng.integers(cfg.year_range[0], cfg.year_range[1] + 1))
    month = int(rng.integers(1, 13))
    day = int(rng.integers(1, calendar.monthrange(year, month)[1] + 1))
    return format_date(pattern, day, month, year)


def format_date(pattern: str, day: int, month: int, year: int) -> str:
    out = []
    i = 0
    while i < len(pattern):
        for token, value in (
            ("YYYY", f"{year:04d}"),
            ("YY", f"{year % 100:02d}"),
            ("DD", f"{day:02d}"),
            ("D", str(day)),
            ("MM", f"{month:02d}"),
            ("M", str(month)),
        ):
            if pattern.startswith(token, i):
                out.append(value)
                i += len(token)
                break
        else:
            out.append(pattern[i])
            i += 1
    return "".join(out)


def date_strptime_format(pattern: str) -> str:
    """Translate a date pattern to the equivalent strptime format."""
    return (
        pattern.replace("YYYY", "%Y").replace("YY", "%y").replace("DD", "%d").replace("MM", "%m")
        # Bare D/M: strptime's %d/%m accept unpadded values.
        .replace("D", "%d").replace("M", "%m")
    )


def _gen_alnum(rng: np.random.Generator, length_range: tuple[int, int]) -> str:
    n = int(rng.integers(length_range[0], length_range[1] + 1))
    alphabet = _LETTERS + _DIGITS
    chars = [alphabet[i] for i in rng.integers(0, len(alphabet), size=n)]
    # n >= 4, so forcing one letter and one digit into distinct slots
    # always leaves room.
    if not any(c in _LETTERS for c in chars):
        chars[0] = _LETTERS[int(rng.integers(26))]
    if not any(c in _DIGITS for c in chars):
        chars[-1] = _DIGITS[int(rng.integers(10))]
    return "".join(chars)


def classify_text(text: str, cfg: TextGenConfig | None = None) -> str | None:
    """Rule-based structural class of a string; None if it fits no class.

    Precedence: date, zip_code, number, alphanumeric, word. Numbers never
    have exactly five digits (see _gen_number), so zip_code taking
    priority over number keeps generation and classification consistent.
    """
    cfg = cfg or TextGenConfig(wordlist=("placeholder",))
    if _is_date(text, cfg):
        return "date"
    if re.fullmatch(r"[0-9]{5}", text):
        return "zip_code"
    if re.fullmatch(r"0|[1-9][0-9]*", text) and len(text) <= cfg.number_max_digits:
        return "number"
    if (
        re.fullmatch(r"[a-z0-9]+", text)
        and cfg.alnum_length_range[0] <= len(text) <= cfg.alnum_length_range[1]
        and any(c in _LETTERS for c in text)
        and any(c in _DIGITS for c in text)
    ):
        return "alphanumeric"
    if re.fullmatch(r"[a-z]+", text):
        return "word"
    return None


def _is_date(text: str, cfg: TextGenConfig) -> bool:
    from datetime import datetime

    for pattern in cfg.date_patterns:
        try:
            datetime.strptime(text, date_strptime_format(pattern))
            return True
        except ValueError:
            continue
    return False
