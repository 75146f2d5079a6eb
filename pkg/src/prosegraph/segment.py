"""Period/abbreviation-aware sentence segmentation.

Produces (start, end) character offsets into the original text. Offsets are
trimmed to exclude surrounding whitespace so sentence spans never overlap.
"""

from __future__ import annotations

# Terminators after these tokens do not end a sentence.
ABBREVIATIONS = {
    "mr", "mrs", "ms", "dr", "prof", "st", "vs", "etc", "e.g", "i.e",
    "fig", "no", "al", "approx", "dept", "est", "u.s", "u.k",
}

_TERMINATORS = ".!?"


def segment_text(text: str) -> list[tuple[int, int]]:
    """Split text into sentence offset ranges [(start, end), ...]."""
    spans: list[tuple[int, int]] = []
    n = len(text)
    start = 0
    i = 0
    while i < n:
        ch = text[i]
        if ch in _TERMINATORS:
            # swallow runs like "?!" or "..."
            j = i
            while j + 1 < n and text[j + 1] in _TERMINATORS:
                j += 1
            if _is_boundary(text, i, j):
                spans.append((start, j + 1))
                i = j + 1
                while i < n and text[i].isspace():
                    i += 1
                start = i
                continue
            i = j + 1
        else:
            i += 1
    if start < n and text[start:].strip():
        spans.append((start, n))
    return [_trim(text, a, b) for a, b in spans if text[a:b].strip()]


def _is_boundary(text: str, i: int, j: int) -> bool:
    """True when the terminator run text[i..j] really ends a sentence."""
    if text[i] == ".":
        word = _word_before(text, i)
        if word.lower() in ABBREVIATIONS:
            return False
        # single capital initial, as in "J. Smith"
        if len(word) == 1 and word.isupper():
            return False
        # decimal number, as in "3.14"
        if i + 1 < len(text) and word[-1:].isdigit() and text[i + 1].isdigit():
            return False
    tail = text[j + 1:]
    if not tail.strip():
        return True
    stripped = tail.lstrip()
    lead = stripped[0]
    return lead.isupper() or lead.isdigit() or lead in "\"'(["


def _word_before(text: str, i: int) -> str:
    k = i
    while k > 0 and not text[k - 1].isspace():
        k -= 1
    return text[k:i]


def _trim(text: str, start: int, end: int) -> tuple[int, int]:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    return start, end
