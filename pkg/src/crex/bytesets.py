"""Byte sets as 256-bit integer masks.

Transition labels, character classes and marker sets are all sets of
bytes 0..255, stored as plain ints (bit b set = byte b in the set).
Ints are hashable and bitwise ops are cheap, which matters because the
determinizers compare and partition these sets constantly.
"""

from __future__ import annotations

EMPTY = 0
ALL = (1 << 256) - 1


def from_bytes(values) -> int:
    mask = 0
    for v in values:
        mask |= 1 << v
    return mask


def from_range(lo: int, hi: int) -> int:
    """Mask for the inclusive byte range lo..hi."""
    return ((1 << (hi - lo + 1)) - 1) << lo


def singleton(b: int) -> int:
    return 1 << b


def contains(mask: int, b: int) -> bool:
    return (mask >> b) & 1 == 1


def iter_bytes(mask: int):
    b = 0
    while mask:
        if mask & 1:
            yield b
        mask >>= 1
        b += 1


def min_byte(mask: int) -> int:
    if mask == 0:
        raise ValueError("empty byte set")
    return (mask & -mask).bit_length() - 1


def size(mask: int) -> int:
    return bin(mask).count("1")


DIGIT = from_range(0x30, 0x39)
WORD = DIGIT | from_range(0x41, 0x5A) | from_range(0x61, 0x7A) | singleton(0x5F)
SPACE = from_bytes((0x20, 0x09, 0x0A, 0x0B, 0x0C, 0x0D))
NEWLINE = singleton(0x0A)
DOT_NO_NEWLINE = ALL & ~NEWLINE

_NAMED = [
    (DIGIT, r"\d"), (ALL & ~DIGIT, r"\D"),
    (WORD, r"\w"), (ALL & ~WORD, r"\W"),
    (SPACE, r"\s"), (ALL & ~SPACE, r"\S"),
]

_META = set(b"\\.[]()|*+?{}^$-")


def escape_byte(b: int) -> str:
    if b == 0x0A:
        return r"\n"
    if b == 0x09:
        return r"\t"
    if b == 0x0D:
        return r"\r"
    if b in _META:
        return "\\" + chr(b)
    if 0x20 <= b < 0x7F:
        return chr(b)
    return f"\\x{b:02x}"


def _ranges(mask: int):
    run = []
    for b in iter_bytes(mask):
        if run and b == run[-1][1] + 1:
            run[-1] = (run[-1][0], b)
        else:
            run.append((b, b))
    return run


def format_set(mask: int) -> str:
    """Render a byte set in regex syntax (used by pretty-printing and DOT)."""
    if mask == 0:
        return "[]"
    if mask == ALL:
        return "[\\x00-\\xff]"
    if mask == DOT_NO_NEWLINE:
        return "."
    if size(mask) == 1:
        return escape_byte(min_byte(mask))
    for named, text in _NAMED:
        if mask == named:
            return text
    body, negate = mask, False
    if size(mask) > 128:
        body, negate = ALL & ~mask, True
    parts = []
    for lo, hi in _ranges(body):
        if hi - lo >= 2:
            parts.append(f"{escape_byte(lo)}-{escape_byte(hi)}")
        else:
            parts.extend(escape_byte(b) for b in range(lo, hi + 1))
    return "[" + ("^" if negate else "") + "".join(parts) + "]"


def partition(masks) -> tuple[list[int], bytes]:
    """Split 0..255 into equivalence classes under a family of masks.

    Two bytes land in the same class iff every mask contains either both
    or neither.  Returns (class masks, 256-byte table byte -> class id).
    """
    classes = [ALL]
    for mask in set(masks):
        split = []
        for cls in classes:
            inside = cls & mask
            outside = cls & ~mask
            if inside and outside:
                split.append(inside)
                split.append(outside)
            else:
                split.append(cls)
        classes = split
    classes.sort(key=min_byte)
    table = bytearray(256)
    for cid, cls in enumerate(classes):
        for b in iter_bytes(cls):
            table[b] = cid
    return classes, bytes(table)
