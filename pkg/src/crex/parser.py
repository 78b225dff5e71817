"""Parsing and normalization of counting regexes.

The grammar covers literals, escapes, character classes, '.', grouping
(plain and ``(?:``), alternation, concatenation and the quantifiers
``*`` ``+`` ``?`` ``{m}`` ``{m,}`` ``{m,n}``.  ``+`` and ``?`` desugar to
``{1,}`` and ``{0,1}``.  A single leading ``^`` / trailing ``$`` is
accepted and dropped (matching is whole-input, so they are no-ops);
anchors anywhere else, look-arounds, back-references and lazy or
possessive quantifiers raise :class:`UnsupportedFeatureError`.

``normalize`` rewrites a parsed tree into the form every later stage
expects: no star nodes (``S*`` becomes ``S{0,}``), no ``{1,1}``/``{0,1}``
quantifiers (unwrapped / turned into ``S|eps``), a zero minimum on any
counted node with a nullable body, and a unique position id on every
byte-class occurrence (assigned left to right).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import bytesets
from .errors import RegexSyntaxError, UnsupportedFeatureError

EPSILON = "epsilon"
CLASS = "class"
CONCAT = "concat"
UNION = "union"
STAR = "star"
COUNTED = "counted"

UNBOUNDED = None  # max_count value standing for infinity


@dataclass(frozen=True, eq=False)
class Node:
    """One regex AST node. Immutable; compare with :func:`ast_equal`."""

    kind: str
    children: tuple["Node", ...] = ()
    byte_set: int = 0
    min_count: int = 0
    max_count: int | None = None
    pos: int = 0   # position id of a class node (1-based, 0 = unassigned)
    nid: int = 0   # unique node id, assigned by normalize
    span: tuple[int, int] = field(default=(0, 0), compare=False)


def epsilon(span=(0, 0)) -> Node:
    return Node(EPSILON, span=span)


def byte_class(mask: int, span=(0, 0)) -> Node:
    return Node(CLASS, byte_set=mask, span=span)


@dataclass(frozen=True)
class RegexStats:
    sharp: int
    bound: int
    counter_count: int
    is_flat: bool
    uses_counting: bool


class _Parser:
    def __init__(self, pattern: str, dotall: bool):
        self.text = pattern
        self.pos = 0
        self.dot = bytesets.ALL if dotall else bytesets.DOT_NO_NEWLINE

    def error(self, message, offset=None):
        raise RegexSyntaxError(message, self.pos if offset is None else offset)

    def unsupported(self, message, offset=None):
        raise UnsupportedFeatureError(message, self.pos if offset is None else offset)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self) -> str:
        ch = self.text[self.pos]
        self.pos += 1
        return ch

    # -- grammar ----------------------------------------------------------

    def parse(self) -> Node:
        node = self.alternation()
        if self.pos < len(self.text):
            self.error(f"unexpected '{self.peek()}'")
        return node

    def alternation(self) -> Node:
        start = self.pos
        branches = [self.concatenation()]
        while self.peek() == "|":
            self.take()
            branches.append(self.concatenation())
        if len(branches) == 1:
            return branches[0]
        return Node(UNION, tuple(branches), span=(start, self.pos))

    def concatenation(self) -> Node:
        start = self.pos
        items = []
        while self.peek() not in ("", "|", ")"):
            items.append(self.repeatable())
        if not items:
            return epsilon((start, self.pos))
        if len(items) == 1:
            return items[0]
        return Node(CONCAT, tuple(items), span=(start, self.pos))

    def repeatable(self) -> Node:
        node = self.atom()
        while True:
            quantified = self.postfix(node)
            if quantified is None:
                return node
            node = quantified

    def postfix(self, node: Node) -> Node | None:
        ch = self.peek()
        start = self.pos
        if ch == "*":
            self.take()
            node = Node(STAR, (node,), span=(node.span[0], self.pos))
        elif ch == "+":
            self.take()
            node = Node(COUNTED, (node,), min_count=1, max_count=UNBOUNDED,
                        span=(node.span[0], self.pos))
        elif ch == "?":
            self.take()
            node = Node(COUNTED, (node,), min_count=0, max_count=1,
                        span=(node.span[0], self.pos))
        elif ch == "{":
            bounds = self.try_bounds()
            if bounds is None:
                return None  # literal '{', handled by atom()
            lo, hi = bounds
            node = Node(COUNTED, (node,), min_count=lo, max_count=hi,
                        span=(node.span[0], self.pos))
        else:
            return None
        nxt = self.peek()
        if nxt == "?":
            self.unsupported("lazy quantifiers are not supported", start)
        if nxt == "+":
            self.unsupported("possessive quantifiers are not supported", start)
        return node

    def try_bounds(self):
        """Parse '{m}', '{m,}' or '{m,n}'.  A '{' that does not open a
        well-formed quantifier is treated as a literal (return None)."""
        save = self.pos
        self.take()  # '{'
        lo = self.digits()
        if lo is None:
            self.pos = save
            return None
        hi = lo
        if self.peek() == ",":
            self.take()
            hi = self.digits()  # None = unbounded
        if self.peek() != "}":
            self.pos = save
            return None
        self.take()
        if hi is not None and lo > hi:
            self.error(f"bad repetition bounds {{{lo},{hi}}}: min > max", save)
        if hi == 0:
            self.error("bad repetition bounds: max must be positive", save)
        return lo, hi

    def digits(self):
        start = self.pos
        while self.peek().isdigit():
            self.take()
        if self.pos == start:
            return None
        return int(self.text[start:self.pos])

    def atom(self) -> Node:
        start = self.pos
        ch = self.take()
        if ch == "(":
            if self.peek() == "?":
                self.take()
                if self.peek() == ":":
                    self.take()
                else:
                    self.unsupported("only plain and (?: ) groups are supported", start)
            node = self.alternation()
            if self.peek() != ")":
                self.error("unbalanced parenthesis", start)
            self.take()
            return node
        if ch == ".":
            return byte_class(self.dot, (start, self.pos))
        if ch == "[":
            return self.char_class(start)
        if ch == "\\":
            return self.escape(start)
        if ch in ("^", "$"):
            self.unsupported(f"anchor '{ch}' inside pattern is not supported", start)
        if ch in ("*", "+", "?"):
            self.error("quantifier with nothing to repeat", start)
        if ch == "{":
            self.pos = start
            bounds = self.try_bounds()
            if bounds is not None:
                self.error("quantifier with nothing to repeat", start)
            self.take()
        return byte_class(self.literal_mask(ch, start), (start, self.pos))

    def literal_mask(self, ch: str, offset: int) -> int:
        code = ord(ch)
        if code > 0xFF:
            self.unsupported("non-byte character in pattern", offset)
        return bytesets.singleton(code)

    _SIMPLE_ESCAPES = {"n": 0x0A, "t": 0x09, "r": 0x0D, "f": 0x0C, "v": 0x0B,
                       "a": 0x07, "e": 0x1B, "0": 0x00}
    _CLASS_ESCAPES = {
        "d": bytesets.DIGIT, "D": bytesets.ALL & ~bytesets.DIGIT,
        "w": bytesets.WORD, "W": bytesets.ALL & ~bytesets.WORD,
        "s": bytesets.SPACE, "S": bytesets.ALL & ~bytesets.SPACE,
    }

    def escape_mask(self, offset: int) -> int:
        """Shared by top-level escapes and escapes inside [...]."""
        if self.pos >= len(self.text):
            self.error("dangling backslash", offset)
        ch = self.take()
        if ch in self._CLASS_ESCAPES:
            return self._CLASS_ESCAPES[ch]
        if ch in self._SIMPLE_ESCAPES:
            return bytesets.singleton(self._SIMPLE_ESCAPES[ch])
        if ch == "x":
            hexpart = self.text[self.pos:self.pos + 2]
            if len(hexpart) == 2 and all(c in "0123456789abcdefABCDEF" for c in hexpart):
                self.pos += 2
                return bytesets.singleton(int(hexpart, 16))
            self.error("malformed \\x escape", offset)
        if ch.isdigit():
            self.unsupported("back-references are not supported", offset)
        if ch in "AbBzZG":
            self.unsupported(f"anchor escape \\{ch} is not supported", offset)
        if ch.isalpha():
            self.error(f"unknown escape \\{ch}", offset)
        return self.literal_mask(ch, offset)

    def escape(self, start: int) -> Node:
        return byte_class(self.escape_mask(start), (start, self.pos))

    def char_class(self, start: int) -> Node:
        negate = False
        if self.peek() == "^":
            self.take()
            negate = True
        mask = 0
        first = True
        while True:
            if self.pos >= len(self.text):
                self.error("unterminated character class", start)
            ch = self.take()
            if ch == "]" and not first:
                break
            first = False
            if ch == "\\":
                item = self.escape_mask(self.pos - 1)
            else:
                item = self.literal_mask(ch, self.pos - 1)
            # possible range: only from single-byte items
            if (self.peek() == "-" and self.text[self.pos + 1:self.pos + 2] not in ("", "]")
                    and bytesets.size(item) == 1):
                self.take()
                rs = self.pos
                ch2 = self.take()
                hi_item = self.escape_mask(rs) if ch2 == "\\" else self.literal_mask(ch2, rs)
                if bytesets.size(hi_item) != 1:
                    self.error("bad character range", rs)
                lo_b, hi_b = bytesets.min_byte(item), bytesets.min_byte(hi_item)
                if lo_b > hi_b:
                    self.error("reversed character range", rs)
                item = bytesets.from_range(lo_b, hi_b)
            mask |= item
        if negate:
            mask = bytesets.ALL & ~mask
        if mask == 0:
            self.error("empty character class", start)
        return byte_class(mask, (start, self.pos))


def _strip_anchors(pattern: str) -> str:
    if pattern.startswith("^"):
        pattern = pattern[1:]
    if pattern.endswith("$"):
        backslashes = len(pattern) - 1 - len(pattern[:-1].rstrip("\\"))
        if backslashes % 2 == 0:
            pattern = pattern[:-1]
    return pattern


def parse(pattern: str, dotall: bool = False) -> Node:
    """Parse a pattern into a raw AST (not yet normalized)."""
    return _Parser(_strip_anchors(pattern), dotall).parse()


# -- analysis over raw or normalized trees --------------------------------

def nullable(node: Node) -> bool:
    """True iff the empty word belongs to the node's language."""
    if node.kind == EPSILON:
        return True
    if node.kind == CLASS:
        return False
    if node.kind == CONCAT:
        return all(nullable(c) for c in node.children)
    if node.kind == UNION:
        return any(nullable(c) for c in node.children)
    if node.kind == STAR:
        return True
    return node.min_count == 0 or nullable(node.children[0])


def sharp(node: Node) -> int:
    """Number of byte-class occurrences (states of the CA minus one)."""
    if node.kind == CLASS:
        return 1
    return sum(sharp(c) for c in node.children)


def has_counter(node: Node) -> bool:
    """A counted node gets a runtime counter only when the bounds make one
    observable: pure loops {0,} and {1,} need no counter, and neither does
    a body without any byte occurrence."""
    if node.kind != COUNTED:
        return False
    if node.max_count is UNBOUNDED and node.min_count <= 1:
        return False
    return sharp(node.children[0]) > 0


def counted_nodes(node: Node, out=None):
    if out is None:
        out = []
    if node.kind == COUNTED and has_counter(node):
        out.append(node)
    for c in node.children:
        counted_nodes(c, out)
    return out


def walk(node: Node):
    yield node
    for c in node.children:
        yield from walk(c)


class _Normalizer:
    def __init__(self):
        self.next_nid = 1
        self.next_pos = 1

    def run(self, node: Node) -> Node:
        node = self.rewrite(node)
        return self.number(node)

    def rewrite(self, node: Node) -> Node:
        children = tuple(self.rewrite(c) for c in node.children)
        if node.kind == CLASS or node.kind == EPSILON:
            return node
        if node.kind == CONCAT:
            flat = []
            for c in children:
                if c.kind == CONCAT:
                    flat.extend(c.children)
                elif c.kind != EPSILON:
                    flat.append(c)
            if not flat:
                return epsilon(node.span)
            if len(flat) == 1:
                return flat[0]
            return replace(node, children=tuple(flat))
        if node.kind == UNION:
            return replace(node, children=children)
        if node.kind == STAR:
            return Node(COUNTED, children, min_count=0, max_count=UNBOUNDED,
                        span=node.span)
        # counted
        body = children[0]
        lo, hi = node.min_count, node.max_count
        if body.kind == EPSILON:
            return body
        if (lo, hi) == (1, 1):
            return body
        if (lo, hi) == (0, 1):
            return Node(UNION, (body, epsilon(node.span)), span=node.span)
        if lo > 0 and nullable(body):
            lo = 0
        return Node(COUNTED, (body,), min_count=lo, max_count=hi, span=node.span)

    def number(self, node: Node) -> Node:
        nid = self.next_nid
        self.next_nid += 1
        pos = node.pos
        if node.kind == CLASS:
            pos = self.next_pos
            self.next_pos += 1
        children = tuple(self.number(c) for c in node.children)
        return replace(node, children=children, nid=nid, pos=pos)


def normalize(node: Node) -> Node:
    """Rewrite into normal form and assign node/position ids."""
    return _Normalizer().run(node)


def stats(node: Node) -> RegexStats:
    """Structural statistics of a normalized AST."""
    counters = counted_nodes(node)
    bound = 0
    for n in walk(node):
        if n.kind == COUNTED:
            bound = max(bound, n.min_count, n.max_count or 0)
    flat = True
    for c in counters:
        if any(has_counter(inner) for inner in walk(c.children[0])):
            flat = False
    return RegexStats(sharp=sharp(node), bound=bound,
                      counter_count=len(counters), is_flat=flat,
                      uses_counting=len(counters) > 0)


def alphabet_mask(node: Node) -> int:
    mask = 0
    for n in walk(node):
        if n.kind == CLASS:
            mask |= n.byte_set
    return mask


def ast_equal(a: Node, b: Node) -> bool:
    """Structural equality, ignoring spans and assigned ids."""
    if (a.kind, a.byte_set, a.min_count, a.max_count) != \
            (b.kind, b.byte_set, b.min_count, b.max_count):
        return False
    if len(a.children) != len(b.children):
        return False
    return all(ast_equal(x, y) for x, y in zip(a.children, b.children))


_NEEDS_GROUP_IN_CONCAT = (UNION,)


def pretty(node: Node) -> str:
    """Render back to pattern text; reparsing yields a structurally
    identical tree."""
    if node.kind == EPSILON:
        return ""
    if node.kind == CLASS:
        return bytesets.format_set(node.byte_set)
    if node.kind == UNION:
        return "|".join(pretty(c) for c in node.children)
    if node.kind == CONCAT:
        parts = []
        for c in node.children:
            text = pretty(c)
            if c.kind in _NEEDS_GROUP_IN_CONCAT or c.kind == EPSILON:
                text = "(" + text + ")"
            parts.append(text)
        return "".join(parts)
    # star / counted
    body = node.children[0]
    text = pretty(body)
    if body.kind != CLASS:
        text = "(" + text + ")"
    if node.kind == STAR:
        return text + "*"
    lo, hi = node.min_count, node.max_count
    if (lo, hi) == (0, 1):
        return text + "?"
    if (lo, hi) == (1, UNBOUNDED):
        return text + "+"
    if hi is UNBOUNDED:
        return text + "{%d,}" % lo
    if lo == hi:
        return text + "{%d}" % lo
    return text + "{%d,%d}" % (lo, hi)
