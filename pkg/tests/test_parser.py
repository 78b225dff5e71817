import random

import pytest

from crex import bytesets
from crex import parser as P
from crex.errors import RegexSyntaxError, UnsupportedFeatureError
from crex.oracle import ast_match

from helpers import random_flat_pattern


def kinds(node):
    return (node.kind, tuple(kinds(c) for c in node.children))


def test_figure_regex_shape():
    ast = P.parse("((a|b)b){3,8}")
    assert ast.kind == P.COUNTED
    assert (ast.min_count, ast.max_count) == (3, 8)
    inner = ast.children[0]
    assert inner.kind == P.CONCAT
    assert inner.children[0].kind == P.UNION
    assert inner.children[1].byte_set == bytesets.singleton(ord("b"))


def test_empty_pattern_is_epsilon():
    assert P.parse("").kind == P.EPSILON


def test_min_greater_than_max_rejected():
    with pytest.raises(RegexSyntaxError):
        P.parse("(ab){2,1}")


def test_zero_max_rejected():
    with pytest.raises(RegexSyntaxError):
        P.parse("a{0}")


def test_unsupported_features_distinct_from_syntax():
    for pattern in ["a(?=b)", "(a)\\1", "a*?", "a*+", "a^b", "a\\bb"]:
        with pytest.raises(UnsupportedFeatureError):
            P.parse(pattern)
    for pattern in ["(a", "a)", "[a", "a{2,1}", "*a", "\\q"]:
        with pytest.raises(RegexSyntaxError):
            P.parse(pattern)


def test_anchors_at_edges_are_stripped():
    assert P.ast_equal(P.parse("^ab$"), P.parse("ab"))
    # escaped dollar is a literal
    ast = P.parse("a\\$")
    assert ast.children[1].byte_set == bytesets.singleton(ord("$"))


def test_desugaring():
    assert P.ast_equal(P.parse("a+"), P.parse("a{1,}"))
    assert P.ast_equal(P.parse("a?"), P.parse("a{0,1}"))
    star = P.parse("a*")
    assert star.kind == P.STAR


def test_literal_brace():
    ast = P.parse("a{b")
    assert ast.kind == P.CONCAT
    assert ast.children[1].byte_set == bytesets.singleton(ord("{"))


def test_classes_and_escapes():
    assert P.parse("\\d").byte_set == bytesets.DIGIT
    assert P.parse("[0-9]").byte_set == bytesets.DIGIT
    assert P.parse("[^\\n]").byte_set == bytesets.DOT_NO_NEWLINE
    assert P.parse(".").byte_set == bytesets.DOT_NO_NEWLINE
    assert P.parse(".", dotall=True).byte_set == bytesets.ALL
    assert P.parse("\\x41").byte_set == bytesets.singleton(0x41)
    assert P.parse("[-a]").byte_set == bytesets.from_bytes(b"-a")
    assert P.parse("[a-c-]").byte_set == bytesets.from_bytes(b"abc-")


def test_noncapturing_group():
    assert P.ast_equal(P.parse("(?:ab)+"), P.parse("(ab)+"))


def test_normalize_star_becomes_unbounded_counted():
    ast = P.normalize(P.parse("a*"))
    assert ast.kind == P.COUNTED
    assert (ast.min_count, ast.max_count) == (0, None)


def test_normalize_nullable_body_forces_zero_min():
    ast = P.normalize(P.parse("(a|){2,5}"))
    assert ast.min_count == 0
    assert ast.max_count == 5


def test_normalize_unwraps_trivial_bounds():
    assert P.normalize(P.parse("a{1,1}")).kind == P.CLASS
    opt = P.normalize(P.parse("a{0,1}"))
    assert opt.kind == P.UNION
    assert opt.children[1].kind == P.EPSILON


def test_normalize_already_normal():
    ast = P.normalize(P.parse("a{2,5}"))
    assert (ast.min_count, ast.max_count) == (2, 5)


def test_positions_assigned_left_to_right():
    ast = P.normalize(P.parse("ab(c|d)"))
    positions = [n.pos for n in P.walk(ast) if n.kind == P.CLASS]
    assert positions == [1, 2, 3, 4]


def test_stats_examples():
    st = P.stats(P.normalize(P.parse("(ab){10}")))
    assert st.sharp == 2
    assert len("(ab){10}") == 8
    assert P.stats(P.normalize(P.parse("(ab){50,100}"))).bound == 100
    assert P.stats(P.normalize(P.parse("(a{2}b){3}"))).is_flat is False
    assert P.stats(P.normalize(P.parse("(a+b){3}"))).is_flat is True
    assert P.stats(P.normalize(P.parse("a*"))).uses_counting is False
    assert P.stats(P.normalize(P.parse("a{3}"))).uses_counting is True


def test_nullable():
    assert P.nullable(P.normalize(P.parse("a{0,3}"))) is True
    assert P.nullable(P.normalize(P.parse("ab"))) is False
    ast = P.normalize(P.parse("(a|)b{1,2}"))
    assert P.nullable(ast) is False
    assert ast_match(ast, b"") is False


def test_pretty_roundtrip_fixed():
    for pattern in ["((a|b)b){3,8}", "a+b?c*", "[a-z]{2,}", "\\d{4}-\\d{2}",
                    "(a|)(b|c)*", "a{3}", "x{2,5}", "(?:ab|c)+d"]:
        first = P.parse(pattern)
        again = P.parse(P.pretty(first))
        assert P.ast_equal(first, again), pattern


def test_pretty_roundtrip_random():
    rng = random.Random(4242)
    for _ in range(300):
        pattern = random_flat_pattern(rng)
        try:
            first = P.parse(pattern)
        except Exception:
            continue
        again = P.parse(P.pretty(first))
        assert P.ast_equal(first, again), pattern


def test_normalize_preserves_language():
    rng = random.Random(515)
    words = [bytes(w) for w in [b"", b"a", b"b", b"ab", b"ba", b"aab",
                                b"abab", b"aaa", b"bbb", b"abc"]]
    for _ in range(150):
        pattern = random_flat_pattern(rng, max_bound=4)
        try:
            raw = P.parse(pattern)
        except Exception:
            continue
        norm = P.normalize(raw)
        for word in words:
            assert ast_match(raw, word) == ast_match(norm, word), \
                (pattern, word)
