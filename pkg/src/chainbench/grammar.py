"""Answer grammars: parse free-form model output into typed answers.

Each task has one grammar id.  ``parse`` finds the *last* well-formed answer
block in the text (reasoning before the answer is ignored) and ``normalize``
renders a parsed value back to a canonical string that parses to the same
value.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Union

__all__ = [
    "ParseError",
    "MoveSeq",
    "CoordList",
    "GridOfDigits",
    "GridOfMarks",
    "GridOfPairs",
    "Expression",
    "KeyValueList",
    "SegmentList",
    "NodeList",
    "WordPlacements",
    "Scalar",
    "Decision",
    "GRAMMARS",
    "parse",
    "normalize",
    "eval_expression",
]


class ParseError(ValueError):
    """No well-formed answer block; ``offset`` is a UTF-8 byte offset."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


# ---------------------------------------------------------------------------
# answer variants

MOVES = ("up", "down", "left", "right")
DIRECTIONS8 = ("N", "NE", "E", "SE", "S", "SW", "W", "NW")

Coord = tuple[int, int]


@dataclass(frozen=True)
class MoveSeq:
    moves: tuple[str, ...]


@dataclass(frozen=True)
class CoordList:
    coords: tuple[Coord, ...]


@dataclass(frozen=True)
class GridOfDigits:
    rows: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class GridOfMarks:
    rows: tuple[tuple[bool, ...], ...]


@dataclass(frozen=True)
class GridOfPairs:
    """Rows of (letter, number) cells, e.g. ``B3|A1|C2``."""

    rows: tuple[tuple[tuple[str, int], ...], ...]


# expression tree: int leaf, or (op, left, right) with op in "+-×÷"
ExprNode = Union[int, tuple]


@dataclass(frozen=True)
class Expression:
    tree: ExprNode


@dataclass(frozen=True)
class KeyValueList:
    items: tuple[tuple, ...]


@dataclass(frozen=True)
class SegmentList:
    segments: tuple[tuple[Coord, Coord], ...]


@dataclass(frozen=True)
class NodeList:
    items: tuple


@dataclass(frozen=True)
class WordPlacements:
    items: tuple[tuple[str, str, Coord], ...]


@dataclass(frozen=True)
class Scalar:
    value: Fraction


@dataclass(frozen=True)
class Decision:
    # "Yes", "No", or a NodeList witness
    value: Union[str, NodeList]


ParsedAnswer = Union[
    MoveSeq, CoordList, GridOfDigits, GridOfMarks, GridOfPairs, Expression,
    KeyValueList, SegmentList, NodeList, WordPlacements, Scalar, Decision,
]


# ---------------------------------------------------------------------------
# grammar table


@dataclass(frozen=True)
class Grammar:
    id: str
    variant: type
    style: str
    convention: str
    ordered: bool = True


def _g(id, variant, style, convention, ordered=True):
    return Grammar(id, variant, style, convention, ordered)


GRAMMARS: dict[str, Grammar] = {g.id: g for g in [
    # algorithm
    _g("points24", Expression, "expr", "integers combined with + - × ÷ and parentheses"),
    _g("buy_sell_stock", Scalar, "scalar", "integer"),
    _g("container_most_water", Scalar, "scalar", "integer"),
    _g("hills_valleys", Scalar, "scalar", "integer"),
    _g("cryptomath", KeyValueList, "kv_letters", '["A"=5, "B"=3, ...] letter to digit'),
    _g("h_index", Scalar, "scalar", "integer"),
    _g("largest_rectangle", Scalar, "scalar", "integer"),
    _g("lis", Scalar, "scalar", "integer"),
    _g("trapping_rain_water", Scalar, "scalar", "integer"),
    # graph
    _g("eulerian_cycle", Decision, "decision_list", "'No' or closed vertex walk [0,1,2,0]"),
    _g("eulerian_path", Decision, "decision_list", "'No' or vertex walk [0,1,2]"),
    _g("graph_isomorphism", Decision, "yes_no", "'Yes' or 'No'"),
    _g("hamiltonian_cycle", Decision, "decision_list", "'No' or vertex cycle [0,1,2,3]"),
    _g("hamiltonian_path", Decision, "decision_list", "'No' or vertex path from the start vertex"),
    _g("max_flow", Scalar, "scalar", "integer"),
    _g("shortest_distance", Scalar, "scalar", "integer or decimal"),
    _g("topological_sort", NodeList, "nodelist", "vertex order [0,1,2]"),
    # puzzle
    _g("aquarium", CoordList, "coords_aquarium", "(x, y), (0,0) top-left, x right, y down", False),
    _g("binairo", GridOfDigits, "rows_space", "rows of 0/1 separated by spaces"),
    _g("bridges", KeyValueList, "bridges", "(x1,y1)-(x2,y2):count, (0,0) top-left, x right, y down"),
    _g("calcudoku", GridOfDigits, "nested", "[[row1], [row2], ...]"),
    _g("campsite", CoordList, "coords_campsite", "[row, column] 1-based", False),
    _g("eulero", GridOfPairs, "eulero", "rows of letter-number pairs separated by |"),
    _g("futoshiki", GridOfDigits, "nested", "[[row1], [row2], ...]"),
    _g("hitori", CoordList, "coords_hitori", "{(row, column), ...} 0-based", False),
    _g("kakuro", KeyValueList, "kv_cells", "(row,column):value 0-based"),
    _g("kukurasu", GridOfDigits, "nested", "[[row1], ...] with 1 = black"),
    _g("nonogram", GridOfMarks, "marks", "rows of X (filled) and . (empty)"),
    _g("numbrix", GridOfDigits, "pipes", "|a|b|c| rows"),
    _g("shingoki", SegmentList, "segments", "(r1,c1)-(r2,c2) unit segments between grid points"),
    _g("skyscrapers", GridOfDigits, "nested", "[[row1], [row2], ...]"),
    _g("snake", CoordList, "coords_snake", "(row,col) sequence from S to E, 0-based"),
    _g("sudoku", GridOfDigits, "flat81", "81 digits in row-major order"),
    _g("tapa", CoordList, "coords_tapa", "(row,column) black cells, 0-based", False),
    _g("word_ladder", NodeList, "words", '["word1", "word2", ...]'),
    _g("wordsearch", WordPlacements, "wordsearch", "WORD DIRECTION @ (x, y), x = column, y = row, 1-based"),
    # game
    _g("maze", MoveSeq, "moves", "up/down/left/right moves of the walker"),
    _g("minesweeper", CoordList, "coords_minesweeper", "(row,col) mine cells, 0-based", False),
    _g("nibbles", MoveSeq, "moves", "up/down/left/right moves of the snake head"),
    _g("sliding_puzzle", MoveSeq, "moves", "direction the moved tile travels into the blank"),
    _g("sokoban", MoveSeq, "moves", "up/down/left/right moves of the player"),
    _g("hanoi", CoordList, "coords_hanoi", "(disk, destination peg) pairs"),
]}


# ---------------------------------------------------------------------------
# extraction helpers

_MARKER_RE = re.compile(
    r"(?i)(final\s+answer\s*[:：]?|answer\s*[:：]|<answer>|\\boxed\{)"
)


def _byte_offset(text: str, i: int) -> int:
    return len(text[:i].encode("utf-8"))


def _regions(text: str) -> list[tuple[str, int, bool]]:
    """Search regions, most preferred first: text after the last answer
    marker, then the whole text.  The flag tells whether a marker introduced it."""
    regions = []
    last = None
    for m in _MARKER_RE.finditer(text):
        last = m
    if last is not None:
        regions.append((text[last.end():], last.end(), True))
    regions.append((text, 0, False))
    return regions


def _groups(pattern: re.Pattern, text: str, gap: re.Pattern) -> list[list[re.Match]]:
    """Matches of ``pattern`` grouped into runs separated only by ``gap`` text."""
    groups: list[list[re.Match]] = []
    prev_end = None
    for m in pattern.finditer(text):
        if prev_end is not None and gap.fullmatch(text, prev_end, m.start()):
            groups[-1].append(m)
        else:
            groups.append([m])
        prev_end = m.end()
    return groups


def _line_blocks(text: str, line_ok: Callable[[str], bool]) -> list[list[tuple[str, int]]]:
    """Maximal runs of consecutive lines accepted by ``line_ok``."""
    blocks: list[list[tuple[str, int]]] = []
    pos = 0
    current: list[tuple[str, int]] = []
    for line in text.split("\n"):
        if line.strip() and line_ok(line):
            current.append((line, pos))
        else:
            if current:
                blocks.append(current)
            current = []
        pos += len(line) + 1
    if current:
        blocks.append(current)
    return blocks


class _Fail(Exception):
    def __init__(self, offset: int):
        self.offset = offset


def _last_good(candidates: list, build: Callable, offset_of: Callable) -> object:
    """Try candidates from last to first; return the first well-formed one."""
    deepest = None
    for cand in reversed(candidates):
        try:
            return build(cand)
        except (ValueError, _Fail):
            off = offset_of(cand)
            if deepest is None or off > deepest:
                deepest = off
    raise _Fail(deepest if deepest is not None else 0)


def _rect(rows: list[list]) -> tuple[tuple, ...]:
    if not rows or not rows[0]:
        raise ValueError("empty grid")
    w = len(rows[0])
    if any(len(r) != w for r in rows):
        raise ValueError("ragged grid")
    return tuple(tuple(r) for r in rows)


# ---------------------------------------------------------------------------
# per-style parsers; each takes a region string and returns a ParsedAnswer

_GAP_MOVES = re.compile(r"[\s,;]*(?:(?:->|→|=>)[\s,;]*)*")
_MOVE_RE = re.compile(r"(?i)\b(up|down|left|right)\b")


def _p_moves(text: str, g: Grammar) -> MoveSeq:
    groups = _groups(_MOVE_RE, text, _GAP_MOVES)
    if not groups:
        raise _Fail(0)
    last = groups[-1]
    return MoveSeq(tuple(m.group(1).lower() for m in last))


_PAIR_RE = re.compile(r"[\(\[]\s*(-?\d+)\s*,\s*(-?\d+)\s*[\)\]]")
_GAP_PAIRS = re.compile(r"[\s,;\[\]\{\}]*")


def _p_coords(text: str, g: Grammar) -> CoordList:
    groups = _groups(_PAIR_RE, text, _GAP_PAIRS)
    if not groups:
        if re.search(r"(\[\s*\]|\{\s*\}|\bnone\b)", text, re.I):
            return CoordList(())
        raise _Fail(0)
    coords = tuple((int(m.group(1)), int(m.group(2))) for m in groups[-1])
    if not g.ordered:
        if len(set(coords)) != len(coords):
            raise _Fail(groups[-1][0].start())
        coords = tuple(sorted(coords))
    return CoordList(coords)


_NESTED_RE = re.compile(r"\[\s*\[[-\d\s,\[\]]*\]\s*\]")
_ROW_RE = re.compile(r"\[([^\[\]]*)\]")


def _p_nested(text: str, g: Grammar) -> GridOfDigits:
    cands = list(_NESTED_RE.finditer(text))

    def build(m):
        rows = []
        for r in _ROW_RE.finditer(m.group(0)):
            cells = [c for c in re.split(r"[\s,]+", r.group(1).strip()) if c]
            rows.append([int(c) for c in cells])
        return GridOfDigits(_rect(rows))

    return _last_good(cands, build, lambda m: m.start())


_SPACE_ROW = re.compile(r"^\s*-?\d+(?:[ \t,]+-?\d+)*[ \t,]*\\{0,2}\s*$")


def _p_rows_space(text: str, g: Grammar) -> GridOfDigits:
    blocks = _line_blocks(text, lambda ln: bool(_SPACE_ROW.match(ln)))

    def build(block):
        rows = [[int(t) for t in re.findall(r"-?\d+", ln)] for ln, _ in block]
        if len(rows) < 2:
            raise ValueError("need at least two rows")
        return GridOfDigits(_rect(rows))

    return _last_good(blocks, build, lambda b: b[0][1])


_INT_RE = re.compile(r"\d+")
_GAP_FLAT = re.compile(r"[\s,&\\\[\]|;]*(?:\\\\)?[\s,&\\\[\]|;]*")


def _p_flat81(text: str, g: Grammar) -> GridOfDigits:
    groups = _groups(_INT_RE, text, _GAP_FLAT)

    def build(grp):
        vals = [int(m.group(0)) for m in grp]
        if len(vals) != 81:
            raise ValueError("expected 81 integers")
        return GridOfDigits(tuple(tuple(vals[r * 9:(r + 1) * 9]) for r in range(9)))

    return _last_good(groups, build, lambda grp: grp[0].start())


_PIPE_ROW = re.compile(r"^\s*\|?\s*\d+(?:\s*\|\s*\d+)+\s*\|?\s*\\{0,2}\s*$")


def _p_pipes(text: str, g: Grammar) -> GridOfDigits:
    blocks = _line_blocks(text, lambda ln: bool(_PIPE_ROW.match(ln)))

    def build(block):
        return GridOfDigits(_rect([[int(t) for t in re.findall(r"\d+", ln)] for ln, _ in block]))

    return _last_good(blocks, build, lambda b: b[0][1])


_MARK_ROW = re.compile(r"^\s*(?:[Xx.]\s?)+\\{0,2}\s*$")


def _p_marks(text: str, g: Grammar) -> GridOfMarks:
    blocks = _line_blocks(text, lambda ln: bool(_MARK_ROW.match(ln)))

    def build(block):
        rows = []
        for ln, _ in block:
            cells = [c for c in ln if c in "Xx."]
            rows.append([c != "." for c in cells])
        if len(rows) < 2:
            raise ValueError("need at least two rows")
        return GridOfMarks(_rect(rows))

    return _last_good(blocks, build, lambda b: b[0][1])


_EULERO_ROW = re.compile(r"^\s*[A-Za-z]\d+(?:\s*\|\s*[A-Za-z]\d+)*\s*\|?\s*$")


def _p_eulero(text: str, g: Grammar) -> GridOfPairs:
    text = re.sub(r"\s*\\\\\s*", "\n", text)
    blocks = _line_blocks(text, lambda ln: bool(_EULERO_ROW.match(ln)))

    def build(block):
        rows = []
        for ln, _ in block:
            rows.append([(m.group(1).upper(), int(m.group(2)))
                         for m in re.finditer(r"([A-Za-z])(\d+)", ln)])
        return GridOfPairs(_rect(rows))

    return _last_good(blocks, build, lambda b: b[0][1])


_KV_LETTER = re.compile(r"[\"']?([A-Za-z])[\"']?\s*[=:]\s*(\d+)")
_GAP_KV = re.compile(r"[\s,;\[\]\{\}]*")


def _p_kv_letters(text: str, g: Grammar) -> KeyValueList:
    groups = _groups(_KV_LETTER, text, _GAP_KV)

    def build(grp):
        items = [(m.group(1).upper(), int(m.group(2))) for m in grp]
        keys = [k for k, _ in items]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate letter")
        if any(v > 9 for _, v in items):
            raise ValueError("not a digit")
        return KeyValueList(tuple(sorted(items)))

    return _last_good(groups, build, lambda grp: grp[0].start())


_KV_CELL = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*:\s*(\d+)")


def _p_kv_cells(text: str, g: Grammar) -> KeyValueList:
    groups = _groups(_KV_CELL, text, _GAP_KV)

    def build(grp):
        items = [((int(m.group(1)), int(m.group(2))), int(m.group(3))) for m in grp]
        keys = [k for k, _ in items]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate cell")
        return KeyValueList(tuple(sorted(items)))

    return _last_good(groups, build, lambda grp: grp[0].start())


_BRIDGE = re.compile(
    r"\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*-\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*:\s*(\d+)"
)


def _p_bridges(text: str, g: Grammar) -> KeyValueList:
    groups = _groups(_BRIDGE, text, re.compile(r"[\s,;\\]*"))

    def build(grp):
        items = []
        for m in grp:
            a = (int(m.group(1)), int(m.group(2)))
            b = (int(m.group(3)), int(m.group(4)))
            if a == b:
                raise ValueError("degenerate bridge")
            items.append(((min(a, b), max(a, b)), int(m.group(5))))
        keys = [k for k, _ in items]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate bridge")
        return KeyValueList(tuple(sorted(items)))

    return _last_good(groups, build, lambda grp: grp[0].start())


_SEGMENT = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*-\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)(?!\s*:)")


def _p_segments(text: str, g: Grammar) -> SegmentList:
    groups = _groups(_SEGMENT, text, re.compile(r"[\s,;]*"))

    def build(grp):
        segs = set()
        for m in grp:
            a = (int(m.group(1)), int(m.group(2)))
            b = (int(m.group(3)), int(m.group(4)))
            if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
                raise ValueError("not a unit segment")
            segs.add((min(a, b), max(a, b)))
        return SegmentList(tuple(sorted(segs)))

    return _last_good(groups, build, lambda grp: grp[0].start())


_INTLIST = re.compile(r"\[\s*(?:-?\d+\s*(?:,\s*-?\d+\s*)*)?,?\s*\]")


def _parse_intlist(s: str) -> NodeList:
    return NodeList(tuple(int(t) for t in re.findall(r"-?\d+", s)))


def _p_nodelist(text: str, g: Grammar) -> NodeList:
    cands = [m for m in _INTLIST.finditer(text) if re.search(r"\d", m.group(0))]
    if not cands:
        raise _Fail(0)
    return _parse_intlist(cands[-1].group(0))


_YESNO = re.compile(r"(?i)(?<![A-Za-z])(yes|no)(?![A-Za-z])")
_DECORATION = " \t\r*_.!\"'`()[]{}:>#-"


def _decisions(text: str, marked: bool) -> list[re.Match]:
    """Yes/No tokens.  Outside a final-answer region a token only counts when it
    stands alone on its line (up to markup and punctuation)."""
    out = []
    for m in _YESNO.finditer(text):
        if not marked:
            lo = text.rfind("\n", 0, m.start()) + 1
            hi = text.find("\n", m.end())
            line = text[lo:hi if hi >= 0 else len(text)]
            if line.strip(_DECORATION).lower() != m.group(1).lower():
                continue
        out.append(m)
    return out


def _p_decision_list(text: str, g: Grammar, marked: bool = True) -> Decision:
    best = None
    for m in _decisions(text, marked):
        if m.group(1).lower() == "no":
            best = (m.start(), "No")
    for m in _INTLIST.finditer(text):
        if re.search(r"\d", m.group(0)) and (best is None or m.start() > best[0]):
            best = (m.start(), _parse_intlist(m.group(0)))
    if best is None:
        raise _Fail(0)
    return Decision(best[1])


def _p_yes_no(text: str, g: Grammar, marked: bool = True) -> Decision:
    ms = _decisions(text, marked)
    if not ms:
        raise _Fail(0)
    return Decision(ms[-1].group(1).capitalize())


_NUMBER = re.compile(r"(?<![\d.])-?\d+(?:\.\d+)?(?![\d])")


def _p_scalar(text: str, g: Grammar) -> Scalar:
    ms = list(_NUMBER.finditer(text))
    if not ms:
        raise _Fail(0)
    return Scalar(Fraction(ms[-1].group(0)))


_WORDLIST = re.compile(r"\[\s*[\"']?[A-Za-z]+[\"']?(?:\s*,\s*[\"']?[A-Za-z]+[\"']?)*\s*,?\s*\]")
_WORDCHAIN = re.compile(r"[A-Za-z]+(?:\s*(?:->|→|=>)\s*[A-Za-z]+)+")


def _p_words(text: str, g: Grammar) -> NodeList:
    best = None
    for m in _WORDLIST.finditer(text):
        best = (m.start(), m.group(0))
    for m in _WORDCHAIN.finditer(text):
        if best is None or m.start() > best[0]:
            best = (m.start(), m.group(0))
    if best is None:
        raise _Fail(0)
    return NodeList(tuple(w.lower() for w in re.findall(r"[A-Za-z]+", best[1])))


_PLACEMENT = re.compile(
    r"([A-Za-z]+)\s+(NE|NW|SE|SW|N|S|E|W)\s*@\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)", re.I
)


def _p_wordsearch(text: str, g: Grammar) -> WordPlacements:
    groups = _groups(_PLACEMENT, text, re.compile(r"[\s,;]*"))

    def build(grp):
        items = [(m.group(1).upper(), m.group(2).upper(), (int(m.group(3)), int(m.group(4))))
                 for m in grp]
        if len({w for w, _, _ in items}) != len(items):
            raise ValueError("duplicate word")
        return WordPlacements(tuple(sorted(items)))

    return _last_good(groups, build, lambda grp: grp[0].start())


# -- arithmetic expressions ------------------------------------------------

_OP_FOLD = {"+": "+", "-": "-", "−": "-", "–": "-", "*": "×", "×": "×", "x": "×",
            "X": "×", "·": "×", "/": "÷", "÷": "÷", ":": "÷"}
_EXPR_CHARS = re.compile(r"[\d\s()+\-−–*×xX·/÷\[\]]+")
_TOKEN = re.compile(r"\s*(\d+|[()+\-−–*×xX·/÷])")


def _tokenize(s: str) -> list[str]:
    pos = 0
    out = []
    s = s.replace("[", "(").replace("]", ")")
    while pos < len(s):
        if s[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(s, pos)
        if not m:
            raise ValueError(f"bad token at {pos}")
        tok = m.group(1)
        out.append(tok if tok.isdigit() or tok in "()" else _OP_FOLD[tok])
        pos = m.end()
    return out


class _ExprParser:
    def __init__(self, tokens: list[str]):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def expr(self):
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            node = (op, node, self.term())
        return node

    def term(self):
        node = self.atom()
        while self.peek() in ("×", "÷"):
            op = self.take()
            node = (op, node, self.atom())
        return node

    def atom(self):
        t = self.take()
        if t is None:
            raise ValueError("unexpected end")
        if t == "(":
            node = self.expr()
            if self.take() != ")":
                raise ValueError("unbalanced parenthesis")
            return node
        if t.isdigit():
            return int(t)
        raise ValueError(f"unexpected {t!r}")


def parse_expression_text(s: str) -> Expression:
    p = _ExprParser(_tokenize(s))
    tree = p.expr()
    if p.i != len(p.toks):
        raise ValueError("trailing tokens")
    return Expression(tree)


def _p_expr(text: str, g: Grammar) -> Expression:
    cands = []
    for line_start, line in _iter_lines(text):
        for m in _EXPR_CHARS.finditer(line):
            frag = m.group(0).strip()
            # a bare number (e.g. the "24" after '=') is never the answer
            if re.search(r"\d", frag) and re.search(r"[+\-−–*×xX·/÷]", frag):
                cands.append((frag, line_start + m.start()))
    return _last_good(cands, lambda c: parse_expression_text(c[0]), lambda c: c[1])


def _iter_lines(text: str) -> Iterator[tuple[int, str]]:
    pos = 0
    for line in text.split("\n"):
        # an expression never spans an '=' sign
        sub = 0
        for part in line.split("="):
            yield pos + sub, part
            sub += len(part) + 1
        pos += len(line) + 1


_STYLE_PARSERS: dict[str, Callable[[str, Grammar], object]] = {
    "moves": _p_moves,
    "coords_aquarium": _p_coords,
    "coords_campsite": _p_coords,
    "coords_hitori": _p_coords,
    "coords_tapa": _p_coords,
    "coords_snake": _p_coords,
    "coords_minesweeper": _p_coords,
    "coords_hanoi": _p_coords,
    "nested": _p_nested,
    "rows_space": _p_rows_space,
    "flat81": _p_flat81,
    "pipes": _p_pipes,
    "marks": _p_marks,
    "eulero": _p_eulero,
    "kv_letters": _p_kv_letters,
    "kv_cells": _p_kv_cells,
    "bridges": _p_bridges,
    "segments": _p_segments,
    "nodelist": _p_nodelist,
    "decision_list": _p_decision_list,
    "yes_no": _p_yes_no,
    "scalar": _p_scalar,
    "words": _p_words,
    "wordsearch": _p_wordsearch,
    "expr": _p_expr,
}


_MARK_AWARE = ("decision_list", "yes_no")


def parse(grammar: str, text: str) -> ParsedAnswer:
    """Parse the last well-formed answer block of ``text``."""
    g = GRAMMARS[grammar]
    fn = _STYLE_PARSERS[g.style]
    if not isinstance(text, str):
        raise ParseError("answer is not text", 0)
    deepest = 0
    for region, base, marked in _regions(text):
        if not region.strip():
            continue
        try:
            if g.style in _MARK_AWARE:
                return fn(region, g, marked)
            return fn(region, g)
        except _Fail as f:
            deepest = max(deepest, _byte_offset(text, base + f.offset))
        except (ValueError, KeyError, IndexError, RecursionError) :
            deepest = max(deepest, _byte_offset(text, base))
    raise ParseError(f"no well-formed {g.variant.__name__} answer", deepest)


# ---------------------------------------------------------------------------
# canonical rendering

_PREC = {"+": 1, "-": 1, "×": 2, "÷": 2}


def render_expression(node: ExprNode) -> str:
    if isinstance(node, int):
        return str(node)
    op, left, right = node
    ls = render_expression(left)
    rs = render_expression(right)
    if not isinstance(left, int) and _PREC[left[0]] < _PREC[op]:
        ls = f"({ls})"
    if not isinstance(right, int) and _PREC[right[0]] <= _PREC[op]:
        rs = f"({rs})"
    return f"{ls} {op} {rs}"


def _fmt_scalar(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    # exact decimal expansion; non-terminating values fall back to 12 places
    d = v.denominator
    while d % 2 == 0:
        d //= 2
    while d % 5 == 0:
        d //= 5
    if d != 1:
        return f"{float(v):.12f}".rstrip("0")
    sign = "-" if v < 0 else ""
    v = abs(v)
    whole = v.numerator // v.denominator
    rem = v - whole
    digits = []
    while rem:
        rem *= 10
        digits.append(str(rem.numerator // rem.denominator))
        rem -= rem.numerator // rem.denominator
    return f"{sign}{whole}.{''.join(digits)}"


def _pair(c: Coord, space: bool = False) -> str:
    return f"({c[0]}, {c[1]})" if space else f"({c[0]},{c[1]})"


def normalize(grammar: str, answer: ParsedAnswer) -> str:
    g = GRAMMARS[grammar]
    if not isinstance(answer, g.variant):
        raise TypeError(f"{grammar} expects {g.variant.__name__}, got {type(answer).__name__}")
    s = g.style
    if s == "moves":
        return " ".join(answer.moves)
    if s.startswith("coords_"):
        cs = answer.coords
        if s == "coords_aquarium":
            return "[" + ", ".join(_pair(c) for c in cs) + "]"
        if s == "coords_campsite":
            return "[" + ", ".join(f"[{r},{c}]" for r, c in cs) + "]"
        if s == "coords_hitori":
            return "{" + ", ".join(_pair(c) for c in cs) + "}"
        if s == "coords_tapa":
            return ", ".join(_pair(c) for c in cs) if cs else "[]"
        if s == "coords_minesweeper":
            return ",".join(_pair(c) for c in cs) if cs else "[]"
        return " ".join(_pair(c) for c in cs) if cs else "[]"
    if s == "nested":
        return "[" + ", ".join("[" + ", ".join(map(str, r)) + "]" for r in answer.rows) + "]"
    if s == "rows_space":
        return "\n".join(" ".join(map(str, r)) for r in answer.rows)
    if s == "flat81":
        return " ".join(str(v) for r in answer.rows for v in r)
    if s == "pipes":
        return "\n".join("|" + "|".join(map(str, r)) + "|" for r in answer.rows)
    if s == "marks":
        return "\n".join("".join("X" if v else "." for v in r) for r in answer.rows)
    if s == "eulero":
        return "\n".join("|".join(f"{a}{n}" for a, n in r) for r in answer.rows)
    if s == "kv_letters":
        return "[" + ", ".join(f'"{k}"={v}' for k, v in answer.items) + "]"
    if s == "kv_cells":
        return " ".join(f"({r},{c}):{v}" for (r, c), v in answer.items)
    if s == "bridges":
        return "\n".join(f"{_pair(a)}-{_pair(b)}:{n}" for (a, b), n in answer.items)
    if s == "segments":
        return " ".join(f"{_pair(a)}-{_pair(b)}" for a, b in answer.segments)
    if s == "nodelist":
        return "[" + ", ".join(map(str, answer.items)) + "]"
    if s in ("decision_list", "yes_no"):
        v = answer.value
        if isinstance(v, NodeList):
            return "[" + ", ".join(map(str, v.items)) + "]"
        return v
    if s == "scalar":
        return _fmt_scalar(answer.value)
    if s == "words":
        return "[" + ", ".join(f'"{w}"' for w in answer.items) + "]"
    if s == "wordsearch":
        return "\n".join(f"{w} {d} @ ({x}, {y})" for w, d, (x, y) in answer.items)
    if s == "expr":
        return render_expression(answer.tree)
    raise KeyError(s)


# ---------------------------------------------------------------------------
# exact expression evaluation


@dataclass(frozen=True)
class ExprEval:
    value: Fraction | None
    usage_ok: bool
    error: str | None = None


def expression_leaves(node: ExprNode) -> list[int]:
    if isinstance(node, int):
        return [node]
    return expression_leaves(node[1]) + expression_leaves(node[2])


def _eval(node: ExprNode) -> Fraction:
    if isinstance(node, int):
        return Fraction(node)
    op, a, b = node
    x, y = _eval(a), _eval(b)
    if op == "+":
        return x + y
    if op == "-":
        return x - y
    if op == "×":
        return x * y
    if y == 0:
        raise ZeroDivisionError
    return x / y


def eval_expression(expr: Expression, allowed) -> ExprEval:
    """Exact rational value plus a check that leaves use ``allowed`` exactly."""
    usage_ok = sorted(expression_leaves(expr.tree)) == sorted(allowed)
    try:
        value = _eval(expr.tree)
    except ZeroDivisionError:
        return ExprEval(None, usage_ok, "division_by_zero")
    return ExprEval(value, usage_ok)
