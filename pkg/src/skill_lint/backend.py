"""Back-end source extraction: a dialect-tolerant lexical layer that yields
string literals (with interpolation holes), handler units, recognized API
calls, and single-statement assignments — the substrate for every
downstream check.

No full grammar: source is tokenized, bracket-grouped, and split into
statements; the recognized patterns are all local member-path/call shapes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from skill_lint.diagnostics import Diagnostic
from skill_lint.loader import DIALECT_JS, DIALECT_PY, SourceUnit
from skill_lint.rules import KeywordRegistry, load_registry
from skill_lint.text import HOLE_CLOSE, HOLE_OPEN

KIND_SLOT_ACCESS = "slot-access"
KIND_SLOT_GETTER = "slot-getter"
KIND_PERMISSION_ENDPOINT = "permission-endpoint"
KIND_PERMISSION_CLIENT = "permission-client"
KIND_RESPONSE_SINK = "response-sink"
KIND_DB_SINK = "db-sink"
KIND_HTTP_FETCH = "http-fetch"

SOURCE_KINDS = frozenset({KIND_SLOT_ACCESS, KIND_SLOT_GETTER, KIND_PERMISSION_ENDPOINT, KIND_PERMISSION_CLIENT})
SINK_KINDS = frozenset({KIND_RESPONSE_SINK, KIND_DB_SINK})

_RESPONSE_METHODS = {"speak", "ask", "reprompt"}
_SLOT_GETTER_METHODS = {"getslotvalue", "getslot", "get_slot_value", "get_slot"}
_DB_METHODS = {
    "setsessionattributes", "set_session_attributes",
    "setpersistentattributes", "set_persistent_attributes",
    "savepersistentattributes", "save_persistent_attributes",
    "putitem", "put_item", "updateitem", "update_item",
}
_DB_GENERIC_METHODS = {"put", "update", "save"}
_DB_RECEIVER_HINTS = ("db", "dynamo", "table", "client", "persist", "storage", "dao", "bucket")
_DB_ATTR_HINTS = ("sessionattributes", "session_attributes", "persistentattributes", "persistent_attributes", "session_attr")
_HTTP_LIBS = {"axios", "requests", "http", "https", "urllib", "got", "request", "fetch", "urllib2", "aiohttp", "httpx"}
_HTTP_METHODS = {"get", "post", "put", "request", "urlopen", "delete", "patch", "head", "fetch"}

_JS_KEYWORDS = {
    "const", "let", "var", "await", "new", "return", "function", "typeof", "instanceof", "of", "in",
    "if", "else", "for", "while", "do", "switch", "case", "break", "continue", "true", "false",
    "null", "undefined", "this", "async", "try", "catch", "finally", "throw", "class", "extends",
    "delete", "void", "yield", "export", "import", "default",
}
_PY_KEYWORDS = {
    "def", "class", "return", "if", "elif", "else", "for", "while", "in", "not", "and", "or", "is",
    "None", "True", "False", "lambda", "import", "from", "as", "with", "try", "except", "finally",
    "raise", "pass", "break", "continue", "global", "nonlocal", "yield", "await", "async", "del",
    "assert", "print",
}

_SIMPLE_EXPR = re.compile(r"^[A-Za-z_$][\w$]*(?:\.[\w$]+|\[['\"][^'\"\[\]]*['\"]\])*$")
_IDENTISH = re.compile(r"^[A-Za-z][\w.]*$")
_PCT_SPEC = re.compile(r"%[sdrif]")
_FORMAT_FIELD = re.compile(r"\{(\d*)\}")


@dataclass(frozen=True)
class SourceLocation:
    path: str
    line: int
    column: int

    def to_dict(self) -> dict:
        return {"path": self.path, "line": self.line, "column": self.column}


@dataclass(frozen=True)
class HandlerUnit:
    name: str
    intent_name_guess: str
    unit_path: str
    span: tuple[int, int]  # [start, end) offsets into the unit text
    line_range: tuple[int, int]

    def contains(self, offset: int) -> bool:
        return self.span[0] <= offset < self.span[1]


@dataclass(frozen=True)
class OutputString:
    text: str  # literal text with interpolation holes as ⟨var⟩ markers
    holes: tuple[str, ...]
    location: SourceLocation
    unit_path: str
    offset: int
    handler: str | None  # enclosing handler name

    @property
    def key(self) -> tuple[str, int]:
        return (self.unit_path, self.offset)


@dataclass(frozen=True)
class ApiCall:
    kind: str
    callee_path: str
    location: SourceLocation
    unit_path: str
    offset: int
    handler: str | None
    bound_variable: str | None = None
    argument_exprs: tuple[str, ...] = ()
    category: str | None = None  # data category for permission kinds
    slot_name: str | None = None
    arg_span: tuple[int, int] | None = None  # offsets of the argument list


@dataclass(frozen=True)
class Assignment:
    lhs: str  # dotted path as written
    lhs_base: str
    rhs_vars: frozenset[str]
    location: SourceLocation
    unit_path: str
    offset: int
    handler: str | None


@dataclass(frozen=True)
class AnalyzedUnit:
    source: SourceUnit
    handlers: tuple[HandlerUnit, ...]
    comments_stripped: bool = True


@dataclass
class BackendModel:
    units: list[AnalyzedUnit] = field(default_factory=list)
    outputs: list[OutputString] = field(default_factory=list)
    api_calls: list[ApiCall] = field(default_factory=list)
    assignments: list[Assignment] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    other_calls: list[ApiCall] = field(default_factory=list)  # unrecognized callees, kept for advisory notes

    def handler_of(self, unit_path: str, offset: int) -> str | None:
        for unit in self.units:
            if unit.source.path != unit_path:
                continue
            best: HandlerUnit | None = None
            for handler in unit.handlers:
                if handler.contains(offset) and (best is None or handler.span[0] >= best.span[0]):
                    best = handler
            return best.name if best else None
        return None


# ---------------------------------------------------------------------------
# Tokenizer


@dataclass
class Token:
    kind: str  # name | string | number | op
    value: str
    offset: int
    end: int
    line: int = 0
    column: int = 0
    text: str | None = None  # resolved literal for strings
    holes: tuple[str, ...] = ()


_JS_OPS3 = ("===", "!==", "**=", "...", ">>>", "&&=", "||=", "??=")
_JS_OPS2 = ("==", "!=", "<=", ">=", "&&", "||", "=>", "++", "--", "+=", "-=", "*=", "/=", "%=", "??", "?.", "**", "<<", ">>")
_PY_OPS2 = ("==", "!=", "<=", ">=", "->", ":=", "+=", "-=", "*=", "/=", "%=", "//", "**", "|=", "&=", "^=")

_STR_PREFIXES = {"r", "b", "f", "u", "rb", "br", "fr", "rf", "bf", "fb"}


class _Tokenizer:
    def __init__(self, text: str, dialect: str):
        self.text = text
        self.dialect = dialect
        self.tokens: list[Token] = []
        self.diagnostics: list[str] = []

    def run(self) -> list[Token]:
        text, n = self.text, len(self.text)
        i = 0
        while i < n:
            c = text[i]
            if c in " \t\r\n":
                i += 1
            elif self.dialect == DIALECT_JS and c == "/" and text[i : i + 2] == "//":
                i = text.find("\n", i)
                i = n if i < 0 else i
            elif self.dialect == DIALECT_JS and text[i : i + 2] == "/*":
                end = text.find("*/", i + 2)
                i = n if end < 0 else end + 2
            elif self.dialect == DIALECT_PY and c == "#":
                i = text.find("\n", i)
                i = n if i < 0 else i
            elif self.dialect == DIALECT_PY and c == "\\" and text[i + 1 : i + 2] == "\n":
                i += 2
            elif c in "'\"" or (self.dialect == DIALECT_JS and c == "`"):
                i = self._string(i, "")
            elif c.isalpha() or c in "_$":
                i = self._name(i)
            elif c.isdigit():
                i = self._number(i)
            elif self.dialect == DIALECT_JS and c == "/" and self._regex_context():
                i = self._js_regex(i)
            else:
                i = self._op(i)
        self._locate()
        return self.tokens

    def _locate(self) -> None:
        line, line_start, pos = 1, 0, 0
        text = self.text
        for tok in self.tokens:
            while pos < tok.offset:
                if text[pos] == "\n":
                    line += 1
                    line_start = pos + 1
                pos += 1
            tok.line = line
            tok.column = tok.offset - line_start + 1

    def _name(self, i: int) -> int:
        text, n = self.text, len(self.text)
        j = i
        while j < n and (text[j].isalnum() or text[j] in "_$"):
            j += 1
        value = text[i:j]
        if (
            self.dialect == DIALECT_PY
            and value.lower() in _STR_PREFIXES
            and j < n
            and text[j] in "'\""
        ):
            return self._string(j, value.lower(), start=i)
        self.tokens.append(Token("name", value, i, j))
        return j

    def _number(self, i: int) -> int:
        text, n = self.text, len(self.text)
        j = i
        while j < n and (text[j].isalnum() or text[j] == "."):
            j += 1
        self.tokens.append(Token("number", text[i:j], i, j))
        return j

    def _op(self, i: int) -> int:
        text = self.text
        table = _JS_OPS3 + _JS_OPS2 if self.dialect == DIALECT_JS else _PY_OPS2
        for op in table:
            if text.startswith(op, i):
                self.tokens.append(Token("op", op, i, i + len(op)))
                return i + len(op)
        self.tokens.append(Token("op", text[i], i, i + 1))
        return i + 1

    def _regex_context(self) -> bool:
        if not self.tokens:
            return True
        prev = self.tokens[-1]
        if prev.kind in ("name", "number", "string"):
            return prev.kind == "name" and prev.value in ("return", "typeof", "case", "in", "of")
        return prev.value not in (")", "]")

    def _js_regex(self, i: int) -> int:
        text, n = self.text, len(self.text)
        j = i + 1
        in_class = False
        while j < n:
            ch = text[j]
            if ch == "\\":
                j += 2
                continue
            if ch == "[":
                in_class = True
            elif ch == "]":
                in_class = False
            elif ch == "/" and not in_class:
                j += 1
                while j < n and text[j].isalpha():
                    j += 1
                return j
            elif ch == "\n":
                break
            j += 1
        return i + 1  # not a regex after all; treat the slash as an operator position

    def _string(self, i: int, prefix: str, start: int | None = None) -> int:
        text, n = self.text, len(self.text)
        start = i if start is None else start
        quote = text[i]
        triple = self.dialect == DIALECT_PY and text[i : i + 3] in ("'''", '"""')
        raw = "r" in prefix
        fstring = "f" in prefix
        open_len = 3 if triple else 1
        closer = quote * open_len
        j = i + open_len
        buf: list[str] = []
        holes: list[str] = []
        terminated = False
        while j < n:
            ch = text[j]
            if ch == "\\" and not raw and j + 1 < n:
                nxt = text[j + 1]
                buf.append({"n": "\n", "t": "\t", "r": "\r"}.get(nxt, nxt))
                j += 2
                continue
            if text.startswith(closer, j):
                j += open_len
                terminated = True
                break
            if not triple and ch == "\n":
                self.diagnostics.append("unterminated string literal")
                break
            if self.dialect == DIALECT_JS and ch == "$" and text[j + 1 : j + 2] == "{":
                j = self._hole(j + 2, "}", buf, holes)
                continue
            if fstring and ch == "{":
                if text[j + 1 : j + 2] == "{":
                    buf.append("{")
                    j += 2
                    continue
                j = self._hole(j + 1, "}", buf, holes)
                continue
            if fstring and ch == "}" and text[j + 1 : j + 2] == "}":
                buf.append("}")
                j += 2
                continue
            buf.append(ch)
            j += 1
        else:
            if not terminated:
                self.diagnostics.append("unterminated string literal")
        self.tokens.append(
            Token("string", text[start:j], start, j, text="".join(buf), holes=tuple(holes))
        )
        return j

    def _hole(self, i: int, closer: str, buf: list[str], holes: list[str]) -> int:
        """Consume an interpolation expression; record a hole for simple variable paths."""
        text, n = self.text, len(self.text)
        depth = 1
        j = i
        while j < n and depth:
            ch = text[j]
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    break
            elif ch == "\n":
                break
            j += 1
        expr = text[i:j].strip()
        for cut in (":", "!"):  # format spec / conversion suffixes
            if cut in expr:
                expr = expr.split(cut, 1)[0].strip()
        if _SIMPLE_EXPR.match(expr):
            base = re.split(r"[.\[]", expr, 1)[0]
            holes.append(base)
            buf.append(f"{HOLE_OPEN}{base}{HOLE_CLOSE}")
        else:
            self.diagnostics.append(f"interpolation hole dropped (non-simple expression: {expr[:40]!r})")
        return j + 1 if j < n and text[j] == "}" else j


# ---------------------------------------------------------------------------
# Bracket grouping and statement segmentation


@dataclass
class Group:
    kind: str  # paren | bracket | brace
    children: list
    open_tok: Token
    close_tok: Token | None

    @property
    def offset(self) -> int:
        return self.open_tok.offset

    @property
    def end(self) -> int:
        if self.close_tok is not None:
            return self.close_tok.end
        if self.children:
            return _node_end(self.children[-1])
        return self.open_tok.end

    @property
    def first_line(self) -> int:
        return self.open_tok.line

    @property
    def last_line(self) -> int:
        return self.close_tok.line if self.close_tok else self.open_tok.line


Node = "Token | Group"

_OPENERS = {"(": "paren", "[": "bracket", "{": "brace"}
_CLOSERS = {")": "(", "]": "[", "}": "{"}


def _node_end(node) -> int:
    return node.end


def _node_first_token(node) -> Token:
    while isinstance(node, Group):
        return node.open_tok
    return node


def _node_last_token(node) -> Token:
    if isinstance(node, Group):
        return node.close_tok or (_node_last_token(node.children[-1]) if node.children else node.open_tok)
    return node


def group_tokens(tokens: list[Token]) -> list:
    root: list = []
    stack: list[Group] = []
    for tok in tokens:
        target = stack[-1].children if stack else root
        if tok.kind == "op" and tok.value in _OPENERS:
            group = Group(_OPENERS[tok.value], [], tok, None)
            target.append(group)
            stack.append(group)
        elif tok.kind == "op" and tok.value in _CLOSERS:
            if stack and stack[-1].open_tok.value == _CLOSERS[tok.value]:
                stack.pop().close_tok = tok
            elif stack:
                # Mismatched closer: close the innermost open group and drop the token.
                stack.pop().close_tok = tok
            # stray closer at top level: ignored
        else:
            target.append(tok)
    return root


_JS_CONT_END = set("+-*/%<>!?:,.&|^=~") | {
    "==", "===", "!=", "!==", "<=", ">=", "&&", "||", "=>", "+=", "-=", "*=", "/=", "%=", "??", "?.",
    "**", "instanceof", "typeof", "new", "await", "const", "let", "var", "in", "of", "case", "else",
}
_JS_CONT_START = set("+*/%<>?:,.&|^=") | {
    "==", "===", "!=", "!==", "<=", ">=", "&&", "||", "=>", "+=", "-=", "*=", "/=", "%=", "??", "?.",
    "**", "instanceof", "in",
}


def segment(nodes: list, dialect: str) -> list[list]:
    """Split a node sequence into statements at separators and line breaks."""
    statements: list[list] = []
    current: list = []
    prev_last: Token | None = None
    for node in nodes:
        first = _node_first_token(node)
        if isinstance(node, Token) and node.kind == "op" and node.value in (";", ","):
            if current:
                statements.append(current)
            current = []
            prev_last = node
            continue
        if current and prev_last is not None and first.line > prev_last.line:
            if dialect == DIALECT_PY:
                statements.append(current)
                current = []
            else:
                prev_v = prev_last.value if prev_last.kind in ("op", "name") else ""
                first_v = first.value if first.kind in ("op", "name") else ""
                if prev_v not in _JS_CONT_END and first_v not in _JS_CONT_START:
                    statements.append(current)
                    current = []
        current.append(node)
        prev_last = _node_last_token(node)
    if current:
        statements.append(current)
    return statements


# ---------------------------------------------------------------------------
# Extraction


@dataclass
class _Chain:
    """One member/call chain: names, subscript strings, and call groups."""

    components: list[str]
    tokens: list[Token]
    calls: list  # (method, Group, path_snapshot)


class _UnitExtractor:
    def __init__(self, unit: SourceUnit, registry: KeywordRegistry):
        self.unit = unit
        self.registry = registry
        self.keywords = _JS_KEYWORDS if unit.dialect == DIALECT_JS else _PY_KEYWORDS
        self.outputs: list[OutputString] = []
        self.api_calls: list[ApiCall] = []
        self.other_calls: list[ApiCall] = []
        self.assignments: list[Assignment] = []
        self.diagnostics: list[Diagnostic] = []
        self.handlers: list[HandlerUnit] = []

    # -- helpers ----------------------------------------------------------

    def _loc(self, tok: Token) -> SourceLocation:
        return SourceLocation(self.unit.path, tok.line, tok.column)

    def _handler_at(self, offset: int) -> str | None:
        best: HandlerUnit | None = None
        for handler in self.handlers:
            if handler.contains(offset) and (best is None or handler.span[0] >= best.span[0]):
                best = handler
        return best.name if best else None

    def _collect_names(self, nodes: list) -> list[str]:
        """Base identifiers (not preceded by '.') plus string interpolation holes."""
        names: list[str] = []

        def walk(seq: list) -> None:
            prev_dot = False
            for node in seq:
                if isinstance(node, Group):
                    walk(node.children)
                    prev_dot = False
                    continue
                if node.kind == "name":
                    if not prev_dot and node.value not in self.keywords:
                        names.append(node.value)
                    prev_dot = False
                elif node.kind == "string":
                    names.extend(node.holes)
                    prev_dot = False
                else:
                    prev_dot = node.kind == "op" and node.value in (".", "?.")
        walk(nodes)
        seen: set[str] = set()
        ordered = []
        for name in names:
            if name not in seen:
                seen.add(name)
                ordered.append(name)
        return ordered

    # -- main walk ---------------------------------------------------------

    def run(self) -> None:
        tokenizer = _Tokenizer(self.unit.text, self.unit.dialect)
        tokens = tokenizer.run()
        for message in tokenizer.diagnostics:
            self.diagnostics.append(Diagnostic("info", message, self.unit.path))
        nodes = group_tokens(tokens)
        statements = segment(nodes, self.unit.dialect)
        self._find_handlers(statements)
        for statement in statements:
            self._analyze(statement, depth=0)

    # -- handler discovery ---------------------------------------------------

    def _find_handlers(self, statements: list[list]) -> None:
        pending_decorator: list | None = None
        for statement in statements:
            first = _node_first_token(statement[0])
            name = self._handler_decl_name(statement)
            if self.unit.dialect == DIALECT_PY:
                if isinstance(statement[0], Token) and statement[0].kind == "op" and statement[0].value == "@":
                    flat = _flatten_values(statement)
                    if "request_handler" in flat or "can_handle_func" in flat:
                        pending_decorator = statement
                    continue
                if name is None and pending_decorator is not None and first.value == "def":
                    for node in statement:
                        if isinstance(node, Token) and node.kind == "name" and node.value != "def":
                            name = node.value
                            break
                if first.value not in ("def", "class"):
                    pending_decorator = None
                if name is not None and first.value in ("def", "class"):
                    span, lines = self._py_block_span(first)
                    guess = self._intent_guess(name, span, decorator=pending_decorator)
                    self._add_handler(name, guess, span, lines)
                    pending_decorator = None
                continue
            if name is not None:
                start = first.offset
                end = _node_last_token(statement[-1]).end
                span = (start, end)
                lines = (first.line, _node_last_token(statement[-1]).line)
                guess = self._intent_guess(name, span)
                self._add_handler(name, guess, span, lines)

    def _add_handler(self, name: str, guess: str, span: tuple[int, int], lines: tuple[int, int]) -> None:
        for existing in self.handlers:
            if existing.span[0] <= span[0] and span[1] <= existing.span[1]:
                return  # nested declaration; keep the outermost
        self.handlers.append(
            HandlerUnit(name=name, intent_name_guess=guess, unit_path=self.unit.path, span=span, line_range=lines)
        )

    def _handler_decl_name(self, statement: list) -> str | None:
        tokens = [n for n in statement if isinstance(n, Token)]
        if not tokens:
            return None
        first = tokens[0]
        if first.kind == "name" and first.value in ("const", "let", "var", "function", "class", "def"):
            for tok in tokens[1:3]:
                if tok.kind == "name" and _is_handler_name(tok.value):
                    return tok.value
            return None
        # exports.FooHandler = {...} / FooHandler = {...}
        eq = _find_assign_op(statement)
        if eq is not None:
            lhs_names = [t.value for t in tokens[: tokens.index(eq)] if t.kind == "name"] if eq in tokens else []
            if lhs_names and _is_handler_name(lhs_names[-1]):
                return lhs_names[-1]
        return None

    def _py_block_span(self, header: Token) -> tuple[tuple[int, int], tuple[int, int]]:
        text = self.unit.text
        lines = text.split("\n")
        header_line = header.line - 1
        indent = len(lines[header_line]) - len(lines[header_line].lstrip())
        last = header_line
        for i in range(header_line + 1, len(lines)):
            stripped = lines[i].strip()
            if not stripped:
                continue
            if len(lines[i]) - len(lines[i].lstrip()) <= indent:
                break
            last = i
        start = self.unit.line_index[header_line]
        end = self.unit.line_index[last] + len(lines[last])
        return (start, end), (header_line + 1, last + 1)

    def _intent_guess(self, name: str, span: tuple[int, int], decorator: list | None = None) -> str:
        from_predicate = self._predicate_intent(span, decorator)
        if from_predicate:
            return from_predicate
        stripped = re.sub(r"(_handler|Handler|handler)$", "", name)
        return stripped or name

    def _predicate_intent(self, span: tuple[int, int], decorator: list | None) -> str | None:
        candidates: list[Token] = []

        def collect(seq: list) -> None:
            for node in seq:
                if isinstance(node, Group):
                    collect(node.children)
                else:
                    candidates.append(node)

        if decorator is not None:
            collect(decorator)
        window: list[Token] = []
        for tok in candidates:
            window.append(tok)
        if not window:
            tokenizer_tokens = [
                t for t in _Tokenizer(self.unit.text[span[0] : span[1]], self.unit.dialect).run()
            ]
            window = tokenizer_tokens
        markers = {"is_intent_name", "getIntentName", "get_intent_name", "matches"}
        for i, tok in enumerate(window):
            if tok.kind != "string" or not tok.text or not _IDENTISH.match(tok.text):
                continue
            back = window[max(0, i - 8) : i]
            values = [t.value for t in back if t.kind == "name"]
            if any(v in markers for v in values):
                return tok.text
            if "intent" in values and "name" in values:
                return tok.text
        return None

    # -- statement analysis --------------------------------------------------

    def _analyze(self, statement: list, depth: int) -> None:
        assignment = self._extract_assignment(statement, depth)
        self._extract_strings(statement, assignment)
        self._extract_chains(statement, assignment)
        for node in statement:
            if isinstance(node, Group):
                for sub in segment(node.children, self.unit.dialect):
                    self._analyze(sub, depth + 1)

    def _extract_assignment(self, statement: list, depth: int) -> Assignment | None:
        eq = _find_assign_op(statement)
        if eq is None:
            return None
        idx = statement.index(eq)
        lhs_nodes = statement[:idx]
        rhs_nodes = statement[idx + 1 :]
        lhs_nodes = [
            n
            for n in lhs_nodes
            if not (isinstance(n, Token) and n.kind == "name" and n.value in ("const", "let", "var", "await", "global", "nonlocal"))
        ]
        if not lhs_nodes or not rhs_nodes:
            return None

        rhs_vars = set(self._collect_names(rhs_nodes))
        first_tok = _node_first_token(lhs_nodes[0])
        loc = self._loc(first_tok)
        handler = self._handler_at(first_tok.offset)

        # Destructuring: const {a, b} = rhs  /  const [a, b] = rhs
        if len(lhs_nodes) == 1 and isinstance(lhs_nodes[0], Group) and lhs_nodes[0].kind in ("brace", "bracket"):
            names = [t.value for t in lhs_nodes[0].children if isinstance(t, Token) and t.kind == "name"]
            result = None
            for name in names:
                result = Assignment(
                    lhs=name, lhs_base=name, rhs_vars=frozenset(rhs_vars - {name}),
                    location=loc, unit_path=self.unit.path, offset=first_tok.offset, handler=handler,
                )
                self.assignments.append(result)
            return result

        components = _path_components(lhs_nodes)
        if not components:
            return None
        if eq.value != "=":  # augmented assignment keeps the lhs tainted
            rhs_vars.add(components[0])
        lhs_path = ".".join(components)
        assignment = Assignment(
            lhs=lhs_path,
            lhs_base=components[0],
            rhs_vars=frozenset(v for v in rhs_vars if v != components[0]) if eq.value == "=" else frozenset(rhs_vars),
            location=loc,
            unit_path=self.unit.path,
            offset=first_tok.offset,
            handler=handler,
        )
        self.assignments.append(assignment)

        # Writes into session/persistent attribute structures are database sinks.
        if len(components) > 1 and any(h in components[0].lower().replace("_", "") or h in lhs_path.lower().replace("_", "") for h in ("sessionattributes", "persistentattributes", "sessionattr")):
            args = sorted(rhs_vars - {components[0]})
            self.api_calls.append(
                ApiCall(
                    kind=KIND_DB_SINK,
                    callee_path=lhs_path,
                    location=loc,
                    unit_path=self.unit.path,
                    offset=first_tok.offset,
                    handler=handler,
                    argument_exprs=tuple(args),
                )
            )
        return assignment

    def _extract_strings(self, statement: list, assignment: Assignment | None) -> None:
        if (
            self.unit.dialect == DIALECT_PY
            and len(statement) == 1
            and isinstance(statement[0], Token)
            and statement[0].kind == "string"
        ):
            return  # docstring-as-statement: excluded like a comment
        i = 0
        nodes = statement
        while i < len(nodes):
            node = nodes[i]
            if isinstance(node, Token) and node.kind == "string":
                i = self._fold_string(nodes, i, assignment)
            else:
                i += 1

    def _fold_string(self, nodes: list, start: int, assignment: Assignment | None) -> int:
        first: Token = nodes[start]
        parts: list[str] = [first.text or ""]
        holes: list[str] = list(first.holes)
        i = start + 1
        while True:
            # concatenation: "+" followed by string/name/number
            if (
                i + 1 < len(nodes)
                and isinstance(nodes[i], Token)
                and nodes[i].kind == "op"
                and nodes[i].value == "+"
            ):
                nxt = nodes[i + 1]
                if isinstance(nxt, Token) and nxt.kind == "string":
                    parts.append(nxt.text or "")
                    holes.extend(nxt.holes)
                    i += 2
                    continue
                if isinstance(nxt, Token) and nxt.kind == "name":
                    base = nxt.value
                    skip = 2
                    # absorb trailing member path: name(.name)*
                    while (
                        i + skip + 1 < len(nodes)
                        and isinstance(nodes[i + skip], Token)
                        and nodes[i + skip].kind == "op"
                        and nodes[i + skip].value == "."
                        and isinstance(nodes[i + skip + 1], Token)
                        and nodes[i + skip + 1].kind == "name"
                    ):
                        skip += 2
                    if base not in self.keywords:
                        parts.append(f"{HOLE_OPEN}{base}{HOLE_CLOSE}")
                        holes.append(base)
                    i += skip
                    continue
                if isinstance(nxt, Token) and nxt.kind == "number":
                    parts.append(nxt.value)
                    i += 2
                    continue
            break
        text = "".join(parts)

        if self.unit.dialect == DIALECT_PY:
            text, holes, i = self._py_formatting(nodes, i, text, holes)

        tok = first
        handler = self._handler_at(tok.offset)
        self.outputs.append(
            OutputString(
                text=text,
                holes=tuple(holes),
                location=self._loc(tok),
                unit_path=self.unit.path,
                offset=tok.offset,
                handler=handler,
            )
        )

        category = self.registry.patterns.classify_endpoint(text)
        if category is not None:
            bound = assignment.lhs_base if assignment is not None else None
            self.api_calls.append(
                ApiCall(
                    kind=KIND_PERMISSION_ENDPOINT,
                    callee_path=text,
                    location=self._loc(tok),
                    unit_path=self.unit.path,
                    offset=tok.offset,
                    handler=handler,
                    bound_variable=bound,
                    category=category,
                )
            )
        return i

    def _py_formatting(self, nodes: list, i: int, text: str, holes: list[str]) -> tuple[str, list[str], int]:
        """Resolve trailing `% args` and `.format(args)` into positional holes."""
        if (
            i + 1 < len(nodes)
            and isinstance(nodes[i], Token)
            and nodes[i].kind == "op"
            and nodes[i].value == "%"
        ):
            args, ok = _simple_args([nodes[i + 1]]) if not isinstance(nodes[i + 1], Group) else _simple_args(nodes[i + 1].children)
            specs = list(_PCT_SPEC.finditer(text))
            if ok and len(args) == len(specs):
                for spec, arg in zip(specs, args):
                    text = text.replace(spec.group(0), f"{HOLE_OPEN}{arg}{HOLE_CLOSE}", 1)
                    holes.append(arg)
            elif specs:
                self.diagnostics.append(
                    Diagnostic("info", "format holes dropped (non-simple arguments)", self.unit.path)
                )
                text = _PCT_SPEC.sub("", text)
            return text, holes, i + 2
        if (
            i + 2 < len(nodes)
            and isinstance(nodes[i], Token)
            and nodes[i].kind == "op"
            and nodes[i].value == "."
            and isinstance(nodes[i + 1], Token)
            and nodes[i + 1].value == "format"
            and isinstance(nodes[i + 2], Group)
            and nodes[i + 2].kind == "paren"
        ):
            args, ok = _simple_args(nodes[i + 2].children)
            fields = list(_FORMAT_FIELD.finditer(text))
            if ok and fields and len(args) >= len({f.group(1) or str(k) for k, f in enumerate(fields)}):
                for k, match in enumerate(fields):
                    index = int(match.group(1)) if match.group(1) else k
                    if index < len(args):
                        text = text.replace(match.group(0), f"{HOLE_OPEN}{args[index]}{HOLE_CLOSE}", 1)
                        holes.append(args[index])
            elif fields:
                self.diagnostics.append(
                    Diagnostic("info", "format holes dropped (non-simple arguments)", self.unit.path)
                )
                text = _FORMAT_FIELD.sub("", text)
            return text, holes, i + 3
        return text, holes, i

    # -- chains (member paths and calls) --------------------------------------

    def _extract_chains(self, statement: list, assignment: Assignment | None) -> None:
        eq = _find_assign_op(statement)
        rhs_start = statement.index(eq) + 1 if eq is not None else 0
        chains = _scan_chains(statement)
        for chain in chains:
            in_rhs = statement.index(chain.anchor_node) >= rhs_start if chain.anchor_node in statement else True
            bound = assignment.lhs_base if (assignment is not None and in_rhs) else None
            self._classify_chain(chain, bound)

    def _classify_chain(self, chain: "_ScannedChain", bound: str | None) -> None:
        components = chain.components
        path = ".".join(c for c, _ in components)
        # member-path slot access (with or without a call)
        for idx in range(len(components) - 1):
            if components[idx][0] == "intent" and components[idx + 1][0] == "slots":
                slot_name, slot_tok = None, components[idx + 1][1]
                if idx + 2 < len(components):
                    slot_name, slot_tok = components[idx + 2][0], components[idx + 2][1]
                elif chain.calls and chain.calls[-1][0] == "get":
                    group = chain.calls[-1][1]
                    for child in group.children:
                        if isinstance(child, Token) and child.kind == "string":
                            slot_name, slot_tok = child.text, child
                            break
                self.api_calls.append(
                    ApiCall(
                        kind=KIND_SLOT_ACCESS,
                        callee_path=path,
                        location=self._loc(slot_tok),
                        unit_path=self.unit.path,
                        offset=slot_tok.offset,
                        handler=self._handler_at(slot_tok.offset),
                        bound_variable=bound,
                        slot_name=slot_name,
                    )
                )
                break

        response_calls: list[tuple[str, Group, Token]] = []
        for method, group, tok in chain.calls:
            norm = method.replace("_", "").lower()
            args = self._collect_names(group.children)
            arg_span = (group.open_tok.offset, group.end)
            loc = self._loc(tok)
            handler = self._handler_at(tok.offset)
            if norm in _SLOT_GETTER_METHODS:
                slot_name = None
                for child in group.children:
                    if isinstance(child, Token) and child.kind == "string":
                        slot_name = child.text
                        break
                self.api_calls.append(
                    ApiCall(
                        kind=KIND_SLOT_GETTER, callee_path=path, location=loc,
                        unit_path=self.unit.path, offset=tok.offset, handler=handler,
                        bound_variable=bound, argument_exprs=tuple(args), slot_name=slot_name,
                        arg_span=arg_span,
                    )
                )
            elif self.registry.patterns.classify_client_method(method) is not None:
                self.api_calls.append(
                    ApiCall(
                        kind=KIND_PERMISSION_CLIENT, callee_path=path, location=loc,
                        unit_path=self.unit.path, offset=tok.offset, handler=handler,
                        bound_variable=bound, argument_exprs=tuple(args),
                        category=self.registry.patterns.classify_client_method(method),
                        arg_span=arg_span,
                    )
                )
            elif method in _RESPONSE_METHODS:
                response_calls.append((method, group, tok))
            elif norm in _DB_METHODS or (
                norm in _DB_GENERIC_METHODS
                and any(h in comp.lower() for comp, _ in components[:-1] for h in _DB_RECEIVER_HINTS)
            ):
                self.api_calls.append(
                    ApiCall(
                        kind=KIND_DB_SINK, callee_path=path, location=loc,
                        unit_path=self.unit.path, offset=tok.offset, handler=handler,
                        argument_exprs=tuple(args), arg_span=arg_span,
                    )
                )
            elif self._is_http_fetch(components, method, group):
                self.api_calls.append(
                    ApiCall(
                        kind=KIND_HTTP_FETCH, callee_path=path, location=loc,
                        unit_path=self.unit.path, offset=tok.offset, handler=handler,
                        bound_variable=bound, argument_exprs=tuple(args), arg_span=arg_span,
                    )
                )
            else:
                self.api_calls.append(
                    ApiCall(
                        kind="call", callee_path=path or method, location=loc,
                        unit_path=self.unit.path, offset=tok.offset, handler=handler,
                        bound_variable=bound, argument_exprs=tuple(args), arg_span=arg_span,
                    )
                )
        if response_calls:
            merged_args: list[str] = []
            for _, group, _ in response_calls:
                for name in self._collect_names(group.children):
                    if name not in merged_args:
                        merged_args.append(name)
            method, group, tok = response_calls[0]
            self.api_calls.append(
                ApiCall(
                    kind=KIND_RESPONSE_SINK,
                    callee_path=path,
                    location=self._loc(tok),
                    unit_path=self.unit.path,
                    offset=tok.offset,
                    handler=self._handler_at(tok.offset),
                    argument_exprs=tuple(merged_args),
                    arg_span=(
                        min(g.open_tok.offset for _, g, _ in response_calls),
                        max(g.end for _, g, _ in response_calls),
                    ),
                )
            )

    def _is_http_fetch(self, components: list, method: str, group: Group) -> bool:
        if method == "fetch":
            return True
        base = components[0][0].lower() if components else ""
        if base in _HTTP_LIBS and method.lower() in _HTTP_METHODS:
            return True
        for child in group.children:
            if isinstance(child, Token) and child.kind == "string" and (child.text or "").startswith(("http://", "https://")):
                return True
        return False


@dataclass
class _ScannedChain:
    components: list  # [(name, Token)]
    calls: list  # [(method, Group, Token)]
    anchor_node: object


def _scan_chains(statement: list) -> list[_ScannedChain]:
    chains: list[_ScannedChain] = []
    i = 0
    nodes = statement
    while i < len(nodes):
        node = nodes[i]
        if isinstance(node, Token) and node.kind == "name":
            components: list = [(node.value, node)]
            calls: list = []
            anchor = node
            j = i + 1
            while j < len(nodes):
                nxt = nodes[j]
                if (
                    isinstance(nxt, Token)
                    and nxt.kind == "op"
                    and nxt.value in (".", "?.")
                    and j + 1 < len(nodes)
                    and isinstance(nodes[j + 1], Token)
                    and nodes[j + 1].kind == "name"
                ):
                    components.append((nodes[j + 1].value, nodes[j + 1]))
                    j += 2
                elif isinstance(nxt, Group) and nxt.kind == "paren":
                    method_tok = components[-1][1]
                    calls.append((components[-1][0], nxt, method_tok))
                    j += 1
                elif isinstance(nxt, Group) and nxt.kind == "bracket":
                    inner = [c for c in nxt.children if isinstance(c, Token)]
                    if len(inner) == 1 and inner[0].kind == "string":
                        components.append((inner[0].text or "", inner[0]))
                    j += 1
                else:
                    break
            if len(components) > 1 or calls:
                chains.append(_ScannedChain(components, calls, anchor))
            i = j
        else:
            i += 1
    return chains


def _flatten_values(nodes: list) -> set[str]:
    out: set[str] = set()
    for node in nodes:
        if isinstance(node, Group):
            out |= _flatten_values(node.children)
        elif node.kind in ("name", "op"):
            out.add(node.value)
    return out


def _find_assign_op(statement: list) -> Token | None:
    for node in statement:
        if isinstance(node, Token) and node.kind == "op" and node.value in ("=", "+=", ":="):
            return node
    return None


def _path_components(nodes: list) -> list[str]:
    components: list[str] = []
    expect_name = True
    for node in nodes:
        if isinstance(node, Token) and node.kind == "name":
            if expect_name:
                components.append(node.value)
                expect_name = False
            else:
                break
        elif isinstance(node, Token) and node.kind == "op" and node.value in (".", "?."):
            expect_name = True
        elif isinstance(node, Group) and node.kind == "bracket" and components:
            inner = [c for c in node.children if isinstance(c, Token)]
            if len(inner) == 1 and inner[0].kind == "string":
                components.append(inner[0].text or "")
        elif isinstance(node, Token) and node.kind == "op" and node.value == ":":
            break  # py type annotation
        else:
            break
    return components


def _simple_args(nodes: list) -> tuple[list[str], bool]:
    args: list[str] = []
    expect = True
    for node in nodes:
        if isinstance(node, Token) and node.kind == "name" and expect:
            args.append(node.value)
            expect = False
        elif isinstance(node, Token) and node.kind == "op" and node.value == ",":
            expect = True
        elif isinstance(node, Token) and node.kind == "op" and node.value in (".",):
            continue  # member path: keep the base already captured
        elif isinstance(node, Token) and node.kind == "name":
            continue
        else:
            return args, False
    return args, True


def _is_handler_name(name: str) -> bool:
    return name.endswith("Handler") or name.endswith("_handler") or name.endswith("handler")


def extract_backend_model(units: list[SourceUnit], registry: KeywordRegistry | None = None) -> BackendModel:
    """Extract the BackendModel from source units; per-unit failures degrade
    to diagnostics and never abort the other units."""
    registry = registry or load_registry()
    model = BackendModel()
    for unit in sorted(units, key=lambda u: u.path):
        extractor = _UnitExtractor(unit, registry)
        try:
            extractor.run()
        except Exception as exc:  # tolerant by contract
            model.diagnostics.append(
                Diagnostic("warning", f"source extraction gave up on this unit: {exc}", unit.path)
            )
            continue
        model.units.append(AnalyzedUnit(source=unit, handlers=tuple(extractor.handlers)))
        model.outputs.extend(extractor.outputs)
        model.api_calls.extend(extractor.api_calls)
        model.assignments.extend(extractor.assignments)
        model.diagnostics.extend(extractor.diagnostics)
    return model


def recognize_api_calls(unit: SourceUnit, registry: KeywordRegistry | None = None) -> list[ApiCall]:
    """Classify the recognized API-call patterns within one source unit."""
    model = extract_backend_model([unit], registry)
    return [c for c in model.api_calls if c.kind != "call"]
