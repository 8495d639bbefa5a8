"""Lexer and recursive-descent parser for a subset of IEC 61131-3 Structured Text.

The subset covers POU blocks (FUNCTION_BLOCK / PROGRAM / FUNCTION), VAR
sections, VAR_GLOBAL blocks, ACTION blocks, and the statement forms needed
for call-graph and data-flow extraction: assignments, call statements,
IF/ELSIF/ELSE, CASE ... OF with literal labels, FOR and WHILE loops.

Expressions are not built into operator trees; they are kept as token
sequences (identifiers carry positions), which is all the downstream
analyses need.  On a syntax error the parser records a diagnostic and
resynchronizes at the next END_* or POU keyword, so one broken POU does not
hide the rest of a file.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    ActionDef,
    Assignment,
    CallStatement,
    CaseBranch,
    CaseStatement,
    Diagnostic,
    ForStatement,
    GlobalVar,
    IfBranch,
    IfStatement,
    LineSpan,
    Pou,
    PouKind,
    SectionKind,
    Statement,
    Token,
    TokenKind,
    TokenSeq,
    VarDecl,
    VarSection,
    WhileStatement,
)

KEYWORDS = {
    "FUNCTION_BLOCK", "END_FUNCTION_BLOCK",
    "PROGRAM", "END_PROGRAM",
    "FUNCTION", "END_FUNCTION",
    "ACTION", "END_ACTION",
    "VAR", "VAR_INPUT", "VAR_OUTPUT", "VAR_IN_OUT", "VAR_TEMP", "VAR_GLOBAL",
    "END_VAR", "CONSTANT", "RETAIN", "PERSISTENT", "AT",
    "IF", "THEN", "ELSIF", "ELSE", "END_IF",
    "CASE", "OF", "END_CASE",
    "FOR", "TO", "BY", "DO", "END_FOR",
    "WHILE", "END_WHILE",
    "AND", "OR", "XOR", "NOT", "MOD",
    "TRUE", "FALSE",
    "ARRAY", "STRUCT", "END_STRUCT", "TYPE", "END_TYPE",
}

POU_START = {"FUNCTION_BLOCK", "PROGRAM", "FUNCTION", "VAR_GLOBAL"}
POU_END = {"END_FUNCTION_BLOCK", "END_PROGRAM", "END_FUNCTION"}

_TWO_CHAR_OPS = (":=", "<=", ">=", "<>", "..", "=>", "**")
_ONE_CHAR_OPS = "+-*/()[]<>=.,;:&#%"


@dataclass(frozen=True)
class SourceFile:
    path: str
    text: str
    encoding: str = "utf-8"


@dataclass
class ParseResult:
    pous: list[Pou]
    globals: list[GlobalVar]
    diagnostics: list[Diagnostic]
    partial: list[str]  # names of POUs whose body was only partly recovered

    @property
    def ok(self) -> bool:
        return not any(d.severity == "error" for d in self.diagnostics)


def tokenize(text: str, path: str = "<string>") -> tuple[list[Token], list[Diagnostic]]:
    """Split source text into tokens; comments are skipped, positions 1-based."""
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def advance(count: int) -> None:
        nonlocal i, line, col
        for _ in range(count):
            if i < n and text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if ch == "/" and text[i : i + 2] == "//":
            while i < n and text[i] != "\n":
                advance(1)
            continue
        if ch == "(" and text[i : i + 2] == "(*":
            start_line, start_col = line, col
            depth = 0
            while i < n:
                if text[i : i + 2] == "(*":
                    depth += 1
                    advance(2)
                elif text[i : i + 2] == "*)":
                    depth -= 1
                    advance(2)
                    if depth == 0:
                        break
                else:
                    advance(1)
            else:
                diags.append(
                    Diagnostic("warning", "unterminated comment", path=path,
                               line=start_line, col=start_col)
                )
            continue
        if ch == "{":
            # vendor pragma; skip to closing brace
            start_line, start_col = line, col
            while i < n and text[i] != "}":
                advance(1)
            if i < n:
                advance(1)
            else:
                diags.append(
                    Diagnostic("warning", "unterminated pragma", path=path,
                               line=start_line, col=start_col)
                )
            continue
        if ch in "'\"":
            quote = ch
            start_line, start_col = line, col
            j = i + 1
            while j < n and text[j] != quote:
                if text[j] == "\n":
                    break
                j += 2 if text[j] == "$" else 1
            if j >= n or text[j] != quote:
                diags.append(
                    Diagnostic("error", "unterminated string literal", path=path,
                               line=start_line, col=start_col)
                )
                tokens.append(Token(TokenKind.STRING, text[i:j], start_line, start_col))
                advance(j - i)
                continue
            tokens.append(Token(TokenKind.STRING, text[i : j + 1], start_line, start_col))
            advance(j + 1 - i)
            continue
        if ch.isdigit():
            start_line, start_col = line, col
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_#"):
                j += 1
            # keep a decimal part, but leave ".." (subrange) alone
            if j < n and text[j] == "." and text[j : j + 2] != ".." and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and (text[j].isalnum() or text[j] == "_"):
                    j += 1
            tokens.append(Token(TokenKind.NUMBER, text[i:j], start_line, start_col))
            advance(j - i)
            continue
        if ch.isalpha() or ch == "_":
            start_line, start_col = line, col
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            # typed literals such as T#5s, 16#FF written with a type prefix
            if j < n and text[j] == "#":
                j += 1
                while j < n and (text[j].isalnum() or text[j] in "_.:+-"):
                    j += 1
                tokens.append(Token(TokenKind.NUMBER, text[i:j], start_line, start_col))
                advance(j - i)
                continue
            kind = TokenKind.KEYWORD if word.upper() in KEYWORDS else TokenKind.IDENT
            tokens.append(Token(kind, word, start_line, start_col))
            advance(j - i)
            continue
        two = text[i : i + 2]
        if two in _TWO_CHAR_OPS:
            tokens.append(Token(TokenKind.OP, two, line, col))
            advance(2)
            continue
        if ch in _ONE_CHAR_OPS:
            tokens.append(Token(TokenKind.OP, ch, line, col))
            advance(1)
            continue
        diags.append(
            Diagnostic("error", f"unexpected character {ch!r}", path=path, line=line, col=col)
        )
        advance(1)
    return tokens, diags


class _ParseFailure(Exception):
    def __init__(self, message: str, token: Token | None):
        super().__init__(message)
        self.message = message
        self.token = token


class Parser:
    def __init__(self, tokens: list[Token], path: str):
        self.tokens = tokens
        self.path = path
        self.pos = 0
        self.diagnostics: list[Diagnostic] = []
        self.partial: list[str] = []

    # -- token helpers

    def peek(self, offset: int = 0) -> Token | None:
        idx = self.pos + offset
        return self.tokens[idx] if idx < len(self.tokens) else None

    def at_keyword(self, *words: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind is TokenKind.KEYWORD and tok.text.upper() in words

    def at_op(self, text: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind is TokenKind.OP and tok.text == text

    def take(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise _ParseFailure("unexpected end of file", None)
        self.pos += 1
        return tok

    def expect_keyword(self, *words: str) -> Token:
        if not self.at_keyword(*words):
            got = self.peek()
            raise _ParseFailure(
                f"expected {' or '.join(words)}, got {got.text if got else 'end of file'}",
                got,
            )
        return self.take()

    def expect_op(self, text: str) -> Token:
        if not self.at_op(text):
            got = self.peek()
            raise _ParseFailure(
                f"expected {text!r}, got {got.text if got else 'end of file'}", got
            )
        return self.take()

    def expect_ident(self) -> Token:
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.IDENT:
            raise _ParseFailure(
                f"expected identifier, got {tok.text if tok else 'end of file'}", tok
            )
        return self.take()

    def error(self, failure: _ParseFailure) -> None:
        line = failure.token.line if failure.token else None
        col = failure.token.col if failure.token else None
        self.diagnostics.append(
            Diagnostic("error", failure.message, path=self.path, line=line, col=col)
        )

    def warn(self, message: str, line: int | None = None) -> None:
        self.diagnostics.append(
            Diagnostic("warning", message, path=self.path, line=line)
        )

    def skip_to_recovery_point(self) -> None:
        """Advance to the next END_* keyword or POU start so parsing can resume."""
        while True:
            tok = self.peek()
            if tok is None:
                return
            if tok.kind is TokenKind.KEYWORD:
                word = tok.text.upper()
                if word in POU_END or word in POU_START:
                    return
                if word.startswith("END_"):
                    self.take()
                    return
            self.take()

    # -- file level

    def parse_file(self) -> ParseResult:
        pous: list[Pou] = []
        globals_: list[GlobalVar] = []
        while self.peek() is not None:
            loop_start = self.pos
            try:
                if self.at_keyword("VAR_GLOBAL"):
                    globals_.extend(self.parse_global_block())
                elif self.at_keyword("FUNCTION_BLOCK", "PROGRAM", "FUNCTION"):
                    pous.append(self.parse_pou())
                else:
                    tok = self.peek()
                    raise _ParseFailure(
                        f"expected a POU or VAR_GLOBAL block, got {tok.text!r}", tok
                    )
            except _ParseFailure as failure:
                self.error(failure)
                self.skip_to_recovery_point()
                # a recovery point we cannot use must still be consumed
                if self.pos == loop_start and self.peek() is not None:
                    self.take()
        return ParseResult(pous, globals_, self.diagnostics, self.partial)

    def parse_global_block(self) -> list[GlobalVar]:
        self.expect_keyword("VAR_GLOBAL")
        constant = False
        while self.at_keyword("CONSTANT", "RETAIN", "PERSISTENT"):
            if self.take().text.upper() == "CONSTANT":
                constant = True
        decls = self.parse_decl_list()
        return [GlobalVar(d.name, d.type_name, d.init, constant) for d in decls]

    def parse_pou(self) -> Pou:
        head = self.take()
        kind_word = head.text.upper()
        kind = {
            "FUNCTION_BLOCK": PouKind.FUNCTION_BLOCK,
            "PROGRAM": PouKind.PROGRAM,
            "FUNCTION": PouKind.FUNCTION,
        }[kind_word]
        end_word = "END_" + kind_word
        name_tok = self.expect_ident()
        return_type: str | None = None
        if kind is PouKind.FUNCTION:
            self.expect_op(":")
            return_type = self.parse_type_text()

        sections: list[VarSection] = []
        statements: list[Statement] = []
        actions: list[ActionDef] = []
        partial = False

        while True:
            tok = self.peek()
            if tok is None:
                self.warn(f"missing {end_word} at end of file", name_tok.line)
                break
            if self.at_keyword(end_word):
                self.take()
                break
            if tok.kind is TokenKind.KEYWORD and tok.text.upper() in POU_START:
                self.warn(f"missing {end_word} before {tok.text}", tok.line)
                break
            loop_start = self.pos
            try:
                if self.at_op(";"):
                    self.skip_empty_statements()
                elif self.at_keyword("VAR", "VAR_INPUT", "VAR_OUTPUT", "VAR_IN_OUT", "VAR_TEMP"):
                    sections.append(self.parse_var_section())
                elif self.at_keyword("ACTION"):
                    actions.append(self.parse_action())
                else:
                    statements.append(self.parse_statement())
            except _ParseFailure as failure:
                self.error(failure)
                partial = True
                self.skip_to_recovery_point()
                if self.at_keyword(end_word):
                    self.take()
                    break
                if self.at_keyword(*POU_START):
                    break
                # a foreign END_* marker: swallow it so recovery advances
                if self.pos == loop_start and self.peek() is not None:
                    self.take()

        if partial:
            self.partial.append(name_tok.text)
        last = self.tokens[self.pos - 1] if self.pos else name_tok
        return Pou(
            name=name_tok.text,
            kind=kind,
            return_type=return_type,
            var_sections=tuple(sections),
            statements=tuple(statements),
            actions=tuple(actions),
            span=LineSpan(head.line, last.line),
        )

    def parse_action(self) -> ActionDef:
        head = self.expect_keyword("ACTION")
        name_tok = self.expect_ident()
        if self.at_op(":"):
            self.take()
        body = self.parse_statements_until("END_ACTION")
        self.take()
        return ActionDef(name_tok.text, tuple(body), head.line)

    # -- declarations

    def parse_var_section(self) -> VarSection:
        head = self.take()
        kind = {
            "VAR": SectionKind.VAR,
            "VAR_INPUT": SectionKind.VAR_INPUT,
            "VAR_OUTPUT": SectionKind.VAR_OUTPUT,
            "VAR_IN_OUT": SectionKind.VAR_IN_OUT,
            "VAR_TEMP": SectionKind.VAR_TEMP,
        }[head.text.upper()]
        constant = False
        while self.at_keyword("CONSTANT", "RETAIN", "PERSISTENT"):
            if self.take().text.upper() == "CONSTANT":
                constant = True
        decls = self.parse_decl_list()
        return VarSection(kind, tuple(decls), constant)

    def parse_decl_list(self) -> list[VarDecl]:
        decls: list[VarDecl] = []
        while True:
            if self.at_keyword("END_VAR"):
                self.take()
                return decls
            tok = self.peek()
            if tok is None:
                self.warn("missing END_VAR at end of file")
                return decls
            if tok.kind is TokenKind.KEYWORD and (
                tok.text.upper() in POU_END or tok.text.upper() in POU_START
            ):
                self.warn(f"missing END_VAR before {tok.text}", tok.line)
                return decls
            names = [self.expect_ident().text]
            while self.at_op(","):
                self.take()
                names.append(self.expect_ident().text)
            if self.at_keyword("AT"):
                self.take()
                # hardware address: %IX0.0 and friends
                while not self.at_op(":") and self.peek() is not None:
                    self.take()
            self.expect_op(":")
            type_name = self.parse_type_text()
            init: str | None = None
            if self.at_op(":="):
                self.take()
                init = self.capture_until_semicolon_text()
            self.expect_op(";")
            for name in names:
                decls.append(VarDecl(name, type_name, init))

    def parse_type_text(self) -> str:
        """Type as written; ARRAY [..] OF T collapses to its element type prefix."""
        if self.at_keyword("ARRAY"):
            self.take()
            self.expect_op("[")
            depth = 1
            while depth and self.peek() is not None:
                tok = self.take()
                if tok.kind is TokenKind.OP and tok.text == "[":
                    depth += 1
                elif tok.kind is TokenKind.OP and tok.text == "]":
                    depth -= 1
            self.expect_keyword("OF")
            return "ARRAY OF " + self.parse_type_text()
        tok = self.peek()
        if tok is None:
            raise _ParseFailure("expected a type name", None)
        if tok.kind not in (TokenKind.IDENT, TokenKind.KEYWORD):
            raise _ParseFailure(f"expected a type name, got {tok.text!r}", tok)
        self.take()
        text = tok.text
        if self.at_op("("):  # STRING(80) or similar size argument
            self.take()
            inner = []
            while not self.at_op(")") and self.peek() is not None:
                inner.append(self.take().text)
            self.expect_op(")")
            text += "(" + " ".join(inner) + ")"
        if self.at_op("["):
            self.take()
            inner = []
            while not self.at_op("]") and self.peek() is not None:
                inner.append(self.take().text)
            self.expect_op("]")
            text += "[" + " ".join(inner) + "]"
        return text

    def capture_until_semicolon_text(self) -> str:
        parts: list[str] = []
        depth = 0
        while True:
            tok = self.peek()
            if tok is None:
                break
            if tok.kind is TokenKind.OP:
                if tok.text in "([":
                    depth += 1
                elif tok.text in ")]":
                    depth -= 1
                elif tok.text == ";" and depth <= 0:
                    break
            if tok.kind is TokenKind.KEYWORD and tok.text.upper() == "END_VAR":
                break
            parts.append(self.take().text)
        return " ".join(parts)

    # -- statements

    _EXPR_STOP_KEYWORDS = {
        "THEN", "DO", "OF", "TO", "BY", "END_IF", "END_CASE", "END_FOR",
        "END_WHILE", "ELSE", "ELSIF", "END_ACTION",
    } | POU_END | POU_START | {"END_VAR", "VAR", "VAR_INPUT", "VAR_OUTPUT"}

    def capture_expression(self, stop_keywords: set[str] | None = None) -> TokenSeq:
        """Capture tokens up to ';' or a structural keyword at bracket depth 0."""
        stops = stop_keywords or self._EXPR_STOP_KEYWORDS
        out: list[Token] = []
        depth = 0
        while True:
            tok = self.peek()
            if tok is None:
                break
            if tok.kind is TokenKind.OP:
                if tok.text in "([":
                    depth += 1
                elif tok.text in ")]":
                    if depth == 0:
                        break
                    depth -= 1
                elif tok.text == ";" and depth == 0:
                    break
            if tok.kind is TokenKind.KEYWORD and depth == 0 and tok.text.upper() in stops:
                break
            out.append(self.take())
        return tuple(out)

    def require_expression(self, stop_keywords: set[str] | None = None) -> TokenSeq:
        tokens = self.capture_expression(stop_keywords)
        if not tokens:
            raise _ParseFailure("expected an expression", self.peek())
        return tokens

    def skip_empty_statements(self) -> None:
        while self.at_op(";"):
            self.take()

    def parse_statement(self) -> Statement:
        tok = self.peek()
        if tok is None:
            raise _ParseFailure("expected a statement", None)
        if self.at_keyword("IF"):
            return self.parse_if()
        if self.at_keyword("CASE"):
            return self.parse_case()
        if self.at_keyword("FOR"):
            return self.parse_for()
        if self.at_keyword("WHILE"):
            return self.parse_while()
        if tok.kind is TokenKind.IDENT:
            return self.parse_simple_statement()
        raise _ParseFailure(f"unexpected token {tok.text!r}", tok)

    def parse_simple_statement(self) -> Statement:
        first = self.expect_ident()
        path_tokens: list[Token] = [first]
        path_parts = [first.text]
        while self.at_op("."):
            path_tokens.append(self.take())
            member = self.expect_ident()
            path_tokens.append(member)
            path_parts.append(member.text)
        if self.at_op("("):
            # a plain call statement: name(...) ;
            self.take()
            args: list[Token] = []
            depth = 1
            while depth:
                tok = self.peek()
                if tok is None:
                    raise _ParseFailure("unterminated call argument list", first)
                if tok.kind is TokenKind.OP and tok.text in "([":
                    depth += 1
                elif tok.kind is TokenKind.OP and tok.text in ")]":
                    depth -= 1
                    if depth == 0:
                        self.take()
                        break
                args.append(self.take())
            if self.at_op(";"):
                self.take()
            return CallStatement(".".join(path_parts), tuple(args), first.line, first.col)
        # otherwise an assignment; indexes may appear on the target path
        while self.at_op("["):
            path_tokens.append(self.take())
            depth = 1
            while depth:
                tok = self.peek()
                if tok is None:
                    raise _ParseFailure("unterminated index expression", first)
                if tok.kind is TokenKind.OP and tok.text == "[":
                    depth += 1
                elif tok.kind is TokenKind.OP and tok.text == "]":
                    depth -= 1
                path_tokens.append(self.take())
            while self.at_op("."):
                path_tokens.append(self.take())
                path_tokens.append(self.expect_ident())
        self.expect_op(":=")
        value = self.require_expression()
        self.expect_op(";")
        return Assignment(tuple(path_tokens), value, first.line, first.col)

    def parse_if(self) -> IfStatement:
        head = self.expect_keyword("IF")
        branches: list[IfBranch] = []
        condition = self.require_expression()
        self.expect_keyword("THEN")
        body = self.parse_statements_until("ELSIF", "ELSE", "END_IF")
        branches.append(IfBranch(condition, tuple(body)))
        else_body: list[Statement] = []
        while self.at_keyword("ELSIF"):
            self.take()
            condition = self.require_expression()
            self.expect_keyword("THEN")
            body = self.parse_statements_until("ELSIF", "ELSE", "END_IF")
            branches.append(IfBranch(condition, tuple(body)))
        if self.at_keyword("ELSE"):
            self.take()
            else_body = self.parse_statements_until("END_IF")
        self.expect_keyword("END_IF")
        if self.at_op(";"):
            self.take()
        return IfStatement(tuple(branches), tuple(else_body), head.line, head.col)

    def parse_case(self) -> CaseStatement:
        head = self.expect_keyword("CASE")
        selector = self.require_expression()
        self.expect_keyword("OF")
        branches: list[CaseBranch] = []
        else_body: list[Statement] = []
        while True:
            if self.at_keyword("END_CASE"):
                self.take()
                break
            if self.at_keyword("ELSE"):
                self.take()
                else_body = self.parse_statements_until("END_CASE")
                self.expect_keyword("END_CASE")
                break
            if self.peek() is None:
                raise _ParseFailure("missing END_CASE", head)
            labels = self.parse_case_labels()
            body: list[Statement] = []
            self.skip_empty_statements()
            while not (
                self.at_keyword("END_CASE", "ELSE")
                or self.at_case_label()
                or self.peek() is None
            ):
                body.append(self.parse_statement())
                self.skip_empty_statements()
            branches.append(CaseBranch(tuple(labels), tuple(body)))
        if self.at_op(";"):
            self.take()
        return CaseStatement(selector, tuple(branches), tuple(else_body), head.line, head.col)

    def at_case_label(self) -> bool:
        """Lookahead: (literal|ident) (.. literal|ident)? (, ...)* ':' not ':='."""
        i = self.pos
        toks = self.tokens
        n = len(toks)

        def label_atom(j: int) -> int | None:
            if j < n and toks[j].kind in (TokenKind.NUMBER, TokenKind.IDENT):
                return j + 1
            return None

        j = label_atom(i)
        if j is None:
            return False
        while True:
            if j < n and toks[j].kind is TokenKind.OP and toks[j].text == "..":
                j2 = label_atom(j + 1)
                if j2 is None:
                    return False
                j = j2
            if j < n and toks[j].kind is TokenKind.OP and toks[j].text == ",":
                j2 = label_atom(j + 1)
                if j2 is None:
                    return False
                j = j2
                continue
            break
        return j < n and toks[j].kind is TokenKind.OP and toks[j].text == ":"

    def parse_case_labels(self) -> list[str]:
        labels: list[str] = []
        while True:
            tok = self.peek()
            if tok is None or tok.kind not in (TokenKind.NUMBER, TokenKind.IDENT):
                raise _ParseFailure("expected a case label", tok)
            label = self.take().text
            if self.at_op(".."):
                self.take()
                hi = self.peek()
                if hi is None or hi.kind not in (TokenKind.NUMBER, TokenKind.IDENT):
                    raise _ParseFailure("expected a case label after '..'", hi)
                label += ".." + self.take().text
            labels.append(label)
            if self.at_op(","):
                self.take()
                continue
            self.expect_op(":")
            return labels

    def parse_for(self) -> ForStatement:
        head = self.expect_keyword("FOR")
        var = self.expect_ident().text
        self.expect_op(":=")
        start = self.require_expression()
        self.expect_keyword("TO")
        stop = self.require_expression()
        step: TokenSeq = ()
        if self.at_keyword("BY"):
            self.take()
            step = self.require_expression()
        self.expect_keyword("DO")
        body = self.parse_statements_until("END_FOR")
        self.expect_keyword("END_FOR")
        if self.at_op(";"):
            self.take()
        return ForStatement(var, start, stop, step, tuple(body), head.line, head.col)

    def parse_while(self) -> WhileStatement:
        head = self.expect_keyword("WHILE")
        condition = self.require_expression()
        self.expect_keyword("DO")
        body = self.parse_statements_until("END_WHILE")
        self.expect_keyword("END_WHILE")
        if self.at_op(";"):
            self.take()
        return WhileStatement(condition, tuple(body), head.line, head.col)

    def parse_statements_until(self, *stop_words: str) -> list[Statement]:
        body: list[Statement] = []
        self.skip_empty_statements()
        while not self.at_keyword(*stop_words):
            if self.peek() is None:
                raise _ParseFailure(f"expected {' or '.join(stop_words)}", None)
            body.append(self.parse_statement())
            self.skip_empty_statements()
        return body


def parse_file(source: SourceFile) -> ParseResult:
    """Parse one ST source file into POUs and global variable declarations."""
    tokens, lex_diags = tokenize(source.text, source.path)
    parser = Parser(tokens, source.path)
    result = parser.parse_file()
    result.diagnostics[:0] = lex_diags
    return result


def parse_source(text: str, path: str = "<string>") -> ParseResult:
    return parse_file(SourceFile(path, text))


# --- token stream / pretty printing ------------------------------------------


def _kw(text: str) -> tuple[TokenKind, str]:
    return (TokenKind.KEYWORD, text)


def _op(text: str) -> tuple[TokenKind, str]:
    return (TokenKind.OP, text)


def statement_stream(statements: tuple[Statement, ...]) -> list[tuple[TokenKind, str]]:
    """Flatten a statement tree back into (kind, text) pairs.

    The stream re-lexes to the same token sequence, which makes it usable both
    for pretty printing and for normalized clone comparison.
    """
    out: list[tuple[TokenKind, str]] = []

    def emit_tokens(seq: TokenSeq) -> None:
        out.extend((t.kind, t.text) for t in seq)

    def walk(stmts: tuple[Statement, ...]) -> None:
        for stmt in stmts:
            if isinstance(stmt, Assignment):
                emit_tokens(stmt.target)
                out.append(_op(":="))
                emit_tokens(stmt.value)
                out.append(_op(";"))
            elif isinstance(stmt, CallStatement):
                parts = stmt.callee.split(".")
                for k, part in enumerate(parts):
                    if k:
                        out.append(_op("."))
                    out.append((TokenKind.IDENT, part))
                out.append(_op("("))
                emit_tokens(stmt.args)
                out.append(_op(")"))
                out.append(_op(";"))
            elif isinstance(stmt, IfStatement):
                for k, branch in enumerate(stmt.branches):
                    out.append(_kw("IF" if k == 0 else "ELSIF"))
                    emit_tokens(branch.condition)
                    out.append(_kw("THEN"))
                    walk(branch.body)
                if stmt.else_body:
                    out.append(_kw("ELSE"))
                    walk(stmt.else_body)
                out.append(_kw("END_IF"))
                out.append(_op(";"))
            elif isinstance(stmt, CaseStatement):
                out.append(_kw("CASE"))
                emit_tokens(stmt.selector)
                out.append(_kw("OF"))
                for branch in stmt.branches:
                    for k, label in enumerate(branch.labels):
                        if k:
                            out.append(_op(","))
                        for j, piece in enumerate(label.split("..")):
                            if j:
                                out.append(_op(".."))
                            kind = (
                                TokenKind.NUMBER
                                if piece[:1].isdigit()
                                else TokenKind.IDENT
                            )
                            out.append((kind, piece))
                    out.append(_op(":"))
                    walk(branch.body)
                if stmt.else_body:
                    out.append(_kw("ELSE"))
                    walk(stmt.else_body)
                out.append(_kw("END_CASE"))
                out.append(_op(";"))
            elif isinstance(stmt, ForStatement):
                out.append(_kw("FOR"))
                out.append((TokenKind.IDENT, stmt.var))
                out.append(_op(":="))
                emit_tokens(stmt.start)
                out.append(_kw("TO"))
                emit_tokens(stmt.stop)
                if stmt.step:
                    out.append(_kw("BY"))
                    emit_tokens(stmt.step)
                out.append(_kw("DO"))
                walk(stmt.body)
                out.append(_kw("END_FOR"))
                out.append(_op(";"))
            elif isinstance(stmt, WhileStatement):
                out.append(_kw("WHILE"))
                emit_tokens(stmt.condition)
                out.append(_kw("DO"))
                walk(stmt.body)
                out.append(_kw("END_WHILE"))
                out.append(_op(";"))
    walk(statements)
    return out


_SECTION_HEADERS = {
    SectionKind.VAR: "VAR",
    SectionKind.VAR_INPUT: "VAR_INPUT",
    SectionKind.VAR_OUTPUT: "VAR_OUTPUT",
    SectionKind.VAR_IN_OUT: "VAR_IN_OUT",
    SectionKind.VAR_TEMP: "VAR_TEMP",
    SectionKind.VAR_GLOBAL: "VAR_GLOBAL",
}

_BREAK_AFTER = {";", "THEN", "ELSE", "DO", "OF"}


def _render_stream(stream: list[tuple[TokenKind, str]]) -> str:
    lines: list[str] = []
    current: list[str] = []
    for kind, text in stream:
        current.append(text)
        if text.upper() in _BREAK_AFTER or (kind is TokenKind.OP and text == ";"):
            lines.append(" ".join(current))
            current = []
    if current:
        lines.append(" ".join(current))
    return "\n".join(lines)


def format_pou(pou: Pou) -> str:
    """Emit a POU back as parseable Structured Text."""
    head = {
        PouKind.PROGRAM: "PROGRAM",
        PouKind.FUNCTION_BLOCK: "FUNCTION_BLOCK",
        PouKind.FUNCTION: "FUNCTION",
    }[pou.kind]
    parts = [f"{head} {pou.name}" + (f" : {pou.return_type}" if pou.return_type else "")]
    for section in pou.var_sections:
        header = _SECTION_HEADERS[section.kind]
        if section.constant:
            header += " CONSTANT"
        parts.append(header)
        for decl in section.decls:
            init = f" := {decl.init}" if decl.init is not None else ""
            parts.append(f"  {decl.name} : {decl.type_name}{init};")
        parts.append("END_VAR")
    parts.append(_render_stream(statement_stream(pou.statements)))
    for action in pou.actions:
        parts.append(f"ACTION {action.name}")
        parts.append(_render_stream(statement_stream(action.body)))
        parts.append("END_ACTION")
    parts.append("END_" + head)
    return "\n".join(p for p in parts if p) + "\n"


def format_global_block(globals_: list[GlobalVar] | tuple[GlobalVar, ...]) -> str:
    plain = [g for g in globals_ if not g.constant]
    const = [g for g in globals_ if g.constant]
    parts: list[str] = []
    for group, header in ((const, "VAR_GLOBAL CONSTANT"), (plain, "VAR_GLOBAL")):
        if not group:
            continue
        parts.append(header)
        for g in group:
            init = f" := {g.init}" if g.init is not None else ""
            parts.append(f"  {g.name} : {g.type_name}{init};")
        parts.append("END_VAR")
    return "\n".join(parts) + ("\n" if parts else "")


def pou_signature(pou: Pou) -> tuple:
    """Position-free structural projection of a POU, for equality checks."""
    return (
        pou.name.lower(),
        pou.kind,
        (pou.return_type or "").lower(),
        tuple(
            (
                s.kind,
                s.constant,
                tuple((d.name.lower(), d.type_name.lower(), d.init) for d in s.decls),
            )
            for s in pou.var_sections
        ),
        tuple(statement_stream(pou.statements)),
        tuple(
            (a.name.lower(), tuple(statement_stream(a.body))) for a in pou.actions
        ),
    )
