"""Parser for protocol sources (.cp) and the shared proposition grammar.

The format is keyword-delimited and whitespace-insensitive:

    protocol appointment {
      role PHY
      role PAT

      message selectSlot PAT -> PHY (s) {
        meaning {
          create C(PAT, PHY, top, showUp(PAT, s))
        }
      }
    }

Propositions: `top`, event atoms `name(args)`, `a . b` for a-before-b,
`and` conjunction, `exists v in [..]: body`, and nested `C(d, c, r, u)`.
In release/cancel/delegate/assign patterns `_` matches any proposition or
term.

The parser never raises on malformed input; it reports error diagnostics
with positions and recovers at the next declaration.  Constructs that
would describe a principal's internals (goal, belief, intention, plan,
desire, internal) have no grammar; using one is reported under its own
rule so the refusal is explained, not silent.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import Diagnostic, Severity, Span, has_errors
from .propositions import (
    AnyProposition,
    Before,
    CommitmentAtom,
    EventAtom,
    ExistsIn,
    Literal,
    Proposition,
    RoleRef,
    Term,
    Top,
    Var,
    Wildcard,
    conjoin,
    render,
    render_term,
)
from .protocol import (
    AssignClause,
    CancelClause,
    CommitmentPattern,
    CreateClause,
    DelegateClause,
    MeaningClause,
    MessageSchema,
    OrderingConstraint,
    Protocol,
    ReleaseClause,
)

INTERNAL_KEYWORDS = frozenset({"goal", "belief", "intention", "plan", "desire", "internal"})

_PUNCT_SINGLE = "{}()[],:<.=_"
_MAX_DEPTH = 64


@dataclass(frozen=True)
class Token:
    kind: str  # ident | int | string | punct | eof
    text: str
    line: int
    col: int

    def span(self) -> Span:
        return Span(self.line, self.col, self.line, self.col + max(1, len(self.text)))


def tokenize(text: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diagnostics: list[Diagnostic] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isalpha() or (ch == "_" and i + 1 < n and (text[i + 1].isalnum() or text[i + 1] == "_")):
            start = i
            i += 1
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            tokens.append(Token("ident", text[start:i], line, col))
            col += i - start
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit()):
            start = i
            i += 1
            while i < n and text[i].isdigit():
                i += 1
            tokens.append(Token("int", text[start:i], line, col))
            col += i - start
            continue
        if ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            out = []
            closed = False
            while i < n and text[i] != "\n":
                c = text[i]
                if c == "\\" and i + 1 < n:
                    out.append(text[i + 1])
                    i += 2
                    col += 2
                    continue
                if c == '"':
                    i += 1
                    col += 1
                    closed = True
                    break
                out.append(c)
                i += 1
                col += 1
            if not closed:
                diagnostics.append(
                    Diagnostic(
                        Severity.ERROR,
                        "E-SYNTAX",
                        Span.point(start_line, start_col),
                        "unterminated string",
                    )
                )
            tokens.append(Token("string", "".join(out), start_line, start_col))
            continue
        if ch == "-" and i + 1 < n and text[i + 1] == ">":
            tokens.append(Token("punct", "->", line, col))
            i += 2
            col += 2
            continue
        if ch in _PUNCT_SINGLE:
            tokens.append(Token("punct", ch, line, col))
            i += 1
            col += 1
            continue
        diagnostics.append(
            Diagnostic(
                Severity.ERROR,
                "E-SYNTAX",
                Span.point(line, col),
                f"unexpected character {ch!r}",
            )
        )
        i += 1
        col += 1
    tokens.append(Token("eof", "", line, col))
    return tokens, diagnostics


class _Bail(Exception):
    """Local parse failure; recovery happens at the declaration level."""


@dataclass
class ParseResult:
    protocol: Protocol | None
    diagnostics: list[Diagnostic]


class PropParser:
    """Recursive-descent proposition/term parser over a token list.

    `literal_idents` selects how bare identifiers read: in protocol
    sources they are role references or variables; in scenario sources
    (concrete principals and values) they are string literals unless bound
    by an enclosing `exists`.
    """

    def __init__(
        self,
        tokens: list[Token],
        diagnostics: list[Diagnostic],
        *,
        roles: frozenset[str] = frozenset(),
        literal_idents: bool = False,
    ):
        self.tokens = tokens
        self.diagnostics = diagnostics
        self.roles = roles
        self.literal_idents = literal_idents
        self.pos = 0
        self.bound: list[str] = []
        self.depth = 0

    # -- token plumbing

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at_punct(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "punct" and tok.text == text

    def at_ident(self, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == "ident" and (text is None or tok.text == text)

    def error(self, tok: Token, message: str, rule: str = "E-SYNTAX", principle: str = "syntax") -> None:
        severity = Severity.ERROR
        self.diagnostics.append(Diagnostic(severity, rule, tok.span(), message, principle))

    def bail(self, tok: Token, message: str) -> None:
        self.error(tok, message)
        raise _Bail()

    def expect_punct(self, text: str) -> Token:
        if not self.at_punct(text):
            self.bail(self.peek(), f"expected {text!r}")
        return self.next()

    def expect_ident(self, what: str = "name") -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            self.bail(tok, f"expected {what}")
        return self.next()

    # -- terms

    def parse_term(self, *, allow_wildcard: bool) -> Term:
        tok = self.peek()
        if tok.kind == "int":
            self.next()
            return Literal(int(tok.text))
        if tok.kind == "string":
            self.next()
            return Literal(tok.text)
        if tok.kind == "punct" and tok.text == "_":
            self.next()
            if not allow_wildcard:
                self.error(tok, "wildcard `_` is only allowed in patterns and event arguments")
            return Wildcard()
        if tok.kind == "punct" and tok.text == "[":
            return self.parse_list_literal()
        if tok.kind == "ident":
            self.next()
            if tok.text in self.bound:
                return Var(tok.text)
            if tok.text in self.roles:
                return RoleRef(tok.text)
            if self.literal_idents:
                return Literal(tok.text)
            return Var(tok.text)
        self.bail(tok, "expected a term")
        raise AssertionError("unreachable")

    def parse_list_literal(self) -> Literal:
        open_tok = self.expect_punct("[")
        values = []
        if not self.at_punct("]"):
            while True:
                item = self.parse_term(allow_wildcard=False)
                if not isinstance(item, Literal):
                    self.error(open_tok, "list entries must be literal values")
                    item = Literal(render_term(item))
                values.append(item.value)
                if self.at_punct(","):
                    self.next()
                    continue
                break
        self.expect_punct("]")
        return Literal(tuple(values))

    # -- propositions

    def parse_proposition(self, *, pattern: bool = False) -> Proposition:
        self.depth += 1
        try:
            if self.depth > _MAX_DEPTH:
                self.bail(self.peek(), "proposition nesting too deep")
            if self.at_ident("exists"):
                return self.parse_exists(pattern=pattern)
            parts = [self.parse_unit(pattern=pattern)]
            while self.at_ident("and"):
                self.next()
                if self.at_ident("exists"):
                    parts.append(self.parse_exists(pattern=pattern))
                else:
                    parts.append(self.parse_unit(pattern=pattern))
            return conjoin(parts)
        finally:
            self.depth -= 1

    def parse_exists(self, *, pattern: bool) -> Proposition:
        self.next()  # exists
        var_tok = self.expect_ident("variable")
        if not self.at_ident("in"):
            self.bail(self.peek(), "expected 'in'")
        self.next()
        domain: tuple[Term, ...] | Var
        if self.at_punct("["):
            items: list[Term] = []
            self.next()
            if not self.at_punct("]"):
                while True:
                    items.append(self.parse_term(allow_wildcard=False))
                    if self.at_punct(","):
                        self.next()
                        continue
                    break
            self.expect_punct("]")
            domain = tuple(items)
        else:
            dom_tok = self.expect_ident("domain")
            domain = Var(dom_tok.text)
        self.expect_punct(":")
        self.bound.append(var_tok.text)
        try:
            body = self.parse_proposition(pattern=pattern)
        finally:
            self.bound.pop()
        return ExistsIn(var_tok.text, domain, body)

    def parse_unit(self, *, pattern: bool) -> Proposition:
        tok = self.peek()
        if tok.kind == "punct" and tok.text == "_":
            self.next()
            if not pattern:
                self.error(tok, "wildcard `_` is only allowed in patterns")
            return AnyProposition()
        if tok.kind == "punct" and tok.text == "(":
            self.next()
            inner = self.parse_proposition(pattern=pattern)
            self.expect_punct(")")
            return inner
        if tok.kind != "ident":
            self.bail(tok, "expected a condition")
        if tok.text == "top":
            self.next()
            return Top()
        if tok.text == "C" and self.peek(1).kind == "punct" and self.peek(1).text == "(":
            return self.parse_commitment_atom(pattern=pattern)
        atom = self.parse_event_atom()
        if self.at_punct("."):
            self.next()
            if not (self.at_ident() and self.peek().text not in ("top", "C")):
                self.bail(self.peek(), "expected an event name after '.'")
            second = self.parse_event_atom()
            return Before(atom, second)
        return atom

    def parse_event_atom(self) -> EventAtom:
        name_tok = self.expect_ident("event name")
        args: list[Term] = []
        if self.at_punct("("):
            self.next()
            if not self.at_punct(")"):
                while True:
                    args.append(self.parse_term(allow_wildcard=True))
                    if self.at_punct(","):
                        self.next()
                        continue
                    break
            self.expect_punct(")")
        return EventAtom(name_tok.text, tuple(args))

    def parse_commitment_atom(self, *, pattern: bool) -> CommitmentAtom:
        self.next()  # C
        self.expect_punct("(")
        debtor = self.parse_term(allow_wildcard=pattern)
        self.expect_punct(",")
        creditor = self.parse_term(allow_wildcard=pattern)
        self.expect_punct(",")
        antecedent = self.parse_proposition(pattern=pattern)
        self.expect_punct(",")
        # a variable the antecedent chooses stays available to the consequent
        extra = antecedent.var if isinstance(antecedent, ExistsIn) else None
        if extra is not None:
            self.bound.append(extra)
        try:
            consequent = self.parse_proposition(pattern=pattern)
        finally:
            if extra is not None:
                self.bound.pop()
        self.expect_punct(")")
        return CommitmentAtom(debtor, creditor, antecedent, consequent)


_DECL_SYNC = frozenset({"role", "param", "message", "order", "protocol"})


class _ProtocolParser(PropParser):
    def __init__(self, tokens: list[Token], diagnostics: list[Diagnostic], roles: frozenset[str]):
        super().__init__(tokens, diagnostics, roles=roles, literal_idents=False)

    def sync_decl(self) -> None:
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                return
            if tok.kind == "ident" and tok.text in _DECL_SYNC:
                return
            if tok.kind == "ident" and tok.text in INTERNAL_KEYWORDS:
                return
            if tok.kind == "punct" and tok.text == "}":
                return
            self.next()

    def parse_protocol(self) -> Protocol:
        if not self.at_ident("protocol"):
            self.bail(self.peek(), "expected protocol header")
        header = self.next()
        name_tok = self.expect_ident("protocol name")
        self.expect_punct("{")
        roles: list[str] = []
        params: list[str] = []
        messages: list[MessageSchema] = []
        orderings: list[OrderingConstraint] = []
        while not self.at_punct("}"):
            tok = self.peek()
            if tok.kind == "eof":
                self.bail(tok, "unexpected end of input, expected '}'")
            before = self.pos
            try:
                if tok.kind != "ident":
                    self.bail(tok, "expected a declaration")
                if tok.text in INTERNAL_KEYWORDS:
                    self.error(
                        tok,
                        f"`{tok.text}` describes a principal's internals; a protocol "
                        "states only the communications and their social meanings",
                        rule="L-INTERNAL",
                        principle="no-principal-internals",
                    )
                    self.next()
                    raise _Bail()
                if tok.text == "role":
                    self.next()
                    roles.append(self.expect_ident("role name").text)
                elif tok.text == "param":
                    self.next()
                    params.append(self.expect_ident("parameter name").text)
                elif tok.text == "order":
                    self.next()
                    first = self.expect_ident("message name")
                    self.expect_punct("<")
                    second = self.expect_ident("message name")
                    orderings.append(
                        OrderingConstraint(first.text, second.text, _span_between(tok, second))
                    )
                elif tok.text == "message":
                    messages.append(self.parse_message(params))
                else:
                    self.bail(tok, f"unknown declaration {tok.text!r}")
            except _Bail:
                self.sync_decl()
                # recovery must consume something or the loop would spin
                if self.pos == before and not self.at_punct("}") and self.peek().kind != "eof":
                    self.next()
        self.expect_punct("}")
        trailing = self.peek()
        if trailing.kind != "eof":
            self.error(trailing, "content after closing '}'")
        return Protocol(
            name=name_tok.text,
            roles=tuple(roles),
            params=tuple(params),
            messages=tuple(messages),
            orderings=tuple(orderings),
            span=_span_between(header, name_tok),
        )

    def parse_message(self, protocol_params: list[str]) -> MessageSchema:
        start = self.next()  # message
        name_tok = self.expect_ident("message name")
        sender_tok = self.expect_ident("sender role")
        self.expect_punct("->")
        receiver_tok = self.expect_ident("receiver role")
        params: list[str] = []
        if self.at_punct("("):
            self.next()
            if not self.at_punct(")"):
                while True:
                    params.append(self.expect_ident("parameter name").text)
                    if self.at_punct(","):
                        self.next()
                        continue
                    break
            self.expect_punct(")")
        meaning: tuple[MeaningClause, ...] = ()
        meaning_none = False
        self.bound = list(protocol_params) + params
        try:
            if self.at_punct("{"):
                self.next()
                if not self.at_ident("meaning"):
                    self.bail(self.peek(), "expected 'meaning'")
                self.next()
                if self.at_ident("none"):
                    self.next()
                    meaning_none = True
                else:
                    meaning = self.parse_meaning_clauses()
                self.expect_punct("}")
        finally:
            self.bound = []
        return MessageSchema(
            name=name_tok.text,
            sender=sender_tok.text,
            receiver=receiver_tok.text,
            params=tuple(params),
            meaning=meaning,
            meaning_none=meaning_none,
            span=_span_between(start, receiver_tok),
        )

    def parse_meaning_clauses(self) -> tuple[MeaningClause, ...]:
        self.expect_punct("{")
        clauses: list[MeaningClause] = []
        while not self.at_punct("}"):
            tok = self.peek()
            if tok.kind == "eof":
                self.bail(tok, "unexpected end of input in meaning block")
            if tok.kind != "ident":
                self.bail(tok, "expected a meaning clause")
            if tok.text in INTERNAL_KEYWORDS:
                self.error(
                    tok,
                    f"`{tok.text}` describes a principal's internals; message meanings "
                    "are stated as commitment operations",
                    rule="L-INTERNAL",
                    principle="no-principal-internals",
                )
                self.next()
                raise _Bail()
            span_start = tok
            if tok.text == "create":
                self.next()
                atom = self.parse_commitment_atom(pattern=False)
                clauses.append(
                    CreateClause(
                        atom.debtor,
                        atom.creditor,
                        atom.antecedent,
                        atom.consequent,
                        span_start.span(),
                    )
                )
            elif tok.text in ("release", "cancel", "delegate", "assign"):
                self.next()
                atom = self.parse_commitment_atom(pattern=True)
                cpattern = CommitmentPattern(atom.debtor, atom.creditor, atom.antecedent, atom.consequent)
                if tok.text == "release":
                    clauses.append(ReleaseClause(cpattern, span_start.span()))
                elif tok.text == "cancel":
                    clauses.append(CancelClause(cpattern, span_start.span()))
                else:
                    if not self.at_ident("to"):
                        self.bail(self.peek(), "expected 'to'")
                    self.next()
                    target = self.expect_ident("role name")
                    if tok.text == "delegate":
                        clauses.append(DelegateClause(cpattern, target.text, span_start.span()))
                    else:
                        clauses.append(AssignClause(cpattern, target.text, span_start.span()))
            else:
                self.bail(tok, f"unknown meaning clause {tok.text!r}")
        self.expect_punct("}")
        return tuple(clauses)


def _span_between(start: Token, end: Token) -> Span:
    return Span(start.line, start.col, end.line, end.col + max(1, len(end.text)))


def _prescan_roles(tokens: list[Token]) -> frozenset[str]:
    roles = set()
    for i, tok in enumerate(tokens[:-1]):
        if tok.kind == "ident" and tok.text == "role" and tokens[i + 1].kind == "ident":
            roles.add(tokens[i + 1].text)
    return frozenset(roles)


def parse_with_diagnostics(text: str) -> ParseResult:
    tokens, diagnostics = tokenize(text)
    parser = _ProtocolParser(tokens, diagnostics, _prescan_roles(tokens))
    protocol: Protocol | None = None
    try:
        protocol = parser.parse_protocol()
    except _Bail:
        protocol = None
    except RecursionError:
        diagnostics.append(
            Diagnostic(Severity.ERROR, "E-SYNTAX", Span.point(1, 1), "input nested too deeply")
        )
        protocol = None
    if has_errors(diagnostics):
        protocol = None
    return ParseResult(protocol, diagnostics)


def parse(text: str) -> Protocol | list[Diagnostic]:
    """Parse a protocol source; a Protocol on success, else its diagnostics."""
    result = parse_with_diagnostics(text)
    if result.protocol is not None:
        return result.protocol
    return result.diagnostics


def parse_proposition_text(text: str, *, literal_idents: bool = True) -> Proposition:
    """Parse a standalone proposition, raising ValueError on bad input.

    Used for propositions embedded in scenario files and trace records."""
    tokens, diagnostics = tokenize(text)
    parser = PropParser(tokens, diagnostics, literal_idents=literal_idents)
    try:
        prop = parser.parse_proposition()
    except _Bail:
        prop = None
    if prop is None or has_errors(diagnostics) or parser.peek().kind != "eof":
        detail = diagnostics[0].message if diagnostics else "trailing content"
        raise ValueError(f"bad proposition {text!r}: {detail}")
    return prop


# ---------------------------------------------------------------------------
# canonical printing


def format_protocol(protocol: Protocol) -> str:
    out: list[str] = [f"protocol {protocol.name} {{"]
    for role in protocol.roles:
        out.append(f"  role {role}")
    for param in protocol.params:
        out.append(f"  param {param}")
    for ordering in protocol.orderings:
        out.append(f"  order {ordering.first} < {ordering.second}")
    for schema in protocol.messages:
        out.append("")
        params = f" ({', '.join(schema.params)})" if schema.params else ""
        head = f"  message {schema.name} {schema.sender} -> {schema.receiver}{params}"
        if schema.meaning_none:
            out.append(head + " {")
            out.append("    meaning none")
            out.append("  }")
        elif not schema.meaning:
            out.append(head)
        else:
            out.append(head + " {")
            out.append("    meaning {")
            for clause in schema.meaning:
                out.append(f"      {_format_clause(clause)}")
            out.append("    }")
            out.append("  }")
    out.append("}")
    return "\n".join(out) + "\n"


def _format_pattern(p: CommitmentPattern) -> str:
    return "C({}, {}, {}, {})".format(
        render_term(p.debtor, quote_strings=True),
        render_term(p.creditor, quote_strings=True),
        render(p.antecedent, quote_strings=True),
        render(p.consequent, quote_strings=True),
    )


def _format_clause(clause: MeaningClause) -> str:
    if isinstance(clause, CreateClause):
        return "create C({}, {}, {}, {})".format(
            render_term(clause.debtor, quote_strings=True),
            render_term(clause.creditor, quote_strings=True),
            render(clause.antecedent, quote_strings=True),
            render(clause.consequent, quote_strings=True),
        )
    if isinstance(clause, ReleaseClause):
        return f"release {_format_pattern(clause.pattern)}"
    if isinstance(clause, CancelClause):
        return f"cancel {_format_pattern(clause.pattern)}"
    if isinstance(clause, DelegateClause):
        return f"delegate {_format_pattern(clause.pattern)} to {clause.target_role}"
    if isinstance(clause, AssignClause):
        return f"assign {_format_pattern(clause.pattern)} to {clause.target_role}"
    raise TypeError(f"not a meaning clause: {clause!r}")
