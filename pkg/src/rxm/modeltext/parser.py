"""Recursive-descent parser for model (.rxm) and script (.rxs) text.

All errors are collected, not first-only: the parser synchronizes at
statement and block boundaries and keeps going. Semantic diagnostics
from bundle validation are folded into the same error list, anchored at
the declaration that caused them where possible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .. import expr as E
from ..bundle import ModelBundle, ObjectDecl
from ..errors import RxmError
from ..lsc import (
    AllBinding,
    Binder,
    ChartSpec,
    ConcreteBinding,
    Cond,
    ExprTerm,
    Forbidden,
    Lifeline,
    Loop,
    Message,
    SymbolicBinding,
    Sync,
)
from ..objects import ClassDef, EventDecl, PropertyDef
from ..script import AssertActive, AssertProp, InjectStep, Script, TickStep
from ..statechart import (
    Assign,
    AssignProp,
    Emit,
    EventTrigger,
    Raise,
    Region,
    StateNode,
    StatechartSpec,
    TimerTrigger,
    Transition,
    VarDecl,
)
from ..values import NULL_REF, ObjRef
from .lexer import Token, tokenize

KINDS = ("int", "string", "bool", "ref")
SECTION_KEYWORDS = ("class", "object", "statechart", "chart", "script")


@dataclass(frozen=True)
class ParseError:
    file: str
    line: int
    col: int
    message: str
    excerpt: str

    def __str__(self) -> str:
        caret = " " * (self.col - 1) + "^"
        return (f"{self.file}:{self.line}:{self.col}: {self.message}\n"
                f"  {self.excerpt}\n  {caret}")


class ParseFailure(RxmError):
    def __init__(self, errors: list[ParseError]):
        super().__init__(f"{len(errors)} error(s)")
        self.errors = errors

    def __str__(self) -> str:
        return "\n".join(str(e) for e in self.errors)


@dataclass
class _DeclPositions:
    by_name: dict[str, tuple[int, int]] = field(default_factory=dict)

    def record(self, name: str, token: Token):
        self.by_name.setdefault(name, (token.line, token.col))

    def find_in(self, message: str) -> tuple[int, int] | None:
        for name in re.findall(r"'([^']+)'", message):
            if name in self.by_name:
                return self.by_name[name]
        return None


class _Parser:
    def __init__(self, text: str, filename: str):
        self.filename = filename
        self.lines = text.splitlines() or [""]
        self.tokens, lex_errors = tokenize(text)
        self.pos = 0
        self.errors: list[ParseError] = []
        for err in lex_errors:
            self._error_at(err.line, err.col, err.message)
        self.decls = _DeclPositions()

    # -- token plumbing --------------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        idx = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[idx]

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.text == text and tok.kind in ("IDENT", "PUNCT")

    def at_kind(self, kind: str) -> bool:
        return self.peek().kind == kind

    def take(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            return self.take()
        return None

    def expect(self, text: str) -> Token | None:
        if self.at(text):
            return self.take()
        self.error(f"expected '{text}'")
        return None

    def expect_ident(self, what: str = "identifier") -> Token | None:
        if self.at_kind("IDENT"):
            return self.take()
        self.error(f"expected {what}")
        return None

    def _progressing(self) -> bool:
        """Loop guard: force one token of progress after a stuck recovery."""
        if self.pos == getattr(self, "_last_loop_pos", -1):
            self.take()
        self._last_loop_pos = self.pos
        return True

    # -- error handling ----------------------------------------------------------

    def _error_at(self, line: int, col: int, message: str):
        excerpt = self.lines[line - 1] if 0 < line <= len(self.lines) else ""
        self.errors.append(ParseError(self.filename, line, col, message, excerpt))

    def error(self, message: str, token: Token | None = None):
        tok = token or self.peek()
        where = tok.text if tok.kind != "EOF" else "end of input"
        self._error_at(tok.line, tok.col, f"{message} (found '{where}')")

    def sync_statement(self):
        """Skip to just past the next ';', or stop before '}'/section/EOF."""
        depth = 0
        while not self.at_kind("EOF"):
            tok = self.peek()
            if depth == 0:
                if tok.text == ";":
                    self.take()
                    return
                if tok.text == "}" or tok.text in SECTION_KEYWORDS:
                    return
            if tok.text == "{":
                depth += 1
            elif tok.text == "}":
                if depth == 0:
                    return
                depth -= 1
            self.take()

    def sync_block(self):
        """Skip a malformed block through its closing '}'."""
        depth = 0
        while not self.at_kind("EOF"):
            tok = self.take()
            if tok.text == "{":
                depth += 1
            elif tok.text == "}":
                if depth <= 1:
                    return
                depth -= 1
            elif depth == 0 and tok.text in SECTION_KEYWORDS:
                self.pos -= 1
                return

    # -- literals and expressions ---------------------------------------------------

    def parse_literal(self):
        tok = self.peek()
        if tok.kind == "INT":
            self.take()
            return tok.value
        if tok.text == "-" and self.peek(1).kind == "INT":
            self.take()
            return -self.take().value
        if tok.kind == "STRING":
            self.take()
            return tok.value
        if tok.text == "true":
            self.take()
            return True
        if tok.text == "false":
            self.take()
            return False
        if tok.text == "null":
            self.take()
            return NULL_REF
        if tok.kind == "IDENT":
            self.take()
            return ObjRef(tok.text)
        self.error("expected a literal")
        self.take()
        return 0

    def parse_expr(self) -> E.Expr:
        expr = self._parse_or()
        if self.accept("?"):
            then = self.parse_expr()
            self.expect(":")
            other = self.parse_expr()
            return E.Ternary(expr, then, other)
        return expr

    def _parse_or(self) -> E.Expr:
        left = self._parse_and()
        while self.at("||"):
            self.take()
            left = E.Binary("||", left, self._parse_and())
        return left

    def _parse_and(self) -> E.Expr:
        left = self._parse_cmp()
        while self.at("&&"):
            self.take()
            left = E.Binary("&&", left, self._parse_cmp())
        return left

    def _parse_cmp(self) -> E.Expr:
        left = self._parse_add()
        for op in ("==", "!=", "<=", ">=", "<", ">"):
            if self.at(op):
                self.take()
                return E.Binary(op, left, self._parse_add())
        return left

    def _parse_add(self) -> E.Expr:
        left = self._parse_mul()
        while self.at("+") or self.at("-"):
            op = self.take().text
            left = E.Binary(op, left, self._parse_mul())
        return left

    def _parse_mul(self) -> E.Expr:
        left = self._parse_unary()
        while self.at("*") or self.at("/") or self.at("%"):
            op = self.take().text
            left = E.Binary(op, left, self._parse_unary())
        return left

    def _parse_unary(self) -> E.Expr:
        if self.at("!"):
            self.take()
            return E.Unary("!", self._parse_unary())
        if self.at("-"):
            self.take()
            return E.Unary("-", self._parse_unary())
        return self._parse_primary()

    def _parse_primary(self) -> E.Expr:
        tok = self.peek()
        if tok.kind == "INT":
            self.take()
            return E.Lit(tok.value)
        if tok.kind == "STRING":
            self.take()
            return E.Lit(tok.value)
        if tok.text in ("true", "false"):
            self.take()
            return E.Lit(tok.text == "true")
        if tok.text == "null":
            self.take()
            return E.Lit(NULL_REF)
        if tok.text == "(":
            self.take()
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if tok.text == "active":
            self.take()
            self.expect("(")
            path = self._parse_dotted()
            self.expect(")")
            return E.ActiveQuery(tuple(path))
        if tok.kind == "IDENT":
            self.take()
            if self.at(".") and self.peek(1).kind == "IDENT":
                self.take()
                attr = self.take()
                return E.Attr(tok.text, attr.text)
            return E.Name(tok.text)
        self.error("expected an expression")
        self.take()
        return E.Lit(0)

    def _parse_dotted(self) -> list[str]:
        parts = []
        tok = self.expect_ident("state path")
        if tok:
            parts.append(tok.text)
        while self.at("."):
            self.take()
            tok = self.expect_ident("path segment")
            if tok:
                parts.append(tok.text)
            else:
                break
        return parts

    def parse_duration(self) -> int:
        tok = self.peek()
        if tok.kind != "INT":
            self.error("expected a duration")
            self.take()
            return 1
        self.take()
        value = tok.value
        unit = self.peek()
        if unit.kind == "IDENT" and unit.text in ("ms", "s"):
            self.take()
            if unit.text == "s":
                value *= 1000
        return value

    # -- model ------------------------------------------------------------------------

    def parse_model(self) -> ModelBundle:
        bundle = ModelBundle()
        while not self.at_kind("EOF"):
            tok = self.peek()
            if tok.text == "class":
                decl = self.parse_class()
                if decl:
                    bundle.classes.append(decl)
            elif tok.text == "object":
                decl = self.parse_object()
                if decl:
                    bundle.objects.append(decl)
            elif tok.text == "statechart":
                decl = self.parse_statechart()
                if decl:
                    bundle.machines.append(decl)
            elif tok.text == "chart":
                decl = self.parse_chart()
                if decl:
                    bundle.charts.append(decl)
            else:
                self.error("expected 'class', 'object', 'statechart' or 'chart'")
                self.take()
        return bundle

    def parse_class(self) -> ClassDef | None:
        self.take()  # class
        name = self.expect_ident("class name")
        if name is None:
            self.sync_block()
            return None
        self.decls.record(name.text, name)
        cls = ClassDef(name.text)
        if not self.expect("{"):
            self.sync_block()
            return cls
        while self._progressing() and not self.at("}") and not self.at_kind("EOF"):
            if self.accept("prop"):
                pname = self.expect_ident("property name")
                self.expect(":")
                kind = self._parse_kind()
                default = None
                if self.accept("="):
                    default = self.parse_literal()
                self.expect(";") or self.sync_statement()
                if pname:
                    cls.properties.append(PropertyDef(pname.text, kind, default))
            elif self.at("signal") or self.at("method"):
                member = self.take().text
                ename = self.expect_ident("event name")
                self.expect("/")
                arity = 0
                if self.at_kind("INT"):
                    arity = self.take().value
                else:
                    self.error("expected an arity")
                self.expect(";") or self.sync_statement()
                if ename:
                    target = cls.signals if member == "signal" else cls.methods
                    target.append(EventDecl(ename.text, arity))
            else:
                self.error("expected 'prop', 'signal' or 'method'")
                self.sync_statement()
        self.expect("}")
        return cls

    def _parse_kind(self) -> str:
        tok = self.peek()
        if tok.kind == "IDENT" and tok.text in KINDS:
            self.take()
            return tok.text
        self.error("expected a kind (int, string, bool, ref)")
        if tok.kind == "IDENT":
            self.take()
        return "int"

    def parse_object(self) -> ObjectDecl | None:
        self.take()  # object
        name = self.expect_ident("object id")
        self.expect(":")
        cls = self.expect_ident("class name")
        if name is None or cls is None:
            self.sync_statement()
            return None
        self.decls.record(name.text, name)
        decl = ObjectDecl(name.text, cls.text)
        if self.accept(";"):
            return decl
        if not self.expect("{"):
            self.sync_statement()
            return decl
        while self._progressing() and not self.at("}") and not self.at_kind("EOF"):
            pname = self.expect_ident("property name")
            self.expect("=")
            value = self.parse_literal()
            self.expect(";") or self.sync_statement()
            if pname:
                decl.overrides[pname.text] = value
        self.expect("}")
        return decl

    # -- statecharts ---------------------------------------------------------------------

    def parse_statechart(self) -> StatechartSpec | None:
        self.take()  # statechart
        name = self.expect_ident("statechart name")
        self.expect("for")
        owner = self.expect_ident("owner class")
        if name is None or owner is None:
            self.sync_block()
            return None
        self.decls.record(name.text, name)
        spec = StatechartSpec(name.text, owner.text)
        if not self.expect("{"):
            self.sync_block()
            return spec
        while self._progressing() and not self.at("}") and not self.at_kind("EOF"):
            if self.accept("var"):
                vname = self.expect_ident("variable name")
                self.expect(":")
                kind = self._parse_kind()
                default = None
                if self.accept("="):
                    default = self.parse_literal()
                self.expect(";") or self.sync_statement()
                if vname:
                    spec.variables.append(VarDecl(vname.text, kind, default))
            elif self.accept("in"):
                ename = self.expect_ident("event name")
                self.expect("/")
                arity = self.take().value if self.at_kind("INT") else 0
                self.expect(";") or self.sync_statement()
                if ename:
                    spec.inputs.append((ename.text, arity))
            elif self.accept("out"):
                ename = self.expect_ident("event name")
                self.expect("/")
                arity = self.take().value if self.at_kind("INT") else 0
                self.expect("->")
                peer = self.expect_ident("peer class")
                self.expect(";") or self.sync_statement()
                if ename and peer:
                    spec.outputs.append((ename.text, arity, peer.text))
            elif self.at("region"):
                region = self.parse_region()
                if region:
                    spec.regions.append(region)
            else:
                self.error("expected 'var', 'in', 'out' or 'region'")
                self.sync_statement()
        self.expect("}")
        return spec

    def parse_region(self) -> Region | None:
        self.take()  # region
        name = self.expect_ident("region name")
        if not self.expect("{"):
            self.sync_block()
            return None
        region = Region(name.text if name else "?")
        while self._progressing() and not self.at("}") and not self.at_kind("EOF"):
            if self.accept("initial"):
                iname = self.expect_ident("initial state name")
                self.expect(";") or self.sync_statement()
                if iname:
                    region.initial = iname.text
            elif self.at("state") or self.at("final") or self.at("choice"):
                node = self.parse_state()
                if node:
                    region.states.append(node)
            else:
                self.error("expected a state declaration")
                self.sync_statement()
        self.expect("}")
        return region

    def parse_state(self) -> StateNode | None:
        keyword = self.take().text  # state | final | choice
        name = self.expect_ident("state name")
        if name is None:
            self.sync_statement()
            return None
        if keyword == "final":
            self.expect(";") or self.sync_statement()
            return StateNode(name.text, kind="final")
        if keyword == "choice":
            node = StateNode(name.text, kind="choice")
            if not self.expect("{"):
                self.sync_block()
                return node
            while self._progressing() and not self.at("}") and not self.at_kind("EOF"):
                arm = self.parse_choice_arm()
                if arm:
                    node.transitions.append(arm)
            self.expect("}")
            return node
        if self.accept(";"):
            return StateNode(name.text)
        node = StateNode(name.text)
        children: list[StateNode] = []
        regions: list[Region] = []
        initial: str | None = None
        if not self.expect("{"):
            self.sync_block()
            return node
        while self._progressing() and not self.at("}") and not self.at_kind("EOF"):
            if self.accept("entry"):
                self.expect("/")
                node.entry = self.parse_actions()
                self.expect(";") or self.sync_statement()
            elif self.accept("exit"):
                self.expect("/")
                node.exit = self.parse_actions()
                self.expect(";") or self.sync_statement()
            elif self.accept("initial"):
                iname = self.expect_ident("initial state name")
                self.expect(";") or self.sync_statement()
                if iname:
                    initial = iname.text
            elif self.at("on"):
                trans = self.parse_transition()
                if trans:
                    node.transitions.append(trans)
            elif self.at("state") or self.at("final") or self.at("choice"):
                child = self.parse_state()
                if child:
                    children.append(child)
            elif self.at("region"):
                region = self.parse_region()
                if region:
                    regions.append(region)
            else:
                self.error("expected a state member")
                self.sync_statement()
        self.expect("}")
        if regions and children:
            self.error(f"state '{name.text}' mixes regions with direct "
                       f"child states", name)
        if regions:
            node.kind = "orthogonal"
            node.regions = regions
        elif children:
            node.kind = "compound"
            node.regions = [Region(None, children, initial)]
        return node

    def parse_choice_arm(self) -> Transition | None:
        if not self.expect("["):
            self.sync_statement()
            return None
        is_else = False
        guard = None
        if self.accept("else"):
            is_else = True
        else:
            guard = self.parse_expr()
        self.expect("]")
        self.expect("->")
        target = ".".join(self._parse_dotted())
        actions = []
        if self.accept("/"):
            actions = self.parse_actions()
        self.expect(";") or self.sync_statement()
        return Transition(None, target, guard=guard, actions=actions,
                          is_else=is_else)

    def parse_transition(self) -> Transition | None:
        self.take()  # on
        trigger: EventTrigger | TimerTrigger
        if self.at("after") or self.at("every"):
            kind = self.take().text
            trigger = TimerTrigger(kind, self.parse_duration())
        else:
            ename = self.expect_ident("trigger event")
            if ename is None:
                self.sync_statement()
                return None
            trigger = EventTrigger(ename.text)
        guard = None
        if self.accept("["):
            guard = self.parse_expr()
            self.expect("]")
        self.expect("->")
        target = ".".join(self._parse_dotted())
        actions = []
        if self.accept("/"):
            actions = self.parse_actions()
        self.expect(";") or self.sync_statement()
        return Transition(trigger, target, guard=guard, actions=actions)

    def parse_actions(self) -> list:
        actions = []
        while True:
            action = self.parse_action()
            if action is not None:
                actions.append(action)
            if not self.accept(","):
                return actions

    def parse_action(self):
        if self.accept("raise"):
            name = self.expect_ident("event name")
            args = self._parse_call_args()
            return Raise(name.text, args) if name else None
        if self.accept("emit"):
            target = self.expect_ident("emit target")
            self.expect(".")
            name = self.expect_ident("event name")
            args = self._parse_call_args()
            if target and name:
                return Emit(target.text, name.text, args)
            return None
        if self.at("self") and self.peek(1).text == ".":
            self.take()
            self.take()
            prop = self.expect_ident("property name")
            self.expect("=")
            value = self.parse_expr()
            return AssignProp(prop.text, value) if prop else None
        name = self.expect_ident("action")
        if name is None:
            self.sync_statement()
            return None
        self.expect("=")
        value = self.parse_expr()
        return Assign(name.text, value)

    def _parse_call_args(self) -> list[E.Expr]:
        args: list[E.Expr] = []
        if not self.expect("("):
            return args
        if self.accept(")"):
            return args
        while True:
            args.append(self.parse_expr())
            if not self.accept(","):
                break
        self.expect(")")
        return args

    # -- charts ------------------------------------------------------------------------

    def parse_chart(self) -> ChartSpec | None:
        self.take()  # chart
        name = self.expect_ident("chart name")
        if name is None:
            self.sync_block()
            return None
        self.decls.record(name.text, name)
        spec = ChartSpec(name.text)
        if not self.expect("{"):
            self.sync_block()
            return spec
        pending_conds: list[Cond] = []
        while self._progressing() and not self.at("}") and not self.at_kind("EOF"):
            if self.accept("lifeline"):
                lname = self.expect_ident("lifeline name")
                self.expect(":")
                cname = self.expect_ident("class name")
                binding = SymbolicBinding(None)
                if self.accept("="):
                    obj = self.expect_ident("object id")
                    if obj:
                        binding = ConcreteBinding(obj.text)
                elif self.accept("where"):
                    binding = SymbolicBinding(self.parse_expr())
                elif self.accept("all"):
                    binding = AllBinding()
                self.expect(";") or self.sync_statement()
                if lname and cname:
                    spec.lifelines.append(Lifeline(lname.text, cname.text, binding))
            else:
                element = self.parse_element(pending_conds)
                if element is not None:
                    spec.body.append(element)
        self.expect("}")
        declared = {ll.name for ll in spec.lifelines}
        for cond in pending_conds:
            inferred = sorted({node.base for node in E.walk(cond.expr)
                               if isinstance(node, E.Attr)
                               and node.base in declared})
            if inferred:
                cond.lifelines = inferred
            else:
                pos = self.decls.by_name.get(name.text, (1, 1))
                self._error_at(pos[0], pos[1],
                               f"chart '{name.text}': condition mentions no "
                               f"lifeline; use 'cond on <lifelines> (...)'")
        return spec

    def parse_element(self, pending_conds: list[Cond]):
        label = None
        if self.at_kind("IDENT") and self.peek(1).text == ":" \
                and self.peek().text not in ("sync", "cond", "loop", "forbid",
                                             "lifeline"):
            label = self.take().text
            self.take()  # :
        if self.at("sync"):
            self.take()
            self.expect("(")
            names = []
            tok = self.expect_ident("lifeline")
            if tok:
                names.append(tok.text)
            while self.accept(","):
                tok = self.expect_ident("lifeline")
                if tok:
                    names.append(tok.text)
            self.expect(")")
            self.expect(";") or self.sync_statement()
            return Sync(names, label=label)
        if self.at("cond"):
            self.take()
            lifelines: list[str] = []
            if self.accept("on"):
                tok = self.expect_ident("lifeline")
                if tok:
                    lifelines.append(tok.text)
                while self.accept(","):
                    tok = self.expect_ident("lifeline")
                    if tok:
                        lifelines.append(tok.text)
            self.expect("(")
            expr = self.parse_expr()
            self.expect(")")
            temp = "cold"
            if self.at("hot") or self.at("cold"):
                temp = self.take().text
            self.expect(";") or self.sync_statement()
            cond = Cond(lifelines, expr, temp, label=label)
            if not lifelines:
                pending_conds.append(cond)
            return cond
        if self.at("loop"):
            self.take()
            if self.at_kind("INT"):
                bound = self.take().value
                loop = Loop("bound", bound=bound, label=label)
            elif self.accept("while"):
                self.expect("(")
                expr = self.parse_expr()
                self.expect(")")
                loop = Loop("while", expr=expr, label=label)
            elif self.accept("all"):
                var = self.expect_ident("all-lifeline")
                loop = Loop("all", var=var.text if var else "?", label=label)
            else:
                self.error("expected a loop head (count, 'while' or 'all')")
                loop = Loop("bound", bound=0, label=label)
            if not self.expect("{"):
                self.sync_block()
                return loop
            pending: list[Cond] = []
            while self._progressing() and not self.at("}") and not self.at_kind("EOF"):
                child = self.parse_element(pending)
                if child is not None:
                    loop.body.append(child)
            self.expect("}")
            pending_conds.extend(pending)
            return loop
        if self.at("forbid"):
            self.take()
            src = self.expect_ident("source lifeline")
            self.expect("->")
            dst = self.expect_ident("target lifeline")
            self.expect(":")
            ename = self.expect_ident("event name")
            args = None
            if self.at("("):
                args = self._parse_arg_terms()
            self.expect("from")
            frm = self.expect_ident("scope label")
            self.expect("to")
            to = self.expect_ident("scope label")
            self.expect(";") or self.sync_statement()
            if src and dst and ename:
                return Forbidden(src.text, dst.text, ename.text, args,
                                 frm.text if frm else "start",
                                 to.text if to else "end", label=label)
            return None
        if self.at_kind("IDENT"):
            src = self.take()
            self.expect("->")
            dst = self.expect_ident("target lifeline")
            self.expect(":")
            ename = self.expect_ident("event name")
            args = self._parse_arg_terms()
            mode = "mon"
            temp = "cold"
            if self.at("exec") or self.at("mon"):
                mode = self.take().text
            if self.at("hot") or self.at("cold"):
                temp = self.take().text
            self.expect(";") or self.sync_statement()
            if dst and ename:
                return Message(src.text, dst.text, ename.text, args or [],
                               mode=mode, temp=temp, label=label)
            return None
        self.error("expected a chart element")
        self.sync_statement()
        return None

    def _parse_arg_terms(self) -> list:
        terms: list = []
        if not self.expect("("):
            return terms
        if self.accept(")"):
            return terms
        while True:
            if self.accept("?"):
                name = self.expect_ident("binder name")
                if name:
                    terms.append(Binder(name.text))
            else:
                terms.append(ExprTerm(self.parse_expr()))
            if not self.accept(","):
                break
        self.expect(")")
        return terms

    # -- scripts ------------------------------------------------------------------------

    def parse_script(self) -> Script:
        script = Script()
        wrapped = False
        if self.at("script"):
            self.take()
            self.expect("{")
            wrapped = True
        while self._progressing() and not self.at_kind("EOF"):
            if wrapped and self.at("}"):
                self.take()
                break
            if self.accept("inject"):
                src = self.expect_ident("source ('env' or object id)")
                dst = self.expect_ident("target object")
                self.expect(".")
                ename = self.expect_ident("event name")
                args = []
                if self.at("("):
                    self.take()
                    if not self.accept(")"):
                        while True:
                            args.append(self.parse_literal())
                            if not self.accept(","):
                                break
                        self.expect(")")
                self.expect(";") or self.sync_statement()
                if src and dst and ename:
                    script.steps.append(InjectStep(src.text, dst.text,
                                                   ename.text, args))
            elif self.accept("tick"):
                ms = self.parse_duration()
                self.expect(";") or self.sync_statement()
                script.steps.append(TickStep(ms))
            elif self.accept("assert"):
                step = self._parse_assertion()
                self.expect(";") or self.sync_statement()
                if step is not None:
                    script.steps.append(step)
            else:
                self.error("expected 'inject', 'tick' or 'assert'")
                self.sync_statement()
        return script

    def _parse_assertion(self):
        negated = bool(self.accept("!"))
        if self.accept("active"):
            self.expect("(")
            parts = self._parse_dotted()
            self.expect(")")
            if len(parts) < 2:
                self.error("active() needs <object>.<state path>")
                return None
            return AssertActive(parts[0], ".".join(parts[1:]), not negated)
        if negated:
            self.error("'!' only applies to active()")
            return None
        obj = self.expect_ident("object id")
        self.expect(".")
        prop = self.expect_ident("property name")
        self.expect("==")
        expected = self.parse_literal()
        if obj and prop:
            return AssertProp(obj.text, prop.text, expected)
        return None


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------

def try_parse_model(text: str,
                    filename: str = "<model>") -> tuple[ModelBundle | None,
                                                        list[ParseError]]:
    """Parse and validate; returns (bundle or None, all collected errors)."""
    parser = _Parser(text, filename)
    bundle = parser.parse_model()
    errors = list(parser.errors)
    if not errors:
        for diag in bundle.validate():
            pos = parser.decls.find_in(diag) or (1, 1)
            line = parser.lines[pos[0] - 1] if pos[0] <= len(parser.lines) else ""
            errors.append(ParseError(filename, pos[0], pos[1], diag, line))
    return (bundle if not errors else None), errors


def parse_model(text: str, filename: str = "<model>") -> ModelBundle:
    bundle, errors = try_parse_model(text, filename)
    if errors:
        raise ParseFailure(errors)
    assert bundle is not None
    return bundle


def parse_script(text: str, bundle: ModelBundle,
                 filename: str = "<script>") -> Script:
    script, errors = try_parse_script(text, bundle, filename)
    if errors:
        raise ParseFailure(errors)
    assert script is not None
    return script


def try_parse_script(text: str, bundle: ModelBundle,
                     filename: str = "<script>") -> tuple[Script | None,
                                                          list[ParseError]]:
    parser = _Parser(text, filename)
    script = parser.parse_script()
    errors = list(parser.errors)
    if not errors:
        try:
            store = bundle.build_store()
        except Exception as exc:  # bundle already validated in practice
            errors.append(ParseError(filename, 1, 1, str(exc), ""))
            return None, errors
        machine_classes = {m.owner_class for m in bundle.machines}
        specs = {m.owner_class: m for m in bundle.machines}
        for step in script.steps:
            diag = None
            if isinstance(step, InjectStep):
                if step.src != "env" and not store.has_object(step.src):
                    diag = f"unknown source '{step.src}'"
                elif not store.has_object(step.dst):
                    diag = f"unknown target '{step.dst}'"
                else:
                    cls = store.get_object(step.dst).class_def
                    arity = cls.event_arity(step.event)
                    if arity is None:
                        diag = (f"'{cls.name}' does not declare event "
                                f"'{step.event}'")
                    elif arity != len(step.args):
                        diag = (f"event '{step.event}' expects {arity} args, "
                                f"got {len(step.args)}")
            elif isinstance(step, AssertProp):
                if not store.has_object(step.obj):
                    diag = f"unknown object '{step.obj}'"
                elif store.get_object(step.obj).class_def.property_def(
                        step.prop) is None:
                    diag = f"unknown property '{step.obj}.{step.prop}'"
            elif isinstance(step, AssertActive):
                if not store.has_object(step.owner):
                    diag = f"unknown object '{step.owner}'"
                else:
                    cls = store.get_object(step.owner).class_def.name
                    if cls not in machine_classes:
                        diag = f"object '{step.owner}' has no statechart"
                    else:
                        spec = specs[cls]
                        spec.compile(None)
                        if not spec.has_state(step.path):
                            diag = f"unknown state path '{step.path}'"
            if diag:
                errors.append(ParseError(filename, 1, 1, diag, ""))
    return (script if not errors else None), errors


def parse_files(paths: list[str]) -> ModelBundle:
    """Parse several model files into one merged, validated bundle."""
    merged = ModelBundle()
    errors: list[ParseError] = []
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        parser = _Parser(text, path)
        merged = merged.merge(parser.parse_model())
        errors.extend(parser.errors)
    if not errors:
        for diag in merged.validate():
            errors.append(ParseError(paths[0] if paths else "<model>", 1, 1,
                                     diag, ""))
    if errors:
        raise ParseFailure(errors)
    return merged
