"""Surface AST for the mini language, plus a source printer.

The printer exists so that parameterized-typedef expansion can be checked to be
purely lexical: expanding, printing, and re-parsing is a fixed point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import Span


@dataclass(frozen=True)
class TypeExpr:
    """A type as written: base name, optional `+`, optional `*`s, `struct` tag."""

    name: str
    plus: bool = False
    stars: int = 0
    struct_kw: bool = False  # written as `struct <tag>`
    span: Span | None = None

    def to_source(self) -> str:
        base = f"struct {self.name}" if self.struct_kw else self.name
        return base + ("+" if self.plus else "") + "*" * self.stars

    def with_name(self, name: str, struct_kw: bool | None = None) -> "TypeExpr":
        kw = self.struct_kw if struct_kw is None else struct_kw
        return TypeExpr(name, self.plus, self.stars, kw, self.span)


# --- expressions -----------------------------------------------------------


@dataclass
class Expr:
    span: Span


@dataclass
class Name(Expr):
    name: str


@dataclass
class IntLit(Expr):
    value: int


@dataclass
class CharLit(Expr):
    value: str  # unescaped single character


@dataclass
class StrLit(Expr):
    value: str  # unescaped contents


@dataclass
class Field(Expr):
    obj: Expr
    name: str


@dataclass
class Deref(Expr):
    operand: Expr


@dataclass
class AddrOf(Expr):
    operand: Expr


@dataclass
class Call(Expr):
    name: str
    args: list[Expr]


@dataclass
class Unary(Expr):
    op: str  # "!", "-", "++", "--"
    operand: Expr
    postfix: bool = False


@dataclass
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass
class Ternary(Expr):
    cond: Expr
    then: Expr
    other: Expr


@dataclass
class Assign(Expr):
    op: str  # "=", "+=", "-="
    target: Expr
    value: Expr


@dataclass
class WeakenCast(Expr):
    """`[^T]e` weakens the signature e is matched against to T's overloads."""

    bound: str
    operand: Expr


# --- statements ------------------------------------------------------------


@dataclass
class Stmt:
    span: Span


@dataclass
class DeclStmt(Stmt):
    type: TypeExpr
    name: str
    init: Expr | None = None


@dataclass
class ExprStmt(Stmt):
    expr: Expr


@dataclass
class If(Stmt):
    cond: Expr
    then: Stmt
    other: Stmt | None = None


@dataclass
class While(Stmt):
    cond: Expr
    body: Stmt


@dataclass
class For(Stmt):
    init: Stmt | None  # DeclStmt or ExprStmt
    cond: Expr | None
    step: Expr | None
    body: Stmt


@dataclass
class Return(Stmt):
    value: Expr | None


@dataclass
class Block(Stmt):
    body: list[Stmt] = field(default_factory=list)


@dataclass
class Empty(Stmt):
    pass


# --- declarations ----------------------------------------------------------


@dataclass
class Decl:
    span: Span


@dataclass
class ProtocolTypeDecl(Decl):
    name: str


@dataclass
class ParameterTypeDecl(Decl):
    name: str
    bounds: list[str] = field(default_factory=list)


@dataclass
class StructDecl(Decl):
    tag: str
    fields: list[tuple[TypeExpr, str]] = field(default_factory=list)


@dataclass
class TypedefDecl(Decl):
    target: TypeExpr
    name: str


@dataclass
class ParamTypedefDecl(Decl):
    """`typedef Base<Concrete Param, ...> NewName;`"""

    base: str
    substitutions: list[tuple[str, str]]  # (concrete type name, parameter name)
    name: str


@dataclass
class Param:
    type: TypeExpr
    name: str
    is_ref: bool = False
    span: Span | None = None

    def to_source(self) -> str:
        ref = "&" if self.is_ref else ""
        if self.name:
            return f"{self.type.to_source()} {ref}{self.name}"
        return self.type.to_source() + ref


@dataclass
class FunctionDecl(Decl):
    ret: TypeExpr
    name: str
    params: list[Param]


@dataclass
class FunctionDef(Decl):
    ret: TypeExpr
    name: str
    params: list[Param]
    body: Block


@dataclass
class CheckDirective(Decl):
    strong: str
    weak: str


@dataclass
class DistinctDirective(Decl):
    left: str
    right: str


@dataclass
class SurfaceProgram:
    file: str
    declarations: list[Decl] = field(default_factory=list)


# --- source printer --------------------------------------------------------

_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "==": 3,
    "!=": 3,
    "<": 4,
    ">": 4,
    "<=": 4,
    ">=": 4,
    "+": 5,
    "-": 5,
    "*": 6,
    "/": 6,
    "%": 6,
}

_ESCAPES = {"\n": "\\n", "\t": "\\t", "\r": "\\r", "\\": "\\\\", "\0": "\\0"}


def escape_string(value: str) -> str:
    out = []
    for ch in value:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ch == '"':
            out.append('\\"')
        else:
            out.append(ch)
    return "".join(out)


def escape_char(value: str) -> str:
    if value in _ESCAPES:
        return _ESCAPES[value]
    if value == "'":
        return "\\'"
    return value


def expr_to_source(e: Expr, parent_prec: int = 0) -> str:
    if isinstance(e, Name):
        return e.name
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, CharLit):
        return f"'{escape_char(e.value)}'"
    if isinstance(e, StrLit):
        return f'"{escape_string(e.value)}"'
    if isinstance(e, Field):
        return f"{expr_to_source(e.obj, 10)}.{e.name}"
    if isinstance(e, Deref):
        return f"*{expr_to_source(e.operand, 9)}"
    if isinstance(e, AddrOf):
        return f"&{expr_to_source(e.operand, 9)}"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(expr_to_source(a) for a in e.args)})"
    if isinstance(e, Unary):
        inner = expr_to_source(e.operand, 9)
        return f"{inner}{e.op}" if e.postfix else f"{e.op}{inner}"
    if isinstance(e, Binary):
        prec = _PRECEDENCE[e.op]
        text = f"{expr_to_source(e.left, prec)} {e.op} {expr_to_source(e.right, prec + 1)}"
        return f"({text})" if prec < parent_prec else text
    if isinstance(e, Ternary):
        return (
            f"({expr_to_source(e.cond)} ? {expr_to_source(e.then)}"
            f" : {expr_to_source(e.other)})"
        )
    if isinstance(e, Assign):
        text = f"{expr_to_source(e.target, 1)} {e.op} {expr_to_source(e.value)}"
        return f"({text})" if parent_prec > 0 else text
    if isinstance(e, WeakenCast):
        return f"[^{e.bound}]{expr_to_source(e.operand, 9)}"
    raise TypeError(f"unknown expression {e!r}")


def stmt_to_source(s: Stmt, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(s, DeclStmt):
        init = f" = {expr_to_source(s.init)}" if s.init is not None else ""
        return f"{pad}{s.type.to_source()} {s.name}{init};"
    if isinstance(s, ExprStmt):
        return f"{pad}{expr_to_source(s.expr)};"
    if isinstance(s, Return):
        if s.value is None:
            return f"{pad}return;"
        return f"{pad}return {expr_to_source(s.value)};"
    if isinstance(s, Empty):
        return f"{pad};"
    if isinstance(s, Block):
        lines = [f"{pad}{{"]
        for inner in s.body:
            lines.append(stmt_to_source(inner, indent + 1))
        lines.append(f"{pad}}}")
        return "\n".join(lines)
    if isinstance(s, If):
        head = f"{pad}if ({expr_to_source(s.cond)})"
        if isinstance(s.then, Block):
            text = head + " " + stmt_to_source(s.then, indent).lstrip()
        else:
            text = head + " " + stmt_to_source(s.then).strip()
        if s.other is not None:
            if isinstance(s.other, Block):
                text += " else " + stmt_to_source(s.other, indent).lstrip()
            else:
                text += " else " + stmt_to_source(s.other).strip()
        return text
    if isinstance(s, While):
        head = f"{pad}while ({expr_to_source(s.cond)})"
        if isinstance(s.body, Block):
            return head + " " + stmt_to_source(s.body, indent).lstrip()
        return head + " " + stmt_to_source(s.body).strip()
    if isinstance(s, For):
        if s.init is None:
            init = ";"
        else:
            init = stmt_to_source(s.init).strip()
        cond = f" {expr_to_source(s.cond)};" if s.cond is not None else ";"
        step = f" {expr_to_source(s.step)}" if s.step is not None else ""
        head = f"{pad}for ( {init}{cond}{step} )"
        if isinstance(s.body, Block):
            return head + " " + stmt_to_source(s.body, indent).lstrip()
        return head + " " + stmt_to_source(s.body).strip()
    raise TypeError(f"unknown statement {s!r}")


def decl_to_source(d: Decl) -> str:
    if isinstance(d, ProtocolTypeDecl):
        return f"protocoltype {d.name};"
    if isinstance(d, ParameterTypeDecl):
        if d.bounds:
            return f"parametertype {d.name} : {', '.join(d.bounds)};"
        return f"parametertype {d.name};"
    if isinstance(d, StructDecl):
        lines = [f"struct {d.tag} {{"]
        for ftype, fname in d.fields:
            lines.append(f"  {ftype.to_source()} {fname};")
        lines.append("};")
        return "\n".join(lines)
    if isinstance(d, TypedefDecl):
        return f"typedef {d.target.to_source()} {d.name};"
    if isinstance(d, ParamTypedefDecl):
        subs = ", ".join(f"{c} {p}" for c, p in d.substitutions)
        return f"typedef {d.base}<{subs}> {d.name};"
    if isinstance(d, FunctionDecl):
        params = ", ".join(p.to_source() for p in d.params)
        return f"{d.ret.to_source()} {d.name}( {params} );"
    if isinstance(d, FunctionDef):
        params = ", ".join(p.to_source() for p in d.params)
        head = f"{d.ret.to_source()} {d.name}( {params} ) "
        return head + stmt_to_source(d.body, 0)
    if isinstance(d, CheckDirective):
        return f"<check {d.strong} subsumed by {d.weak}>"
    if isinstance(d, DistinctDirective):
        return f"<distinct {d.left} {d.right}>"
    raise TypeError(f"unknown declaration {d!r}")


def program_to_source(p: SurfaceProgram) -> str:
    return "\n\n".join(decl_to_source(d) for d in p.declarations) + "\n"
