"""Recursive-descent parser producing a SurfaceProgram.

The grammar is a C89-flavored subset extended with `protocoltype`,
`parametertype` (with optional protocol bounds), parameterized typedefs
(`typedef Base<Concrete Param> Name;`), a postfix `+` strengthenability
qualifier on types, a `[^T]expr` weakening cast, and top-level
`<check A subsumed by B>` / `<distinct A B>` directives.
"""

from __future__ import annotations

from .diagnostics import CompileError, Span, Stage, error
from .lexer import Token, tokenize
from . import surface as S


class _Parser:
    def __init__(self, tokens: list[Token], file: str):
        self.tokens = tokens
        self.pos = 0
        self.file = file

    # -- token helpers ------------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        idx = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[idx]

    def at(self, kind: str, text: str | None = None, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok.kind == kind and (text is None or tok.text == text)

    def take(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            expected = text if text is not None else kind
            raise self.fail(f"expected {expected!r}, found {tok.text or tok.kind!r}")
        return self.take()

    def fail(self, message: str) -> CompileError:
        return CompileError(error(Stage.PARSE, self.peek().span, message))

    # -- types --------------------------------------------------------------

    def parse_type(self) -> S.TypeExpr:
        span = self.peek().span
        struct_kw = False
        if self.at("keyword", "struct"):
            self.take()
            struct_kw = True
        name = self.expect("ident").text
        plus = False
        if self.at("punct", "+"):
            self.take()
            plus = True
        stars = 0
        while self.at("punct", "*"):
            self.take()
            stars += 1
        return S.TypeExpr(name, plus, stars, struct_kw, span)

    def looks_like_decl(self, offset: int = 0) -> bool:
        """Lookahead for `[struct] NAME [+] [*]* NAME (; | = | , | ) )`."""
        i = offset
        if self.at("keyword", "struct", i):
            i += 1
        if not self.at("ident", None, i):
            return False
        i += 1
        if self.at("punct", "+", i):
            i += 1
        while self.at("punct", "*", i):
            i += 1
        return self.at("ident", None, i)

    # -- declarations -------------------------------------------------------

    def parse_program(self) -> S.SurfaceProgram:
        decls: list[S.Decl] = []
        while not self.at("eof"):
            decls.append(self.parse_decl())
        return S.SurfaceProgram(self.file, decls)

    def parse_decl(self) -> S.Decl:
        tok = self.peek()
        if tok.kind == "keyword":
            if tok.text == "protocoltype":
                self.take()
                name = self.expect("ident").text
                self.expect("punct", ";")
                return S.ProtocolTypeDecl(tok.span, name)
            if tok.text == "parametertype":
                self.take()
                name = self.expect("ident").text
                bounds: list[str] = []
                if self.at("punct", ":"):
                    self.take()
                    bounds.append(self.expect("ident").text)
                    while self.at("punct", ","):
                        self.take()
                        bounds.append(self.expect("ident").text)
                self.expect("punct", ";")
                return S.ParameterTypeDecl(tok.span, name, bounds)
            if tok.text == "struct":
                return self.parse_struct()
            if tok.text == "typedef":
                return self.parse_typedef()
        if tok.kind == "punct" and tok.text == "<":
            return self.parse_directive()
        if tok.kind == "ident":
            return self.parse_function()
        raise self.fail("expected a declaration")

    def parse_struct(self) -> S.StructDecl:
        span = self.expect("keyword", "struct").span
        tag = self.expect("ident").text
        self.expect("punct", "{")
        fields: list[tuple[S.TypeExpr, str]] = []
        while not self.at("punct", "}"):
            ftype = self.parse_type()
            fname = self.expect("ident").text
            self.expect("punct", ";")
            fields.append((ftype, fname))
        self.expect("punct", "}")
        self.expect("punct", ";")
        return S.StructDecl(span, tag, fields)

    def parse_typedef(self) -> S.Decl:
        span = self.expect("keyword", "typedef").span
        if self.at("ident") and self.at("punct", "<", 1):
            base = self.take().text
            self.take()  # '<'
            subs: list[tuple[str, str]] = []
            if not self.at("punct", ">"):
                while True:
                    concrete = self.expect("ident").text
                    param = self.expect("ident").text
                    subs.append((concrete, param))
                    if self.at("punct", ","):
                        self.take()
                        continue
                    break
            self.expect("punct", ">")
            name = self.expect("ident").text
            self.expect("punct", ";")
            return S.ParamTypedefDecl(span, base, subs, name)
        target = self.parse_type()
        name = self.expect("ident").text
        self.expect("punct", ";")
        return S.TypedefDecl(span, target, name)

    def parse_directive(self) -> S.Decl:
        span = self.expect("punct", "<").span
        word = self.expect("ident").text
        if word == "check":
            strong = self.expect("ident").text
            if not (self.at("ident", "subsumed") and self.at("ident", "by", 1)):
                raise self.fail("expected 'subsumed by' in check directive")
            self.take()
            self.take()
            weak = self.expect("ident").text
            self.expect("punct", ">")
            return S.CheckDirective(span, strong, weak)
        if word == "distinct":
            left = self.expect("ident").text
            right = self.expect("ident").text
            self.expect("punct", ">")
            return S.DistinctDirective(span, left, right)
        raise self.fail(f"unknown directive {word!r}")

    def parse_function(self) -> S.Decl:
        ret = self.parse_type()
        span = self.peek().span
        name = self.expect("ident").text
        self.expect("punct", "(")
        params: list[S.Param] = []
        if not self.at("punct", ")"):
            while True:
                ptype = self.parse_type()
                is_ref = False
                if self.at("punct", "&"):
                    self.take()
                    is_ref = True
                pname = ""
                if self.at("ident"):
                    pname = self.take().text
                params.append(S.Param(ptype, pname, is_ref, ptype.span))
                if self.at("punct", ","):
                    self.take()
                    continue
                break
        self.expect("punct", ")")
        if self.at("punct", ";"):
            self.take()
            return S.FunctionDecl(span, ret, name, params)
        body = self.parse_block()
        return S.FunctionDef(span, ret, name, params, body)

    # -- statements ---------------------------------------------------------

    def parse_block(self) -> S.Block:
        span = self.expect("punct", "{").span
        body: list[S.Stmt] = []
        while not self.at("punct", "}"):
            body.append(self.parse_stmt())
        self.expect("punct", "}")
        return S.Block(span, body)

    def parse_stmt(self) -> S.Stmt:
        tok = self.peek()
        if tok.kind == "punct" and tok.text == "{":
            return self.parse_block()
        if tok.kind == "punct" and tok.text == ";":
            self.take()
            return S.Empty(tok.span)
        if tok.kind == "keyword":
            if tok.text == "if":
                self.take()
                self.expect("punct", "(")
                cond = self.parse_expr()
                self.expect("punct", ")")
                then = self.parse_stmt()
                other = None
                if self.at("keyword", "else"):
                    self.take()
                    other = self.parse_stmt()
                return S.If(tok.span, cond, then, other)
            if tok.text == "while":
                self.take()
                self.expect("punct", "(")
                cond = self.parse_expr()
                self.expect("punct", ")")
                return S.While(tok.span, cond, self.parse_stmt())
            if tok.text == "for":
                return self.parse_for()
            if tok.text == "return":
                self.take()
                value = None
                if not self.at("punct", ";"):
                    value = self.parse_expr()
                self.expect("punct", ";")
                return S.Return(tok.span, value)
            if tok.text == "struct":
                return self.parse_decl_stmt()
            raise self.fail(f"unexpected keyword {tok.text!r}")
        if self.looks_like_decl():
            return self.parse_decl_stmt()
        expr = self.parse_expr()
        self.expect("punct", ";")
        return S.ExprStmt(expr.span, expr)

    def parse_decl_stmt(self) -> S.DeclStmt:
        dtype = self.parse_type()
        span = self.peek().span
        name = self.expect("ident").text
        init = None
        if self.at("punct", "="):
            self.take()
            init = self.parse_expr()
        self.expect("punct", ";")
        return S.DeclStmt(span, dtype, name, init)

    def parse_for(self) -> S.For:
        span = self.expect("keyword", "for").span
        self.expect("punct", "(")
        init: S.Stmt | None = None
        if self.at("punct", ";"):
            self.take()
        elif self.looks_like_decl() or self.at("keyword", "struct"):
            init = self.parse_decl_stmt()
        else:
            expr = self.parse_expr()
            self.expect("punct", ";")
            init = S.ExprStmt(expr.span, expr)
        cond = None
        if not self.at("punct", ";"):
            cond = self.parse_expr()
        self.expect("punct", ";")
        step = None
        if not self.at("punct", ")"):
            step = self.parse_expr()
        self.expect("punct", ")")
        return S.For(span, init, cond, step, self.parse_stmt())

    # -- expressions ---------------------------------------------------------

    def parse_expr(self) -> S.Expr:
        return self.parse_assign()

    def parse_assign(self) -> S.Expr:
        left = self.parse_ternary()
        if self.at("punct", "=") or self.at("punct", "+=") or self.at("punct", "-="):
            op = self.take().text
            if not isinstance(left, (S.Name, S.Field, S.Deref)):
                raise self.fail("assignment target must be a name, field, or dereference")
            value = self.parse_assign()
            return S.Assign(left.span, op, left, value)
        return left

    def parse_ternary(self) -> S.Expr:
        cond = self.parse_binary(1)
        if self.at("punct", "?"):
            self.take()
            then = self.parse_ternary()
            self.expect("punct", ":")
            other = self.parse_ternary()
            return S.Ternary(cond.span, cond, then, other)
        return cond

    _LEVELS = [
        ("||",),
        ("&&",),
        ("==", "!="),
        ("<", ">", "<=", ">="),
        ("+", "-"),
        ("*", "/", "%"),
    ]

    def parse_binary(self, level: int) -> S.Expr:
        if level > len(self._LEVELS):
            return self.parse_unary()
        ops = self._LEVELS[level - 1]
        left = self.parse_binary(level + 1)
        while self.peek().kind == "punct" and self.peek().text in ops:
            op = self.take().text
            right = self.parse_binary(level + 1)
            left = S.Binary(left.span, op, left, right)
        return left

    def parse_unary(self) -> S.Expr:
        tok = self.peek()
        if tok.kind == "punct":
            if tok.text == "[" and self.at("punct", "^", 1):
                self.take()
                self.take()
                bound = self.expect("ident").text
                self.expect("punct", "]")
                return S.WeakenCast(tok.span, bound, self.parse_unary())
            if tok.text in ("!", "-"):
                self.take()
                return S.Unary(tok.span, tok.text, self.parse_unary())
            if tok.text in ("++", "--"):
                self.take()
                return S.Unary(tok.span, tok.text, self.parse_unary())
            if tok.text == "*":
                self.take()
                return S.Deref(tok.span, self.parse_unary())
            if tok.text == "&":
                self.take()
                return S.AddrOf(tok.span, self.parse_unary())
        return self.parse_postfix()

    def parse_postfix(self) -> S.Expr:
        expr = self.parse_primary()
        while True:
            if self.at("punct", "."):
                self.take()
                name = self.expect("ident").text
                expr = S.Field(expr.span, expr, name)
            elif self.at("punct", "++") or self.at("punct", "--"):
                op = self.take().text
                expr = S.Unary(expr.span, op, expr, postfix=True)
            else:
                return expr

    def parse_primary(self) -> S.Expr:
        tok = self.peek()
        if tok.kind == "int":
            self.take()
            return S.IntLit(tok.span, tok.value)  # type: ignore[arg-type]
        if tok.kind == "char":
            self.take()
            return S.CharLit(tok.span, tok.value)  # type: ignore[arg-type]
        if tok.kind == "string":
            self.take()
            return S.StrLit(tok.span, tok.value)  # type: ignore[arg-type]
        if tok.kind == "ident":
            self.take()
            if self.at("punct", "("):
                self.take()
                args: list[S.Expr] = []
                if not self.at("punct", ")"):
                    args.append(self.parse_expr())
                    while self.at("punct", ","):
                        self.take()
                        args.append(self.parse_expr())
                self.expect("punct", ")")
                return S.Call(tok.span, tok.text, args)
            return S.Name(tok.span, tok.text)
        if tok.kind == "punct" and tok.text == "(":
            self.take()
            expr = self.parse_expr()
            self.expect("punct", ")")
            return expr
        raise self.fail(f"expected an expression, found {tok.text or tok.kind!r}")


def parse(source: str, file: str = "<input>") -> S.SurfaceProgram:
    """Parse mini-language source text into a SurfaceProgram."""
    return _Parser(tokenize(source, file), file).parse_program()
