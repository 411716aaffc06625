use super::ast::*;
use super::diagnostic::{DiagCode, Diagnostic};
use super::lexer::{tokenize, Tok, Token};
use super::SourceUnit;

/// Parses all units into one program. Declarations keep unit order, then
/// source order. The first lexical or syntax error aborts the parse.
pub fn parse(units: &[SourceUnit]) -> Result<Program, Vec<Diagnostic>> {
    if units.is_empty() {
        return Err(vec![Diagnostic::error(
            DiagCode::EmptyProject,
            Span::default(),
            "no source units",
        )]);
    }
    let mut program = Program::default();
    for (idx, unit) in units.iter().enumerate() {
        program.files.push(unit.path.clone());
        let tokens = tokenize(idx as u32, &unit.text).map_err(|d| vec![d])?;
        let mut p = Parser { tokens, pos: 0 };
        while !p.at(&Tok::Eof) {
            let decl = p.decl().map_err(|d| vec![d])?;
            program.decls.push(decl);
        }
    }
    Ok(program)
}

/// Parses a single source string; convenient for tests and tools.
pub fn parse_str(text: &str) -> Result<Program, Vec<Diagnostic>> {
    parse(&[SourceUnit::new("<input>.moo", text)])
}

type PResult<T> = Result<T, Diagnostic>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(Diagnostic::error(
            DiagCode::SyntaxError,
            self.span(),
            format!("expected {expected}, found {}", self.peek().describe()),
        ))
    }

    fn expect(&mut self, t: &Tok, what: &str) -> PResult<Span> {
        if self.at(t) {
            Ok(self.bump().span)
        } else {
            self.error(what)
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error("identifier"),
        }
    }

    fn join(a: Span, b: Span) -> Span {
        Span {
            file: a.file,
            start: a.start,
            end: b.end,
            line: a.line,
            col: a.col,
        }
    }

    fn decl(&mut self) -> PResult<Decl> {
        let start = self.span();
        match self.peek() {
            Tok::Class => {
                self.bump();
                let name = self.ident()?;
                let extends = if self.eat(&Tok::Extends) {
                    Some(self.ident()?)
                } else {
                    None
                };
                let mut implements = Vec::new();
                if self.eat(&Tok::Implements) {
                    implements.push(self.ident()?);
                    while self.eat(&Tok::Comma) {
                        implements.push(self.ident()?);
                    }
                }
                self.expect(&Tok::LBrace, "`{`")?;
                let mut members = Vec::new();
                while !self.at(&Tok::RBrace) {
                    members.push(self.member()?);
                }
                let end = self.expect(&Tok::RBrace, "`}`")?;
                Ok(Decl::Class(ClassDecl {
                    name,
                    extends,
                    implements,
                    members,
                    span: Self::join(start, end),
                }))
            }
            Tok::Interface => {
                self.bump();
                let name = self.ident()?;
                self.expect(&Tok::LBrace, "`{`")?;
                let mut sigs = Vec::new();
                while !self.at(&Tok::RBrace) {
                    let s = self.span();
                    let ret = self.type_name()?;
                    let mname = self.ident()?;
                    let params = self.params()?;
                    let end = self.expect(&Tok::Semi, "`;`")?;
                    sigs.push(MethodSig {
                        ret,
                        name: mname,
                        params,
                        span: Self::join(s, end),
                    });
                }
                let end = self.expect(&Tok::RBrace, "`}`")?;
                Ok(Decl::Interface(InterfaceDecl {
                    name,
                    sigs,
                    span: Self::join(start, end),
                }))
            }
            _ => self.error("`class` or `interface`"),
        }
    }

    fn type_name(&mut self) -> PResult<TypeName> {
        let t = match self.peek() {
            Tok::IntTy => TypeName::Int,
            Tok::BoolTy => TypeName::Bool,
            Tok::VoidTy => TypeName::Void,
            Tok::Ident(s) => TypeName::Named(s.clone()),
            _ => return self.error("type"),
        };
        self.bump();
        Ok(t)
    }

    fn params(&mut self) -> PResult<Vec<Param>> {
        self.expect(&Tok::LParen, "`(`")?;
        let mut params = Vec::new();
        if !self.at(&Tok::RParen) {
            loop {
                let s = self.span();
                let ty = self.type_name()?;
                let name = self.ident()?;
                params.push(Param {
                    ty,
                    name,
                    span: Self::join(s, self.prev_span()),
                });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(&Tok::RParen, "`)` or `,`")?;
        Ok(params)
    }

    fn member(&mut self) -> PResult<Member> {
        let start = self.span();
        let is_static = self.eat(&Tok::Static);
        let is_test = self.eat(&Tok::Test);
        let ty = self.type_name()?;
        let name = self.ident()?;
        if self.at(&Tok::LParen) {
            let params = self.params()?;
            let body = self.block()?;
            Ok(Member::Method(MethodDecl {
                is_static,
                is_test,
                ret: ty,
                name,
                params,
                span: Self::join(start, body.span),
                body,
            }))
        } else {
            if is_test {
                return self.error("`(` after test method name");
            }
            let init = if self.eat(&Tok::Assign) {
                Some(self.expr()?)
            } else {
                None
            };
            let end = self.expect(&Tok::Semi, "`;`")?;
            Ok(Member::Field(FieldDecl {
                is_static,
                ty,
                name,
                init,
                span: Self::join(start, end),
            }))
        }
    }

    fn block(&mut self) -> PResult<Block> {
        let start = self.expect(&Tok::LBrace, "`{`")?;
        let mut stmts = Vec::new();
        while !self.at(&Tok::RBrace) {
            if self.at(&Tok::Eof) {
                return self.error("`}`");
            }
            stmts.push(self.stmt()?);
        }
        let end = self.expect(&Tok::RBrace, "`}`")?;
        Ok(Block {
            stmts,
            span: Self::join(start, end),
        })
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let start = self.span();
        let kind = match self.peek() {
            Tok::If => {
                self.bump();
                self.expect(&Tok::LParen, "`(`")?;
                let cond = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                let then_block = self.block()?;
                let else_block = if self.eat(&Tok::Else) {
                    if self.at(&Tok::If) {
                        // `else if` desugars to an else block holding one if.
                        let inner = self.stmt()?;
                        Some(Block {
                            span: inner.span,
                            stmts: vec![inner],
                        })
                    } else {
                        Some(self.block()?)
                    }
                } else {
                    None
                };
                StmtKind::If {
                    cond,
                    then_block,
                    else_block,
                }
            }
            Tok::While => {
                self.bump();
                self.expect(&Tok::LParen, "`(`")?;
                let cond = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                let body = self.block()?;
                StmtKind::While { cond, body }
            }
            Tok::Return => {
                self.bump();
                let value = if self.at(&Tok::Semi) {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect(&Tok::Semi, "`;`")?;
                StmtKind::Return(value)
            }
            Tok::Assert => {
                self.bump();
                self.expect(&Tok::LParen, "`(`")?;
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                self.expect(&Tok::Semi, "`;`")?;
                StmtKind::Assert(e)
            }
            Tok::IntTy | Tok::BoolTy | Tok::VoidTy => self.local_decl()?,
            Tok::Ident(_) if matches!(self.peek_at(1), Tok::Ident(_)) => self.local_decl()?,
            _ => {
                let e = self.expr()?;
                if self.eat(&Tok::Assign) {
                    let target = match e.kind {
                        ExprKind::Name(n) => Place::Local(n),
                        ExprKind::Field { object, name } => Place::Field { object, name },
                        _ => {
                            return Err(Diagnostic::error(
                                DiagCode::SyntaxError,
                                e.span,
                                "invalid assignment target",
                            ))
                        }
                    };
                    let value = self.expr()?;
                    self.expect(&Tok::Semi, "`;`")?;
                    StmtKind::Assign { target, value }
                } else {
                    self.expect(&Tok::Semi, "`;` or `=`")?;
                    StmtKind::Expr(e)
                }
            }
        };
        Ok(Stmt {
            kind,
            span: Self::join(start, self.prev_span()),
        })
    }

    fn local_decl(&mut self) -> PResult<StmtKind> {
        let ty = self.type_name()?;
        let name = self.ident()?;
        let init = if self.eat(&Tok::Assign) {
            Some(self.expr()?)
        } else {
            None
        };
        self.expect(&Tok::Semi, "`;`")?;
        Ok(StmtKind::Local { ty, name, init })
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn peek_binop(&self) -> Option<BinOp> {
        match self.peek() {
            Tok::Op(s) => BinOp::from_symbol(s),
            _ => None,
        }
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.peek_binop() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            let span = Self::join(lhs.span, rhs.span);
            lhs = Expr::new(
                ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                span,
            );
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.span();
        let op = match self.peek() {
            Tok::Bang => Some(UnOp::Not),
            Tok::Op("-") => Some(UnOp::Neg),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let operand = self.unary()?;
            let span = Self::join(start, operand.span);
            return Ok(Expr::new(
                ExprKind::Unary {
                    op,
                    operand: Box::new(operand),
                },
                span,
            ));
        }
        self.postfix()
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect(&Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if !self.at(&Tok::RParen) {
            loop {
                args.push(self.expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(&Tok::RParen, "`)` or `,`")?;
        Ok(args)
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        while self.eat(&Tok::Dot) {
            let name = self.ident()?;
            if self.at(&Tok::LParen) {
                let args = self.args()?;
                let span = Self::join(e.span, self.prev_span());
                e = Expr::new(
                    ExprKind::Call {
                        receiver: Some(Box::new(e)),
                        name,
                        args,
                    },
                    span,
                );
            } else {
                let span = Self::join(e.span, self.prev_span());
                e = Expr::new(
                    ExprKind::Field {
                        object: Box::new(e),
                        name,
                    },
                    span,
                );
            }
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                ExprKind::Int(v as i32)
            }
            Tok::True => {
                self.bump();
                ExprKind::Bool(true)
            }
            Tok::False => {
                self.bump();
                ExprKind::Bool(false)
            }
            Tok::This => {
                self.bump();
                ExprKind::This
            }
            Tok::New => {
                self.bump();
                let name = self.ident()?;
                self.expect(&Tok::LParen, "`(`")?;
                self.expect(&Tok::RParen, "`)`")?;
                ExprKind::New(name)
            }
            Tok::Abs => {
                self.bump();
                self.expect(&Tok::LParen, "`(`")?;
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                ExprKind::Abs(Box::new(e))
            }
            Tok::ReflectCall => {
                self.bump();
                self.expect(&Tok::LParen, "`(`")?;
                let target = self.expr()?;
                self.expect(&Tok::Comma, "`,`")?;
                let method = match self.peek().clone() {
                    Tok::Str(s) => {
                        self.bump();
                        s
                    }
                    _ => return self.error("method name string"),
                };
                self.expect(&Tok::RParen, "`)`")?;
                ExprKind::ReflectCall {
                    target: Box::new(target),
                    method,
                }
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                return Ok(e);
            }
            Tok::Ident(name) => {
                self.bump();
                if self.at(&Tok::LParen) {
                    let args = self.args()?;
                    ExprKind::Call {
                        receiver: None,
                        name,
                        args,
                    }
                } else {
                    ExprKind::Name(name)
                }
            }
            _ => return self.error("expression"),
        };
        Ok(Expr::new(kind, Self::join(start, self.prev_span())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn only_class(p: &Program) -> &ClassDecl {
        match &p.decls[0] {
            Decl::Class(c) => c,
            _ => panic!("expected class"),
        }
    }

    #[test]
    fn minimal_unit() {
        let p = parse_str("class A { int one() { return 1; } }").unwrap();
        assert_eq!(p.decls.len(), 1);
        let c = only_class(&p);
        assert_eq!(c.members.len(), 1);
        assert!(matches!(&c.members[0], Member::Method(m) if m.name == "one"));
    }

    #[test]
    fn malformed_parameter_list() {
        let errs = parse_str("class A { int f( }").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].code, DiagCode::SyntaxError);
        assert_eq!(errs[0].span.col, 18);
    }

    #[test]
    fn precedence_and_associativity() {
        let p = parse_str("class A { int f(int a, int b) { return a - b - a * b; } }").unwrap();
        let body = match &only_class(&p).members[0] {
            Member::Method(m) => &m.body,
            _ => unreachable!(),
        };
        let e = match &body.stmts[0].kind {
            StmtKind::Return(Some(e)) => e,
            _ => unreachable!(),
        };
        // ((a - b) - (a * b))
        match &e.kind {
            ExprKind::Binary {
                op: BinOp::Sub,
                lhs,
                rhs,
            } => {
                assert!(matches!(lhs.kind, ExprKind::Binary { op: BinOp::Sub, .. }));
                assert!(matches!(rhs.kind, ExprKind::Binary { op: BinOp::Mul, .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn statements_and_postfix_chains() {
        let src = r#"
            class Node { Node next; int v; }
            class A {
                static int count = 3;
                test void t() {
                    Node n = new Node();
                    n.next = new Node();
                    n.next.v = 4;
                    int x;
                    x = n.next.v;
                    if (x > 2) { x = x - 1; } else if (x < 0) { x = 0; } else { x = 1; }
                    while (x != 0) { x = x - 1; }
                    assert(!(x == 1) && reflect_call(this, "go") == abs(-2));
                    g(1, 2);
                }
                int go() { return 2; }
                void g(int a, int b) { return; }
            }
        "#;
        let p = parse_str(src).unwrap();
        assert_eq!(p.decls.len(), 2);
    }

    #[test]
    fn rejects_bad_assignment_target() {
        let errs = parse_str("class A { void f() { 1 = 2; } }").unwrap_err();
        assert_eq!(errs[0].code, DiagCode::SyntaxError);
    }

    #[test]
    fn empty_unit_list_is_an_error() {
        assert!(parse(&[]).is_err());
    }

    #[test]
    fn multiple_units_keep_order_and_files() {
        let p = parse(&[
            SourceUnit::new("b.moo", "class B {}"),
            SourceUnit::new("a.moo", "class A {}"),
        ])
        .unwrap();
        assert_eq!(p.decls[0].name(), "B");
        assert_eq!(p.files, vec!["b.moo", "a.moo"]);
        assert_eq!(p.decls[1].span().file, 1);
    }
}
