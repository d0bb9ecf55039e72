//! Recursive-descent parser. Precedence from loosest to tightest:
//! ternary, `or`, `and`, `not`, comparisons and `in`, `+ -`, `* / %`,
//! unary minus, then calls and indexing.

use crate::atom::Predicate;
use crate::error::ParseError;

use super::ast::{Arg, BinaryOp, Expr, ExprKind, FunctionDef, Param, Stmt, UnaryOp};
use super::lexer::{Keyword, SourceToken, Span, Symbol, TokenKind};

pub fn parse(tokens: &[SourceToken]) -> Result<Vec<Stmt>, ParseError> {
    let mut parser = Parser { tokens, pos: 0 };
    let mut stmts = Vec::new();
    while !parser.at_eof() {
        stmts.push(parser.statement()?);
    }
    Ok(stmts)
}

/// Tokenizes and parses a complete source text.
pub fn parse_source(source: &str) -> Result<Vec<Stmt>, crate::error::Error> {
    let tokens = super::tokenize(source)?;
    Ok(parse(&tokens)?)
}

struct Parser<'a> {
    tokens: &'a [SourceToken],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &SourceToken {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_at(&self, offset: usize) -> &TokenKind {
        &self.tokens[(self.pos + offset).min(self.tokens.len() - 1)].kind
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    fn advance(&mut self) -> &SourceToken {
        let tok = &self.tokens[self.pos.min(self.tokens.len() - 1)];
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let tok = self.peek();
        ParseError {
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: tok.kind.to_string(),
            span: tok.span,
        }
    }

    fn is_symbol(&self, s: Symbol) -> bool {
        self.peek().kind == TokenKind::Symbol(s)
    }

    fn is_keyword(&self, k: Keyword) -> bool {
        self.peek().kind == TokenKind::Keyword(k)
    }

    fn eat_symbol(&mut self, s: Symbol) -> bool {
        if self.is_symbol(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, k: Keyword) -> bool {
        if self.is_keyword(k) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_symbol(&mut self, s: Symbol) -> Result<Span, ParseError> {
        if self.is_symbol(s) {
            Ok(self.advance().span)
        } else {
            Err(self.error(&[&format!("`{}`", s.as_str())]))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Span), ParseError> {
        match &self.peek().kind {
            TokenKind::Ident(name) => {
                let name = name.clone();
                Ok((name, self.advance().span))
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn expect_string(&mut self) -> Result<String, ParseError> {
        match &self.peek().kind {
            TokenKind::Str(s) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => Err(self.error(&["string literal"])),
        }
    }

    fn statement(&mut self) -> Result<Stmt, ParseError> {
        let start = self.peek().span;
        if self.eat_keyword(Keyword::Def) {
            return self.function_def(start).map(Stmt::Def);
        }
        if self.eat_keyword(Keyword::Return) {
            let value = self.expr()?;
            self.expect_symbol(Symbol::Semi)?;
            return Ok(Stmt::Return(value));
        }
        if let TokenKind::Ident(word) = &self.peek().kind {
            match (word.as_str(), self.peek_at(1)) {
                ("set", TokenKind::Ident(what)) if what == "example" => {
                    self.advance();
                    self.advance();
                    let value = self.expect_string()?;
                    let end = self.expect_symbol(Symbol::Semi)?;
                    return Ok(Stmt::SetExample {
                        value,
                        span: start.to(end),
                    });
                }
                ("draw", TokenKind::Symbol(Symbol::LParen)) => {
                    self.advance();
                    self.advance();
                    let target = self.expr()?;
                    self.expect_symbol(Symbol::Comma)?;
                    let input = self.expect_string()?;
                    self.expect_symbol(Symbol::RParen)?;
                    let end = self.expect_symbol(Symbol::Semi)?;
                    return Ok(Stmt::Draw {
                        target,
                        input,
                        span: start.to(end),
                    });
                }
                (_, TokenKind::Symbol(Symbol::Assign)) => {
                    let (name, _) = self.expect_ident()?;
                    self.advance();
                    let value = self.expr()?;
                    let end = self.expect_symbol(Symbol::Semi)?;
                    return Ok(Stmt::Assign {
                        name,
                        value,
                        span: start.to(end),
                    });
                }
                _ => {}
            }
        }
        let value = self.expr()?;
        self.expect_symbol(Symbol::Semi)?;
        Ok(Stmt::Expr(value))
    }

    fn function_def(&mut self, start: Span) -> Result<FunctionDef, ParseError> {
        let (name, _) = self.expect_ident()?;
        self.expect_symbol(Symbol::LParen)?;
        let mut params = Vec::new();
        if !self.is_symbol(Symbol::RParen) {
            loop {
                let (pname, _) = self.expect_ident()?;
                let default = if self.eat_symbol(Symbol::Assign) {
                    Some(self.expr()?)
                } else {
                    None
                };
                params.push(Param {
                    name: pname,
                    default,
                });
                if !self.eat_symbol(Symbol::Comma) {
                    break;
                }
            }
        }
        self.expect_symbol(Symbol::RParen)?;
        self.expect_symbol(Symbol::LBrace)?;
        let mut body = Vec::new();
        while !self.is_symbol(Symbol::RBrace) {
            if self.at_eof() {
                return Err(self.error(&["`}`"]));
            }
            body.push(self.statement()?);
        }
        let close = self.peek().span;
        let ret = match body.pop() {
            Some(Stmt::Return(e)) => e,
            _ => {
                return Err(ParseError {
                    expected: vec!["`return` as the last statement".into()],
                    found: "`}`".into(),
                    span: close,
                })
            }
        };
        if let Some(early) = body.iter().find(|s| matches!(s, Stmt::Return(_))) {
            return Err(ParseError {
                expected: vec!["a single `return` at the end of the body".into()],
                found: "`return`".into(),
                span: early.span(),
            });
        }
        let end = self.expect_symbol(Symbol::RBrace)?;
        Ok(FunctionDef {
            name,
            params,
            body,
            ret,
            span: start.to(end),
        })
    }

    pub fn expr(&mut self) -> Result<Expr, ParseError> {
        let then = self.or_expr()?;
        if self.eat_keyword(Keyword::If) {
            let cond = self.or_expr()?;
            if !self.eat_keyword(Keyword::Else) {
                return Err(self.error(&["`else`"]));
            }
            let otherwise = self.expr()?;
            let span = then.span.to(otherwise.span);
            return Ok(Expr {
                kind: ExprKind::Ternary {
                    then: Box::new(then),
                    cond: Box::new(cond),
                    otherwise: Box::new(otherwise),
                },
                span,
            });
        }
        Ok(then)
    }

    fn binary_chain(
        &mut self,
        next: fn(&mut Self) -> Result<Expr, ParseError>,
        op_of: fn(&TokenKind) -> Option<BinaryOp>,
    ) -> Result<Expr, ParseError> {
        let mut lhs = next(self)?;
        while let Some(op) = op_of(&self.peek().kind) {
            self.advance();
            let rhs = next(self)?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr {
                kind: ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                span,
            };
        }
        Ok(lhs)
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_chain(Self::and_expr, |k| {
            (*k == TokenKind::Keyword(Keyword::Or)).then_some(BinaryOp::Or)
        })
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_chain(Self::not_expr, |k| {
            (*k == TokenKind::Keyword(Keyword::And)).then_some(BinaryOp::And)
        })
    }

    fn not_expr(&mut self) -> Result<Expr, ParseError> {
        if self.is_keyword(Keyword::Not) {
            let start = self.advance().span;
            let expr = self.not_expr()?;
            let span = start.to(expr.span);
            return Ok(Expr {
                kind: ExprKind::Unary {
                    op: UnaryOp::Not,
                    expr: Box::new(expr),
                },
                span,
            });
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, ParseError> {
        self.binary_chain(Self::additive, |k| match k {
            TokenKind::Keyword(Keyword::In) => Some(BinaryOp::In),
            TokenKind::Symbol(s) => comparison_predicate(*s).map(BinaryOp::Compare),
            _ => None,
        })
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        self.binary_chain(Self::multiplicative, |k| match k {
            TokenKind::Symbol(Symbol::Plus) => Some(BinaryOp::Add),
            TokenKind::Symbol(Symbol::Minus) => Some(BinaryOp::Sub),
            _ => None,
        })
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        self.binary_chain(Self::unary, |k| match k {
            TokenKind::Symbol(Symbol::Star) => Some(BinaryOp::Mul),
            TokenKind::Symbol(Symbol::Slash) => Some(BinaryOp::Div),
            TokenKind::Symbol(Symbol::Percent) => Some(BinaryOp::Mod),
            _ => None,
        })
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.is_symbol(Symbol::Minus) {
            let start = self.advance().span;
            let expr = self.unary()?;
            let span = start.to(expr.span);
            return Ok(Expr {
                kind: ExprKind::Unary {
                    op: UnaryOp::Neg,
                    expr: Box::new(expr),
                },
                span,
            });
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut expr = self.primary()?;
        loop {
            if self.is_symbol(Symbol::LParen) {
                let ExprKind::Ident(callee) = &expr.kind else {
                    return Err(self.error(&["operator", "`;`"]));
                };
                let callee = callee.clone();
                self.advance();
                let args = self.call_args()?;
                let end = self.expect_symbol(Symbol::RParen)?;
                expr = Expr {
                    kind: ExprKind::Call { callee, args },
                    span: expr.span.to(end),
                };
            } else if self.eat_symbol(Symbol::LBracket) {
                let index = self.expr()?;
                let end = self.expect_symbol(Symbol::RBracket)?;
                expr = Expr {
                    span: expr.span.to(end),
                    kind: ExprKind::Index {
                        target: Box::new(expr),
                        index: Box::new(index),
                    },
                };
            } else {
                return Ok(expr);
            }
        }
    }

    fn call_args(&mut self) -> Result<Vec<Arg>, ParseError> {
        let mut args = Vec::new();
        if self.is_symbol(Symbol::RParen) {
            return Ok(args);
        }
        loop {
            let name = match (&self.peek().kind, self.peek_at(1)) {
                (TokenKind::Ident(name), TokenKind::Symbol(Symbol::Assign)) => {
                    let name = name.clone();
                    self.advance();
                    self.advance();
                    Some(name)
                }
                _ => None,
            };
            let value = self.predicate_or_expr()?;
            args.push(Arg { name, value });
            if !self.eat_symbol(Symbol::Comma) {
                return Ok(args);
            }
        }
    }

    /// A bare comparison symbol directly followed by `,` or `)` is a
    /// predicate argument.
    fn predicate_or_expr(&mut self) -> Result<Expr, ParseError> {
        if let TokenKind::Symbol(s) = self.peek().kind {
            if let Some(p) = comparison_predicate(s) {
                if matches!(
                    self.peek_at(1),
                    TokenKind::Symbol(Symbol::Comma | Symbol::RParen)
                ) {
                    let span = self.advance().span;
                    return Ok(Expr {
                        kind: ExprKind::Predicate(p),
                        span,
                    });
                }
            }
        }
        self.expr()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let tok = self.peek().clone();
        let leaf = |kind| Expr {
            kind,
            span: tok.span,
        };
        match &tok.kind {
            TokenKind::Number(x) => {
                self.advance();
                Ok(leaf(ExprKind::Number(*x)))
            }
            TokenKind::Str(s) => {
                self.advance();
                Ok(leaf(ExprKind::Str(s.clone())))
            }
            TokenKind::Keyword(Keyword::True) => {
                self.advance();
                Ok(leaf(ExprKind::Bool(true)))
            }
            TokenKind::Keyword(Keyword::False) => {
                self.advance();
                Ok(leaf(ExprKind::Bool(false)))
            }
            TokenKind::Ident(name) => {
                self.advance();
                Ok(leaf(ExprKind::Ident(name.clone())))
            }
            TokenKind::Symbol(Symbol::LParen) => {
                self.advance();
                let inner = self.expr()?;
                self.expect_symbol(Symbol::RParen)?;
                Ok(inner)
            }
            TokenKind::Symbol(Symbol::LBracket) => {
                self.advance();
                self.list_or_comprehension(tok.span)
            }
            _ => Err(self.error(&["expression"])),
        }
    }

    fn list_or_comprehension(&mut self, start: Span) -> Result<Expr, ParseError> {
        if let Some(end) = self
            .is_symbol(Symbol::RBracket)
            .then(|| self.advance().span)
        {
            return Ok(Expr {
                kind: ExprKind::List(vec![]),
                span: start.to(end),
            });
        }
        let first = self.expr()?;
        if self.eat_keyword(Keyword::For) {
            let (var, _) = self.expect_ident()?;
            if !self.eat_keyword(Keyword::In) {
                return Err(self.error(&["`in`"]));
            }
            // `in` here belongs to the comprehension, so stop above comparisons
            let iter = self.additive()?;
            let end = self.expect_symbol(Symbol::RBracket)?;
            return Ok(Expr {
                kind: ExprKind::Comprehension {
                    body: Box::new(first),
                    var,
                    iter: Box::new(iter),
                },
                span: start.to(end),
            });
        }
        let mut items = vec![first];
        while self.eat_symbol(Symbol::Comma) {
            if self.is_symbol(Symbol::RBracket) {
                break;
            }
            items.push(self.expr()?);
        }
        let end = self.expect_symbol(Symbol::RBracket)?;
        Ok(Expr {
            kind: ExprKind::List(items),
            span: start.to(end),
        })
    }
}

fn comparison_predicate(s: Symbol) -> Option<Predicate> {
    Some(match s {
        Symbol::EqEq => Predicate::Eq,
        Symbol::NotEq => Predicate::Ne,
        Symbol::Lt => Predicate::Lt,
        Symbol::Le => Predicate::Le,
        Symbol::Gt => Predicate::Gt,
        Symbol::Ge => Predicate::Ge,
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::tokenize;
    use proptest::prelude::*;

    fn parse_str(src: &str) -> Vec<Stmt> {
        parse(&tokenize(src).unwrap()).unwrap()
    }

    fn parse_err(src: &str) -> ParseError {
        parse(&tokenize(src).unwrap()).unwrap_err()
    }

    #[test]
    fn assignment_with_predicate_argument() {
        let stmts = parse_str("reverse = aggregate(select(indices, opp_index,==), tokens);");
        let Stmt::Assign { name, value, .. } = &stmts[0] else {
            panic!()
        };
        assert_eq!(name, "reverse");
        assert_eq!(
            value.to_string(),
            "aggregate(select(indices, opp_index, ==), tokens)"
        );
    }

    #[test]
    fn nested_ternary() {
        let stmts = parse_str(r#"x = "F" if a else ("T" if b else "P");"#);
        let Stmt::Assign { value, .. } = &stmts[0] else {
            panic!()
        };
        assert_eq!(value.to_string(), r#"("F" if a else ("T" if b else "P"))"#);
    }

    #[test]
    fn comprehension_over_static_list() {
        let stmts = parse_str("openers = [p[0] for p in pairs];");
        let Stmt::Assign { value, .. } = &stmts[0] else {
            panic!()
        };
        assert!(matches!(&value.kind, ExprKind::Comprehension { var, .. } if var == "p"));
    }

    #[test]
    fn precedence() {
        let show = |src: &str| parse_str(src)[0].to_string();
        assert_eq!(
            show("a or b and not c == d + e * -f;"),
            "(a or (b and (not (c == (d + (e * (-f)))))));"
        );
        assert_eq!(show("length - indices - 1;"), "((length - indices) - 1);");
        assert_eq!(
            show("tokens in [\"a\"] and x;"),
            "((tokens in [\"a\"]) and x);"
        );
        assert_eq!(
            show("a if c else b if d else e;"),
            "(a if c else (b if d else e));"
        );
        assert_eq!(show("1/aggregate(s, v)[0];"), "(1 / aggregate(s, v)[0]);");
    }

    #[test]
    fn keyword_arguments_and_defaults() {
        let stmts = parse_str("def histf(seq, assume_bos = False) { s = select(seq,seq,==); return selector_width(s, assume_bos= assume_bos); }");
        let Stmt::Def(def) = &stmts[0] else { panic!() };
        assert_eq!(def.params.len(), 2);
        assert!(def.params[1].default.is_some());
        let ExprKind::Call { args, .. } = &def.ret.kind else {
            panic!()
        };
        assert_eq!(args[1].name.as_deref(), Some("assume_bos"));
    }

    #[test]
    fn directives() {
        let stmts = parse_str("set example \"hey\"; draw(reverse, \"abcde\");");
        assert!(matches!(&stmts[0], Stmt::SetExample { value, .. } if value == "hey"));
        assert!(matches!(&stmts[1], Stmt::Draw { input, .. } if input == "abcde"));
    }

    #[test]
    fn syntax_errors_report_expectations() {
        let err = parse_err("x = 1");
        assert_eq!(err.expected, vec!["`;`"]);
        assert_eq!(err.found, "end of input");
        let err = parse_err("def f(a) { x = a; }");
        assert!(err.expected[0].contains("return"));
        let err = parse_err("def f(a) { return a; return a; }");
        assert!(err.expected[0].contains("single"));
        let err = parse_err("x = a if b;");
        assert_eq!(err.expected, vec!["`else`"]);
        let err = parse_err("x = (1 + );");
        assert_eq!((err.span.line, err.span.column), (1, 10));
    }

    // random expression trees over the full grammar
    fn arb_expr() -> impl Strategy<Value = Expr> {
        let e = |kind| Expr {
            kind,
            span: Span::default(),
        };
        let leaf = prop_oneof![
            (0u32..100).prop_map(move |n| e(ExprKind::Number(n as f64))),
            (0u32..100).prop_map(move |n| e(ExprKind::Number(n as f64 + 0.5))),
            "[a-z§ \"\\\\]{1,3}".prop_map(move |s| e(ExprKind::Str(s))),
            any::<bool>().prop_map(move |b| e(ExprKind::Bool(b))),
            "[a-z][a-z0-9_]{0,4}"
                .prop_filter("keyword", |s| !matches!(
                    s.as_str(),
                    "if" | "in" | "or" | "and" | "not" | "for" | "def" | "else"
                ))
                .prop_map(move |s| e(ExprKind::Ident(s))),
        ];
        leaf.prop_recursive(4, 32, 4, move |inner| {
            let binops = prop_oneof![
                Just(BinaryOp::Add),
                Just(BinaryOp::Sub),
                Just(BinaryOp::Mul),
                Just(BinaryOp::Div),
                Just(BinaryOp::Mod),
                Just(BinaryOp::In),
                Just(BinaryOp::And),
                Just(BinaryOp::Or),
                proptest::sample::select(Predicate::ALL.to_vec()).prop_map(BinaryOp::Compare),
            ];
            prop_oneof![
                (binops, inner.clone(), inner.clone()).prop_map(move |(op, l, r)| e(
                    ExprKind::Binary {
                        op,
                        lhs: Box::new(l),
                        rhs: Box::new(r)
                    }
                )),
                (any::<bool>(), inner.clone()).prop_map(move |(neg, x)| e(ExprKind::Unary {
                    op: if neg { UnaryOp::Neg } else { UnaryOp::Not },
                    expr: Box::new(x)
                })),
                (inner.clone(), inner.clone(), inner.clone()).prop_map(move |(a, b, c)| e(
                    ExprKind::Ternary {
                        then: Box::new(a),
                        cond: Box::new(b),
                        otherwise: Box::new(c)
                    }
                )),
                proptest::collection::vec(inner.clone(), 0..3)
                    .prop_map(move |items| e(ExprKind::List(items))),
                (inner.clone(), inner.clone()).prop_map(move |(t, i)| e(ExprKind::Index {
                    target: Box::new(t),
                    index: Box::new(i)
                })),
                (inner.clone(), inner.clone()).prop_map(move |(b, i)| e(ExprKind::Comprehension {
                    body: Box::new(b),
                    var: "v".into(),
                    iter: Box::new(i)
                })),
                (
                    proptest::collection::vec(inner.clone(), 0..3),
                    proptest::sample::select(Predicate::ALL.to_vec())
                )
                    .prop_map(move |(args, p)| {
                        let mut args: Vec<Arg> = args
                            .into_iter()
                            .map(|value| Arg { name: None, value })
                            .collect();
                        args.push(Arg {
                            name: Some("k".into()),
                            value: e(ExprKind::Predicate(p)),
                        });
                        e(ExprKind::Call {
                            callee: "f".into(),
                            args,
                        })
                    }),
            ]
        })
    }

    proptest! {
        #[test]
        fn pretty_printing_round_trips(expr in arb_expr()) {
            let src = format!("x = {expr};");
            let stmts = parse(&tokenize(&src).unwrap()).unwrap();
            let Stmt::Assign { value, .. } = &stmts[0] else { panic!() };
            prop_assert_eq!(value.without_spans(), expr.without_spans());
        }
    }
}
