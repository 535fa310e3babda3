use super::lexer::{tokenize, Pos, Spanned, Tok};
use super::{BinOp, Domain, Expr, Func, SdlError, SdlErrorKind, SurfaceDef, NEG_PRECEDENCE};

const RESERVED: [&str; 10] = ["u", "v", "x", "y", "z", "pi", "e", "param", "domain", "surface"];

/// Parses one `surface` block.
pub fn parse_surface(src: &str) -> Result<SurfaceDef, SdlError> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        at: 0,
        refs: Vec::new(),
    };
    p.surface()
}

struct Parser {
    toks: Vec<Spanned>,
    at: usize,
    /// Identifiers referenced in coordinate expressions, validated once all
    /// parameters are known.
    refs: Vec<(String, Pos)>,
}

fn err(kind: SdlErrorKind, pos: Pos) -> SdlError {
    SdlError {
        kind,
        line: pos.line,
        col: pos.col,
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> SdlError {
        err(
            SdlErrorKind::Syntax(format!("expected {wanted}, found {}", self.peek().describe())),
            self.pos(),
        )
    }

    fn expect_sym(&mut self, c: char) -> Result<Pos, SdlError> {
        if *self.peek() == Tok::Sym(c) {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(&format!("`{c}`")))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<Pos, SdlError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => Ok(self.bump().pos),
            _ => Err(self.unexpected(&format!("`{kw}`"))),
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), SdlError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let pos = self.bump().pos;
                Ok((s, pos))
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn surface(&mut self) -> Result<SurfaceDef, SdlError> {
        self.expect_keyword("surface")?;
        let (name, _) = self.ident()?;
        let open = self.expect_sym('{')?;
        let mut params: Vec<(String, f64)> = Vec::new();
        let mut exprs: [Option<Expr>; 3] = [None, None, None];
        let mut domain: Option<Domain> = None;
        loop {
            let pos = self.pos();
            match self.peek().clone() {
                Tok::Sym('}') => {
                    self.bump();
                    break;
                }
                Tok::Eof => {
                    return Err(err(
                        SdlErrorKind::Syntax(format!(
                            "unclosed `{{` opened at {}:{}",
                            open.line, open.col
                        )),
                        pos,
                    ))
                }
                Tok::Ident(kw) => match kw.as_str() {
                    "param" => {
                        self.bump();
                        let (pname, ppos) = self.ident()?;
                        if RESERVED.contains(&pname.as_str()) || Func::from_name(&pname).is_some() {
                            return Err(err(
                                SdlErrorKind::InvalidParameter(format!("`{pname}` is reserved")),
                                ppos,
                            ));
                        }
                        if params.iter().any(|(n, _)| *n == pname) {
                            return Err(err(SdlErrorKind::DuplicateClause(format!("param {pname}")), pos));
                        }
                        self.expect_sym('=')?;
                        let value = self.constant("parameter default")?;
                        params.push((pname, value));
                    }
                    "x" | "y" | "z" => {
                        self.bump();
                        let axis = match kw.as_str() {
                            "x" => 0,
                            "y" => 1,
                            _ => 2,
                        };
                        if exprs[axis].is_some() {
                            return Err(err(SdlErrorKind::DuplicateClause(kw.clone()), pos));
                        }
                        self.expect_sym('=')?;
                        exprs[axis] = Some(self.expr(0)?);
                    }
                    "domain" => {
                        self.bump();
                        if domain.is_some() {
                            return Err(err(SdlErrorKind::DuplicateClause("domain".into()), pos));
                        }
                        domain = Some(self.domain(pos)?);
                    }
                    _ => return Err(self.unexpected("`param`, `x`, `y`, `z`, `domain` or `}`")),
                },
                _ => return Err(self.unexpected("a clause")),
            }
        }
        if *self.peek() != Tok::Eof {
            return Err(self.unexpected("end of input"));
        }
        let end = self.pos();
        let [x, y, z] = exprs;
        let missing = |k| err(SdlErrorKind::MissingClause(k), end);
        let x = x.ok_or_else(|| missing("x"))?;
        let y = y.ok_or_else(|| missing("y"))?;
        let z = z.ok_or_else(|| missing("z"))?;
        let domain = domain.ok_or_else(|| missing("domain"))?;
        for (name, pos) in &self.refs {
            let known = matches!(name.as_str(), "u" | "v" | "pi" | "e")
                || params.iter().any(|(n, _)| n == name);
            if !known {
                return Err(err(SdlErrorKind::UnknownIdentifier(name.clone()), *pos));
            }
        }
        Ok(SurfaceDef {
            name,
            params,
            domain,
            exprs: [x, y, z],
        })
    }

    fn domain(&mut self, at: Pos) -> Result<Domain, SdlError> {
        let mut bounds = [(0.0, 0.0); 2];
        for (k, var) in ["u", "v"].iter().enumerate() {
            self.expect_keyword(var)?;
            self.expect_keyword("in")?;
            self.expect_sym('[')?;
            let lo = self.constant("domain bound")?;
            self.expect_sym(',')?;
            let hi = self.constant("domain bound")?;
            self.expect_sym(']')?;
            bounds[k] = (lo, hi);
        }
        Domain::new(bounds[0], bounds[1]).ok_or_else(|| {
            err(
                SdlErrorKind::MalformedDomain(format!(
                    "need u_min < u_max and v_min < v_max, got u in [{}, {}] v in [{}, {}]",
                    bounds[0].0, bounds[0].1, bounds[1].0, bounds[1].1
                )),
                at,
            )
        })
    }

    /// A constant expression: numbers, `pi`, `e`, operators and functions.
    fn constant(&mut self, what: &str) -> Result<f64, SdlError> {
        let pos = self.pos();
        let mark = self.refs.len();
        let e = self.expr(0)?;
        let refs: Vec<_> = self.refs.drain(mark..).collect();
        if let Some((name, p)) = refs.iter().find(|(n, _)| n != "pi" && n != "e") {
            return Err(err(
                SdlErrorKind::MalformedDomain(format!("{what} must be constant, found `{name}`")),
                *p,
            ));
        }
        let value = super::program::eval_constant(&e)
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| err(SdlErrorKind::MalformedDomain(format!("{what} is not a finite number")), pos))?;
        Ok(value)
    }

    fn binop(&self) -> Option<BinOp> {
        match self.peek() {
            Tok::Sym('+') => Some(BinOp::Add),
            Tok::Sym('-') => Some(BinOp::Sub),
            Tok::Sym('*') => Some(BinOp::Mul),
            Tok::Sym('/') => Some(BinOp::Div),
            Tok::Sym('^') => Some(BinOp::Pow),
            _ => None,
        }
    }

    /// Precedence climbing.
    fn expr(&mut self, min_prec: u8) -> Result<Expr, SdlError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            let p = op.precedence();
            if p < min_prec {
                break;
            }
            self.bump();
            let next = if op.right_assoc() { p } else { p + 1 };
            let rhs = self.expr(next)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, SdlError> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            let operand = self.expr(NEG_PRECEDENCE)?;
            return Ok(Expr::Neg(Box::new(operand)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, SdlError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(x) => {
                self.bump();
                Ok(Expr::Num(x))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr(0)?;
                self.close_paren(pos)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::Sym('(') {
                    let open = self.bump().pos;
                    let func = Func::from_name(&name)
                        .ok_or_else(|| err(SdlErrorKind::UnknownFunction(name.clone()), pos))?;
                    let mut args = Vec::new();
                    if *self.peek() != Tok::Sym(')') {
                        args.push(self.expr(0)?);
                        while *self.peek() == Tok::Sym(',') {
                            self.bump();
                            args.push(self.expr(0)?);
                        }
                    }
                    self.close_paren(open)?;
                    if args.len() != 1 {
                        return Err(err(
                            SdlErrorKind::Arity {
                                func: name,
                                found: args.len(),
                            },
                            pos,
                        ));
                    }
                    Ok(Expr::Call(func, Box::new(args.pop().unwrap())))
                } else {
                    self.refs.push((name.clone(), pos));
                    Ok(Expr::Var(name))
                }
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    fn close_paren(&mut self, open: Pos) -> Result<(), SdlError> {
        if *self.peek() == Tok::Sym(')') {
            self.bump();
            Ok(())
        } else {
            Err(err(
                SdlErrorKind::Syntax(format!(
                    "unclosed parenthesis (found {})",
                    self.peek().describe()
                )),
                open,
            ))
        }
    }
}
