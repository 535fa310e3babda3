//! Surface-definition language.
//!
//! A `.surf` file declares one parametric surface:
//!
//! ```text
//! # helicoid with pitch c
//! surface helicoid {
//!   param c = 1
//!   x = v * cos(u)
//!   y = v * sin(u)
//!   z = c * u
//!   domain u in [-3, 3] v in [-2, 2]
//! }
//! ```
//!
//! Expressions use `+ - * / ^` (with `^` right-associative), unary minus,
//! parentheses, the constants `pi` and `e`, and the functions
//! `sin cos tan exp ln sqrt sinh cosh`. Whitespace is insignificant and `#`
//! starts a comment running to the end of the line.

mod gallery;
mod lexer;
mod parser;
mod program;

use std::fmt;

use thiserror::Error;

pub use gallery::{gallery, gallery_names, gallery_source};
pub use lexer::Pos;
pub use parser::parse_surface;
pub use program::{compile, CompileError, Scalar, SurfaceProgram};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Sinh,
    Cosh,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
        Func::Sinh,
        Func::Cosh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }

    pub(crate) fn right_assoc(self) -> bool {
        self == BinOp::Pow
    }
}

const NEG_PRECEDENCE: u8 = 3;
const ATOM_PRECEDENCE: u8 = 5;

/// Expression tree of one coordinate function.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// `u`, `v`, a declared parameter, or one of the constants `pi`, `e`.
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => ATOM_PRECEDENCE,
            Expr::Neg(_) => NEG_PRECEDENCE,
            Expr::Bin(op, ..) => op.precedence(),
        }
    }

    /// Replaces every occurrence of the variable `name` by `with`.
    pub fn substitute(&self, name: &str, with: &Expr) -> Expr {
        match self {
            Expr::Var(n) if n == name => with.clone(),
            Expr::Num(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(e) => Expr::Neg(Box::new(e.substitute(name, with))),
            Expr::Bin(op, l, r) => Expr::Bin(
                *op,
                Box::new(l.substitute(name, with)),
                Box::new(r.substitute(name, with)),
            ),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.substitute(name, with))),
        }
    }

    /// Whether the expression depends on `u` or `v`.
    pub fn depends_on_uv(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(n) => n == "u" || n == "v",
            Expr::Neg(e) | Expr::Call(_, e) => e.depends_on_uv(),
            Expr::Bin(_, l, r) => l.depends_on_uv() || r.depends_on_uv(),
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Var(n) => f.write_str(n),
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.write_child(f, e.precedence() < NEG_PRECEDENCE)
            }
            Expr::Bin(op, l, r) => {
                let p = op.precedence();
                let lp = l.precedence();
                let rp = r.precedence();
                let left_parens = lp < p || (op.right_assoc() && lp == p);
                let right_parens = rp < p || (!op.right_assoc() && rp == p);
                l.write_child(f, left_parens)?;
                write!(f, " {} ", op.symbol())?;
                r.write_child(f, right_parens)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// Parameter box `[u_min, u_max] x [v_min, v_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub u: (f64, f64),
    pub v: (f64, f64),
}

impl Domain {
    pub fn new(u: (f64, f64), v: (f64, f64)) -> Option<Self> {
        let ok = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && a < b;
        (ok(u) && ok(v)).then_some(Self { u, v })
    }

    pub fn midpoint(&self) -> (f64, f64) {
        (0.5 * (self.u.0 + self.u.1), 0.5 * (self.v.0 + self.v.1))
    }

    pub fn width(&self) -> f64 {
        self.u.1 - self.u.0
    }

    pub fn height(&self) -> f64 {
        self.v.1 - self.v.0
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.u.0 && u <= self.u.1 && v >= self.v.0 && v <= self.v.1
    }

    /// Box shrunk by `fraction` of its extent on every side.
    pub fn shrink(&self, fraction: f64) -> Domain {
        let du = fraction * self.width();
        let dv = fraction * self.height();
        Domain {
            u: (self.u.0 + du, self.u.1 - du),
            v: (self.v.0 + dv, self.v.1 - dv),
        }
    }

    /// Point at relative position `(s, t)` in `[0, 1]^2`.
    pub fn lerp(&self, s: f64, t: f64) -> (f64, f64) {
        (
            self.u.0 + s * self.width(),
            self.v.0 + t * self.height(),
        )
    }
}

/// Parsed surface source.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceDef {
    pub name: String,
    pub params: Vec<(String, f64)>,
    pub domain: Domain,
    /// Coordinate functions x, y, z.
    pub exprs: [Expr; 3],
}

impl SurfaceDef {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(n, _)| n == name).map(|p| p.1)
    }
}

impl fmt::Display for SurfaceDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "surface {} {{", self.name)?;
        for (name, value) in &self.params {
            writeln!(f, "  param {name} = {value}")?;
        }
        for (axis, e) in ["x", "y", "z"].iter().zip(&self.exprs) {
            writeln!(f, "  {axis} = {e}")?;
        }
        let d = &self.domain;
        writeln!(
            f,
            "  domain u in [{}, {}] v in [{}, {}]",
            d.u.0, d.u.1, d.v.0, d.v.1
        )?;
        writeln!(f, "}}")
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SdlErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("`{func}` takes 1 argument, found {found}")]
    Arity { func: String, found: usize },
    #[error("missing `{0}` clause")]
    MissingClause(&'static str),
    #[error("duplicate `{0}` clause")]
    DuplicateClause(String),
    #[error("malformed domain: {0}")]
    MalformedDomain(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct SdlError {
    pub kind: SdlErrorKind,
    pub line: usize,
    pub col: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(src: &str) -> (SurfaceDef, SurfaceDef) {
        let a = parse_surface(src).unwrap();
        let b = parse_surface(&a.to_string()).unwrap();
        (a, b)
    }

    #[test]
    fn printer_keeps_tree_shape() {
        let src = "surface t { x = u - (v - 1) y = -(u * v) + 2 ^ 3 ^ u z = (2 ^ 3) ^ u / (u / v) \
                   domain u in [0,1] v in [0,1] }";
        let (a, b) = roundtrip(src);
        assert_eq!(a, b);
        assert_eq!(a.exprs[0].to_string(), "u - (v - 1)");
        assert_eq!(a.exprs[1].to_string(), "-(u * v) + 2 ^ 3 ^ u");
        assert_eq!(a.exprs[2].to_string(), "(2 ^ 3) ^ u / (u / v)");
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let a = parse_surface("surface t { x = -u^2 y = (-u)^2 z = u ^ -v * 3 domain u in [0,1] v in [0,1] }")
            .unwrap();
        assert!(matches!(&a.exprs[0], Expr::Neg(inner) if matches!(**inner, Expr::Bin(BinOp::Pow, ..))));
        assert!(matches!(&a.exprs[1], Expr::Bin(BinOp::Pow, l, _) if matches!(**l, Expr::Neg(_))));
        assert!(matches!(&a.exprs[2], Expr::Bin(BinOp::Mul, ..)));
        let (a, b) = roundtrip(&a.to_string());
        assert_eq!(a, b);
    }

    #[test]
    fn substitute_replaces_variable() {
        let e = parse_surface("surface t { x = u * sin(u) y = v z = 0 domain u in [0,1] v in [0,1] }")
            .unwrap()
            .exprs[0]
            .clone();
        let shifted = e.substitute("u", &Expr::Bin(
            BinOp::Add,
            Box::new(Expr::Var("u".into())),
            Box::new(Expr::Var("v".into())),
        ));
        assert_eq!(shifted.to_string(), "(u + v) * sin(u + v)");
    }

    #[test]
    fn domain_validation() {
        assert!(Domain::new((0.0, 1.0), (1.0, 1.0)).is_none());
        let d = Domain::new((0.0, 2.0), (-1.0, 1.0)).unwrap();
        assert_eq!(d.midpoint(), (1.0, 0.0));
        assert_eq!(d.shrink(0.25).u, (0.5, 1.5));
    }
}
