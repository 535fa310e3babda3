use std::collections::BTreeMap;

use thiserror::Error;

use super::{BinOp, Domain, Expr, Func, SurfaceDef};
use crate::jet::{Jet4, JetError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("`{0}` is not a declared parameter")]
    UnknownParameter(String),
    #[error("constant subexpression failed to evaluate: {0}")]
    Constant(#[from] JetError),
}

/// Number type the evaluation plan can run on: plain `f64` for the
/// finite-difference oracle, [`Jet4`] for exact derivatives.
pub trait Scalar: Clone {
    fn from_f64(c: f64) -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, rhs: &Self) -> Result<Self, JetError>;
    fn powf(&self, p: f64) -> Result<Self, JetError>;
    fn pow(&self, e: &Self) -> Result<Self, JetError>;
    fn call(&self, f: Func) -> Result<Self, JetError>;
}

impl Scalar for f64 {
    fn from_f64(c: f64) -> Self {
        c
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, rhs: &Self) -> Result<Self, JetError> {
        if *rhs == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        Ok(self / rhs)
    }
    fn powf(&self, p: f64) -> Result<Self, JetError> {
        if p.fract() == 0.0 && p.abs() <= 64.0 {
            if p < 0.0 && *self == 0.0 {
                return Err(JetError::DivisionByZero);
            }
            return Ok(self.powi(p as i32));
        }
        if !(*self > 0.0) {
            return Err(JetError::Domain {
                op: "pow",
                value: *self,
            });
        }
        Ok(f64::powf(*self, p))
    }
    fn pow(&self, e: &Self) -> Result<Self, JetError> {
        if !(*self > 0.0) {
            return Err(JetError::Domain {
                op: "ln",
                value: *self,
            });
        }
        Ok(f64::powf(*self, *e))
    }
    fn call(&self, f: Func) -> Result<Self, JetError> {
        let x = *self;
        let domain = |op| Err(JetError::Domain { op, value: x });
        let y = match f {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => {
                if x.cos().abs() < 1e-12 {
                    return domain("tan");
                }
                x.tan()
            }
            Func::Exp => x.exp(),
            Func::Ln => {
                if !(x > 0.0) {
                    return domain("ln");
                }
                x.ln()
            }
            Func::Sqrt => {
                if !(x > 0.0) {
                    return domain("sqrt");
                }
                x.sqrt()
            }
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
        };
        if y.is_finite() {
            Ok(y)
        } else {
            Err(JetError::NonFinite(f.name()))
        }
    }
}

impl Scalar for Jet4 {
    fn from_f64(c: f64) -> Self {
        Jet4::constant(c)
    }
    fn add(&self, rhs: &Self) -> Self {
        *self + *rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        *self - *rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        *self * *rhs
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn div(&self, rhs: &Self) -> Result<Self, JetError> {
        self.try_div(rhs)
    }
    fn powf(&self, p: f64) -> Result<Self, JetError> {
        Jet4::powf(self, p)
    }
    fn pow(&self, e: &Self) -> Result<Self, JetError> {
        Jet4::pow(self, e)
    }
    fn call(&self, f: Func) -> Result<Self, JetError> {
        match f {
            Func::Sin => self.sin(),
            Func::Cos => self.cos(),
            Func::Tan => self.tan(),
            Func::Exp => self.exp(),
            Func::Ln => self.ln(),
            Func::Sqrt => self.sqrt(),
            Func::Sinh => self.sinh(),
            Func::Cosh => self.cosh(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    U,
    V,
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    PowConst(f64),
    Pow,
    Call(Func),
}

/// Compiled, immutable evaluation plan for `(u, v) -> (x, y, z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceProgram {
    name: String,
    params: Vec<(String, f64)>,
    domain: Domain,
    plans: [Vec<Op>; 3],
}

fn lookup(name: &str, params: &BTreeMap<&str, f64>) -> Result<f64, JetError> {
    match name {
        "pi" => Ok(std::f64::consts::PI),
        "e" => Ok(std::f64::consts::E),
        _ => params
            .get(name)
            .copied()
            .ok_or_else(|| JetError::UnboundIdentifier(name.to_string())),
    }
}

fn eval_const_with(e: &Expr, params: &BTreeMap<&str, f64>) -> Result<f64, JetError> {
    Ok(match e {
        Expr::Num(x) => *x,
        Expr::Var(n) => lookup(n, params)?,
        Expr::Neg(a) => -eval_const_with(a, params)?,
        Expr::Bin(op, l, r) => {
            let (a, b) = (eval_const_with(l, params)?, eval_const_with(r, params)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => Scalar::div(&a, &b)?,
                BinOp::Pow => Scalar::powf(&a, b)?,
            }
        }
        Expr::Call(f, a) => eval_const_with(a, params)?.call(*f)?,
    })
}

pub(crate) fn eval_constant(e: &Expr) -> Result<f64, JetError> {
    eval_const_with(e, &BTreeMap::new())
}

fn emit(e: &Expr, params: &BTreeMap<&str, f64>, out: &mut Vec<Op>) -> Result<(), CompileError> {
    if !e.depends_on_uv() {
        out.push(Op::Const(eval_const_with(e, params)?));
        return Ok(());
    }
    match e {
        Expr::Num(_) => unreachable!("constants are folded above"),
        Expr::Var(n) => match n.as_str() {
            "u" => out.push(Op::U),
            "v" => out.push(Op::V),
            _ => unreachable!("non-coordinate variables are folded above"),
        },
        Expr::Neg(a) => {
            emit(a, params, out)?;
            out.push(Op::Neg);
        }
        Expr::Bin(BinOp::Pow, l, r) if !r.depends_on_uv() => {
            emit(l, params, out)?;
            out.push(Op::PowConst(eval_const_with(r, params)?));
        }
        Expr::Bin(op, l, r) => {
            emit(l, params, out)?;
            emit(r, params, out)?;
            out.push(match op {
                BinOp::Add => Op::Add,
                BinOp::Sub => Op::Sub,
                BinOp::Mul => Op::Mul,
                BinOp::Div => Op::Div,
                BinOp::Pow => Op::Pow,
            });
        }
        Expr::Call(f, a) => {
            emit(a, params, out)?;
            out.push(Op::Call(*f));
        }
    }
    Ok(())
}

/// Binds parameter values (defaults, then `overrides`) and flattens the
/// coordinate expressions into postfix plans.
pub fn compile(def: &SurfaceDef, overrides: &BTreeMap<String, f64>) -> Result<SurfaceProgram, CompileError> {
    for name in overrides.keys() {
        if def.param(name).is_none() {
            return Err(CompileError::UnknownParameter(name.clone()));
        }
    }
    let params: Vec<(String, f64)> = def
        .params
        .iter()
        .map(|(n, d)| (n.clone(), overrides.get(n).copied().unwrap_or(*d)))
        .collect();
    let table: BTreeMap<&str, f64> = params.iter().map(|(n, v)| (n.as_str(), *v)).collect();
    let mut plans: [Vec<Op>; 3] = Default::default();
    for (plan, e) in plans.iter_mut().zip(&def.exprs) {
        emit(e, &table, plan)?;
    }
    Ok(SurfaceProgram {
        name: def.name.clone(),
        params,
        domain: def.domain,
        plans,
    })
}

fn run<S: Scalar>(plan: &[Op], u: &S, v: &S) -> Result<S, JetError> {
    let mut stack: Vec<S> = Vec::with_capacity(8);
    for op in plan {
        let value = match *op {
            Op::Const(c) => S::from_f64(c),
            Op::U => u.clone(),
            Op::V => v.clone(),
            Op::Neg => stack.pop().expect("plan underflow").neg(),
            Op::PowConst(p) => stack.pop().expect("plan underflow").powf(p)?,
            Op::Call(f) => stack.pop().expect("plan underflow").call(f)?,
            Op::Add | Op::Sub | Op::Mul | Op::Div | Op::Pow => {
                let b = stack.pop().expect("plan underflow");
                let a = stack.pop().expect("plan underflow");
                match op {
                    Op::Add => a.add(&b),
                    Op::Sub => a.sub(&b),
                    Op::Mul => a.mul(&b),
                    Op::Div => a.div(&b)?,
                    _ => a.pow(&b)?,
                }
            }
        };
        stack.push(value);
    }
    Ok(stack.pop().expect("empty plan"))
}

impl SurfaceProgram {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Bound parameter values, in declaration order.
    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn eval<S: Scalar>(&self, u: &S, v: &S) -> Result<[S; 3], JetError> {
        Ok([
            run(&self.plans[0], u, v)?,
            run(&self.plans[1], u, v)?,
            run(&self.plans[2], u, v)?,
        ])
    }

    /// Coordinate jets expanded about `(u, v)`.
    pub fn eval_jets(&self, u: f64, v: f64) -> Result<[Jet4; 3], JetError> {
        self.eval(&Jet4::var_u(u), &Jet4::var_v(v))
    }

    /// Plain position at `(u, v)`.
    pub fn eval_point(&self, u: f64, v: f64) -> Result<[f64; 3], JetError> {
        self.eval(&u, &v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdl::{gallery, parse_surface};

    fn no_overrides() -> BTreeMap<String, f64> {
        BTreeMap::new()
    }

    #[test]
    fn plane_z_is_zero_jet() {
        let prog = compile(&gallery("plane").unwrap(), &no_overrides()).unwrap();
        let [_, _, z] = prog.eval_jets(0.3, -0.2).unwrap();
        assert!(z.taylor_coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn helicoid_with_override() {
        let mut ov = BTreeMap::new();
        ov.insert("c".to_string(), 2.0);
        let prog = compile(&gallery("helicoid").unwrap(), &ov).unwrap();
        let j = prog.eval_jets(0.0, 1.0).unwrap();
        let pos: Vec<f64> = j.iter().map(|c| c.value()).collect();
        assert_eq!(pos, vec![1.0, 0.0, 0.0]);
        let du: Vec<f64> = j.iter().map(|c| c.derivative(1, 0).unwrap()).collect();
        assert_eq!(du, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn unknown_override_rejected() {
        let mut ov = BTreeMap::new();
        ov.insert("q".to_string(), 1.0);
        assert_eq!(
            compile(&gallery("helicoid").unwrap(), &ov),
            Err(CompileError::UnknownParameter("q".into()))
        );
    }

    #[test]
    fn plain_and_jet_paths_agree_on_values() {
        let def = parse_surface(
            "surface s { param a = 1.5 x = u^a + v^3 y = 2^u * exp(-v) z = sqrt(u) / tan(v) \
             domain u in [0.1, 1] v in [0.1, 1] }",
        )
        .unwrap();
        let prog = compile(&def, &no_overrides()).unwrap();
        let p = prog.eval_point(0.4, 0.7).unwrap();
        let j = prog.eval_jets(0.4, 0.7).unwrap();
        for k in 0..3 {
            assert!((p[k] - j[k].value()).abs() < 1e-14 * (1.0 + p[k].abs()));
        }
    }

    #[test]
    fn runtime_domain_error() {
        let def = parse_surface("surface s { x = u y = v z = ln(u) domain u in [-1, 1] v in [0, 1] }").unwrap();
        let prog = compile(&def, &no_overrides()).unwrap();
        assert!(matches!(
            prog.eval_jets(-0.5, 0.5),
            Err(JetError::Domain { op: "ln", .. })
        ));
        assert!(prog.eval_point(0.0, 0.5).is_err());
    }

    #[test]
    fn constant_folding_binds_parameters() {
        let def = parse_surface("surface s { param k = 3 x = u * k^2 y = v z = pi domain u in [0, 1] v in [0, 1] }")
            .unwrap();
        let prog = compile(&def, &no_overrides()).unwrap();
        assert_eq!(prog.plans[2], vec![Op::Const(std::f64::consts::PI)]);
        assert_eq!(prog.eval_point(2.0, 0.0).unwrap()[0], 18.0);
    }
}
