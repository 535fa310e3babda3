//! Connection coefficients `q1, q2`, Pfaffian derivatives along the unit
//! principal directions, and the structure-equation residuals.
//!
//! `q1 = <D_{e1} e1, e2>` and `q2 = <D_{e2} e1, e2>` are obtained by
//! differentiating the jet-valued `e1` field, never from the Codazzi
//! equations, so [`check_codazzi`] stays an independent check.

use serde::{Deserialize, Serialize};

use crate::geometry::{
    eval_surface, principal_data_oriented, Conventions, GeometryError, Orientation,
    PrincipalData, ToleranceSet,
};
use crate::jet::Jet4;
use crate::sdl::SurfaceProgram;

/// Absolute floor added to every residual scale.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

/// Jet-valued `(grad_1 f, grad_2 f)`, one order lower than `f`.
pub fn pfaffian(field: &Jet4, pd: &PrincipalData) -> [Jet4; 2] {
    let fu = field.partial_u();
    let fv = field.partial_v();
    [
        pd.e1[0] * fu + pd.e1[1] * fv,
        pd.e2[0] * fu + pd.e2[1] * fv,
    ]
}

/// Second Pfaffian derivatives, `d[i][j] = grad_{i+1} grad_{j+1} f`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SecondPfaffians {
    pub d11: f64,
    pub d12: f64,
    pub d21: f64,
    pub d22: f64,
}

/// Frame data at one non-degenerate point.
#[derive(Debug, Clone)]
pub struct FramePoint {
    pub point: (f64, f64),
    pub k1: f64,
    pub k2: f64,
    /// `(grad_1 k1, grad_2 k1)`.
    pub grad_k1: [f64; 2],
    pub grad_k2: [f64; 2],
    pub q1: f64,
    pub q2: f64,
    pub hess_k1: SecondPfaffians,
    pub hess_k2: SecondPfaffians,
    pub grad_q1: [f64; 2],
    pub grad_q2: [f64; 2],
    pub conventions: Conventions,
    /// Jet-valued frame the values above were read from.
    pub principal: PrincipalData,
    pub q1_jet: Jet4,
    pub q2_jet: Jet4,
}

impl FramePoint {
    /// Pfaffian derivatives of a jet-valued field at this point.
    pub fn grad(&self, field: &Jet4) -> [f64; 2] {
        let [a, b] = pfaffian(field, &self.principal);
        [a.value(), b.value()]
    }

    pub fn mean_curvature(&self) -> f64 {
        0.5 * (self.k1 + self.k2)
    }

    pub fn gauss_curvature(&self) -> f64 {
        self.k1 * self.k2
    }

    /// Euclidean norm of `(grad k1, grad k2)`.
    pub fn grad_k_norm(&self) -> f64 {
        (self.grad_k1[0].powi(2) + self.grad_k1[1].powi(2) + self.grad_k2[0].powi(2) + self.grad_k2[1].powi(2))
            .sqrt()
    }
}

fn second(pd: &PrincipalData, grad: &[Jet4; 2]) -> SecondPfaffians {
    let [g11, g12] = pfaffian(&grad[0], pd);
    let [g21, g22] = pfaffian(&grad[1], pd);
    SecondPfaffians {
        d11: g11.value(),
        d21: g12.value(),
        d12: g21.value(),
        d22: g22.value(),
    }
}

pub fn frame_from_principal(pd: PrincipalData) -> FramePoint {
    let gk1 = pfaffian(&pd.k1, &pd);
    let gk2 = pfaffian(&pd.k2, &pd);

    let mut q1 = Jet4::constant(0.0);
    let mut q2 = Jet4::constant(0.0);
    for c in 0..3 {
        let [d1, d2] = pfaffian(&pd.e1_ambient[c], &pd);
        q1 += d1 * pd.e2_ambient[c];
        q2 += d2 * pd.e2_ambient[c];
    }
    let [q1_1, q1_2] = pfaffian(&q1, &pd);
    let [q2_1, q2_2] = pfaffian(&q2, &pd);

    FramePoint {
        point: pd.point,
        k1: pd.k1.value(),
        k2: pd.k2.value(),
        grad_k1: [gk1[0].value(), gk1[1].value()],
        grad_k2: [gk2[0].value(), gk2[1].value()],
        q1: q1.value(),
        q2: q2.value(),
        hess_k1: second(&pd, &gk1),
        hess_k2: second(&pd, &gk2),
        grad_q1: [q1_1.value(), q1_2.value()],
        grad_q2: [q2_1.value(), q2_2.value()],
        conventions: pd.conventions,
        q1_jet: q1,
        q2_jet: q2,
        principal: pd,
    }
}

pub fn frame_point(prog: &SurfaceProgram, u: f64, v: f64, tol: &ToleranceSet) -> Result<FramePoint, GeometryError> {
    frame_point_oriented(prog, u, v, tol, Orientation::Canonical)
}

pub fn frame_point_oriented(
    prog: &SurfaceProgram,
    u: f64,
    v: f64,
    tol: &ToleranceSet,
    orientation: Orientation,
) -> Result<FramePoint, GeometryError> {
    let sj = eval_surface(prog, u, v)?;
    let pd = principal_data_oriented(&sj, tol, orientation)?;
    Ok(frame_from_principal(pd))
}

/// A theorem residual together with the magnitude it is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub value: f64,
    pub scale: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        self.value.abs() / (self.scale + RESIDUAL_FLOOR)
    }
}

/// Codazzi residuals `grad_2 k1 - q1 (k1 - k2)` and
/// `grad_1 k2 - q2 (k1 - k2)`.
pub fn check_codazzi(fp: &FramePoint) -> [Residual; 2] {
    let diff = fp.k1 - fp.k2;
    let scale = diff.abs() * (fp.q1.abs() + fp.q2.abs()) + fp.grad_k_norm();
    [
        Residual {
            value: fp.grad_k1[1] - fp.q1 * diff,
            scale,
        },
        Residual {
            value: fp.grad_k2[0] - fp.q2 * diff,
            scale,
        },
    ]
}

/// Gauss residual `grad_2 q1 - grad_1 q2 - q1^2 - q2^2 - k1 k2`.
pub fn check_gauss(fp: &FramePoint) -> Residual {
    let (d2q1, d1q2) = (fp.grad_q1[1], fp.grad_q2[0]);
    let (q1s, q2s) = (fp.q1 * fp.q1, fp.q2 * fp.q2);
    let kk = fp.k1 * fp.k2;
    Residual {
        value: d2q1 - d1q2 - q1s - q2s - kk,
        scale: kk.abs() + d2q1.abs() + d1q2.abs() + q1s + q2s,
    }
}

/// Commutator residual `grad_1 grad_2 f - grad_2 grad_1 f + q1 grad_1 f +
/// q2 grad_2 f` for `f = k1` and `f = k2`.
pub fn check_commutator(fp: &FramePoint) -> [Residual; 2] {
    [(fp.hess_k1, fp.grad_k1), (fp.hess_k2, fp.grad_k2)].map(|(h, g)| {
        let conn = fp.q1 * g[0] + fp.q2 * g[1];
        Residual {
            value: h.d12 - h.d21 + conn,
            scale: h.d12.abs() + h.d21.abs() + (fp.q1 * g[0]).abs() + (fp.q2 * g[1]).abs(),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdl::{compile, gallery};
    use std::collections::BTreeMap;

    fn program(name: &str) -> SurfaceProgram {
        compile(&gallery(name).unwrap(), &BTreeMap::new()).unwrap()
    }

    #[test]
    fn pfaffian_of_constant_and_coordinate() {
        let prog = program("graph_quad");
        let fp = frame_point(&prog, 0.0, 0.0, &ToleranceSet::default()).unwrap();
        assert_eq!(fp.grad(&Jet4::constant(3.0)), [0.0, 0.0]);
        let g = fp.grad(&Jet4::var_u(0.0));
        assert!((g[0] - 1.0).abs() < 1e-15 && g[1].abs() < 1e-15);
    }

    #[test]
    fn graph_quad_origin_is_geodesic_and_codazzi_exact() {
        let fp = frame_point(&program("graph_quad"), 0.0, 0.0, &ToleranceSet::default()).unwrap();
        assert!(fp.q1.abs() < 1e-15 && fp.q2.abs() < 1e-15);
        for r in check_codazzi(&fp) {
            assert!(r.value.abs() < 1e-15);
        }
        let g = check_gauss(&fp);
        assert!(g.value.abs() <= 1e-8 * g.scale);
    }

    #[test]
    fn structure_equations_hold() {
        let tol = ToleranceSet::default();
        for (name, u, v) in [
            ("graph_generic", 0.4, -0.7),
            ("helicoid", 0.3, 0.8),
            ("enneper", 0.2, 0.5),
            ("scherk", -0.6, 0.9),
            ("dini", 2.0, 0.7),
        ] {
            let fp = frame_point(&program(name), u, v, &tol).unwrap();
            for r in check_codazzi(&fp) {
                assert!(r.relative() < 1e-8, "{name} codazzi {r:?}");
            }
            let g = check_gauss(&fp);
            assert!(g.relative() < 1e-8, "{name} gauss {g:?}");
            for r in check_commutator(&fp) {
                assert!(r.relative() < 1e-7, "{name} commutator {r:?}");
            }
        }
    }

    #[test]
    fn reversing_e1_flips_odd_quantities() {
        let prog = program("helicoid");
        let tol = ToleranceSet::default();
        let a = frame_point(&prog, 0.3, 0.8, &tol).unwrap();
        let b = frame_point_oriented(&prog, 0.3, 0.8, &tol, Orientation::Reversed).unwrap();
        assert_eq!(a.q1, -b.q1);
        assert_eq!(a.q2, -b.q2);
        assert_eq!(a.grad_k1[0], -b.grad_k1[0]);
        assert_eq!(a.grad_k1[1], -b.grad_k1[1]);
        assert!((a.q1 * a.grad_k1[0] - b.q1 * b.grad_k1[0]).abs() < 1e-15);
        assert!((check_gauss(&a).value.abs() - check_gauss(&b).value.abs()).abs() < 1e-14);
    }
}
