//! Fundamental forms, principal curvatures and the adapted frame
//! `{e1, e2, e3}` with `det(e1, e2, e3) = 1`, all carried as jets.
//!
//! Orders: position jets are order 4, tangent vectors and the first
//! fundamental form order 3, and the second fundamental form, curvatures and
//! principal directions order 2.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jet::{Jet4, JetError};
use crate::sdl::SurfaceProgram;

pub type JetVec3 = [Jet4; 3];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("umbilic point (k1 = k2)")]
    UmbilicPoint,
    #[error("parabolic point (k1 k2 = 0)")]
    ParabolicPoint,
    #[error("degenerate parametrization (EG - F^2 <= 0)")]
    DegenerateParametrization,
    #[error("central surface {sheet} degenerates (canal condition)")]
    CanalDegenerate { sheet: u8 },
    #[error("coframe of central surface {sheet} is singular")]
    SingularCoframe { sheet: u8 },
    #[error("point ({u}, {v}) lies outside the domain")]
    OutsideDomain { u: f64, v: f64 },
    #[error(transparent)]
    Jet(#[from] JetError),
}

impl GeometryError {
    /// Short status code used in reports.
    pub fn status(&self) -> &'static str {
        match self {
            GeometryError::UmbilicPoint => "umbilic",
            GeometryError::ParabolicPoint => "parabolic",
            GeometryError::DegenerateParametrization => "degenerate",
            GeometryError::CanalDegenerate { sheet: 1 } => "canal1",
            GeometryError::CanalDegenerate { .. } => "canal2",
            GeometryError::SingularCoframe { .. } => "singular_coframe",
            GeometryError::OutsideDomain { .. } => "outside_domain",
            GeometryError::Jet(_) => "domain_error",
        }
    }
}

/// Thresholds for every degeneracy test and classification flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSet {
    pub umbilic: f64,
    pub parabolic: f64,
    pub metric: f64,
    pub sign: f64,
    pub curvature_floor: f64,
    /// Relative threshold on `|grad_i k_i|` against `|k_i|^3`.
    pub canal: f64,
    /// Relative threshold on `|q_i|` against `|k1| + |k2|`.
    pub moulding: f64,
    pub classify: f64,
    /// Normalized discriminant below which net directions are imaginary.
    pub imaginary: f64,
}

impl Default for ToleranceSet {
    fn default() -> Self {
        Self {
            umbilic: 1e-7,
            parabolic: 1e-9,
            metric: 1e-12,
            sign: 1e-12,
            curvature_floor: 1e-9,
            canal: 1e-6,
            moulding: 1e-6,
            classify: 1e-6,
            imaginary: 1e-12,
        }
    }
}

/// Choice of orientation for `e1`. `Reversed` applies `e1 -> -e1` (and hence
/// `e2 -> -e2`) after canonicalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Orientation {
    #[default]
    Canonical,
    Reversed,
}

/// Record of the sign and branch choices made while building the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Conventions {
    /// Canonicalization negated the raw eigenvector.
    pub e1_flipped: bool,
    pub reversed: bool,
    /// Which adjugate column produced `e1` (0 or 1).
    pub eigen_branch: u8,
}

#[derive(Debug, Clone)]
pub struct SurfaceJet {
    pub x: JetVec3,
    pub point: (f64, f64),
}

pub fn dot(a: &JetVec3, b: &JetVec3) -> Jet4 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: &JetVec3, b: &JetVec3) -> JetVec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn scale(a: &JetVec3, s: Jet4) -> JetVec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn add(a: &JetVec3, b: &JetVec3) -> JetVec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn values(a: &JetVec3) -> [f64; 3] {
    [a[0].value(), a[1].value(), a[2].value()]
}

fn partial_u(a: &JetVec3) -> JetVec3 {
    [a[0].partial_u(), a[1].partial_u(), a[2].partial_u()]
}

fn partial_v(a: &JetVec3) -> JetVec3 {
    [a[0].partial_v(), a[1].partial_v(), a[2].partial_v()]
}

/// Coordinate jets of the surface about `(u, v)`.
pub fn eval_surface(prog: &SurfaceProgram, u: f64, v: f64) -> Result<SurfaceJet, GeometryError> {
    if !prog.domain().contains(u, v) {
        return Err(GeometryError::OutsideDomain { u, v });
    }
    Ok(SurfaceJet {
        x: prog.eval_jets(u, v)?,
        point: (u, v),
    })
}

/// Principal curvatures and the adapted frame at one point.
#[derive(Debug, Clone)]
pub struct PrincipalData {
    pub point: (f64, f64),
    pub position: JetVec3,
    pub x_u: JetVec3,
    pub x_v: JetVec3,
    /// `(E, F, G)`.
    pub first: [Jet4; 3],
    /// `(L, M, N)` with respect to `e3`.
    pub second: [Jet4; 3],
    pub k1: Jet4,
    pub k2: Jet4,
    /// Coordinate components `(e1^u, e1^v)`.
    pub e1: [Jet4; 2],
    pub e2: [Jet4; 2],
    pub e1_ambient: JetVec3,
    pub e2_ambient: JetVec3,
    pub e3: JetVec3,
    pub conventions: Conventions,
}

impl PrincipalData {
    pub fn mean_curvature(&self) -> f64 {
        0.5 * (self.k1.value() + self.k2.value())
    }

    pub fn gauss_curvature(&self) -> f64 {
        self.k1.value() * self.k2.value()
    }

    /// `II(d, d) / I(d, d)` for the coordinate direction `d = (du, dv)`.
    pub fn normal_curvature(&self, d: [f64; 2]) -> f64 {
        let [e, f, g] = self.first.map(|j| j.value());
        let [l, m, n] = self.second.map(|j| j.value());
        let (a, b) = (d[0], d[1]);
        (l * a * a + 2.0 * m * a * b + n * b * b) / (e * a * a + 2.0 * f * a * b + g * b * b)
    }

    /// Value part of the shape operator `I^-1 II` in coordinates.
    pub fn shape_operator(&self) -> [[f64; 2]; 2] {
        let [e, f, g] = self.first.map(|j| j.value());
        let [l, m, n] = self.second.map(|j| j.value());
        let det = e * g - f * f;
        [
            [(g * l - f * m) / det, (g * m - f * n) / det],
            [(e * m - f * l) / det, (e * n - f * m) / det],
        ]
    }
}

fn frame_scale(k1: f64, k2: f64, floor: f64) -> f64 {
    let s = k1.abs() + k2.abs() + floor;
    s * s
}

pub fn principal_data(sj: &SurfaceJet, tol: &ToleranceSet) -> Result<PrincipalData, GeometryError> {
    principal_data_oriented(sj, tol, Orientation::Canonical)
}

pub fn principal_data_oriented(
    sj: &SurfaceJet,
    tol: &ToleranceSet,
    orientation: Orientation,
) -> Result<PrincipalData, GeometryError> {
    let x_u = partial_u(&sj.x);
    let x_v = partial_v(&sj.x);
    let x_uu = partial_u(&x_u);
    let x_uv = partial_v(&x_u);
    let x_vv = partial_v(&x_v);

    let e = dot(&x_u, &x_u);
    let f = dot(&x_u, &x_v);
    let g = dot(&x_v, &x_v);
    let det = e * g - f * f;
    if !(det.value() > tol.metric) {
        return Err(GeometryError::DegenerateParametrization);
    }
    let inv_area = det.sqrt()?.recip()?;
    let e3 = scale(&cross(&x_u, &x_v), inv_area);

    let l = dot(&x_uu, &e3);
    let m = dot(&x_uv, &e3);
    let n = dot(&x_vv, &e3);

    let inv_det = det.recip()?;
    let s11 = (g * l - f * m) * inv_det;
    let s12 = (g * m - f * n) * inv_det;
    let s21 = (e * m - f * l) * inv_det;
    let s22 = (e * n - f * m) * inv_det;

    let h = (s11 + s22) * 0.5;
    let k = (l * n - m * m) * inv_det;
    let disc = h * h - k;

    let (hv, kv) = (h.value(), k.value());
    let root = disc.value().max(0.0).sqrt();
    let scale_v = frame_scale(hv + root, hv - root, tol.curvature_floor);
    if kv.abs() < tol.parabolic * scale_v {
        return Err(GeometryError::ParabolicPoint);
    }
    if 4.0 * disc.value() < tol.umbilic * scale_v {
        return Err(GeometryError::UmbilicPoint);
    }
    let r = disc.sqrt()?;
    let k1 = h + r;
    let k2 = h - r;

    // kernel of S - k1 I: both adjugate columns span it; take the larger one
    let col_a = [s22 - k1, -s21];
    let col_b = [-s12, s11 - k1];
    let norm2 = |c: &[Jet4; 2]| c[0].value().powi(2) + c[1].value().powi(2);
    let (raw, branch) = if norm2(&col_a) >= norm2(&col_b) {
        (col_a, 0u8)
    } else {
        (col_b, 1u8)
    };
    let len2 = e * raw[0] * raw[0] + 2.0 * (f * raw[0] * raw[1]) + g * raw[1] * raw[1];
    let inv_len = len2.sqrt()?.recip()?;
    let mut e1 = [raw[0] * inv_len, raw[1] * inv_len];

    let lead = if e1[0].value().abs() > tol.sign {
        e1[0].value()
    } else {
        e1[1].value()
    };
    let conventions = Conventions {
        e1_flipped: lead < 0.0,
        reversed: orientation == Orientation::Reversed,
        eigen_branch: branch,
    };
    if conventions.e1_flipped != conventions.reversed {
        e1 = [-e1[0], -e1[1]];
    }

    let e1_ambient = add(&scale(&x_u, e1[0]), &scale(&x_v, e1[1]));
    let e2_ambient = cross(&e3, &e1_ambient);
    let p = dot(&x_u, &e2_ambient);
    let q = dot(&x_v, &e2_ambient);
    let e2 = [(g * p - f * q) * inv_det, (e * q - f * p) * inv_det];

    Ok(PrincipalData {
        point: sj.point,
        position: sj.x,
        x_u,
        x_v,
        first: [e, f, g],
        second: [l, m, n],
        k1,
        k2,
        e1,
        e2,
        e1_ambient,
        e2_ambient,
        e3,
        conventions,
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

    fn pd(name: &str, u: f64, v: f64) -> Result<PrincipalData, GeometryError> {
        let prog = program(name);
        principal_data(&eval_surface(&prog, u, v)?, &ToleranceSet::default())
    }

    #[test]
    fn plane_position_jet() {
        let sj = eval_surface(&program("plane"), 0.3, -0.4).unwrap();
        assert_eq!(sj.x[0].value(), 0.3);
        assert_eq!(sj.x[0].derivative(1, 0).unwrap(), 1.0);
        for k in 2..=4 {
            assert_eq!(sj.x[0].derivative(k, 0).unwrap(), 0.0);
        }
    }

    #[test]
    fn graph_quad_origin_jet_and_frame() {
        let sj = eval_surface(&program("graph_quad"), 0.0, 0.0).unwrap();
        let z = &sj.x[2];
        assert_eq!(z.value(), 0.0);
        assert_eq!(z.derivative(2, 0).unwrap(), 2.0);
        assert_eq!(z.derivative(0, 2).unwrap(), 1.0);
        for (i, j) in [(1, 0), (0, 1), (3, 0), (2, 1), (1, 2), (0, 3)] {
            assert_eq!(z.derivative(i, j).unwrap(), 0.0);
        }
        let p = principal_data(&sj, &ToleranceSet::default()).unwrap();
        assert!((p.k1.value() - 2.0).abs() < 1e-15);
        assert!((p.k2.value() - 1.0).abs() < 1e-15);
        assert!((p.e1[0].value() - 1.0).abs() < 1e-15 && p.e1[1].value().abs() < 1e-15);
        assert_eq!(values(&p.e3), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn degeneracies() {
        assert_eq!(pd("sphere", 0.1, 0.2).unwrap_err(), GeometryError::UmbilicPoint);
        assert_eq!(pd("plane", 0.1, 0.2).unwrap_err(), GeometryError::ParabolicPoint);
        assert_eq!(pd("monkey_saddle", 0.0, 0.0).unwrap_err(), GeometryError::ParabolicPoint);
        assert!(matches!(pd("plane", 3.0, 0.0), Err(GeometryError::OutsideDomain { .. })));
    }

    #[test]
    fn helicoid_curvatures() {
        let p = pd("helicoid", 0.5, 1.0).unwrap();
        assert!((p.k1.value() - 0.5).abs() < 1e-14);
        assert!((p.k2.value() + 0.5).abs() < 1e-14);
    }

    #[test]
    fn frame_is_orthonormal_and_right_handed() {
        for (name, u, v) in [("graph_generic", 0.4, -0.7), ("helicoid", 0.3, 0.8), ("dini", 1.0, 0.9)] {
            let p = pd(name, u, v).unwrap();
            let (e1, e2, e3) = (values(&p.e1_ambient), values(&p.e2_ambient), values(&p.e3));
            let d = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
            for (a, b, want) in [(e1, e1, 1.0), (e2, e2, 1.0), (e3, e3, 1.0), (e1, e2, 0.0), (e1, e3, 0.0), (e2, e3, 0.0)] {
                assert!((d(a, b) - want).abs() < 1e-10, "{name}");
            }
            let det = e1[0] * (e2[1] * e3[2] - e2[2] * e3[1]) - e1[1] * (e2[0] * e3[2] - e2[2] * e3[0])
                + e1[2] * (e2[0] * e3[1] - e2[1] * e3[0]);
            assert!((det - 1.0).abs() < 1e-10);
            assert!(p.k1.value() >= p.k2.value());
            // shape-operator residual
            let s = p.shape_operator();
            for (ev, k) in [(p.e1, p.k1.value()), (p.e2, p.k2.value())] {
                let (a, b) = (ev[0].value(), ev[1].value());
                let r = [s[0][0] * a + s[0][1] * b - k * a, s[1][0] * a + s[1][1] * b - k * b];
                assert!(r[0].hypot(r[1]) <= 1e-9 * k.abs().max(1.0) * a.hypot(b));
            }
        }
    }

    #[test]
    fn reversed_orientation_negates_e1_and_e2() {
        let prog = program("graph_generic");
        let sj = eval_surface(&prog, 0.4, -0.7).unwrap();
        let tol = ToleranceSet::default();
        let a = principal_data(&sj, &tol).unwrap();
        let b = principal_data_oriented(&sj, &tol, Orientation::Reversed).unwrap();
        for c in 0..3 {
            assert_eq!(a.e1_ambient[c].value(), -b.e1_ambient[c].value());
            assert_eq!(a.e2_ambient[c].value(), -b.e2_ambient[c].value());
            assert_eq!(a.e3[c].value(), b.e3[c].value());
        }
        assert!(b.conventions.reversed);
    }

    #[test]
    fn euler_formula() {
        let p = pd("graph_generic", -0.3, 0.55).unwrap();
        let (k1, k2) = (p.k1.value(), p.k2.value());
        for s in 0..8 {
            let t = s as f64 * std::f64::consts::PI / 8.0 + 0.1;
            let d = [
                t.cos() * p.e1[0].value() + t.sin() * p.e2[0].value(),
                t.cos() * p.e1[1].value() + t.sin() * p.e2[1].value(),
            ];
            let want = k1 * t.cos().powi(2) + k2 * t.sin().powi(2);
            assert!((p.normal_curvature(d) - want).abs() <= 1e-9 * want.abs().max(1e-3));
        }
    }
}
