//! Central (focal) surfaces `y_i = x + e3 / k_i`.
//!
//! Sheet 1 carries the frame `{e2, e3, e1}` and sheet 2 the frame
//! `{e3, e1, e2}`; the third vector is the sheet's unit normal. On sheet 1
//!
//! ```text
//! w1' = (1 - k2/k1) w2,      w2' = -dk1 / k1^2
//! ```
//!
//! and on sheet 2 `w1'' = -dk2 / k2^2`, `w2'' = (1 - k1/k2) w1`. The focal
//! second fundamental form `a w1'^2 + 2b w1' w2' + c w2'^2` and connection
//! coefficients `q1', q2'` have closed forms in the base surface's
//! invariants, implemented in [`focal_forms`]; [`central_ii_oracle`]
//! recomputes them from second derivatives of the focal sheet itself.
//!
//! Every quantity here divides by `grad_1 k1` (sheet 1) or `grad_2 k2`
//! (sheet 2). When that derivative vanishes the sheet collapses to a curve
//! and the point is rejected with [`GeometryError::CanalDegenerate`].

use serde::{Deserialize, Serialize};

use crate::frames::{pfaffian, FramePoint};
use crate::geometry::{
    add, dot, eval_surface, principal_data_oriented, scale, values, GeometryError, JetVec3, Orientation,
    ToleranceSet,
};
use crate::jet::Jet4;
use crate::sdl::SurfaceProgram;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sheet {
    One,
    Two,
}

impl Sheet {
    pub const BOTH: [Sheet; 2] = [Sheet::One, Sheet::Two];

    pub fn index(self) -> u8 {
        match self {
            Sheet::One => 1,
            Sheet::Two => 2,
        }
    }

    pub fn from_index(i: u8) -> Option<Sheet> {
        match i {
            1 => Some(Sheet::One),
            2 => Some(Sheet::Two),
            _ => None,
        }
    }
}

/// Second fundamental form and connection coefficients of a focal sheet in
/// its own orthonormal coframe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocalForms {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub q1: f64,
    pub q2: f64,
}

impl FocalForms {
    pub fn as_array(&self) -> [f64; 5] {
        [self.a, self.b, self.c, self.q1, self.q2]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralPoint {
    pub sheet: Sheet,
    pub y: [f64; 3],
    /// Rows are the focal coframe forms expanded over `(w1, w2)`.
    pub coframe: [[f64; 2]; 2],
    pub forms: FocalForms,
}

fn k_and_grad(fp: &FramePoint, sheet: Sheet) -> (f64, [f64; 2]) {
    match sheet {
        Sheet::One => (fp.k1, fp.grad_k1),
        Sheet::Two => (fp.k2, fp.grad_k2),
    }
}

/// The derivative whose vanishing collapses the sheet: `grad_1 k1` or
/// `grad_2 k2`.
pub fn canal_derivative(fp: &FramePoint, sheet: Sheet) -> f64 {
    match sheet {
        Sheet::One => fp.grad_k1[0],
        Sheet::Two => fp.grad_k2[1],
    }
}

pub fn canal_degenerate(fp: &FramePoint, sheet: Sheet, tol: &ToleranceSet) -> bool {
    let (k, _) = k_and_grad(fp, sheet);
    canal_derivative(fp, sheet).abs() <= tol.canal * (k.abs().powi(3) + tol.curvature_floor)
}

fn ensure_regular(fp: &FramePoint, sheet: Sheet, tol: &ToleranceSet) -> Result<(), GeometryError> {
    if canal_degenerate(fp, sheet, tol) {
        Err(GeometryError::CanalDegenerate { sheet: sheet.index() })
    } else {
        Ok(())
    }
}

fn coframe_matrix(k1: f64, k2: f64, grad_k1: [f64; 2], grad_k2: [f64; 2], sheet: Sheet) -> [[f64; 2]; 2] {
    match sheet {
        Sheet::One => [
            [0.0, 1.0 - k2 / k1],
            [-grad_k1[0] / (k1 * k1), -grad_k1[1] / (k1 * k1)],
        ],
        Sheet::Two => [
            [-grad_k2[0] / (k2 * k2), -grad_k2[1] / (k2 * k2)],
            [1.0 - k1 / k2, 0.0],
        ],
    }
}

/// Focal coframe over the base coframe.
pub fn coframe(fp: &FramePoint, sheet: Sheet) -> [[f64; 2]; 2] {
    coframe_matrix(fp.k1, fp.k2, fp.grad_k1, fp.grad_k2, sheet)
}

/// `w1' ^ w2'` as a multiple of `w1 ^ w2`.
pub fn coframe_wedge(fp: &FramePoint, sheet: Sheet) -> f64 {
    let m = coframe(fp, sheet);
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Closed forms of `a, b, c, q1, q2` for the given sheet. Callers check
/// canal regularity first.
pub fn focal_forms(fp: &FramePoint, sheet: Sheet) -> FocalForms {
    let (k1, k2, q1, q2) = (fp.k1, fp.k2, fp.q1, fp.q2);
    let diff = k1 - k2;
    let qc = k1 * k2 / diff;
    match sheet {
        Sheet::One => {
            let [d1k1, d2k1] = fp.grad_k1;
            FocalForms {
                a: k1 * (q1 * d2k1 - q2 * d1k1) / (diff * d1k1),
                b: q1 * k1 * k1 / d1k1,
                c: k1 * k1 * k1 / d1k1,
                q1: qc,
                q2: 0.0,
            }
        }
        Sheet::Two => {
            let [d1k2, d2k2] = fp.grad_k2;
            FocalForms {
                a: k2 * k2 * k2 / d2k2,
                b: -q2 * k2 * k2 / d2k2,
                c: k2 * (q2 * d1k2 - q1 * d2k2) / (diff * d2k2),
                q1: 0.0,
                q2: qc,
            }
        }
    }
}

pub fn central_point(fp: &FramePoint, sheet: Sheet, tol: &ToleranceSet) -> Result<CentralPoint, GeometryError> {
    ensure_regular(fp, sheet, tol)?;
    let (k, _) = k_and_grad(fp, sheet);
    let x = values(&fp.principal.position);
    let n = values(&fp.principal.e3);
    Ok(CentralPoint {
        sheet,
        y: [x[0] + n[0] / k, x[1] + n[1] / k, x[2] + n[2] / k],
        coframe: coframe(fp, sheet),
        forms: focal_forms(fp, sheet),
    })
}

fn inverse(m: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let norm = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    if det.abs() <= 1e-14 * norm * norm || !det.is_finite() {
        return None;
    }
    Some([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}

fn mat_mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn transpose(a: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

fn d_u(a: &JetVec3) -> JetVec3 {
    a.map(|c| c.partial_u())
}

fn d_v(a: &JetVec3) -> JetVec3 {
    a.map(|c| c.partial_v())
}

pub fn central_ii_oracle(
    prog: &SurfaceProgram,
    u: f64,
    v: f64,
    sheet: Sheet,
    tol: &ToleranceSet,
) -> Result<FocalForms, GeometryError> {
    central_ii_oracle_oriented(prog, u, v, sheet, tol, Orientation::Canonical)
}

/// Focal-sheet forms computed directly from the focal parametrization: its
/// second derivatives against the sheet normal, and the derivative of its
/// first frame vector against the second, converted into the focal coframe.
pub fn central_ii_oracle_oriented(
    prog: &SurfaceProgram,
    u: f64,
    v: f64,
    sheet: Sheet,
    tol: &ToleranceSet,
    orientation: Orientation,
) -> Result<FocalForms, GeometryError> {
    let sj = eval_surface(prog, u, v)?;
    let pd = principal_data_oriented(&sj, tol, orientation)?;
    let gk1 = pfaffian(&pd.k1, &pd).map(|j| j.value());
    let gk2 = pfaffian(&pd.k2, &pd).map(|j| j.value());
    let (k1, k2) = (pd.k1.value(), pd.k2.value());
    let (k, canal) = match sheet {
        Sheet::One => (&pd.k1, gk1[0]),
        Sheet::Two => (&pd.k2, gk2[1]),
    };
    if canal.abs() <= tol.canal * (k.value().abs().powi(3) + tol.curvature_floor) {
        return Err(GeometryError::CanalDegenerate { sheet: sheet.index() });
    }

    let radius: Jet4 = k.recip()?;
    let y = add(&pd.position, &scale(&pd.e3, radius));
    let (y_u, y_v) = (d_u(&y), d_v(&y));
    let (y_uu, y_uv, y_vv) = (d_u(&y_u), d_v(&y_u), d_v(&y_v));

    let (normal, first, second) = match sheet {
        Sheet::One => (&pd.e1_ambient, &pd.e2_ambient, &pd.e3),
        Sheet::Two => (&pd.e2_ambient, &pd.e3, &pd.e1_ambient),
    };
    let ii = [
        [dot(&y_uu, normal).value(), dot(&y_uv, normal).value()],
        [dot(&y_uv, normal).value(), dot(&y_vv, normal).value()],
    ];
    let conn = [
        dot(&d_u(first), second).value(),
        dot(&d_v(first), second).value(),
    ];

    // base coframe over (du, dv), then focal coframe over (du, dv)
    let base = [
        [dot(&pd.x_u, &pd.e1_ambient).value(), dot(&pd.x_v, &pd.e1_ambient).value()],
        [dot(&pd.x_u, &pd.e2_ambient).value(), dot(&pd.x_v, &pd.e2_ambient).value()],
    ];
    let focal = mat_mul(coframe_matrix(k1, k2, gk1, gk2, sheet), base);
    let inv = inverse(focal).ok_or(GeometryError::SingularCoframe { sheet: sheet.index() })?;
    let abc = mat_mul(transpose(inv), mat_mul(ii, inv));
    let q = [
        conn[0] * inv[0][0] + conn[1] * inv[1][0],
        conn[0] * inv[0][1] + conn[1] * inv[1][1],
    ];
    Ok(FocalForms {
        a: abc[0][0],
        b: 0.5 * (abc[0][1] + abc[1][0]),
        c: abc[1][1],
        q1: q[0],
        q2: q[1],
    })
}

/// Pfaffian derivatives along the focal coordinate curves, from the base
/// Pfaffians `grad_f = (grad_1 f, grad_2 f)`.
pub fn central_pfaffian(
    fp: &FramePoint,
    grad_f: [f64; 2],
    sheet: Sheet,
    tol: &ToleranceSet,
) -> Result<[f64; 2], GeometryError> {
    ensure_regular(fp, sheet, tol)?;
    Ok(central_pfaffian_unchecked(fp, grad_f, sheet))
}

fn central_pfaffian_unchecked(fp: &FramePoint, grad_f: [f64; 2], sheet: Sheet) -> [f64; 2] {
    let (k1, k2) = (fp.k1, fp.k2);
    let [f1, f2] = grad_f;
    match sheet {
        Sheet::One => {
            let [d1k1, d2k1] = fp.grad_k1;
            [
                k1 * (d1k1 * f2 - d2k1 * f1) / ((k1 - k2) * d1k1),
                -k1 * k1 * f1 / d1k1,
            ]
        }
        Sheet::Two => {
            let [d1k2, d2k2] = fp.grad_k2;
            [
                -k2 * k2 * f2 / d2k2,
                k2 * (d2k2 * f1 - d1k2 * f2) / ((k2 - k1) * d2k2),
            ]
        }
    }
}

/// `grad_1' q1' + grad_2' q2'` on the given sheet; it vanishes exactly when
/// the focal coordinate net is isothermic.
pub fn isothermic_divergence(fp: &FramePoint, sheet: Sheet, tol: &ToleranceSet) -> Result<f64, GeometryError> {
    ensure_regular(fp, sheet, tol)?;
    let pd = &fp.principal;
    let qc = pd.k1 * pd.k2 * (pd.k1 - pd.k2).recip()?;
    let zero = Jet4::constant(0.0);
    let (q1c, q2c) = match sheet {
        Sheet::One => (qc, zero),
        Sheet::Two => (zero, qc),
    };
    let d_q1c = central_pfaffian_unchecked(fp, fp.grad(&q1c), sheet);
    let d_q2c = central_pfaffian_unchecked(fp, fp.grad(&q2c), sheet);
    Ok(d_q1c[0] + d_q2c[1])
}

/// Jacobian determinant of `(k1, k2)` under `(grad_1, grad_2)`; zero exactly
/// on Weingarten surfaces.
pub fn curvature_jacobian(fp: &FramePoint) -> f64 {
    fp.grad_k1[0] * fp.grad_k2[1] - fp.grad_k1[1] * fp.grad_k2[0]
}

/// Factor `lambda` with `divergence = lambda * jacobian`:
/// `k_i^3 / ((k1 - k2)^3 grad_i k_i)`.
pub fn divergence_factor(fp: &FramePoint, sheet: Sheet) -> f64 {
    let (k, _) = k_and_grad(fp, sheet);
    k.powi(3) / ((fp.k1 - fp.k2).powi(3) * canal_derivative(fp, sheet))
}
