//! Pointwise curvature-class defects, classification flags, and the
//! proposition identities relating net conditions to curvature functions.
//!
//! Each proposition is checked as an identity `lhs = lambda * rhs`, where
//! `lhs` is the raw net defect (`A + C` or `k2 A + k1 C`) and `rhs` a
//! Pfaffian derivative of a curvature function computed independently from
//! its jet. The conversion factors come from substituting the Codazzi
//! equations `grad_2 k1 = q1 (k1 - k2)`, `grad_1 k2 = q2 (k1 - k2)`:
//!
//! | id | lhs | rhs | lambda |
//! |----|-----|-----|--------|
//! | `prop1_sheet1` | divergence on sheet 1 | `det d(k1, k2)` | `k1^3 / ((k1 - k2)^3 grad_1 k1)` |
//! | `prop1_sheet2` | divergence on sheet 2 | `det d(k1, k2)` | `k2^3 / ((k1 - k2)^3 grad_2 k2)` |
//! | `prop3a_13`, `prop3a_14` | orth 13, 14 | `grad_i (k1 - k2)` | `1` |
//! | `prop3b_13`, `prop3b_14` | conj 13, 14 | `grad_i (k1 / k2)` | `k2^2` |
//! | `prop4_15`, `prop4_16` | orth 15, 16 | `grad_i (1/k1 - 1/k2)` | `-1` |
//! | `prop5a_17`, `prop5a_18` | orth 17, 18 | `grad_i (k1 + k2)` | `q_i` |
//! | `prop5b_17`, `prop5b_18` | conj 17, 18 | `grad_i (k1 k2)` | `q_i` |
//! | `prop6_sph17`, `prop6_sph18` | orth of spherical images | `grad_i (1/k1 + 1/k2)` | `-q_i` |
//!
//! `i` is 1 for nets 13, 15, 17 and 2 for 14, 16, 18.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::central::{canal_degenerate, curvature_jacobian, divergence_factor, isothermic_divergence, Sheet};
use crate::frames::FramePoint;
use crate::geometry::{GeometryError, ToleranceSet};
use crate::jet::Jet4;
use crate::nets::{net_asymptotic_pullback, net_curvature_pullback, spherical_image, NetForm};

pub const DEFECT_FLOOR: f64 = 1e-30;

/// Share of `|grad k|^2` added to normalizing products, so that a gradient
/// at rounding level does not dominate a quotient.
pub const RELATIVE_FLOOR: f64 = 1e-8;

/// Functions of the principal curvatures whose constancy defines a class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureClass {
    Diff,
    Ratio,
    RadiiDiff,
    RadiiSum,
    Mean,
    Gauss,
}

impl CurvatureClass {
    pub const ALL: [CurvatureClass; 6] = [
        CurvatureClass::Diff,
        CurvatureClass::Ratio,
        CurvatureClass::RadiiDiff,
        CurvatureClass::RadiiSum,
        CurvatureClass::Mean,
        CurvatureClass::Gauss,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CurvatureClass::Diff => "diff",
            CurvatureClass::Ratio => "ratio",
            CurvatureClass::RadiiDiff => "radii_diff",
            CurvatureClass::RadiiSum => "radii_sum",
            CurvatureClass::Mean => "mean",
            CurvatureClass::Gauss => "gauss",
        }
    }

    /// The class function as a jet, from jets of `k1`, `k2`.
    pub fn jet(self, k1: &Jet4, k2: &Jet4) -> Result<Jet4, GeometryError> {
        Ok(match self {
            CurvatureClass::Diff => *k1 - *k2,
            CurvatureClass::Ratio => k1.try_div(k2)?,
            CurvatureClass::RadiiDiff => k1.recip()? - k2.recip()?,
            CurvatureClass::RadiiSum => k1.recip()? + k2.recip()?,
            CurvatureClass::Mean => *k1 + *k2,
            CurvatureClass::Gauss => *k1 * *k2,
        })
    }

    /// `(|dg/dk1|, |dg/dk2|)` at the point.
    fn sensitivity(self, k1: f64, k2: f64) -> (f64, f64) {
        match self {
            CurvatureClass::Diff | CurvatureClass::Mean => (1.0, 1.0),
            CurvatureClass::Ratio => ((1.0 / k2).abs(), (k1 / (k2 * k2)).abs()),
            CurvatureClass::RadiiDiff | CurvatureClass::RadiiSum => (1.0 / (k1 * k1), 1.0 / (k2 * k2)),
            CurvatureClass::Gauss => (k2.abs(), k1.abs()),
        }
    }
}

/// Pfaffian gradient of a class function.
pub fn class_gradient(fp: &FramePoint, class: CurvatureClass) -> Result<[f64; 2], GeometryError> {
    let pd = &fp.principal;
    Ok(fp.grad(&class.jet(&pd.k1, &pd.k2)?))
}

fn norm2(g: [f64; 2]) -> f64 {
    g[0].hypot(g[1])
}

/// Raw Jacobian determinant over `|grad k1| |grad k2|` (plus floor).
pub fn w_defect(fp: &FramePoint) -> f64 {
    let (n1, n2) = (norm2(fp.grad_k1), norm2(fp.grad_k2));
    curvature_jacobian(fp) / (n1 * n2 + RELATIVE_FLOOR * (n1 * n1 + n2 * n2) + DEFECT_FLOOR)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Flags {
    pub weingarten: bool,
    pub cmc: bool,
    pub const_gauss: bool,
    pub const_diff: bool,
    pub const_ratio: bool,
    pub const_radii_diff: bool,
    pub const_radii_sum: bool,
    pub moulding: bool,
    pub canal1: bool,
    pub canal2: bool,
}

/// One proposition checked as `lhs = lambda * rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropResidual {
    pub lhs: f64,
    pub rhs: f64,
    pub lambda: f64,
    /// `|lhs - lambda rhs| / (|lhs| + |lambda rhs|)`.
    pub residual: f64,
    /// False where the proposition's hypotheses (non-moulding) fail.
    pub asserted: bool,
}

impl PropResidual {
    fn new(lhs: f64, rhs: f64, lambda: f64, asserted: bool) -> Self {
        let want = lambda * rhs;
        Self {
            lhs,
            rhs,
            lambda,
            residual: (lhs - want).abs() / (lhs.abs() + want.abs() + DEFECT_FLOOR),
            asserted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub point: (f64, f64),
    pub k1: f64,
    pub k2: f64,
    pub q1: f64,
    pub q2: f64,
    pub w_defect: f64,
    /// Gradient norm of each class function.
    pub class_defects: BTreeMap<String, f64>,
    /// Gradient norm relative to `sum |dg/dk_i| |grad k_i|`.
    pub class_normalized: BTreeMap<String, f64>,
    pub moulding: bool,
    pub canal1: bool,
    pub canal2: bool,
    pub prop_residuals: BTreeMap<String, PropResidual>,
}

impl DefectReport {
    pub fn mean_curvature(&self) -> f64 {
        0.5 * (self.k1 + self.k2)
    }

    pub fn gauss_curvature(&self) -> f64 {
        self.k1 * self.k2
    }

    pub fn normalized(&self, class: CurvatureClass) -> f64 {
        self.class_normalized.get(class.name()).copied().unwrap_or(f64::INFINITY)
    }

    /// Worst residual among the asserted propositions.
    pub fn max_asserted_residual(&self) -> f64 {
        self.prop_residuals
            .values()
            .filter(|r| r.asserted)
            .fold(0.0, |m, r| m.max(r.residual))
    }
}

pub fn is_moulding(fp: &FramePoint, tol: &ToleranceSet) -> bool {
    let bound = tol.moulding * (fp.k1.abs() + fp.k2.abs() + tol.curvature_floor);
    fp.q1.abs() <= bound || fp.q2.abs() <= bound
}

fn orth(n: &NetForm) -> f64 {
    n.orthogonality_raw()
}

pub fn proposition_report(fp: &FramePoint, tol: &ToleranceSet) -> Result<DefectReport, GeometryError> {
    let (k1, k2) = (fp.k1, fp.k2);
    let (n1, n2) = (norm2(fp.grad_k1), norm2(fp.grad_k2));

    let mut class_defects = BTreeMap::new();
    let mut class_normalized = BTreeMap::new();
    let mut grads = BTreeMap::new();
    for class in CurvatureClass::ALL {
        let g = class_gradient(fp, class)?;
        let (s1, s2) = class.sensitivity(k1, k2);
        let scale = s1 * n1 + s2 * n2;
        let d = norm2(g);
        class_defects.insert(class.name().to_string(), d);
        class_normalized.insert(class.name().to_string(), d / (scale + DEFECT_FLOOR));
        grads.insert(class, g);
    }

    let moulding = is_moulding(fp, tol);
    let canal = [canal_degenerate(fp, Sheet::One, tol), canal_degenerate(fp, Sheet::Two, tol)];
    let jac = curvature_jacobian(fp);
    let q = [fp.q1, fp.q2];

    let mut props = BTreeMap::new();
    for sheet in Sheet::BOTH {
        let i = (sheet.index() - 1) as usize;
        if canal[i] {
            continue;
        }
        let asym = net_asymptotic_pullback(fp, sheet, tol)?;
        let curv = net_curvature_pullback(fp, sheet, tol)?;
        let asym_sph = spherical_image(&asym, fp);
        let curv_sph = spherical_image(&curv, fp);
        let (t_asym, t_sph, t_curv) = match sheet {
            Sheet::One => ("13", "15", "17"),
            Sheet::Two => ("14", "16", "18"),
        };
        let grad = |c: CurvatureClass| grads[&c][i];

        let div = isothermic_divergence(fp, sheet, tol)?;
        props.insert(
            format!("prop1_sheet{}", sheet.index()),
            PropResidual::new(div, jac, divergence_factor(fp, sheet), true),
        );
        props.insert(
            format!("prop3a_{t_asym}"),
            PropResidual::new(orth(&asym), grad(CurvatureClass::Diff), 1.0, true),
        );
        props.insert(
            format!("prop3b_{t_asym}"),
            PropResidual::new(asym.conjugacy_raw(k1, k2), grad(CurvatureClass::Ratio), k2 * k2, true),
        );
        props.insert(
            format!("prop4_{t_sph}"),
            PropResidual::new(orth(&asym_sph), grad(CurvatureClass::RadiiDiff), -1.0, true),
        );
        props.insert(
            format!("prop5a_{t_curv}"),
            PropResidual::new(orth(&curv), grad(CurvatureClass::Mean), q[i], !moulding),
        );
        props.insert(
            format!("prop5b_{t_curv}"),
            PropResidual::new(curv.conjugacy_raw(k1, k2), grad(CurvatureClass::Gauss), q[i], !moulding),
        );
        props.insert(
            format!("prop6_sph{t_curv}"),
            PropResidual::new(orth(&curv_sph), grad(CurvatureClass::RadiiSum), -q[i], !moulding),
        );
    }

    Ok(DefectReport {
        point: fp.point,
        k1,
        k2,
        q1: fp.q1,
        q2: fp.q2,
        w_defect: w_defect(fp),
        class_defects,
        class_normalized,
        moulding,
        canal1: canal[0],
        canal2: canal[1],
        prop_residuals: props,
    })
}

pub fn classify_point(report: &DefectReport, tol: &ToleranceSet) -> Flags {
    let flat = |c: CurvatureClass| report.normalized(c) <= tol.classify;
    Flags {
        weingarten: report.w_defect.abs() <= tol.classify,
        cmc: flat(CurvatureClass::Mean),
        const_gauss: flat(CurvatureClass::Gauss),
        const_diff: flat(CurvatureClass::Diff),
        const_ratio: flat(CurvatureClass::Ratio),
        const_radii_diff: flat(CurvatureClass::RadiiDiff),
        const_radii_sum: flat(CurvatureClass::RadiiSum),
        moulding: report.moulding,
        canal1: report.canal1,
        canal2: report.canal2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{frame_point, frame_point_oriented};
    use crate::geometry::Orientation;
    use crate::sdl::{compile, gallery, SurfaceProgram};

    fn program(name: &str) -> SurfaceProgram {
        compile(&gallery(name).unwrap(), &Default::default()).unwrap()
    }

    fn report(name: &str, u: f64, v: f64) -> (DefectReport, Flags) {
        let tol = ToleranceSet::default();
        let fp = frame_point(&program(name), u, v, &tol).unwrap();
        let r = proposition_report(&fp, &tol).unwrap();
        let f = classify_point(&r, &tol);
        (r, f)
    }

    #[test]
    fn helicoid_flags() {
        let (r, f) = report("helicoid", 0.3, 1.0);
        assert!(f.weingarten && f.cmc && !f.const_gauss && !f.moulding, "{f:?} {r:?}");
        assert!(r.w_defect.abs() <= 1e-9);
    }

    #[test]
    fn dini_flags() {
        let (r, f) = report("dini", 2.0, 0.7);
        assert!(f.weingarten && f.const_gauss && !f.cmc, "{f:?} {r:?}");
    }

    #[test]
    fn enneper_flags() {
        let (_, f) = report("enneper", 0.2, 0.5);
        assert!(f.weingarten && f.cmc, "{f:?}");
    }

    #[test]
    fn generic_surface_is_not_weingarten() {
        let (r, f) = report("graph_generic", 0.4, -0.7);
        assert!(!f.weingarten && !f.cmc && !f.const_gauss);
        assert!(r.w_defect.abs() > 1e-3);
    }

    #[test]
    fn identities_hold_on_generic_surface() {
        let (r, _) = report("graph_generic", 0.4, -0.7);
        assert_eq!(r.prop_residuals.len(), 14);
        for (id, p) in &r.prop_residuals {
            assert!(p.lhs.abs() > 1e-6 && p.rhs.abs() > 1e-6, "{id} {p:?}");
            assert!(p.residual < 1e-8, "{id} {p:?}");
        }
    }

    #[test]
    fn w_defect_flips_with_orientation() {
        let tol = ToleranceSet::default();
        let prog = program("graph_generic");
        let a = frame_point(&prog, 0.4, -0.7, &tol).unwrap();
        let b = frame_point_oriented(&prog, 0.4, -0.7, &tol, Orientation::Reversed).unwrap();
        // both gradients flip, so the determinant does not
        assert!((w_defect(&a) - w_defect(&b)).abs() < 1e-14);
    }

    #[test]
    fn class_defects_are_gradient_norms() {
        let tol = ToleranceSet::default();
        let fp = frame_point(&program("graph_generic"), 0.4, -0.7, &tol).unwrap();
        let r = proposition_report(&fp, &tol).unwrap();
        let g = [fp.grad_k1[0] + fp.grad_k2[0], fp.grad_k1[1] + fp.grad_k2[1]];
        assert!((r.class_defects["mean"] - g[0].hypot(g[1])).abs() < 1e-12);
        assert!(r.class_defects.values().all(|d| *d >= 0.0));
    }
}
