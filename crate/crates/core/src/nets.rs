//! Nets as quadratic forms `A w1^2 + 2B w1 w2 + C w2^2 = 0` in the
//! orthonormal principal coframe, and the predicates on them.
//!
//! All predicates are root-free: orthogonality is `A + C = 0`, conjugacy
//! with respect to `II = k1 w1^2 + k2 w2^2` is `k2 A + k1 C = 0`, and the
//! directions are real iff `B^2 - AC >= 0`. Defects are divided by
//! `max(|A|, |B|, |C|)`, so they do not depend on the overall scale of the
//! form.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::central::{canal_degenerate, Sheet};
use crate::frames::FramePoint;
use crate::geometry::{GeometryError, ToleranceSet};

pub const NORM_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetError {
    #[error("net form is identically zero")]
    ZeroNet,
    #[error("net directions are imaginary")]
    Imaginary,
}

/// Which net a form represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetLabel {
    /// Asymptotic lines of central sheet 1, pulled back.
    Asymptotic1,
    /// Asymptotic lines of central sheet 2, pulled back.
    Asymptotic2,
    /// Spherical image of [`NetLabel::Asymptotic1`].
    SphericalAsymptotic1,
    SphericalAsymptotic2,
    /// Curvature lines of central sheet 1, pulled back.
    Curvature1,
    Curvature2,
    SphericalCurvature1,
    SphericalCurvature2,
    Custom,
}

impl NetLabel {
    /// Short tag used in file names and reports (`13` ... `18`, `sph17`,
    /// `sph18`).
    pub fn tag(self) -> &'static str {
        match self {
            NetLabel::Asymptotic1 => "13",
            NetLabel::Asymptotic2 => "14",
            NetLabel::SphericalAsymptotic1 => "15",
            NetLabel::SphericalAsymptotic2 => "16",
            NetLabel::Curvature1 => "17",
            NetLabel::Curvature2 => "18",
            NetLabel::SphericalCurvature1 => "sph17",
            NetLabel::SphericalCurvature2 => "sph18",
            NetLabel::Custom => "custom",
        }
    }

    pub fn from_tag(tag: &str) -> Option<NetLabel> {
        [
            NetLabel::Asymptotic1,
            NetLabel::Asymptotic2,
            NetLabel::SphericalAsymptotic1,
            NetLabel::SphericalAsymptotic2,
            NetLabel::Curvature1,
            NetLabel::Curvature2,
            NetLabel::SphericalCurvature1,
            NetLabel::SphericalCurvature2,
        ]
        .into_iter()
        .find(|l| l.tag() == tag)
    }

    fn spherical(self) -> NetLabel {
        match self {
            NetLabel::Asymptotic1 => NetLabel::SphericalAsymptotic1,
            NetLabel::Asymptotic2 => NetLabel::SphericalAsymptotic2,
            NetLabel::Curvature1 => NetLabel::SphericalCurvature1,
            NetLabel::Curvature2 => NetLabel::SphericalCurvature2,
            _ => NetLabel::Custom,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetForm {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub label: NetLabel,
}

impl NetForm {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self {
            a,
            b,
            c,
            label: NetLabel::Custom,
        }
    }

    pub fn norm(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs())
    }

    fn checked_norm(&self) -> Result<f64, NetError> {
        let n = self.norm();
        if n == 0.0 {
            Err(NetError::ZeroNet)
        } else {
            Ok(n + NORM_FLOOR)
        }
    }

    /// `A + C`, unnormalized.
    pub fn orthogonality_raw(&self) -> f64 {
        self.a + self.c
    }

    /// `k2 A + k1 C`, unnormalized.
    pub fn conjugacy_raw(&self, k1: f64, k2: f64) -> f64 {
        k2 * self.a + k1 * self.c
    }

    pub fn scaled(&self, t: f64) -> NetForm {
        NetForm {
            a: t * self.a,
            b: t * self.b,
            c: t * self.c,
            label: self.label,
        }
    }

    /// Whether two forms describe the same pair of directions, i.e. are
    /// proportional, to relative tolerance `tol`.
    pub fn projectively_equal(&self, other: &NetForm, tol: f64) -> bool {
        let (p, q) = ([self.a, self.b, self.c], [other.a, other.b, other.c]);
        let (np, nq) = (self.norm(), other.norm());
        if np == 0.0 || nq == 0.0 {
            return np == nq;
        }
        // all 2x2 minors vanish
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in (i + 1)..3 {
                worst = worst.max((p[i] * q[j] - p[j] * q[i]).abs());
            }
        }
        worst <= tol * np * nq
    }
}

fn require_sheet(fp: &FramePoint, sheet: Sheet, tol: &ToleranceSet) -> Result<(), GeometryError> {
    if canal_degenerate(fp, sheet, tol) {
        Err(GeometryError::CanalDegenerate { sheet: sheet.index() })
    } else {
        Ok(())
    }
}

/// Asymptotic lines of a central sheet, pulled back to the surface:
/// `grad_i k1 w1^2 - grad_i k2 w2^2 = 0` with `i` the sheet index.
pub fn net_asymptotic_pullback(fp: &FramePoint, sheet: Sheet, tol: &ToleranceSet) -> Result<NetForm, GeometryError> {
    require_sheet(fp, sheet, tol)?;
    let i = (sheet.index() - 1) as usize;
    Ok(NetForm {
        a: fp.grad_k1[i],
        b: 0.0,
        c: -fp.grad_k2[i],
        label: match sheet {
            Sheet::One => NetLabel::Asymptotic1,
            Sheet::Two => NetLabel::Asymptotic2,
        },
    })
}

/// Curvature lines of a central sheet, pulled back to the surface.
pub fn net_curvature_pullback(fp: &FramePoint, sheet: Sheet, tol: &ToleranceSet) -> Result<NetForm, GeometryError> {
    require_sheet(fp, sheet, tol)?;
    let (k, grad) = match sheet {
        Sheet::One => (fp.k1, fp.grad_k1),
        Sheet::Two => (fp.k2, fp.grad_k2),
    };
    let twice_b = k * k * (fp.k1 - fp.k2) + fp.q2 * grad[0] + fp.q1 * grad[1];
    Ok(NetForm {
        a: fp.q1 * grad[0],
        b: 0.5 * twice_b,
        c: fp.q2 * grad[1],
        label: match sheet {
            Sheet::One => NetLabel::Curvature1,
            Sheet::Two => NetLabel::Curvature2,
        },
    })
}

/// Image of a net under the Gauss map, written in the coframe
/// `(w31, w32) = (-k1 w1, -k2 w2)`.
pub fn spherical_image(net: &NetForm, fp: &FramePoint) -> NetForm {
    let (k1, k2) = (fp.k1, fp.k2);
    NetForm {
        a: net.a / (k1 * k1),
        b: net.b / (k1 * k2),
        c: net.c / (k2 * k2),
        label: net.label.spherical(),
    }
}

pub fn orthogonality_defect(net: &NetForm) -> Result<f64, NetError> {
    Ok(net.orthogonality_raw() / net.checked_norm()?)
}

/// Conjugacy defect with respect to `II = k1 w1^2 + k2 w2^2`.
pub fn conjugacy_defect(net: &NetForm, k1: f64, k2: f64) -> Result<f64, NetError> {
    Ok(net.conjugacy_raw(k1, k2) / net.checked_norm()?)
}

/// `(B^2 - AC) / max(|A|, |B|, |C|)^2`; non-negative iff the directions are
/// real.
pub fn reality_discriminant(net: &NetForm) -> f64 {
    let n = net.norm() + NORM_FLOOR;
    (net.b * net.b - net.a * net.c) / (n * n)
}

fn canonical(d: [f64; 2]) -> [f64; 2] {
    let len = d[0].hypot(d[1]);
    let mut d = [d[0] / len, d[1] / len];
    if d[0] < 0.0 || (d[0] == 0.0 && d[1] < 0.0) {
        d = [-d[0], -d[1]];
    }
    d
}

/// The two unit directions `(w1, w2)` of a real net, larger `w1` component
/// first (ties broken by `w2`).
pub fn net_directions(net: &NetForm, tol: &ToleranceSet) -> Result<[[f64; 2]; 2], NetError> {
    let n = net.norm();
    if n == 0.0 {
        return Err(NetError::ZeroNet);
    }
    let (a, b, c) = (net.a / n, net.b / n, net.c / n);
    let disc = b * b - a * c;
    if disc < -tol.imaginary {
        return Err(NetError::Imaginary);
    }
    let r = disc.max(0.0).sqrt();
    let (d1, d2) = if a == 0.0 {
        // w2 (2B w1 + C w2) = 0
        ([1.0, 0.0], [c, -2.0 * b])
    } else if a.abs() >= c.abs() {
        ([-b + r, a], [-b - r, a])
    } else {
        ([c, -b + r], [c, -b - r])
    };
    let (mut p, mut q) = (canonical(d1), canonical(d2));
    if (q[0], q[1]) > (p[0], p[1]) {
        std::mem::swap(&mut p, &mut q);
    }
    Ok([p, q])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn tol() -> ToleranceSet {
        ToleranceSet::default()
    }

    #[test]
    fn predicate_examples() {
        assert_eq!(orthogonality_defect(&NetForm::new(1.0, 5.0, -1.0)).unwrap(), 0.0);
        assert!((reality_discriminant(&NetForm::new(1.0, 0.0, -1.0)) - 1.0).abs() < 1e-15);
        assert!((reality_discriminant(&NetForm::new(1.0, 0.0, 1.0)) + 1.0).abs() < 1e-15);
        assert_eq!(orthogonality_defect(&NetForm::new(0.0, 0.0, 0.0)), Err(NetError::ZeroNet));
        assert_eq!(conjugacy_defect(&NetForm::new(0.0, 0.0, 0.0), 1.0, 2.0), Err(NetError::ZeroNet));
        // the principal net w1 w2 = 0 is always conjugate
        assert_eq!(conjugacy_defect(&NetForm::new(0.0, 1.0, 0.0), 3.0, -1.0).unwrap(), 0.0);
    }

    #[test]
    fn direction_examples() {
        let d = net_directions(&NetForm::new(1.0, 0.0, -1.0), &tol()).unwrap();
        let s = FRAC_1_SQRT_2;
        assert!((d[0][0] - s).abs() < 1e-15 && (d[0][1] - s).abs() < 1e-15);
        assert!((d[1][0] - s).abs() < 1e-15 && (d[1][1] + s).abs() < 1e-15);
        let d = net_directions(&NetForm::new(0.0, 1.0, 0.0), &tol()).unwrap();
        assert_eq!(d, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(net_directions(&NetForm::new(1.0, 0.0, 1.0), &tol()), Err(NetError::Imaginary));
        assert_eq!(net_directions(&NetForm::new(0.0, 0.0, 0.0), &tol()), Err(NetError::ZeroNet));
    }

    #[test]
    fn directions_are_roots() {
        for (a, b, c) in [(2.0, 0.3, -1.0), (0.1, -2.0, 5.0), (0.0, 1.0, 3.0), (4.0, 1.0, 0.0)] {
            let net = NetForm::new(a, b, c);
            for d in net_directions(&net, &tol()).unwrap() {
                let q = a * d[0] * d[0] + 2.0 * b * d[0] * d[1] + c * d[1] * d[1];
                assert!(q.abs() < 1e-12, "{net:?} {d:?}");
                assert!((d[0].hypot(d[1]) - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn spherical_image_scaling() {
        // k1 = -k2 = k: identity net maps to (1/k^2, 0, 1/k^2)
        let k = 0.7;
        let (a, c) = (1.0 / (k * k), 1.0 / (k * k));
        let img = NetForm::new(1.0 / (k * k), 0.0, 1.0 / (k * k));
        assert!((orthogonality_defect(&img).unwrap() * img.norm() - (a + c)).abs() < 1e-12);
    }

    #[test]
    fn projective_equality() {
        let n = NetForm::new(1.0, -2.0, 0.5);
        assert!(n.projectively_equal(&n.scaled(-3.0), 1e-14));
        assert!(!n.projectively_equal(&NetForm::new(1.0, -2.0, 0.6), 1e-6));
    }

    #[test]
    fn label_tags_roundtrip() {
        for tag in ["13", "14", "15", "16", "17", "18", "sph17", "sph18"] {
            assert_eq!(NetLabel::from_tag(tag).unwrap().tag(), tag);
        }
        assert!(NetLabel::from_tag("19").is_none());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn defects_are_scale_invariant(
                a in -10.0f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0,
                t in prop_oneof![-100.0f64..-0.01, 0.01f64..100.0],
                k1 in -3.0f64..3.0, k2 in -3.0f64..3.0,
            ) {
                let net = NetForm::new(a, b, c);
                prop_assume!(net.norm() > 1e-6);
                let scaled = net.scaled(t);
                let s = t.signum();
                prop_assert!((orthogonality_defect(&scaled).unwrap() - s * orthogonality_defect(&net).unwrap()).abs() < 1e-12);
                prop_assert!((conjugacy_defect(&scaled, k1, k2).unwrap() - s * conjugacy_defect(&net, k1, k2).unwrap()).abs() < 1e-11);
                prop_assert!((reality_discriminant(&scaled) - reality_discriminant(&net)).abs() < 1e-12);
            }
        }
    }
}
