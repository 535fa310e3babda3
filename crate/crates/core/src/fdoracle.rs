//! Finite-difference oracle. Nothing here touches [`Jet4`] arithmetic on
//! the surface: derivatives come from central differences of plain point
//! evaluations, and the principal frame is rebuilt from those in `f64`.
//!
//! Stencils are the second-order central formulas on five points per
//! axis; mixed partials are tensor products, so one 5x5 grid of
//! evaluations yields every partial up to order 4. [`richardson`] combines
//! steps `h` and `2h` to cancel the `h^2` term.

use thiserror::Error;

use crate::central::Sheet;
use crate::geometry::{GeometryError, SurfaceJet, ToleranceSet};
use crate::jet::{Jet4, JetError, MULTI_INDEX, N_COEFFS};
use crate::sdl::SurfaceProgram;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FdError {
    #[error("stencil around ({u}, {v}) leaves the domain")]
    OutsideDomain { u: f64, v: f64 },
    #[error("principal direction sign cannot be continued (near umbilic)")]
    SignContinuation,
    #[error("degenerate frame: {0}")]
    Geometry(GeometryError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

type Vec3 = [f64; 3];

/// Second-order central weights for the `n`-th derivative at offsets
/// `-2..=2`, before dividing by `h^n`.
const WEIGHTS: [[f64; 5]; 5] = [
    [0.0, 0.0, 1.0, 0.0, 0.0],
    [0.0, -0.5, 0.0, 0.5, 0.0],
    [0.0, 1.0, -2.0, 1.0, 0.0],
    [-0.5, 1.0, 0.0, -1.0, 0.5],
    [1.0, -4.0, 6.0, -4.0, 1.0],
];

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn lin(a: f64, x: Vec3, b: f64, y: Vec3) -> Vec3 {
    [a * x[0] + b * y[0], a * x[1] + b * y[1], a * x[2] + b * y[2]]
}

fn check_stencil(prog: &SurfaceProgram, u: f64, v: f64, reach: f64) -> Result<(), FdError> {
    let d = prog.domain();
    if u - reach < d.u.0 || u + reach > d.u.1 || v - reach < d.v.0 || v + reach > d.v.1 {
        Err(FdError::OutsideDomain { u, v })
    } else {
        Ok(())
    }
}

/// All partials `d^(i+j) f / du^i dv^j`, `i + j <= 4`, of a vector sampler,
/// ordered like [`MULTI_INDEX`].
pub fn fd_partials<const D: usize>(
    f: &impl Fn(f64, f64) -> Result<[f64; D], FdError>,
    u: f64,
    v: f64,
    h: f64,
) -> Result<[[f64; D]; N_COEFFS], FdError> {
    let mut grid = [[[0.0; D]; 5]; 5];
    for (a, row) in grid.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            *cell = f(u + (a as f64 - 2.0) * h, v + (b as f64 - 2.0) * h)?;
        }
    }
    let mut out = [[0.0; D]; N_COEFFS];
    for (slot, &(i, j)) in MULTI_INDEX.iter().enumerate() {
        let scale = h.powi((i + j) as i32);
        for (a, row) in grid.iter().enumerate() {
            for (b, cell) in row.iter().enumerate() {
                let w = WEIGHTS[i][a] * WEIGHTS[j][b];
                if w != 0.0 {
                    for d in 0..D {
                        out[slot][d] += w * cell[d];
                    }
                }
            }
        }
        for d in 0..D {
            out[slot][d] /= scale;
        }
    }
    Ok(out)
}

/// `(4 D(h) - D(2h)) / 3`.
pub fn richardson(fine: f64, coarse: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

fn richardson_partials<const D: usize>(
    f: &impl Fn(f64, f64) -> Result<[f64; D], FdError>,
    u: f64,
    v: f64,
    h: f64,
) -> Result<[[f64; D]; N_COEFFS], FdError> {
    let fine = fd_partials(f, u, v, h)?;
    let coarse = fd_partials(f, u, v, 2.0 * h)?;
    let mut out = fine;
    for s in 0..N_COEFFS {
        for d in 0..D {
            out[s][d] = richardson(fine[s][d], coarse[s][d]);
        }
    }
    Ok(out)
}

fn point_sampler(prog: &SurfaceProgram) -> impl Fn(f64, f64) -> Result<Vec3, FdError> + '_ {
    move |u, v| Ok(prog.eval_point(u, v)?)
}

fn to_surface_jet(d: [Vec3; N_COEFFS], u: f64, v: f64) -> SurfaceJet {
    let coord = |c: usize| {
        let mut derivs = [0.0; N_COEFFS];
        for s in 0..N_COEFFS {
            derivs[s] = d[s][c];
        }
        Jet4::from_derivatives(derivs, 4)
    };
    SurfaceJet {
        x: [coord(0), coord(1), coord(2)],
        point: (u, v),
    }
}

/// Surface jet from the plain 5x5 stencil with spacing `h`.
pub fn fd_surface_jet(prog: &SurfaceProgram, u: f64, v: f64, h: f64) -> Result<SurfaceJet, FdError> {
    check_stencil(prog, u, v, 2.0 * h)?;
    Ok(to_surface_jet(fd_partials(&point_sampler(prog), u, v, h)?, u, v))
}

/// Richardson-extrapolated surface jet (steps `h` and `2h`).
pub fn fd_surface_jet_richardson(prog: &SurfaceProgram, u: f64, v: f64, h: f64) -> Result<SurfaceJet, FdError> {
    check_stencil(prog, u, v, 4.0 * h)?;
    Ok(to_surface_jet(richardson_partials(&point_sampler(prog), u, v, h)?, u, v))
}

/// Default step: `1e-3` of the larger domain side.
pub fn default_step(prog: &SurfaceProgram) -> f64 {
    let d = prog.domain();
    1e-3 * d.width().max(d.height())
}

/// Principal frame rebuilt in `f64` from finite-difference derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdFrame {
    pub position: Vec3,
    pub k1: f64,
    pub k2: f64,
    /// Parameter-space components of the unit principal directions.
    pub e1: [f64; 2],
    pub e2: [f64; 2],
    pub e1_ambient: Vec3,
    pub e2_ambient: Vec3,
    pub e3: Vec3,
}

impl FdFrame {
    pub fn shape_eigenvalues(&self) -> (f64, f64) {
        (self.k1, self.k2)
    }

    /// Negate `e1` (and with it `e2`) when it points against `reference`.
    fn align(mut self, reference: Vec3) -> Result<Self, FdError> {
        let c = dot(self.e1_ambient, reference);
        if c.abs() < 0.5 {
            return Err(FdError::SignContinuation);
        }
        if c < 0.0 {
            self.e1 = [-self.e1[0], -self.e1[1]];
            self.e2 = [-self.e2[0], -self.e2[1]];
            self.e1_ambient = self.e1_ambient.map(|x| -x);
            self.e2_ambient = self.e2_ambient.map(|x| -x);
        }
        Ok(self)
    }
}

/// Generalized eigen-decomposition of `II` against `I` from first and
/// second derivatives.
pub fn frame_from_derivatives(
    position: Vec3,
    xu: Vec3,
    xv: Vec3,
    xuu: Vec3,
    xuv: Vec3,
    xvv: Vec3,
    tol: &ToleranceSet,
) -> Result<FdFrame, FdError> {
    let (e, f, g) = (dot(xu, xu), dot(xu, xv), dot(xv, xv));
    let det_i = e * g - f * f;
    if det_i <= tol.metric {
        return Err(FdError::Geometry(GeometryError::DegenerateParametrization));
    }
    let nraw = cross(xu, xv);
    let nlen = dot(nraw, nraw).sqrt();
    let n = nraw.map(|x| x / nlen);
    let (l, m, nn) = (dot(xuu, n), dot(xuv, n), dot(xvv, n));

    // det(II - k I) = 0
    let a = det_i;
    let b = -(e * nn - 2.0 * f * m + g * l);
    let c = l * nn - m * m;
    let half = -0.5 * b / a;
    let disc = (half * half - c / a).max(0.0);
    let (k1, k2) = (half + disc.sqrt(), half - disc.sqrt());
    if (k1 - k2).powi(2) < tol.umbilic * (k1.abs() + k2.abs() + tol.curvature_floor).powi(2) {
        return Err(FdError::Geometry(GeometryError::UmbilicPoint));
    }

    // (II - k1 I) d = 0; take the better conditioned row
    let r1 = [l - k1 * e, m - k1 * f];
    let r2 = [m - k1 * f, nn - k1 * g];
    let r = if r1[0].hypot(r1[1]) >= r2[0].hypot(r2[1]) { r1 } else { r2 };
    let mut d = [-r[1], r[0]];
    let len = (e * d[0] * d[0] + 2.0 * f * d[0] * d[1] + g * d[1] * d[1]).sqrt();
    d = [d[0] / len, d[1] / len];
    let first = if d[0].abs() > tol.sign { d[0] } else { d[1] };
    if first < 0.0 {
        d = [-d[0], -d[1]];
    }
    let e1a = lin(d[0], xu, d[1], xv);
    let e2a = cross(n, e1a);
    // coordinates of e2 through the inverse metric
    let (pu, pv) = (dot(e2a, xu), dot(e2a, xv));
    let e2 = [(g * pu - f * pv) / det_i, (e * pv - f * pu) / det_i];
    Ok(FdFrame {
        position,
        k1,
        k2,
        e1: d,
        e2,
        e1_ambient: e1a,
        e2_ambient: e2a,
        e3: n,
    })
}

/// Finite-difference frame at a point using Richardson-extrapolated first
/// and second derivatives with step `h`.
pub fn fd_frame(prog: &SurfaceProgram, u: f64, v: f64, h: f64, tol: &ToleranceSet) -> Result<FdFrame, FdError> {
    check_stencil(prog, u, v, 4.0 * h)?;
    let sample = point_sampler(prog);
    let first = |step: f64| -> Result<[Vec3; 5], FdError> {
        let p = |du: f64, dv: f64| sample(u + du * step, v + dv * step);
        let (pp, pm, mp, mm) = (p(1.0, 1.0)?, p(1.0, -1.0)?, p(-1.0, 1.0)?, p(-1.0, -1.0)?);
        let (up, um, vp, vm, c) = (p(1.0, 0.0)?, p(-1.0, 0.0)?, p(0.0, 1.0)?, p(0.0, -1.0)?, p(0.0, 0.0)?);
        let h2 = step * step;
        Ok([
            lin(0.5 / step, up, -0.5 / step, um),
            lin(0.5 / step, vp, -0.5 / step, vm),
            [0, 1, 2].map(|k| (up[k] - 2.0 * c[k] + um[k]) / h2),
            [0, 1, 2].map(|k| (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h2)),
            [0, 1, 2].map(|k| (vp[k] - 2.0 * c[k] + vm[k]) / h2),
        ])
    };
    let fine = first(h)?;
    let coarse = first(2.0 * h)?;
    let d: Vec<Vec3> = (0..5)
        .map(|s| [0, 1, 2].map(|k| richardson(fine[s][k], coarse[s][k])))
        .collect();
    frame_from_derivatives(sample(u, v)?, d[0], d[1], d[2], d[3], d[4], tol)
}

/// Frame step used by the Pfaffian oracles.
pub const FRAME_STEP: f64 = 5e-3;

/// Oracle settings: step for the frame and step for the outer directional
/// difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdSteps {
    pub frame: f64,
    pub direction: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        Self {
            frame: FRAME_STEP,
            direction: 1e-3,
        }
    }
}

/// Richardson-extrapolated derivative of `f` at `(u, v)` along the
/// parameter-space vector `d`.
pub fn directional_difference(
    f: &impl Fn(f64, f64) -> Result<f64, FdError>,
    u: f64,
    v: f64,
    d: [f64; 2],
    t: f64,
) -> Result<f64, FdError> {
    let central = |s: f64| -> Result<f64, FdError> {
        let fp = f(u + s * d[0], v + s * d[1])?;
        let fm = f(u - s * d[0], v - s * d[1])?;
        Ok((fp - fm) / (2.0 * s))
    };
    Ok(richardson(central(t)?, central(2.0 * t)?))
}

/// `(grad_1 f, grad_2 f)` by differencing `f` along the oracle's own
/// principal directions.
pub fn fd_pfaffian(
    prog: &SurfaceProgram,
    u: f64,
    v: f64,
    f: &impl Fn(f64, f64) -> Result<f64, FdError>,
    steps: FdSteps,
    tol: &ToleranceSet,
) -> Result<[f64; 2], FdError> {
    let fr = fd_frame(prog, u, v, steps.frame, tol)?;
    Ok([
        directional_difference(f, u, v, fr.e1, steps.direction)?,
        directional_difference(f, u, v, fr.e2, steps.direction)?,
    ])
}

/// `(grad_1 f, grad_2 f)` with the frame sign continued from `reference`
/// (an ambient `e1`).
fn fd_pfaffian_aligned(
    prog: &SurfaceProgram,
    u: f64,
    v: f64,
    f: &impl Fn(f64, f64) -> Result<f64, FdError>,
    steps: FdSteps,
    reference: Vec3,
    tol: &ToleranceSet,
) -> Result<[f64; 2], FdError> {
    let fr = fd_frame(prog, u, v, steps.frame, tol)?.align(reference)?;
    Ok([
        directional_difference(f, u, v, fr.e1, steps.direction)?,
        directional_difference(f, u, v, fr.e2, steps.direction)?,
    ])
}

/// `d[i][j] = grad_(i+1) grad_(j+1) f`, differencing the first Pfaffians
/// with sign continuation of the frame along the stencil.
pub fn fd_second_pfaffian(
    prog: &SurfaceProgram,
    u: f64,
    v: f64,
    f: &impl Fn(f64, f64) -> Result<f64, FdError>,
    steps: FdSteps,
    tol: &ToleranceSet,
) -> Result<[[f64; 2]; 2], FdError> {
    let fr = fd_frame(prog, u, v, steps.frame, tol)?;
    let inner = FdSteps {
        frame: steps.frame,
        direction: 0.5 * steps.direction,
    };
    let mut out = [[0.0; 2]; 2];
    for j in 0..2 {
        let g = |s: f64, t: f64| -> Result<f64, FdError> {
            Ok(fd_pfaffian_aligned(prog, s, t, f, inner, fr.e1_ambient, tol)?[j])
        };
        out[0][j] = directional_difference(&g, u, v, fr.e1, steps.direction)?;
        out[1][j] = directional_difference(&g, u, v, fr.e2, steps.direction)?;
    }
    Ok(out)
}

/// `q1 = <D_e1 e1, e2>`, `q2 = <D_e2 e1, e2>` by differencing the oracle
/// frame field.
pub fn fd_geodesic_curvatures(
    prog: &SurfaceProgram,
    u: f64,
    v: f64,
    steps: FdSteps,
    tol: &ToleranceSet,
) -> Result<[f64; 2], FdError> {
    let fr = fd_frame(prog, u, v, steps.frame, tol)?;
    let mut q = [0.0; 2];
    for (i, dir) in [fr.e1, fr.e2].into_iter().enumerate() {
        let mut acc = 0.0;
        for c in 0..3 {
            let comp = |s: f64, t: f64| -> Result<f64, FdError> {
                Ok(fd_frame(prog, s, t, steps.frame, tol)?.align(fr.e1_ambient)?.e1_ambient[c])
            };
            acc += directional_difference(&comp, u, v, dir, steps.direction)? * fr.e2_ambient[c];
        }
        q[i] = acc;
    }
    Ok(q)
}

/// Principal curvature `k_i` from the oracle frame, as a sampler.
pub fn curvature_sampler<'a>(
    prog: &'a SurfaceProgram,
    sheet: Sheet,
    frame_step: f64,
    tol: &'a ToleranceSet,
) -> impl Fn(f64, f64) -> Result<f64, FdError> + 'a {
    move |u, v| {
        let fr = fd_frame(prog, u, v, frame_step, tol)?;
        Ok(match sheet {
            Sheet::One => fr.k1,
            Sheet::Two => fr.k2,
        })
    }
}

fn focal_position(fr: &FdFrame, sheet: Sheet) -> Vec3 {
    let k = match sheet {
        Sheet::One => fr.k1,
        Sheet::Two => fr.k2,
    };
    lin(1.0, fr.position, 1.0 / k, fr.e3)
}

/// Derivatives of `f` along a focal sheet `y(u, v)` in the directions of
/// the ambient unit vectors `targets`: the parameter direction `T_j` with
/// `dy(T_j) = targets[j]` is found by least squares on the differenced
/// Jacobian of `y`, and `f` is differenced along it.
pub fn fd_sheet_pfaffian(
    focal: &impl Fn(f64, f64) -> Result<Vec3, FdError>,
    targets: [Vec3; 2],
    f: &impl Fn(f64, f64) -> Result<f64, FdError>,
    u: f64,
    v: f64,
    h: f64,
) -> Result<[f64; 2], FdError> {
    let mut jac = [[0.0; 2]; 3];
    for c in 0..3 {
        let comp = |s: f64, t: f64| -> Result<f64, FdError> { Ok(focal(s, t)?[c]) };
        jac[c][0] = directional_difference(&comp, u, v, [1.0, 0.0], h)?;
        jac[c][1] = directional_difference(&comp, u, v, [0.0, 1.0], h)?;
    }
    // normal equations of jac * t = target
    let col = |k: usize| [jac[0][k], jac[1][k], jac[2][k]];
    let (a, b, c) = (dot(col(0), col(0)), dot(col(0), col(1)), dot(col(1), col(1)));
    let det = a * c - b * b;
    let mut out = [0.0; 2];
    for (j, target) in targets.into_iter().enumerate() {
        let (r0, r1) = (dot(col(0), target), dot(col(1), target));
        let t = [(c * r0 - b * r1) / det, (a * r1 - b * r0) / det];
        out[j] = directional_difference(f, u, v, t, h)?;
    }
    Ok(out)
}

/// Frame vectors of a focal sheet: `e2, e3` on sheet 1, `e3, e1` on sheet 2.
pub fn sheet_targets(e1: Vec3, e2: Vec3, e3: Vec3, sheet: Sheet) -> [Vec3; 2] {
    match sheet {
        Sheet::One => [e2, e3],
        Sheet::Two => [e3, e1],
    }
}

/// Focal-sheet Pfaffians with everything differenced: the sheet is built
/// from finite-difference frames at every stencil point.
pub fn fd_central_pfaffian(
    prog: &SurfaceProgram,
    u: f64,
    v: f64,
    sheet: Sheet,
    f: &impl Fn(f64, f64) -> Result<f64, FdError>,
    steps: FdSteps,
    tol: &ToleranceSet,
) -> Result<[f64; 2], FdError> {
    let fr = fd_frame(prog, u, v, steps.frame, tol)?;
    let focal = |s: f64, t: f64| -> Result<Vec3, FdError> { Ok(focal_position(&fd_frame(prog, s, t, steps.frame, tol)?, sheet)) };
    let targets = sheet_targets(fr.e1_ambient, fr.e2_ambient, fr.e3, sheet);
    fd_sheet_pfaffian(&focal, targets, f, u, v, steps.direction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdl::{compile, gallery};

    fn program(name: &str) -> SurfaceProgram {
        compile(&gallery(name).unwrap(), &Default::default()).unwrap()
    }

    #[test]
    fn polynomial_surface_is_exact() {
        // the extrapolated first and second differences are the fourth-order
        // five-point formulas
        let prog = program("monkey_saddle");
        let fd = fd_surface_jet_richardson(&prog, 0.2, 0.1, 0.05).unwrap();
        let exact = prog.eval_jets(0.2, 0.1).unwrap();
        for c in 0..3 {
            let (a, b) = (fd.x[c].derivatives(), exact[c].derivatives());
            for s in 0..N_COEFFS {
                assert!((a[s] - b[s]).abs() < 1e-8, "{c} {s}: {} vs {}", a[s], b[s]);
            }
        }
    }

    #[test]
    fn quadratic_surface_is_exact_without_extrapolation() {
        let prog = program("graph_quad");
        let fd = fd_surface_jet(&prog, 0.3, -0.2, 0.05).unwrap();
        let exact = prog.eval_jets(0.3, -0.2).unwrap();
        for c in 0..3 {
            let (a, b) = (fd.x[c].derivatives(), exact[c].derivatives());
            for s in 0..N_COEFFS {
                assert!((a[s] - b[s]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn out_of_domain_stencil() {
        let prog = program("plane");
        assert!(matches!(fd_surface_jet(&prog, 0.999, 0.0, 1e-3), Err(FdError::OutsideDomain { .. })));
    }

    #[test]
    fn constant_field_has_zero_pfaffian() {
        let prog = program("graph_generic");
        let tol = ToleranceSet::default();
        let g = fd_pfaffian(&prog, 0.4, -0.7, &|_, _| Ok(2.5), FdSteps::default(), &tol).unwrap();
        assert_eq!(g, [0.0, 0.0]);
    }

    #[test]
    fn frame_matches_quadratic_graph() {
        let prog = program("graph_quad");
        let fr = fd_frame(&prog, 0.0, 0.0, 1e-2, &ToleranceSet::default()).unwrap();
        assert!((fr.k1 - 2.0).abs() < 1e-9 && (fr.k2 - 1.0).abs() < 1e-9);
        assert!((fr.e1[0] - 1.0).abs() < 1e-9 && fr.e1[1].abs() < 1e-9);
        assert!((fr.e3[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_frame_is_umbilic() {
        let prog = program("sphere");
        assert_eq!(
            fd_frame(&prog, 0.1, 0.2, 1e-2, &ToleranceSet::default()).unwrap_err(),
            FdError::Geometry(GeometryError::UmbilicPoint)
        );
    }
}
