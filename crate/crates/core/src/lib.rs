//! Curvature-line frames, central (focal) surfaces and Weingarten-surface net
//! diagnostics for analytic parametric surfaces.
//!
//! Surfaces are written in a small definition language ([`sdl`]), compiled to
//! programs that evaluate exact order-4 Taylor jets ([`jet`]), and analysed
//! pointwise: principal frame ([`geometry`]), connection coefficients and
//! structure equations ([`frames`]), focal sheets ([`central`]), the derived
//! nets ([`nets`]) and the curvature-class defects ([`classify`]).
//! [`fdoracle`] is an independent finite-difference cross-check and
//! [`report`] produces grid reports, mesh exports and the check suites.

pub mod central;
pub mod classify;
pub mod fdoracle;
pub mod frames;
pub mod geometry;
pub mod jet;
pub mod nets;
pub mod report;
pub mod sdl;

pub use central::{central_point, CentralPoint, Sheet};
pub use classify::{classify_point, proposition_report, DefectReport, Flags};
pub use frames::{frame_point, FramePoint};
pub use geometry::{GeometryError, Orientation, PrincipalData, SurfaceJet, ToleranceSet};
pub use jet::{Jet4, JetError};
pub use nets::{NetForm, NetLabel};
pub use sdl::{compile, gallery, parse_surface, SurfaceDef, SurfaceProgram};
