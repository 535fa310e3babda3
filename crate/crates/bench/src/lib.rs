//! Shared fixtures for the benchmarks.

use focalnet::{compile, gallery, SurfaceProgram};

/// A compiled gallery surface with its default parameters.
pub fn program(name: &str) -> SurfaceProgram {
    compile(&gallery(name).expect("gallery surface"), &Default::default()).expect("gallery surface compiles")
}

/// Interior sample points on `[-0.8, 0.8]^2`, laid out on a small lattice.
pub fn lattice(n: usize) -> Vec<(f64, f64)> {
    let at = |i: usize| -0.8 + 1.6 * (i as f64 + 0.5) / n as f64;
    (0..n).flat_map(|i| (0..n).map(move |j| (at(i), at(j)))).collect()
}
