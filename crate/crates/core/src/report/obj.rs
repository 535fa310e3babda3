//! Wavefront OBJ export of the surface, its focal sheets and net direction
//! glyphs, plus a `manifest.json` describing what was written.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{node_fraction, ReportError};
use crate::central::{central_point, Sheet};
use crate::frames::{frame_point, FramePoint};
use crate::geometry::{values, ToleranceSet};
use crate::nets::{net_asymptotic_pullback, net_curvature_pullback, net_directions, NetLabel};
use crate::sdl::SurfaceProgram;

/// Glyph length relative to the ambient cell diagonal.
pub const GLYPH_FRACTION: f64 = 0.05;

/// `%.9g`: nine significant digits, shortest of fixed and exponent form.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.8e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim(mantissa), exp)
    }
}

/// One mesh-like object: vertices, triangles and line segments, with
/// 1-based indices as written.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObjMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
    pub lines: Vec<[usize; 2]>,
}

impl ObjMesh {
    pub fn render(&self, name: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "o {name}");
        for v in &self.vertices {
            let _ = writeln!(s, "v {} {} {}", fmt_sig9(v[0]), fmt_sig9(v[1]), fmt_sig9(v[2]));
        }
        for f in &self.faces {
            let _ = writeln!(s, "f {} {} {}", f[0], f[1], f[2]);
        }
        for l in &self.lines {
            let _ = writeln!(s, "l {} {}", l[0], l[1]);
        }
        s
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Triangulates a grid of optional vertices, two triangles per cell; any
/// triangle touching a missing vertex is dropped.
pub fn grid_mesh(nu: usize, nv: usize, points: &[Option<[f64; 3]>]) -> ObjMesh {
    let mut mesh = ObjMesh::default();
    let mut index = vec![0usize; points.len()];
    for (i, p) in points.iter().enumerate() {
        if let Some(p) = p {
            mesh.vertices.push(*p);
            index[i] = mesh.vertices.len();
        }
    }
    for r in 0..nu.saturating_sub(1) {
        for c in 0..nv.saturating_sub(1) {
            let at = |dr: usize, dc: usize| index[(r + dr) * nv + c + dc];
            let (a, b, cc, d) = (at(0, 0), at(1, 0), at(1, 1), at(0, 1));
            for tri in [[a, b, cc], [a, cc, d]] {
                if tri.iter().all(|&k| k > 0) {
                    mesh.faces.push(tri);
                }
            }
        }
    }
    mesh
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: Option<String>,
    /// `"written"` or the reason the object is absent.
    pub status: String,
    pub vertices: usize,
    pub faces: usize,
    pub lines: usize,
    /// Grid points dropped, by status.
    pub dropped: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub surface: String,
    pub nu: usize,
    pub nv: usize,
    pub objects: BTreeMap<String, ManifestEntry>,
}

#[derive(Debug, Clone)]
pub struct MeshRequest {
    pub nu: usize,
    pub nv: usize,
    pub sheets: Vec<Sheet>,
    pub nets: Vec<NetLabel>,
}

/// Net labels that can be exported as direction glyphs.
pub fn exportable_net(label: NetLabel) -> bool {
    matches!(
        label,
        NetLabel::Asymptotic1 | NetLabel::Asymptotic2 | NetLabel::Curvature1 | NetLabel::Curvature2
    )
}

struct Sample {
    position: Option<[f64; 3]>,
    frame: Result<FramePoint, String>,
}

fn net_glyphs(samples: &[Sample], label: NetLabel, half: f64, tol: &ToleranceSet) -> (ObjMesh, BTreeMap<String, usize>) {
    let mut mesh = ObjMesh::default();
    let mut dropped = BTreeMap::new();
    for s in samples {
        let fp = match &s.frame {
            Ok(fp) => fp,
            Err(status) => {
                *dropped.entry(status.clone()).or_insert(0) += 1;
                continue;
            }
        };
        let net = match label {
            NetLabel::Asymptotic1 => net_asymptotic_pullback(fp, Sheet::One, tol),
            NetLabel::Asymptotic2 => net_asymptotic_pullback(fp, Sheet::Two, tol),
            NetLabel::Curvature1 => net_curvature_pullback(fp, Sheet::One, tol),
            _ => net_curvature_pullback(fp, Sheet::Two, tol),
        };
        let net = match net {
            Ok(n) => n,
            Err(e) => {
                *dropped.entry(e.status().to_string()).or_insert(0) += 1;
                continue;
            }
        };
        let dirs = match net_directions(&net, tol) {
            Ok(d) => d,
            Err(_) => {
                *dropped.entry("imaginary".to_string()).or_insert(0) += 1;
                continue;
            }
        };
        let x = values(&fp.principal.position);
        let e1 = values(&fp.principal.e1_ambient);
        let e2 = values(&fp.principal.e2_ambient);
        for d in dirs {
            let w = [0, 1, 2].map(|k| half * (d[0] * e1[k] + d[1] * e2[k]));
            mesh.vertices.push([x[0] - w[0], x[1] - w[1], x[2] - w[2]]);
            mesh.vertices.push([x[0] + w[0], x[1] + w[1], x[2] + w[2]]);
            let n = mesh.vertices.len();
            mesh.lines.push([n - 1, n]);
        }
    }
    (mesh, dropped)
}

fn entry(file: &str, mesh: &ObjMesh, dropped: BTreeMap<String, usize>, absent: &str) -> ManifestEntry {
    ManifestEntry {
        file: (!mesh.is_empty()).then(|| file.to_string()),
        status: if mesh.is_empty() { absent.to_string() } else { "written".to_string() },
        vertices: mesh.vertices.len(),
        faces: mesh.faces.len(),
        lines: mesh.lines.len(),
        dropped,
    }
}

fn absent_reason(dropped: &BTreeMap<String, usize>) -> String {
    dropped
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(k, _)| format!("absent: {k}"))
        .unwrap_or_else(|| "absent".to_string())
}

/// Builds every requested object in memory; `(name, mesh, entry)` in a
/// fixed order.
pub fn build_objects(
    prog: &SurfaceProgram,
    req: &MeshRequest,
    tol: &ToleranceSet,
) -> Result<Vec<(String, ObjMesh, ManifestEntry)>, ReportError> {
    if req.nu == 0 || req.nv == 0 {
        return Err(ReportError::EmptyGrid);
    }
    let domain = prog.domain();
    let samples: Vec<Sample> = (0..req.nu * req.nv)
        .map(|idx| {
            let (u, v) = domain.lerp(node_fraction(idx / req.nv, req.nu), node_fraction(idx % req.nv, req.nv));
            Sample {
                position: prog.eval_point(u, v).ok(),
                frame: frame_point(prog, u, v, tol).map_err(|e| e.status().to_string()),
            }
        })
        .collect();

    let mut out = Vec::new();

    let surface: Vec<Option<[f64; 3]>> = samples.iter().map(|s| s.position).collect();
    let mesh = grid_mesh(req.nu, req.nv, &surface);
    let dropped = BTreeMap::from([("domain_error".to_string(), surface.iter().filter(|p| p.is_none()).count())]);
    let dropped = dropped.into_iter().filter(|(_, n)| *n > 0).collect();
    if mesh.is_empty() {
        return Err(ReportError::NothingToExport("surface".to_string()));
    }
    let e = entry("surface.obj", &mesh, dropped, "absent");
    out.push(("surface".to_string(), mesh, e));

    for &sheet in &req.sheets {
        let mut dropped = BTreeMap::new();
        let pts: Vec<Option<[f64; 3]>> = samples
            .iter()
            .map(|s| {
                let res = s.frame.clone().and_then(|fp| central_point(&fp, sheet, tol).map_err(|e| e.status().to_string()));
                match res {
                    Ok(cp) => Some(cp.y),
                    Err(status) => {
                        *dropped.entry(status).or_insert(0) += 1;
                        None
                    }
                }
            })
            .collect();
        let mesh = grid_mesh(req.nu, req.nv, &pts);
        let name = format!("central{}", sheet.index());
        let reason = absent_reason(&dropped);
        let e = entry(&format!("{name}.obj"), &mesh, dropped, &reason);
        out.push((name, mesh, e));
    }

    if !req.nets.is_empty() {
        let du = domain.width() / req.nu.saturating_sub(1).max(1) as f64;
        let dv = domain.height() / req.nv.saturating_sub(1).max(1) as f64;
        let diag: Vec<f64> = samples
            .iter()
            .filter_map(|s| s.frame.as_ref().ok())
            .map(|fp| {
                let (xu, xv) = (values(&fp.principal.x_u), values(&fp.principal.x_v));
                let w = [0, 1, 2].map(|k| du * xu[k] + dv * xv[k]);
                (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt()
            })
            .collect();
        let diag = if diag.is_empty() { 0.0 } else { diag.iter().sum::<f64>() / diag.len() as f64 };
        for &label in &req.nets {
            let (mesh, dropped) = net_glyphs(&samples, label, 0.5 * GLYPH_FRACTION * diag, tol);
            let name = format!("net{}", label.tag());
            let reason = absent_reason(&dropped);
            let e = entry(&format!("{name}.obj"), &mesh, dropped, &reason);
            out.push((name, mesh, e));
        }
    }
    Ok(out)
}

/// Writes `<name>.obj` for every non-empty object and `manifest.json`.
pub fn export_obj(prog: &SurfaceProgram, req: &MeshRequest, dir: &Path, tol: &ToleranceSet) -> Result<Manifest, ReportError> {
    let objects = build_objects(prog, req, tol)?;
    std::fs::create_dir_all(dir)?;
    let mut manifest = Manifest {
        schema: super::SCHEMA_VERSION,
        surface: prog.name().to_string(),
        nu: req.nu,
        nv: req.nv,
        objects: BTreeMap::new(),
    };
    for (name, mesh, entry) in objects {
        if let Some(file) = &entry.file {
            std::fs::write(dir.join(file), mesh.render(&name))?;
        }
        manifest.objects.insert(name, entry);
    }
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(dir.join("manifest.json"), text)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdl::{compile, gallery};

    fn program(name: &str) -> SurfaceProgram {
        compile(&gallery(name).unwrap(), &Default::default()).unwrap()
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_sig9(0.0), "0");
        assert_eq!(fmt_sig9(1.0), "1");
        assert_eq!(fmt_sig9(-0.5), "-0.5");
        assert_eq!(fmt_sig9(std::f64::consts::PI), "3.14159265");
        assert_eq!(fmt_sig9(123456789.4), "123456789");
        assert_eq!(fmt_sig9(1.5e-7), "1.5e-7");
        assert_eq!(fmt_sig9(2.0e12), "2e12");
        assert_eq!(fmt_sig9(0.000123), "0.000123");
    }

    #[test]
    fn plane_two_by_two() {
        let req = MeshRequest {
            nu: 2,
            nv: 2,
            sheets: vec![],
            nets: vec![],
        };
        let objs = build_objects(&program("plane"), &req, &ToleranceSet::default()).unwrap();
        assert_eq!(objs.len(), 1);
        assert_eq!(objs[0].1.vertices.len(), 4);
        assert_eq!(objs[0].1.faces.len(), 2);
    }

    #[test]
    fn missing_vertices_prune_faces() {
        let p = Some([0.0; 3]);
        let mesh = grid_mesh(3, 3, &[p, p, p, p, None, p, p, p, p]);
        assert_eq!(mesh.vertices.len(), 8);
        // two cells are split along the diagonal that avoids the centre
        assert_eq!(mesh.faces.len(), 2);
        let mesh = grid_mesh(2, 3, &[p, p, p, p, p, None]);
        assert_eq!(mesh.faces.len(), 2);
    }

    #[test]
    fn torus_sheets_are_absent() {
        // a surface of revolution: both focal sheets collapse to curves
        let req = MeshRequest {
            nu: 6,
            nv: 7,
            sheets: vec![Sheet::One, Sheet::Two],
            nets: vec![],
        };
        let objs = build_objects(&program("torus"), &req, &ToleranceSet::default()).unwrap();
        let absent: Vec<_> = objs.iter().filter(|o| o.2.file.is_none()).collect();
        assert_eq!(absent.len(), 2);
        for o in absent {
            assert!(o.2.status.starts_with("absent: canal"), "{:?}", o.2);
        }
    }

    #[test]
    fn helicoid_glyphs() {
        let req = MeshRequest {
            nu: 5,
            nv: 4,
            sheets: vec![],
            nets: vec![NetLabel::Curvature1, NetLabel::Asymptotic1],
        };
        let objs = build_objects(&program("helicoid"), &req, &ToleranceSet::default()).unwrap();
        let net17 = &objs[1];
        assert_eq!(net17.0, "net17");
        assert_eq!(net17.1.lines.len(), 2 * 20);
        // net 13 is imaginary on the helicoid
        assert!(objs[2].1.is_empty());
        assert!(objs[2].2.status.contains("imaginary"));
    }
}
