//! File formats: nets and reconstruction input as versioned JSON, structure
//! dumps, curve samples and OBJ meshes.
//!
//! Positions and field values in net and reconstruction files are written
//! with 17 significant digits, so a save/load round trip is bit-exact.
//!
//! Net file:
//!
//! ```json
//! { "format": "asymnet-net", "version": 1, "nu": 1, "nv": 1,
//!   "points": [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 1.0]] }
//! ```
//!
//! `points` is row-major with rows of constant `v`: `(nu+1)(nv+1)` entries.
//! The reconstruction file (`"format": "asymnet-compat"`) holds `omega` per
//! quad, `a` and `b` per interior vertex, `mean_curv_u` per interior u-edge,
//! `mean_curv_v` per interior v-edge (all in storage order), `gamma_seed`
//! for quad `(0, 0)` and `frame`, the points `q(1,1)`, `q(2,1)`, `q(1,2)`,
//! `q(2,2)`. The frame determinant and `Ω(1,1)²` are written alongside for
//! inspection and ignored on load.

use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::affine_structure::{AffineStructure, SuiteSummary};
use crate::error::{Error, Result};
use crate::net::{AsymptoticNet, Vec3};
use crate::reconstruction::CompatData;
use crate::residual::ResidualReport;
use crate::staggered_grid::{Family, SiteField, StaggeredDomain};

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::File { path: path.display().to_string(), source })
}

fn write(path: &Path, text: String) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::File { path: path.display().to_string(), source })
}

pub const NET_FORMAT: &str = "asymnet-net";
pub const COMPAT_FORMAT: &str = "asymnet-compat";
pub const FORMAT_VERSION: u32 = 1;

/// A float written with 17 significant digits.
#[derive(Debug, Clone, Copy)]
struct Sig17(f64);

impl Serialize for Sig17 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom(format!("non-finite value {}", self.0)));
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

fn sig_vec(p: &Vec3) -> [Sig17; 3] {
    [Sig17(p.x), Sig17(p.y), Sig17(p.z)]
}

fn sig_field(f: &SiteField<f64>) -> Vec<Sig17> {
    f.values().iter().map(|&x| Sig17(x)).collect()
}

#[derive(Deserialize)]
struct Header {
    format: Option<String>,
    version: Option<serde_json::Value>,
}

fn parse_error(context: &str, e: serde_json::Error) -> Error {
    let context = if e.line() > 0 { format!("{context}:{}:{}", e.line(), e.column()) } else { context.to_string() };
    Error::Parse { context, message: e.to_string() }
}

/// Parses `text` as `T` after checking the format tag and version.
fn parse_versioned<T: DeserializeOwned>(text: &str, format: &str, context: &str) -> Result<T> {
    let header: Header = serde_json::from_str(text).map_err(|e| parse_error(context, e))?;
    let expected = format!("{format}/{FORMAT_VERSION}");
    let found = format!(
        "{}/{}",
        header.format.as_deref().unwrap_or("<missing format>"),
        header.version.as_ref().map_or("<missing version>".to_string(), |v| v.to_string())
    );
    if found != expected {
        return Err(Error::Version { expected, found });
    }
    serde_json::from_str(text).map_err(|e| parse_error(context, e))
}

#[derive(Serialize)]
struct NetOut {
    format: &'static str,
    version: u32,
    nu: usize,
    nv: usize,
    points: Vec<[Sig17; 3]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NetIn {
    #[allow(dead_code)]
    format: String,
    #[allow(dead_code)]
    version: u32,
    nu: usize,
    nv: usize,
    points: Vec<[f64; 3]>,
}

pub fn net_to_json(net: &AsymptoticNet) -> Result<String> {
    let d = net.domain();
    let out = NetOut {
        format: NET_FORMAT,
        version: FORMAT_VERSION,
        nu: d.nu(),
        nv: d.nv(),
        points: net.points().values().iter().map(sig_vec).collect(),
    };
    serde_json::to_string_pretty(&out).map_err(|e| Error::Parse { context: "net".into(), message: e.to_string() })
}

/// `context` names the source in error messages, usually the file path.
pub fn net_from_json(text: &str, context: &str) -> Result<AsymptoticNet> {
    let f: NetIn = parse_versioned(text, NET_FORMAT, context)?;
    let d = StaggeredDomain::new(f.nu, f.nv)?;
    let points = f.points.into_iter().map(Vec3::from).collect();
    AsymptoticNet::new(d, points)
}

pub fn save_net(path: impl AsRef<Path>, net: &AsymptoticNet) -> Result<()> {
    write(path.as_ref(), net_to_json(net)?)?;
    Ok(())
}

pub fn load_net(path: impl AsRef<Path>) -> Result<AsymptoticNet> {
    let path = path.as_ref();
    net_from_json(&read(path)?, &path.display().to_string())
}

#[derive(Serialize)]
struct CompatOut {
    format: &'static str,
    version: u32,
    nu: usize,
    nv: usize,
    omega: Vec<Sig17>,
    a: Vec<Sig17>,
    b: Vec<Sig17>,
    mean_curv_u: Vec<Sig17>,
    mean_curv_v: Vec<Sig17>,
    gamma_seed: Sig17,
    frame: [[Sig17; 3]; 4],
    frame_determinant: Sig17,
    omega_squared: Sig17,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CompatIn {
    #[allow(dead_code)]
    format: String,
    #[allow(dead_code)]
    version: u32,
    nu: usize,
    nv: usize,
    omega: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    mean_curv_u: Vec<f64>,
    mean_curv_v: Vec<f64>,
    gamma_seed: f64,
    frame: [[f64; 3]; 4],
    #[allow(dead_code)]
    frame_determinant: Option<f64>,
    #[allow(dead_code)]
    omega_squared: Option<f64>,
}

pub fn compat_to_json(data: &CompatData) -> Result<String> {
    let d = data.domain;
    let out = CompatOut {
        format: COMPAT_FORMAT,
        version: FORMAT_VERSION,
        nu: d.nu(),
        nv: d.nv(),
        omega: sig_field(&data.omega),
        a: sig_field(&data.a),
        b: sig_field(&data.b),
        mean_curv_u: sig_field(&data.mean_curv_u),
        mean_curv_v: sig_field(&data.mean_curv_v),
        gamma_seed: Sig17(data.gamma_seed),
        frame: data.frame.each_ref().map(sig_vec),
        frame_determinant: Sig17(data.frame_determinant()),
        omega_squared: Sig17(data.omega.get(1, 1).map_or(f64::NAN, |w| w * w)),
    };
    serde_json::to_string_pretty(&out).map_err(|e| Error::Parse { context: "compat".into(), message: e.to_string() })
}

pub fn compat_from_json(text: &str, context: &str) -> Result<CompatData> {
    let f: CompatIn = parse_versioned(text, COMPAT_FORMAT, context)?;
    let d = StaggeredDomain::new(f.nu, f.nv)?;
    let field = |family, v| SiteField::from_values(d, family, v);
    let data = CompatData {
        domain: d,
        omega: field(Family::Quad, f.omega)?,
        a: field(Family::InteriorVertex, f.a)?,
        b: field(Family::InteriorVertex, f.b)?,
        mean_curv_u: field(Family::InteriorUEdge, f.mean_curv_u)?,
        mean_curv_v: field(Family::InteriorVEdge, f.mean_curv_v)?,
        gamma_seed: f.gamma_seed,
        frame: f.frame.map(Vec3::from),
    };
    data.validate()?;
    Ok(data)
}

pub fn save_compat(path: impl AsRef<Path>, data: &CompatData) -> Result<()> {
    write(path.as_ref(), compat_to_json(data)?)?;
    Ok(())
}

pub fn load_compat(path: impl AsRef<Path>) -> Result<CompatData> {
    let path = path.as_ref();
    compat_from_json(&read(path)?, &path.display().to_string())
}

#[derive(Serialize)]
struct FieldOut<T> {
    family: Family,
    values: Vec<T>,
}

fn scalar(f: &SiteField<f64>) -> FieldOut<f64> {
    FieldOut { family: f.family(), values: f.values().to_vec() }
}

fn vector(f: &SiteField<Vec3>) -> FieldOut<[f64; 3]> {
    FieldOut { family: f.family(), values: f.values().iter().map(|v| [v.x, v.y, v.z]).collect() }
}

/// Every field of a structure plus summaries of the given reports.
pub fn structure_to_json(s: &AffineStructure, reports: &[ResidualReport]) -> Result<String> {
    let v = serde_json::json!({
        "format": "asymnet-structure",
        "version": FORMAT_VERSION,
        "nu": s.domain.nu(),
        "nv": s.domain.nv(),
        "gamma0": s.gamma0,
        "seed": s.seed,
        "omega": scalar(&s.omega),
        "gamma": scalar(&s.gamma),
        "conormal": vector(&s.nu),
        "affine_normal": vector(&s.xi),
        "a": scalar(&s.a),
        "b": scalar(&s.b),
        "p_u": scalar(&s.p_u),
        "p_v": scalar(&s.p_v),
        "h_u": scalar(&s.h_u),
        "h_v": scalar(&s.h_v),
        "mean_curv_u": scalar(&s.mean_curv_u),
        "mean_curv_v": scalar(&s.mean_curv_v),
        "suites": reports.iter().map(SuiteSummary::from).collect::<Vec<_>>(),
    });
    serde_json::to_string_pretty(&v).map_err(|e| Error::Parse { context: "structure".into(), message: e.to_string() })
}

/// Reads curve samples: either a JSON array of `[x, y, z]` or one point per
/// line with three numbers separated by spaces or commas. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_samples(text: &str, context: &str) -> Result<Vec<Vec3>> {
    if text.trim_start().starts_with('[') {
        let pts: Vec<[f64; 3]> = serde_json::from_str(text).map_err(|e| parse_error(context, e))?;
        return Ok(pts.into_iter().map(Vec3::from).collect());
    }
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse { context: format!("{context}:{}", n + 1), message };
        let nums = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().map_err(|e| err(format!("{t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if nums.len() != 3 {
            return Err(err(format!("expected 3 numbers, found {}", nums.len())));
        }
        out.push(Vec3::new(nums[0], nums[1], nums[2]));
    }
    Ok(out)
}

pub fn load_samples(path: impl AsRef<Path>) -> Result<Vec<Vec3>> {
    let path = path.as_ref();
    parse_samples(&read(path)?, &path.display().to_string())
}

/// Wavefront OBJ text: vertices row-major, one quad per lattice quad.
///
/// Faces list `(i,j), (i+1,j), (i+1,j+1), (i,j+1)`, counterclockwise seen
/// from the side `q1 × q2` points to.
pub fn obj_string(net: &AsymptoticNet) -> String {
    let d = net.domain();
    let mut s = format!("# asymnet {}x{} quads\n", d.nu(), d.nv());
    for p in net.points().values() {
        let _ = writeln!(s, "v {:.16e} {:.16e} {:.16e}", p.x, p.y, p.z);
    }
    let idx = |i: usize, j: usize| j * (d.nu() + 1) + i + 1;
    for (i, j) in d.sites(Family::Quad) {
        let _ = writeln!(s, "f {} {} {} {}", idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
    }
    s
}

pub fn export_obj(net: &AsymptoticNet, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), obj_string(net))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::paraboloid_net;

    #[test]
    fn net_round_trip_is_bitwise() {
        let net = paraboloid_net(2, 3).unwrap().map_points(|p| p * std::f64::consts::PI / 3.0).unwrap();
        let back = net_from_json(&net_to_json(&net).unwrap(), "mem").unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn wrong_version_rejected() {
        let text = net_to_json(&paraboloid_net(1, 1).unwrap()).unwrap().replace("\"version\": 1", "\"version\": 2");
        assert!(matches!(net_from_json(&text, "mem"), Err(Error::Version { .. })));
    }

    #[test]
    fn missing_field_is_named() {
        let text = r#"{"format": "asymnet-net", "version": 1, "nu": 1, "nv": 1}"#;
        match net_from_json(text, "mem") {
            Err(Error::Parse { message, .. }) => assert!(message.contains("points"), "{message}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn samples_in_both_layouts() {
        let a = parse_samples("# f\n1 2 3\n4,5,6\n", "f").unwrap();
        let b = parse_samples("[[1,2,3],[4,5,6]]", "f").unwrap();
        assert_eq!(a, b);
        assert!(matches!(parse_samples("1 2\n", "f"), Err(Error::Parse { context, .. }) if context == "f:1"));
    }

    #[test]
    fn single_quad_obj() {
        let obj = obj_string(&paraboloid_net(1, 1).unwrap());
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 4);
        assert!(obj.contains("\nf 1 2 4 3\n"));
    }
}
