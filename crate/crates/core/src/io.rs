//! Point-cloud and field file formats.
//!
//! Readers accept whitespace-delimited XYZ (`x y z`) and XYZN
//! (`x y z nx ny nz`) text with `#` comment lines, and ASCII PLY whose
//! vertex element carries `x, y, z` and optionally `nx, ny, nz`. Writers use
//! the shortest decimal form that parses back to the same `f64`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{GplsError, Result};
use crate::geom::Point3;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point3>,
    /// One normal per point when present. Missing normals are NaN.
    pub normals: Option<Vec<Point3>>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn has_normals(&self) -> bool {
        self.normals.is_some()
    }

    /// Points at the given indices, keeping normals aligned.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            normals: self
                .normals
                .as_ref()
                .map(|n| indices.iter().map(|&i| n[i]).collect()),
        }
    }
}

fn format_err(line: usize, msg: impl std::fmt::Display) -> GplsError {
    GplsError::Format(format!("line {line}: {msg}"))
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse()
        .map_err(|_| format_err(line, format!("invalid number '{tok}'")))
}

/// Parses XYZ or XYZN text. Every data line must have the same number of
/// columns, either 3 or 6.
pub fn parse_xyz(text: &str) -> Result<PointCloud> {
    let mut cloud = PointCloud::default();
    let mut columns = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| parse_f64(t, i + 1))
            .collect::<Result<_>>()?;
        if vals.len() != 3 && vals.len() != 6 {
            return Err(format_err(
                i + 1,
                format!("expected 3 or 6 columns, got {}", vals.len()),
            ));
        }
        match columns {
            None => {
                columns = Some(vals.len());
                if vals.len() == 6 {
                    cloud.normals = Some(Vec::new());
                }
            }
            Some(c) if c != vals.len() => {
                return Err(format_err(
                    i + 1,
                    format!("expected {c} columns, got {}", vals.len()),
                ));
            }
            _ => {}
        }
        if vals[..3].iter().any(|v| !v.is_finite()) {
            return Err(format_err(i + 1, "non-finite coordinate"));
        }
        cloud.points.push([vals[0], vals[1], vals[2]]);
        if let Some(n) = cloud.normals.as_mut() {
            n.push([vals[3], vals[4], vals[5]]);
        }
    }
    Ok(cloud)
}

/// Parses an ASCII PLY file, reading only the vertex element.
pub fn parse_ply(text: &str) -> Result<PointCloud> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => return Err(GplsError::Format("missing 'ply' magic line".into())),
    }
    let mut elements: Vec<(String, usize, Vec<String>)> = Vec::new();
    let mut ascii = false;
    for (i, raw) in lines.by_ref() {
        let toks: Vec<&str> = raw.split_whitespace().collect();
        match toks.as_slice() {
            ["format", "ascii", ..] => ascii = true,
            ["format", other, ..] => {
                return Err(format_err(
                    i + 1,
                    format!("unsupported PLY format '{other}'"),
                ))
            }
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| format_err(i + 1, "invalid element count"))?;
                elements.push((name.to_string(), count, Vec::new()));
            }
            ["property", "list", ..] => {
                let e = elements
                    .last_mut()
                    .ok_or_else(|| format_err(i + 1, "property before element"))?;
                e.2.push("<list>".into());
            }
            ["property", _ty, name] => {
                let e = elements
                    .last_mut()
                    .ok_or_else(|| format_err(i + 1, "property before element"))?;
                e.2.push(name.to_string());
            }
            ["end_header"] => break,
            _ => {
                return Err(format_err(
                    i + 1,
                    format!("unrecognised header line '{raw}'"),
                ))
            }
        }
    }
    if !ascii {
        return Err(GplsError::Format(
            "PLY header has no ascii format line".into(),
        ));
    }
    let mut cloud = PointCloud::default();
    for (name, count, props) in &elements {
        if name != "vertex" {
            // Elements after the vertices are not needed.
            if cloud.points.is_empty() {
                for _ in 0..*count {
                    lines.next();
                }
                continue;
            }
            break;
        }
        let find = |p: &str| props.iter().position(|q| q == p);
        let xyz = [find("x"), find("y"), find("z")];
        let [Some(ix), Some(iy), Some(iz)] = xyz else {
            return Err(GplsError::Format("vertex element lacks x, y, z".into()));
        };
        let nidx = match (find("nx"), find("ny"), find("nz")) {
            (Some(a), Some(b), Some(c)) => Some([a, b, c]),
            _ => None,
        };
        if nidx.is_some() {
            cloud.normals = Some(Vec::with_capacity(*count));
        }
        for _ in 0..*count {
            let (i, raw) = lines
                .next()
                .ok_or_else(|| GplsError::Format("unexpected end of vertex data".into()))?;
            let vals: Vec<f64> = raw
                .split_whitespace()
                .map(|t| parse_f64(t, i + 1))
                .collect::<Result<_>>()?;
            if vals.len() < props.len() {
                return Err(format_err(i + 1, "too few vertex properties"));
            }
            let p = [vals[ix], vals[iy], vals[iz]];
            if p.iter().any(|v| !v.is_finite()) {
                return Err(format_err(i + 1, "non-finite coordinate"));
            }
            cloud.points.push(p);
            if let (Some(n), Some([a, b, c])) = (cloud.normals.as_mut(), nidx) {
                n.push([vals[a], vals[b], vals[c]]);
            }
        }
    }
    Ok(cloud)
}

/// Reads XYZ, XYZN or PLY, chosen by the `.ply` extension or the magic line.
pub fn read_points(path: &Path) -> Result<PointCloud> {
    let text = std::fs::read_to_string(path)?;
    let is_ply = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("ply"))
        || text.trim_start().starts_with("ply");
    if is_ply {
        parse_ply(&text)
    } else {
        parse_xyz(&text)
    }
}

/// XYZ text, or XYZN when the cloud has normals.
pub fn format_xyz(cloud: &PointCloud) -> String {
    let mut out = String::new();
    for (i, p) in cloud.points.iter().enumerate() {
        let _ = write!(out, "{} {} {}", p[0], p[1], p[2]);
        if let Some(n) = &cloud.normals {
            let n = n[i];
            let _ = write!(out, " {} {} {}", n[0], n[1], n[2]);
        }
        out.push('\n');
    }
    out
}

pub fn format_ply(cloud: &PointCloud) -> String {
    let mut out = format!(
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\n",
        cloud.len()
    );
    if cloud.has_normals() {
        out.push_str("property double nx\nproperty double ny\nproperty double nz\n");
    }
    out.push_str("end_header\n");
    out.push_str(&format_xyz(cloud));
    out
}

/// Legacy VTK `STRUCTURED_POINTS` over `[-1, 1]³` with `res` samples per
/// axis; `values` runs with x fastest.
pub fn format_vtk_structured_points(res: usize, values: &[f64], name: &str) -> Result<String> {
    if res < 2 {
        return Err(GplsError::domain("grid resolution must be at least 2"));
    }
    if values.len() != res * res * res {
        return Err(GplsError::DimensionMismatch {
            expected: res * res * res,
            actual: values.len(),
        });
    }
    let spacing = 2.0 / (res - 1) as f64;
    let mut out = format!(
        "# vtk DataFile Version 3.0\n{name}\nASCII\nDATASET STRUCTURED_POINTS\nDIMENSIONS {res} {res} {res}\nORIGIN -1 -1 -1\nSPACING {spacing} {spacing} {spacing}\nPOINT_DATA {}\nSCALARS {name} double 1\nLOOKUP_TABLE default\n",
        values.len()
    );
    for v in values {
        let _ = writeln!(out, "{v}");
    }
    Ok(out)
}

/// Node `(i, j, k)` of the grid used by [`format_vtk_structured_points`].
pub fn grid_point(res: usize, i: usize, j: usize, k: usize) -> Point3 {
    let h = 2.0 / (res - 1) as f64;
    let c = |t: usize| {
        if t + 1 == res {
            1.0
        } else {
            -1.0 + h * t as f64
        }
    };
    [c(i), c(j), c(k)]
}
