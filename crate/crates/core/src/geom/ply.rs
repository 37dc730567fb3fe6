//! ASCII PLY read/write for point clouds.
//!
//! Vertices carry `x y z`, optionally `nx ny nz` and a `visibility` count.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};
use crate::geom::PointCloud;

pub fn write_ply(cloud: &PointCloud, path: &Path) -> Result<()> {
    let display = path.display().to_string();
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    out.push_str(&format!("element vertex {}\n", cloud.len()));
    out.push_str("property double x\nproperty double y\nproperty double z\n");
    if cloud.normals.is_some() {
        out.push_str("property double nx\nproperty double ny\nproperty double nz\n");
    }
    if cloud.visibility.is_some() {
        out.push_str("property uint visibility\n");
    }
    out.push_str("end_header\n");
    for i in 0..cloud.len() {
        let p = cloud.points[i];
        out.push_str(&format!("{} {} {}", p.x, p.y, p.z));
        if let Some(normals) = &cloud.normals {
            let n = normals[i];
            out.push_str(&format!(" {} {} {}", n.x, n.y, n.z));
        }
        if let Some(vis) = &cloud.visibility {
            out.push_str(&format!(" {}", vis[i]));
        }
        out.push('\n');
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(display.clone(), e))?;
    f.write_all(out.as_bytes())
        .map_err(|e| Error::io(display, e))
}

pub fn read_ply(path: &Path) -> Result<PointCloud> {
    let display = path.display().to_string();
    let f = std::fs::File::open(path).map_err(|e| Error::io(display.clone(), e))?;
    let reader = BufReader::new(f);
    let mut lines = reader.lines();

    let mut next_line = || -> Result<String> {
        lines
            .next()
            .transpose()
            .map_err(|e| Error::io(display.clone(), e))?
            .ok_or_else(|| Error::format(display.clone(), "unexpected end of file"))
    };

    if next_line()?.trim() != "ply" {
        return Err(Error::format(display, "missing ply magic"));
    }
    let mut vertex_count: Option<usize> = None;
    let mut props: Vec<String> = Vec::new();
    loop {
        let line = next_line()?;
        let line = line.trim();
        if line == "end_header" {
            break;
        }
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("format") => {
                if tok.next() != Some("ascii") {
                    return Err(Error::format(display, "only ascii format supported"));
                }
            }
            Some("element") => {
                if tok.next() == Some("vertex") {
                    let n = tok
                        .next()
                        .and_then(|s| s.parse::<usize>().ok())
                        .ok_or_else(|| Error::format(display.clone(), "bad vertex count"))?;
                    vertex_count = Some(n);
                }
            }
            Some("property") => {
                let _ty = tok.next();
                if let Some(name) = tok.next() {
                    props.push(name.to_string());
                }
            }
            Some("comment") | None => {}
            Some(other) => {
                return Err(Error::format(display, format!("unknown header line: {other}")));
            }
        }
    }
    let n = vertex_count.ok_or_else(|| Error::format(display.clone(), "no vertex element"))?;
    let col = |name: &str| props.iter().position(|p| p == name);
    let (ix, iy, iz) = match (col("x"), col("y"), col("z")) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(Error::format(display, "missing x/y/z properties")),
    };
    let normal_cols = match (col("nx"), col("ny"), col("nz")) {
        (Some(a), Some(b), Some(c)) => Some((a, b, c)),
        _ => None,
    };
    let vis_col = col("visibility");

    let mut cloud = PointCloud::from_points(Vec::with_capacity(n));
    if normal_cols.is_some() {
        cloud.normals = Some(Vec::with_capacity(n));
    }
    if vis_col.is_some() {
        cloud.visibility = Some(Vec::with_capacity(n));
    }
    for _ in 0..n {
        let line = next_line()?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < props.len() {
            return Err(Error::format(display, "short vertex row"));
        }
        let get = |i: usize| -> Result<f64> {
            fields[i]
                .parse::<f64>()
                .map_err(|e| Error::format(display.clone(), format!("bad float: {e}")))
        };
        cloud
            .points
            .push(Point3::new(get(ix)?, get(iy)?, get(iz)?));
        if let Some((a, b, c)) = normal_cols {
            cloud
                .normals
                .as_mut()
                .unwrap()
                .push(Vector3::new(get(a)?, get(b)?, get(c)?));
        }
        if let Some(vc) = vis_col {
            let v = fields[vc]
                .parse::<u32>()
                .map_err(|e| Error::format(display.clone(), format!("bad count: {e}")))?;
            cloud.visibility.as_mut().unwrap().push(v);
        }
    }
    Ok(cloud)
}
