//! Triangle meshes and ASCII OBJ export ("v"/"f" records only).

use crate::error::{Error, Result};
use std::fmt::Write as _;

/// Indexed triangle mesh in model coordinates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
}

impl TriMesh {
    /// Serialize as ASCII OBJ. Vertex coordinates use the shortest exact
    /// decimal representation so a re-import reproduces them bit for bit.
    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", v[0], v[1], v[2]);
        }
        for f in &self.faces {
            let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
        out
    }

    /// Parse the "v"/"f" subset of OBJ produced by [`TriMesh::to_obj`].
    pub fn from_obj(text: &str) -> Result<TriMesh> {
        let mut mesh = TriMesh::default();
        for (lineno, line) in text.lines().enumerate() {
            let mut it = line.split_whitespace();
            match it.next() {
                Some("v") => {
                    let mut v = [0.0; 3];
                    for slot in &mut v {
                        *slot = it
                            .next()
                            .and_then(|t| t.parse().ok())
                            .ok_or(Error::Domain {
                                what: "obj vertex line",
                                value: lineno as f64,
                            })?;
                    }
                    mesh.vertices.push(v);
                }
                Some("f") => {
                    let mut f = [0usize; 3];
                    for slot in &mut f {
                        let idx: usize = it
                            .next()
                            .and_then(|t| t.split('/').next())
                            .and_then(|t| t.parse().ok())
                            .ok_or(Error::Domain {
                                what: "obj face line",
                                value: lineno as f64,
                            })?;
                        *slot = idx - 1;
                    }
                    mesh.faces.push(f);
                }
                _ => {}
            }
        }
        Ok(mesh)
    }

    /// Append another mesh, offsetting its face indices.
    pub fn append(&mut self, other: &TriMesh) {
        let off = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.faces
            .extend(other.faces.iter().map(|f| [f[0] + off, f[1] + off, f[2] + off]));
    }
}

/// Closed-loop tube grid: rows of `cols` vertices produced by `point`,
/// wrapped in the column index, open in the row index.
pub fn grid_tube(rows: usize, cols: usize, point: impl Fn(usize, usize) -> [f64; 3]) -> TriMesh {
    let mut mesh = TriMesh::default();
    for i in 0..rows {
        for j in 0..cols {
            mesh.vertices.push(point(i, j));
        }
    }
    for i in 0..rows.saturating_sub(1) {
        for j in 0..cols {
            let jn = (j + 1) % cols;
            let v00 = i * cols + j;
            let v01 = i * cols + jn;
            let v10 = (i + 1) * cols + j;
            let v11 = (i + 1) * cols + jn;
            mesh.faces.push([v00, v01, v10]);
            mesh.faces.push([v11, v10, v01]);
        }
    }
    mesh
}

/// Polar disk grid: ring index 0 sits at the centre. Degenerate triangles on
/// the innermost ring are skipped.
pub fn grid_disk(rings: usize, cols: usize, point: impl Fn(usize, usize) -> [f64; 3]) -> TriMesh {
    let mut mesh = grid_tube(rings, cols, point);
    mesh.faces.retain(|f| {
        let vs = [mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]];
        vs[0] != vs[1] && vs[1] != vs[2] && vs[0] != vs[2]
    });
    mesh
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obj_roundtrip_is_bit_exact() {
        let mesh = grid_tube(3, 4, |i, j| {
            [
                (j as f64 * 0.731).cos() * 0.123456789012345,
                (j as f64 * 0.731).sin() * 1e-17,
                i as f64 / 3.0,
            ]
        });
        let text = mesh.to_obj();
        let back = TriMesh::from_obj(&text).unwrap();
        assert_eq!(mesh.vertices.len(), back.vertices.len());
        for (a, b) in mesh.vertices.iter().zip(&back.vertices) {
            for d in 0..3 {
                assert_eq!(a[d].to_bits(), b[d].to_bits());
            }
        }
        assert_eq!(mesh.faces, back.faces);
    }

    #[test]
    fn tube_counts() {
        let m = grid_tube(5, 8, |i, j| [i as f64, j as f64, 0.0]);
        assert_eq!(m.vertices.len(), 40);
        assert_eq!(m.faces.len(), 4 * 8 * 2);
    }

    #[test]
    fn disk_skips_degenerate_centre_triangles() {
        let m = grid_disk(4, 6, |i, j| {
            let r = i as f64 / 3.0;
            let th = j as f64 / 6.0 * std::f64::consts::TAU;
            [r * th.cos(), r * th.sin(), 0.0]
        });
        assert_eq!(m.vertices.len(), 24);
        // innermost band keeps one triangle per sector instead of two
        assert_eq!(m.faces.len(), 3 * 6 * 2 - 6);
    }
}
