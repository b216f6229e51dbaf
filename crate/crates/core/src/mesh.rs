//! Per-vertex export of an immersion with its classification residuals.
//!
//! CSV columns, in order: `x1,x2,x3,x4,x5,F,H_plus,H_minus,abs_L_plus,abs_L_minus,u1,u2`.
//! `x5` is empty for surfaces in ℝ⁴₁, and the residual columns are empty at
//! vertices where the chart has no spacelike frame. `u1,u2` are the chart
//! parameters of the vertex.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space_form::SpaceForm;
use crate::surface::{Grid, Immersion};

pub const CSV_HEADER: [&str; 12] =
    ["x1", "x2", "x3", "x4", "x5", "F", "H_plus", "H_minus", "abs_L_plus", "abs_L_minus", "u1", "u2"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub param: [f64; 2],
    pub x: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parts: Option<VertexParts>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexParts {
    pub f: f64,
    pub h_plus: f64,
    pub h_minus: f64,
    pub abs_l_plus: f64,
    pub abs_l_minus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub space: SpaceForm,
    pub grid: Grid,
    pub vertices: Vec<Vertex>,
}

impl Mesh {
    pub fn from_immersion(imm: &Immersion) -> Result<Self> {
        let mut vertices = Vec::with_capacity(imm.grid.len());
        for (p, r) in imm.samples() {
            let v = match r {
                Ok(sd) => {
                    let d = sd.decompose();
                    Vertex {
                        param: p,
                        x: sd.point.to_vec(),
                        parts: Some(VertexParts {
                            f: sd.f,
                            h_plus: d.h_plus,
                            h_minus: d.h_minus,
                            abs_l_plus: d.l_plus.norm(),
                            abs_l_minus: d.l_minus.norm(),
                        }),
                    }
                }
                Err(Error::Degenerate { .. } | Error::Signature { .. }) => {
                    Vertex { param: p, x: imm.eval(p)?.to_vec(), parts: None }
                }
                Err(e) => return Err(e),
            };
            vertices.push(v);
        }
        Ok(Mesh { space: imm.space_form, grid: imm.grid, vertices })
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(CSV_HEADER)?;
        let num = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        for v in &self.vertices {
            let mut rec: Vec<String> = (0..5).map(|i| num(v.x.get(i).copied())).collect();
            let p = v.parts;
            rec.push(num(p.map(|p| p.f)));
            rec.push(num(p.map(|p| p.h_plus)));
            rec.push(num(p.map(|p| p.h_minus)));
            rec.push(num(p.map(|p| p.abs_l_plus)));
            rec.push(num(p.map(|p| p.abs_l_minus)));
            rec.push(num(Some(v.param[0])));
            rec.push(num(Some(v.param[1])));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads the vertices of a CSV mesh; grid and space form are not stored
    /// in the CSV and are supplied by the caller.
    pub fn read_csv(r: impl Read, space: SpaceForm, grid: Grid) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
        if header != CSV_HEADER {
            return Err(Error::Config(format!("unexpected mesh header {header:?}")));
        }
        let mut vertices = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let cell = |i: usize| -> Result<Option<f64>> {
                let s = rec.get(i).unwrap_or("");
                if s.is_empty() {
                    return Ok(None);
                }
                s.parse().map(Some).map_err(|_| Error::Config(format!("bad number {s:?} in mesh")))
            };
            let x: Vec<f64> = (0..5).map(cell).collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
            let parts = match (cell(5)?, cell(6)?, cell(7)?, cell(8)?, cell(9)?) {
                (Some(f), Some(h_plus), Some(h_minus), Some(abs_l_plus), Some(abs_l_minus)) => {
                    Some(VertexParts { f, h_plus, h_minus, abs_l_plus, abs_l_minus })
                }
                _ => None,
            };
            let u = |i| cell(i)?.ok_or_else(|| Error::Config("missing chart parameter in mesh".into()));
            vertices.push(Vertex { param: [u(10)?, u(11)?], x, parts });
        }
        Ok(Mesh { space, grid, vertices })
    }

    /// Largest coordinate difference between matching vertices.
    pub fn max_position_diff(&self, other: &Mesh) -> Result<f64> {
        if self.vertices.len() != other.vertices.len() {
            return Err(Error::Config("meshes have different vertex counts".into()));
        }
        let mut m: f64 = 0.0;
        for (a, b) in self.vertices.iter().zip(&other.vertices) {
            if a.x.len() != b.x.len() {
                return Err(Error::Dimension { expected: a.x.len(), got: b.x.len() });
            }
            for (p, q) in a.x.iter().zip(&b.x) {
                m = m.max((p - q).abs());
            }
        }
        Ok(m)
    }

    /// Largest `|L₋|` over vertices with a frame.
    pub fn max_l_minus(&self) -> f64 {
        self.vertices.iter().filter_map(|v| v.parts).map(|p| p.abs_l_minus).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{build_family, FamilySpec, FamilyTag};

    #[test]
    fn csv_round_trip() {
        let spec = FamilySpec::new(SpaceForm::PseudoSphere, FamilyTag::ILambda, "y:0.1,0,0".parse().unwrap())
            .with_grid(Grid::square(-0.5, 0.5, 4).unwrap());
        let mesh = Mesh::from_immersion(&build_family(&spec).unwrap()).unwrap();
        let mut buf = Vec::new();
        mesh.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x1,x2,x3,x4,x5,F,H_plus,H_minus,abs_L_plus,abs_L_minus,u1,u2\n"));
        let back = Mesh::read_csv(&buf[..], mesh.space, mesh.grid).unwrap();
        assert_eq!(back, mesh);
    }

    #[test]
    fn flat_vertices_leave_x5_empty() {
        let spec = FamilySpec::new(SpaceForm::Minkowski, FamilyTag::ILambda, "zero".parse().unwrap())
            .with_grid(Grid::square(0.0, 1.0, 2).unwrap());
        let mesh = Mesh::from_immersion(&build_family(&spec).unwrap()).unwrap();
        let mut buf = Vec::new();
        mesh.write_csv(&mut buf).unwrap();
        let line = String::from_utf8(buf).unwrap().lines().nth(1).unwrap().to_string();
        assert_eq!(line.split(',').nth(4), Some(""));
    }
}
