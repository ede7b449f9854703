//! JSON container for DG fields.
//!
//! ```json
//! { "version": 1,
//!   "mesh": { "dimension": 1, "bounds": [[0.0, 1.0]], "elements": [20], "periodic": [true] },
//!   "k": 2, "t": 1.0,
//!   "coefficients": [ ... ] }
//! ```
//!
//! Coefficients are element-major. In 1D element `j` holds `k+1` modes in
//! increasing degree. In 2D elements run x-fastest and each holds
//! `(k+1)²` modes with mode `(p, q)` at `q(k+1) + p`. Modes refer to the
//! orthonormal Legendre basis `sqrt((2m+1)/2) P_m` on `[-1, 1]`.

use serde::{Deserialize, Serialize};

use super::{DGField, DGField2D, DgError, Mesh1D, Mesh2D};

pub const FIELD_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshDescriptor {
    pub dimension: usize,
    pub bounds: Vec<[f64; 2]>,
    pub elements: Vec<usize>,
    pub periodic: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldFile {
    pub version: u32,
    pub mesh: MeshDescriptor,
    pub k: usize,
    pub t: f64,
    pub coefficients: Vec<f64>,
}

/// Either dimension, as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyField {
    One(DGField),
    Two(DGField2D),
}

fn axis(m: &Mesh1D) -> ([f64; 2], usize, bool) {
    ([m.a, m.b], m.n, m.periodic)
}

impl From<&DGField> for FieldFile {
    fn from(f: &DGField) -> Self {
        let (b, n, p) = axis(f.mesh());
        Self {
            version: FIELD_FORMAT_VERSION,
            mesh: MeshDescriptor { dimension: 1, bounds: vec![b], elements: vec![n], periodic: vec![p] },
            k: f.k(),
            t: f.time(),
            coefficients: f.coefficients().to_vec(),
        }
    }
}

impl From<&DGField2D> for FieldFile {
    fn from(f: &DGField2D) -> Self {
        let (bx, nx, px) = axis(&f.mesh().x);
        let (by, ny, py) = axis(&f.mesh().y);
        Self {
            version: FIELD_FORMAT_VERSION,
            mesh: MeshDescriptor { dimension: 2, bounds: vec![bx, by], elements: vec![nx, ny], periodic: vec![px, py] },
            k: f.k(),
            t: f.time(),
            coefficients: f.coefficients().to_vec(),
        }
    }
}

impl FieldFile {
    pub fn into_field(self) -> Result<AnyField, DgError> {
        if self.version != FIELD_FORMAT_VERSION {
            return Err(DgError::Format(format!("unsupported version {}", self.version)));
        }
        let d = &self.mesh;
        if d.bounds.len() != d.dimension || d.elements.len() != d.dimension || d.periodic.len() != d.dimension {
            return Err(DgError::Format("mesh descriptor arrays must match the dimension".into()));
        }
        let axis = |i: usize| -> Result<Mesh1D, DgError> {
            let mut m = Mesh1D::new(d.bounds[i][0], d.bounds[i][1], d.elements[i])?;
            m.periodic = d.periodic[i];
            Ok(m)
        };
        match d.dimension {
            1 => Ok(AnyField::One(DGField::from_coefficients(axis(0)?, self.k, self.t, self.coefficients)?)),
            2 => Ok(AnyField::Two(DGField2D::from_coefficients(
                Mesh2D::new(axis(0)?, axis(1)?),
                self.k,
                self.t,
                self.coefficients,
            )?)),
            other => Err(DgError::Format(format!("unsupported dimension {other}"))),
        }
    }
}

pub fn dump_field(field: &DGField) -> String {
    serde_json::to_string(&FieldFile::from(field)).expect("field serializes")
}

pub fn dump_field_2d(field: &DGField2D) -> String {
    serde_json::to_string(&FieldFile::from(field)).expect("field serializes")
}

pub fn load_field(json: &str) -> Result<AnyField, DgError> {
    let file: FieldFile = serde_json::from_str(json).map_err(|e| DgError::Format(e.to_string()))?;
    file.into_field()
}
