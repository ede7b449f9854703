use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::basisfn::InitialBasisKind;

use super::{DoubleDouble, FilterError, FilterKernel, KernelBasis, NodeDistribution, NodeKind};

const EXPORT_VERSION: u32 = 1;

/// On-disk kernel description. Floats are stored twice: as JSON numbers for
/// reading and as `f64` bit patterns in hex, which are what import uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelExport {
    pub version: u32,
    pub k: usize,
    pub basis: InitialBasisKind,
    pub nodes_kind: NodeKind,
    pub epsilon: Option<f64>,
    pub shift: f64,
    pub scaling: f64,
    pub nodes: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub shift_bits: String,
    pub scaling_bits: String,
    pub nodes_bits: Vec<String>,
    pub coefficients_bits: Vec<String>,
    /// Low words of the coefficients; absent means zero.
    #[serde(default)]
    pub corrections_bits: Vec<String>,
}

fn to_hex(x: f64) -> String {
    format!("{:016x}", x.to_bits())
}

fn from_hex(s: &str) -> Result<f64, FilterError> {
    u64::from_str_radix(s, 16)
        .map(f64::from_bits)
        .map_err(|e| FilterError::Import(format!("bad bit pattern {s:?}: {e}")))
}

impl KernelExport {
    pub fn from_kernel(kernel: &FilterKernel) -> Self {
        let nodes = kernel.nodes();
        Self {
            version: EXPORT_VERSION,
            k: kernel.k(),
            basis: kernel.basis().kind(),
            nodes_kind: nodes.kind().clone(),
            epsilon: nodes.kind().epsilon(),
            shift: nodes.shift(),
            scaling: kernel.scaling(),
            nodes: nodes.nodes().to_vec(),
            coefficients: kernel.coefficients().to_vec(),
            shift_bits: to_hex(nodes.shift()),
            scaling_bits: to_hex(kernel.scaling()),
            nodes_bits: nodes.nodes().iter().copied().map(to_hex).collect(),
            coefficients_bits: kernel.coefficients().iter().copied().map(to_hex).collect(),
            corrections_bits: kernel.corrections().iter().copied().map(to_hex).collect(),
        }
    }

    pub fn to_kernel(&self) -> Result<FilterKernel, FilterError> {
        if self.version != EXPORT_VERSION {
            return Err(FilterError::Import(format!("unsupported version {}", self.version)));
        }
        let parse = |v: &[String]| v.iter().map(|s| from_hex(s)).collect::<Result<Vec<_>, _>>();
        let nodes = parse(&self.nodes_bits)?;
        let coefficients = parse(&self.coefficients_bits)?;
        let corrections = if self.corrections_bits.is_empty() {
            vec![0.0; coefficients.len()]
        } else {
            parse(&self.corrections_bits)?
        };
        if corrections.len() != coefficients.len() {
            return Err(FilterError::Import(format!(
                "{} corrections for {} coefficients",
                corrections.len(),
                coefficients.len()
            )));
        }
        let shift = from_hex(&self.shift_bits)?;
        let scaling = from_hex(&self.scaling_bits)?;
        let basis = Arc::new(KernelBasis::new(&self.basis, self.k + 1)?);
        let dist = NodeDistribution::from_raw(self.k, self.nodes_kind.clone(), shift, nodes)?;
        let coefficients = coefficients.into_iter().zip(corrections).map(|(c, l)| DoubleDouble::new(c, l)).collect();
        FilterKernel::from_parts_extended(basis, dist, coefficients, scaling)
    }
}

pub fn export_kernel(kernel: &FilterKernel) -> Result<String, FilterError> {
    serde_json::to_string_pretty(&KernelExport::from_kernel(kernel)).map_err(|e| FilterError::Import(e.to_string()))
}

pub fn import_kernel(json: &str) -> Result<FilterKernel, FilterError> {
    let export: KernelExport = serde_json::from_str(json).map_err(|e| FilterError::Import(e.to_string()))?;
    export.to_kernel()
}
