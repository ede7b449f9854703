use serde::{Deserialize, Serialize};

use super::FilterError;

/// How the `2k+1` basis centers are laid out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    /// `x_γ = -k + γ`.
    Standard,
    /// `x_γ = ε(-k + γ)`, `0 < ε <= 1`.
    Compact { epsilon: f64 },
    /// Explicit increasing list of `2k+1` centers.
    Custom(Vec<f64>),
}

impl NodeKind {
    /// Compact layout with the default compression `ε = 1/(2k)`.
    pub fn compact_default(k: usize) -> Self {
        NodeKind::Compact { epsilon: 1.0 / (2 * k) as f64 }
    }

    pub fn epsilon(&self) -> Option<f64> {
        match self {
            NodeKind::Compact { epsilon } => Some(*epsilon),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NodeKind::Standard => "standard",
            NodeKind::Compact { .. } => "compact",
            NodeKind::Custom(_) => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDistribution {
    k: usize,
    kind: NodeKind,
    shift: f64,
    nodes: Vec<f64>,
}

impl NodeDistribution {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn kind(&self) -> &NodeKind {
        &self.kind
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn first(&self) -> f64 {
        self.nodes[0]
    }

    pub fn last(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Same layout, re-centered with a different uniform offset.
    pub fn with_shift(&self, shift: f64) -> Result<Self, FilterError> {
        make_nodes(self.k, self.kind.clone(), shift)
    }

    /// Rebuilds from raw node values (used by kernel import).
    pub(crate) fn from_raw(k: usize, kind: NodeKind, shift: f64, nodes: Vec<f64>) -> Result<Self, FilterError> {
        if nodes.len() != 2 * k + 1 || nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FilterError::InvalidNodes(format!("expected {} strictly increasing nodes", 2 * k + 1)));
        }
        Ok(Self { k, kind, shift, nodes })
    }
}

pub fn make_nodes(k: usize, kind: NodeKind, shift: f64) -> Result<NodeDistribution, FilterError> {
    if k < 1 {
        return Err(FilterError::InvalidDegree(k));
    }
    if !shift.is_finite() {
        return Err(FilterError::InvalidNodes("shift must be finite".into()));
    }
    let centered: Vec<f64> = match &kind {
        NodeKind::Standard => (0..=2 * k).map(|g| g as f64 - k as f64).collect(),
        NodeKind::Compact { epsilon } => {
            let eps = *epsilon;
            if !(eps > 0.0 && eps <= 1.0) {
                return Err(FilterError::InvalidEpsilon(eps));
            }
            (0..=2 * k).map(|g| (g as f64 - k as f64) * eps).collect()
        }
        NodeKind::Custom(list) => {
            if list.len() != 2 * k + 1 {
                return Err(FilterError::InvalidNodes(format!(
                    "custom list has {} nodes, expected {}",
                    list.len(),
                    2 * k + 1
                )));
            }
            if list.iter().any(|x| !x.is_finite()) || list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(FilterError::InvalidNodes("custom nodes must be finite and strictly increasing".into()));
            }
            list.clone()
        }
    };
    let nodes = centered.iter().map(|x| x + shift).collect();
    NodeDistribution::from_raw(k, kind, shift, nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_and_compact_layouts() {
        assert_eq!(make_nodes(1, NodeKind::Standard, 0.0).unwrap().nodes(), &[-1.0, 0.0, 1.0]);
        assert_eq!(
            make_nodes(2, NodeKind::Compact { epsilon: 0.25 }, 0.0).unwrap().nodes(),
            &[-0.5, -0.25, 0.0, 0.25, 0.5]
        );
        assert_eq!(make_nodes(1, NodeKind::Standard, 1.0).unwrap().nodes(), &[0.0, 1.0, 2.0]);
        for k in 1..=4 {
            let n = make_nodes(k, NodeKind::compact_default(k), 0.0).unwrap();
            assert_eq!(n.first(), -0.5, "k={k}");
            assert_eq!(n.last(), 0.5, "k={k}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(make_nodes(2, NodeKind::Compact { epsilon: 0.0 }, 0.0), Err(FilterError::InvalidEpsilon(0.0)));
        assert!(make_nodes(2, NodeKind::Compact { epsilon: 1.5 }, 0.0).is_err());
        assert!(make_nodes(2, NodeKind::Compact { epsilon: f64::NAN }, 0.0).is_err());
        assert!(make_nodes(1, NodeKind::Custom(vec![0.0, 1.0]), 0.0).is_err());
        assert!(make_nodes(1, NodeKind::Custom(vec![0.0, 1.0, 1.0]), 0.0).is_err());
        assert!(make_nodes(0, NodeKind::Standard, 0.0).is_err());
        let ok = make_nodes(1, NodeKind::Custom(vec![-0.3, 0.1, 0.9]), 0.5).unwrap();
        assert_eq!(ok.nodes(), &[0.2, 0.6, 1.4]);
    }
}
