use super::FilterKernel;

/// Separable 2D kernel `K(x, y) = Kx(x) Ky(y)`.
#[derive(Debug, Clone)]
pub struct TensorKernel {
    pub x: FilterKernel,
    pub y: FilterKernel,
}

pub fn tensor2d(kx: FilterKernel, ky: FilterKernel) -> TensorKernel {
    TensorKernel { x: kx, y: ky }
}

impl TensorKernel {
    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        self.x.evaluate(x) * self.y.evaluate(y)
    }

    /// `((x_lo, x_hi), (y_lo, y_hi))`, scaled.
    pub fn support(&self) -> ((f64, f64), (f64, f64)) {
        (self.x.support(), self.y.support())
    }

    /// Area of the scaled support rectangle.
    pub fn footprint(&self) -> f64 {
        let ((x0, x1), (y0, y1)) = self.support();
        (x1 - x0) * (y1 - y0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basisfn::InitialBasisKind;
    use crate::filtercore::{build_filter, FilterConfig, NodeKind};

    fn kernel(k: usize, nodes: NodeKind, h: f64) -> FilterKernel {
        build_filter(&FilterConfig::new(k, InitialBasisKind::Box, nodes).with_scaling(h)).unwrap()
    }

    #[test]
    fn footprints() {
        let h = 0.1;
        let std = kernel(3, NodeKind::Standard, h);
        let t = tensor2d(std.clone(), std);
        assert!((t.footprint() - (10.0 * h) * (10.0 * h)).abs() < 1e-14);
        let c = kernel(3, NodeKind::compact_default(3), h);
        let t = tensor2d(c.clone(), c);
        assert!((t.footprint() - (5.0 * h) * (5.0 * h)).abs() < 1e-14);
    }

    #[test]
    fn identical_factors_are_symmetric() {
        let k = kernel(2, NodeKind::Standard, 1.0);
        let t = tensor2d(k.clone(), k);
        for &(x, y) in &[(0.3, -1.2), (2.2, 0.1), (-3.0, 3.3)] {
            assert_eq!(t.evaluate(x, y), t.evaluate(y, x));
        }
    }
}
