//! Gauss–Hermite rules for Gaussian-enveloped integrands.

use std::f64::consts::PI;

/// Nodes and weights for ∫ e^{-x²} g(x) dx ≈ Σ wᵢ g(xᵢ).
#[derive(Clone, Debug)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// wᵢ e^{xᵢ²}, for integrands that carry their own envelope.
    pub envelope_weights: Vec<f64>,
}

impl GaussHermite {
    /// Newton iteration on the orthonormal Hermite recurrence.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "order must be at least 1");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let pim4 = PI.powf(-0.25);
        let m = n.div_ceil(2);
        let mut z = 0.0f64;
        for i in 0..m {
            z = match i {
                0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * (n as f64).powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * n as f64).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        // ascending order
        nodes.reverse();
        weights.reverse();
        let envelope_weights = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * (x * x).exp())
            .collect();
        Self {
            nodes,
            weights,
            envelope_weights,
        }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// ∫ g(x) dx for g decaying like a Gaussian of width `scale` about
    /// `center`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, center: f64, scale: f64, mut g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.envelope_weights)
            .map(|(x, w)| w * g(center + scale * x))
            .sum::<f64>()
            * scale
    }
}
