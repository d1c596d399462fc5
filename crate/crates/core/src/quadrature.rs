//! Composite Gauss–Legendre quadrature.

/// Panel size used once more nodes are requested than this.
const PANEL: usize = 16;

/// Gauss–Legendre rule on `[-1, 1]`, optionally repeated over equal panels.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    panels: usize,
}

impl GaussLegendre {
    /// Single rule with `n` nodes (Newton iteration on the Legendre recurrence).
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self {
            nodes,
            weights,
            panels: 1,
        }
    }

    /// About `nodes` points in total: a single rule up to 16 nodes, otherwise
    /// `ceil(nodes / 16)` panels of 16 points.
    pub fn composite(nodes: usize) -> Self {
        let nodes = nodes.max(1);
        if nodes <= PANEL {
            return Self::new(nodes);
        }
        let mut rule = Self::new(PANEL);
        rule.panels = nodes.div_ceil(PANEL);
        rule
    }

    pub fn len(&self) -> usize {
        self.nodes.len() * self.panels
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Absolute abscissae and weights on `[a, b]`.
    pub fn points(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let width = (b - a) / self.panels as f64;
        let half = 0.5 * width;
        let mut out = Vec::with_capacity(self.len());
        for p in 0..self.panels {
            let mid = a + (p as f64 + 0.5) * width;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                out.push((mid + half * x, half * w));
            }
        }
        out
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.points(a, b).into_iter().map(|(x, w)| w * f(x)).sum()
    }

    /// Tensor-product rule over a rectangle.
    pub fn integrate_2d(
        &self,
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        mut f: impl FnMut(f64, f64) -> f64,
    ) -> f64 {
        let ys = self.points(c, d);
        self.points(a, b)
            .into_iter()
            .map(|(x, wx)| wx * ys.iter().map(|&(y, wy)| wy * f(x, y)).sum::<f64>())
            .sum()
    }
}

/// `(P_n(z), P_n'(z))`.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}
