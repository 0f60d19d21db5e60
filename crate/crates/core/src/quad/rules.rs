//! Fixed one-dimensional rules: Gauss-Legendre and tanh-sinh.

use std::f64::consts::{FRAC_PI_2, PI};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tanh-sinh rule on `[a, b]`; handles integrable endpoint singularities.
///
/// Nodes are generated with the distance to the nearer endpoint computed
/// directly so that `f` is never evaluated at an endpoint.
#[derive(Clone, Debug)]
pub struct TanhSinh {
    // (distance-from-endpoint in units of the half-width, weight, side)
    points: Vec<(f64, f64, i8)>,
}

impl TanhSinh {
    pub fn new(step: f64, t_max: f64) -> Self {
        let mut points = Vec::new();
        let k_max = (t_max / step).floor() as i64;
        for k in -k_max..=k_max {
            let t = k as f64 * step;
            let u = FRAC_PI_2 * t.sinh();
            let cu = u.cosh();
            let w = step * FRAC_PI_2 * t.cosh() / (cu * cu);
            // 1 - tanh|u| computed without cancellation
            let e = (-2.0 * u.abs()).exp();
            let gap = 2.0 * e / (1.0 + e);
            if gap <= 0.0 || w <= 0.0 {
                continue;
            }
            let side = if k < 0 {
                -1
            } else if k > 0 {
                1
            } else {
                0
            };
            points.push((gap, w, side));
        }
        TanhSinh { points }
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for &(gap, w, side) in &self.points {
            let x = match side {
                -1 => a + half * gap,
                1 => b - half * gap,
                _ => 0.5 * (a + b),
            };
            if x <= a || x >= b {
                continue;
            }
            acc += w * f(x);
        }
        acc * half
    }
}

impl Default for TanhSinh {
    fn default() -> Self {
        TanhSinh::new(1.0 / 16.0, 4.0)
    }
}

/// Panel edges on `[0, len]` starting at width `w_min` and doubling.
pub fn graded_edges(len: f64, w_min: f64) -> Vec<f64> {
    let mut edges = vec![0.0];
    if w_min >= len {
        edges.push(len);
        return edges;
    }
    let mut e = w_min;
    while e < len {
        edges.push(e);
        e *= 2.0;
    }
    if len - edges[edges.len() - 1] < 0.25 * edges[edges.len() - 1] && edges.len() > 2 {
        edges.pop();
    }
    edges.push(len);
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(6);
        for k in 0..12 {
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            let got = gl.integrate(-1.0, 1.0, |x| x.powi(k));
            assert!((got - exact).abs() < 1e-14, "k={k}: {got}");
        }
        let w: f64 = gl.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn tanh_sinh_handles_log_endpoint() {
        let ts = TanhSinh::default();
        let got = ts.integrate(0.0, 1.0, |x| x.ln());
        assert!((got + 1.0).abs() < 1e-12, "{got}");
        let got = ts.integrate(0.0, 1.0, |x| 1.0 / x.sqrt());
        assert!((got - 2.0).abs() < 1e-9, "{got}");
    }

    #[test]
    fn graded_edges_cover_interval() {
        let e = graded_edges(1.0, 1e-3);
        assert_eq!(e[0], 0.0);
        assert_eq!(*e.last().unwrap(), 1.0);
        assert!((e[1] - 1e-3).abs() < 1e-18);
        assert!(e.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(graded_edges(0.5, 1.0), vec![0.0, 0.5]);
    }
}
