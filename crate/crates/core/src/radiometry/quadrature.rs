use serde::{Deserialize, Serialize};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let n = order;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.reverse();
    out
}

/// Composite Gauss-Legendre rule on log-spaced panels over `u/T` in `[x_min, x_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureRule {
    pub panels: usize,
    pub order: usize,
    pub x_min: f64,
    pub x_max: f64,
    #[serde(skip)]
    reference: Vec<(f64, f64)>,
    #[serde(skip)]
    edges: Vec<f64>,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::new(64, 8, 1e-4, 50.0)
    }
}

impl QuadratureRule {
    pub fn new(panels: usize, order: usize, x_min: f64, x_max: f64) -> Self {
        let mut rule = Self {
            panels,
            order,
            x_min,
            x_max,
            reference: Vec::new(),
            edges: Vec::new(),
        };
        rule.prepare();
        rule
    }

    /// Rebuilds cached nodes; needed after deserialization.
    pub(crate) fn prepare(&mut self) {
        self.reference = gauss_legendre(self.order.max(1));
        let ratio = (self.x_max / self.x_min).ln() / self.panels.max(1) as f64;
        self.edges = (0..=self.panels.max(1))
            .map(|k| self.x_min * (ratio * k as f64).exp())
            .collect();
        *self.edges.last_mut().unwrap() = self.x_max;
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        if self.panels == 0 || self.order == 0 {
            return Err("solver.quadrature: panels and order must be positive".into());
        }
        if !(self.x_min > 0.0 && self.x_max > self.x_min) {
            return Err("solver.quadrature: need 0 < x_min < x_max".into());
        }
        Ok(())
    }

    fn ensure_prepared(&self) -> std::borrow::Cow<'_, Self> {
        if self.edges.len() == self.panels.max(1) + 1 && self.reference.len() == self.order.max(1) {
            std::borrow::Cow::Borrowed(self)
        } else {
            let mut owned = self.clone();
            owned.prepare();
            std::borrow::Cow::Owned(owned)
        }
    }

    /// Visits every `(u, w)` node of the rule scaled to temperature `t`,
    /// with an extra panel split at `split` (photon energy) when it falls inside the support.
    pub fn for_each_node(&self, t: f64, split: Option<f64>, mut f: impl FnMut(f64, f64)) {
        let rule = self.ensure_prepared();
        let xs = split.map(|u| u / t);
        let mut panel = |a: f64, b: f64| {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for &(z, w) in &rule.reference {
                f(t * (mid + half * z), t * half * w);
            }
        };
        for win in rule.edges.windows(2) {
            let (a, b) = (win[0], win[1]);
            match xs {
                Some(s) if s > a && s < b => {
                    panel(a, s);
                    panel(s, b);
                }
                _ => panel(a, b),
            }
        }
    }

    pub fn at_temperature(&self, t: f64, split: Option<f64>) -> FrequencyQuadrature {
        let mut nodes = Vec::with_capacity(self.panels * self.order + self.order);
        self.for_each_node(t, split, |u, w| nodes.push(QuadNode { u, w }));
        FrequencyQuadrature {
            nodes,
            u_min: self.x_min * t,
            u_max: self.x_max * t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadNode {
    pub u: f64,
    pub w: f64,
}

/// A frequency quadrature materialized at one temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyQuadrature {
    pub nodes: Vec<QuadNode>,
    pub u_min: f64,
    pub u_max: f64,
}

impl FrequencyQuadrature {
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().map(|n| n.w * f(n.u)).sum()
    }
}
