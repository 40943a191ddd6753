//! Tanh-sinh quadrature on sub-intervals of [0, 1].
//!
//! Nodes carry both `u` and `v = 1 - u` computed without cancellation, plus
//! their logarithms, so integrands of the form `h(Q(u)) u^a (1-u)^b` stay
//! accurate right up to the endpoints where heavy-tailed quantiles blow up.
//! All levels are evaluated up to a fixed finest step; the difference between
//! the two finest levels serves as the error estimate.

use std::f64::consts::PI;

/// Finest level: step `2^-MAX_LEVEL` in the transformed variable.
const MAX_LEVEL: u32 = 8;
/// `s = π sinh t` is capped so that `e^{-s}` stays a normal double.
const S_MAX: f64 = 690.0;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Node {
    pub u: f64,
    pub v: f64,
    pub ln_u: f64,
    pub ln_v: f64,
    /// `du/dt` at the node.
    pub w: f64,
    pub level: u32,
}

#[derive(Debug, Clone)]
pub(crate) struct Grid {
    pub nodes: Vec<Node>,
}

/// Integral value with a crude error estimate and the integral of `|f|`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Estimate {
    pub value: f64,
    pub error: f64,
    pub magnitude: f64,
}

impl Estimate {
    pub fn converged(&self, rel_tol: f64) -> bool {
        self.error <= rel_tol * self.magnitude.max(f64::MIN_POSITIVE) || self.magnitude == 0.0
    }
}

fn logistic_pair(s: f64) -> (f64, f64, f64, f64) {
    // (σ(s), σ(-s), ln σ(s), ln σ(-s))
    if s >= 0.0 {
        let e = (-s).exp();
        let l = e.ln_1p();
        (1.0 / (1.0 + e), e / (1.0 + e), -l, -s - l)
    } else {
        let e = s.exp();
        let l = e.ln_1p();
        (e / (1.0 + e), 1.0 / (1.0 + e), s - l, -l)
    }
}

impl Grid {
    /// Composite grid over the pieces `[b_0, b_1], [b_1, b_2], ...` where the
    /// breakpoints always include 0 and 1.
    pub fn with_breaks(interior: &[f64]) -> Self {
        let mut breaks: Vec<f64> = interior.iter().copied().filter(|&b| b > 0.0 && b < 1.0).collect();
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup();
        let mut edges = Vec::with_capacity(breaks.len() + 2);
        edges.push(0.0);
        edges.extend(breaks);
        edges.push(1.0);

        let mut nodes = Vec::new();
        for pair in edges.windows(2) {
            push_piece(&mut nodes, pair[0], pair[1]);
        }
        Grid { nodes }
    }

    #[cfg(test)]
    pub fn unit() -> Self {
        Self::with_breaks(&[])
    }

    /// Integrates `f(node_index)` over the grid.
    pub fn integrate(&self, mut f: impl FnMut(usize) -> f64) -> Estimate {
        let mut level_sums = [0.0f64; MAX_LEVEL as usize + 1];
        let mut magnitude = 0.0;
        for (i, node) in self.nodes.iter().enumerate() {
            let y = f(i);
            if y == 0.0 {
                continue;
            }
            let t = node.w * y;
            level_sums[node.level as usize] += t;
            magnitude += t.abs() * step(MAX_LEVEL);
        }
        let mut cumulative = 0.0;
        let mut prev = 0.0;
        let mut value = 0.0;
        for (level, s) in level_sums.iter().enumerate() {
            cumulative += s;
            prev = value;
            value = cumulative * step(level as u32);
        }
        Estimate { value, error: (value - prev).abs(), magnitude }
    }
}

fn step(level: u32) -> f64 {
    (0.5f64).powi(level as i32)
}

fn push_piece(nodes: &mut Vec<Node>, a: f64, b: f64) {
    let width = b - a;
    let t_max = (S_MAX / PI).asinh();
    let mut push = |t: f64, level: u32| {
        let s = PI * t.sinh();
        let (p, q, ln_p, ln_q) = logistic_pair(s);
        let (u, v) = (a + width * p, (1.0 - b) + width * q);
        if u <= 0.0 || v <= 0.0 {
            return;
        }
        // Logs relative to the full unit interval; only exact for a = 0 / b = 1
        // which is where they matter.
        let ln_u = if a == 0.0 { width.ln() + ln_p } else { u.ln() };
        let ln_v = if b == 1.0 { width.ln() + ln_q } else { v.ln() };
        let w = width * p * q * PI * t.cosh();
        if w == 0.0 || !w.is_finite() {
            return;
        }
        nodes.push(Node { u, v, ln_u, ln_v, w, level });
    };
    let k_max = t_max.floor() as i64;
    for k in -k_max..=k_max {
        push(k as f64, 0);
    }
    for level in 1..=MAX_LEVEL {
        let h = step(level);
        let count = (t_max / h).floor() as i64;
        let mut i = 1;
        while i <= count {
            push(i as f64 * h, level);
            push(-(i as f64) * h, level);
            i += 2;
        }
    }
}
