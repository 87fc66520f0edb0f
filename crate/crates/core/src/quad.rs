//! Composite Gauss-Legendre quadrature with panel-doubling refinement.
//!
//! Nodes and weights are generated at runtime by Newton iteration on the
//! Legendre recurrence, so there are no baked-in tables to transcribe
//! wrongly. Integrands with endpoint singularities are expected to be
//! regularized by the caller (power substitution or geometric grading,
//! see the oracle module) before landing here.

use alloc::vec::Vec;

use crate::math::F64Ext;

/// A Gauss-Legendre rule on [-1, 1].
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Build the n-point rule. Nodes are Legendre roots found by Newton
    /// iteration from the Chebyshev initial guess; converges to machine
    /// precision in a handful of steps.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                let step = p / d;
                x -= step;
                if step.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            nodes.push(-x); // initial guesses descend from +1, so this ascends
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        Self { nodes, weights }
    }

    /// Integrate f over a single panel [a, b].
    pub fn panel<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(self.weights.iter()) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Composite integration over [a, b] split into `panels` equal panels.
    pub fn composite<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut acc = 0.0;
        for i in 0..panels {
            acc += self.panel(f, a + i as f64 * h, a + (i + 1) as f64 * h);
        }
        acc
    }

    /// Composite integration over panels graded geometrically toward `a`:
    /// panel edges a + (b-a)*q^j. Used for integrable endpoint
    /// singularities at `a` as an independent cross-check of the power
    /// substitution route.
    pub fn graded_toward_left<F: Fn(f64) -> f64>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        q: f64,
        levels: usize,
    ) -> f64 {
        debug_assert!(q > 0.0 && q < 1.0);
        let len = b - a;
        let mut acc = 0.0;
        let mut hi = b;
        for j in 1..=levels {
            let lo = a + len * q.powi_(j as i32);
            acc += self.panel(f, lo, hi);
            hi = lo;
        }
        // innermost sliver: one last panel down to a
        acc += self.panel(f, a, hi);
        acc
    }
}

/// Legendre P_n(x) and its derivative via the three-term recurrence.
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

/// Result of a panel-doubling refinement run.
#[derive(Clone, Copy, Debug)]
pub struct Refined {
    pub value: f64,
    /// |I_{2n} - I_n| at acceptance, an a posteriori error estimate.
    pub err_estimate: f64,
    pub panels: usize,
}

/// Double the panel count until successive composite values agree to
/// `rel_tol` relative (floored at `rel_tol` absolute for near-zero
/// integrals), starting from `panels0`.
pub fn refine_to_tol<F: Fn(f64) -> f64>(
    rule: &GaussRule,
    f: &F,
    a: f64,
    b: f64,
    panels0: usize,
    rel_tol: f64,
    max_doublings: usize,
) -> Refined {
    let mut panels = panels0.max(1);
    let mut prev = rule.composite(f, a, b, panels);
    for _ in 0..max_doublings {
        panels *= 2;
        let cur = rule.composite(f, a, b, panels);
        let err = (cur - prev).abs();
        if err <= rel_tol * (1.0 + cur.abs()) {
            return Refined { value: cur, err_estimate: err, panels };
        }
        prev = cur;
    }
    Refined { value: prev, err_estimate: f64::INFINITY, panels }
}
