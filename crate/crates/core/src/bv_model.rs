//! Discrete model of 1D BV functions and the relaxed energy.
//!
//! A `BVFunction1D` is a continuous piecewise-linear part (nodal values
//! on a uniform grid) plus explicit jump atoms at interior points. The
//! relaxed energy splits into the absolutely continuous part, the jump
//! part priced by the recession function, and the boundary penalty for
//! traces that miss the Dirichlet data.

use alloc::vec;
use alloc::vec::Vec;

use crate::integrand::NonAutonomousIntegrand;
#[cfg_attr(test, allow(unused_imports))] // std's inherent methods shadow it under test
use crate::math::F64Ext;
use crate::rng::SplitMix64;

/// Uniform grid on [a, b] with a power-of-two cell count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    a: f64,
    b: f64,
    m: usize,
}

impl Grid1D {
    /// `m` must be a power of two. When a < 0 < b the grid must place a
    /// node exactly at 0 (true for symmetric dyadic intervals), because
    /// the weight's minimum has to be resolvable as a node.
    pub fn new(a: f64, b: f64, m: usize) -> Result<Self, GridError> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(GridError::BadInterval { a, b });
        }
        if m == 0 || !m.is_power_of_two() {
            return Err(GridError::BadCellCount(m));
        }
        let g = Self { a, b, m };
        if a < 0.0 && 0.0 < b && g.node_at(0.0).is_none() {
            return Err(GridError::ZeroNotANode);
        }
        Ok(g)
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }
    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }
    /// Cell count.
    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }
    #[inline]
    pub fn dx(&self) -> f64 {
        (self.b - self.a) / self.m as f64
    }
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        if i == self.m {
            self.b
        } else {
            self.a + i as f64 * self.dx()
        }
    }
    #[inline]
    pub fn midpoint(&self, cell: usize) -> f64 {
        self.a + (cell as f64 + 0.5) * self.dx()
    }

    /// Index of the node coinciding with `x` (to a 1e-12 span tolerance).
    pub fn node_at(&self, x: f64) -> Option<usize> {
        let t = (x - self.a) / self.dx();
        let i = libm::round(t) as i64;
        if i < 0 || i as usize > self.m {
            return None;
        }
        let i = i as usize;
        if (self.node(i) - x).abs() <= 1e-12 * (self.b - self.a) {
            Some(i)
        } else {
            None
        }
    }

    /// Nodes as a vector, x_0 = a .. x_m = b.
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.m).map(|i| self.node(i)).collect()
    }

    /// Per-cell quadrature weights w_i for the energy.
    ///
    /// Every cell uses the midpoint value of w except the two cells
    /// adjacent to the node at the weight's interior minimum c, which use
    /// w(c) = m. Charging those two cells the midpoint value w(c + dx/2)
    /// puts a floor of order dx^alpha on the discrete price of gradient
    /// concentration at c; that floor freezes the flux constant of the
    /// viscosity sequence strictly above m and the singular mass never
    /// converges. Pricing them at the minimum keeps the discrete jump
    /// cost consistent with the recession-priced atom at c.
    pub fn cell_weights(&self, f: &NonAutonomousIntegrand) -> Vec<f64> {
        let w = &f.weight;
        let mut out: Vec<f64> = (0..self.m).map(|i| w.eval(self.midpoint(i))).collect();
        if let Some(j) = self.node_at(w.min_point()) {
            if j > 0 {
                out[j - 1] = w.eval(w.min_point());
            }
            if j < self.m {
                out[j] = w.eval(w.min_point());
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridError {
    BadInterval { a: f64, b: f64 },
    BadCellCount(usize),
    ZeroNotANode,
}

impl core::fmt::Display for GridError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GridError::BadInterval { a, b } => write!(f, "bad interval [{a}, {b}]"),
            GridError::BadCellCount(m) => write!(f, "cell count {m} is not a power of two"),
            GridError::ZeroNotANode => write!(f, "grid straddles 0 without a node there"),
        }
    }
}

impl core::error::Error for GridError {}

/// A jump atom of the singular part.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    /// strictly interior location in (a, b)
    pub location: f64,
    /// signed jump height
    pub jump: f64,
}

/// Piecewise-linear part + interior jump atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct BVFunction1D {
    grid: Grid1D,
    values: Vec<f64>,
    atoms: Vec<Atom>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BvError {
    ValueCountMismatch { expected: usize, got: usize },
    AtomNotInterior(f64),
    AtomsNotSortedDistinct,
    NonFiniteValue,
}

impl core::fmt::Display for BvError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BvError::ValueCountMismatch { expected, got } => {
                write!(f, "need {expected} nodal values, got {got}")
            }
            BvError::AtomNotInterior(x) => write!(f, "atom at {x} is not strictly interior"),
            BvError::AtomsNotSortedDistinct => write!(f, "atoms must be sorted and distinct"),
            BvError::NonFiniteValue => write!(f, "non-finite nodal value or atom"),
        }
    }
}

impl core::error::Error for BvError {}

impl BVFunction1D {
    pub fn new(grid: Grid1D, values: Vec<f64>, atoms: Vec<Atom>) -> Result<Self, BvError> {
        if values.len() != grid.m() + 1 {
            return Err(BvError::ValueCountMismatch { expected: grid.m() + 1, got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(BvError::NonFiniteValue);
        }
        for a in &atoms {
            if !a.location.is_finite() || !a.jump.is_finite() {
                return Err(BvError::NonFiniteValue);
            }
            if !(a.location > grid.a() && a.location < grid.b()) {
                return Err(BvError::AtomNotInterior(a.location));
            }
        }
        for pair in atoms.windows(2) {
            if !(pair[0].location < pair[1].location) {
                return Err(BvError::AtomsNotSortedDistinct);
            }
        }
        Ok(Self { grid, values, atoms })
    }

    /// The zero function on `grid`.
    pub fn zero(grid: Grid1D) -> Self {
        Self { grid, values: vec![0.0; grid.m() + 1], atoms: Vec::new() }
    }

    /// Affine interpolant of the boundary data (y1 at a, y2 at b).
    pub fn affine(grid: Grid1D, y1: f64, y2: f64) -> Self {
        let m = grid.m();
        let values = (0..=m).map(|i| y1 + (y2 - y1) * i as f64 / m as f64).collect();
        Self { grid, values, atoms: Vec::new() }
    }

    #[inline]
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }
    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    #[inline]
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Left boundary trace. The function is the piecewise-linear part
    /// plus the accumulated atoms from the left, so the trace at a is
    /// just the first nodal value.
    #[inline]
    pub fn trace_a(&self) -> f64 {
        self.values[0]
    }
    /// Right boundary trace: last nodal value plus every atom's jump.
    #[inline]
    pub fn trace_b(&self) -> f64 {
        *self.values.last().unwrap() + self.atoms.iter().map(|a| a.jump).sum::<f64>()
    }

    /// Slope of the piecewise-linear part on cell i.
    #[inline]
    pub fn slope(&self, cell: usize) -> f64 {
        (self.values[cell + 1] - self.values[cell]) / self.grid.dx()
    }

    /// All cell slopes.
    pub fn slopes(&self) -> Vec<f64> {
        (0..self.grid.m()).map(|i| self.slope(i)).collect()
    }

    /// Point value of the full function, right-continuous at atoms.
    pub fn eval(&self, x: f64) -> f64 {
        let jumps: f64 =
            self.atoms.iter().filter(|a| a.location <= x).map(|a| a.jump).sum();
        self.eval_ac(x) + jumps
    }

    /// Point value of the piecewise-linear part (atoms ignored).
    pub fn eval_ac(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x <= g.a() {
            return self.values[0];
        }
        if x >= g.b() {
            return *self.values.last().unwrap();
        }
        let t = (x - g.a()) / g.dx();
        let i = (t.floor() as usize).min(g.m() - 1);
        let frac = t - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// Total variation: sum of |nodal increments| plus |atom jumps|.
    pub fn total_variation(&self) -> f64 {
        let tv_ac: f64 = self.values.windows(2).map(|p| (p[1] - p[0]).abs()).sum();
        let tv_atoms: f64 = self.atoms.iter().map(|a| a.jump.abs()).sum();
        tv_ac + tv_atoms
    }

    /// L^p norm of the gradient on the subinterval K (cells whose
    /// midpoint lies in K). For p > 1 any atom inside K makes the value
    /// `f64::INFINITY`: |z|^p has infinite recession, which is exactly
    /// how callers detect jump formation. For p = 1 atoms contribute
    /// their mass (the norm is then the total variation measure of K).
    pub fn lp_gradient_norm(&self, p: f64, k: Interval) -> f64 {
        assert!(p >= 1.0, "p must be >= 1");
        let g = &self.grid;
        let atoms_in: f64 = self
            .atoms
            .iter()
            .filter(|a| k.contains(a.location))
            .map(|a| a.jump.abs())
            .sum();
        if atoms_in > 0.0 && p > 1.0 {
            return f64::INFINITY;
        }
        let mut acc = 0.0;
        for i in 0..g.m() {
            if k.contains(g.midpoint(i)) {
                acc += self.slope(i).abs().powf(p) * g.dx();
            }
        }
        if p == 1.0 {
            acc + atoms_in
        } else {
            acc.powf(1.0 / p)
        }
    }

    /// Split every cell in two; nodal values interpolate linearly, atoms
    /// carry over. Exact for the piecewise-linear part.
    pub fn refine_dyadic(&self) -> Self {
        let g = &self.grid;
        let fine = Grid1D::new(g.a(), g.b(), 2 * g.m()).expect("refining a valid grid");
        let mut values = Vec::with_capacity(2 * g.m() + 1);
        for i in 0..g.m() {
            values.push(self.values[i]);
            values.push(0.5 * (self.values[i] + self.values[i + 1]));
        }
        values.push(*self.values.last().unwrap());
        Self { grid: fine, values, atoms: self.atoms.clone() }
    }
}

/// Closed subinterval of the domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi);
        Self { lo, hi }
    }
    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// The three summands of the relaxed energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBreakdown {
    pub ac_part: f64,
    pub jump_part: f64,
    pub boundary_part: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(ac_part: f64, jump_part: f64, boundary_part: f64) -> Self {
        Self { ac_part, jump_part, boundary_part, total: ac_part + jump_part + boundary_part }
    }
}

/// Relaxed energy of `u` under the Dirichlet data `bc = (y1, y2)`:
///
/// - AC part: sum over cells of w_i f(slope_i) dx with the cell weights
///   of [`Grid1D::cell_weights`],
/// - jump part: sum over atoms of w(location) f^inf(jump),
/// - boundary penalty: w(a) f^inf(trace(a) - y1) + w(b) f^inf(trace(b) - y2),
///
/// where f^inf(z) = |z| is the recession function of the profile.
pub fn relaxed_energy(
    u: &BVFunction1D,
    f: &NonAutonomousIntegrand,
    bc: (f64, f64),
) -> EnergyBreakdown {
    let g = u.grid();
    let dx = g.dx();
    let weights = g.cell_weights(f);
    let mut ac = 0.0;
    for (i, w_i) in weights.iter().enumerate() {
        ac += w_i * f.profile.f(u.slope(i)) * dx;
    }
    let mut jump = 0.0;
    for a in u.atoms() {
        jump += f.weight.eval(a.location) * f.profile.recession(a.jump);
    }
    let boundary = f.weight.eval(g.a()) * f.profile.recession(u.trace_a() - bc.0)
        + f.weight.eval(g.b()) * f.profile.recession(u.trace_b() - bc.1);
    EnergyBreakdown::new(ac, jump, boundary)
}

/// Seeded competitor functions for optimality tests: moderate smooth and
/// nodal perturbations, atom relocations, atom-mass redistribution into
/// wide ramps, and trace shifts. All are valid BV functions under the
/// same Dirichlet data (trace mismatches are priced by the boundary
/// penalty, not forbidden).
pub fn perturbation_competitors(
    base: &BVFunction1D,
    bc: (f64, f64),
    n: usize,
    seed: u64,
) -> Vec<BVFunction1D> {
    let mut rng = SplitMix64::new(seed);
    let g = *base.grid();
    let (a, b) = (g.a(), g.b());
    let span = b - a;
    let scale = 0.1 * (1.0 + bc.0.abs().max(bc.1.abs()));
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let kind = rng.below(5);
        let mut values = base.values().to_vec();
        let mut atoms = base.atoms().to_vec();
        match kind {
            0 => {
                // smooth sinusoidal bump, trace-preserving
                let j = 1 + rng.below(6) as i32;
                let amp = scale * rng.uniform(-1.0, 1.0);
                for (i, v) in values.iter_mut().enumerate() {
                    let t = (g.node(i) - a) / span;
                    *v += amp * (core::f64::consts::PI * j as f64 * t).sin();
                }
            }
            1 => {
                // hat bump at one interior node
                let i = 1 + rng.below(g.m() - 1);
                values[i] += scale * rng.uniform(-1.0, 1.0);
            }
            2 if !atoms.is_empty() => {
                // move one atom to a random interior location
                let which = rng.below(atoms.len());
                let loc = rng.uniform(a + 0.05 * span, b - 0.05 * span);
                atoms[which].location = loc;
                atoms.sort_by(|p, q| p.location.partial_cmp(&q.location).unwrap());
                atoms.dedup_by(|p, q| {
                    if p.location == q.location {
                        q.jump += p.jump;
                        true
                    } else {
                        false
                    }
                });
            }
            3 if !atoms.is_empty() => {
                // shave a fraction off an atom and spread it as a wide ramp
                let which = rng.below(atoms.len());
                let frac = rng.uniform(0.1, 0.9);
                let mass = atoms[which].jump * frac;
                atoms[which].jump -= mass;
                if atoms[which].jump.abs() < 1e-300 {
                    atoms.remove(which);
                }
                let lo = rng.below(g.m() / 2);
                let hi = lo + g.m() / 4; // ramp over a quarter of the domain
                let per_node = mass / (hi - lo) as f64;
                let mut add = 0.0;
                for (i, v) in values.iter_mut().enumerate() {
                    if i > lo && i <= hi {
                        add += per_node;
                    }
                    if i > lo {
                        *v += add;
                    }
                }
            }
            _ => {
                // constant trace shift; boundary penalty picks up the bill
                let c = scale * rng.uniform(-1.0, 1.0);
                for v in values.iter_mut() {
                    *v += c;
                }
            }
        }
        out.push(BVFunction1D::new(g, values, atoms).expect("competitor stays valid"));
    }
    out
}
