//! The non-autonomous integrand family F(x, z) = w(x) f(z).
//!
//! `f` is the piecewise mu-elliptic profile: quadratic inside |z| <= 1,
//! linear growth with a power correction outside, glued C^2 at the seam.
//! `w` is the Hoelder weight 1 + |x|^alpha with its unique minimum m = 1
//! at x = 0. Together they realize a linear-growth integrand whose
//! generalized minimizers can develop jumps, plus executable checks for
//! the growth (H1), ellipticity (H2) and Hoelder (H3) hypotheses.

use alloc::vec::Vec;

#[cfg_attr(test, allow(unused_imports))] // std's inherent methods shadow it under test
use crate::math::F64Ext;
use crate::rng::SplitMix64;

/// Parameter or argument outside the admissible range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainError {
    /// mu must lie in (1, 2); the outer branch degenerates at mu = 2.
    InvalidMu(f64),
    /// alpha must lie in (0, 1).
    InvalidAlpha(f64),
    /// need a < 0 < b so the weight minimum is interior.
    InvalidInterval { a: f64, b: f64 },
    /// argument of the inverse g outside (-1, 1).
    GOutOfRange(f64),
}

impl core::fmt::Display for DomainError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            DomainError::InvalidMu(m) => write!(f, "mu = {m} outside (1, 2)"),
            DomainError::InvalidAlpha(a) => write!(f, "alpha = {a} outside (0, 1)"),
            DomainError::InvalidInterval { a, b } => {
                write!(f, "interval [{a}, {b}] must satisfy a < 0 < b")
            }
            DomainError::GOutOfRange(y) => write!(f, "g({y}) undefined: f' maps onto (-1, 1)"),
        }
    }
}

impl core::error::Error for DomainError {}

/// Radial profile f with ellipticity exponent mu in (1, 2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MuEllipticProfile {
    mu: f64,
}

impl MuEllipticProfile {
    pub fn new(mu: f64) -> Result<Self, DomainError> {
        if !(mu > 1.0 && mu < 2.0) {
            return Err(DomainError::InvalidMu(mu));
        }
        Ok(Self { mu })
    }

    #[inline]
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// f(z): (mu-1)/(2 mu) z^2 inside the seam,
    /// |z| - |z|^{2-mu}/(mu (2-mu)) + (mu-1)/(2(2-mu)) outside.
    pub fn f(&self, z: f64) -> f64 {
        let mu = self.mu;
        let az = z.abs();
        if az <= 1.0 {
            (mu - 1.0) / (2.0 * mu) * z * z
        } else {
            az - az.powf(2.0 - mu) / (mu * (2.0 - mu)) + (mu - 1.0) / (2.0 * (2.0 - mu))
        }
    }

    /// f'(z): odd, strictly increasing, onto (-1, 1).
    pub fn fprime(&self, z: f64) -> f64 {
        let mu = self.mu;
        let az = z.abs();
        if az <= 1.0 {
            (mu - 1.0) / mu * z
        } else {
            // sign(z) * (1 - |z|^{1-mu}/mu); grouped so the small power is
            // subtracted last, which keeps 1 - f' accurate for huge z
            let tail = az.powf(1.0 - mu) / mu;
            if z > 0.0 {
                1.0 - tail
            } else {
                tail - 1.0
            }
        }
    }

    /// f''(z): positive, constant (mu-1)/mu inside the seam, power decay outside.
    pub fn fsecond(&self, z: f64) -> f64 {
        let mu = self.mu;
        let az = z.abs();
        if az <= 1.0 {
            (mu - 1.0) / mu
        } else {
            (mu - 1.0) / mu * az.powf(-mu)
        }
    }

    /// g = (f')^{-1} on (-1, 1). Odd, strictly increasing, blows up at +-1.
    pub fn g(&self, y: f64) -> Result<f64, DomainError> {
        if !(y > -1.0 && y < 1.0) {
            return Err(DomainError::GOutOfRange(y));
        }
        let mu = self.mu;
        let knee = (mu - 1.0) / mu; // = f'(1)
        let ay = y.abs();
        let z = if ay <= knee {
            mu / (mu - 1.0) * y
        } else {
            let mag = (mu * (1.0 - ay)).powf(1.0 / (1.0 - mu));
            if y > 0.0 {
                mag
            } else {
                -mag
            }
        };
        Ok(z)
    }

    /// Recession function of the profile: lim f(t z)/t = |z|.
    pub fn recession(&self, z: f64) -> f64 {
        z.abs()
    }

    /// Recession computed the generic way, as f(T z)/T extrapolated over
    /// a ladder of scales T (Aitken on the trailing three values). The
    /// ladder must be geometric for the extrapolation to cancel the
    /// leading T^{1-mu} error term.
    pub fn recession_numeric(&self, z: f64, t_ladder: &[f64]) -> f64 {
        if z == 0.0 {
            return 0.0;
        }
        assert!(t_ladder.len() >= 3, "need at least three scales");
        let n = t_ladder.len();
        let y: Vec<f64> = t_ladder.iter().map(|&t| self.f(t * z) / t).collect();
        let (y1, y2, y3) = (y[n - 3], y[n - 2], y[n - 1]);
        let d1 = y2 - y1;
        let d2 = y3 - y2;
        let denom = d2 - d1;
        if denom.abs() <= 1e-300 {
            return y3;
        }
        y3 - d2 * d2 / denom
    }
}

/// Default scale ladder for the numeric recession. Smaller scales leave
/// the O(1/T) term visible through the extrapolation and miss the 1e-6
/// agreement target.
pub const RECESSION_T_LADDER: [f64; 3] = [1e6, 1e7, 1e8];

/// Weight w(x) = 1 + |x|^alpha on [a, b] with a < 0 < b, so the unique
/// minimum m = 1 sits at the interior point c = 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HoelderWeight {
    alpha: f64,
    a: f64,
    b: f64,
}

impl HoelderWeight {
    pub fn new(alpha: f64, a: f64, b: f64) -> Result<Self, DomainError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(DomainError::InvalidAlpha(alpha));
        }
        if !(a < 0.0 && 0.0 < b) {
            return Err(DomainError::InvalidInterval { a, b });
        }
        Ok(Self { alpha, a, b })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }
    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        1.0 + x.abs().powf(self.alpha)
    }

    /// Minimum value m of w on [a, b].
    #[inline]
    pub fn min_value(&self) -> f64 {
        1.0
    }

    /// The unique minimizer c of w.
    #[inline]
    pub fn min_point(&self) -> f64 {
        0.0
    }

    /// Maximum of w over [a, b], attained at the endpoint farther from 0.
    pub fn max_value(&self) -> f64 {
        self.eval(self.a).max(self.eval(self.b))
    }
}

/// F(x, z) = w(x) f(z) together with its z-derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonAutonomousIntegrand {
    pub profile: MuEllipticProfile,
    pub weight: HoelderWeight,
}

impl NonAutonomousIntegrand {
    pub fn new(profile: MuEllipticProfile, weight: HoelderWeight) -> Self {
        Self { profile, weight }
    }

    /// Convenience constructor straight from (mu, alpha) on [a, b].
    pub fn example(mu: f64, alpha: f64, a: f64, b: f64) -> Result<Self, DomainError> {
        Ok(Self::new(MuEllipticProfile::new(mu)?, HoelderWeight::new(alpha, a, b)?))
    }

    #[inline]
    pub fn eval(&self, x: f64, z: f64) -> f64 {
        self.weight.eval(x) * self.profile.f(z)
    }

    #[inline]
    pub fn dz(&self, x: f64, z: f64) -> f64 {
        self.weight.eval(x) * self.profile.fprime(z)
    }

    #[inline]
    pub fn dzz(&self, x: f64, z: f64) -> f64 {
        self.weight.eval(x) * self.profile.fsecond(z)
    }
}

/// How to sample one axis for hypothesis verification.
#[derive(Clone, Copy, Debug)]
pub struct SampleSpec {
    /// deterministic sample count (log-spaced magnitudes for z, linear for x)
    pub count: usize,
    pub lo: f64,
    pub hi: f64,
    /// extra seeded-random samples on top of the deterministic sweep
    pub random: usize,
}

impl SampleSpec {
    /// Default z sweep: log-spaced magnitudes 1e-3..1e3, both signs,
    /// plus 0 and the seam points +-1.
    pub fn default_z() -> Self {
        Self { count: 61, lo: 1e-3, hi: 1e3, random: 40 }
    }

    /// Default x sweep over [a, b].
    pub fn default_x(a: f64, b: f64) -> Self {
        Self { count: 41, lo: a, hi: b, random: 40 }
    }
}

fn z_samples(spec: &SampleSpec, rng: &mut SplitMix64) -> Vec<f64> {
    let mut out = Vec::new();
    out.push(0.0);
    out.push(1.0);
    out.push(-1.0);
    let (llo, lhi) = (spec.lo.ln(), spec.hi.ln());
    for i in 0..spec.count {
        let t = if spec.count > 1 { i as f64 / (spec.count - 1) as f64 } else { 0.0 };
        let m = (llo + t * (lhi - llo)).exp();
        out.push(m);
        out.push(-m);
    }
    for _ in 0..spec.random {
        let m = rng.uniform(llo, lhi).exp();
        if rng.next_f64() < 0.5 {
            out.push(m);
        } else {
            out.push(-m);
        }
    }
    out
}

fn x_samples(spec: &SampleSpec, rng: &mut SplitMix64) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..spec.count {
        let t = if spec.count > 1 { i as f64 / (spec.count - 1) as f64 } else { 0.0 };
        out.push(spec.lo + t * (spec.hi - spec.lo));
    }
    for _ in 0..spec.random {
        out.push(rng.uniform(spec.lo, spec.hi));
    }
    out
}

/// A point where a hypothesis check came closest to failing (or failed).
#[derive(Clone, Copy, Debug, Default)]
pub struct Witness {
    pub x: f64,
    pub z: f64,
    /// signed margin of the inequality; negative means violated
    pub margin: f64,
}

/// Outcome of the (H1)-(H3) verification sweep.
#[derive(Clone, Debug)]
pub struct HypothesisReport {
    /// linear-growth constants: c0 |z| - c2 <= F <= c1 (1 + |z|)
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    /// ellipticity constant, derived: lambda = (mu-1)/mu
    pub lambda: f64,
    /// Hoelder constant for D_z F in x; derived bound is 1
    pub hoelder_c: f64,
    /// empirically tight Hoelder ratio observed on the sweep
    pub hoelder_observed: f64,
    pub h1_pass: bool,
    pub h2_pass: bool,
    pub h3_pass: bool,
    pub h1_worst: Witness,
    pub h2_worst: Witness,
    pub h3_worst: Witness,
    pub seed: u64,
    pub samples_checked: usize,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.h1_pass && self.h2_pass && self.h3_pass
    }
}

/// Optional overrides for the verification sweep; force a claimed
/// constant to watch the corresponding check fail with a witness.
#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOverrides {
    pub lambda: Option<f64>,
    pub hoelder_c: Option<f64>,
}

const HYP_SLACK: f64 = 1e-12;

/// Sweep (H1)-(H3) over sampled (x, z) and report constants, pass flags
/// and worst-case witnesses. A violation never panics; it lowers the
/// flag and records the point.
pub fn verify_hypotheses(
    integrand: &NonAutonomousIntegrand,
    z_spec: &SampleSpec,
    x_spec: &SampleSpec,
    seed: u64,
    overrides: VerifyOverrides,
) -> HypothesisReport {
    let profile = &integrand.profile;
    let weight = &integrand.weight;
    let mu = profile.mu();
    let alpha = weight.alpha();

    let mut rng = SplitMix64::new(seed);
    let zs = z_samples(z_spec, &mut rng);
    let xs = x_samples(x_spec, &mut rng);

    // Derived constants.
    // Upper growth: f(z) <= f(1) + |z| because f' < 1, and f(1) < 1,
    // so F <= w_max (1 + |z|).
    let c1 = weight.max_value();
    // Lower growth: with c0 = m/2 the deficit c0|z| - m f(z) is maximized
    // where f'(z) = 1/2, i.e. z* = g(1/2).
    let m = weight.min_value();
    let c0 = 0.5 * m;
    let zstar = profile.g(0.5).expect("1/2 is inside (-1,1)");
    let c2 = (c0 * zstar - m * profile.f(zstar)).max(0.0);

    let lambda_derived = (mu - 1.0) / mu;
    let lambda = overrides.lambda.unwrap_or(lambda_derived);
    let hoelder_c = overrides.hoelder_c.unwrap_or(1.0);

    let mut h1 = (true, Witness { x: 0.0, z: 0.0, margin: f64::INFINITY });
    let mut h2 = (true, Witness { x: 0.0, z: 0.0, margin: f64::INFINITY });
    let mut h3 = (true, Witness { x: 0.0, z: 0.0, margin: f64::INFINITY });
    let mut hoelder_observed: f64 = 0.0;
    let mut checked = 0usize;

    for &z in &zs {
        for &x in &xs {
            checked += 1;
            let fval = integrand.eval(x, z);
            // H1 lower and upper
            let lower = fval - (c0 * z.abs() - c2);
            let upper = c1 * (1.0 + z.abs()) - fval;
            let margin = lower.min(upper);
            if margin < h1.1.margin {
                h1.1 = Witness { x, z, margin };
            }
            if margin < -HYP_SLACK {
                h1.0 = false;
            }
            // H2: w f''(z) (1+z^2)^{mu/2} >= lambda
            let h2_margin = integrand.dzz(x, z) * (1.0 + z * z).powf(0.5 * mu) - lambda;
            if h2_margin < h2.1.margin {
                h2.1 = Witness { x, z, margin: h2_margin };
            }
            if h2_margin < -HYP_SLACK {
                h2.0 = false;
            }
        }
        // H3: |D_z F(x,z) - D_z F(x0,z)| = |f'(z)| |w(x)-w(x0)| <= C |x-x0|^alpha
        let fp = profile.fprime(z).abs();
        for pair in xs.chunks(2) {
            if pair.len() < 2 {
                continue;
            }
            let (x0, x1) = (pair[0], pair[1]);
            if x0 == x1 {
                continue;
            }
            checked += 1;
            let num = fp * (weight.eval(x1) - weight.eval(x0)).abs();
            let den = (x1 - x0).abs().powf(alpha);
            let ratio = num / den;
            hoelder_observed = hoelder_observed.max(ratio);
            let margin = hoelder_c + HYP_SLACK - ratio;
            if margin < h3.1.margin {
                h3.1 = Witness { x: x0, z, margin };
            }
            if ratio > hoelder_c + HYP_SLACK {
                h3.0 = false;
            }
        }
    }

    HypothesisReport {
        c0,
        c1,
        c2,
        lambda,
        hoelder_c,
        hoelder_observed,
        h1_pass: h1.0,
        h2_pass: h2.0,
        h3_pass: h3.0,
        h1_worst: h1.1,
        h2_worst: h2.1,
        h3_worst: h3.1,
        seed,
        samples_checked: checked,
    }
}
