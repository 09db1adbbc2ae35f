//! Covering of the sphere S^{m−1} by random geodesic caps, the dual picture of
//! the projected polytope containing a centred disc.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Error, Result};
use crate::exactlaw::{
    janson_alpha_generic, janson_b_generic, janson_constants, ln_sphere_area, solve_a_tau, Level,
    ModelParams,
};
use crate::mc::{self, Estimate};
use crate::polysim::{hull2d, poisson_count, signed_inradius};
use crate::specfun::{log_lower_incomplete_beta, log_regularized_incomplete_beta, BetaArgs, LogValue};

/// Points used by the approximate m = 3 coverage check.
pub const SPHERE_GRID_POINTS: usize = 100_000;

/// Caps process seen from level r: intensity, scale a and the law of the radii.
#[derive(Debug, Clone, PartialEq)]
pub struct CoveringInstance {
    d: u64,
    m: u32,
    level: Level,
    a: f64,
    log_lambda: LogValue,
    p: f64,
    q: f64,
    ln_norm: f64,
    /// atan(a√d) = arccos(r), the largest cap angle.
    max_angle: f64,
}

pub fn build_instance(params: &ModelParams, m: u32, r: f64) -> Result<CoveringInstance> {
    if !(r > 0.0 && r < 1.0) {
        return domain(format!("level must lie in (0,1), got {r}"));
    }
    let d = params.d();
    if m < 2 || m as u64 >= d {
        return domain(format!("need 2 <= m < d, got m={m}, d={d}"));
    }
    let level = Level::from_r(r)?;
    let df = d as f64;
    let p = 1.0 + 0.5 * (df - m as f64);
    let q = 0.5 * m as f64;
    let args = BetaArgs::with_complement(level.one_minus_r2(), level.r2(), p, q)?;
    let log_lambda = LogValue::new(params.l() + log_regularized_incomplete_beta(&args)?.ln())?;
    let ln_norm = log_lower_incomplete_beta(&args)?.ln();
    let a = level.one_minus_r2().sqrt() / (r * df.sqrt());
    let max_angle = (a * df.sqrt()).atan();
    Ok(CoveringInstance { d, m, level, a, log_lambda, p, q, ln_norm, max_angle })
}

impl CoveringInstance {
    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn r(&self) -> f64 {
        self.level.r()
    }

    pub fn level(&self) -> &Level {
        &self.level
    }

    /// a = √(1−r²)/(r√d).
    pub fn a(&self) -> f64 {
        self.a
    }

    /// ln Λ, the expected number of caps.
    pub fn log_lambda(&self) -> LogValue {
        self.log_lambda
    }

    /// arccos(r)/a: radii beyond this have zero probability.
    pub fn rho_max(&self) -> f64 {
        self.max_angle / self.a
    }

    /// ln P(R > ρ).
    pub fn log_tail(&self, rho: f64) -> Result<f64> {
        if rho.is_nan() {
            return domain("radius is NaN");
        }
        if rho <= 0.0 {
            return Ok(0.0);
        }
        let t = self.a * rho;
        if t >= self.max_angle {
            return Ok(f64::NEG_INFINITY);
        }
        let tan2 = t.tan().powi(2);
        let df = self.d as f64;
        if self.m == 2 {
            return Ok(0.5 * df * (-tan2 / (df * self.a * self.a)).ln_1p());
        }
        let r2 = self.level.r2();
        let x = self.level.one_minus_r2() - r2 * tan2;
        if !(x > 0.0) {
            return Ok(f64::NEG_INFINITY);
        }
        let args = BetaArgs::with_complement(x, r2 * (1.0 + tan2), self.p, self.q)?;
        Ok((log_lower_incomplete_beta(&args)?.ln() - self.ln_norm).min(0.0))
    }

    pub fn tail(&self, rho: f64) -> Result<f64> {
        Ok(self.log_tail(rho)?.exp())
    }
}

/// ρ with P(R > ρ) = 1 − u, by bisection on [0, arccos(r)/a].
pub fn sample_radius(inst: &CoveringInstance, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return domain(format!("quantile must lie in (0,1), got {u}"));
    }
    let target = (-u).ln_1p();
    let (mut lo, mut hi) = (0.0, inst.rho_max());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = inst.log_tail(mid)?;
        if v > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * inst.rho_max() {
            break;
        }
    }
    let rho = 0.5 * (lo + hi);
    let err = (inst.tail(rho)? - (1.0 - u)).abs();
    if err > 1e-10 && hi - lo > 1e-12 * inst.rho_max() {
        return Err(Error::Numeric(format!("radius bisection residual {err}")));
    }
    Ok(rho)
}

/// Closed-form m = 2 radius with P(R > ρ) = v: aρ = atan(√((1−r²)(1−v^{2/d}))/r).
pub fn sample_radius_m2(inst: &CoveringInstance, v: f64) -> f64 {
    debug_assert_eq!(inst.m, 2);
    let df = inst.d as f64;
    let gap = -inst.level.one_minus_r2() * (2.0 * v.ln() / df).exp_m1();
    (gap.max(0.0).sqrt() / inst.r()).atan() / inst.a
}

/// Arc on the circle: center angle in [0, 2π) and positive half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub center: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ArcSet {
    pub arcs: Vec<Arc>,
}

impl ArcSet {
    pub fn new(arcs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut out = Vec::new();
        for (c, w) in arcs {
            if !(w > 0.0) || !c.is_finite() {
                return domain(format!("invalid arc ({c}, {w})"));
            }
            out.push(Arc { center: c.rem_euclid(TAU), half_width: w });
        }
        Ok(ArcSet { arcs: out })
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }
}

/// Poisson(Λ) arcs with uniform centers and half-widths a·ρ.
pub fn sample_covering_m2_with<R: Rng + ?Sized>(inst: &CoveringInstance, rng: &mut R) -> Result<ArcSet> {
    if inst.m != 2 {
        return domain("arc sampling is defined for m = 2");
    }
    let n = poisson_count(inst.log_lambda.ln(), rng)?;
    let mut arcs = Vec::with_capacity(n);
    for _ in 0..n {
        let center = TAU * rng.random::<f64>();
        let v = 1.0 - rng.random::<f64>();
        arcs.push(Arc { center, half_width: inst.a * sample_radius_m2(inst, v) });
    }
    Ok(ArcSet { arcs })
}

pub fn sample_covering_m2(inst: &CoveringInstance, seed: u64) -> Result<ArcSet> {
    sample_covering_m2_with(inst, &mut mc::stream(seed, 0))
}

/// Whether the closed arcs cover the whole circle.
pub fn is_circle_covered(set: &ArcSet) -> bool {
    if set.arcs.is_empty() {
        return false;
    }
    if set.arcs.iter().any(|a| a.half_width >= PI) {
        return true;
    }
    let mut spans: Vec<(f64, f64)> = set
        .arcs
        .iter()
        .map(|a| {
            let lo = (a.center - a.half_width).rem_euclid(TAU);
            (lo, lo + 2.0 * a.half_width)
        })
        .collect();
    spans.sort_by(|x, y| x.0.total_cmp(&y.0));
    let start = spans[0].0;
    // arcs running past 2π also cover the beginning of the sweep
    let wrap = spans.iter().map(|s| s.1 - TAU).fold(f64::NEG_INFINITY, f64::max);
    let mut reach = spans[0].1.max(wrap);
    for &(lo, hi) in &spans[1..] {
        if lo > reach {
            return false;
        }
        reach = reach.max(hi);
    }
    reach >= start + TAU
}

/// Length of the circle left uncovered by the arcs.
pub fn uncovered_measure(set: &ArcSet) -> f64 {
    if set.arcs.iter().any(|a| a.half_width >= PI) {
        return 0.0;
    }
    let mut spans: Vec<(f64, f64)> = Vec::with_capacity(2 * set.arcs.len());
    for a in &set.arcs {
        let lo = (a.center - a.half_width).rem_euclid(TAU);
        let hi = lo + 2.0 * a.half_width;
        if hi > TAU {
            spans.push((lo, TAU));
            spans.push((0.0, hi - TAU));
        } else {
            spans.push((lo, hi));
        }
    }
    spans.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut covered = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (lo, hi) in spans {
        match cur {
            Some((cl, ch)) if lo <= ch => cur = Some((cl, ch.max(hi))),
            Some((cl, ch)) => {
                covered += ch - cl;
                cur = Some((lo, hi));
            }
            None => cur = Some((lo, hi)),
        }
    }
    if let Some((cl, ch)) = cur {
        covered += ch - cl;
    }
    (TAU - covered).max(0.0)
}

fn neumaier_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in terms {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

/// Probability that n uniform arcs, each a fraction `ell` of the circle, cover it:
/// Σ_k (−1)^k C(n,k) (1 − k·ell)₊^{n−1}.
///
/// Summed in floating point while no term exceeds 1; otherwise the sum is
/// formed exactly in integers from the binary value of `ell`.
pub fn stevens_covering_probability(n: u64, ell: f64) -> Result<f64> {
    if n == 0 {
        return domain("need at least one arc");
    }
    if !(ell > 0.0) {
        return domain(format!("arc fraction must be positive, got {ell}"));
    }
    if ell >= 1.0 {
        return Ok(1.0);
    }
    let nf = n as f64;
    let ln_fact = |k: f64| crate::specfun::ln_gamma_unchecked(k + 1.0);
    let terms: Vec<f64> = (0..=n)
        .map_while(|k| {
            let base = 1.0 - k as f64 * ell;
            if base <= 0.0 {
                return None;
            }
            let ln_c = ln_fact(nf) - ln_fact(k as f64) - ln_fact(nf - k as f64);
            let mag = (ln_c + (nf - 1.0) * base.ln()).exp();
            Some(if k % 2 == 0 { mag } else { -mag })
        })
        .collect();
    let largest = terms.iter().map(|t| t.abs()).fold(0.0, f64::max);
    let p = if largest <= 1.0 { neumaier_sum(terms) } else { stevens_exact(n, ell) };
    Ok(p.clamp(0.0, 1.0))
}

fn stevens_exact(n: u64, ell: f64) -> f64 {
    use num_bigint::BigInt;
    use num_traits::{One, ToPrimitive, Zero};
    // ell = mant·2^{−e} exactly
    let bits = ell.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    let (mant, e) = if raw_exp == 0 {
        (bits & ((1 << 52) - 1), 1074)
    } else {
        ((bits & ((1 << 52) - 1)) | (1 << 52), 1075 - raw_exp)
    };
    let one = BigInt::one() << (e as usize);
    let mant = BigInt::from(mant);
    let mut sum = BigInt::zero();
    let mut binom = BigInt::one();
    for k in 0..=n {
        let base = &one - &mant * BigInt::from(k);
        if base <= BigInt::zero() {
            break;
        }
        let term = &binom * base.pow((n - 1) as u32);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        binom = binom * BigInt::from(n - k) / BigInt::from(k + 1);
    }
    let shift = sum.bits().saturating_sub(64);
    let top = (&sum >> shift).to_f64().unwrap_or(0.0);
    let scale = shift as i64 - e * (n as i64 - 1);
    top * 2f64.powi(scale.clamp(-2000, 2000) as i32)
}

/// Coverage frequency together with whether it came from the grid check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverEstimate {
    pub estimate: Estimate,
    pub approximate: bool,
}

/// Quasi-uniform Fibonacci points on S².
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let rad = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [rad * phi.cos(), rad * phi.sin(), z]
        })
        .collect()
}

/// Tabulated quantile function of the radius law, linear between nodes.
struct RadiusTable {
    rho: Vec<f64>,
    cdf: Vec<f64>,
}

impl RadiusTable {
    fn new(inst: &CoveringInstance, nodes: usize) -> Result<Self> {
        let rho: Vec<f64> = (0..=nodes).map(|k| inst.rho_max() * k as f64 / nodes as f64).collect();
        let cdf = rho.iter().map(|&x| Ok(1.0 - inst.tail(x)?)).collect::<Result<Vec<f64>>>()?;
        Ok(RadiusTable { rho, cdf })
    }

    fn quantile(&self, u: f64) -> f64 {
        let k = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
        self.rho[k - 1] + t * (self.rho[k] - self.rho[k - 1])
    }
}

fn covered_on_grid<R: Rng + ?Sized>(
    inst: &CoveringInstance,
    table: &RadiusTable,
    grid: &[[f64; 3]],
    rng: &mut R,
) -> Result<bool> {
    let n = poisson_count(inst.log_lambda.ln(), rng)?;
    let npts = grid.len();
    let mut hit = vec![false; npts];
    for _ in 0..n {
        let g: [f64; 3] = [StandardNormal.sample(rng), StandardNormal.sample(rng), StandardNormal.sample(rng)];
        let norm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
        let c = [g[0] / norm, g[1] / norm, g[2] / norm];
        let angle = inst.a * table.quantile(rng.random::<f64>());
        if angle >= PI {
            return Ok(true);
        }
        let cos = angle.cos();
        // Fibonacci points are sorted by decreasing z, so the cap's polar band
        // is a contiguous index range
        let polar = c[2].clamp(-1.0, 1.0).acos();
        let z_hi = (polar - angle).max(0.0).cos();
        let z_lo = (polar + angle).min(PI).cos();
        let idx = |z: f64| ((1.0 - z) * npts as f64 / 2.0 - 0.5).clamp(0.0, npts as f64);
        let i0 = idx(z_hi).floor() as usize;
        let i1 = (idx(z_lo).ceil() as usize + 1).min(npts);
        for i in i0..i1 {
            let x = &grid[i];
            if !hit[i] && c[0] * x[0] + c[1] * x[1] + c[2] * x[2] >= cos {
                hit[i] = true;
            }
        }
    }
    Ok(hit.iter().all(|&h| h))
}

/// Fraction of replications in which the caps cover S^{m−1}: exact for m = 2,
/// a grid check for m = 3 (with radii drawn from a tabulated quantile function).
pub fn estimate_covering_probability(inst: &CoveringInstance, n_reps: usize, seed: u64) -> Result<CoverEstimate> {
    if n_reps == 0 {
        return domain("need at least one replication");
    }
    let mut hits = 0;
    match inst.m {
        2 => {
            for i in 0..n_reps {
                let arcs = sample_covering_m2_with(inst, &mut mc::stream(seed, i as u64))?;
                hits += is_circle_covered(&arcs) as usize;
            }
            Ok(CoverEstimate { estimate: Estimate::from_bernoulli(hits, n_reps), approximate: false })
        }
        3 => {
            let grid = fibonacci_sphere(SPHERE_GRID_POINTS);
            let table = RadiusTable::new(inst, 4096)?;
            for i in 0..n_reps {
                hits += covered_on_grid(inst, &table, &grid, &mut mc::stream(seed, i as u64))? as usize;
            }
            Ok(CoverEstimate { estimate: Estimate::from_bernoulli(hits, n_reps), approximate: true })
        }
        m => domain(format!("coverage is implemented for m = 2 and m = 3, got {m}")),
    }
}

/// Projections onto the first coordinate plane of the Poisson points whose
/// projection has norm at least `r_min`, for d-dimensional uniform points.
pub fn sample_projected_annulus<R: Rng + ?Sized>(
    params: &ModelParams,
    r_min: f64,
    rng: &mut R,
) -> Result<Vec<[f64; 2]>> {
    let inst = build_instance(params, 2, r_min)?;
    let n = poisson_count(inst.log_lambda.ln(), rng)?;
    let df = params.d() as f64;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        // P(‖X′‖² > 1 − (1−r_min²)v^{2/d} | ‖X′‖ ≥ r_min) = v
        let v = 1.0 - rng.random::<f64>();
        let t2 = 1.0 - inst.level.one_minus_r2() * (2.0 * v.ln() / df).exp();
        let t = t2.sqrt();
        let theta = TAU * rng.random::<f64>();
        out.push([t * theta.cos(), t * theta.sin()]);
    }
    Ok(out)
}

/// One draw of h_{d,2}, built from the points projecting outside the disc of
/// radius `r_min`. Exact whenever the value is at least `r_min`; otherwise
/// returns None (the value is then only known to be below `r_min`).
pub fn sample_sf_d2_annulus<R: Rng + ?Sized>(params: &ModelParams, r_min: f64, rng: &mut R) -> Result<Option<f64>> {
    let pts = sample_projected_annulus(params, r_min, rng)?;
    let h = signed_inradius(&hull2d(&pts));
    Ok(if h >= r_min { Some(h) } else { None })
}

/// Law of the cap radii entering the Janson functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusMoments {
    /// Standard Rayleigh radii, with the closed-form α and b.
    Rayleigh,
    /// Arbitrary radii through E[R^{D−1}] and E[R^D].
    Custom { moment_dm1: f64, moment_d: f64 },
}

/// J = b a^D v Λ − ln(1/(b a^D)) − D ln ln(1/(b a^D)) − ln α on S^{m−1},
/// where `log_intensity` is the per-unit-area intensity ln Λ and v = mκ_m.
pub fn janson_functional(log_intensity: LogValue, m: u32, a: f64, moments: RadiusMoments) -> Result<f64> {
    if m < 2 {
        return domain("m must be >= 2");
    }
    if !(a > 0.0) {
        return domain("scale a must be positive");
    }
    let dim = m - 1;
    let df = dim as f64;
    let ln_v = ln_sphere_area(m);
    let (alpha, b) = match moments {
        RadiusMoments::Rayleigh => {
            let c = janson_constants(m)?;
            (c.alpha, c.b)
        }
        RadiusMoments::Custom { moment_dm1, moment_d } => (
            janson_alpha_generic(dim, moment_dm1, moment_d)?,
            janson_b_generic(dim, moment_d, ln_v.exp())?,
        ),
    };
    let ln_bad = b.ln() + df * a.ln();
    let big = -ln_bad;
    if !(big > 0.0) {
        return domain(format!("need b·a^D < 1, got ln(b·a^D) = {ln_bad}"));
    }
    let lead = (ln_bad + ln_v + log_intensity.ln()).exp();
    Ok(lead - big - df * big.ln() - alpha.ln())
}

/// Janson functional evaluated at the scale solving the a(τ) equation.
#[derive(Debug, Clone, PartialEq)]
pub struct JansonCheck {
    pub tau: f64,
    pub a: f64,
    pub r: f64,
    pub log_lambda: LogValue,
    pub j: f64,
}

pub fn janson_check(params: &ModelParams, m: u32, tau: f64) -> Result<JansonCheck> {
    let sol = solve_a_tau(params, m, tau)?;
    let inst = build_instance(params, m, sol.level.r())?;
    let per_unit = LogValue::new(inst.log_lambda.ln() - ln_sphere_area(m))?;
    let j = janson_functional(per_unit, m, inst.a, RadiusMoments::Rayleigh)?;
    Ok(JansonCheck { tau, a: inst.a, r: inst.r(), log_lambda: inst.log_lambda, j })
}

/// ln sup over a log-spaced grid of P(R_a > ρ)/P(cR > ρ) for Rayleigh R.
pub fn log_tail_ratio_sup<F: Fn(f64) -> Result<f64>>(log_tail_a: F, c: f64, rho_lo: f64, rho_hi: f64, n: usize) -> Result<f64> {
    let (l0, l1) = (rho_lo.ln(), rho_hi.ln());
    let mut best = f64::NEG_INFINITY;
    for k in 0..n {
        let rho = (l0 + (l1 - l0) * k as f64 / (n - 1) as f64).exp();
        best = best.max(log_tail_a(rho)? + rho * rho / (2.0 * c * c));
    }
    Ok(best)
}

// 5-point Gauss-Legendre nodes and weights on [−1, 1].
const GL_X: [f64; 5] = [0.0, 0.538_469_310_105_683_1, -0.538_469_310_105_683_1, 0.906_179_845_938_664, -0.906_179_845_938_664];
const GL_W: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
    0.236_926_885_056_189_08,
];

/// W₁(ln R_a, ln R) = ∫ |P(R_a > ρ) − e^{−ρ²/2}| dρ/ρ over (0, rho_hi), by
/// composite Gauss-Legendre with the panels refined around sign changes.
pub fn w1_log_radius<F: Fn(f64) -> Result<f64>>(log_tail_a: F, rho_hi: f64, panels: usize) -> Result<f64> {
    let diff = |rho: f64| -> Result<f64> { Ok(log_tail_a(rho)?.exp() - (-0.5 * rho * rho).exp()) };
    let h = rho_hi / panels as f64;
    let mut parts = Vec::with_capacity(panels);
    let mut prev = diff(0.0)?;
    for k in 0..panels {
        let (lo, hi) = (k as f64 * h, (k + 1) as f64 * h);
        let next = diff(hi)?;
        let mut breaks = vec![lo, hi];
        if prev * next < 0.0 {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                if diff(mid)? * prev < 0.0 {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            breaks.insert(1, 0.5 * (a + b));
        }
        for w in breaks.windows(2) {
            let (c, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            let mut s = 0.0;
            for (x, wt) in GL_X.iter().zip(GL_W) {
                let rho = c + half * x;
                s += wt * diff(rho)?.abs() / rho;
            }
            parts.push(half * s);
        }
        prev = next;
    }
    Ok(neumaier_sum(parts))
}

/// Numerical check of the radius-law hypotheses behind the covering limit.
#[derive(Debug, Clone, PartialEq)]
pub struct AppendixReport {
    pub d: u64,
    pub m: u32,
    pub r: f64,
    pub a: f64,
    pub w: f64,
    /// sup_ρ P(R_a > ρ)/P((1 + w/ln(1/a))R > ρ) on the grid.
    pub sup_ratio: f64,
    pub ratio_ok: bool,
    pub w1: f64,
    /// Bound on the part of W₁ beyond the integration range.
    pub w1_truncation: f64,
    /// ln²(dr²)/(dr²).
    pub bound_shape: f64,
    pub w1_scaled: f64,
    pub gamma: f64,
    /// a + ln^{2+γ}(1/a)/d.
    pub decay: f64,
}

pub const APPENDIX_GAMMA: f64 = 0.25;
const TAIL_CUTOFF: f64 = 1e-12;

pub fn verify_appendix_hypotheses(params: &ModelParams, m: u32, r: f64, w: f64) -> Result<AppendixReport> {
    if !(w > 0.0) {
        return domain("w must be positive");
    }
    let inst = build_instance(params, m, r)?;
    let a = inst.a;
    if !(a < 1.0) {
        return domain(format!("scale a = {a} is not small"));
    }
    let ln_inv_a = -a.ln();
    let c = 1.0 + w / ln_inv_a;
    let tail = |rho: f64| inst.log_tail(rho);
    let rho_max = inst.rho_max();

    // both tails negligible beyond rho_hi
    let rayleigh_end = (-2.0 * TAIL_CUTOFF.ln()).sqrt();
    let mut rho_hi = rayleigh_end.min(rho_max);
    if rho_hi < rho_max && tail(rho_hi)? > TAIL_CUTOFF.ln() {
        let (mut lo, mut hi) = (rho_hi, rho_max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if tail(mid)? > TAIL_CUTOFF.ln() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        rho_hi = hi;
    }
    let rayleigh_rest = (-0.5 * rho_hi * rho_hi).exp() / (rho_hi * rho_hi);
    let a_rest = if rho_max > rho_hi { TAIL_CUTOFF * (rho_max / rho_hi).ln() } else { 0.0 };

    let sup_log = log_tail_ratio_sup(tail, c, 1e-4, rho_max.min(rayleigh_end * c * 1.5), 10_000)?;
    let w1 = w1_log_radius(tail, rho_hi, 2000)?;
    let dr2 = params.d() as f64 * r * r;
    let bound_shape = dr2.ln().powi(2) / dr2;
    Ok(AppendixReport {
        d: params.d(),
        m,
        r,
        a,
        w,
        sup_ratio: sup_log.exp(),
        ratio_ok: sup_log <= 1e-9f64.ln_1p(),
        w1,
        w1_truncation: rayleigh_rest + a_rest,
        bound_shape,
        w1_scaled: w1 / bound_shape,
        gamma: APPENDIX_GAMMA,
        decay: a + ln_inv_a.powf(2.0 + APPENDIX_GAMMA) / params.d() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_basic_cases() {
        assert!(!is_circle_covered(&ArcSet::default()));
        assert!(is_circle_covered(&ArcSet::new([(1.0, PI)]).unwrap()));
        assert!(!is_circle_covered(&ArcSet::new([(0.0, 0.1), (3.0, 0.1)]).unwrap()));
        // three arcs of half-width π/3 + tiny meeting at the seams, one across 0
        let w = PI / 3.0 + 1e-9;
        let set = ArcSet::new([(0.0, w), (TAU / 3.0, w), (2.0 * TAU / 3.0, w)]).unwrap();
        assert!(is_circle_covered(&set));
        assert_eq!(uncovered_measure(&set), 0.0);
        let short = ArcSet::new([(0.0, 1.0), (TAU / 3.0, 1.0), (2.0 * TAU / 3.0, 1.0)]).unwrap();
        assert!(!is_circle_covered(&short));
        assert!((uncovered_measure(&short) - (TAU - 6.0)).abs() < 1e-12);
    }

    #[test]
    fn stevens_small() {
        assert_eq!(stevens_covering_probability(1, 0.5).unwrap(), 0.0);
        assert_eq!(stevens_covering_probability(3, 1.0).unwrap(), 1.0);
        // n = 2: covered iff the second center lands in a window of length 2ℓ − 1
        let p = stevens_covering_probability(2, 0.7).unwrap();
        assert!((p - 0.4).abs() < 1e-14);
        assert!((stevens_exact(2, 0.7) - 0.4).abs() < 1e-15);
        // heavy cancellation, mpmath references
        let p = stevens_covering_probability(300, 0.01).unwrap();
        assert!((p / 2.906_944_250_375_928_4e-10 - 1.0).abs() < 1e-12);
        let p = stevens_covering_probability(1000, 0.02).unwrap();
        assert!((p - 0.999_998_282_687_341_8).abs() < 1e-15);
        let p = stevens_covering_probability(50, 0.05).unwrap();
        assert!((p - 0.001_048_174_266_700_110_1).abs() < 1e-15);
    }
}
