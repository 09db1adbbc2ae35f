//! Exact one-directional law of the support function, Wendel's probability,
//! regime classification, Gumbel normalizers and the implicit root equations.

use std::f64::consts::{LN_2, PI};

use crate::error::{domain, Error, Result};
use crate::specfun::{
    self, ln_ball_volume, ln_gamma_unchecked, ln_one_minus_exp, BetaArgs, LogValue,
};

/// Margin δ in the finite-d surrogate L > ln(2d) + δ of hypothesis (H).
pub const H_DELTA: f64 = 0.009_950_330_853_168_083; // ln(1.01)

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Dimension and intensity, with L = ln(λκ_d).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    d: u64,
    l: f64,
}

impl ModelParams {
    pub fn new(d: u64, l: f64) -> Result<Self> {
        if d < 2 {
            return domain(format!("dimension must be >= 2, got {d}"));
        }
        if !l.is_finite() {
            return domain(format!("L must be finite, got {l}"));
        }
        Ok(ModelParams { d, l })
    }

    /// From the mean number of points λκ_d.
    pub fn from_mean_count(d: u64, lambda_kappa: f64) -> Result<Self> {
        if !(lambda_kappa > 0.0) {
            return domain("mean count must be positive");
        }
        Self::new(d, lambda_kappa.ln())
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub(crate) fn df(&self) -> f64 {
        self.d as f64
    }

    /// ln λ = L − ln κ_d.
    pub fn ln_lambda(&self) -> f64 {
        self.l - ln_ball_volume(self.df())
    }

    /// Finite-d surrogate of hypothesis (H).
    pub fn hypothesis_h(&self) -> bool {
        self.l - (2.0 * self.df()).ln() > H_DELTA
    }

    /// Regime-specific warning: the subcritical multi-directional limit needs
    /// ln λκ_d ≫ ln d.
    pub fn subcritical_warning(&self) -> bool {
        self.l <= 2.0 * self.df().ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegimeKind {
    Subcritical,
    Critical,
    Supercritical,
}

impl RegimeKind {
    pub fn name(&self) -> &'static str {
        match self {
            RegimeKind::Subcritical => "subcritical",
            RegimeKind::Critical => "critical",
            RegimeKind::Supercritical => "supercritical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime {
    kind: RegimeKind,
    x: Option<f64>,
}

impl Regime {
    pub fn subcritical() -> Self {
        Regime { kind: RegimeKind::Subcritical, x: None }
    }

    pub fn supercritical() -> Self {
        Regime { kind: RegimeKind::Supercritical, x: None }
    }

    pub fn critical(x: f64) -> Result<Self> {
        if !(x > 0.0) || !x.is_finite() {
            return domain(format!("critical regime needs x in (0, inf), got {x}"));
        }
        Ok(Regime { kind: RegimeKind::Critical, x: Some(x) })
    }

    pub fn kind(&self) -> RegimeKind {
        self.kind
    }

    pub fn x(&self) -> Option<f64> {
        self.x
    }
}

/// A level r ∈ [0,1] carried together with s = −ln(1−r²), which resolves r
/// near 1 where r itself rounds to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    r: f64,
    s: f64,
}

impl Level {
    pub fn from_r(r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return domain(format!("level must lie in [0,1], got {r}"));
        }
        let one_minus = (1.0 - r) * (1.0 + r);
        Ok(Level { r, s: -one_minus.ln() })
    }

    pub fn from_s(s: f64) -> Result<Self> {
        if !(s >= 0.0) {
            return domain(format!("s = -ln(1-r^2) must be >= 0, got {s}"));
        }
        Ok(Level { r: (-(-s).exp_m1()).sqrt(), s })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// s = −ln(1−r²) = 2·ln(1/√(1−r²)).
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn one_minus_r2(&self) -> f64 {
        (-self.s).exp()
    }

    pub fn r2(&self) -> f64 {
        if self.s < LN_2 {
            -(-self.s).exp_m1()
        } else {
            self.r * self.r
        }
    }

    pub fn one_minus_r(&self) -> f64 {
        self.one_minus_r2() / (1.0 + self.r)
    }

    fn beta_args(&self, p: f64, q: f64) -> Result<BetaArgs> {
        BetaArgs::with_complement(self.one_minus_r2(), self.r2(), p, q)
    }
}

fn cap_beta_args(d: f64, level: &Level) -> Result<BetaArgs> {
    level.beta_args((d + 1.0) / 2.0, 0.5)
}

/// ln |C^d(r;u)| = ln κ_{d−1} − ln 2 + ln B(1−r²; (d+1)/2, 1/2).
pub fn log_cap_volume(d: u64, r: f64) -> Result<LogValue> {
    if d < 2 {
        return domain("cap volume needs d >= 2");
    }
    let level = Level::from_r(r)?;
    log_cap_volume_at(d, &level)
}

pub fn log_cap_volume_at(d: u64, level: &Level) -> Result<LogValue> {
    let df = d as f64;
    let beta = specfun::log_lower_incomplete_beta(&cap_beta_args(df, level)?)?;
    if beta.is_zero() {
        return Ok(LogValue::ZERO);
    }
    LogValue::new(ln_ball_volume(df - 1.0) - LN_2 + beta.ln())
}

/// ln P(h ≤ r) = −λ|C^d(r;u)|.
pub fn log_sf_cdf(params: &ModelParams, r: f64) -> Result<LogValue> {
    let level = Level::from_r(r)?;
    log_sf_cdf_at(params, &level)
}

pub fn log_sf_cdf_at(params: &ModelParams, level: &Level) -> Result<LogValue> {
    let cap = log_cap_volume_at(params.d, level)?;
    if cap.is_zero() {
        return Ok(LogValue::ONE);
    }
    LogValue::new(-(params.ln_lambda() + cap.ln()).exp())
}

const INVERSE_MAX_ITER: usize = 200;
const INVERSE_TOL: f64 = 1e-10;

/// Level r with ln P(h ≤ r) = ln u. Quantiles at or below the atom
/// P(h ≤ 0) map to r = 0.
pub fn sf_inverse_cdf(params: &ModelParams, u: f64) -> Result<f64> {
    Ok(sf_inverse_level(params, u)?.r())
}

pub fn sf_inverse_level(params: &ModelParams, u: f64) -> Result<Level> {
    if !(u > 0.0 && u < 1.0) {
        return domain(format!("quantile must lie in (0,1), got {u}"));
    }
    let target = u.ln();
    let cdf = |s: f64| -> Result<f64> { Ok(log_sf_cdf_at(params, &Level::from_s(s)?)?.ln()) };
    if cdf(0.0)? >= target {
        return Level::from_s(0.0);
    }
    let mut iter = 0;
    let (mut lo, mut hi) = (0.0, 1.0);
    while cdf(hi)? < target {
        lo = hi;
        hi *= 2.0;
        iter += 1;
        if iter >= INVERSE_MAX_ITER {
            return Err(Error::RootBracket("inverse CDF upper bracket not found".into()));
        }
    }
    while iter < INVERSE_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = cdf(mid)?;
        let width = Level::from_s(hi)?.r() - Level::from_s(lo)?.r();
        if (v - target).abs() <= INVERSE_TOL && width <= 1e-12 {
            return Level::from_s(mid);
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
        iter += 1;
    }
    Level::from_s(0.5 * (lo + hi))
}

/// Exact power-of-two rational num / 2^log2_den.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dyadic {
    pub num: u128,
    pub log2_den: u32,
}

impl Dyadic {
    pub fn to_f64(self) -> f64 {
        self.num as f64 * 2f64.powi(-(self.log2_den as i32))
    }
}

/// Exact Wendel probability as a dyadic rational, available while n−1 ≤ 120.
pub fn wendel_exact(d: u64, n: u64) -> Option<Dyadic> {
    if n <= d {
        return Some(Dyadic { num: 0, log2_den: 0 });
    }
    let m = n - 1;
    if m > 120 {
        return None;
    }
    let mut binom: u128 = 1;
    let mut below: u128 = 0;
    for k in 0..d.min(m + 1) {
        below += binom;
        binom = binom * (m - k) as u128 / (k + 1) as u128;
    }
    let total: u128 = 1u128 << m;
    Some(Dyadic { num: total - below, log2_den: m as u32 })
}

fn ln_binom_half_pmf(m: f64, k: f64) -> f64 {
    ln_gamma_unchecked(m + 1.0) - ln_gamma_unchecked(k + 1.0) - ln_gamma_unchecked(m - k + 1.0)
        - m * LN_2
}

/// P(0 ∈ conv of n i.i.d. symmetric points in general position in ℝ^d)
/// = P(Bin(n−1, ½) ≥ d).
pub fn wendel_origin_probability(d: u64, n: u64) -> Result<f64> {
    if d < 1 {
        return domain("Wendel formula needs d >= 1");
    }
    if let Some(q) = wendel_exact(d, n) {
        return Ok(q.to_f64());
    }
    Ok(binomial_half_upper_tail(n - 1, d))
}

// P(Bin(m, ½) ≥ d), summing the smaller side outward from its largest term.
fn binomial_half_upper_tail(m: u64, d: u64) -> f64 {
    if d == 0 {
        return 1.0;
    }
    if d > m {
        return 0.0;
    }
    let mf = m as f64;
    let lower_side = ((d - 1) as f64) < mf / 2.0;
    let (start, mut k) = if lower_side { ((d - 1) as f64, d - 1) } else { (d as f64, d) };
    let ln_first = ln_binom_half_pmf(mf, start);
    let mut term = 1.0;
    let mut sum = 1.0;
    loop {
        if lower_side {
            if k == 0 {
                break;
            }
            term *= k as f64 / (mf - k as f64 + 1.0);
            k -= 1;
        } else {
            if k == m {
                break;
            }
            term *= (mf - k as f64) / (k as f64 + 1.0);
            k += 1;
        }
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    let ln_side = ln_first + sum.ln();
    if lower_side {
        ln_one_minus_exp(ln_side.min(0.0)).exp()
    } else {
        ln_side.exp().min(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OriginProbability {
    pub value: f64,
    /// Set when the value comes from the normal-tail approximation.
    pub approximate: bool,
}

/// P(0 ∈ K) = Σₙ Poisson(λκ_d)(n) · P(Bin(n−1, ½) ≥ d).
pub fn origin_probability(params: &ModelParams) -> OriginProbability {
    let mu = params.l.exp();
    let d = params.d;
    if mu == 0.0 {
        return OriginProbability { value: 0.0, approximate: false };
    }
    if mu > 1e6 {
        // S_{N−1} is close to Poisson(μ/2); bound the miss by its normal tail
        let z = (d as f64 - 0.5 * mu) / (0.5 * mu).sqrt();
        let eps = 0.5 * libm::erfc(-z / std::f64::consts::SQRT_2);
        return OriginProbability { value: 1.0 - eps, approximate: true };
    }
    let sigma = mu.sqrt();
    let lo = (mu - 12.0 * sigma - 1.0).floor().max(0.0) as u64;
    let hi = (mu + 12.0 * sigma + 10.0).ceil() as u64;
    let ln_mu = mu.ln();
    let ln_w = |n: u64| n as f64 * ln_mu - mu - ln_gamma_unchecked(n as f64 + 1.0);
    let ln_w_max = ln_w((mu.floor() as u64).clamp(lo, hi));

    // T(n) = P(Bin(n−1, ½) ≥ d) advances by T(n+1) = T(n) + ½·pmf_{n−1}(d−1)
    let (mut t, mut t_c) = (wendel_origin_probability(d, lo).unwrap_or(0.0), 0.0f64);
    let (mut num, mut num_c) = (0.0f64, 0.0f64);
    let (mut den, mut den_c) = (0.0f64, 0.0f64);
    for n in lo..=hi {
        if n > lo {
            if n - 1 <= 120 {
                t = wendel_exact(d, n).map(|q| q.to_f64()).unwrap_or(t);
            } else if n - 2 + 1 >= d {
                let m = (n - 2) as f64;
                kahan(&mut t, &mut t_c, 0.5 * ln_binom_half_pmf(m, (d - 1) as f64).exp());
            }
        }
        let w = (ln_w(n) - ln_w_max).exp();
        kahan(&mut num, &mut num_c, w * t.min(1.0));
        kahan(&mut den, &mut den_c, w);
    }
    OriginProbability { value: (num / den).clamp(0.0, 1.0), approximate: false }
}

fn kahan(sum: &mut f64, c: &mut f64, v: f64) {
    let y = v - *c;
    let t = *sum + y;
    *c = (t - *sum) - y;
    *sum = t;
}

const LADDER_START: f64 = 16.0;
const LADDER_STEPS: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeEstimate {
    pub regime: Regime,
    /// Estimated lim L(d)/d (infinite for supercritical).
    pub x_hat: f64,
    /// L(d)/d on the doubling ladder.
    pub ratios: Vec<f64>,
}

/// Classify the regime of a dimension-dependent intensity from L(d)/d along
/// the ladder 16, 32, …, 16·2⁴⁰.
pub fn classify_regime<F: Fn(f64) -> f64>(l_of_d: F) -> Result<RegimeEstimate> {
    let ds: Vec<f64> = (0..=LADDER_STEPS).map(|k| LADDER_START * 2f64.powi(k as i32)).collect();
    let ratios: Vec<f64> = ds.iter().map(|&d| l_of_d(d) / d).collect();
    if ratios.iter().any(|v| !v.is_finite()) {
        return domain("L(d) must be finite along the ladder");
    }
    let n = ratios.len();
    let tail = &ratios[n - 6..];
    let diffs: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
    let last = ratios[n - 1];
    let scale = tail.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    let finish = |x: f64| -> Result<RegimeEstimate> {
        let regime = if x.abs() <= 1e-6 {
            Regime::subcritical()
        } else if x < 0.0 {
            return domain(format!("L(d)/d tends to a negative limit {x}"));
        } else {
            Regime::critical(x)?
        };
        Ok(RegimeEstimate { regime, x_hat: x, ratios: ratios.clone() })
    };

    if diffs.iter().all(|dv| dv.abs() <= 1e-12 * scale) {
        return finish(last);
    }
    // geometric convergence: successive differences shrink by a steady factor
    let q: Vec<f64> = diffs.windows(2).map(|w| w[1] / w[0]).collect();
    let steady = q.iter().all(|&v| v > 0.0 && v < 0.95)
        && q.windows(2).all(|w| (w[1] - w[0]).abs() <= 0.05 * w[0].abs());
    if steady {
        let (a, b, c) = (ratios[n - 3], ratios[n - 2], ratios[n - 1]);
        let denom = (c - b) - (b - a);
        let x = if denom.abs() > 0.0 { c - (c - b) * (c - b) / denom } else { c };
        return finish(x);
    }
    // logarithmic convergence ρ ≈ x + c/ln d
    let lnd: Vec<f64> = ds[n - 6..].iter().map(|d| d.ln()).collect();
    let ext: Vec<f64> = (1..6)
        .map(|i| (tail[i] * lnd[i] - tail[i - 1] * lnd[i - 1]) / (lnd[i] - lnd[i - 1]))
        .collect();
    let spread = ext.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v))
        - ext.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    if spread <= 1e-3 * ext[4].abs().max(1.0) {
        let x = ext[4];
        return if x.abs() <= 1e-3 { finish(0.0) } else { finish(x) };
    }
    if diffs.iter().all(|&dv| dv > 0.0) {
        return Ok(RegimeEstimate {
            regime: Regime::supercritical(),
            x_hat: f64::INFINITY,
            ratios,
        });
    }
    if diffs.iter().all(|&dv| dv < 0.0) && last >= 0.0 {
        return finish(0.0);
    }
    Err(Error::Numeric("L(d)/d does not settle along the ladder".into()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GumbelNormalizers1D {
    /// L/(d+1).
    pub center: f64,
    /// ln 𝔪(d).
    pub ln_m: f64,
}

pub fn gumbel_normalizers_1d(params: &ModelParams, regime: &Regime) -> Result<GumbelNormalizers1D> {
    let d = params.df();
    let l = params.l;
    let ln_m = match regime.kind {
        RegimeKind::Subcritical => {
            if !(l > 0.0) {
                return domain("subcritical normalizer needs L > 0");
            }
            (4.0 * PI * l).ln()
        }
        RegimeKind::Critical => {
            let x = regime.x.ok_or_else(|| Error::Domain("critical regime without x".into()))?;
            LN_2PI + d.ln() + (-(-2.0 * x).exp_m1()).ln()
        }
        RegimeKind::Supercritical => {
            if !(l > 0.0) {
                return domain("supercritical normalizer needs L > 0");
            }
            LN_2PI + d.ln() + (-(-2.0 * l / (d + 1.0)).exp_m1()).ln()
        }
    };
    Ok(GumbelNormalizers1D { center: l / (d + 1.0), ln_m })
}

/// Shared bisection driver for decreasing functions; `f` returns +inf left of
/// its domain.
fn bisect_decreasing<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    what: &str,
) -> Result<f64> {
    let mut steps = 0;
    while !(f(lo) > 0.0) {
        lo *= 0.5;
        steps += 1;
        if steps > 1100 || lo == 0.0 {
            return Err(Error::RootBracket(format!("{what}: no positive value near 0")));
        }
    }
    steps = 0;
    while !(f(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        steps += 1;
        if steps > 1100 || !hi.is_finite() {
            return Err(Error::RootBracket(format!("{what}: no sign change")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v.abs() <= tol {
            return Ok(mid);
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Root of (1−r²)^{(d+1)/2}/r = (√(2πd)/λκ_d)·e^{−τ}, solved in s = −ln(1−r²).
pub fn solve_r_tau(params: &ModelParams, tau: f64) -> Result<Level> {
    if !tau.is_finite() {
        return domain("tau must be finite");
    }
    let s = bisect_decreasing(
        |s| r_tau_residual(params, tau, s),
        1e-3,
        1.0,
        1e-10,
        "r(tau)",
    )?;
    Level::from_s(s)
}

/// ln LHS − ln RHS of the r(τ) equation at s = −ln(1−r²).
pub fn r_tau_residual(params: &ModelParams, tau: f64, s: f64) -> f64 {
    let d = params.df();
    let ln_r = 0.5 * ln_one_minus_exp(-s);
    -0.5 * (d + 1.0) * s - ln_r - 0.5 * (LN_2PI + d.ln()) + params.l + tau
}

/// Constants of the cap covering with Rayleigh radii on S^{m−1}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JansonConstants {
    pub m: u32,
    pub alpha: f64,
    pub b: f64,
    pub a_m: f64,
    pub b_m: f64,
}

pub fn janson_constants(m: u32) -> Result<JansonConstants> {
    if m < 2 {
        return domain("m must be >= 2");
    }
    let mf = m as f64;
    let lg = ln_gamma_unchecked(0.5 * mf);
    let ln_pi = PI.ln();
    let ln_alpha = 0.5 * mf * ln_pi - (mf - 1.0) * LN_2 - lg;
    let ln_b = 0.5 * (mf - 3.0) * LN_2 + lg - 0.5 * ln_pi;
    let ln_am = 0.5 * LN_2 + 0.5 * (mf - 1.0) * ln_pi - (mf - 1.0).ln() - lg;
    let ln_bm = 0.5 * (mf + 1.0) * ln_pi + (mf - 1.0) * (mf - 1.0).ln()
        - 0.5 * (3.0 * mf - 5.0) * LN_2
        - 2.0 * lg;
    Ok(JansonConstants {
        m,
        alpha: ln_alpha.exp(),
        b: ln_b.exp(),
        a_m: ln_am.exp(),
        b_m: ln_bm.exp(),
    })
}

/// α written as π^{(m−1)/2}Γ((m+1)/2)/(m−1)!, the form before Legendre's
/// duplication formula is applied.
pub fn janson_alpha_factorial_form(m: u32) -> f64 {
    let mf = m as f64;
    (0.5 * (mf - 1.0) * PI.ln() + ln_gamma_unchecked(0.5 * (mf + 1.0)) - ln_gamma_unchecked(mf))
        .exp()
}

/// Janson's α(R) for a D-dimensional manifold from E[R^{D−1}] and E[R^D].
pub fn janson_alpha_generic(dim: u32, moment_dm1: f64, moment_d: f64) -> Result<f64> {
    if dim < 1 || !(moment_dm1 > 0.0) || !(moment_d > 0.0) {
        return domain("alpha needs D >= 1 and positive moments");
    }
    let df = dim as f64;
    let ln_ratio = 0.5 * PI.ln() + ln_gamma_unchecked(1.0 + 0.5 * df)
        - ln_gamma_unchecked(0.5 * (df + 1.0));
    Ok((-ln_gamma_unchecked(df + 1.0) + (df - 1.0) * ln_ratio + df * moment_dm1.ln()
        - (df - 1.0) * moment_d.ln())
    .exp())
}

/// Janson's b(R;M) = π^{D/2}E[R^D]/(Γ(1+D/2)·v_M(M)).
pub fn janson_b_generic(dim: u32, moment_d: f64, volume: f64) -> Result<f64> {
    if dim < 1 || !(moment_d > 0.0) || !(volume > 0.0) {
        return domain("b needs D >= 1, positive moment and volume");
    }
    let df = dim as f64;
    Ok((0.5 * df * PI.ln() + moment_d.ln() - ln_gamma_unchecked(1.0 + 0.5 * df) - volume.ln())
        .exp())
}

/// E[R^k] = 2^{k/2}Γ(1+k/2) for the standard Rayleigh law.
pub fn rayleigh_moment(k: f64) -> f64 {
    (0.5 * k * LN_2 + ln_gamma_unchecked(1.0 + 0.5 * k)).exp()
}

/// ln(mκ_m), the log-area of S^{m−1}.
pub fn ln_sphere_area(m: u32) -> f64 {
    let mf = m as f64;
    mf.ln() + ln_ball_volume(mf)
}

/// ln of the per-unit-area cap intensity λκ_d/(mκ_m) that enters the
/// multi-directional equations.
pub fn effective_log_intensity(params: &ModelParams, m: u32) -> f64 {
    params.l - ln_sphere_area(m)
}

fn ln1p_exp(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleSolution {
    pub a: f64,
    /// ln(1/a).
    pub ln_inv_a: f64,
    /// r = (1+da²)^{−1/2}.
    pub level: Level,
}

/// Root a of
/// (√2 π^{(m−1)/2}/Γ(m/2))·Λ·a/(1+1/(da²))^{d/2}
///   = (m−1)ln(1/a) + (m−1)ln ln(1/a) + ln B_m + τ
/// with Λ = λκ_d/(mκ_m), solved by bisection in u = ln(1/a).
pub fn solve_a_tau(params: &ModelParams, m: u32, tau: f64) -> Result<ScaleSolution> {
    if m < 2 || (m as u64) >= params.d {
        return domain(format!("need 2 <= m < d, got m={m}, d={}", params.d));
    }
    if !tau.is_finite() {
        return domain("tau must be finite");
    }
    let u = bisect_decreasing(|u| a_tau_residual(params, m, tau, u), 1.0, 2.0, 1e-12, "a(tau)")?;
    let d = params.df();
    let level = Level::from_s(ln1p_exp(2.0 * u - d.ln()))?;
    Ok(ScaleSolution { a: (-u).exp(), ln_inv_a: u, level })
}

/// ln LHS − ln RHS of the a(τ) equation at u = ln(1/a); +inf where RHS ≤ 0.
pub fn a_tau_residual(params: &ModelParams, m: u32, tau: f64, u: f64) -> f64 {
    let c = janson_constants(m).expect("m >= 2");
    let mf = m as f64;
    let d = params.df();
    let ln_c = 0.5 * LN_2 + 0.5 * (mf - 1.0) * PI.ln() - ln_gamma_unchecked(0.5 * mf);
    let ln_lhs = ln_c + effective_log_intensity(params, m) - u - 0.5 * d * ln1p_exp(2.0 * u - d.ln());
    let rhs = (mf - 1.0) * (u + u.ln()) + c.b_m.ln() + tau;
    if !(rhs > 0.0) || !(u > 0.0) {
        return f64::INFINITY;
    }
    ln_lhs - rhs.ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GumbelNormalizersMD {
    pub m: u32,
    pub a_frak: f64,
    pub b_frak: f64,
    pub s_frak: f64,
}

/// 𝔰 = ln √(d(Λ^{2/d} − 1)), 𝔞 = (m−1)𝔰 ln(A_m Λ/𝔰) − (m−1)𝔰² − (m−1)ln 𝔰 − ln B_m,
/// 𝔟 = (m−1)d𝔰, with Λ = λκ_d/(mκ_m).
pub fn gumbel_normalizers_md(params: &ModelParams, m: u32) -> Result<GumbelNormalizersMD> {
    let c = janson_constants(m)?;
    let d = params.df();
    let l_eff = effective_log_intensity(params, m);
    if !(l_eff > 0.0) {
        return domain("multi-directional normalizers need an intensity above 1");
    }
    let s_frak = 0.5 * (d * (2.0 * l_eff / d).exp_m1()).ln();
    if !(s_frak > 0.0) {
        return domain(format!("s(d) must be positive, got {s_frak}"));
    }
    let k = m as f64 - 1.0;
    let a_frak = k * s_frak * (c.a_m.ln() + l_eff - s_frak.ln()) - k * s_frak * s_frak
        - k * s_frak.ln()
        - c.b_m.ln();
    Ok(GumbelNormalizersMD { m, a_frak, b_frak: k * d * s_frak, s_frak })
}

/// First-order location of h (or h_{d,m}) in each regime.
pub fn predict_regime_value(params: &ModelParams, regime: &Regime) -> Result<f64> {
    let d = params.df();
    match regime.kind {
        RegimeKind::Subcritical => {
            if params.l < 0.0 {
                return domain("subcritical prediction needs L >= 0");
            }
            Ok((2.0 * params.l / d).sqrt())
        }
        RegimeKind::Critical => {
            let x = regime.x.ok_or_else(|| Error::Domain("critical regime without x".into()))?;
            Ok((-(-2.0 * x).exp_m1()).sqrt())
        }
        RegimeKind::Supercritical => Ok(1.0 - predict_one_minus_supercritical(params)),
    }
}

/// ½(λκ_d)^{−2/(d+1)}, the supercritical prediction for 1 − h.
pub fn predict_one_minus_supercritical(params: &ModelParams) -> f64 {
    0.5 * (-2.0 * params.l / (params.df() + 1.0)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wendel_small_cases() {
        assert_eq!(wendel_origin_probability(2, 2).unwrap(), 0.0);
        assert_eq!(wendel_origin_probability(2, 3).unwrap(), 0.25);
        assert_eq!(wendel_origin_probability(1, 2).unwrap(), 0.5);
        assert_eq!(wendel_exact(2, 3), Some(Dyadic { num: 1, log2_den: 2 }));
    }

    #[test]
    fn wendel_tail_paths_meet() {
        // exact rational path against the log-domain tail just past the switch
        for d in [1u64, 5, 40, 60, 90] {
            let exact = wendel_exact(d, 121).unwrap().to_f64();
            let tail = binomial_half_upper_tail(120, d);
            assert!((exact - tail).abs() < 1e-13 * exact.max(1e-300) || (exact - tail).abs() < 1e-15);
        }
    }

    #[test]
    fn level_round_trip() {
        let l = Level::from_r(0.6).unwrap();
        assert!((l.one_minus_r2() - 0.64).abs() < 1e-15);
        let back = Level::from_s(l.s()).unwrap();
        assert!((back.r() - 0.6).abs() < 1e-15);
        let near_one = Level::from_s(40.0).unwrap();
        assert!((near_one.one_minus_r() - 0.5 * (-40f64).exp()).abs() < 1e-30);
    }
}
