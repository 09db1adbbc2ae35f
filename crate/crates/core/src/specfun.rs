//! Log-domain special functions: log-gamma, unit-ball volumes, complete and
//! lower incomplete beta.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{domain, Error, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Natural logarithm of a non-negative quantity; `-inf` encodes exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogValue(f64);

impl LogValue {
    pub const ZERO: LogValue = LogValue(f64::NEG_INFINITY);
    pub const ONE: LogValue = LogValue(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value == f64::INFINITY {
            return domain(format!("log value must be finite or -inf, got {value}"));
        }
        Ok(LogValue(value))
    }

    pub fn from_linear(x: f64) -> Result<Self> {
        if !(x >= 0.0) || !x.is_finite() {
            return domain(format!("linear value must be finite and >= 0, got {x}"));
        }
        Ok(LogValue(x.ln()))
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn exp(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

/// ln(1 - e^a) for a <= 0.
pub fn ln_one_minus_exp(a: f64) -> f64 {
    if a > -std::f64::consts::LN_2 {
        (-a.exp_m1()).ln()
    } else {
        (-a.exp()).ln_1p()
    }
}

/// ln(e^a + e^b).
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

// zeta(k) - 1 for k = 2..=40
const ZETA_MINUS_ONE: [f64; 39] = [
    0.644_934_066_848_226_4,
    0.202_056_903_159_594_3,
    0.082_323_233_711_138_19,
    0.036_927_755_143_369_93,
    0.017_343_061_984_449_14,
    0.008_349_277_381_922_827,
    0.004_077_356_197_944_339,
    0.002_008_392_826_082_214,
    0.000_994_575_127_818_085_3,
    0.000_494_188_604_119_464_6,
    0.000_246_086_553_308_048_3,
    0.000_122_713_347_578_489_1,
    6.124_813_505_870_483e-5,
    3.058_823_630_702_049e-5,
    1.528_225_940_865_187e-5,
    7.637_197_637_899_762e-6,
    3.817_293_264_999_84e-6,
    1.908_212_716_553_939e-6,
    9.539_620_338_727_96e-7,
    4.769_329_867_878_065e-7,
    2.384_505_027_277_33e-7,
    1.192_199_259_653_111e-7,
    5.960_818_905_125_948e-8,
    2.980_350_351_465_228e-8,
    1.490_155_482_836_504e-8,
    7.450_711_789_835_429e-9,
    3.725_334_024_788_457e-9,
    1.862_659_723_513_049e-9,
    9.313_274_324_196_682e-10,
    4.656_629_065_033_784e-10,
    2.328_311_833_676_505e-10,
    1.164_155_017_270_052e-10,
    5.820_772_087_902_701e-11,
    2.910_385_044_497_1e-11,
    1.455_192_189_104_198e-11,
    7.275_959_835_057_481e-12,
    3.637_979_547_378_651e-12,
    1.818_989_650_307_066e-12,
    9.094_947_840_263_889e-13,
];

// ln Γ(1+x) for |x| <= 1/2.
fn ln_gamma_1p_small(x: f64) -> f64 {
    let mut acc = 0.0;
    let mut pow = -x;
    for (i, &z) in ZETA_MINUS_ONE.iter().enumerate() {
        pow *= -x;
        let k = (i + 2) as f64;
        acc += z * pow / k;
    }
    // acc = sum_k (-1)^k (zeta(k)-1) x^k / k
    -x.ln_1p() + x * (1.0 - EULER_GAMMA) + acc
}

const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

fn stirling_correction(z: f64) -> f64 {
    let inv2 = 1.0 / (z * z);
    let mut acc = 0.0;
    for c in STIRLING.iter().rev() {
        acc = acc * inv2 + c;
    }
    acc / z
}

pub(crate) fn ln_gamma_unchecked(z: f64) -> f64 {
    if z >= 10.0 {
        (z - 0.5) * z.ln() - z + HALF_LN_2PI + stirling_correction(z)
    } else if z < 0.5 {
        ln_gamma_1p_small(z) - z.ln()
    } else if z <= 1.5 {
        ln_gamma_1p_small(z - 1.0)
    } else {
        // shift down into [1.5, 2.5], then ln Γ(2+x) = ln(1+x) + ln Γ(1+x)
        let mut w = z;
        let mut prod = 1.0;
        while w > 2.5 {
            w -= 1.0;
            prod *= w;
        }
        let x = w - 2.0;
        prod.ln() + x.ln_1p() + ln_gamma_1p_small(x)
    }
}

/// ln Γ(b) - ln Γ(b + a) without cancellation for large b.
pub(crate) fn ln_gamma_ratio(b: f64, a: f64) -> f64 {
    if b >= 10.0 {
        -a * b.ln() - (b + a - 0.5) * (a / b).ln_1p() + a + stirling_correction(b)
            - stirling_correction(b + a)
    } else {
        ln_gamma_unchecked(b) - ln_gamma_unchecked(b + a)
    }
}

pub fn log_gamma(z: f64) -> Result<LogValue> {
    if !(z > 0.0) || !z.is_finite() {
        return domain(format!("log_gamma requires finite z > 0, got {z}"));
    }
    Ok(LogValue(ln_gamma_unchecked(z)))
}

/// ln κ_d, the log-volume of the unit ball in ℝ^d.
pub fn log_unit_ball_volume(d: u64) -> Result<LogValue> {
    if d < 1 {
        return domain("ball dimension must be >= 1");
    }
    Ok(LogValue(ln_ball_volume(d as f64)))
}

pub(crate) fn ln_ball_volume(d: f64) -> f64 {
    0.5 * d * PI.ln() - ln_gamma_unchecked(1.0 + 0.5 * d)
}

pub fn log_complete_beta(p: f64, q: f64) -> Result<LogValue> {
    check_pq(p, q)?;
    Ok(LogValue(ln_beta_unchecked(p, q)))
}

pub(crate) fn ln_beta_unchecked(p: f64, q: f64) -> f64 {
    let (small, large) = if p <= q { (p, q) } else { (q, p) };
    ln_gamma_unchecked(small) + ln_gamma_ratio(large, small)
}

fn check_pq(p: f64, q: f64) -> Result<()> {
    if !(p > 0.0) || !(q > 0.0) || !p.is_finite() || !q.is_finite() {
        return domain(format!("beta parameters must be finite and > 0, got p={p}, q={q}"));
    }
    Ok(())
}

/// Arguments of B(x; p, q) with the complement y = 1 - x carried separately
/// so that either side can be tiny without losing precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaArgs {
    x: f64,
    y: f64,
    p: f64,
    q: f64,
}

impl BetaArgs {
    pub fn new(x: f64, p: f64, q: f64) -> Result<Self> {
        Self::with_complement(x, 1.0 - x, p, q)
    }

    /// `y` must equal `1 - x` up to rounding; pass it when it is known more
    /// accurately than `1 - x`.
    pub fn with_complement(x: f64, y: f64, p: f64, q: f64) -> Result<Self> {
        check_pq(p, q)?;
        if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
            return domain(format!("beta argument must lie in [0,1], got x={x}, y={y}"));
        }
        if (x + y - 1.0).abs() > 1e-12 {
            return domain(format!("x and y are not complementary: x={x}, y={y}"));
        }
        Ok(BetaArgs { x, y, p, q })
    }

    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn y(&self) -> f64 {
        self.y
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn q(&self) -> f64 {
        self.q
    }

    fn ln_x(&self) -> f64 {
        if self.x < 0.5 {
            self.x.ln()
        } else {
            (-self.y).ln_1p()
        }
    }

    fn ln_y(&self) -> f64 {
        if self.y < 0.5 {
            self.y.ln()
        } else {
            (-self.x).ln_1p()
        }
    }

    fn swapped(&self) -> BetaArgs {
        BetaArgs { x: self.y, y: self.x, p: self.q, q: self.p }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    pub tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig { tol: 1e-16, max_terms: 1_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaMethod {
    Auto,
    Series,
    Complement,
    Quadrature,
}

const RESCALE: f64 = 1e280;

/// The power series B(x;p,q) = xᵖ(1−x)^q/p · Σₙ (p+q)ₙ/(p+1)ₙ xⁿ, evaluated
/// with the Pochhammer ratio in linear domain and the scale in log domain.
pub fn log_incomplete_beta_series(args: &BetaArgs, cfg: &SeriesConfig) -> Result<LogValue> {
    if args.x == 0.0 {
        return Ok(LogValue::ZERO);
    }
    if args.y == 0.0 {
        return Err(Error::Domain("series requires x < 1".into()));
    }
    let (x, p, q) = (args.x, args.p, args.q);
    let prefix = p * args.ln_x() + q * args.ln_y() - p.ln();
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut log_scale = 0.0;
    for n in 0..cfg.max_terms {
        let nf = n as f64;
        let ratio = (p + q + nf) / (p + 1.0 + nf) * x;
        term *= ratio;
        sum += term;
        if sum > RESCALE {
            sum /= RESCALE;
            term /= RESCALE;
            log_scale += RESCALE.ln();
        }
        // later ratios never exceed max(ratio, x)
        let bound = ratio.max(x);
        if bound < 1.0 && term * bound / (1.0 - bound) <= cfg.tol * sum {
            return Ok(LogValue(prefix + log_scale + sum.ln()));
        }
    }
    Err(Error::NonConvergence {
        terms: cfg.max_terms,
        partial: prefix + log_scale + sum.ln(),
    })
}

fn projected_terms(args: &BetaArgs) -> f64 {
    let (x, p, q) = (args.x, args.p, args.q);
    if x == 0.0 {
        return 0.0;
    }
    if args.y == 0.0 {
        return f64::INFINITY;
    }
    let peak = (((p + q) * x - p - 1.0) / args.y).max(0.0);
    peak + 10.0 * peak.sqrt() + 40.0 / (-args.ln_x())
}

fn log_via_complement(args: &BetaArgs, cfg: &SeriesConfig) -> Result<(LogValue, f64)> {
    let full = ln_beta_unchecked(args.p, args.q);
    let tail = log_incomplete_beta_series(&args.swapped(), cfg)?.0;
    let ratio = (tail - full).exp();
    if ratio >= 1.0 {
        return Ok((LogValue::ZERO, ratio));
    }
    Ok((LogValue(full + ln_one_minus_exp(tail - full)), ratio))
}

/// ln B(x;p,q) = ln ∫₀ˣ v^{p−1}(1−v)^{q−1} dv.
pub fn log_lower_incomplete_beta(args: &BetaArgs) -> Result<LogValue> {
    log_lower_incomplete_beta_with(args, &SeriesConfig::default(), BetaMethod::Auto)
}

pub fn log_lower_incomplete_beta_with(
    args: &BetaArgs,
    cfg: &SeriesConfig,
    method: BetaMethod,
) -> Result<LogValue> {
    if args.x == 0.0 {
        return Ok(LogValue::ZERO);
    }
    if args.y == 0.0 {
        return Ok(LogValue(ln_beta_unchecked(args.p, args.q)));
    }
    match method {
        BetaMethod::Series => log_incomplete_beta_series(args, cfg),
        BetaMethod::Complement => log_via_complement(args, cfg).map(|r| r.0),
        BetaMethod::Quadrature => Ok(LogValue(ln_beta_quadrature(args))),
        BetaMethod::Auto => {
            let cap = cfg.max_terms as f64;
            let direct = projected_terms(args);
            let comp = projected_terms(&args.swapped());
            if comp < direct && comp <= cap {
                let (value, ratio) = log_via_complement(args, cfg)?;
                if ratio <= 0.5 {
                    return Ok(value);
                }
            }
            if direct <= cap {
                log_incomplete_beta_series(args, cfg)
            } else {
                Ok(LogValue(ln_beta_quadrature(args)))
            }
        }
    }
}

/// ln I_x(p,q) = ln B(x;p,q) − ln B(p,q).
pub fn log_regularized_incomplete_beta(args: &BetaArgs) -> Result<LogValue> {
    let lower = log_lower_incomplete_beta(args)?;
    if lower.is_zero() {
        return Ok(LogValue::ZERO);
    }
    Ok(LogValue((lower.0 - ln_beta_unchecked(args.p, args.q)).min(0.0)))
}

/// The two-sided bracket for B(x;p,q) from the ratio bound
/// 1 ≤ B/base ≤ 1/(1 − ((q−1)/(p+1))·x/(1−x)) (reversed when q < 1).
pub fn incomplete_beta_bounds(args: &BetaArgs) -> Result<(LogValue, LogValue)> {
    let (x, y, p, q) = (args.x, args.y, args.p, args.q);
    if !(x > 0.0 && y > 0.0) {
        return domain("bracket requires 0 < x < 1");
    }
    if !((p + q) * x < p + 1.0) {
        return domain(format!("bracket requires (p+q)x < p+1, got p={p}, q={q}, x={x}"));
    }
    let base = p * args.ln_x() + (q - 1.0) * args.ln_y() - p.ln();
    let c = (q - 1.0) / (p + 1.0) * (x / y);
    let ln_factor = -(-c).ln_1p();
    let other = base + ln_factor;
    if other >= base {
        Ok((LogValue(base), LogValue(other)))
    } else {
        Ok((LogValue(other), LogValue(base)))
    }
}

/// Tanh-sinh quadrature of the beta integrand over [0, x], split at the mode
/// so each piece peaks at an endpoint. Last resort when both series stall.
fn ln_beta_quadrature(args: &BetaArgs) -> f64 {
    let (p, q) = (args.p, args.q);
    let mode = if p > 1.0 && q > 1.0 { (p - 1.0) / (p + q - 2.0) } else { f64::NAN };
    if mode > 0.0 && mode < args.x {
        let left = ln_tanh_sinh(p, q, 0.0, mode, 1.0 - mode);
        let right = ln_tanh_sinh(p, q, mode, args.x, args.y);
        ln_add_exp(left, right)
    } else {
        ln_tanh_sinh(p, q, 0.0, args.x, args.y)
    }
}

fn ln_integrand(p: f64, q: f64, ln_v: f64, ln_1mv: f64) -> f64 {
    (p - 1.0) * ln_v + (q - 1.0) * ln_1mv
}

// ∫_lo^hi v^{p-1}(1-v)^{q-1} dv with one_minus_hi = 1 - hi supplied exactly.
fn ln_tanh_sinh(p: f64, q: f64, lo: f64, hi: f64, one_minus_hi: f64) -> f64 {
    let half = 0.5 * (hi - lo);
    let point = |delta: f64, from_right: bool| -> f64 {
        if from_right {
            let v = hi - delta;
            ln_integrand(p, q, v.ln(), (one_minus_hi + delta).ln())
        } else {
            let v = lo + delta;
            ln_integrand(p, q, v.ln(), (-v).ln_1p())
        }
    };
    let mid = lo + half;
    let ln_peak = [
        point(0.0, true),
        if lo > 0.0 { point(0.0, false) } else { f64::NEG_INFINITY },
        ln_integrand(p, q, mid.ln(), (-mid).ln_1p()),
    ]
    .into_iter()
    .filter(|v| v.is_finite())
    .fold(f64::NEG_INFINITY, f64::max);
    let ln_peak = if ln_peak.is_finite() { ln_peak } else { 0.0 };

    let eval_level = |h: f64, offset_only: bool| -> f64 {
        let mut acc = 0.0;
        let mut k: i64 = if offset_only { 1 } else { 0 };
        loop {
            let t = k as f64 * h;
            if t > 6.5 {
                break;
            }
            let u = FRAC_PI_2 * t.sinh();
            let e = (-2.0 * u).exp();
            let delta = 2.0 * half * e / (1.0 + e);
            let weight = FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
            if delta < 1e-300 {
                break;
            }
            let fr = (point(delta, true) - ln_peak).exp();
            let contrib = if k == 0 {
                fr
            } else {
                fr + (point(delta, false) - ln_peak).exp()
            };
            acc += weight * contrib;
            k += if offset_only { 2 } else { 1 };
        }
        acc * h * half
    };

    let mut h = 0.5;
    let mut total = eval_level(h, false);
    for _ in 0..12 {
        h *= 0.5;
        let refined = 0.5 * total + eval_level(h, true);
        let done = (refined - total).abs() <= 1e-15 * refined.abs();
        total = refined;
        if done {
            break;
        }
    }
    ln_peak + total.ln()
}
