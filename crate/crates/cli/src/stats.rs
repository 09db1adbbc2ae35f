use ppl_core::exactlaw::{gumbel_normalizers_1d, gumbel_normalizers_md, Level, ModelParams, Regime};
use ppl_core::{Error, Result};

/// Kolmogorov-Smirnov distance between the empirical law of `samples` and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain("KS distance needs at least one sample".into()));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("NaN sample".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut best = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        best = best.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(best)
}

pub fn gumbel_cdf(t: f64) -> f64 {
    (-(-t).exp()).exp()
}

/// Sample median (mean of the two central order statistics for even n).
pub fn median(samples: &[f64]) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// d·(ln(1/√(1−h²)) − L/(d+1)) + ln √𝔪(d) at the level of h.
pub fn gumbel_statistic_1d_at(params: &ModelParams, regime: &Regime, level: &Level) -> Result<f64> {
    let g = gumbel_normalizers_1d(params, regime)?;
    let d = params.d() as f64;
    Ok(d * (0.5 * level.s() - g.center) + 0.5 * g.ln_m)
}

pub fn gumbel_statistic_1d(params: &ModelParams, regime: &Regime, r_sample: f64) -> Result<f64> {
    if !(r_sample > 0.0 && r_sample < 1.0) {
        return Err(Error::Domain(format!("sample must lie in (0,1), got {r_sample}")));
    }
    gumbel_statistic_1d_at(params, regime, &Level::from_r(r_sample)?)
}

/// 𝔞(d;m) − 𝔟(d;m)·ln(1/√(1−h²)) at the level of h_{d,m}.
pub fn gumbel_statistic_md_at(params: &ModelParams, m: u32, level: &Level) -> Result<f64> {
    let g = gumbel_normalizers_md(params, m)?;
    Ok(g.a_frak - g.b_frak * 0.5 * level.s())
}

pub fn gumbel_statistic_md(params: &ModelParams, m: u32, sf_dm_sample: f64) -> Result<f64> {
    if !(sf_dm_sample > 0.0 && sf_dm_sample < 1.0) {
        return Err(Error::Domain(format!("sample must lie in (0,1), got {sf_dm_sample}")));
    }
    gumbel_statistic_md_at(params, m, &Level::from_r(sf_dm_sample)?)
}
