//! Reference computations that share no code with the library paths they check.

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (val, err) = gk15(f, a, b);
    // the floor stops refinement once the error estimate is pure roundoff
    if err <= tol.max(64.0 * f64::EPSILON * val.abs()) || depth == 0 {
        return val;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1)
}

/// Adaptive Gauss-Kronrod integral of `f` over consecutive `breaks`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, breaks: &[f64], rel_tol: f64) -> f64 {
    let rough: f64 = breaks
        .windows(2)
        .map(|w| gk15(&f, w[0], w[1]).0.abs())
        .sum();
    let tol = rel_tol * rough.max(f64::MIN_POSITIVE);
    breaks
        .windows(2)
        .map(|w| adapt(&f, w[0], w[1], tol / breaks.len() as f64, 40))
        .sum()
}

/// Break points on [0,1] refined geometrically toward both endpoints.
pub fn dyadic_breaks(k0: u32, k1: u32) -> Vec<f64> {
    let mut v = vec![0.0];
    for k in (1..=k0).rev() {
        v.push(0.5f64.powi(k as i32));
    }
    for k in 2..=k1 {
        v.push(1.0 - 0.5f64.powi(k as i32));
    }
    v.push(1.0);
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    v
}

/// ln ∫₀ˣ v^{p−1}(1−v)^{q−1} dv by quadrature after v = x·t^{1/p}, which turns
/// it into (xᵖ/p)∫₀¹ (1 − x t^{1/p})^{q−1} dt.
pub fn ln_incomplete_beta(x: f64, p: f64, q: f64) -> f64 {
    if x == 0.0 {
        return f64::NEG_INFINITY;
    }
    let y = 1.0 - x;
    // 1 - x t^{1/p} = y - x·expm1(ln t / p)
    let base = |t: f64| -> f64 {
        if t == 0.0 {
            1.0
        } else {
            y - x * (t.ln() / p).exp_m1()
        }
    };
    let g = |t: f64| (q - 1.0) * base(t).ln();
    let gmax = g(0.0).max(g(1.0));
    let h = |t: f64| (g(t) - gmax).exp();
    let val = integrate(h, &dyadic_breaks(60, 50), 1e-14);
    p * x.ln() - p.ln() + gmax + val.ln()
}

/// ln Γ(z) for z > 0 by Γ(z+1) = zΓ(z) applied to the integral
/// ∫₀^∞ t^{w−1}e^{−t} dt with w in [20, 21), evaluated in log form.
pub fn ln_gamma(z: f64) -> f64 {
    let mut w = z;
    let mut shift = 0.0;
    while w < 20.0 {
        shift += w.ln();
        w += 1.0;
    }
    // peak of t^{w-1}e^{-t} at t = w-1; integrate the normalized integrand
    let m = w - 1.0;
    let lpeak = (w - 1.0) * m.ln() - m;
    let f = |u: f64| {
        // t = m * e^u, dt = t du
        let t = m * u.exp();
        ((w - 1.0) * t.ln() - t + t.ln() - lpeak).exp()
    };
    let breaks: Vec<f64> = (-40..=20).map(|k| k as f64 * 0.25).collect();
    let val = integrate(f, &breaks, 1e-15);
    lpeak + val.ln() - shift
}

/// Standard Gumbel CDF.
pub fn gumbel_cdf(t: f64) -> f64 {
    (-(-t).exp()).exp()
}
