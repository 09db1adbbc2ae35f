//! Direct simulation of the Poisson polytope at small dimension.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{domain, Error, Result};
use crate::mc::{self, Estimate};

/// Largest expected point count accepted by the samplers.
pub const MAX_MEAN_COUNT: f64 = 1e7;

const UNIT_TOL: f64 = 1e-12;
const DEDUP_TOL: f64 = 1e-12;
const LP_PIVOT_TOL: f64 = 1e-11;
const LP_FEAS_TOL: f64 = 1e-9;
const LP_MAX_PIVOTS: usize = 100_000;

/// Points in the d-dimensional unit ball, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    d: usize,
    coords: Vec<f64>,
    seed: Option<u64>,
}

impl PointCloud {
    pub fn new(d: usize, points: &[Vec<f64>]) -> Result<Self> {
        if d == 0 {
            return domain("dimension must be positive");
        }
        let mut coords = Vec::with_capacity(d * points.len());
        for p in points {
            if p.len() != d {
                return domain(format!("point of length {} in dimension {d}", p.len()));
            }
            let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm <= 1.0 + UNIT_TOL) {
                return domain(format!("point of norm {norm} outside the unit ball"));
            }
            coords.extend_from_slice(p);
        }
        Ok(PointCloud { d, coords, seed: None })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.d)
    }

    /// First two coordinates of every point.
    pub fn project2(&self) -> Vec<[f64; 2]> {
        assert!(self.d >= 2, "projection needs d >= 2");
        self.points().map(|p| [p[0], p[1]]).collect()
    }
}

/// One point uniform in B^d: U^{1/d}·G/‖G‖.
pub fn uniform_in_ball<R: Rng + ?Sized>(d: usize, rng: &mut R, out: &mut Vec<f64>) {
    let start = out.len();
    let mut norm2 = 0.0;
    for _ in 0..d {
        let g: f64 = StandardNormal.sample(rng);
        norm2 += g * g;
        out.push(g);
    }
    let u: f64 = rng.random();
    let scale = u.powf(1.0 / d as f64) / norm2.sqrt();
    for x in &mut out[start..] {
        *x *= scale;
    }
}

/// Poisson count with mean e^L, checked against the desk-scale cap.
pub fn poisson_count<R: Rng + ?Sized>(l: f64, rng: &mut R) -> Result<usize> {
    if l.is_nan() {
        return domain("log intensity is NaN");
    }
    if l == f64::NEG_INFINITY {
        return Ok(0);
    }
    let mean = l.exp();
    if !(mean <= MAX_MEAN_COUNT) {
        return Err(Error::ResourceCap(format!(
            "expected count {mean:e} exceeds {MAX_MEAN_COUNT:e}"
        )));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let pois = Poisson::new(mean).map_err(|e| Error::Numeric(e.to_string()))?;
    Ok(pois.sample(rng) as usize)
}

/// Poisson(e^L) i.i.d. uniform points in B^d drawn from `rng`.
pub fn sample_poisson_ball_with<R: Rng + ?Sized>(d: usize, l: f64, rng: &mut R) -> Result<PointCloud> {
    if d < 2 {
        return domain(format!("dimension must be at least 2, got {d}"));
    }
    let n = poisson_count(l, rng)?;
    let mut coords = Vec::with_capacity(n * d);
    for _ in 0..n {
        uniform_in_ball(d, rng, &mut coords);
    }
    Ok(PointCloud { d, coords, seed: None })
}

/// Poisson(e^L) i.i.d. uniform points in B^d, deterministic in (d, L, seed).
pub fn sample_poisson_ball(d: usize, l: f64, seed: u64) -> Result<PointCloud> {
    let mut cloud = sample_poisson_ball_with(d, l, &mut mc::stream(seed, 0))?;
    cloud.seed = Some(seed);
    Ok(cloud)
}

fn check_unit(u: &[f64], d: usize) -> Result<()> {
    if u.len() != d {
        return domain(format!("direction of length {} in dimension {d}", u.len()));
    }
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !((norm - 1.0).abs() <= UNIT_TOL) {
        return domain(format!("direction has norm {norm}, expected 1"));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// h(u) = max ⟨u, x⟩ over the cloud; −∞ when empty.
pub fn support_value(cloud: &PointCloud, u: &[f64]) -> Result<f64> {
    check_unit(u, cloud.d)?;
    Ok(cloud.points().map(|p| dot(p, u)).fold(f64::NEG_INFINITY, f64::max))
}

/// Uniform direction on S^{d−1}.
pub fn random_direction<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return g.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Convex polygon with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon2D {
    pub vertices: Vec<[f64; 2]>,
}

/// Sign of the turn o→a→b, zero when within rounding of collinear.
pub fn orientation(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let l = (a[0] - o[0]) * (b[1] - o[1]);
    let r = (a[1] - o[1]) * (b[0] - o[0]);
    let det = l - r;
    // static error bound for the two products and the subtraction
    let bound = 4.0 * f64::EPSILON * (l.abs() + r.abs());
    if det.abs() <= bound {
        0.0
    } else {
        det.signum()
    }
}

/// Convex hull by Andrew's monotone chain; collinear points are dropped.
pub fn hull2d(points: &[[f64; 2]]) -> Polygon2D {
    let mut pts: Vec<[f64; 2]> = points.iter().copied().filter(|p| p[0].is_finite() && p[1].is_finite()).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut uniq: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
    for p in pts {
        match uniq.last() {
            Some(q) if (p[0] - q[0]).abs() <= DEDUP_TOL && (p[1] - q[1]).abs() <= DEDUP_TOL => {}
            _ => uniq.push(p),
        }
    }
    if uniq.len() <= 2 {
        return Polygon2D { vertices: uniq };
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * uniq.len());
    for &p in &uniq {
        while hull.len() >= 2 && orientation(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in uniq.iter().rev().skip(1) {
        while hull.len() >= lower && orientation(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    Polygon2D { vertices: hull }
}

/// Minimum signed distance from the origin to the supporting lines of the
/// polygon's edges: the inradius about 0 when the polygon contains it, ≤ 0 otherwise.
pub fn signed_inradius(poly: &Polygon2D) -> f64 {
    let v = &poly.vertices;
    if v.len() < 2 {
        return f64::NEG_INFINITY;
    }
    let mut best = f64::INFINITY;
    for k in 0..v.len() {
        let p = v[k];
        let q = v[(k + 1) % v.len()];
        let len = (q[0] - p[0]).hypot(q[1] - p[1]);
        best = best.min((p[0] * q[1] - p[1] * q[0]) / len);
    }
    best
}

/// h_{d,2}: infimum of the support function over directions of the first
/// coordinate plane, via the inradius of the projected hull.
pub fn sf_dm_via_projection(cloud: &PointCloud, m: usize) -> Result<f64> {
    if m != 2 {
        return domain(format!("only m = 2 is implemented, got {m}"));
    }
    if cloud.d < 2 {
        return domain("projection needs d >= 2");
    }
    if cloud.len() < 3 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(signed_inradius(&hull2d(&cloud.project2())))
}

/// Phase one of the simplex method with Bland's rule on A w = b, w ≥ 0.
/// Returns whether the system is feasible.
pub fn lp_feasible(rows: &[Vec<f64>], rhs: &[f64]) -> Result<bool> {
    let m = rows.len();
    if rhs.len() != m {
        return domain("row and right-hand side counts differ");
    }
    if m == 0 {
        return Ok(true);
    }
    let n = rows[0].len();
    if rows.iter().any(|r| r.len() != n) {
        return domain("ragged constraint matrix");
    }
    let width = n + m + 1;
    let mut t = vec![0.0; (m + 1) * width];
    let mut basis: Vec<usize> = (n..n + m).collect();
    let scale = 1.0 + rhs.iter().map(|b| b.abs()).sum::<f64>();
    for i in 0..m {
        let sign = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
        let row = &mut t[i * width..(i + 1) * width];
        for j in 0..n {
            row[j] = sign * rows[i][j];
        }
        row[n + i] = 1.0;
        row[width - 1] = sign * rhs[i];
    }
    // reduced costs of the artificial objective
    for j in (0..n).chain(std::iter::once(width - 1)) {
        let s: f64 = (0..m).map(|i| t[i * width + j]).sum();
        t[m * width + j] = -s;
    }
    let mut pivots = 0;
    loop {
        let obj = &t[m * width..];
        let Some(enter) = (0..n + m).find(|&j| obj[j] < -LP_PIVOT_TOL) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            let a = t[i * width + enter];
            if a > LP_PIVOT_TOL {
                let ratio = t[i * width + width - 1] / a;
                let better = match leave {
                    None => true,
                    Some(l) => ratio < best || (ratio == best && basis[i] < basis[l]),
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(p) = leave else {
            // unbounded direction cannot occur for a bounded phase-one objective
            return Err(Error::Numeric("phase-one simplex reported unboundedness".into()));
        };
        let piv = t[p * width + enter];
        for j in 0..width {
            t[p * width + j] /= piv;
        }
        for i in 0..=m {
            if i == p {
                continue;
            }
            let f = t[i * width + enter];
            if f != 0.0 {
                for j in 0..width {
                    t[i * width + j] -= f * t[p * width + j];
                }
            }
        }
        basis[p] = enter;
        pivots += 1;
        if pivots > LP_MAX_PIVOTS {
            return Err(Error::Numeric("simplex pivot limit reached".into()));
        }
    }
    let infeasibility = -t[m * width + width - 1];
    Ok(infeasibility <= LP_FEAS_TOL * scale)
}

/// Whether `target` is a convex combination of the cloud's points.
pub fn in_hull(cloud: &PointCloud, target: &[f64]) -> Result<bool> {
    let d = cloud.d;
    if target.len() != d {
        return domain("target dimension mismatch");
    }
    if cloud.is_empty() {
        return Ok(false);
    }
    let mut rows: Vec<Vec<f64>> = (0..d).map(|j| cloud.points().map(|p| p[j]).collect()).collect();
    rows.push(vec![1.0; cloud.len()]);
    let mut rhs = target.to_vec();
    rhs.push(1.0);
    lp_feasible(&rows, &rhs)
}

/// ρ(u) together with whether the hull contains the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialValue {
    pub rho: f64,
    pub origin_inside: bool,
}

/// Radius-vector function ρ(u) = sup{t : t·u ∈ conv(cloud)} by bisection
/// on t ∈ [0, h(u)] with an LP membership test.
pub fn radius_vector_value(cloud: &PointCloud, u: &[f64], tol: f64) -> Result<RadialValue> {
    if cloud.is_empty() {
        return domain("cloud is empty");
    }
    if !(tol > 0.0) {
        return domain("tolerance must be positive");
    }
    let h = support_value(cloud, u)?;
    let origin = vec![0.0; cloud.d];
    if h < 0.0 || !in_hull(cloud, &origin)? {
        return Ok(RadialValue { rho: 0.0, origin_inside: false });
    }
    let inside = |t: f64| -> Result<bool> {
        let x: Vec<f64> = u.iter().map(|c| t * c).collect();
        in_hull(cloud, &x)
    };
    if inside(h)? {
        return Ok(RadialValue { rho: h, origin_inside: true });
    }
    let (mut lo, mut hi) = (0.0, h);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if inside(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(RadialValue { rho: lo, origin_inside: true })
}

/// Monte Carlo estimate of E|K|/κ_d = E[ρ(U)^d].
///
/// The standard error is computed from per-cloud averages, since directions
/// within a cloud are correlated.
pub fn volume_ratio_estimate(d: usize, l: f64, n_dirs: usize, n_clouds: usize, seed: u64) -> Result<Estimate> {
    if n_dirs == 0 || n_clouds == 0 {
        return domain("need at least one direction and one cloud");
    }
    let mut per_cloud = Vec::with_capacity(n_clouds);
    for c in 0..n_clouds {
        let mut rng = mc::stream(seed, c as u64);
        let cloud = sample_poisson_ball_with(d, l, &mut rng)?;
        let mut acc = 0.0;
        if cloud.len() > d {
            for _ in 0..n_dirs {
                let u = random_direction(d, &mut rng);
                let rho = radius_vector_value(&cloud, &u, 1e-9)?.rho;
                acc += rho.powi(d as i32);
            }
        }
        per_cloud.push(acc / n_dirs as f64);
    }
    Ok(Estimate::from_samples(&per_cloud))
}
