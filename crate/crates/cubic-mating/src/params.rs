//! Parameter planes: Φ₀, Φ₋, boundary parametrizations, cusps, centers and
//! the correspondence between the cubic and Newton families.

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use serde::Serialize;

use crate::angles::{doubling_period, Angle};
use crate::boettcher::{BasinId, SuperBasin, RHO0};
use crate::error::{Error, Result};
use crate::maps::{newton_pq, newton_roots, MapFamily};
use crate::numerics::{poly_add, poly_mul, poly_roots, poly_scale, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    Cubic,
    Newton,
}

impl Family {
    pub fn map(&self, p: C) -> Result<MapFamily> {
        match self {
            Family::Cubic => MapFamily::cubic(p),
            Family::Newton => MapFamily::newton(p),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Cubic => "cubic",
            Family::Newton => "newton",
        }
    }
}

/// Where a parameter sits. Cubic and Newton tags share the same shapes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Region {
    /// ℋ₀ or ℋ₋.
    Main,
    /// A point `a(t)` or `λ(t)` on the boundary of the main component.
    Boundary { t: Angle },
    /// The cusp of the copy attached at `t`.
    Cusp { t: Angle, k: u32 },
    /// A superattracting parameter of the copy at `t`, matching the
    /// quadratic center of period `m` with the given index.
    Center { t: Angle, k: u32, m: u32, index: usize },
    /// One of the two copies whose cusps are ±4i/3.
    Excluded,
    Other,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParamPoint {
    pub family: Family,
    pub value: C,
    pub region: Region,
    /// Error estimate for computed parameters.
    pub err: f64,
}

impl ParamPoint {
    pub fn new(family: Family, value: C, region: Region) -> Self {
        ParamPoint { family, value, region, err: 0.0 }
    }

    pub fn map(&self) -> Result<MapFamily> {
        self.family.map(self.value)
    }
}

/// Reflects a parameter into the fundamental domain using `a ↦ -a`,
/// `a ↦ ā` for cubics and `λ ↦ -λ`, `λ ↦ λ̄` for Newton maps.
pub fn canonical(family: Family, v: C) -> C {
    match family {
        Family::Cubic => {
            let mut a = v;
            if a.re < 0.0 {
                a = -a;
            }
            if a.im > 0.0 {
                a = a.conj();
            }
            a
        }
        Family::Newton => {
            let mut l = v;
            if l.im < 0.0 {
                l = -l;
            }
            if l.re > 0.0 {
                l = -l.conj();
            }
            l
        }
    }
}

/// The fixed basin holding the critical value and its center.
fn main_basin(family: Family, p: C) -> Result<SuperBasin> {
    let m = family.map(p)?;
    match family {
        Family::Cubic => SuperBasin::fixed(m, BasinId::A1),
        Family::Newton => SuperBasin::fixed(m, BasinId::B1),
    }
}

/// The free critical value.
fn critical_value(family: Family, p: C) -> C {
    match family {
        Family::Cubic => p * p * p / 2.0,
        Family::Newton => {
            let (pp, q) = newton_pq(p);
            -q / pp
        }
    }
}

/// Φ(p): Böttcher position of the free critical value.
pub fn critical_value_position(p: &ParamPoint) -> Result<C> {
    let sb = main_basin(p.family, p.value)?;
    let v = critical_value(p.family, p.value);
    let m = p.map()?;
    let crit = m.free_critical_point().unwrap();
    let mut z = crit;
    for _ in 0..1000 {
        z = m.f(z);
        if (z - sb.center).norm() < 1e-8 {
            return sb
                .coordinate(v)
                .map_err(|e| Error::NotInComponent(format!("critical value not in the immediate basin: {e}")));
        }
        if !z.is_finite() {
            break;
        }
    }
    Err(Error::NotInComponent(format!("critical orbit does not converge for {} {}", p.family.name(), p.value)))
}

/// Center of the main basin and its parameter derivative.
fn center_and_derivative(family: Family, p: C) -> (C, C) {
    match family {
        Family::Cubic => (ZERO, ZERO),
        Family::Newton => (newton_roots(p)[0], -ONE),
    }
}

/// Residual of `f^n(v) = c + φ^{-1}(ζ^{2^n})` and its parameter derivative.
fn phi_residual(family: Family, p: C, n: usize, zeta_pow: C) -> Result<(C, C)> {
    let m = family.map(p)?;
    let crit = m.free_critical_point().unwrap();
    // v = f(crit), dv/dp including the moving critical point.
    let mut z = crit;
    let mut dz = match family {
        Family::Cubic => -ONE,
        Family::Newton => ZERO,
    };
    for _ in 0..n + 1 {
        let (fz, dfz) = m.f_d(z);
        let dp = m.f_dparam(z);
        dz = dfz * dz + dp;
        z = fz;
    }
    let sb = main_basin(family, p)?;
    let h = 1e-6;
    let sb2 = main_basin(family, p + h)?;
    let psi = sb.phi_inv.eval(zeta_pow);
    let dpsi = (sb2.phi_inv.eval(zeta_pow) - psi) / h;
    let (c, dc) = center_and_derivative(family, p);
    Ok((z - c - psi, dz - dc - dpsi))
}

fn level_count(rho: f64) -> usize {
    let mut n = 0;
    while rho * 2f64.powi(n as i32) < RHO0 {
        n += 1;
    }
    n
}

/// Solves Φ(p) = e^{-ρ} e^{2πi t} by Newton's method from `guess`.
fn solve_phi(family: Family, guess: C, rho: f64, t: &Angle) -> Result<C> {
    let n = level_count(rho);
    let th = t.mul_pow_f64(2, n as u32);
    let zeta_pow = C::from_polar((-rho * 2f64.powi(n as i32)).exp(), 2.0 * PI * th);
    let mut p = guess;
    let mut last = f64::INFINITY;
    for it in 0..80 {
        let (f, df) = phi_residual(family, p, n, zeta_pow)?;
        let step = f / df;
        if !step.is_finite() {
            break;
        }
        p -= step;
        let s = step.norm();
        if s < 1e-15 * (1.0 + p.norm()) || (it > 2 && s >= 0.5 * last && s < 1e-9) {
            return Ok(p);
        }
        last = s;
    }
    Err(Error::NoConvergence(format!("Φ = e^(-{rho}) e^(2πi {t}) from {guess}")))
}

fn small_guess(family: Family, rho: f64, t: &Angle) -> C {
    let r = (-rho).exp();
    let th = 2.0 * PI * t.to_f64();
    match family {
        // Φ₀(a) ≈ (3/4) a⁴ with arg a in (-π/2, 0).
        Family::Cubic => C::from_polar((r / 0.75).powf(0.25), (th - 2.0 * PI) / 4.0),
        // Φ₋(λ) ≈ 3 ε⁴, ε = λ + 1/2 with arg ε in (0, π/2).
        Family::Newton => C::new(-0.5, 0.0) + C::from_polar((r / 3.0).powf(0.25), th / 4.0),
    }
}

/// Point with Φ(p) = e^{-ρ} e^{2πit} by continuation from small |Φ|.
pub fn param_at(family: Family, t: &Angle, rho_target: f64) -> Result<C> {
    let mut rho = 10.0f64;
    let mut p = solve_phi(family, small_guess(family, rho, t), rho, t)?;
    let mut lr = rho.ln();
    let mut h = 0.1f64;
    let target = rho_target.ln();
    let mut prev: Option<(f64, C)> = None;
    while lr > target + 1e-12 {
        let lr1 = (lr - h).max(target);
        let rho1 = lr1.exp();
        // Linear predictor in log-potential.
        let guess = match prev {
            Some((lp, pp)) => p + (p - pp) * ((lr1 - lr) / (lr - lp)),
            None => p,
        };
        match solve_phi(family, guess, rho1, t) {
            Ok(p1) if (p1 - p).norm() < 0.05 => {
                prev = Some((lr, p));
                p = p1;
                lr = lr1;
                rho = rho1;
                h = (h * 1.5).min(0.5);
            }
            _ => {
                h /= 2.0;
                if h < 1e-6 {
                    return Err(Error::ContinuationFailure { last_r: (-rho).exp(), msg: format!("{} t = {t}", family.name()) });
                }
            }
        }
    }
    Ok(p)
}

/// `a(t)` or `λ(t)`: the boundary point with Φ = e^{2πit}.
pub fn boundary_param(family: Family, t: &Angle) -> Result<ParamPoint> {
    let rhos = [1e-6, 1e-7, 1e-8];
    let mut vals = Vec::new();
    let mut last_err: Option<Error> = None;
    for &r in &rhos {
        match param_at(family, t, r) {
            Ok(p) => vals.push(p),
            Err(e) => {
                last_err = Some(e);
                break;
            }
        }
    }
    if vals.is_empty() {
        return Err(last_err.unwrap());
    }
    let v = *vals.last().unwrap();
    // Last two steps, with a geometric tail when a third value is available.
    let err = match vals.len() {
        3 => {
            let d1 = (vals[2] - vals[1]).norm();
            let d0 = (vals[1] - vals[0]).norm().max(1e-300);
            let r = (d1 / d0).min(0.95);
            d1 / (1.0 - r)
        }
        2 => (vals[1] - vals[0]).norm(),
        _ => f64::NAN,
    };
    let region = match doubling_period(&t.half()) {
        Some(k) if k >= 2 => Region::Cusp { t: t.clone(), k },
        _ => Region::Boundary { t: t.clone() },
    };
    let mut out = ParamPoint { family, value: v, region, err };
    if let Region::Cusp { k, .. } = out.region {
        if let Ok((c, e)) = polish_cusp(family, v, k as usize) {
            out.value = c;
            out.err = e;
        }
    }
    if let Region::Boundary { .. } = out.region {
        if let Ok(c) = polish_boundary(family, t, v) {
            out.err = (c - out.value).norm().max(1e-12);
            out.value = c;
        }
    }
    Ok(out)
}

/// Coefficients of `f^k(z) - z` as a polynomial in z (numerator for Newton).
fn periodic_poly(m: &MapFamily, k: usize) -> Vec<C> {
    let (num, den) = m.rational_form();
    // f^j = P_j / Q_j.
    let mut p = vec![ZERO, ONE];
    let mut q = vec![ONE];
    for _ in 0..k {
        // num(P/Q) and den(P/Q) homogenised by Q^3.
        let deg = 3;
        let mut np = vec![ZERO];
        let mut dp = vec![ZERO];
        for (coeffs, out) in [(&num, &mut np), (&den, &mut dp)] {
            for (i, &c) in coeffs.iter().enumerate() {
                if c == ZERO {
                    continue;
                }
                let mut term = vec![c];
                for _ in 0..i {
                    term = poly_mul(&term, &p);
                }
                for _ in i..deg {
                    term = poly_mul(&term, &q);
                }
                *out = poly_add(out, &term);
            }
        }
        p = np;
        q = dp;
    }
    let zq = poly_mul(&[ZERO, ONE], &q);
    poly_add(&p, &poly_scale(&zq, -ONE))
}

/// Refines a cusp: a parameter where a k-cycle has multiplier exactly 1.
fn polish_cusp(family: Family, p0: C, k: usize) -> Result<(C, f64)> {
    let z = parabolic_point(family, p0, k)?;
    let (_, p, step_norm) = solve_multiplier(family, z, p0, k, ONE, f64::INFINITY);
    if (p - p0).norm() > 1e-2 {
        return Err(Error::NoConvergence(format!("cusp polish drifted from {p0} to {p}")));
    }
    Ok((p, step_norm.max(1e-12)))
}

/// The period-`k` point of `f_p` whose multiplier is closest to 1.
fn parabolic_point(family: Family, p: C, k: usize) -> Result<C> {
    let m = family.map(p)?;
    poly_roots(&periodic_poly(&m, k))
        .iter()
        .map(|&z| (z, (m.iterate_d(z, k).1 - ONE).norm()))
        .filter(|(z, e)| z.is_finite() && e.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(z, _)| z)
        .ok_or_else(|| Error::NoConvergence("no periodic points".into()))
}

/// Newton on `f_p^k(z) = z`, `(f_p^k)'(z) = mu` in the unknowns `(z, p)`.
/// Returns the last iterate and the size of the final parameter step.
fn solve_multiplier(family: Family, z0: C, p0: C, k: usize, mu: C, max_step: f64) -> (C, C, f64) {
    let (mut z, mut p) = (z0, p0);
    let h = 1e-7;
    let mut step_norm = f64::INFINITY;
    let f = |zz: C, pp: C| -> Option<(C, C)> {
        let mm = family.map(pp).ok()?;
        let (w, d) = mm.iterate_d(zz, k);
        Some((w - zz, d - mu))
    };
    for _ in 0..80 {
        let (Some((f1, f2)), Some((a1, a2)), Some((b1, b2))) = (f(z, p), f(z + h, p), f(z, p + h)) else {
            break;
        };
        let j11 = (a1 - f1) / h;
        let j21 = (a2 - f2) / h;
        let j12 = (b1 - f1) / h;
        let j22 = (b2 - f2) / h;
        let det = j11 * j22 - j12 * j21;
        let dz = (f1 * j22 - j12 * f2) / det;
        let dp = (j11 * f2 - j21 * f1) / det;
        if !dz.is_finite() || !dp.is_finite() {
            break;
        }
        // Damped near the parabolic parameter, where the system is singular.
        let damp = (max_step / dp.norm()).min(10.0 * max_step / dz.norm()).min(1.0);
        z -= dz * damp;
        p -= dp * damp;
        step_norm = dp.norm() * damp;
        if step_norm < 1e-14 {
            break;
        }
    }
    (z, p, step_norm)
}

/// Center of the period-`k` component at a primitive cusp: follow the
/// parabolic cycle while its multiplier decreases from 1 to 0.
fn center_by_multiplier(family: Family, cusp: C, k: usize) -> Result<C> {
    let mut z = parabolic_point(family, cusp, k)?;
    let mut p = cusp;
    let schedule = [0.001, 0.004, 0.01, 0.025].into_iter().chain((1..=40).map(|j| j as f64 / 40.0));
    for s in schedule {
        let mu = C::new(1.0 - s, 0.0);
        let (z1, p1, step) = solve_multiplier(family, z, p, k, mu, 1e-3);
        if !(step < 1e-8) {
            return Err(Error::NoConvergence(format!("multiplier {mu} lost near {p}")));
        }
        z = z1;
        p = p1;
    }
    newton_center(family, p, k)
}

/// Refines a boundary point with preperiodic critical dynamics for `t/2`
/// of the form 1/4: the critical value lands on the repelling fixed point
/// (cubic) or the critical value is a pole (Newton).
fn polish_boundary(family: Family, t: &Angle, p0: C) -> Result<C> {
    if t != &Angle::new(1, 2) {
        return Err(Error::Unsupported("only t = 1/2 has a closed form here".into()));
    }
    let mut p = p0;
    for _ in 0..50 {
        let f = |pp: C| -> Result<C> {
            Ok(match family {
                Family::Cubic => {
                    // f(f(-a)) must be the fixed point γ(0) on ∂A1.
                    let m = MapFamily::cubic(pp)?;
                    let v = m.f(m.f(-pp));
                    m.f(v) - v
                }
                Family::Newton => {
                    let (pq, q) = newton_pq(pp);
                    let v = -q / pq;
                    3.0 * v * v + pq
                }
            })
        };
        let h = 1e-7;
        let v = f(p)?;
        let d = (f(p + h)? - v) / h;
        let step = v / d;
        p -= step;
        if step.norm() < 1e-15 {
            break;
        }
    }
    if (p - p0).norm() > 1e-3 {
        return Err(Error::NoConvergence(format!("boundary polish drifted from {p0} to {p}")));
    }
    Ok(p)
}

/// All `t` with denominator at most `max_den` such that `t/2` has doubling
/// period `k ≥ 2`.
pub fn cusp_angles(max_den: u64) -> Vec<(Angle, u32)> {
    let mut out = Vec::new();
    for q in 2..=max_den as i64 {
        for p in 1..q {
            if num_integer::gcd(p, q) != 1 {
                continue;
            }
            let t = Angle::new(p, q);
            if let Some(k) = doubling_period(&t.half()) {
                if k >= 2 && !is_excluded_angle(&t) {
                    out.push((t, k));
                }
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// The copies with cusps ±4i/3 sit where the boundary arc meets the
/// imaginary axis, at `t = 1` (equivalently 0). No angle in (0, 1) with a
/// periodic half reaches them, so the filter only guards the endpoint.
fn is_excluded_angle(t: &Angle) -> bool {
    t.is_zero()
}

/// Quadratic centers of exact period `m`, ordered by real part.
pub fn quadratic_centers(m: u32) -> Vec<C> {
    if m == 1 {
        return vec![ZERO];
    }
    // Gleason polynomial G_m(c) = f_c^m(0) divided by lower periods.
    let mut g = vec![ZERO];
    let mut all = Vec::new();
    for _ in 0..m {
        // g <- g^2 + c
        let sq = poly_mul(&g, &g);
        g = poly_add(&sq, &[ZERO, ONE]);
    }
    let roots = poly_roots(&g);
    for c in roots {
        // Keep roots of exact period m.
        let mut z = ZERO;
        let mut period = 0;
        for j in 1..=m {
            z = z * z + c;
            if z.norm() < 1e-8 {
                period = j;
                break;
            }
        }
        if period == m {
            all.push(c);
        }
    }
    let mut uniq: Vec<C> = Vec::new();
    for c in all {
        if !uniq.iter().any(|u| (u - c).norm() < 1e-8) {
            uniq.push(c);
        }
    }
    uniq.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    uniq
}

/// Residual of the critical-orbit periodicity equation and its derivative.
fn center_residual(family: Family, p: C, n: usize) -> Result<(C, C)> {
    let m = family.map(p)?;
    let crit = m.free_critical_point().unwrap();
    let dcrit = match family {
        Family::Cubic => -ONE,
        Family::Newton => ZERO,
    };
    let mut z = crit;
    let mut dz = dcrit;
    for _ in 0..n {
        let (fz, dfz) = m.f_d(z);
        dz = dfz * dz + m.f_dparam(z);
        z = fz;
    }
    Ok((z - crit, dz - dcrit))
}

fn newton_center(family: Family, guess: C, n: usize) -> Result<C> {
    let mut p = guess;
    for _ in 0..100 {
        let (f, df) = center_residual(family, p, n)?;
        let step = f / df;
        if !step.is_finite() {
            break;
        }
        // Damp huge steps.
        let s = if step.norm() > 0.05 { step * (0.05 / step.norm()) } else { step };
        p -= s;
        if s.norm() < 1e-15 {
            break;
        }
    }
    let (f, _) = center_residual(family, p, n)?;
    if f.norm() < 1e-10 {
        Ok(p)
    } else {
        Err(Error::NoConvergence(format!("periodicity residual {} at {p}", f.norm())))
    }
}

/// Exact period of the free critical point, up to `cap`.
fn critical_period(family: Family, p: C, cap: usize) -> Option<usize> {
    let m = family.map(p).ok()?;
    let c = m.free_critical_point()?;
    let mut z = c;
    for j in 1..=cap {
        z = m.f(z);
        if (z - c).norm() < 1e-7 {
            return Some(j);
        }
    }
    None
}

/// A center inside the copy at `t`, for the period-`m` quadratic center
/// of the given index.
pub fn center_in_copy_indexed(family: Family, t: &Angle, m: u32, index: usize) -> Result<ParamPoint> {
    let k = match doubling_period(&t.half()) {
        Some(k) if k >= 2 => k,
        _ => return Err(Error::Unsupported(format!("{t} is not a cusp angle"))),
    };
    let cusp = boundary_param(family, t)?.value;
    let inner = param_at(family, t, 0.05)?;
    let dir = (cusp - inner) / (cusp - inner).norm();
    let n = (k * m) as usize;
    // First the m = 1 center: by multiplier continuation from the cusp,
    // then by pushing the cusp outward.
    let mut c1 = None;
    let by_multiplier = center_by_multiplier(family, cusp, k as usize);
    for guess in by_multiplier.into_iter().chain([0.0005, 0.001, 0.0025, 0.005, 0.01, 0.02, 0.04, 0.08].map(|d| cusp + dir * d)) {
        if let Ok(p) = newton_center(family, guess, k as usize) {
            // A center far from the cusp belongs to another copy.
            let near = (p - cusp).norm() < 2.0 * (cusp - inner).norm();
            if near && critical_period(family, p, k as usize) == Some(k as usize) && validate_copy(family, p, t, k).is_ok() {
                c1 = Some(p);
                break;
            }
        }
    }
    let c1 = c1.ok_or_else(|| Error::NoConvergence(format!("no period-{k} center near the cusp at {t}")))?;
    let qcs = quadratic_centers(m);
    let qc = *qcs.get(index).ok_or_else(|| Error::Unsupported(format!("period {m} has {} centers", qcs.len())))?;
    let value = if m == 1 {
        c1
    } else {
        // Affine model of the copy: c = 1/4 at the cusp, c = 0 at c1.
        let guess = c1 + (cusp - c1) * (qc * 4.0);
        let p = newton_center(family, guess, n)?;
        if critical_period(family, p, n) != Some(n) {
            return Err(Error::WrongBasin(format!("root {p} has the wrong critical period")));
        }
        validate_copy(family, p, t, k)?;
        p
    };
    Ok(ParamPoint { family, value, region: Region::Center { t: t.clone(), k, m, index }, err: 1e-12 })
}

/// The principal period-`m` center of the copy at `t`.
pub fn center_in_copy(family: Family, t: &Angle, m: u32) -> Result<ParamPoint> {
    center_in_copy_indexed(family, t, m, 0)
}

/// Checks that `p` lies in the copy attached at `t`: the free critical
/// point is not captured by the main basin, and the internal ray of angle
/// `t/2` lands on a point of period `k` whose small Julia set contains the
/// free critical point's orbit.
fn validate_copy(family: Family, p: C, t: &Angle, k: u32) -> Result<()> {
    let m = family.map(p)?;
    let sb = main_basin(family, p)?;
    let crit = m.free_critical_point().unwrap();
    let mut z = crit;
    for _ in 0..200 {
        z = m.f(z);
        if (z - sb.center).norm() < 1e-6 {
            return Err(Error::WrongBasin(format!("critical point captured at {p}")));
        }
    }
    let ray = sb.trace_ray(&t.half(), 0.0);
    let land = match ray.landing {
        Some(l) => l.z(),
        None => periodic_landing(&m, &ray.points, k as usize)
            .ok_or_else(|| Error::WrongBasin(format!("ray {} does not land at {p}", t.half())))?,
    };
    let back = m.iterate_d(land, k as usize).0;
    if (back - land).norm() > 1e-5 {
        return Err(Error::WrongBasin(format!("landing of ray {} is not {k}-periodic", t.half())));
    }
    // The critical point must be in the component of the small Julia set
    // hanging at that landing point: its f^k orbit stays near.
    let r = 4.0 * (land - crit).norm().max(1e-3);
    let mut w = crit;
    for _ in 0..200 {
        w = m.iterate_d(w, k as usize).0;
        if (w - crit).norm() > r {
            return Err(Error::WrongBasin(format!("critical orbit leaves the copy at {p}")));
        }
    }
    Ok(())
}

/// Landing point of a ray ending near a weakly repelling `k`-cycle, where
/// the traced levels converge too slowly: the period-`k` point found from
/// the last ray point, accepted when the ray is still closing in on it.
fn periodic_landing(m: &MapFamily, points: &[crate::maps::SpherePoint], k: usize) -> Option<C> {
    let n = points.len();
    if n < 30 {
        return None;
    }
    let mut z = points[n - 1].z();
    for _ in 0..50 {
        let (w, d) = m.iterate_d(z, k);
        let step = (w - z) / (d - ONE);
        if !step.is_finite() {
            return None;
        }
        z -= step;
        if step.norm() < 1e-14 {
            break;
        }
    }
    let (w, d) = m.iterate_d(z, k);
    if (w - z).norm() > 1e-10 || d.norm() <= 1.0 {
        return None;
    }
    let dist = |i: usize| (points[i].z() - z).norm();
    let (far, mid, end) = (dist(n / 3), dist(2 * n / 3), dist(n - 1));
    (end < mid && mid < far && end < 0.25 * far).then_some(z)
}

/// Result of the correspondence map.
#[derive(Clone, Debug, Serialize)]
pub struct Correspondence {
    pub input: ParamPoint,
    pub output: ParamPoint,
    pub approximate: bool,
}

/// The correspondence from the cubic to the Newton family.
pub fn correspondence(a: &ParamPoint) -> Result<Correspondence> {
    if a.family != Family::Cubic {
        return Err(Error::Unsupported("correspondence starts in the cubic family".into()));
    }
    if is_excluded_parameter(a.value) || a.region == Region::Excluded {
        return Err(Error::Unsupported(format!("{} lies in a copy with cusp ±4i/3", a.value)));
    }
    let output = match &a.region {
        Region::Cusp { t, .. } | Region::Boundary { t } => boundary_param(Family::Newton, t)?,
        Region::Center { t, m, index, .. } => center_in_copy_indexed(Family::Newton, t, *m, *index)?,
        _ => return Err(Error::Unsupported(format!("{} is not a cusp, center or boundary point", a.value))),
    };
    Ok(Correspondence { input: a.clone(), output, approximate: false })
}

/// Parameters in the two copies attached at ±4i/3: the double-fixed-point
/// parameters themselves and the period-2 centers ±i√2 of those copies.
pub fn is_excluded_parameter(a: C) -> bool {
    let marks = [C::new(0.0, 4.0 / 3.0), C::new(0.0, -4.0 / 3.0), C::new(0.0, 2f64.sqrt()), C::new(0.0, -(2f64.sqrt()))];
    marks.iter().any(|m| (a - m).norm() < 1e-6)
}

/// Classification used by the parameter-plane renderer: converges to the
/// main basin (0), attracted elsewhere (1) or undecided (2).
pub fn classify_parameter(family: Family, p: C, cap: usize, tol: f64) -> u8 {
    let m = match family.map(p) {
        Ok(m) => m,
        Err(_) => return 2,
    };
    let (center, _) = center_and_derivative(family, p);
    let mut z = m.free_critical_point().unwrap();
    for _ in 0..cap {
        z = m.f(z);
        if !z.is_finite() || z.norm() > 1e6 {
            return 2;
        }
        if (z - center).norm() < tol {
            return 0;
        }
    }
    1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cusp_angle_examples() {
        let v = cusp_angles(7);
        assert!(v.contains(&(Angle::new(2, 3), 2)));
        assert!(v.contains(&(Angle::new(2, 7), 3)));
        assert!(!v.iter().any(|(t, _)| t.is_zero()));
    }

    #[test]
    fn quadratic_center_list() {
        assert_eq!(quadratic_centers(1), vec![ZERO]);
        let c2 = quadratic_centers(2);
        assert_eq!(c2.len(), 1);
        assert!((c2[0] + ONE).norm() < 1e-12);
        assert_eq!(quadratic_centers(3).len(), 3);
    }

    #[test]
    fn canonical_reflection() {
        let a = canonical(Family::Cubic, C::new(-1.0, 0.5));
        assert!(a.re > 0.0 && a.im < 0.0);
        let l = canonical(Family::Newton, C::new(0.2, -0.7));
        assert!(l.re <= 0.0 && l.im > 0.0);
    }
}
