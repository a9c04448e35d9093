//! Böttcher coordinates, Green's function and ray tracing.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64 as C;
use serde::{Serialize, Serializer};

use crate::angles::Angle;
use crate::error::{Error, Result};
use crate::maps::{newton_roots, MapFamily, SpherePoint};
use crate::numerics::{series_div, taylor_shift, Series, ONE, ZERO};

/// Number of Taylor coefficients kept in the local Böttcher series.
const SERIES_ORDER: usize = 10;
/// Internal rays start at |φ| = e^{-RHO0}.
pub const RHO0: f64 = 6.9;
/// External rays start at potential G0.
const G0: f64 = 8.0;
/// Maximum depth of the level continuation.
pub const MAX_DEPTH: usize = 60;
/// Three consecutive level points within this distance count as landed.
pub const LANDING_TOL: f64 = 1e-7;
/// Rays passing this close to a critical point crash.
pub const CRASH_TOL: f64 = 1e-9;
/// Maximum spherical spacing between consecutive polyline points.
pub const POLYLINE_SPACING: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BasinId {
    Infinity,
    A1,
    A1Prime,
    A2,
    A3,
    B1,
    B2,
    B3,
    W1,
    W2,
    W3,
    /// The superattracting component of a small filled Julia set at a center.
    Renorm,
}

impl fmt::Display for BasinId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BasinId::Infinity => "inf",
            BasinId::A1 => "A1",
            BasinId::A1Prime => "A1'",
            BasinId::A2 => "A2",
            BasinId::A3 => "A3",
            BasinId::B1 => "B1",
            BasinId::B2 => "B2",
            BasinId::B3 => "B3",
            BasinId::W1 => "W1",
            BasinId::W2 => "W2",
            BasinId::W3 => "W3",
            BasinId::Renorm => "U",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum RayBasin {
    External,
    Internal(BasinId),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RayStatus {
    Landed { err: f64 },
    Truncated { depth: usize },
    Crashed,
}

impl RayStatus {
    pub fn is_landed(&self) -> bool {
        matches!(self, RayStatus::Landed { .. })
    }

    pub fn err(&self) -> Option<f64> {
        match self {
            RayStatus::Landed { err } => Some(*err),
            _ => None,
        }
    }
}

impl Serialize for RayStatus {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RayStatus::Landed { .. } => s.serialize_str("landed"),
            RayStatus::Truncated { depth } => s.serialize_str(&format!("truncated({depth})")),
            RayStatus::Crashed => s.serialize_str("crashed-on-precritical"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RayTrace {
    pub map: MapFamily,
    pub basin: RayBasin,
    pub angle: Angle,
    pub points: Vec<SpherePoint>,
    pub landing: Option<SpherePoint>,
    pub status: RayStatus,
}

impl RayTrace {
    pub fn landed(&self) -> bool {
        self.status.is_landed()
    }

    pub fn err(&self) -> f64 {
        self.status.err().unwrap_or(f64::INFINITY)
    }

    /// JSON form used by the CLI.
    pub fn to_json(&self) -> serde_json::Value {
        let pts: Vec<[f64; 2]> = self
            .points
            .iter()
            .map(|p| {
                let z = p.z();
                if z.is_finite() {
                    [z.re, z.im]
                } else {
                    [f64::MAX, 0.0]
                }
            })
            .collect();
        let landing = self.landing.map(|p| {
            let z = p.z();
            if z.is_finite() {
                serde_json::json!([z.re, z.im])
            } else {
                serde_json::json!("inf")
            }
        });
        serde_json::json!({
            "family": self.map.name(),
            "basin": match self.basin { RayBasin::External => "external".to_string(), RayBasin::Internal(b) => b.to_string() },
            "angle": self.angle.to_string(),
            "points": pts,
            "landing": landing,
            "status": self.status,
            "err": self.status.err(),
        })
    }
}

/// G(z) for the polynomial families.
pub fn green_external(m: &MapFamily, z: SpherePoint) -> f64 {
    assert!(m.is_polynomial(), "Green's function at infinity needs a polynomial");
    if z.is_infinity() {
        return f64::INFINITY;
    }
    let shift = external_shift(m);
    let mut w = z.z();
    let mut scale = 1.0;
    for _ in 0..400 {
        if w.norm() > 1e10 {
            return ((w - shift).norm().ln() * scale).max(0.0);
        }
        w = m.f(w);
        scale /= 3.0;
        if !w.is_finite() {
            return 0.0;
        }
    }
    0.0
}

/// `φ_∞^{-1}(W) ≈ W + shift` for large `W`.
fn external_shift(m: &MapFamily) -> C {
    match *m {
        MapFamily::Cubic(a) => -a / 2.0,
        _ => ZERO,
    }
}

/// Local Taylor series of `f(c + u) - f(c)` in `u`.
fn local_series(m: &MapFamily, c: C, order: usize) -> Series {
    let (num, den) = m.rational_form();
    let ns = taylor_shift(&num, c);
    let ds = taylor_shift(&den, c);
    let mut s = series_div(&ns, &ds, order);
    s.c[0] = ZERO;
    s
}

/// A superattracting cycle basin of local degree two, handled through its
/// first-return map `g = f^period` at `center`.
#[derive(Clone, Debug)]
pub struct SuperBasin {
    pub map: MapFamily,
    pub id: BasinId,
    pub center: C,
    pub period: usize,
    /// `g(c+u) - c` as a series.
    pub local: Series,
    /// Böttcher coordinate `φ(c+u)`.
    pub phi: Series,
    /// Inverse `φ^{-1}(ζ) - c`.
    pub phi_inv: Series,
    /// Critical points whose neighbourhoods are legitimate to visit.
    own_critical: Vec<C>,
    /// Radius in `u` where the series is trusted.
    series_radius: f64,
}

impl SuperBasin {
    pub fn new(map: MapFamily, id: BasinId, center: C, period: usize) -> Result<Self> {
        let mut cycle = vec![center];
        let mut z = center;
        for _ in 0..period {
            z = map.f(z);
            cycle.push(z);
        }
        if (z - center).norm() > 1e-9 * (1.0 + center.norm()) {
            return Err(Error::NotInBasin(format!("{center} is not periodic of period {period}")));
        }
        let mut local = Series::new({
            let mut v = vec![ZERO; SERIES_ORDER];
            v[1] = ONE;
            v
        });
        for &cj in &cycle[..period] {
            let s = local_series(&map, cj, SERIES_ORDER);
            local = s.compose(&local);
        }
        let g2 = local.c[2];
        if g2.norm() < 1e-12 || local.c[1].norm() > 1e-9 {
            return Err(Error::Degenerate(format!("{center} is not a simple superattracting point")));
        }
        let phi = bottcher_series(&local);
        let phi_inv = phi.inverse();
        let crits = map.finite_critical_points();
        let own_critical = crits
            .into_iter()
            .filter(|c| cycle.iter().any(|z| (z - c).norm() < 1e-9))
            .collect();
        // Trust region: keep |φ| small and the inverse series well inside
        // its convergence disk.
        let series_radius = 1e-3 / g2.norm().max(1e-3);
        Ok(SuperBasin { map, id, center, period, local, phi, phi_inv, own_critical, series_radius })
    }

    /// Fixed superattracting basin of a family.
    pub fn fixed(map: MapFamily, id: BasinId) -> Result<Self> {
        let center = match (map, id) {
            (MapFamily::Dbas, BasinId::A2) => C::new(0.0, 0.5f64.sqrt()),
            (MapFamily::Dbas, BasinId::A3) => C::new(0.0, -0.5f64.sqrt()),
            (MapFamily::Cubic(_), BasinId::A1) => ZERO,
            (MapFamily::Newton(l), BasinId::B1) => newton_roots(l)[0],
            (MapFamily::Newton(l), BasinId::B2) => newton_roots(l)[1],
            (MapFamily::Newton(l), BasinId::B3) => newton_roots(l)[2],
            _ => return Err(Error::NotInBasin(format!("{id} is not a fixed basin of {}", map.name()))),
        };
        SuperBasin::new(map, id, center, 1)
    }

    /// Newton basin with an explicit root.
    pub fn newton_root(map: MapFamily, id: BasinId, root: C) -> Result<Self> {
        SuperBasin::new(map, id, root, 1)
    }

    fn g(&self, z: C) -> C {
        let mut z = z;
        for _ in 0..self.period {
            z = self.map.f(z);
        }
        z
    }

    /// Radius around the center where the local series are used directly.
    pub fn series_radius(&self) -> f64 {
        self.series_radius
    }

    /// Böttcher coordinate of `z`, normalised by `φ(g z) = φ(z)^2`.
    pub fn coordinate(&self, z: C) -> Result<C> {
        let mut orbit = vec![z];
        let mut w = z;
        let mut ok = false;
        for _ in 0..2000 {
            if (w - self.center).norm() < self.series_radius {
                ok = true;
                break;
            }
            w = self.g(w);
            if !w.is_finite() {
                break;
            }
            orbit.push(w);
        }
        if !ok {
            return Err(Error::NotInBasin(format!("orbit of {z} does not reach {}", self.center)));
        }
        let mut zeta = self.phi.eval(orbit[orbit.len() - 1] - self.center);
        for j in (0..orbit.len() - 1).rev() {
            let r = zeta.sqrt();
            let u = orbit[j] - self.center;
            zeta = if u.norm() < self.series_radius {
                let guess = self.phi.eval(u);
                if (r - guess).norm() <= (-r - guess).norm() { r } else { -r }
            } else {
                let pa = self.point_at(r);
                let pb = self.point_at(-r);
                let da = pa.map(|p| (p - orbit[j]).norm()).unwrap_or(f64::INFINITY);
                let db = pb.map(|p| (p - orbit[j]).norm()).unwrap_or(f64::INFINITY);
                if da.min(db) > 1e-7 * (1.0 + orbit[j].norm()) {
                    return Err(Error::NotInBasin(format!("{} is not in the immediate basin", orbit[j])));
                }
                if da <= db { r } else { -r }
            };
        }
        Ok(zeta)
    }

    /// `φ^{-1}(ζ)` by continuation along the internal ray through ζ.
    pub fn point_at(&self, zeta: C) -> Result<C> {
        if zeta.norm() >= 1.0 {
            return Err(Error::NotInBasin(format!("|ζ| = {} is not inside the unit disk", zeta.norm())));
        }
        if zeta.norm() < 1e-300 {
            return Ok(self.center);
        }
        let rho = -zeta.norm().ln();
        if rho >= RHO0 {
            return Ok(self.center + self.phi_inv.eval(zeta));
        }
        let theta = zeta.arg() / (2.0 * PI);
        let s_end = (RHO0 / rho).log2();
        let tracer = Tracer::internal(self, AngleRepr::Float(theta));
        let run = tracer.run(s_end, false);
        match run.stop {
            Stop::End(_) => Ok(run.points.last().unwrap().1),
            _ => Err(Error::BranchAmbiguity(format!("continuation to ζ = {zeta} failed"))),
        }
    }

    /// Traces the internal ray of angle `t` down to internal potential
    /// `target` (−ln|φ|); `target = 0` means trace to landing.
    pub fn trace_ray(&self, t: &Angle, target: f64) -> RayTrace {
        let s_end = if target > 0.0 { (RHO0 / target).log2() } else { f64::INFINITY };
        let tracer = Tracer::internal(self, AngleRepr::Exact(t.clone()));
        let run = tracer.run(s_end, true);
        let mut points = vec![SpherePoint::finite(self.center)];
        points.extend(run.points.iter().map(|&(_, z)| SpherePoint::finite(z)));
        finish(self.map, RayBasin::Internal(self.id), t.clone(), points, run.stop)
    }
}

/// Solves `φ(g(u)) = φ(u)^2` for the Böttcher series.
fn bottcher_series(g: &Series) -> Series {
    let n = g.order();
    let mut phi = vec![ZERO; n];
    phi[1] = g.c[2];
    for k in 2..n {
        // Coefficient of u^{k+1} decides φ_k; the truncated order limits k.
        if k + 1 >= n {
            break;
        }
        let s = Series::new(phi.clone());
        let lhs = s.compose(&g.clone());
        let rhs = s.mul(&s);
        let diff = lhs.c[k + 1] - rhs.c[k + 1];
        phi[k] = diff / (2.0 * phi[1]);
    }
    // The top coefficient cannot be determined at this truncation.
    phi[n - 1] = ZERO;
    Series::new(phi)
}

#[derive(Clone, Debug)]
enum AngleRepr {
    Exact(Angle),
    Float(f64),
}

impl AngleRepr {
    fn times(&self, d: i64, m: u32) -> f64 {
        match self {
            AngleRepr::Exact(t) => t.mul_pow_f64(d, m),
            AngleRepr::Float(x) => {
                let mut v = x.rem_euclid(1.0);
                for _ in 0..m {
                    v = (v * d as f64).rem_euclid(1.0);
                }
                v
            }
        }
    }
}

enum Kind<'a> {
    External,
    Internal(&'a SuperBasin),
}

struct Tracer<'a> {
    map: MapFamily,
    kind: Kind<'a>,
    angle: AngleRepr,
    avoid: Vec<C>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Stop {
    End(usize),
    Landed(f64),
    Depth(usize),
    Crashed,
    Stalled(usize),
}

struct Run {
    points: Vec<(f64, C)>,
    stop: Stop,
}

impl<'a> Tracer<'a> {
    fn external(map: MapFamily, t: &Angle) -> Self {
        Tracer { map, kind: Kind::External, angle: AngleRepr::Exact(t.clone()), avoid: map.finite_critical_points() }
    }

    fn internal(b: &'a SuperBasin, angle: AngleRepr) -> Self {
        let avoid = b
            .map
            .finite_critical_points()
            .into_iter()
            .filter(|c| !b.own_critical.iter().any(|o| (o - c).norm() < 1e-12))
            .collect();
        Tracer { map: b.map, kind: Kind::Internal(b), angle, avoid }
    }

    /// Iteration count and target value at continuation parameter `s`.
    fn target(&self, s: f64) -> (usize, C) {
        let m = s.ceil().max(0.0) as u32;
        let frac = m as f64 - s;
        match self.kind {
            Kind::External => {
                let g = G0 * 3f64.powf(frac);
                let th = self.angle.times(3, m);
                let w = C::from_polar(g.exp(), 2.0 * PI * th);
                (m as usize, w + external_shift(&self.map))
            }
            Kind::Internal(b) => {
                let rho = RHO0 * 2f64.powf(frac);
                let th = self.angle.times(2, m);
                let zeta = C::from_polar((-rho).exp(), 2.0 * PI * th);
                (m as usize * b.period, b.center + b.phi_inv.eval(zeta))
            }
        }
    }

    fn start(&self) -> C {
        self.target(0.0).1
    }

    /// Newton's method on `f^n(z) = target`.
    fn solve(&self, guess: C, n: usize, target: C, max_move: f64) -> std::result::Result<C, bool> {
        let mut z = guess;
        let mut last = f64::INFINITY;
        for it in 0..60 {
            let mut w = z;
            let mut d = ONE;
            let mut crashed = false;
            for _ in 0..n {
                if self.avoid.iter().any(|c| (w - c).norm() < CRASH_TOL) {
                    crashed = true;
                }
                let (fw, dw) = self.map.f_d(w);
                d *= dw;
                w = fw;
            }
            let f = w - target;
            if !f.is_finite() || !d.is_finite() || d == ZERO {
                return Err(false);
            }
            let dz = f / d;
            z -= dz;
            if (z - guess).norm() > max_move {
                return Err(false);
            }
            let step = dz.norm();
            let scale = 1.0 + z.norm();
            // Either fully converged, or stuck at the rounding floor.
            let floor = it >= 2 && step >= 0.5 * last && step < 1e-10 * scale;
            if step <= 1e-15 * scale || floor {
                if crashed {
                    return Err(true);
                }
                return Ok(z);
            }
            last = step;
        }
        Err(false)
    }

    fn run(&self, s_end: f64, landing: bool) -> Run {
        let mut points = vec![(0.0, self.start())];
        let mut levels: Vec<C> = vec![points[0].1];
        let mut s = 0.0f64;
        let mut h = 0.125f64;
        let max_s = MAX_DEPTH as f64;
        loop {
            if s >= s_end - 1e-12 {
                return Run { points, stop: Stop::End(s.floor() as usize) };
            }
            if s >= max_s - 1e-12 {
                return Run { points, stop: Stop::Depth(MAX_DEPTH) };
            }
            let next_int = s.floor() + 1.0;
            let mut s1 = (s + h).min(next_int).min(s_end).min(max_s);
            if next_int - s1 < 1e-9 {
                s1 = next_int;
            }
            let (n, target) = self.target(s1);
            let z0 = points.last().unwrap().1;
            let max_move = if points.len() >= 2 {
                20.0 * (points[points.len() - 1].1 - points[points.len() - 2].1).norm()
            } else {
                1e-2 * (1.0 + z0.norm())
            }
            .max(1e-9 * (1.0 + z0.norm()));
            match self.solve(z0, n, target, max_move) {
                Ok(z1) => {
                    let spacing = SpherePoint::finite(z0).dist(&SpherePoint::finite(z1));
                    if spacing > POLYLINE_SPACING && h > 1e-5 {
                        h /= 2.0;
                        continue;
                    }
                    points.push((s1, z1));
                    s = s1;
                    if spacing < POLYLINE_SPACING / 4.0 {
                        h = (h * 2.0).min(0.25);
                    }
                    if (s - s.round()).abs() < 1e-12 {
                        levels.push(z1);
                        if landing && levels.len() >= 4 {
                            let k = levels.len();
                            let a = SpherePoint::finite(levels[k - 1]);
                            let b = SpherePoint::finite(levels[k - 2]);
                            let c = SpherePoint::finite(levels[k - 3]);
                            let pair = a.dist(&b).max(a.dist(&c)).max(b.dist(&c));
                            if pair < LANDING_TOL {
                                // Geometric tail of the remaining level steps.
                                let d1 = a.dist(&b);
                                let d0 = b.dist(&c).max(1e-300);
                                let r = (d1 / d0).min(0.95);
                                let tail = d1 * r / (1.0 - r);
                                return Run { points, stop: Stop::Landed(pair.max(tail)) };
                            }
                        }
                    }
                }
                Err(true) => return Run { points, stop: Stop::Crashed },
                Err(false) => {
                    h /= 2.0;
                    if h < 1e-7 {
                        return Run { points, stop: Stop::Stalled(s.floor() as usize) };
                    }
                }
            }
        }
    }
}

fn finish(map: MapFamily, basin: RayBasin, angle: Angle, points: Vec<SpherePoint>, stop: Stop) -> RayTrace {
    let (status, landing) = match stop {
        Stop::Landed(err) => (RayStatus::Landed { err }, points.last().copied()),
        Stop::End(d) | Stop::Depth(d) | Stop::Stalled(d) => (RayStatus::Truncated { depth: d }, None),
        Stop::Crashed => (RayStatus::Crashed, None),
    };
    RayTrace { map, basin, angle, points, landing, status }
}

/// External ray `R^∞(t)` traced down to potential `target` (0 = to landing).
pub fn trace_external_ray(m: &MapFamily, t: &Angle, target: f64) -> RayTrace {
    assert!(m.is_polynomial(), "external rays need a polynomial family");
    let s_end = if target > 0.0 { (G0 / target).ln() / 3f64.ln() } else { f64::INFINITY };
    let tracer = Tracer::external(*m, t);
    let run = tracer.run(s_end, target <= 0.0);
    let points = run.points.iter().map(|&(_, z)| SpherePoint::finite(z)).collect();
    finish(*m, RayBasin::External, t.clone(), points, run.stop)
}

/// The center of a basin, using the standard root labels for Newton maps.
pub fn basin_center(m: &MapFamily, b: BasinId) -> Result<C> {
    match (*m, b) {
        (MapFamily::Cubic(a), BasinId::A1Prime) => Ok(-1.5 * a),
        (MapFamily::Newton(l), BasinId::W1 | BasinId::W2 | BasinId::W3) => {
            let i = match b {
                BasinId::W1 => 0,
                BasinId::W2 => 1,
                _ => 2,
            };
            Ok(newton_copreimage(l, newton_roots(l)[i]))
        }
        _ => SuperBasin::fixed(*m, b).map(|s| s.center),
    }
}

/// The preimage of a root `r` other than `r` itself: `N(w) = r`, `w != r`.
pub fn newton_copreimage(lambda: C, r: C) -> C {
    // 2z³ - 3r z² - (p r + q) has r as a double root; the product of the
    // roots is (p r + q)/2.
    let (p, q) = crate::maps::newton_pq(lambda);
    (p * r + q) / (2.0 * r * r)
}

/// The fixed basin whose preimage component is `b`.
fn parent_basin(b: BasinId) -> Option<BasinId> {
    match b {
        BasinId::A1Prime => Some(BasinId::A1),
        BasinId::W1 => Some(BasinId::B1),
        BasinId::W2 => Some(BasinId::B2),
        BasinId::W3 => Some(BasinId::B3),
        _ => None,
    }
}

/// Internal ray in a fixed basin, or the pulled-back ray in a preimage basin.
pub fn trace_internal_ray(m: &MapFamily, b: BasinId, t: &Angle, target: f64) -> Result<RayTrace> {
    if let Some(parent) = parent_basin(b) {
        let sb = SuperBasin::fixed(*m, parent)?;
        let ray = sb.trace_ray(t, target);
        let c1 = basin_center(m, b)?;
        return pull_back_ray(m, &ray, c1, b);
    }
    let sb = SuperBasin::fixed(*m, b)?;
    Ok(sb.trace_ray(t, target))
}

/// Lifts a ray through the inverse branch that sends its first point to `start`.
pub fn pull_back_ray(m: &MapFamily, ray: &RayTrace, start: C, id: BasinId) -> Result<RayTrace> {
    let mut out = Vec::with_capacity(ray.points.len());
    let mut prev = SpherePoint::finite(start);
    for (i, w) in ray.points.iter().enumerate() {
        if i == 0 {
            out.push(prev);
            continue;
        }
        let mut pre = m.preimages(*w);
        pre.sort_by(|a, b| a.dist(&prev).total_cmp(&b.dist(&prev)));
        let d0 = pre[0].dist(&prev);
        let d1 = pre[1].dist(&prev);
        if d1 < 2.0 * d0 && d0 > 1e-12 {
            return Err(Error::BranchAmbiguity(format!("preimages of {w:?} at comparable distance")));
        }
        prev = pre[0];
        out.push(prev);
    }
    let landing = if ray.landing.is_some() { out.last().copied() } else { None };
    Ok(RayTrace { map: *m, basin: RayBasin::Internal(id), angle: ray.angle.clone(), points: out, landing, status: ray.status })
}

/// Assignment of Newton basin labels to roots.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonLabels {
    /// Roots of B1, B2, B3.
    pub roots: [C; 3],
}

impl NewtonLabels {
    pub fn standard(lambda: C) -> Self {
        NewtonLabels { roots: newton_roots(lambda) }
    }

    pub fn root(&self, b: BasinId) -> Option<C> {
        match b {
            BasinId::B1 => Some(self.roots[0]),
            BasinId::B2 => Some(self.roots[1]),
            BasinId::B3 => Some(self.roots[2]),
            _ => None,
        }
    }
}

/// Whether three directions at ∞ (arguments of far points) are in
/// counter-clockwise cyclic order.
fn ccw(a: f64, b: f64, c: f64) -> bool {
    let t = 2.0 * PI;
    let db = (b - a).rem_euclid(t);
    let dc = (c - a).rem_euclid(t);
    db < dc
}

/// Labels the roots so that `R1(1/2)` and `R2(1/2)` co-land and the angle-0
/// rays reach ∞ in the order B1, B2, B3 (clockwise in the z-plane).
pub fn label_newton_basins(lambda: C) -> Result<NewtonLabels> {
    let m = MapFamily::newton(lambda)?;
    let roots = newton_roots(lambda);
    let mut half = Vec::new();
    let mut zero_dir = Vec::new();
    for r in roots {
        let sb = SuperBasin::newton_root(m, BasinId::B1, r)?;
        let h = sb.trace_ray(&Angle::new(1, 2), 0.0);
        let z = sb.trace_ray(&Angle::zero(), 0.0);
        if !z.landed() || !z.landing.map(|p| p.dist(&SpherePoint::infinity()) < 1e-6).unwrap_or(false) {
            return Err(Error::UnresolvedLabeling(format!("angle-0 ray of root {r} does not reach infinity")));
        }
        let far = z
            .points
            .iter()
            .find(|p| p.z().norm() > 1e3)
            .map(|p| p.z().arg())
            .ok_or_else(|| Error::UnresolvedLabeling("no far point on angle-0 ray".into()))?;
        zero_dir.push(far);
        half.push(h);
    }
    let mut pairs = Vec::new();
    for i in 0..3 {
        for j in i + 1..3 {
            let (a, b) = (&half[i], &half[j]);
            if let (Some(la), Some(lb)) = (a.landing, b.landing) {
                if la.dist(&lb) < 1e-6 {
                    pairs.push((i, j));
                }
            }
        }
    }
    if pairs.len() != 1 {
        return Err(Error::UnresolvedLabeling(format!("{} co-landing pairs among the angle-1/2 rays", pairs.len())));
    }
    let (i, j) = pairs[0];
    let k = 3 - i - j;
    // B1, B2, B3 must appear clockwise around ∞ as seen in the plane.
    let (b1, b2) = if !ccw(zero_dir[i], zero_dir[j], zero_dir[k]) { (i, j) } else { (j, i) };
    Ok(NewtonLabels { roots: [roots[b1], roots[b2], roots[k]] })
}
