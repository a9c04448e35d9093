//! Semi-conjugacies ψ from the polynomial planes (dbas or cubic) to a Newton
//! sphere, ray equivalence and numerical checks of the mating relation
//! `N_λ ∘ ψ = ψ ∘ f`.
//!
//! ψ is computed symbolically: the itinerary of a point with respect to the
//! source graph is read as the address of a nest of Newton puzzle pieces.
//! Points of the bounded superattracting basins are moved by Böttcher
//! coordinates instead (A₂↔B₂, A₃↔B₃, A₁↔B₁, and the renormalization cycle).

use std::collections::HashMap;

use num_complex::Complex64 as C;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::angles::{itinerary_of_angle, Angle, ItinClass};
use crate::boettcher::{trace_external_ray, BasinId, SuperBasin};
use crate::error::{Error, Result};
use crate::maps::{MapFamily, SpherePoint};
use crate::puzzle::{sphere_grid, Graph, PieceNest};

/// Samples are landing points of rays with denominator at most this.
pub const SAMPLE_DENOMINATOR: i64 = 6561;
/// Fraction of drawn rays that must land.
pub const MIN_LANDED_FRACTION: f64 = 0.8;
const ESCAPE_RADIUS: f64 = 1e3;
const ORBIT_CAP: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    Dbas,
    Cubic,
}

impl Side {
    pub fn name(&self) -> &'static str {
        match self {
            Side::Dbas => "dbas",
            Side::Cubic => "cubic",
        }
    }
}

/// Itinerary class of the external angle `t` of a point on `side`.
///
/// The dbas plane is glued with reversed orientation, so its points are
/// coded by `ε(-t)`. The dbas face labels follow the same convention.
pub fn angle_class(side: Side, t: &Angle) -> ItinClass {
    match side {
        Side::Dbas => itinerary_of_angle(&t.neg()),
        Side::Cubic => itinerary_of_angle(t),
    }
}

/// A source point: either a point of the plane or the landing point of an
/// external ray.
#[derive(Clone, Debug)]
pub enum Input {
    Point(SpherePoint),
    Angle(Angle),
}

#[derive(Clone, Debug, Serialize)]
pub struct PsiValue {
    pub image: SpherePoint,
    /// Diameter bound of the Newton piece holding the image.
    pub err: f64,
    /// Itinerary words of the source point (empty for basin points).
    pub words: Vec<Vec<u8>>,
    /// Address used for the Newton nest.
    pub address: Vec<u8>,
    #[serde(skip)]
    pub nest: Option<PieceNest>,
}

/// ψ from one polynomial plane to the Newton sphere.
#[derive(Clone, Debug)]
pub struct SemiConj {
    pub side: Side,
    pub source: Graph,
    pub target: Graph,
    pub depth: usize,
    /// Matching superattracting basins (source, Newton).
    basins: Vec<(SuperBasin, SuperBasin)>,
}

impl SemiConj {
    pub fn new(side: Side, source: Graph, target: Graph, depth: usize) -> Result<Self> {
        let src = source.map;
        let dst = target.map;
        if !matches!(dst, MapFamily::Newton(_)) {
            return Err(Error::Unsupported("target must be a Newton map".into()));
        }
        let mut basins = Vec::new();
        match (side, src) {
            (Side::Dbas, MapFamily::Dbas) => {
                for (a, b) in [(BasinId::A2, BasinId::B2), (BasinId::A3, BasinId::B3)] {
                    basins.push((SuperBasin::fixed(src, a)?, SuperBasin::fixed(dst, b)?));
                }
            }
            (Side::Cubic, MapFamily::Cubic(_)) => {
                basins.push((SuperBasin::fixed(src, BasinId::A1)?, SuperBasin::fixed(dst, BasinId::B1)?));
                let (sc, tc) = (&source.renorm_cycle, &target.renorm_cycle);
                if !sc.is_empty() {
                    if sc.len() != tc.len() {
                        return Err(Error::Unsupported(format!(
                            "renormalization periods differ: {} and {}",
                            sc.len(),
                            tc.len()
                        )));
                    }
                    let k = sc.len();
                    for (&u, &v) in sc.iter().zip(tc) {
                        basins.push((
                            SuperBasin::new(src, BasinId::Renorm, u, k)?,
                            SuperBasin::new(dst, BasinId::Renorm, v, k)?,
                        ));
                    }
                }
            }
            _ => {
                return Err(Error::Unsupported(format!("side {} does not match map {}", side.name(), src.name())));
            }
        }
        Ok(SemiConj { side, source, target, depth, basins })
    }

    pub fn lambda(&self) -> C {
        self.target.map.param().unwrap_or_default()
    }

    /// ψ of a point of the filled Julia set.
    pub fn psi(&self, z: &SpherePoint) -> Result<PsiValue> {
        self.psi_at(z, self.depth)
    }

    pub fn psi_at(&self, z: &SpherePoint, depth: usize) -> Result<PsiValue> {
        self.check_membership(z)?;
        if let Some(v) = self.psi_fatou(z)? {
            return Ok(v);
        }
        let words = self.source.itinerary_of_point(z, depth)?;
        self.from_words(words, None)
    }

    /// ψ of the landing point of `R(t)` on the source side. The orbit is
    /// taken as the landing points of `R(3^i t)`.
    pub fn psi_angle(&self, t: &Angle, depth: usize, cache: &mut LandingCache) -> Result<PsiValue> {
        let orbit = self.landing_orbit(t, depth, cache)?;
        let words = self.source.itinerary_of_orbit(&orbit)?;
        self.from_words(words, None)
    }

    fn landing_orbit(&self, t: &Angle, depth: usize, cache: &mut LandingCache) -> Result<Vec<SpherePoint>> {
        let mut orbit = Vec::with_capacity(depth + 1);
        let mut s = t.clone();
        for _ in 0..=depth {
            let p = cache.landing(&self.source.map, &s).ok_or_else(|| {
                Error::SourceMembership(format!("ray {s} does not land on the {} side", self.side.name()))
            })?;
            orbit.push(p);
            s = s.mul_int(3);
        }
        Ok(orbit)
    }

    /// Picks a word (the one extending `prefer` if given) and nests it.
    fn from_words(&self, words: Vec<Vec<u8>>, prefer: Option<&[u8]>) -> Result<PsiValue> {
        let pick = prefer
            .and_then(|p| words.iter().find(|w| w.starts_with(p) || p.starts_with(&w[..w.len().min(p.len())])))
            .or_else(|| words.first())
            .cloned()
            .ok_or_else(|| Error::AmbiguityOverflow { step: 0, labels: 0 })?;
        let nest = self.target.nest_digits(&pick)?;
        Ok(PsiValue { image: nest.estimate, err: nest.diameter, words, address: pick, nest: Some(nest) })
    }

    fn check_membership(&self, z: &SpherePoint) -> Result<()> {
        if z.is_infinity() || !z.is_finite_value() {
            return Err(Error::SourceMembership("∞ is not in the filled Julia set".into()));
        }
        let m = self.source.map;
        let mut w = z.z();
        for _ in 0..ORBIT_CAP {
            if w.norm() > ESCAPE_RADIUS || !w.is_finite() {
                return Err(Error::SourceMembership(format!("orbit of {} escapes", z.z())));
            }
            w = m.f(w);
        }
        Ok(())
    }

    /// Böttcher transport for points of the bounded basins; points of
    /// non-immediate components are pulled back along their itinerary.
    fn psi_fatou(&self, z: &SpherePoint) -> Result<Option<PsiValue>> {
        let m = self.source.map;
        for (sa, sb) in &self.basins {
            let mut w = z.z();
            let mut orbit = vec![w];
            let mut captured = false;
            for _ in 0..ORBIT_CAP {
                if (w - sa.center).norm() < sa.series_radius() {
                    captured = true;
                    break;
                }
                w = m.f(w);
                if !w.is_finite() {
                    break;
                }
                orbit.push(w);
            }
            if !captured {
                continue;
            }
            // First orbit point in the immediate basin.
            let Some((j, zeta)) = orbit.iter().enumerate().find_map(|(j, &u)| sa.coordinate(u).ok().map(|c| (j, c)))
            else {
                continue;
            };
            let mut image = SpherePoint::finite(sb.point_at(zeta)?);
            for i in (0..j).rev() {
                let face = self.source.face_of(&SpherePoint::finite(orbit[i])).ok_or_else(|| {
                    Error::BranchSelection { depth: i, msg: "basin orbit meets the graph".into() }
                })?;
                let pre: Vec<SpherePoint> = self
                    .target
                    .map
                    .preimages(image)
                    .into_iter()
                    .filter(|q| self.target.face_of(q) == Some(face))
                    .collect();
                if pre.len() != 1 {
                    return Err(Error::BranchSelection {
                        depth: i,
                        msg: format!("{} preimages in face {face}", pre.len()),
                    });
                }
                image = pre[0];
            }
            return Ok(Some(PsiValue { image, err: 1e-8, words: Vec::new(), address: Vec::new(), nest: None }));
        }
        Ok(None)
    }

    /// Residual of `N(ψ(z))` against `ψ(f(z))` for the landing point of
    /// `R(t)`, with the bound `diam N(cloud_z) + diam cloud_fz`.
    pub fn residual(&self, t: &Angle, depth: usize, cache: &mut LandingCache) -> Result<Residual> {
        let orbit = self.landing_orbit(t, depth + 1, cache)?;
        let wz = self.source.itinerary_of_orbit(&orbit[..=depth])?;
        let pz = self.from_words(wz, None)?;
        let wf = self.source.itinerary_of_orbit(&orbit[1..])?;
        let pf = self.from_words(wf, Some(&pz.address[1..]))?;
        let n = &self.target.map;
        let img = n.evaluate(pz.image);
        let mapped: Vec<SpherePoint> =
            pz.nest.as_ref().map(|c| c.points.iter().map(|p| n.evaluate(*p)).collect()).unwrap_or_default();
        let bound = diameter(&mapped) + pf.err;
        Ok(Residual {
            angle: t.to_string(),
            residual: img.dist(&pf.image),
            bound,
            address: digits(&pz.address),
        })
    }

    /// Checks `N_λ ∘ ψ = ψ ∘ f` on landing points of random rays.
    pub fn verify_semiconjugacy(&self, samples: usize, seed: u64) -> Result<VerifyReport> {
        self.verify_at(samples, seed, self.depth, &mut LandingCache::default())
    }

    pub fn verify_at(&self, samples: usize, seed: u64, depth: usize, cache: &mut LandingCache) -> Result<VerifyReport> {
        let angles = random_angles(samples, seed);
        let mut records = Vec::new();
        let mut landed = 0;
        for t in &angles {
            match self.residual(t, depth, cache) {
                Ok(r) => {
                    landed += 1;
                    records.push(r);
                }
                Err(Error::SourceMembership(_)) => {}
                Err(e) => {
                    landed += 1;
                    records.push(Residual {
                        angle: t.to_string(),
                        residual: f64::INFINITY,
                        bound: 0.0,
                        address: format!("error: {e}"),
                    });
                }
            }
        }
        if (landed as f64) < MIN_LANDED_FRACTION * samples as f64 {
            return Err(Error::InsufficientSamples { landed, drawn: samples });
        }
        let finite: Vec<f64> = records.iter().map(|r| r.residual).filter(|r| r.is_finite()).collect();
        let max_residual = records.iter().map(|r| r.residual).fold(0.0, f64::max);
        let mean_residual = if finite.is_empty() { 0.0 } else { finite.iter().sum::<f64>() / finite.len() as f64 };
        let violations = records.iter().filter(|r| !(r.residual < r.bound)).count();
        Ok(VerifyReport {
            side: self.side,
            lambda: pair(self.lambda()),
            a: self.source.map.param().map(pair),
            depth,
            samples: records.len(),
            drawn: samples,
            max_residual,
            mean_residual,
            violations,
            uncovered_fraction: None,
            records,
        })
    }
}

/// Landing points of external rays, computed once per angle.
#[derive(Clone, Debug, Default)]
pub struct LandingCache {
    map: HashMap<(String, Angle), Option<SpherePoint>>,
}

impl LandingCache {
    pub fn landing(&mut self, m: &MapFamily, t: &Angle) -> Option<SpherePoint> {
        let key = (format!("{}:{:?}", m.name(), m.param()), t.clone());
        self.map
            .entry(key)
            .or_insert_with(|| {
                let r = trace_external_ray(m, t, 0.0);
                if r.landed() {
                    r.landing
                } else {
                    None
                }
            })
            .to_owned()
    }
}

/// Random rational angles with denominators in `2..=SAMPLE_DENOMINATOR`.
pub fn random_angles(n: usize, seed: u64) -> Vec<Angle> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let q = rng.gen_range(2..=SAMPLE_DENOMINATOR);
            let p = rng.gen_range(0..q);
            Angle::new(p, q)
        })
        .collect()
}

fn pair(c: C) -> [f64; 2] {
    [c.re, c.im]
}

fn digits(w: &[u8]) -> String {
    w.iter().map(|d| char::from(b'0' + d)).collect()
}

fn diameter(pts: &[SpherePoint]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            d = d.max(p.dist(q));
        }
    }
    d
}

#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    pub angle: String,
    pub residual: f64,
    pub bound: f64,
    pub address: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub side: Side,
    pub lambda: [f64; 2],
    pub a: Option<[f64; 2]>,
    pub depth: usize,
    pub samples: usize,
    pub drawn: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub violations: usize,
    pub uncovered_fraction: Option<f64>,
    pub records: Vec<Residual>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub words_x: Vec<String>,
    pub words_y: Vec<String>,
    pub address_x: String,
    pub address_y: String,
    /// Longest common prefix of the two nest addresses.
    pub common_prefix: usize,
    pub distance: f64,
    pub bound: f64,
    /// Whether the angle classes intersect, when both inputs are angles.
    pub symbolic: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Equivalence {
    pub equivalent: bool,
    pub certificate: Certificate,
}

fn evaluate_input(s: &SemiConj, x: &Input, cache: &mut LandingCache) -> Result<PsiValue> {
    match x {
        Input::Point(p) => s.psi(p),
        Input::Angle(t) => s.psi_angle(t, s.depth, cache),
    }
}

/// `x ∼_r y` tested as `ψ(x) = ψ(y)` up to the sum of the nest bounds.
pub fn ray_equivalent(
    sx: &SemiConj,
    x: &Input,
    sy: &SemiConj,
    y: &Input,
    cache: &mut LandingCache,
) -> Result<Equivalence> {
    let px = evaluate_input(sx, x, cache)?;
    let py = evaluate_input(sy, y, cache)?;
    // Among the candidate words pick the pair agreeing longest.
    let mut best = (0usize, px.clone(), py.clone());
    for wx in &px.words {
        for wy in &py.words {
            let c = wx.iter().zip(wy).take_while(|(a, b)| a == b).count();
            if c > best.0 {
                best.0 = c;
                best.1 = sx.from_words(vec![wx.clone()], None)?;
                best.2 = sy.from_words(vec![wy.clone()], None)?;
            }
        }
    }
    let (common_prefix, px, py) = best;
    let distance = px.image.dist(&py.image);
    let bound = px.err + py.err;
    let symbolic = match (x, y) {
        (Input::Angle(s), Input::Angle(t)) => {
            let a = angle_class(sx.side, s);
            let b = angle_class(sy.side, t);
            Some(a.members().iter().any(|w| b.contains(w)))
        }
        _ => None,
    };
    Ok(Equivalence {
        equivalent: distance < bound,
        certificate: Certificate {
            words_x: px.words.iter().map(|w| digits(w)).collect(),
            words_y: py.words.iter().map(|w| digits(w)).collect(),
            address_x: digits(&px.address),
            address_y: digits(&py.address),
            common_prefix,
            distance,
            bound,
            symbolic,
        },
    })
}

/// Outcome of the coverage check at one Newton grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Cover {
    Dbas,
    Cubic,
    Both,
    Uncovered,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverageReport {
    pub lambda: [f64; 2],
    pub points: usize,
    pub dbas: usize,
    pub cubic: usize,
    pub both: usize,
    pub uncovered: usize,
    pub uncovered_fraction: f64,
}

/// Checks that every point of a grid on the Newton sphere has a ψ-preimage
/// candidate on one of the two sides. Basin points are transported by
/// Böttcher coordinates; Julia points by their itinerary, which must be
/// realized by a nest on a source side.
pub fn surjectivity_sample(sd: &SemiConj, sc: &SemiConj, points: usize) -> Result<CoverageReport> {
    if (sd.lambda() - sc.lambda()).norm() > 1e-12 {
        return Err(Error::Unsupported("the two semi-conjugacies have different targets".into()));
    }
    let n = sd.target.map;
    let mut counts = [0usize; 4];
    for u in sphere_grid(points) {
        let c = cover_point(sd, sc, &n, &u);
        let k = match c {
            Cover::Dbas => 0,
            Cover::Cubic => 1,
            Cover::Both => 2,
            Cover::Uncovered => 3,
        };
        counts[k] += 1;
    }
    Ok(CoverageReport {
        lambda: pair(sd.lambda()),
        points,
        dbas: counts[0],
        cubic: counts[1],
        both: counts[2],
        uncovered: counts[3],
        uncovered_fraction: counts[3] as f64 / points as f64,
    })
}

fn cover_point(sd: &SemiConj, sc: &SemiConj, n: &MapFamily, u: &SpherePoint) -> Cover {
    // Basin points: follow the orbit into a superattracting disk.
    let mut w = *u;
    for _ in 0..ORBIT_CAP {
        for (side, s) in [(Cover::Dbas, sd), (Cover::Cubic, sc)] {
            for (sa, sb) in &s.basins {
                if w.is_finite_value() && !w.is_infinity() && (w.z() - sb.center).norm() < sb.series_radius() {
                    let zeta = sb.phi.eval(w.z() - sb.center);
                    let back = sa.center + sa.phi_inv.eval(zeta);
                    return if back.is_finite() { side } else { Cover::Uncovered };
                }
            }
        }
        w = n.evaluate(w);
    }
    // Julia points: the itinerary must be realized on some side.
    let Ok(words) = sd.target.itinerary_of_point(u, sd.depth) else { return Cover::Uncovered };
    let mut hit = [false; 2];
    for (i, s) in [sd, sc].iter().enumerate() {
        hit[i] = words.iter().any(|w| s.source.nest_digits(w).is_ok());
    }
    match hit {
        [true, true] => Cover::Both,
        [true, false] => Cover::Dbas,
        [false, true] => Cover::Cubic,
        _ => Cover::Uncovered,
    }
}
