//! Invariant graphs, the three faces Δ₀, Δ₁, Δ₂, itineraries of points and
//! nests of puzzle pieces.
//!
//! A graph is a set of polylines on the sphere (closed rays and spines
//! through small Julia sets) together with "thick" pieces: basin closures
//! that belong to the graph as a whole. Faces are told apart by the parity
//! of a point against each fundamental cycle of the graph, drawn in the
//! chart `1/(z - z_ref)` with `z_ref` off the graph.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64 as C;
use serde::Serialize;
use serde_json::json;

use crate::angles::{Angle, TriadicWord};
use crate::boettcher::{
    basin_center, trace_external_ray, trace_internal_ray, BasinId, RayTrace, SuperBasin,
};
use crate::error::{Error, Result};
use crate::maps::{Chart, MapFamily, SpherePoint};
use crate::numerics::ZERO;

/// Spherical distance below which a point counts as lying on the graph.
pub const TAU_GRAPH: f64 = 1e-6;
/// Arc endpoints closer than this are the same vertex.
pub const MERGE_TOL: f64 = 1e-5;
pub const DEFAULT_DEPTH: usize = 12;
pub const MAX_DEPTH: usize = 24;
/// At most this many words are reported by `itinerary_of_point`.
pub const MAX_WORDS: usize = 3;

const RING_RADIUS: f64 = 4e-6;
const RING_POINTS: usize = 32;
const CHUNK: usize = 32;
/// Base samples with Böttcher modulus below this are dropped.
const BASIN_CUT: f64 = 0.5;
/// Base samples of polynomial graphs stay in `|z| <= POLY_WINDOW`.
const POLY_WINDOW: f64 = 3.5;
const CLOUD_SIZE: usize = 160;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Variant {
    Dbas,
    CubicRenorm,
    NewtonRenorm,
    CubicBoundary,
    NewtonBoundary,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Dbas => "dbas",
            Variant::CubicRenorm => "cubic-renorm",
            Variant::NewtonRenorm => "newton-renorm",
            Variant::CubicBoundary => "cubic-boundary",
            Variant::NewtonBoundary => "newton-boundary",
        }
    }
}

/// Extra combinatorial input for a graph.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum GraphData {
    None,
    /// `t0 = t/2`, of period `k` under doubling.
    Renorm { t0: Angle, k: u32 },
    /// The boundary angle `t` with `a = a(t)` or `λ = λ(t)`.
    Boundary { t: Angle },
}

#[derive(Clone, Debug)]
pub struct Arc {
    pub label: String,
    pub points: Vec<SpherePoint>,
    pub err: f64,
}

/// Result of `locate`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Location {
    Face(u8),
    OnGraph,
}

#[derive(Clone, Debug, Serialize)]
pub struct PieceNest {
    pub address: Vec<u8>,
    pub estimate: SpherePoint,
    /// Diameter of the pulled-back sample cloud (spherical metric).
    pub diameter: f64,
    /// The pulled-back sample cloud.
    #[serde(skip)]
    pub points: Vec<SpherePoint>,
}

/// Axis-aligned boxes over runs of segments, for fast rejection.
#[derive(Clone, Debug)]
struct Seg3 {
    pts: Vec<[f64; 3]>,
    /// Segment `i` joins `pts[i]` and `pts[i+1]` unless `breaks[i]`.
    breaks: Vec<bool>,
    boxes: Vec<([f64; 3], [f64; 3], usize, usize)>,
}

impl Seg3 {
    fn new(arcs: &[Arc]) -> Self {
        let mut pts = Vec::new();
        let mut breaks = Vec::new();
        for a in arcs {
            for (i, p) in a.points.iter().enumerate() {
                pts.push(p.xyz());
                breaks.push(i + 1 == a.points.len());
            }
        }
        let mut boxes = Vec::new();
        let mut s = 0;
        while s < pts.len() {
            let e = (s + CHUNK).min(pts.len());
            let mut lo = [f64::INFINITY; 3];
            let mut hi = [f64::NEG_INFINITY; 3];
            for p in &pts[s..e.min(pts.len() - 1) + 1] {
                for d in 0..3 {
                    lo[d] = lo[d].min(p[d]);
                    hi[d] = hi[d].max(p[d]);
                }
            }
            boxes.push((lo, hi, s, e));
            s = e;
        }
        Seg3 { pts, breaks, boxes }
    }

    fn dist(&self, p: [f64; 3], cutoff: f64) -> f64 {
        let mut best = cutoff;
        for (lo, hi, s, e) in &self.boxes {
            let mut d2 = 0.0;
            for d in 0..3 {
                let v = if p[d] < lo[d] {
                    lo[d] - p[d]
                } else if p[d] > hi[d] {
                    p[d] - hi[d]
                } else {
                    0.0
                };
                d2 += v * v;
            }
            if d2.sqrt() >= best {
                continue;
            }
            for i in *s..*e {
                let a = self.pts[i];
                let d = if self.breaks[i] || i + 1 >= self.pts.len() {
                    norm3(sub3(p, a))
                } else {
                    seg_dist(p, a, self.pts[i + 1])
                };
                if d < best {
                    best = d;
                }
            }
        }
        best
    }
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

fn seg_dist(p: [f64; 3], a: [f64; 3], b: [f64; 3]) -> f64 {
    let ab = sub3(b, a);
    let l2 = dot3(ab, ab);
    let t = if l2 > 0.0 { (dot3(sub3(p, a), ab) / l2).clamp(0.0, 1.0) } else { 0.0 };
    norm3(sub3(p, [a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2]]))
}

/// Closed polygon in a plane chart with chunked bounding data.
#[derive(Clone, Debug)]
struct Cycle {
    pts: Vec<C>,
    /// (ymin, ymax, xmax, first segment, end segment)
    chunks: Vec<(f64, f64, f64, usize, usize)>,
}

impl Cycle {
    fn new(mut pts: Vec<C>) -> Self {
        if pts.first() != pts.last() {
            pts.push(pts[0]);
        }
        let nseg = pts.len() - 1;
        let mut chunks = Vec::new();
        let mut s = 0;
        while s < nseg {
            let e = (s + CHUNK).min(nseg);
            let (mut ylo, mut yhi, mut xhi) = (f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
            for p in &pts[s..=e] {
                ylo = ylo.min(p.im);
                yhi = yhi.max(p.im);
                xhi = xhi.max(p.re);
            }
            chunks.push((ylo, yhi, xhi, s, e));
            s = e;
        }
        Cycle { pts, chunks }
    }

    /// Even-odd parity of `p` (true = inside).
    fn parity(&self, p: C) -> bool {
        let mut inside = false;
        for &(ylo, yhi, xhi, s, e) in &self.chunks {
            if p.im < ylo || p.im > yhi || p.re > xhi {
                continue;
            }
            for i in s..e {
                let a = self.pts[i];
                let b = self.pts[i + 1];
                if (a.im > p.im) != (b.im > p.im) {
                    let x = a.re + (p.im - a.im) * (b.re - a.re) / (b.im - a.im);
                    if x > p.re {
                        inside = !inside;
                    }
                }
            }
        }
        inside
    }
}

/// An invariant graph with its face labels and sample clouds.
#[derive(Clone, Debug)]
pub struct Graph {
    pub map: MapFamily,
    pub variant: Variant,
    pub data: GraphData,
    pub arcs: Vec<Arc>,
    /// Basins whose closure belongs to the graph.
    thick: Vec<SuperBasin>,
    /// Every superattracting basin, used to trim base samples.
    attractors: Vec<SuperBasin>,
    /// Free critical cycle for renormalizable graphs.
    pub renorm_cycle: Vec<C>,
    /// Arc endpoints after merging.
    pub vertices: Vec<SpherePoint>,
    chart_ref: C,
    cycles: Vec<Cycle>,
    seg: Seg3,
    labels: Vec<(Vec<bool>, u8)>,
    samples: [Vec<SpherePoint>; 3],
    reps: [SpherePoint; 3],
}

/// Coordinate of `q` in the chart used at `p`.
fn chart_coord(p: &SpherePoint, q: &SpherePoint) -> C {
    match p.chart {
        Chart::Finite => q.z(),
        Chart::Infinity => q.w(),
    }
}

/// Moves `p` by a displacement of spherical size about `|d|`.
pub fn offset(p: &SpherePoint, d: C) -> SpherePoint {
    let v = p.value;
    let s = (1.0 + v.norm_sqr()) / 2.0;
    match p.chart {
        Chart::Finite => SpherePoint::finite(v + d * s),
        Chart::Infinity => SpherePoint::inverse(v + d * s),
    }
}

/// Rays landing at a critical point converge like a square root, so their
/// traces stop short of it. Such endpoints are snapped onto the point.
const CRITICAL_SNAP: f64 = 2e-3;

fn label_ray(m: &MapFamily, t: &RayTrace, what: &str) -> Result<Arc> {
    let last = t.points.last().copied();
    let crit = last.and_then(|p| {
        m.finite_critical_points()
            .into_iter()
            .map(SpherePoint::finite)
            .map(|c| (c.dist(&p), c))
            .filter(|(d, _)| *d < CRITICAL_SNAP)
            .min_by(|a, b| a.0.total_cmp(&b.0))
    });
    if let Some((gap, c)) = crit {
        let mut points = t.points.clone();
        if gap > 0.0 {
            points.push(c);
        }
        let err = if t.landed() { t.err().max(gap) } else { gap };
        return Ok(Arc { label: what.to_string(), points, err });
    }
    if !t.landed() {
        return Err(Error::GraphConstruction(format!("{what} does not land ({:?})", t.status)));
    }
    Ok(Arc { label: what.to_string(), points: t.points.clone(), err: t.err() })
}

fn external_arc(m: &MapFamily, t: &Angle) -> Result<Arc> {
    let r = trace_external_ray(m, t, 0.0);
    let mut a = label_ray(m, &r, &format!("R^inf({t})"))?;
    a.points.insert(0, SpherePoint::infinity());
    Ok(a)
}

fn internal_arc(m: &MapFamily, b: BasinId, t: &Angle) -> Result<Arc> {
    let r = trace_internal_ray(m, b, t, 0.0)?;
    label_ray(m, &r, &format!("R_{b}({t})"))
}

fn basin_arc(sb: &SuperBasin, t: &Angle, name: &str) -> Result<Arc> {
    let r = sb.trace_ray(t, 0.0);
    label_ray(&sb.map, &r, &format!("R_{name}({t})"))
}

/// The free critical cycle of a center parameter.
fn critical_cycle(m: &MapFamily, k: usize) -> Result<Vec<C>> {
    let c = m
        .free_critical_point()
        .ok_or_else(|| Error::Unsupported(format!("{} has no free critical point", m.name())))?;
    let back = m.iterate_d(c, k).0;
    if (back - c).norm() > 1e-8 {
        return Err(Error::Unsupported(format!(
            "renormalizable graphs are built at centers: |f^{k}(c) - c| = {:.3e}",
            (back - c).norm()
        )));
    }
    let mut cyc = vec![c];
    for _ in 1..k {
        let z = m.f(*cyc.last().unwrap());
        cyc.push(z);
    }
    Ok(cyc)
}

fn dedupe_angles(v: Vec<Angle>) -> Vec<Angle> {
    let mut out: Vec<Angle> = Vec::new();
    for t in v {
        if !out.contains(&t) {
            out.push(t);
        }
    }
    out
}

/// Arcs, thick basins, attractors and the free critical cycle of a graph.
type Pieces = (Vec<Arc>, Vec<SuperBasin>, Vec<SuperBasin>, Vec<C>);

fn graph_pieces(m: &MapFamily, variant: Variant, data: &GraphData) -> Result<Pieces> {
    let ang = Angle::new;
    let mut arcs = Vec::new();
    let mut thick = Vec::new();
    let mut attractors = Vec::new();
    let mut cycle = Vec::new();
    let renorm_spine = |cyc: &[C], k: usize, arcs: &mut Vec<Arc>, thick: &mut Vec<SuperBasin>| -> Result<()> {
        for (j, &c) in cyc.iter().enumerate() {
            let sb = SuperBasin::new(*m, BasinId::Renorm, c, k)?;
            arcs.push(basin_arc(&sb, &Angle::zero(), &format!("U{j}"))?);
            if j == 0 {
                arcs.push(basin_arc(&sb, &ang(1, 2), "U0")?);
            }
            thick.push(sb);
        }
        Ok(())
    };
    match (variant, m, data) {
        (Variant::Dbas, MapFamily::Dbas, _) => {
            for t in [ang(0, 1), ang(1, 3), ang(2, 3)] {
                arcs.push(external_arc(m, &t)?);
            }
            for b in [BasinId::A2, BasinId::A3] {
                for t in [ang(0, 1), ang(1, 2)] {
                    arcs.push(internal_arc(m, b, &t)?);
                }
                attractors.push(SuperBasin::fixed(*m, b)?);
            }
        }
        (Variant::CubicRenorm, MapFamily::Cubic(_), GraphData::Renorm { t0, k }) => {
            let k = *k as usize;
            cycle = critical_cycle(m, k)?;
            for t in [ang(0, 1), ang(1, 3), ang(2, 3)] {
                arcs.push(external_arc(m, &t)?);
            }
            let mut a1 = vec![ang(0, 1), ang(1, 2)];
            let mut s = t0.clone();
            for _ in 0..k {
                a1.push(s.clone());
                s = s.mul_int(2);
            }
            for t in dedupe_angles(a1) {
                arcs.push(internal_arc(m, BasinId::A1, &t)?);
            }
            for t in dedupe_angles(vec![ang(0, 1), t0.mul_int(2)]) {
                arcs.push(internal_arc(m, BasinId::A1Prime, &t)?);
            }
            renorm_spine(&cycle, k, &mut arcs, &mut thick)?;
            attractors.push(SuperBasin::fixed(*m, BasinId::A1)?);
        }
        (Variant::NewtonRenorm, MapFamily::Newton(_), GraphData::Renorm { t0, k }) => {
            let k = *k as usize;
            cycle = critical_cycle(m, k)?;
            for b in [BasinId::B2, BasinId::B3] {
                for t in [ang(0, 1), ang(1, 2)] {
                    arcs.push(internal_arc(m, b, &t)?);
                }
            }
            let mut b1 = vec![ang(0, 1), ang(1, 2)];
            let mut s = t0.clone();
            for _ in 0..k {
                b1.push(s.clone());
                s = s.mul_int(2);
            }
            for t in dedupe_angles(b1) {
                arcs.push(internal_arc(m, BasinId::B1, &t)?);
            }
            for t in dedupe_angles(vec![ang(0, 1), t0.mul_int(2)]) {
                arcs.push(internal_arc(m, BasinId::W1, &t)?);
            }
            renorm_spine(&cycle, k, &mut arcs, &mut thick)?;
            for b in [BasinId::B1, BasinId::B2, BasinId::B3] {
                attractors.push(SuperBasin::fixed(*m, b)?);
            }
        }
        (Variant::CubicBoundary, MapFamily::Cubic(_), GraphData::Boundary { t }) => {
            for s in [ang(0, 1), ang(1, 3), ang(2, 3)] {
                arcs.push(external_arc(m, &s)?);
            }
            for s in dedupe_angles(vec![t.half(), ang(1, 2), ang(0, 1)]) {
                arcs.push(internal_arc(m, BasinId::A1, &s)?);
            }
            for s in dedupe_angles(vec![ang(0, 1), t.clone()]) {
                arcs.push(internal_arc(m, BasinId::A1Prime, &s)?);
            }
            let a1 = SuperBasin::fixed(*m, BasinId::A1)?;
            thick.push(a1.clone());
            attractors.push(a1);
        }
        (Variant::NewtonBoundary, MapFamily::Newton(_), GraphData::Boundary { t }) => {
            // R1(1/2) is a spine through the closed basin to the co-landing
            // point of R2(1/2).
            for s in dedupe_angles(vec![ang(0, 1), t.half(), t.mul_int(2), ang(1, 2)]) {
                arcs.push(internal_arc(m, BasinId::B1, &s)?);
            }
            for b in [BasinId::B2, BasinId::B3] {
                for s in [ang(1, 2), ang(0, 1)] {
                    arcs.push(internal_arc(m, b, &s)?);
                }
            }
            for s in dedupe_angles(vec![ang(0, 1), t.clone()]) {
                arcs.push(internal_arc(m, BasinId::W1, &s)?);
            }
            let b1 = SuperBasin::fixed(*m, BasinId::B1)?;
            thick.push(b1);
            for b in [BasinId::B1, BasinId::B2, BasinId::B3] {
                attractors.push(SuperBasin::fixed(*m, b)?);
            }
        }
        _ => {
            return Err(Error::GraphConstruction(format!(
                "variant {} does not match map {} and data {:?}",
                variant.name(),
                m.name(),
                data
            )))
        }
    }
    for (j, &c) in cycle.iter().enumerate() {
        if j == 0 {
            attractors.push(SuperBasin::new(*m, BasinId::Renorm, c, cycle.len())?);
        }
    }
    Ok((arcs, thick, attractors, cycle))
}

/// Vertex of the arc arrangement: representative point.
fn vertex_id(verts: &mut Vec<SpherePoint>, p: SpherePoint) -> usize {
    for (i, v) in verts.iter().enumerate() {
        if v.dist(&p) < MERGE_TOL {
            return i;
        }
    }
    verts.push(p);
    verts.len() - 1
}

/// Fundamental cycles as sequences of (arc, reversed).
fn fundamental_cycles(nv: usize, edges: &[(usize, usize)]) -> Result<Vec<Vec<(usize, bool)>>> {
    // BFS spanning forest from vertex 0.
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; nv];
    let mut seen = vec![false; nv];
    let mut depth = vec![0usize; nv];
    let mut tree = vec![false; edges.len()];
    let mut queue = std::collections::VecDeque::new();
    seen[0] = true;
    queue.push_back(0);
    while let Some(v) = queue.pop_front() {
        for (e, &(a, b)) in edges.iter().enumerate() {
            let w = if a == v {
                b
            } else if b == v {
                a
            } else {
                continue;
            };
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some((v, e));
                depth[w] = depth[v] + 1;
                tree[e] = true;
                queue.push_back(w);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::GraphConstruction(format!(
            "graph is disconnected: {} of {nv} vertices reachable",
            seen.iter().filter(|s| **s).count()
        )));
    }
    let mut out = Vec::new();
    for (e, &(a, b)) in edges.iter().enumerate() {
        if tree[e] {
            continue;
        }
        // Path a -> ... -> lca <- ... <- b, then the edge b -> a.
        let mut left = Vec::new();
        let mut right = Vec::new();
        let (mut x, mut y) = (a, b);
        while depth[x] > depth[y] {
            let (p, pe) = parent[x].unwrap();
            left.push((pe, x, p));
            x = p;
        }
        while depth[y] > depth[x] {
            let (p, pe) = parent[y].unwrap();
            right.push((pe, y, p));
            y = p;
        }
        while x != y {
            let (p, pe) = parent[x].unwrap();
            left.push((pe, x, p));
            x = p;
            let (q, qe) = parent[y].unwrap();
            right.push((qe, y, q));
            y = q;
        }
        let mut cyc = Vec::new();
        // a -> lca along tree edges.
        for (pe, from, _) in &left {
            cyc.push((*pe, edges[*pe].0 != *from));
        }
        // lca -> b.
        for (qe, from, _) in right.iter().rev() {
            cyc.push((*qe, edges[*qe].1 != *from));
        }
        // b -> a along e.
        cyc.push((e, edges[e].0 != b));
        out.push(cyc);
    }
    Ok(out)
}

impl Graph {
    /// Builds one of the five graphs. For the renormalizable variants the
    /// parameter must be a center: the small Julia set is then the closure
    /// of the critical Fatou component and its spine is drawn with internal
    /// rays of that component.
    pub fn build(m: &MapFamily, variant: Variant, data: &GraphData) -> Result<Graph> {
        let (arcs, thick, attractors, cycle) = graph_pieces(m, variant, data)?;
        let mut verts = Vec::new();
        let mut edges = Vec::new();
        for a in &arcs {
            let u = vertex_id(&mut verts, a.points[0]);
            let v = vertex_id(&mut verts, *a.points.last().unwrap());
            edges.push((u, v));
        }
        let cyc_edges = fundamental_cycles(verts.len(), &edges)?;
        let verts = verts;
        if cyc_edges.len() != 2 {
            let ends: Vec<String> = arcs
                .iter()
                .zip(&edges)
                .map(|(a, (u, v))| format!("{}: {u}->{v}", a.label))
                .collect();
            return Err(Error::GraphConstruction(format!(
                "expected 2 independent cycles (3 faces), found {}; arcs {}",
                cyc_edges.len(),
                ends.join(", ")
            )));
        }
        let seg = Seg3::new(&arcs);
        let chart_ref = pick_reference(m, &seg);
        let to_chart = |p: &SpherePoint| chart_point(chart_ref, p);
        let cycles: Vec<Cycle> = cyc_edges
            .iter()
            .map(|cyc| {
                let mut pts = Vec::new();
                for &(e, rev) in cyc {
                    let mut seq: Vec<C> = arcs[e].points.iter().map(to_chart).collect();
                    if rev {
                        seq.reverse();
                    }
                    pts.extend(seq);
                }
                Cycle::new(pts)
            })
            .collect();
        let mut g = Graph {
            map: *m,
            variant,
            data: data.clone(),
            arcs,
            thick,
            attractors,
            renorm_cycle: cycle,
            vertices: verts,
            chart_ref,
            cycles,
            seg,
            labels: Vec::new(),
            samples: [Vec::new(), Vec::new(), Vec::new()],
            reps: [SpherePoint::infinity(); 3],
        };
        g.assign_labels()?;
        g.build_samples();
        for d in 0..3 {
            if g.samples[d].len() < 8 {
                return Err(Error::GraphConstruction(format!("face {d} has only {} samples", g.samples[d].len())));
            }
        }
        Ok(g)
    }

    fn signature(&self, p: &SpherePoint) -> Vec<bool> {
        let w = chart_point(self.chart_ref, p);
        self.cycles.iter().map(|c| c.parity(w)).collect()
    }

    fn assign_labels(&mut self) -> Result<()> {
        let m = self.map;
        let ang = Angle::new;
        let ext_point = |t: Angle| -> Result<SpherePoint> {
            let r = trace_external_ray(&m, &t, 0.5);
            r.points.last().copied().ok_or_else(|| Error::GraphConstruction(format!("no point on R^inf({t})")))
        };
        let int_point = |b: BasinId, t: Angle| -> Result<SpherePoint> {
            let r = trace_internal_ray(&m, b, &t, 1.0)?;
            r.points.last().copied().ok_or_else(|| Error::GraphConstruction(format!("no point on R_{b}({t})")))
        };
        let refs: Vec<(SpherePoint, u8)> = match self.variant {
            Variant::Dbas => vec![(ext_point(ang(5, 6))?, 0), (ext_point(ang(1, 2))?, 1), (ext_point(ang(1, 6))?, 2)],
            Variant::CubicRenorm | Variant::CubicBoundary => {
                vec![(ext_point(ang(1, 6))?, 0), (ext_point(ang(1, 2))?, 1), (ext_point(ang(5, 6))?, 2)]
            }
            Variant::NewtonRenorm => {
                let w2 = SpherePoint::finite(basin_center(&m, BasinId::W2)?);
                vec![(w2, 0), (int_point(BasinId::B2, ang(1, 4))?, 2)]
            }
            Variant::NewtonBoundary => {
                let t = match &self.data {
                    GraphData::Boundary { t } => t.clone(),
                    _ => unreachable!(),
                };
                vec![
                    (int_point(BasinId::B3, ang(3, 4))?, 0),
                    (int_point(BasinId::B3, t.half().half())?, 1),
                    (int_point(BasinId::B2, ang(1, 4))?, 2),
                ]
            }
        };
        let mut labels: Vec<(Vec<bool>, u8)> = Vec::new();
        for (p, l) in &refs {
            if self.seg.dist(p.xyz(), 1.0) < 1e-4 {
                return Err(Error::GraphConstruction(format!("reference point for face {l} lies on the graph")));
            }
            let s = self.signature(p);
            if labels.iter().any(|(q, _)| *q == s) {
                return Err(Error::GraphConstruction(format!("reference points for two faces share signature {s:?}")));
            }
            labels.push((s, *l));
        }
        if labels.len() == 2 {
            // The third face: the remaining realized signature.
            let missing = (0u8..3).find(|d| !labels.iter().any(|(_, l)| l == d)).unwrap();
            let mut found = None;
            for p in sphere_grid(4000) {
                if self.seg.dist(p.xyz(), 1e-3) < 1e-3 {
                    continue;
                }
                let s = self.signature(&p);
                if !labels.iter().any(|(q, _)| *q == s) {
                    found = Some(s);
                    break;
                }
            }
            let s = found.ok_or_else(|| Error::GraphConstruction("third face not found".into()))?;
            labels.push((s, missing));
        }
        self.labels = labels;
        Ok(())
    }

    fn build_samples(&mut self) {
        let mut cand: Vec<SpherePoint> = if self.map.is_polynomial() {
            let n = 56;
            let mut v = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let z = C::new(
                        -POLY_WINDOW + 2.0 * POLY_WINDOW * (i as f64 + 0.5) / n as f64,
                        -POLY_WINDOW + 2.0 * POLY_WINDOW * (j as f64 + 0.5) / n as f64,
                    );
                    if z.norm() <= POLY_WINDOW {
                        v.push(SpherePoint::finite(z));
                    }
                }
            }
            v
        } else {
            sphere_grid(3000)
        };
        // Points hugging the arcs on both sides.
        for a in &self.arcs {
            let step = (a.points.len() / 40).max(1);
            for i in (1..a.points.len().saturating_sub(1)).step_by(step) {
                let p = a.points[i];
                let q = a.points[i + 1];
                let dir = chart_coord(&p, &q) - p.value;
                if dir.norm() == 0.0 || !dir.is_finite() {
                    continue;
                }
                let nrm = dir * C::new(0.0, 1.0) / dir.norm();
                for s in [2e-3, -2e-3, 1e-2, -1e-2] {
                    cand.push(offset(&p, nrm * s));
                }
            }
        }
        let mut faces: [Vec<(f64, SpherePoint)>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for p in cand {
            if self.map.is_polynomial() && p.z().norm() > POLY_WINDOW {
                continue;
            }
            let d = self.seg.dist(p.xyz(), 1.0);
            if d < 1e-4 || self.is_deep(&p) || self.captured_by_thick(&p) {
                continue;
            }
            if let Some(f) = self.face_of(&p) {
                faces[f as usize].push((d, p));
            }
        }
        for f in 0..3 {
            let pts = &faces[f];
            if pts.is_empty() {
                continue;
            }
            let (ri, _) = pts.iter().enumerate().fold((0, -1.0), |acc, (i, (d, _))| if *d > acc.1 { (i, *d) } else { acc });
            self.reps[f] = pts[ri].1;
            // Farthest-point subsample keeps the cloud spread out.
            let mut chosen = vec![ri];
            let mut mind: Vec<f64> = pts.iter().map(|(_, p)| p.dist(&pts[ri].1)).collect();
            while chosen.len() < CLOUD_SIZE.min(pts.len()) {
                let (j, _) = mind.iter().enumerate().fold((0, -1.0), |acc, (i, d)| if *d > acc.1 { (i, *d) } else { acc });
                chosen.push(j);
                for (i, (_, p)) in pts.iter().enumerate() {
                    mind[i] = mind[i].min(p.dist(&pts[j].1));
                }
            }
            self.samples[f] = chosen.into_iter().map(|i| pts[i].1).collect();
        }
    }

    /// Whether `p` lies in a Böttcher disk of modulus `BASIN_CUT` around a
    /// superattracting point (or its preimage components).
    fn is_deep(&self, p: &SpherePoint) -> bool {
        if !p.is_finite_value() || p.is_infinity() {
            return false;
        }
        let z0 = p.z();
        for b in &self.attractors {
            let mut z = z0;
            for j in 0..4 {
                if (z - b.center).norm() < b.series_radius() {
                    let phi = b.phi.eval(z - b.center);
                    if phi.norm().powf(0.5f64.powi(j)) < BASIN_CUT {
                        return true;
                    }
                    break;
                }
                z = b.map.iterate_d(z, b.period).0;
                if !z.is_finite() {
                    break;
                }
            }
        }
        false
    }

    /// Whether the orbit of `p` converges to a thick basin's cycle. Cheaper
    /// than `in_thick` and also true on the non-immediate components.
    fn captured_by_thick(&self, p: &SpherePoint) -> bool {
        if !p.is_finite_value() || p.is_infinity() {
            return false;
        }
        self.thick.iter().any(|b| {
            let mut z = p.z();
            for _ in 0..400 {
                if (z - b.center).norm() < b.series_radius() {
                    return true;
                }
                z = b.map.iterate_d(z, b.period).0;
                if !z.is_finite() {
                    return false;
                }
            }
            false
        })
    }

    /// Membership in a basin closure that is part of the graph.
    fn in_thick(&self, p: &SpherePoint) -> bool {
        if self.thick.is_empty() || !p.is_finite_value() || p.is_infinity() {
            return false;
        }
        let z0 = p.z();
        for b in &self.thick {
            let mut z = z0;
            let mut conv = false;
            for _ in 0..400 {
                if (z - b.center).norm() < 1e-6 {
                    conv = true;
                    break;
                }
                for _ in 0..b.period {
                    z = self.map.f(z);
                }
                if !z.is_finite() {
                    break;
                }
            }
            if conv && b.coordinate(z0).is_ok() {
                return true;
            }
        }
        false
    }

    /// Face by parity signature alone (the point is assumed off the graph).
    pub fn face_of(&self, p: &SpherePoint) -> Option<u8> {
        let s = self.signature(p);
        self.labels.iter().find(|(q, _)| *q == s).map(|(_, l)| *l)
    }

    /// Spherical distance from `p` to the polyline arcs, capped at `cutoff`.
    pub fn distance_to_arcs(&self, p: &SpherePoint, cutoff: f64) -> f64 {
        self.seg.dist(p.xyz(), cutoff)
    }

    pub fn locate(&self, p: &SpherePoint) -> Location {
        if self.distance_to_arcs(p, TAU_GRAPH) < TAU_GRAPH || self.in_thick(p) {
            return Location::OnGraph;
        }
        match self.face_of(p) {
            Some(f) => Location::Face(f),
            None => Location::OnGraph,
        }
    }

    /// Itinerary words `ε₀…ε_n` of `z`. Points whose orbit runs along the
    /// graph get one word per side, followed through the orbit by a ring of
    /// nearby points rescaled back to radius `RING_RADIUS` at every step.
    pub fn itinerary_of_point(&self, z: &SpherePoint, depth: usize) -> Result<Vec<Vec<u8>>> {
        if depth > MAX_DEPTH {
            return Err(Error::Unsupported(format!("itinerary depth {depth} exceeds {MAX_DEPTH}")));
        }
        let mut orbit = vec![self.snap(*z)];
        for _ in 0..depth {
            let next = self.snap(self.map.evaluate(*orbit.last().unwrap()));
            orbit.push(next);
        }
        self.itinerary_of_orbit(&orbit)
    }

    /// Itinerary words along a given orbit `z, f(z), …` (one digit per
    /// point). Useful when the orbit is known more accurately than by
    /// iteration, e.g. as landing points of rays `d^i t`.
    pub fn itinerary_of_orbit(&self, orbit: &[SpherePoint]) -> Result<Vec<Vec<u8>>> {
        if orbit.is_empty() || orbit.len() > MAX_DEPTH + 1 {
            return Err(Error::Unsupported(format!("orbit length {} outside 1..={}", orbit.len(), MAX_DEPTH + 1)));
        }
        let depth = orbit.len() - 1;
        let near = |p: &SpherePoint| {
            self.distance_to_arcs(p, 8.0 * RING_RADIUS) < 4.0 * RING_RADIUS || self.in_thick(p)
        };
        // Trackers: (word, representative near the orbit or None).
        let mut trackers: Vec<(Vec<u8>, Option<SpherePoint>)> = vec![(Vec::new(), None)];
        for step in 0..=depth {
            let zi = self.snap(orbit[step]);
            let close = near(&zi);
            let mut next: Vec<(Vec<u8>, Option<SpherePoint>)> = Vec::new();
            for (word, rep) in trackers {
                if !close {
                    let f = self.face_of(&zi).ok_or_else(|| Error::AmbiguityOverflow { step, labels: 0 })?;
                    let mut w = word;
                    w.push(f);
                    next.push((w, None));
                    continue;
                }
                let reps: Vec<SpherePoint> = match rep {
                    Some(r) => vec![r],
                    None => (0..RING_POINTS)
                        .map(|i| offset(&zi, C::from_polar(RING_RADIUS, 2.0 * PI * (i as f64 + 0.5) / RING_POINTS as f64)))
                        .collect(),
                };
                for r in reps {
                    if let Some(f) = self.ring_face(&r, &zi) {
                        let mut w = word.clone();
                        w.push(f.0);
                        next.push((w, Some(f.1)));
                    }
                }
            }
            // Merge trackers with equal words, keeping one representative.
            next.sort_by(|a, b| a.0.cmp(&b.0));
            next.dedup_by(|a, b| a.0 == b.0);
            let distinct: BTreeSet<&Vec<u8>> = next.iter().map(|(w, _)| w).collect();
            if distinct.len() > MAX_WORDS {
                return Err(Error::AmbiguityOverflow { step, labels: distinct.len() });
            }
            if next.is_empty() {
                return Err(Error::AmbiguityOverflow { step, labels: 0 });
            }
            trackers = next;
            if step == depth {
                break;
            }
            let z_next = self.snap(orbit[step + 1]);
            trackers = trackers
                .into_iter()
                .map(|(w, rep)| {
                    let rep = rep.map(|r| self.reseat(&self.map.evaluate(r), &z_next));
                    (w, rep)
                })
                .collect();
        }
        Ok(trackers.into_iter().map(|(w, _)| w).collect())
    }

    /// Orbit points this close to a vertex are moved onto it, which keeps
    /// round-off from pushing orbits off repelling vertices.
    fn snap(&self, p: SpherePoint) -> SpherePoint {
        self.vertices.iter().find(|v| v.dist(&p) < MERGE_TOL).copied().unwrap_or(p)
    }

    /// Moves the image `img` of a representative back onto the ring around
    /// `center`. The face is read off `img` itself, which sits farther from
    /// the vertex; a radial rescale alone drifts across arms that spiral.
    fn reseat(&self, img: &SpherePoint, center: &SpherePoint) -> SpherePoint {
        let d = chart_coord(center, img) - center.value;
        if d.norm() == 0.0 || !d.is_finite() {
            return offset(center, C::new(RING_RADIUS, 0.0));
        }
        let radial = offset(center, d / d.norm() * RING_RADIUS);
        let Some(want) = self.clear_face(img) else { return radial };
        if self.clear_face(&radial) == Some(want) {
            return radial;
        }
        let n = 4 * RING_POINTS;
        for k in 1..=n / 2 {
            for sgn in [1.0, -1.0] {
                let q = offset(center, d / d.norm() * C::from_polar(RING_RADIUS, sgn * 2.0 * PI * k as f64 / n as f64));
                if self.clear_face(&q) == Some(want) {
                    return q;
                }
            }
        }
        radial
    }

    fn clear_face(&self, p: &SpherePoint) -> Option<u8> {
        if self.distance_to_arcs(p, TAU_GRAPH / 4.0) < TAU_GRAPH / 4.0 || self.in_thick(p) {
            return None;
        }
        self.face_of(p)
    }

    /// Face of a ring representative, nudging it around `center` if it sits
    /// on the graph. Returns the face and the point used.
    fn ring_face(&self, r: &SpherePoint, center: &SpherePoint) -> Option<(u8, SpherePoint)> {
        let d = chart_coord(center, r) - center.value;
        for k in 0..5 {
            let rot = C::from_polar(1.0, 0.02 * k as f64 * if k % 2 == 0 { 1.0 } else { -1.0 });
            let q = if k == 0 { *r } else { offset(center, d / d.norm().max(1e-300) * RING_RADIUS * rot) };
            if self.distance_to_arcs(&q, TAU_GRAPH / 4.0) < TAU_GRAPH / 4.0 || self.in_thick(&q) {
                continue;
            }
            if let Some(f) = self.face_of(&q) {
                return Some((f, q));
            }
        }
        None
    }

    /// The point of `⋂ closure(P_{w₀…w_n})` with `n = digits.len() - 1`,
    /// computed by pulling a cloud of samples of the last face back through
    /// the inverse branches selected by the word.
    pub fn nest_digits(&self, digits: &[u8]) -> Result<PieceNest> {
        if digits.is_empty() || digits.iter().any(|&d| d > 2) {
            return Err(Error::BranchSelection { depth: 0, msg: "address must be a nonempty word over 0,1,2".into() });
        }
        let n = digits.len() - 1;
        let last = digits[n] as usize;
        let mut est = Some(self.reps[last]);
        let mut cloud = self.samples[last].clone();
        for i in (0..n).rev() {
            let want = digits[i];
            est = est.and_then(|p| self.branch(&p, want));
            cloud = cloud.iter().filter_map(|p| self.branch(p, want)).collect();
            if cloud.is_empty() {
                return Err(Error::BranchSelection { depth: i, msg: format!("no preimage in face {want}") });
            }
        }
        let estimate = est.unwrap_or(cloud[0]);
        let mut diameter: f64 = 0.0;
        for (i, p) in cloud.iter().enumerate() {
            diameter = diameter.max(p.dist(&estimate));
            for q in &cloud[i + 1..] {
                diameter = diameter.max(p.dist(q));
            }
        }
        Ok(PieceNest { address: digits.to_vec(), estimate, diameter, points: cloud })
    }

    /// `nest_digits` on the first `depth + 1` digits of `w`.
    pub fn nest_point(&self, w: &TriadicWord, depth: usize) -> Result<PieceNest> {
        self.nest_digits(&w.prefix(depth + 1))
    }

    /// The preimage of `p` lying in face `want`, if exactly one does.
    fn branch(&self, p: &SpherePoint, want: u8) -> Option<SpherePoint> {
        let pre = self.map.preimages(*p);
        let mut hit = None;
        for q in pre {
            if self.face_of(&q) == Some(want) {
                if hit.is_some() {
                    return None;
                }
                hit = Some(q);
            }
        }
        hit
    }

    /// Sample points of a face (off the graph, outside the basin disks).
    pub fn face_samples(&self, f: u8) -> &[SpherePoint] {
        &self.samples[f as usize]
    }

    pub fn thick_basins(&self) -> &[SuperBasin] {
        &self.thick
    }

    pub fn to_json(&self) -> serde_json::Value {
        let arcs: Vec<serde_json::Value> = self
            .arcs
            .iter()
            .map(|a| {
                let pts: Vec<serde_json::Value> = a
                    .points
                    .iter()
                    .map(|p| if p.is_infinity() { json!("inf") } else { json!([p.z().re, p.z().im]) })
                    .collect();
                json!({"label": a.label, "err": a.err, "points": pts})
            })
            .collect();
        json!({
            "family": self.map.name(),
            "param": self.map.param().map(|p| [p.re, p.im]),
            "variant": self.variant.name(),
            "data": self.data,
            "arcs": arcs,
            "renorm_cycle": self.renorm_cycle.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
        })
    }
}

/// The chart `1/(z - z_ref)` used for parity tests.
fn chart_point(zref: C, p: &SpherePoint) -> C {
    match p.chart {
        Chart::Finite => 1.0 / (p.value - zref),
        Chart::Infinity => p.value / (1.0 - zref * p.value),
    }
}

/// A reference point far from all arcs.
fn pick_reference(m: &MapFamily, seg: &Seg3) -> C {
    let cands: Vec<C> = if m.is_polynomial() {
        let mut v = Vec::new();
        for i in 0..24 {
            for j in 0..24 {
                v.push(C::new(-3.0 + 6.0 * i as f64 / 23.0, -3.0 + 6.0 * j as f64 / 23.0));
            }
        }
        v
    } else {
        sphere_grid(600).into_iter().filter(|p| p.chart == Chart::Finite).map(|p| p.value).collect()
    };
    let mut best = (ZERO, -1.0);
    for c in cands {
        let d = seg.dist(SpherePoint::finite(c).xyz(), 2.0);
        if d > best.1 {
            best = (c, d);
        }
    }
    best.0
}

/// Roughly uniform points on the sphere (Fibonacci lattice).
pub fn sphere_grid(n: usize) -> Vec<SpherePoint> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let zc = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - zc * zc).sqrt();
            let th = golden * i as f64;
            let (x, y) = (r * th.cos(), r * th.sin());
            // Inverse stereographic projection from the north pole.
            if zc < 0.0 {
                SpherePoint::finite(C::new(x, y) / (1.0 - zc))
            } else {
                // w = 1/z = (x - iy)/(1 + zc)
                SpherePoint::inverse(C::new(x, -y) / (1.0 + zc))
            }
        })
        .collect()
}

/// Membership of `z` in the small filled Julia set of a period-`k`
/// renormalization around the free critical point `c`.
///
/// The disk is centered at `c` with radius `2·max(|c - f^k c|, |β - c|)`,
/// where `β` is the period-`k` point closest to `c` that is not on the
/// critical cycle. Orbits captured by another attracting cycle are
/// rejected.
pub fn small_julia_member(m: &MapFamily, k: usize, z: &SpherePoint) -> bool {
    let Some(c) = m.free_critical_point() else { return false };
    if !z.is_finite_value() || z.is_infinity() {
        return false;
    }
    let radius = renorm_radius(m, k);
    let mut w = z.z();
    let others: Vec<C> = match *m {
        MapFamily::Newton(l) => crate::maps::newton_roots(l).to_vec(),
        MapFamily::Cubic(_) => vec![ZERO],
        MapFamily::Dbas => vec![],
    };
    for _ in 0..400 {
        if (w - c).norm() > radius || !w.is_finite() {
            return false;
        }
        if others.iter().any(|o| (w - o).norm() < 1e-6) {
            return false;
        }
        w = m.iterate_d(w, k).0;
    }
    true
}

/// Radius of the disk used by `small_julia_member`.
pub fn renorm_radius(m: &MapFamily, k: usize) -> f64 {
    let Some(c) = m.free_critical_point() else { return 0.0 };
    let ck = m.iterate_d(c, k).0;
    let beta = renorm_beta(m, k).unwrap_or(ck);
    2.0 * (c - ck).norm().max((beta - c).norm())
}

/// The repelling period-`k` point nearest the free critical point.
pub fn renorm_beta(m: &MapFamily, k: usize) -> Option<C> {
    let c = m.free_critical_point()?;
    let mut cyc = vec![c];
    for _ in 1..k {
        let z = m.f(*cyc.last().unwrap());
        cyc.push(z);
    }
    // Newton's method on f^k(z) = z from a ring of starts around c.
    let mut best: Option<(f64, C)> = None;
    for i in 0..48 {
        for r in [0.05, 0.15, 0.3, 0.6] {
            let mut z = c + C::from_polar(r, 2.0 * PI * i as f64 / 48.0);
            for _ in 0..60 {
                let (w, d) = m.iterate_d(z, k);
                let step = (w - z) / (d - 1.0);
                if !step.is_finite() {
                    break;
                }
                z -= step;
                if step.norm() < 1e-15 {
                    break;
                }
            }
            let (w, d) = m.iterate_d(z, k);
            if (w - z).norm() > 1e-10 || d.norm() <= 1.0 || cyc.iter().any(|q| (q - z).norm() < 1e-6) {
                continue;
            }
            let dist = (z - c).norm();
            if best.map(|b| dist < b.0).unwrap_or(true) {
                best = Some((dist, z));
            }
        }
    }
    best.map(|b| b.1)
}
