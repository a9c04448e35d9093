//! PPM rendering of dynamical and parameter planes with overlays.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use cubic_mating::angles::Angle;
use cubic_mating::boettcher::{green_external, trace_external_ray};
use cubic_mating::maps::{MapFamily, SpherePoint};
use cubic_mating::params::{classify_parameter, Family};
use cubic_mating::puzzle::Graph;
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Coloring {
    Escape,
    Basin,
    Potential,
}

#[derive(Clone, Debug, Serialize)]
pub struct Window {
    pub center: [f64; 2],
    pub width: f64,
    pub size: u32,
}

impl Window {
    fn pixel(&self, i: u32, j: u32) -> C {
        let s = self.width / self.size as f64;
        C::new(
            self.center[0] - self.width / 2.0 + (i as f64 + 0.5) * s,
            self.center[1] + self.width / 2.0 - (j as f64 + 0.5) * s,
        )
    }

    fn to_pixel(&self, z: C) -> Option<(i64, i64)> {
        let s = self.width / self.size as f64;
        let i = ((z.re - self.center[0] + self.width / 2.0) / s).floor();
        let j = ((self.center[1] + self.width / 2.0 - z.im) / s).floor();
        if i.is_finite() && j.is_finite() {
            Some((i as i64, j as i64))
        } else {
            None
        }
    }
}

pub struct Image {
    pub size: u32,
    pub data: Vec<[u8; 3]>,
}

impl Image {
    fn put(&mut self, i: i64, j: i64, c: [u8; 3]) {
        if i >= 0 && j >= 0 && i < self.size as i64 && j < self.size as i64 {
            self.data[(j as u32 * self.size + i as u32) as usize] = c;
        }
    }

    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for p in &self.data {
            h.update(p);
        }
        format!("{:x}", h.finalize())
    }

    pub fn write_ppm(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(
            std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
        );
        write!(f, "P6\n{} {}\n255\n", self.size, self.size)?;
        for p in &self.data {
            f.write_all(p)?;
        }
        Ok(())
    }
}

const PALETTE: [[u8; 3]; 6] =
    [[214, 69, 65], [66, 133, 214], [90, 178, 92], [236, 190, 60], [150, 90, 190], [40, 40, 40]];

/// Index of the attractor the orbit of `z` reaches, or `None`.
fn attractor(m: &MapFamily, attractors: &[C], z: C, cap: usize) -> Option<usize> {
    let mut w = z;
    for _ in 0..cap {
        for (k, a) in attractors.iter().enumerate() {
            if (w - a).norm() < 1e-6 {
                return Some(k);
            }
        }
        w = m.f(w);
        if !w.is_finite() || w.norm() > 1e8 {
            return None;
        }
    }
    None
}

/// Finite superattracting points: critical points fixed or periodic.
fn finite_attractors(m: &MapFamily) -> Vec<C> {
    let mut out = Vec::new();
    for c in m.finite_critical_points() {
        let mut w = c;
        for _ in 0..8 {
            w = m.f(w);
            if (w - c).norm() < 1e-9 {
                out.push(c);
                break;
            }
        }
    }
    out
}

pub fn render_julia(m: &MapFamily, win: &Window, coloring: Coloring) -> Image {
    let attractors = finite_attractors(m);
    let n = win.size;
    let data: Vec<[u8; 3]> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let z = win.pixel(k % n, k / n);
            if !m.is_polynomial() {
                return match attractor(m, &attractors, z, 200) {
                    Some(i) => PALETTE[i % PALETTE.len()],
                    None => [0, 0, 0],
                };
            }
            match coloring {
                Coloring::Escape => {
                    let mut w = z;
                    for it in 0..500 {
                        if w.norm() > 1e3 {
                            let v = 255 - ((it * 12) % 200) as u8;
                            return [v, v, 255];
                        }
                        w = m.f(w);
                    }
                    [0, 0, 0]
                }
                Coloring::Basin => match attractor(m, &attractors, z, 300) {
                    Some(i) => PALETTE[i % PALETTE.len()],
                    None => {
                        if green_external(m, SpherePoint::finite(z)) > 0.0 {
                            [235, 235, 235]
                        } else {
                            [0, 0, 0]
                        }
                    }
                },
                Coloring::Potential => {
                    let g = green_external(m, SpherePoint::finite(z));
                    if g > 0.0 {
                        let v = (128.0 + 127.0 * (4.0 * g.ln()).sin()) as u8;
                        [v, v, v]
                    } else {
                        [0, 0, 0]
                    }
                }
            }
        })
        .collect();
    Image { size: n, data }
}

pub fn render_param(family: Family, win: &Window, cap: usize, tol: f64) -> Image {
    let n = win.size;
    let data: Vec<[u8; 3]> = (0..n * n)
        .into_par_iter()
        .map(|k| match classify_parameter(family, win.pixel(k % n, k / n), cap, tol) {
            0 => PALETTE[1],
            1 => PALETTE[3],
            _ => [20, 20, 20],
        })
        .collect();
    Image { size: n, data }
}

fn draw_polyline(img: &mut Image, win: &Window, pts: &[SpherePoint], color: [u8; 3]) {
    let s = win.width / win.size as f64;
    for w in pts.windows(2) {
        if w[0].is_infinity() || w[1].is_infinity() {
            continue;
        }
        let (a, b) = (w[0].z(), w[1].z());
        let steps = ((b - a).norm() / s).ceil().clamp(1.0, 4096.0) as usize;
        for k in 0..=steps {
            let z = a + (b - a) * (k as f64 / steps as f64);
            if let Some((i, j)) = win.to_pixel(z) {
                img.put(i, j, color);
            }
        }
    }
}

fn mark(img: &mut Image, win: &Window, p: &SpherePoint, color: [u8; 3]) {
    if p.is_infinity() {
        return;
    }
    if let Some((i, j)) = win.to_pixel(p.z()) {
        for di in -2..=2 {
            for dj in -2..=2 {
                img.put(i + di, j + dj, color);
            }
        }
    }
}

/// Draws external rays and returns their sidecar records. Failures become
/// warnings.
pub fn overlay_rays(img: &mut Image, win: &Window, m: &MapFamily, angles: &[Angle], warnings: &mut Vec<String>) -> Value {
    let mut out = Vec::new();
    if !m.is_polynomial() {
        if !angles.is_empty() {
            warnings.push("external rays need a polynomial map; ray overlay skipped".into());
        }
        return json!([]);
    }
    for t in angles {
        let r = trace_external_ray(m, t, 0.0);
        draw_polyline(img, win, &r.points, [255, 255, 255]);
        if let Some(l) = r.landing {
            mark(img, win, &l, [255, 40, 40]);
        } else {
            warnings.push(format!("ray {t} did not land ({:?})", r.status));
        }
        out.push(json!({
            "angle": t.to_string(),
            "landed": r.landed(),
            "landing": r.landing.map(|p| if p.is_infinity() { json!("inf") } else { json!([p.z().re, p.z().im]) }),
        }));
    }
    Value::Array(out)
}

pub fn overlay_graph(img: &mut Image, win: &Window, g: &Graph) -> Value {
    for a in &g.arcs {
        draw_polyline(img, win, &a.points, [255, 255, 0]);
    }
    json!({"variant": g.variant.name(), "arcs": g.arcs.len(), "vertices": g.vertices.len()})
}
