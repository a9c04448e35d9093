//! Verification suites run by `cmate verify`.

use std::time::Instant;

use anyhow::{anyhow, Result};
use cubic_mating::angles::{doubling_period, itinerary_of_angle, theta, Angle, TriadicWord};
use cubic_mating::maps::MapFamily;
use cubic_mating::mating::{surjectivity_sample, LandingCache, SemiConj, Side};
use cubic_mating::params::{
    boundary_param, center_in_copy, correspondence, cusp_angles, Family, ParamPoint, Region,
};
use cubic_mating::puzzle::{Graph, GraphData, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Config;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

#[derive(Debug, Serialize)]
pub struct Suite {
    pub name: String,
    pub pass: bool,
    pub seconds: f64,
    pub checks: Vec<Check>,
}

fn check(name: &str, pass: bool, detail: Value) -> Check {
    log::info!("{name}: {}", if pass { "pass" } else { "FAIL" });
    Check { name: name.to_string(), pass, detail }
}

pub fn run(cfg: &Config) -> Result<Vec<Suite>> {
    let mut out = Vec::new();
    for name in cfg.suites() {
        let start = Instant::now();
        let checks = match name.as_str() {
            "symbolic" => symbolic(cfg)?,
            "params" => params(cfg)?,
            "puzzle" => puzzle(cfg)?,
            "mating" => mating(cfg)?,
            "boundary" => boundary(cfg)?,
            other => return Err(anyhow!("unknown suite `{other}`")),
        };
        out.push(Suite {
            pass: checks.iter().all(|c| c.pass),
            name,
            seconds: start.elapsed().as_secs_f64(),
            checks,
        });
    }
    Ok(out)
}

fn symbolic(cfg: &Config) -> Result<Vec<Check>> {
    let mut bad_theta = 0usize;
    let mut bad_size = 0usize;
    let mut n = 0usize;
    let mut dens: Vec<i64> = (1..=10).map(|e| 3i64.pow(e)).collect();
    dens.extend((3..=1023).step_by(2));
    for q in dens {
        for p in 0..q {
            let t = Angle::new(p, q);
            let c = itinerary_of_angle(&t);
            n += 1;
            if theta(&c) != t {
                bad_theta += 1;
            }
            let triadic = cubic_mating::angles::is_triadic(&t);
            if c.len() != if triadic { 2 } else { 1 } {
                bad_size += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.u64("seed")?);
    let mut bad_shift = 0;
    let draws = 10_000;
    for _ in 0..draws {
        let q = rng.gen_range(1..=59_049i64);
        let t = Angle::new(rng.gen_range(0..q), q);
        let c = itinerary_of_angle(&t);
        let img = itinerary_of_angle(&t.mul_int(3));
        if !c.members().iter().all(|w: &TriadicWord| img.contains(&w.shift())) {
            bad_shift += 1;
        }
    }
    Ok(vec![
        check("theta round trip", bad_theta == 0, json!({"angles": n, "failures": bad_theta})),
        check("class sizes", bad_size == 0, json!({"angles": n, "failures": bad_size})),
        check("shift equivariance", bad_shift == 0, json!({"angles": draws, "failures": bad_shift})),
    ])
}

fn brute_cusps(max_den: u64) -> Vec<(Angle, u32)> {
    let mut v = Vec::new();
    for q in 1..=max_den as i64 {
        for p in 0..q {
            let t = Angle::new(p, q);
            if t.denom().to_string() != q.to_string() {
                continue;
            }
            // t/2 periodic under doubling iff its reduced denominator is odd.
            let h = t.half();
            let mut s = h.clone();
            for k in 1..=64u32 {
                s = s.mul_int(2);
                if s == h {
                    if k >= 2 {
                        v.push((t.clone(), k));
                    }
                    break;
                }
            }
        }
    }
    v.sort();
    v
}

fn params(cfg: &Config) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let mut got = cusp_angles(63);
    got.sort();
    let want = brute_cusps(63);
    checks.push(check("cusp angles", got == want, json!({"bound": 63, "count": got.len()})));
    let t = cfg.angle("t")?;
    let m = cfg.usize("m")? as u32;
    let tol = cfg.f64("center_residual")?;
    let k = doubling_period(&t.half()).ok_or_else(|| anyhow!("t/2 is not periodic"))?;
    let mut centers = Vec::new();
    for fam in [Family::Cubic, Family::Newton] {
        let c = center_in_copy(fam, &t, m)?;
        let map = c.map()?;
        let crit = map.free_critical_point().unwrap();
        let res = (map.iterate_d(crit, (k * m) as usize).0 - crit).norm();
        checks.push(check(
            &format!("{} center residual", fam.name()),
            res < tol,
            json!({"value": [c.value.re, c.value.im], "residual": res}),
        ));
        centers.push(c);
    }
    let cusp = boundary_param(Family::Cubic, &t)?;
    let img = correspondence(&cusp)?;
    let newton_cusp = boundary_param(Family::Newton, &t)?;
    checks.push(check(
        "cusp maps to cusp",
        (img.output.value - newton_cusp.value).norm() < 1e-8 && matches!(img.output.region, Region::Cusp { .. }),
        json!({"a": [cusp.value.re, cusp.value.im], "lambda": [img.output.value.re, img.output.value.im]}),
    ));
    let img = correspondence(&centers[0])?;
    let same = matches!(
        (&img.output.region, &centers[1].region),
        (Region::Center { k: k1, m: m1, .. }, Region::Center { k: k2, m: m2, .. }) if k1 == k2 && m1 == m2
    ) && (img.output.value - centers[1].value).norm() < 1e-8;
    checks.push(check("center maps to center", same, json!({"lambda": [img.output.value.re, img.output.value.im]})));
    let excluded = ParamPoint::new(Family::Cubic, num_complex::Complex64::new(0.0, -4.0 / 3.0), Region::Other);
    checks.push(check("excluded copy rejected", correspondence(&excluded).is_err(), json!({})));
    Ok(checks)
}

/// Graphs at the centers of the copy at `t` (period-one renormalization).
pub struct Pair {
    pub dbas: Graph,
    pub cubic: Graph,
    pub newton: Graph,
}

pub fn renorm_pair(t: &Angle) -> Result<Pair> {
    let k = doubling_period(&t.half()).ok_or_else(|| anyhow!("t/2 is not periodic"))?;
    let data = GraphData::Renorm { t0: t.half(), k };
    let a = center_in_copy(Family::Cubic, t, 1)?;
    let l = center_in_copy(Family::Newton, t, 1)?;
    Ok(Pair {
        dbas: Graph::build(&MapFamily::dbas(), Variant::Dbas, &GraphData::None)?,
        cubic: Graph::build(&a.map()?, Variant::CubicRenorm, &data)?,
        newton: Graph::build(&l.map()?, Variant::NewtonRenorm, &data)?,
    })
}

pub fn boundary_pair(t: &Angle) -> Result<Pair> {
    let data = GraphData::Boundary { t: t.clone() };
    let a = boundary_param(Family::Cubic, t)?;
    let l = boundary_param(Family::Newton, t)?;
    Ok(Pair {
        dbas: Graph::build(&MapFamily::dbas(), Variant::Dbas, &GraphData::None)?,
        cubic: Graph::build(&a.map()?, Variant::CubicBoundary, &data)?,
        newton: Graph::build(&l.map()?, Variant::NewtonBoundary, &data)?,
    })
}

fn random_word(rng: &mut ChaCha8Rng) -> TriadicWord {
    let pre: Vec<u8> = (0..rng.gen_range(0..4)).map(|_| rng.gen_range(0..3)).collect();
    let per: Vec<u8> = (0..rng.gen_range(1..5)).map(|_| rng.gen_range(0..3)).collect();
    TriadicWord::new(pre, per).expect("digits are in range")
}

fn nest_checks(cfg: &Config, graphs: &[(&str, &Graph)]) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.u64("seed")?);
    let bound = cfg.f64("nest_bound")?;
    let count = cfg.usize("nest_words")?;
    let mut checks = Vec::new();
    for (name, g) in graphs {
        let mut rows = Vec::new();
        let mut ok = 0;
        for _ in 0..count {
            let w = random_word(&mut rng);
            let d: Vec<Option<f64>> = [4, 8, 12].iter().map(|&n| g.nest_point(&w, n).ok().map(|x| x.diameter)).collect();
            let pass = match (d[0], d[1], d[2]) {
                (Some(a), Some(b), Some(c)) => a > b && b > c && c < bound,
                _ => false,
            };
            ok += pass as usize;
            rows.push(json!({"word": w.to_string(), "diameters": d, "pass": pass}));
        }
        checks.push(check(&format!("nest shrinking {name}"), ok == count, json!({"passed": ok, "words": rows})));
    }
    Ok(checks)
}

fn puzzle(cfg: &Config) -> Result<Vec<Check>> {
    let p = renorm_pair(&cfg.angle("t")?)?;
    let mut checks = nest_checks(cfg, &[("dbas", &p.dbas), ("cubic", &p.cubic), ("newton", &p.newton)])?;
    // Quotient consistency on the Newton side.
    let mut worst = 0.0f64;
    let mut bad = 0;
    let mut n = 0;
    for q in [3i64, 9, 27] {
        for num in 0..q {
            let c = itinerary_of_angle(&Angle::new(num, q));
            let ms = c.members();
            if ms.len() != 2 {
                continue;
            }
            n += 1;
            let x = p.newton.nest_point(&ms[0], 12)?;
            let y = p.newton.nest_point(&ms[1], 12)?;
            let d = x.estimate.dist(&y.estimate);
            worst = worst.max(d / (x.diameter + y.diameter));
            if d >= x.diameter + y.diameter {
                bad += 1;
            }
        }
    }
    checks.push(check("quotient consistency", bad == 0, json!({"classes": n, "failures": bad, "worst_ratio": worst})));
    Ok(checks)
}

fn mating_checks(cfg: &Config, p: Pair, label: &str) -> Result<Vec<Check>> {
    let depth = cfg.usize("depth")?;
    let refined = cfg.usize("depth_refined")?;
    let samples = cfg.usize("samples")?;
    let seed = cfg.u64("seed")?;
    let sd = SemiConj::new(Side::Dbas, p.dbas, p.newton.clone(), depth)?;
    let sc = SemiConj::new(Side::Cubic, p.cubic, p.newton, depth)?;
    let mut checks = Vec::new();
    for s in [&sd, &sc] {
        let mut cache = LandingCache::default();
        let r = s.verify_at(samples, seed, depth, &mut cache)?;
        let r2 = s.verify_at(samples, seed, refined, &mut cache)?;
        let decreased = r
            .records
            .iter()
            .zip(&r2.records)
            .filter(|(a, b)| b.residual < a.residual || (b.residual == 0.0 && a.residual == 0.0))
            .count();
        let frac = decreased as f64 / r.records.len().max(1) as f64;
        checks.push(check(
            &format!("{label} semiconjugacy {}", s.side.name()),
            r.violations == 0 && frac >= 0.95,
            json!({
                "lambda": r.lambda, "a": r.a, "depth": depth, "samples": r.samples,
                "max_residual": r.max_residual, "mean_residual": r.mean_residual,
                "violations": r.violations, "refined_depth": refined,
                "refined_max_residual": r2.max_residual, "decreased_fraction": frac,
            }),
        ));
    }
    let cov = surjectivity_sample(&sd, &sc, cfg.usize("coverage_points")?)?;
    checks.push(check(&format!("{label} coverage"), cov.uncovered_fraction < 0.01, serde_json::to_value(&cov)?));
    Ok(checks)
}

fn mating(cfg: &Config) -> Result<Vec<Check>> {
    if cfg.usize("m")? != 1 {
        return Err(anyhow!("graphs are built at period-one centers only (m = 1)"));
    }
    mating_checks(cfg, renorm_pair(&cfg.angle("t")?)?, "center")
}

fn boundary(cfg: &Config) -> Result<Vec<Check>> {
    let t = cfg.angle("boundary_t")?;
    if doubling_period(&t.half()).is_some_and(|k| k >= 2) {
        return Err(anyhow!("boundary_t = {t} is a cusp angle"));
    }
    let p = boundary_pair(&t)?;
    let mut checks = nest_checks(cfg, &[("boundary cubic", &p.cubic), ("boundary newton", &p.newton)])?;
    checks.extend(mating_checks(cfg, p, "boundary")?);
    Ok(checks)
}
