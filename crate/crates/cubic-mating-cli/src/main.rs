//! `cmate`: rendering, ray tracing, itineraries, graphs, parameter tables
//! and verification runs.

mod config;
mod render;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use cubic_mating::angles::{doubling_period, multiply_angle, Angle};
use cubic_mating::mating::LandingCache;
use cubic_mating::boettcher::{trace_external_ray, trace_internal_ray, BasinId};
use cubic_mating::maps::{MapFamily, SpherePoint};
use cubic_mating::params::{
    boundary_param, center_in_copy, correspondence, cusp_angles, Family, ParamPoint, Region,
};
use cubic_mating::puzzle::{Graph, GraphData, Variant};
use num_complex::Complex64 as C;
use serde_json::{json, Value};

use config::Config;
use render::{Coloring, Window};

#[derive(Parser)]
#[command(name = "cmate", version, about = "Matings of cubic polynomials with cubic Newton maps")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Parameter as `re,im`.
    #[arg(long, global = true)]
    param: Option<String>,
    /// Angle as `p/q`.
    #[arg(long, global = true)]
    angle: Option<String>,
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Dbas,
    Cubic,
    Newton,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GraphArg {
    Dbas,
    CubicRenorm,
    NewtonRenorm,
    CubicBoundary,
    NewtonBoundary,
}

#[derive(Subcommand)]
enum Cmd {
    /// Render a dynamical plane to PPM with a JSON sidecar.
    RenderJulia {
        #[arg(long, value_enum, default_value = "dbas")]
        family: FamilyArg,
        #[arg(long, default_value = "0,0")]
        center: String,
        #[arg(long, default_value_t = 4.0)]
        width: f64,
        #[arg(long, default_value_t = 512)]
        size: u32,
        #[arg(long, value_enum, default_value = "basin")]
        coloring: Coloring,
        /// Comma-separated external ray angles to overlay.
        #[arg(long)]
        rays: Option<String>,
        /// Graph to overlay.
        #[arg(long, value_enum)]
        graph: Option<GraphArg>,
        /// Copy or boundary angle for the graph overlay.
        #[arg(long)]
        copy: Option<String>,
    },
    /// Render a parameter plane by critical-orbit classification.
    RenderParam {
        #[arg(long, value_enum, default_value = "cubic")]
        family: FamilyArg,
        #[arg(long, default_value = "0,0")]
        center: String,
        #[arg(long, default_value_t = 4.0)]
        width: f64,
        #[arg(long, default_value_t = 512)]
        size: u32,
    },
    /// Trace an external ray, or an internal ray of a labeled basin.
    TraceRay {
        #[arg(long, value_enum, default_value = "dbas")]
        family: FamilyArg,
        /// Basin label (A1, A1', A2, A3, B1, B2, B3, W1, W2, W3); external if absent.
        #[arg(long)]
        basin: Option<String>,
        /// Stop at this potential instead of tracing to landing.
        #[arg(long, default_value_t = 0.0)]
        potential: f64,
    },
    /// Itinerary words of a point (`--point`) or of a ray landing (`--angle`).
    Itinerary {
        #[arg(long, value_enum, default_value = "dbas")]
        graph: GraphArg,
        #[arg(long)]
        point: Option<String>,
        #[arg(long)]
        copy: Option<String>,
    },
    /// Build a graph and export it as JSON.
    Graph {
        #[arg(long, value_enum, default_value = "dbas")]
        graph: GraphArg,
        #[arg(long)]
        copy: Option<String>,
    },
    /// Cusp angles, or the center of period `m` in the copy at `--angle`.
    Centers {
        #[arg(long, value_enum, default_value = "cubic")]
        family: FamilyArg,
        #[arg(long, default_value_t = 1)]
        m: u32,
        /// List cusp angles up to this denominator instead.
        #[arg(long)]
        max_den: Option<u64>,
    },
    /// Map a cubic cusp, center or boundary point to the Newton family.
    Correspond {
        /// Use the center of period `m` of the copy at `--angle`.
        #[arg(long)]
        m: Option<u32>,
    },
    /// Run verification suites from the config; exit 0 iff every check passes.
    Verify,
}

fn parse_complex(s: &str) -> Result<C> {
    let (a, b) = s.split_once(',').ok_or_else(|| anyhow!("expected `re,im`, got `{s}`"))?;
    Ok(C::new(a.trim().parse()?, b.trim().parse()?))
}

fn parse_angle(s: &str) -> Result<Angle> {
    Angle::from_str(s).map_err(|e| anyhow!("{e}"))
}

fn parse_basin(s: &str) -> Result<BasinId> {
    Ok(match s {
        "A1" => BasinId::A1,
        "A1'" | "A1p" => BasinId::A1Prime,
        "A2" => BasinId::A2,
        "A3" => BasinId::A3,
        "B1" => BasinId::B1,
        "B2" => BasinId::B2,
        "B3" => BasinId::B3,
        "W1" => BasinId::W1,
        "W2" => BasinId::W2,
        "W3" => BasinId::W3,
        _ => bail!("unknown basin `{s}`"),
    })
}

fn point_json(p: &SpherePoint) -> Value {
    if p.is_infinity() {
        json!("inf")
    } else {
        json!([p.z().re, p.z().im])
    }
}

impl Cli {
    fn param(&self) -> Result<Option<C>> {
        self.param.as_deref().map(parse_complex).transpose()
    }

    fn angle_or(&self, default: &str) -> Result<Angle> {
        parse_angle(self.angle.as_deref().unwrap_or(default))
    }

    fn map(&self, family: FamilyArg) -> Result<MapFamily> {
        let p = self.param()?;
        let need = || p.ok_or_else(|| anyhow!("--param re,im is required for this family"));
        Ok(match family {
            FamilyArg::Dbas => MapFamily::dbas(),
            FamilyArg::Cubic => MapFamily::cubic(need()?)?,
            FamilyArg::Newton => MapFamily::newton(need()?)?,
        })
    }

    /// The graph, with the parameter taken from `--param` or computed from
    /// the copy angle (centers of period one, or boundary points).
    fn graph(&self, which: GraphArg, copy: Option<&str>) -> Result<Graph> {
        let p = self.param()?;
        let t = |default: &str| parse_angle(copy.unwrap_or(default));
        Ok(match which {
            GraphArg::Dbas => Graph::build(&MapFamily::dbas(), Variant::Dbas, &GraphData::None)?,
            GraphArg::CubicRenorm | GraphArg::NewtonRenorm => {
                let t = t("2/3")?;
                let k = doubling_period(&t.half()).filter(|k| *k >= 2).ok_or_else(|| anyhow!("{t} is not a cusp angle"))?;
                let (fam, var) = if which == GraphArg::CubicRenorm {
                    (Family::Cubic, Variant::CubicRenorm)
                } else {
                    (Family::Newton, Variant::NewtonRenorm)
                };
                let v = match p {
                    Some(v) => v,
                    None => center_in_copy(fam, &t, 1)?.value,
                };
                Graph::build(&fam.map(v)?, var, &GraphData::Renorm { t0: t.half(), k })?
            }
            GraphArg::CubicBoundary | GraphArg::NewtonBoundary => {
                let t = t("1/2")?;
                let (fam, var) = if which == GraphArg::CubicBoundary {
                    (Family::Cubic, Variant::CubicBoundary)
                } else {
                    (Family::Newton, Variant::NewtonBoundary)
                };
                let v = match p {
                    Some(v) => v,
                    None => boundary_param(fam, &t)?.value,
                };
                Graph::build(&fam.map(v)?, var, &GraphData::Boundary { t })?
            }
        })
    }

    fn config(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        if let Some(d) = self.depth {
            cfg.set("depth", d.to_string());
        }
        if let Some(s) = self.seed {
            cfg.set("seed", s.to_string());
        }
        Ok(cfg)
    }
}

fn emit(cli: &Cli, value: &Value, text: impl FnOnce() -> String) -> Result<()> {
    let body = if cli.json { serde_json::to_string_pretty(value)? } else { text() };
    match &cli.out {
        Some(p) => std::fs::write(p, body + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{body}"),
    }
    Ok(())
}

fn write_image(img: &render::Image, out: &Path, mut sidecar: Value) -> Result<()> {
    img.write_ppm(out)?;
    sidecar["pixel_sha256"] = json!(img.hash());
    sidecar["version"] = json!(cubic_mating::VERSION);
    let side = out.with_extension("json");
    std::fs::write(&side, serde_json::to_string_pretty(&sidecar)? + "\n")
        .with_context(|| format!("writing {}", side.display()))?;
    log::info!("wrote {} and {}", out.display(), side.display());
    Ok(())
}

fn run(cli: &Cli, cfg: &Config) -> Result<bool> {
    match &cli.cmd {
        Cmd::RenderJulia { family, center, width, size, coloring, rays, graph, copy } => {
            let m = cli.map(*family)?;
            let win = Window { center: { let c = parse_complex(center)?; [c.re, c.im] }, width: *width, size: *size };
            if *width <= 0.0 || *size == 0 || *size > 8192 {
                bail!("window width must be positive and size in 1..=8192");
            }
            let mut img = render::render_julia(&m, &win, *coloring);
            let mut warnings = Vec::new();
            let angles: Vec<Angle> = match rays {
                Some(s) => s.split(',').map(parse_angle).collect::<Result<_>>()?,
                None => Vec::new(),
            };
            let rays_json = render::overlay_rays(&mut img, &win, &m, &angles, &mut warnings);
            let graph_json = match graph {
                Some(g) => match cli.graph(*g, copy.as_deref()) {
                    Ok(g) => render::overlay_graph(&mut img, &win, &g),
                    Err(e) => {
                        warnings.push(format!("graph overlay failed: {e}"));
                        Value::Null
                    }
                },
                None => Value::Null,
            };
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("julia.ppm"));
            write_image(
                &img,
                &out,
                json!({
                    "kind": "julia", "family": m.name(), "param": m.param().map(|p| [p.re, p.im]),
                    "window": win, "coloring": coloring, "rays": rays_json, "graph": graph_json,
                    "warnings": warnings,
                }),
            )?;
            Ok(true)
        }
        Cmd::RenderParam { family, center, width, size } => {
            let fam = match family {
                FamilyArg::Cubic => Family::Cubic,
                FamilyArg::Newton => Family::Newton,
                FamilyArg::Dbas => bail!("dbas has no parameter plane"),
            };
            if *width <= 0.0 || *size == 0 || *size > 8192 {
                bail!("window width must be positive and size in 1..=8192");
            }
            let c = parse_complex(center)?;
            let win = Window { center: [c.re, c.im], width: *width, size: *size };
            let (cap, tol) = (cfg.usize("param_cap")?, cfg.f64("param_tol")?);
            let img = render::render_param(fam, &win, cap, tol);
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("param.ppm"));
            write_image(&img, &out, json!({"kind": "parameter", "family": fam.name(), "window": win, "cap": cap, "tol": tol}))?;
            Ok(true)
        }
        Cmd::TraceRay { family, basin, potential } => {
            let m = cli.map(*family)?;
            let t = cli.angle_or("0")?;
            let r = match basin {
                Some(b) => trace_internal_ray(&m, parse_basin(b)?, &t, *potential)?,
                None => {
                    if !m.is_polynomial() {
                        bail!("external rays need a polynomial; pass --basin for Newton maps");
                    }
                    trace_external_ray(&m, &t, *potential)
                }
            };
            let v = json!({"angle": t.to_string(), "ray": r.to_json()});
            emit(cli, &v, || match r.landing {
                Some(l) => format!("ray {t}: landed at {l:?} (err {:.2e}, {} points)", r.err(), r.points.len()),
                None => format!("ray {t}: {:?} after {} points", r.status, r.points.len()),
            })?;
            Ok(true)
        }
        Cmd::Itinerary { graph, point, copy } => {
            let g = cli.graph(*graph, copy.as_deref())?;
            let depth = cfg.usize("depth")?;
            let (z, words) = match (point, &cli.angle) {
                (Some(p), _) => {
                    let z = if p.trim() == "inf" { SpherePoint::infinity() } else { SpherePoint::finite(parse_complex(p)?) };
                    (z, g.itinerary_of_point(&z, depth)?)
                }
                (None, Some(a)) => {
                    if !g.map.is_polynomial() {
                        bail!("--angle needs a polynomial graph; use --point");
                    }
                    // Landings of R(3^i t) are more accurate than iterating the first one.
                    let mut cache = LandingCache::default();
                    let mut t = parse_angle(a)?;
                    let mut orbit = Vec::with_capacity(depth + 1);
                    for _ in 0..=depth {
                        orbit.push(cache.landing(&g.map, &t).ok_or_else(|| anyhow!("ray {t} did not land"))?);
                        t = multiply_angle(&t, 3);
                    }
                    (orbit[0], g.itinerary_of_orbit(&orbit)?)
                }
                (None, None) => bail!("pass --point re,im|inf or --angle p/q"),
            };
            let strs: Vec<String> = words.iter().map(|w| w.iter().map(|d| char::from(b'0' + d)).collect()).collect();
            emit(cli, &json!({"point": point_json(&z), "depth": depth, "words": strs}), || strs.join("\n"))?;
            Ok(true)
        }
        Cmd::Graph { graph, copy } => {
            let g = cli.graph(*graph, copy.as_deref())?;
            let v = g.to_json();
            let body = serde_json::to_string_pretty(&v)?;
            match &cli.out {
                Some(p) => std::fs::write(p, body + "\n")?,
                None if cli.json => println!("{body}"),
                None => println!("{} graph: {} arcs, {} vertices", g.variant.name(), g.arcs.len(), g.vertices.len()),
            }
            Ok(true)
        }
        Cmd::Centers { family, m, max_den } => {
            if let Some(q) = max_den {
                let list = cusp_angles(*q);
                let v: Vec<Value> = list.iter().map(|(t, k)| json!({"t": t.to_string(), "k": k})).collect();
                emit(cli, &Value::Array(v), || {
                    list.iter().map(|(t, k)| format!("{t}\tk={k}")).collect::<Vec<_>>().join("\n")
                })?;
                return Ok(true);
            }
            let fam = match family {
                FamilyArg::Cubic => Family::Cubic,
                FamilyArg::Newton => Family::Newton,
                FamilyArg::Dbas => bail!("dbas has no parameters"),
            };
            let t = cli.angle_or("2/3")?;
            let c = center_in_copy(fam, &t, *m)?;
            emit(cli, &serde_json::to_value(&c)?, || format!("{} center t={t} m={m}: {}", fam.name(), c.value))?;
            Ok(true)
        }
        Cmd::Correspond { m } => {
            let input = match (cli.param()?, m) {
                (_, Some(m)) => center_in_copy(Family::Cubic, &cli.angle_or("2/3")?, *m)?,
                (Some(a), None) => ParamPoint::new(Family::Cubic, a, Region::Other),
                (None, None) => boundary_param(Family::Cubic, &cli.angle_or("2/3")?)?,
            };
            let c = correspondence(&input)?;
            emit(cli, &serde_json::to_value(&c)?, || {
                format!("{} ({:?}) -> {} ({:?})", c.input.value, c.input.region, c.output.value, c.output.region)
            })?;
            Ok(true)
        }
        Cmd::Verify => {
            let suites = verify::run(cfg)?;
            let pass = suites.iter().all(|s| s.pass);
            let report = json!({
                "version": cubic_mating::VERSION,
                "config": cfg.to_json(),
                "pass": pass,
                "suites": suites,
            });
            let body = serde_json::to_string_pretty(&report)?;
            match &cli.out {
                Some(p) => std::fs::write(p, body + "\n")?,
                None => println!("{body}"),
            }
            for s in &suites {
                for c in s.checks.iter().filter(|c| !c.pass) {
                    eprintln!("failed: {} / {}", s.name, c.name);
                }
            }
            Ok(pass)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let cfg = match cli.config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(2);
        }
    };
    log::info!("cmate {} with cubic-mating {}; {}", env!("CARGO_PKG_VERSION"), cubic_mating::VERSION, cfg.summary());
    match run(&cli, &cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
