//! `microyoung`: regularity estimates, product admissibility, extensions and
//! germ reconstruction from the command line.
//!
//! Every command writes `<out>/<command>_<kernels>.json` (and a CSV of the
//! regression data where there is one) and exits with 0 on success, 2 when a
//! product is not admissible, 3 when the decision is inconclusive, 4 on bad
//! input and 1 on any other failure.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use microyoung::config::ext_f64;
use microyoung::dyadic::dyadic_critical_exponent;
use microyoung::extension::{extend, multiply_and_extend_with};
use microyoung::germs::{
    check_coherence_with, product_germ_with, reconstruct_product_germ_with,
    verify_reconstruction_bound_with,
};
use microyoung::grid::PeriodicGrid;
use microyoung::product::{check_young_microlocal_with, working_region, young_product_with};
use microyoung::regularity::{
    estimate_beta_star_with, estimate_holder_exponent_with, estimate_local_sobolev_with,
    LOCALIZER_RADIUS,
};
use microyoung::suite::{format_table, run_paper_suite};
use microyoung::wavefront::{default_directions, wavefront_set};
use microyoung::{
    parse_kernel, parse_test_function, DistributionExpr, Error, MultiIndex, Point, Region,
    RunConfig,
};
use serde_json::{json, Value};

use report::{Report, Status};

#[derive(Parser, Debug)]
#[command(
    name = "microyoung",
    version,
    about = "Microlocal Young products and regularity estimates"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Ambient dimension (1 or 2).
    #[arg(long, global = true, default_value_t = 1)]
    dim: usize,
    /// JSON run configuration; flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Report directory.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    margin: Option<f64>,
    /// Finest scale exponent, `λ = 2^{-n}`.
    #[arg(long, global = true)]
    n_max: Option<u32>,
    #[arg(long, global = true)]
    n_min: Option<u32>,
    /// Integrability indices for β*, e.g. `2,4,8,inf`.
    #[arg(long, global = true, value_delimiter = ',')]
    p_samples: Option<Vec<String>>,
    /// Print only the JSON report on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Do not write report files.
    #[arg(long, global = true)]
    no_write: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hölder, Sobolev, Besov or scaling-degree exponent of a kernel.
    Regularity {
        kernel: String,
        #[arg(long, value_enum, default_value_t = Kind::Holder)]
        kind: Kind,
        /// Point for local estimates.
        #[arg(long, default_value = "0")]
        at: String,
        /// Region `lo,hi` (a cube) for sup-type estimates.
        #[arg(long, default_value = "-0.5,0.5", allow_hyphen_values = true)]
        region: String,
        /// Integrability index for `--kind besov`.
        #[arg(long, default_value = "2")]
        p: String,
    },
    /// β*: the best `B^γ_{p,∞,loc}` exponent over the p grid.
    BetaStar {
        kernel: String,
        #[arg(long, default_value = "-0.5,0.5", allow_hyphen_values = true)]
        region: String,
    },
    /// Critical Sobolev exponents per direction at points.
    Wavefront {
        kernel: String,
        /// Points, separated by ';' (2D coordinates by ',').
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        at: String,
        /// Sobolev index for the membership column.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        s: f64,
    },
    /// Product admissibility and construction.
    Product {
        #[command(subcommand)]
        action: ProductAction,
    },
    /// Extensions across a point, optionally of a product.
    Extend {
        kernel: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        at: String,
        /// Second factor: extend the pointwise product instead.
        #[arg(long)]
        times: Option<String>,
        /// Counterterm coefficient `aK=V` (`K` is `k` or `k1,k2`), repeatable.
        #[arg(long, allow_hyphen_values = true)]
        coeff: Vec<String>,
    },
    /// Product germs `P_x · g`.
    Germ {
        #[command(subcommand)]
        action: GermAction,
    },
    /// Reruns the closed-form reference checks and prints a pass/fail table.
    PaperSuite,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum Kind {
    Holder,
    Sobolev,
    Besov,
    ScalingDegree,
}

#[derive(Subcommand, Debug)]
enum ProductAction {
    /// Decide whether `f · g` exists.
    Check { f: String, g: String },
    /// Build `f · g` and scan its pairings.
    Apply {
        f: String,
        g: String,
        /// Test function id.
        #[arg(long, default_value = "bump:r2")]
        test: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        at: String,
    },
}

#[derive(Subcommand, Debug)]
enum GermAction {
    /// Build the germ and show its parameters.
    Build { f: String, g: String },
    /// Two-scale coherence check.
    Check {
        f: String,
        g: String,
        /// Claimed γ; defaults to α + β.
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<f64>,
        /// Claimed α_K; defaults to β.
        #[arg(long, allow_hyphen_values = true)]
        alpha_k: Option<f64>,
    },
    /// Reconstruct `f · g` and measure `|(RF - F_x)(φ^λ_x)|`.
    Reconstruct { f: String, g: String },
}

/// What a command produced.
struct Outcome {
    status: Status,
    reason: Option<String>,
    result: Value,
    csv: Option<String>,
    summary: String,
}

impl Outcome {
    fn pass(result: Value, csv: Option<String>, summary: String) -> Self {
        Outcome {
            status: Status::Pass,
            reason: None,
            result,
            csv,
            summary,
        }
    }
}

type CmdResult = Result<Outcome, Error>;

fn parse_point(s: &str, dim: usize) -> Result<Point, Error> {
    let v: Vec<f64> = s
        .split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad coordinate '{c}'")))
        })
        .collect::<Result<_, _>>()?;
    if v.is_empty() || v.len() > dim {
        return Err(Error::InvalidInput(format!(
            "point '{s}' does not fit dimension {dim}"
        )));
    }
    let mut p = [0.0; 2];
    p[..v.len()].copy_from_slice(&v);
    Ok(p)
}

fn parse_region(s: &str, dim: usize) -> Result<Region, Error> {
    let (lo, hi) = s
        .split_once(',')
        .and_then(|(a, b)| Some((a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?)))
        .ok_or_else(|| Error::InvalidInput(format!("region '{s}' must be lo,hi")))?;
    if hi <= lo {
        return Err(Error::InvalidInput("region is empty".into()));
    }
    Ok(Region::cube(dim, lo, hi))
}

fn parse_p(s: &str) -> Result<f64, Error> {
    ext_f64::parse(s.trim()).ok_or_else(|| Error::InvalidInput(format!("bad p '{s}'")))
}

fn parse_coeff(s: &str, dim: usize) -> Result<(MultiIndex, f64), Error> {
    let bad = || {
        Error::InvalidInput(format!(
            "coefficient '{s}' must look like a0=1.5 or a1,0=1.5"
        ))
    };
    let (k, v) = s
        .strip_prefix('a')
        .and_then(|r| r.split_once('='))
        .ok_or_else(bad)?;
    let ks: Vec<usize> = k
        .split(',')
        .map(|c| c.trim().parse().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    if ks.len() > dim {
        return Err(bad());
    }
    let mut idx = [0; 2];
    idx[..ks.len()].copy_from_slice(&ks);
    Ok((idx, v.trim().parse().map_err(|_| bad())?))
}

fn load_config(c: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match &c.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(o) = &c.out {
        cfg.output_dir = o.clone();
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(m) = c.margin {
        cfg.margin = m;
    }
    if let Some(n) = c.n_max {
        cfg.scales.n_max = n;
    }
    if let Some(n) = c.n_min {
        cfg.scales.n_min = n;
    }
    if let Some(ps) = &c.p_samples {
        cfg.p_samples = ps.iter().map(|p| parse_p(p)).collect::<Result<_, _>>()?;
    }
    cfg.validate()?;
    if !(1..=2).contains(&c.dim) {
        return Err(Error::InvalidInput(format!(
            "dimension {} is not 1 or 2",
            c.dim
        )));
    }
    Ok(cfg)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn fmt_exp(v: f64) -> String {
    ext_f64::to_repr(v)
        .map(str::to_string)
        .unwrap_or_else(|| format!("{v:.4}"))
}

fn regularity(
    u: &DistributionExpr,
    kind: Kind,
    at: &str,
    region: &str,
    p: &str,
    cfg: &RunConfig,
) -> CmdResult {
    let dim = u.dim();
    match kind {
        Kind::Holder => {
            let r = estimate_holder_exponent_with(u, &parse_region(region, dim)?, cfg.scales)?;
            let summary = if r.smooth {
                format!(
                    "holder exponent: inf (smooth: true, fitted lower bound {})",
                    fmt_exp(r.value)
                )
            } else {
                format!(
                    "holder exponent: {} ± {:.4} (smooth: false)",
                    fmt_exp(r.value),
                    r.stderr
                )
            };
            Ok(Outcome::pass(to_value(&r), Some(r.to_csv()), summary))
        }
        Kind::Sobolev => {
            let x = parse_point(at, dim)?;
            let grid = PeriodicGrid::new(dim, cfg.grid_size(dim))?;
            let r = estimate_local_sobolev_with(u, &x, &grid, LOCALIZER_RADIUS)?;
            let summary = format!(
                "local sobolev exponent: {} ± {:.4}",
                fmt_exp(r.value),
                r.stderr
            );
            Ok(Outcome::pass(to_value(&r), Some(r.to_csv()), summary))
        }
        Kind::Besov => {
            let p = parse_p(p)?;
            let grid = PeriodicGrid::new(dim, cfg.grid_size(dim))?;
            let part = microyoung::build_partition(grid, cfg.j_max_for(dim))?;
            let s = dyadic_critical_exponent(u, p, &part)?;
            let norm = microyoung::besov_norm(u, s.clamp(-50.0, 50.0), p, f64::INFINITY, &part)?;
            let result = json!({"p": fmt_exp(p), "critical_exponent": fmt_exp(s), "blocks": to_value(&norm)});
            Ok(Outcome::pass(
                result,
                Some(norm.to_csv()),
                format!("dyadic B^s_(p,inf) critical exponent: {}", fmt_exp(s)),
            ))
        }
        Kind::ScalingDegree => {
            let x = parse_point(at, dim)?;
            let sd = microyoung::extension::scaling_degree_with(u, &x, cfg.scales)?;
            let mut csv = String::from("scale,magnitude\n");
            for (a, b) in &sd.samples {
                csv.push_str(&format!("{:e},{:e}\n", a.exp2(), b.exp2()));
            }
            let summary = format!("scaling degree: {} ± {:.4}", fmt_exp(sd.value), sd.stderr);
            Ok(Outcome::pass(to_value(&sd), Some(csv), summary))
        }
    }
}

fn beta_star(u: &DistributionExpr, region: &str, cfg: &RunConfig) -> CmdResult {
    let r = estimate_beta_star_with(
        u,
        &parse_region(region, u.dim())?,
        &cfg.p_samples,
        cfg.scales,
    )?;
    let summary = format!(
        "beta*: {} ± {:.4} ({})",
        fmt_exp(r.value),
        r.stderr,
        r.branch
    );
    Ok(Outcome::pass(to_value(&r), Some(r.to_csv()), summary))
}

fn wavefront(u: &DistributionExpr, at: &str, s: f64) -> CmdResult {
    let dim = u.dim();
    let xs: Vec<Point> = at
        .split(';')
        .map(|p| parse_point(p, dim))
        .collect::<Result<_, _>>()?;
    let r = wavefront_set(u, &xs, &default_directions(dim), s, LOCALIZER_RADIUS)?;
    let mut summary = String::new();
    for e in &r.entries {
        summary.push_str(&format!(
            "x={:?} direction={:?} s*={} in WF^{s}: {}\n",
            &e.x[..dim],
            &e.direction[..dim],
            fmt_exp(e.critical_s),
            e.in_wavefront
        ));
    }
    Ok(Outcome::pass(
        to_value(&r),
        Some(r.to_csv()),
        summary.trim_end().to_string(),
    ))
}

fn product_check(f: &DistributionExpr, g: &DistributionExpr, cfg: &RunConfig) -> CmdResult {
    let adm = check_young_microlocal_with(f, g, cfg)?;
    let status = match adm.decision {
        d if d.is_admissible() => Status::Pass,
        microyoung::Decision::Inconclusive => Status::Inconclusive,
        _ => Status::NotAdmissible,
    };
    let reason = adm.reason.clone().or_else(|| match status {
        Status::Pass => None,
        _ => Some(format!("{:?}", adm.decision)),
    });
    let mut csv = String::from("x,alpha_local,beta_star_local,margin\n");
    for e in &adm.ledger {
        csv.push_str(&format!(
            "\"{}\",{},{},{}\n",
            e.x[..f.dim()]
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(","),
            fmt_exp(e.alpha_local),
            e.beta_star_local,
            fmt_exp(e.margin)
        ));
    }
    let summary = format!(
        "decision: {:?} (alpha={}, beta={}, exponent={})",
        adm.decision,
        fmt_exp(adm.alpha),
        fmt_exp(adm.beta),
        fmt_exp(adm.exponent)
    );
    Ok(Outcome {
        status,
        reason,
        result: to_value(&adm),
        csv: Some(csv),
        summary,
    })
}

fn product_apply(
    f: &DistributionExpr,
    g: &DistributionExpr,
    test: &str,
    at: &str,
    cfg: &RunConfig,
) -> CmdResult {
    let dim = f.dim();
    let adm = check_young_microlocal_with(f, g, cfg)?;
    if !adm.decision.is_admissible() {
        let reason = adm
            .reason
            .clone()
            .unwrap_or_else(|| format!("{:?}", adm.decision));
        return Err(match adm.decision {
            microyoung::Decision::Inconclusive => Error::Inconclusive(reason),
            _ => Error::NotAdmissible(reason),
        });
    }
    let p = young_product_with(f, g, &adm)?;
    let phi = parse_test_function(test, dim)?;
    let x = parse_point(at, dim)?;
    let mut csv = String::from("scale,pairing\n");
    let mut rows = Vec::new();
    for lam in cfg.scales.lambdas() {
        let v = p.pair_scaled(&phi, &x, lam)?;
        csv.push_str(&format!("{lam:e},{v:e}\n"));
        rows.push(json!({"scale": lam, "pairing": v}));
    }
    let result = json!({
        "product": p.label(),
        "decision": to_value(&adm.decision),
        "exponent": fmt_exp(adm.exponent),
        "test_function": test,
        "at": &x[..dim],
        "pairings": rows,
    });
    Ok(Outcome::pass(
        result,
        Some(csv),
        format!(
            "product: {} (exponent {})",
            p.label(),
            fmt_exp(adm.exponent)
        ),
    ))
}

fn extend_cmd(
    u: &DistributionExpr,
    at: &str,
    times: Option<&DistributionExpr>,
    coeffs: &[String],
    cfg: &RunConfig,
) -> CmdResult {
    let dim = u.dim();
    let coeffs: Vec<(MultiIndex, f64)> = coeffs
        .iter()
        .map(|c| parse_coeff(c, dim))
        .collect::<Result<_, _>>()?;
    let fam = match times {
        Some(g) => {
            let fam = multiply_and_extend_with(u, g, cfg)?;
            if coeffs.is_empty() {
                fam
            } else {
                fam.with_coeffs(coeffs)?
            }
        }
        None => extend(
            u,
            &parse_point(at, dim)?,
            if coeffs.is_empty() {
                None
            } else {
                Some(coeffs)
            },
        )?,
    };
    let d = fam.descriptor();
    let mut csv = String::from("scale,magnitude\n");
    for (a, b) in &d.scaling_degree.samples {
        csv.push_str(&format!("{:e},{:e}\n", a.exp2(), b.exp2()));
    }
    let summary = format!(
        "scaling degree {} rho {} unique {} free coefficients {}{}",
        fmt_exp(d.scaling_degree.value),
        fmt_exp(d.rho),
        d.unique,
        fam.free_indices().len(),
        if d.boundary_warning {
            " (rho near an integer)"
        } else {
            ""
        }
    );
    Ok(Outcome::pass(to_value(&d), Some(csv), summary))
}

fn germ_cmd(action: &GermAction, dim: usize, cfg: &RunConfig) -> CmdResult {
    let (f_id, g_id) = match action {
        GermAction::Build { f, g }
        | GermAction::Check { f, g, .. }
        | GermAction::Reconstruct { f, g } => (f, g),
    };
    let f = parse_kernel(f_id, dim)?;
    let g = parse_kernel(g_id, dim)?;
    let germ = product_germ_with(&f, &g, cfg)?;
    let (ak, gamma) = germ.claimed_parameters();
    let mut pts: Vec<Point> = f
        .singular_support()
        .points()
        .map(|p| p.to_vec())
        .unwrap_or_default();
    pts.extend(
        g.singular_support()
            .points()
            .map(|p| p.to_vec())
            .unwrap_or_default(),
    );
    let region = working_region(dim, &pts);
    match action {
        GermAction::Build { .. } => {
            let phi = microyoung::make_bump(dim, 1.0, 2);
            let mut models = Vec::new();
            let mut csv = String::from("x,pairing\n");
            for x in region.grid_samples(if dim == 1 { 9 } else { 3 }) {
                let v = germ.pair_at(&x, &phi, &x, 0.25)?;
                csv.push_str(&format!(
                    "\"{}\",{v:e}\n",
                    x[..dim]
                        .iter()
                        .map(|c| c.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                ));
                models.push(json!({"x": &x[..dim], "pairing_at_scale_0.25": v}));
            }
            let result = json!({
                "alpha": fmt_exp(germ.alpha),
                "beta": fmt_exp(germ.beta),
                "taylor_order": germ.order,
                "claimed": {"alpha_k": fmt_exp(ak), "gamma": fmt_exp(gamma)},
                "models": models,
            });
            let summary = format!(
                "germ: alpha {} beta {} order {} claimed (alpha_K, gamma) = ({}, {})",
                fmt_exp(germ.alpha),
                fmt_exp(germ.beta),
                germ.order,
                fmt_exp(ak),
                fmt_exp(gamma)
            );
            Ok(Outcome::pass(result, Some(csv), summary))
        }
        GermAction::Check {
            gamma: gm, alpha_k, ..
        } => {
            let r = check_coherence_with(
                &germ,
                gm.unwrap_or(gamma),
                alpha_k.unwrap_or(ak),
                &region,
                cfg.scales,
            )?;
            let summary = format!(
                "coherence: lambda slope {} combined slope {} (claimed {}, {}) pass {}",
                fmt_exp(r.lambda_slope),
                fmt_exp(r.combined_slope),
                fmt_exp(r.alpha_k_claimed),
                fmt_exp(r.gamma_claimed),
                r.pass
            );
            let status = if r.pass { Status::Pass } else { Status::Fail };
            Ok(Outcome {
                status,
                reason: (!r.pass)
                    .then(|| "measured exponents below the claimed coherence".to_string()),
                result: to_value(&r),
                csv: Some(r.to_csv()),
                summary,
            })
        }
        GermAction::Reconstruct { .. } => {
            let rf = reconstruct_product_germ_with(&germ, cfg)?;
            let b = verify_reconstruction_bound_with(&germ, &rf, &region, cfg.scales)?;
            let summary = format!(
                "reconstruction: {} bound slope {} (claimed {}) pass {}",
                rf.label(),
                fmt_exp(b.slope),
                fmt_exp(b.gamma_claimed),
                b.pass
            );
            let status = if b.pass { Status::Pass } else { Status::Fail };
            Ok(Outcome {
                status,
                reason: (!b.pass).then(|| "reconstruction bound not met".to_string()),
                result: json!({"reconstruction": rf.label(), "bound": to_value(&b)}),
                csv: Some(b.to_csv()),
                summary,
            })
        }
    }
}

fn paper_suite(cfg: &RunConfig) -> CmdResult {
    let rows = run_paper_suite(cfg);
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.criterion.clone())
        .collect();
    let mut csv = String::from("criterion,pass,measured\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},\"{}\"\n",
            r.criterion,
            r.pass,
            r.measured.replace('"', "'")
        ));
    }
    Ok(Outcome {
        status: if failed.is_empty() {
            Status::Pass
        } else {
            Status::Fail
        },
        reason: (!failed.is_empty()).then(|| format!("failed: {}", failed.join(", "))),
        result: to_value(&rows),
        csv: Some(csv),
        summary: format_table(&rows).trim_end().to_string(),
    })
}

fn run(cli: &Cli, cfg: &RunConfig) -> (String, Vec<String>, CmdResult) {
    let dim = cli.common.dim;
    let k = |id: &str| parse_kernel(id, dim);
    match &cli.command {
        Command::Regularity {
            kernel,
            kind,
            at,
            region,
            p,
        } => (
            format!(
                "regularity {}",
                kind.to_possible_value()
                    .map(|v| v.get_name().to_string())
                    .unwrap_or_default()
            ),
            vec![kernel.clone()],
            k(kernel).and_then(|u| regularity(&u, *kind, at, region, p, cfg)),
        ),
        Command::BetaStar { kernel, region } => (
            "beta-star".into(),
            vec![kernel.clone()],
            k(kernel).and_then(|u| beta_star(&u, region, cfg)),
        ),
        Command::Wavefront { kernel, at, s } => (
            "wavefront".into(),
            vec![kernel.clone()],
            k(kernel).and_then(|u| wavefront(&u, at, *s)),
        ),
        Command::Product { action } => match action {
            ProductAction::Check { f, g } => (
                "product check".into(),
                vec![f.clone(), g.clone()],
                k(f).and_then(|a| k(g).and_then(|b| product_check(&a, &b, cfg))),
            ),
            ProductAction::Apply { f, g, test, at } => (
                "product apply".into(),
                vec![f.clone(), g.clone()],
                k(f).and_then(|a| k(g).and_then(|b| product_apply(&a, &b, test, at, cfg))),
            ),
        },
        Command::Extend {
            kernel,
            at,
            times,
            coeff,
        } => {
            let mut ids = vec![kernel.clone()];
            ids.extend(times.iter().cloned());
            let out = k(kernel).and_then(|u| match times {
                Some(t) => k(t).and_then(|g| extend_cmd(&u, at, Some(&g), coeff, cfg)),
                None => extend_cmd(&u, at, None, coeff, cfg),
            });
            ("extend".into(), ids, out)
        }
        Command::Germ { action } => {
            let (name, ids) = match action {
                GermAction::Build { f, g } => ("germ build", vec![f.clone(), g.clone()]),
                GermAction::Check { f, g, .. } => ("germ check", vec![f.clone(), g.clone()]),
                GermAction::Reconstruct { f, g } => {
                    ("germ reconstruct", vec![f.clone(), g.clone()])
                }
            };
            (name.into(), ids, germ_cmd(action, dim, cfg))
        }
        Command::PaperSuite => ("paper-suite".into(), Vec::new(), paper_suite(cfg)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(&cli.common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(Status::InputError.code());
        }
    };
    let (command, kernels, out) = run(&cli, &cfg);
    let outcome = out.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        Outcome {
            status: Status::of_error(&e),
            reason: Some(e.to_string()),
            result: Value::Null,
            csv: None,
            summary: String::new(),
        }
    });
    let report = Report::new(
        &command,
        &kernels,
        &cfg,
        outcome.status,
        outcome.reason.clone(),
        outcome.result,
    );
    let json = cli.common.json;
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).unwrap_or_default()
        );
    } else {
        if !outcome.summary.is_empty() {
            println!("{}", outcome.summary);
        }
        println!(
            "status: {}",
            serde_json::to_value(outcome.status)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default()
        );
        if let Some(r) = &outcome.reason {
            println!("reason: {r}");
        }
    }
    if !cli.common.no_write {
        match report.write(
            std::path::Path::new(&cfg.output_dir),
            outcome.csv.as_deref(),
        ) {
            Ok(p) if !json => println!("report: {}", p.display()),
            Ok(_) => {}
            Err(e) => {
                eprintln!("error: cannot write report: {e}");
                return ExitCode::from(Status::Error.code());
            }
        }
    }
    ExitCode::from(outcome.status.code())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients() {
        assert_eq!(parse_coeff("a0=1.5", 1).unwrap(), ([0, 0], 1.5));
        assert_eq!(parse_coeff("a1,0=-2", 2).unwrap(), ([1, 0], -2.0));
        assert!(parse_coeff("a1,0=1", 1).is_err());
        assert!(parse_coeff("b0=1", 1).is_err());
    }

    #[test]
    fn points_and_regions() {
        assert_eq!(parse_point("0.25", 1).unwrap(), [0.25, 0.0]);
        assert_eq!(parse_point("0.1,-0.2", 2).unwrap(), [0.1, -0.2]);
        assert!(parse_point("1,2", 1).is_err());
        assert!(parse_region("0.5,-0.5", 1).is_err());
        assert_eq!(parse_p("inf").unwrap(), f64::INFINITY);
    }
}
