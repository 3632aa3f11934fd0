use std::f64::consts::SQRT_2;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use saddlestat::constrained;
use saddlestat::goe::{self, BinSpec, Branch, DensityRequest, GoeSampler, Transform};
use saddlestat::landscape::{self, DensitySource, IndexDistribution, LandscapeParams, RegimeSpec};
use saddlestat::report::{self, Plot, Series, Style};
use saddlestat::verify::{self, CheckReport, ConvergenceCase, Status};
use saddlestat::{pspin, Estimate};

/// Annealed index statistics of stationary points in random landscapes.
#[derive(Parser)]
#[command(name = "saddlestat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (all cores by default).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Base seed of every Monte Carlo stream.
    #[arg(long, global = true, env = "SADDLESTAT_SEED", default_value_t = 20240917)]
    seed: u64,
    /// Monte Carlo draws per estimate.
    #[arg(long, global = true, default_value_t = 100_000)]
    samples: u64,
    /// Output file (stdout if omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// More log output (-v, -vv).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Index distribution for one model, regime and parameter set.
    Dist(Params),
    /// Phase diagram of the fixed-energy model in the (m, eps0) plane.
    Phase(PhaseArgs),
    /// Closed-form regime quantities tabulated over parameter sweeps.
    Table(Params),
    /// Monte Carlo verification checks.
    Verify(VerifyArgs),
    /// Binned density of GOE order statistics.
    GoeSample(GoeArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
enum Model {
    #[default]
    Landscape,
    Constrained,
    Pspin,
}

/// A value or an inclusive `start:end:step` sweep.
#[derive(Clone, Debug)]
struct Sweep(Vec<f64>);

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.len() {
            1 => Ok(Sweep(s.split(',').map(num).collect::<Result<_, _>>()?)),
            3 => {
                let (a, b, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
                if !(step > 0.0) || b < a {
                    return Err(format!("sweep {s:?} needs start <= end and step > 0"));
                }
                let count = ((b - a) / step + 1e-9).floor() as usize + 1;
                if count > 1_000_000 {
                    return Err(format!("sweep {s:?} has too many points"));
                }
                Ok(Sweep((0..count).map(|i| ((a + step * i as f64) * 1e12).round() / 1e12).collect()))
            }
            _ => Err(format!("expected a number or start:end:step, got {s:?}")),
        }
    }
}

#[derive(Args, Clone, Default)]
struct Params {
    #[arg(long, value_enum, default_value_t = Model::Landscape)]
    model: Model,
    /// simplicity | hierarchy | toppling | complexity | exact (landscape, constrained);
    /// a | b | c | d | exact (pspin).
    #[arg(long)]
    regime: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    m: Option<Sweep>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<Sweep>,
    /// Microscopic energy offset (constrained toppling window).
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<Sweep>,
    /// Fixed energy level (constrained, macroscopic regions).
    #[arg(long, allow_hyphen_values = true)]
    eps0: Option<Sweep>,
    #[arg(long, allow_hyphen_values = true)]
    q: Option<Sweep>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<Sweep>,
    #[arg(long = "B", allow_hyphen_values = true)]
    b: Option<Sweep>,
    #[arg(long = "J")]
    j: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    n: Option<Sweep>,
    #[arg(long, allow_hyphen_values = true)]
    k: Option<Sweep>,
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<Sweep>,
}

#[derive(Args)]
struct PhaseArgs {
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    /// m grid on (0, 1].
    #[arg(long, default_value = "0.02:1:0.02")]
    m: Sweep,
    /// Half-width in delta of the critical-window inset.
    #[arg(long, default_value_t = 1.0)]
    inset_span: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckKind {
    Relation,
    Tw,
    Gaussian,
    EdgePartition,
    Convergence,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BranchArg {
    Edge,
    Bulk,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    check: CheckKind,
    #[command(flatten)]
    params: Params,
    /// Evaluation points of the relation check (default 0.3, 0.8, 1.5 times sqrt(2) mu_c).
    #[arg(long, allow_hyphen_values = true)]
    z: Option<Sweep>,
    #[arg(long, default_value_t = 1.0)]
    mu_c: f64,
    #[arg(long, value_enum, default_value_t = BranchArg::Bulk)]
    branch: BranchArg,
    /// Treat inconclusive checks as passing.
    #[arg(long)]
    allow_inconclusive: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TransformArg {
    Identity,
    Edge,
}

#[derive(Args)]
struct GoeArgs {
    #[arg(long)]
    n: usize,
    /// Order index (0 = largest); omit with --full for the whole spectrum.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    full: bool,
    #[arg(long, value_enum, default_value_t = TransformArg::Identity)]
    transform: TransformArg,
    #[arg(long, allow_hyphen_values = true)]
    lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    hi: Option<f64>,
    #[arg(long, default_value_t = 200)]
    bins: usize,
}

enum Failure {
    Usage(String),
    Compute(String),
    Verify(usize),
}

impl From<saddlestat::Error> for Failure {
    fn from(e: saddlestat::Error) -> Self {
        match e {
            saddlestat::Error::Domain(_) => Failure::Usage(e.to_string()),
            saddlestat::Error::Coverage(_) => Failure::Compute(format!("{e} (try more --samples)")),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Compute(format!("i/o: {e}"))
    }
}

type Res<T> = Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Res<T> {
    Err(Failure::Usage(msg.into()))
}

struct Ctx {
    seed: u64,
    samples: u64,
    out: Option<PathBuf>,
    format: Format,
    command_line: String,
}

impl Ctx {
    fn base_meta(&self) -> Vec<(String, String)> {
        vec![("seed".into(), self.seed.to_string()), ("samples".into(), self.samples.to_string())]
    }

    fn emit(&self, content: &str) -> Res<()> {
        write_to(self.out.as_deref(), content)
    }
}

fn write_to(path: Option<&Path>, content: &str) -> Res<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, content)?;
            log::info!("wrote {}", p.display());
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}{ext}"))
}

fn one(v: &Option<Sweep>, name: &str) -> Res<f64> {
    match v {
        Some(Sweep(xs)) if xs.len() == 1 => Ok(xs[0]),
        Some(_) => usage(format!("--{name} takes a single value here")),
        None => usage(format!("--{name} is required for this model/regime")),
    }
}

fn one_or(v: &Option<Sweep>, name: &str, default: f64) -> Res<f64> {
    if v.is_none() {
        Ok(default)
    } else {
        one(v, name)
    }
}

fn as_index(x: f64, name: &str) -> Res<usize> {
    if x >= 0.0 && x.fract() == 0.0 && x < 1e9 {
        Ok(x as usize)
    } else {
        usage(format!("--{name} must be a non-negative integer, got {x}"))
    }
}

fn list(v: &Option<Sweep>, name: &str) -> Res<Vec<f64>> {
    match v {
        Some(Sweep(xs)) => Ok(xs.clone()),
        None => usage(format!("--{name} is required for this model/regime")),
    }
}

fn regime(p: &Params) -> Res<String> {
    p.regime.clone().map(|r| r.to_lowercase()).ok_or_else(|| Failure::Usage("--regime is required".into()))
}

/// `B` from `--B`, or from `--J/--sigma/--p`.
fn b_values(p: &Params) -> Res<Vec<f64>> {
    if let Some(Sweep(bs)) = &p.b {
        return Ok(bs.clone());
    }
    match p.j {
        Some(j) => Ok(vec![pspin::b_param(j, p.sigma.unwrap_or(0.0), p.p.unwrap_or(3))?]),
        None => usage("p-spin needs --B or --J (with optional --sigma, --p)"),
    }
}

fn model_name(m: Model) -> &'static str {
    match m {
        Model::Landscape => "landscape",
        Model::Constrained => "constrained",
        Model::Pspin => "pspin",
    }
}

/// Edge grid coarse enough that tail bins stay populated at `samples` draws.
fn edge_width(samples: u64) -> f64 {
    (1000.0 / samples as f64).clamp(0.02, 0.25)
}

fn ratio_distribution(nks: Vec<Estimate>, neq: Estimate) -> IndexDistribution {
    let rel_eq = if neq.value > 0.0 { neq.stderr / neq.value } else { 0.0 };
    let prob: Vec<f64> = nks.iter().map(|e| e.value / neq.value).collect();
    let se: Vec<f64> = nks
        .iter()
        .zip(&prob)
        .map(|(e, p)| {
            let rel = if e.value > 0.0 { e.stderr / e.value } else { 0.0 };
            p * (rel * rel + rel_eq * rel_eq).sqrt()
        })
        .collect();
    let mut d = IndexDistribution::discrete(prob, se);
    d.normalized = false;
    d
}

fn dist(ctx: &Ctx, p: &Params) -> Res<()> {
    let r = regime(p)?;
    let title = format!("{} / {}", model_name(p.model), r);
    let d = match (p.model, r.as_str()) {
        (Model::Landscape, "simplicity") => landscape::simplicity_distribution(one(&p.m, "m")?)?,
        (Model::Landscape, "hierarchy") => {
            let delta = one(&p.delta, "delta")?;
            RegimeSpec::Hierarchy { delta }.validate()?;
            let n = as_index(one_or(&p.n, "n", 1000.0)?, "n")?;
            let count = as_index(one_or(&p.k, "k", 12.0)?, "k")?;
            let set = landscape::hierarchy_densities(delta, n, count, edge_width(ctx.samples), ctx.samples, ctx.seed)?;
            landscape::hierarchy_distribution(delta, &set)?.with_meta("edge_n", n)
        }
        (Model::Landscape, "toppling") => {
            let delta = one(&p.delta, "delta")?;
            let hi = one_or(&p.kappa, "kappa", 3.0)?;
            landscape::toppling_distribution(delta, hi, 3001)?.with_meta("kappa_max", landscape::kappa_max_toppling(delta))
        }
        (Model::Landscape, "complexity") => landscape::complexity_distribution(one(&p.m, "m")?)?,
        (Model::Landscape, "exact") => {
            let params = LandscapeParams::new(one(&p.m, "m")?, as_index(one(&p.n, "n")?, "n")?)?;
            let kmax = as_index(one_or(&p.k, "k", params.n.min(10) as f64)?, "k")?.min(params.n);
            let ks: Vec<usize> = (0..=kmax).collect();
            let cs = landscape::landscape_sample(params, &ks, true, ctx.samples, ctx.seed)?;
            let neq = landscape::mean_neq_exact(params, DensitySource::Empirical(cs.set.full.as_ref().expect("requested")))?.estimate();
            let nks = ks
                .iter()
                .map(|&k| Ok(landscape::mean_nk_exact(params, k, DensitySource::Empirical(cs.set.get(k).expect("requested")))?.estimate()))
                .collect::<Res<Vec<_>>>()?;
            ratio_distribution(nks, neq).with_meta("regime", "exact").with_meta("m", params.m).with_meta("n", params.n).with_meta("neq", neq.value)
        }
        (Model::Constrained, "toppling") => {
            let (delta, eps, q) = (one(&p.delta, "delta")?, one(&p.eps, "eps")?, one_or(&p.q, "q", 2.0)?);
            let hi = one_or(&p.kappa, "kappa", 3.0)?;
            let support: Vec<f64> = (1..=3000).map(|i| hi * i as f64 / 3000.0).collect();
            let prob = support.iter().map(|&x| constrained::toppling_density_constrained(delta, eps, q, x)).collect::<Result<Vec<_>, _>>()?;
            IndexDistribution::continuous("1/4", support, prob, true)
                .with_meta("regime", "toppling")
                .with_meta("delta", delta)
                .with_meta("eps", eps)
                .with_meta("q", q)
                .with_meta("kappa_max", constrained::kappa_max_constrained(delta, eps, q)?)
        }
        (Model::Constrained, "complexity") => {
            let (m, eps0, q) = (one(&p.m, "m")?, one(&p.eps0, "eps0")?, one_or(&p.q, "q", 2.0)?);
            let mut d = IndexDistribution::continuous("1", vec![], vec![], true).with_meta("regime", "complexity").with_meta("m", m).with_meta("eps0", eps0).with_meta("q", q);
            d.atom = Some((constrained::complexity_atom_constrained(m, eps0, q)?, 1.0));
            d
        }
        (Model::Constrained, "simplicity") => {
            let (m, eps0, q) = (one(&p.m, "m")?, one(&p.eps0, "eps0")?, one_or(&p.q, "q", 2.0)?);
            let mc = constrained::m_c(eps0, q)?;
            if !(m > mc) {
                return usage(format!("simplicity needs m > m_c(eps0) = {mc}, got m={m}"));
            }
            IndexDistribution::discrete(vec![1.0], vec![0.0]).with_meta("regime", "simplicity").with_meta("m", m).with_meta("eps0", eps0).with_meta("q", q)
        }
        (Model::Pspin, reg) => {
            let d = pspin_dist(ctx, p, reg)?;
            let d = if let Some(j) = p.j { d.with_meta("J", j).with_meta("sigma", p.sigma.unwrap_or(0.0)).with_meta("p", p.p.unwrap_or(3)) } else { d };
            d
        }
        (_, other) => return usage(format!("unknown regime {other:?} for model {}", model_name(p.model))),
    };
    let d = if d.metadata.iter().any(|(k, _)| k == "model") { d } else { d.with_meta("model", model_name(p.model)) };
    write_distribution(ctx, &d, &title)
}

fn pspin_dist(ctx: &Ctx, p: &Params, reg: &str) -> Res<IndexDistribution> {
    Ok(match reg {
        "a" => {
            let b = b_values(p)?[0];
            if !(b > -1.0 && b < 0.0) {
                return usage(format!("region a needs -1 < B < 0, got {b}"));
            }
            let n = as_index(one_or(&p.n, "n", 10.0)?, "n")?;
            let prob = (0..=n).map(|k| pspin::pk_region_a(k, n)).collect::<Result<Vec<_>, _>>()?;
            IndexDistribution::discrete(prob, vec![0.0; n + 1]).with_meta("regime", "a").with_meta("B", b).with_meta("n", n)
        }
        "b" => {
            let beta = one(&p.beta, "beta")?;
            let n = as_index(one_or(&p.n, "n", 1000.0)?, "n")?;
            let count = as_index(one_or(&p.k, "k", 8.0)?, "k")?;
            let (top, bottom) = pspin::dual_edge_densities_tilted(beta, n + 1, count, edge_width(ctx.samples), ctx.samples, ctx.seed)?;
            pspin::region_b_distribution(beta, n, &top, &bottom)?.with_meta("n", n)
        }
        "c" => pspin::region_c_distribution(one(&p.beta, "beta")?, 1001)?,
        "d" => pspin::region_d_distribution(b_values(p)?[0])?,
        "exact" => {
            let b = b_values(p)?[0];
            let n = as_index(one(&p.n, "n")?, "n")?;
            let ks: Vec<usize> = (0..=n).collect();
            let cs = pspin::pspin_sample(b, n, &ks, true, ctx.samples, ctx.seed)?;
            let neq = pspin::mean_neq_pspin(b, n, DensitySource::Empirical(cs.set.full.as_ref().expect("requested")))?.estimate();
            let nks = ks
                .iter()
                .map(|&k| Ok(pspin::mean_nk_pspin(b, n, k, DensitySource::Empirical(cs.set.get(k).expect("requested")))?.estimate()))
                .collect::<Res<Vec<_>>>()?;
            ratio_distribution(nks, neq).with_meta("regime", "exact").with_meta("B", b).with_meta("n", n).with_meta("neq", neq.value)
        }
        other => return usage(format!("unknown p-spin region {other:?} (expected a, b, c, d or exact)")),
    })
}

fn write_distribution(ctx: &Ctx, d: &IndexDistribution, title: &str) -> Res<()> {
    match ctx.format {
        Format::Csv => ctx.emit(&(report::provenance_header(&ctx.command_line, &ctx.base_meta()) + &d.to_csv())),
        Format::Json => ctx.emit(&(report::stamp_json(d.to_json(), &ctx.command_line).to_string() + "\n")),
        Format::Svg => ctx.emit(&report::render_svg(&report::distribution_plot(d, title))),
    }
}

fn phase(ctx: &Ctx, a: &PhaseArgs) -> Res<()> {
    let pd = constrained::phase_curves(a.q, &a.m.0)?;
    let meta = vec![("q".to_string(), a.q.to_string())];
    let inset_rows = report::phase_inset_rows(&pd, a.inset_span, 41);
    match ctx.format {
        Format::Csv => {
            ctx.emit(&(report::provenance_header(&ctx.command_line, &meta) + &pd.to_csv()))?;
            if let Some(out) = &ctx.out {
                let mut s = report::provenance_header(&ctx.command_line, &meta);
                s.push_str("delta,eps_toppling,eps_cone_minus,eps_cone_plus\n");
                for r in &inset_rows {
                    s.push_str(&format!("{},{},{},{}\n", r[0], r[1], r[2], r[3]));
                }
                write_to(Some(&sibling(out, "_inset")), &s)?;
            }
        }
        Format::Json => {
            let mut v = report::stamp_json(pd.to_json(), &ctx.command_line);
            v["inset"] = serde_json::json!(inset_rows);
            ctx.emit(&(v.to_string() + "\n"))?;
        }
        Format::Svg => {
            ctx.emit(&report::render_svg(&report::phase_plot(&pd)))?;
            if let Some(out) = &ctx.out {
                write_to(Some(&sibling(out, "_inset")), &report::render_svg(&report::phase_inset_plot(&pd, a.inset_span)))?;
            }
        }
    }
    Ok(())
}

/// Cartesian product of the swept parameters, in the given order.
fn grid(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![vec![]];
    for ax in axes {
        let mut next = Vec::new();
        for row in &out {
            for &x in ax {
                let mut r = row.clone();
                r.push(x);
                next.push(r);
            }
        }
        out = next;
    }
    out
}

fn table(ctx: &Ctx, p: &Params) -> Res<()> {
    let r = regime(p)?;
    let n_of = |default: f64| -> Res<usize> { as_index(one_or(&p.n, "n", default)?, "n") };
    let (header, rows): (Vec<&str>, Vec<Vec<f64>>) = match (p.model, r.as_str()) {
        (Model::Landscape, "simplicity") => {
            let rows = list(&p.m, "m")?
                .into_iter()
                .map(|m| {
                    RegimeSpec::Simplicity { m }.validate()?;
                    Ok(vec![m, landscape::pk_simplicity(0), 1.0])
                })
                .collect::<Res<_>>()?;
            (vec!["m", "p0", "neq"], rows)
        }
        (Model::Landscape, "hierarchy") => {
            let rows = list(&p.delta, "delta")?.into_iter().map(|d| Ok(vec![d, landscape::neq_hierarchy(d)?])).collect::<Res<_>>()?;
            (vec!["delta", "neq"], rows)
        }
        (Model::Landscape, "toppling") => {
            let n = n_of(100.0)?;
            let rows = list(&p.delta, "delta")?
                .into_iter()
                .map(|d| Ok(vec![d, landscape::kappa_max_toppling(d), landscape::toppling_log_norm(d)?, landscape::neq_toppling(d, n)?]))
                .collect::<Res<_>>()?;
            (vec!["delta", "kappa_max", "log_norm", "neq"], rows)
        }
        (Model::Landscape, "complexity") => {
            let n = n_of(100.0)?;
            let rows = list(&p.m, "m")?
                .into_iter()
                .map(|m| Ok(vec![m, landscape::sigma_eq(m)?, landscape::sigma_0(m)?, landscape::kappa_max_complexity(m)?, landscape::log_neq_complexity(m, n)?]))
                .collect::<Res<_>>()?;
            (vec!["m", "sigma_eq", "sigma_0", "kappa_max", "log_neq"], rows)
        }
        (Model::Constrained, "complexity") => {
            let axes = [list(&p.m, "m")?, list(&p.eps0, "eps0")?, p.q.clone().map(|s| s.0).unwrap_or(vec![2.0])];
            let rows = grid(&axes)
                .into_iter()
                .map(|v| {
                    let (m, e, q) = (v[0], v[1], v[2]);
                    let atom = constrained::complexity_atom_constrained(m, e, q).unwrap_or(f64::NAN);
                    Ok(vec![m, e, q, constrained::m_c(e, q)?, constrained::sigma_eq_constrained(m, e, q)?, atom])
                })
                .collect::<Res<_>>()?;
            (vec!["m", "eps0", "q", "m_c", "sigma_eq", "kappa_atom"], rows)
        }
        (Model::Constrained, "toppling") => {
            let axes = [list(&p.delta, "delta")?, list(&p.eps, "eps")?, p.q.clone().map(|s| s.0).unwrap_or(vec![2.0])];
            let rows = grid(&axes)
                .into_iter()
                .map(|v| {
                    let (d, e, q) = (v[0], v[1], v[2]);
                    let (big_d, c2) = constrained::toppling_shape(d, e, q)?;
                    let (dq, cq) = constrained::toppling_shape_summary(d, e, q)?;
                    Ok(vec![d, e, q, big_d, c2, dq, cq, constrained::kappa_max_constrained(d, e, q)?, constrained::kappa_max_summary(d, e, q)?])
                })
                .collect::<Res<_>>()?;
            (vec!["delta", "eps", "q", "shape_delta", "shape_c2", "delta_q", "c_q", "kappa_max", "kappa_max_summary"], rows)
        }
        (Model::Pspin, "a") => {
            let rows = b_values(p)?.into_iter().map(|b| vec![b, pspin::neq_region_a()]).collect();
            (vec!["B", "neq"], rows)
        }
        (Model::Pspin, "b") => {
            let rows = list(&p.beta, "beta")?.into_iter().map(|b| Ok(vec![b, pspin::neq_region_b(b)?])).collect::<Res<_>>()?;
            (vec!["beta", "neq"], rows)
        }
        (Model::Pspin, "c") => {
            let n = n_of(100.0)?;
            let rows = list(&p.beta, "beta")?
                .into_iter()
                .map(|b| Ok(vec![b, pspin::region_c_norm(b)?, pspin::density_region_c(b, 0.5)?, pspin::neq_region_c(b, n)?]))
                .collect::<Res<_>>()?;
            (vec!["beta", "norm", "density_at_half", "neq"], rows)
        }
        (Model::Pspin, "d") => {
            let n = n_of(100.0)?;
            let rows = b_values(p)?.into_iter().map(|b| Ok(vec![b, pspin::log_neq_region_d(b, n)?])).collect::<Res<_>>()?;
            (vec!["B", "log_neq"], rows)
        }
        (_, other) => return usage(format!("no table for regime {other:?} of model {}", model_name(p.model))),
    };
    let mut meta = vec![("model".to_string(), model_name(p.model).to_string()), ("regime".to_string(), r.clone())];
    if let Some(Sweep(ns)) = &p.n {
        meta.push(("n".into(), ns.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")));
    }
    match ctx.format {
        Format::Csv => {
            let mut s = report::provenance_header(&ctx.command_line, &meta);
            s.push_str(&header.join(","));
            s.push('\n');
            for row in &rows {
                s.push_str(&row.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
                s.push('\n');
            }
            ctx.emit(&s)
        }
        Format::Json => {
            let recs: Vec<serde_json::Value> = rows.iter().map(|row| header.iter().zip(row).map(|(h, x)| (h.to_string(), serde_json::json!(x))).collect::<serde_json::Map<_, _>>().into()).collect();
            let v = serde_json::json!({ "schema_version": 1, "model": model_name(p.model), "regime": r, "rows": recs });
            ctx.emit(&(report::stamp_json(v, &ctx.command_line).to_string() + "\n"))
        }
        Format::Svg => {
            let mut plot = Plot { title: format!("{} / {}", model_name(p.model), r), x_label: header[0].into(), y_label: "value".into(), ..Default::default() };
            for (j, h) in header.iter().enumerate().skip(1) {
                plot.series.push(Series::new(*h, rows.iter().map(|row| (row[0], row[j])).collect(), Style::Line));
            }
            ctx.emit(&report::render_svg(&plot))
        }
    }
}

fn convergence_case(p: &Params) -> Res<(ConvergenceCase, Vec<usize>)> {
    let r = regime(p)?;
    let default_ns = |ns: &[usize]| -> Res<Vec<usize>> {
        match &p.n {
            Some(Sweep(v)) => v.iter().map(|&x| as_index(x, "n")).collect(),
            None => Ok(ns.to_vec()),
        }
    };
    Ok(match (p.model, r.as_str()) {
        (Model::Landscape, "toppling") => (
            ConvergenceCase::LandscapeToppling { delta: one_or(&p.delta, "delta", -0.8)?, kappa: one_or(&p.kappa, "kappa", 0.4)? },
            default_ns(&[50, 100, 200])?,
        ),
        (Model::Landscape, "simplicity") => (ConvergenceCase::LandscapeSimplicityP0 { m: one_or(&p.m, "m", 2.0)? }, default_ns(&[10, 20, 40])?),
        (Model::Landscape, "simplicity-neq") => (ConvergenceCase::LandscapeSimplicityNeq { m: one_or(&p.m, "m", 1.5)? }, default_ns(&[10, 20, 40])?),
        (Model::Pspin, "a") => {
            let b = if p.b.is_some() || p.j.is_some() { b_values(p)?[0] } else { -0.5 };
            (ConvergenceCase::PSpinRegionA { b }, default_ns(&[10, 20, 40])?)
        }
        (m, other) => return usage(format!("no convergence check for regime {other:?} of model {}", model_name(m))),
    })
}

fn run_checks(ctx: &Ctx, a: &VerifyArgs) -> Res<Vec<CheckReport>> {
    let p = &a.params;
    let mut reports = Vec::new();
    let kinds: Vec<CheckKind> = if a.check == CheckKind::All {
        vec![CheckKind::Relation, CheckKind::Tw, CheckKind::Gaussian, CheckKind::EdgePartition, CheckKind::Convergence]
    } else {
        vec![a.check]
    };
    for kind in kinds {
        match kind {
            CheckKind::Relation => {
                let n = as_index(one_or(&p.n, "n", 4.0)?, "n")?;
                let ks: Vec<usize> = match &p.k {
                    Some(Sweep(v)) => v.iter().map(|&x| as_index(x, "k")).collect::<Res<_>>()?,
                    None => (0..=n.min(2)).collect(),
                };
                let zs = match &a.z {
                    Some(Sweep(v)) => v.clone(),
                    None => [0.3, 0.8, 1.5].iter().map(|f| f * SQRT_2 * a.mu_c).collect(),
                };
                for (i, &k) in ks.iter().enumerate() {
                    for (j, &z) in zs.iter().enumerate() {
                        let seed = ctx.seed.wrapping_add(2 * (i * zs.len() + j) as u64);
                        reports.push(verify::check_relation(n, k, z, a.mu_c, ctx.samples, seed)?);
                    }
                }
            }
            CheckKind::Tw => {
                let n = as_index(one_or(&p.n, "n", 500.0)?, "n")?;
                let k = as_index(one_or(&p.k, "k", 0.0)?, "k")?;
                reports.push(verify::check_tw_approx(n, k, ctx.samples, ctx.seed)?);
            }
            CheckKind::Gaussian => {
                let n = as_index(one_or(&p.n, "n", 1000.0)?, "n")?;
                let branch = match a.branch {
                    BranchArg::Edge => Branch::Edge,
                    BranchArg::Bulk => Branch::Bulk,
                };
                let default_k = match branch {
                    Branch::Edge => (n as f64).powf(0.25).floor(),
                    Branch::Bulk => (n / 4) as f64,
                };
                let k = as_index(one_or(&p.k, "k", default_k)?, "k")?;
                reports.push(verify::check_gaussian_approx(n, k, branch, ctx.samples, ctx.seed)?);
            }
            CheckKind::EdgePartition => {
                let n = as_index(one_or(&p.n, "n", 2000.0)?, "n")?;
                let count = as_index(one_or(&p.k, "k", 4.0)?, "k")?;
                reports.push(verify::check_edge_partition(n, count, -4.0, 3.0, 0.1, ctx.samples, ctx.seed)?);
            }
            CheckKind::Convergence => {
                if a.check == CheckKind::All && p.regime.is_none() {
                    let mut q = p.clone();
                    q.model = Model::Pspin;
                    q.regime = Some("a".into());
                    let (case, ns) = convergence_case(&q)?;
                    reports.push(verify::check_regime_convergence(case, &ns, ctx.samples, ctx.seed)?);
                } else {
                    let (case, ns) = convergence_case(p)?;
                    reports.push(verify::check_regime_convergence(case, &ns, ctx.samples, ctx.seed)?);
                }
            }
            CheckKind::All => unreachable!(),
        }
    }
    Ok(reports)
}

fn verify_cmd(ctx: &Ctx, a: &VerifyArgs) -> Res<()> {
    let reports = run_checks(ctx, a)?;
    let mut lines = String::new();
    for r in &reports {
        let mut v = report::stamp_json(r.to_json(), &ctx.command_line);
        v["seed_base"] = ctx.seed.into();
        lines.push_str(&v.to_string());
        lines.push('\n');
    }
    ctx.emit(&lines)?;
    eprint!("{}", verify::summary_table(&reports));
    let failed = reports.iter().filter(|r| r.status == Status::Fail || (r.status == Status::Inconclusive && !a.allow_inconclusive)).count();
    if failed > 0 {
        return Err(Failure::Verify(failed));
    }
    Ok(())
}

fn goe_sample(ctx: &Ctx, a: &GoeArgs) -> Res<()> {
    if a.k.is_none() && !a.full {
        return usage("give --k or --full");
    }
    let transform = match a.transform {
        TransformArg::Identity => Transform::identity(),
        TransformArg::Edge => Transform::edge(a.n),
    };
    let edge = (2.0 * a.n as f64).sqrt();
    let (dlo, dhi) = match (a.transform, a.k) {
        (TransformArg::Edge, _) => (-10.0, 5.0),
        (TransformArg::Identity, Some(k)) if k < 16 => (edge - 3.0, edge + 2.0),
        _ => (-edge - 2.0, edge + 2.0),
    };
    let grid = BinSpec::new(a.lo.unwrap_or(dlo), a.hi.unwrap_or(dhi), a.bins)?;
    let sampler = GoeSampler::standard(a.n, ctx.seed)?;
    let req = DensityRequest { ks: a.k.into_iter().collect(), full: a.full, grid, transform, n_samples: ctx.samples, tilt: None };
    let set = goe::sample_densities(&sampler, &req)?;
    let d = match a.k {
        Some(k) => set.get(k).expect("requested").clone(),
        None => set.full.expect("requested"),
    };
    match ctx.format {
        Format::Csv => ctx.emit(&(report::provenance_header(&ctx.command_line, &ctx.base_meta()) + &d.to_csv())),
        Format::Json => ctx.emit(&(report::stamp_json(d.to_json(), &ctx.command_line).to_string() + "\n")),
        Format::Svg => {
            let pts = (0..d.bins()).map(|b| (d.center(b), d.density(b))).collect();
            let plot = Plot { title: format!("GOE n = {}", a.n), x_label: d.transform.label.clone(), y_label: "density".into(), series: vec![Series::new("MC", pts, Style::Line)], markers: vec![] };
            ctx.emit(&report::render_svg(&plot))
        }
    }
}

fn run(cli: &Cli) -> Res<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return usage("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| Failure::Compute(e.to_string()))?;
    }
    let ctx = Ctx { seed: cli.seed, samples: cli.samples, out: cli.out.clone(), format: cli.format, command_line: std::env::args().collect::<Vec<_>>().join(" ") };
    if ctx.samples < 2 {
        return usage("--samples must be at least 2");
    }
    match &cli.command {
        Command::Dist(p) => dist(&ctx, p),
        Command::Phase(a) => phase(&ctx, a),
        Command::Table(p) => table(&ctx, p),
        Command::Verify(a) => verify_cmd(&ctx, a),
        Command::GoeSample(a) => goe_sample(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verify(n)) => {
            eprintln!("{n} check(s) failed");
            ExitCode::from(3)
        }
    }
}
