//! `hcmu-lab` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 inadmissible parameters,
//! 3 numerical failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use num_rational::BigRational;

use crate::algebra::{certify_nonvanishing, obstruction_poly, rational_to_f64, AlgebraError, CubicData};
use crate::compatibility::{
    optimize_shape_field, read_shape_field, residual_summary, write_field_csv, CompatError, Constraint, FieldHeader, FieldSeed,
    GridDomain, OptimizeOptions, RandomSeed,
};
use crate::config::{parse_config, Config};
use crate::metric::{solve_curvature_ode, validate_params, CurvatureProfile, HcmuParams, MetricError};
use crate::numfmt::fmt17;
use crate::realizer::{integrate_frame, parse_mesh, solve_codazzi_family, verify_immersion, DiagonalFamily, FrameGrid, RealizerError};

#[derive(Parser, Debug)]
#[command(name = "hcmu-lab", version, about = "Workbench for HCMU metrics and their isometric immersions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Obstruction polynomial Φ(K, c) and its root certificate on (K2, K1)
    Obstruction(Flags),
    /// Sampled curvature profile K(x), μ(x), φ(x) as CSV
    Profile(Flags),
    /// Gauss and Codazzi residuals of a shape field given as three CSV files
    CheckGc(Flags),
    /// Constrained residual minimization (--constraint none|minimal|cmc:H)
    Optimize(Flags),
    /// Integrate the diagonal Codazzi family into a space-form mesh
    Realize(Flags),
    /// Re-check a mesh against the family that should have produced it
    Verify(Flags),
}

/// Every subcommand accepts the full key set; unused keys are ignored.
#[derive(clap::Args, Debug)]
struct Flags {
    /// `key = value` file; flags given on the command line take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Allow replacing existing output files
    #[arg(long)]
    force: bool,
    #[arg(long, allow_hyphen_values = true)]
    k1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    k2: Option<String>,
    /// Ambient curvature
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    /// Curvature at x = 0
    #[arg(long, allow_hyphen_values = true)]
    k0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x_max: Option<String>,
    /// Profile integration step
    #[arg(long)]
    step: Option<String>,
    /// Grid size `nx,ny`
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    hx: Option<String>,
    #[arg(long)]
    hy: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    y0: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
    #[arg(long)]
    constraint: Option<String>,
    /// Repeat the optimization on the refined grid (`true`/`false`)
    #[arg(long)]
    refine: Option<String>,
    /// k2 at x = 0; for `optimize` it selects the family seed instead of a random one
    #[arg(long, allow_hyphen_values = true)]
    k2_init: Option<String>,
    /// RK4 steps per grid edge in `realize`
    #[arg(long)]
    substeps: Option<String>,
    /// Worker threads (falls back to HCMU_LAB_THREADS)
    #[arg(long)]
    threads: Option<String>,
    /// Output file; standard output when absent
    #[arg(long)]
    out: Option<String>,
    /// Write the optimized field to `<prefix>.h11.csv` etc.
    #[arg(long)]
    field_prefix: Option<String>,
    #[arg(long)]
    mesh: Option<String>,
    #[arg(long)]
    h11: Option<String>,
    #[arg(long)]
    h12: Option<String>,
    #[arg(long)]
    h22: Option<String>,
}

impl Flags {
    fn to_config(&self) -> Result<Config, CliError> {
        let mut cfg = Config::default();
        let pairs: [(&str, &Option<String>); 26] = [
            ("k1", &self.k1),
            ("k2", &self.k2),
            ("c", &self.c),
            ("k0", &self.k0),
            ("x_min", &self.x_min),
            ("x_max", &self.x_max),
            ("step", &self.step),
            ("grid", &self.grid),
            ("hx", &self.hx),
            ("hy", &self.hy),
            ("x0", &self.x0),
            ("y0", &self.y0),
            ("seed", &self.seed),
            ("tol", &self.tol),
            ("max_iter", &self.max_iter),
            ("constraint", &self.constraint),
            ("refine", &self.refine),
            ("k2_init", &self.k2_init),
            ("substeps", &self.substeps),
            ("threads", &self.threads),
            ("out", &self.out),
            ("field_prefix", &self.field_prefix),
            ("mesh", &self.mesh),
            ("h11", &self.h11),
            ("h12", &self.h12),
            ("h22", &self.h22),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                cfg.set(k, v).map_err(|e| CliError::Usage(format!("--{}: {e}", k.replace('_', "-"))))?;
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Inadmissible(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Inadmissible(_) => 2,
            Self::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Usage(m) | Self::Inadmissible(m) | Self::Numerical(m) => m,
        }
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::Inadmissible(_) => Self::Inadmissible(e.to_string()),
            MetricError::Parse { .. } => Self::Usage(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

impl From<CompatError> for CliError {
    fn from(e: CompatError) -> Self {
        match e {
            CompatError::Metric(m) => m.into(),
            CompatError::Invalid(_) | CompatError::ShapeMismatch { .. } => Self::Usage(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

impl From<RealizerError> for CliError {
    fn from(e: RealizerError) -> Self {
        match e {
            RealizerError::Metric(m) => m.into(),
            RealizerError::Compat(c) => c.into(),
            RealizerError::Parse { .. } | RealizerError::Invalid(_) => Self::Usage(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

impl From<AlgebraError> for CliError {
    fn from(e: AlgebraError) -> Self {
        Self::Numerical(e.to_string())
    }
}

fn rational(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn write_new(path: &Path, text: &str, force: bool) -> Result<(), CliError> {
    if !force && path.exists() {
        return Err(CliError::Usage(format!("{} exists; pass --force to replace it", path.display())));
    }
    std::fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Resolved parameters with the documented defaults filled in.
struct Run {
    cfg: Config,
    k1: BigRational,
    k2: BigRational,
    c: BigRational,
}

impl Run {
    fn new(cfg: Config) -> Self {
        let k1 = cfg.k1.clone().unwrap_or_else(|| rational(2));
        let k2 = cfg.k2.clone().unwrap_or_else(|| rational(1));
        let c = cfg.c.clone().unwrap_or_else(|| rational(0));
        Self { cfg, k1, k2, c }
    }

    fn c_f64(&self) -> f64 {
        rational_to_f64(&self.c)
    }

    fn params(&self) -> Result<HcmuParams, CliError> {
        crate::metric::validate_params_exact(&self.k1, &self.k2)?;
        Ok(validate_params(rational_to_f64(&self.k1), rational_to_f64(&self.k2))?)
    }

    fn k0(&self) -> f64 {
        self.cfg.k0.unwrap_or_else(|| 0.5 * (rational_to_f64(&self.k1) + rational_to_f64(&self.k2)))
    }

    fn step(&self) -> f64 {
        self.cfg.step.unwrap_or(1e-3)
    }

    /// A profile covering `[a, b]` and `0` with a small margin.
    fn profile_covering(&self, a: f64, b: f64, h: f64) -> Result<Arc<CurvatureProfile>, CliError> {
        let p = self.params()?;
        let m = 0.05f64.max(2.0 * h);
        Ok(Arc::new(solve_curvature_ode(&p, self.k0(), a.min(0.0) - m, b.max(0.0) + m, self.step())?))
    }

    fn family_covering(&self, a: f64, b: f64, h: f64) -> Result<DiagonalFamily, CliError> {
        let prof = self.profile_covering(a, b, h)?;
        Ok(solve_codazzi_family(prof, self.c_f64(), self.cfg.k2_init.unwrap_or(2.0))?)
    }
}

fn obstruction(run: &Run) -> Result<String, CliError> {
    crate::metric::validate_params_exact(&run.k1, &run.k2)?;
    let cubic = CubicData::new(run.k1.clone(), run.k2.clone());
    let phi = obstruction_poly(&cubic, &run.c)?;
    let cert = certify_nonvanishing(&phi, &run.k2, &run.k1)?;
    Ok(format!("{}\n{}", phi.to_line(), cert.to_text()))
}

fn profile(run: &Run) -> Result<String, CliError> {
    let p = run.params()?;
    let (a, b) = (run.cfg.x_min.unwrap_or(-10.0), run.cfg.x_max.unwrap_or(10.0));
    Ok(solve_curvature_ode(&p, run.k0(), a, b, run.step())?.to_csv())
}

fn check_gc(run: &Run) -> Result<String, CliError> {
    let need = |p: &Option<PathBuf>, k: &str| p.clone().ok_or_else(|| CliError::Usage(format!("--{k} is required")));
    let (a, b, c) = (need(&run.cfg.h11, "h11")?, need(&run.cfg.h12, "h12")?, need(&run.cfg.h22, "h22")?);
    let constraint = run.cfg.constraint.unwrap_or(Constraint::None);
    let (hd, field) = read_shape_field(&read(&a)?, &read(&b)?, &read(&c)?, constraint)?;
    let prof = run.profile_covering(hd.x0, hd.x0 + hd.nx.saturating_sub(1) as f64 * hd.hx, hd.hx)?;
    let grid = GridDomain::new(prof, hd.nx, hd.ny, hd.hx, hd.hy, (hd.x0, hd.y0))?;
    field.check_shape(&grid)?;
    let s = residual_summary(&field, &grid, run.c_f64());
    Ok(format!(
        "nodes={}\ngauss_max={}\ngauss_l2={}\ncodazzi_max={}\ncodazzi_l2={}\ntotal_l2={}\ntrace_error={}\n",
        s.nodes,
        fmt17(s.gauss_max),
        fmt17(s.gauss_l2),
        fmt17(s.codazzi_max),
        fmt17(s.codazzi_l2),
        fmt17(s.total_l2()),
        fmt17(field.max_trace_error())
    ))
}

fn optimize(run: &Run, force: bool) -> Result<String, CliError> {
    let cfg = &run.cfg;
    let (nx, ny) = cfg.grid.unwrap_or((32, 32));
    let hx = cfg.hx.unwrap_or(1.0 / nx.max(1) as f64);
    let hy = cfg.hy.unwrap_or(1.0 / ny.max(1) as f64);
    let x0 = cfg.x0.unwrap_or(-0.5 * nx as f64 * hx);
    let y0 = cfg.y0.unwrap_or(-0.5 * ny as f64 * hy);
    let x_end = x0 + nx as f64 * hx;
    let prof = run.profile_covering(x0, x_end, hx)?;
    let grid = GridDomain::new(prof.clone(), nx, ny, hx, hy, (x0, y0))?;
    let constraint = cfg.constraint.unwrap_or(Constraint::None);
    let seed: Box<dyn FieldSeed> = match cfg.k2_init {
        Some(k2) => Box::new(solve_codazzi_family(prof, run.c_f64(), k2)?),
        None => Box::new(RandomSeed(cfg.seed.unwrap_or(0))),
    };
    let defaults = OptimizeOptions::default();
    let opts = OptimizeOptions {
        tol: cfg.tol.unwrap_or(defaults.tol),
        max_iter: cfg.max_iter.unwrap_or(defaults.max_iter),
        refine: cfg.refine.unwrap_or(false),
        ..defaults
    };
    let (field, report) = optimize_shape_field(&grid, run.c_f64(), constraint, seed.as_ref(), &opts)?;
    if let Some(prefix) = &cfg.field_prefix {
        let hd = FieldHeader { nx, ny, hx, hy, x0, y0 };
        for (name, values) in [("h11", &field.h11), ("h12", &field.h12), ("h22", &field.h22)] {
            let mut path = prefix.clone().into_os_string();
            path.push(format!(".{name}.csv"));
            write_new(Path::new(&path), &write_field_csv(&hd, values), force)?;
        }
    }
    Ok(report.to_text())
}

fn realize(run: &Run) -> Result<String, CliError> {
    let cfg = &run.cfg;
    let (nx, ny) = cfg.grid.unwrap_or((101, 101));
    let hx = cfg.hx.unwrap_or(1e-3);
    let g = FrameGrid {
        nx,
        ny,
        x0: cfg.x0.unwrap_or(0.0),
        y0: cfg.y0.unwrap_or(0.0),
        hx,
        hy: cfg.hy.unwrap_or(hx),
        substeps: cfg.substeps.unwrap_or(1),
    };
    let fam = run.family_covering(g.x0, g.x(nx.saturating_sub(1)), hx)?;
    Ok(integrate_frame(&fam, &g)?.to_text())
}

fn verify(run: &Run) -> Result<String, CliError> {
    let path = run.cfg.mesh.clone().ok_or_else(|| CliError::Usage("--mesh is required".into()))?;
    let mesh = parse_mesh(&read(&path)?)?;
    let fam = run.family_covering(mesh.x0, mesh.x(mesh.nx.saturating_sub(1)), mesh.hx)?;
    Ok(verify_immersion(&mesh, &fam)?.to_text())
}

fn threads(cfg: &Config) -> Result<Option<usize>, CliError> {
    if let Some(n) = cfg.threads {
        return Ok(Some(n));
    }
    match std::env::var("HCMU_LAB_THREADS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| CliError::Usage(format!("HCMU_LAB_THREADS must be an integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let (flags, which) = match &cli.cmd {
        Cmd::Obstruction(f) => (f, 0),
        Cmd::Profile(f) => (f, 1),
        Cmd::CheckGc(f) => (f, 2),
        Cmd::Optimize(f) => (f, 3),
        Cmd::Realize(f) => (f, 4),
        Cmd::Verify(f) => (f, 5),
    };
    let file = match &flags.config {
        Some(p) => parse_config(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
        None => Config::default(),
    };
    let cfg = file.overridden_by(&flags.to_config()?);
    if let Some(p) = &cfg.out {
        if !flags.force && p.exists() {
            return Err(CliError::Usage(format!("{} exists; pass --force to replace it", p.display())));
        }
    }
    let force = flags.force;
    let run = Run::new(cfg);
    let work = || match which {
        0 => obstruction(&run),
        1 => profile(&run),
        2 => check_gc(&run),
        3 => optimize(&run, force),
        4 => realize(&run),
        _ => verify(&run),
    };
    let text = match threads(&run.cfg)? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    match &run.cfg.out {
        Some(p) => write_new(p, &text, force),
        None => out.write_all(text.as_bytes()).map_err(|e| CliError::Usage(e.to_string())),
    }
}

/// Runs with explicit streams; `args[0]` is the program name.
pub fn run_with(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = out.write_all(text.as_bytes());
                0
            } else {
                let _ = err.write_all(text.as_bytes());
                1
            };
        }
    };
    match dispatch(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "hcmu-lab: {}", e.message());
            e.code()
        }
    }
}

pub fn run(args: &[String]) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}
