use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use cle_integrability::cle_mc::{self, experimental, CleMcConfig, GridDomain, LoopSoupSampler};
use cle_integrability::cli_io::suites::{self, Suite};
use cle_integrability::cli_io::{self, load_config, write_curve_csv, write_histogram_csv, ErrorInfo, Num, RunRecord};
use cle_integrability::levy::{self, AnnulusOptions, StableLevyConfig};
use cle_integrability::replicate::stream;
use cle_integrability::specialfn::{self as sf, LqgParams, DEFAULT_TOL};
use cle_integrability::Error;

#[derive(Parser, Debug)]
#[command(name = "cleint", version, about = "CLE structure constants: closed forms, identity checks and Monte Carlo")]
struct Cli {
    /// Require --seed for Monte Carlo commands.
    #[arg(long, global = true)]
    strict: bool,
    /// Worker threads; defaults to $CLEINT_THREADS, then the core count.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// `key = value` file supplying parameters; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a closed-form quantity.
    Eval {
        formula: String,
        #[command(flatten)]
        p: ParamArgs,
    },
    /// Run a deterministic verification suite: identities, shifts, factorization or all.
    Verify {
        suite: String,
        /// Pass threshold applied to every check instead of its default.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Monte Carlo estimators.
    Mc {
        #[command(subcommand)]
        family: McFamily,
    },
}

#[derive(Subcommand, Debug)]
enum McFamily {
    /// tau-ratio, inv-tau, marked-jump, annulus.
    Levy {
        estimator: String,
        #[command(flatten)]
        p: ParamArgs,
    },
    /// ssw, soup, outermost; three-point and thickness-mgf need --experimental.
    Cle {
        estimator: String,
        #[arg(long)]
        experimental: bool,
        #[command(flatten)]
        p: ParamArgs,
    },
}

macro_rules! param_args {
    ($($field:ident => $key:literal),* $(,)?) => {
        #[derive(Args, Debug, Default)]
        struct ParamArgs {
            $(#[arg(long = $key, allow_hyphen_values = true)] $field: Option<String>,)*
        }

        const PARAM_KEYS: &[&str] = &[$($key),*];

        impl ParamArgs {
            fn given(&self) -> Vec<(&'static str, String)> {
                let mut v = Vec::new();
                $(if let Some(x) = &self.$field { v.push(($key, x.clone())); })*
                v
            }
        }
    };
}

param_args! {
    kappa => "kappa", gamma => "gamma", lambda => "lambda", lambdas => "lambdas",
    alpha => "alpha", alphas => "alphas", z => "z", nu => "nu", x => "x",
    a => "a", b => "b", mu => "mu", ell => "ell", ells => "ells", tol => "tol",
    beta => "beta", eps => "eps", n => "n", seed => "seed", bins => "bins",
    b_min => "b-min", b_max => "b-max", out => "out", resolution => "resolution",
    n_walks => "n-walks", min_length => "min-length", side => "side", depth => "depth",
}

enum CliError {
    Usage(String),
    Compute(Error),
    Io(anyhow::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Compute(e)
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parameters from the config file overlaid with command-line flags. Every
/// value read, defaults included, is echoed into the record.
struct Params {
    raw: BTreeMap<String, String>,
    from_flags: Vec<&'static str>,
    echo: BTreeMap<String, String>,
}

impl Params {
    fn get(&mut self, key: &str) -> Option<String> {
        let v = self.raw.get(key).cloned();
        if let Some(v) = &v {
            self.echo.insert(key.to_string(), v.clone());
        }
        v
    }

    fn f64_opt(&mut self, key: &str) -> CliResult<Option<f64>> {
        self.get(key)
            .map(|s| s.trim().parse::<f64>().map_err(|_| usage(format!("--{key}: expected a number, got `{s}`"))))
            .transpose()
    }

    fn f64(&mut self, key: &str) -> CliResult<f64> {
        self.f64_opt(key)?.ok_or_else(|| usage(format!("missing required parameter --{key}")))
    }

    fn f64_or(&mut self, key: &str, default: f64) -> CliResult<f64> {
        let v = self.f64_opt(key)?.unwrap_or(default);
        self.echo.insert(key.to_string(), format!("{v}"));
        Ok(v)
    }

    fn u64_or(&mut self, key: &str, default: u64) -> CliResult<u64> {
        let v = match self.get(key) {
            Some(s) => parse_count(&s).ok_or_else(|| usage(format!("--{key}: expected a count, got `{s}`")))?,
            None => default,
        };
        self.echo.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    fn list(&mut self, key: &str, len: usize) -> CliResult<Vec<f64>> {
        let s = self.get(key).ok_or_else(|| usage(format!("missing required parameter --{key}")))?;
        let v: Option<Vec<f64>> = s.split(',').map(|t| t.trim().parse().ok()).collect();
        match v {
            Some(v) if v.len() == len => Ok(v),
            _ => Err(usage(format!("--{key}: expected {len} comma-separated numbers, got `{s}`"))),
        }
    }

    fn triple(&mut self, key: &str) -> CliResult<[f64; 3]> {
        let v = self.list(key, 3)?;
        Ok([v[0], v[1], v[2]])
    }

    fn complex(&mut self, key: &str) -> CliResult<Complex64> {
        let s = self.get(key).ok_or_else(|| usage(format!("missing required parameter --{key}")))?;
        let parts: Option<Vec<f64>> = s.split(',').map(|t| t.trim().parse().ok()).collect();
        match parts.as_deref() {
            Some([re]) => Ok(Complex64::new(*re, 0.0)),
            Some([re, im]) => Ok(Complex64::new(*re, *im)),
            _ => Err(usage(format!("--{key}: expected `re` or `re,im`, got `{s}`"))),
        }
    }

    fn path(&mut self, key: &str, default: &str) -> PathBuf {
        let v = self.get(key).unwrap_or_else(|| default.to_string());
        self.echo.insert(key.to_string(), v.clone());
        PathBuf::from(v)
    }

    fn tol(&mut self) -> CliResult<f64> {
        self.f64_or("tol", DEFAULT_TOL)
    }

    /// `gamma` if given, else `sqrt(kappa)`.
    fn lqg(&mut self) -> CliResult<LqgParams> {
        if let Some(g) = self.f64_opt("gamma")? {
            return Ok(LqgParams::new(g)?);
        }
        match self.f64_opt("kappa")? {
            Some(k) => Ok(LqgParams::from_kappa(k)?),
            None => Err(usage("missing required parameter --gamma or --kappa")),
        }
    }
}

fn parse_count(s: &str) -> Option<u64> {
    let s = s.trim();
    s.parse::<u64>().ok().or_else(|| {
        let x: f64 = s.parse().ok()?;
        (x >= 0.0 && x.fract() == 0.0 && x < 1.8e19).then_some(x as u64)
    })
}

fn params(config: &Option<PathBuf>, args: &ParamArgs) -> CliResult<Params> {
    let mut raw = BTreeMap::new();
    if let Some(path) = config {
        let entries = load_config(path, PARAM_KEYS).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        raw.extend(entries.into_iter().map(|(k, e)| (k, e.value)));
    }
    let mut from_flags = Vec::new();
    for (k, v) in args.given() {
        raw.insert(k.to_string(), v);
        from_flags.push(k);
    }
    Ok(Params { raw, from_flags, echo: BTreeMap::new() })
}

struct Outcome {
    value: Option<f64>,
    values: Option<Vec<f64>>,
    stderr: Option<f64>,
    target: Option<f64>,
    n: Option<u64>,
    diagnostics: Vec<(&'static str, f64)>,
}

impl Outcome {
    fn value(v: f64) -> Self {
        Outcome { value: Some(v), values: None, stderr: None, target: None, n: None, diagnostics: vec![] }
    }

    fn complex(z: Complex64) -> Self {
        Outcome { values: Some(vec![z.re, z.im]), value: None, ..Outcome::value(0.0) }
    }

    fn estimate(v: f64, stderr: f64, n: u64, target: Option<f64>) -> Self {
        Outcome { value: Some(v), values: None, stderr: Some(stderr), target, n: Some(n), diagnostics: vec![] }
    }
}

fn eval(formula: &str, p: &mut Params) -> CliResult<Outcome> {
    Ok(match formula {
        "upsilon" => {
            let lq = p.lqg()?;
            Outcome::complex(sf::upsilon(p.complex("z")?, &lq, p.tol()?)?)
        }
        "dozz" => {
            let lq = p.lqg()?;
            let a = p.triple("alphas")?.map(|x| Complex64::new(x, 0.0));
            let d = sf::dozz(a, &lq, p.tol()?)?;
            let mut o = Outcome::complex(d.value);
            o.diagnostics.push(("outside_seiberg", if d.outside_seiberg { 1.0 } else { 0.0 }));
            o
        }
        "kpz-alpha" => {
            let lq = p.lqg()?;
            Outcome::complex(sf::kpz_alpha_from_lambda(p.f64("lambda")?, &lq))
        }
        "cle-three-point" => {
            let k = p.f64("kappa")?;
            Outcome::value(sf::cle_three_point(p.triple("lambdas")?, k, p.tol()?)?)
        }
        "n-gamma" => {
            let lq = p.lqg()?;
            Outcome::complex(sf::n_gamma(p.complex("alpha")?, &lq, p.tol()?)?)
        }
        "bessel-k" => Outcome::value(sf::bessel_k(p.f64("nu")?, p.f64("x")?, p.tol()?)?),
        "fzz-disk-laplace" => {
            let lq = p.lqg()?;
            Outcome::value(sf::fzz_disk_laplace(p.f64("alpha")?, p.f64("ell")?, p.f64("mu")?, &lq, p.tol()?)?)
        }
        "disk-area-density" => {
            let lq = p.lqg()?;
            Outcome::value(sf::disk_area_density(p.f64("alpha")?, p.f64("x")?, &lq)?)
        }
        "u-bar" => {
            let lq = p.lqg()?;
            Outcome::value(sf::u_bar(p.f64("alpha")?, &lq)?)
        }
        "qa-total-mass" => {
            let lq = p.lqg()?;
            Outcome::value(sf::qa_total_mass(p.f64("a")?, p.f64("b")?, &lq)?)
        }
        "qa-laplace" => {
            let lq = p.lqg()?;
            Outcome::value(sf::qa_laplace(p.f64("a")?, p.f64("b")?, p.f64("mu")?, &lq)?)
        }
        "qp-laplace" => {
            let lq = p.lqg()?;
            Outcome::value(sf::qp_laplace(p.triple("ells")?, p.f64("mu")?, &lq, p.tol()?)?)
        }
        "reflection-coeff" => {
            let lq = p.lqg()?;
            Outcome::value(sf::reflection_coeff(p.f64("alpha")?, &lq)?)
        }
        "ssw-moment" => Outcome::value(sf::ssw_cr_moment(p.f64("lambda")?, p.f64("kappa")?)?),
        "kw-mgf" => Outcome::value(sf::electrical_thickness_mgf(p.f64("lambda")?, p.f64("kappa")?)?),
        "loop-soup-intensity" => Outcome::value(sf::loop_soup_intensity(p.f64("kappa")?)?),
        "product-identity" => {
            let lq = p.lqg()?;
            Outcome::value(sf::three_point_product_identity(p.triple("alphas")?, &lq, p.tol()?)?)
        }
        other => return Err(usage(format!("unknown formula `{other}`"))),
    })
}

fn mc_levy(est: &str, p: &mut Params, seed: u64) -> CliResult<Outcome> {
    Ok(match est {
        "tau-ratio" => {
            let (a, b, beta, n) = (p.f64("a")?, p.f64("b")?, p.f64_or("beta", 1.7)?, p.u64_or("n", 100_000)?);
            let m = levy::estimate_tau_ratio(a, b, beta, n, seed)?;
            Outcome::estimate(m.estimate, m.stderr, m.n, Some(a / (a + b)))
        }
        "inv-tau" => {
            let (a, beta, n) = (p.f64("a")?, p.f64_or("beta", 1.7)?, p.u64_or("n", 100_000)?);
            let m = levy::estimate_inv_tau_mean(a, beta, n, seed)?;
            Outcome::estimate(m.estimate, m.stderr, m.n, Some(levy::inv_tau_mean_target(a, beta)))
        }
        "marked-jump" => {
            let a = p.f64_or("a", 1.0)?;
            let cfg = StableLevyConfig::new(p.f64_or("beta", 1.7)?, p.f64_or("eps", 1e-4)?, seed)?;
            let (lo, hi) = (p.f64_or("b-min", 0.1)?, p.f64_or("b-max", 5.0)?);
            let bins = p.u64_or("bins", 20)? as usize;
            if !(lo > 0.0 && hi > lo) || bins == 0 {
                return Err(usage("need 0 < b-min < b-max and at least one bin"));
            }
            let edges: Vec<f64> = (0..=bins).map(|i| lo * (hi / lo).powf(i as f64 / bins as f64)).collect();
            let n = p.u64_or("n", 100_000)?;
            let out = p.path("out", "marked_jump.csv");
            let h = levy::estimate_marked_jump_density(a, &cfg, &edges, n)?;
            write_histogram_csv(&h, &out).with_context(|| format!("writing {}", out.display()))?;
            let mut o = Outcome::value(h.sup_relative_deviation());
            o.n = Some(h.n_paths);
            o.values = Some(h.weighted_mass.clone());
            o.diagnostics.push(("log_slope", h.log_slope()));
            o.diagnostics.push(("total_weight", h.total_weight));
            o
        }
        "annulus" => {
            let params = p.lqg()?;
            let opts = AnnulusOptions { a: p.f64_or("a", 1.0)?, b: p.f64_or("b", 1.0)?, mu: p.f64_or("mu", 1.0)?, params };
            let cfg = StableLevyConfig::new(params.beta, p.f64_or("eps", 1e-4)?, seed)?;
            let n = p.u64_or("n", 100_000)?;
            let m = levy::estimate_annulus_area_laplace(&opts, &cfg, n)?;
            Outcome::estimate(m.estimate, m.stderr, m.n, Some(opts.target()))
        }
        other => return Err(usage(format!("unknown levy estimator `{other}`"))),
    })
}

fn cle_config(p: &mut Params) -> CliResult<CleMcConfig> {
    let d = CleMcConfig::default();
    Ok(CleMcConfig {
        n_walks: p.u64_or("n-walks", d.n_walks)?,
        min_length: p.u64_or("min-length", d.min_length as u64)? as usize,
        ..d
    })
}

fn mc_cle(est: &str, experimental_ok: bool, p: &mut Params, seed: u64) -> CliResult<Outcome> {
    if matches!(est, "three-point" | "thickness-mgf") && !experimental_ok {
        return Err(usage(format!("`{est}` is experimental; pass --experimental to run it")));
    }
    let kappa = p.f64("kappa")?;
    let resolution = p.u64_or("resolution", 256)? as usize;
    let cfg = cle_config(p)?;
    Ok(match est {
        "ssw" => {
            let lambda = p.f64("lambda")?;
            let n = p.u64_or("n", 1000)?;
            let e = cle_mc::ssw_moment_mc(kappa, lambda, n, resolution, &cfg, seed)?;
            let mut o = Outcome::estimate(e.estimate, e.stderr, e.n, Some(sf::ssw_cr_moment(lambda, kappa)?));
            o.diagnostics.push(("unresolved", e.unresolved as f64));
            o
        }
        "soup" => {
            let out = p.path("out", "soup.rwls");
            let dom = GridDomain::unit_disk(resolution)?;
            let sampler = LoopSoupSampler::for_resolution(resolution)?;
            let c = cfg.intensity_factor * sf::loop_soup_intensity(kappa)?;
            let soup = sampler.sample(&dom, c, cfg.min_length, seed, &mut stream(seed, 0))?;
            let f = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            soup.write_binary(BufWriter::new(f)).with_context(|| format!("writing {}", out.display()))?;
            let mut o = Outcome::value(soup.loops.len() as f64);
            o.diagnostics.push(("total_length", soup.total_length() as f64));
            o
        }
        "outermost" => {
            let out = p.path("out", "outermost.csv");
            let dom = GridDomain::unit_disk(resolution)?;
            let sampler = LoopSoupSampler::for_resolution(resolution)?;
            match cle_mc::outermost_loop_sample(&dom, &sampler, kappa, &cfg, seed, &mut stream(seed, 0))? {
                Some(link) => {
                    write_curve_csv(&link.outline.outer_boundary, &out)
                        .with_context(|| format!("writing {}", out.display()))?;
                    Outcome::estimate(link.log_cr.log_value, link.log_cr.stderr, link.log_cr.n_walks, None)
                }
                None => return Err(Error::Degenerate("no cluster surrounds the origin".into()).into()),
            }
        }
        "three-point" => {
            let lambdas = p.triple("lambdas")?;
            let side = p.f64_or("side", 0.25)?;
            let n = p.u64_or("n", 100)?;
            let e = experimental::three_point_mc(kappa, lambdas, side, resolution, n, &cfg, seed)?;
            let mut o = Outcome::estimate(e.estimate, e.stderr, e.n, Some(sf::cle_three_point(lambdas, kappa, DEFAULT_TOL)?));
            o.diagnostics.push(("unresolved", e.unresolved as f64));
            o
        }
        "thickness-mgf" => {
            let lambda = p.f64("lambda")?;
            let depth = p.u64_or("depth", 3)? as usize;
            let n = p.u64_or("n", 100)?;
            let e = experimental::thickness_mgf_mc(kappa, lambda, depth, resolution, n, &cfg, seed)?;
            let mut o =
                Outcome::estimate(e.estimate, e.stderr, e.n, Some(sf::electrical_thickness_mgf(lambda, kappa)?));
            o.diagnostics.push(("unresolved", e.unresolved as f64));
            o
        }
        other => return Err(usage(format!("unknown cle estimator `{other}`"))),
    })
}

fn resolve_seed(p: &mut Params, strict: bool) -> CliResult<u64> {
    let seed = match p.get("seed") {
        Some(s) => parse_count(&s).ok_or_else(|| usage(format!("--seed: expected an unsigned integer, got `{s}`")))?,
        None if strict => return Err(usage("--strict requires --seed for Monte Carlo commands")),
        None => rand::random::<u64>(),
    };
    p.echo.insert("seed".into(), seed.to_string());
    Ok(seed)
}

fn init_threads(threads: Option<usize>) -> CliResult<()> {
    let n = match threads {
        Some(n) => Some(n),
        None => match std::env::var(cli_io::THREADS_ENV) {
            Ok(s) => Some(s.trim().parse().map_err(|_| usage(format!("{}: expected a count, got `{s}`", cli_io::THREADS_ENV)))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(usage("thread count must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Io(anyhow::anyhow!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    init_threads(cli.threads)?;
    let start = Instant::now();
    let (command, mut p, result) = match &cli.command {
        Command::Verify { suite, tol } => {
            let s: Suite = suite.parse().map_err(usage)?;
            if let Some(t) = tol {
                if !(*t >= 0.0) {
                    return Err(usage("--tol must be non-negative"));
                }
            }
            let report = suites::run(s, *tol);
            emit(&report.to_json());
            for c in report.failures() {
                eprintln!("FAIL {}: observed {:e}, tolerance {:e}", c.name, c.observed.0, c.tolerance.0);
            }
            return Ok(if report.overall { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Command::Eval { formula, p } => {
            let mut ps = params(&cli.config, p)?;
            let r = eval(formula, &mut ps);
            (format!("eval {formula}"), ps, r)
        }
        Command::Mc { family: McFamily::Levy { estimator, p } } => {
            let mut ps = params(&cli.config, p)?;
            let seed = resolve_seed(&mut ps, cli.strict)?;
            let r = mc_levy(estimator, &mut ps, seed);
            (format!("mc levy {estimator}"), ps, r)
        }
        Command::Mc { family: McFamily::Cle { estimator, experimental, p } } => {
            let mut ps = params(&cli.config, p)?;
            let seed = resolve_seed(&mut ps, cli.strict)?;
            let r = mc_cle(estimator, *experimental, &mut ps, seed);
            (format!("mc cle {estimator}"), ps, r)
        }
    };
    let seed = p.echo.get("seed").and_then(|s| s.parse().ok());
    if let Some(unused) = p.from_flags.iter().find(|k| !p.echo.contains_key(**k)) {
        if result.is_ok() {
            return Err(usage(format!("--{unused} is not used by `{command}`")));
        }
    }
    let mut rec = RunRecord::new(command, std::mem::take(&mut p.echo));
    rec.seed = seed;
    let code = match result {
        Ok(o) => {
            rec.value = o.value.map(Num);
            rec.values = o.values.map(|v| v.into_iter().map(Num).collect());
            rec.stderr = o.stderr.map(Num);
            rec.target = o.target.map(Num);
            rec.n = o.n;
            rec.diagnostics = o.diagnostics.into_iter().map(|(k, v)| (k.to_string(), Num(v))).collect();
            ExitCode::SUCCESS
        }
        Err(CliError::Compute(e)) => {
            rec.error = Some(ErrorInfo::from(&e));
            ExitCode::from(1)
        }
        Err(e) => return Err(e),
    };
    rec.runtime_ms = start.elapsed().as_millis() as u64;
    emit(&rec.to_json());
    Ok(code)
}

/// Writes one line to stdout; a closed pipe is not an error.
fn emit(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}").and_then(|_| out.flush());
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Compute(e)) => {
            let info = ErrorInfo::from(&e);
            emit(&serde_json::json!({ "error": info }).to_string());
            ExitCode::from(1)
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
