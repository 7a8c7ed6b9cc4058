//! Command-line front end for `wignerkit`.
//!
//! Every command returns one of four exit codes: [`EXIT_OK`],
//! [`EXIT_INPUT`] (unreadable or invalid input, bad flags, unknown
//! generator), [`EXIT_REJECTED`] (a hypothesis check failed) and
//! [`EXIT_INTERNAL`] (numerical breakdown or a panic). Summaries go to
//! standard output, documents only to `--out`, diagnostics to standard error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use wignerkit::mapspec::{
    document_of, parse_frame_samples, parse_mapspec_with, serialize_document, serialize_failure,
    serialize_fit, to_canonical_bytes, SCHEMA_VERSION,
};
use wignerkit::{
    adversarial_oracle, fit_density, induced_oracle, is_cosp, random_unitary,
    reconstruct_symmetry_with, seeded_stream, verify_orth_preserving, AdversarialKind, Cosp, Error,
    MapOracle, PipelineOptions, ProjectionMap, SymmetryOperator, Tolerances, PRNG_ALGORITHM,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_REJECTED: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

const GEN_STREAM: u64 = 0x4745_4e45; // "GENE"

#[derive(Debug, Parser)]
#[command(
    name = "wignerkit",
    version,
    about = "Reconstruct Wigner symmetries from maps on rank-one projections"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full reconstruction pipeline on a map-spec document.
    Reconstruct(CommonArgs),
    /// Check orthogonality preservation and the image of the standard COSP.
    Verify(CommonArgs),
    /// Fit a density operator to frame-function samples.
    GleasonFit(CommonArgs),
    /// Write a map-spec document for a named generator.
    Gen(GenArgs),
    /// Run a small built-in suite of round trips and rejections.
    SelfTest(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Input document.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Output document.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Expected dimension (at least 3).
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random orthogonal pairs sampled by the gate.
    #[arg(long, default_value_t = 200)]
    pub pairs: usize,
    /// Orthogonality tolerance [default: 1e-8]
    #[arg(long)]
    pub tol_orth: Option<f64>,
    /// Fit and verification tolerance [default: 1e-7]
    #[arg(long)]
    pub tol_fit: Option<f64>,
    /// Gauge comparison tolerance [default: 1e-8]
    #[arg(long)]
    pub tol_gauge: Option<f64>,
    /// Multiplier applied to every tolerance.
    #[arg(long, env = "WIGNERKIT_TOL_SCALE", default_value_t = 1.0)]
    pub tol_scale: f64,
    /// Suppress the summary and diagnostics; rely on the exit code and --out.
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    /// `induced`, `induced-antiunitary` or `adversarial:<name>`.
    pub generator: String,
    /// Generator parameter `key=value`, repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    #[command(flatten)]
    pub common: CommonArgs,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|e| format!("parameter `{k}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// Validated settings shared by all commands.
#[derive(Debug, Clone)]
pub struct CliConfig {
    pub spec: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub dim: Option<usize>,
    pub seed: u64,
    pub pairs: usize,
    pub tol: Tolerances<f64>,
    pub quiet: bool,
}

macro_rules! say {
    ($cfg:expr, $($arg:tt)*) => {
        if !$cfg.quiet {
            println!($($arg)*);
        }
    };
}

macro_rules! complain {
    ($cfg:expr, $($arg:tt)*) => {
        if !$cfg.quiet {
            eprintln!($($arg)*);
        }
    };
}

impl CliConfig {
    pub fn from_args(args: &CommonArgs) -> Result<Self, String> {
        let mut tol = Tolerances::default();
        for (name, value, slot) in [
            ("--tol-orth", args.tol_orth, &mut tol.orth),
            ("--tol-fit", args.tol_fit, &mut tol.fit),
            ("--tol-gauge", args.tol_gauge, &mut tol.gauge),
        ] {
            if let Some(v) = value {
                if !(v.is_finite() && v > 0.0) {
                    return Err(format!("{name} must be finite and strictly positive"));
                }
                *slot = v;
            }
        }
        if !(args.tol_scale.is_finite() && args.tol_scale > 0.0) {
            return Err("WIGNERKIT_TOL_SCALE must be finite and strictly positive".into());
        }
        let tol = tol.scaled(args.tol_scale);
        tol.validate().map_err(|e| e.to_string())?;
        if let Some(d) = args.dim {
            if d < 3 {
                return Err(format!("--dim must be at least 3, got {d}"));
            }
        }
        if args.pairs == 0 {
            return Err("--pairs must be at least 1".into());
        }
        Ok(Self {
            spec: args.spec.clone(),
            out: args.out.clone(),
            dim: args.dim,
            seed: args.seed,
            pairs: args.pairs,
            tol,
            quiet: args.quiet,
        })
    }

    fn options(&self) -> PipelineOptions {
        PipelineOptions {
            gate_pairs: self.pairs,
            seed: self.seed,
            ..PipelineOptions::default()
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match catch_unwind(AssertUnwindSafe(|| dispatch(&cli.command))) {
        Ok(code) => code,
        Err(_) => {
            eprintln!("error: internal failure");
            EXIT_INTERNAL
        }
    }
}

fn dispatch(command: &Command) -> i32 {
    let common = match command {
        Command::Reconstruct(a)
        | Command::Verify(a)
        | Command::GleasonFit(a)
        | Command::SelfTest(a) => a,
        Command::Gen(g) => &g.common,
    };
    let cfg = match CliConfig::from_args(common) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_INPUT;
        }
    };
    match command {
        Command::Reconstruct(_) => cmd_reconstruct(&cfg),
        Command::Verify(_) => cmd_verify(&cfg),
        Command::GleasonFit(_) => cmd_gleason_fit(&cfg),
        Command::Gen(g) => cmd_gen(&cfg, &g.generator, &g.params),
        Command::SelfTest(_) => cmd_self_test(&cfg),
    }
}

fn exit_for(e: &Error) -> i32 {
    if e.is_internal() {
        EXIT_INTERNAL
    } else if e.is_document() {
        EXIT_INPUT
    } else {
        EXIT_REJECTED
    }
}

fn read_input(cfg: &CliConfig) -> Result<Vec<u8>, i32> {
    let path = cfg.spec.as_ref().ok_or_else(|| {
        complain!(cfg, "error: --spec is required");
        EXIT_INPUT
    })?;
    fs::read(path).map_err(|e| {
        complain!(cfg, "error: cannot read {}: {e}", path.display());
        EXIT_INPUT
    })
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), i32> {
    match path {
        None => Ok(()),
        Some(p) => fs::write(p, bytes).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", p.display());
            EXIT_INPUT
        }),
    }
}

fn load_map(cfg: &CliConfig) -> Result<MapOracle<f64>, i32> {
    let bytes = read_input(cfg)?;
    let map = parse_mapspec_with::<f64>(&bytes, &cfg.tol).map_err(|e| {
        complain!(cfg, "error [{}]: {e}", e.code());
        EXIT_INPUT
    })?;
    if let Some(d) = cfg.dim {
        if d != map.dim() {
            complain!(
                cfg,
                "error: --dim {d} does not match the document dimension {}",
                map.dim()
            );
            return Err(EXIT_INPUT);
        }
    }
    Ok(map)
}

/// Runs the reconstruction pipeline with the standard-basis COSP.
pub fn cmd_reconstruct(cfg: &CliConfig) -> i32 {
    let map = match load_map(cfg) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let dim = map.dim();
    match reconstruct_symmetry_with(&map, &Cosp::standard(dim), dim, &cfg.tol, &cfg.options()) {
        Ok(report) => {
            if let Err(code) =
                write_output(cfg.out.as_deref(), &wignerkit::serialize_report(&report))
            {
                return code;
            }
            let linearity = if report.global.is_antilinear() {
                "antiunitary"
            } else {
                "unitary"
            };
            say!(
                cfg,
                "ok: {linearity} symmetry, dim {dim}, max deviation {:.3e} on {} probes",
                report.final_check.max_deviation,
                report.final_check.verified_pairs
            );
            EXIT_OK
        }
        Err(failure) => {
            if let Err(code) = write_output(cfg.out.as_deref(), &serialize_failure(&failure)) {
                return code;
            }
            say!(cfg, "rejected at {}: {}", failure.stage, failure.error);
            complain!(cfg, "error [{}]: {}", failure.error.code(), failure.error);
            if failure.error.is_internal() {
                EXIT_INTERNAL
            } else {
                EXIT_REJECTED
            }
        }
    }
}

/// Runs the orthogonality gate and the image-COSP check only.
pub fn cmd_verify(cfg: &CliConfig) -> i32 {
    let map = match load_map(cfg) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let dim = map.dim();
    let gate = match verify_orth_preserving(&map, dim, cfg.pairs, cfg.seed) {
        Ok(g) => g,
        Err(e) => {
            complain!(cfg, "error [{}]: {e}", e.code());
            return exit_for(&e);
        }
    };
    let images: Result<Vec<_>, Error> = Cosp::<f64>::standard(dim)
        .projections()
        .iter()
        .map(|p| map.apply(p))
        .collect();
    let images = match images {
        Ok(i) => i,
        Err(e) => {
            complain!(cfg, "error [{}]: {e}", e.code());
            return exit_for(&e);
        }
    };
    let gate_ok = gate <= cfg.tol.orth;
    let cosp_ok = is_cosp(&images, dim, &cfg.tol);
    say!(
        cfg,
        "orthogonality gate: {} (max transition {gate:.3e}, tolerance {:.1e})",
        if gate_ok { "pass" } else { "fail" },
        cfg.tol.orth
    );
    say!(
        cfg,
        "image of standard COSP: {}",
        if cosp_ok { "pass" } else { "fail" }
    );
    let error = if !gate_ok {
        Some(Error::OrthogonalityViolated {
            max_transition: gate,
        })
    } else if !cosp_ok {
        Some(Error::ImageNotCosp)
    } else {
        None
    };
    let mut doc = json!({
        "schema_version": SCHEMA_VERSION,
        "status": if error.is_none() { "ok" } else { "error" },
        "prng": PRNG_ALGORITHM,
        "seed": cfg.seed,
        "dim": dim,
        "gate": {
            "sampled": true,
            "random_pairs": cfg.pairs,
            "max_transition": gate,
            "passed": gate_ok,
        },
        "image_cosp": cosp_ok,
    });
    if let (Some(e), Some(obj)) = (&error, doc.as_object_mut()) {
        obj.insert("error_code".into(), json!(e.code()));
        obj.insert("message".into(), json!(e.to_string()));
        complain!(cfg, "error [{}]: {e}", e.code());
    }
    if let Err(code) = write_output(cfg.out.as_deref(), &to_canonical_bytes(&doc)) {
        return code;
    }
    if error.is_none() {
        EXIT_OK
    } else {
        EXIT_REJECTED
    }
}

/// Fits a density operator to the samples in `--spec`.
pub fn cmd_gleason_fit(cfg: &CliConfig) -> i32 {
    let bytes = match read_input(cfg) {
        Ok(b) => b,
        Err(code) => return code,
    };
    let (dim, samples) = match parse_frame_samples::<f64>(&bytes, &cfg.tol) {
        Ok(s) => s,
        Err(e) => {
            complain!(cfg, "error [{}]: {e}", e.code());
            return EXIT_INPUT;
        }
    };
    if let Some(d) = cfg.dim {
        if d != dim {
            complain!(
                cfg,
                "error: --dim {d} does not match the document dimension {dim}"
            );
            return EXIT_INPUT;
        }
    }
    let fit = fit_density(&samples, dim, &cfg.tol);
    if let Err(code) = write_output(cfg.out.as_deref(), &serialize_fit(dim, &fit)) {
        return code;
    }
    match fit {
        Ok(r) => {
            say!(
                cfg,
                "ok: density fitted from {} samples, residual {:.3e}, eigen floor {:.3e}",
                samples.len(),
                r.residual,
                r.eigen_floor
            );
            EXIT_OK
        }
        Err(e) => {
            say!(cfg, "rejected: {e}");
            complain!(cfg, "error [{}]: {e}", e.code());
            if e.is_internal() {
                EXIT_INTERNAL
            } else {
                EXIT_REJECTED
            }
        }
    }
}

/// Builds the oracle of a named generator.
pub fn generate(
    name: &str,
    dim: usize,
    seed: u64,
    params: &BTreeMap<String, f64>,
) -> Result<MapOracle<f64>, Error> {
    let induced = |antilinear: bool| -> Result<MapOracle<f64>, Error> {
        if !params.is_empty() {
            return Err(Error::Schema(format!(
                "generator `{name}` takes no parameters"
            )));
        }
        let mut rng = seeded_stream(seed, GEN_STREAM);
        let u = random_unitary(dim, &mut rng);
        Ok(induced_oracle(SymmetryOperator::new(
            u,
            antilinear,
            &Tolerances::default(),
        )?))
    };
    match name {
        "induced" => induced(false),
        "induced-antiunitary" => induced(true),
        _ => match name.strip_prefix("adversarial:") {
            Some(kind) if AdversarialKind::NAMES.contains(&kind) => {
                adversarial_oracle(kind, dim, params, seed)
            }
            _ => Err(Error::UnknownGenerator(name.to_string())),
        },
    }
}

/// Writes the map-spec document of a named generator to `--out`.
pub fn cmd_gen(cfg: &CliConfig, generator: &str, params: &[(String, f64)]) -> i32 {
    let Some(out) = cfg.out.as_deref() else {
        complain!(cfg, "error: --out is required");
        return EXIT_INPUT;
    };
    let dim = cfg.dim.unwrap_or(3);
    let mut table = BTreeMap::new();
    for (k, v) in params {
        if table.insert(k.clone(), *v).is_some() {
            complain!(cfg, "error: parameter `{k}` given twice");
            return EXIT_INPUT;
        }
    }
    let oracle = match generate(generator, dim, cfg.seed, &table) {
        Ok(o) => o,
        Err(e) => {
            complain!(cfg, "error [{}]: {e}", e.code());
            return if e.is_internal() {
                EXIT_INTERNAL
            } else {
                EXIT_INPUT
            };
        }
    };
    let mut doc = document_of(&oracle);
    doc.seed = Some(cfg.seed);
    if let Err(code) = write_output(Some(out), &serialize_document(&doc)) {
        return code;
    }
    say!(cfg, "wrote {generator} map, dim {dim}, seed {}", cfg.seed);
    EXIT_OK
}

fn self_test_checks(cfg: &CliConfig) -> Vec<(String, bool)> {
    let mut checks = Vec::new();
    let options = cfg.options();
    for dim in 3..=5 {
        for (name, antilinear) in [("induced", false), ("induced-antiunitary", true)] {
            let ok = generate(name, dim, cfg.seed, &BTreeMap::new())
                .ok()
                .and_then(|map| {
                    let report = reconstruct_symmetry_with(
                        &map,
                        &Cosp::standard(dim),
                        dim,
                        &cfg.tol,
                        &options,
                    )
                    .ok()?;
                    let MapOracle::Induced(s) = &map else {
                        return None;
                    };
                    let same = wignerkit::gauge_compare(&report.global, s, &cfg.tol).ok()?;
                    Some(same && report.global.is_antilinear() == antilinear)
                })
                .unwrap_or(false);
            checks.push((format!("{name} round trip, dim {dim}"), ok));
        }
    }
    for (kind, stage) in [
        ("constant", "verify_orth_preserving"),
        ("collapse_pair", "verify_orth_preserving"),
        ("cosp_breaker", "align_cosp"),
        ("noisy_induced", "verify_orth_preserving"),
    ] {
        let ok = adversarial_oracle::<f64>(kind, 4, &BTreeMap::new(), cfg.seed)
            .map(|map| {
                matches!(reconstruct_symmetry_with(&map, &Cosp::standard(4), 4, &cfg.tol, &options),
                         Err(f) if f.stage == stage)
            })
            .unwrap_or(false);
        checks.push((format!("{kind} rejected at {stage}"), ok));
    }
    let mut rng = seeded_stream(cfg.seed, GEN_STREAM ^ 1);
    let d = wignerkit::DensityOperator::<f64>::random(3, &mut rng);
    let samples: Option<Vec<_>> = wignerkit::ic_family::<f64>(3).ok().and_then(|family| {
        family
            .into_iter()
            .map(|p| {
                let v = wignerkit::frame_value(&d, &p).ok()?;
                wignerkit::FrameSample::new(p, v, &cfg.tol).ok()
            })
            .collect()
    });
    let ok = samples
        .and_then(|s| fit_density(&s, 3, &cfg.tol).ok())
        .is_some_and(|fit| fit.density.distance(&d) <= 1e-9);
    checks.push(("density fit round trip, dim 3".into(), ok));
    checks
}

/// Runs the built-in checks and prints one line per check.
pub fn cmd_self_test(cfg: &CliConfig) -> i32 {
    let checks = self_test_checks(cfg);
    let mut results = Vec::new();
    for (name, ok) in &checks {
        say!(cfg, "{} {name}", if *ok { "PASS" } else { "FAIL" });
        results.push(json!({"check": name, "passed": ok}));
    }
    let all = checks.iter().all(|(_, ok)| *ok);
    let doc: Value = json!({
        "schema_version": SCHEMA_VERSION,
        "status": if all { "ok" } else { "error" },
        "prng": PRNG_ALGORITHM,
        "seed": cfg.seed,
        "checks": results,
    });
    if let Err(code) = write_output(cfg.out.as_deref(), &to_canonical_bytes(&doc)) {
        return code;
    }
    if all {
        EXIT_OK
    } else {
        EXIT_REJECTED
    }
}
