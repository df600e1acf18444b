//! Command-line front end.
//!
//! Exit codes: 0 success / all checks pass, 1 a check failed (report still
//! written), 2 malformed input, 3 numerical or PSD failure.

mod output;
mod spec;

pub use output::{format_float, to_json, write_csv, CsvRow, CSV_HEADER};
pub use spec::{
    BuiltKernel, CenterDistribution, DeclaredCertificate, Domain, FeatureFamily, KernelKind, KernelSpecFile,
};

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::certificate::HolderCertificate;
use crate::error::Error;
use crate::verifier::{
    certificate_audit, dk_predicate_suite, random_gram_check, PredicateSuiteReport, PsdReport, SamplingPlan,
    VerificationReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_NUMERICS: i32 = 3;

/// Points in the random Gram used for the PSD check.
pub const PSD_POINTS: usize = 50;
/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "RKHS_CERT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "rkhs-cert", version, about = "Hölder certificates for RKHS functions and their empirical audit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive the certificate of a kernel spec.
    Certify {
        spec: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Audit a kernel's certificate, kernel-metric predicates and PSD.
    Verify {
        spec: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        pairs: usize,
        #[arg(long, default_value_t = 1001)]
        grid: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        functions: usize,
        /// Audit this certificate file instead of the spec file's own.
        #[arg(long)]
        certificate: Option<PathBuf>,
        /// Record wall-clock time in the report.
        #[arg(long)]
        timing: bool,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Collect the report JSON files of a directory into one CSV table.
    Report {
        dir: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
}

/// Verification output: the audit report plus run metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub kernel_id: String,
    pub kernel_type: String,
    pub version: String,
    pub seed: u64,
    pub functions: usize,
    pub plan: SamplingPlan,
    #[serde(flatten)]
    pub audit: VerificationReport,
    pub predicates: PredicateSuiteReport,
    pub psd: PsdReport,
    pub overall_pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl ReportFile {
    pub fn csv_row(&self) -> CsvRow {
        CsvRow {
            kernel_id: self.kernel_id.clone(),
            alpha_cert: self.audit.certificate.alpha,
            c_cert: self.audit.certificate.constant_per_unit_norm,
            empirical: self.audit.empirical_constant,
            conservatism: self.audit.conservatism,
            pass: self.overall_pass,
        }
    }
}

/// Fields of a report file read back by `report`.
#[derive(Debug, Deserialize)]
struct ReportSummary {
    kernel_id: String,
    certificate: HolderCertificate,
    empirical_constant: f64,
    conservatism: Option<f64>,
    overall_pass: bool,
}

enum Failure {
    Schema(String),
    Numerics(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::NoRegularityData => Failure::Schema(e.to_string()),
            Error::Numerics(_) | Error::PsdViolation { .. } => Failure::Numerics(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Schema(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| io_failure(path, e))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_SCHEMA } else { EXIT_OK };
        }
    };
    configure_threads();
    let result = match cli.command {
        Command::Certify { spec, out } => certify(&spec, &out),
        Command::Verify { spec, pairs, grid, seed, functions, certificate, timing, out } => {
            verify(&spec, pairs, grid, seed, functions, certificate.as_deref(), timing, &out)
        }
        Command::Report { dir, out } => report(&dir, &out),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Schema(m)) => {
            eprintln!("error: {m}");
            EXIT_SCHEMA
        }
        Err(Failure::Numerics(m)) => {
            eprintln!("error: {m}");
            EXIT_NUMERICS
        }
    }
}

fn configure_threads() {
    #[cfg(feature = "parallel")]
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // A second call in one process fails harmlessly; the first pool stays.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn load_spec(path: &Path) -> Result<KernelSpecFile, Failure> {
    Ok(KernelSpecFile::from_json(&read(path)?)?)
}

fn certify(spec_path: &Path, out: &Path) -> Result<i32, Failure> {
    let spec = load_spec(spec_path)?;
    let built = spec.build()?;
    write(out, &to_json(&built.certificate)?)?;
    let c = &built.certificate;
    println!(
        "{}: alpha = {}, C = {}, provenance = {:?}",
        spec.id, c.alpha, c.constant_per_unit_norm, c.provenance
    );
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn verify(
    spec_path: &Path,
    pairs: usize,
    grid: usize,
    seed: u64,
    functions: usize,
    cert_path: Option<&Path>,
    timing: bool,
    out: &Path,
) -> Result<i32, Failure> {
    let start = Instant::now();
    let spec = load_spec(spec_path)?;
    let built = spec.build()?;
    let certificate = match cert_path {
        Some(p) => {
            let c: HolderCertificate = serde_json::from_str(&read(p)?).map_err(|e| io_failure(p, e))?;
            c.validate()?;
            c
        }
        None => built.certificate,
    };
    let plan = SamplingPlan::new(spec.domain.lo.clone(), spec.domain.hi.clone())?
        .with_pairs(pairs)
        .with_grid(grid)
        .with_seed(seed);
    plan.validate()?;

    let audit = certificate_audit(&built.kernel, &certificate, &plan, functions)?;
    let predicates = dk_predicate_suite(&built.kernel, &plan)?;
    let psd = random_gram_check(&built.kernel, &plan, PSD_POINTS, seed)?;
    let overall_pass = audit.pass && predicates.pass && psd.pass;
    let file = ReportFile {
        kernel_id: spec.id.clone(),
        kernel_type: spec.kind.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        functions,
        plan,
        audit,
        predicates,
        psd,
        overall_pass,
        timing_ms: timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    };
    write(out, &to_json(&file)?)?;
    let csv_path = out.with_extension("csv");
    write_csv(&csv_path, &[file.csv_row()]).map_err(|e| io_failure(&csv_path, e))?;

    let a = &file.audit;
    let verdict = if overall_pass { "no violation found" } else { "FAIL" };
    print!(
        "{}: {verdict}; empirical = {:.6}, certified = {:.6}, violations = {}",
        spec.id, a.empirical_constant, a.certificate.constant_per_unit_norm, a.violation_count
    );
    if let Some(w) = a.violations.first() {
        print!("; witness x = {:?}, y = {:?}", w.x.coords(), w.y.coords());
    }
    println!();
    Ok(if overall_pass { EXIT_OK } else { EXIT_VIOLATION })
}

fn report(dir: &Path, out: &Path) -> Result<i32, Failure> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| io_failure(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let mut rows = Vec::with_capacity(files.len());
    for p in &files {
        let s: ReportSummary = serde_json::from_str(&read(p)?).map_err(|e| io_failure(p, e))?;
        rows.push(CsvRow {
            kernel_id: s.kernel_id,
            alpha_cert: s.certificate.alpha,
            c_cert: s.certificate.constant_per_unit_norm,
            empirical: s.empirical_constant,
            conservatism: s.conservatism,
            pass: s.overall_pass,
        });
    }
    rows.sort_by(|a, b| a.kernel_id.cmp(&b.kernel_id));
    write_csv(out, &rows).map_err(|e| io_failure(out, e))?;
    println!("{} report(s) -> {}", rows.len(), out.display());
    Ok(EXIT_OK)
}
