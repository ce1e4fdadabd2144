//! `asymnet`: generate, analyze, verify and reconstruct discrete asymptotic nets.
//!
//! Exit status is 0 on success, 1 when a net or data set fails verification
//! and 2 on usage, parse or I/O errors. Failures also print one JSON record
//! per line on standard error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use asymnet::affine_structure::{analyze_structure, build_structure, SuiteSummary};
use asymnet::cli_io;
use asymnet::generators::{hyperboloid_net, minimal_net, HyperboloidSpec, Placement};
use asymnet::reconstruction::{extract, reconstruct, reconstruct_unchecked};
use asymnet::structural::classify;
use asymnet::suites::{structure_suites, verify_net};
use asymnet::{Error, Tolerances, Vec3};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "asymnet", version, about = "Discrete asymptotic nets in equi-affine geometry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a sample net.
    #[command(subcommand)]
    Generate(Generate),
    /// Compute the affine structure and every residual; write it as JSON.
    Analyze {
        net: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        gamma0: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run every verification suite. Exit 1 if any fails.
    Verify {
        net: PathBuf,
        #[command(flatten)]
        opts: CheckOpts,
        /// Write per-site residuals of every suite to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Report the minimal, affine-sphere and constant-c classifications.
    Classify {
        net: PathBuf,
        #[command(flatten)]
        opts: CheckOpts,
        /// Classification tolerance.
        #[arg(long)]
        class_tol: Option<f64>,
    },
    /// Write the reconstruction input (Omega, A, B, H, frame) of a net.
    Extract {
        net: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        gamma0: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Integrate reconstruction input back into a net.
    Reconstruct {
        data: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Report the compatibility residuals of the input instead of
        /// rejecting it when they exceed the tolerance.
        #[arg(long)]
        skip_compat_check: bool,
    },
    /// Write a net as a Wavefront OBJ quad mesh.
    ExportObj {
        net: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum Generate {
    /// Sampled hyperboloid with closed-form structure.
    Hyperboloid {
        #[command(flatten)]
        spec: HyperboloidArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Minimal net from two sampled co-normal curves.
    Minimal {
        /// Samples of f, one point per line or a JSON array.
        #[arg(long)]
        f_samples: PathBuf,
        #[arg(long)]
        g_samples: PathBuf,
        /// Position of vertex (0, 0) as x,y,z.
        #[arg(long, value_parser = parse_point, default_value = "0,0,0")]
        base: Vec3,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct HyperboloidArgs {
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    u0: f64,
    #[arg(long, default_value_t = 1.0)]
    v0: f64,
    #[arg(long, default_value_t = 0.1)]
    du: f64,
    #[arg(long, default_value_t = 0.2)]
    dv: f64,
    #[arg(long, default_value_t = 20)]
    nu: usize,
    #[arg(long, default_value_t = 20)]
    nv: usize,
    #[arg(long, value_enum, default_value_t = PlacementArg::Shifted)]
    placement: PlacementArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlacementArg {
    Shifted,
    Exact,
}

#[derive(Args)]
struct CheckOpts {
    #[arg(long, default_value_t = 1.0)]
    gamma0: f64,
    /// Residual tolerance for every identity suite.
    #[arg(long)]
    tol: Option<f64>,
}

impl CheckOpts {
    fn tolerances(&self) -> Tolerances {
        let t = Tolerances::default();
        self.tol.map_or(t, |x| t.with_identity(x))
    }
}

fn parse_point(s: &str) -> Result<Vec3, String> {
    let v: Vec<f64> = s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"))).collect::<Result<_, _>>()?;
    match v[..] {
        [x, y, z] => Ok(Vec3::new(x, y, z)),
        _ => Err(format!("expected x,y,z, got {} numbers", v.len())),
    }
}

/// Why a command did not succeed.
enum Failure {
    Usage(String),
    Lib(Error),
    /// Ran to completion but the net or data did not pass.
    Rejected { what: &'static str, suites: Vec<String> },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    message: String,
    exit_code: u8,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    suites: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    site: Option<(usize, usize)>,
}

fn lib_kind(e: &Error) -> (&'static str, u8, Option<(usize, usize)>, Vec<String>) {
    match e {
        Error::Degenerate { i, j, .. } => ("degenerate", 1, Some((*i, *j)), vec![]),
        Error::NonPlanar { i, j, .. } => ("non_planar", 1, Some((*i, *j)), vec!["planarity".into()]),
        Error::GaugeInconsistent { i, j, .. } => ("gauge_inconsistent", 1, Some((*i, *j)), vec![]),
        Error::Verification(r) => ("verification", 1, r.argmax, vec![r.name.clone()]),
        Error::FrameDeterminant { .. } => ("frame_determinant", 1, None, vec![]),
        Error::DegenerateFrame { .. } => ("degenerate_frame", 1, None, vec![]),
        Error::Incompatible(r) => ("incompatible", 1, r.argmax, vec![r.name.clone()]),
        Error::NotIntegrable(r) => ("not_integrable", 1, r.argmax, vec![r.name.clone()]),
        Error::Parse { .. } => ("parse", 2, None, vec![]),
        Error::Version { .. } => ("version", 2, None, vec![]),
        Error::Io(_) | Error::File { .. } => ("io", 2, None, vec![]),
        Error::NonFinite { i, j } => ("non_finite", 2, Some((*i, *j)), vec![]),
        Error::LengthMismatch { .. } => ("length_mismatch", 2, None, vec![]),
        Error::InvalidDomain { .. } => ("invalid_domain", 2, None, vec![]),
        Error::InvalidParameter { .. } => ("invalid_parameter", 2, None, vec![]),
        Error::FamilyMismatch { .. } | Error::OutOfRange { .. } => ("invalid_input", 2, None, vec![]),
    }
}

fn report(f: Failure) -> ExitCode {
    let rec = match f {
        Failure::Usage(message) => ErrorRecord { error: "usage", message, exit_code: 2, suites: vec![], site: None },
        Failure::Lib(e) => {
            let (error, exit_code, site, suites) = lib_kind(&e);
            ErrorRecord { error, message: e.to_string(), exit_code, suites, site }
        }
        Failure::Rejected { what, suites } => ErrorRecord {
            error: "verification",
            message: format!("{what} failed: {}", suites.join(", ")),
            exit_code: 1,
            suites,
            site: None,
        },
    };
    eprintln!("{}", serde_json::to_string(&rec).expect("plain record"));
    ExitCode::from(rec.exit_code)
}

fn print_json<T: Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable summary"));
}

fn write(path: &Path, text: String) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|source| Failure::Lib(Error::File { path: path.display().to_string(), source }))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate(Generate::Hyperboloid { spec, output }) => {
            let spec = HyperboloidSpec {
                c: spec.c,
                u0: spec.u0,
                v0: spec.v0,
                du: spec.du,
                dv: spec.dv,
                nu: spec.nu,
                nv: spec.nv,
                placement: match spec.placement {
                    PlacementArg::Shifted => Placement::Shifted,
                    PlacementArg::Exact => Placement::Exact,
                },
            };
            let (net, _) = hyperboloid_net(&spec)?;
            cli_io::save_net(&output, &net)?;
        }
        Command::Generate(Generate::Minimal { f_samples, g_samples, base, output }) => {
            let f = cli_io::load_samples(&f_samples)?;
            let g = cli_io::load_samples(&g_samples)?;
            cli_io::save_net(&output, &minimal_net(&f, &g, base)?)?;
        }
        Command::Analyze { net, gamma0, output } => {
            let net = cli_io::load_net(&net)?;
            let tol = Tolerances::default();
            let s = analyze_structure(&net, gamma0, (0, 0), &tol)?;
            let reports = structure_suites(&net, &s, tol.identity);
            write(&output, cli_io::structure_to_json(&s, &reports)?)?;
            print_json(&reports.iter().map(SuiteSummary::from).collect::<Vec<_>>());
        }
        Command::Verify { net, opts, csv } => {
            let net = cli_io::load_net(&net)?;
            let v = verify_net(&net, opts.gamma0, &opts.tolerances());
            if let Some(path) = csv {
                write(&path, v.to_csv())?;
            }
            print_json(&v);
            if !v.passed() {
                let suites = v.failed_suites().into_iter().map(String::from).collect();
                return Err(Failure::Rejected { what: "verification", suites });
            }
        }
        Command::Classify { net, opts, class_tol } => {
            let net = cli_io::load_net(&net)?;
            let tol = opts.tolerances();
            let s = build_structure(&net, opts.gamma0, &tol)?;
            print_json(&classify(&s, class_tol.unwrap_or(tol.classification)));
        }
        Command::Extract { net, gamma0, output } => {
            let net = cli_io::load_net(&net)?;
            cli_io::save_compat(&output, &extract(&net, gamma0, &Tolerances::default())?)?;
        }
        Command::Reconstruct { data, output, skip_compat_check } => {
            let data = cli_io::load_compat(&data)?;
            let tol = Tolerances::default();
            let r = if skip_compat_check { reconstruct_unchecked(&data, &tol)? } else { reconstruct(&data, &tol)? };
            cli_io::save_net(&output, &r.net)?;
            let mut suites: Vec<SuiteSummary> = r.compat.reports().into_iter().map(SuiteSummary::from).collect();
            suites.push((&r.gauge_loop).into());
            suites.push((&r.coherence).into());
            print_json(&suites);
        }
        Command::ExportObj { net, output } => {
            cli_io::export_obj(&cli_io::load_net(&net)?, &output)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return report(Failure::Usage(e.kind().to_string()));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(f),
    }
}
