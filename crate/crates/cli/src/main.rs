//! `centro`: generate curves, apply Bäcklund maps, scan period maps, run
//! KdV flows and the self-check suites.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use centro_affine::backlund::{self, param_convert, ParamKind};
use centro_affine::invariants::InvariantReport;
use centro_affine::io::{self, AnyCurve, CurveFile};
use centro_affine::monodromy::{self, Branch};
use centro_affine::periodic::DEFAULT_N;
use centro_affine::{
    kdv, lift, project, selfcheck, CentroAffineCurve, Error, ProjectiveCurve, Result,
};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(
    name = "centro",
    version,
    about = "Centro-affine curves and Bäcklund maps of KdV"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a projective test curve
    Gen {
        #[arg(long, value_enum, default_value_t = Preset::Trig)]
        preset: Preset,
        #[arg(long, default_value_t = DEFAULT_N)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        modes: usize,
        /// Weighted size `sum 2k(|alpha_k| + |beta_k|)` of the perturbation, below 1
        #[arg(long, default_value_t = 0.2)]
        amplitude: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Normalized centro-affine lift of a projective curve
    Lift {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Projective curve of a centro-affine curve
    Project {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Apply T_c; prints the before/after invariant report
    Backlund {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, value_enum, default_value_t = Kind::Affine)]
        c_kind: Kind,
        #[arg(long, value_enum, default_value_t = BranchArg::Minus)]
        branch: BranchArg,
        /// Where to write the transformed curve
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Tr^2 of the period map over a lambda grid, as CSV
    Scan {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        lambda_min: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        lambda_max: f64,
        #[arg(long, default_value_t = 11)]
        lambda_steps: usize,
        /// Also scan delta = T_c(gamma) and report the largest deviation
        #[arg(long, allow_negative_numbers = true)]
        c: Option<f64>,
        #[arg(long, value_enum, default_value_t = Kind::Affine)]
        c_kind: Kind,
        #[arg(long, value_enum, default_value_t = BranchArg::Minus)]
        branch: BranchArg,
        #[arg(long)]
        delta_output: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// KdV flow of the curve; writes the trace of conserved quantities
    Kdv {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        s_end: f64,
        #[arg(long, default_value_t = kdv::DEFAULT_DS)]
        ds: f64,
        /// Trace row every this many steps
        #[arg(long, default_value_t = 50)]
        every: usize,
        /// Where to write the curve at s_end
        #[arg(long)]
        curve_output: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Close the Bianchi square for two parameters
    Permutability {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        c1: f64,
        #[arg(long)]
        c2: f64,
        #[arg(long, value_enum, default_value_t = Kind::Projective)]
        c_kind: Kind,
        #[arg(long, value_enum, default_value_t = BranchArg::Minus)]
        branch1: BranchArg,
        #[arg(long, value_enum, default_value_t = BranchArg::Minus)]
        branch2: BranchArg,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run every property suite; exit 0 iff all pass
    Selfcheck {
        #[arg(long, default_value_t = 128)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Preset {
    Circle,
    Trig,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Affine,
    Projective,
}

impl From<Kind> for ParamKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Affine => ParamKind::Affine,
            Kind::Projective => ParamKind::Projective,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BranchArg {
    Plus,
    Minus,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Plus => Branch::Plus,
            BranchArg::Minus => Branch::Minus,
        }
    }
}

struct Input {
    curve: AnyCurve,
    seed: Option<u64>,
}

impl Input {
    fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        let file = CurveFile::from_json(&text)?;
        Ok(Self {
            curve: file.to_curve()?,
            seed: file.seed(),
        })
    }

    fn projective(&self) -> Result<ProjectiveCurve> {
        match &self.curve {
            AnyCurve::Projective(c) => Ok(c.clone()),
            AnyCurve::CentroAffine(c) => project(c),
        }
    }

    fn centro_affine(&self) -> Result<CentroAffineCurve> {
        match &self.curve {
            AnyCurve::Projective(c) => lift(c),
            AnyCurve::CentroAffine(c) => Ok(c.clone()),
        }
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", p.display()))),
        None => {
            println!("{}", text.trim_end());
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen {
            preset,
            n,
            seed,
            modes,
            amplitude,
            output,
        } => {
            let (curve, seed) = match preset {
                Preset::Circle => (ProjectiveCurve::circle(n)?, None),
                Preset::Trig => {
                    if !(0.0..1.0).contains(&amplitude) {
                        return Err(Error::InvalidArgument(format!(
                            "amplitude {amplitude} not in [0, 1)"
                        )));
                    }
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let coeffs = ProjectiveCurve::random_trig_coeffs(&mut rng, modes, amplitude);
                    (ProjectiveCurve::trig(n, &coeffs)?, Some(seed))
                }
            };
            emit(
                output.as_deref(),
                &CurveFile::projective(&curve, seed).to_json()?,
            )?;
        }
        Command::Lift { input, output } => {
            let inp = Input::read(&input)?;
            let curve = inp.centro_affine()?;
            emit(
                output.as_deref(),
                &CurveFile::centro_affine(&curve, inp.seed).to_json()?,
            )?;
        }
        Command::Project { input, output } => {
            let inp = Input::read(&input)?;
            let curve = inp.projective()?;
            emit(
                output.as_deref(),
                &CurveFile::projective(&curve, inp.seed).to_json()?,
            )?;
        }
        Command::Backlund {
            input,
            c,
            c_kind,
            branch,
            output,
        } => {
            let inp = Input::read(&input)?;
            let gamma = inp.centro_affine()?;
            let param = param_convert(c, c_kind.into())?;
            let result = backlund::apply_tc(&gamma, param.c_aff, branch.into())?;
            if let Some(path) = output.as_deref() {
                emit(
                    Some(path),
                    &CurveFile::centro_affine(&result.delta, inp.seed).to_json()?,
                )?;
            }
            let report = json!({
                "param": param,
                "branch": Branch::from(branch),
                "multiplier": result.a.multiplier,
                "pairing_defect": result.pairing_defect(&gamma),
                "before": InvariantReport::of(&gamma),
                "after": InvariantReport::of(&result.delta),
            });
            emit(None, &io::to_json(&report)?)?;
        }
        Command::Scan {
            input,
            lambda_min,
            lambda_max,
            lambda_steps,
            c,
            c_kind,
            branch,
            delta_output,
            output,
        } => {
            if lambda_steps == 0
                || lambda_min.is_nan()
                || lambda_max.is_nan()
                || lambda_min > lambda_max
            {
                return Err(Error::InvalidArgument(format!(
                    "bad lambda grid [{lambda_min}, {lambda_max}] with {lambda_steps} steps"
                )));
            }
            let inp = Input::read(&input)?;
            let gamma = inp.projective()?;
            let lams = monodromy::linspace(lambda_min, lambda_max, lambda_steps);
            let scan = monodromy::spectral_scan(&gamma, &lams);
            emit(output.as_deref(), &io::scan_csv(&scan, inp.seed))?;
            if let Some(c) = c {
                let param = param_convert(c, c_kind.into())?;
                let delta = backlund::apply_tc_projective(&gamma, param.c_pr, branch.into())?;
                let dscan = monodromy::spectral_scan(&delta, &lams);
                if let Some(path) = delta_output.as_deref() {
                    emit(Some(path), &io::scan_csv(&dscan, inp.seed))?;
                }
                eprintln!("max_deviation {}", io::fmt_f64(scan.max_deviation(&dscan)));
            }
        }
        Command::Kdv {
            input,
            s_end,
            ds,
            every,
            curve_output,
            output,
        } => {
            let inp = Input::read(&input)?;
            let gamma = inp.centro_affine()?;
            let states = kdv::flow_states(&gamma, s_end, ds, every)?;
            let rows = kdv::flow_rows(&states);
            emit(output.as_deref(), &io::flow_csv(&rows, inp.seed))?;
            if let Some(path) = curve_output.as_deref() {
                let last = &states.last().expect("flow has an initial state").curve;
                emit(
                    Some(path),
                    &CurveFile::centro_affine(last, inp.seed).to_json()?,
                )?;
            }
        }
        Command::Permutability {
            input,
            c1,
            c2,
            c_kind,
            branch1,
            branch2,
            output,
        } => {
            let inp = Input::read(&input)?;
            let gamma = inp.projective()?;
            let p1 = param_convert(c1, c_kind.into())?;
            let p2 = param_convert(c2, c_kind.into())?;
            let sq = backlund::permutability_square(
                &gamma,
                p1.c_pr,
                p2.c_pr,
                (branch1.into(), branch2.into()),
            )?;
            if let Some(path) = output.as_deref() {
                emit(
                    Some(path),
                    &CurveFile::projective(&sq.gamma12, inp.seed).to_json()?,
                )?;
            }
            let report = json!({
                "c1_pr": p1.c_pr,
                "c2_pr": p2.c_pr,
                "mu": sq.mu,
                "nu": sq.nu,
                "closure": sq.closure,
                "match_errors": sq.match_errors,
            });
            emit(None, &io::to_json(&report)?)?;
        }
        Command::Selfcheck { n, seed } => {
            let reports = selfcheck::run_all(n, seed)?;
            println!("# seed={seed} n={n}");
            for r in &reports {
                println!(
                    "{:<32} {} max_residual={} tol={:.0e}{}",
                    r.name,
                    if r.passed { "PASS" } else { "FAIL" },
                    io::fmt_f64(r.max_residual),
                    r.tolerance,
                    r.error
                        .as_deref()
                        .map(|e| format!(" ({e})"))
                        .unwrap_or_default()
                );
            }
            let failed = reports.iter().filter(|r| !r.passed).count();
            println!(
                "{} of {} suites passed",
                reports.len() - failed,
                reports.len()
            );
            if failed > 0 {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("ERROR {}: {e}", e.name());
            ExitCode::from(if e.is_precondition() { 2 } else { 3 })
        }
    }
}
