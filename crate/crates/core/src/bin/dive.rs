use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dive_core::curves::{curves, CurveSpec, Figure};
use dive_core::document::PlanDocument;
use dive_core::dynamics::{derive_dimensionless, BodyParams};
use dive_core::gen_planner::plan_dive_general;
use dive_core::phase::verify_phase_decomposition;
use dive_core::plan::{plan, plan_for_rotor, DiveRequest};
use dive_core::simulator::{simulate_plan, Tolerances};
use dive_core::DiveError;

const EXIT_USAGE: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;

#[derive(Parser)]
#[command(name = "dive", version, about = "Plan and verify twisting somersaults driven by a switchable rotor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for a five-stage dive and print it as JSON.
    Plan(PlanArgs),
    /// Replay a plan with the equations of motion and report the closure errors.
    Simulate(SimulateArgs),
    /// Tabulate stage-time curves as CSV.
    Curves(CurvesArgs),
}

#[derive(Args)]
struct PlanArgs {
    /// Somersaults (multiple of 1/2).
    #[arg(long)]
    m: f64,
    /// Twists (multiple of 1/2, at least 1/2).
    #[arg(long)]
    n: f64,
    /// Total flight time in seconds.
    #[arg(long)]
    ttot: f64,
    #[arg(long = "I1")]
    i1: f64,
    #[arg(long = "I2")]
    i2: f64,
    #[arg(long = "I3")]
    i3: f64,
    /// Angular momentum; the rotor momentum is solved for.
    #[arg(long)]
    l: Option<f64>,
    /// Rotor angular velocity; with --I-d fixes h and solves for l.
    #[arg(long = "omega-d")]
    omega_d: Option<f64>,
    /// Rotor moment of inertia.
    #[arg(long = "I-d")]
    i_d: Option<f64>,
    /// Use the tri-axial planner (needs I1 < I2).
    #[arg(long)]
    general: bool,
    /// Write the plan here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Plan document produced by `dive plan`.
    #[arg(long)]
    plan: PathBuf,
    /// Largest accepted somersault and twist error in radians.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Relative tolerance of the integrator.
    #[arg(long, default_value_t = 1e-10)]
    rtol: f64,
    /// Write the sampled trajectory as CSV.
    #[arg(long)]
    export: Option<PathBuf>,
    /// Also split the somersault into dynamic and geometric phase.
    #[arg(long)]
    phase: bool,
}

#[derive(Args)]
struct CurvesArgs {
    /// t2, t1, ttot, general-t1 or general-ttot
    #[arg(long)]
    figure: Figure,
    #[arg(long, default_value_t = 19.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1.5)]
    m: f64,
    /// Comma-separated twist counts.
    #[arg(long = "n-list", value_delimiter = ',', default_values_t = [1.0, 2.0, 3.0, 4.0, 5.0])]
    n_list: Vec<f64>,
    /// I1/I2 - 1 for the general figures.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// Abscissa range as lo,hi.
    #[arg(long = "s-range", value_delimiter = ',', default_values_t = [0.001, 0.6])]
    s_range: Vec<f64>,
    #[arg(long, default_value_t = 120)]
    samples: usize,
    /// Write the table here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Infeasible,
    Verification,
}

impl From<DiveError> for Failure {
    fn from(e: DiveError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn emit(output: &Option<PathBuf>, text: &str) -> io::Result<()> {
    match output {
        Some(path) => fs::write(path, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn cmd_plan(a: PlanArgs) -> Result<(), Failure> {
    let rotor = match (a.l, a.omega_d, a.i_d) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(Failure::Usage("--l cannot be combined with --omega-d/--I-d".into()))
        }
        (Some(_), None, None) => None,
        (None, Some(w), Some(i)) => Some((w, i)),
        (None, _, _) => return Err(Failure::Usage("give either --l or both --omega-d and --I-d".into())),
    };
    let base = BodyParams::new(a.i1, a.i2, a.i3, a.l.unwrap_or(1.0))?;
    let d = derive_dimensionless(&base);
    if a.general && d.is_symmetric() {
        return Err(Failure::Usage("--general needs I1 < I2".into()));
    }
    let mut p = match rotor {
        Some((w, i)) => plan_for_rotor(a.m, a.n, a.ttot, base.with_rotor(w, i)?)?,
        None => {
            let req = DiveRequest::new(a.m, a.n, a.ttot, base)?;
            if a.general {
                plan_dive_general(&req)?
            } else {
                plan(&req)?
            }
        }
    };
    if !a.general && !d.is_symmetric() {
        p.warnings.insert(0, "I1 < I2: the general (tri-axial) planner was selected".into());
    }
    let doc = PlanDocument::from_plan(&p, a.ttot);
    emit(&a.output, &(doc.to_json() + "\n"))?;
    if let Some(v) = &p.violation {
        eprintln!("infeasible: {v}");
    }
    if p.feasible {
        Ok(())
    } else {
        Err(Failure::Infeasible)
    }
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&a.plan).map_err(|e| Failure::Usage(format!("{}: {e}", a.plan.display())))?;
    let p = PlanDocument::from_json(&text)?.to_plan()?;
    if !p.feasible {
        eprintln!("plan is infeasible: {}", p.violation.as_deref().unwrap_or("unspecified"));
        return Err(Failure::Infeasible);
    }
    let d = p.dimensionless();
    let tol = Tolerances { rtol: a.rtol, atol: a.rtol * 1e-2, ..Tolerances::default() };
    let rep = simulate_plan(&p, &d, &tol)?;
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "somersault {:.12} rad (target {:.12}, error {:.3e})",
        rep.phi_total,
        2.0 * std::f64::consts::PI * p.m,
        rep.phi_error
    )?;
    writeln!(
        out,
        "twist      {:.12} rad (target {:.12}, error {:.3e})",
        rep.psi_total,
        2.0 * std::f64::consts::PI * p.n,
        rep.psi_error
    )?;
    writeln!(out, "final tilt {:.3e} rad, terminal sign {}", rep.theta_final, rep.terminal_sign)?;
    let energy = rep.energy_drift.iter().cloned().fold(0.0, f64::max);
    let norm = rep.norm_drift.iter().cloned().fold(0.0, f64::max);
    writeln!(out, "max drift  energy {energy:.3e}, |L| {norm:.3e}")?;
    if a.phase {
        let ph = verify_phase_decomposition(&rep.trajectory, &d)?;
        writeln!(
            out,
            "phase      dynamic {:.12}, geometric {:.12}, residual {:.3e}",
            ph.dynamic_phase, ph.geometric_phase, ph.residual
        )?;
    }
    if let Some(path) = &a.export {
        let file = fs::File::create(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        rep.trajectory.write_csv(&mut w)?;
        w.flush()?;
    }
    let closes = rep.closes_within(a.tol);
    writeln!(out, "closure    {} (tolerance {:e} rad)", if closes { "PASS" } else { "FAIL" }, a.tol)?;
    if closes {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn cmd_curves(a: CurvesArgs) -> Result<(), Failure> {
    let [lo, hi] = a.s_range[..] else {
        return Err(Failure::Usage("--s-range takes two values: lo,hi".into()));
    };
    let spec = CurveSpec {
        figure: a.figure,
        gamma: a.gamma,
        m: a.m,
        n_list: a.n_list,
        delta: a.delta,
        s_range: (lo, hi),
        samples: a.samples,
    };
    let table = curves(&spec)?;
    let mut buf = format!("# dive {} curves --figure {}\n", env!("CARGO_PKG_VERSION"), a.figure).into_bytes();
    table.write_csv(&mut buf)?;
    emit(&a.output, &String::from_utf8_lossy(&buf))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Curves(a) => cmd_curves(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Infeasible) => ExitCode::from(EXIT_INFEASIBLE),
        Err(Failure::Verification) => ExitCode::from(EXIT_VERIFICATION),
    }
}
