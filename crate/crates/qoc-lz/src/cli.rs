//! The `qoc-lz` command-line front end.
//!
//! Subcommands: `tmin`, `protocol`, `simulate`, `sweep`, `verify`, `qsl`.
//! JSON goes to stdout (17 significant digits throughout, so identical flags
//! give byte-identical output); human-facing notes go to stderr. Exit codes:
//! 0 success, 1 domain error, 2 usage/parse error, 3 verification failure.
//! The `QOC_LZ_TOL` environment variable overrides the integration accuracy
//! and the `verify` comparison tolerance.

use clap::{value_parser, Arg, ArgAction, ArgMatches, Command};
use serde::Serialize;
use std::fs;
use std::path::PathBuf;

use crate::analytic::{self, Regime};
use crate::dynamics::{self, shape, DriveFunction};
use crate::error::Error;
use crate::jsonio::to_json_string;
use crate::oracle::{self, SearchSpec};
use crate::protocol::{apply_switching, build_bang_bang, build_bang_off_bang, build_composite, Protocol};
use crate::states::{fidelity, lz_eigenstate, parse_state_literal, to_sigma1_basis, Level, LzParams, QubitState};
use crate::tol::Tolerances;

enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        CliError::Lib(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Entry point used by the binary; returns the process exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

/// Run with explicit arguments (first element is the program name).
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let matches = match build_command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            // clap exits 0 for --help/--version and 2 for usage errors.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&matches) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Lib(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse(_) => 2,
                _ => 1,
            }
        }
    }
}

fn state_args(cmd: Command) -> Command {
    cmd.arg(
        Arg::new("in")
            .long("in")
            .value_name("STATE")
            .help("initial state literal \"re+imi,re+imi\" in the sigma3 basis"),
    )
    .arg(
        Arg::new("out")
            .long("out")
            .value_name("STATE")
            .help("target state literal \"re+imi,re+imi\""),
    )
    .arg(
        Arg::new("ground")
            .long("ground")
            .value_name("GAMMA/OMEGA")
            .action(ArgAction::Append)
            .allow_hyphen_values(true)
            .value_parser(value_parser!(f64))
            .help("eigenstate shorthand: ground state at the given gamma/omega ratio"),
    )
    .arg(
        Arg::new("excited")
            .long("excited")
            .value_name("GAMMA/OMEGA")
            .action(ArgAction::Append)
            .allow_hyphen_values(true)
            .value_parser(value_parser!(f64))
            .help("eigenstate shorthand: excited state at the given gamma/omega ratio"),
    )
}

fn output_arg(cmd: Command) -> Command {
    cmd.arg(
        Arg::new("output")
            .long("output")
            .short('o')
            .value_name("PATH")
            .value_parser(value_parser!(PathBuf))
            .help("write the report here instead of stdout"),
    )
}

fn float_arg(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name)
        .long(name)
        .value_name("VALUE")
        .allow_hyphen_values(true)
        .value_parser(value_parser!(f64))
        .help(help)
}

fn build_command() -> Command {
    let tmin = state_args(
        Command::new("tmin").about("Minimal driving time between two states"),
    )
    .arg(float_arg("omega", "coupling omega (> 0); the detuning when --optical is set"))
    .arg(float_arg("omega-max", "bound on a time-dependent coupling; replaces omega in the formula"))
    .arg(float_arg("gamma", "asymmetry gamma (> 0) for the constrained eigenstate-pair variant"))
    .arg(float_arg("c", "drive bound |Gamma| <= c; with --gamma, computes the constrained minimal time"))
    .arg(
        Arg::new("optical")
            .long("optical")
            .action(ArgAction::SetTrue)
            .help("treat states in the sigma1 eigenbasis (fixed detuning, free Rabi coupling)"),
    );

    let protocol = state_args(
        Command::new("protocol").about("Emit the optimal protocol as JSON"),
    )
    .arg(float_arg("gamma", "asymmetry gamma (> 0): drive between the ground states of -+gamma"))
    .arg(float_arg("omega", "coupling omega (> 0)"))
    .arg(float_arg("c", "drive bound |Gamma| <= c; selects bang-off-bang or bang-bang"))
    .arg(float_arg("epsilon", "switching time: insert ramps of this duration at each Gamma jump"))
    .arg(
        Arg::new("corrected")
            .long("corrected")
            .action(ArgAction::SetTrue)
            .help("shorten segments by eps/2 per adjacent ramp (t_c - eps/2, t_off - eps)"),
    )
    .arg(shape_arg());

    let simulate = state_args(
        Command::new("simulate").about("Propagate a protocol file and report the fidelity"),
    )
    .arg(
        Arg::new("protocol")
            .long("protocol")
            .value_name("PATH")
            .required(true)
            .value_parser(value_parser!(PathBuf))
            .help("protocol JSON file (a segment list, as written by the protocol subcommand)"),
    )
    .arg(shape_arg())
    .arg(
        Arg::new("trajectory")
            .long("trajectory")
            .value_name("PATH")
            .value_parser(value_parser!(PathBuf))
            .help("also integrate the drive and write the state trajectory CSV here"),
    );

    let sweep = Command::new("sweep")
        .about("Constrained minimal-time sweep over c/omega (CSV by default)")
        .arg(float_arg("gamma-over-omega", "fixed gamma/omega ratio").default_value("2"))
        .arg(float_arg("c-min", "smallest c/omega").default_value("0.05"))
        .arg(float_arg("c-max", "largest c/omega").default_value("20"))
        .arg(
            Arg::new("points")
                .long("points")
                .value_name("N")
                .value_parser(value_parser!(usize))
                .default_value("200")
                .help("number of grid points"),
        )
        .arg(
            Arg::new("spacing")
                .long("spacing")
                .value_name("KIND")
                .value_parser(["log", "linear"])
                .default_value("log")
                .help("grid spacing"),
        )
        .arg(
            Arg::new("format")
                .long("format")
                .value_name("FMT")
                .value_parser(["csv", "json"])
                .default_value("csv")
                .help("output format"),
        );

    let verify = Command::new("verify")
        .about("Cross-check the closed forms against the brute-force oracle")
        .arg(float_arg("gamma-over-omega", "gamma/omega ratio of the eigenstate pair").default_value("2"))
        .arg(
            Arg::new("c-over-omega")
                .long("c-over-omega")
                .value_name("VALUE")
                .action(ArgAction::Append)
                .allow_hyphen_values(true)
                .value_parser(value_parser!(f64))
                .help("constrained cases to check (repeatable; default 5 and 0.4)"),
        );

    let qsl = state_args(
        Command::new("qsl").about("Quantum-speed-limit times next to the minimal time"),
    )
    .arg(float_arg("omega", "coupling omega (> 0)"))
    .arg(float_arg("gamma", "evaluate the constant-Hamiltonian bound for gamma*sigma3 + omega*sigma1"));

    Command::new("qoc-lz")
        .about("Time-optimal driving of a two-level system: closed forms, protocols, and brute-force verification")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(output_arg(tmin))
        .subcommand(output_arg(protocol))
        .subcommand(output_arg(simulate))
        .subcommand(output_arg(sweep))
        .subcommand(output_arg(verify))
        .subcommand(output_arg(qsl))
}

fn shape_arg() -> Arg {
    Arg::new("shape")
        .long("shape")
        .value_name("KIND")
        .value_parser(["linear", "cosine", "smoothstep"])
        .default_value("linear")
        .help("ramp profile used when propagating switching ramps")
}

fn ramp_shape(m: &ArgMatches) -> fn(f64) -> f64 {
    match m.get_one::<String>("shape").map(String::as_str) {
        Some("cosine") => shape::cosine,
        Some("smoothstep") => shape::smoothstep,
        _ => shape::linear,
    }
}

fn dispatch(m: &ArgMatches) -> CliResult<i32> {
    match m.subcommand() {
        Some(("tmin", sub)) => cmd_tmin(sub),
        Some(("protocol", sub)) => cmd_protocol(sub),
        Some(("simulate", sub)) => cmd_simulate(sub),
        Some(("sweep", sub)) => cmd_sweep(sub),
        Some(("verify", sub)) => cmd_verify(sub),
        Some(("qsl", sub)) => cmd_qsl(sub),
        _ => Err(usage("a subcommand is required")),
    }
}

fn require_flag(m: &ArgMatches, name: &str) -> CliResult<f64> {
    m.get_one::<f64>(name)
        .copied()
        .ok_or_else(|| usage(format!("missing required flag --{name}")))
}

fn emit(m: &ArgMatches, text: &str) -> CliResult<()> {
    match m.get_one::<PathBuf>("output") {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Lib(e.into())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(m: &ArgMatches, value: &T) -> CliResult<()> {
    let mut text = to_json_string(value).map_err(CliError::Lib)?;
    text.push('\n');
    emit(m, &text)
}

/// Collect the initial/target pair from --in/--out plus the eigenstate
/// shorthands, which fill the free slots in command-line order.
fn parse_state_pair(m: &ArgMatches) -> CliResult<(QubitState, QubitState)> {
    let literal = |flag: &str| -> CliResult<Option<QubitState>> {
        match m.get_one::<String>(flag) {
            None => Ok(None),
            Some(text) => {
                let (state, defect) = parse_state_literal(text)
                    .map_err(|e| CliError::Lib(Error::Parse(format!("--{flag}: {e}"))))?;
                if defect > 1e-12 {
                    eprintln!("note: --{flag} state renormalized (norm defect {defect:.3e})");
                }
                Ok(Some(state))
            }
        }
    };
    let explicit_in = literal("in")?;
    let explicit_out = literal("out")?;

    let mut shorthands: Vec<(usize, QubitState)> = Vec::new();
    for (flag, level) in [("ground", Level::Ground), ("excited", Level::Excited)] {
        if let (Some(values), Some(indices)) = (m.get_many::<f64>(flag), m.indices_of(flag)) {
            for (&ratio, index) in values.zip(indices) {
                let state = lz_eigenstate(ratio, 1.0, level).map_err(CliError::Lib)?;
                shorthands.push((index, state));
            }
        }
    }
    shorthands.sort_by_key(|&(index, _)| index);
    let mut queue = shorthands.into_iter().map(|(_, s)| s);

    let initial = match explicit_in {
        Some(s) => s,
        None => queue.next().ok_or_else(|| {
            usage("missing initial state: give --in, or a --ground/--excited shorthand")
        })?,
    };
    let target = match explicit_out {
        Some(s) => s,
        None => queue.next().ok_or_else(|| {
            usage("missing target state: give --out, or a second --ground/--excited shorthand")
        })?,
    };
    if queue.next().is_some() {
        return Err(usage(
            "too many state specifications: expected exactly an initial and a target state",
        ));
    }
    Ok((initial, target))
}

fn any_state_flags(m: &ArgMatches) -> bool {
    m.get_one::<String>("in").is_some()
        || m.get_one::<String>("out").is_some()
        || m.get_many::<f64>("ground").is_some()
        || m.get_many::<f64>("excited").is_some()
}

fn cmd_tmin(m: &ArgMatches) -> CliResult<i32> {
    let constrained = m.get_one::<f64>("c").is_some();
    if constrained {
        if any_state_flags(m) {
            return Err(usage(
                "--c computes the constrained eigenstate-pair time; state flags do not apply",
            ));
        }
        let gamma = require_flag(m, "gamma")?;
        let omega = require_flag(m, "omega")?;
        let c = require_flag(m, "c")?;
        let result = analytic::tmin_constrained(gamma, omega, c)?;
        emit_json(m, &result)?;
        return Ok(0);
    }
    if m.get_one::<f64>("gamma").is_some() {
        return Err(usage("--gamma without --c is ambiguous; use --ground/--excited shorthands"));
    }
    let (mut initial, mut target) = parse_state_pair(m)?;
    let omega = require_flag(m, "omega")?;
    if m.get_flag("optical") {
        initial = to_sigma1_basis(&initial);
        target = to_sigma1_basis(&target);
    }
    let coupling = match m.get_one::<f64>("omega-max") {
        Some(&wmax) => {
            LzParams::new(0.0, omega)?.with_omega_max(wmax)?.effective_coupling()
        }
        None => omega,
    };
    let result = analytic::tmin_unconstrained(&initial, &target, coupling)?;
    emit_json(m, &result)?;
    Ok(0)
}

fn cmd_protocol(m: &ArgMatches) -> CliResult<i32> {
    let omega = require_flag(m, "omega")?;
    let states_given = any_state_flags(m);

    let (protocol, pair): (Protocol, Option<(QubitState, QubitState)>) = if states_given {
        if m.get_one::<f64>("c").is_some() {
            return Err(usage(
                "constrained protocols are defined for the eigenstate pair; drop the state flags",
            ));
        }
        let (initial, target) = parse_state_pair(m)?;
        let (alpha_in, alpha_f, t_min) = analytic::pulse_areas(&initial, &target, omega)?;
        (
            build_composite(alpha_in, alpha_f, omega, t_min)?,
            Some((initial, target)),
        )
    } else {
        let gamma = require_flag(m, "gamma")?;
        let pair = (
            lz_eigenstate(-gamma, omega, Level::Ground)?,
            lz_eigenstate(gamma, omega, Level::Ground)?,
        );
        let p = match m.get_one::<f64>("c") {
            None => {
                let t_min = analytic::tmin_ground_to_ground(gamma, omega)?;
                build_composite(std::f64::consts::FRAC_PI_4, -std::f64::consts::FRAC_PI_4, omega, t_min)?
            }
            Some(&c) => match analytic::regime(gamma, omega, Some(c))? {
                Regime::BangBang => build_bang_bang(gamma, omega, c)?,
                _ => build_bang_off_bang(gamma, omega, c)?,
            },
        };
        (p, Some(pair))
    };

    let protocol = match m.get_one::<f64>("epsilon") {
        Some(&eps) => {
            let switched = apply_switching(&protocol, eps, m.get_flag("corrected"))?;
            if let Some((initial, target)) = &pair {
                let out = dynamics::propagate_protocol_shaped(&switched, initial, &ramp_shape(m));
                eprintln!("simulated fidelity: {:.12}", fidelity(&out, target));
            }
            switched
        }
        None => protocol,
    };
    emit_json(m, &protocol)?;
    Ok(0)
}

#[derive(Serialize)]
struct SimulateReport {
    fidelity: f64,
    achieved: [[f64; 2]; 2],
}

fn cmd_simulate(m: &ArgMatches) -> CliResult<i32> {
    let path = m.get_one::<PathBuf>("protocol").expect("required");
    let text = fs::read_to_string(path).map_err(|e| CliError::Lib(e.into()))?;
    let protocol: Protocol = serde_json::from_str(&text)
        .map_err(|e| CliError::Lib(Error::Parse(format!("--protocol {}: {e}", path.display()))))?;
    let (initial, target) = parse_state_pair(m)?;
    let shape_fn = ramp_shape(m);
    let achieved = dynamics::propagate_protocol_shaped(&protocol, &initial, &shape_fn);

    if let Some(traj_path) = m.get_one::<PathBuf>("trajectory") {
        let tol = Tolerances::from_env();
        let drive = DriveFunction::from_protocol(&protocol, shape_fn)?;
        let traj = dynamics::integrate_schrodinger_trajectory(&drive, &initial, tol.integration)?;
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).map_err(|e| CliError::Lib(e.into()))?;
        fs::write(traj_path, buf).map_err(|e| CliError::Lib(e.into()))?;
    }

    let report = SimulateReport {
        fidelity: fidelity(&achieved, &target),
        achieved: [
            [achieved.c0().re, achieved.c0().im],
            [achieved.c1().re, achieved.c1().im],
        ],
    };
    emit_json(m, &report)?;
    Ok(0)
}

fn cmd_sweep(m: &ArgMatches) -> CliResult<i32> {
    let gamma_over_omega = require_flag(m, "gamma-over-omega")?;
    let c_min = require_flag(m, "c-min")?;
    let c_max = require_flag(m, "c-max")?;
    let points = *m.get_one::<usize>("points").expect("default");
    if points == 0 {
        return Err(usage("--points must be >= 1"));
    }
    if !(c_min > 0.0 && c_max >= c_min) {
        return Err(usage("require 0 < --c-min <= --c-max"));
    }
    let grid: Vec<f64> = if points == 1 {
        vec![c_min]
    } else {
        (0..points)
            .map(|k| {
                let frac = k as f64 / (points - 1) as f64;
                match m.get_one::<String>("spacing").map(String::as_str) {
                    Some("linear") => c_min + (c_max - c_min) * frac,
                    _ => c_min * (c_max / c_min).powf(frac),
                }
            })
            .collect()
    };
    let result = oracle::sweep_fig1(gamma_over_omega, &grid)?;
    if !result.monotone {
        eprintln!("warning: w_t_min is not monotone non-increasing along this grid");
    }
    match m.get_one::<String>("format").map(String::as_str) {
        Some("json") => emit_json(m, &result)?,
        _ => {
            let mut buf = Vec::new();
            oracle::write_sweep_csv(&result.rows, &mut buf).map_err(|e| CliError::Lib(e.into()))?;
            emit(m, &String::from_utf8(buf).expect("UTF-8 CSV"))?;
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct VerifyCheck {
    name: String,
    expected: f64,
    actual: f64,
    error: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    passed: bool,
    tolerance: f64,
    checks: Vec<VerifyCheck>,
}

fn cmd_verify(m: &ArgMatches) -> CliResult<i32> {
    let tol = Tolerances::from_env();
    let g = require_flag(m, "gamma-over-omega")?;
    let cs: Vec<f64> = match m.get_many::<f64>("c-over-omega") {
        Some(values) => values.copied().collect(),
        None => vec![5.0, 0.4],
    };

    let initial = lz_eigenstate(-g, 1.0, Level::Ground)?;
    let target = lz_eigenstate(g, 1.0, Level::Ground)?;
    let mut checks = Vec::new();

    let expected = analytic::tmin_ground_to_ground(g, 1.0)?;
    let params = LzParams::new(g, 1.0)?;
    let r = oracle::search_min_time(&SearchSpec::composite(), &initial, &target, &params)?;
    checks.push(VerifyCheck {
        name: format!("composite search vs arctan formula (gamma/omega = {g})"),
        expected,
        actual: r.time,
        error: (r.time - expected).abs(),
        tolerance: tol.verify,
        pass: r.reached && (r.time - expected).abs() <= tol.verify,
    });

    for &c in &cs {
        let expected = analytic::tmin_constrained(g, 1.0, c)?.t_min;
        let params = LzParams::new(g, 1.0)?.with_bound(c)?;
        let r = oracle::search_min_time(&SearchSpec::three_segment(true), &initial, &target, &params)?;
        let rel = (r.time - expected).abs() / expected.max(f64::MIN_POSITIVE);
        checks.push(VerifyCheck {
            name: format!("three-segment search vs constrained formula (c/omega = {c})"),
            expected,
            actual: r.time,
            error: rel,
            tolerance: tol.verify,
            pass: r.reached && rel <= tol.verify,
        });
    }

    let passed = checks.iter().all(|c| c.pass);
    for c in &checks {
        eprintln!(
            "{} {} (expected {:.9}, got {:.9}, err {:.3e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.expected,
            c.actual,
            c.error
        );
    }
    emit_json(
        m,
        &VerifyReport {
            passed,
            tolerance: tol.verify,
            checks,
        },
    )?;
    Ok(if passed { 0 } else { 3 })
}

fn cmd_qsl(m: &ArgMatches) -> CliResult<i32> {
    let (initial, target) = parse_state_pair(m)?;
    let omega = require_flag(m, "omega")?;
    let mut report = analytic::qsl_times(&initial, &target, omega)?;
    if let Some(&gamma) = m.get_one::<f64>("gamma") {
        report.t_fleming = analytic::fleming_time(&initial, &target, gamma, omega)?;
    }
    emit_json(m, &report)?;
    Ok(0)
}
