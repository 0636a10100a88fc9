//! Command-line front end for the `nvisa` simulator.
//!
//! Every command is a plain function over parsed arguments so that tests can
//! drive it without spawning a process. Result tables are CSV files with a
//! versioned `# schema:` line; a JSON run report goes to stdout, or to stderr
//! when the table itself is written to stdout.

pub mod config;
pub mod format;

use std::f64::consts::TAU;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nvisa::controller::{run_program, NetworkState};
use nvisa::isa::{decode_with_lines, validate, IsaError};
use nvisa::perf::{sweep, TimingParams, DEFAULT_FIXED, DEFAULT_R_GRID};
use nvisa::protocols::{
    bbpssw, entanglement_transfer, phase_scan, witness, PurificationMode, TransferBasis,
    WitnessMode,
};
use nvisa::quantum::{GateSpec, PureState, C64};
use nvisa::rng::{trial_rng, TrialRng};
use serde::Serialize;
use serde_json::json;

use config::{bell_name, NetworkFile};
use format::{num, Table};

#[derive(Debug, Parser)]
#[command(name = "nvisa", version, about = "NV-centre repeater ISA simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a program file against a network description.
    Validate(ValidateArgs),
    /// Execute a program and write trace, records and link fidelities.
    Run(RunArgs),
    /// One round of BBPSSW purification on Werner pairs.
    Bbpssw(BbpsswArgs),
    /// Two-branch interferometric overlap witness.
    Witness(WitnessArgs),
    /// Electron-to-nuclear entanglement transfer.
    Transfer(TransferArgs),
    /// Round-throughput sweep over re-initialisation time and register size.
    Throughput(ThroughputArgs),
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// Randomness seed.
    #[arg(long, env = "NVISA_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Output CSV file. Without it the table goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub program: PathBuf,
    /// Network description (TOML).
    #[arg(long)]
    pub nodes: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub program: PathBuf,
    #[arg(long)]
    pub nodes: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Args)]
pub struct BbpsswArgs {
    /// Input fidelities, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub fidelity: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    /// Monte Carlo trials per fidelity.
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    /// Reference branch, e.g. `I` or `H,RZ:0.3`.
    #[arg(long, default_value = "I")]
    pub u0: String,
    /// Probed branch.
    #[arg(long)]
    pub u1: String,
    /// `0`, `1`, `+`, `-`, `+i`, `-i` or `bloch:THETA:PHI`.
    #[arg(long, default_value = "0")]
    pub state: String,
    /// Number of evenly spaced phases in [0, 2π).
    #[arg(long, default_value_t = 16)]
    pub phases: usize,
    /// Explicit phase list; replaces `--phases`.
    #[arg(long, value_delimiter = ',')]
    pub phi: Option<Vec<f64>>,
    /// Estimate the overlap from this many shots per phase setting.
    #[arg(long)]
    pub shots: Option<u64>,
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    None,
    X,
    Z,
}

#[derive(Debug, Args)]
pub struct TransferArgs {
    #[arg(long, value_enum, default_value_t = BasisArg::X)]
    pub basis: BasisArg,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct ThroughputArgs {
    /// Fixed per-round overhead in seconds.
    #[arg(long, default_value_t = DEFAULT_FIXED)]
    pub fixed: f64,
    /// `START:STOP:STEP` or a comma-separated list, in seconds.
    #[arg(long, default_value = "0:10e-6:0.5e-6")]
    pub tau_grid: String,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_R_GRID)]
    pub r_grid: Vec<u32>,
    /// Electrons per node.
    #[arg(long, default_value_t = 1)]
    pub electrons: u32,
    #[command(flatten)]
    pub out: OutArg,
}

/// Printed after every command that produces output.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
    pub trace: Option<String>,
    pub wall_time_s: f64,
}

/// Runs one command. Returns the process exit status.
pub fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let start = Instant::now();
    let (mut report, to_stdout) = match cli.command {
        Command::Validate(a) => return cmd_validate(&a, stdout),
        Command::Run(a) => (cmd_run(&a)?, false),
        Command::Bbpssw(a) => emit(cmd_bbpssw(&a)?, &a.out, stdout)?,
        Command::Witness(a) => emit(cmd_witness(&a)?, &a.out, stdout)?,
        Command::Transfer(a) => emit(cmd_transfer(&a)?, &a.out, stdout)?,
        Command::Throughput(a) => emit(cmd_throughput(&a)?, &a.out, stdout)?,
    };
    report.wall_time_s = start.elapsed().as_secs_f64();
    let line = serde_json::to_string(&report)?;
    if to_stdout {
        writeln!(stderr, "{line}")?;
    } else {
        writeln!(stdout, "{line}")?;
    }
    Ok(0)
}

fn emit(
    (table, mut report): (Table, RunReport),
    out: &OutArg,
    stdout: &mut dyn Write,
) -> Result<(RunReport, bool)> {
    let bytes = table.to_bytes()?;
    match &out.out {
        Some(path) => {
            write_file(path, &bytes)?;
            report.outputs.push(path.display().to_string());
            Ok((report, false))
        }
        None => {
            stdout.write_all(&bytes)?;
            report.outputs.push("-".into());
            Ok((report, true))
        }
    }
}

/// Writes through a temporary sibling so a failed write leaves nothing behind.
fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    let res = fs::write(&tmp, bytes).and_then(|_| fs::rename(&tmp, path));
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    res.with_context(|| format!("cannot write {}", path.display()))
}

fn report(command: &'static str, seed: Option<u64>, config: serde_json::Value) -> RunReport {
    RunReport {
        command,
        seed,
        config,
        outputs: Vec::new(),
        trace: None,
        wall_time_s: 0.0,
    }
}

pub fn cmd_validate(a: &ValidateArgs, out: &mut dyn Write) -> Result<i32> {
    let net = NetworkFile::load(&a.nodes)?;
    let nodes = net.node_configs();
    let text = fs::read_to_string(&a.program)
        .with_context(|| format!("cannot read {}", a.program.display()))?;
    let (program, lines) = match decode_with_lines(&text) {
        Ok(p) => p,
        Err(e @ IsaError::Parse { .. }) => {
            writeln!(out, "{}: {e}", a.program.display())?;
            return Ok(1);
        }
        Err(e) => return Err(e.into()),
    };
    let mut failures = 0;
    for (v, at) in program.rounds.iter().zip(&lines) {
        for (instr, line) in v.entries.iter().zip(at) {
            let Some(node) = nodes.iter().find(|n| n.index == instr.address.node) else {
                writeln!(
                    out,
                    "{}:{line}: node {} is not in the network",
                    a.program.display(),
                    instr.address.node
                )?;
                failures += 1;
                continue;
            };
            if let Err(errs) = validate(instr, node) {
                for e in errs {
                    writeln!(out, "{}:{line}: {e}", a.program.display())?;
                    failures += 1;
                }
            }
        }
    }
    if failures == 0 {
        let n: usize = program.rounds.iter().map(|v| v.entries.len()).sum();
        writeln!(
            out,
            "{}: ok ({} rounds, {n} instructions)",
            a.program.display(),
            program.rounds.len()
        )?;
        Ok(0)
    } else {
        Ok(1)
    }
}

pub fn cmd_run(a: &RunArgs) -> Result<RunReport> {
    let file = NetworkFile::load(&a.nodes)?;
    let text = fs::read_to_string(&a.program)
        .with_context(|| format!("cannot read {}", a.program.display()))?;
    let (program, _) = decode_with_lines(&text)?;
    let net = NetworkState::with_links(file.node_configs(), &file.link_specs()?)?;
    let out = run_program(&net, &program, &mut trial_rng(a.seed.seed, 0))?;

    let mut links = Table::new("links/v1", &["a", "b", "reference", "fidelity"]);
    let mut link_json = Vec::new();
    for l in &file.links {
        let kind = l.reference()?;
        let spec = l.spec()?;
        let f = out.state.pair_fidelity(&spec.a, &spec.b, kind)?;
        links.push(vec![
            l.a.clone(),
            l.b.clone(),
            bell_name(kind).into(),
            num(f),
        ]);
        link_json.push(json!({"a": l.a, "b": l.b, "reference": bell_name(kind), "fidelity": f}));
    }

    let mut entries: Vec<_> = out.record.entries().collect();
    entries.sort_by_key(|e| (e.round, e.address.node, e.address.electron));
    let mut record = Table::new("record/v1", &["round", "node", "electron", "bit"]);
    for e in &entries {
        record.push(vec![
            e.round.to_string(),
            e.address.node.to_string(),
            e.address.electron.to_string(),
            e.bit.to_string(),
        ]);
    }

    let mut trace = Vec::new();
    for t in &out.trace {
        serde_json::to_writer(&mut trace, t)?;
        trace.push(b'\n');
    }

    let summary = json!({
        "rounds": program.rounds.len(),
        "final_round": out.state.round(),
        "seed": a.seed.seed,
        "measurements": entries.len(),
        "links": link_json,
    });
    let mut summary = serde_json::to_vec_pretty(&summary)?;
    summary.push(b'\n');

    let files = [
        ("trace.jsonl", trace),
        ("record.csv", record.to_bytes()?),
        ("links.csv", links.to_bytes()?),
        ("summary.json", summary),
    ];
    write_outputs(&a.out, &files)?;

    let mut r = report(
        "run",
        Some(a.seed.seed),
        json!({
            "program": a.program.display().to_string(),
            "nodes": file,
            "out": a.out.display().to_string(),
        }),
    );
    r.outputs = files
        .iter()
        .map(|(n, _)| a.out.join(n).display().to_string())
        .collect();
    r.trace = Some(a.out.join("trace.jsonl").display().to_string());
    Ok(r)
}

/// Writes every file or none: on failure the files already written, and the
/// directory if this call created it, are removed.
fn write_outputs(dir: &Path, files: &[(&str, Vec<u8>)]) -> Result<()> {
    let created = !dir.exists();
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        if let Err(e) = write_file(&path, bytes) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            if created {
                let _ = fs::remove_dir(dir);
            }
            return Err(e);
        }
        written.push(path);
    }
    Ok(())
}

pub fn cmd_bbpssw(a: &BbpsswArgs) -> Result<(Table, RunReport)> {
    let mut fs_in = a.fidelity.clone();
    fs_in.sort_by(f64::total_cmp);
    let mut t = Table::new(
        "bbpssw/v1",
        &[
            "fidelity_in",
            "mode",
            "trials",
            "kept",
            "f_out_exact",
            "p_succ_exact",
            "f_out_sampled",
            "f_out_stderr",
            "p_succ_sampled",
            "p_succ_stderr",
        ],
    );
    for f in fs_in {
        let exact = bbpssw(f, PurificationMode::Exact, 0, a.seed.seed)?;
        let mut row = vec![num(f)];
        match a.mode {
            ModeArg::Exact => {
                row.extend(["exact".into(), "0".into(), String::new()]);
                row.extend([num(exact.output_fidelity), num(exact.success_probability)]);
                row.extend([String::new(), String::new(), String::new(), String::new()]);
            }
            ModeArg::MonteCarlo => {
                let mc = bbpssw(f, PurificationMode::MonteCarlo, a.trials, a.seed.seed)?;
                let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
                row.extend([
                    "monte_carlo".into(),
                    mc.trials.to_string(),
                    mc.kept.to_string(),
                ]);
                row.extend([num(exact.output_fidelity), num(exact.success_probability)]);
                row.extend([
                    num(mc.output_fidelity),
                    opt(mc.output_stderr),
                    num(mc.success_probability),
                    opt(mc.success_stderr),
                ]);
            }
        }
        t.push(row);
    }
    let seed = (a.mode == ModeArg::MonteCarlo).then_some(a.seed.seed);
    let r = report(
        "bbpssw",
        seed,
        json!({"fidelity": a.fidelity, "mode": format!("{:?}", a.mode), "trials": a.trials}),
    );
    Ok((t, r))
}

/// `NAME` or `NAME:theta`, comma separated. Electron-local gates only.
pub fn parse_gates(s: &str) -> Result<Vec<GateSpec>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|g| {
            let (name, arg) = match g.trim().split_once(':') {
                Some((n, a)) => (n, Some(a)),
                None => (g.trim(), None),
            };
            let theta = || -> Result<f64> {
                let a = arg.ok_or_else(|| anyhow!("{name} needs an angle, e.g. {name}:1.5708"))?;
                let t: f64 = a.parse().with_context(|| format!("bad angle `{a}`"))?;
                if !t.is_finite() {
                    bail!("angle must be finite");
                }
                Ok(t)
            };
            let plain = |spec: GateSpec| -> Result<GateSpec> {
                if arg.is_some() {
                    bail!("{name} takes no angle");
                }
                Ok(spec)
            };
            match name.to_ascii_uppercase().as_str() {
                "I" => plain(GateSpec::I),
                "X" => plain(GateSpec::X),
                "Y" => plain(GateSpec::Y),
                "Z" => plain(GateSpec::Z),
                "H" => plain(GateSpec::H),
                "RY" => Ok(GateSpec::Ry(theta()?)),
                "RZ" => Ok(GateSpec::Rz(theta()?)),
                "PHASE" => Ok(GateSpec::Phase(theta()?)),
                _ => bail!("unknown gate `{name}` (expected I, X, Y, Z, H, RY, RZ or PHASE)"),
            }
        })
        .collect()
}

pub fn parse_state(s: &str) -> Result<PureState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re, im| C64::new(re, im);
    let (a, b) = match s {
        "0" => (c(1.0, 0.0), c(0.0, 0.0)),
        "1" => (c(0.0, 0.0), c(1.0, 0.0)),
        "+" => (c(h, 0.0), c(h, 0.0)),
        "-" => (c(h, 0.0), c(-h, 0.0)),
        "+i" => (c(h, 0.0), c(0.0, h)),
        "-i" => (c(h, 0.0), c(0.0, -h)),
        _ => {
            let rest = s
                .strip_prefix("bloch:")
                .ok_or_else(|| anyhow!("unknown state `{s}`"))?;
            let (t, p) = rest
                .split_once(':')
                .ok_or_else(|| anyhow!("expected bloch:THETA:PHI"))?;
            let t: f64 = t.parse().with_context(|| format!("bad theta `{t}`"))?;
            let p: f64 = p.parse().with_context(|| format!("bad phi `{p}`"))?;
            let (st, ct) = (t / 2.0).sin_cos();
            (c(ct, 0.0), C64::from_polar(st, p))
        }
    };
    Ok(PureState::qubit("psi", a, b)?)
}

pub fn cmd_witness(a: &WitnessArgs) -> Result<(Table, RunReport)> {
    let u0 = parse_gates(&a.u0)?;
    let u1 = parse_gates(&a.u1)?;
    let psi = parse_state(&a.state)?;
    let mut phases = match &a.phi {
        Some(list) => list.clone(),
        None => (0..a.phases)
            .map(|k| TAU * k as f64 / a.phases as f64)
            .collect(),
    };
    phases.sort_by(f64::total_cmp);
    let scan = phase_scan(&u0, &u1, &psi, &phases)?;
    let mode = match a.shots {
        Some(shots) => WitnessMode::Sampled { shots },
        None => WitnessMode::Exact,
    };
    let mut rng: TrialRng = trial_rng(a.seed.seed, 0);
    let w = witness(&u0, &u1, &psi, mode, &mut rng)?;

    let mut t = Table::new(
        "witness/v1",
        &[
            "row", "phi", "p_plus", "p_minus", "re_a", "im_a", "f_state", "shots",
        ],
    );
    let blank = String::new;
    for ((phi, p), m) in scan.phases.iter().zip(&scan.p_plus).zip(&scan.p_minus) {
        t.push(vec![
            "scan".into(),
            num(*phi),
            num(*p),
            num(*m),
            blank(),
            blank(),
            blank(),
            blank(),
        ]);
    }
    t.push(vec![
        "summary".into(),
        blank(),
        blank(),
        blank(),
        num(w.overlap.re),
        num(w.overlap.im),
        num(w.f_state),
        w.shots.to_string(),
    ]);
    let r = report(
        "witness",
        a.shots.map(|_| a.seed.seed),
        json!({"u0": a.u0, "u1": a.u1, "state": a.state, "phases": phases, "shots": a.shots}),
    );
    Ok((t, r))
}

pub fn cmd_transfer(a: &TransferArgs) -> Result<(Table, RunReport)> {
    let (basis, name) = match a.basis {
        BasisArg::None => (TransferBasis::None, "none"),
        BasisArg::X => (TransferBasis::X, "x"),
        BasisArg::Z => (TransferBasis::Z, "z"),
    };
    let res = entanglement_transfer::<TrialRng>(basis, None)?;
    let mut t = Table::new(
        "transfer/v1",
        &[
            "row",
            "basis",
            "bit_a",
            "bit_b",
            "probability",
            "corrected",
            "nuclear_fidelity",
        ],
    );
    for o in &res.outcomes {
        t.push(vec![
            "outcome".into(),
            name.into(),
            o.bit_a.to_string(),
            o.bit_b.to_string(),
            num(o.probability),
            o.corrected.to_string(),
            num(o.nuclear_fidelity),
        ]);
    }
    t.push(vec![
        "marginal".into(),
        name.into(),
        String::new(),
        String::new(),
        num(1.0),
        String::new(),
        num(res.marginal_fidelity),
    ]);
    Ok((t, report("transfer", None, json!({"basis": name}))))
}

/// `START:STOP:STEP` (inclusive, computed by index) or a comma list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let parse = |p: &str| -> Result<f64> {
        p.trim()
            .parse::<f64>()
            .with_context(|| format!("bad number `{p}`"))
    };
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (parse(start)?, parse(stop)?, parse(step)?);
            let valid = step > 0.0 && stop >= start;
            if !valid {
                bail!("range needs STEP > 0 and STOP ≥ START");
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| start + i as f64 * step).collect())
        }
        [_] => s.split(',').map(parse).collect(),
        _ => bail!("expected START:STOP:STEP or a comma-separated list"),
    }
}

pub fn cmd_throughput(a: &ThroughputArgs) -> Result<(Table, RunReport)> {
    let taus = parse_grid(&a.tau_grid)?;
    let template = TimingParams::with_fixed(a.fixed, 0.0, 1, a.electrons);
    let points = sweep(&template, &taus, &a.r_grid)?;
    let mut t = Table::new(
        "throughput/v1",
        &["tau_reset_s", "r", "R_rounds_per_s", "R_node_rounds_per_s"],
    );
    for p in &points {
        t.push(vec![
            num(p.tau_reset),
            p.r.to_string(),
            num(p.rate),
            num(p.node_rate),
        ]);
    }
    let r = report(
        "throughput",
        None,
        json!({"fixed": a.fixed, "tau_grid": taus, "r_grid": a.r_grid, "electrons": a.electrons}),
    );
    Ok((t, r))
}
