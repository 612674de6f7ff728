//! `floq` — drive the simulator from the shell: phase diagrams, spectrum
//! traces, clean protocol runs, disorder sweeps, and paired comparisons.
//!
//! Every subcommand writes its tables under `--out` (CSV) plus a
//! `manifest.json` recording the invocation and headline numbers. Exit codes
//! distinguish failure classes: 2 bad configuration, 3 violated internal
//! contract, 4 critical-line refusal, 5 I/O, 1 anything else.

mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use floq::config::Config;
use floq::engine::{evolve_protocol, fidelity, floquet_operator, protocol_operator_at, Frame, TraceOptions};
use floq::error::{Error, Result};
use floq::experiments::{
    compare_protocols, disorder_sweep, min_gap_of, spectrum_trace, static_compare, ProtocolKind,
};
use floq::lattice::{build_context, Branch, ModelContext, YJunctionSpec};
use floq::protocols::{
    build_qst_stepwise, ideal_edge_mode, instantaneous_mode, transfer_target, ModeKind,
    TransferPhase,
};
use floq::topology::phase_diagram;
use manifest::{write_atomic, RunManifest};

#[derive(Parser)]
#[command(name = "floq", version, about = "Floquet edge-mode simulator", propagate_version = true)]
struct Cli {
    /// TOML configuration file (built-in defaults when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for CSV tables and the run manifest.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads for sweeps (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Zero,
    Pi,
}

impl From<ModeArg> for ModeKind {
    fn from(m: ModeArg) -> ModeKind {
        match m {
            ModeArg::Zero => ModeKind::Zero,
            ModeArg::Pi => ModeKind::Pi,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WhichProtocol {
    Transfer,
    Entangle,
}

#[derive(Subcommand)]
enum Cmd {
    /// Winding invariants over the coupling plane, numeric vs analytic.
    PhaseDiagram {
        /// Grid cells per axis.
        #[arg(long)]
        grid: Option<usize>,
        /// Margin kept clear of the axes and critical lines.
        #[arg(long)]
        margin: Option<f64>,
        /// Brillouin-zone samples for the winding integrals.
        #[arg(long)]
        k_points: Option<usize>,
    },
    /// Quasienergy gap along a protocol's frozen configurations.
    Spectrum {
        #[arg(long, value_enum, default_value = "transfer")]
        protocol: WhichProtocol,
        /// Diagonalize every Nth period.
        #[arg(long)]
        sample_every: Option<usize>,
    },
    /// One clean state transfer with a per-period trace.
    Transfer {
        #[arg(long)]
        periods_per_step: Option<usize>,
        /// Ramp all couplings in two long phases instead of cell by cell.
        #[arg(long)]
        direct: bool,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// One clean entangling run; reports the two end-mode weights.
    Entangle {
        #[arg(long)]
        periods_per_step: Option<usize>,
        /// Repeat the whole three-step sequence this many times.
        #[arg(long)]
        applications: Option<usize>,
    },
    /// Disorder-averaged fidelity over a grid of strengths W.
    DisorderSweep {
        #[arg(long, value_enum, default_value = "transfer")]
        protocol: WhichProtocol,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        realizations: Option<usize>,
    },
    /// Stepwise vs direct transfer on shared disorder draws.
    Compare {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        realizations: Option<usize>,
    },
    /// Static-chain sweep: original profile vs bond-by-bond schedule.
    Static {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        realizations: Option<usize>,
    },
    /// Check the closed-form edge modes against the assembled operators.
    OracleCheck,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::Contract(_) | Error::Index(_) => 3,
        Error::Boundary(_) | Error::GapClosing { .. } => 4,
        Error::Io(_) => 5,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<u8> {
    #[cfg(feature = "parallel")]
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    if cli.threads > 1 {
        eprintln!("note: built without the `parallel` feature; --threads ignored");
    }

    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    std::fs::create_dir_all(&cli.out)?;

    let t0 = Instant::now();
    let mut man = RunManifest::new(match &cli.cmd {
        Cmd::PhaseDiagram { .. } => "phase-diagram",
        Cmd::Spectrum { .. } => "spectrum",
        Cmd::Transfer { .. } => "transfer",
        Cmd::Entangle { .. } => "entangle",
        Cmd::DisorderSweep { .. } => "disorder-sweep",
        Cmd::Compare { .. } => "compare",
        Cmd::Static { .. } => "static",
        Cmd::OracleCheck => "oracle-check",
    });

    let code = match cli.cmd {
        Cmd::PhaseDiagram { grid, margin, k_points } => {
            cmd_phase_diagram(&cli.out, &cfg, grid, margin, k_points, &mut man)?
        }
        Cmd::Spectrum { protocol, sample_every } => {
            cmd_spectrum(&cli.out, &cfg, protocol, sample_every, &mut man)?
        }
        Cmd::Transfer { periods_per_step, direct, mode } => {
            cmd_transfer(&cli.out, &cfg, periods_per_step, direct, mode, &mut man)?
        }
        Cmd::Entangle { periods_per_step, applications } => {
            cmd_entangle(&cli.out, &cfg, periods_per_step, applications, &mut man)?
        }
        Cmd::DisorderSweep { protocol, seed, realizations } => {
            cmd_sweep(&cli.out, &cfg, protocol, seed, realizations, &mut man)?
        }
        Cmd::Compare { seed, realizations } => {
            cmd_compare(&cli.out, &cfg, seed, realizations, &mut man)?
        }
        Cmd::Static { seed, realizations } => {
            cmd_static(&cli.out, &cfg, seed, realizations, &mut man)?
        }
        Cmd::OracleCheck => cmd_oracle_check(&mut man)?,
    };

    man.elapsed_s = t0.elapsed().as_secs_f64();
    man.output("manifest.json");
    let json = serde_json::to_vec_pretty(&man)
        .map_err(|e| Error::backend(format!("manifest serialize: {e}")))?;
    write_atomic(&cli.out.join("manifest.json"), &json)?;
    Ok(code)
}

fn write_csv(
    out: &std::path::Path,
    name: &str,
    man: &mut RunManifest,
    fill: impl FnOnce(&mut Vec<u8>) -> Result<()>,
) -> Result<()> {
    let mut buf = Vec::new();
    fill(&mut buf)?;
    write_atomic(&out.join(name), &buf)?;
    man.output(name);
    Ok(())
}

fn cmd_phase_diagram(
    out: &std::path::Path,
    cfg: &Config,
    grid: Option<usize>,
    margin: Option<f64>,
    k_points: Option<usize>,
    man: &mut RunManifest,
) -> Result<u8> {
    let n = grid.unwrap_or(cfg.phase_diagram.grid);
    let margin = margin.unwrap_or(cfg.phase_diagram.margin);
    let m = k_points.unwrap_or(cfg.phase_diagram.k_points);
    let diagram = phase_diagram(n, margin, m)?;
    let (agree, scored) = diagram.agreement();
    write_csv(out, "phase_diagram.csv", man, |w| diagram.to_csv(w))?;
    man.record("cells", diagram.cells.len() as f64);
    man.record("scored", scored as f64);
    man.record("agreeing", agree as f64);
    println!(
        "{n}×{n} grid, {m} k-points: numeric and analytic invariants agree on {agree}/{scored} scored cells ({} flagged)",
        diagram.cells.len() - scored
    );
    Ok(if agree == scored { 0 } else { 1 })
}

fn build_protocol(
    cfg: &Config,
    which: WhichProtocol,
) -> Result<(YJunctionSpec, ModelContext, ProtocolKind)> {
    let spec = cfg.model_spec()?;
    let ctx = build_context(&spec)?;
    let kind = match which {
        WhichProtocol::Transfer => cfg.transfer.kind(),
        WhichProtocol::Entangle => cfg.entangle.kind(),
    };
    Ok((spec, ctx, kind))
}

fn cmd_spectrum(
    out: &std::path::Path,
    cfg: &Config,
    which: WhichProtocol,
    sample_every: Option<usize>,
    man: &mut RunManifest,
) -> Result<u8> {
    let (spec, ctx, kind) = build_protocol(cfg, which)?;
    let protocol = kind.build(&spec, &ctx.map)?;
    let s = &cfg.spectrum;
    let rows = spectrum_trace(
        &ctx,
        &protocol,
        sample_every.unwrap_or(s.sample_every),
        s.expected_zero_modes,
        s.expected_pi_modes,
        s.mode_tol,
    )?;
    write_csv(out, "spectrum.csv", man, |w| {
        use std::io::Write;
        writeln!(w, "period,min_gap,n_zero_modes,n_pi_modes")?;
        for r in &rows {
            writeln!(w, "{},{:.12e},{},{}", r.period, r.min_gap, r.n_zero_modes, r.n_pi_modes)?;
        }
        Ok(())
    })?;
    let floor = min_gap_of(&rows);
    man.record("min_gap", floor);
    man.record("samples", rows.len() as f64);
    println!(
        "{} configurations sampled over {} periods: min bulk gap {floor:.6}",
        rows.len(),
        protocol.total_periods()
    );
    Ok(0)
}

fn cmd_transfer(
    out: &std::path::Path,
    cfg: &Config,
    periods_per_step: Option<usize>,
    direct: bool,
    mode: Option<ModeArg>,
    man: &mut RunManifest,
) -> Result<u8> {
    let spec = cfg.model_spec()?;
    let ctx = build_context(&spec)?;
    let kind = if direct {
        ProtocolKind::TransferDirect { total_periods: cfg.transfer.direct_total_periods }
    } else {
        ProtocolKind::TransferStepwise {
            periods_per_step: periods_per_step.unwrap_or(cfg.transfer.periods_per_step),
        }
    };
    let mode: ModeKind = mode.map(Into::into).unwrap_or(cfg.transfer.target_mode);
    let protocol = kind.build(&spec, &ctx.map)?;
    let psi0 = kind.initial_state(&ctx, mode)?;
    let target = kind
        .target_state(&ctx, &protocol, mode)?
        .ok_or_else(|| Error::contract("transfer protocol lost its target".to_string()))?;
    let opts = TraceOptions {
        references: vec![("target".to_string(), target.clone())],
        record_every: 1,
        spectra_every: None,
        expected_zero_modes: cfg.spectrum.expected_zero_modes,
        expected_pi_modes: cfg.spectrum.expected_pi_modes,
    };
    let trace = evolve_protocol(&ctx, &protocol, &psi0, &opts)?;
    let f = fidelity(&target, &trace.final_state)?;
    write_csv(out, "trace.csv", man, |w| trace.to_csv(w))?;
    man.record("fidelity", f);
    man.record("total_periods", trace.total_periods as f64);
    println!(
        "{} transfer of the {mode:?} mode over {} periods: fidelity {f:.6} against the {} target",
        if direct { "direct" } else { "stepwise" },
        trace.total_periods,
        if spec.is_ideal() { "analytic" } else { "extracted" },
    );
    Ok(0)
}

fn cmd_entangle(
    out: &std::path::Path,
    cfg: &Config,
    periods_per_step: Option<usize>,
    applications: Option<usize>,
    man: &mut RunManifest,
) -> Result<u8> {
    let spec = cfg.model_spec()?;
    let ctx = build_context(&spec)?;
    let kind = ProtocolKind::Entangle {
        periods_per_step: periods_per_step.unwrap_or(cfg.entangle.periods_per_step),
    };
    let apps = applications.unwrap_or(cfg.entangle.applications).max(1);
    let protocol = kind.build(&spec, &ctx.map)?;
    let zero = ideal_edge_mode(&ctx.map, Branch::L, 1, ModeKind::Zero)?;
    let pi = ideal_edge_mode(&ctx.map, Branch::L, 1, ModeKind::Pi)?;

    let mut psi = kind.initial_state(&ctx, ModeKind::Zero)?;
    let (mut w0, mut wp) = (0.0, 0.0);
    for app in 1..=apps {
        let trace = evolve_protocol(&ctx, &protocol, &psi, &TraceOptions::silent())?;
        psi = trace.final_state;
        w0 = fidelity(&zero, &psi)?;
        wp = fidelity(&pi, &psi)?;
        println!("application {app}: |<0|psi>| = {w0:.6}, |<pi|psi>| = {wp:.6}");
    }
    write_csv(out, "entangle.csv", man, |w| {
        use std::io::Write;
        writeln!(w, "applications,weight_zero,weight_pi")?;
        writeln!(w, "{apps},{w0:.12e},{wp:.12e}")?;
        Ok(())
    })?;
    man.record("weight_zero", w0);
    man.record("weight_pi", wp);
    man.record("applications", apps as f64);
    Ok(0)
}

fn cmd_sweep(
    out: &std::path::Path,
    cfg: &Config,
    which: WhichProtocol,
    seed: Option<u64>,
    realizations: Option<usize>,
    man: &mut RunManifest,
) -> Result<u8> {
    let mut sweep = match which {
        WhichProtocol::Transfer => cfg.transfer_sweep()?,
        WhichProtocol::Entangle => cfg.entangle_sweep()?,
    };
    if let Some(s) = seed {
        sweep.master_seed = s;
    }
    if let Some(r) = realizations {
        sweep.realizations = r;
    }
    let res = disorder_sweep(&sweep)?;
    write_csv(out, "sweep.csv", man, |w| res.to_csv(w))?;
    if let Some(f) = res.clean_fidelity_vs_target {
        man.record("clean_fidelity", f);
        println!("clean fidelity vs target: {f:.6}");
    }
    for s in &res.stats {
        println!(
            "W = {:.3}: mean F = {:.6} ± {:.6} (min {:.6}, max {:.6}, n = {}{})",
            s.w,
            s.mean,
            s.std,
            s.min,
            s.max,
            s.n,
            if s.failed > 0 { format!(", {} failed", s.failed) } else { String::new() },
        );
    }
    if let (Some(first), Some(last)) = (res.stats.first(), res.stats.last()) {
        man.record("mean_at_w_min", first.mean);
        man.record("mean_at_w_max", last.mean);
    }
    man.record("master_seed", res.master_seed as f64);
    Ok(0)
}

fn cmd_compare(
    out: &std::path::Path,
    cfg: &Config,
    seed: Option<u64>,
    realizations: Option<usize>,
    man: &mut RunManifest,
) -> Result<u8> {
    let mut stepwise = cfg.transfer_sweep()?;
    stepwise.protocol =
        ProtocolKind::TransferStepwise { periods_per_step: cfg.transfer.periods_per_step };
    if let Some(s) = seed {
        stepwise.master_seed = s;
    }
    if let Some(r) = realizations {
        stepwise.realizations = r;
    }
    // match the direct budget to the stepwise schedule so the comparison is
    // periods-for-periods fair
    let total = stepwise
        .protocol
        .build(&stepwise.spec, &build_context(&stepwise.spec)?.map)?
        .total_periods();
    let mut direct = stepwise.clone();
    direct.protocol = ProtocolKind::TransferDirect { total_periods: total };
    let cmp = compare_protocols(&stepwise, &direct)?;
    write_csv(out, "compare.csv", man, |w| cmp.to_csv(w))?;
    let mut wins = 0usize;
    for p in &cmp.points {
        println!(
            "W = {:.3}: stepwise {:.6} vs direct {:.6} ({})",
            p.w,
            p.mean_a,
            p.mean_b,
            match p.verdict {
                1 => "stepwise ahead",
                -1 => "direct ahead",
                _ => "tie",
            }
        );
        if p.verdict >= 0 {
            wins += 1;
        }
    }
    man.record("total_periods", total as f64);
    man.record("w_points_stepwise_not_behind", wins as f64);
    man.record("w_points", cmp.points.len() as f64);
    Ok(0)
}

fn cmd_static(
    out: &std::path::Path,
    cfg: &Config,
    seed: Option<u64>,
    realizations: Option<usize>,
    man: &mut RunManifest,
) -> Result<u8> {
    let mut sweep = cfg.static_sweep()?;
    if let Some(s) = seed {
        sweep.master_seed = s;
    }
    if let Some(r) = realizations {
        sweep.realizations = r;
    }
    let res = static_compare(&sweep)?;
    write_csv(out, "static.csv", man, |w| res.to_csv(w))?;
    println!(
        "clean fidelity: improved {:.6}, original {:.6}; min gap: improved {:.4}g, original {:.4}g",
        res.clean_fidelity_improved,
        res.clean_fidelity_original,
        res.min_gap_improved,
        res.min_gap_original,
    );
    for p in &res.points {
        println!(
            "W = {:.3}: improved {:.6} vs original {:.6} ({})",
            p.w,
            p.mean_a,
            p.mean_b,
            match p.verdict {
                1 => "improved ahead",
                -1 => "original ahead",
                _ => "tie",
            }
        );
    }
    man.record("clean_fidelity_improved", res.clean_fidelity_improved);
    man.record("clean_fidelity_original", res.clean_fidelity_original);
    man.record("min_gap_improved", res.min_gap_improved);
    man.record("min_gap_original", res.min_gap_original);
    Ok(0)
}

/// Residual battery: the closed-form cell-1 modes against the base operator,
/// and the instantaneous walk modes against every frozen mid-step operator.
fn cmd_oracle_check(man: &mut RunManifest) -> Result<u8> {
    type Mat = floq::ndarray::Array2<floq::num_complex::Complex64>;
    type Vec1 = floq::ndarray::Array1<floq::num_complex::Complex64>;
    let residual = |u: &Mat, v: &Vec1, eig: f64| -> f64 {
        let uv = u.dot(v);
        uv.iter().zip(v.iter()).map(|(x, y)| (x - y * eig).norm_sqr()).sum::<f64>().sqrt()
    };

    let mut worst = 0.0f64;

    let spec = YJunctionSpec::ideal(5, 3, 2);
    let ctx = build_context(&spec)?;
    let u = floquet_operator(&ctx, Frame::Canonical)?;
    for (kind, eig) in [(ModeKind::Zero, 1.0), (ModeKind::Pi, -1.0)] {
        let v = ideal_edge_mode(&ctx.map, Branch::L, 1, kind)?;
        worst = worst.max(residual(&u, &v, eig));
    }

    let walk_spec = YJunctionSpec::ideal(3, 2, 2);
    let wctx = build_context(&walk_spec)?;
    let protocol = build_qst_stepwise(&walk_spec, &wctx.map, 40)?;
    let n1 = (walk_spec.n_l - 1) / 2;
    for step_idx in 0..protocol.steps.len() {
        let (phase, x) = if step_idx < n1 {
            (TransferPhase::LBranch, step_idx + 1)
        } else {
            (TransferPhase::RBranch, step_idx - n1 + 1)
        };
        for &phi in &[0.1, 0.7, std::f64::consts::FRAC_PI_4, 1.4] {
            let u = protocol_operator_at(&wctx, &protocol, step_idx, phi)?;
            for (kind, eig) in [(ModeKind::Zero, 1.0), (ModeKind::Pi, -1.0)] {
                let v = instantaneous_mode(&wctx.map, phase, x, phi, kind)?;
                worst = worst.max(residual(&u, &v, eig));
            }
        }
    }

    // arrival sign: the transferred zero mode flips sign once per R cell
    let tgt = transfer_target(&walk_spec, &wctx.map, ModeKind::Zero)?;
    let psi0 = ideal_edge_mode(&wctx.map, Branch::L, 1, ModeKind::Zero)?;
    let trace = evolve_protocol(&wctx, &protocol, &psi0, &TraceOptions::silent())?;
    let f = fidelity(&tgt, &trace.final_state)?;

    man.record("max_residual", worst);
    man.record("transfer_fidelity", f);
    println!("max eigenrelation residual: {worst:.3e}");
    println!("signed transfer fidelity at 40 periods/step: {f:.6}");
    Ok(if worst < 1e-8 { 0 } else { 1 })
}
