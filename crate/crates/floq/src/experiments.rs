//! Disorder Monte-Carlo sweeps, spectrum traces along protocols, and paired
//! protocol comparisons.
//!
//! A sweep runs one protocol over a grid of disorder strengths `W`, many
//! realizations each, and reports fidelity statistics per `W`. The fidelity
//! reference is the clean run's final state (the `W = 0` evolution of the
//! same protocol); the clean run's own fidelity against the analytic
//! transferred target is reported separately. Per-realization seeds derive
//! from `(master seed, W index, realization index)` through a fixed
//! splittable scheme, so any subset of the sweep is independently
//! reproducible and paired comparisons can share draws realization by
//! realization.
//!
//! Statistics use Welford's online algorithm, which keeps the `W = 0` column
//! exact: identical inputs give mean = the common value and std = 0, with no
//! accumulation rounding.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{
    self, fidelity, hermitian_expm, min_mode_gap, mode_counts, quasienergy_spectrum, overlap,
    ComponentPropagator, State, TraceOptions,
};
use crate::error::{Error, Result};
use crate::lattice::{
    build_context, Branch, DisorderFamilies, DisorderRealization, DisorderSpec, ModelContext,
    SiteId, SiteMap, Sub, YJunctionSpec,
};
use crate::protocols::{
    basis_state, build_entangle_protocol, build_qst_direct, build_qst_stepwise, ideal_edge_mode,
    transfer_target, ModeKind, Protocol, StaticProtocol,
};

/// SplitMix64 finalizer: the bijective mixing round used for seed derivation.
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-realization RNG seed from (master seed, W index, realization index):
/// two SplitMix64 rounds folding in each coordinate against a fixed salt.
/// Stable across versions — recorded results stay reproducible.
pub fn derive_seed(master: u64, w_index: usize, realization: usize) -> u64 {
    let a = splitmix64(master ^ splitmix64(w_index as u64 ^ 0xA076_1D64_78BD_642F));
    splitmix64(a ^ splitmix64(realization as u64 ^ 0xE703_7ED1_A0B4_28DB))
}

/// FNV-1a 64-bit hash, used to fingerprint configurations in output
/// provenance (stability matters more than collision resistance here).
pub fn fnv1a_64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn digest_of<T: Serialize>(value: &T) -> Result<u64> {
    let json = serde_json::to_string(value)
        .map_err(|e| Error::backend(format!("config serialization: {e}")))?;
    Ok(fnv1a_64(json.as_bytes()))
}

/// Which schedule a sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProtocolKind {
    TransferStepwise { periods_per_step: usize },
    TransferDirect { total_periods: usize },
    Entangle { periods_per_step: usize },
}

impl ProtocolKind {
    pub fn build(&self, spec: &YJunctionSpec, map: &SiteMap) -> Result<Protocol> {
        match *self {
            ProtocolKind::TransferStepwise { periods_per_step } => {
                build_qst_stepwise(spec, map, periods_per_step)
            }
            ProtocolKind::TransferDirect { total_periods } => {
                build_qst_direct(spec, map, total_periods)
            }
            ProtocolKind::Entangle { periods_per_step } => {
                build_entangle_protocol(spec, map, periods_per_step)
            }
        }
    }

    /// Starting state: transfers launch the requested edge mode at the `L`
    /// end (the exact numeric mode when couplings are off the ideal point);
    /// the entangling sequence starts from the bare excited first qubit.
    pub fn initial_state(
        &self,
        ctx: &ModelContext,
        mode: ModeKind,
    ) -> Result<State> {
        match self {
            ProtocolKind::Entangle { .. } => {
                basis_state(&ctx.map, SiteId::new(Branch::L, 1, Sub::A))
            }
            _ => {
                if ctx.spec.is_ideal() {
                    ideal_edge_mode(&ctx.map, Branch::L, 1, mode)
                } else {
                    let u = engine::floquet_operator(ctx, engine::Frame::Canonical)?;
                    extract_end_mode(&ctx.map, &u, Branch::L, 1, mode)
                }
            }
        }
    }

    /// Analytic/exact final state, when the protocol has one (transfers).
    pub fn target_state(
        &self,
        ctx: &ModelContext,
        protocol: &Protocol,
        mode: ModeKind,
    ) -> Result<Option<State>> {
        match self {
            ProtocolKind::Entangle { .. } => Ok(None),
            _ => {
                if ctx.spec.is_ideal() {
                    Ok(Some(transfer_target(&ctx.spec, &ctx.map, mode)?))
                } else {
                    let u = final_configuration_operator(ctx, protocol)?;
                    Ok(Some(extract_end_mode(
                        &ctx.map,
                        &u,
                        Branch::R,
                        ctx.spec.n_r,
                        mode,
                    )?))
                }
            }
        }
    }
}

/// One-period operator of the configuration a protocol ends in (its last
/// step's ramps pinned at their exact end values).
pub fn final_configuration_operator(ctx: &ModelContext, protocol: &Protocol) -> Result<Array2<C64>> {
    let last = protocol
        .steps
        .last()
        .ok_or_else(|| Error::config("protocol has no steps".to_string()))?;
    let pinned = crate::protocols::ScheduleStep {
        label: "final".to_string(),
        periods: last.cadence.factor(),
        cadence: last.cadence,
        ramps: last.ramps.iter().map(|r| r.pinned()).collect(),
    };
    let u1 = hermitian_expm(&ctx.h1_matrix()?, 1.0)?;
    let prop = engine::step_propagator(ctx, &pinned, 0.0)?;
    Ok(prop.dense().dot(&u1))
}

/// Half-width of the quasienergy window used to collect the edge-mode
/// eigenspace around 0 or π when extracting end modes numerically.
pub const MODE_WINDOW: f64 = 0.3;

/// Numerically extract the 0/π edge mode of `u` localized on a branch-end
/// cell: project the ideal end-cell pattern onto the eigenspace of `u` whose
/// quasienergies lie within [`MODE_WINDOW`] of the target, and renormalize.
///
/// Projecting (rather than picking one eigenvector) keeps the result well
/// defined when end modes on different branches hybridize into a
/// near-degenerate pair — the projection re-forms the localized combination —
/// and fixes the gauge for free: `⟨p|Pp⟩ = ‖Pp‖² > 0`, so the result carries
/// the pattern's phase convention.
pub fn extract_end_mode(
    map: &SiteMap,
    u: &Array2<C64>,
    branch: Branch,
    cell: usize,
    kind: ModeKind,
) -> Result<State> {
    let spectrum = quasienergy_spectrum(u, true)?;
    let vectors = spectrum.vectors.as_ref().unwrap();
    let target = match kind {
        ModeKind::Zero => 0.0,
        ModeKind::Pi => std::f64::consts::PI,
    };
    let dist = |p: f64| -> f64 {
        let d = (p.abs() - target).abs();
        d.min(2.0 * std::f64::consts::PI - d)
    };
    let pattern = ideal_edge_mode(map, branch, cell, kind)?;
    // Eigenvectors of a unitary matrix are orthogonal, but re-orthonormalize
    // (modified Gram–Schmidt) to guard against drift in clustered eigenvalues.
    let mut basis: Vec<State> = Vec::new();
    let mut proj: State = State::zeros(pattern.len());
    for (i, &p) in spectrum.phases.iter().enumerate() {
        if dist(p) >= MODE_WINDOW {
            continue;
        }
        let mut q: State = vectors.column(i).to_owned();
        for e in &basis {
            let c = overlap(e, &q)?;
            q = q - e.mapv(|z| z * c);
        }
        let n = engine::norm(&q);
        if n < 1e-8 {
            continue;
        }
        q.mapv_inplace(|z| z / n);
        let c = overlap(&q, &pattern)?;
        proj = proj + q.mapv(|z| z * c);
        basis.push(q);
    }
    let n = engine::norm(&proj);
    if n < 0.5 {
        return Err(Error::contract(format!(
            "no {} mode localized on {:?} end cell {} (projection norm {:.3})",
            match kind {
                ModeKind::Zero => "zero-quasienergy",
                ModeKind::Pi => "pi-quasienergy",
            },
            branch,
            cell,
            n
        )));
    }
    Ok(proj.mapv(|z| z / n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub spec: YJunctionSpec,
    pub protocol: ProtocolKind,
    pub mode: ModeKind,
    pub w_grid: Vec<f64>,
    pub realizations: usize,
    pub master_seed: u64,
    pub families: DisorderFamilies,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.realizations == 0 {
            return Err(Error::config("need at least one realization per W".to_string()));
        }
        if self.w_grid.is_empty() {
            return Err(Error::config("W grid is empty".to_string()));
        }
        if self.w_grid.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::config("W grid must be nonnegative and finite".to_string()));
        }
        if self.w_grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::config("W grid must be ascending".to_string()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WStats {
    pub w: f64,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    /// Realizations that completed and entered the statistics.
    pub n: usize,
    /// Realizations that errored (excluded from the statistics).
    pub failed: usize,
}

/// Population statistics via Welford's recurrence (exact when all inputs are
/// identical: mean = the value, std = 0).
fn welford(w: f64, values: &[f64], failed: usize) -> WStats {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for (k, &x) in values.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (x - mean);
        min = min.min(x);
        max = max.max(x);
    }
    let n = values.len();
    WStats {
        w,
        mean,
        std: if n > 0 { (m2 / n as f64).sqrt() } else { 0.0 },
        min: if n > 0 { min } else { f64::NAN },
        max: if n > 0 { max } else { f64::NAN },
        n,
        failed,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub stats: Vec<WStats>,
    /// Clean run's fidelity against the analytic transferred target (absent
    /// for protocols without one).
    pub clean_fidelity_vs_target: Option<f64>,
    pub master_seed: u64,
    pub config_digest: u64,
}

impl SweepResult {
    /// CSV rows: `W, mean_F, std_F, min_F, max_F, n`.
    pub fn to_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["W", "mean_F", "std_F", "min_F", "max_F", "n"])
            .map_err(|e| Error::backend(format!("csv: {e}")))?;
        for s in &self.stats {
            wtr.write_record([
                format!("{:.12}", s.w),
                format!("{:.12e}", s.mean),
                format!("{:.12e}", s.std),
                format!("{:.12e}", s.min),
                format!("{:.12e}", s.max),
                s.n.to_string(),
            ])
            .map_err(|e| Error::backend(format!("csv: {e}")))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// The disorder inventory of a run: every base bond plus every bond the
/// protocol adds.
fn sweep_inventory(ctx: &ModelContext, protocol: &Protocol) -> Vec<crate::lattice::Bond> {
    let mut inv = ctx.bond_inventory();
    inv.extend(protocol.added_bonds());
    inv.sort_unstable();
    inv.dedup();
    inv
}

/// Run one protocol over the W grid, many seeded realizations per point.
///
/// Realizations are independent and run concurrently under the `parallel`
/// feature; aggregation walks them in index order either way, so the result
/// is bit-identical. A failing realization is counted, not fatal.
pub fn disorder_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let ctx = build_context(&cfg.spec)?;
    let protocol = cfg.protocol.build(&cfg.spec, &ctx.map)?;
    let psi0 = cfg.protocol.initial_state(&ctx, cfg.mode)?;
    let clean = engine::evolve_protocol(&ctx, &protocol, &psi0, &TraceOptions::silent())?;
    let psi_clean = clean.final_state;
    let clean_fidelity_vs_target = match cfg.protocol.target_state(&ctx, &protocol, cfg.mode)? {
        Some(t) => Some(fidelity(&t, &psi_clean)?),
        None => None,
    };
    let inventory = sweep_inventory(&ctx, &protocol);

    let mut stats = Vec::with_capacity(cfg.w_grid.len());
    for (wi, &w) in cfg.w_grid.iter().enumerate() {
        let indices: Vec<usize> = (0..cfg.realizations).collect();
        let outcomes = crate::parallel::par_map(&indices, |&r| -> Result<f64> {
            let seed = derive_seed(cfg.master_seed, wi, r);
            let dspec = DisorderSpec { w, families: cfg.families, seed };
            let realization = DisorderRealization::draw(dspec, inventory.iter().copied())?;
            let dctx = ctx.with_disorder(realization);
            let trace = engine::evolve_protocol(&dctx, &protocol, &psi0, &TraceOptions::silent())?;
            fidelity(&psi_clean, &trace.final_state)
        });
        let mut values = Vec::with_capacity(cfg.realizations);
        let mut failed = 0usize;
        for outcome in outcomes {
            match outcome {
                Ok(f) => values.push(f),
                Err(_) => failed += 1,
            }
        }
        stats.push(welford(w, &values, failed));
    }
    Ok(SweepResult {
        stats,
        clean_fidelity_vs_target,
        master_seed: cfg.master_seed,
        config_digest: digest_of(cfg)?,
    })
}

// ---------------------------------------------------------------------------
// Spectrum traces
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapTraceRow {
    pub period: usize,
    pub min_gap: f64,
    pub n_zero_modes: usize,
    pub n_pi_modes: usize,
}

/// Diagonalize the frozen-coupling one-period operator at sampled periods of
/// a protocol (no state is evolved). Protected-mode counts use `mode_tol`;
/// the bulk gap excludes `expected_zero + expected_pi` protected modes.
pub fn spectrum_trace(
    ctx: &ModelContext,
    protocol: &Protocol,
    sample_every: usize,
    expected_zero: usize,
    expected_pi: usize,
    mode_tol: f64,
) -> Result<Vec<GapTraceRow>> {
    if sample_every == 0 {
        return Err(Error::config("sample_every must be ≥ 1".to_string()));
    }
    protocol.validate()?;
    let u1 = hermitian_expm(&ctx.h1_matrix()?, 1.0)?;
    let total = protocol.total_periods();
    let mut rows = Vec::new();
    let mut global = 0usize;
    for step in &protocol.steps {
        let mut cached_tick = usize::MAX;
        let mut cached_prop: Option<ComponentPropagator> = None;
        for m in 0..step.periods {
            global += 1;
            if !global.is_multiple_of(sample_every) && global != total {
                continue;
            }
            let tick = m / step.cadence.factor();
            if cached_prop.is_none() || cached_tick != tick {
                cached_prop = Some(engine::step_propagator(ctx, step, step.phi_at(m))?);
                cached_tick = tick;
            }
            let u = cached_prop.as_ref().unwrap().dense().dot(&u1);
            let spectrum = quasienergy_spectrum(&u, false)?;
            let (nz, np) = mode_counts(&spectrum.phases, mode_tol);
            rows.push(GapTraceRow {
                period: global,
                min_gap: min_mode_gap(&spectrum.phases, expected_zero, expected_pi),
                n_zero_modes: nz,
                n_pi_modes: np,
            });
        }
    }
    Ok(rows)
}

/// CSV rows: `sample_period, min_gap, n_zero_modes, n_pi_modes`.
pub fn gap_trace_to_csv<W: std::io::Write>(rows: &[GapTraceRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["sample_period", "min_gap", "n_zero_modes", "n_pi_modes"])
        .map_err(|e| Error::backend(format!("csv: {e}")))?;
    for r in rows {
        wtr.write_record([
            r.period.to_string(),
            format!("{:.12e}", r.min_gap),
            r.n_zero_modes.to_string(),
            r.n_pi_modes.to_string(),
        ])
        .map_err(|e| Error::backend(format!("csv: {e}")))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn min_gap_of(rows: &[GapTraceRow]) -> f64 {
    rows.iter().map(|r| r.min_gap).fold(f64::INFINITY, f64::min)
}

// ---------------------------------------------------------------------------
// Paired comparison
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparePoint {
    pub w: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    /// sign(mean_a − mean_b): +1, 0, or −1.
    pub verdict: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareResult {
    pub a: SweepResult,
    pub b: SweepResult,
    pub points: Vec<ComparePoint>,
}

impl CompareResult {
    /// CSV rows: `W, mean_a, mean_b, delta, verdict`.
    pub fn to_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["W", "mean_a", "mean_b", "delta", "verdict"])
            .map_err(|e| Error::backend(format!("csv: {e}")))?;
        for p in &self.points {
            wtr.write_record([
                format!("{:.12}", p.w),
                format!("{:.12e}", p.mean_a),
                format!("{:.12e}", p.mean_b),
                format!("{:.12e}", p.mean_a - p.mean_b),
                p.verdict.to_string(),
            ])
            .map_err(|e| Error::backend(format!("csv: {e}")))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Paired sweep of two protocols with shared disorder draws.
///
/// Both configs must agree on everything but the protocol, and the two
/// protocols must take equal total periods (equal wall time per realization,
/// which is what makes the comparison fair). Disorder draws are shared
/// because seeds derive identically and both protocols add the same bond
/// inventory on equal lattices.
pub fn compare_protocols(cfg_a: &SweepConfig, cfg_b: &SweepConfig) -> Result<CompareResult> {
    if cfg_a.spec != cfg_b.spec
        || cfg_a.w_grid != cfg_b.w_grid
        || cfg_a.realizations != cfg_b.realizations
        || cfg_a.master_seed != cfg_b.master_seed
        || cfg_a.families != cfg_b.families
        || cfg_a.mode != cfg_b.mode
    {
        return Err(Error::config(
            "paired comparison requires identical model, W grid, realizations, seed, families, and mode"
                .to_string(),
        ));
    }
    let map = SiteMap::new(cfg_a.spec.n_l, cfg_a.spec.n_m, cfg_a.spec.n_r);
    let total_a = cfg_a.protocol.build(&cfg_a.spec, &map)?.total_periods();
    let total_b = cfg_b.protocol.build(&cfg_b.spec, &map)?.total_periods();
    if total_a != total_b {
        return Err(Error::config(format!(
            "paired comparison requires equal total periods: {total_a} vs {total_b}"
        )));
    }
    let a = disorder_sweep(cfg_a)?;
    let b = disorder_sweep(cfg_b)?;
    let points = a
        .stats
        .iter()
        .zip(&b.stats)
        .map(|(sa, sb)| ComparePoint {
            w: sa.w,
            mean_a: sa.mean,
            mean_b: sb.mean,
            verdict: match sa.mean.partial_cmp(&sb.mean) {
                Some(std::cmp::Ordering::Greater) => 1,
                Some(std::cmp::Ordering::Less) => -1,
                _ => 0,
            },
        })
        .collect();
    Ok(CompareResult { a, b, points })
}

// ---------------------------------------------------------------------------
// Dynamical-phase read-out
// ---------------------------------------------------------------------------

/// Per-period amplitude ratio between the two qubits of the first `L` cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AlphaSample {
    /// ψ(B₁)/ψ(A₁) at this period.
    Defined { re: f64, im: f64 },
    /// The reference component ψ(A₁) vanished (|ψ(A₁)| < 1e-12).
    UndefinedReference,
}

/// Evolve freely under the base context and report, per period, the relative
/// amplitude α between the `(L,1,B)` and `(L,1,A)` components — the read-out
/// that identifies which entangled superposition a sequence produced.
pub fn dynamical_phase_trace(
    ctx: &ModelContext,
    psi0: &State,
    periods: usize,
) -> Result<Vec<AlphaSample>> {
    let a = ctx.map.resolve(SiteId::new(Branch::L, 1, Sub::A))?;
    let b = ctx.map.resolve(SiteId::new(Branch::L, 1, Sub::B))?;
    let u = engine::floquet_operator(ctx, engine::Frame::Canonical)?;
    let mut psi = psi0.clone();
    let mut out = Vec::with_capacity(periods + 1);
    let sample = |psi: &State| -> AlphaSample {
        if psi[a].norm() < 1e-12 {
            AlphaSample::UndefinedReference
        } else {
            let alpha = psi[b] / psi[a];
            AlphaSample::Defined { re: alpha.re, im: alpha.im }
        }
    };
    out.push(sample(&psi));
    for _ in 0..periods {
        psi = u.dot(&psi);
        out.push(sample(&psi));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Statically driven chain: paired original-vs-stepwise experiment
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticSweepConfig {
    pub original: StaticProtocol,
    pub improved: StaticProtocol,
    pub w_grid: Vec<f64>,
    pub realizations: usize,
    pub master_seed: u64,
    /// Instantaneous-spectrum samples for the gap profiles.
    pub gap_samples: usize,
}

impl StaticSweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.original.spec != self.improved.spec
            || self.original.t_total != self.improved.t_total
            || self.original.dt != self.improved.dt
        {
            return Err(Error::config(
                "paired static comparison requires equal chain, t_total, and dt".to_string(),
            ));
        }
        if self.realizations == 0 || self.w_grid.is_empty() {
            return Err(Error::config("need ≥ 1 realization and a nonempty W grid".to_string()));
        }
        if self.w_grid.windows(2).any(|w| w[0] > w[1]) || self.w_grid.iter().any(|w| *w < 0.0) {
            return Err(Error::config("W grid must be nonnegative ascending".to_string()));
        }
        Ok(())
    }
}

/// Static per-bond disorder: δ ~ U[−W/2, W/2] per bond, frozen for the whole
/// sweep duration, drawn in bond order.
pub fn static_disorder(n_bonds: usize, w: f64, seed: u64) -> Vec<f64> {
    if w == 0.0 {
        return vec![0.0; n_bonds];
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let dist = Uniform::new_inclusive(-0.5 * w, 0.5 * w);
    (0..n_bonds).map(|_| dist.sample(&mut rng)).collect()
}

fn run_static(protocol: &StaticProtocol, deltas: Option<&[f64]>) -> Result<State> {
    let psi0 = protocol.initial_state();
    engine::evolve_continuous(
        |t| protocol.hamiltonian(t, deltas),
        protocol.t_total,
        protocol.dt,
        &psi0,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticCompareResult {
    /// Paired per-W statistics (improved first, original second, shared
    /// draws).
    pub improved: Vec<WStats>,
    pub original: Vec<WStats>,
    pub points: Vec<ComparePoint>,
    /// Clean end-to-end transfer fidelities vs the target site.
    pub clean_fidelity_improved: f64,
    pub clean_fidelity_original: f64,
    /// Minimum instantaneous spectral gaps along each path (units of g).
    pub min_gap_improved: f64,
    pub min_gap_original: f64,
    pub master_seed: u64,
    pub config_digest: u64,
}

/// Paired sweep of the two static-chain sweeps with shared per-bond draws.
pub fn static_compare(cfg: &StaticSweepConfig) -> Result<StaticCompareResult> {
    cfg.validate()?;
    let n_bonds = cfg.original.spec.n_bonds();
    let target = cfg.original.target_state();
    let clean_improved = run_static(&cfg.improved, None)?;
    let clean_original = run_static(&cfg.original, None)?;
    let clean_fidelity_improved = fidelity(&target, &clean_improved)?;
    let clean_fidelity_original = fidelity(&target, &clean_original)?;

    let mut improved_stats = Vec::new();
    let mut original_stats = Vec::new();
    for (wi, &w) in cfg.w_grid.iter().enumerate() {
        let indices: Vec<usize> = (0..cfg.realizations).collect();
        let outcomes = crate::parallel::par_map(&indices, |&r| -> Result<(f64, f64)> {
            let deltas = static_disorder(n_bonds, w, derive_seed(cfg.master_seed, wi, r));
            let fi = fidelity(&clean_improved, &run_static(&cfg.improved, Some(&deltas))?)?;
            let fo = fidelity(&clean_original, &run_static(&cfg.original, Some(&deltas))?)?;
            Ok((fi, fo))
        });
        let mut vi = Vec::new();
        let mut vo = Vec::new();
        let mut failed = 0usize;
        for o in outcomes {
            match o {
                Ok((fi, fo)) => {
                    vi.push(fi);
                    vo.push(fo);
                }
                Err(_) => failed += 1,
            }
        }
        improved_stats.push(welford(w, &vi, failed));
        original_stats.push(welford(w, &vo, failed));
    }
    let points = improved_stats
        .iter()
        .zip(&original_stats)
        .map(|(si, so)| ComparePoint {
            w: si.w,
            mean_a: si.mean,
            mean_b: so.mean,
            verdict: match si.mean.partial_cmp(&so.mean) {
                Some(std::cmp::Ordering::Greater) => 1,
                Some(std::cmp::Ordering::Less) => -1,
                _ => 0,
            },
        })
        .collect();
    Ok(StaticCompareResult {
        improved: improved_stats,
        original: original_stats,
        points,
        clean_fidelity_improved,
        clean_fidelity_original,
        min_gap_improved: crate::protocols::static_gap_profile(&cfg.improved, cfg.gap_samples)?,
        min_gap_original: crate::protocols::static_gap_profile(&cfg.original, cfg.gap_samples)?,
        master_seed: cfg.master_seed,
        config_digest: digest_of(cfg)?,
    })
}

impl StaticCompareResult {
    /// CSV rows: `W, mean_improved, mean_original, delta, verdict`.
    pub fn to_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["W", "mean_improved", "mean_original", "delta", "verdict"])
            .map_err(|e| Error::backend(format!("csv: {e}")))?;
        for p in &self.points {
            wtr.write_record([
                format!("{:.12}", p.w),
                format!("{:.12e}", p.mean_a),
                format!("{:.12e}", p.mean_b),
                format!("{:.12e}", p.mean_a - p.mean_b),
                p.verdict.to_string(),
            ])
            .map_err(|e| Error::backend(format!("csv: {e}")))?;
        }
        wtr.flush()?;
        Ok(())
    }
}
