//! Stroboscopic evolution: matrix exponentials, Floquet operators,
//! quasienergy spectra, and protocol runners.
//!
//! One drive period is two half-period kicks, `U = exp(−iH₂)·exp(−iH₁)`
//! (ħ = 1, each half-period lasts unit time). Quasienergies are the phases
//! `εT = −arg λ` of the Floquet eigenvalues, reported on the branch (−π, π]
//! so the two flavors of protected edge mode sit at 0 and π.
//!
//! Protocol runs exponentiate `H₁` once and rebuild only the second-half
//! propagator as the schedule's couplings move. That propagator is assembled
//! per connected component of the instantaneous bond graph — schedules spend
//! most of their time with the lattice split into small disconnected pieces,
//! so exponentiating the pieces (and caching them for as long as φ holds
//! still) is much cheaper than exponentiating the full lattice every period.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Eigh, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lattice::{HoppingMatrix, ModelContext};
use crate::protocols::Protocol;

/// Single-excitation wavefunction over flat site indices.
pub type State = Array1<C64>;

/// ⟨a|b⟩ with dimension check.
pub fn overlap(a: &State, b: &State) -> Result<C64> {
    if a.len() != b.len() {
        return Err(Error::contract(format!(
            "overlap of states with dimensions {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// |⟨a|b⟩|.
pub fn fidelity(a: &State, b: &State) -> Result<f64> {
    Ok(overlap(a, b)?.norm())
}

pub fn norm(a: &State) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `exp(−i·scale·H)` for Hermitian `H`, via eigendecomposition.
pub fn hermitian_expm(h: &HoppingMatrix, scale: f64) -> Result<Array2<C64>> {
    expm_dense(h.matrix(), scale)
}

fn expm_dense(h: &Array2<C64>, scale: f64) -> Result<Array2<C64>> {
    // eigh hands the row-major buffer straight to LAPACK, which reads it
    // column-major: the returned vectors diagonalize Hᵀ = conj(H), not H.
    // Conjugating them recovers the true eigenvectors (same real spectrum).
    let (evals, vecs) = h.eigh(UPLO::Lower)?;
    let vecs = vecs.mapv(|z| z.conj());
    let phases: Array1<C64> = evals.mapv(|e| C64::new(0.0, -scale * e).exp());
    let mut weighted = vecs.clone();
    for (k, col) in weighted.columns_mut().into_iter().enumerate() {
        let p = phases[k];
        let mut col = col;
        col.mapv_inplace(|z| z * p);
    }
    let vdag = vecs.t().mapv(|z| z.conj());
    Ok(weighted.dot(&vdag))
}

/// Which operator ordering a Floquet operator uses. Both give the same
/// quasienergy spectrum (they differ by a similarity transform); the
/// symmetric frame makes chiral symmetry manifest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// `exp(−iH₂)·exp(−iH₁)`.
    Canonical,
    /// `exp(−iH₂/2)·exp(−iH₁/2)·exp(−iH₁/2)·exp(−iH₂/2)`.
    Symmetric,
}

/// One-period Floquet operator of a frozen context.
pub fn floquet_operator(ctx: &ModelContext, frame: Frame) -> Result<Array2<C64>> {
    let h1 = ctx.h1_matrix()?;
    let h2 = ctx.h2_matrix()?;
    match frame {
        Frame::Canonical => {
            let u1 = hermitian_expm(&h1, 1.0)?;
            let u2 = hermitian_expm(&h2, 1.0)?;
            Ok(u2.dot(&u1))
        }
        Frame::Symmetric => {
            let u1h = hermitian_expm(&h1, 0.5)?;
            let u2h = hermitian_expm(&h2, 0.5)?;
            Ok(u2h.dot(&u1h).dot(&u1h).dot(&u2h))
        }
    }
}

/// Largest element of |U†U − 1|; zero for a perfect unitary.
pub fn unitarity_defect(u: &Array2<C64>) -> f64 {
    let n = u.nrows();
    let udag = u.t().mapv(|z| z.conj());
    let prod = udag.dot(u);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((prod[[i, j]] - expect).norm());
        }
    }
    worst
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Quasienergies εT ∈ (−π, π], ascending.
    pub phases: Vec<f64>,
    /// Eigenvectors as columns, ordered like `phases` (when requested).
    pub vectors: Option<Array2<C64>>,
}

/// Quasienergy spectrum of a one-period operator. Rejects matrices that are
/// not unitary to 1e-8 — a non-unitary input means an assembly bug upstream,
/// not a physics result.
pub fn quasienergy_spectrum(u: &Array2<C64>, with_vectors: bool) -> Result<SpectrumResult> {
    if u.nrows() != u.ncols() {
        return Err(Error::contract("Floquet operator must be square".to_string()));
    }
    let defect = unitarity_defect(u);
    if defect > 1e-8 {
        return Err(Error::contract(format!(
            "operator is not unitary: ‖U†U − 1‖_max = {defect:.3e}"
        )));
    }
    let (evals, vecs) = u.eig()?;
    let mut order: Vec<usize> = (0..evals.len()).collect();
    let phase_of = |idx: usize| -> f64 {
        let mut p = -evals[idx].arg();
        // arg ∈ (−π, π] makes −arg ∈ [−π, π); fold the closed end to +π
        if p <= -std::f64::consts::PI {
            p = std::f64::consts::PI;
        }
        p
    };
    order.sort_by(|&a, &b| phase_of(a).partial_cmp(&phase_of(b)).unwrap());
    let phases: Vec<f64> = order.iter().map(|&i| phase_of(i)).collect();
    let vectors = if with_vectors {
        let n = u.nrows();
        let mut v = Array2::<C64>::zeros((n, n));
        for (new_col, &old_col) in order.iter().enumerate() {
            v.column_mut(new_col).assign(&vecs.column(old_col));
        }
        Some(v)
    } else {
        None
    };
    Ok(SpectrumResult { phases, vectors })
}

/// Distance from a quasienergy to the nearest of 0 and π, modulo 2π.
pub fn mode_distance(phase: f64) -> f64 {
    let d0 = phase.abs();
    let dpi = std::f64::consts::PI - phase.abs();
    d0.min(dpi)
}

/// Count quasienergies within `tol` of 0 and of π.
pub fn mode_counts(phases: &[f64], tol: f64) -> (usize, usize) {
    let zero = phases.iter().filter(|p| p.abs() < tol).count();
    let pi = phases.iter().filter(|p| (std::f64::consts::PI - p.abs()).abs() < tol).count();
    (zero, pi)
}

/// Bulk gap: drop the expected number of protected modes (those nearest 0,
/// then those nearest π) and return the smallest remaining distance to
/// {0, π}. Infinite when nothing remains.
pub fn min_mode_gap(phases: &[f64], expected_zero: usize, expected_pi: usize) -> f64 {
    let n = phases.len();
    let mut dropped = vec![false; n];
    let mut by_zero: Vec<usize> = (0..n).collect();
    by_zero.sort_by(|&a, &b| phases[a].abs().partial_cmp(&phases[b].abs()).unwrap());
    for &i in by_zero.iter().take(expected_zero) {
        dropped[i] = true;
    }
    let mut by_pi: Vec<usize> = (0..n).filter(|&i| !dropped[i]).collect();
    by_pi.sort_by(|&a, &b| {
        let da = std::f64::consts::PI - phases[a].abs();
        let db = std::f64::consts::PI - phases[b].abs();
        da.partial_cmp(&db).unwrap()
    });
    for &i in by_pi.iter().take(expected_pi) {
        dropped[i] = true;
    }
    (0..n)
        .filter(|&i| !dropped[i])
        .map(|i| mode_distance(phases[i]))
        .fold(f64::INFINITY, f64::min)
}

// ---------------------------------------------------------------------------
// Component-split propagator
// ---------------------------------------------------------------------------

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

struct Component {
    sites: Vec<usize>,
    u: Array2<C64>,
}

/// `exp(−i·scale·H)` applied blockwise over the connected components of the
/// bond graph. Sites touched by no (nonzero) bond are left untouched — their
/// block is the identity.
pub struct ComponentPropagator {
    n: usize,
    components: Vec<Component>,
}

impl ComponentPropagator {
    pub fn build(n: usize, elems: &[(usize, usize, C64)], scale: f64) -> Result<Self> {
        let mut uf = UnionFind::new(n);
        for &(p, q, amp) in elems {
            if p >= n || q >= n {
                return Err(Error::index(format!("bond ({p},{q}) outside dimension {n}")));
            }
            if p == q {
                return Err(Error::contract(format!("diagonal element at site {p}")));
            }
            if amp != C64::new(0.0, 0.0) {
                uf.union(p, q);
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for s in 0..n {
            groups.entry(uf.find(s)).or_default().push(s);
        }
        let mut components = Vec::new();
        for (_, sites) in groups {
            if sites.len() < 2 {
                continue;
            }
            let index_of: std::collections::HashMap<usize, usize> =
                sites.iter().enumerate().map(|(i, &s)| (s, i)).collect();
            let k = sites.len();
            let mut h = Array2::<C64>::zeros((k, k));
            for &(p, q, amp) in elems {
                if amp == C64::new(0.0, 0.0) {
                    continue;
                }
                if let (Some(&ip), Some(&iq)) = (index_of.get(&p), index_of.get(&q)) {
                    h[[ip, iq]] += -amp;
                    h[[iq, ip]] += -amp.conj();
                }
            }
            let u = expm_dense(&h, scale)?;
            components.push(Component { sites, u });
        }
        Ok(ComponentPropagator { n, components })
    }

    pub fn apply(&self, state: &State) -> Result<State> {
        if state.len() != self.n {
            return Err(Error::contract(format!(
                "state dimension {} does not match propagator dimension {}",
                state.len(),
                self.n
            )));
        }
        let mut out = state.clone();
        for comp in &self.components {
            let x: Array1<C64> = comp.sites.iter().map(|&s| state[s]).collect();
            let y = comp.u.dot(&x);
            for (i, &s) in comp.sites.iter().enumerate() {
                out[s] = y[i];
            }
        }
        Ok(out)
    }

    /// Full dense matrix (identity off the components).
    pub fn dense(&self) -> Array2<C64> {
        let mut m = Array2::<C64>::eye(self.n);
        for comp in &self.components {
            for (a, &sa) in comp.sites.iter().enumerate() {
                for (b, &sb) in comp.sites.iter().enumerate() {
                    m[[sa, sb]] = comp.u[[a, b]];
                }
            }
        }
        m
    }
}

// ---------------------------------------------------------------------------
// Protocol evolution
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default)]
pub struct TraceOptions {
    /// Named states to track overlaps against.
    pub references: Vec<(String, State)>,
    /// Record a row every this many periods (0 ⇒ only the final period).
    pub record_every: usize,
    /// Sample the instantaneous quasienergy spectrum every this many periods.
    pub spectra_every: Option<usize>,
    /// Protected-mode counts excluded from the bulk gap.
    pub expected_zero_modes: usize,
    pub expected_pi_modes: usize,
}

impl TraceOptions {
    pub fn silent() -> Self {
        TraceOptions { record_every: 0, expected_zero_modes: 2, expected_pi_modes: 2, ..Default::default() }
    }

    pub fn with_defaults() -> Self {
        TraceOptions { record_every: 1, expected_zero_modes: 2, expected_pi_modes: 2, ..Default::default() }
    }
}

#[derive(Debug, Clone)]
pub struct TraceRecord {
    /// Global period index, 1-based (state after this many periods).
    pub period: usize,
    /// Schedule step the period belongs to (0-based).
    pub step: usize,
    /// One ⟨ref|ψ⟩ per reference, in `reference_names` order.
    pub overlaps: Vec<C64>,
    /// Instantaneous bulk gap, when spectra were sampled this period.
    pub min_gap_to_bulk: Option<f64>,
    pub norm: f64,
}

#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    pub reference_names: Vec<String>,
    pub records: Vec<TraceRecord>,
    pub final_state: State,
    pub total_periods: usize,
}

impl EvolutionTrace {
    /// CSV rows: `period, step, overlap_<name>_re, overlap_<name>_im, …,
    /// min_gap_to_bulk, norm`.
    pub fn to_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["period".to_string(), "step".to_string()];
        for name in &self.reference_names {
            header.push(format!("overlap_{name}_re"));
            header.push(format!("overlap_{name}_im"));
        }
        header.push("min_gap_to_bulk".to_string());
        header.push("norm".to_string());
        wtr.write_record(&header).map_err(|e| Error::backend(format!("csv: {e}")))?;
        for r in &self.records {
            let mut row = vec![r.period.to_string(), r.step.to_string()];
            for z in &r.overlaps {
                row.push(format!("{:.12e}", z.re));
                row.push(format!("{:.12e}", z.im));
            }
            row.push(r.min_gap_to_bulk.map_or(String::new(), |g| format!("{g:.12e}")));
            row.push(format!("{:.12e}", r.norm));
            wtr.write_record(&row).map_err(|e| Error::backend(format!("csv: {e}")))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Merged second-half bond elements at a given φ of a step: the step's ramps
/// replace matching base bonds (or append new ones), and every amplitude
/// picks up the context's disorder factor for its bond.
fn second_half_elements(
    ctx: &ModelContext,
    step: &crate::protocols::ScheduleStep,
    phi: f64,
) -> Vec<(usize, usize, C64)> {
    let mut elems: Vec<(crate::lattice::Bond, usize, usize, C64)> = ctx
        .h2_entries()
        .iter()
        .map(|e| (e.bond, e.p, e.q, e.amp))
        .collect();
    for ramp in &step.ramps {
        let amp = ramp.amplitude(phi);
        match elems.iter_mut().find(|(b, ..)| *b == ramp.bond) {
            Some(slot) => slot.3 = amp,
            None => elems.push((ramp.bond, ramp.p, ramp.q, amp)),
        }
    }
    elems
        .into_iter()
        .map(|(bond, p, q, amp)| (p, q, amp * ctx.bond_factor(&bond)))
        .collect()
}

/// Run a schedule from `psi0`, stroboscopically.
///
/// Per period: apply `exp(−iH₁)` (fixed for the whole run), then the
/// second-half propagator at the step's current φ. Initial states must be
/// normalized to 1e-12 — anything else indicates a caller bug.
pub fn evolve_protocol(
    ctx: &ModelContext,
    protocol: &Protocol,
    psi0: &State,
    opts: &TraceOptions,
) -> Result<EvolutionTrace> {
    protocol.validate()?;
    if psi0.len() != ctx.n_sites() {
        return Err(Error::contract(format!(
            "initial state dimension {} does not match lattice dimension {}",
            psi0.len(),
            ctx.n_sites()
        )));
    }
    if (norm(psi0) - 1.0).abs() > 1e-12 {
        return Err(Error::contract(format!(
            "initial state norm {} is not 1 (tolerance 1e-12)",
            norm(psi0)
        )));
    }
    let u1 = hermitian_expm(&ctx.h1_matrix()?, 1.0)?;
    let total = protocol.total_periods();
    let mut psi = psi0.clone();
    let mut records = Vec::new();
    let mut global_period = 0usize;
    for (step_idx, step) in protocol.steps.iter().enumerate() {
        let mut cached: Option<(usize, ComponentPropagator)> = None;
        for m in 0..step.periods {
            let tick = m / step.cadence.factor();
            if cached.as_ref().map(|(t, _)| *t) != Some(tick) {
                let elems = second_half_elements(ctx, step, step.phi_at(m));
                cached = Some((tick, ComponentPropagator::build(ctx.n_sites(), &elems, 1.0)?));
            }
            let (_, prop) = cached.as_ref().unwrap();
            psi = prop.apply(&u1.dot(&psi))?;
            global_period += 1;

            let is_final = global_period == total;
            let record_now = match opts.record_every {
                0 => is_final,
                k => global_period.is_multiple_of(k) || is_final,
            };
            let spectrum_now = opts
                .spectra_every
                .is_some_and(|k| k > 0 && (global_period.is_multiple_of(k) || is_final));
            if record_now || spectrum_now {
                let min_gap = if spectrum_now {
                    let u = prop.dense().dot(&u1);
                    let spec = quasienergy_spectrum(&u, false)?;
                    Some(min_mode_gap(&spec.phases, opts.expected_zero_modes, opts.expected_pi_modes))
                } else {
                    None
                };
                let overlaps = opts
                    .references
                    .iter()
                    .map(|(_, r)| overlap(r, &psi))
                    .collect::<Result<Vec<_>>>()?;
                records.push(TraceRecord {
                    period: global_period,
                    step: step_idx,
                    overlaps,
                    min_gap_to_bulk: min_gap,
                    norm: norm(&psi),
                });
            }
        }
    }
    Ok(EvolutionTrace {
        reference_names: opts.references.iter().map(|(n, _)| n.clone()).collect(),
        records,
        final_state: psi,
        total_periods: total,
    })
}

/// Second-half propagator of one schedule step at an explicit φ, with the
/// context's disorder folded in. Useful when the first half is shared and
/// only the ramped half changes tick to tick.
pub fn step_propagator(
    ctx: &ModelContext,
    step: &crate::protocols::ScheduleStep,
    phi: f64,
) -> Result<ComponentPropagator> {
    let elems = second_half_elements(ctx, step, phi);
    ComponentPropagator::build(ctx.n_sites(), &elems, 1.0)
}

/// Instantaneous one-period operator at period `m` of step `step_idx`
/// (dense; for spectra and eigenrelation checks).
pub fn protocol_operator(
    ctx: &ModelContext,
    protocol: &Protocol,
    step_idx: usize,
    m: usize,
) -> Result<Array2<C64>> {
    let step = protocol
        .steps
        .get(step_idx)
        .ok_or_else(|| Error::index(format!("step {step_idx} out of range")))?;
    let u1 = hermitian_expm(&ctx.h1_matrix()?, 1.0)?;
    Ok(step_propagator(ctx, step, step.phi_at(m))?.dense().dot(&u1))
}

/// Same, at an explicit φ rather than a period index.
pub fn protocol_operator_at(
    ctx: &ModelContext,
    protocol: &Protocol,
    step_idx: usize,
    phi: f64,
) -> Result<Array2<C64>> {
    let step = protocol
        .steps
        .get(step_idx)
        .ok_or_else(|| Error::index(format!("step {step_idx} out of range")))?;
    let u1 = hermitian_expm(&ctx.h1_matrix()?, 1.0)?;
    Ok(step_propagator(ctx, step, phi)?.dense().dot(&u1))
}

/// Continuous-time evolution with midpoint-frozen steps:
/// `ψ ← exp(−i·dt·H(t + dt/2))·ψ`, `n = round(t_total/dt)` uniform steps.
pub fn evolve_continuous<F>(h_of_t: F, t_total: f64, dt: f64, psi0: &State) -> Result<State>
where
    F: Fn(f64) -> Result<HoppingMatrix>,
{
    if !(dt > 0.0) || !(t_total > 0.0) {
        return Err(Error::config(format!("need dt > 0 and t_total > 0, got {dt}, {t_total}")));
    }
    if dt > t_total {
        return Err(Error::config(format!("dt = {dt} exceeds t_total = {t_total}")));
    }
    let n = (t_total / dt).round() as usize;
    let mut psi = psi0.clone();
    for k in 0..n {
        let h = h_of_t((k as f64 + 0.5) * dt)?;
        let u = hermitian_expm(&h, dt)?;
        psi = u.dot(&psi);
    }
    Ok(psi)
}
