//! Drive schedules: ramped coupling programs for entangling and transferring
//! edge modes, closed-form edge eigenstates, and the statically driven
//! comparison chain.
//!
//! A [`Protocol`] is a list of [`ScheduleStep`]s. Within a step the couplings
//! named by its [`Ramp`]s sweep through a quarter-cycle parameterized by
//! φ ∈ (0, π/2): stroboscopic period `m` of a step with `periods` periods and
//! cadence factor `c` uses φ = (π/2)(⌊m/c⌋ + ½)/(periods/c). The half-offset
//! keeps every sampled configuration strictly between the step's endpoint
//! configurations (midpoint rule), which is what the adiabatic fidelity
//! converges against; endpoint values are still exact because each later step
//! re-pins finished ramps at their [`RampKind::end_value`].
//!
//! Builders produce three programs over the Y junction:
//! - [`build_entangle_protocol`]: three steps that split the left-edge zero/π
//!   pair into an entangled superposition across cells 1 and 3 of `L`.
//! - [`build_qst_stepwise`]: walk the edge pair from the `L` end through the
//!   junction and down `R`, one cell pair per step.
//! - [`build_qst_direct`]: the same endpoints reached in two global ramps.
//!
//! The statically driven chain ([`StaticChainSpec`]) is the non-Floquet
//! benchmark: a single topological chain whose dimerization angle is swept
//! either globally or bond-by-bond.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{
    AddedBond, Bond, Branch, Half, HoppingMatrix, SiteId, SiteMap, Sub, YJunctionSpec,
};

/// Shape of a coupling's dependence on the step parameter φ ∈ (0, π/2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RampKind {
    /// `sin φ`: grows 0 → 1.
    SinPhi,
    /// `cos φ`: shrinks 1 → 0.
    CosPhi,
    /// `cos² φ`: shrinks 1 → 0 with zero slope at the end.
    CosSqPhi,
    /// Constant 1 (used to pin finished ramps at their end values).
    Const,
}

impl RampKind {
    pub fn value(&self, phi: f64) -> f64 {
        match self {
            RampKind::SinPhi => phi.sin(),
            RampKind::CosPhi => phi.cos(),
            RampKind::CosSqPhi => phi.cos().powi(2),
            RampKind::Const => 1.0,
        }
    }

    /// Exact value at φ = π/2. `cos(π/2)` in floating point is ~6e-17, not 0;
    /// persistence must pin finished ramps at the exact limit or the residue
    /// keeps lattice components coupled that the schedule has disconnected.
    pub fn end_value(&self) -> f64 {
        match self {
            RampKind::SinPhi | RampKind::Const => 1.0,
            RampKind::CosPhi | RampKind::CosSqPhi => 0.0,
        }
    }
}

/// How often a step's φ advances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cadence {
    /// φ ticks once per stroboscopic period.
    EveryPeriod,
    /// φ ticks once per two periods (each configuration held for two periods).
    EveryOtherPeriod,
}

impl Cadence {
    pub fn factor(&self) -> usize {
        match self {
            Cadence::EveryPeriod => 1,
            Cadence::EveryOtherPeriod => 2,
        }
    }
}

/// One coupling assignment inside a step: the bond takes amplitude
/// `base × kind(φ)` in the second-half Hamiltonian, replacing the bond's
/// baseline amplitude if it already exists there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ramp {
    pub bond: Bond,
    /// Flat site indices in the bond's canonical orientation.
    pub p: usize,
    pub q: usize,
    pub base: C64,
    pub kind: RampKind,
}

impl Ramp {
    pub fn amplitude(&self, phi: f64) -> C64 {
        self.base * self.kind.value(phi)
    }

    /// The ramp frozen at its φ = π/2 endpoint.
    pub fn pinned(&self) -> Ramp {
        Ramp {
            base: self.base * self.kind.end_value(),
            kind: RampKind::Const,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub label: String,
    pub periods: usize,
    pub cadence: Cadence,
    pub ramps: Vec<Ramp>,
}

impl ScheduleStep {
    pub fn validate(&self) -> Result<()> {
        let c = self.cadence.factor();
        if self.periods == 0 || !self.periods.is_multiple_of(c) {
            return Err(Error::config(format!(
                "step '{}': {} periods not a positive multiple of cadence {c}",
                self.label, self.periods
            )));
        }
        Ok(())
    }

    pub fn n_ticks(&self) -> usize {
        self.periods / self.cadence.factor()
    }

    /// φ for stroboscopic period `m` (0-based) of this step.
    pub fn phi_at(&self, m: usize) -> f64 {
        let tick = m / self.cadence.factor();
        std::f64::consts::FRAC_PI_2 * (tick as f64 + 0.5) / self.n_ticks() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub name: String,
    pub steps: Vec<ScheduleStep>,
}

impl Protocol {
    /// An empty protocol is valid: it evolves nothing.
    pub fn validate(&self) -> Result<()> {
        for s in &self.steps {
            s.validate()?;
        }
        Ok(())
    }

    pub fn total_periods(&self) -> usize {
        self.steps.iter().map(|s| s.periods).sum()
    }

    /// Every protocol-added bond mentioned anywhere in the schedule, for
    /// disorder inventories.
    pub fn added_bonds(&self) -> Vec<Bond> {
        let mut out: Vec<Bond> = self
            .steps
            .iter()
            .flat_map(|s| s.ramps.iter().map(|r| r.bond))
            .filter(|b| matches!(b, Bond::Added(_)))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Carry every ramp of `prev` into the next step at its exact end value,
/// dropping those the next step re-declares.
fn persist(prev: &[Ramp], next: Vec<Ramp>) -> Vec<Ramp> {
    let mut out: Vec<Ramp> = prev
        .iter()
        .filter(|r| !next.iter().any(|n| n.bond == r.bond))
        .map(|r| r.pinned())
        .collect();
    out.extend(next);
    out
}

fn resolved(map: &SiteMap, bond: Bond, a: SiteId, b: SiteId, base: C64, kind: RampKind) -> Result<Ramp> {
    Ok(Ramp { bond, p: map.resolve(a)?, q: map.resolve(b)?, base, kind })
}

fn inter_l(map: &SiteMap, from_cell: usize, base: C64, kind: RampKind) -> Result<Ramp> {
    resolved(
        map,
        Bond::Inter { half: Half::Second, branch: Branch::L, from_cell },
        SiteId::new(Branch::L, from_cell, Sub::B),
        SiteId::new(Branch::L, from_cell + 1, Sub::A),
        base,
        kind,
    )
}

/// Three-step entangling sequence on the `L` end (requires `n_l ≥ 3`).
///
/// 1. Switch the cell-1/cell-2 coupling from the backbone inter bond to an
///    A₁–B₂ bridge: the edge pair rides out to cell 3 in superposition.
/// 2. Hand the bridge's weight to an A₂–A₃ bond (opposite sign, so the two
///    paths interfere correctly), freeing the cell-1/cell-2 backbone link.
/// 3. Retire both added bonds while restoring the backbone, at half cadence
///    so zero- and π-sector components recombine pairwise.
pub fn build_entangle_protocol(
    spec: &YJunctionSpec,
    map: &SiteMap,
    periods_per_step: usize,
) -> Result<Protocol> {
    spec.validate()?;
    if spec.n_l < 3 {
        return Err(Error::config(format!(
            "entangling sequence needs n_l ≥ 3 (got {})",
            spec.n_l
        )));
    }
    let j2 = spec.l.inter2;
    let ab = resolved(
        map,
        Bond::Added(AddedBond::EntangleAb),
        SiteId::new(Branch::L, 1, Sub::A),
        SiteId::new(Branch::L, 2, Sub::B),
        j2,
        RampKind::SinPhi,
    )?;
    let aa = resolved(
        map,
        Bond::Added(AddedBond::EntangleAa),
        SiteId::new(Branch::L, 2, Sub::A),
        SiteId::new(Branch::L, 3, Sub::A),
        -j2,
        RampKind::SinPhi,
    )?;

    let step1 = vec![inter_l(map, 2, j2, RampKind::CosPhi)?, ab];
    let step2 = persist(&step1, vec![inter_l(map, 1, j2, RampKind::CosPhi)?, aa]);
    let step3 = persist(
        &step2,
        vec![
            Ramp { kind: RampKind::CosSqPhi, ..ab },
            Ramp { kind: RampKind::CosSqPhi, ..aa },
            inter_l(map, 1, j2, RampKind::SinPhi)?,
            inter_l(map, 2, j2, RampKind::SinPhi)?,
        ],
    );

    let p = if periods_per_step.is_multiple_of(2) { periods_per_step } else { periods_per_step + 1 };
    Ok(Protocol {
        name: "entangle".to_string(),
        steps: vec![
            ScheduleStep { label: "bridge-out".into(), periods: periods_per_step, cadence: Cadence::EveryPeriod, ramps: step1 },
            ScheduleStep { label: "swap-to-aa".into(), periods: periods_per_step, cadence: Cadence::EveryPeriod, ramps: step2 },
            ScheduleStep { label: "recombine".into(), periods: p, cadence: Cadence::EveryOtherPeriod, ramps: step3 },
        ],
    })
}

/// Cell-pair-at-a-time transfer from the `L` end to the `R` end.
///
/// Phase I (x = 1 ‥ (n_l−1)/2): replace the backbone link after cell 2x with
/// an A_{2x−1}–B_{2x} bridge, moving the edge pair two cells junction-ward.
/// Phase II (x = 1 ‥ n_r): grow an A_{x−1}–B_x bridge down the `R` branch
/// (cell 0 = junction), moving it one cell per step. Every finished ramp is
/// pinned at its exact end value for all later steps.
pub fn build_qst_stepwise(
    spec: &YJunctionSpec,
    map: &SiteMap,
    periods_per_step: usize,
) -> Result<Protocol> {
    spec.validate()?;
    let j2 = spec.l.inter2;
    let mut steps: Vec<ScheduleStep> = Vec::new();
    let mut prev: Vec<Ramp> = Vec::new();
    for x in 1..=(spec.n_l - 1) / 2 {
        let bridge = resolved(
            map,
            Bond::Added(AddedBond::TransferL { x }),
            SiteId::new(Branch::L, 2 * x - 1, Sub::A),
            SiteId::new(Branch::L, 2 * x, Sub::B),
            j2,
            RampKind::SinPhi,
        )?;
        let ramps = persist(&prev, vec![bridge, inter_l(map, 2 * x, j2, RampKind::CosPhi)?]);
        prev = ramps.clone();
        steps.push(ScheduleStep {
            label: format!("l-walk-{x}"),
            periods: periods_per_step,
            cadence: Cadence::EveryPeriod,
            ramps,
        });
    }
    for x in 1..=spec.n_r {
        let bridge = resolved(
            map,
            Bond::Added(AddedBond::TransferR { x }),
            SiteId::new(Branch::R, x - 1, Sub::A),
            SiteId::new(Branch::R, x, Sub::B),
            j2,
            RampKind::SinPhi,
        )?;
        let ramps = persist(&prev, vec![bridge]);
        prev = ramps.clone();
        steps.push(ScheduleStep {
            label: format!("r-walk-{x}"),
            periods: periods_per_step,
            cadence: Cadence::EveryPeriod,
            ramps,
        });
    }
    Ok(Protocol { name: "transfer-stepwise".to_string(), steps })
}

/// Same endpoints as [`build_qst_stepwise`] but in two global ramps: first
/// all `L`-branch bridges together, then all `R`-branch bridges together.
pub fn build_qst_direct(
    spec: &YJunctionSpec,
    map: &SiteMap,
    total_periods: usize,
) -> Result<Protocol> {
    spec.validate()?;
    if !total_periods.is_multiple_of(2) {
        return Err(Error::config(format!(
            "direct transfer splits its budget in two equal phases; {total_periods} periods is odd"
        )));
    }
    let j2 = spec.l.inter2;
    let mut phase1: Vec<Ramp> = Vec::new();
    for x in 1..=(spec.n_l - 1) / 2 {
        phase1.push(resolved(
            map,
            Bond::Added(AddedBond::TransferL { x }),
            SiteId::new(Branch::L, 2 * x - 1, Sub::A),
            SiteId::new(Branch::L, 2 * x, Sub::B),
            j2,
            RampKind::SinPhi,
        )?);
        phase1.push(inter_l(map, 2 * x, j2, RampKind::CosPhi)?);
    }
    let mut bridges_r: Vec<Ramp> = Vec::new();
    for x in 1..=spec.n_r {
        bridges_r.push(resolved(
            map,
            Bond::Added(AddedBond::TransferR { x }),
            SiteId::new(Branch::R, x - 1, Sub::A),
            SiteId::new(Branch::R, x, Sub::B),
            j2,
            RampKind::SinPhi,
        )?);
    }
    let phase2 = persist(&phase1, bridges_r);
    let half = total_periods / 2;
    Ok(Protocol {
        name: "transfer-direct".to_string(),
        steps: vec![
            ScheduleStep { label: "l-sweep".into(), periods: half, cadence: Cadence::EveryPeriod, ramps: phase1 },
            ScheduleStep { label: "r-sweep".into(), periods: half, cadence: Cadence::EveryPeriod, ramps: phase2 },
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Zero,
    Pi,
}

/// Exact edge eigenstates of the ideal drive, localized on cell `cell` of a
/// branch end: the zero mode is `(|A⟩ − |B⟩)/√2`, the π mode `(|A⟩ + |B⟩)/√2`
/// (single-excitation amplitudes on the cell's two qubits).
pub fn ideal_edge_mode(map: &SiteMap, branch: Branch, cell: usize, kind: ModeKind) -> Result<Array1<C64>> {
    let a = map.resolve(SiteId::new(branch, cell, Sub::A))?;
    let b = map.resolve(SiteId::new(branch, cell, Sub::B))?;
    let mut v = Array1::<C64>::zeros(map.n_sites());
    let s = match kind {
        ModeKind::Zero => -1.0,
        ModeKind::Pi => 1.0,
    };
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    v[a] = C64::new(inv, 0.0);
    v[b] = C64::new(s * inv, 0.0);
    Ok(v)
}

/// A single-site basis state (one qubit excited).
pub fn basis_state(map: &SiteMap, site: SiteId) -> Result<Array1<C64>> {
    let mut v = Array1::<C64>::zeros(map.n_sites());
    v[map.resolve(site)?] = C64::new(1.0, 0.0);
    Ok(v)
}

/// Cell-pattern building block: `(|A⟩ ∓ |B⟩)/√2` on one cell. `minus = true`
/// gives the zero-mode pattern `(−)`, `false` the π-mode pattern `(+)`.
fn cell_pattern(map: &SiteMap, branch: Branch, cell: usize, minus: bool) -> Result<(usize, usize, f64)> {
    let a = map.resolve(SiteId::new(branch, cell, Sub::A))?;
    let b = map.resolve(SiteId::new(branch, cell, Sub::B))?;
    Ok((a, b, if minus { -1.0 } else { 1.0 }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransferPhase {
    /// Walking down `L`, two cells per step.
    LBranch,
    /// Walking down `R`, one cell per step.
    RBranch,
}

/// Closed-form instantaneous edge eigenstate mid-step during the transfer.
///
/// During step x on `L` the zero mode is
/// `cos φ (−)_{2x−1} + sin φ (−)_{2x+1}` and the π mode the same with `(+)`
/// patterns. On `R`, with Θ = (π/2)·sin φ, the zero mode is
/// `cos Θ (−)_{x−1} − sin Θ (−)_x` and the π mode `cos Θ (+)_{x−1} + sin Θ (+)_x`
/// (cell 0 = junction). These are exact eigenstates of the frozen-φ Floquet
/// operator; the eigenrelation tests drive that to machine precision.
pub fn instantaneous_mode(
    map: &SiteMap,
    phase: TransferPhase,
    x: usize,
    phi: f64,
    kind: ModeKind,
) -> Result<Array1<C64>> {
    let minus = kind == ModeKind::Zero;
    let mut v = Array1::<C64>::zeros(map.n_sites());
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    let (from, to, w_from, w_to) = match phase {
        TransferPhase::LBranch => {
            let from = cell_pattern(map, Branch::L, 2 * x - 1, minus)?;
            let to = cell_pattern(map, Branch::L, 2 * x + 1, minus)?;
            (from, to, phi.cos(), phi.sin())
        }
        TransferPhase::RBranch => {
            if x == 0 {
                return Err(Error::index("R-branch transfer steps are 1-based".to_string()));
            }
            let theta = std::f64::consts::FRAC_PI_2 * phi.sin();
            let from = cell_pattern(map, Branch::R, x - 1, minus)?;
            let to = cell_pattern(map, Branch::R, x, minus)?;
            let sign = match kind {
                ModeKind::Zero => -1.0,
                ModeKind::Pi => 1.0,
            };
            (from, to, theta.cos(), sign * theta.sin())
        }
    };
    let (a0, b0, s0) = from;
    let (a1, b1, s1) = to;
    v[a0] += C64::new(w_from * inv, 0.0);
    v[b0] += C64::new(w_from * s0 * inv, 0.0);
    v[a1] += C64::new(w_to * inv, 0.0);
    v[b1] += C64::new(w_to * s1 * inv, 0.0);
    Ok(v)
}

/// Signed final state of a completed transfer: the edge mode on the last `R`
/// cell, times the phase the walk accumulates. Each `R` step multiplies the
/// zero mode by −1, so its net sign is `(−1)^{n_r}`; the π mode arrives with
/// +1.
pub fn transfer_target(spec: &YJunctionSpec, map: &SiteMap, kind: ModeKind) -> Result<Array1<C64>> {
    let mut v = ideal_edge_mode(map, Branch::R, spec.n_r, kind)?;
    if kind == ModeKind::Zero && spec.n_r % 2 == 1 {
        v.mapv_inplace(|z| -z);
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// Statically driven comparison chain
// ---------------------------------------------------------------------------

/// A single chain of `n_q` qubits (odd) with alternating couplings
/// `J_x = g(1 ± cos θ_x)` on bond x (+ for odd x, − for even), swept so the
/// strong/weak pattern inverts and a boundary mode migrates end to end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticChainSpec {
    pub n_q: usize,
    pub g: f64,
}

impl StaticChainSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_q < 3 || self.n_q.is_multiple_of(2) {
            return Err(Error::config(format!(
                "static chain needs an odd qubit count ≥ 3, got {}",
                self.n_q
            )));
        }
        if !(self.g > 0.0) {
            return Err(Error::config("static chain coupling scale g must be > 0".to_string()));
        }
        Ok(())
    }

    pub fn n_bonds(&self) -> usize {
        self.n_q - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StaticMode {
    /// One global angle θ(t) = π t / t_total on every bond.
    Original,
    /// `n_q − 1` equal-duration stages; stage k (1-based) sweeps the angle of
    /// bond `n_q − k` from 0 to π while later-swept bonds hold 0 and
    /// already-swept bonds hold π.
    Stepwise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticProtocol {
    pub spec: StaticChainSpec,
    pub mode: StaticMode,
    pub t_total: f64,
    pub dt: f64,
}

impl StaticProtocol {
    pub fn new(spec: StaticChainSpec, mode: StaticMode, t_total: f64, dt: f64) -> Result<Self> {
        spec.validate()?;
        if !(dt > 0.0) || !(t_total > 0.0) || dt > t_total {
            return Err(Error::config(format!(
                "need 0 < dt ≤ t_total, got dt = {dt}, t_total = {t_total}"
            )));
        }
        Ok(StaticProtocol { spec, mode, t_total, dt })
    }

    /// Per-bond angles at time `t`. Bond x (1-based) couples sites x−1, x.
    pub fn thetas(&self, t: f64) -> Vec<f64> {
        let n_b = self.spec.n_bonds();
        match self.mode {
            StaticMode::Original => {
                let th = std::f64::consts::PI * (t / self.t_total).clamp(0.0, 1.0);
                vec![th; n_b]
            }
            StaticMode::Stepwise => {
                let stage_len = self.t_total / n_b as f64;
                let s = (t / stage_len).floor().min((n_b - 1) as f64).max(0.0) as usize;
                let frac = ((t - s as f64 * stage_len) / stage_len).clamp(0.0, 1.0);
                let mut out = vec![0.0; n_b];
                for (k, theta) in out.iter_mut().enumerate() {
                    // stage s sweeps bond n_b - s (index n_b - 1 - s), from the far end down
                    let bond_idx = k;
                    let sweep_idx = n_b - 1 - s;
                    *theta = if bond_idx > sweep_idx {
                        std::f64::consts::PI
                    } else if bond_idx == sweep_idx {
                        std::f64::consts::PI * frac
                    } else {
                        0.0
                    };
                }
                out
            }
        }
    }

    /// Coupling of bond x (1-based): `g(1 + cos θ)` for odd x, `g(1 − cos θ)`
    /// for even x, optionally perturbed multiplicatively per bond.
    pub fn bond_amplitude(&self, x: usize, theta: f64, delta: f64) -> f64 {
        let sign = if x % 2 == 1 { 1.0 } else { -1.0 };
        self.spec.g * (1.0 + sign * theta.cos()) * (1.0 + delta)
    }

    /// Instantaneous hopping matrix; `deltas` (one per bond) layer static
    /// disorder.
    pub fn hamiltonian(&self, t: f64, deltas: Option<&[f64]>) -> Result<HoppingMatrix> {
        if let Some(d) = deltas {
            if d.len() != self.spec.n_bonds() {
                return Err(Error::contract(format!(
                    "{} disorder entries for {} bonds",
                    d.len(),
                    self.spec.n_bonds()
                )));
            }
        }
        let thetas = self.thetas(t);
        let elems = (1..=self.spec.n_bonds()).map(|x| {
            let delta = deltas.map_or(0.0, |d| d[x - 1]);
            let j = self.bond_amplitude(x, thetas[x - 1], delta);
            (x - 1, x, C64::new(j, 0.0))
        });
        HoppingMatrix::from_elements(self.spec.n_q, elems)
    }

    /// Boundary mode starts on the last site…
    pub fn initial_state(&self) -> Array1<C64> {
        let mut v = Array1::<C64>::zeros(self.spec.n_q);
        v[self.spec.n_q - 1] = C64::new(1.0, 0.0);
        v
    }

    /// …and should arrive on the first.
    pub fn target_state(&self) -> Array1<C64> {
        let mut v = Array1::<C64>::zeros(self.spec.n_q);
        v[0] = C64::new(1.0, 0.0);
        v
    }
}

/// Smallest |eigenvalue| gap between the migrating boundary mode and the rest
/// of the spectrum, sampled uniformly over the sweep: returns
/// `min_t sorted(|E(t)|)[1]` (the boundary mode itself sits at |E| ≈ 0).
pub fn static_gap_profile(protocol: &StaticProtocol, samples: usize) -> Result<f64> {
    use ndarray_linalg::{Eigh, UPLO};
    if samples < 2 {
        return Err(Error::config("need at least 2 gap samples".to_string()));
    }
    let mut min_gap = f64::INFINITY;
    for i in 0..samples {
        let t = protocol.t_total * i as f64 / (samples - 1) as f64;
        let h = protocol.hamiltonian(t, None)?;
        let (evals, _) = h.matrix().eigh(UPLO::Lower)?;
        let mut mags: Vec<f64> = evals.iter().map(|e| e.abs()).collect();
        mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
        min_gap = min_gap.min(mags[1]);
    }
    Ok(min_gap)
}

/// Helper matrix form for tests: dense instantaneous Hamiltonian.
pub fn static_dense(protocol: &StaticProtocol, t: f64) -> Result<Array2<C64>> {
    Ok(protocol.hamiltonian(t, None)?.into_inner())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::YJunctionSpec;

    fn setup(n_l: usize, n_m: usize, n_r: usize) -> (YJunctionSpec, SiteMap) {
        let spec = YJunctionSpec::ideal(n_l, n_m, n_r);
        let map = SiteMap::new(n_l, n_m, n_r);
        (spec, map)
    }

    #[test]
    fn stepwise_walk_has_expected_step_count() {
        let (spec, map) = setup(5, 2, 3);
        let p = build_qst_stepwise(&spec, &map, 10).unwrap();
        // (5-1)/2 = 2 steps on L, 3 on R
        assert_eq!(p.steps.len(), 5);
        assert_eq!(p.total_periods(), 50);
        assert_eq!(p.added_bonds().len(), 5);
    }

    #[test]
    fn direct_and_stepwise_share_added_bond_inventory() {
        let (spec, map) = setup(5, 2, 3);
        let a = build_qst_stepwise(&spec, &map, 10).unwrap();
        let b = build_qst_direct(&spec, &map, 20).unwrap();
        assert_eq!(a.added_bonds(), b.added_bonds());
    }

    #[test]
    fn persistence_pins_exact_end_values() {
        let (spec, map) = setup(5, 2, 3);
        let p = build_qst_stepwise(&spec, &map, 10).unwrap();
        let last = p.steps.last().unwrap();
        for r in &last.ramps {
            if let Bond::Inter { .. } = r.bond {
                // every retired backbone link is pinned at exactly zero
                assert_eq!(r.kind, RampKind::Const);
                assert_eq!(r.base, C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn phi_stays_interior_and_hits_midpoints() {
        let step = ScheduleStep {
            label: "t".into(),
            periods: 8,
            cadence: Cadence::EveryOtherPeriod,
            ramps: vec![],
        };
        assert_eq!(step.n_ticks(), 4);
        // periods 0 and 1 share a tick
        assert_eq!(step.phi_at(0), step.phi_at(1));
        let phi0 = step.phi_at(0);
        let phi_last = step.phi_at(7);
        assert!(phi0 > 0.0 && phi_last < std::f64::consts::FRAC_PI_2);
        assert!((phi0 - std::f64::consts::FRAC_PI_2 * 0.125).abs() < 1e-15);
    }

    #[test]
    fn odd_direct_budget_rejected() {
        let (spec, map) = setup(3, 1, 1);
        assert!(build_qst_direct(&spec, &map, 21).is_err());
    }

    #[test]
    fn entangle_needs_three_cells() {
        let (spec, map) = setup(1, 1, 1);
        assert!(build_entangle_protocol(&spec, &map, 10).is_err());
    }

    #[test]
    fn transfer_target_sign_follows_r_parity() {
        let (spec, map) = setup(3, 2, 3);
        let t = transfer_target(&spec, &map, ModeKind::Zero).unwrap();
        let a = map.resolve(SiteId::new(Branch::R, 3, Sub::A)).unwrap();
        assert!(t[a].re < 0.0, "odd n_r flips the zero mode");
        let t_pi = transfer_target(&spec, &map, ModeKind::Pi).unwrap();
        assert!(t_pi[a].re > 0.0, "π mode arrives unflipped");
    }

    #[test]
    fn static_stepwise_theta_profile() {
        let spec = StaticChainSpec { n_q: 5, g: 1.0 };
        let p = StaticProtocol::new(spec, StaticMode::Stepwise, 4.0, 0.01).unwrap();
        // 4 bonds, 4 stages of length 1; early in stage 0 only bond 4 moves
        let th = p.thetas(0.5);
        assert_eq!(th[0], 0.0);
        assert_eq!(th[1], 0.0);
        assert_eq!(th[2], 0.0);
        assert!((th[3] - std::f64::consts::PI * 0.5).abs() < 1e-12);
        // midway through stage 2, bonds 4 and 3 are done, bond 2 sweeping
        let th = p.thetas(2.5);
        assert_eq!(th[3], std::f64::consts::PI);
        assert_eq!(th[2], std::f64::consts::PI);
        assert!((th[1] - std::f64::consts::PI * 0.5).abs() < 1e-12);
        assert_eq!(th[0], 0.0);
    }

    #[test]
    fn static_couplings_alternate() {
        let spec = StaticChainSpec { n_q: 5, g: 2.0 };
        let p = StaticProtocol::new(spec, StaticMode::Original, 1.0, 0.01).unwrap();
        // θ = 0 everywhere at t = 0: odd bonds 2g(1+1)=4, even bonds 0
        let h = p.hamiltonian(0.0, None).unwrap();
        assert!((h.matrix()[[0, 1]].re + 4.0).abs() < 1e-15);
        assert_eq!(h.matrix()[[1, 2]], C64::new(0.0, 0.0));
    }
}
