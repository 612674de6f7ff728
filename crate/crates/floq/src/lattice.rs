//! Y-junction lattice: geometry, site indexing, coupling bookkeeping,
//! hopping-matrix assembly, and disorder realizations.
//!
//! The lattice is three dimerized chains (branches `L`, `M`, `R`) of two-qubit
//! unit cells sharing one junction cell. Cell indices are 1-based per branch;
//! the junction is cell `n_l` of `L`, and cell 0 of `M` or `R` aliases to it.
//! Qubits within a cell carry sublattice labels `A` and `B`.
//!
//! # Conventions
//!
//! All dynamics happen in the single-excitation sector, so a Hamiltonian is an
//! `N_q × N_q` Hermitian hopping matrix over flat site indices,
//! `N_q = 2(n_l + n_m + n_r)`. Flat ordering: branch `L` cells 1‥n_l, then `M`
//! cells 1‥n_m, then `R` cells 1‥n_r, with `A` before `B` inside a cell; so
//! `(L,1,A)` is index 0.
//!
//! A bond with coupling amplitude `J` between sites `p`, `q` (in the bond's
//! canonical orientation, see [`Bond`]) contributes matrix elements
//! `H[p,q] = −J` and `H[q,p] = −J̄`. Each drive half-period has its own bond
//! set: the first half ([`Half::First`]) carries the intra-cell couplings, the
//! second ([`Half::Second`]) the inter-cell ones, in the ideal parameter set.
//! Units: ħ = 1 and each half-period lasts time 1 (drive period T = 2), so
//! coupling amplitudes are angles. The ideal set is intra `iπ/2` everywhere,
//! inter `iπ` on `L`/`M`, and no inter coupling on `R`.
//!
//! Disorder multiplies selected bond amplitudes by `(1 + δ)` with
//! `δ ~ U[−W/2, W/2]` drawn once per bond per realization, in the canonical
//! [`Bond`] order, from a ChaCha20 stream — identical `(spec, seed)` inputs
//! reproduce the realization bit-for-bit.

use std::collections::BTreeMap;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const IDEAL_INTRA: C64 = C64::new(0.0, std::f64::consts::FRAC_PI_2);
pub const IDEAL_INTER: C64 = C64::new(0.0, std::f64::consts::PI);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Branch {
    L,
    M,
    R,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::L => write!(f, "L"),
            Branch::M => write!(f, "M"),
            Branch::R => write!(f, "R"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sub {
    A,
    B,
}

/// A qubit site addressed by branch, unit cell, and sublattice.
///
/// `M`/`R` cell 0 is not a cell of its own: it aliases to the junction cell
/// `(L, n_l)`. Resolution through [`SiteMap::resolve`] collapses the alias.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteId {
    pub branch: Branch,
    pub cell: usize,
    pub sub: Sub,
}

impl SiteId {
    pub fn new(branch: Branch, cell: usize, sub: Sub) -> Self {
        SiteId { branch, cell, sub }
    }
}

/// Drive half-period a bond belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Half {
    First,
    Second,
}

/// Protocol-added couplings, all acting in the second half-period.
///
/// Canonical orientations (matrix element `−J` at `[p, q]`):
/// - `EntangleAb`: p = (L,1,A), q = (L,2,B) — the A–B bridge of the
///   entangling sequence.
/// - `EntangleAa`: p = (L,2,A), q = (L,3,A) — its A–A partner.
/// - `TransferL { x }`: p = (L,2x−1,A), q = (L,2x,B) — walks the edge pair
///   down the L branch, x = 1‥(n_l−1)/2.
/// - `TransferR { x }`: p = (R,x−1,A), q = (R,x,B) — walks it down the R
///   branch, x = 1‥n_r (cell 0 = junction).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AddedBond {
    EntangleAb,
    EntangleAa,
    TransferL { x: usize },
    TransferR { x: usize },
}

/// Identity of a coupling slot in the model.
///
/// Canonical orientations: `Intra` bonds run A→B inside a cell
/// (`H[A,B] = −J`); `Inter` bonds run from `(branch, from_cell, B)` to
/// `(branch, from_cell+1, A)` (`H[B,A'] = −J`). For `L`, `from_cell` ranges
/// over 1‥n_l−1; for `M`/`R` over 0‥n−1 (0 = junction). `Custom` bonds come
/// from explicit overrides and are keyed by flat site indices with p < q.
///
/// The derived ordering of this enum is the canonical bond order used for
/// deterministic disorder draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Bond {
    Intra { half: Half, branch: Branch, cell: usize },
    Inter { half: Half, branch: Branch, from_cell: usize },
    Added(AddedBond),
    Custom { half: Half, p: usize, q: usize },
}

/// Complex coupling amplitudes of one branch, one value per
/// (half-period × intra/inter) slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchCouplings {
    /// Intra-cell amplitude in the first half-period.
    pub intra1: C64,
    /// Inter-cell amplitude in the first half-period.
    pub inter1: C64,
    /// Intra-cell amplitude in the second half-period.
    pub intra2: C64,
    /// Inter-cell amplitude in the second half-period.
    pub inter2: C64,
}

impl BranchCouplings {
    pub const ZERO: BranchCouplings = BranchCouplings {
        intra1: C64::new(0.0, 0.0),
        inter1: C64::new(0.0, 0.0),
        intra2: C64::new(0.0, 0.0),
        inter2: C64::new(0.0, 0.0),
    };

    /// Ideal driven-chain values: intra `iπ/2` in the first half,
    /// inter `iπ` in the second.
    pub fn ideal() -> Self {
        BranchCouplings {
            intra1: IDEAL_INTRA,
            inter2: IDEAL_INTER,
            ..Self::ZERO
        }
    }

    /// Ideal decoupled-chain values: intra `iπ/2` only.
    pub fn ideal_decoupled() -> Self {
        BranchCouplings {
            intra1: IDEAL_INTRA,
            ..Self::ZERO
        }
    }
}

/// Full model declaration: branch lengths (unit cells) and per-branch couplings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YJunctionSpec {
    pub n_l: usize,
    pub n_m: usize,
    pub n_r: usize,
    pub l: BranchCouplings,
    pub m: BranchCouplings,
    pub r: BranchCouplings,
}

impl YJunctionSpec {
    /// Ideal parameter set: `L`/`M` fully driven, `R` inter couplings off.
    pub fn ideal(n_l: usize, n_m: usize, n_r: usize) -> Self {
        YJunctionSpec {
            n_l,
            n_m,
            n_r,
            l: BranchCouplings::ideal(),
            m: BranchCouplings::ideal(),
            r: BranchCouplings::ideal_decoupled(),
        }
    }

    /// Whether the couplings sit exactly at the ideal point, where the edge
    /// modes and transfer targets have closed forms.
    pub fn is_ideal(&self) -> bool {
        let zero = C64::new(0.0, 0.0);
        self.l.intra1 == IDEAL_INTRA
            && self.m.intra1 == IDEAL_INTRA
            && self.r.intra1 == IDEAL_INTRA
            && self.l.inter2 == IDEAL_INTER
            && self.m.inter2 == IDEAL_INTER
            && self.r.inter2 == zero
            && [self.l, self.m, self.r]
                .iter()
                .all(|c| c.inter1 == zero && c.intra2 == zero)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_l == 0 || self.n_m == 0 || self.n_r == 0 {
            return Err(Error::config("all branch cell counts must be ≥ 1"));
        }
        if self.n_l.is_multiple_of(2) {
            return Err(Error::config(format!(
                "n_l must be odd (got {}): the transfer walk crosses L two cells per step",
                self.n_l
            )));
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.n_l + self.n_m + self.n_r
    }

    pub fn n_sites(&self) -> usize {
        2 * self.n_cells()
    }

    fn couplings(&self, branch: Branch) -> &BranchCouplings {
        match branch {
            Branch::L => &self.l,
            Branch::M => &self.m,
            Branch::R => &self.r,
        }
    }
}

/// Flat-index bookkeeping for a given junction geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteMap {
    pub n_l: usize,
    pub n_m: usize,
    pub n_r: usize,
}

impl SiteMap {
    pub fn new(n_l: usize, n_m: usize, n_r: usize) -> Self {
        SiteMap { n_l, n_m, n_r }
    }

    pub fn n_sites(&self) -> usize {
        2 * (self.n_l + self.n_m + self.n_r)
    }

    fn branch_len(&self, branch: Branch) -> usize {
        match branch {
            Branch::L => self.n_l,
            Branch::M => self.n_m,
            Branch::R => self.n_r,
        }
    }

    /// Collapse the junction alias: `(M|R, 0, s)` → `(L, n_l, s)`. Idempotent.
    pub fn canonicalize(&self, site: SiteId) -> SiteId {
        if site.cell == 0 && matches!(site.branch, Branch::M | Branch::R) {
            SiteId::new(Branch::L, self.n_l, site.sub)
        } else {
            site
        }
    }

    /// Flat index of a site; total on valid sites, aliases collapse.
    pub fn resolve(&self, site: SiteId) -> Result<usize> {
        let site = self.canonicalize(site);
        let n = self.branch_len(site.branch);
        if site.cell < 1 || site.cell > n {
            return Err(Error::index(format!(
                "cell {} out of range 1..={} on branch {}",
                site.cell, n, site.branch
            )));
        }
        let base = match site.branch {
            Branch::L => 0,
            Branch::M => 2 * self.n_l,
            Branch::R => 2 * (self.n_l + self.n_m),
        };
        let sub = match site.sub {
            Sub::A => 0,
            Sub::B => 1,
        };
        Ok(base + 2 * (site.cell - 1) + sub)
    }

    /// Canonical (non-aliased) site for a flat index.
    pub fn site_of(&self, flat: usize) -> Result<SiteId> {
        if flat >= self.n_sites() {
            return Err(Error::index(format!(
                "flat index {flat} out of range 0..{}",
                self.n_sites()
            )));
        }
        let (branch, off) = if flat < 2 * self.n_l {
            (Branch::L, flat)
        } else if flat < 2 * (self.n_l + self.n_m) {
            (Branch::M, flat - 2 * self.n_l)
        } else {
            (Branch::R, flat - 2 * (self.n_l + self.n_m))
        };
        let sub = if off % 2 == 0 { Sub::A } else { Sub::B };
        Ok(SiteId::new(branch, off / 2 + 1, sub))
    }
}

/// One coupling slot resolved to flat sites; `amp` is the amplitude `J`
/// (matrix element `−J` at `[p, q]`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondEntry {
    pub bond: Bond,
    pub p: usize,
    pub q: usize,
    pub amp: C64,
}

/// Dense Hermitian single-excitation hopping matrix.
///
/// Entries are written once and mirrored, so `M = M†` holds exactly; the
/// diagonal stays zero (pure hopping, no on-site terms).
#[derive(Debug, Clone, PartialEq)]
pub struct HoppingMatrix {
    m: Array2<C64>,
}

impl HoppingMatrix {
    /// Assemble from `(p, q, J)` elements; each contributes `−J` at `[p, q]`
    /// and `−J̄` at `[q, p]`.
    pub fn from_elements(n: usize, elems: impl IntoIterator<Item = (usize, usize, C64)>) -> Result<Self> {
        let mut m = Array2::<C64>::zeros((n, n));
        for (p, q, j) in elems {
            if p == q {
                return Err(Error::contract(format!(
                    "diagonal element at site {p}: hopping matrices have no on-site terms"
                )));
            }
            if p >= n || q >= n {
                return Err(Error::index(format!("bond ({p},{q}) outside dimension {n}")));
            }
            m[[p, q]] += -j;
            m[[q, p]] += -j.conj();
        }
        Ok(HoppingMatrix { m })
    }

    /// Wrap a dense matrix, verifying Hermiticity (tolerance `1e-12`) and a
    /// zero diagonal, then mirroring the lower triangle so `M = M†` exactly.
    pub fn from_dense(a: Array2<C64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::contract("hopping matrix must be square".to_string()));
        }
        let mut m = a;
        for i in 0..n {
            if m[[i, i]].norm() > 1e-12 {
                return Err(Error::contract(format!("nonzero diagonal at {i}")));
            }
            m[[i, i]] = C64::new(0.0, 0.0);
            for jx in (i + 1)..n {
                if (m[[i, jx]] - m[[jx, i]].conj()).norm() > 1e-12 {
                    return Err(Error::contract(format!("not Hermitian at ({i},{jx})")));
                }
                m[[jx, i]] = m[[i, jx]].conj();
            }
        }
        Ok(HoppingMatrix { m })
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn into_inner(self) -> Array2<C64> {
        self.m
    }
}

/// Which bond families a disorder realization perturbs.
///
/// `intra_first` = first-half intra bonds; `inter_second` = second-half inter
/// bonds on `L`/`M`; `added_l` = protocol bonds on the L branch (both
/// entangling bridges and the L transfer walk); `added_r` = the R transfer
/// walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisorderFamilies {
    pub intra_first: bool,
    pub inter_second: bool,
    pub added_l: bool,
    pub added_r: bool,
}

impl DisorderFamilies {
    pub const ALL: DisorderFamilies = DisorderFamilies {
        intra_first: true,
        inter_second: true,
        added_l: true,
        added_r: true,
    };

    fn selects(&self, bond: &Bond) -> bool {
        match bond {
            Bond::Intra { half: Half::First, .. } => self.intra_first,
            Bond::Inter { half: Half::Second, branch: Branch::L | Branch::M, .. } => {
                self.inter_second
            }
            Bond::Added(AddedBond::EntangleAb | AddedBond::EntangleAa | AddedBond::TransferL { .. }) => {
                self.added_l
            }
            Bond::Added(AddedBond::TransferR { .. }) => self.added_r,
            _ => false,
        }
    }
}

impl Default for DisorderFamilies {
    fn default() -> Self {
        DisorderFamilies::ALL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub w: f64,
    pub families: DisorderFamilies,
    pub seed: u64,
}

impl DisorderSpec {
    pub fn validate(&self) -> Result<()> {
        if self.w < 0.0 || !self.w.is_finite() {
            return Err(Error::config(format!("disorder strength W must be ≥ 0, got {}", self.w)));
        }
        Ok(())
    }
}

/// A frozen set of per-bond multiplicative offsets, `J → J(1 + δ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderRealization {
    pub spec: DisorderSpec,
    deltas: BTreeMap<Bond, f64>,
}

impl DisorderRealization {
    /// Draw one δ per selected bond, walking `inventory` in canonical bond
    /// order. Duplicate bonds in the inventory are drawn once.
    pub fn draw(spec: DisorderSpec, inventory: impl IntoIterator<Item = Bond>) -> Result<Self> {
        spec.validate()?;
        let mut bonds: Vec<Bond> = inventory.into_iter().collect();
        bonds.sort_unstable();
        bonds.dedup();
        let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
        let dist = Uniform::new_inclusive(-0.5 * spec.w, 0.5 * spec.w);
        let mut deltas = BTreeMap::new();
        for bond in bonds {
            if spec.families.selects(&bond) {
                let d = if spec.w > 0.0 { dist.sample(&mut rng) } else { 0.0 };
                deltas.insert(bond, d);
            }
        }
        Ok(DisorderRealization { spec, deltas })
    }

    pub fn delta(&self, bond: &Bond) -> f64 {
        self.deltas.get(bond).copied().unwrap_or(0.0)
    }

    pub fn factor(&self, bond: &Bond) -> f64 {
        1.0 + self.delta(bond)
    }
}

/// An explicit coupling replacement/addition, applied symmetrically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingOverride {
    pub pairs: Vec<OverridePair>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverridePair {
    pub a: SiteId,
    pub b: SiteId,
    pub half: Half,
    pub amp: C64,
}

/// Immutable assembled model: index map plus the base bond lists of both
/// half-period Hamiltonians, with an optional disorder layer.
///
/// Matrices are assembled on demand; disorder and overrides produce new
/// contexts rather than mutating (`ModelContext` is safe to share across
/// threads).
#[derive(Debug, Clone)]
pub struct ModelContext {
    pub spec: YJunctionSpec,
    pub map: SiteMap,
    h1_bonds: Vec<BondEntry>,
    h2_bonds: Vec<BondEntry>,
    disorder: Option<Arc<DisorderRealization>>,
}

/// Build the base context for a spec: intra bonds on every cell, inter bonds
/// on every branch link, amplitudes per the spec's `BranchCouplings`.
pub fn build_context(spec: &YJunctionSpec) -> Result<ModelContext> {
    spec.validate()?;
    let map = SiteMap::new(spec.n_l, spec.n_m, spec.n_r);
    let mut h1_bonds = Vec::new();
    let mut h2_bonds = Vec::new();
    for branch in [Branch::L, Branch::M, Branch::R] {
        let c = spec.couplings(branch);
        let n = map.branch_len(branch);
        for cell in 1..=n {
            let p = map.resolve(SiteId::new(branch, cell, Sub::A))?;
            let q = map.resolve(SiteId::new(branch, cell, Sub::B))?;
            h1_bonds.push(BondEntry { bond: Bond::Intra { half: Half::First, branch, cell }, p, q, amp: c.intra1 });
            h2_bonds.push(BondEntry { bond: Bond::Intra { half: Half::Second, branch, cell }, p, q, amp: c.intra2 });
        }
        let first_link = if branch == Branch::L { 1 } else { 0 };
        for from in first_link..n {
            let p = map.resolve(SiteId::new(branch, from, Sub::B))?;
            let q = map.resolve(SiteId::new(branch, from + 1, Sub::A))?;
            h1_bonds.push(BondEntry { bond: Bond::Inter { half: Half::First, branch, from_cell: from }, p, q, amp: c.inter1 });
            h2_bonds.push(BondEntry { bond: Bond::Inter { half: Half::Second, branch, from_cell: from }, p, q, amp: c.inter2 });
        }
    }
    Ok(ModelContext { spec: spec.clone(), map, h1_bonds, h2_bonds, disorder: None })
}

impl ModelContext {
    pub fn n_sites(&self) -> usize {
        self.map.n_sites()
    }

    pub fn disorder(&self) -> Option<&DisorderRealization> {
        self.disorder.as_deref()
    }

    /// Disorder multiplier for a bond (1.0 on clean contexts).
    pub fn bond_factor(&self, bond: &Bond) -> f64 {
        self.disorder.as_ref().map_or(1.0, |d| d.factor(bond))
    }

    pub fn h1_entries(&self) -> &[BondEntry] {
        &self.h1_bonds
    }

    pub fn h2_entries(&self) -> &[BondEntry] {
        &self.h2_bonds
    }

    fn assemble(&self, entries: &[BondEntry]) -> Result<HoppingMatrix> {
        HoppingMatrix::from_elements(
            self.n_sites(),
            entries.iter().map(|e| (e.p, e.q, e.amp * self.bond_factor(&e.bond))),
        )
    }

    pub fn h1_matrix(&self) -> Result<HoppingMatrix> {
        self.assemble(&self.h1_bonds)
    }

    pub fn h2_matrix(&self) -> Result<HoppingMatrix> {
        self.assemble(&self.h2_bonds)
    }

    /// All base bond identities (both halves), for disorder inventories.
    pub fn bond_inventory(&self) -> Vec<Bond> {
        self.h1_bonds.iter().chain(&self.h2_bonds).map(|e| e.bond).collect()
    }

    /// Layer a disorder realization; the base context is untouched.
    pub fn with_disorder(&self, realization: DisorderRealization) -> ModelContext {
        let mut ctx = self.clone();
        ctx.disorder = Some(Arc::new(realization));
        ctx
    }

    /// Apply coupling overrides, replacing existing bonds on the same site
    /// pair and half, or appending `Bond::Custom` entries for new pairs.
    pub fn apply_override(&self, ov: &CouplingOverride) -> Result<ModelContext> {
        let mut ctx = self.clone();
        for pair in &ov.pairs {
            let p = ctx.map.resolve(pair.a)?;
            let q = ctx.map.resolve(pair.b)?;
            if p == q {
                return Err(Error::config("override pair resolves to a single site".to_string()));
            }
            let list = match pair.half {
                Half::First => &mut ctx.h1_bonds,
                Half::Second => &mut ctx.h2_bonds,
            };
            match list.iter_mut().find(|e| (e.p, e.q) == (p, q)) {
                Some(e) => e.amp = pair.amp,
                None => match list.iter_mut().find(|e| (e.p, e.q) == (q, p)) {
                    // Reversed orientation: H[q,p] = −J means H[p,q] = −J̄.
                    Some(e) => e.amp = pair.amp.conj(),
                    None => {
                        let (lo, hi) = (p.min(q), p.max(q));
                        let amp = if p < q { pair.amp } else { pair.amp.conj() };
                        list.push(BondEntry {
                            bond: Bond::Custom { half: pair.half, p: lo, q: hi },
                            p: lo,
                            q: hi,
                            amp,
                        });
                    }
                },
            }
        }
        Ok(ctx)
    }
}
