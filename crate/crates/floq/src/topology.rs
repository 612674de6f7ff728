//! Bulk topology of the driven dimerized chain: chiral-basis winding numbers
//! that count the protected zero and π edge modes.
//!
//! In the two-band bulk model the drive alternates an intra-cell kick of
//! strength `j1` and an inter-cell kick of strength `j2` (the magnitudes of
//! the lattice couplings `i·j1`, `i·j2`). The natural frame for counting edge
//! modes is the symmetrized half-period product
//!
//! ```text
//! F(k) = exp(−i·H₂(k)/2)·exp(−i·H₁(k)/2),
//! H₁(k) = −j1·τx,   H₂(k) = −j2·cos k·τx + j2·sin k·τy,
//! ```
//!
//! whose off-diagonal entry `b(k) = F₀₁` winds around the origin once per
//! protected zero mode and whose diagonal entry `d(k) = F₁₁` winds once
//! (oppositely) per protected π mode:
//!
//! ```text
//! υ₀ = wind(b),   υ_π = −wind(d).
//! ```
//!
//! Both entries have closed forms (products of two su(2) exponentials), so
//! the winding is accumulated from exact samples with adaptive bisection
//! wherever the phase moves faster than π/2 per interval — no eigensolver is
//! involved. An entry magnitude below 10⁻⁸ means the quasienergy gap is
//! closed at that `k` and the invariant is undefined (a phase boundary).
//!
//! The analytic phase diagram on (0, π]² is two straight lines:
//! `υ₀ = 1 ⇔ j2 > j1` and `υ_π = 1 ⇔ j1 + j2 > π`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance to a critical line below which the analytic invariants refuse to
/// answer.
pub const BOUNDARY_MARGIN: f64 = 1e-6;

/// Entry magnitude below which the bulk gap is considered closed.
pub const GAP_FLOOR: f64 = 1e-8;

/// Default k-grid size for winding accumulation.
pub const DEFAULT_K_POINTS: usize = 1024;

/// Bulk kick strengths (real, in units where a half-period lasts unit time).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochParams {
    pub j1: f64,
    pub j2: f64,
}

impl BlochParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.j1.is_finite() && self.j2.is_finite()) || self.j1 <= 0.0 || self.j2 <= 0.0 {
            return Err(Error::config(format!(
                "bulk kick strengths must be finite and positive, got ({}, {})",
                self.j1, self.j2
            )));
        }
        Ok(())
    }
}

/// A 2×2 complex matrix in the chiral basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FMatrix {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl FMatrix {
    pub fn mul(&self, rhs: &FMatrix) -> FMatrix {
        FMatrix {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }
}

/// `exp(−i·s·(vx·τx + vy·τy))`, closed form:
/// `cos(s|v|)·1 − i·sin(s|v|)·(v̂·τ)`.
fn su2_kick(vx: f64, vy: f64, s: f64) -> FMatrix {
    let r = vx.hypot(vy);
    if r == 0.0 {
        return FMatrix {
            a: C64::new(1.0, 0.0),
            b: C64::new(0.0, 0.0),
            c: C64::new(0.0, 0.0),
            d: C64::new(1.0, 0.0),
        };
    }
    let (cs, sn) = ((s * r).cos(), (s * r).sin());
    let (ux, uy) = (vx / r, vy / r);
    // v̂·τ = [[0, ux − i·uy], [ux + i·uy, 0]]
    FMatrix {
        a: C64::new(cs, 0.0),
        b: C64::new(0.0, -sn) * C64::new(ux, -uy),
        c: C64::new(0.0, -sn) * C64::new(ux, uy),
        d: C64::new(cs, 0.0),
    }
}

/// Half-period bulk propagators at momentum `k`.
pub fn half_kicks(p: &BlochParams, k: f64) -> (FMatrix, FMatrix) {
    let e1 = su2_kick(-p.j1, 0.0, 0.5);
    let e2 = su2_kick(-p.j2 * k.cos(), p.j2 * k.sin(), 0.5);
    (e1, e2)
}

/// `F(k) = E₂(k)·E₁` — the ordering whose entries wind.
pub fn f_matrix(p: &BlochParams, k: f64) -> FMatrix {
    let (e1, e2) = half_kicks(p, k);
    e2.mul(&e1)
}

/// `G(k) = E₁·E₂(k)` — the reversed ordering; chiral symmetry ties it to
/// `F` as `Γ F(k) Γ = G(k)†` with Γ = τz.
pub fn g_matrix(p: &BlochParams, k: f64) -> FMatrix {
    let (e1, e2) = half_kicks(p, k);
    e1.mul(&e2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantResult {
    pub v0: i32,
    pub vpi: i32,
    /// k-grid size the winding was accumulated on.
    pub m: usize,
    /// Raw winding accumulators before rounding (diagnostics; integral to
    /// ~1e-12 away from phase boundaries).
    pub raw_zero: f64,
    pub raw_pi: f64,
}

#[derive(Clone, Copy)]
enum Entry {
    B,
    D,
}

fn entry_of(f: &FMatrix, which: Entry) -> C64 {
    match which {
        Entry::B => f.b,
        Entry::D => f.d,
    }
}

fn checked_entry(p: &BlochParams, k: f64, which: Entry) -> Result<C64> {
    let v = entry_of(&f_matrix(p, k), which);
    if v.norm() < GAP_FLOOR {
        return Err(Error::GapClosing { k, magnitude: v.norm() });
    }
    Ok(v)
}

/// Phase increment from `(k1, v1)` to `(k2, v2)`, bisecting until each piece
/// turns by at most π/2 so the branch is tracked unambiguously.
fn tracked_delta(
    p: &BlochParams,
    which: Entry,
    k1: f64,
    v1: C64,
    k2: f64,
    v2: C64,
    depth: u32,
) -> Result<f64> {
    let d = (v2 / v1).arg();
    if d.abs() <= std::f64::consts::FRAC_PI_2 {
        return Ok(d);
    }
    if depth == 0 {
        return Err(Error::contract(format!(
            "winding refinement exhausted near k = {:.6}: phase still turns by {d:.3} per interval",
            0.5 * (k1 + k2)
        )));
    }
    let km = 0.5 * (k1 + k2);
    let vm = checked_entry(p, km, which)?;
    Ok(tracked_delta(p, which, k1, v1, km, vm, depth - 1)?
        + tracked_delta(p, which, km, vm, k2, v2, depth - 1)?)
}

fn wind_entry(p: &BlochParams, which: Entry, m: usize) -> Result<f64> {
    let mut total = 0.0;
    let mut prev_k = -std::f64::consts::PI;
    let mut prev_v = checked_entry(p, prev_k, which)?;
    for i in 1..=m {
        let k = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / m as f64;
        let v = checked_entry(p, k, which)?;
        total += tracked_delta(p, which, prev_k, prev_v, k, v, 32)?;
        prev_k = k;
        prev_v = v;
    }
    Ok(total / (2.0 * std::f64::consts::PI))
}

/// Numeric winding invariants on an `m`-interval k grid (m ≥ 8).
pub fn winding_invariants(p: &BlochParams, m: usize) -> Result<InvariantResult> {
    p.validate()?;
    if m < 8 {
        return Err(Error::config(format!("k grid too coarse: {m} < 8 intervals")));
    }
    let raw_zero = wind_entry(p, Entry::B, m)?;
    let raw_pi = -wind_entry(p, Entry::D, m)?;
    for (name, raw) in [("υ0", raw_zero), ("υπ", raw_pi)] {
        if (raw - raw.round()).abs() > 0.25 {
            return Err(Error::contract(format!(
                "{name} accumulator {raw:.4} is not near an integer; parameters sit at a phase boundary"
            )));
        }
    }
    Ok(InvariantResult {
        v0: raw_zero.round() as i32,
        vpi: raw_pi.round() as i32,
        m,
        raw_zero,
        raw_pi,
    })
}

/// Closed-form invariants on (0, π]², refusing points within
/// [`BOUNDARY_MARGIN`] of a critical line.
pub fn analytic_invariants(j1: f64, j2: f64) -> Result<(i32, i32)> {
    if !(j1.is_finite() && j2.is_finite())
        || j1 <= 0.0
        || j2 <= 0.0
        || j1 > std::f64::consts::PI
        || j2 > std::f64::consts::PI
    {
        return Err(Error::config(format!(
            "analytic phase diagram covers (0, π]², got ({j1}, {j2})"
        )));
    }
    if (j2 - j1).abs() < BOUNDARY_MARGIN {
        return Err(Error::boundary(format!(
            "({j1}, {j2}) sits on the zero-mode transition j2 = j1"
        )));
    }
    if (j1 + j2 - std::f64::consts::PI).abs() < BOUNDARY_MARGIN {
        return Err(Error::boundary(format!(
            "({j1}, {j2}) sits on the π-mode transition j1 + j2 = π"
        )));
    }
    Ok((i32::from(j2 > j1), i32::from(j1 + j2 > std::f64::consts::PI)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellStatus {
    Ok,
    /// Analytic invariant undefined (on/near a critical line).
    Boundary,
    /// Numeric winding undefined (bulk gap closed on the k grid).
    GapClosing,
}

impl std::fmt::Display for CellStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CellStatus::Ok => write!(f, "ok"),
            CellStatus::Boundary => write!(f, "boundary"),
            CellStatus::GapClosing => write!(f, "gap_closing"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub j1: f64,
    pub j2: f64,
    pub numeric: Option<(i32, i32)>,
    pub analytic: Option<(i32, i32)>,
    pub status: CellStatus,
}

impl PhaseCell {
    pub fn agrees(&self) -> Option<bool> {
        match (self.numeric, self.analytic) {
            (Some(n), Some(a)) => Some(n == a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub cells: Vec<PhaseCell>,
    pub m_points: usize,
}

impl PhaseDiagram {
    /// (agreeing cells, scored cells); flagged cells are excluded.
    pub fn agreement(&self) -> (usize, usize) {
        let scored: Vec<bool> = self.cells.iter().filter_map(|c| c.agrees()).collect();
        (scored.iter().filter(|a| **a).count(), scored.len())
    }

    pub fn all_agree(&self) -> bool {
        let (ok, scored) = self.agreement();
        scored > 0 && ok == scored
    }

    /// CSV rows: `j1, j2, v0_numeric, vpi_numeric, v0_analytic, vpi_analytic,
    /// status`.
    pub fn to_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["j1", "j2", "v0_numeric", "vpi_numeric", "v0_analytic", "vpi_analytic", "status"])
            .map_err(|e| Error::backend(format!("csv: {e}")))?;
        for c in &self.cells {
            let (n0, np) = c.numeric.map_or((String::new(), String::new()), |(a, b)| {
                (a.to_string(), b.to_string())
            });
            let (a0, ap) = c.analytic.map_or((String::new(), String::new()), |(a, b)| {
                (a.to_string(), b.to_string())
            });
            wtr.write_record([
                format!("{:.12}", c.j1),
                format!("{:.12}", c.j2),
                n0,
                np,
                a0,
                ap,
                c.status.to_string(),
            ])
            .map_err(|e| Error::backend(format!("csv: {e}")))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn evaluate_cell(j1: f64, j2: f64, m: usize) -> Result<PhaseCell> {
    let analytic = match analytic_invariants(j1, j2) {
        Ok(v) => Some(v),
        Err(Error::Boundary(_)) => None,
        Err(e) => return Err(e),
    };
    let numeric = match winding_invariants(&BlochParams { j1, j2 }, m) {
        Ok(r) => Some((r.v0, r.vpi)),
        Err(Error::GapClosing { .. }) | Err(Error::Contract(_)) => None,
        Err(e) => return Err(e),
    };
    let status = if analytic.is_none() {
        CellStatus::Boundary
    } else if numeric.is_none() {
        CellStatus::GapClosing
    } else {
        CellStatus::Ok
    };
    Ok(PhaseCell { j1, j2, numeric, analytic, status })
}

/// Rasterize an `n × n` phase diagram over (0, π)², keeping `margin` clear of
/// the domain edges and staggering the two axes so no sample can land on a
/// critical line: with `j1 = margin + s·(i + ¼)/n` and
/// `j2 = margin + s·(j + ½)/n` (s = π − 2·margin),
/// `j2 − j1 = 0` would need `j − i = −¼` and `j1 + j2 = π` would need
/// `i + j + ¾ = n` — both impossible for integers, at any `n`.
pub fn phase_diagram(n: usize, margin: f64, m_points: usize) -> Result<PhaseDiagram> {
    if n == 0 {
        return Err(Error::config("phase diagram grid must be nonempty".to_string()));
    }
    if !(margin > 0.0) || margin >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::config(format!("margin must lie in (0, π/2), got {margin}")));
    }
    let s = std::f64::consts::PI - 2.0 * margin;
    let mut points = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            points.push((
                margin + s * (i as f64 + 0.25) / n as f64,
                margin + s * (j as f64 + 0.5) / n as f64,
            ));
        }
    }
    phase_diagram_at(&points, m_points)
}

/// Rasterize explicit `(j1, j2)` sample points (boundary samples come back
/// flagged, not as errors).
pub fn phase_diagram_at(points: &[(f64, f64)], m_points: usize) -> Result<PhaseDiagram> {
    let cells = crate::parallel::par_map(points, |&(j1, j2)| evaluate_cell(j1, j2, m_points))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseDiagram { cells, m_points })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FROZEN: [(f64, f64, i32, i32); 4] = [
        (std::f64::consts::FRAC_PI_2, std::f64::consts::PI, 1, 1),
        (std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_4, 0, 0),
        (0.3, 0.4, 1, 0),
        (2.9, 0.7, 0, 1),
    ];

    #[test]
    fn frozen_points_match_analytic() {
        for (j1, j2, v0, vpi) in FROZEN {
            let r = winding_invariants(&BlochParams { j1, j2 }, 256).unwrap();
            assert_eq!((r.v0, r.vpi), (v0, vpi), "at ({j1}, {j2})");
            assert!(r.raw_zero.fract().abs() < 1e-9 || (1.0 - r.raw_zero.fract()).abs() < 1e-9);
        }
    }

    #[test]
    fn off_diagonal_entry_matches_expanded_product() {
        // F₀₁ expands to i·(sin(j1/2)cos(j2/2) + e^{ik}·sin(j2/2)cos(j1/2))
        let p = BlochParams { j1: 0.9, j2: 2.1 };
        for k in [-2.0, -0.3, 0.0, 1.7] {
            let f = f_matrix(&p, k);
            let (s1, c1) = (0.45f64.sin(), 0.45f64.cos());
            let (s2, c2) = (1.05f64.sin(), 1.05f64.cos());
            let expect = C64::new(0.0, 1.0)
                * (C64::new(s1 * c2, 0.0) + C64::new(0.0, k).exp() * s2 * c1);
            assert!((f.b - expect).norm() < 1e-14);
            let expect_d =
                C64::new(c1 * c2, 0.0) - C64::new(0.0, -k).exp() * s1 * s2;
            assert!((f.d - expect_d).norm() < 1e-14);
        }
    }

    #[test]
    fn chiral_symmetry_relates_orderings() {
        // Γ F(k) Γ = G(k)† with Γ = τz
        let p = BlochParams { j1: 1.1, j2: 2.4 };
        for k in [-3.0, -1.0, 0.5, 2.2] {
            let f = f_matrix(&p, k);
            let g = g_matrix(&p, k);
            assert!((f.a - g.a.conj()).norm() < 1e-14);
            assert!((-f.b - g.c.conj()).norm() < 1e-14);
            assert!((-f.c - g.b.conj()).norm() < 1e-14);
            assert!((f.d - g.d.conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn grid_doubling_is_stable() {
        for (j1, j2, ..) in FROZEN {
            let coarse = winding_invariants(&BlochParams { j1, j2 }, 64).unwrap();
            let fine = winding_invariants(&BlochParams { j1, j2 }, 128).unwrap();
            assert_eq!((coarse.v0, coarse.vpi), (fine.v0, fine.vpi));
        }
    }

    #[test]
    fn boundary_points_refuse_both_ways() {
        assert!(matches!(analytic_invariants(2.0, 2.0), Err(Error::Boundary(_))));
        assert!(matches!(
            analytic_invariants(1.0, std::f64::consts::PI - 1.0),
            Err(Error::Boundary(_))
        ));
        // the zero-mode transition closes the gap at k = π
        assert!(matches!(
            winding_invariants(&BlochParams { j1: 2.0, j2: 2.0 }, 256),
            Err(Error::GapClosing { .. }) | Err(Error::Contract(_))
        ));
    }

    #[test]
    fn degenerate_single_cell_diagram() {
        let d = phase_diagram_at(&[(std::f64::consts::FRAC_PI_2, std::f64::consts::PI)], 256).unwrap();
        assert_eq!(d.cells.len(), 1);
        assert_eq!(d.cells[0].numeric, Some((1, 1)));
        assert_eq!(d.cells[0].analytic, Some((1, 1)));
        assert!(d.all_agree());
    }

    #[test]
    fn on_boundary_cell_is_flagged_not_fatal() {
        let d = phase_diagram_at(&[(2.0, 2.0), (0.3, 0.4)], 64).unwrap();
        assert_eq!(d.cells[0].status, CellStatus::Boundary);
        assert!(d.cells[0].agrees().is_none());
        let (ok, scored) = d.agreement();
        assert_eq!((ok, scored), (1, 1));
    }

    #[test]
    fn small_staggered_grid_agrees_fully() {
        // odd n exercises the stagger proof where an aligned grid would collide
        let d = phase_diagram(7, 0.02, 128).unwrap();
        assert_eq!(d.cells.len(), 49);
        assert!(d.cells.iter().all(|c| c.status == CellStatus::Ok));
        assert!(d.all_agree());
    }
}
