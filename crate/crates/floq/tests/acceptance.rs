//! End-to-end acceptance gates. Each test prints one `ACCEPTANCE n: PASS/FAIL`
//! line with the measured numbers (visible under `--nocapture`, and always
//! visible for failing gates), then asserts.
//!
//! Two gates measure honestly unreachable thresholds and are expected to
//! fail; their failure messages carry the analysis:
//!   - gate 3 (entangled-pair weights after one application), and
//!   - gate 6b (direct-protocol gap collapse below 1e-2 at this path length).

use std::time::Instant;

use floq::engine::{
    evolve_continuous, evolve_protocol, fidelity, floquet_operator, norm, protocol_operator_at,
    quasienergy_spectrum, Frame, TraceOptions,
};
use floq::experiments::{
    compare_protocols, disorder_sweep, min_gap_of, spectrum_trace, static_compare, ProtocolKind,
    StaticSweepConfig, SweepConfig,
};
use floq::lattice::{
    build_context, Branch, BranchCouplings, DisorderFamilies, SiteId, Sub, YJunctionSpec,
};
use floq::protocols::{
    basis_state, build_qst_stepwise, ideal_edge_mode, instantaneous_mode, transfer_target,
    ModeKind, StaticChainSpec, StaticMode, StaticProtocol, TransferPhase,
};
use floq::topology::phase_diagram;
use num_complex::Complex64 as C64;

fn verdict(gate: &str, pass: bool, detail: &str) -> bool {
    println!("ACCEPTANCE {gate}: {} — {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn nonideal_spec() -> YJunctionSpec {
    let lm = BranchCouplings {
        intra1: C64::new(0.0, 1.5),
        inter2: C64::new(0.0, 3.0),
        ..BranchCouplings::ZERO
    };
    let r = BranchCouplings {
        intra1: C64::new(0.0, 1.5),
        inter2: C64::new(0.0, -0.1),
        ..BranchCouplings::ZERO
    };
    YJunctionSpec { n_l: 3, n_m: 2, n_r: 2, l: lm, m: lm, r }
}

/// Clean stepwise transfer fidelity vs the signed analytic target.
fn clean_transfer_fidelity(spec: &YJunctionSpec, periods_per_step: usize) -> f64 {
    let ctx = build_context(spec).unwrap();
    let protocol = build_qst_stepwise(spec, &ctx.map, periods_per_step).unwrap();
    let psi0 = ideal_edge_mode(&ctx.map, Branch::L, 1, ModeKind::Zero).unwrap();
    let trace = evolve_protocol(&ctx, &protocol, &psi0, &TraceOptions::silent()).unwrap();
    let tgt = transfer_target(spec, &ctx.map, ModeKind::Zero).unwrap();
    fidelity(&tgt, &trace.final_state).unwrap()
}

#[test]
fn acceptance_1_invariant_grid() {
    let t0 = Instant::now();
    let diagram = phase_diagram(50, 0.02, 1024).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    let (agree, scored) = diagram.agreement();
    let pass = agree == 2500 && scored == 2500 && elapsed < 60.0;
    let detail = format!(
        "numeric = analytic on {agree}/{scored} of 2500 grid cells in {elapsed:.1} s (< 60 s)"
    );
    assert!(verdict("1", pass, &detail), "{detail}");
}

#[test]
fn acceptance_2_eigenrelations() {
    let spec = YJunctionSpec::ideal(5, 3, 2);
    let ctx = build_context(&spec).unwrap();

    let mut worst = 0.0f64;
    let residual = |u: &ndarray::Array2<C64>, v: &ndarray::Array1<C64>, eig: f64| -> f64 {
        u.dot(v).iter().zip(v.iter()).map(|(x, y)| (x - y * eig).norm_sqr()).sum::<f64>().sqrt()
    };

    // base drive
    let u = floquet_operator(&ctx, Frame::Canonical).unwrap();
    let zero = ideal_edge_mode(&ctx.map, Branch::L, 1, ModeKind::Zero).unwrap();
    let pi = ideal_edge_mode(&ctx.map, Branch::L, 1, ModeKind::Pi).unwrap();
    worst = worst.max(residual(&u, &zero, 1.0)).max(residual(&u, &pi, -1.0));

    // mid-step frozen-φ operators, both walk phases
    let protocol = build_qst_stepwise(&spec, &ctx.map, 40).unwrap();
    let n1 = (spec.n_l - 1) / 2;
    let mut points = 0usize;
    for step_idx in 0..protocol.steps.len() {
        let (phase, x) = if step_idx < n1 {
            (TransferPhase::LBranch, step_idx + 1)
        } else {
            (TransferPhase::RBranch, step_idx - n1 + 1)
        };
        for &phi in &[0.0, 0.3, std::f64::consts::FRAC_PI_4, 1.2, std::f64::consts::FRAC_PI_2] {
            let u = protocol_operator_at(&ctx, &protocol, step_idx, phi).unwrap();
            for (kind, eig) in [(ModeKind::Zero, 1.0), (ModeKind::Pi, -1.0)] {
                let v = instantaneous_mode(&ctx.map, phase, x, phi, kind).unwrap();
                worst = worst.max(residual(&u, &v, eig));
            }
            points += 1;
        }
    }
    let pass = worst < 1e-8 && points >= 20;
    let detail =
        format!("max eigenrelation residual {worst:.2e} (< 1e-8) over base + {points} (step, φ) points");
    assert!(verdict("2", pass, &detail), "{detail}");
}

#[test]
fn acceptance_3_entangled_pair_thresholds() {
    let spec = YJunctionSpec::ideal(5, 3, 2);
    let ctx = build_context(&spec).unwrap();
    let protocol = floq::protocols::build_entangle_protocol(&spec, &ctx.map, 200).unwrap();
    let eg1 = basis_state(&ctx.map, SiteId::new(Branch::L, 1, Sub::A)).unwrap();
    let psi = evolve_protocol(&ctx, &protocol, &eg1, &TraceOptions::silent()).unwrap().final_state;
    let w0 = fidelity(&ideal_edge_mode(&ctx.map, Branch::L, 1, ModeKind::Zero).unwrap(), &psi)
        .unwrap();
    let wp =
        fidelity(&ideal_edge_mode(&ctx.map, Branch::L, 1, ModeKind::Pi).unwrap(), &psi).unwrap();
    let pass = w0 >= 0.99 && wp <= 0.1;
    let detail = format!("|⟨0|ψ⟩| = {w0:.6} (need ≥ 0.99), |⟨π|ψ⟩| = {wp:.6} (need ≤ 0.1)");
    assert!(
        verdict("3", pass, &detail),
        "{detail}. The measured weights are converged (they are stable under doubling the \
         period budget and halving the recombination cadence): the recombination step mixes \
         the two channels through an avoided crossing whose holonomy error decays only \
         polynomially in the ramp rate, so ~2% of the weight stays in the π channel and the \
         0-channel weight saturates near 0.979. The thresholds (≥ 0.99 / ≤ 0.1) are not \
         attainable with this three-step schedule at 200 periods per step."
    );
}

#[test]
fn acceptance_4_stepwise_transfer() {
    let small = clean_transfer_fidelity(&YJunctionSpec::ideal(3, 2, 2), 40);
    let long = clean_transfer_fidelity(&YJunctionSpec::ideal(11, 4, 9), 70);

    let ladder: Vec<f64> = [10, 20, 40, 80]
        .iter()
        .map(|&p| clean_transfer_fidelity(&YJunctionSpec::ideal(3, 2, 2), p))
        .collect();
    let monotone = ladder.windows(2).all(|w| w[1] > w[0]);

    let pass = small >= 0.999 && long >= 0.99 && monotone;
    let detail = format!(
        "small (3,2,2)@40: F = {small:.6} (≥ 0.999); 24-cell path (11,4,9)@70: F = {long:.6} \
         (≥ 0.99); doubling ladder {ladder:.6?} monotone: {monotone}"
    );
    assert!(verdict("4", pass, &detail), "{detail}");
}

#[test]
fn acceptance_5_disorder_robustness() {
    let cfg = SweepConfig {
        spec: YJunctionSpec::ideal(3, 2, 2),
        protocol: ProtocolKind::TransferStepwise { periods_per_step: 40 },
        mode: ModeKind::Zero,
        w_grid: vec![0.0, 0.05, 0.5],
        realizations: 100,
        master_seed: 20260818,
        families: DisorderFamilies::ALL,
    };
    let res = disorder_sweep(&cfg).unwrap();
    let s0 = &res.stats[0];
    let s_small = &res.stats[1];
    let s_large = &res.stats[2];

    // nonideal couplings, numerically extracted end modes
    let spec = nonideal_spec();
    let ctx = build_context(&spec).unwrap();
    let kind = ProtocolKind::TransferStepwise { periods_per_step: 80 };
    let protocol = kind.build(&spec, &ctx.map).unwrap();
    let psi0 = kind.initial_state(&ctx, ModeKind::Zero).unwrap();
    let trace = evolve_protocol(&ctx, &protocol, &psi0, &TraceOptions::silent()).unwrap();
    let target = kind.target_state(&ctx, &protocol, ModeKind::Zero).unwrap().unwrap();
    let clean_nonideal = fidelity(&target, &trace.final_state).unwrap();

    let pass = s_small.mean > s_large.mean
        && s0.std == 0.0
        && s0.failed == 0
        && clean_nonideal >= 0.99;
    let detail = format!(
        "100 realizations: mean F(0.05) = {:.6} > mean F(0.5) = {:.6}: {}; std(W=0) = {:e} \
         (exactly 0); nonideal clean F = {clean_nonideal:.6} (≥ 0.99)",
        s_small.mean,
        s_large.mean,
        s_small.mean > s_large.mean,
        s0.std,
    );
    assert!(verdict("5", pass, &detail), "{detail}");
}

/// Gate 6, attainable parts: paired stepwise-vs-direct sweep at the 30+30
/// qubit path (15 L cells + 15 R cells), 6600 total periods, shared draws;
/// stepwise mean ≥ direct mean at every W, and the stepwise gap floor stays
/// above 0.1. The direct protocol's gap collapse is gate 6b.
#[test]
fn acceptance_6_long_path_paired_sweep() {
    let t0 = Instant::now();
    let spec = YJunctionSpec::ideal(15, 4, 15);
    let stepwise = SweepConfig {
        spec: spec.clone(),
        protocol: ProtocolKind::TransferStepwise { periods_per_step: 300 },
        mode: ModeKind::Zero,
        w_grid: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
        realizations: 100,
        master_seed: 6_0606,
        families: DisorderFamilies::ALL,
    };
    let direct = SweepConfig {
        protocol: ProtocolKind::TransferDirect { total_periods: 6600 },
        ..stepwise.clone()
    };
    let cmp = compare_protocols(&stepwise, &direct).unwrap();
    // W = 0 is a bitwise tie up to reference-norm rounding; allow 1e-9 there.
    let means_ok = cmp.points.iter().all(|p| p.mean_a >= p.mean_b - 1e-9);

    let ctx = build_context(&spec).unwrap();
    let prot_s = stepwise.protocol.build(&spec, &ctx.map).unwrap();
    let rows = spectrum_trace(&ctx, &prot_s, 50, 2, 2, 0.3).unwrap();
    let gap_s = min_gap_of(&rows);
    let elapsed = t0.elapsed().as_secs_f64();

    let pass = means_ok && gap_s > 0.1 && elapsed < 1800.0;
    let deltas = cmp
        .points
        .iter()
        .map(|p| format!("{:+.2e}", p.mean_a - p.mean_b))
        .collect::<Vec<_>>()
        .join(", ");
    let detail = format!(
        "stepwise − direct mean fidelity per W: [{deltas}] (all ≥ −1e-9: {means_ok}); \
         stepwise gap floor {gap_s:.4} (> 0.1); {elapsed:.0} s (< 1800 s)"
    );
    assert!(verdict("6", pass, &detail), "{detail}");
}

/// Gate 6b (expected honest failure): the direct protocol's minimum
/// quasienergy gap at this path length is π/16 ≈ 0.196, not < 10⁻².
#[test]
fn acceptance_6b_direct_gap_collapse() {
    let spec = YJunctionSpec::ideal(15, 4, 15);
    let ctx = build_context(&spec).unwrap();
    let kind = ProtocolKind::TransferDirect { total_periods: 6600 };
    let prot = kind.build(&spec, &ctx.map).unwrap();
    let rows = spectrum_trace(&ctx, &prot, 50, 2, 2, 0.3).unwrap();
    let gap = min_gap_of(&rows);
    let pass = gap < 1e-2;
    let detail = format!("direct-protocol min quasienergy gap {gap:.6} (threshold < 1e-2)");
    assert!(
        verdict("6b", pass, &detail),
        "{detail}. The collapse scale is set by the R-branch length alone: once the direct \
         ramp couples the full R chain, the smallest bulk quasienergy approaches π/(n_R + 1) \
         — here π/16 = 0.196350, measured {gap:.6}. Reaching 1e-2 would need n_R ≥ 314 cells, \
         far beyond the stated 30-qubit branch, so the sub-threshold dip is unattainable at \
         this size. The qualitative claim (direct gap shrinking with 1/length while the \
         stepwise floor is size-independent) is what gates 6 and 7 verify."
    );
}

#[test]
fn acceptance_7_gap_persistence_under_doubling() {
    let gap_at = |spec: &YJunctionSpec| -> f64 {
        let ctx = build_context(spec).unwrap();
        let prot = build_qst_stepwise(spec, &ctx.map, 40).unwrap();
        min_gap_of(&spectrum_trace(&ctx, &prot, 10, 2, 2, 0.3).unwrap())
    };
    let g10 = gap_at(&YJunctionSpec::ideal(5, 2, 3)); // 10-cell path
    let g20 = gap_at(&YJunctionSpec::ideal(11, 4, 5)); // 20-cell path
    let rel = (g10 - g20).abs() / g10.max(g20);
    let pass = rel < 0.05;
    let detail =
        format!("stepwise gap floor: {g10:.6} at 10 cells vs {g20:.6} at 20 cells, Δ = {:.2}% (< 5%)", 100.0 * rel);
    assert!(verdict("7", pass, &detail), "{detail}");
}

#[test]
fn acceptance_8_static_improved_protocol() {
    let spec = StaticChainSpec { n_q: 21, g: 1.0 };
    let t_total = std::f64::consts::PI / 0.01;
    let cfg = StaticSweepConfig {
        original: StaticProtocol::new(spec, StaticMode::Original, t_total, 0.01).unwrap(),
        improved: StaticProtocol::new(spec, StaticMode::Stepwise, t_total, 0.01).unwrap(),
        w_grid: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
        realizations: 24,
        master_seed: 8_0808,
        gap_samples: 201,
    };
    let res = static_compare(&cfg).unwrap();
    let gap_ok = res.min_gap_improved > res.min_gap_original;
    let means_ok = res.points.iter().all(|p| p.mean_a >= p.mean_b - 1e-9);
    let pass = gap_ok && means_ok;
    let deltas = res
        .points
        .iter()
        .map(|p| format!("{:+.2e}", p.mean_a - p.mean_b))
        .collect::<Vec<_>>()
        .join(", ");
    let detail = format!(
        "min gap {:.4}g (improved) > {:.4}g (original): {gap_ok}; paired improved − original \
         mean fidelity per W: [{deltas}] (all ≥ −1e-9: {means_ok})",
        res.min_gap_improved, res.min_gap_original,
    );
    assert!(verdict("8", pass, &detail), "{detail}");
}

#[test]
fn acceptance_9_numerical_hygiene() {
    // (a) unitarity drift over 10⁴ periods (4 schedule steps × 2500)
    let spec = YJunctionSpec::ideal(5, 2, 2);
    let ctx = build_context(&spec).unwrap();
    let protocol = build_qst_stepwise(&spec, &ctx.map, 2500).unwrap();
    assert_eq!(protocol.total_periods(), 10_000);
    let psi0 = ideal_edge_mode(&ctx.map, Branch::L, 1, ModeKind::Zero).unwrap();
    let trace = evolve_protocol(&ctx, &protocol, &psi0, &TraceOptions::silent()).unwrap();
    let drift = (norm(&trace.final_state) - 1.0).abs();

    // (b) continuous-integrator self-convergence under dt halving
    let chain = StaticChainSpec { n_q: 21, g: 1.0 };
    let t_total = std::f64::consts::PI / 0.01;
    let coarse = StaticProtocol::new(chain, StaticMode::Original, t_total, 0.01).unwrap();
    let fine = StaticProtocol::new(chain, StaticMode::Original, t_total, 0.005).unwrap();
    let s0 = coarse.initial_state();
    let a = evolve_continuous(|t| coarse.hamiltonian(t, None), t_total, coarse.dt, &s0).unwrap();
    let b = evolve_continuous(|t| fine.hamiltonian(t, None), t_total, fine.dt, &s0).unwrap();
    let dt_change = (&a - &b).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    // (c) frame equivalence of quasienergy spectra
    let mut frame_diff = 0.0f64;
    for s in [YJunctionSpec::ideal(5, 3, 2), nonideal_spec()] {
        let c = build_context(&s).unwrap();
        let pa = quasienergy_spectrum(&floquet_operator(&c, Frame::Canonical).unwrap(), false)
            .unwrap()
            .phases;
        let pb = quasienergy_spectrum(&floquet_operator(&c, Frame::Symmetric).unwrap(), false)
            .unwrap()
            .phases;
        frame_diff = pa
            .iter()
            .zip(pb.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(frame_diff, f64::max);
    }

    let pass = drift < 1e-10 && dt_change < 1e-6 && frame_diff < 1e-10;
    let detail = format!(
        "norm drift {drift:.2e} per 1e4 periods (< 1e-10); dt-halving state change \
         {dt_change:.2e} (< 1e-6); frame spectrum difference {frame_diff:.2e} (< 1e-10)"
    );
    assert!(verdict("9", pass, &detail), "{detail}");
}
