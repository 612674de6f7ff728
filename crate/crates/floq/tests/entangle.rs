//! Frozen-value checks of the three-step entangling sequence on the (5,3,2)
//! junction: one application splits the bare excitation between the 0 and π
//! channels; repeating it keeps rotating the pair; the first step alone
//! carries a cell-1 mode to cell 3 losslessly.

use floq::engine::{evolve_protocol, State, TraceOptions};
use floq::lattice::{build_context, Branch, ModelContext, SiteId, Sub, YJunctionSpec};
use floq::protocols::{basis_state, build_entangle_protocol, ideal_edge_mode, ModeKind, Protocol};

const FROZEN_TOL: f64 = 1e-9;

fn setup() -> (ModelContext, Protocol) {
    let spec = YJunctionSpec::ideal(5, 3, 2);
    let ctx = build_context(&spec).unwrap();
    let protocol = build_entangle_protocol(&spec, &ctx.map, 200).unwrap();
    (ctx, protocol)
}

fn apply(ctx: &ModelContext, protocol: &Protocol, psi: &State) -> State {
    evolve_protocol(ctx, protocol, psi, &TraceOptions::silent()).unwrap().final_state
}

fn mode_weight(ctx: &ModelContext, kind: ModeKind, psi: &State) -> f64 {
    let m = ideal_edge_mode(&ctx.map, Branch::L, 1, kind).unwrap();
    floq::engine::fidelity(&m, psi).unwrap()
}

#[test]
fn one_application_splits_the_excitation() {
    let (ctx, protocol) = setup();
    let eg1 = basis_state(&ctx.map, SiteId::new(Branch::L, 1, Sub::A)).unwrap();
    let psi = apply(&ctx, &protocol, &eg1);
    let w0 = mode_weight(&ctx, ModeKind::Zero, &psi);
    let wp = mode_weight(&ctx, ModeKind::Pi, &psi);
    assert!((w0 - 0.979329145284).abs() < FROZEN_TOL, "zero weight {w0}");
    assert!((wp - 0.202273079865).abs() < FROZEN_TOL, "pi weight {wp}");
}

#[test]
fn three_applications_keep_rotating_the_pair() {
    let (ctx, protocol) = setup();
    let eg1 = basis_state(&ctx.map, SiteId::new(Branch::L, 1, Sub::A)).unwrap();
    let mut psi = eg1;
    for _ in 0..3 {
        psi = apply(&ctx, &protocol, &psi);
    }
    let w0 = mode_weight(&ctx, ModeKind::Zero, &psi);
    let wp = mode_weight(&ctx, ModeKind::Pi, &psi);
    assert!((w0 - 0.573715677661).abs() < FROZEN_TOL, "zero weight {w0}");
    assert!((wp - 0.819054495116).abs() < FROZEN_TOL, "pi weight {wp}");
}

#[test]
fn first_step_alone_walks_a_mode_out_to_cell_three() {
    let (ctx, protocol) = setup();
    let step1 = Protocol { name: "bridge-only".to_string(), steps: vec![protocol.steps[0].clone()] };
    let zero1 = ideal_edge_mode(&ctx.map, Branch::L, 1, ModeKind::Zero).unwrap();
    let psi = apply(&ctx, &step1, &zero1);

    // nothing left on cell 1 …
    assert!(mode_weight(&ctx, ModeKind::Zero, &psi) < 1e-12);
    assert!(mode_weight(&ctx, ModeKind::Pi, &psi) < 1e-12);
    // … everything arrived as the cell-3 zero mode
    let zero3 = ideal_edge_mode(&ctx.map, Branch::L, 3, ModeKind::Zero).unwrap();
    let w3 = floq::engine::fidelity(&zero3, &psi).unwrap();
    assert!((w3 - 1.0).abs() < 1e-9, "cell-3 weight {w3}");
}

#[test]
fn step_budgets_round_up_to_the_slow_cadence() {
    let spec = YJunctionSpec::ideal(5, 3, 2);
    let ctx = build_context(&spec).unwrap();
    // an odd request cannot tile the every-other-period cadence of step 3
    let protocol = build_entangle_protocol(&spec, &ctx.map, 201).unwrap();
    assert_eq!(protocol.steps[0].periods, 201);
    assert_eq!(protocol.steps[1].periods, 201);
    assert_eq!(protocol.steps[2].periods % 2, 0);
    assert!(protocol.steps[2].periods >= 201);
    protocol.validate().unwrap();
}
