//! Winding invariants: numeric phase tracking against the closed-form rule
//! (υ₀ = 1 iff j₂ > j₁, υ_π = 1 iff j₁ + j₂ > π), refusal behavior on the
//! critical lines, and the phase-diagram CSV schema.

use floq::topology::{
    analytic_invariants, phase_diagram, winding_invariants, BlochParams, CellStatus,
};
use floq::Error;

#[test]
fn frozen_points_agree_with_the_rule() {
    let pts = [
        (std::f64::consts::FRAC_PI_2, std::f64::consts::PI, 1, 1),
        (std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_4, 0, 0),
        (0.3, 0.4, 1, 0),
        (0.7, 2.9, 1, 1),
        (2.9, 0.7, 0, 1),
    ];
    for (j1, j2, v0, vpi) in pts {
        let p = BlochParams { j1, j2 };
        let num = winding_invariants(&p, 1024).unwrap();
        let ana = analytic_invariants(j1, j2).unwrap();
        assert_eq!((num.v0, num.vpi), (v0, vpi), "numeric at ({j1}, {j2})");
        assert_eq!((ana.0, ana.1), (v0, vpi), "analytic at ({j1}, {j2})");
    }
}

#[test]
fn critical_lines_refuse_rather_than_guess() {
    // j1 = j2 closes the zero gap: the numeric tracker must hit a vanishing
    // entry, and the analytic rule must refuse the boundary outright.
    let p = BlochParams { j1: 2.0, j2: 2.0 };
    match winding_invariants(&p, 1024) {
        Err(Error::GapClosing { .. }) => {}
        other => panic!("expected gap-closing refusal, got {other:?}"),
    }
    match analytic_invariants(2.0, 2.0) {
        Err(Error::Boundary(_)) => {}
        other => panic!("expected boundary refusal, got {other:?}"),
    }
    // j1 + j2 = π closes the π gap the same way.
    assert!(analytic_invariants(1.0, std::f64::consts::PI - 1.0).is_err());
}

#[test]
fn resolution_doubling_does_not_move_integers() {
    for (j1, j2) in [(0.5, 2.0), (1.3, 1.1), (2.8, 2.0), (0.02, 3.1)] {
        let p = BlochParams { j1, j2 };
        let lo = winding_invariants(&p, 128).unwrap();
        let hi = winding_invariants(&p, 4096).unwrap();
        assert_eq!((lo.v0, lo.vpi), (hi.v0, hi.vpi), "at ({j1}, {j2})");
    }
}

#[test]
fn phase_diagram_csv_schema_and_agreement() {
    let diagram = phase_diagram(8, 0.05, 256).unwrap();
    assert_eq!(diagram.cells.len(), 64);
    assert!(diagram.all_agree());
    assert!(diagram.cells.iter().all(|c| c.status == CellStatus::Ok));

    let mut buf = Vec::new();
    diagram.to_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "j1,j2,v0_numeric,vpi_numeric,v0_analytic,vpi_analytic,status"
    );
    assert_eq!(text.lines().count(), 65);
}
