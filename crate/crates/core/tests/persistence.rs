mod common;

use common::shapes;
use gda_core::experiment::{run_pipeline, ExperimentConfig, PcSource, RunReport, ViSource};
use gda_core::params::{Exact, PaperParams};
use gda_core::pure_circuit::ExampleKind;
use gda_core::solver::SolverConfig;
use gda_core::{GdaInstance, GdaParams, JointPoint, LinViInstance, PureCircuitInstance};
use proptest::prelude::*;

fn round_trip<T>(v: &T) -> T
where
    T: serde::Serialize + serde::de::DeserializeOwned,
{
    serde_json::from_str(&serde_json::to_string(v).unwrap()).unwrap()
}

fn config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        pc: PcSource::Generate {
            kind: ExampleKind::Ring,
            size: 3,
        },
        vi: ViSource::Generate { m: 2, rho: None },
        params: GdaParams::custom(4, 1e-3, 0.5).unwrap(),
        solver: SolverConfig {
            step: Some(0.05),
            max_iters: 2000,
            restarts: 3,
            ..Default::default()
        },
        start: Default::default(),
        rho: None,
        output: None,
        seed,
    }
}

#[test]
fn instances_round_trip() {
    for (_, inst) in shapes() {
        let back: GdaInstance = round_trip(&inst);
        assert_eq!(back, inst);
        assert_eq!(round_trip(&inst.pc), inst.pc);
        assert_eq!(round_trip(&inst.vi), inst.vi);
    }
}

#[test]
fn instance_file_layout() {
    let inst = &shapes()[1].1;
    let v: serde_json::Value = serde_json::to_value(inst).unwrap();
    for key in ["pc", "vi", "params", "bounds"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    for key in ["G", "L", "B"] {
        assert!(v["bounds"][key].is_f64());
    }
    for key in ["n", "epsilon", "delta", "mode"] {
        assert!(v["params"].get(key).is_some());
    }
    assert_eq!(v["pc"]["nor"], serde_json::json!([[1, 2, 0]]));
    assert!(v["vi"]["D"].is_array());
}

#[test]
fn third_survives_exactly() {
    let p = JointPoint::new(
        vec![1.0 / 3.0, 0.1, 2f64.sqrt() / 2.0],
        vec![0.0, 1.0, 1e-17],
    );
    let back: JointPoint = round_trip(&p);
    for (a, b) in p.x.iter().chain(&p.y).zip(back.x.iter().chain(&back.y)) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn run_report_round_trips_and_reruns() {
    let report = run_pipeline(&config(5), false).unwrap();
    let back: RunReport = round_trip(&report);
    assert_eq!(back, report);
    // the embedded config reproduces the report
    let again = run_pipeline(&report.config, false).unwrap();
    assert_eq!(
        serde_json::to_string(&again).unwrap(),
        serde_json::to_string(&report).unwrap()
    );
    assert!(report.solver.pass);
    assert!(report.audit.as_ref().unwrap().unconditional_holds);
}

#[test]
fn paper_params_round_trip() {
    let p = PaperParams::new(2, 3, "1/2".parse().unwrap(), 1000).unwrap();
    let back: PaperParams = round_trip(&p);
    assert_eq!(back, p);
    assert_eq!(p.delta.to_string(), "1/16384");
    assert!(!p.materializable);
}

#[test]
fn malformed_json_reports_location() {
    let err = serde_json::from_str::<PureCircuitInstance>("{\"kappa\": 3,\n \"nor\": [[1,2]]}")
        .unwrap_err();
    assert!(err.line() == 2 && err.column() > 0);
    let err = serde_json::from_str::<LinViInstance>(
        "{\"m\": 1, \"D\": [[0.5]], \"c\": [0.1, 0.2], \"rho\": 0.1}",
    );
    assert!(err.is_err());
    let bad: Result<Exact, _> = "1/0".parse();
    assert!(bad.is_err());
}

proptest! {
    #[test]
    fn points_round_trip(xs in proptest::collection::vec(0.0f64..=1.0, 1..20)) {
        let p = JointPoint::new(xs.clone(), xs.iter().rev().copied().collect());
        let back: JointPoint = round_trip(&p);
        prop_assert_eq!(back, p);
    }

    #[test]
    fn exact_round_trip(p in -1000i64..1000, q in 1i64..1000) {
        let e: Exact = format!("{p}/{q}").parse().unwrap();
        let back: Exact = round_trip(&e);
        prop_assert_eq!(back, e);
    }
}
