mod oracles;

use chamberflow::catalog::{self, validate, ChamberModel, RadialDatum};
use chamberflow::Error;
use proptest::prelude::*;

#[test]
fn documents_load_and_report_errors() {
    let ok = r#"{"name":"r","rank":1,"theorem_a":false,"radials":[{"root":[1],"m_plus":1,"m_minus":0,"d_plus":1}]}"#;
    let m = catalog::load_scenario(ok).unwrap();
    assert_eq!(chamberflow::chamber::wall_gaps(&m, &[0.0]).unwrap(), vec![1.0]);

    let unknown = r#"{"name":"r","rank":1,"radials":[{"root":[1],"m_plus":1,"d_plus":1,"colour":2}]}"#;
    assert!(matches!(catalog::load_scenario(unknown), Err(Error::Parse { line: 1, .. })));

    let broken = "{\n \"name\": \"r\",\n \"rank\": 1,\n \"radials\": [\n";
    match catalog::load_scenario(broken) {
        Err(Error::Parse { line, .. }) => assert!(line >= 4),
        other => panic!("{other:?}"),
    }

    let zero = r#"{"name":"z","rank":2,"radials":[{"root":[0,0],"m_plus":1,"d_plus":1}]}"#;
    let err = catalog::load_scenario(zero).unwrap_err();
    assert!(err.to_string().contains("root must be nonzero"));
}

#[test]
fn a2_document_is_concurrent() {
    let h = 3f64.sqrt() / 2.0;
    let doc = format!(
        r#"{{"name":"a2","rank":2,"theorem_a":true,"radials":[
            {{"root":[1,0],"m_plus":1,"m_minus":0,"d_plus":1}},
            {{"root":[-0.5,{h}],"m_plus":1,"m_minus":0,"d_plus":1}},
            {{"root":[0.5,{h}],"m_plus":1,"m_minus":0,"d_plus":2}}]}}"#
    );
    let m = catalog::load_scenario(&doc).unwrap();
    let o = m.concurrent_point().unwrap();
    assert!((o[0] - 1.0).abs() < 1e-12 && (o[1] - 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn theorem_a_findings() {
    let r = RadialDatum::new(vec![1.0], 1, 2, Some(1.0), Some(1.0));
    let m = ChamberModel::new_unchecked("x", 1, vec![r], true);
    let f = validate(&m);
    assert!(f.iter().any(|f| f.message == "m_plus < m_minus violates Theorem A hypothesis"));
    assert!(validate(&catalog::builtin("rank1", &[]).unwrap()).is_empty());
}

#[test]
fn builtins_and_templates() {
    for (name, _) in catalog::BUILTINS {
        assert!(catalog::builtin(name, &[]).is_ok(), "{name}");
    }
    assert!(matches!(catalog::builtin("nonexistent", &[]), Err(Error::UnknownBuiltin(_))));
    let a2 = catalog::builtin("a2", &[1.0, 1.0]).unwrap();
    assert_eq!(a2.radials().len(), 3);
    assert!(a2.concurrent_point().is_some());
    for row in catalog::TABLE1 {
        assert!(matches!(catalog::builtin(row.key, &[]), Err(Error::BuiltinParams { .. })));
        assert!(row.skeleton().radials.is_empty());
    }
}

fn radial() -> impl Strategy<Value = RadialDatum> {
    (
        prop::collection::vec(-3.0..3.0f64, 2),
        0u32..4,
        0u32..3,
        0.01..5.0f64,
        0.01..5.0f64,
    )
        .prop_map(|(root, mp, mm, dp, dm)| {
            let mp = if mp + mm == 0 { 1 } else { mp };
            RadialDatum::new(root, mp, mm, (mp > 0).then_some(dp), (mm > 0).then_some(dm))
        })
}

proptest! {
    #[test]
    fn documents_round_trip_bit_for_bit(radials in prop::collection::vec(radial(), 1..5)) {
        let m = ChamberModel::new_unchecked("p", 2, radials, false);
        prop_assume!(validate(&m).is_empty());
        let m = ChamberModel::new("p", 2, m.radials().to_vec(), false).unwrap();
        let back = catalog::load_scenario(&m.to_json()).unwrap();
        prop_assert_eq!(&back, &m);
        for (a, b) in back.radials().iter().zip(m.radials()) {
            prop_assert_eq!(a.d_plus.map(f64::to_bits), b.d_plus.map(f64::to_bits));
            prop_assert_eq!(a.d_minus.map(f64::to_bits), b.d_minus.map(f64::to_bits));
            prop_assert!(a.root.iter().zip(&b.root).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn validation_is_pure(radials in prop::collection::vec(radial(), 0..5), flag: bool) {
        let m = ChamberModel::new_unchecked("p", 2, radials, flag);
        prop_assert_eq!(validate(&m), validate(&m.clone()));
    }

    #[test]
    fn concurrency_survives_permutation(d in 0.1..3.0f64, shift in 0usize..3, flip: bool) {
        let a2 = catalog::builtin("a2", &[1.0, d]).unwrap();
        let mut radials = a2.radials().to_vec();
        radials.rotate_left(shift);
        if flip {
            radials.reverse();
        }
        let p = ChamberModel::new("p", 2, radials, true).unwrap();
        prop_assert!(p.concurrent_point().is_some());
        let (o1, o2) = (a2.concurrent_point().unwrap(), p.concurrent_point().unwrap());
        prop_assert!((o1[0] - o2[0]).abs() < 1e-12 && (o1[1] - o2[1]).abs() < 1e-12);

        let slab = catalog::builtin("slab", &[1.0, d]).unwrap();
        let mut r = slab.radials().to_vec();
        r.reverse();
        prop_assert!(ChamberModel::new("s", 1, r, false).unwrap().concurrent_point().is_none());
    }
}
