use proptest::prelude::*;
use reim_core::{load_model, save_model, Error, Interval, ModelFile, PartialFraction, ReimConfig, TargetFunction};

#[test]
fn built_model_round_trips_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let model = ReimConfig::rescaled(1e-6).unwrap().with_n(12).build().unwrap();
    let pf = model.interpolate_target(&TargetFunction::power_neg(0.5).unwrap()).unwrap();
    let file = ModelFile::from_model(&model, Some(&pf)).unwrap().with_meta("target", "pow:0.5");
    let path = dir.path().join("model.json");
    save_model(&path, &file).unwrap();

    let back = load_model(&path).unwrap();
    assert_eq!(back, file);
    assert_eq!(back.to_fraction().unwrap(), pf);
    let rebuilt = back.to_model().unwrap();
    assert_eq!(rebuilt.poles_b(), model.poles_b());
    assert_eq!(rebuilt.interp_x(), model.interp_x());
    let again = rebuilt.interpolate_target(&TargetFunction::power_neg(0.5).unwrap()).unwrap();
    assert_eq!(again, pf);
}

#[test]
fn bare_model_has_no_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let model = ReimConfig::rescaled(1e-4).unwrap().with_n(6).build().unwrap();
    let path = dir.path().join("bare.json");
    save_model(&path, &ModelFile::from_model(&model, None).unwrap()).unwrap();
    let back = load_model(&path).unwrap();
    assert!(back.residues.is_empty());
    assert!(matches!(back.to_fraction(), Err(Error::InvariantViolation(_))));
    assert_eq!(back.to_model().unwrap().len(), 6);
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_model(dir.path().join("absent.json")), Err(Error::Io(_))));
}

#[test]
fn edited_file_with_negative_shift_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("edited.json");
    let pf = PartialFraction::new(vec![1.0, 2.0], vec![0.5, 0.25]).unwrap();
    save_model(&path, &ModelFile::from_fraction(Interval::rescaled(1e-6).unwrap(), &pf)).unwrap();
    let text = std::fs::read_to_string(&path).unwrap().replacen("2.0", "-1.0", 1);
    std::fs::write(&path, text).unwrap();
    assert!(matches!(load_model(&path), Err(Error::InvariantViolation(_))));
}

#[test]
fn unknown_fields_are_parse_errors() {
    let text = r#"{"eta": 1e-6, "hi": 1.0, "poles": [1.0], "residues": [1.0], "colour": "red"}"#;
    assert!(matches!(ModelFile::from_json(text), Err(Error::Parse { line: 1, .. })));
}

#[test]
fn saving_an_invalid_file_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("never.json");
    let file = ModelFile {
        eta: 1.0,
        hi: 0.5,
        poles: vec![1.0],
        residues: vec![1.0],
        interp_points: None,
        meta: Default::default(),
    };
    assert!(save_model(&path, &file).is_err());
    assert!(!path.exists());
}

fn awkward_real() -> impl Strategy<Value = f64> {
    prop_oneof![
        (1e-300f64..1e300),
        (-1e6f64..1e6),
        any::<u64>().prop_map(|bits| f64::from_bits(bits % 0x7fe0_0000_0000_0000)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_round_trip_is_bit_exact(
        poles in prop::collection::btree_set(1u64..u64::MAX / 4, 1..20),
        residues in prop::collection::vec(awkward_real(), 20),
    ) {
        // positive finite shifts from raw bit patterns
        let poles: Vec<f64> = poles.into_iter().map(|b| f64::from_bits(b % 0x7fe0_0000_0000_0000 + 1)).collect();
        let mut sorted = poles.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        prop_assume!(sorted.len() == poles.len());
        let residues = residues[..poles.len()].to_vec();
        let pf = PartialFraction::new(poles, residues).unwrap();
        let file = ModelFile::from_fraction(Interval::new(1e-9, 3.0).unwrap(), &pf);
        let back = ModelFile::from_json(&file.to_json()).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back.poles), bits(&file.poles));
        prop_assert_eq!(bits(&back.residues), bits(&file.residues));
    }
}
