use bergquant_web::{bergman_profile_rows, measure_quantization_rows, ot_table_rows};

#[test]
fn fubini_study_profile_is_flat() {
    // s = 0 is φ_FS: density (k+1)/k, unit metric ratio
    let rows = bergman_profile_rows(0.0, 1.0, 20, -5.0, 5.0, 11).unwrap();
    assert_eq!(rows.len(), 44);
    for r in rows.chunks(4) {
        assert!((r[1] - 21.0 / 20.0).abs() < 1e-10, "{r:?}");
        assert!((r[2] - 1.0).abs() < 1e-10, "{r:?}");
    }
}

#[test]
fn translated_fs_quantization_matches_target_shape() {
    let rows = measure_quantization_rows(0, 0.0, 0.0, 0.0, 30, -3.0, 3.0, 7).unwrap();
    let (body, trailer) = rows.split_at(rows.len() - 3);
    assert!(trailer[0].is_nan() && trailer[1] == 30.0 && trailer[2] > 0.0);
    for r in body.chunks(3) {
        // shift 0 is ω_FS itself: target 1, quantum (k+1)/k up to the
        // piecewise-quadratic Calabi–Yau spline on the 0.02 grid
        assert!((r[1] - 1.0).abs() < 1e-6, "{r:?}");
        assert!((r[2] - 31.0 / 30.0).abs() < 1e-4, "{r:?}");
    }
}

#[test]
fn ot_products_are_one() {
    let rows = ot_table_rows(1.0, 3).unwrap();
    assert_eq!(rows.len(), 12);
    for r in rows.chunks(3) {
        assert!((r[2] - 1.0).abs() < 1e-8, "{r:?}");
    }
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(bergman_profile_rows(0.5, 1.0, 0, -1.0, 1.0, 10).is_err());
    assert!(bergman_profile_rows(0.5, 1.0, 10, 1.0, -1.0, 10).is_err());
    assert!(measure_quantization_rows(7, 0.0, 0.0, 0.0, 10, -1.0, 1.0, 10).is_err());
    assert!(measure_quantization_rows(1, 0.0, 1.0, 1.5, 10, -1.0, 1.0, 10).is_err());
    assert!(ot_table_rows(-1.0, 2).is_err());
}
