//! Runs each example's body so the documented walkthroughs stay correct.

#[allow(dead_code)]
#[path = "../examples/hsv_conversion.rs"]
mod hsv_conversion;
#[allow(dead_code)]
#[path = "../examples/retinex_saturation.rs"]
mod retinex_saturation;
#[allow(dead_code)]
#[path = "../examples/otsu_threshold.rs"]
mod otsu_threshold;
#[allow(dead_code)]
#[path = "../examples/color_filter.rs"]
mod color_filter;
#[allow(dead_code)]
#[path = "../examples/dbscan_noise.rs"]
mod dbscan_noise;
#[allow(dead_code)]
#[path = "../examples/analyze_fixture.rs"]
mod analyze_fixture;
#[allow(dead_code)]
#[path = "../examples/station_survey.rs"]
mod station_survey;

use corroscan::colorfilter::Fusion;
use corroscan::pipeline::Classification;
use corroscan::threshold::ClassSide;

#[test]
fn hsv_example_hits_primary_hues() {
    let hues: Vec<f64> = hsv_conversion::run_example().unwrap().iter().map(|p| p.h).collect();
    assert_eq!(&hues[..3], &[0.0, 120.0, 240.0]);
    assert!(hues[3] > 15.0 && hues[3] < 25.0);
}

#[test]
fn retinex_example_stays_in_unit_range() {
    let plane = retinex_saturation::run_example().unwrap();
    let (lo, hi) = plane.values().iter().fold((1.0f64, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    assert_eq!((lo, hi), (0.0, 1.0));
}

#[test]
fn otsu_example_refines_trimodal_plane() {
    let runs = otsu_threshold::run_example().unwrap();
    assert_eq!(runs[0].mask.count(), 16 * 64);
    assert_eq!(runs[1].refined_class, Some(ClassSide::High));
    assert_eq!(runs[1].mask.count(), 8 * 64);
}

#[test]
fn color_filter_example_and_fusion_is_accurate() {
    let results = color_filter::run_example().unwrap();
    let and = results.iter().find(|(f, _)| *f == Fusion::AndWithThreshold).unwrap().1;
    assert!(and >= 0.7, "{and}");
}

#[test]
fn dbscan_example_keeps_two_blobs() {
    let mask = dbscan_noise::run_example().unwrap();
    assert!(mask.get(30, 30) && mask.get(90, 60));
    assert!(!mask.get(127, 0) || mask.count() < 1000);
}

#[test]
fn analyze_example_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let report = analyze_fixture::run_example(Some(dir.path().to_path_buf())).unwrap();
    assert_eq!(report.classification, Classification::Rusty);
    for suffix in ["mask.png", "overlay.png", "report.json"] {
        assert!(dir.path().join(format!("fixture_00.{suffix}")).exists(), "{suffix}");
    }
}

#[test]
fn survey_example_classifies_all_objects() {
    let summary = station_survey::run_example().unwrap();
    assert_eq!((summary.rusty, summary.clean, summary.failed), (4, 3, 0));
}
