//! Golden-file stability: the committed outputs are byte-identical to what
//! the library produces today.

use sphq_core::geometry::{sigma, AngularOffset, Latitude};
use sphq_core::models::{latitude_table, quantize_equator, quantize_two_circles};
use sphq_core::report::{emit_curve, write_csv, write_json, OutputDocument};

fn golden(name: &str) -> String {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {path}: {e}"))
}

fn lat(v: f64) -> Latitude {
    Latitude::new(v).unwrap()
}

fn csv_bytes(doc: &OutputDocument) -> String {
    let mut buf = Vec::new();
    write_csv(doc, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

fn json_bytes(doc: &OutputDocument) -> String {
    let mut buf = Vec::new();
    write_json(doc, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn latitude_table_csv_is_stable() {
    let rows = latitude_table(120, 6, &[lat(0.0), lat(0.6), lat(1.0)]).unwrap();
    let doc = OutputDocument::for_table(120, 6, rows);
    assert_eq!(csv_bytes(&doc), golden("table_120_6.csv"));
}

#[test]
fn three_latitude_curve_csv_is_stable() {
    let samples = emit_curve(&[lat(0.0), lat(0.5), lat(1.0)], 9).unwrap();
    // Every emitted sigma is recomputable from its own row.
    for s in &samples {
        let re = sigma(lat(s.phi), AngularOffset::new(s.dtheta).unwrap());
        assert!((re - s.sigma).abs() <= 1e-12);
    }
    let doc = OutputDocument::for_curve(samples);
    assert_eq!(csv_bytes(&doc), golden("curve_three_latitudes.csv"));
}

#[test]
fn two_circle_error_json_is_stable() {
    let report = quantize_two_circles(120, 8, lat(0.6)).unwrap();
    let doc = OutputDocument::for_distortion("error", report);
    assert_eq!(json_bytes(&doc), golden("two_circles_240_8.json"));
}

#[test]
fn equator_error_json_is_stable() {
    let report = quantize_equator(12, 5).unwrap();
    let doc = OutputDocument::for_distortion("error", report);
    assert_eq!(json_bytes(&doc), golden("equator_12_5.json"));
}

#[test]
fn two_circle_quantize_json_is_stable() {
    let report = quantize_two_circles(24, 6, lat(0.6)).unwrap();
    let doc = OutputDocument::for_distortion("quantize", report);
    assert_eq!(json_bytes(&doc), golden("two_circles_48_6_quantize.json"));
}

#[test]
fn golden_json_reserializes_byte_identical() {
    for name in [
        "two_circles_240_8.json",
        "equator_12_5.json",
        "two_circles_48_6_quantize.json",
    ] {
        let text = golden(name);
        let value: serde_json::Value = serde_json::from_str(text.trim_end()).unwrap();
        assert_eq!(value.to_string(), text.trim_end(), "{name}");
    }
}
