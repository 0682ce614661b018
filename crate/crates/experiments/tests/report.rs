use traction_experiments::config::{DemoKind, Scenario};
use traction_experiments::report::{to_csv, to_json, to_svg, Status, CSV_HEADER, SCHEMA_VERSION};
use traction_experiments::{emit_report, run_scenario, Format, Report};

#[test]
fn empty_report_is_valid_json() {
    let r = Report::new(&Scenario::preset(DemoKind::Gap));
    let v: serde_json::Value = serde_json::from_str(&to_json(&r).unwrap()).unwrap();
    assert_eq!(v["schema_version"], SCHEMA_VERSION);
    assert_eq!(v["steps"].as_array().unwrap().len(), 0);
    assert!(v["provenance"]["tolerances"].is_object());
}

#[test]
fn json_round_trips() {
    let r = run_scenario(&Scenario::preset(DemoKind::Gap)).unwrap();
    let back: Report = serde_json::from_str(&to_json(&r).unwrap()).unwrap();
    assert_eq!(back, r);
}

#[test]
fn csv_has_one_row_per_record() {
    let r = run_scenario(&Scenario::preset(DemoKind::Compression)).unwrap();
    let text = to_csv(&r).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
    let rows: Vec<csv::StringRecord> = reader.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), r.steps.len());
    for (row, rec) in rows.iter().zip(&r.steps) {
        assert_eq!(&row[2], rec.metric);
        let value: f64 = row[3].parse().unwrap();
        assert!(value == rec.value || (value.is_nan() && rec.value.is_nan()));
        assert_eq!(&row[5], rec.status.label());
    }
}

#[test]
fn svg_is_deterministic() {
    let s = Scenario::preset(DemoKind::Tension);
    let a = to_svg(&run_scenario(&s).unwrap());
    let b = to_svg(&run_scenario(&s).unwrap());
    assert!(a.starts_with("<svg"));
    assert_eq!(a, b);
}

#[test]
fn failed_check_fails_report() {
    let mut r = Report::new(&Scenario::preset(DemoKind::Gap));
    r.info(None, "x", 1.0);
    assert!(r.passed());
    assert!(!r.check(Some(0.1), "y", 2.0, 1.0, false));
    assert!(!r.passed());
    assert_eq!(r.failures().len(), 1);
    assert_eq!(r.failures()[0].status, Status::Fail);
}

#[test]
fn emit_writes_requested_formats() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_scenario(&Scenario::preset(DemoKind::Noncompact)).unwrap();
    let paths = emit_report(&r, &[Format::Svg, Format::Json, Format::Json], dir.path()).unwrap();
    assert_eq!(paths.len(), 2);
    for p in paths {
        assert!(std::fs::metadata(p).unwrap().len() > 0);
    }
}
