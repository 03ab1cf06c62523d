use kinelab::geometry::VecN;
use kinelab::sampling::McEstimate;
use kinelab::scene_io::{emit_report, parse_report, Format};
use kinelab::verify::ReportEntry;
use kinelab::{parse_scene, Error, Law, VerificationReport, Verdict};

fn report(entries: Vec<ReportEntry>) -> VerificationReport {
    VerificationReport {
        schema_version: "1.0".into(),
        scene_fingerprint: "ab".repeat(32),
        seed: 42,
        samples: 100,
        wall_time_s: None,
        entries,
    }
}

fn entry() -> ReportEntry {
    let lhs = McEstimate { mean: 0.7512345678901234, stderr: 0.0031, n_samples: 100, n_degenerate: 1 };
    ReportEntry {
        law: Law::Thm8_15,
        case: String::new(),
        inputs: vec!["X".into(), "Y".into()],
        lhs,
        rhs: McEstimate::exact(0.75),
        delta: lhs.mean - 0.75,
        z: Some(0.4),
        verdict: Verdict::Pass,
        alt_lhs: None,
    }
}

#[test]
fn half_line_scene() {
    let s = parse_scene(r#"{"ambient_dim":2,"germs":{"X":{"cones":[{"generators":[[1,0]]}]}}}"#).unwrap();
    let x = &s.germs["X"];
    assert_eq!(x.cones().len(), 1);
    assert_eq!(x.dim(), 1);
    assert!(x.contains(&VecN::from_row_slice(&[2.0, 0.0]), 1e-9));
    assert!(!x.contains(&VecN::from_row_slice(&[-2.0, 0.0]), 1e-9));
}

#[test]
fn flat_expands_to_two_rays() {
    let s = parse_scene(r#"{"ambient_dim":2,"germs":{"Y":{"type":"flat","dim":1,"basis":[[0,1]]}}}"#).unwrap();
    let y = &s.germs["Y"];
    assert_eq!(y.cones().len(), 2);
    assert!(y.contains(&VecN::from_row_slice(&[0.0, -1.0]), 1e-9));
    assert!(y.contains(&VecN::from_row_slice(&[0.0, 1.0]), 1e-9));
}

#[test]
fn errors_are_located() {
    let e = parse_scene(r#"{"ambient_dim":2,"germs":{"X":{"cones":[{"generators":[[1,0],[2,0]]}]}}}"#).unwrap_err();
    assert_eq!(e.path(), Some("germs.X.cones[0]"));
    assert!(matches!(e.root(), Error::RankDeficient { .. }));
    let e = parse_scene(r#"{"ambient_dim":2,"germs":{"X":{"cones":[{"generators":[[1,0,0]]}]}}}"#).unwrap_err();
    assert!(e.path().unwrap().starts_with("germs.X.cones[0]"));
    let e = parse_scene(r#"{"schema_version":"2.0","ambient_dim":2,"germs":{}}"#).unwrap_err();
    assert!(e.to_string().contains("schema_version"));
    assert!(parse_scene(r#"{"ambient_dim":2,"germs":{},"extra":1}"#).is_err());
    assert!(parse_scene("not json").is_err());
}

#[test]
fn fingerprint_is_stable() {
    let text = r#"{"ambient_dim":2,"germs":{"X":{"cones":[{"generators":[[1,0]]}]}}}"#;
    let a = parse_scene(text).unwrap();
    let b = parse_scene(text).unwrap();
    assert_eq!(a.fingerprint(), b.fingerprint());
    assert_eq!(a.fingerprint().len(), 64);
    assert_eq!(parse_scene(&a.to_json()).unwrap().fingerprint(), a.fingerprint());
}

#[test]
fn empty_reports_per_format() {
    let r = report(vec![]);
    assert_eq!(parse_report(&emit_report(&r, Format::Json)).unwrap(), r);
    let csv = emit_report(&r, Format::Csv);
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("law,case,inputs"));
    assert!(emit_report(&r, Format::Markdown).contains("| law"));
}

#[test]
fn one_entry_report() {
    let r = report(vec![entry()]);
    let csv = emit_report(&r, Format::Csv);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("thm8.15,,X+Y,0.7512345678901234,"));
    assert!(lines[1].contains("PASS"));
    assert_eq!(parse_report(&emit_report(&r, Format::Json)).unwrap(), r);
    let mut infinite = entry();
    infinite.z = None;
    infinite.verdict = Verdict::Fail;
    let r = report(vec![infinite]);
    assert_eq!(parse_report(&emit_report(&r, Format::Json)).unwrap(), r);
    assert!(emit_report(&r, Format::Csv).contains(",inf,FAIL,"));
}
