use kinelab::scene_io::{emit_report, Format};
use kinelab::verify::{applicable, Arity};
use kinelab::{parse_scene, verify, verify_all, Config, Error, Law, Scene, Verdict};

fn corpus(name: &str) -> Scene {
    let path = format!("{}/corpus/{name}.json", env!("CARGO_MANIFEST_DIR"));
    parse_scene(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn law(l: Law, inputs: &[&str]) -> (Law, Vec<String>) {
    (l, inputs.iter().map(|s| s.to_string()).collect())
}

#[test]
fn quadrant_and_line_mean_intersection() {
    let cfg = Config::default();
    let r = verify(&corpus("pair_quadrant_line"), &cfg, 8000, 42, &[law(Law::Thm8_15, &["X", "Y"])]).unwrap();
    let e = &r.entries[0];
    assert_eq!(e.verdict, Verdict::Pass);
    assert!((e.lhs.mean - 0.75).abs() <= (3.0 * e.lhs.stderr).max(0.02));
    assert!((e.rhs.mean - 0.75).abs() <= (3.0 * e.rhs.stderr).max(0.02));
}

#[test]
fn two_lines_meet_once() {
    let cfg = Config::default();
    let r = verify(&corpus("pair_two_lines"), &cfg, 4000, 42, &[law(Law::CorBezout, &["X", "Y"])]).unwrap();
    let e = &r.entries[0];
    assert_eq!(e.verdict, Verdict::Pass);
    assert!((e.lhs.mean - 1.0).abs() <= 0.02);
    assert!((e.rhs.mean - 1.0).abs() <= 0.02);
}

#[test]
fn bezout_needs_complementary_dimensions() {
    let cfg = Config::default();
    let r = verify(&corpus("pair_quadrant_quadrant"), &cfg, 200, 1, &[law(Law::CorBezout, &["X", "Y"])]);
    assert!(matches!(r, Err(Error::UnsupportedScene { .. })));
}

#[test]
fn lambda_sum_is_one() {
    let cfg = Config::default();
    let r = verify(&corpus("single_octant"), &cfg, 2000, 3, &[law(Law::Cor3_6, &["X"])]).unwrap();
    let e = &r.entries[0];
    assert_eq!(e.rhs.mean, 1.0);
    assert_eq!(e.rhs.stderr, 0.0);
    assert!((e.lhs.mean - 1.0).abs() <= 1e-12);
    assert_eq!(e.verdict, Verdict::Pass);
}

#[test]
fn single_germ_scene_runs_single_germ_laws_only() {
    let laws = applicable(&corpus("single_quadrant"));
    assert!(!laws.is_empty());
    assert!(laws.iter().all(|(l, _)| l.arity() == Arity::Germ));
    let laws = applicable(&corpus("pair_quadrant_line"));
    assert!(laws.iter().any(|(l, _)| l.arity() == Arity::GermPair));
    let laws = applicable(&corpus("r1_opposite_half_lines"));
    assert!(laws.iter().all(|(l, _)| l.arity() == Arity::Germ));
    let laws = applicable(&corpus("polytope_quadrant_square"));
    assert!(laws.iter().any(|(l, _)| *l == Law::Prop6_1));
}

#[test]
fn empty_scene_is_an_error() {
    let scene = parse_scene(r#"{"ambient_dim":2,"germs":{}}"#).unwrap();
    assert!(verify_all(&scene, &Config::default(), 200, 0).is_err());
}

#[test]
fn unknown_inputs_are_rejected() {
    let cfg = Config::default();
    let scene = corpus("pair_quadrant_line");
    assert!(verify(&scene, &cfg, 200, 0, &[law(Law::Thm8_15, &["X", "Z"])]).is_err());
    assert!(verify(&scene, &cfg, 200, 0, &[law(Law::Thm8_15, &["X"])]).is_err());
}

#[test]
fn law_ids_parse_loosely() {
    assert_eq!("THM_8_15".parse::<Law>().unwrap(), Law::Thm8_15);
    assert_eq!("cor-bezout".parse::<Law>().unwrap(), Law::CorBezout);
    let err = "nope".parse::<Law>().unwrap_err().to_string();
    assert!(err.contains("thm8.16") && err.contains("cauchy-crofton"));
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    let cfg = Config::default();
    let scene = corpus("pair_half_line_quadrant");
    let run = |workers: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
        pool.install(|| emit_report(&verify_all(&scene, &cfg, 500, 9).unwrap(), Format::Json))
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(1));
}

#[test]
fn corpus_pair_scene_passes() {
    let cfg = Config::default();
    let r = verify_all(&corpus("pair_half_line_quadrant"), &cfg, 4000, 42).unwrap();
    assert!(!r.any_fail(), "{}", emit_report(&r, Format::Markdown));
    assert!(r.count(Verdict::Pass) * 10 >= r.entries.len() * 9);
}
