use kinelab::euler::{chi_link_section, chi_slice, euler_of_union, CellUnionQuery, Piece, UnionMode};
use kinelab::geometry::{ConicGerm, Rotation, VecN};
use kinelab::invariants::{
    beta0_bar, density, invariant_profile, lambda0_pair, sigma_k, sigma_pair, sigma_to_lambda_loc, sigma_to_lambda_loc_matrix,
};
use kinelab::sampling::{mc_estimate, sample_grassmannian, sample_rotation, sample_sphere, McEstimate, SampleStream};
use kinelab::{parse_scene, Config, Error};

const N: u64 = 8000;

fn germ(json: &str) -> ConicGerm {
    let scene = parse_scene(&format!(r#"{{"ambient_dim":2,"germs":{{"X":{json}}}}}"#)).unwrap();
    scene.germs["X"].clone()
}

fn half_line() -> ConicGerm {
    germ(r#"{"cones":[{"generators":[[1,0]]}]}"#)
}

fn quadrant() -> ConicGerm {
    germ(r#"{"cones":[{"generators":[[1,0],[0,1]]}]}"#)
}

fn line() -> ConicGerm {
    germ(r#"{"type":"flat","dim":1,"basis":[[1,0]]}"#)
}

fn vertical_line() -> ConicGerm {
    germ(r#"{"type":"flat","dim":1,"basis":[[0,1]]}"#)
}

fn plane() -> ConicGerm {
    germ(r#"{"type":"full_space"}"#)
}

fn close(e: &McEstimate, want: f64) {
    let tol = (3.0 * e.stderr).max(0.02);
    assert!((e.mean - want).abs() <= tol, "{} ± {} vs {want}", e.mean, e.stderr);
}

#[test]
fn half_line_profile() {
    let cfg = Config::default();
    let p = invariant_profile(&half_line(), N, 1, &cfg).unwrap();
    for (k, want) in [1.0, 0.5, 0.0].into_iter().enumerate() {
        close(&p.sigma[k], want);
    }
    for (k, want) in [0.5, 0.5, 0.0].into_iter().enumerate() {
        close(&p.lambda_lim.component(k), want);
    }
    close(&p.density, 0.5);
}

#[test]
fn quadrant_profile() {
    let cfg = Config::default();
    let p = invariant_profile(&quadrant(), N, 2, &cfg).unwrap();
    assert_eq!(p.sigma[0], McEstimate::exact(1.0));
    close(&p.sigma[1], 0.75);
    close(&p.sigma[2], 0.25);
    for (k, want) in [0.25, 0.5, 0.25].into_iter().enumerate() {
        close(&p.lambda_lim.component(k), want);
    }
    close(&p.density, 0.25);
    let total = p.lambda_lim.linear(&[1.0; 3], 0.0);
    assert!((total.mean - 1.0).abs() <= 1e-12);
}

#[test]
fn plane_and_line_profiles() {
    let cfg = Config::default();
    let p = invariant_profile(&plane(), N, 3, &cfg).unwrap();
    for (k, want) in [0.0, 0.0, 1.0].into_iter().enumerate() {
        close(&p.lambda_lim.component(k), want);
    }
    close(&p.density, 1.0);
    let l = invariant_profile(&line(), N, 4, &cfg).unwrap();
    for (k, want) in [0.0, 1.0, 0.0].into_iter().enumerate() {
        close(&l.lambda_lim.component(k), want);
    }
    close(&l.density, 1.0);
}

#[test]
fn sigma_zero_is_exact_and_density_of_ray() {
    let cfg = Config::default();
    assert_eq!(sigma_k(&quadrant(), 0, N, 5, &cfg).unwrap(), McEstimate::exact(1.0));
    close(&density(&half_line(), N, 6, &cfg).unwrap(), 0.5);
}

#[test]
fn beta0_examples() {
    let cfg = Config::default();
    close(&beta0_bar(&half_line(), 1, N, 7, &cfg).unwrap(), 0.5);
    close(&beta0_bar(&plane(), 2, N, 8, &cfg).unwrap(), 1.0);
    close(&beta0_bar(&half_line(), 2, N, 9, &cfg).unwrap(), 0.0);
    close(&beta0_bar(&quadrant(), 1, N, 10, &cfg).unwrap(), 0.5);
    assert!(matches!(beta0_bar(&quadrant(), 3, N, 0, &cfg), Err(Error::InvalidInput(_))));
}

#[test]
fn pair_examples() {
    let cfg = Config::default();
    close(&sigma_pair(&line(), &vertical_line(), N, 11, &cfg).unwrap(), 1.0);
    close(&sigma_pair(&quadrant(), &line(), N, 12, &cfg).unwrap(), 0.75);
    close(&sigma_pair(&quadrant(), &plane(), N, 13, &cfg).unwrap(), 1.0);
    close(&sigma_pair(&half_line(), &plane(), N, 14, &cfg).unwrap(), 1.0);
    let (l0, _) = lambda0_pair(&plane(), &plane(), 2000, 15, &cfg).unwrap();
    close(&l0, 0.0);
    let (l0, _) = lambda0_pair(&quadrant(), &plane(), N, 16, &cfg).unwrap();
    close(&l0, 0.25);
}

#[test]
fn deterministic_slices() {
    let cfg = Config::default();
    let r = Rotation::plane(2, 0, 1, 0.3);
    let v = [0.6, -0.8];
    assert_eq!(chi_slice(&line(), &vertical_line(), &r, &v, 0.01, 1.0, &cfg).unwrap().value, 1);
    assert_eq!(chi_slice(&quadrant(), &plane(), &r, &v, 0.01, 1.0, &cfg).unwrap().value, 1);
    let origin = germ(r#"{"type":"flat","dim":0,"basis":[]}"#);
    assert_eq!(chi_slice(&origin, &line(), &r, &v, 0.01, 1.0, &cfg).unwrap().value, 0);
}

#[test]
fn link_examples() {
    let cfg = Config::default();
    assert_eq!(chi_link_section(&quadrant(), &[], None, &cfg).unwrap().value, 1);
    assert_eq!(chi_link_section(&plane(), &[], None, &cfg).unwrap().value, 0);
    let normal = vec![-0.3f64.sin(), 0.3f64.cos()];
    assert_eq!(chi_link_section(&plane(), std::slice::from_ref(&normal), None, &cfg).unwrap().value, 2);
    assert_eq!(chi_link_section(&half_line(), &[normal], None, &cfg).unwrap().value, 0);
    let q = CellUnionQuery { pieces: vec![Piece::cone(&quadrant().cones()[0], None, None)], mode: UnionMode::Link };
    assert_eq!(euler_of_union(&q, &cfg).unwrap().value, 1);
}

#[test]
fn lambda_loc_transform() {
    let m = sigma_to_lambda_loc_matrix(3);
    for k in 1..=3 {
        let mut e = vec![0.0; 4];
        e[k] = 1.0;
        let col = sigma_to_lambda_loc(&e);
        for i in 0..3 {
            assert!((col[i] - m[i][k]).abs() < 1e-15);
        }
        assert!((col[k - 1] - 1.0).abs() < 1e-15);
    }
    // Top degree: only σ_d contributes to Λ^loc_d.
    let l = sigma_to_lambda_loc(&[1.0, 0.4, 0.3, 0.0]);
    assert!((l[1] - 0.3).abs() < 1e-15);
}

#[test]
fn sampler_examples() {
    let cfg = Config::default();
    let one = mc_estimate(100, 0, &cfg, |_| Ok(1.0)).unwrap();
    assert_eq!((one.mean, one.stderr), (1.0, 0.0));
    let bad = mc_estimate(100, 0, &cfg, |_| Err(Error::DegenerateSample("always".into())));
    assert!(matches!(bad, Err(Error::DegeneracyBudgetExceeded { .. })));
    let half = mc_estimate(10_000, 1, &cfg, |rng| Ok((sample_sphere(rng, 3)[2] > 0.0) as u8 as f64)).unwrap();
    assert!((half.mean - 0.5).abs() <= 3.0 * half.stderr);
    let arc = mc_estimate(10_000, 2, &cfg, |rng| {
        let u = sample_sphere(rng, 2);
        Ok((u[0] >= 0.0 && u[1] >= 0.0) as u8 as f64)
    })
    .unwrap();
    assert!((arc.mean - 0.25).abs() <= 3.0 * arc.stderr);
    let hits = mc_estimate(10_000, 3, &cfg, |rng| {
        let h = sample_grassmannian(rng, 2, 1);
        let d = &h.basis()[0];
        Ok((d[0] * d[1] >= 0.0) as u8 as f64)
    })
    .unwrap();
    assert!((hits.mean - 0.5).abs() <= 3.0 * hits.stderr);
    let e1 = VecN::from_row_slice(&[1.0, 0.0, 0.0]);
    let diag = mc_estimate(100_000, 4, &cfg, |rng| Ok(sample_rotation(rng, 3).apply(&e1)[0])).unwrap();
    assert!(diag.mean.abs() <= 3.0 * diag.stderr);
    let r1 = sample_rotation(&mut SampleStream::new(9, 9).rng(), 1);
    assert_eq!(r1.matrix()[(0, 0)], 1.0);
    let a = sample_rotation(&mut SampleStream::new(9, 3).rng(), 4);
    let b = sample_rotation(&mut SampleStream::new(9, 3).rng(), 4);
    assert_eq!(a.matrix(), b.matrix());
    let full = sample_grassmannian(&mut SampleStream::new(1, 1).rng(), 3, 3);
    assert!(full.complement().is_empty());
}
