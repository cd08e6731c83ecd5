use rcsystems::brackets::{rc_bracket, ThetaAlgebra};
use rcsystems::catalog::{eisenstein, Catalog};
use rcsystems::coeff::{rat, rat_int, Scalar};
use rcsystems::graded::parse_system;
use rcsystems::hypergeom::{frobenius_pair, hg_series, hgde_residual, log_solution_residual, nome, triangle_params, HgParams};
use rcsystems::rrc::{build_system, solve_z, verify_system};
use rcsystems::series::Series;
use rcsystems::triangle::{candidate_embeddings, dimension_table, TriangleSignature};

#[test]
fn hypergeometric_solutions_satisfy_the_ode() {
    let p = HgParams::new(rat(1, 12), rat(5, 12), rat_int(1));
    let f = hg_series(&p, 30).unwrap();
    assert!(hgde_residual(&p, &f).is_zero());
    let sol = frobenius_pair(&p, 20).unwrap();
    assert!(log_solution_residual(&sol).is_zero());
    let q = nome(&sol).unwrap();
    assert_eq!(q.coeff_at(1).unwrap(), Scalar::from(1));
    assert_eq!(q.coeff_at(2).unwrap(), Scalar::from(rat(31, 72)));
}

#[test]
fn series_json_round_trip() {
    let e4 = eisenstein(4, 15).unwrap().series;
    let back = Series::from_json(&e4.to_json()).unwrap();
    assert_eq!(back, e4);
}

#[test]
fn catalog_expressions_are_weighted() {
    let cat = Catalog::new();
    let d = cat.eval("(E4^3 - E6^2)/1728", 20).unwrap();
    assert_eq!(d.weight, rat_int(12));
    assert_eq!(d.value, cat.get("DELTA", 20).unwrap().series);
    assert!(cat.eval("E4 + E6", 20).is_err());
}

#[test]
fn bracket_of_eisenstein_series() {
    let q = eisenstein(4, 30).unwrap().weighted();
    let r = eisenstein(6, 30).unwrap().weighted();
    let b = rc_bracket(&ThetaAlgebra, &q, &r, 1).unwrap();
    assert_eq!(b.weight, rat_int(12));
    // [E4, E6]_1 = -3456 Δ
    let delta = eisenstein(4, 30).unwrap().series.pow(3).unwrap() - eisenstein(6, 30).unwrap().series.pow(2).unwrap();
    assert_eq!(b.value, delta.scale(&Scalar::from(-2)));
}

#[test]
fn embeddings_and_parameters() {
    let e = candidate_embeddings(2, 5).unwrap();
    assert_eq!(e.len(), 2);
    for s in &e {
        assert!(triangle_params(s.n, s.m, s.k, s.r).is_ok());
    }
    assert!(TriangleSignature::new(2, 3, 2, 1).is_err());
}

#[test]
fn solved_system_reads_back_from_text() {
    let s = TriangleSignature::new(2, 3, 1, 1).unwrap();
    let sys = build_system(&s).unwrap();
    let parsed = parse_system(&sys.derivation().to_system_text()).unwrap();
    assert_eq!(parsed, *sys.derivation());
    let sol = solve_z(&s, 20).unwrap();
    assert!(verify_system(&sol, &sys).unwrap().ok());
}

#[test]
fn dims_table_for_full_modular_group() {
    let s = TriangleSignature::new(2, 3, 1, 1).unwrap();
    let t = dimension_table(&s, &rat_int(12));
    let dims: Vec<_> = t.iter().filter(|r| r.dim > 0).map(|r| (r.w.clone(), r.dim)).collect();
    assert_eq!(dims, [("0".into(), 1), ("4".into(), 1), ("6".into(), 1), ("8".into(), 1), ("10".into(), 1), ("12".into(), 2)]);
}
