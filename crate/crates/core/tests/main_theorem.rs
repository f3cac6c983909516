//! The trace identity against closed-form flat-space oracles.

use num_bigint::BigInt;
use sepvar::calabi::{calabi_g, main_theorem_residual, product_formula, trace_identity};
use sepvar::cli::suites::random_pairs;
use sepvar::diffop::PointDistribution;
use sepvar::distalg::{n_trace, tensor, DistAlgebra};
use sepvar::kernel::{parse_jet, CRat, Jet, NuSeries, TruncationSpec};
use sepvar::star::{Builtin, StarEngine};

/// `(z^a z̄^b ⋆ z^c z̄^d)(0) = [a = 0][d = 0][b = c] b! ν^{|b|}` for the
/// anti-Wick product.
fn flat_pairing(f: &Jet, g: &Jet, nu_max: i32) -> NuSeries {
    let m = f.space().cdim();
    let mut out = NuSeries::zero(0, nu_max);
    for (kf, mf, cf) in f.terms() {
        for (kg, mg, cg) in g.terms() {
            let (a, b) = (&mf.0[..m], &mf.0[m..]);
            let (c, d) = (&mg.0[..m], &mg.0[m..]);
            if a.iter().any(|&x| x > 0) || d.iter().any(|&x| x > 0) || b != c {
                continue;
            }
            let fact: BigInt = b.iter().map(|&e| (1..=e as u64).product::<u64>()).product::<u64>().into();
            let deg: i32 = b.iter().map(|&e| e as i32).sum();
            out.add_term(kf + kg + deg, &(cf * cg) * &CRat::from_bigint(fact));
        }
    }
    out
}

fn oracle(pairs: &[(Jet, Jet)], nu_max: i32) -> NuSeries {
    let l = pairs.len();
    let mut acc = NuSeries::constant(CRat::one(), 0, nu_max);
    for i in 0..l {
        acc = acc.mul(&flat_pairing(&pairs[i].1, &pairs[(i + 1) % l].0, nu_max));
    }
    acc
}

fn lift(alg: &DistAlgebra, pairs: &[(Jet, Jet)]) -> Vec<PointDistribution> {
    pairs.iter().map(|(f, g)| alg.lambda_of(&tensor(f, g).unwrap()).unwrap()).collect()
}

fn same(a: &NuSeries, b: &NuSeries) {
    assert!(a.sub(b).is_zero(), "{a} vs {b}");
}

#[test]
fn flat_identity_matches_closed_form() {
    for m in [1, 2] {
        let p = Builtin::Flat.potential(m, 8);
        let e = StarEngine::new(p.clone(), TruncationSpec::new(0, 8, 8));
        let alg = DistAlgebra::new(&e);
        for l in 1..=3 {
            let g = calabi_g(&p, l).unwrap();
            for case in 0..6 {
                let pairs = random_pairs(99, l, case, &e);
                let t = trace_identity(&alg, &g, &lift(&alg, &pairs)).unwrap();
                assert_eq!(t.certified_order, 4);
                let want = oracle(&pairs, 8).truncate(4);
                same(&t.lhs, &want);
                same(&t.rhs, &want);
                same(&product_formula(&alg, &pairs).unwrap().truncate(4), &want);
            }
        }
    }
}

#[test]
fn golden_two_point_case() {
    let p = Builtin::Flat.potential(1, 8);
    let e = StarEngine::new(p.clone(), TruncationSpec::new(0, 8, 8));
    let alg = DistAlgebra::new(&e);
    let z = parse_jet("z1", e.space(), e.trunc()).unwrap();
    let zb = parse_jet("zb1", e.space(), e.trunc()).unwrap();
    let us = lift(&alg, &[(z.clone(), zb.clone()), (z, zb)]);
    let t = main_theorem_residual(&alg, &p, &us).unwrap();
    let nu2 = NuSeries::monomial(2, CRat::one(), 0, 4);
    same(&t.lhs, &nu2);
    same(&t.rhs, &nu2);
}

#[test]
fn one_point_case_is_the_pairing_with_one() {
    let p = Builtin::Hyperbolic.potential(1, 8);
    let e = StarEngine::new(p.clone(), TruncationSpec::new(0, 6, 8));
    let alg = DistAlgebra::new(&e);
    for case in 0..5 {
        let pairs = random_pairs(3, 1, case, &e);
        let us = lift(&alg, &pairs);
        let t = main_theorem_residual(&alg, &p, &us).unwrap();
        assert!(t.residual.is_zero());
        same(&t.lhs, &n_trace(&us[0]).truncate(t.certified_order));
    }
}

#[test]
fn curved_identity_is_nontrivial() {
    let p = Builtin::Hyperbolic.potential(1, 8);
    let e = StarEngine::new(p.clone(), TruncationSpec::new(0, 6, 8));
    let alg = DistAlgebra::new(&e);
    let f = parse_jet("3*z1_c1*zb1_c2 - zb1_c2^2 + z1_c1^2", alg.space(), alg.trunc()).unwrap();
    let g = parse_jet("z1_c1^2 + 2*zb1_c2*z1_c1", alg.space(), alg.trunc()).unwrap();
    let us = vec![alg.lambda_of(&f).unwrap(), alg.lambda_of(&g).unwrap()];
    let t = main_theorem_residual(&alg, &p, &us).unwrap();
    assert_eq!(t.certified_order, 3);
    assert!(t.residual.is_zero());
    assert!(!t.lhs.is_zero());
    // the flat answer differs, so the curvature is visible
    let pf = Builtin::Flat.potential(1, 8);
    let ef = StarEngine::new(pf.clone(), TruncationSpec::new(0, 6, 8));
    let af = DistAlgebra::new(&ef);
    let us_f = vec![af.lambda_of(&f).unwrap(), af.lambda_of(&g).unwrap()];
    let tf = main_theorem_residual(&af, &pf, &us_f).unwrap();
    assert!(!tf.lhs.sub(&t.lhs).is_zero());
}

#[test]
fn wrong_phase_is_detected() {
    let p = Builtin::Hyperbolic.potential(1, 8);
    let e = StarEngine::new(p.clone(), TruncationSpec::new(0, 6, 8));
    let alg = DistAlgebra::new(&e);
    let flat_g = calabi_g(&Builtin::Flat.potential(1, 8), 2).unwrap();
    // ν⁴ δ∂²_{z,1}∂²_{z̄,2} sees the quartic part of the phase at ν³
    let sp = e.space();
    let mut a = sepvar::kernel::Mono::zero(sp.nvars());
    a.0[0] = 2;
    let mut b = sepvar::kernel::Mono::zero(sp.nvars());
    b.0[1] = 2;
    let mut u1 = PointDistribution::zero(sp, 6);
    u1.add_term(2, a, CRat::one());
    let mut u2 = PointDistribution::zero(sp, 6);
    u2.add_term(2, b, CRat::one());
    let us = vec![u1, u2];
    let good = trace_identity(&alg, &calabi_g(&p, 2).unwrap(), &us).unwrap();
    let bad = trace_identity(&alg, &flat_g, &us).unwrap();
    let want = NuSeries::monomial(2, CRat::from_int(2), 0, 3).add(&NuSeries::monomial(3, CRat::from_int(2), 0, 3));
    for t in [&good, &bad] {
        assert_eq!(t.lhs.nu_max(), 3);
        assert_eq!(t.rhs.nu_max(), 3);
        same(&t.lhs, &want);
    }
    assert!(good.residual.is_zero());
    assert!(!bad.residual.is_zero());
}
