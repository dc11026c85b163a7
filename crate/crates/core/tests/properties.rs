use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use irrmeter_core::exactmath::{den, int, kappa_n, nu_n, parse_rational, rat, totient, Regime};
use irrmeter_core::interval::Interval;
use irrmeter_core::measure::{self, Conclusion, DeltaMode};
use irrmeter_core::pade::{pade_general, remainder_coeffs, verify_det_m2, verify_recurrence, verify_weight};
use irrmeter_core::recurrence::{evaluate_solution, pade_recurrence, poincare_threshold, QuadraticNumber};
use irrmeter_core::series::HypergeomParams;
use irrmeter_core::simultaneous::{
    determinant, effective_lower_bound, mu_from_pairs, verify_matrix_hypotheses, CriterionBlock, CriterionInput,
    CriterionMode, Geometric, PairsMode,
};
use irrmeter_core::Rational;

fn small_rat(num: i64, den: i64) -> impl Strategy<Value = Rational> {
    (-num..=num, 1..=den).prop_map(|(a, b)| rat(a, b))
}

fn nonzero_rat(num: i64, den: i64) -> impl Strategy<Value = Rational> {
    small_rat(num, den).prop_filter("nonzero", |q| !q.is_zero())
}

/// Parameters with `gamma >= -1` away from the poles of the recurrence and
/// away from the degenerate sets of the determinant.
fn params() -> impl Strategy<Value = HypergeomParams> {
    (nonzero_rat(5, 4), (0i64..=12, 1i64..=4), small_rat(6, 5))
        .prop_map(|(a, (g, gd), d)| HypergeomParams::general(a, rat(g, gd) - int(1) + rat(1, 7), d).unwrap())
        .prop_filter("nondegenerate", |p| p.nondegenerate())
}

fn beta() -> impl Strategy<Value = Rational> {
    (2i64..=60, 1i64..=3, any::<bool>()).prop_map(|(a, b, s)| if s { rat(a, b) } else { -rat(a, b) })
        .prop_filter("|beta| > 1", |b| b.abs() > int(1))
}

fn contains_all(outer: &Interval, inner: &Interval) -> bool {
    outer.lo <= inner.lo && inner.hi <= outer.hi
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, .. ProptestConfig::default() })]

    #[test]
    fn weight_property_random_params(p in params(), n in 1u64..=10) {
        let rep = verify_weight(n, &p);
        prop_assert!(rep.ok, "{:?}", rep.violations);
    }

    #[test]
    fn recurrence_random_params(p in params(), n in 1u64..=10) {
        let c = verify_recurrence(n, &p, n as usize + 3).unwrap();
        prop_assert!(c.ok);
    }

    #[test]
    fn determinant_random_params(p in params(), n in 0u64..=10) {
        let c = verify_det_m2(n, &p).unwrap();
        prop_assert!(c.ok && !c.closed_form.is_zero());
    }

    #[test]
    fn remainder_ratio_law(p in params(), n in 0u64..=8) {
        // lambda_{n,k} agrees with the tail of P_{n,0} f computed directly
        let r = remainder_coeffs(n, &p, n + 6).unwrap();
        let pair = pade_general(n, &p);
        let mut phi = irrmeter_core::series::PhiFunctional::new(&p);
        let deg = pair.p0.degree().unwrap_or(0);
        let (_, tail) = pair.p0.mul_tail(&phi.tail(deg + n as usize + 8));
        for k in n..=n + 6 {
            prop_assert_eq!(tail.get(k as usize + 1).cloned().unwrap_or_else(Rational::zero), r.lambda(k));
        }
    }

    #[test]
    fn kappa_clears_binomial(w in (1i64..=7, 2i64..=9).prop_map(|(a, b)| rat(a, b)).prop_filter("non-integral", |w| !w.is_integer()),
                             b in beta(), n in 1u64..=14) {
        let p = HypergeomParams::binomial(w).unwrap();
        let k = kappa_n(&p, &b, n, Regime::Binomial).unwrap().kappa;
        let pair = pade_general(n, &p);
        prop_assert!((&k * pair.p0.eval(&b)).is_integer());
        prop_assert!((&k * pair.p1.eval(&b)).is_integer());
    }

    #[test]
    fn kappa_clears_general(p in params(), b in beta(), n in 1u64..=10) {
        let k = kappa_n(&p, &b, n, Regime::General).unwrap().kappa;
        let pair = pade_general(n, &p);
        prop_assert!((&k * pair.p0.eval(&b)).is_integer());
        prop_assert!((&k * pair.p1.eval(&b)).is_integer());
    }

    #[test]
    fn nu_n_clears_pochhammer_quotients(a in (-40i64..=40, 2i64..=72).prop_map(|(a, b)| rat(a, b)), n in 0u64..=40) {
        let v = irrmeter_core::exactmath::from_bigint(nu_n(&a, n));
        let mut q = Rational::one();
        for k in 0..=n {
            prop_assert!((&v * &q).is_integer(), "a = {}, k = {}", a, k);
            q = q * (&a + int(k as i64)) / int(k as i64 + 1);
        }
    }

    #[test]
    fn parse_round_trip(q in small_rat(100_000, 1000)) {
        prop_assert_eq!(parse_rational(&q.to_string()).unwrap(), q);
    }

    #[test]
    fn totient_multiplicative(a in 1i64..=300, b in 1i64..=300) {
        let (a, b) = (BigInt::from(a), BigInt::from(b));
        if num_integer::Integer::gcd(&a, &b).is_one() {
            prop_assert_eq!(totient(&(&a * &b)).unwrap(), totient(&a).unwrap() * totient(&b).unwrap());
        }
    }

    #[test]
    fn quadratic_field_laws(a in small_rat(20, 5), b in small_rat(20, 5), c in small_rat(20, 5), e in small_rat(20, 5), d in 2i64..=30) {
        let x = QuadraticNumber::new(a.clone(), b.clone(), int(d));
        let y = QuadraticNumber::new(c, e, int(d));
        if let (Ok(x), Ok(y)) = (x, y) {
            prop_assert_eq!(x.mul(&y), y.mul(&x));
            prop_assert_eq!(x.mul(&x.conj()), QuadraticNumber::rational(x.norm()));
            if !y.is_zero() {
                prop_assert_eq!(x.mul(&y).div(&y).unwrap(), x.clone());
            }
            // exact ordering agrees with enclosures
            let (ix, iy) = (x.to_interval(96), y.to_interval(96));
            match x.cmp_exact(&y) {
                std::cmp::Ordering::Less => prop_assert!(ix.lo < iy.hi),
                std::cmp::Ordering::Greater => prop_assert!(ix.hi > iy.lo),
                std::cmp::Ordering::Equal => prop_assert!(ix.overlaps(&iy)),
            }
        }
    }

    #[test]
    fn transcendental_enclosures_nest(q in (1i64..=4000, 1i64..=400).prop_map(|(a, b)| rat(a, b)), p in 64u32..=200) {
        let lo = Interval::ln_rational(&q, p);
        let hi = Interval::ln_rational(&q, 2 * p);
        prop_assert!(contains_all(&lo, &hi));
        let t = q.clone() / int(50) - int(20);
        prop_assert!(contains_all(&Interval::exp_rational(&t, p), &Interval::exp_rational(&t, 2 * p)));
    }

    #[test]
    fn mu_outward_sound(b in beta(), w in prop_oneof![Just(rat(1, 3)), Just(rat(-1, 3)), Just(rat(1, 2)), Just(rat(2, 5))]) {
        let mode = if w.abs() == rat(1, 3) { DeltaMode::Bennett } else { DeltaMode::Simple };
        let r1 = measure::mu_binomial(&w, &b, mode, 96).unwrap();
        let r2 = measure::mu_binomial(&w, &b, mode, 192).unwrap();
        prop_assert_eq!(r1.conclusion, r2.conclusion);
        if let (Some(m1), Some(m2)) = (&r1.mu, &r2.mu) {
            prop_assert!(contains_all(m1, m2));
            prop_assert!(contains_all(r1.delta.as_ref().unwrap(), r2.delta.as_ref().unwrap()));
            prop_assert!(contains_all(r1.e.as_ref().unwrap(), r2.e.as_ref().unwrap()));
            prop_assert!(contains_all(r1.q.as_ref().unwrap(), r2.q.as_ref().unwrap()));
        }
    }

    #[test]
    fn simple_dominates_bennett(b in beta(), s in any::<bool>()) {
        let w = if s { rat(1, 3) } else { rat(-1, 3) };
        let simple = measure::mu_binomial(&w, &b, DeltaMode::Simple, 128).unwrap();
        let bennett = measure::mu_binomial(&w, &b, DeltaMode::Bennett, 128).unwrap();
        if let (Some(ms), Some(mb)) = (&simple.mu, &bennett.mu) {
            prop_assert!(ms.lo >= mb.hi);
        } else {
            // a failing E > 1 for the larger Delta is consistent; the converse is not
            prop_assert!(!(simple.conclusion == Conclusion::Bound && bennett.conclusion != Conclusion::Bound));
        }
    }

    #[test]
    fn e_monotone_in_beta(a in 2i64..=200, step in 1i64..=200, d in 1i64..=4, neg in any::<bool>()) {
        let w = rat(1, 3);
        let sgn = if neg { -1 } else { 1 };
        let b1 = rat(sgn * (a * d + 1), d);
        let b2 = rat(sgn * ((a + step) * d + 1), d);
        prop_assume!(den(&b1) == den(&b2));
        let e = |b: &Rational| measure::mu_binomial(&w, b, DeltaMode::Simple, 128).unwrap();
        let (r1, r2) = (e(&b1), e(&b2));
        let rho = |r: &irrmeter_core::measure::MeasureReport| r.rho2.as_ref().unwrap().to_interval(128);
        prop_assert!(rho(&r2).definitely_gt(&rho(&r1)));
        if let (Some(e1), Some(e2)) = (&r1.e, &r2.e) {
            prop_assert!(e2.hi >= e1.lo);
        }
        prop_assert!(!(r1.conclusion == Conclusion::Bound && r2.conclusion != Conclusion::Bound));
    }

    #[test]
    fn residual_matches_remainder(n in 1u64..=20, b in beta().prop_filter("|beta| >= 3", |b| b.abs() >= int(3)),
                                  which in 0usize..3) {
        let p = match which {
            0 => HypergeomParams::binomial(rat(1, 3)).unwrap(),
            1 => HypergeomParams::shifted_log(rat(1, 2)).unwrap(),
            _ => HypergeomParams::shifted_exp(int(-1)).unwrap(),
        };
        let prec = 256;
        let fb = measure::evaluate_f(&p, &b, prec).unwrap();
        let pair = pade_general(n, &p);
        let direct = fb.scale(&pair.p0.eval(&b)).sub(&Interval::point(&pair.p1.eval(&b), prec));
        let tail = measure::remainder_at(n, &p, &b, prec).unwrap();
        prop_assert!(direct.overlaps(&tail), "n = {}: {} vs {}", n, direct, tail);
    }

    #[test]
    fn index_monotone_random_pairs(x0 in small_rat(1000, 100), x1 in small_rat(1000, 100), b in (3i64..=40).prop_map(int)) {
        prop_assume!(!(x0.is_zero() && x1.is_zero()));
        let p = HypergeomParams::binomial(rat(1, 3)).unwrap();
        let spec = pade_recurrence(&p, &b).unwrap();
        let t = evaluate_solution(&p, &b, &x0, &x1, 80).unwrap();
        let rep = poincare_threshold(&spec, &t).unwrap();
        prop_assert!(rep.violations.is_empty(), "{:?}", rep.violations);
    }

    #[test]
    fn bareiss_matches_cofactor(v in proptest::collection::vec(-50i64..=50, 9)) {
        let m: Vec<Vec<BigInt>> = v.chunks(3).map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let c = |i: usize, j: usize| &m[i][j];
        let cof = c(0, 0) * (c(1, 1) * c(2, 2) - c(1, 2) * c(2, 1)) - c(0, 1) * (c(1, 0) * c(2, 2) - c(1, 2) * c(2, 0))
            + c(0, 2) * (c(1, 0) * c(2, 1) - c(1, 1) * c(2, 0));
        prop_assert_eq!(determinant(&m), cof);
    }

    #[test]
    fn geometric_mode_ignores_window(qa in 3i64..=50, eb in 3i64..=50, len in 3usize..=8) {
        let pairs: Vec<(BigInt, BigInt)> = (0..len).map(|i| (BigInt::from(i as i64 + 1), BigInt::from(i as i64 * i as i64 + 2))).collect();
        let qs: Vec<Rational> = (0..len).map(|i| int(qa).pow(i as i32 + 1)).collect();
        let es: Vec<Rational> = (0..len).map(|i| int(eb).pow(i as i32 + 1)).collect();
        let (al, be) = (Interval::from_int(qa, 128), Interval::from_int(eb, 128));
        let full = mu_from_pairs(&pairs, 0, &qs, &es, PairsMode::Geometric, Some((&al, &be)), 128).unwrap();
        let part = mu_from_pairs(&pairs[..3], 0, &qs[..3], &es[..3], PairsMode::Geometric, Some((&al, &be)), 128).unwrap();
        prop_assert_eq!(&full.mu, &part.mu);
        let expect = Interval::one(160).add(&Interval::ln_rational(&int(qa), 160).div(&Interval::ln_rational(&int(eb), 160)).unwrap());
        prop_assert!(full.mu.overlaps(&expect) && full.certified);
        let w = mu_from_pairs(&pairs, 0, &qs, &es, PairsMode::Window { lo: 0, hi: 100 }, None, 128).unwrap();
        prop_assert!(!w.certified);
    }

    #[test]
    fn one_verdict_per_row(rows in proptest::collection::vec((1i64..=20, -20i64..=20, -20i64..=20, 1i64..=20), 1..6),
                           theta_num in 1i64..=99) {
        let theta = rat(theta_num, 100);
        let mut blocks = Vec::new();
        for (i, (a, b, c, d)) in rows.iter().enumerate() {
            let m = vec![vec![BigInt::from(*a), BigInt::from(*b)], vec![BigInt::from(*c), BigInt::from(*d)]];
            if determinant(&m).is_zero() {
                continue;
            }
            blocks.push(CriterionBlock { n: i as u64, matrix: m, q: int(10 + i as i64), e: int(2 + i as i64) });
        }
        prop_assume!(!blocks.is_empty());
        let nb = blocks.len();
        let input = CriterionInput { s: 1, theta: vec![Interval::one(128), Interval::point(&theta, 128)], blocks };
        for mode in [CriterionMode::TypeI, CriterionMode::TypeII] {
            let v = verify_matrix_hypotheses(&input, mode).unwrap();
            prop_assert_eq!(v.len(), 2 * nb);
            let mut seen: Vec<(u64, usize)> = v.iter().map(|r| (r.n, r.row)).collect();
            seen.dedup();
            prop_assert_eq!(seen.len(), 2 * nb);
        }
    }
}

#[test]
fn dual_reduces_to_type_one_at_s1() {
    // Same data, both shapes: at s = 1 the exponent of the dual bound is lambda.
    let text = "s 1\ntheta 1 1\ntheta 0.5 0.5\nn 1\n-1 2\n0 1\nQ 4\nE 2\n";
    let input = CriterionInput::parse(text).unwrap();
    let g = Geometric { a: int(1), b: int(1), alpha: int(4), beta: int(2) };
    let one = effective_lower_bound(&input, &[BigInt::from(8), BigInt::from(4)], CriterionMode::TypeI, &g, 128).unwrap();
    assert!(one.bound.contains(&rat(1, 2048)));
    let c = measure::effective_constants(&int(1), &int(1), &int(4), &int(2), 128).unwrap();
    assert!(c.lambda_exp.contains(&int(2)));
    // rows meeting the dual conditions; at Y = 8 the dual bound has the same c and exponent
    let dual_input = CriterionInput::parse("s 1\ntheta 1 1\ntheta 0.5 0.5\nn 1\n2 1\n1 0\nQ 4\nE 2\n").unwrap();
    let dual = effective_lower_bound(&dual_input, &[BigInt::from(0), BigInt::from(8)], CriterionMode::TypeII, &g, 128).unwrap();
    assert!(dual.bound.contains(&rat(1, 2048)));
    assert_eq!(dual.constants.lambda_exp, one.constants.lambda_exp);
}

#[test]
fn padic_soundness_fixtures() {
    for (w, b, p) in [(rat(1, 3), rat(1, 5), 5), (rat(1, 2), rat(1, 8), 2), (rat(1, 3), rat(1, 27), 3)] {
        for n in 1..=20 {
            let c = measure::verify_padic_remainder(&w, &b, &BigInt::from(p), n).unwrap();
            assert!(c.ok, "omega {w} beta {b} p {p} n {n}");
        }
    }
}
