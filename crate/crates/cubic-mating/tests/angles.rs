use cubic_mating::angles::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn w(s: &str) -> TriadicWord {
    s.parse().unwrap()
}

/// Base-3 value of `pre·(period)^∞`, summed directly.
fn series(pre: &[u8], period: &[u8]) -> BigRational {
    let three = BigInt::from(3);
    let mut v = BigRational::zero();
    let mut scale = BigRational::one();
    for &d in pre {
        scale /= BigRational::from_integer(three.clone());
        v += scale.clone() * BigRational::from_integer(d.into());
    }
    let mut block = BigRational::zero();
    let mut s = BigRational::one();
    for &d in period {
        s /= BigRational::from_integer(three.clone());
        block += s.clone() * BigRational::from_integer(d.into());
    }
    let geo = BigRational::one() / (BigRational::one() - s);
    let v = v + scale * block * geo;
    v.clone() - BigRational::from_integer(v.floor().to_integer())
}

fn words(len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out.into_iter().flat_map(|w| (0..3u8).map(move |d| [w.clone(), vec![d]].concat())).collect();
    }
    out
}

#[test]
fn spec_examples() {
    assert_eq!(canonicalize(&w("|0")).members(), &[w("|0"), w("|2")]);
    assert_eq!(canonicalize(&w("|1")).members(), &[w("|1")]);
    assert_eq!(canonicalize(&w("1|0")).members(), &[w("0|2"), w("1|0")]);
    assert_eq!(theta(&canonicalize(&w("1|0"))), Angle::new(1, 3));
    assert_eq!(theta(&canonicalize(&w("|2"))), Angle::zero());
    assert_eq!(theta(&canonicalize(&w("|1"))), Angle::new(1, 2));
    assert_eq!(itinerary_of_angle(&Angle::new(2, 3)).members(), &[w("1|2"), w("2|0")]);
    assert_eq!(itinerary_of_angle(&Angle::new(1, 2)).members(), &[w("|1")]);
    assert_eq!(multiply_angle(&Angle::new(5, 9), 3), Angle::new(2, 3));
    assert_eq!(doubling_period(&Angle::new(1, 7)), Some(3));
    assert_eq!(doubling_period(&Angle::new(1, 4)), None);
}

#[test]
fn round_trip_small_denominators() {
    for q in 1..=243i64 {
        for p in 0..q {
            let t = Angle::new(p, q);
            let c = itinerary_of_angle(&t);
            assert_eq!(theta(&c), t, "{t}");
            assert_eq!(c.len() == 2, is_triadic(&t), "{t}");
        }
    }
}

#[test]
fn brute_force_expansions() {
    // Every word with preperiod + period <= 7 lands in the class its value codes.
    for n in 1..=7 {
        for split in 0..n {
            for word in words(n) {
                let (pre, per) = word.split_at(split);
                let v = series(pre, per);
                let t = Angle::from_ratio(v);
                let x = TriadicWord::new(pre.to_vec(), per.to_vec()).unwrap();
                assert!(itinerary_of_angle(&t).contains(&x), "{x} vs {t}");
            }
        }
    }
}

fn angle() -> impl Strategy<Value = Angle> {
    (1i64..5000).prop_flat_map(|q| (0..q, Just(q))).prop_map(|(p, q)| Angle::new(p, q))
}

proptest! {
    #[test]
    fn shift_equivariance(t in angle()) {
        prop_assume!(!is_triadic(&t));
        let c = itinerary_of_angle(&t);
        let c3 = itinerary_of_angle(&multiply_angle(&t, 3));
        for m in c.members() {
            prop_assert!(c3.contains(&m.shift()));
        }
    }

    #[test]
    fn class_is_constant(t in angle()) {
        let c = itinerary_of_angle(&t);
        for m in c.members() {
            prop_assert_eq!(&canonicalize(m), &c);
            prop_assert_eq!(Angle::from_ratio(m.value()), t.clone());
        }
    }

    #[test]
    fn negation_is_involution(t in angle()) {
        prop_assert_eq!(t.neg().neg(), t.clone());
        prop_assert!(t.add(&t.neg()).is_zero());
    }

    #[test]
    fn doubling_period_is_exact(t in angle()) {
        match doubling_period(&t) {
            Some(k) => {
                let mut s = t.clone();
                for i in 1..=k {
                    s = multiply_angle(&s, 2);
                    prop_assert_eq!(s == t, i == k);
                }
            }
            None => prop_assert!(t.denom() % 2 == BigInt::zero()),
        }
    }
}
