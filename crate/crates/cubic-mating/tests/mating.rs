use std::sync::OnceLock;

use cubic_mating::angles::Angle;
use cubic_mating::maps::{MapFamily, SpherePoint};
use cubic_mating::mating::*;
use cubic_mating::params::{center_in_copy, Family};
use cubic_mating::puzzle::{Graph, GraphData, Variant, DEFAULT_DEPTH};
use num_complex::Complex64 as C;

struct Pair {
    dbas: SemiConj,
    cubic: SemiConj,
}

fn pair() -> &'static Pair {
    static P: OnceLock<Pair> = OnceLock::new();
    P.get_or_init(|| {
        let t = Angle::new(2, 3);
        let data = GraphData::Renorm { t0: Angle::new(1, 3), k: 2 };
        let a = center_in_copy(Family::Cubic, &t, 1).unwrap();
        let l = center_in_copy(Family::Newton, &t, 1).unwrap();
        let d = Graph::build(&MapFamily::dbas(), Variant::Dbas, &GraphData::None).unwrap();
        let c = Graph::build(&a.map().unwrap(), Variant::CubicRenorm, &data).unwrap();
        let n = Graph::build(&l.map().unwrap(), Variant::NewtonRenorm, &data).unwrap();
        Pair {
            dbas: SemiConj::new(Side::Dbas, d, n.clone(), DEFAULT_DEPTH).unwrap(),
            cubic: SemiConj::new(Side::Cubic, c, n, DEFAULT_DEPTH).unwrap(),
        }
    })
}

#[test]
fn psi_examples() {
    let p = pair();
    let inf = SpherePoint::infinity();
    let v = p.dbas.psi(&SpherePoint::finite(C::new(0.0, 0.0))).unwrap();
    assert!(v.image.dist(&inf) <= v.err.max(1e-6), "{:?}", v.image);
    let mut cache = LandingCache::default();
    let v = p.cubic.psi_angle(&Angle::zero(), DEFAULT_DEPTH, &mut cache).unwrap();
    assert!(v.image.dist(&inf) <= v.err.max(1e-6));
    // Superattracting centers go to the matching roots.
    let s = C::i() / 2f64.sqrt();
    let n = p.dbas.target.map;
    for (z, root) in [(s, 1), (-s, 2)] {
        let v = p.dbas.psi(&SpherePoint::finite(z)).unwrap();
        let r = cubic_mating::maps::newton_roots(p.dbas.lambda())[root];
        assert!(v.image.dist(&SpherePoint::finite(r)) < 1e-6, "{z}");
        assert!(n.evaluate(v.image).dist(&v.image) < 1e-6);
    }
}

#[test]
fn psi_rejects_escaping_points() {
    let p = pair();
    assert!(p.dbas.psi(&SpherePoint::finite(C::new(5.0, 1.0))).is_err());
    assert!(SemiConj::new(Side::Cubic, p.dbas.source.clone(), p.dbas.target.clone(), 4).is_err());
}

#[test]
fn semiconjugacy_on_a_small_sample() {
    let p = pair();
    for s in [&p.dbas, &p.cubic] {
        let a = s.verify_semiconjugacy(40, 7).unwrap();
        let b = s.verify_semiconjugacy(40, 7).unwrap();
        assert_eq!(a.violations, 0, "{}", s.side.name());
        assert!(a.max_residual < 1e-2);
        assert_eq!(a.max_residual, b.max_residual);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

#[test]
fn equivalence_follows_the_angle_classes() {
    let p = pair();
    let mut cache = LandingCache::default();
    let cases = [
        (Angle::new(1, 3), Angle::new(2, 3)),
        (Angle::zero(), Angle::zero()),
        (Angle::new(1, 2), Angle::new(1, 2)),
        (Angle::new(1, 3), Angle::new(1, 3)),
        (Angle::new(1, 9), Angle::new(8, 9)),
        (Angle::new(1, 9), Angle::new(4, 9)),
    ];
    let mut negatives = 0;
    for (s, t) in cases.clone() {
        let e = ray_equivalent(&p.dbas, &Input::Angle(s.clone()), &p.cubic, &Input::Angle(t.clone()), &mut cache).unwrap();
        assert_eq!(Some(e.equivalent), e.certificate.symbolic, "{s} {t}: {:?}", e.certificate);
        negatives += !e.equivalent as usize;
    }
    assert!(negatives > 0 && negatives < cases.len());
    // The dbas plane is glued with reversed orientation.
    let e = ray_equivalent(&p.dbas, &Input::Angle(Angle::new(1, 3)), &p.cubic, &Input::Angle(Angle::new(2, 3)), &mut cache)
        .unwrap();
    assert!(e.equivalent);
}

#[test]
fn angle_classes_respect_orientation() {
    let t = Angle::new(2, 7);
    assert_eq!(angle_class(Side::Dbas, &t), angle_class(Side::Cubic, &t.neg()));
}

#[test]
fn coverage_on_a_coarse_grid() {
    let p = pair();
    let r = surjectivity_sample(&p.dbas, &p.cubic, 200).unwrap();
    assert_eq!(r.points, 200);
    assert_eq!(r.dbas + r.cubic + r.both + r.uncovered, 200);
    assert!(r.uncovered_fraction < 0.05, "{r:?}");
}

#[test]
fn random_angles_are_deterministic() {
    assert_eq!(random_angles(50, 3), random_angles(50, 3));
    assert_ne!(random_angles(50, 3), random_angles(50, 4));
}
