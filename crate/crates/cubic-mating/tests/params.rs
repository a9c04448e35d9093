use cubic_mating::angles::Angle;
use cubic_mating::params::*;
use num_complex::Complex64 as C;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// `(p, q, k)` with `p/q` reduced and `p/(2q)` of doubling period `k >= 2`,
/// by direct orbit enumeration on integers.
fn brute_cusps(max_den: u64) -> Vec<(u64, u64, u32)> {
    let mut out = Vec::new();
    for q in 2..=max_den {
        for p in 1..q {
            if gcd(p, q) != 1 {
                continue;
            }
            let (mut n, mut d) = (p, 2 * q);
            let g = gcd(n, d);
            n /= g;
            d /= g;
            if d % 2 == 0 {
                continue;
            }
            let mut x = n;
            let mut k = 0;
            loop {
                x = 2 * x % d;
                k += 1;
                if x == n {
                    break;
                }
            }
            if k >= 2 {
                out.push((p, q, k));
            }
        }
    }
    out.sort_by(|a, b| (a.0 * b.1).cmp(&(b.0 * a.1)));
    out
}

#[test]
fn cusp_angles_match_enumeration() {
    let got: Vec<(String, u32)> = cusp_angles(1023).into_iter().map(|(t, k)| (t.to_string(), k)).collect();
    let want: Vec<(String, u32)> = brute_cusps(1023).into_iter().map(|(p, q, k)| (format!("{p}/{q}"), k)).collect();
    assert_eq!(got.len(), want.len());
    assert_eq!(got, want);
    let small = cusp_angles(7);
    assert!(small.contains(&(Angle::new(2, 3), 2)));
    assert!(small.contains(&(Angle::new(2, 7), 3)));
    assert!(!small.iter().any(|(t, _)| t.is_zero()));
}

#[test]
fn boundary_param_has_the_right_argument() {
    for fam in [Family::Cubic, Family::Newton] {
        for t in [Angle::new(2, 3), Angle::new(1, 2), Angle::new(2, 7), Angle::new(3, 5)] {
            let p = param_at(fam, &t, 1e-4).unwrap();
            let phi = critical_value_position(&ParamPoint::new(fam, p, Region::Main)).unwrap();
            let want = C::from_polar(1.0, 2.0 * std::f64::consts::PI * t.to_f64());
            assert!((phi / phi.norm() - want).norm() < 1e-5, "{} {t}: {phi}", fam.name());
            assert!((phi.norm() - (-1e-4f64).exp()).abs() < 1e-6);
        }
    }
}

#[test]
fn critical_value_position_near_centers() {
    let small = critical_value_position(&ParamPoint::new(Family::Cubic, C::new(0.01, -0.01), Region::Main)).unwrap();
    assert!(small.norm() < 0.1);
    // Far outside the main component the critical orbit does not converge.
    assert!(critical_value_position(&ParamPoint::new(Family::Cubic, C::new(1.0017, -0.5194), Region::Main)).is_err());
}

#[test]
fn centers_of_the_copy_at_two_thirds() {
    for fam in [Family::Cubic, Family::Newton] {
        let c = center_in_copy(fam, &Angle::new(2, 3), 1).unwrap();
        let m = c.map().unwrap();
        let crit = m.free_critical_point().unwrap();
        let back = m.iterate_d(crit, 2).0;
        assert!((back - crit).norm() < 1e-10, "{}", fam.name());
        assert!((m.f(crit) - crit).norm() > 1e-3);
        assert!(matches!(c.region, Region::Center { k: 2, m: 1, .. }));
    }
    let a = center_in_copy(Family::Cubic, &Angle::new(2, 3), 1).unwrap();
    assert!((a.value - C::new(1.001739727069808, -0.5193559013447667)).norm() < 1e-9);
    let l = center_in_copy(Family::Newton, &Angle::new(2, 3), 1).unwrap();
    assert!((l.value - C::new(0.0, 0.3333212872419752)).norm() < 1e-9);
}

#[test]
fn higher_period_centers_have_small_residuals() {
    let c = center_in_copy(Family::Cubic, &Angle::new(2, 3), 2).unwrap();
    let m = c.map().unwrap();
    let crit = m.free_critical_point().unwrap();
    assert!((m.iterate_d(crit, 4).0 - crit).norm() < 1e-10);
    assert!((m.iterate_d(crit, 2).0 - crit).norm() > 1e-4);
}

#[test]
fn correspondence_on_the_skeleton() {
    let t = Angle::new(2, 3);
    let cusp = boundary_param(Family::Cubic, &t).unwrap();
    let out = correspondence(&cusp).unwrap();
    let want = boundary_param(Family::Newton, &t).unwrap();
    assert!((out.output.value - want.value).norm() < 1e-8);
    assert!(!out.approximate);
    let center = center_in_copy(Family::Cubic, &t, 1).unwrap();
    let out = correspondence(&center).unwrap();
    let want = center_in_copy(Family::Newton, &t, 1).unwrap();
    assert!((out.output.value - want.value).norm() < 1e-8);
    for bad in [C::new(0.0, 4.0 / 3.0), C::new(0.0, -4.0 / 3.0)] {
        assert!(correspondence(&ParamPoint::new(Family::Cubic, bad, Region::Other)).is_err());
    }
    assert!(correspondence(&ParamPoint::new(Family::Cubic, C::new(0.3, -0.2), Region::Main)).is_err());
}

#[test]
fn correspondence_is_injective_on_cusps_and_centers() {
    let mut images: Vec<C> = Vec::new();
    for (t, _) in cusp_angles(9) {
        let Ok(cusp) = boundary_param(Family::Cubic, &t) else { continue };
        if let Ok(out) = correspondence(&cusp) {
            images.push(out.output.value);
        }
        if let Ok(center) = center_in_copy(Family::Cubic, &t, 1) {
            if let Ok(out) = correspondence(&center) {
                images.push(out.output.value);
            }
        }
    }
    assert!(images.len() >= 8);
    for (i, a) in images.iter().enumerate() {
        for b in &images[i + 1..] {
            assert!((a - b).norm() > 1e-8);
        }
    }
}

#[test]
fn canonical_representatives() {
    for v in [C::new(-0.7, 0.3), C::new(0.7, 0.3), C::new(-0.7, -0.3)] {
        let c = canonical(Family::Cubic, v);
        assert!(c.re >= 0.0 && c.im <= 0.0);
        assert!((c.norm() - v.norm()).abs() < 1e-15);
    }
}

#[test]
fn parameter_classification() {
    assert_eq!(classify_parameter(Family::Cubic, C::new(0.1, -0.1), 1000, 1e-8), 0);
    let a = center_in_copy(Family::Cubic, &Angle::new(2, 3), 1).unwrap();
    assert_eq!(classify_parameter(Family::Cubic, a.value, 1000, 1e-8), 1);
}

#[test]
fn centers_of_small_copies() {
    for t in [Angle::new(2, 5), Angle::new(4, 5), Angle::new(2, 7), Angle::new(6, 7), Angle::new(4, 9)] {
        for fam in [Family::Cubic, Family::Newton] {
            let c = center_in_copy(fam, &t, 1).unwrap();
            let cusp = boundary_param(fam, &t).unwrap();
            let Region::Center { k, .. } = c.region else { panic!("{t}") };
            let m = c.map().unwrap();
            let crit = m.free_critical_point().unwrap();
            assert!((m.iterate_d(crit, k as usize).0 - crit).norm() < 1e-10, "{} {t}", fam.name());
            assert!((c.value - cusp.value).norm() < 0.05, "{} {t}", fam.name());
        }
    }
}
