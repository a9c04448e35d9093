//! The three cubic families and points on the Riemann sphere.

use std::fmt;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{cubic_roots, poly_eval, poly_eval_d, ZERO};

/// Radius at which a point switches charts.
pub const CHART_RADIUS: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    Finite,
    /// The stored value `w` stands for `1/w`.
    Infinity,
}

#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    pub value: C,
    pub chart: Chart,
}

impl fmt::Debug for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.chart {
            Chart::Finite => write!(f, "{}", self.value),
            Chart::Infinity if self.value == ZERO => write!(f, "∞"),
            Chart::Infinity => write!(f, "1/({})", self.value),
        }
    }
}

impl SpherePoint {
    pub fn finite(z: C) -> Self {
        if !z.is_finite() {
            return Self::infinity();
        }
        if z.norm() > CHART_RADIUS {
            SpherePoint { value: 1.0 / z, chart: Chart::Infinity }
        } else {
            SpherePoint { value: z, chart: Chart::Finite }
        }
    }

    /// The point `1/w`.
    pub fn inverse(w: C) -> Self {
        if w.norm() > CHART_RADIUS || !w.is_finite() {
            SpherePoint { value: 1.0 / w, chart: Chart::Finite }
        } else {
            SpherePoint { value: w, chart: Chart::Infinity }
        }
    }

    pub fn infinity() -> Self {
        SpherePoint { value: ZERO, chart: Chart::Infinity }
    }

    pub fn is_infinity(&self) -> bool {
        self.chart == Chart::Infinity && self.value == ZERO
    }

    /// The point as a complex number (infinite at ∞).
    pub fn z(&self) -> C {
        match self.chart {
            Chart::Finite => self.value,
            Chart::Infinity if self.value == ZERO => C::new(f64::INFINITY, 0.0),
            Chart::Infinity => 1.0 / self.value,
        }
    }

    /// The coordinate `1/z`.
    pub fn w(&self) -> C {
        match self.chart {
            Chart::Infinity => self.value,
            Chart::Finite if self.value == ZERO => C::new(f64::INFINITY, 0.0),
            Chart::Finite => 1.0 / self.value,
        }
    }

    /// Stereographic image on the unit sphere.
    pub fn xyz(&self) -> [f64; 3] {
        let v = self.value;
        let n = v.norm_sqr();
        match self.chart {
            Chart::Finite => [2.0 * v.re / (1.0 + n), 2.0 * v.im / (1.0 + n), (n - 1.0) / (n + 1.0)],
            Chart::Infinity => [2.0 * v.re / (1.0 + n), -2.0 * v.im / (1.0 + n), (1.0 - n) / (1.0 + n)],
        }
    }

    /// Chordal distance, at most 2. Equals `2|z-w|/sqrt((1+|z|²)(1+|w|²))`.
    pub fn dist(&self, other: &SpherePoint) -> f64 {
        let a = self.xyz();
        let b = other.xyz();
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }

    pub fn is_finite_value(&self) -> bool {
        self.value.is_finite()
    }
}

impl From<C> for SpherePoint {
    fn from(z: C) -> Self {
        SpherePoint::finite(z)
    }
}

/// Chordal distance between two plane points.
pub fn chordal(a: C, b: C) -> f64 {
    SpherePoint::finite(a).dist(&SpherePoint::finite(b))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum MapFamily {
    /// `z(z² + 3/2)`.
    Dbas,
    /// `z²(z + 3a/2)`.
    Cubic(C),
    /// Newton map of `(z + 1/2 − λ)(z + 1/2 + λ)(z − 1)`.
    Newton(C),
}

/// `p`, `q` with `P_λ(z) = z³ + p z + q`.
pub fn newton_pq(lambda: C) -> (C, C) {
    let l2 = lambda * lambda;
    (-(0.75 + l2), l2 - 0.25)
}

/// Coefficients (ascending) of `N_λ = (2z³ − q)/(3z² + p)`.
pub fn newton_rational_form(lambda: C) -> Result<(Vec<C>, Vec<C>)> {
    check_newton(lambda)?;
    let (p, q) = newton_pq(lambda);
    Ok((
        vec![-q, ZERO, ZERO, C::new(2.0, 0.0)],
        vec![p, ZERO, C::new(3.0, 0.0)],
    ))
}

fn check_newton(lambda: C) -> Result<()> {
    for bad in [-1.5, 0.0, 1.5] {
        if (lambda - C::new(bad, 0.0)).norm() < 1e-12 {
            return Err(Error::Degenerate(format!("lambda = {lambda} has a multiple root")));
        }
    }
    if !lambda.is_finite() {
        return Err(Error::Degenerate("non-finite lambda".into()));
    }
    Ok(())
}

impl MapFamily {
    pub fn dbas() -> Self {
        MapFamily::Dbas
    }

    pub fn cubic(a: C) -> Result<Self> {
        if a == ZERO || !a.is_finite() {
            return Err(Error::Degenerate("cubic parameter must be finite and nonzero".into()));
        }
        Ok(MapFamily::Cubic(a))
    }

    pub fn newton(lambda: C) -> Result<Self> {
        check_newton(lambda)?;
        Ok(MapFamily::Newton(lambda))
    }

    pub fn is_polynomial(&self) -> bool {
        !matches!(self, MapFamily::Newton(_))
    }

    pub fn param(&self) -> Option<C> {
        match *self {
            MapFamily::Dbas => None,
            MapFamily::Cubic(a) => Some(a),
            MapFamily::Newton(l) => Some(l),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MapFamily::Dbas => "dbas",
            MapFamily::Cubic(_) => "cubic",
            MapFamily::Newton(_) => "newton",
        }
    }

    /// Numerator and denominator in ascending coefficients.
    pub fn rational_form(&self) -> (Vec<C>, Vec<C>) {
        let one = C::new(1.0, 0.0);
        match *self {
            MapFamily::Dbas => (vec![ZERO, C::new(1.5, 0.0), ZERO, one], vec![one]),
            MapFamily::Cubic(a) => (vec![ZERO, ZERO, 1.5 * a, one], vec![one]),
            MapFamily::Newton(l) => newton_rational_form(l).expect("validated at construction"),
        }
    }

    /// Plane evaluation; returns a non-finite value at poles.
    #[inline]
    pub fn f(&self, z: C) -> C {
        match *self {
            MapFamily::Dbas => z * (z * z + 1.5),
            MapFamily::Cubic(a) => z * z * (z + 1.5 * a),
            MapFamily::Newton(l) => {
                let (p, q) = newton_pq(l);
                let z2 = z * z;
                (2.0 * z2 * z - q) / (3.0 * z2 + p)
            }
        }
    }

    /// Value and derivative.
    #[inline]
    pub fn f_d(&self, z: C) -> (C, C) {
        match *self {
            MapFamily::Dbas => {
                let z2 = z * z;
                (z * (z2 + 1.5), 3.0 * z2 + 1.5)
            }
            MapFamily::Cubic(a) => {
                let z2 = z * z;
                (z2 * (z + 1.5 * a), 3.0 * z2 + 3.0 * a * z)
            }
            MapFamily::Newton(l) => {
                let (p, q) = newton_pq(l);
                let z2 = z * z;
                let num = 2.0 * z2 * z - q;
                let den = 3.0 * z2 + p;
                // N' = 6z P(z) / P'(z)^2 with P = z³ + pz + q.
                let pz = z2 * z + p * z + q;
                (num / den, 6.0 * z * pz / (den * den))
            }
        }
    }

    /// Derivative of `f(z)` with respect to the family parameter.
    #[inline]
    pub fn f_dparam(&self, z: C) -> C {
        match *self {
            MapFamily::Dbas => ZERO,
            MapFamily::Cubic(_) => 1.5 * z * z,
            MapFamily::Newton(l) => {
                let (p, q) = newton_pq(l);
                let z2 = z * z;
                let num = 2.0 * z2 * z - q;
                let den = 3.0 * z2 + p;
                2.0 * l * (num - den) / (den * den)
            }
        }
    }

    pub fn derivative(&self, z: C) -> C {
        self.f_d(z).1
    }

    /// The map in the chart `w = 1/z` at both ends.
    fn f_inf(&self, w: C) -> C {
        match *self {
            MapFamily::Dbas => w * w * w / (1.0 + 1.5 * w * w),
            MapFamily::Cubic(a) => w * w * w / (1.0 + 1.5 * a * w),
            MapFamily::Newton(l) => {
                let (p, q) = newton_pq(l);
                w * (3.0 + p * w * w) / (2.0 - q * w * w * w)
            }
        }
    }

    /// Evaluation on the sphere with chart handling.
    pub fn evaluate(&self, z: SpherePoint) -> SpherePoint {
        match z.chart {
            Chart::Infinity => {
                let w = self.f_inf(z.value);
                SpherePoint::inverse(w)
            }
            Chart::Finite => {
                let (num, den) = self.rational_form();
                let n = poly_eval(&num, z.value);
                let d = poly_eval(&den, z.value);
                if n.norm() > CHART_RADIUS * d.norm() {
                    SpherePoint::inverse(d / n)
                } else {
                    SpherePoint::finite(n / d)
                }
            }
        }
    }

    pub fn iterate(&self, z: SpherePoint, n: usize) -> SpherePoint {
        (0..n).fold(z, |acc, _| self.evaluate(acc))
    }

    /// Finite critical points with multiplicity, in a fixed order.
    pub fn finite_critical_points(&self) -> Vec<C> {
        match *self {
            MapFamily::Dbas => {
                let c = C::new(0.0, 0.5f64.sqrt());
                vec![c, -c]
            }
            MapFamily::Cubic(a) => vec![ZERO, -a],
            MapFamily::Newton(l) => vec![-0.5 - l, -0.5 + l, C::new(1.0, 0.0), ZERO],
        }
    }

    /// Free critical point (the one not fixed), if any.
    pub fn free_critical_point(&self) -> Option<C> {
        match *self {
            MapFamily::Dbas => None,
            MapFamily::Cubic(a) => Some(-a),
            MapFamily::Newton(_) => Some(ZERO),
        }
    }

    pub fn critical_and_fixed_sets(&self) -> (Vec<SpherePoint>, Vec<SpherePoint>) {
        let mut crit: Vec<SpherePoint> = self.finite_critical_points().into_iter().map(SpherePoint::finite).collect();
        if self.is_polynomial() {
            // ∞ is critical of local degree 3, counted twice.
            crit.push(SpherePoint::infinity());
            crit.push(SpherePoint::infinity());
        }
        let mut fixed: Vec<SpherePoint> = self.finite_fixed_points().into_iter().map(SpherePoint::finite).collect();
        fixed.push(SpherePoint::infinity());
        (crit, fixed)
    }

    /// Finite fixed points by closed-form solving.
    pub fn finite_fixed_points(&self) -> Vec<C> {
        match *self {
            MapFamily::Dbas => {
                let c = C::new(0.0, 0.5f64.sqrt());
                vec![ZERO, c, -c]
            }
            MapFamily::Cubic(a) => {
                let mut v = vec![ZERO];
                v.extend(crate::numerics::quadratic_roots(C::new(-1.0, 0.0), 1.5 * a, C::new(1.0, 0.0)));
                v
            }
            MapFamily::Newton(l) => vec![-0.5 - l, -0.5 + l, C::new(1.0, 0.0)],
        }
    }

    /// The three preimages of `w`, with multiplicity.
    pub fn preimages(&self, w: SpherePoint) -> Vec<SpherePoint> {
        match w.chart {
            Chart::Finite => {
                let (num, den) = self.rational_form();
                let mut c = [ZERO; 4];
                for (i, &k) in num.iter().enumerate() {
                    c[i] += k;
                }
                for (i, &k) in den.iter().enumerate() {
                    c[i] -= w.value * k;
                }
                cubic_roots(c).into_iter().map(SpherePoint::finite).collect()
            }
            Chart::Infinity => {
                // Solve in u = 1/z.
                let v = w.value;
                let c = match *self {
                    MapFamily::Dbas => [-v, ZERO, -1.5 * v, C::new(1.0, 0.0)],
                    MapFamily::Cubic(a) => [-v, -1.5 * a * v, ZERO, C::new(1.0, 0.0)],
                    MapFamily::Newton(l) => {
                        let (p, q) = newton_pq(l);
                        [-2.0 * v, C::new(3.0, 0.0), ZERO, p + v * q]
                    }
                };
                let mut r: Vec<SpherePoint> = cubic_roots(c).into_iter().map(SpherePoint::inverse).collect();
                while r.len() < 3 {
                    r.push(SpherePoint::infinity());
                }
                r
            }
        }
    }

    /// `f^n(z)` and `(f^n)'(z)` in the plane.
    pub fn iterate_d(&self, z: C, n: usize) -> (C, C) {
        let mut z = z;
        let mut d = C::new(1.0, 0.0);
        for _ in 0..n {
            let (fz, dz) = self.f_d(z);
            d *= dz;
            z = fz;
        }
        (z, d)
    }
}

/// Roots of `P_λ` as `[p1, p2, 1]`.
pub fn newton_roots(lambda: C) -> [C; 3] {
    [-0.5 - lambda, -0.5 + lambda, C::new(1.0, 0.0)]
}

/// Value of `P_λ` and its derivative.
pub fn newton_poly(lambda: C, z: C) -> (C, C) {
    let (p, q) = newton_pq(lambda);
    poly_eval_d(&[q, p, ZERO, C::new(1.0, 0.0)], z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn examples() {
        let s = c(0.0, 0.5f64.sqrt());
        assert!((MapFamily::Dbas.f(s) - s).norm() < 1e-15);
        let m = MapFamily::cubic(c(0.7, -0.3)).unwrap();
        assert_eq!(m.evaluate(SpherePoint::finite(ZERO)).value, ZERO);
        let n = MapFamily::newton(c(-0.3, 0.4)).unwrap();
        assert!((n.f(c(1.0, 0.0)) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn degenerate_lambda_rejected() {
        for l in [-1.5, 0.0, 1.5] {
            assert!(MapFamily::newton(c(l, 0.0)).is_err());
            assert!(newton_rational_form(c(l, 0.0)).is_err());
        }
        assert!(MapFamily::cubic(ZERO).is_err());
    }

    #[test]
    fn rational_form_coefficients() {
        let (num, den) = newton_rational_form(c(0.25, 0.0)).unwrap();
        assert!((den[0] - c(-13.0 / 16.0, 0.0)).norm() < 1e-15);
        assert!((num[0] - c(3.0 / 16.0, 0.0)).norm() < 1e-15);
        let (num, den) = newton_rational_form(c(0.0, 1.0)).unwrap();
        assert!((den[0] - c(0.25, 0.0)).norm() < 1e-15);
        assert!((num[0] - c(1.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn poles_go_to_infinity() {
        let l = c(-0.2, 0.7);
        let m = MapFamily::newton(l).unwrap();
        let (p, _) = newton_pq(l);
        let pole = (-p / 3.0).sqrt();
        assert!(m.evaluate(SpherePoint::finite(pole)).is_infinity() || m.evaluate(SpherePoint::finite(pole)).value.norm() < 1e-12);
        assert!(m.evaluate(SpherePoint::infinity()).is_infinity());
        assert!(MapFamily::Dbas.evaluate(SpherePoint::infinity()).is_infinity());
    }

    #[test]
    fn preimages_map_back() {
        let fams = [MapFamily::Dbas, MapFamily::Cubic(c(0.9, -0.5)), MapFamily::Newton(c(-0.2, 0.7))];
        let pts = [
            SpherePoint::finite(c(0.3, -0.2)),
            SpherePoint::finite(c(3.0, 1.0)),
            SpherePoint::inverse(c(0.01, 0.02)),
            SpherePoint::inverse(c(1e-9, 0.0)),
        ];
        for m in fams {
            for w in pts {
                let pre = m.preimages(w);
                assert_eq!(pre.len(), 3);
                for z in pre {
                    let back = m.evaluate(z);
                    assert!(back.dist(&w) < 1e-10, "{m:?} {w:?} {z:?} {back:?}");
                }
            }
        }
    }

    #[test]
    fn chordal_formula() {
        let a = c(0.3, 2.0);
        let b = c(-1.0, 5.5);
        let expect = 2.0 * (a - b).norm() / ((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr())).sqrt();
        assert!((chordal(a, b) - expect).abs() < 1e-14);
        assert!((SpherePoint::infinity().dist(&SpherePoint::finite(ZERO)) - 2.0).abs() < 1e-15);
    }
}
