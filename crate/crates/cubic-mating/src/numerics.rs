//! Small numeric kit: polynomial roots and truncated power series.

use num_complex::Complex64 as C;

pub const ZERO: C = C::new(0.0, 0.0);
pub const ONE: C = C::new(1.0, 0.0);

/// Horner evaluation, coefficients in ascending order.
pub fn poly_eval(c: &[C], z: C) -> C {
    c.iter().rev().fold(ZERO, |acc, &k| acc * z + k)
}

/// Value and derivative, ascending coefficients.
pub fn poly_eval_d(c: &[C], z: C) -> (C, C) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for &k in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + k;
    }
    (p, dp)
}

pub fn poly_mul(a: &[C], b: &[C]) -> Vec<C> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn poly_add(a: &[C], b: &[C]) -> Vec<C> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(ZERO) + b.get(i).copied().unwrap_or(ZERO))
        .collect()
}

pub fn poly_scale(a: &[C], s: C) -> Vec<C> {
    a.iter().map(|&x| x * s).collect()
}

fn trim(c: &[C]) -> &[C] {
    let mut n = c.len();
    while n > 0 && c[n - 1] == ZERO {
        n -= 1;
    }
    &c[..n]
}

/// Roots of `c0 + c1 z + c2 z^2` (fewer if the leading terms vanish).
pub fn quadratic_roots(c0: C, c1: C, c2: C) -> Vec<C> {
    if c2 == ZERO {
        if c1 == ZERO {
            return vec![];
        }
        return vec![-c0 / c1];
    }
    let disc = (c1 * c1 - 4.0 * c2 * c0).sqrt();
    // Pick the sign that avoids cancellation.
    let s = if (c1.conj() * disc).re >= 0.0 { c1 + disc } else { c1 - disc };
    if s == ZERO {
        return vec![ZERO, ZERO];
    }
    let r1 = -s / (2.0 * c2);
    let r2 = -2.0 * c0 / s;
    vec![r1, r2]
}

/// Roots of a polynomial of degree at most 3 (ascending coefficients), by
/// Cardano's formula followed by Newton polishing on the original cubic.
pub fn cubic_roots(c: [C; 4]) -> Vec<C> {
    if c[3] == ZERO {
        return quadratic_roots(c[0], c[1], c[2]);
    }
    let a = c[2] / c[3];
    let b = c[1] / c[3];
    let d = c[0] / c[3];
    // Depressed cubic y^3 + p y + q with z = y - a/3.
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + d;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let mut u3 = -q / 2.0 + disc;
    if u3.norm() < (-q / 2.0 - disc).norm() {
        u3 = -q / 2.0 - disc;
    }
    let omega = C::new(-0.5, 3f64.sqrt() / 2.0);
    let mut roots = Vec::with_capacity(3);
    if u3.norm() == 0.0 {
        let y = (-q).powf(1.0 / 3.0);
        for k in 0..3 {
            roots.push(y * omega.powi(k) - a / 3.0);
        }
    } else {
        let u = u3.powf(1.0 / 3.0);
        for k in 0..3 {
            let uk = u * omega.powi(k);
            roots.push(uk - p / (3.0 * uk) - a / 3.0);
        }
    }
    // Keep the largest root, then deflate from the constant term so the
    // remaining pair is not polluted by cancellation.
    let mut big = roots
        .iter()
        .copied()
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .unwrap();
    polish(&c, &mut big);
    let mut out = if big == ZERO {
        vec![ZERO, ZERO, ZERO]
    } else {
        let b0 = -c[0] / big;
        let b1 = (b0 - c[1]) / big;
        let mut v = quadratic_roots(b0, b1, c[3]);
        v.push(big);
        v
    };
    for r in out.iter_mut() {
        polish(&c, r);
    }
    out
}

fn polish(c: &[C], r: &mut C) {
    for _ in 0..3 {
        let (f, df) = poly_eval_d(c, *r);
        if df.norm() == 0.0 || !f.is_finite() {
            break;
        }
        let step = f / df;
        if !step.is_finite() {
            break;
        }
        *r -= step;
        if step.norm() <= 1e-17 * r.norm().max(1.0) {
            break;
        }
    }
}

/// All roots of a polynomial by Aberth iteration.
pub fn poly_roots(coeffs: &[C]) -> Vec<C> {
    let c = trim(coeffs);
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return vec![];
    }
    if n <= 3 {
        let mut k = [ZERO; 4];
        k[..c.len()].copy_from_slice(c);
        return cubic_roots(k);
    }
    let lead = c[n];
    let monic: Vec<C> = c.iter().map(|&x| x / lead).collect();
    let radius = 1.0 + monic[..n].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let rad = radius.min(1e6).max(1e-3);
    let mut z: Vec<C> = (0..n)
        .map(|k| C::from_polar(rad * 0.7, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (f, df) = poly_eval_d(&monic, z[i]);
            if f == ZERO {
                continue;
            }
            let ratio = f / df;
            let mut s = ZERO;
            for j in 0..n {
                if j != i {
                    s += ONE / (z[i] - z[j]);
                }
            }
            let w = ratio / (ONE - ratio * s);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / z[i].norm().max(1.0));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// Truncated power series `sum c_k u^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub c: Vec<C>,
}

impl Series {
    pub fn new(c: Vec<C>) -> Self {
        Series { c }
    }

    pub fn order(&self) -> usize {
        self.c.len()
    }

    pub fn eval(&self, u: C) -> C {
        poly_eval(&self.c, u)
    }

    pub fn eval_d(&self, u: C) -> (C, C) {
        poly_eval_d(&self.c, u)
    }

    pub fn mul(&self, other: &Series) -> Series {
        let n = self.order().min(other.order());
        let mut out = vec![ZERO; n];
        for i in 0..n {
            for j in 0..n - i {
                out[i + j] += self.c[i] * other.c[j];
            }
        }
        Series { c: out }
    }

    /// `self ∘ inner`, requires `inner` to have zero constant term.
    pub fn compose(&self, inner: &Series) -> Series {
        let n = self.order().min(inner.order());
        let mut out = vec![ZERO; n];
        let mut pow = Series { c: { let mut v = vec![ZERO; n]; v[0] = ONE; v } };
        for k in 0..self.order().min(n) {
            for i in 0..n {
                out[i] += self.c[k] * pow.c[i];
            }
            pow = pow.mul(&Series { c: inner.c[..n].to_vec() });
        }
        Series { c: out }
    }

    /// Compositional inverse of a series `b u + ...` with `b != 0`.
    pub fn inverse(&self) -> Series {
        let n = self.order();
        let b = self.c[1];
        let mut inv = vec![ZERO; n];
        inv[1] = ONE / b;
        // Fixed-point refinement: g <- g - (f(g) - u) / b.
        for _ in 0..n {
            let g = Series { c: inv.clone() };
            let fg = self.compose(&g);
            for k in 1..n {
                let target = if k == 1 { ONE } else { ZERO };
                inv[k] -= (fg.c[k] - target) / b;
            }
        }
        Series { c: inv }
    }
}

/// Taylor coefficients of the polynomial `p` about `z0`, ascending.
pub fn taylor_shift(p: &[C], z0: C) -> Vec<C> {
    let mut c = p.to_vec();
    let n = c.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let t = c[j + 1] * z0;
            c[j] += t;
        }
    }
    c
}

/// Series of `num / den` when both are given as series and `den[0] != 0`.
pub fn series_div(num: &[C], den: &[C], order: usize) -> Series {
    let mut q = vec![ZERO; order];
    for k in 0..order {
        let mut s = num.get(k).copied().unwrap_or(ZERO);
        for j in 1..=k {
            s -= den.get(j).copied().unwrap_or(ZERO) * q[k - j];
        }
        q[k] = s / den[0];
    }
    Series { c: q }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn cubic_roots_residuals() {
        let cases = [
            [C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0)],
            [C::new(-0.3, 0.2), C::new(1.5, 0.0), C::new(0.1, -0.7), C::new(2.0, 0.0)],
            [C::new(1.0, 0.0), C::new(-2.0, 0.0), C::new(-3.0, 0.0), C::new(1e-9, 0.0)],
        ];
        for c in cases {
            let r = cubic_roots(c);
            assert_eq!(r.len(), 3);
            for z in r {
                let scale = 1.0 + z.norm().powi(3) * c[3].norm() + z.norm().powi(2) * c[2].norm();
                assert!(poly_eval(&c, z).norm() < 1e-10 * scale, "{c:?} {z}");
            }
        }
    }

    #[test]
    fn aberth_finds_roots_of_unity() {
        let mut c = vec![ZERO; 8];
        c[0] = -ONE;
        c[7] = ONE;
        let r = poly_roots(&c);
        assert_eq!(r.len(), 7);
        for z in r {
            assert!(close(z.powi(7), ONE, 1e-12));
        }
    }

    #[test]
    fn series_inverse_roundtrip() {
        let s = Series::new(vec![ZERO, C::new(2.0, 1.0), C::new(0.3, 0.0), C::new(-0.1, 0.2), C::new(0.05, 0.0)]);
        let inv = s.inverse();
        let id = s.compose(&inv);
        assert!(close(id.c[1], ONE, 1e-14));
        for k in 2..5 {
            assert!(id.c[k].norm() < 1e-13);
        }
    }

    #[test]
    fn shift_matches_direct() {
        let p = vec![C::new(1.0, 0.0), C::new(0.0, 2.0), C::new(-1.0, 0.0), C::new(0.5, 0.5)];
        let z0 = C::new(0.3, -0.4);
        let q = taylor_shift(&p, z0);
        let u = C::new(0.1, 0.05);
        assert!(close(poly_eval(&q, u), poly_eval(&p, z0 + u), 1e-14));
    }
}
