//! Exact symbolic dynamics: rational angles mod 1 and triadic words.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A rational angle in `[0, 1)`, always stored in lowest terms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Angle(BigRational);

impl Angle {
    pub fn new(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        Self::from_ratio(BigRational::new(p.into(), q.into()))
    }

    pub fn from_ratio(r: BigRational) -> Self {
        let fl = r.floor();
        Angle(r - fl)
    }

    pub fn zero() -> Self {
        Angle(BigRational::zero())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn neg(&self) -> Self {
        Self::from_ratio(-self.0.clone())
    }

    pub fn add(&self, other: &Angle) -> Self {
        Self::from_ratio(&self.0 + &other.0)
    }

    /// `k * t mod 1` for any integer `k`.
    pub fn mul_int(&self, k: i64) -> Self {
        Self::from_ratio(&self.0 * BigRational::from_integer(k.into()))
    }

    /// `t / 2` taken in `[0, 1/2)`.
    pub fn half(&self) -> Self {
        Angle(&self.0 / BigRational::from_integer(2.into()))
    }

    pub fn to_f64(&self) -> f64 {
        // Reduce the numerator first so huge denominators still convert well.
        let n = self.0.numer();
        let d = self.0.denom();
        match (n.to_f64(), d.to_f64()) {
            (Some(a), Some(b)) if b.is_finite() && b > 0.0 => a / b,
            _ => {
                let scaled = (n << 60usize) / d;
                scaled.to_f64().unwrap_or(0.0) / 2f64.powi(60)
            }
        }
    }

    /// `(m * t mod 1)` as a float, exact in the multiplication.
    pub fn mul_pow_f64(&self, base: i64, exp: u32) -> f64 {
        let k = BigInt::from(base).pow(exp);
        Self::from_ratio(&self.0 * BigRational::from_integer(k)).to_f64()
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Angle({self})")
    }
}

impl PartialOrd for Angle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Angle {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl FromStr for Angle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("bad angle {s:?}, expected p/q"));
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (s, "1"),
        };
        let p: BigInt = p.parse().map_err(|_| bad())?;
        let q: BigInt = q.parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        Ok(Angle::from_ratio(BigRational::new(p, q)))
    }
}

impl Serialize for Angle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Eventually periodic word `preperiod · period^∞` over {0,1,2}.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TriadicWord {
    pre: Vec<u8>,
    period: Vec<u8>,
}

impl TriadicWord {
    /// Builds a word and puts it in canonical form.
    pub fn new(pre: Vec<u8>, period: Vec<u8>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Parse("empty period".into()));
        }
        if pre.iter().chain(period.iter()).any(|&d| d > 2) {
            return Err(Error::Parse("digit outside {0,1,2}".into()));
        }
        let mut w = TriadicWord { pre, period };
        w.reduce();
        Ok(w)
    }

    /// Constant word `d^∞`.
    pub fn constant(d: u8) -> Self {
        TriadicWord::new(vec![], vec![d]).expect("valid digit")
    }

    pub fn preperiod(&self) -> &[u8] {
        &self.pre
    }

    pub fn period(&self) -> &[u8] {
        &self.period
    }

    fn reduce(&mut self) {
        let n = self.period.len();
        for p in 1..=n {
            if n % p == 0 && (p..n).all(|i| self.period[i] == self.period[i - p]) {
                self.period.truncate(p);
                break;
            }
        }
        while let Some(&last) = self.pre.last() {
            if last != *self.period.last().unwrap() {
                break;
            }
            self.pre.pop();
            self.period.rotate_right(1);
        }
    }

    /// The i-th symbol of the infinite sequence.
    pub fn digit(&self, i: usize) -> u8 {
        if i < self.pre.len() {
            self.pre[i]
        } else {
            self.period[(i - self.pre.len()) % self.period.len()]
        }
    }

    /// First `n` symbols.
    pub fn prefix(&self, n: usize) -> Vec<u8> {
        (0..n).map(|i| self.digit(i)).collect()
    }

    /// Left shift σ.
    pub fn shift(&self) -> Self {
        if self.pre.is_empty() {
            let mut per = self.period.clone();
            per.rotate_left(1);
            TriadicWord { pre: vec![], period: per }
        } else {
            TriadicWord::new(self.pre[1..].to_vec(), self.period.clone()).unwrap()
        }
    }

    /// `d · w`.
    pub fn prepend(&self, d: u8) -> Self {
        let mut pre = vec![d];
        pre.extend_from_slice(&self.pre);
        TriadicWord::new(pre, self.period.clone()).unwrap()
    }

    /// Exact base-3 value, not reduced mod 1 (so `2̄` gives 1).
    pub fn value(&self) -> BigRational {
        let three = BigInt::from(3);
        let mut acc = BigInt::zero();
        for &d in &self.pre {
            acc = acc * &three + BigInt::from(d);
        }
        let mut per = BigInt::zero();
        for &d in &self.period {
            per = per * &three + BigInt::from(d);
        }
        let cyc = three.pow(self.period.len() as u32) - BigInt::one();
        // pre/3^n + per/(3^n (3^L - 1)), normalized once.
        BigRational::new(acc * &cyc + per, cyc * three.pow(self.pre.len() as u32))
    }

    /// Lexicographic comparison of the infinite sequences.
    pub fn cmp_infinite(&self, other: &Self) -> Ordering {
        let n = self.pre.len().max(other.pre.len()) + self.period.len() * other.period.len();
        for i in 0..n {
            match self.digit(i).cmp(&other.digit(i)) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        Ordering::Equal
    }

    /// The ∼-partner, if the word ends in 0̄ or 2̄.
    fn partner(&self) -> Option<TriadicWord> {
        if self.period.len() != 1 || self.period[0] == 1 {
            return None;
        }
        let tail = self.period[0];
        let mut pre = self.pre.clone();
        match (tail, pre.pop()) {
            (0, None) => Some(TriadicWord::constant(2)),
            (2, None) => Some(TriadicWord::constant(0)),
            (0, Some(d)) => {
                pre.push(d - 1);
                TriadicWord::new(pre, vec![2]).ok()
            }
            (2, Some(d)) => {
                pre.push(d + 1);
                TriadicWord::new(pre, vec![0]).ok()
            }
            _ => None,
        }
    }
}

impl fmt::Display for TriadicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.pre {
            write!(f, "{d}")?;
        }
        write!(f, "|")?;
        for d in &self.period {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for TriadicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

fn digits(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            '2' => Ok(2),
            _ => Err(Error::Parse(format!("bad triadic digit {c:?}"))),
        })
        .collect()
}

impl FromStr for TriadicWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (pre, per) = s
            .trim()
            .split_once('|')
            .ok_or_else(|| Error::Parse(format!("bad word {s:?}, expected pre|period")))?;
        TriadicWord::new(digits(pre)?, digits(per)?)
    }
}

impl Serialize for TriadicWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A ∼-class of one or two canonical words.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct ItinClass {
    members: Vec<TriadicWord>,
}

impl ItinClass {
    pub fn members(&self) -> &[TriadicWord] {
        &self.members
    }

    pub fn first(&self) -> &TriadicWord {
        &self.members[0]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, w: &TriadicWord) -> bool {
        self.members.contains(w)
    }
}

/// The full ∼-class of `w`.
pub fn canonicalize(w: &TriadicWord) -> ItinClass {
    let mut members = vec![w.clone()];
    if let Some(p) = w.partner() {
        members.push(p);
    }
    members.sort_by(|a, b| a.cmp_infinite(b));
    ItinClass { members }
}

/// θ: the angle coded by a class.
pub fn theta(c: &ItinClass) -> Angle {
    Angle::from_ratio(c.first().value())
}

fn is_power_of(n: &BigInt, p: u32) -> bool {
    let p = BigInt::from(p);
    let mut n = n.clone();
    while n > BigInt::one() {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return false;
        }
        n = q;
    }
    n.is_one()
}

pub fn is_triadic(t: &Angle) -> bool {
    is_power_of(t.denom(), 3)
}

/// The itinerary class of `t` under tripling.
pub fn itinerary_of_angle(t: &Angle) -> ItinClass {
    // Tripling acts on the numerator mod the (fixed) denominator.
    let q = t.denom();
    let three = BigInt::from(3);
    let step = |x: &BigInt| {
        let (d, r) = (x * &three).div_rem(q);
        (d.to_u8().expect("digit below 3"), r)
    };
    let mut digits = Vec::new();
    let mut x = t.numer().clone();
    if is_triadic(t) {
        while !x.is_zero() {
            let (d, r) = step(&x);
            digits.push(d);
            x = r;
        }
        return canonicalize(&TriadicWord::new(digits, vec![0]).unwrap());
    }
    // The preperiod has one digit per factor 3 of q; after it the orbit
    // is purely periodic.
    let mut pre = 0;
    let mut r = q.clone();
    while r.is_multiple_of(&three) {
        r /= &three;
        pre += 1;
    }
    if let (Some(q), Some(mut x)) = (q.to_u64(), x.to_u64()) {
        if q < u64::MAX / 3 {
            let mut push = |x: u64| {
                digits.push((3 * x / q) as u8);
                3 * x % q
            };
            for _ in 0..pre {
                x = push(x);
            }
            let start = x;
            x = push(x);
            while x != start {
                x = push(x);
            }
            let period = digits.split_off(pre);
            return canonicalize(&TriadicWord::new(digits, period).unwrap());
        }
    }
    for _ in 0..pre {
        let (d, r) = step(&x);
        digits.push(d);
        x = r;
    }
    let start = x.clone();
    loop {
        let (d, r) = step(&x);
        digits.push(d);
        x = r;
        if x == start {
            break;
        }
    }
    let period = digits.split_off(pre);
    canonicalize(&TriadicWord::new(digits, period).unwrap())
}

/// `d · t mod 1` for `d` in {2, 3}.
pub fn multiply_angle(t: &Angle, d: u32) -> Angle {
    assert!(d == 2 || d == 3, "only doubling and tripling are used");
    t.mul_int(d as i64)
}

/// Exact period of `t` under doubling, if `t` is periodic.
pub fn doubling_period(t: &Angle) -> Option<u32> {
    let q = t.denom();
    if q.is_even() {
        return None;
    }
    if q.is_one() {
        return Some(1);
    }
    let two = BigInt::from(2);
    let mut x = two.clone() % q;
    let mut k = 1u32;
    while !x.is_one() {
        x = (x * &two) % q;
        k += 1;
    }
    Some(k)
}

/// Distance on the circle between two angles, as a float.
pub fn circle_distance(a: &Angle, b: &Angle) -> f64 {
    let d = Angle::from_ratio(a.as_ratio() - b.as_ratio()).to_f64();
    d.min(1.0 - d).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> TriadicWord {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_form_absorbs_preperiod() {
        assert_eq!(w("0101|01").to_string(), "|01");
        assert_eq!(w("2|1212").to_string(), "|21");
        assert_eq!(w("12|0").to_string(), "12|0");
        assert_eq!(w("10|0").to_string(), "1|0");
    }

    #[test]
    fn classes_match_relation() {
        let c = canonicalize(&w("|0"));
        assert_eq!(c.members(), &[w("|0"), w("|2")]);
        assert_eq!(canonicalize(&w("|1")).len(), 1);
        let c = canonicalize(&w("1|0"));
        assert_eq!(c.members(), &[w("0|2"), w("1|0")]);
        let c = canonicalize(&w("2|0"));
        assert_eq!(c.members(), &[w("1|2"), w("2|0")]);
        assert_eq!(canonicalize(&w("0|2")), canonicalize(&w("1|0")));
    }

    #[test]
    fn theta_values() {
        assert_eq!(theta(&canonicalize(&w("1|0"))), Angle::new(1, 3));
        assert_eq!(theta(&canonicalize(&w("|0"))), Angle::zero());
        assert_eq!(theta(&canonicalize(&w("|1"))), Angle::new(1, 2));
    }

    #[test]
    fn itineraries() {
        assert_eq!(itinerary_of_angle(&Angle::new(2, 3)), canonicalize(&w("2|0")));
        assert_eq!(itinerary_of_angle(&Angle::zero()), canonicalize(&w("|2")));
        assert_eq!(itinerary_of_angle(&Angle::new(1, 2)).members(), &[w("|1")]);
        assert_eq!(itinerary_of_angle(&Angle::new(1, 4)).members(), &[w("|02")]);
    }

    #[test]
    fn multiplication() {
        assert_eq!(multiply_angle(&Angle::new(1, 3), 3), Angle::zero());
        assert_eq!(multiply_angle(&Angle::new(1, 3), 2), Angle::new(2, 3));
        assert_eq!(multiply_angle(&Angle::new(5, 9), 3), Angle::new(2, 3));
    }

    #[test]
    fn periods_and_triadic() {
        assert_eq!(doubling_period(&Angle::new(1, 3)), Some(2));
        assert_eq!(doubling_period(&Angle::new(1, 7)), Some(3));
        assert_eq!(doubling_period(&Angle::new(1, 4)), None);
        assert_eq!(doubling_period(&Angle::zero()), Some(1));
        assert!(is_triadic(&Angle::new(5, 9)));
        assert!(!is_triadic(&Angle::new(1, 2)));
        assert!(is_triadic(&Angle::zero()));
    }

    #[test]
    fn parsing() {
        assert_eq!("3/6".parse::<Angle>().unwrap(), Angle::new(1, 2));
        assert_eq!("-1/3".parse::<Angle>().unwrap(), Angle::new(2, 3));
        assert!("1/0".parse::<Angle>().is_err());
        assert!("01|".parse::<TriadicWord>().is_err());
        assert!("03|1".parse::<TriadicWord>().is_err());
        assert_eq!(Angle::new(1, 3).to_string(), "1/3");
    }

    #[test]
    fn shift_and_prepend() {
        let x = w("12|021");
        assert_eq!(x.shift(), w("2|021"));
        assert_eq!(x.shift().prepend(1), x);
        assert_eq!(w("|012").shift(), w("|120"));
    }
}
