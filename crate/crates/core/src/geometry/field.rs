//! Arithmetic in GF(p^k) for k ≤ 4 via precomputed tables.

use crate::error::{Error, Result};

/// Field element: the base-p digits of the integer are the polynomial
/// coefficients, lowest degree first.
pub type Elem = u32;

#[derive(Clone, Debug)]
pub struct FiniteField {
    p: u32,
    k: u32,
    order: u32,
    /// Coefficients of the monic modulus, lowest degree first (length k+1).
    modulus: Vec<u32>,
    add: Vec<Elem>,
    mul: Vec<Elem>,
    neg: Vec<Elem>,
    inv: Vec<Elem>,
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `Some((p, k))` when `n = p^k` with p prime and k ≥ 1.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    if n < 2 {
        return None;
    }
    let p = (2..=n).find(|d| n % d == 0)?;
    let (mut m, mut k) = (n, 0);
    while m % p == 0 {
        m /= p;
        k += 1;
    }
    (m == 1).then_some((p, k))
}

fn digits(mut v: u32, p: u32, len: usize) -> Vec<u32> {
    let mut out = vec![0; len];
    for d in out.iter_mut() {
        *d = v % p;
        v /= p;
    }
    out
}

fn undigits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Remainder of `a` modulo the monic `m`, coefficients lowest degree first.
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for (i, &c) in m.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - (lead * c) % p) % p;
            }
        }
        r.pop();
    }
    r
}

fn irreducible(m: &[u32], p: u32) -> bool {
    let deg = m.len() - 1;
    for d in 1..=deg / 2 {
        // every monic divisor candidate of degree d
        for low in 0..p.pow(d as u32) {
            let mut f = digits(low, p, d);
            f.push(1);
            if poly_rem(m, &f, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl FiniteField {
    /// GF(p^k) with the lexicographically smallest monic irreducible modulus,
    /// where lower coefficients are compared as base-p numbers with the
    /// degree k−1 coefficient most significant.
    pub fn new(p: u64, k: u32) -> Result<Self> {
        if !(1..=4).contains(&k) {
            return Err(Error::invalid("k", "extension degree must be in 1..=4"));
        }
        Self::build(p, k)
    }

    /// Same as [`FiniteField::new`] without the degree cap, for plane orders
    /// such as 32 or 256.
    pub(crate) fn build(p: u64, k: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if k == 0 || (p as f64).powi(k as i32) > 65536.0 {
            return Err(Error::invalid("p", "need k >= 1 and p^k <= 65536"));
        }
        let p = p as u32;
        let order = p.pow(k);
        let modulus = (0..order)
            .map(|low| {
                let mut m = digits(low, p, k as usize);
                m.push(1);
                m
            })
            .find(|m| irreducible(m, p))
            .ok_or_else(|| Error::pre("no irreducible modulus found"))?;
        let n = order as usize;
        let mut add = vec![0; n * n];
        let mut mul = vec![0; n * n];
        for a in 0..order {
            let da = digits(a, p, k as usize);
            for b in 0..order {
                let db = digits(b, p, k as usize);
                let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[(a * order + b) as usize] = undigits(&s, p);
                let mut prod = vec![0; 2 * k as usize - 1];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                mul[(a * order + b) as usize] = undigits(&poly_rem(&prod, &modulus, p), p);
            }
        }
        let mut neg = vec![0; n];
        let mut inv = vec![0; n];
        for a in 0..order {
            for b in 0..order {
                if add[(a * order + b) as usize] == 0 {
                    neg[a as usize] = b;
                }
                if mul[(a * order + b) as usize] == 1 {
                    inv[a as usize] = b;
                }
            }
        }
        Ok(Self {
            p,
            k,
            order,
            modulus,
            add,
            mul,
            neg,
            inv,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Modulus coefficients, lowest degree first, leading 1 included.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        self.add[(a * self.order + b) as usize]
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg[b as usize])
    }

    pub fn neg(&self, a: Elem) -> Elem {
        self.neg[a as usize]
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mul[(a * self.order + b) as usize]
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a == 0 {
            return Err(Error::InverseOfZero(self.order as u64));
        }
        Ok(self.inv[a as usize])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_fields() {
        let f = FiniteField::new(2, 1).unwrap();
        assert_eq!(f.modulus(), &[0, 1]);
        assert_eq!(f.add(1, 1), 0);
        let f = FiniteField::new(3, 1).unwrap();
        assert_eq!(f.mul(2, 2), 1);
        let f = FiniteField::new(2, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 1, 1]);
        // ω = x is element 2, ω + 1 is element 3
        assert_eq!(f.mul(2, 2), 3);
    }

    #[test]
    fn composite_p_is_rejected() {
        assert!(matches!(FiniteField::new(4, 1), Err(Error::NotPrime(4))));
        assert!(matches!(
            FiniteField::new(2, 2).unwrap().inv(0),
            Err(Error::InverseOfZero(4))
        ));
    }

    #[test]
    fn field_axioms_hold() {
        for (p, k) in [(2, 1), (2, 2), (2, 3), (3, 2), (5, 1), (2, 4), (7, 1)] {
            let f = FiniteField::new(p, k).unwrap();
            let q = f.order();
            for a in 0..q {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1, "GF({q}) inverse of {a}");
                }
                for b in 0..q {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    if a != 0 && b != 0 {
                        assert_ne!(f.mul(a, b), 0);
                    }
                    for c in 0..q.min(9) {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(8), Some((2, 3)));
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(6), None);
        assert_eq!(prime_power(1), None);
        assert_eq!(prime_power(13), Some((13, 1)));
    }
}
