//! Dense polynomials over `𝔽_p` for small odd primes `p < 2^32`, with
//! Cantor–Zassenhaus factorization of squarefree monic polynomials.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::IntPoly;

/// Coefficients modulo `p`, constant first, no trailing zeros.
pub(crate) type Fp = Vec<u64>;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Field {
    pub p: u64,
}

impl Field {
    pub fn new(p: u64) -> Self {
        assert!((3..(1 << 32)).contains(&p));
        Field { p }
    }

    fn mul(self, a: u64, b: u64) -> u64 {
        a * b % self.p
    }

    fn pow(self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn inv(self, a: u64) -> u64 {
        assert!(!a.is_multiple_of(self.p));
        self.pow(a, self.p - 2)
    }

    pub fn reduce(self, p: &IntPoly) -> Fp {
        let m = BigInt::from(self.p);
        let mut v: Fp = p.coeffs().iter().map(|c| c.mod_floor(&m).to_u64().unwrap_or(0)).collect();
        trim(&mut v);
        v
    }

    #[cfg(test)]
    pub fn add(self, a: &Fp, b: &Fp) -> Fp {
        let n = a.len().max(b.len());
        let mut v: Fp = (0..n).map(|k| (a.get(k).copied().unwrap_or(0) + b.get(k).copied().unwrap_or(0)) % self.p).collect();
        trim(&mut v);
        v
    }

    pub fn sub(self, a: &Fp, b: &Fp) -> Fp {
        let n = a.len().max(b.len());
        let mut v: Fp =
            (0..n).map(|k| (a.get(k).copied().unwrap_or(0) + self.p - b.get(k).copied().unwrap_or(0)) % self.p).collect();
        trim(&mut v);
        v
    }

    pub fn mul_poly(self, a: &Fp, b: &Fp) -> Fp {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut v = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                v[i + j] = (v[i + j] + x * y) % self.p;
            }
        }
        trim(&mut v);
        v
    }

    pub fn scale(self, a: &Fp, k: u64) -> Fp {
        let mut v: Fp = a.iter().map(|&x| self.mul(x, k)).collect();
        trim(&mut v);
        v
    }

    pub fn monic(self, a: &Fp) -> Fp {
        match a.last() {
            Some(&lc) => self.scale(a, self.inv(lc)),
            None => Vec::new(),
        }
    }

    pub fn divrem(self, a: &Fp, b: &Fp) -> (Fp, Fp) {
        assert!(!b.is_empty(), "division by zero polynomial mod p");
        if a.len() < b.len() {
            return (Vec::new(), a.clone());
        }
        let inv = self.inv(*b.last().unwrap_or(&1));
        let db = b.len() - 1;
        let mut r = a.clone();
        let mut q = vec![0u64; a.len() - db];
        for k in (0..q.len()).rev() {
            let c = self.mul(r[k + db], inv);
            q[k] = c;
            if c == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                r[k + j] = (r[k + j] + self.p - self.mul(c, bj)) % self.p;
            }
        }
        trim(&mut q);
        trim(&mut r);
        (q, r)
    }

    pub fn rem(self, a: &Fp, b: &Fp) -> Fp {
        self.divrem(a, b).1
    }

    pub fn gcd(self, a: &Fp, b: &Fp) -> Fp {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_empty() {
            let r = self.rem(&x, &y);
            x = y;
            y = r;
        }
        self.monic(&x)
    }

    /// Returns `(g, s, t)` with `s·a + t·b = g` and `g` monic.
    pub fn ext_gcd(self, a: &Fp, b: &Fp) -> (Fp, Fp, Fp) {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1): (Fp, Fp) = (vec![1], Vec::new());
        let (mut t0, mut t1): (Fp, Fp) = (Vec::new(), vec![1]);
        while !r1.is_empty() {
            let (q, r) = self.divrem(&r0, &r1);
            let s2 = self.sub(&s0, &self.mul_poly(&q, &s1));
            let t2 = self.sub(&t0, &self.mul_poly(&q, &t1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
            t0 = std::mem::replace(&mut t1, t2);
        }
        let lc = *r0.last().unwrap_or(&1);
        let inv = self.inv(lc);
        (self.scale(&r0, inv), self.scale(&s0, inv), self.scale(&t0, inv))
    }

    fn mulmod(self, a: &Fp, b: &Fp, f: &Fp) -> Fp {
        self.rem(&self.mul_poly(a, b), f)
    }

    fn powmod(self, base: &Fp, e: &BigUint, f: &Fp) -> Fp {
        let mut result: Fp = vec![1];
        let b = self.rem(base, f);
        for i in (0..e.bits()).rev() {
            result = self.mulmod(&result, &result, f);
            if e.bit(i) {
                result = self.mulmod(&result, &b, f);
            }
        }
        result
    }

    /// Distinct-degree factorization of a squarefree monic polynomial.
    fn distinct_degree(self, f: &Fp) -> Vec<(Fp, usize)> {
        let mut out = Vec::new();
        let mut rest = f.clone();
        let x: Fp = vec![0, 1];
        let p = BigUint::from(self.p);
        let mut h = x.clone();
        let mut d = 0;
        while rest.len() > 2 * (d + 1) {
            d += 1;
            h = self.powmod(&h, &p, &rest);
            let g = self.gcd(&self.sub(&h, &x), &rest);
            if g.len() > 1 {
                out.push((g.clone(), d));
                rest = self.divrem(&rest, &g).0;
                h = self.rem(&h, &rest);
            }
        }
        if rest.len() > 1 {
            let deg = rest.len() - 1;
            out.push((rest, deg));
        }
        out
    }

    /// Splits a product of distinct irreducibles of degree `d`.
    fn equal_degree(self, g: &Fp, d: usize, rng: &mut ChaCha8Rng) -> Vec<Fp> {
        let n = g.len() - 1;
        if n == d {
            return vec![g.clone()];
        }
        let e = (BigUint::from(self.p).pow(d as u32) - BigUint::one()) / BigUint::from(2u32);
        loop {
            let a: Fp = {
                let mut v: Fp = (0..n).map(|_| rng.gen_range(0..self.p)).collect();
                trim(&mut v);
                v
            };
            if a.len() < 2 {
                continue;
            }
            let b = self.sub(&self.powmod(&a, &e, g), &vec![1]);
            let h = self.gcd(&b, g);
            if h.len() > 1 && h.len() < g.len() {
                let other = self.divrem(g, &h).0;
                let mut out = self.equal_degree(&h, d, rng);
                out.extend(self.equal_degree(&other, d, rng));
                return out;
            }
        }
    }

    /// Monic irreducible factors of a squarefree monic polynomial.
    pub fn factor_squarefree(self, f: &Fp) -> Vec<Fp> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ self.p);
        let mut out = Vec::new();
        for (g, d) in self.distinct_degree(f) {
            out.extend(self.equal_degree(&g, d, &mut rng));
        }
        out.sort();
        out
    }
}

pub(crate) fn trim(v: &mut Fp) {
    while v.last() == Some(&0) {
        v.pop();
    }
}
