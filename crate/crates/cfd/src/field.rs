//! Arithmetic in the constant field F_q, q = p^r.
//!
//! An element is stored as its base-p digit encoding `sum c_j p^j` of the
//! coordinate vector (c_0, ..., c_{r-1}) in the power basis of a generator
//! `g` modulo a fixed monic irreducible polynomial over F_p; for prime
//! fields the vector has length one and `g` does not exist. All operations
//! go through a [`FieldCtx`] so that elements stay a plain `Copy` word.
//!
//! Text encoding: prime-field elements print as decimal integers `0..q-1`;
//! extension-field elements print as polynomials in `g`, e.g. `g+1`.

use crate::{Error, Result};

/// Largest supported field size. Desk-scale computations use q <= 16.
const MAX_Q: u64 = 1 << 16;

/// Largest supported extension degree (reached only at p = 2).
const MAX_R: usize = 16;

/// Default defining polynomials (Conway polynomials), lowest degree first.
const DEFAULTS: &[(u64, usize, &[u64])] = &[
    (2, 2, &[1, 1, 1]),       // g^2 + g + 1
    (2, 3, &[1, 1, 0, 1]),    // g^3 + g + 1
    (3, 2, &[2, 2, 1]),       // g^2 + 2g + 2
    (2, 4, &[1, 1, 0, 0, 1]), // g^4 + g + 1
];

/// Context for F_q arithmetic, q = p^r.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldCtx {
    p: u64,
    r: usize,
    q: u64,
    /// Monic defining polynomial of degree r over F_p, lowest degree first.
    /// Length r+1; for r = 1 this is `[0, 1]` and unused.
    defining: Vec<u64>,
}

/// An element of F_q, stored as the base-p encoding of its coordinates.
///
/// The raw ordering of the encoding is the canonical deterministic order
/// used for roots, units and matrix indexing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FqElement(u64);

impl FieldCtx {
    /// Build F_{p^r} with the default defining polynomial.
    ///
    /// For pairs (p, r) without a listed default the monic irreducible of
    /// degree r with the smallest coefficient encoding is used.
    pub fn new(p: u64, r: usize) -> Result<FieldCtx> {
        if r == 1 {
            return FieldCtx::with_defining(p, r, vec![0, 1]);
        }
        if let Some((_, _, d)) = DEFAULTS.iter().find(|(dp, dr, _)| *dp == p && *dr == r) {
            return FieldCtx::with_defining(p, r, d.to_vec());
        }
        check_prime(p)?;
        let defining = smallest_irreducible(p, r)?;
        FieldCtx::with_defining(p, r, defining)
    }

    /// Build F_{p^r} with a caller-supplied monic defining polynomial.
    pub fn with_defining(p: u64, r: usize, defining: Vec<u64>) -> Result<FieldCtx> {
        check_prime(p)?;
        if r == 0 || r > MAX_R {
            return Err(Error::Parse(format!(
                "extension degree r must be in 1..={MAX_R}"
            )));
        }
        let q = (p as u128).checked_pow(r as u32).unwrap_or(u128::MAX);
        if q > MAX_Q as u128 {
            return Err(Error::SizeLimit(format!(
                "field size p^r = {p}^{r} exceeds {MAX_Q}"
            )));
        }
        if defining.len() != r + 1 || defining[r] != 1 || defining.iter().any(|&c| c >= p) {
            return Err(Error::NotIrreducible(format!(
                "defining polynomial must be monic of degree {r} with coefficients in [0,{p})"
            )));
        }
        if r > 1 && !fp_is_irreducible(&defining, p) {
            return Err(Error::NotIrreducible(format!("{defining:?} over F_{p}")));
        }
        Ok(FieldCtx {
            p,
            r,
            q: q as u64,
            defining,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn zero(&self) -> FqElement {
        FqElement(0)
    }

    pub fn one(&self) -> FqElement {
        FqElement(1)
    }

    /// The power-basis generator `g`. Meaningless for prime fields.
    pub fn generator(&self) -> Result<FqElement> {
        if self.r == 1 {
            return Err(Error::Parse("prime field has no generator symbol g".into()));
        }
        Ok(FqElement(self.p))
    }

    /// Embed an integer through the prime subfield.
    pub fn from_int(&self, v: i64) -> FqElement {
        let p = self.p as i64;
        FqElement((((v % p) + p) % p) as u64)
    }

    /// Element with the given base-p encoding (must be below q).
    pub fn decode(&self, v: u64) -> FqElement {
        debug_assert!(v < self.q);
        FqElement(v)
    }

    /// Base-p integer encoding of an element.
    pub fn encode(&self, a: &FqElement) -> u64 {
        a.0
    }

    /// Coordinates (c_0, ..., c_{r-1}) in the power basis of `g`.
    pub fn coords(&self, a: &FqElement) -> Vec<u64> {
        let mut v = a.0;
        let mut out = Vec::with_capacity(self.r);
        for _ in 0..self.r {
            out.push(v % self.p);
            v /= self.p;
        }
        out
    }

    /// All q elements, in encoding order.
    pub fn elements(&self) -> impl Iterator<Item = FqElement> + '_ {
        (0..self.q).map(FqElement)
    }

    pub fn is_zero(&self, a: &FqElement) -> bool {
        a.0 == 0
    }

    pub fn add(&self, a: &FqElement, b: &FqElement) -> FqElement {
        let p = self.p;
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.r {
            out += (x % p + y % p) % p * place;
            place *= p;
            x /= p;
            y /= p;
        }
        FqElement(out)
    }

    pub fn neg(&self, a: &FqElement) -> FqElement {
        let p = self.p;
        let mut x = a.0;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.r {
            out += (p - x % p) % p * place;
            place *= p;
            x /= p;
        }
        FqElement(out)
    }

    pub fn sub(&self, a: &FqElement, b: &FqElement) -> FqElement {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &FqElement, b: &FqElement) -> FqElement {
        let p = self.p;
        if self.r == 1 {
            return FqElement(a.0 * b.0 % p);
        }
        // Schoolbook product, then reduction by the monic defining polynomial.
        let mut xs = [0u64; MAX_R];
        let mut ys = [0u64; MAX_R];
        let (mut x, mut y) = (a.0, b.0);
        for j in 0..self.r {
            xs[j] = x % p;
            ys[j] = y % p;
            x /= p;
            y /= p;
        }
        let mut prod = [0u64; 2 * MAX_R - 1];
        for (i, &xv) in xs.iter().enumerate().take(self.r) {
            if xv == 0 {
                continue;
            }
            for (j, &yv) in ys.iter().enumerate().take(self.r) {
                prod[i + j] = (prod[i + j] + xv * yv) % p;
            }
        }
        for i in (self.r..2 * self.r - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..self.r {
                let t = c * self.defining[j] % p;
                prod[i - self.r + j] = (prod[i - self.r + j] + p - t) % p;
            }
        }
        let mut out = 0;
        let mut place = 1;
        for &c in prod.iter().take(self.r) {
            out += c * place;
            place *= p;
        }
        FqElement(out)
    }

    pub fn pow(&self, a: &FqElement, mut e: u64) -> FqElement {
        let mut base = *a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: &FqElement) -> Option<FqElement> {
        if self.is_zero(a) {
            return None;
        }
        Some(self.pow(a, self.q - 2))
    }

    /// `a^e` for signed `e`; `None` when `e < 0` and `a = 0`.
    pub fn pow_signed(&self, a: &FqElement, e: i64) -> Option<FqElement> {
        if e >= 0 {
            Some(self.pow(a, e as u64))
        } else {
            let inv = self.inv(a)?;
            Some(self.pow(&inv, (-e) as u64))
        }
    }

    /// Canonical text form: decimal for prime fields, a polynomial in `g`
    /// (highest power first) for extension fields.
    pub fn format_element(&self, a: &FqElement) -> String {
        if self.r == 1 {
            return a.0.to_string();
        }
        let coords = self.coords(a);
        let mut parts = Vec::new();
        for (j, &c) in coords.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let part = match (j, c) {
                (0, _) => c.to_string(),
                (1, 1) => "g".to_string(),
                (1, _) => format!("{c}*g"),
                (_, 1) => format!("g^{j}"),
                (_, _) => format!("{c}*g^{j}"),
            };
            parts.push(part);
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join("+")
        }
    }
}

fn check_prime(p: u64) -> Result<()> {
    if p < 2 {
        return Err(Error::NotPrime(p));
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return Err(Error::NotPrime(p));
        }
        d += 1;
    }
    Ok(())
}

// --- polynomial helpers over F_p (used only for the defining polynomial) ---

fn fp_trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

/// Remainder of `a` by monic `b` over F_p.
fn fp_rem(mut a: Vec<u64>, b: &[u64], p: u64) -> Vec<u64> {
    let db = b.len() - 1;
    while a.len() > db {
        let c = *a.last().unwrap();
        let da = a.len() - 1;
        if c != 0 {
            for j in 0..db {
                let t = c * b[j] % p;
                a[da - db + j] = (a[da - db + j] + p - t) % p;
            }
        }
        a.pop();
        fp_trim(&mut a);
        if a.is_empty() {
            break;
        }
    }
    a
}

/// Trial division by every monic polynomial of degree <= r/2.
fn fp_is_irreducible(poly: &[u64], p: u64) -> bool {
    let r = poly.len() - 1;
    for d in 1..=r / 2 {
        let count = p.pow(d as u32);
        for v in 0..count {
            let mut div = Vec::with_capacity(d + 1);
            let mut t = v;
            for _ in 0..d {
                div.push(t % p);
                t /= p;
            }
            div.push(1);
            let rem = fp_rem(poly.to_vec(), &div, p);
            if rem.is_empty() {
                return false;
            }
        }
    }
    true
}

/// Monic irreducible of degree r over F_p with the smallest low-coefficient
/// encoding. Used only when no default is listed for (p, r).
fn smallest_irreducible(p: u64, r: usize) -> Result<Vec<u64>> {
    let count = (p as u128).checked_pow(r as u32).unwrap_or(u128::MAX);
    if count > MAX_Q as u128 {
        return Err(Error::SizeLimit(
            "defining polynomial search too large".into(),
        ));
    }
    for v in 0..count as u64 {
        let mut poly = Vec::with_capacity(r + 1);
        let mut t = v;
        for _ in 0..r {
            poly.push(t % p);
            t /= p;
        }
        poly.push(1);
        if fp_is_irreducible(&poly, p) {
            return Ok(poly);
        }
    }
    Err(Error::NotIrreducible(format!(
        "no irreducible of degree {r} over F_{p}"
    )))
}
