//! Symbolic algebra of torsion-generator monomials.
//!
//! For each prime P_i of the modulus, `lambda[i][k]` (written `l_{i,k}`
//! below, 1 <= k <= n_i) is the chosen generator of the P_i^k-torsion with
//! the compatibility `l_{i,k} = l_{i,n_i}^(P_i^(n_i-k))`. A
//! [`LambdaMonomial`] is
//!
//! ```text
//!   c * prod_i P_i^(m_i) * prod_{i,k} l_{i,k}^(e_{i,k}) * dT^(0|1)
//! ```
//!
//! with c in F_q. Only `e_{i,1}` may be negative; exponents at levels
//! k >= 2 stay nonnegative. Two relations rewrite monomials:
//!
//! ```text
//!   l_{i,k}^q = l_{i,k-1} + l_{i,1}^(q-1) l_{i,k}      (k >= 2)
//!   l_{i,1}^(q-1) = -P_i
//! ```
//!
//! [`canonicalize`] drives every exponent at level k >= 2 into [0, q-1] by
//! the first relation (largest level first, primes in index order), then
//! normalizes each `e_{i,1}` into the window of its [`WindowPolicy`] by the
//! second, and finally re-expresses prime powers at non-anchor primes
//! through the anchor via P_j = P_i + (a_i - a_j), so that canonical sums
//! carry prime powers only at the anchor prime.

use crate::field::{FieldCtx, FqElement};
use crate::poly::ModulusSpec;
use crate::{Error, Result};
use std::collections::BTreeMap;

/// Everything of a monomial except its scalar; the merge key of sums.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MonomialShape {
    /// Exponent of P_i in the coefficient, one entry per prime.
    pub prime_powers: Vec<i64>,
    /// `exponents[i][k-1]` is the exponent of l_{i,k}.
    pub exponents: Vec<Vec<i64>>,
    pub has_dt: bool,
}

/// A scalar multiple of a monomial shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaMonomial {
    pub scalar: FqElement,
    pub shape: MonomialShape,
}

impl LambdaMonomial {
    /// The monomial `scalar * dT^(0|1)` with no prime powers and no
    /// generator exponents.
    pub fn constant(spec: &ModulusSpec, scalar: FqElement, has_dt: bool) -> LambdaMonomial {
        let r = spec.num_primes();
        LambdaMonomial {
            scalar,
            shape: MonomialShape {
                prime_powers: vec![0; r],
                exponents: (0..r).map(|i| vec![0; spec.multiplicity(i)]).collect(),
                has_dt,
            },
        }
    }

    /// The exponent of l_{i,k}; k is 1-based.
    pub fn exponent(&self, i: usize, k: usize) -> i64 {
        self.shape.exponents[i][k - 1]
    }

    pub fn set_exponent(&mut self, i: usize, k: usize, e: i64) {
        self.shape.exponents[i][k - 1] = e;
    }

    pub fn prime_power(&self, i: usize) -> i64 {
        self.shape.prime_powers[i]
    }

    pub fn has_dt(&self) -> bool {
        self.shape.has_dt
    }

    fn check_tower(&self, spec: &ModulusSpec) {
        debug_assert_eq!(self.shape.prime_powers.len(), spec.num_primes());
        debug_assert!(
            (0..spec.num_primes()).all(|i| self.shape.exponents[i].len() == spec.multiplicity(i))
        );
    }
}

/// Product of two monomials: scalars multiply, exponent maps add.
/// At most one factor may carry dT.
pub fn mono_mul(
    a: &LambdaMonomial,
    b: &LambdaMonomial,
    spec: &ModulusSpec,
) -> Result<LambdaMonomial> {
    a.check_tower(spec);
    b.check_tower(spec);
    if a.shape.has_dt && b.shape.has_dt {
        return Err(Error::DTSquared);
    }
    let ctx = spec.field();
    let prime_powers = a
        .shape
        .prime_powers
        .iter()
        .zip(&b.shape.prime_powers)
        .map(|(x, y)| x + y)
        .collect();
    let exponents = a
        .shape
        .exponents
        .iter()
        .zip(&b.shape.exponents)
        .map(|(xs, ys)| xs.iter().zip(ys).map(|(x, y)| x + y).collect())
        .collect();
    Ok(LambdaMonomial {
        scalar: ctx.mul(&a.scalar, &b.scalar),
        shape: MonomialShape {
            prime_powers,
            exponents,
            has_dt: a.shape.has_dt || b.shape.has_dt,
        },
    })
}

/// A finite F_q-linear combination of monomial shapes, like terms merged.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LambdaSum {
    terms: BTreeMap<MonomialShape, FqElement>,
}

impl LambdaSum {
    pub fn zero() -> LambdaSum {
        LambdaSum::default()
    }

    pub fn from_monomial(m: LambdaMonomial, spec: &ModulusSpec) -> LambdaSum {
        let mut s = LambdaSum::zero();
        s.add_monomial(m, spec);
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_monomial(&mut self, m: LambdaMonomial, spec: &ModulusSpec) {
        let ctx = spec.field();
        if ctx.is_zero(&m.scalar) {
            return;
        }
        match self.terms.get_mut(&m.shape) {
            Some(entry) => {
                *entry = ctx.add(entry, &m.scalar);
                if ctx.is_zero(entry) {
                    self.terms.remove(&m.shape);
                }
            }
            None => {
                self.terms.insert(m.shape, m.scalar);
            }
        }
    }

    pub fn add(&self, other: &LambdaSum, spec: &ModulusSpec) -> LambdaSum {
        let mut out = self.clone();
        for m in other.monomials() {
            out.add_monomial(m, spec);
        }
        out
    }

    pub fn scale(&self, c: &FqElement, spec: &ModulusSpec) -> LambdaSum {
        let ctx = spec.field();
        let mut out = LambdaSum::zero();
        for (shape, s) in &self.terms {
            out.add_monomial(
                LambdaMonomial {
                    scalar: ctx.mul(s, c),
                    shape: shape.clone(),
                },
                spec,
            );
        }
        out
    }

    pub fn mul(&self, other: &LambdaSum, spec: &ModulusSpec) -> Result<LambdaSum> {
        let mut out = LambdaSum::zero();
        for a in self.monomials() {
            for b in other.monomials() {
                out.add_monomial(mono_mul(&a, &b, spec)?, spec);
            }
        }
        Ok(out)
    }

    pub fn monomials(&self) -> impl Iterator<Item = LambdaMonomial> + '_ {
        self.terms.iter().map(|(shape, s)| LambdaMonomial {
            scalar: *s,
            shape: shape.clone(),
        })
    }
}

/// One application of `l_{i,k}^q = l_{i,k-1} + l_{i,1}^(q-1) l_{i,k}` at a
/// position with `e_{i,k} >= q`, k >= 2. The two output terms are the input
/// with
///
/// ```text
///   b: e_{i,k} -= q,   e_{i,k-1} += 1   (level 1 when k = 2)
///   c: e_{i,k} -= q-1, e_{i,1}   += q-1
/// ```
///
/// Both preserve the value; the infinity degree of b rises by q-1 while c
/// keeps it.
pub fn rewrite_once(
    m: &LambdaMonomial,
    i: usize,
    k: usize,
    spec: &ModulusSpec,
) -> Result<LambdaSum> {
    m.check_tower(spec);
    assert!(k >= 2, "only levels k >= 2 can be rewritten");
    let q = spec.q() as i64;
    let e = m.exponent(i, k);
    if e < q {
        return Err(Error::NotReducible {
            prime: i,
            level: k,
            exponent: e,
        });
    }
    let mut b = m.clone();
    b.set_exponent(i, k, e - q);
    let lower = if k > 2 { k - 1 } else { 1 };
    b.set_exponent(i, lower, b.exponent(i, lower) + 1);

    let mut c = m.clone();
    c.set_exponent(i, k, e - (q - 1));
    c.set_exponent(i, 1, c.exponent(i, 1) + (q - 1));

    let mut out = LambdaSum::from_monomial(b, spec);
    out.add_monomial(c, spec);
    Ok(out)
}

/// Admissible interval for mu_{i,1} = -e_{i,1} at each prime, plus the
/// anchor prime whose powers canonical coefficients are allowed to carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowPolicy {
    pub anchor: usize,
    /// Closed interval per prime; always exactly q-1 integers wide.
    pub windows: Vec<(i64, i64)>,
}

impl WindowPolicy {
    /// The default windows `(n_i - 1)(q - 1) <= mu_{i,1} <= n_i q - (n_i + 1)`.
    pub fn for_spec(spec: &ModulusSpec, anchor: usize) -> WindowPolicy {
        assert!(anchor < spec.num_primes(), "anchor out of range");
        let q = spec.q() as i64;
        let windows = (0..spec.num_primes())
            .map(|i| {
                let n = spec.multiplicity(i) as i64;
                ((n - 1) * (q - 1), n * q - (n + 1))
            })
            .collect();
        WindowPolicy { anchor, windows }
    }
}

/// Canonical form of a sum: all level->=2 exponents in [0, q-1], all
/// mu_{i,1} inside their windows, prime powers only at the anchor, like
/// terms merged. The value in the function field is unchanged.
pub fn canonicalize(s: &LambdaSum, policy: &WindowPolicy, spec: &ModulusSpec) -> Result<LambdaSum> {
    let mut out = LambdaSum::zero();
    for m in s.monomials() {
        canonicalize_monomial(m, policy, spec, &mut out)?;
    }
    Ok(out)
}

fn canonicalize_monomial(
    m: LambdaMonomial,
    policy: &WindowPolicy,
    spec: &ModulusSpec,
    out: &mut LambdaSum,
) -> Result<()> {
    let q = spec.q() as i64;
    for i in 0..spec.num_primes() {
        for k in (2..=spec.multiplicity(i)).rev() {
            debug_assert!(m.exponent(i, k) >= 0, "negative exponent at level >= 2");
            if m.exponent(i, k) >= q {
                for piece in rewrite_once(&m, i, k, spec)?.monomials() {
                    canonicalize_monomial(piece, policy, spec, out)?;
                }
                return Ok(());
            }
        }
    }
    // Window normalization: exchange l_{i,1}^(q-1) against -P_i.
    let mut m = m;
    let ctx = spec.field().clone();
    let minus_one = ctx.neg(&ctx.one());
    for i in 0..spec.num_primes() {
        let (lo, hi) = policy.windows[i];
        loop {
            let mu = -m.exponent(i, 1);
            if mu < lo {
                m.set_exponent(i, 1, m.exponent(i, 1) - (q - 1));
                m.shape.prime_powers[i] += 1;
                m.scalar = ctx.mul(&m.scalar, &minus_one);
            } else if mu > hi {
                m.set_exponent(i, 1, m.exponent(i, 1) + (q - 1));
                m.shape.prime_powers[i] -= 1;
                m.scalar = ctx.mul(&m.scalar, &minus_one);
                if m.shape.prime_powers[i] < 0 {
                    return Err(Error::NegativePower);
                }
            } else {
                break;
            }
        }
    }
    // Anchor folding: P_j = P_anchor + (a_anchor - a_j) expands binomially.
    for j in 0..spec.num_primes() {
        if j == policy.anchor {
            continue;
        }
        let mj = m.shape.prime_powers[j];
        if mj == 0 {
            continue;
        }
        if mj < 0 {
            return Err(Error::NegativePower);
        }
        m.shape.prime_powers[j] = 0;
        let shift = ctx.sub(spec.root(policy.anchor), spec.root(j));
        for (t, binom) in pascal_row(&ctx, mj as usize).into_iter().enumerate() {
            if ctx.is_zero(&binom) {
                continue;
            }
            let mut piece = m.clone();
            piece.shape.prime_powers[policy.anchor] += t as i64;
            let scale = ctx.mul(&binom, &ctx.pow(&shift, (mj as usize - t) as u64));
            piece.scalar = ctx.mul(&piece.scalar, &scale);
            canonicalize_monomial(piece, policy, spec, out)?;
        }
        return Ok(());
    }
    out.add_monomial(m, spec);
    Ok(())
}

/// Binomial coefficients C(n, 0..=n) as field elements (reduced mod p).
fn pascal_row(ctx: &FieldCtx, n: usize) -> Vec<FqElement> {
    let mut row = vec![ctx.one()];
    for _ in 0..n {
        let mut next = vec![ctx.one()];
        for w in row.windows(2) {
            next.push(ctx.add(&w[0], &w[1]));
        }
        next.push(ctx.one());
        row = next;
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_modulus;
    use crate::FieldCtx;

    fn spec3(m: &str) -> ModulusSpec {
        let f3 = FieldCtx::new(3, 1).unwrap();
        parse_modulus(&f3, m).unwrap()
    }

    /// Monomial builder: exponents[i] lists (level, exponent).
    fn mono(
        spec: &ModulusSpec,
        scalar: i64,
        powers: &[i64],
        exps: &[&[(usize, i64)]],
        dt: bool,
    ) -> LambdaMonomial {
        let ctx = spec.field();
        let mut m = LambdaMonomial::constant(spec, ctx.from_int(scalar), dt);
        for (i, &p) in powers.iter().enumerate() {
            m.shape.prime_powers[i] = p;
        }
        for (i, list) in exps.iter().enumerate() {
            for &(k, e) in list.iter() {
                m.set_exponent(i, k, e);
            }
        }
        m
    }

    #[test]
    fn mono_mul_examples() {
        let spec = spec3("0^2");
        // l_{1,2} * l_{1,2} = l_{1,2}^2
        let a = mono(&spec, 1, &[0], &[&[(2, 1)]], false);
        let prod = mono_mul(&a, &a, &spec).unwrap();
        assert_eq!(prod.exponent(0, 2), 2);

        // (2 l_{1,1}^-3 dT) * l_{1,1} = 2 l_{1,1}^-2 dT
        let a = mono(&spec, 2, &[0], &[&[(1, -3)]], true);
        let b = mono(&spec, 1, &[0], &[&[(1, 1)]], false);
        let prod = mono_mul(&a, &b, &spec).unwrap();
        assert_eq!(prod.exponent(0, 1), -2);
        assert!(prod.has_dt());
        assert_eq!(spec.field().encode(&prod.scalar), 2);

        // dT * dT is rejected
        let dt = mono(&spec, 1, &[0], &[&[]], true);
        assert_eq!(mono_mul(&dt, &dt, &spec).unwrap_err(), Error::DTSquared);
    }

    #[test]
    fn rewrite_once_examples() {
        let spec = spec3("0^2");
        // l_{1,2}^3 -> l_{1,1} + l_{1,1}^2 l_{1,2}
        let m = mono(&spec, 1, &[0], &[&[(2, 3)]], false);
        let s = rewrite_once(&m, 0, 2, &spec).unwrap();
        let mut expected =
            LambdaSum::from_monomial(mono(&spec, 1, &[0], &[&[(1, 1)]], false), &spec);
        expected.add_monomial(mono(&spec, 1, &[0], &[&[(1, 2), (2, 1)]], false), &spec);
        assert_eq!(s, expected);

        // l_{1,2}^4 -> l_{1,1} l_{1,2} + l_{1,1}^2 l_{1,2}^2
        let m = mono(&spec, 1, &[0], &[&[(2, 4)]], false);
        let s = rewrite_once(&m, 0, 2, &spec).unwrap();
        let mut expected =
            LambdaSum::from_monomial(mono(&spec, 1, &[0], &[&[(1, 1), (2, 1)]], false), &spec);
        expected.add_monomial(mono(&spec, 1, &[0], &[&[(1, 2), (2, 2)]], false), &spec);
        assert_eq!(s, expected);

        // l_{1,2}^2 is not reducible at q = 3
        let m = mono(&spec, 1, &[0], &[&[(2, 2)]], false);
        assert!(matches!(
            rewrite_once(&m, 0, 2, &spec),
            Err(Error::NotReducible { .. })
        ));
    }

    #[test]
    fn rewrite_levels_above_two_touch_the_level_below() {
        let spec = spec3("0^3");
        let m = mono(&spec, 1, &[0], &[&[(3, 3)]], false);
        let s = rewrite_once(&m, 0, 3, &spec).unwrap();
        let mut expected =
            LambdaSum::from_monomial(mono(&spec, 1, &[0], &[&[(2, 1)]], false), &spec);
        expected.add_monomial(mono(&spec, 1, &[0], &[&[(1, 2), (3, 1)]], false), &spec);
        assert_eq!(s, expected);
    }

    #[test]
    fn canonicalize_window_shift() {
        // q=3, single prime with n=3: window [4, 5].
        let spec = spec3("0^3");
        let policy = WindowPolicy::for_spec(&spec, 0);
        assert_eq!(policy.windows[0], (4, 5));
        let m = mono(&spec, 1, &[0], &[&[(1, -3)]], true);
        let s = canonicalize(&LambdaSum::from_monomial(m, &spec), &policy, &spec).unwrap();
        let expected = LambdaSum::from_monomial(mono(&spec, 2, &[1], &[&[(1, -5)]], true), &spec);
        assert_eq!(s, expected);
    }

    #[test]
    fn canonicalize_fixed_point() {
        let spec = spec3("0^2");
        let policy = WindowPolicy::for_spec(&spec, 0);
        let m = mono(&spec, 2, &[1], &[&[(1, -3), (2, 1)]], true);
        let s = LambdaSum::from_monomial(m, &spec);
        assert_eq!(canonicalize(&s, &policy, &spec).unwrap(), s);
    }

    #[test]
    fn canonicalize_reduces_and_merges() {
        // q=3, n=2, window [2,3]: l_{1,2}^3 l_{1,1}^-4 dT
        //   -> l_{1,1}^-3 dT + l_{1,1}^-2 l_{1,2} dT
        let spec = spec3("0^2");
        let policy = WindowPolicy::for_spec(&spec, 0);
        assert_eq!(policy.windows[0], (2, 3));
        let m = mono(&spec, 1, &[0], &[&[(1, -4), (2, 3)]], true);
        let s = canonicalize(&LambdaSum::from_monomial(m, &spec), &policy, &spec).unwrap();
        let mut expected =
            LambdaSum::from_monomial(mono(&spec, 1, &[0], &[&[(1, -3)]], true), &spec);
        expected.add_monomial(mono(&spec, 1, &[0], &[&[(1, -2), (2, 1)]], true), &spec);
        assert_eq!(s, expected);
    }

    #[test]
    fn canonicalize_rejects_mis_anchored_input() {
        // mu_{1,1} above the window with no prime power to spend.
        let spec = spec3("0^2");
        let policy = WindowPolicy::for_spec(&spec, 0);
        let m = mono(&spec, 1, &[0], &[&[(1, -6)]], true);
        let err = canonicalize(&LambdaSum::from_monomial(m, &spec), &policy, &spec).unwrap_err();
        assert_eq!(err, Error::NegativePower);
    }

    #[test]
    fn anchor_folding_expands_foreign_prime_powers() {
        // P_2 = T - 1 = P_1 + (0 - 1) = P_1 + 2 over F_3 anchored at P_1 = T.
        let spec = spec3("0^1,1^1");
        let policy = WindowPolicy::for_spec(&spec, 0);
        let m = mono(&spec, 1, &[0, 1], &[&[], &[]], false);
        let s = canonicalize(&LambdaSum::from_monomial(m, &spec), &policy, &spec).unwrap();
        // P_2 = P_1 + 2: terms 2*1 and P_1
        let mut expected =
            LambdaSum::from_monomial(mono(&spec, 2, &[0, 0], &[&[], &[]], false), &spec);
        expected.add_monomial(mono(&spec, 1, &[1, 0], &[&[], &[]], false), &spec);
        assert_eq!(s, expected);
    }

    #[test]
    fn rewrite_strictly_decreases_upper_levels() {
        let spec = spec3("0^3");
        let m = mono(&spec, 1, &[0], &[&[(2, 5), (3, 4)]], false);
        let before: i64 = (2..=3).map(|k| m.exponent(0, k)).sum();
        for piece in rewrite_once(&m, 0, 3, &spec).unwrap().monomials() {
            let after: i64 = (2..=3).map(|k| piece.exponent(0, k)).sum();
            assert!(after < before);
        }
    }
}
