//! The representation of (F_q[T]/(M))^* on the holomorphic differentials.
//!
//! A unit A acts on the torsion generators through its P_i-adic digits
//! `A = sum_l alpha_{i,l} P_i^l`:
//!
//! ```text
//!   sigma_A(l_{i,k}) = sum_{l=0}^{k-1} alpha_{i,l} l_{i,k-l}
//! ```
//!
//! and fixes F_q(T) and dT pointwise, so negative powers of l_{i,1} pick up
//! the scalar alpha_{i,0}^(-1) per step. Applying sigma_A to an anchored
//! basis element and canonicalizing lands back in the span of the basis;
//! collecting coordinates column by column yields the matrix of sigma_A.

use crate::differentials::{enumerate_basis, ExponentTuple};
use crate::field::{FieldCtx, FqElement};
use crate::lambda::{canonicalize, LambdaMonomial, LambdaSum, WindowPolicy};
use crate::linalg;
use crate::poly::{is_unit, padic_digits, units_enumerate, ModulusSpec, Poly};
use crate::{Error, Limits, Result};
use std::collections::BTreeMap;

/// Apply sigma_A to a sum of monomials and canonicalize per `policy`.
pub fn sigma_apply(
    a: &Poly,
    s: &LambdaSum,
    spec: &ModulusSpec,
    policy: &WindowPolicy,
) -> Result<LambdaSum> {
    let ctx = spec.field();
    if !is_unit(a, spec) {
        return Err(Error::NotAUnit(a.format(ctx)));
    }
    let digits: Vec<Vec<FqElement>> = (0..spec.num_primes())
        .map(|i| padic_digits(a, &spec.prime_poly(i), spec.multiplicity(i), ctx))
        .collect();
    let mut image = LambdaSum::zero();
    for m in s.monomials() {
        // Scalars, prime powers and dT are fixed; l_{i,1}^e picks up
        // alpha_{i,0}^e, and each l_{i,k}^e with k >= 2 expands into the
        // e-th power of its digit sum.
        let mut base = m.clone();
        let mut scalar = m.scalar;
        for i in 0..spec.num_primes() {
            let e1 = m.exponent(i, 1);
            if e1 != 0 {
                let factor = ctx
                    .pow_signed(&digits[i][0], e1)
                    .expect("alpha_{i,0} is nonzero for units");
                scalar = ctx.mul(&scalar, &factor);
            }
            for k in 2..=spec.multiplicity(i) {
                base.set_exponent(i, k, 0);
            }
        }
        base.scalar = scalar;
        let mut term_sum = LambdaSum::from_monomial(base, spec);
        for i in 0..spec.num_primes() {
            for k in 2..=spec.multiplicity(i) {
                let e = m.exponent(i, k);
                if e == 0 {
                    continue;
                }
                assert!(e > 0, "levels k >= 2 never carry negative exponents");
                let mut digit_sum = LambdaSum::zero();
                for l in 0..k {
                    if ctx.is_zero(&digits[i][l]) {
                        continue;
                    }
                    let mut piece = LambdaMonomial::constant(spec, digits[i][l], false);
                    piece.set_exponent(i, k - l, 1);
                    digit_sum.add_monomial(piece, spec);
                }
                for _ in 0..e {
                    term_sum = term_sum.mul(&digit_sum, spec)?;
                }
            }
        }
        image = image.add(&term_sum, spec);
    }
    canonicalize(&image, policy, spec)
}

/// A g x g matrix over F_q in column convention: column j holds the image
/// of the j-th basis vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepMatrix {
    size: usize,
    entries: Vec<FqElement>,
}

impl RepMatrix {
    pub fn identity(size: usize, ctx: &FieldCtx) -> RepMatrix {
        let mut m = RepMatrix::zero(size, ctx);
        for i in 0..size {
            m.set(i, i, ctx.one());
        }
        m
    }

    pub fn zero(size: usize, ctx: &FieldCtx) -> RepMatrix {
        RepMatrix {
            size,
            entries: vec![ctx.zero(); size * size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, row: usize, col: usize) -> FqElement {
        self.entries[row * self.size + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: FqElement) {
        self.entries[row * self.size + col] = v;
    }

    pub fn mul(&self, other: &RepMatrix, ctx: &FieldCtx) -> RepMatrix {
        assert_eq!(self.size, other.size);
        let mut out = RepMatrix::zero(self.size, ctx);
        for i in 0..self.size {
            for k in 0..self.size {
                let a = self.get(i, k);
                if ctx.is_zero(&a) {
                    continue;
                }
                for j in 0..self.size {
                    let t = ctx.mul(&a, &other.get(k, j));
                    out.set(i, j, ctx.add(&out.get(i, j), &t));
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &RepMatrix, ctx: &FieldCtx) -> RepMatrix {
        assert_eq!(self.size, other.size);
        let mut out = RepMatrix::zero(self.size, ctx);
        for i in 0..self.size {
            for j in 0..self.size {
                out.set(i, j, ctx.sub(&self.get(i, j), &other.get(i, j)));
            }
        }
        out
    }

    pub fn pow(&self, mut e: u64, ctx: &FieldCtx) -> RepMatrix {
        let mut base = self.clone();
        let mut acc = RepMatrix::identity(self.size, ctx);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, ctx);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, ctx);
            }
        }
        acc
    }

    pub fn is_identity(&self, ctx: &FieldCtx) -> bool {
        *self == RepMatrix::identity(self.size, ctx)
    }

    pub fn is_zero_matrix(&self, ctx: &FieldCtx) -> bool {
        self.entries.iter().all(|e| ctx.is_zero(e))
    }

    pub fn is_diagonal(&self, ctx: &FieldCtx) -> bool {
        (0..self.size).all(|i| (0..self.size).all(|j| i == j || ctx.is_zero(&self.get(i, j))))
    }

    pub fn trace(&self, ctx: &FieldCtx) -> FqElement {
        let mut t = ctx.zero();
        for i in 0..self.size {
            t = ctx.add(&t, &self.get(i, i));
        }
        t
    }

    pub fn is_invertible(&self, ctx: &FieldCtx) -> bool {
        let mut rows: Vec<Vec<FqElement>> = (0..self.size)
            .map(|i| (0..self.size).map(|j| self.get(i, j)).collect())
            .collect();
        linalg::rank(&mut rows, ctx) == self.size
    }
}

fn tuple_of_monomial(
    m: &LambdaMonomial,
    spec: &ModulusSpec,
    anchor: usize,
) -> Result<ExponentTuple> {
    if !m.has_dt() {
        return Err(Error::InternalInvariant(
            "image term lost its dT factor".into(),
        ));
    }
    for j in 0..spec.num_primes() {
        if j != anchor && m.prime_power(j) != 0 {
            return Err(Error::InternalInvariant(
                "canonical term carries a non-anchor prime power".into(),
            ));
        }
    }
    let mut mu = Vec::with_capacity(spec.num_primes());
    for j in 0..spec.num_primes() {
        let n = spec.multiplicity(j);
        let mut mus = Vec::with_capacity(n);
        mus.push(-m.exponent(j, 1));
        for k in 2..=n {
            mus.push(m.exponent(j, k));
        }
        mu.push(mus);
    }
    Ok(ExponentTuple {
        mu0: m.prime_power(anchor),
        mu,
    })
}

/// Matrix of sigma_A on the basis anchored at `anchor`. Every canonical
/// image term must itself be a basis tuple; anything else violates the
/// holomorphy-preservation of the rewrite system and is reported as an
/// internal invariant failure.
pub fn rep_matrix(
    a: &Poly,
    spec: &ModulusSpec,
    anchor: usize,
    limits: &Limits,
) -> Result<RepMatrix> {
    let basis = enumerate_basis(spec, anchor, limits)?;
    rep_matrix_on_basis(a, spec, anchor, &basis)
}

fn rep_matrix_on_basis(
    a: &Poly,
    spec: &ModulusSpec,
    anchor: usize,
    basis: &[ExponentTuple],
) -> Result<RepMatrix> {
    let ctx = spec.field();
    let policy = WindowPolicy::for_spec(spec, anchor);
    let index: BTreeMap<&ExponentTuple, usize> =
        basis.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut mat = RepMatrix::zero(basis.len(), ctx);
    for (col, t) in basis.iter().enumerate() {
        let m = t.materialize(spec, anchor);
        let image = sigma_apply(a, &LambdaSum::from_monomial(m, spec), spec, &policy)?;
        for term in image.monomials() {
            let key = tuple_of_monomial(&term, spec, anchor)?;
            let row = *index.get(&key).ok_or_else(|| {
                Error::InternalInvariant(format!("image term {key:?} is not a basis tuple"))
            })?;
            mat.set(row, col, term.scalar);
        }
    }
    Ok(mat)
}

/// Matrices of every unit on the anchored basis, with the group identity
/// and homomorphism property verified over all unit pairs before return.
#[derive(Debug, Clone)]
pub struct RepresentationTable {
    pub anchor: usize,
    pub units: Vec<Poly>,
    pub matrices: Vec<RepMatrix>,
    pub basis: Vec<ExponentTuple>,
}

impl RepresentationTable {
    /// Look up the matrix of a unit (reduced mod M first).
    pub fn matrix_of(&self, a: &Poly, spec: &ModulusSpec) -> Option<&RepMatrix> {
        let ctx = spec.field();
        let m = spec.modulus_poly();
        let red = a.rem_monic(ctx, &m);
        self.units
            .iter()
            .position(|u| *u == red)
            .map(|i| &self.matrices[i])
    }
}

pub fn representation_table(
    spec: &ModulusSpec,
    anchor: usize,
    limits: &Limits,
) -> Result<RepresentationTable> {
    let ctx = spec.field();
    let units = units_enumerate(spec, limits)?;
    let basis = enumerate_basis(spec, anchor, limits)?;
    let mut matrices = Vec::with_capacity(units.len());
    for u in &units {
        matrices.push(rep_matrix_on_basis(u, spec, anchor, &basis)?);
    }
    // Verification: identity at 1 and the homomorphism law on all pairs.
    let m_poly = spec.modulus_poly();
    let index: BTreeMap<&Poly, usize> = units.iter().enumerate().map(|(i, u)| (u, i)).collect();
    let one_idx = *index
        .get(&Poly::one(ctx))
        .ok_or_else(|| Error::InternalInvariant("1 is missing from the unit list".into()))?;
    if !matrices[one_idx].is_identity(ctx) {
        return Err(Error::InternalInvariant(
            "matrix of 1 is not the identity".into(),
        ));
    }
    for (ia, ua) in units.iter().enumerate() {
        for (ib, ub) in units.iter().enumerate() {
            let prod = ua.mul(ctx, ub).rem_monic(ctx, &m_poly);
            let ip = *index.get(&prod).ok_or_else(|| {
                Error::InternalInvariant("unit product left the unit list".into())
            })?;
            if matrices[ia].mul(&matrices[ib], ctx) != matrices[ip] {
                return Err(Error::InternalInvariant(format!(
                    "homomorphism fails at {} * {}",
                    ua.format(ctx),
                    ub.format(ctx)
                )));
            }
        }
    }
    Ok(RepresentationTable {
        anchor,
        units,
        matrices,
        basis,
    })
}

/// Multiplicative order of a unit modulo M.
pub fn unit_order(a: &Poly, spec: &ModulusSpec) -> Result<u64> {
    let ctx = spec.field();
    if !is_unit(a, spec) {
        return Err(Error::NotAUnit(a.format(ctx)));
    }
    let m = spec.modulus_poly();
    let one = Poly::one(ctx);
    let mut acc = a.rem_monic(ctx, &m);
    let mut ord = 1;
    while acc != one {
        acc = acc.mul(ctx, a).rem_monic(ctx, &m);
        ord += 1;
    }
    Ok(ord)
}
