//! The Carlitz module as twisted-polynomial operators.
//!
//! `tau` denotes the q-power Frobenius u -> u^q. A [`TwistedOperator`] is a
//! sum `sum c_j tau^j` with c_j in F_q[T]; composition obeys the twist rule
//! `tau * c = c^q * tau`. The operator attached to M in F_q[T] is
//! `sum a_k (tau + T)^k` where M = sum a_k T^k; applying it to u gives the
//! Carlitz polynomial u^M, whose roots are the M-torsion of the Carlitz
//! module. Dividing consecutive torsion polynomials for P^n yields the
//! Carlitz cyclotomic polynomial, the minimal polynomial of a generator of
//! the P^n-torsion.

use crate::field::{FieldCtx, FqElement};
use crate::poly::Poly;
use crate::{Error, Result};

/// Hard cap on materialized u-degrees (q^n for the largest operator seen).
const MAX_U_DEGREE: usize = 1 << 20;

/// An F_q-linear operator `sum c_j tau^j`, stored dense in tau-degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistedOperator {
    coeffs: Vec<Poly>,
}

impl TwistedOperator {
    pub fn zero() -> TwistedOperator {
        TwistedOperator { coeffs: vec![] }
    }

    pub fn one(ctx: &FieldCtx) -> TwistedOperator {
        TwistedOperator {
            coeffs: vec![Poly::one(ctx)],
        }
    }

    pub fn from_coeffs(coeffs: Vec<Poly>) -> TwistedOperator {
        let mut t = TwistedOperator { coeffs };
        t.normalize();
        t
    }

    fn normalize(&mut self) {
        while self.coeffs.last().map(Poly::is_zero).unwrap_or(false) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree in tau; `None` for the zero operator.
    pub fn tau_degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    /// Coefficient of tau^j.
    pub fn coeff(&self, j: usize) -> Poly {
        self.coeffs.get(j).cloned().unwrap_or_else(Poly::zero)
    }

    pub fn coeffs(&self) -> &[Poly] {
        &self.coeffs
    }

    pub fn add(&self, ctx: &FieldCtx, other: &TwistedOperator) -> TwistedOperator {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            out.push(self.coeff(j).add(ctx, &other.coeff(j)));
        }
        TwistedOperator::from_coeffs(out)
    }

    pub fn scale(&self, ctx: &FieldCtx, c: &FqElement) -> TwistedOperator {
        TwistedOperator::from_coeffs(self.coeffs.iter().map(|p| p.scale(ctx, c)).collect())
    }
}

/// Composition a o b of twisted operators; the twist rule
/// `tau^i c = c^(q^i) tau^i` carries coefficients of b past the Frobenius
/// powers of a.
pub fn twisted_mul(
    a: &TwistedOperator,
    b: &TwistedOperator,
    ctx: &FieldCtx,
) -> Result<TwistedOperator> {
    if a.is_zero() || b.is_zero() {
        return Ok(TwistedOperator::zero());
    }
    let mut out = vec![Poly::zero(); a.coeffs.len() + b.coeffs.len() - 1];
    for (i, ca) in a.coeffs.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (j, cb) in b.coeffs.iter().enumerate() {
            if cb.is_zero() {
                continue;
            }
            let twisted = cb.q_power(ctx, i)?;
            out[i + j] = out[i + j].add(ctx, &ca.mul(ctx, &twisted));
        }
    }
    Ok(TwistedOperator::from_coeffs(out))
}

/// The operator of the Carlitz action of M: `sum a_k (tau + T)^k` for
/// M = sum a_k T^k. F_q-linear in M and multiplicative in products.
pub fn carlitz_operator(m: &Poly, ctx: &FieldCtx) -> Result<TwistedOperator> {
    // tau + T
    let step = TwistedOperator::from_coeffs(vec![Poly::var(ctx), Poly::one(ctx)]);
    let mut power = TwistedOperator::one(ctx);
    let mut acc = TwistedOperator::zero();
    for k in 0..m.coeffs().len() {
        let a_k = m.coeff(ctx, k);
        if !ctx.is_zero(&a_k) {
            acc = acc.add(ctx, &power.scale(ctx, &a_k));
        }
        if k + 1 < m.coeffs().len() {
            power = twisted_mul(&power, &step, ctx)?;
        }
    }
    Ok(acc)
}

/// A commutative polynomial in u with F_q[T] coefficients, dense in u.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UPoly {
    coeffs: Vec<Poly>,
}

impl UPoly {
    pub fn zero() -> UPoly {
        UPoly { coeffs: vec![] }
    }

    pub fn from_coeffs(coeffs: Vec<Poly>) -> UPoly {
        let mut u = UPoly { coeffs };
        while u.coeffs.last().map(Poly::is_zero).unwrap_or(false) {
            u.coeffs.pop();
        }
        u
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeff(&self, i: usize) -> Poly {
        self.coeffs.get(i).cloned().unwrap_or_else(Poly::zero)
    }

    pub fn coeffs(&self) -> &[Poly] {
        &self.coeffs
    }

    pub fn sub(&self, ctx: &FieldCtx, other: &UPoly) -> UPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i).sub(ctx, &other.coeff(i)));
        }
        UPoly::from_coeffs(out)
    }

    pub fn mul(&self, ctx: &FieldCtx, other: &UPoly) -> UPoly {
        if self.is_zero() || other.is_zero() {
            return UPoly::zero();
        }
        let mut out = vec![Poly::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(ctx, &a.mul(ctx, b));
            }
        }
        UPoly::from_coeffs(out)
    }

    /// Division with remainder by a divisor whose leading coefficient is the
    /// constant 1, so no coefficient fractions ever appear.
    pub fn divmod_by_unit_leading(&self, ctx: &FieldCtx, d: &UPoly) -> (UPoly, UPoly) {
        let dd = d.degree().expect("divisor must be nonzero");
        assert_eq!(
            d.coeff(dd),
            Poly::one(ctx),
            "divisor must have leading coefficient 1"
        );
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (UPoly::zero(), self.clone());
        }
        let mut quot = vec![Poly::zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = rem[i].clone();
            if c.is_zero() {
                continue;
            }
            for j in 0..=dd {
                let t = c.mul(ctx, &d.coeff(j));
                rem[i - dd + j] = rem[i - dd + j].sub(ctx, &t);
            }
            quot[i - dd] = c;
        }
        (UPoly::from_coeffs(quot), UPoly::from_coeffs(rem))
    }
}

/// Coefficient map `j -> c_j` of the additive polynomial `sum c_j u^(q^j)`;
/// only q-power exponents appear since the Carlitz polynomial is F_q-linear.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdditivePoly {
    terms: Vec<(usize, Poly)>,
}

impl AdditivePoly {
    pub fn from_operator(op: &TwistedOperator) -> AdditivePoly {
        AdditivePoly {
            terms: op
                .coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(j, c)| (j, c.clone()))
                .collect(),
        }
    }

    /// Pairs (j, c_j) with c_j nonzero, ascending in j.
    pub fn terms(&self) -> &[(usize, Poly)] {
        &self.terms
    }

    /// Materialize as a commutative polynomial in u; the exponents q^j are
    /// produced as integers, so their size is checked.
    pub fn to_upoly(&self, ctx: &FieldCtx) -> Result<UPoly> {
        let q = ctx.q();
        let mut coeffs = Vec::new();
        for (j, c) in &self.terms {
            let e = q
                .checked_pow(*j as u32)
                .filter(|&e| e <= MAX_U_DEGREE as u64)
                .ok_or_else(|| {
                    Error::SizeLimit(format!("u-exponent q^{j} exceeds {MAX_U_DEGREE}"))
                })? as usize;
            if coeffs.len() <= e {
                coeffs.resize(e + 1, Poly::zero());
            }
            coeffs[e] = c.clone();
        }
        Ok(UPoly::from_coeffs(coeffs))
    }
}

/// The Carlitz polynomial of M as a commutative polynomial in u.
pub fn carlitz_upoly(m: &Poly, ctx: &FieldCtx) -> Result<UPoly> {
    AdditivePoly::from_operator(&carlitz_operator(m, ctx)?).to_upoly(ctx)
}

/// The Carlitz cyclotomic polynomial of P^n for monic linear P: the exact
/// quotient of the P^n- by the P^(n-1)-torsion polynomial. Its degree is
/// q^(n-1) (q-1) and its roots are the generators of the P^n-torsion.
pub fn cyclotomic_polynomial(p_linear: &Poly, n: usize, ctx: &FieldCtx) -> Result<UPoly> {
    assert!(n >= 1);
    assert!(
        p_linear.degree() == Some(1) && p_linear.is_monic(ctx),
        "P must be monic linear"
    );
    let pn = p_linear.pow(ctx, n);
    let pn1 = p_linear.pow(ctx, n - 1);
    let num = carlitz_upoly(&pn, ctx)?;
    let den = carlitz_upoly(&pn1, ctx)?;
    let (quot, rem) = num.divmod_by_unit_leading(ctx, &den);
    if !rem.is_zero() {
        return Err(Error::InternalInvariant(
            "torsion polynomial division left a remainder".into(),
        ));
    }
    Ok(quot)
}
