//! Brute-force model of the function field for verifying the symbolic engine.
//!
//! The field generated by the M-torsion is modeled as the tensor product
//! over F_q(T) of one quotient ring per prime,
//! `F_q(T)[x_i] / (Psi_i(x_i))` with Psi_i the Carlitz cyclotomic
//! polynomial of P_i^{n_i}, so the total dimension is phi(M). The torsion
//! generators embed as `l_{i,k} = (Carlitz action of P_i^(n_i - k))(x_i)`,
//! and `l_{i,1}` is invertible with `l_{i,1}^(-1) = -l_{i,1}^(q-2) / P_i`.
//!
//! Scalars are kept as reduced fractions whose denominators are monomials
//! in the P_i; all inverses the embedding ever needs have this shape, so no
//! general rational-function arithmetic is required. Linear independence is
//! decided by clearing denominators and row-reducing the flattened
//! T-coefficients over F_q.

use crate::carlitz::{carlitz_operator, cyclotomic_polynomial, TwistedOperator, UPoly};
use crate::field::FqElement;
use crate::lambda::LambdaSum;
use crate::linalg;
use crate::poly::{is_unit, ModulusSpec, Poly};
use crate::{Error, Limits, Result};

/// A reduced fraction num / prod P_i^(den_i) with monic denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalScalar {
    num: Poly,
    den: Vec<u32>,
}

impl RationalScalar {
    fn zero(r: usize) -> RationalScalar {
        RationalScalar {
            num: Poly::zero(),
            den: vec![0; r],
        }
    }

    fn from_poly(num: Poly, r: usize) -> RationalScalar {
        RationalScalar {
            num,
            den: vec![0; r],
        }
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator_exponents(&self) -> &[u32] {
        &self.den
    }

    fn reduce(&mut self, spec: &ModulusSpec) {
        let ctx = spec.field();
        if self.num.is_zero() {
            self.den.iter_mut().for_each(|d| *d = 0);
            return;
        }
        for i in 0..self.den.len() {
            while self.den[i] > 0 {
                let (quot, rem) = self.num.deflate(ctx, spec.root(i));
                if !ctx.is_zero(&rem) {
                    break;
                }
                self.num = quot;
                self.den[i] -= 1;
            }
        }
    }

    fn mul(&self, other: &RationalScalar, spec: &ModulusSpec) -> RationalScalar {
        if self.is_zero() || other.is_zero() {
            return RationalScalar::zero(self.den.len());
        }
        let mut out = RationalScalar {
            num: self.num.mul(spec.field(), &other.num),
            den: self
                .den
                .iter()
                .zip(&other.den)
                .map(|(a, b)| a + b)
                .collect(),
        };
        out.reduce(spec);
        out
    }

    fn mul_poly(&self, p: &Poly, spec: &ModulusSpec) -> RationalScalar {
        let mut out = RationalScalar {
            num: self.num.mul(spec.field(), p),
            den: self.den.clone(),
        };
        out.reduce(spec);
        out
    }

    fn add(&self, other: &RationalScalar, spec: &ModulusSpec) -> RationalScalar {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let ctx = spec.field();
        let den: Vec<u32> = self
            .den
            .iter()
            .zip(&other.den)
            .map(|(a, b)| *a.max(b))
            .collect();
        let scale_to = |s: &RationalScalar| -> Poly {
            let mut num = s.num.clone();
            for i in 0..den.len() {
                let diff = den[i] - s.den[i];
                if diff > 0 {
                    num = num.mul(ctx, &spec.prime_poly(i).pow(ctx, diff as usize));
                }
            }
            num
        };
        let mut out = RationalScalar {
            num: scale_to(self).add(ctx, &scale_to(other)),
            den,
        };
        out.reduce(spec);
        out
    }

    fn neg(&self, spec: &ModulusSpec) -> RationalScalar {
        RationalScalar {
            num: self.num.neg(spec.field()),
            den: self.den.clone(),
        }
    }
}

/// Expansion of x^e in the power basis: either x^e itself or a reduction row.
type Expansion = Vec<(usize, Option<Poly>)>;

struct PrimeRing {
    dim: usize,
    psi: UPoly,
    /// expansions[e] rewrites x^e, 0 <= e <= 2 dim - 2, in basis powers.
    expansions: Vec<Expansion>,
    /// lambdas[k-1] is l_{i,k} as a vector in the power basis.
    lambdas: Vec<Vec<RationalScalar>>,
    lambda1_inv: Vec<RationalScalar>,
}

/// Tensor-product model of the torsion field; see the module docs.
pub struct OracleRing {
    spec: ModulusSpec,
    primes: Vec<PrimeRing>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

/// An element as scalar coordinates over the tensor monomial basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleElement {
    coeffs: Vec<RationalScalar>,
}

/// Precomputed power tables of the images of the generators under one unit.
pub struct SigmaMap {
    tables: Vec<Vec<Vec<RationalScalar>>>,
}

impl OracleElement {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(RationalScalar::is_zero)
    }

    pub fn coeffs(&self) -> &[RationalScalar] {
        &self.coeffs
    }
}

/// Build the model ring; the dimension phi(M) is bounded by `max_units`.
pub fn oracle_build(spec: &ModulusSpec, limits: &Limits) -> Result<OracleRing> {
    let phi = spec.euler_phi()?;
    if phi > limits.max_units as u128 {
        return Err(Error::SizeLimit(format!(
            "model dimension {phi} exceeds max_units {}",
            limits.max_units
        )));
    }
    let ctx = spec.field().clone();
    let q = spec.q();
    let r = spec.num_primes();
    let mut primes = Vec::with_capacity(r);
    for i in 0..r {
        let n = spec.multiplicity(i);
        let p_lin = spec.prime_poly(i);
        let psi = cyclotomic_polynomial(&p_lin, n, &ctx)?;
        let dim = psi.degree().expect("cyclotomic polynomial is nonzero");
        // x^e for e >= dim: x^dim = -(psi - x^dim), then multiply by x.
        let mut rows: Vec<Vec<Poly>> = Vec::new();
        let top = (2 * dim).saturating_sub(2).max(dim);
        let mut cur: Vec<Poly> = (0..dim).map(|j| psi.coeff(j).neg(&ctx)).collect();
        for _ in dim..=top {
            rows.push(cur.clone());
            // multiply by x: shift up, reduce the overflow through row 0
            let overflow = cur[dim - 1].clone();
            for j in (1..dim).rev() {
                cur[j] = cur[j - 1].clone();
            }
            cur[0] = Poly::zero();
            if !overflow.is_zero() {
                for j in 0..dim {
                    let t = overflow.mul(&ctx, &psi.coeff(j).neg(&ctx));
                    cur[j] = cur[j].add(&ctx, &t);
                }
            }
        }
        let mut expansions: Vec<Expansion> = Vec::with_capacity(top + 1);
        for e in 0..=top {
            if e < dim {
                expansions.push(vec![(e, None)]);
            } else {
                let row = &rows[e - dim];
                expansions.push(
                    row.iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(u, c)| (u, Some(c.clone())))
                        .collect(),
                );
            }
        }
        let mut ring = PrimeRing {
            dim,
            psi,
            expansions,
            lambdas: Vec::new(),
            lambda1_inv: Vec::new(),
        };
        // l_{i,k} = (Carlitz action of P^(n-k)) applied to the generator x.
        let x = ring.generator_elem(spec);
        for k in 1..=n {
            let op = carlitz_operator(&p_lin.pow(&ctx, n - k), &ctx)?;
            let lam = ring.carlitz_apply(&op, &x, spec)?;
            ring.lambdas.push(lam);
        }
        // l_{i,1}^(-1) = -l_{i,1}^(q-2) / P_i
        let l1 = ring.lambdas[0].clone();
        let mut inv = ring.pow(&l1, q - 2, spec);
        for s in inv.iter_mut() {
            *s = s.neg(spec);
            s.den[i] += 1;
            s.reduce(spec);
        }
        ring.lambda1_inv = inv;
        primes.push(ring);
    }
    let dims: Vec<usize> = primes.iter().map(|p| p.dim).collect();
    let mut strides = Vec::with_capacity(r);
    let mut acc = 1usize;
    for &d in &dims {
        strides.push(acc);
        acc = acc
            .checked_mul(d)
            .ok_or_else(|| Error::SizeLimit("model dimension overflow".into()))?;
    }
    debug_assert_eq!(acc as u128, phi);
    Ok(OracleRing {
        spec: spec.clone(),
        primes,
        dims,
        strides,
        total: acc,
    })
}

impl PrimeRing {
    fn zero_elem(&self, spec: &ModulusSpec) -> Vec<RationalScalar> {
        vec![RationalScalar::zero(spec.num_primes()); self.dim]
    }

    /// The image of x in the power basis; for dim = 1 it reduces at once.
    fn generator_elem(&self, spec: &ModulusSpec) -> Vec<RationalScalar> {
        let mut v = self.zero_elem(spec);
        if self.dim == 1 {
            v[0] =
                RationalScalar::from_poly(self.psi.coeff(0).neg(spec.field()), spec.num_primes());
        } else {
            v[1] = RationalScalar::from_poly(Poly::one(spec.field()), spec.num_primes());
        }
        v
    }

    fn mul(
        &self,
        a: &[RationalScalar],
        b: &[RationalScalar],
        spec: &ModulusSpec,
    ) -> Vec<RationalScalar> {
        let mut out = self.zero_elem(spec);
        for (ja, sa) in a.iter().enumerate() {
            if sa.is_zero() {
                continue;
            }
            for (jb, sb) in b.iter().enumerate() {
                if sb.is_zero() {
                    continue;
                }
                let s = sa.mul(sb, spec);
                for (u, c) in &self.expansions[ja + jb] {
                    let contrib = match c {
                        None => s.clone(),
                        Some(p) => s.mul_poly(p, spec),
                    };
                    out[*u] = out[*u].add(&contrib, spec);
                }
            }
        }
        out
    }

    fn pow(&self, a: &[RationalScalar], mut e: u64, spec: &ModulusSpec) -> Vec<RationalScalar> {
        let mut base = a.to_vec();
        let mut acc = self.one_elem(spec);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base, spec);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base, spec);
            }
        }
        acc
    }

    fn one_elem(&self, spec: &ModulusSpec) -> Vec<RationalScalar> {
        let mut out = self.zero_elem(spec);
        out[0] = RationalScalar::from_poly(Poly::one(spec.field()), spec.num_primes());
        out
    }

    /// Apply an additive operator `sum c_j tau^j`: z -> sum c_j z^(q^j).
    fn carlitz_apply(
        &self,
        op: &TwistedOperator,
        z: &[RationalScalar],
        spec: &ModulusSpec,
    ) -> Result<Vec<RationalScalar>> {
        let q = spec.q();
        let mut acc = self.zero_elem(spec);
        let mut frob = z.to_vec();
        for (j, c) in op.coeffs().iter().enumerate() {
            if j > 0 {
                frob = self.pow(&frob, q, spec);
            }
            if c.is_zero() {
                continue;
            }
            for (slot, f) in acc.iter_mut().zip(frob.iter()) {
                *slot = slot.add(&f.mul_poly(c, spec), spec);
            }
        }
        Ok(acc)
    }
}

impl OracleRing {
    pub fn spec(&self) -> &ModulusSpec {
        &self.spec
    }

    /// Dimension over F_q(T); equals phi(M).
    pub fn dimension(&self) -> usize {
        self.total
    }

    pub fn zero(&self) -> OracleElement {
        OracleElement {
            coeffs: vec![RationalScalar::zero(self.spec.num_primes()); self.total],
        }
    }

    pub fn one(&self) -> OracleElement {
        let mut out = self.zero();
        out.coeffs[0] =
            RationalScalar::from_poly(Poly::one(self.spec.field()), self.spec.num_primes());
        out
    }

    /// The embedded generator l_{i,k}.
    pub fn lambda(&self, i: usize, k: usize) -> OracleElement {
        let comps: Vec<Vec<RationalScalar>> = (0..self.spec.num_primes())
            .map(|j| {
                if j == i {
                    self.primes[j].lambdas[k - 1].clone()
                } else {
                    self.primes[j].one_elem(&self.spec)
                }
            })
            .collect();
        let views: Vec<&[RationalScalar]> = comps.iter().map(Vec::as_slice).collect();
        self.tensor_of(
            RationalScalar::from_poly(Poly::one(self.spec.field()), self.spec.num_primes()),
            &views,
        )
    }

    fn multi_index(&self, idx: usize) -> Vec<usize> {
        (0..self.dims.len())
            .map(|i| (idx / self.strides[i]) % self.dims[i])
            .collect()
    }

    /// Tensor-combine per-prime components scaled by a global scalar.
    fn tensor_of(&self, scalar: RationalScalar, comps: &[&[RationalScalar]]) -> OracleElement {
        let mut acc: Vec<RationalScalar> = vec![scalar];
        for comp in comps.iter() {
            let mut next = Vec::with_capacity(acc.len() * comp.len());
            for t in comp.iter() {
                for a in acc.iter() {
                    next.push(a.mul(t, &self.spec));
                }
            }
            // layout: index = sum t_i * stride_i with stride growing left to
            // right, i.e. next[t * len(acc) + partial]
            acc = next;
        }
        OracleElement { coeffs: acc }
    }

    pub fn add(&self, a: &OracleElement, b: &OracleElement) -> OracleElement {
        OracleElement {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(x, y)| x.add(y, &self.spec))
                .collect(),
        }
    }

    pub fn neg(&self, a: &OracleElement) -> OracleElement {
        OracleElement {
            coeffs: a.coeffs.iter().map(|x| x.neg(&self.spec)).collect(),
        }
    }

    pub fn sub(&self, a: &OracleElement, b: &OracleElement) -> OracleElement {
        self.add(a, &self.neg(b))
    }

    pub fn scale_poly(&self, a: &OracleElement, p: &Poly) -> OracleElement {
        OracleElement {
            coeffs: a.coeffs.iter().map(|x| x.mul_poly(p, &self.spec)).collect(),
        }
    }

    pub fn mul(&self, a: &OracleElement, b: &OracleElement) -> OracleElement {
        let mut out = self.zero();
        for (ia, sa) in a.coeffs.iter().enumerate() {
            if sa.is_zero() {
                continue;
            }
            let ta = self.multi_index(ia);
            for (ib, sb) in b.coeffs.iter().enumerate() {
                if sb.is_zero() {
                    continue;
                }
                let s = sa.mul(sb, &self.spec);
                if s.is_zero() {
                    continue;
                }
                let tb = self.multi_index(ib);
                // distribute the per-prime expansions of x_i^(ta_i + tb_i)
                let mut partial: Vec<(usize, RationalScalar)> = vec![(0, s)];
                for i in 0..self.dims.len() {
                    let exp = &self.primes[i].expansions[ta[i] + tb[i]];
                    let mut next = Vec::with_capacity(partial.len() * exp.len());
                    for (idx, sc) in &partial {
                        for (u, c) in exp {
                            let scaled = match c {
                                None => sc.clone(),
                                Some(p) => sc.mul_poly(p, &self.spec),
                            };
                            if !scaled.is_zero() {
                                next.push((idx + u * self.strides[i], scaled));
                            }
                        }
                    }
                    partial = next;
                }
                for (idx, sc) in partial {
                    out.coeffs[idx] = out.coeffs[idx].add(&sc, &self.spec);
                }
            }
        }
        out
    }

    pub fn pow(&self, a: &OracleElement, mut e: u64) -> OracleElement {
        let mut base = a.clone();
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

    /// Embed a sum of monomials as its coefficient function (dT stripped).
    /// All terms must agree on the dT flag.
    pub fn embed(&self, s: &LambdaSum) -> OracleElement {
        let spec = &self.spec;
        let ctx = spec.field();
        let r = spec.num_primes();
        let mut dt_seen: Option<bool> = None;
        let mut acc = self.zero();
        for m in s.monomials() {
            match dt_seen {
                None => dt_seen = Some(m.has_dt()),
                Some(f) => assert_eq!(f, m.has_dt(), "mixed dT flags in embedded sum"),
            }
            let mut scalar = RationalScalar::from_poly(Poly::constant(ctx, m.scalar), r);
            for i in 0..r {
                let mi = m.prime_power(i);
                if mi > 0 {
                    scalar = scalar.mul_poly(&spec.prime_poly(i).pow(ctx, mi as usize), spec);
                } else if mi < 0 {
                    scalar.den[i] += (-mi) as u32;
                    scalar.reduce(spec);
                }
            }
            let mut comps = Vec::with_capacity(r);
            for i in 0..r {
                let ring = &self.primes[i];
                let mut comp = ring.one_elem(spec);
                for k in 1..=spec.multiplicity(i) {
                    let e = m.exponent(i, k);
                    if e == 0 {
                        continue;
                    }
                    if e > 0 {
                        let powed = ring.pow(&ring.lambdas[k - 1], e as u64, spec);
                        comp = ring.mul(&comp, &powed, spec);
                    } else {
                        assert_eq!(k, 1, "only l_{{i,1}} may carry negative exponents");
                        let powed = ring.pow(&ring.lambda1_inv, (-e) as u64, spec);
                        comp = ring.mul(&comp, &powed, spec);
                    }
                }
                comps.push(comp);
            }
            let views: Vec<&[RationalScalar]> = comps.iter().map(Vec::as_slice).collect();
            acc = self.add(&acc, &self.tensor_of(scalar, &views));
        }
        acc
    }

    /// The substitution action of a unit: x_i -> (Carlitz action of A)(x_i)
    /// on every tensor coordinate, scalars fixed.
    pub fn sigma(&self, a: &Poly, elem: &OracleElement) -> Result<OracleElement> {
        Ok(self.sigma_with(&self.sigma_map(a)?, elem))
    }

    /// Precompute the substitution action of a unit; the tables depend only
    /// on the unit, so build them once when acting on many elements.
    pub fn sigma_map(&self, a: &Poly) -> Result<SigmaMap> {
        let spec = &self.spec;
        if !is_unit(a, spec) {
            return Err(Error::NotAUnit(a.format(spec.field())));
        }
        // per-prime power tables of the image of x_i
        let mut tables: Vec<Vec<Vec<RationalScalar>>> = Vec::with_capacity(self.dims.len());
        for i in 0..self.dims.len() {
            let ring = &self.primes[i];
            let op = carlitz_operator(a, spec.field())?;
            let x = ring.generator_elem(spec);
            let gx = ring.carlitz_apply(&op, &x, spec)?;
            let mut table = Vec::with_capacity(ring.dim);
            table.push(ring.one_elem(spec));
            for t in 1..ring.dim {
                let prev = &table[t - 1];
                table.push(ring.mul(prev, &gx, spec));
            }
            tables.push(table);
        }
        Ok(SigmaMap { tables })
    }

    pub fn sigma_with(&self, map: &SigmaMap, elem: &OracleElement) -> OracleElement {
        let mut out = self.zero();
        for (idx, s) in elem.coeffs.iter().enumerate() {
            if s.is_zero() {
                continue;
            }
            let t = self.multi_index(idx);
            let comps: Vec<&[RationalScalar]> = (0..self.dims.len())
                .map(|i| map.tables[i][t[i]].as_slice())
                .collect();
            let term = self.tensor_of(s.clone(), &comps);
            out = self.add(&out, &term);
        }
        out
    }

    /// Verify the defining relations of the model itself: Psi_i(x_i) = 0,
    /// l_{i,1}^(q-1) = -P_i, and l_{i,k}^q = l_{i,k-1} + l_{i,1}^(q-1) l_{i,k}.
    pub fn check_relations(&self) -> Result<()> {
        let spec = &self.spec;
        let ctx = spec.field();
        let q = spec.q();
        let phi = spec.euler_phi()?;
        if phi != self.total as u128 {
            return Err(Error::InternalInvariant(
                "model dimension differs from the unit count".into(),
            ));
        }
        for i in 0..spec.num_primes() {
            let ring = &self.primes[i];
            // Psi(x) = 0 via Horner in the prime component
            let x = ring.generator_elem(spec);
            let mut acc = ring.zero_elem(spec);
            for j in (0..=ring.dim).rev() {
                acc = ring.mul(&acc, &x, spec);
                let c = ring.psi.coeff(j);
                if !c.is_zero() {
                    acc[0] = acc[0].add(&RationalScalar::from_poly(c, spec.num_primes()), spec);
                }
            }
            if acc.iter().any(|s| !s.is_zero()) {
                return Err(Error::InternalInvariant(format!(
                    "Psi(x_{i}) is nonzero in the model"
                )));
            }
            // l_{i,1}^(q-1) = -P_i
            let l1_pow = ring.pow(&ring.lambdas[0], q - 1, spec);
            let mut expected = ring.zero_elem(spec);
            expected[0] = RationalScalar::from_poly(spec.prime_poly(i).neg(ctx), spec.num_primes());
            if l1_pow != expected {
                return Err(Error::InternalInvariant(format!(
                    "l_({i},1)^(q-1) != -P_{i} in the model"
                )));
            }
            // l_{i,1} * l_{i,1}^(-1) = 1
            let prod = ring.mul(&ring.lambdas[0], &ring.lambda1_inv, spec);
            if prod != ring.one_elem(spec) {
                return Err(Error::InternalInvariant(format!(
                    "l_({i},1) inverse is wrong in the model"
                )));
            }
            // level rewriting relation
            for k in 2..=spec.multiplicity(i) {
                let lhs = ring.pow(&ring.lambdas[k - 1], q, spec);
                let second = ring.mul(&l1_pow, &ring.lambdas[k - 1], spec);
                let rhs: Vec<RationalScalar> = ring.lambdas[k - 2]
                    .iter()
                    .zip(&second)
                    .map(|(a, b)| a.add(b, spec))
                    .collect();
                if lhs != rhs {
                    return Err(Error::InternalInvariant(format!(
                        "level relation fails at prime {i}, level {k}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// True iff the embedded sums are linearly independent over F_q.
pub fn oracle_independent(sums: &[LambdaSum], ring: &OracleRing) -> Result<bool> {
    Ok(oracle_rank(sums, ring)? == sums.len())
}

/// F_q-rank of the embedded sums: clear all denominators with one common
/// factor (scaling by a fixed function is an injective F_q-linear map),
/// flatten every T-coefficient into its own column, and row-reduce.
pub fn oracle_rank(sums: &[LambdaSum], ring: &OracleRing) -> Result<usize> {
    let spec = ring.spec();
    let ctx = spec.field();
    let r = spec.num_primes();
    let embedded: Vec<OracleElement> = sums.iter().map(|s| ring.embed(s)).collect();
    let mut den_max = vec![0u32; r];
    for e in &embedded {
        for c in e.coeffs() {
            for i in 0..r {
                den_max[i] = den_max[i].max(c.denominator_exponents()[i]);
            }
        }
    }
    let mut cleared: Vec<Vec<Poly>> = Vec::with_capacity(sums.len());
    for e in &embedded {
        let row: Vec<Poly> = e
            .coeffs()
            .iter()
            .map(|c| {
                let mut num = c.numerator().clone();
                for i in 0..r {
                    let diff = den_max[i] - c.denominator_exponents()[i];
                    if diff > 0 && !num.is_zero() {
                        num = num.mul(ctx, &spec.prime_poly(i).pow(ctx, diff as usize));
                    }
                }
                num
            })
            .collect();
        cleared.push(row);
    }
    let max_deg = cleared
        .iter()
        .flatten()
        .filter_map(Poly::degree)
        .max()
        .unwrap_or(0);
    let width = ring.dimension() * (max_deg + 1);
    let mut rows: Vec<Vec<FqElement>> = cleared
        .iter()
        .map(|row| {
            let mut flat = Vec::with_capacity(width);
            for p in row {
                for d in 0..=max_deg {
                    flat.push(p.coeff(ctx, d));
                }
            }
            flat
        })
        .collect();
    Ok(linalg::rank(&mut rows, ctx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::differentials::enumerate_basis;
    use crate::field::FieldCtx;
    use crate::lambda::{canonicalize, LambdaMonomial, WindowPolicy};
    use crate::poly::parse_modulus;

    fn spec(q: u64, m: &str) -> ModulusSpec {
        let ctx = match q {
            4 => FieldCtx::new(2, 2).unwrap(),
            _ => FieldCtx::new(q, 1).unwrap(),
        };
        parse_modulus(&ctx, m).unwrap()
    }

    fn lambda_sum(
        spec: &ModulusSpec,
        scalar: i64,
        exps: &[&[(usize, i64)]],
        dt: bool,
    ) -> LambdaSum {
        let ctx = spec.field();
        let mut m = LambdaMonomial::constant(spec, ctx.from_int(scalar), dt);
        for (i, list) in exps.iter().enumerate() {
            for &(k, e) in list.iter() {
                m.set_exponent(i, k, e);
            }
        }
        LambdaSum::from_monomial(m, spec)
    }

    #[test]
    fn model_dimensions() {
        let limits = Limits::default();
        assert_eq!(
            oracle_build(&spec(3, "0^2"), &limits).unwrap().dimension(),
            6
        );
        assert_eq!(
            oracle_build(&spec(3, "0^1,1^1"), &limits)
                .unwrap()
                .dimension(),
            4
        );
        assert_eq!(
            oracle_build(&spec(3, "0^1"), &limits).unwrap().dimension(),
            2
        );
    }

    // all split moduli of degree <= max_deg as root multisets
    fn all_split(ctx: &FieldCtx, max_deg: usize) -> Vec<ModulusSpec> {
        fn rec(
            ctx: &FieldCtx,
            roots: &[crate::field::FqElement],
            idx: usize,
            left: usize,
            cur: &mut Vec<(crate::field::FqElement, usize)>,
            out: &mut Vec<ModulusSpec>,
        ) {
            if !cur.is_empty() {
                out.push(ModulusSpec::new(ctx.clone(), cur.clone()).unwrap());
            }
            if idx == roots.len() || left == 0 {
                return;
            }
            for mult in 1..=left {
                cur.push((roots[idx], mult));
                rec(ctx, roots, idx + 1, left - mult, cur, out);
                cur.pop();
            }
            rec(ctx, roots, idx + 1, left, cur, out);
        }
        let roots: Vec<crate::field::FqElement> = ctx.elements().collect();
        let mut out = Vec::new();
        rec(ctx, &roots, 0, max_deg, &mut Vec::new(), &mut out);
        out.sort_by_key(|s| (s.degree(), s.format_factored()));
        out.dedup_by_key(|s| s.format_factored());
        out
    }

    #[test]
    fn relations_hold_on_all_small_towers() {
        let limits = Limits {
            max_genus: 512,
            max_units: 36,
        };
        let mut towers = 0;
        for q in [2u64, 3, 4] {
            let ctx = match q {
                4 => FieldCtx::new(2, 2).unwrap(),
                _ => FieldCtx::new(q, 1).unwrap(),
            };
            let max_deg = if q == 2 { 5 } else { 3 };
            for s in all_split(&ctx, max_deg) {
                if s.euler_phi().unwrap() > 36 {
                    continue;
                }
                let ring = oracle_build(&s, &limits).unwrap();
                ring.check_relations().unwrap();
                towers += 1;
            }
        }
        assert!(towers > 40, "only {towers} towers checked");
    }

    #[test]
    fn canonicalize_preserves_value_exhaustive() {
        // Exponents up to 2q at every slot of the tower, for the four
        // reference moduli and every anchor. The slot of l_{i,1} stays
        // above -U_i (further down is mis-anchored by construction and
        // rejected as NegativePower).
        let limits = Limits::default();
        for m in ["0^2", "0^3", "0^1,1^1", "0^2,1^1"] {
            let s = spec(3, m);
            let q = 3i64;
            let ring = oracle_build(&s, &limits).unwrap();
            let mut ranges: Vec<(i64, i64)> = Vec::new();
            for j in 0..s.num_primes() {
                let n = s.multiplicity(j) as i64;
                let hi_window = n * q - (n + 1);
                ranges.push((-hi_window, 2 * q));
                for _ in 2..=s.multiplicity(j) {
                    ranges.push((0, 2 * q));
                }
            }
            for anchor in 0..s.num_primes() {
                let policy = WindowPolicy::for_spec(&s, anchor);
                let mut cur: Vec<i64> = ranges.iter().map(|(lo, _)| *lo).collect();
                'outer: loop {
                    let mut mono = LambdaMonomial::constant(&s, s.field().one(), false);
                    let mut pos = 0;
                    for j in 0..s.num_primes() {
                        for k in 1..=s.multiplicity(j) {
                            mono.set_exponent(j, k, cur[pos]);
                            pos += 1;
                        }
                    }
                    let raw = LambdaSum::from_monomial(mono, &s);
                    let canon = canonicalize(&raw, &policy, &s).unwrap();
                    assert_eq!(
                        ring.embed(&canon),
                        ring.embed(&raw),
                        "value changed for M={m} anchor={anchor} exponents={cur:?}"
                    );
                    let mut posn = ranges.len();
                    loop {
                        if posn == 0 {
                            break 'outer;
                        }
                        posn -= 1;
                        cur[posn] += 1;
                        if cur[posn] <= ranges[posn].1 {
                            break;
                        }
                        cur[posn] = ranges[posn].0;
                    }
                }
            }
        }
    }

    #[test]
    fn embed_examples() {
        let s = spec(3, "0^2");
        let limits = Limits::default();
        let ring = oracle_build(&s, &limits).unwrap();
        // l_{1,1}^(q-1) embeds to -P_1
        let lhs = ring.embed(&lambda_sum(&s, 1, &[&[(1, 2)]], false));
        let minus_p = ring.neg(&ring.scale_poly(&ring.one(), &s.prime_poly(0)));
        assert_eq!(lhs, minus_p);
        // scalar 1 embeds to the identity
        assert_eq!(ring.embed(&lambda_sum(&s, 1, &[&[]], false)), ring.one());
        // the level relation: l_{1,2}^3 = l_{1,1} + l_{1,1}^2 l_{1,2}
        let cube = ring.embed(&lambda_sum(&s, 1, &[&[(2, 3)]], false));
        let mut rhs_sum = lambda_sum(&s, 1, &[&[(1, 1)]], false);
        rhs_sum = rhs_sum.add(&lambda_sum(&s, 1, &[&[(1, 2), (2, 1)]], false), &s);
        assert_eq!(cube, ring.embed(&rhs_sum));
    }

    #[test]
    fn anchor_folding_agrees_with_the_model() {
        // q=3, M = T^3 (T-1) anchored at T-1: the canonical form of a unit
        // image re-expresses P_1-powers through the anchor. Check the full
        // action against the model for every basis monomial under every
        // unit of degree >= 2 (the ones whose T-digits reach level 3).
        let s = spec(3, "0^3,1^1");
        let limits = Limits::default();
        let ring = oracle_build(&s, &limits).unwrap();
        let anchor = 1;
        let policy = WindowPolicy::for_spec(&s, anchor);
        let units: Vec<crate::poly::Poly> = crate::poly::units_enumerate(&s, &limits)
            .unwrap()
            .into_iter()
            .filter(|u| u.degree() == Some(2))
            .collect();
        assert!(!units.is_empty());
        let mut folds = 0usize;
        for t in enumerate_basis(&s, anchor, &limits).unwrap() {
            let raw = LambdaSum::from_monomial(t.materialize(&s, anchor), &s);
            for u in &units {
                let symbolic = crate::galois::sigma_apply(u, &raw, &s, &policy).unwrap();
                for m in symbolic.monomials() {
                    // every canonical term carries prime powers at the anchor
                    // only; nothing but the cross-prime fold can raise the
                    // anchor power above the input's mu0 here (the anchor
                    // prime is unramified of level one, so its own window
                    // never moves)
                    assert_eq!(m.prime_power(0), 0);
                    if m.prime_power(anchor) > t.mu0 {
                        folds += 1;
                    }
                }
                let model = ring.sigma(u, &ring.embed(&raw)).unwrap();
                assert_eq!(ring.embed(&symbolic), model);
            }
        }
        assert!(folds > 0, "the folding path was never exercised");
    }

    #[test]
    fn independence_examples() {
        let limits = Limits::default();
        let s = spec(3, "0^3");
        let ring = oracle_build(&s, &limits).unwrap();
        let basis: Vec<LambdaSum> = enumerate_basis(&s, 0, &limits)
            .unwrap()
            .iter()
            .map(|t| LambdaSum::from_monomial(t.materialize(&s, 0), &s))
            .collect();
        assert_eq!(basis.len(), 10);
        assert!(oracle_independent(&basis, &ring).unwrap());
        let mut with_dup = basis.clone();
        with_dup.push(basis[3].clone());
        assert!(!oracle_independent(&with_dup, &ring).unwrap());

        let s = spec(5, "0^1,1^1");
        let ring = oracle_build(&s, &limits).unwrap();
        let basis: Vec<LambdaSum> = enumerate_basis(&s, 0, &limits)
            .unwrap()
            .iter()
            .map(|t| LambdaSum::from_monomial(t.materialize(&s, 0), &s))
            .collect();
        assert_eq!(basis.len(), 3);
        assert!(oracle_independent(&basis, &ring).unwrap());
    }

    #[test]
    fn canonicalize_preserves_value_small() {
        let s = spec(3, "0^2");
        let limits = Limits::default();
        let ring = oracle_build(&s, &limits).unwrap();
        let policy = WindowPolicy::for_spec(&s, 0);
        for e1 in -3..=6i64 {
            for e2 in 0..=6i64 {
                let raw = lambda_sum(&s, 1, &[&[(1, e1), (2, e2)]], false);
                let canon = canonicalize(&raw, &policy, &s).unwrap();
                assert_eq!(ring.embed(&canon), ring.embed(&raw), "e1={e1} e2={e2}");
            }
        }
    }

    #[test]
    fn anchored_bases_span_the_same_space() {
        // Bases at different anchors are distinct tuple sets but must span
        // the same subspace: the union has rank = genus.
        let limits = Limits::default();
        for (q, m) in [(3u64, "0^2,1^1"), (3, "0^1,1^1,2^1"), (4, "0^2,1^1")] {
            let s = spec(q, m);
            let g = crate::differentials::genus(&s).unwrap() as usize;
            if g == 0 {
                continue;
            }
            let ring = oracle_build(&s, &limits).unwrap();
            let mut union: Vec<LambdaSum> = Vec::new();
            for anchor in 0..s.num_primes() {
                for t in enumerate_basis(&s, anchor, &limits).unwrap() {
                    union.push(LambdaSum::from_monomial(t.materialize(&s, anchor), &s));
                }
            }
            assert_eq!(union.len(), g * s.num_primes());
            assert_eq!(oracle_rank(&union, &ring).unwrap(), g, "q={q} m={m}");
        }
    }

    #[test]
    fn sigma_is_multiplicative_in_the_model() {
        let s = spec(3, "0^2,1^1");
        let limits = Limits::default();
        let ring = oracle_build(&s, &limits).unwrap();
        let ctx = s.field().clone();
        let a = crate::poly::parse_poly(&ctx, "1+T").unwrap();
        let x = ring.embed(&lambda_sum(&s, 1, &[&[(2, 1)], &[]], false));
        let y = ring.embed(&lambda_sum(&s, 2, &[&[(1, -1)], &[(1, 1)]], false));
        let lhs = ring.sigma(&a, &ring.mul(&x, &y)).unwrap();
        let rhs = ring.mul(&ring.sigma(&a, &x).unwrap(), &ring.sigma(&a, &y).unwrap());
        assert_eq!(lhs, rhs);
    }
}
