//! Polynomials over F_q and the split-modulus machinery.
//!
//! A [`Poly`] is a dense coefficient vector, lowest degree first, with a
//! nonzero top coefficient (the zero polynomial is the empty vector).
//! [`ModulusSpec`] carries a fully split modulus as its root system
//! `M = prod (T - a_i)^{n_i}`; roots are kept sorted by their base-p
//! encoding so that every downstream index (anchors, matrices, JSON) is
//! deterministic.

use crate::field::{FieldCtx, FqElement};
use crate::{Error, Limits, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly {
    coeffs: Vec<FqElement>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { coeffs: vec![] }
    }

    pub fn constant(ctx: &FieldCtx, c: FqElement) -> Poly {
        Poly::from_coeffs(ctx, vec![c])
    }

    pub fn one(ctx: &FieldCtx) -> Poly {
        Poly::constant(ctx, ctx.one())
    }

    /// The variable T.
    pub fn var(ctx: &FieldCtx) -> Poly {
        Poly::from_coeffs(ctx, vec![ctx.zero(), ctx.one()])
    }

    /// T - a, the monic linear polynomial with root `a`.
    pub fn linear_from_root(ctx: &FieldCtx, a: &FqElement) -> Poly {
        Poly::from_coeffs(ctx, vec![ctx.neg(a), ctx.one()])
    }

    pub fn from_coeffs(ctx: &FieldCtx, mut coeffs: Vec<FqElement>) -> Poly {
        while coeffs.last().map(|c| ctx.is_zero(c)).unwrap_or(false) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    /// Convenience constructor from prime-subfield integers, lowest first.
    pub fn from_ints(ctx: &FieldCtx, ints: &[i64]) -> Poly {
        Poly::from_coeffs(ctx, ints.iter().map(|&v| ctx.from_int(v)).collect())
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

    pub fn coeffs(&self) -> &[FqElement] {
        &self.coeffs
    }

    /// Coefficient of T^i, zero beyond the degree.
    pub fn coeff(&self, ctx: &FieldCtx, i: usize) -> FqElement {
        self.coeffs.get(i).copied().unwrap_or_else(|| ctx.zero())
    }

    pub fn leading(&self) -> Option<&FqElement> {
        self.coeffs.last()
    }

    pub fn is_monic(&self, ctx: &FieldCtx) -> bool {
        self.leading().map(|c| *c == ctx.one()).unwrap_or(false)
    }

    pub fn add(&self, ctx: &FieldCtx, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(ctx.add(&self.coeff(ctx, i), &other.coeff(ctx, i)));
        }
        Poly::from_coeffs(ctx, out)
    }

    pub fn neg(&self, ctx: &FieldCtx) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| ctx.neg(c)).collect(),
        }
    }

    pub fn sub(&self, ctx: &FieldCtx, other: &Poly) -> Poly {
        self.add(ctx, &other.neg(ctx))
    }

    pub fn scale(&self, ctx: &FieldCtx, c: &FqElement) -> Poly {
        if ctx.is_zero(c) {
            return Poly::zero();
        }
        Poly {
            coeffs: self.coeffs.iter().map(|x| ctx.mul(x, c)).collect(),
        }
    }

    pub fn mul(&self, ctx: &FieldCtx, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![ctx.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if ctx.is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = ctx.add(&out[i + j], &ctx.mul(a, b));
            }
        }
        Poly::from_coeffs(ctx, out)
    }

    pub fn pow(&self, ctx: &FieldCtx, mut e: usize) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(ctx);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(ctx, &base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(ctx, &base);
            }
        }
        acc
    }

    pub fn eval(&self, ctx: &FieldCtx, a: &FqElement) -> FqElement {
        let mut acc = ctx.zero();
        for c in self.coeffs.iter().rev() {
            acc = ctx.add(&ctx.mul(&acc, a), c);
        }
        acc
    }

    /// Synthetic division by (T - a): returns (quotient, self(a)).
    pub fn deflate(&self, ctx: &FieldCtx, a: &FqElement) -> (Poly, FqElement) {
        if self.is_zero() {
            return (Poly::zero(), ctx.zero());
        }
        let mut quot = vec![ctx.zero(); self.coeffs.len() - 1];
        let mut carry = ctx.zero();
        for i in (0..self.coeffs.len()).rev() {
            let v = ctx.add(&self.coeffs[i], &ctx.mul(&carry, a));
            if i == 0 {
                return (Poly::from_coeffs(ctx, quot), v);
            }
            quot[i - 1] = v;
            carry = v;
        }
        unreachable!()
    }

    /// Division with remainder by a monic divisor.
    pub fn divmod_monic(&self, ctx: &FieldCtx, d: &Poly) -> (Poly, Poly) {
        assert!(d.is_monic(ctx), "divisor must be monic");
        let dd = d.degree().unwrap();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![ctx.zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = rem[i];
            if ctx.is_zero(&c) {
                continue;
            }
            quot[i - dd] = c;
            for j in 0..=dd {
                let t = ctx.mul(&c, &d.coeff(ctx, j));
                rem[i - dd + j] = ctx.sub(&rem[i - dd + j], &t);
            }
        }
        (Poly::from_coeffs(ctx, quot), Poly::from_coeffs(ctx, rem))
    }

    pub fn rem_monic(&self, ctx: &FieldCtx, d: &Poly) -> Poly {
        self.divmod_monic(ctx, d).1
    }

    pub fn monic(&self, ctx: &FieldCtx) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some(l) => {
                let inv = ctx.inv(l).expect("leading coefficient is nonzero");
                self.scale(ctx, &inv)
            }
        }
    }

    /// Substitute T -> T^(q^i); this is the i-th Frobenius power of the
    /// polynomial since coefficients lie in F_q.
    pub fn q_power(&self, ctx: &FieldCtx, i: usize) -> Result<Poly> {
        if self.is_zero() || i == 0 {
            return Ok(self.clone());
        }
        let step = ctx
            .q()
            .checked_pow(i as u32)
            .ok_or_else(|| Error::SizeLimit("Frobenius power exponent overflow".into()))?
            as usize;
        let deg = self.coeffs.len() - 1;
        let new_len = deg
            .checked_mul(step)
            .and_then(|d| d.checked_add(1))
            .ok_or_else(|| Error::SizeLimit("Frobenius power degree overflow".into()))?;
        if new_len > (1 << 22) {
            return Err(Error::SizeLimit(format!(
                "Frobenius power degree {} too large",
                new_len - 1
            )));
        }
        let mut out = vec![ctx.zero(); new_len];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[k * step] = *c;
        }
        Ok(Poly::from_coeffs(ctx, out))
    }

    /// Canonical text form, e.g. `T^2+2*T+1`. Extension-field coefficients
    /// with more than one term are parenthesized.
    pub fn format(&self, ctx: &FieldCtx) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if ctx.is_zero(c) {
                continue;
            }
            let cs = ctx.format_element(c);
            let coeff = if cs.contains('+') || cs.contains('-') {
                format!("({cs})")
            } else {
                cs
            };
            let part = match (i, coeff.as_str()) {
                (0, _) => coeff,
                (1, "1") => "T".to_string(),
                (1, _) => format!("{coeff}*T"),
                (_, "1") => format!("T^{i}"),
                (_, _) => format!("{coeff}*T^{i}"),
            };
            parts.push(part);
        }
        parts.join("+")
    }
}

/// A split modulus `M = prod (T - a_i)^{n_i}` together with its field.
///
/// Factors are sorted by root encoding; prime index `i` everywhere else in
/// the crate refers to this order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModulusSpec {
    field: FieldCtx,
    factors: Vec<(FqElement, usize)>,
}

impl ModulusSpec {
    pub fn new(field: FieldCtx, mut factors: Vec<(FqElement, usize)>) -> Result<ModulusSpec> {
        if factors.is_empty() {
            return Err(Error::Parse("modulus must have degree >= 1".into()));
        }
        if factors.iter().any(|(_, n)| *n == 0) {
            return Err(Error::Parse("factor multiplicity must be >= 1".into()));
        }
        factors.sort_by_key(|(a, _)| field.encode(a));
        for w in factors.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Parse("repeated root in factored modulus".into()));
            }
        }
        Ok(ModulusSpec { field, factors })
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    pub fn q(&self) -> u64 {
        self.field.q()
    }

    /// Number of distinct primes dividing M.
    pub fn num_primes(&self) -> usize {
        self.factors.len()
    }

    pub fn root(&self, i: usize) -> &FqElement {
        &self.factors[i].0
    }

    pub fn multiplicity(&self, i: usize) -> usize {
        self.factors[i].1
    }

    pub fn factors(&self) -> &[(FqElement, usize)] {
        &self.factors
    }

    pub fn degree(&self) -> usize {
        self.factors.iter().map(|(_, n)| n).sum()
    }

    /// The monic linear prime P_i = T - a_i.
    pub fn prime_poly(&self, i: usize) -> Poly {
        Poly::linear_from_root(&self.field, &self.factors[i].0)
    }

    /// Reconstructed monic modulus.
    pub fn modulus_poly(&self) -> Poly {
        let ctx = &self.field;
        let mut m = Poly::one(ctx);
        for (a, n) in &self.factors {
            m = m.mul(ctx, &Poly::linear_from_root(ctx, a).pow(ctx, *n));
        }
        m
    }

    /// Unit count of F_q[T]/(P_i^{n_i}): q^{n_i - 1} (q - 1).
    pub fn phi_at(&self, i: usize) -> Result<u128> {
        let q = self.q() as u128;
        let n = self.factors[i].1 as u32;
        q.checked_pow(n - 1)
            .and_then(|v| v.checked_mul(q - 1))
            .ok_or_else(|| Error::SizeLimit("unit count overflow".into()))
    }

    /// Unit count of F_q[T]/(M), which equals [K : F_q(T)].
    pub fn euler_phi(&self) -> Result<u128> {
        let mut acc: u128 = 1;
        for i in 0..self.num_primes() {
            acc = acc
                .checked_mul(self.phi_at(i)?)
                .ok_or_else(|| Error::SizeLimit("unit count overflow".into()))?;
        }
        Ok(acc)
    }

    /// Canonical factored literal, e.g. `0^2,1^1`.
    pub fn format_factored(&self) -> String {
        self.factors
            .iter()
            .map(|(a, n)| format!("{}^{}", self.field.format_element(a), n))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Factor a modulus into linear factors by exhaustive root deflation.
///
/// The leading coefficient is discarded (monic normalization). If deflating
/// every root of F_q leaves a nonconstant core the modulus does not split
/// and the core is reported back in the error.
pub fn split_factor(m: &Poly, ctx: &FieldCtx) -> Result<ModulusSpec> {
    if m.degree().unwrap_or(0) < 1 {
        return Err(Error::Parse("modulus must have degree >= 1".into()));
    }
    let mut core = m.monic(ctx);
    let mut factors = Vec::new();
    for a in ctx.elements() {
        let mut mult = 0;
        loop {
            if core.degree() == Some(0) {
                break;
            }
            let (quot, rem) = core.deflate(ctx, &a);
            if !ctx.is_zero(&rem) {
                break;
            }
            core = quot;
            mult += 1;
        }
        if mult > 0 {
            factors.push((a, mult));
        }
    }
    if core.degree() != Some(0) {
        return Err(Error::NonSplitModulus {
            factor: core.format(ctx),
        });
    }
    ModulusSpec::new(ctx.clone(), factors)
}

/// Digits of a P-adic expansion, constant digit first.
pub type DigitVector = Vec<FqElement>;

/// First L digits of the P-adic expansion of A at the monic linear P = T - a,
/// computed by repeated evaluation-and-deflation at a.
pub fn padic_digits(a_poly: &Poly, p_linear: &Poly, l: usize, ctx: &FieldCtx) -> DigitVector {
    assert!(
        p_linear.degree() == Some(1) && p_linear.is_monic(ctx),
        "P must be monic linear"
    );
    assert!(l >= 1);
    let root = ctx.neg(&p_linear.coeff(ctx, 0));
    let mut digits = Vec::with_capacity(l);
    let mut cur = a_poly.clone();
    for _ in 0..l {
        let (quot, val) = cur.deflate(ctx, &root);
        digits.push(val);
        cur = quot;
    }
    digits
}

/// True iff gcd(A, M) = 1, i.e. A vanishes at no root of M.
pub fn is_unit(a: &Poly, spec: &ModulusSpec) -> bool {
    let ctx = spec.field();
    !a.is_zero() && (0..spec.num_primes()).all(|i| !ctx.is_zero(&a.eval(ctx, spec.root(i))))
}

/// All residues A with deg A < deg M and gcd(A, M) = 1, in graded
/// lexicographic order on coefficient tuples.
pub fn units_enumerate(spec: &ModulusSpec, limits: &Limits) -> Result<Vec<Poly>> {
    let phi = spec.euler_phi()?;
    if phi > limits.max_units as u128 {
        return Err(Error::SizeLimit(format!(
            "unit count {phi} exceeds max_units {}",
            limits.max_units
        )));
    }
    let ctx = spec.field();
    let deg = spec.degree();
    let q = spec.q();
    let mut units = Vec::with_capacity(phi as usize);
    let mut digits = vec![0u64; deg];
    loop {
        let coeffs: Vec<FqElement> = digits.iter().map(|&d| ctx.decode(d)).collect();
        let cand = Poly::from_coeffs(ctx, coeffs);
        if is_unit(&cand, spec) {
            units.push(cand);
        }
        // advance the base-q counter
        let mut pos = 0;
        loop {
            if pos == deg {
                units.sort_by_key(|u| unit_order_key(u, ctx, deg));
                debug_assert_eq!(units.len() as u128, phi);
                return Ok(units);
            }
            digits[pos] += 1;
            if digits[pos] < q {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

fn unit_order_key(u: &Poly, ctx: &FieldCtx, deg: usize) -> (usize, Vec<u64>) {
    let d = u.degree().map(|d| d + 1).unwrap_or(0);
    let mut key = Vec::with_capacity(deg);
    for i in 0..deg {
        key.push(ctx.encode(&u.coeff(ctx, i)));
    }
    (d, key)
}

// --- text grammar ---
//
// expr   := ['-'] term (('+'|'-') term)*
// term   := factor ('*' factor)*
// factor := INT | 'g' ['^' INT] | 'T' ['^' INT] | '(' expr ')'

struct Parser<'a> {
    ctx: &'a FieldCtx,
    chars: Vec<char>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(ctx: &'a FieldCtx, s: &str) -> Self {
        Parser {
            ctx,
            chars: s.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn parse_expr(&mut self) -> Result<Poly> {
        let mut acc = if self.peek() == Some('-') {
            self.bump();
            self.parse_term()?.neg(self.ctx)
        } else {
            self.parse_term()?
        };
        while let Some(op) = self.peek() {
            match op {
                '+' => {
                    self.bump();
                    acc = acc.add(self.ctx, &self.parse_term()?);
                }
                '-' => {
                    self.bump();
                    acc = acc.sub(self.ctx, &self.parse_term()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn parse_term(&mut self) -> Result<Poly> {
        let mut acc = self.parse_factor()?;
        while self.peek() == Some('*') {
            self.bump();
            acc = acc.mul(self.ctx, &self.parse_factor()?);
        }
        Ok(acc)
    }

    fn parse_factor(&mut self) -> Result<Poly> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let v = self.parse_int()?;
                Ok(Poly::constant(self.ctx, self.ctx.from_int(v as i64)))
            }
            Some('g') => {
                self.bump();
                let g = Poly::constant(self.ctx, self.ctx.generator()?);
                let e = self.parse_opt_exponent()?;
                Ok(g.pow(self.ctx, e))
            }
            Some('T') => {
                self.bump();
                let t = Poly::var(self.ctx);
                let e = self.parse_opt_exponent()?;
                Ok(t.pow(self.ctx, e))
            }
            Some('(') => {
                self.bump();
                let inner = self.parse_expr()?;
                if self.bump() != Some(')') {
                    return Err(Error::Parse("expected ')'".into()));
                }
                Ok(inner)
            }
            other => Err(Error::Parse(format!("unexpected input at {other:?}"))),
        }
    }

    fn parse_opt_exponent(&mut self) -> Result<usize> {
        if self.peek() == Some('^') {
            self.bump();
            let v = self.parse_int()?;
            Ok(v as usize)
        } else {
            Ok(1)
        }
    }

    fn parse_int(&mut self) -> Result<u64> {
        let start = self.pos;
        while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
            self.bump();
        }
        if start == self.pos {
            return Err(Error::Parse("expected an integer".into()));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse::<u64>()
            .map_err(|_| Error::Parse(format!("integer {s} out of range")))
    }
}

/// Parse a polynomial literal in T (coefficients may use `g` for extension
/// fields), e.g. `T^2+2*T+1` or `(g+1)*T+g`.
pub fn parse_poly(ctx: &FieldCtx, s: &str) -> Result<Poly> {
    let mut p = Parser::new(ctx, s);
    let out = p.parse_expr()?;
    if p.pos != p.chars.len() {
        return Err(Error::Parse(format!("trailing input in {s:?}")));
    }
    Ok(out)
}

/// Parse an F_q element literal (a degree-zero polynomial expression).
pub fn parse_element(ctx: &FieldCtx, s: &str) -> Result<FqElement> {
    let p = parse_poly(ctx, s)?;
    if p.degree().unwrap_or(0) > 0 {
        return Err(Error::Parse(format!("{s:?} is not a constant")));
    }
    Ok(p.coeff(ctx, 0))
}

/// Parse a modulus literal: either a factored form `root^mult,root^mult,...`
/// or a coefficient literal in T (anything containing `T`).
pub fn parse_modulus(ctx: &FieldCtx, s: &str) -> Result<ModulusSpec> {
    if s.contains('T') {
        let m = parse_poly(ctx, s)?;
        return split_factor(&m, ctx);
    }
    let mut by_root: Vec<(FqElement, usize)> = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            return Err(Error::Parse("empty factor in modulus literal".into()));
        }
        let (root_str, mult) = match part.rsplit_once('^') {
            Some((r, m)) => {
                let mult: usize = m
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad multiplicity in {part:?}")))?;
                (r, mult)
            }
            None => (part, 1),
        };
        let root = parse_element(ctx, root_str)?;
        match by_root.iter_mut().find(|(a, _)| *a == root) {
            Some((_, n)) => *n += mult,
            None => by_root.push((root, mult)),
        }
    }
    ModulusSpec::new(ctx.clone(), by_root)
}
