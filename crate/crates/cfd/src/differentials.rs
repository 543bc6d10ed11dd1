//! Holomorphic differentials: valuations, the canonical basis, and counting.
//!
//! Monomial differentials are built from the torsion generators of
//! [`crate::lambda`]. Their exact valuations at the finite ramified primes
//! and a certified lower bound at the infinite primes come from
//!
//! ```text
//!   v_{P_i}(l_{i,k}) = q^(n_i - k)        v_{P_i}(dT) = s_i
//!   v_{P_i}(P_i)    = q^(n_i - 1)(q - 1)  s_i = n_i q^(n_i) - (n_i + 1) q^(n_i - 1)
//!   v_inf(l_{i,1})  = -1 exactly          v_inf(l_{i,k}) >= -1 for k >= 2
//!   v_inf(dT)       = -q                  v_inf(P_i) = -(q - 1)
//! ```
//!
//! The canonical basis anchored at prime i is the set of exponent tuples
//! (mu_0; mu_{j,k}) satisfying
//!
//! ```text
//!   s_i + q^(n_i-1)(q-1) mu_0 - q^(n_i-1) mu_{i,1} + sum_k q^(n_i-k) mu_{i,k} >= 0
//!   s_j - q^(n_j-1) mu_{j,1} + sum_k q^(n_j-k) mu_{j,k} >= 0            (j != i)
//!   sum_j mu_{j,1} - (q-1) mu_0 - sum_{j,k>=2} mu_{j,k} - q >= 0
//!   mu_0 >= 0,   (n_j-1)(q-1) <= mu_{j,1} <= n_j q - (n_j+1),   0 <= mu_{j,k} <= q-1
//! ```
//!
//! and its cardinality equals the genus. The generator set drops mu_0 and
//! the window lower bounds. [`count_via_series`] reproduces the cardinality
//! without enumeration by convolving one Laurent series of exponent choices
//! per prime and folding against the infinity inequality.

use crate::lambda::LambdaMonomial;
use crate::poly::ModulusSpec;
use crate::{Error, Limits, Result};
use std::collections::BTreeMap;

/// The integer data (mu_0; mu_{j,k}) of a monomial differential.
///
/// `mu[j][0]` is mu_{j,1}, the *negated* exponent of l_{j,1}; entries at
/// k >= 2 are the plain exponents. `mu0` is the power of the anchor prime
/// in the coefficient.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExponentTuple {
    pub mu0: i64,
    pub mu: Vec<Vec<i64>>,
}

impl ExponentTuple {
    /// The monomial differential this tuple denotes, anchored at `anchor`.
    pub fn materialize(&self, spec: &ModulusSpec, anchor: usize) -> LambdaMonomial {
        let mut m = LambdaMonomial::constant(spec, spec.field().one(), true);
        m.shape.prime_powers[anchor] = self.mu0;
        for (j, mus) in self.mu.iter().enumerate() {
            m.set_exponent(j, 1, -mus[0]);
            for (idx, &v) in mus.iter().enumerate().skip(1) {
                m.set_exponent(j, idx + 1, v);
            }
        }
        m
    }
}

/// Exact finite valuations (one per prime) plus a certified lower bound at
/// every prime above infinity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuationReport {
    pub finite: Vec<i64>,
    pub infinity_bound: i64,
}

/// Different exponent of the totally ramified prime over P_i.
pub fn ramification_exponent(spec: &ModulusSpec, i: usize) -> i64 {
    let q = spec.q() as i64;
    let n = spec.multiplicity(i) as u32;
    n as i64 * q.pow(n) - (n as i64 + 1) * q.pow(n - 1)
}

/// Degree of the different of the extension over F_q(T): each finite
/// ramified prime contributes its wild exponent s_i over phi(M)/phi(P_i^n_i)
/// degree-one primes, and infinity contributes the tame exponent q-2 over
/// phi(M)/(q-1) primes.
pub fn different_degree(spec: &ModulusSpec) -> Result<u128> {
    let phi = spec.euler_phi()?;
    let q = spec.q() as u128;
    let mut total: u128 = 0;
    for i in 0..spec.num_primes() {
        // s_i checked in u128: the i64 fast path is only safe after genus
        // limits have been applied
        let n = spec.multiplicity(i) as u32;
        let s = q
            .checked_pow(n - 1)
            .and_then(|qn1| qn1.checked_mul(n as u128 * q))
            .and_then(|a| a.checked_sub(q.pow(n - 1) * (n as u128 + 1)))
            .ok_or_else(|| Error::SizeLimit("ramification exponent overflow".into()))?;
        let primes_above = phi / spec.phi_at(i)?;
        total = primes_above
            .checked_mul(s)
            .and_then(|v| total.checked_add(v))
            .ok_or_else(|| Error::SizeLimit("different degree overflow".into()))?;
    }
    let inf = (phi / (q - 1))
        .checked_mul(q - 2)
        .ok_or_else(|| Error::SizeLimit("different degree overflow".into()))?;
    total
        .checked_add(inf)
        .ok_or_else(|| Error::SizeLimit("different degree overflow".into()))
}

/// Genus by Riemann-Hurwitz over the rational base field:
/// g = 1 - phi(M) + deg(different)/2.
pub fn genus(spec: &ModulusSpec) -> Result<u64> {
    let d = different_degree(spec)?;
    if d % 2 != 0 {
        return Err(Error::InternalInvariant(
            "different degree must be even".into(),
        ));
    }
    let phi = spec.euler_phi()?;
    let g = (1 + d / 2)
        .checked_sub(phi)
        .ok_or_else(|| Error::InternalInvariant("negative genus".into()))?;
    u64::try_from(g).map_err(|_| Error::SizeLimit("genus exceeds u64".into()))
}

/// Exact valuations of a monomial at the finite ramified primes and the
/// certified infinity bound. Generators of foreign primes are units at P_i,
/// so only the i-components contribute at P_i.
pub fn mono_valuations(m: &LambdaMonomial, spec: &ModulusSpec) -> ValuationReport {
    let q = spec.q() as i64;
    let dt = if m.has_dt() { 1 } else { 0 };
    let mut finite = Vec::with_capacity(spec.num_primes());
    for i in 0..spec.num_primes() {
        let n = spec.multiplicity(i) as u32;
        let mut v = dt * ramification_exponent(spec, i);
        v += q.pow(n - 1) * (q - 1) * m.prime_power(i);
        for k in 1..=n as usize {
            v += q.pow(n - k as u32) * m.exponent(i, k);
        }
        finite.push(v);
    }
    let mut inf = -dt * q;
    for i in 0..spec.num_primes() {
        inf -= (q - 1) * m.prime_power(i);
        inf -= m.exponent(i, 1);
        for k in 2..=spec.multiplicity(i) {
            inf -= m.exponent(i, k).max(0);
        }
    }
    ValuationReport {
        finite,
        infinity_bound: inf,
    }
}

/// Sufficient condition for holomorphy: all finite valuations and the
/// certified infinity bound are nonnegative.
pub fn certified_holomorphic(m: &LambdaMonomial, spec: &ModulusSpec) -> bool {
    let rep = mono_valuations(m, spec);
    rep.finite.iter().all(|&v| v >= 0) && rep.infinity_bound >= 0
}

/// Upper window bound n_j q - (n_j + 1) for mu_{j,1}.
fn window_hi(spec: &ModulusSpec, j: usize) -> i64 {
    let q = spec.q() as i64;
    let n = spec.multiplicity(j) as i64;
    n * q - (n + 1)
}

/// Lower window bound (n_j - 1)(q - 1) for mu_{j,1}.
fn window_lo(spec: &ModulusSpec, j: usize) -> i64 {
    let q = spec.q() as i64;
    let n = spec.multiplicity(j) as i64;
    (n - 1) * (q - 1)
}

fn infinity_degree(spec: &ModulusSpec, t: &ExponentTuple) -> i64 {
    let q = spec.q() as i64;
    let mut w = -(q - 1) * t.mu0;
    for mus in &t.mu {
        w += mus[0];
        for &v in &mus[1..] {
            w -= v;
        }
    }
    w
}

fn prime_slack(spec: &ModulusSpec, anchor: Option<usize>, t: &ExponentTuple, j: usize) -> i64 {
    let q = spec.q() as i64;
    let n = spec.multiplicity(j) as u32;
    let mut v = ramification_exponent(spec, j);
    if anchor == Some(j) {
        v += q.pow(n - 1) * (q - 1) * t.mu0;
    }
    v -= q.pow(n - 1) * t.mu[j][0];
    for (idx, &mv) in t.mu[j].iter().enumerate().skip(1) {
        v += q.pow(n - 1 - idx as u32) * mv;
    }
    v
}

fn in_basis_system(spec: &ModulusSpec, anchor: usize, t: &ExponentTuple) -> bool {
    let q = spec.q() as i64;
    if t.mu0 < 0 {
        return false;
    }
    for j in 0..spec.num_primes() {
        if t.mu[j][0] < window_lo(spec, j) || t.mu[j][0] > window_hi(spec, j) {
            return false;
        }
        if t.mu[j][1..].iter().any(|&v| !(0..=q - 1).contains(&v)) {
            return false;
        }
        if prime_slack(spec, Some(anchor), t, j) < 0 {
            return false;
        }
    }
    infinity_degree(spec, t) >= q
}

fn in_generator_system(spec: &ModulusSpec, t: &ExponentTuple) -> bool {
    let q = spec.q() as i64;
    if t.mu0 != 0 {
        return false;
    }
    for j in 0..spec.num_primes() {
        if t.mu[j][0] > window_hi(spec, j) {
            return false;
        }
        if t.mu[j][1..].iter().any(|&v| !(0..=q - 1).contains(&v)) {
            return false;
        }
        if prime_slack(spec, None, t, j) < 0 {
            return false;
        }
    }
    infinity_degree(spec, t) >= q
}

/// Iterate all integer points of a box in ascending lexicographic order.
fn scan_box(ranges: &[(i64, i64)], mut f: impl FnMut(&[i64])) {
    if ranges.iter().any(|(lo, hi)| lo > hi) {
        return;
    }
    let mut cur: Vec<i64> = ranges.iter().map(|(lo, _)| *lo).collect();
    loop {
        f(&cur);
        let mut pos = ranges.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            cur[pos] += 1;
            if cur[pos] <= ranges[pos].1 {
                break;
            }
            cur[pos] = ranges[pos].0;
        }
    }
}

fn tuple_from_flat(spec: &ModulusSpec, mu0: i64, flat: &[i64]) -> ExponentTuple {
    let mut mu = Vec::with_capacity(spec.num_primes());
    let mut pos = 0;
    for j in 0..spec.num_primes() {
        let n = spec.multiplicity(j);
        mu.push(flat[pos..pos + n].to_vec());
        pos += n;
    }
    ExponentTuple { mu0, mu }
}

fn check_genus_limit(spec: &ModulusSpec, limits: &Limits) -> Result<u64> {
    let g = genus(spec)?;
    if g > limits.max_genus {
        return Err(Error::SizeLimit(format!(
            "genus {g} exceeds max_genus {}",
            limits.max_genus
        )));
    }
    Ok(g)
}

/// All basis tuples anchored at `anchor`, in lexicographic order by
/// (mu_0, mu_{1,1}, mu_{1,2}, ...). Empty exactly when the genus is zero.
pub fn enumerate_basis(
    spec: &ModulusSpec,
    anchor: usize,
    limits: &Limits,
) -> Result<Vec<ExponentTuple>> {
    assert!(anchor < spec.num_primes(), "anchor out of range");
    check_genus_limit(spec, limits)?;
    let q = spec.q() as i64;
    // The infinity inequality forces (q-1) mu_0 <= sum_j mu_{j,1}.
    let mu0_max = (0..spec.num_primes())
        .map(|j| window_hi(spec, j))
        .sum::<i64>()
        / (q - 1);
    let mut ranges = Vec::new();
    for j in 0..spec.num_primes() {
        ranges.push((window_lo(spec, j), window_hi(spec, j)));
        for _ in 2..=spec.multiplicity(j) {
            ranges.push((0, q - 1));
        }
    }
    let mut out = Vec::new();
    for mu0 in 0..=mu0_max.max(0) {
        scan_box(&ranges, |flat| {
            let t = tuple_from_flat(spec, mu0, flat);
            if in_basis_system(spec, anchor, &t) {
                out.push(t);
            }
        });
    }
    Ok(out)
}

/// All generator tuples (no mu_0, no window lower bounds), in lexicographic
/// order by (mu_{1,1}, mu_{1,2}, ...). Contains the mu_0-folded image of
/// every basis tuple at every anchor.
pub fn enumerate_generators(spec: &ModulusSpec, limits: &Limits) -> Result<Vec<ExponentTuple>> {
    check_genus_limit(spec, limits)?;
    let q = spec.q() as i64;
    let hi_sum: i64 = (0..spec.num_primes()).map(|j| window_hi(spec, j)).sum();
    let mut ranges = Vec::new();
    for j in 0..spec.num_primes() {
        // mu_{j,1} is bounded below only through the infinity inequality.
        let lo = q - (hi_sum - window_hi(spec, j));
        ranges.push((lo.min(window_hi(spec, j)), window_hi(spec, j)));
        for _ in 2..=spec.multiplicity(j) {
            ranges.push((0, q - 1));
        }
    }
    let mut out = Vec::new();
    scan_box(&ranges, |flat| {
        let t = tuple_from_flat(spec, 0, flat);
        if in_generator_system(spec, &t) {
            out.push(t);
        }
    });
    Ok(out)
}

/// Fold the anchor coordinate of a basis tuple through mu_0, giving the
/// generator-set representative of the same differential (up to sign).
pub fn fold_mu0(t: &ExponentTuple, anchor: usize, q: i64) -> ExponentTuple {
    let mut folded = t.clone();
    folded.mu[anchor][0] -= (q - 1) * t.mu0;
    folded.mu0 = 0;
    folded
}

/// Finitely supported integer Laurent series; the generating function of
/// one prime's local exponent choices, graded by pole order at infinity.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CountSeries {
    coeffs: BTreeMap<i64, u128>,
}

impl CountSeries {
    pub fn one() -> CountSeries {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0, 1);
        CountSeries { coeffs }
    }

    /// `x^shift (1 + x + ... + x^(width-1))`
    fn window(shift: i64, width: i64) -> CountSeries {
        let mut coeffs = BTreeMap::new();
        for d in 0..width {
            coeffs.insert(shift + d, 1);
        }
        CountSeries { coeffs }
    }

    pub fn coeff(&self, m: i64) -> u128 {
        self.coeffs.get(&m).copied().unwrap_or(0)
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, u128> {
        &self.coeffs
    }

    pub fn convolve(&self, other: &CountSeries) -> CountSeries {
        let mut coeffs = BTreeMap::new();
        for (&i, &a) in &self.coeffs {
            for (&j, &b) in &other.coeffs {
                *coeffs.entry(i + j).or_insert(0) += a * b;
            }
        }
        coeffs.retain(|_, v| *v != 0);
        CountSeries { coeffs }
    }

    /// Sum of coefficients a_m with m <= bound.
    pub fn cumulative_up_to(&self, bound: i64) -> u128 {
        self.coeffs.range(..=bound).map(|(_, &v)| v).sum()
    }

    pub fn min_support(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    /// Choices of (mu_{j,1}, ..., mu_{j,n_j}) for a non-anchored prime,
    /// graded by m = -mu_{j,1} + sum_{k>=2} mu_{j,k}:
    /// `x^-(n q - (n+1)) (1 + ... + x^(q-2)) (1 + ... + x^(q-1))^(n-1)`.
    pub fn local_choices(spec: &ModulusSpec, j: usize) -> CountSeries {
        let q = spec.q() as i64;
        let mut s = CountSeries::window(-window_hi(spec, j), q - 1);
        for _ in 2..=spec.multiplicity(j) {
            s = s.convolve(&CountSeries::window(0, q));
        }
        s
    }
}

/// Basis cardinality computed purely from generating series: convolve the
/// per-prime choice series, fold the non-anchored product against the
/// infinity inequality, and pair with the window-folded anchor counts.
pub fn count_via_series(spec: &ModulusSpec, anchor: usize) -> Result<u128> {
    assert!(anchor < spec.num_primes(), "anchor out of range");
    let q = spec.q() as i64;
    // Anchor side: mu_0-folding turns (mu_0 >= 0, windowed mu_{i,1}) into a
    // single coordinate bounded above by the window top, so the number of
    // anchored choices with infinity degree k is the cumulative box count.
    let mut anchored_box = CountSeries::one();
    for _ in 2..=spec.multiplicity(anchor) {
        anchored_box = anchored_box.convolve(&CountSeries::window(0, q));
    }
    let u_anchor = window_hi(spec, anchor);
    let anchored_count = |k: i64| -> u128 { anchored_box.cumulative_up_to(u_anchor - k) };

    // Non-anchored side: product over primes of per-prime series.
    let mut rest = CountSeries::one();
    for j in 0..spec.num_primes() {
        if j != anchor {
            rest = rest.convolve(&CountSeries::local_choices(spec, j));
        }
    }
    let k_min = q + rest.min_support().unwrap_or(0);
    let mut total: u128 = 0;
    for k in k_min..=u_anchor {
        let nu = rest.cumulative_up_to(k - q);
        if nu == 0 {
            continue;
        }
        total += anchored_count(k) * nu;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_modulus;
    use crate::FieldCtx;

    fn spec(q: u64, m: &str) -> ModulusSpec {
        let ctx = match q {
            4 => FieldCtx::new(2, 2).unwrap(),
            8 => FieldCtx::new(2, 3).unwrap(),
            9 => FieldCtx::new(3, 2).unwrap(),
            _ => FieldCtx::new(q, 1).unwrap(),
        };
        parse_modulus(&ctx, m).unwrap()
    }

    #[test]
    fn different_degree_examples() {
        assert_eq!(different_degree(&spec(3, "0^2")).unwrap(), 12);
        assert_eq!(different_degree(&spec(5, "0^1,1^1")).unwrap(), 36);
        assert_eq!(different_degree(&spec(3, "0^1")).unwrap(), 2);
    }

    #[test]
    fn genus_examples() {
        assert_eq!(genus(&spec(5, "0^1,1^1")).unwrap(), 3);
        assert_eq!(genus(&spec(3, "0^2")).unwrap(), 1);
        assert_eq!(genus(&spec(3, "0^1")).unwrap(), 0);
        assert_eq!(genus(&spec(3, "0^2,1^1")).unwrap(), 4);
    }

    fn tuple(mu0: i64, mu: &[&[i64]]) -> ExponentTuple {
        ExponentTuple {
            mu0,
            mu: mu.iter().map(|m| m.to_vec()).collect(),
        }
    }

    #[test]
    fn valuation_examples() {
        // q=3, M=T^2: l_{1,1}^-3 dT has P-valuation 0 and infinity bound 0.
        let s = spec(3, "0^2");
        let m = tuple(0, &[&[3, 0]]).materialize(&s, 0);
        let rep = mono_valuations(&m, &s);
        assert_eq!(rep.finite, vec![0]);
        assert_eq!(rep.infinity_bound, 0);
        assert!(certified_holomorphic(&m, &s));

        // dT alone: P-valuation 9, infinity bound -3.
        let m = tuple(0, &[&[0, 0]]).materialize(&s, 0);
        let rep = mono_valuations(&m, &s);
        assert_eq!(rep.finite, vec![9]);
        assert_eq!(rep.infinity_bound, -3);
        assert!(!certified_holomorphic(&m, &s));

        // q=3, M=T(T-1): l_{1,1} dT (positive exponent).
        let s = spec(3, "0^1,1^1");
        let m = tuple(0, &[&[-1], &[0]]).materialize(&s, 0);
        let rep = mono_valuations(&m, &s);
        assert_eq!(rep.finite, vec![2, 1]);
        assert_eq!(rep.infinity_bound, -4);

        // q=5, M=T: l_{1,1}^-5 dT fails at the finite prime.
        let s = spec(5, "0^1");
        let m = tuple(0, &[&[5]]).materialize(&s, 0);
        assert!(!certified_holomorphic(&m, &s));
        assert_eq!(mono_valuations(&m, &s).finite, vec![-2]);
    }

    #[test]
    fn basis_enumeration_examples() {
        let limits = Limits::default();

        let s = spec(5, "0^1,1^1");
        let b = enumerate_basis(&s, 0, &limits).unwrap();
        assert_eq!(
            b,
            vec![
                tuple(0, &[&[2], &[3]]),
                tuple(0, &[&[3], &[2]]),
                tuple(0, &[&[3], &[3]]),
            ]
        );

        let s = spec(3, "0^3");
        let b = enumerate_basis(&s, 0, &limits).unwrap();
        assert_eq!(b.len(), 10);
        let with_mu0: Vec<&ExponentTuple> = b.iter().filter(|t| t.mu0 > 0).collect();
        assert_eq!(with_mu0, vec![&tuple(1, &[&[5, 0, 0]])]);

        let s = spec(3, "0^1,1^1");
        assert!(enumerate_basis(&s, 0, &limits).unwrap().is_empty());

        let s = spec(3, "0^2,1^1");
        let b = enumerate_basis(&s, 0, &limits).unwrap();
        let expected: Vec<ExponentTuple> = vec![
            tuple(0, &[&[2, 0], &[1]]),
            tuple(0, &[&[3, 0], &[0]]),
            tuple(0, &[&[3, 0], &[1]]),
            tuple(0, &[&[3, 1], &[1]]),
        ];
        assert_eq!(b, expected);
    }

    #[test]
    fn generator_enumeration_examples() {
        let limits = Limits::default();

        let s = spec(3, "0^2");
        let v = enumerate_generators(&s, &limits).unwrap();
        assert_eq!(v, vec![tuple(0, &[&[3, 0]])]);

        let s = spec(3, "0^3");
        let v = enumerate_generators(&s, &limits).unwrap();
        assert_eq!(v.len(), 10);
        for t in &v {
            assert!((3..=5).contains(&t.mu[0][0]));
        }
        let by_mu1 = |m: i64| v.iter().filter(|t| t.mu[0][0] == m).count();
        assert_eq!((by_mu1(3), by_mu1(4), by_mu1(5)), (1, 3, 6));

        let s = spec(5, "0^1,1^1");
        let v = enumerate_generators(&s, &limits).unwrap();
        let b = enumerate_basis(&s, 0, &limits).unwrap();
        assert_eq!(v, b);
    }

    #[test]
    fn generators_contain_folded_basis() {
        let limits = Limits::default();
        for (q, m) in [
            (3, "0^2"),
            (3, "0^3"),
            (3, "0^2,1^1"),
            (3, "0^1,1^1,2^1"),
            (4, "0^2,1^1"),
            (5, "0^2"),
        ] {
            let s = spec(q, m);
            let gens = enumerate_generators(&s, &limits).unwrap();
            for anchor in 0..s.num_primes() {
                for t in enumerate_basis(&s, anchor, &limits).unwrap() {
                    let folded = fold_mu0(&t, anchor, q as i64);
                    assert!(gens.contains(&folded), "missing fold of {t:?}");
                }
            }
        }
    }

    #[test]
    fn count_series_examples() {
        assert_eq!(count_via_series(&spec(3, "0^3"), 0).unwrap(), 10);
        assert_eq!(count_via_series(&spec(5, "0^1,1^1"), 0).unwrap(), 3);
        assert_eq!(count_via_series(&spec(4, "0^2"), 0).unwrap(), 3);
    }

    #[test]
    fn cardinality_equals_genus_small() {
        let limits = Limits {
            max_genus: 4096,
            max_units: 4096,
        };
        for q in [3u64, 4, 5] {
            for m in ["0^1", "0^2", "0^3", "0^1,1^1", "0^2,1^1", "0^1,1^1,2^1"] {
                let s = spec(q, m);
                let g = genus(&s).unwrap() as usize;
                for anchor in 0..s.num_primes() {
                    let b = enumerate_basis(&s, anchor, &limits).unwrap();
                    assert_eq!(b.len(), g, "q={q} m={m} anchor={anchor}");
                    assert_eq!(
                        count_via_series(&s, anchor).unwrap(),
                        g as u128,
                        "series disagrees for q={q} m={m} anchor={anchor}"
                    );
                }
            }
        }
    }

    #[test]
    fn basis_tuples_are_certified() {
        let limits = Limits::default();
        for (q, m) in [(3, "0^3"), (3, "0^2,1^1"), (4, "0^2"), (5, "0^1,1^1")] {
            let s = spec(q, m);
            for anchor in 0..s.num_primes() {
                for t in enumerate_basis(&s, anchor, &limits).unwrap() {
                    assert!(certified_holomorphic(&t.materialize(&s, anchor), &s));
                }
            }
        }
    }

    #[test]
    fn square_free_system_degenerates() {
        // For square-free M the basis system collapses to
        //   mu_0 >= 0, 0 <= mu_j <= q-2, sum mu_j - (q-1) mu_0 >= q,
        // independently of the anchor.
        let limits = Limits::default();
        let cases: &[(u64, &str)] = &[
            (3, "0^1,1^1"),
            (3, "0^1,1^1,2^1"),
            (4, "0^1,1^1"),
            (4, "0^1,1^1,g^1"),
            (5, "0^1,1^1"),
            (5, "0^1,1^1,2^1"),
        ];
        for &(q, m) in cases {
            let s = spec(q, m);
            let r = s.num_primes();
            let qi = q as i64;
            let mut expected = Vec::new();
            let hi_sum = (qi - 2) * r as i64;
            for mu0 in 0..=(hi_sum / (qi - 1)) {
                let ranges: Vec<(i64, i64)> = vec![(0, qi - 2); r];
                scan_box(&ranges, |flat| {
                    let total: i64 = flat.iter().sum();
                    if total - (qi - 1) * mu0 >= qi {
                        expected.push(tuple(
                            mu0,
                            &flat.iter().map(std::slice::from_ref).collect::<Vec<_>>(),
                        ));
                    }
                });
            }
            expected.sort();
            for anchor in 0..r {
                let mut b = enumerate_basis(&s, anchor, &limits).unwrap();
                b.sort();
                assert_eq!(b, expected, "q={q} m={m} anchor={anchor}");
            }
        }
    }

    #[test]
    fn prime_power_basis_valuations_distinct() {
        let limits = Limits::default();
        for (q, m) in [(3, "0^2"), (3, "0^3"), (4, "0^2"), (5, "0^2")] {
            let s = spec(q, m);
            let b = enumerate_basis(&s, 0, &limits).unwrap();
            let mut vals: Vec<i64> = b
                .iter()
                .map(|t| mono_valuations(&t.materialize(&s, 0), &s).finite[0])
                .collect();
            let before = vals.len();
            vals.sort();
            vals.dedup();
            assert_eq!(vals.len(), before);
        }
    }

    #[test]
    fn genus_limit_is_enforced() {
        let s = spec(5, "0^4");
        let limits = Limits::default(); // max_genus 512 < 626
        assert!(matches!(
            enumerate_basis(&s, 0, &limits),
            Err(Error::SizeLimit(_))
        ));
        let wide = Limits {
            max_genus: 4096,
            max_units: 4096,
        };
        let b = enumerate_basis(&s, 0, &wide).unwrap();
        assert_eq!(b.len() as u64, genus(&s).unwrap());
    }
}
