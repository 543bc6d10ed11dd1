//! Order and gap sequences at the ramified finite primes.
//!
//! For a prime-power modulus P^n the valuations at the totally ramified
//! prime of the canonical basis elements are pairwise distinct, so they
//! form the order sequence there; gaps are orders shifted by one. For
//! composite moduli the analogous valuation multiset is reported with a
//! caveat flag: values may repeat and the multiset is not claimed to be
//! the order sequence.

use crate::differentials::{enumerate_basis, genus, mono_valuations};
use crate::poly::ModulusSpec;
use crate::{Error, Limits, Result};

/// Strictly increasing valuations of the basis at the totally ramified
/// prime of a prime-power modulus; length equals the genus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderSequence {
    pub orders: Vec<i64>,
}

impl OrderSequence {
    /// Gap sequence under the `gap = order + 1` convention.
    pub fn gaps(&self) -> Vec<i64> {
        self.orders.iter().map(|o| o + 1).collect()
    }
}

/// Order sequence at the unique ramified finite prime of M = P^n, n >= 2.
pub fn order_sequence(spec: &ModulusSpec, limits: &Limits) -> Result<OrderSequence> {
    assert_eq!(spec.num_primes(), 1, "order sequence requires M = P^n");
    let g = genus(spec)?;
    assert!(g >= 1, "order sequence requires genus >= 1");
    let basis = enumerate_basis(spec, 0, limits)?;
    let mut orders: Vec<i64> = basis
        .iter()
        .map(|t| mono_valuations(&t.materialize(spec, 0), spec).finite[0])
        .collect();
    orders.sort_unstable();
    for w in orders.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InternalInvariant(format!(
                "repeated order {} at the totally ramified prime",
                w[0]
            )));
        }
    }
    Ok(OrderSequence { orders })
}

/// Gap sequence at the totally ramified prime of M = P^n.
pub fn gap_sequence(spec: &ModulusSpec, limits: &Limits) -> Result<Vec<i64>> {
    Ok(order_sequence(spec, limits)?.gaps())
}

/// Valuations at prime `anchor` of the anchored basis, as a sorted multiset.
///
/// The caveat flag is set for composite moduli: values there need not be
/// distinct and the multiset is not asserted to be an order sequence.
pub fn valuation_multiset(
    spec: &ModulusSpec,
    anchor: usize,
    limits: &Limits,
) -> Result<(Vec<i64>, bool)> {
    let basis = enumerate_basis(spec, anchor, limits)?;
    let mut vals: Vec<i64> = basis
        .iter()
        .map(|t| mono_valuations(&t.materialize(spec, anchor), spec).finite[anchor])
        .collect();
    vals.sort_unstable();
    Ok((vals, spec.num_primes() > 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_modulus;
    use crate::FieldCtx;

    fn spec(q: u64, m: &str) -> ModulusSpec {
        let ctx = match q {
            4 => FieldCtx::new(2, 2).unwrap(),
            _ => FieldCtx::new(q, 1).unwrap(),
        };
        parse_modulus(&ctx, m).unwrap()
    }

    #[test]
    fn order_sequence_examples() {
        let limits = Limits::default();
        let s = order_sequence(&spec(3, "0^2"), &limits).unwrap();
        assert_eq!(s.orders, vec![0]);
        assert_eq!(s.gaps(), vec![1]);

        let s = order_sequence(&spec(4, "0^2"), &limits).unwrap();
        assert_eq!(s.orders, vec![0, 1, 4]);
        assert_eq!(s.gaps(), vec![1, 2, 5]);

        let s = order_sequence(&spec(3, "0^3"), &limits).unwrap();
        assert_eq!(s.orders, vec![0, 1, 2, 3, 4, 6, 9, 10, 12, 18]);
        assert_eq!(s.gaps(), vec![1, 2, 3, 4, 5, 7, 10, 11, 13, 19]);
    }

    #[test]
    fn order_sequence_matches_genus_and_starts_at_zero() {
        let limits = Limits::default();
        for (q, m) in [(3, "0^2"), (3, "0^3"), (4, "0^2"), (5, "0^2"), (5, "1^3")] {
            let s = spec(q, m);
            let seq = order_sequence(&s, &limits).unwrap();
            assert_eq!(seq.orders.len() as u64, genus(&s).unwrap());
            assert_eq!(seq.orders[0], 0);
        }
    }

    #[test]
    fn valuation_multiset_examples() {
        let limits = Limits::default();
        let (vals, caveat) = valuation_multiset(&spec(3, "0^2"), 0, &limits).unwrap();
        assert_eq!(vals, vec![0]);
        assert!(!caveat);

        // 9 + 6 mu_0 - 3 mu_{1,1} + mu_{1,2} over the four basis tuples;
        // the tuples (3,0;0) and (3,0;1) share their prime-1 data, so the
        // value 0 repeats (which is what the caveat flag is about).
        let (vals, caveat) = valuation_multiset(&spec(3, "0^2,1^1"), 0, &limits).unwrap();
        assert_eq!(vals, vec![0, 0, 1, 3]);
        assert!(caveat);

        let (vals, caveat) = valuation_multiset(&spec(5, "0^1,1^1"), 1, &limits).unwrap();
        assert_eq!(vals, vec![0, 0, 1]);
        assert!(caveat);
    }
}
