//! Property tests for the ring layer: quotient-ring axioms, the division
//! round trip, and valuation superadditivity.

use proptest::prelude::*;
use prismkit::ring::{val, Element, Ring, RingSpec, Val};

fn ring_for(case: u8) -> Ring {
    match case % 3 {
        0 => Ring::new(RingSpec::zp(2, 6)).unwrap(),
        1 => Ring::new(RingSpec::with_u(3, 4, 5)).unwrap(),
        _ => Ring::new(RingSpec::with_q(2, 5, 0, 6)).unwrap(),
    }
}

fn element_strategy(case: u8) -> impl Strategy<Value = Element> {
    let ring = ring_for(case);
    let dim = ring.dim();
    let modulus = ring.modulus();
    proptest::collection::vec(0..modulus, dim).prop_map(move |v| {
        ring.element_from_vec(&v, ring.precision())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn ring_axioms(case in 0u8..3, seed in proptest::array::uniform3(0u64..1 << 30)) {
        let ring = ring_for(case);
        let dim = ring.dim();
        let mk = |s: u64| {
            let v: Vec<u64> = (0..dim).map(|i| (s.wrapping_mul(i as u64 * 2 + 3)) % ring.modulus()).collect();
            ring.element_from_vec(&v, ring.precision())
        };
        let (a, b, c) = (mk(seed[0]), mk(seed[1]), mk(seed[2]));

        // associativity and commutativity
        prop_assert_eq!(
            a.add(&b).unwrap().add(&c).unwrap(),
            a.add(&b.add(&c).unwrap()).unwrap()
        );
        prop_assert_eq!(
            a.mul(&b).unwrap().mul(&c).unwrap(),
            a.mul(&b.mul(&c).unwrap()).unwrap()
        );
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());

        // distributivity
        prop_assert_eq!(
            a.mul(&b.add(&c).unwrap()).unwrap(),
            a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn division_recovers_products(case in 0u8..3, b in (0u8..3).prop_flat_map(element_strategy), c in (0u8..3).prop_flat_map(element_strategy)) {
        // regenerate b, c in the same ring as the case
        let ring = ring_for(case);
        let b = ring.element_from_vec(&resize(&b, ring.dim(), ring.modulus()), ring.precision());
        let c = ring.element_from_vec(&resize(&c, ring.dim(), ring.modulus()), ring.precision());
        if b.is_zero() {
            return Ok(());
        }
        let prod = b.mul(&c).unwrap();
        match prod.div_exact(&b) {
            Ok(q) => prop_assert_eq!(b.mul(&q).unwrap(), prod),
            Err(prismkit::error::Error::PrecisionExhausted) => {}
            Err(e) => prop_assert!(false, "division of a product failed: {:?}", e),
        }
    }

    #[test]
    fn val_is_superadditive(case in 0u8..3, a in (0u8..3).prop_flat_map(element_strategy), b in (0u8..3).prop_flat_map(element_strategy)) {
        let ring = ring_for(case);
        let a = ring.element_from_vec(&resize(&a, ring.dim(), ring.modulus()), ring.precision());
        let b = ring.element_from_vec(&resize(&b, ring.dim(), ring.modulus()), ring.precision());
        let p = ring.from_int(ring.p() as i64);
        let mut gens = vec![p];
        if let Ok(u) = ring.var_u() {
            gens.push(u);
        }
        if let Ok(t) = ring.var_t() {
            gens.push(t);
        }
        let cap = ring.val_cap();
        let va = val(&a, &gens, cap);
        let vb = val(&b, &gens, cap);
        let vab = val(&a.mul(&b).unwrap(), &gens, cap);
        let lhs = match vab {
            Val::Exact(k) => k,
            Val::AtLeastCap(c) => c,
        };
        let sum = (va.level() + vb.level()).min(cap);
        prop_assert!(
            lhs >= sum || matches!(vab, Val::AtLeastCap(_)),
            "val(ab) = {:?} < val(a) + val(b) = {:?}",
            vab,
            sum
        );
    }
}

fn resize(e: &Element, dim: usize, modulus: u64) -> Vec<u64> {
    let src = e.to_vec();
    (0..dim).map(|i| src.get(i).copied().unwrap_or(1) % modulus).collect()
}
