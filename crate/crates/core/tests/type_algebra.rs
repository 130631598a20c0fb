//! Coinductive type algebra on generated closed contractive types.

use mix2cls::gen::Gen;
use mix2cls::translate::translate_type;
use mix2cls::types::{is_un, normalize, type_equiv, unfold, MixedType};
use proptest::prelude::*;

fn translatable(seed: u64) -> (Gen, MixedType) {
    let mut g = Gen::new(seed);
    let t = g.translatable_type(3);
    (g, t)
}

fn types(seed: u64) -> (Gen, MixedType) {
    let mut g = Gen::new(seed);
    let t = g.mixed_type(3);
    (g, t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn subtyping_is_reflexive(seed in any::<u64>()) {
        let (_, t) = types(seed);
        prop_assert!(t.subtype(&t), "{}", t);
    }

    #[test]
    fn subtyping_is_transitive(seed in any::<u64>()) {
        let (mut g, t) = types(seed);
        let s = g.supertype(&t);
        let u = g.supertype(&s);
        prop_assert!(t.subtype(&s) && s.subtype(&u));
        prop_assert!(t.subtype(&u), "{} </= {}", t, u);
        // Also on unrelated triples, where the premise rarely holds.
        let a = g.mixed_type(2);
        let b = g.mixed_type(2);
        if t.subtype(&a) && a.subtype(&b) {
            prop_assert!(t.subtype(&b));
        }
    }

    #[test]
    fn equivalence_is_mutual_subtyping(seed in any::<u64>()) {
        let (mut g, t) = types(seed);
        let others = [g.supertype(&t), normalize(&t), unfold(&t), g.mixed_type(3), t.clone()];
        for s in &others {
            prop_assert_eq!(type_equiv(&t, s), t.subtype(s) && s.subtype(&t), "{} vs {}", t, s);
        }
        prop_assert!(type_equiv(&t, &normalize(&t)));
        prop_assert!(type_equiv(&t, &unfold(&t)));
    }

    #[test]
    fn duality_is_an_involution(seed in any::<u64>()) {
        let (_, t) = types(seed);
        let d = t.dual_of().expect("generated types are session types");
        prop_assert!(t.are_dual(&d), "{} / {}", t, d);
        let dd = d.dual_of().expect("duals are session types");
        prop_assert!(type_equiv(&t, &dd), "{} vs {}", t, dd);
    }

    #[test]
    fn unrestricted_types_stay_unrestricted_when_unfolded(seed in any::<u64>()) {
        let (_, t) = types(seed);
        if is_un(&t) {
            prop_assert!(is_un(&unfold(&t)));
            prop_assert!(is_un(&unfold(&unfold(&t))));
        }
    }

    #[test]
    fn translation_preserves_unrestrictedness(seed in any::<u64>()) {
        let (_, t) = translatable(seed);
        let c = translate_type(&t).expect("closed types translate");
        prop_assert_eq!(is_un(&t), is_un(&c), "{} -> {}", t, c);
        prop_assert!(c.well_formed().is_ok());
    }

    #[test]
    fn translation_preserves_subtyping(seed in any::<u64>()) {
        let (mut g, t) = translatable(seed);
        let s = g.supertype(&t);
        let (ct, cs) = (translate_type(&t).unwrap(), translate_type(&s).unwrap());
        prop_assert!(ct.subtype(&cs), "{} </= {}", ct, cs);
        let other = g.translatable_type(3);
        if t.subtype(&other) {
            prop_assert!(ct.subtype(&translate_type(&other).unwrap()));
        }
    }

    #[test]
    fn classical_algebra_on_translated_types(seed in any::<u64>()) {
        let (_, t) = translatable(seed);
        let c = translate_type(&t).unwrap();
        prop_assert!(c.subtype(&c));
        let d = c.dual_of().expect("translated session types have duals");
        prop_assert!(c.are_dual(&d));
        prop_assert!(type_equiv(&c, &d.dual_of().unwrap()));
        prop_assert!(type_equiv(&c, &normalize(&c)));
    }
}
