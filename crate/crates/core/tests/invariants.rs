use proptest::prelude::*;
use szego_core::coulomb::exact_dn_with;
use szego_core::opuc::{run_sequence, zeros_in_disk};
use szego_core::szego_fn::{build_szego, szego_defect};
use szego_core::toeplitz::{log_det_direct, log_det_product, DeterminantLedger, ToeplitzMatrix};
use szego_core::{LaurentSymbol, MomentSequence};

fn small_symbol() -> impl Strategy<Value = LaurentSymbol> {
    prop::collection::vec(-0.4f64..0.4, 1..4).prop_map(|mut v| {
        v.insert(0, 0.0);
        LaurentSymbol::from_real(&v)
    })
}

fn log_det(m: &MomentSequence, n: usize) -> f64 {
    log_det_direct(&ToeplitzMatrix::assemble(m, n).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn routes_agree_and_ledger_is_monotone(s in small_symbol()) {
        let m = s.moments(30).unwrap();
        let states = run_sequence(&m, 30).unwrap();
        for n in [0usize, 5, 12, 20] {
            let d = log_det(&m, n);
            prop_assert!((d - log_det_product(&states[n])).abs() <= 1e-10 * d.abs().max(1.0));
        }
        let ledger = DeterminantLedger::from_state(&states[30], 20).unwrap();
        prop_assert!(ledger.ratios_nonincreasing(1e-12));
        prop_assert!(ledger.g_nondecreasing(1e-12));
        let bound = s.target_sum().1.exp();
        prop_assert!(ledger.rows.iter().all(|r| r.g_n <= bound * (1.0 + 1e-8)));
    }

    #[test]
    fn zeros_stay_inside_the_disk(s in small_symbol()) {
        let m = s.moments(12).unwrap();
        let states = run_sequence(&m, 12).unwrap();
        for st in &states[1..] {
            prop_assert!(zeros_in_disk(st.phi()).unwrap().max_modulus < 1.0);
        }
    }

    #[test]
    fn szego_defect_vanishes(s in small_symbol()) {
        let m = s.moments(40).unwrap();
        let states = run_sequence(&m, 40).unwrap();
        prop_assert!(szego_defect(&states[40], &s).abs() < 1e-10);
    }

    #[test]
    fn coulomb_gas_matches_small_determinants(s in small_symbol()) {
        let m = s.moments(1).unwrap();
        for n in 0..=1 {
            let d = log_det(&m, n).exp();
            let e = exact_dn_with(&s, n, 128).unwrap();
            prop_assert!((e.value - d).abs() <= 1e-8 * d);
        }
    }

    #[test]
    fn kappa_matches_the_exponential_of_the_mean(s in small_symbol(), shift in -1.0f64..1.0) {
        let d = build_szego(&s.with_mean(shift));
        prop_assert!((d.kappa_inf().ln() + shift / 2.0).abs() < 1e-12);
    }
}
