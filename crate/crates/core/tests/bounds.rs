use busmesh::kernel::{choose_segment_lengths, eval_bound, level_term, wire_budget};
use busmesh::mmpb::{BusModel, MmpbConfig};
use proptest::prelude::*;

proptest! {
    #[test]
    fn wire_budget_in_both_models(e in 3u32..=16, levels in 1usize..=20) {
        let n = 1usize << e;
        let bit = wire_budget(n, levels, BusModel::Bit);
        prop_assert_eq!(bit.available, e as usize);
        prop_assert_eq!(bit.feasible, levels <= e as usize);
        let word = wire_budget(n, levels, BusModel::Word);
        prop_assert_eq!(word.required, levels * e as usize);
        prop_assert_eq!(word.feasible, levels == 1);
    }

    #[test]
    fn scheduled_lengths_form_a_valid_chain(e in 3u32..=16, levels in 1usize..=16) {
        let n = 1usize << e;
        let got = choose_segment_lengths(n, levels);
        if levels > e as usize {
            prop_assert!(got.is_err());
        } else {
            let lengths = got.unwrap();
            prop_assert_eq!(lengths.len(), levels);
            prop_assert!(lengths.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(lengths.iter().all(|l| l.is_power_of_two() && *l >= 2 && *l <= n));
            prop_assert!(MmpbConfig::new(n, lengths.clone()).is_ok());
            let b = eval_bound(n, &lengths, levels);
            prop_assert!(b.is_finite() && b > 0.0);
            // Within a constant of the L·n^(1/(2L+1)) target.
            prop_assert!(b <= 6.0 * level_term(n, levels) + levels as f64);
        }
    }
}
