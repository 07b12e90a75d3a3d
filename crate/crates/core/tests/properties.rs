use proptest::prelude::*;

use zeroone::config::{complete_independence, two_way_independence};
use zeroone::fiber::{check_strong_crossing, enumerate_zero_one_fiber, DEFAULT_CAP};
use zeroone::graver::{greedy_conformal_decomposition, square_free_graver, square_free_subset};
use zeroone::io;
use zeroone::movegen::basic_moves_two_way;
use zeroone::sampler::random_walk;
use zeroone::{Budget, CellSpace, Move, MoveSet, Provenance, Table};

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..5, 1..5)
}

/// Integer combination of the basic moves of the 3x4 independence model.
fn kernel_3x4() -> impl Strategy<Value = Vec<i64>> {
    let basic = basic_moves_two_way(3, 4).unwrap();
    let k = basic.len();
    prop::collection::vec(-2i64..=2, k).prop_map(move |coef| {
        let mut v = vec![0i64; 12];
        for (z, c) in basic.moves().iter().zip(coef) {
            for &(cell, x) in z.entries() {
                v[cell] += c * x;
            }
        }
        v
    })
}

fn zero_one(n: usize) -> impl Strategy<Value = Table> {
    prop::collection::vec(0i64..=1, n).prop_map(Table::new)
}

proptest! {
    #[test]
    fn linear_index_is_a_bijection(dims in dims_strategy()) {
        let space = CellSpace::new(dims.clone()).unwrap();
        let n: usize = dims.iter().product();
        prop_assert_eq!(space.cell_count(), n);
        for (lin, idx) in space.cells().enumerate() {
            prop_assert_eq!(space.linear_index(&idx).unwrap(), lin);
            prop_assert_eq!(space.multi_index(lin).unwrap(), idx);
        }
    }

    #[test]
    fn equal_statistics_iff_difference_is_a_move(x in zero_one(12), y in zero_one(12)) {
        let cfg = two_way_independence(3, 4).unwrap();
        let same = cfg.sufficient_stat(&x).unwrap() == cfg.sufficient_stat(&y).unwrap();
        let diff: Vec<i64> = x.values.iter().zip(&y.values).map(|(a, b)| a - b).collect();
        let is_move = Move::from_dense(&diff).is_some_and(|z| cfg.is_move(&z));
        prop_assert_eq!(same, is_move || x == y);
    }

    #[test]
    fn lawrence_lift_contains_doubled_kernel(v in kernel_3x4()) {
        prop_assume!(v.iter().any(|&c| c != 0));
        let cfg = two_way_independence(3, 4).unwrap();
        let lift = cfg.lawrence_lift().unwrap();
        prop_assert_eq!(lift.cell_space().dims(), &[2, 3, 4][..]);
        let z = Move::from_dense(&v).unwrap();
        prop_assert!(cfg.is_move(&z));
        let doubled: Vec<i64> = v.iter().copied().chain(v.iter().map(|c| -c)).collect();
        prop_assert!(lift.is_move(&Move::from_dense(&doubled).unwrap()));
        let one_sided: Vec<i64> = v.iter().copied().chain(std::iter::repeat_n(0, 12)).collect();
        prop_assert!(!lift.is_move(&Move::from_dense(&one_sided).unwrap()));
    }

    #[test]
    fn greedy_decomposition_is_conformal(v in kernel_3x4()) {
        prop_assume!(v.iter().any(|&c| c != 0));
        let cfg = two_way_independence(3, 4).unwrap();
        let g = zeroone::graver_basis(&cfg, Budget::default()).unwrap();
        let z = Move::from_dense(&v).unwrap();
        let parts = greedy_conformal_decomposition(&z, &g).expect("Graver basis decomposes every kernel vector");
        let mut sum = vec![0i64; 12];
        for p in &parts {
            prop_assert!(p.conformally_below(&z));
            for &(c, x) in p.entries() {
                sum[c] += x;
            }
        }
        prop_assert_eq!(sum, v);
    }

    #[test]
    fn strong_crossing_witness_reduces_distance(x in zero_one(16), pick in any::<usize>()) {
        let cfg = two_way_independence(4, 4).unwrap();
        let fiber = enumerate_zero_one_fiber(&cfg, &cfg.sufficient_stat(&x).unwrap(), DEFAULT_CAP).unwrap();
        let y = fiber[pick % fiber.len()].clone();
        prop_assume!(y != x);
        let report = check_strong_crossing(&x, &y, &cfg).unwrap();
        if let Some(w) = report.witness {
            prop_assert!(cfg.is_move(&w.z));
            let (from, to) = if w.from_y { (&y, &x) } else { (&x, &y) };
            let moved = from.apply(&w.z, 1).unwrap();
            prop_assert!(moved.values.iter().all(|&v| v >= 0));
            prop_assert!(moved.l1_distance(to) <= from.l1_distance(to) - 2);
        }
    }

    #[test]
    fn random_walk_stays_in_fiber(x in zero_one(9), seed in any::<u64>()) {
        let cfg = two_way_independence(3, 3).unwrap();
        let b = basic_moves_two_way(3, 3).unwrap();
        let key = cfg.sufficient_stat(&x).unwrap();
        let fiber = enumerate_zero_one_fiber(&cfg, &key, DEFAULT_CAP).unwrap();
        let path = random_walk(&cfg, &x, &b, 200, seed).unwrap();
        prop_assert_eq!(path.states.len(), 201);
        for s in &path.states {
            prop_assert!(s.is_zero_one());
            prop_assert!(fiber.contains(s));
        }
    }

    #[test]
    fn move_set_file_round_trip(v in prop::collection::vec(kernel_3x4(), 1..6)) {
        let moves: Vec<Move> = v.iter().filter_map(|d| Move::from_dense(d)).collect();
        prop_assume!(!moves.is_empty());
        let tags = [Provenance::Basic, Provenance::Loop(3), Provenance::Graver, Provenance::File];
        let b = MoveSet::new(12, "prop", moves.into_iter().zip(tags.into_iter().cycle()));
        let text = io::format_move_set(&b);
        let tags = io::format_provenance(&b);
        let back = io::parse_move_set(&text, Some(&tags), "prop").unwrap();
        prop_assert_eq!(back.moves(), b.moves());
        prop_assert_eq!(back.provenance(), b.provenance());
        prop_assert_eq!(io::format_move_set(&back), text);
    }

    #[test]
    fn table_mask_round_trip(x in zero_one(40)) {
        let m = x.to_mask().unwrap();
        prop_assert_eq!(Table::from_mask(m, 40), x);
    }
}

#[test]
fn square_free_subset_is_idempotent() {
    for dims in [[2, 2, 2], [2, 2, 3]] {
        let cfg = complete_independence(&dims).unwrap();
        let b0 = square_free_graver(&cfg, Budget::default()).unwrap();
        let once = square_free_subset(&b0);
        let twice = square_free_subset(&once);
        assert_eq!(once.moves(), b0.moves());
        assert_eq!(twice.moves(), once.moves());
        assert!(once.moves().iter().all(Move::is_square_free));
    }
    let g = zeroone::graver_basis(&two_way_independence(3, 3).unwrap(), Budget::default()).unwrap();
    let sf = square_free_subset(&g);
    assert_eq!(square_free_subset(&sf).moves(), sf.moves());
}
