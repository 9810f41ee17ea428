mod common;

use depsynth::{
    column_tv_distance, evaluate, holds_fd, mine_fds, mined_graph, q_score, read_table, score_all, synthesize_baseline,
    synthesize_hfgf, write_table, ColumnKind, ColumnSelection, DependencyClass, EnumerationPolicy, FdSet, GeneratorKind,
    QReport, Seed, Table,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{arb_table, minimal_fds_oracle, q_oracle, random_split, strs};

fn with_order(max_cols: usize, max_rows: usize) -> impl Strategy<Value = (Table, Vec<usize>)> {
    arb_table(max_cols, max_rows).prop_flat_map(|t| {
        let order: Vec<usize> = (0..t.n_rows()).collect();
        (Just(t), Just(order).prop_shuffle())
    })
}

fn fd_list(t: &Table, max_lhs: usize) -> Vec<(Vec<String>, String)> {
    mine_fds(t, max_lhs).unwrap().fds().iter().map(|f| (f.lhs.clone(), f.rhs.clone())).collect()
}

fn doubled(t: &Table) -> Table {
    let order: Vec<usize> = (0..t.n_rows()).chain(0..t.n_rows()).collect();
    t.take_rows(&order)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn q_matches_oracle(t in arb_table(6, 25), pick in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(pick);
        if let Some((a, b)) = random_split(&mut rng, &t, 2) {
            let s = q_score(&t, &ColumnSelection::new(a.clone()).unwrap(), &ColumnSelection::new(b.clone()).unwrap()).unwrap();
            let got = (!s.is_degenerate()).then(|| (*s.value.numer(), *s.value.denom()));
            prop_assert_eq!(got, q_oracle(&t, &strs(&a), &strs(&b)));
        }
    }

    #[test]
    fn q_ignores_row_order_and_duplicates((t, order) in with_order(5, 20)) {
        let shuffled = t.take_rows(&order);
        let twice = doubled(&t);
        let policy = EnumerationPolicy::with_max_subset(2);
        let base = score_all(&t, policy).unwrap();
        prop_assert_eq!(&base, &score_all(&shuffled, policy).unwrap());
        prop_assert_eq!(&base, &score_all(&twice, policy).unwrap());
    }

    #[test]
    fn q_zero_iff_fd(t in arb_table(5, 20)) {
        for s in score_all(&t, EnumerationPolicy::default()).unwrap().scores {
            if s.is_degenerate() {
                continue;
            }
            let fd = holds_fd(&t, &[&s.a.columns()[0]], &s.b.columns()[0]).unwrap();
            prop_assert_eq!(fd, s.class == DependencyClass::Fd);
            prop_assert!(s.value.numer() <= s.value.denom());
        }
    }

    #[test]
    fn fds_match_oracle(t in arb_table(5, 20), max_lhs in 1usize..=3) {
        prop_assert_eq!(fd_list(&t, max_lhs), minimal_fds_oracle(&t, max_lhs));
    }

    #[test]
    fn fds_ignore_row_order_and_duplicates((t, order) in with_order(5, 20)) {
        let base = fd_list(&t, 2);
        prop_assert_eq!(&base, &fd_list(&t.take_rows(&order), 2));
        prop_assert_eq!(&base, &fd_list(&doubled(&t), 2));
    }

    #[test]
    fn mined_fds_hold(t in arb_table(6, 25)) {
        for fd in mine_fds(&t, 2).unwrap().fds() {
            prop_assert!(holds_fd(&t, &strs(&fd.lhs), &fd.rhs).unwrap());
        }
    }

    #[test]
    fn csv_round_trip(t in arb_table(6, 20)) {
        let bytes = write_table(&t);
        let back = read_table(&bytes, None).unwrap();
        prop_assert!(back.same_cells(&t));
        prop_assert_eq!(write_table(&back), bytes);
    }

    #[test]
    fn json_round_trips(t in arb_table(5, 20)) {
        let fds = mine_fds(&t, 2).unwrap();
        let back = FdSet::from_json(&fds.to_json()).unwrap();
        prop_assert_eq!(back.fds(), fds.fds());
        let q = score_all(&t, EnumerationPolicy::with_max_subset(2)).unwrap();
        prop_assert_eq!(&QReport::from_json(&q.to_json()).unwrap(), &q);
    }

    #[test]
    fn self_evaluation_is_perfect((t, order) in with_order(5, 20)) {
        let r = evaluate(&t, &t, 1, EnumerationPolicy::default()).unwrap();
        prop_assert_eq!((r.fd_pct, r.ld_pct), (100.0, 100.0));
        let shuffled = evaluate(&t, &t.take_rows(&order), 1, EnumerationPolicy::default()).unwrap();
        prop_assert_eq!(shuffled, r);
    }

    #[test]
    fn tv_distance_is_a_bounded_symmetric_metric(t in arb_table(4, 20), u in arb_table(4, 20)) {
        for c in t.columns() {
            if c.kind == ColumnKind::Identifier || u.column(&c.name).map_or(true, |d| d.kind == ColumnKind::Identifier) {
                continue;
            }
            let d = column_tv_distance(&t, &u, &c.name).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&d));
            prop_assert!((d - column_tv_distance(&u, &t, &c.name).unwrap()).abs() < 1e-12);
            prop_assert_eq!(column_tv_distance(&t, &t, &c.name).unwrap(), 0.0);
        }
    }

    #[test]
    fn synthesis_stays_in_support(t in arb_table(5, 20), seed in any::<u64>(), n in 0usize..30) {
        prop_assume!(t.n_rows() > 0);
        for kind in ["marginal", "bootstrap", "uniform"] {
            let kind: GeneratorKind = kind.parse().unwrap();
            let s = synthesize_baseline(&t, kind, n, Seed(seed)).unwrap();
            prop_assert_eq!(s.n_rows(), n);
            prop_assert_eq!(s.columns(), t.columns());
            for (i, c) in t.columns().iter().enumerate() {
                if c.kind != ColumnKind::Categorical {
                    continue;
                }
                let support = t.distinct(i);
                prop_assert!(s.values(i).iter().all(|v| support.contains(&v.as_str())));
            }
            prop_assert_eq!(&s, &synthesize_baseline(&t, kind, n, Seed(seed)).unwrap());
        }
    }

    #[test]
    fn hfgf_reproduces_mined_edges(t in arb_table(6, 25), seed in any::<u64>()) {
        prop_assume!(t.n_rows() > 0);
        let graph = mined_graph(&t, &mine_fds(&t, 1).unwrap(), None).unwrap();
        let s = synthesize_hfgf(&t, &graph, GeneratorKind::Marginal, 40, Seed(seed)).unwrap();
        prop_assert_eq!(s.columns(), t.columns());
        for e in graph.edges() {
            prop_assert!(holds_fd(&s, &[&e.source], &e.target).unwrap(), "{} -> {}", e.source, e.target);
        }
    }
}
