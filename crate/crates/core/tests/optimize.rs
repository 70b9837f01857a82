use proptest::prelude::*;

use wptn::optimize::{
    format_instance, parse_instance, solve_pi, solve_pii_exact, solve_pii_exact_with, solve_pii_greedy, Capacity,
    KnapsackInstance,
};
use wptn::par::Exec;

/// Instances on a 1/8 grid, so sums are exact.
fn instance() -> impl Strategy<Value = KnapsackInstance> {
    (1usize..=10, 1usize..=3).prop_flat_map(|(n, m)| {
        let cell = (-16i32..=80).prop_map(|v| f64::from(v) / 8.0);
        let mat = prop::collection::vec(prop::collection::vec(cell.clone(), n), m);
        let caps = prop::collection::vec((-8i32..=200).prop_map(|v| f64::from(v) / 8.0), m);
        (mat.clone(), mat, caps, (0i32..=400).prop_map(|v| f64::from(v) / 8.0))
            .prop_map(|(o, a, s, o_q)| KnapsackInstance::new(o, a, Capacity::PerRow(s), o_q).unwrap())
    })
}

fn all_selections(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u32..1 << n).map(move |mask| (0..n).map(|j| mask >> j & 1 == 1).collect())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn greedy_is_feasible_and_never_beats_exact(inst in instance()) {
        let exact = solve_pii_exact(&inst).unwrap();
        if let Some(g) = solve_pii_greedy(&inst) {
            prop_assert!(inst.is_feasible(&g.c));
            let e = exact.expect("greedy found a feasible point, so exact must too");
            prop_assert!(g.value <= e.value);
        }
    }

    #[test]
    fn parallel_split_matches_sequential(inst in instance()) {
        prop_assert_eq!(
            solve_pii_exact_with(&inst, Exec::Parallel).unwrap(),
            solve_pii_exact_with(&inst, Exec::Sequential).unwrap()
        );
    }

    #[test]
    fn feasibility_checker_agrees_with_row_sums(inst in instance()) {
        for c in all_selections(inst.n) {
            let by_rows = (0..inst.m).all(|i| {
                let load: f64 = (0..inst.n).filter(|&j| c[j]).map(|j| inst.a[i][j]).sum();
                load <= inst.capacity(i)
            });
            prop_assert_eq!(inst.is_feasible(&c), by_rows);
        }
    }

    #[test]
    fn exact_ties_break_to_smallest_selection(inst in instance()) {
        if let Some(sol) = solve_pii_exact(&inst).unwrap() {
            // the first optimal selection in lexicographic order with false < true
            let mut best: Option<(Vec<bool>, f64)> = None;
            for c in all_selections(inst.n) {
                if inst.is_feasible(&c) {
                    let v = inst.value(&c);
                    let better = best.as_ref().map_or(true, |(bc, bv)| v > *bv || (v == *bv && c < *bc));
                    if better {
                        best = Some((c, v));
                    }
                }
            }
            let (c, v) = best.unwrap();
            prop_assert_eq!(sol.value, v);
            prop_assert_eq!(sol.c, c);
        }
    }

    #[test]
    fn decision_agrees_with_optimum(inst in instance()) {
        let opt = solve_pii_exact(&inst).unwrap();
        let yes = solve_pi(&inst).unwrap();
        prop_assert_eq!(yes.is_some(), opt.is_some_and(|s| s.value >= inst.o_q));
    }

    #[test]
    fn text_format_round_trips(inst in instance()) {
        // with one row a per-row capacity and a uniform one print the same
        let back = parse_instance(&format_instance(&inst)).unwrap();
        prop_assert_eq!((&back.o, &back.a, back.o_q), (&inst.o, &inst.a, inst.o_q));
        for i in 0..inst.m {
            prop_assert_eq!(back.capacity(i), inst.capacity(i));
        }
    }
}

#[test]
fn uniform_capacity_applies_to_every_row() {
    let inst = KnapsackInstance::new(
        vec![vec![1.0, 1.0], vec![1.0, 1.0]],
        vec![vec![2.0, 0.0], vec![0.0, 2.0]],
        Capacity::Uniform(1.0),
        0.0,
    )
    .unwrap();
    assert_eq!(solve_pii_exact(&inst).unwrap().unwrap().c, vec![false, false]);
    let looser = KnapsackInstance { s_t: Capacity::Uniform(2.0), ..inst };
    assert_eq!(solve_pii_exact(&looser).unwrap().unwrap().value, 4.0);
}
