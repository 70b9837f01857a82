//! Profit-to-weight greedy with a feasibility repair phase.

use super::{KnapsackInstance, Solution};

fn violation(inst: &KnapsackInstance, load: &[f64]) -> f64 {
    (0..inst.m).map(|i| (load[i] - inst.capacity(i)).max(0.0)).sum()
}

/// Repair first: while a row is over capacity, take the item that reduces
/// total violation the most. Then take positive-profit items by descending
/// profit over capacity-normalised cost while they fit. `None` if repair
/// gets stuck.
pub fn solve_pii_greedy(inst: &KnapsackInstance) -> Option<Solution> {
    let (n, m) = (inst.n, inst.m);
    let mut c = vec![false; n];
    let mut load = vec![0.0; m];
    let take = |j: usize, c: &mut Vec<bool>, load: &mut Vec<f64>| {
        c[j] = true;
        for i in 0..m {
            load[i] += inst.a[i][j];
        }
    };

    loop {
        let v = violation(inst, &load);
        if v <= 0.0 {
            break;
        }
        let mut best: Option<(usize, f64)> = None;
        for j in (0..n).filter(|&j| !c[j]) {
            let after: Vec<f64> = (0..m).map(|i| load[i] + inst.a[i][j]).collect();
            let gain = v - violation(inst, &after);
            if gain > 0.0 && best.is_none_or(|(_, g)| gain > g) {
                best = Some((j, gain));
            }
        }
        let (j, _) = best?;
        take(j, &mut c, &mut load);
    }

    let weight = |j: usize| -> f64 {
        (0..m)
            .map(|i| {
                let cap = inst.capacity(i);
                let a = inst.a[i][j].max(0.0);
                if a == 0.0 {
                    0.0
                } else if cap > 0.0 {
                    a / cap
                } else {
                    f64::INFINITY
                }
            })
            .sum()
    };
    let mut order: Vec<(usize, f64)> = (0..n)
        .filter(|&j| !c[j] && inst.item_profit(j) > 0.0)
        .map(|j| {
            let w = weight(j);
            let ratio = if w == 0.0 { f64::INFINITY } else { inst.item_profit(j) / w };
            (j, ratio)
        })
        .collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    for (j, _) in order {
        if (0..m).all(|i| load[i] + inst.a[i][j] <= inst.capacity(i)) {
            take(j, &mut c, &mut load);
        }
    }
    // recompute from scratch so the reported figures use canonical order
    let value = inst.value(&c);
    let slack = inst.slack(&c);
    if slack.iter().any(|&s| s < 0.0) {
        return None;
    }
    Some(Solution { c, value, slack })
}
