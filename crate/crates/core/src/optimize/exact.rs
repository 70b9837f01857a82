//! Exhaustive solvers for the decision (PI) and maximisation (PII) forms.
//!
//! Depth-first enumeration over `c_0, c_1, ...` with the 0-branch first, so
//! leaves are visited in lexicographic order. A branch is cut when even
//! taking every remaining negative-cost item cannot restore feasibility,
//! or when the remaining positive profit cannot beat the incumbent.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::par::{self, Exec};

use super::{KnapsackInstance, OptimizeError, Solution};

pub const MAX_EXACT_N: usize = 24;

/// Relative slack applied to pruning bounds so that rounding never cuts a
/// branch the leaf check would accept.
const PRUNE_TOL: f64 = 1e-9;

struct Prep<'a> {
    inst: &'a KnapsackInstance,
    profit: Vec<f64>,
    /// `neg_suffix[j][i]`: sum of negative `a[i][j..]`.
    neg_suffix: Vec<Vec<f64>>,
    /// Sum of positive profits from `j` on.
    pos_suffix: Vec<f64>,
    cap: Vec<f64>,
    scale: f64,
}

impl<'a> Prep<'a> {
    fn new(inst: &'a KnapsackInstance) -> Prep<'a> {
        let n = inst.n;
        let profit: Vec<f64> = (0..n).map(|j| inst.item_profit(j)).collect();
        let mut neg_suffix = vec![vec![0.0; inst.m]; n + 1];
        let mut pos_suffix = vec![0.0; n + 1];
        for j in (0..n).rev() {
            for i in 0..inst.m {
                neg_suffix[j][i] = neg_suffix[j + 1][i] + inst.a[i][j].min(0.0);
            }
            pos_suffix[j] = pos_suffix[j + 1] + profit[j].max(0.0);
        }
        let cap: Vec<f64> = (0..inst.m).map(|i| inst.capacity(i)).collect();
        let mag = |v: f64| v.abs();
        let scale = 1.0
            + inst.a.iter().flatten().copied().map(mag).sum::<f64>()
            + profit.iter().copied().map(mag).sum::<f64>()
            + cap.iter().copied().map(mag).sum::<f64>();
        Prep { inst, profit, neg_suffix, pos_suffix, cap, scale }
    }

    fn tol(&self) -> f64 {
        PRUNE_TOL * self.scale
    }

    fn repairable(&self, j: usize, load: &[f64]) -> bool {
        let t = self.tol();
        (0..self.inst.m).all(|i| load[i] + self.neg_suffix[j][i] <= self.cap[i] + t)
    }

    fn feasible(&self, load: &[f64]) -> bool {
        load.iter().zip(&self.cap).all(|(l, c)| l <= c)
    }
}

/// Best value found by any worker, shared between parallel subtrees.
/// Stored as an order-preserving integer key so `fetch_max` works.
struct SharedBest(AtomicU64);

impl SharedBest {
    fn key(v: f64) -> u64 {
        let b = v.to_bits();
        if b >> 63 == 1 {
            !b
        } else {
            b | 1 << 63
        }
    }

    fn unkey(k: u64) -> f64 {
        f64::from_bits(if k >> 63 == 1 { k & !(1 << 63) } else { !k })
    }

    fn new() -> SharedBest {
        SharedBest(AtomicU64::new(Self::key(f64::NEG_INFINITY)))
    }

    fn offer(&self, v: f64) {
        self.0.fetch_max(Self::key(v), Ordering::Relaxed);
    }

    fn get(&self) -> f64 {
        Self::unkey(self.0.load(Ordering::Relaxed))
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Goal {
    Max,
    AtLeast(f64),
}

struct Search<'p, 'a> {
    prep: &'p Prep<'a>,
    goal: Goal,
    c: Vec<bool>,
    /// `loads[j]`: row loads after deciding items `0..j`, accumulated in
    /// ascending `j` so leaf checks match [`KnapsackInstance::slack`].
    loads: Vec<Vec<f64>>,
    best: Option<(Vec<bool>, f64)>,
    stop: bool,
    shared: Option<&'p SharedBest>,
}

impl Search<'_, '_> {
    fn dfs(&mut self, j: usize, value: f64) {
        if self.stop {
            return;
        }
        let p = self.prep;
        if j == p.inst.n {
            if !p.feasible(&self.loads[j]) {
                return;
            }
            match self.goal {
                Goal::Max => {
                    if self.best.as_ref().is_none_or(|(_, b)| value > *b) {
                        self.best = Some((self.c.clone(), value));
                        if let Some(sh) = self.shared {
                            sh.offer(value);
                        }
                    }
                }
                Goal::AtLeast(q) => {
                    if value >= q {
                        self.best = Some((self.c.clone(), value));
                        self.stop = true;
                    }
                }
            }
            return;
        }
        if !p.repairable(j, &self.loads[j]) {
            return;
        }
        let bound = value + p.pos_suffix[j] + p.tol();
        // strict comparisons only: an equal-valued leaf may still win the
        // lexicographic tie-break
        if self.shared.is_some_and(|sh| bound < sh.get()) {
            return;
        }
        match (self.goal, &self.best) {
            (Goal::Max, Some((_, b))) if bound < *b => return,
            (Goal::AtLeast(q), _) if bound < q => return,
            _ => {}
        }
        let (head, tail) = self.loads.split_at_mut(j + 1);
        tail[0].copy_from_slice(&head[j]);
        self.c[j] = false;
        self.dfs(j + 1, value);
        let (head, tail) = self.loads.split_at_mut(j + 1);
        for i in 0..p.inst.m {
            tail[0][i] = head[j][i] + p.inst.a[i][j];
        }
        self.c[j] = true;
        self.dfs(j + 1, value + p.profit[j]);
        self.c[j] = false;
    }
}

fn guard(inst: &KnapsackInstance) -> Result<(), OptimizeError> {
    inst.validate()?;
    if inst.n > MAX_EXACT_N {
        return Err(OptimizeError::TooLarge { n: inst.n, max: MAX_EXACT_N });
    }
    Ok(())
}

/// Searches the subtree whose first `prefix_len` decisions are the bits of
/// `prefix` (most significant first). Loads and values are accumulated in
/// ascending `j`, exactly as in [`KnapsackInstance::value`].
fn search_prefix(
    prep: &Prep,
    goal: Goal,
    prefix: u32,
    prefix_len: usize,
    shared: Option<&SharedBest>,
) -> Option<(Vec<bool>, f64)> {
    let inst = prep.inst;
    let loads = vec![vec![0.0; inst.m]; inst.n + 1];
    let mut s = Search { prep, goal, c: vec![false; inst.n], loads, best: None, stop: false, shared };
    let mut value = 0.0;
    for j in 0..prefix_len {
        if !prep.repairable(j, &s.loads[j]) {
            return None;
        }
        let take = prefix >> (prefix_len - 1 - j) & 1 == 1;
        s.c[j] = take;
        for i in 0..inst.m {
            s.loads[j + 1][i] = s.loads[j][i] + if take { inst.a[i][j] } else { 0.0 };
        }
        if take {
            value += prep.profit[j];
        }
    }
    s.dfs(prefix_len, value);
    s.best
}

fn to_solution(inst: &KnapsackInstance, (c, value): (Vec<bool>, f64)) -> Solution {
    let slack = inst.slack(&c);
    Solution { c, value, slack }
}

/// Maximum-profit feasible activation; ties go to the lexicographically
/// smallest `c`. `None` if no activation is feasible.
pub fn solve_pii_exact(inst: &KnapsackInstance) -> Result<Option<Solution>, OptimizeError> {
    solve_pii_exact_with(inst, Exec::Sequential)
}

/// As [`solve_pii_exact`], splitting the search on the leading decisions.
pub fn solve_pii_exact_with(inst: &KnapsackInstance, exec: Exec) -> Result<Option<Solution>, OptimizeError> {
    guard(inst)?;
    let prep = Prep::new(inst);
    let split = match exec {
        Exec::Sequential => 0,
        Exec::Parallel => inst.n.min(8),
    };
    let shared = SharedBest::new();
    let parts = par::map_range(exec, 1usize << split, |p| search_prefix(&prep, Goal::Max, p as u32, split, Some(&shared)));
    // prefixes are in lexicographic order: keep the first strict maximum
    let mut best: Option<(Vec<bool>, f64)> = None;
    for cand in parts.into_iter().flatten() {
        if best.as_ref().is_none_or(|(_, b)| cand.1 > *b) {
            best = Some(cand);
        }
    }
    Ok(best.map(|b| to_solution(inst, b)))
}

/// Decision form: a feasible activation with profit at least `o_q`, the
/// lexicographically first one found, or `None` for a verified no.
pub fn solve_pi(inst: &KnapsackInstance) -> Result<Option<Solution>, OptimizeError> {
    guard(inst)?;
    let prep = Prep::new(inst);
    Ok(search_prefix(&prep, Goal::AtLeast(inst.o_q), 0, 0, None).map(|b| to_solution(inst, b)))
}
