use crate::model::{weighted_sums, ConstraintsAndWeights, PerfVector};

use super::OptimizeError;

/// Right-hand side of the per-receiver constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum Capacity {
    Uniform(f64),
    PerRow(Vec<f64>),
}

/// Charger activation as a multidimensional 0-1 knapsack: `n` chargers
/// (items), `m` receivers (constraint rows).
#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackInstance {
    pub n: usize,
    pub m: usize,
    /// Profit of charger `j` at receiver `i`, `o[i][j]`.
    pub o: Vec<Vec<f64>>,
    /// Cost of charger `j` at receiver `i`, `a[i][j]`.
    pub a: Vec<Vec<f64>>,
    pub s_t: Capacity,
    /// Minimum total profit for the decision version.
    pub o_q: f64,
}

impl KnapsackInstance {
    pub fn new(o: Vec<Vec<f64>>, a: Vec<Vec<f64>>, s_t: Capacity, o_q: f64) -> Result<Self, OptimizeError> {
        let m = o.len();
        let n = o.first().map_or(0, Vec::len);
        let inst = KnapsackInstance { n, m, o, a, s_t, o_q };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), OptimizeError> {
        let shape = |name: &str, mat: &[Vec<f64>]| -> Result<(), OptimizeError> {
            if mat.len() != self.m {
                return Err(OptimizeError::Shape(format!("{name} has {} rows, expected {}", mat.len(), self.m)));
            }
            for (i, row) in mat.iter().enumerate() {
                if row.len() != self.n {
                    return Err(OptimizeError::Shape(format!("{name} row {i} has {} entries, expected {}", row.len(), self.n)));
                }
                if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                    return Err(OptimizeError::NonFinite(format!("{name}[{i}][{j}]")));
                }
            }
            Ok(())
        };
        shape("o", &self.o)?;
        shape("a", &self.a)?;
        match &self.s_t {
            Capacity::Uniform(s) if !s.is_finite() => return Err(OptimizeError::NonFinite("s_t".into())),
            Capacity::PerRow(v) if v.len() != self.m => {
                return Err(OptimizeError::Shape(format!("s_t has {} values, expected 1 or {}", v.len(), self.m)))
            }
            Capacity::PerRow(v) if v.iter().any(|x| !x.is_finite()) => {
                return Err(OptimizeError::NonFinite("s_t".into()))
            }
            _ => {}
        }
        if !self.o_q.is_finite() {
            return Err(OptimizeError::NonFinite("o_q".into()));
        }
        Ok(())
    }

    pub fn capacity(&self, i: usize) -> f64 {
        match &self.s_t {
            Capacity::Uniform(s) => *s,
            Capacity::PerRow(v) => v[i],
        }
    }

    /// Total profit of charger `j` over all receivers.
    pub fn item_profit(&self, j: usize) -> f64 {
        self.o.iter().map(|row| row[j]).sum()
    }

    /// Objective of `c`, summing item profits in ascending `j`.
    pub fn value(&self, c: &[bool]) -> f64 {
        let mut v = 0.0;
        for j in 0..self.n {
            if c[j] {
                v += self.item_profit(j);
            }
        }
        v
    }

    /// `s_t(i) - sum_j a[i][j] c_j` for every row.
    pub fn slack(&self, c: &[bool]) -> Vec<f64> {
        (0..self.m)
            .map(|i| {
                let mut load = 0.0;
                for j in 0..self.n {
                    if c[j] {
                        load += self.a[i][j];
                    }
                }
                self.capacity(i) - load
            })
            .collect()
    }

    pub fn is_feasible(&self, c: &[bool]) -> bool {
        c.len() == self.n && self.slack(c).iter().all(|&s| s >= 0.0)
    }
}

/// Builds the instance for one time slot from per-pair descriptors
/// `snapshot[i][j]` (receiver `i`, charger `j`).
pub fn build_instance(snapshot: &[Vec<PerfVector>], cw: &ConstraintsAndWeights) -> Result<KnapsackInstance, OptimizeError> {
    cw.validate().map_err(|e| OptimizeError::Shape(e.to_string()))?;
    let n = snapshot.first().map_or(0, Vec::len);
    if let Some(i) = snapshot.iter().position(|row| row.len() != n) {
        return Err(OptimizeError::Shape(format!("snapshot row {i} misses charger pairs")));
    }
    let mut o = Vec::with_capacity(snapshot.len());
    let mut a = Vec::with_capacity(snapshot.len());
    let mut s = 0.0;
    for row in snapshot {
        let mut orow = Vec::with_capacity(n);
        let mut arow = Vec::with_capacity(n);
        for p in row {
            let (oi, ai, si) = weighted_sums(p, cw);
            orow.push(oi);
            arow.push(ai);
            s = si;
        }
        o.push(orow);
        a.push(arow);
    }
    if snapshot.is_empty() || n == 0 {
        s = weighted_sums(&PerfVector { delta: 0.0, theta: 0.0, xi: 0.0, eta: 0.0, psi: 0.0 }, cw).2;
    }
    KnapsackInstance::new_sized(snapshot.len(), n, o, a, Capacity::Uniform(s), cw.o_q)
}

impl KnapsackInstance {
    pub(crate) fn new_sized(
        m: usize,
        n: usize,
        o: Vec<Vec<f64>>,
        a: Vec<Vec<f64>>,
        s_t: Capacity,
        o_q: f64,
    ) -> Result<Self, OptimizeError> {
        let inst = KnapsackInstance { n, m, o, a, s_t, o_q };
        inst.validate()?;
        Ok(inst)
    }
}
