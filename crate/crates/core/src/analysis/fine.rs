//! Joint-distribution feasibility for four two-valued observables.
//!
//! Given the four cross correlations `E(a,b), E(a,b′), E(a′,b), E(a′,b′)`
//! and the eight single-observable marginals, decide whether a probability
//! table over the 16 outcome atoms `(v1a, v1a′, v2b, v2b′) ∈ {±½}⁴`
//! reproduces them. The decision is a phase-one simplex over the atoms;
//! infeasible inputs come back with a Farkas certificate.

use crate::error::{Error, Result};

/// Residual tolerance on the reproduced constraints.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Observable order used by tables, marginals and correlations.
pub const OBSERVABLES: [&str; 4] = ["1a", "1a'", "2b", "2b'"];

/// Index pairs `(particle-1 observable, particle-2 observable)` in the
/// correlation order `ab, ab′, a′b, a′b′`.
pub const PAIRS: [(usize, usize); 4] = [(0, 2), (0, 3), (1, 2), (1, 3)];

/// Probability table over `{±½}⁴`.
///
/// Atom index bits, most significant first: `v1a, v1a′, v2b, v2b′`, with a
/// set bit meaning `+½`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointTable {
    p: [f64; 16],
}

impl JointTable {
    pub fn new(p: [f64; 16]) -> Result<Self> {
        if let Some(&bad) = p.iter().find(|&&x| !(x >= 0.0)) {
            return Err(Error::MarginalOutOfRange(bad));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > RESIDUAL_TOL {
            return Err(Error::InconsistentMarginals { index: 16, sum: s });
        }
        Ok(Self { p })
    }

    pub fn uniform() -> Self {
        Self { p: [1.0 / 16.0; 16] }
    }

    /// All mass on one atom.
    pub fn point(atom: usize) -> Self {
        let mut p = [0.0; 16];
        p[atom] = 1.0;
        Self { p }
    }

    pub fn probabilities(&self) -> &[f64; 16] {
        &self.p
    }

    /// Outcome `±½` of observable `obs` at atom `atom`.
    pub fn value(atom: usize, obs: usize) -> f64 {
        if atom >> (3 - obs) & 1 == 1 {
            0.5
        } else {
            -0.5
        }
    }

    pub fn correlations(&self) -> [f64; 4] {
        PAIRS.map(|(i, j)| {
            (0..16)
                .map(|k| self.p[k] * Self::value(k, i) * Self::value(k, j))
                .sum()
        })
    }

    /// `[P(+½), P(−½)]` per observable.
    pub fn marginals(&self) -> [[f64; 2]; 4] {
        let mut m = [[0.0; 2]; 4];
        for k in 0..16 {
            for (obs, row) in m.iter_mut().enumerate() {
                row[(Self::value(k, obs) < 0.0) as usize] += self.p[k];
            }
        }
        m
    }
}

/// `Σ p · (|v1a (v2b − v2b′)| + |v1a′ (v2b + v2b′)|)`, which bounds the CHSH
/// combination of any correlations derived from the table.
pub fn inequality_from_joint(t: &JointTable) -> f64 {
    (0..16)
        .map(|k| {
            let v = |o| JointTable::value(k, o);
            t.p[k] * ((v(0) * (v(2) - v(3))).abs() + (v(1) * (v(2) + v(3))).abs())
        })
        .sum()
}

/// Farkas certificate `y` with `yᵀA ≤ 0` and `yᵀb > 0` over the 13
/// equality rows (normalization, 4 correlations, 8 marginals).
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub y: Vec<f64>,
    pub rows: Vec<[f64; 16]>,
    pub rhs: Vec<f64>,
}

impl Certificate {
    /// `(max_j yᵀA_j, yᵀb)`.
    pub fn margins(&self) -> (f64, f64) {
        let max_col = (0..16)
            .map(|j| self.rows.iter().zip(&self.y).map(|(r, y)| r[j] * y).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        let yb = self.rhs.iter().zip(&self.y).map(|(b, y)| b * y).sum();
        (max_col, yb)
    }

    pub fn is_valid(&self) -> bool {
        let (col, yb) = self.margins();
        col <= RESIDUAL_TOL && yb > RESIDUAL_TOL
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility {
    Feasible(JointTable),
    Infeasible(Certificate),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }

    pub fn witness(&self) -> Option<&JointTable> {
        match self {
            Feasibility::Feasible(t) => Some(t),
            Feasibility::Infeasible(_) => None,
        }
    }
}

fn check_marginals(marginals: &[[f64; 2]; 4]) -> Result<()> {
    for (index, m) in marginals.iter().enumerate() {
        for &p in m {
            if !(-1e-12..=1.0 + 1e-12).contains(&p) {
                return Err(Error::MarginalOutOfRange(p));
            }
        }
        let sum = m[0] + m[1];
        if (sum - 1.0).abs() > RESIDUAL_TOL {
            return Err(Error::InconsistentMarginals { index, sum });
        }
    }
    Ok(())
}

/// Decides whether a joint table exists for correlations given on the
/// scale of a detector with maximal reading `v_max` (so `|E| ≤ v_max²`).
pub fn fine_feasible(
    correlations: [f64; 4],
    marginals: [[f64; 2]; 4],
    v_max: f64,
) -> Result<Feasibility> {
    check_marginals(&marginals)?;
    let scale = 0.25 / (v_max * v_max);
    let mut rows: Vec<[f64; 16]> = Vec::with_capacity(13);
    let mut rhs = Vec::with_capacity(13);
    rows.push([1.0; 16]);
    rhs.push(1.0);
    for (c, &(i, j)) in PAIRS.iter().enumerate() {
        rows.push(std::array::from_fn(|k| JointTable::value(k, i) * JointTable::value(k, j)));
        rhs.push(correlations[c] * scale);
    }
    for (obs, m) in marginals.iter().enumerate() {
        rows.push(std::array::from_fn(|k| (JointTable::value(k, obs) > 0.0) as u8 as f64));
        rhs.push(m[0]);
        rows.push(std::array::from_fn(|k| (JointTable::value(k, obs) < 0.0) as u8 as f64));
        rhs.push(m[1]);
    }

    let sol = phase_one(&rows, &rhs);
    let mut x = [0.0; 16];
    for (xi, &s) in x.iter_mut().zip(&sol.x) {
        *xi = s.max(0.0);
    }
    let residual = rows
        .iter()
        .zip(&rhs)
        .map(|(r, b)| (r.iter().zip(&x).map(|(a, x)| a * x).sum::<f64>() - b).abs())
        .fold(0.0, f64::max);
    if residual <= RESIDUAL_TOL {
        Ok(Feasibility::Feasible(JointTable { p: x }))
    } else {
        Ok(Feasibility::Infeasible(Certificate {
            y: sol.duals,
            rows,
            rhs,
        }))
    }
}

/// Fine's criterion: the eight CHSH inequalities plus nonnegativity of the
/// four pairwise tables implied by the marginals and correlations.
pub fn chsh_inequalities_hold(correlations: [f64; 4], marginals: [[f64; 2]; 4], v_max: f64) -> bool {
    const SLACK: f64 = 1e-12;
    let e = correlations.map(|c| c / (v_max * v_max));
    let total: f64 = e.iter().sum();
    let chsh_ok = e.iter().all(|&ek| (total - 2.0 * ek).abs() <= 2.0 + SLACK);
    let mean = marginals.map(|m| m[0] - m[1]);
    let pairs_ok = PAIRS.iter().zip(&e).all(|(&(i, j), &eij)| {
        [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
            .iter()
            .all(|&(x, y)| 1.0 + x * mean[i] + y * mean[j] + x * y * eij >= -SLACK)
    });
    chsh_ok && pairs_ok
}

struct PhaseOne {
    x: Vec<f64>,
    duals: Vec<f64>,
}

/// Minimizes the sum of artificials for `A x = b, x ≥ 0` with Bland's rule.
fn phase_one(rows: &[[f64; 16]], rhs: &[f64]) -> PhaseOne {
    const EPS: f64 = 1e-12;
    let n = 16;
    let m = rows.len();
    let width = n + m + 1;
    let flip: Vec<f64> = rhs.iter().map(|&b| if b < 0.0 { -1.0 } else { 1.0 }).collect();
    let mut t = vec![vec![0.0; width]; m + 1];
    for i in 0..m {
        for j in 0..n {
            t[i][j] = flip[i] * rows[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][width - 1] = flip[i] * rhs[i];
    }
    // reduced costs of the phase-one objective; last entry is −w
    for j in 0..n {
        t[m][j] = -(0..m).map(|i| t[i][j]).sum::<f64>();
    }
    t[m][width - 1] = -(0..m).map(|i| t[i][width - 1]).sum::<f64>();
    let mut basis: Vec<usize> = (n..n + m).collect();

    for _ in 0..10_000 {
        let Some(q) = (0..n + m).find(|&j| t[m][j] < -EPS) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][q] > EPS {
                let ratio = t[i][width - 1] / t[i][q];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        if ratio < best - EPS || (ratio <= best + EPS && basis[i] < basis[r]) {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
        }
        let Some((r, _)) = leave else { break };
        let piv = t[r][q];
        for v in t[r].iter_mut() {
            *v /= piv;
        }
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r {
                let f = row[q];
                if f != 0.0 {
                    for (v, p) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * p;
                    }
                }
            }
        }
        basis[r] = q;
    }

    let mut x = vec![0.0; n];
    for (i, &bj) in basis.iter().enumerate() {
        if bj < n {
            x[bj] = t[i][width - 1];
        }
    }
    // reduced cost of artificial i is 1 − y'_i
    let duals = (0..m).map(|i| flip[i] * (1.0 - t[m][n + i])).collect();
    PhaseOne { x, duals }
}
