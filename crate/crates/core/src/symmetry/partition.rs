use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::numeric::factorial;
use crate::{Error, Result};

/// Integer partition with non-increasing positive parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    parts: Vec<usize>,
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;

    fn try_from(parts: Vec<usize>) -> Result<Self> {
        Partition::new(parts)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.parts
    }
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.iter().any(|&p| p == 0) {
            return Err(Error::InvalidArgument("partition parts must be positive".into()));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!(
                "partition parts {parts:?} are not non-increasing"
            )));
        }
        Ok(Self { parts })
    }

    /// Cycle type of a permutation given in one-line notation.
    pub fn cycle_type(perm: &[usize]) -> Self {
        let mut seen = vec![false; perm.len()];
        let mut parts = Vec::new();
        for start in 0..perm.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = perm[i];
                len += 1;
            }
            parts.push(len);
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self { parts }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn rows(&self) -> usize {
        self.parts.len()
    }

    /// Row `i`, zero past the last row.
    pub fn part(&self, i: usize) -> usize {
        self.parts.get(i).copied().unwrap_or(0)
    }

    /// Length of column `j` of the Young diagram.
    fn column(&self, j: usize) -> usize {
        self.parts.iter().filter(|&&p| p > j).count()
    }

    /// Dimension `d_λ` of the symmetric-group irrep, by the hook-length formula.
    pub fn sn_dim(&self) -> u128 {
        let mut hooks: u128 = 1;
        for (i, &row) in self.parts.iter().enumerate() {
            for j in 0..row {
                let arm = row - j - 1;
                let leg = self.column(j) - i - 1;
                hooks *= (arm + leg + 1) as u128;
            }
        }
        factorial(self.n()) / hooks
    }

    /// Dimension of the `SL(k)` irrep with highest weight `λ` (Weyl's formula);
    /// zero when `λ` has more than `k` rows.
    pub fn sl_dim(&self, k: usize) -> u128 {
        if self.rows() > k {
            return 0;
        }
        let mut num: u128 = 1;
        let mut den: u128 = 1;
        for i in 0..k {
            for j in (i + 1)..k {
                num *= (self.part(i) + j - i - self.part(j)) as u128;
                den *= (j - i) as u128;
            }
        }
        num / den
    }

    /// Centraliser order `z_μ = Π_i i^{m_i} m_i!`.
    pub fn centralizer_order(&self) -> u128 {
        let mut counts: HashMap<usize, usize> = HashMap::new();
        for &p in &self.parts {
            *counts.entry(p).or_default() += 1;
        }
        counts
            .into_iter()
            .map(|(i, m)| (i as u128).pow(m as u32) * factorial(m))
            .product()
    }

    /// Number of permutations with this cycle type, `n!/z_μ`.
    pub fn class_size(&self) -> u128 {
        factorial(self.n()) / self.centralizer_order()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Partitions of `n` with at most `max_rows` rows, lexicographically decreasing.
pub fn partitions_of(n: usize, max_rows: usize) -> Vec<Partition> {
    fn rec(rest: usize, max_part: usize, rows_left: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition { parts: cur.clone() });
            return;
        }
        if rows_left == 0 {
            return;
        }
        for part in (1..=max_part.min(rest)).rev() {
            cur.push(part);
            rec(rest - part, part, rows_left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    rec(n, n, max_rows, &mut Vec::new(), &mut out);
    out
}

/// Character `χ_λ(μ)` of the symmetric group by the Murnaghan–Nakayama rule.
///
/// Works on beta-sets: removing a rim hook of length `r` moves one bead
/// from `b` to the empty position `b − r`, with sign `(−1)` to the number
/// of beads strictly between.
pub fn sn_character(lambda: &Partition, cycle_type: &Partition) -> Result<i64> {
    if lambda.n() != cycle_type.n() {
        return Err(Error::PartitionMismatch(lambda.n(), cycle_type.n()));
    }
    let m = lambda.rows();
    let beta: Vec<usize> = (0..m).map(|i| lambda.parts[i] + (m - 1 - i)).collect();
    let mut memo = HashMap::new();
    Ok(mn(beta, &cycle_type.parts, &mut memo))
}

fn mn(beta: Vec<usize>, hooks: &[usize], memo: &mut HashMap<(Vec<usize>, usize), i64>) -> i64 {
    let Some((&r, rest)) = hooks.split_first() else {
        return 1;
    };
    let key = (beta, hooks.len());
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let beta = &key.0;
    let mut total = 0;
    for (idx, &b) in beta.iter().enumerate() {
        if b < r || beta.contains(&(b - r)) {
            continue;
        }
        let target = b - r;
        let between = beta.iter().filter(|&&x| x > target && x < b).count();
        let sign = if between % 2 == 0 { 1 } else { -1 };
        let mut next = beta.clone();
        next[idx] = target;
        next.sort_unstable_by(|a, b| b.cmp(a));
        total += sign * mn(next, rest, memo);
    }
    memo.insert(key, total);
    total
}

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn permutations(n: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut next: Option<Vec<usize>> = Some((0..n).collect());
    std::iter::from_fn(move || {
        let cur = next.take()?;
        let mut p = cur.clone();
        // standard next-permutation step
        if let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) {
            let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot exists");
            p.swap(i - 1, j);
            p[i..].reverse();
            next = Some(p);
        }
        Some(cur)
    })
}
