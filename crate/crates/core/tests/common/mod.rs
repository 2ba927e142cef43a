//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Pascal's triangle up to row `max`, as exact integers.
pub fn pascal(max: usize) -> Vec<Vec<BigUint>> {
    let mut rows: Vec<Vec<BigUint>> = vec![vec![BigUint::one()]];
    for n in 1..=max {
        let prev = &rows[n - 1];
        let mut row = vec![BigUint::one(); n + 1];
        for k in 1..n {
            row[k] = &prev[k - 1] + &prev[k];
        }
        rows.push(row);
    }
    rows
}

/// `C(n, k)` from a Pascal table, zero outside the triangle.
pub fn choose(table: &[Vec<BigUint>], n: i64, k: i64) -> BigUint {
    if n < 0 || k < 0 || k > n {
        BigUint::zero()
    } else {
        table[n as usize][k as usize].clone()
    }
}

/// Every `n`-subset of `1..=N` in lexicographic order.
pub fn all_subsets(urn_count: u64, occupied: usize) -> Vec<Vec<u64>> {
    fn go(start: u64, urn_count: u64, left: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for s in start..=urn_count {
            if urn_count - s + 1 < left as u64 {
                break;
            }
            cur.push(s);
            go(s + 1, urn_count, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, urn_count, occupied, &mut Vec::new(), &mut out);
    out
}

/// Predecessor count as the literal double sum
/// `sum_{k=0}^{n-1} sum_{m=s_k+1}^{s_{k+1}-1} C(N-m, n-k-1)` with `s_0 = 0`.
pub fn double_sum_predecessors(table: &[Vec<BigUint>], urn_count: u64, occupied: &[u64]) -> BigUint {
    let n = occupied.len() as i64;
    let mut s = vec![0u64];
    s.extend_from_slice(occupied);
    let mut p = BigUint::zero();
    for k in 0..occupied.len() {
        for m in s[k] + 1..s[k + 1] {
            p += choose(table, urn_count as i64 - m as i64, n - k as i64 - 1);
        }
    }
    p
}

/// Component labelling by union-find over neighbour pairs; components in order
/// of their first pixel, pixels row-major.
pub fn union_find_components(bits: &[bool], width: usize, height: usize, eight: bool) -> Vec<Vec<(usize, usize)>> {
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut parent: Vec<usize> = (0..bits.len()).collect();
    let mut join = |a: usize, b: usize| {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra.max(rb)] = ra.min(rb);
    };
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            if !bits[i] {
                continue;
            }
            if x + 1 < width && bits[i + 1] {
                join(i, i + 1);
            }
            if y + 1 < height {
                let below = i + width;
                if bits[below] {
                    join(i, below);
                }
                if eight && x + 1 < width && bits[below + 1] {
                    join(i, below + 1);
                }
                if eight && x > 0 && bits[below - 1] {
                    join(i, below - 1);
                }
            }
        }
    }
    let mut comps: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut index = std::collections::HashMap::new();
    for (i, &b) in bits.iter().enumerate() {
        if b {
            let root = find(&mut parent, i);
            let id = *index.entry(root).or_insert_with(|| {
                comps.push(Vec::new());
                comps.len() - 1
            });
            comps[id].push((i % width, i / width));
        }
    }
    comps
}

/// Pearson chi-square of observed counts against equal expected counts.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let e = total as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum()
}
