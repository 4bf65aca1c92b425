//! Dense reference implementations and random instances for cross-checks.
//! Written directly from the definitions, sharing no code with the library.

#![allow(dead_code)]

use std::collections::BTreeMap;

use chrono::NaiveDate;
use multirisk::{BankId, BankRecord, BankRecords, LayerId, LiabilityMatrix, MultiLayerSnapshot};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A multiplex as dense matrices: `layers[a][i][j]` is what `i` owes `j`.
#[derive(Clone, Debug)]
pub struct Dense {
    pub layers: Vec<Vec<Vec<f64>>>,
    pub capital: Vec<f64>,
}

pub fn name(k: usize) -> String {
    format!("n{k:02}")
}

impl Dense {
    pub fn n(&self) -> usize {
        self.capital.len()
    }

    pub fn combined(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let mut out = vec![vec![0.0; n]; n];
        for l in &self.layers {
            for i in 0..n {
                for j in 0..n {
                    out[i][j] += l[i][j];
                }
            }
        }
        out
    }

    pub fn snapshot(&self) -> MultiLayerSnapshot {
        let labels = ["dl", "fx", "secu", "deri"];
        let mut layers = BTreeMap::new();
        for (a, l) in self.layers.iter().enumerate() {
            let mut m = LiabilityMatrix::new();
            for (i, row) in l.iter().enumerate() {
                for (j, x) in row.iter().enumerate() {
                    if *x > 0.0 {
                        m.add(BankId::new(name(i)), BankId::new(name(j)), *x)
                            .unwrap();
                    }
                }
            }
            layers.insert(LayerId::new(labels[a]), m);
        }
        let banks: BankRecords = self
            .capital
            .iter()
            .enumerate()
            .map(|(k, c)| (BankId::new(name(k)), BankRecord::new(name(k), *c)))
            .collect();
        MultiLayerSnapshot::new(NaiveDate::from_ymd_opt(2013, 1, 2).unwrap(), layers, banks)
            .unwrap()
    }
}

/// Random multiplex with `n` banks, 1 to 4 layers and edge probability `density`.
pub fn random_dense(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Dense {
    let n_layers = rng.random_range(1..=4);
    let layers = (0..n_layers)
        .map(|_| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            if i != j && rng.random::<f64>() < density {
                                rng.random_range(1.0..100.0)
                            } else {
                                0.0
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let capital = (0..n).map(|_| rng.random_range(20.0..400.0)).collect();
    Dense { layers, capital }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Relative economic values: interbank assets over their total.
pub fn dense_values(l: &[Vec<f64>]) -> Vec<f64> {
    let n = l.len();
    let assets: Vec<f64> = (0..n).map(|j| (0..n).map(|i| l[i][j]).sum()).collect();
    let total: f64 = assets.iter().sum();
    if total == 0.0 {
        return vec![0.0; n];
    }
    assets.iter().map(|a| a / total).collect()
}

/// Final distress after the cascade started by `seeds` at level `psi`.
/// Returns (h, rounds).
pub fn dense_cascade(
    l: &[Vec<f64>],
    capital: &[f64],
    seeds: &[usize],
    psi: f64,
) -> (Vec<f64>, usize) {
    let n = l.len();
    let w = |i: usize, j: usize| -> f64 {
        if l[i][j] <= 0.0 {
            0.0
        } else if capital[j] <= 0.0 {
            1.0
        } else {
            (l[i][j] / capital[j]).min(1.0)
        }
    };
    // 0 undistressed, 1 distressed, 2 inactive
    let mut state = vec![0u8; n];
    let mut h = vec![0.0; n];
    for &s in seeds {
        state[s] = 1;
        h[s] = psi;
    }
    let mut rounds = 0;
    while state.contains(&1) {
        rounds += 1;
        assert!(rounds <= n + 1, "cascade did not stop");
        let mut next = h.clone();
        for j in 0..n {
            let mut add = 0.0;
            for i in 0..n {
                if state[i] == 1 {
                    add += w(i, j) * h[i];
                }
            }
            next[j] = (h[j] + add).min(1.0);
        }
        let mut next_state = state.clone();
        for k in 0..n {
            next_state[k] = match state[k] {
                1 => 2,
                2 => 2,
                _ if next[k] > 0.0 => 1,
                _ => 0,
            };
        }
        h = next;
        state = next_state;
    }
    (h, rounds)
}

pub fn dense_debtrank(l: &[Vec<f64>], capital: &[f64], seeds: &[usize], psi: f64) -> f64 {
    let v = dense_values(l);
    let (h, _) = dense_cascade(l, capital, seeds, psi);
    h.iter().zip(&v).map(|(a, b)| a * b).sum()
}

/// `V * sum over non-empty S of P(S) R_S`, by bitmask.
pub fn dense_exact_loss(l: &[Vec<f64>], capital: &[f64], p: &[f64]) -> f64 {
    let n = l.len();
    let total: f64 = l.iter().flatten().sum();
    let mut acc = 0.0;
    for mask in 1u32..(1 << n) {
        let prob: f64 = (0..n)
            .map(|k| if mask >> k & 1 == 1 { p[k] } else { 1.0 - p[k] })
            .product();
        if prob == 0.0 {
            continue;
        }
        let seeds: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 1).collect();
        acc += prob * dense_debtrank(l, capital, &seeds, 1.0);
    }
    total * acc
}

pub fn dense_approx_loss(l: &[Vec<f64>], capital: &[f64], p: &[f64]) -> f64 {
    let total: f64 = l.iter().flatten().sum();
    total
        * (0..l.len())
            .map(|k| p[k] * dense_debtrank(l, capital, &[k], 1.0))
            .sum::<f64>()
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}
