//! Brute-force OLS oracle: textbook formulas in exact rational arithmetic,
//! plus an independent quadrature for Student-t tail probabilities.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

type Q = BigRational;

fn exact(x: f64) -> Q {
    Q::from_float(x).expect("finite")
}

fn invert(mut a: Vec<Vec<Q>>) -> Vec<Vec<Q>> {
    let k = a.len();
    let mut inv: Vec<Vec<Q>> = (0..k).map(|i| (0..k).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect();
    for col in 0..k {
        let pivot = (col..k).find(|&r| !a[r][col].is_zero()).expect("nonsingular");
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..k {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..k {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in 0..k {
                    let (t1, t2) = (&f * &a[col][j], &f * &inv[col][j]);
                    a[r][j] = &a[r][j] - t1;
                    inv[r][j] = &inv[r][j] - t2;
                }
            }
        }
    }
    inv
}

pub struct Oracle {
    pub beta: Vec<f64>,
    pub se: Vec<f64>,
}

/// b = (X'X)^-1 X'y and V = n/(n-k) (X'X)^-1 (Σ e_i² x_i x_i') (X'X)^-1, exactly.
pub fn oracle(y: &[f64], x: &[Vec<f64>]) -> Oracle {
    let n = y.len();
    let k = x[0].len();
    let xq: Vec<Vec<Q>> = x.iter().map(|r| r.iter().map(|&v| exact(v)).collect()).collect();
    let yq: Vec<Q> = y.iter().map(|&v| exact(v)).collect();
    let mut xtx = vec![vec![Q::zero(); k]; k];
    let mut xty = vec![Q::zero(); k];
    for i in 0..n {
        for a in 0..k {
            xty[a] += &xq[i][a] * &yq[i];
            for b in 0..k {
                xtx[a][b] += &xq[i][a] * &xq[i][b];
            }
        }
    }
    let inv = invert(xtx);
    let beta: Vec<Q> = (0..k).map(|a| (0..k).fold(Q::zero(), |s, b| s + &inv[a][b] * &xty[b])).collect();
    let mut meat = vec![vec![Q::zero(); k]; k];
    for i in 0..n {
        let fitted = (0..k).fold(Q::zero(), |s, a| s + &xq[i][a] * &beta[a]);
        let e = &yq[i] - fitted;
        let e2 = &e * &e;
        for a in 0..k {
            let xa = &xq[i][a] * &e2;
            for b in 0..k {
                meat[a][b] += &xa * &xq[i][b];
            }
        }
    }
    let scale = Q::new(BigInt::from(n), BigInt::from(n - k));
    let se = (0..k)
        .map(|j| {
            // (inv meat inv)[j][j]
            let mut v = Q::zero();
            for a in 0..k {
                if inv[j][a].is_zero() {
                    continue;
                }
                let row: Q = (0..k).fold(Q::zero(), |s, b| s + &meat[a][b] * &inv[b][j]);
                v += &inv[j][a] * row;
            }
            (v * &scale).abs().to_f64().unwrap().sqrt()
        })
        .collect();
    Oracle { beta: beta.iter().map(|b| b.to_f64().unwrap()).collect(), se }
}

/// Two-sided Student-t p-value via t = sqrt(df) tan(θ):
/// P(|T| > t) = ∫_{θt}^{π/2} cos^{df-1} / ∫_0^{π/2} cos^{df-1}.
pub fn t_tail_oracle(t: f64, df: usize) -> f64 {
    let theta_t = (t.abs() / (df as f64).sqrt()).atan();
    let f = |th: f64| th.cos().powi(df as i32 - 1);
    let integrate = |a: f64, b: f64| {
        // composite 8-point Gauss-Legendre
        const X: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
        const W: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];
        let panels = 4000;
        let h = (b - a) / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            for (x, w) in X.iter().zip(W) {
                acc += w * (f(mid + x * h / 2.0) + f(mid - x * h / 2.0));
            }
        }
        acc * h / 2.0
    };
    integrate(theta_t, std::f64::consts::FRAC_PI_2) / integrate(0.0, std::f64::consts::FRAC_PI_2)
}

pub fn dataset(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = rng.random_range(8..=300);
    let k = rng.random_range(2..=4);
    let beta: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut row = vec![1.0];
            row.extend((1..k).map(|_| rng.random_range(-3.0..3.0)));
            row
        })
        .collect();
    let y = x
        .iter()
        .map(|row| {
            let mean: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
            // noise scale grows with the first regressor
            let scale = 0.2 + row[1].abs();
            mean + scale * rng.random_range(-1.0..1.0)
        })
        .collect();
    (y, x)
}
