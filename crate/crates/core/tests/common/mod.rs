#![allow(dead_code)]

use gallager_forge::dmc::{Channel, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn d(v: &[f64]) -> Distribution {
    Distribution::new(v.to_vec()).unwrap()
}

pub fn bsc() -> Channel {
    Channel::bsc(0.2).unwrap()
}

/// Strictly positive point drawn uniformly from the simplex.
pub fn random_distribution<R: Rng>(k: usize, rng: &mut R) -> Distribution {
    let w: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    Distribution::from_weights(&w).unwrap()
}

/// Random row-stochastic matrix with some spread in the row entries.
pub fn random_channel<R: Rng>(nx: usize, ny: usize, rng: &mut R) -> Channel {
    loop {
        let rows: Vec<Vec<f64>> = (0..nx)
            .map(|_| {
                let w: Vec<f64> = (0..ny).map(|_| rng.random::<f64>().powi(2) + 1e-3).collect();
                let s: f64 = w.iter().sum();
                let mut r: Vec<f64> = w.iter().map(|v| v / s).collect();
                // absorb rounding in the last entry
                let head: f64 = r[..ny - 1].iter().sum();
                r[ny - 1] = 1.0 - head;
                r
            })
            .collect();
        if let Ok(ch) = Channel::new(&rows) {
            return ch;
        }
    }
}

pub fn random_dims<R: Rng>(max: usize, rng: &mut R) -> (usize, usize) {
    (rng.random_range(2..=max), rng.random_range(2..=max))
}

/// Direct evaluation of Σ_x Q̃(x)·(−ln Σ_y P^a(y|x)[Σ_x' Q(x')P^a(y|x')]^ρ)
/// with plain powers, no log-domain tricks.
pub fn direct_conditional(rho: f64, q: &Distribution, qt: &Distribution, ch: &Channel) -> f64 {
    let a = 1.0 / (1.0 + rho);
    let mut total = 0.0;
    for x in 0..ch.num_inputs() {
        if qt[x] == 0.0 {
            continue;
        }
        let mut s = 0.0;
        for y in 0..ch.num_outputs() {
            let inner: f64 = (0..ch.num_inputs())
                .map(|xp| q[xp] * ch.prob(xp, y).powf(a))
                .sum();
            s += ch.prob(x, y).powf(a) * inner.powf(rho);
        }
        total -= qt[x] * s.ln();
    }
    total
}

/// Direct E₀(ρ,Q) with plain powers.
pub fn direct_e0(rho: f64, q: &Distribution, ch: &Channel) -> f64 {
    let a = 1.0 / (1.0 + rho);
    let s: f64 = (0..ch.num_outputs())
        .map(|y| {
            let inner: f64 = (0..ch.num_inputs())
                .map(|x| q[x] * ch.prob(x, y).powf(a))
                .sum();
            inner.powf(1.0 + rho)
        })
        .sum();
    -s.ln()
}

pub fn binary_entropy(p: f64) -> f64 {
    -(p * p.ln() + (1.0 - p) * (1.0 - p).ln())
}
