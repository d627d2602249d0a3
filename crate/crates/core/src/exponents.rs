//! Information functionals of a channel and an input distribution.
//!
//! All quantities are in nats. Inner sums are evaluated in the log domain so
//! that small `ρ` and tiny transition probabilities do not underflow.
//! Input symbols with zero mass are skipped and `0 · ln 0 = 0`.

use crate::dmc::{check_rho, Channel, Distribution, ExponentParams};
use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, scaled_ln};

/// `ln Σ_x Q(x) P^s(y|x)` for every output `y`; `-inf` when no input in the
/// support of `Q` reaches `y`.
pub(crate) fn log_output_mixture(ch: &Channel, q: &Distribution, s: f64) -> Vec<f64> {
    (0..ch.num_outputs())
        .map(|y| {
            log_sum_exp((0..ch.num_inputs()).map(|x| {
                if q[x] == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    q[x].ln() + scaled_ln(ch.prob(x, y), s)
                }
            }))
        })
        .collect()
}

/// Mutual information `I(Q,P)`.
pub fn mutual_information(q: &Distribution, ch: &Channel) -> Result<f64> {
    q.check_len(ch.num_inputs())?;
    let output: Vec<f64> = (0..ch.num_outputs())
        .map(|y| (0..ch.num_inputs()).map(|x| q[x] * ch.prob(x, y)).sum())
        .collect();
    let mut total = 0.0;
    for x in 0..ch.num_inputs() {
        if q[x] == 0.0 {
            continue;
        }
        for (y, &py) in output.iter().enumerate() {
            let p = ch.prob(x, y);
            if p > 0.0 {
                total += q[x] * p * (p.ln() - py.ln());
            }
        }
    }
    Ok(total.max(0.0))
}

/// The Gallager function `E₀(ρ,Q) = -ln Σ_y [Σ_x Q(x) P^{1/(1+ρ)}(y|x)]^{1+ρ}`.
pub fn gallager_e0(rho: f64, q: &Distribution, ch: &Channel) -> Result<f64> {
    check_rho(rho)?;
    q.check_len(ch.num_inputs())?;
    let inner = log_output_mixture(ch, q, 1.0 / (1.0 + rho));
    Ok(-log_sum_exp(inner.iter().map(|l| (1.0 + rho) * l)))
}

/// Conditional exponent for a transmitted word of type `Q̃` in a codebook drawn
/// from `Q`, for a general Chernoff parameter `s`:
///
/// `E₀(s,ρ,Q,Q̃) = -Σ_x Q̃(x) ln Σ_y P^{1-sρ}(y|x) [Σ_x' Q(x') P^s(y|x')]^ρ`.
///
/// A symbol in the support of `Q̃` whose outputs are all unreachable from the
/// support of `Q` makes the bound vanish and the exponent `+inf`.
pub fn conditional_e0_general(
    s: f64,
    rho: f64,
    q: &Distribution,
    qtilde: &Distribution,
    ch: &Channel,
) -> Result<f64> {
    let params = ExponentParams::with_s(rho, s)?;
    q.check_len(ch.num_inputs())?;
    qtilde.check_len(ch.num_inputs())?;
    let inner = log_output_mixture(ch, q, params.s());
    let own = 1.0 - params.s() * rho;
    let mut total = 0.0;
    for x in 0..ch.num_inputs() {
        let w = qtilde[x];
        if w == 0.0 {
            continue;
        }
        let log_sum = log_sum_exp(
            inner
                .iter()
                .enumerate()
                .map(|(y, l)| scaled_ln(ch.prob(x, y), own) + rho * l),
        );
        total -= w * log_sum;
    }
    Ok(total)
}

/// The per-symbol exponents `E(x) = -ln Σ_y P^{1/(1+ρ)}(y|x)[Σ_x' Q(x')P^{1/(1+ρ)}(y|x')]^ρ`.
///
/// The conditional exponent is linear in the transmitted type, so
/// `E₀(ρ,Q,Q̃) = Σ_x Q̃(x) E(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerLetterExponent {
    values: Vec<f64>,
    rho: f64,
    base_input: Distribution,
}

impl PerLetterExponent {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn base_input(&self) -> &Distribution {
        &self.base_input
    }

    /// `Σ_x Q̃(x) E(x)`, skipping symbols outside the support of `Q̃`.
    pub fn evaluate(&self, qtilde: &Distribution) -> Result<f64> {
        qtilde.check_len(self.values.len())?;
        Ok(self.weighted(qtilde.probs()))
    }

    pub(crate) fn weighted(&self, weights: &[f64]) -> f64 {
        weights
            .iter()
            .zip(&self.values)
            .filter(|(w, _)| **w != 0.0)
            .map(|(w, v)| w * v)
            .sum()
    }

    /// `E(P) - ρ D(P‖Q)`, `-inf` off the support of `Q`.
    pub fn penalized(&self, p: &Distribution) -> Result<f64> {
        let e = self.evaluate(p)?;
        let d = kl_divergence(p, &self.base_input)?;
        Ok(e - self.rho * d)
    }

    /// `max_x E(x)`, the largest value `E(P)` can take on the simplex.
    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn per_letter(rho: f64, q: &Distribution, ch: &Channel) -> Result<PerLetterExponent> {
    check_rho(rho)?;
    q.check_len(ch.num_inputs())?;
    let a = 1.0 / (1.0 + rho);
    let inner = log_output_mixture(ch, q, a);
    let values = (0..ch.num_inputs())
        .map(|x| {
            -log_sum_exp(
                inner
                    .iter()
                    .enumerate()
                    .map(|(y, l)| scaled_ln(ch.prob(x, y), a) + rho * l),
            )
        })
        .collect();
    Ok(PerLetterExponent {
        values,
        rho,
        base_input: q.clone(),
    })
}

/// The simplified conditional exponent `E₀(ρ,Q,Q̃)`, i.e. the general form at
/// `s = 1/(1+ρ)`.
pub fn conditional_e0(
    rho: f64,
    q: &Distribution,
    qtilde: &Distribution,
    ch: &Channel,
) -> Result<f64> {
    per_letter(rho, q, ch)?.evaluate(qtilde)
}

/// Relative entropy `D(Q̃‖Q)` in nats.
///
/// Returns `f64::INFINITY` when `Q̃` puts mass where `Q` has none; the
/// infinity propagates through penalized objectives as `-inf`.
pub fn kl_divergence(qtilde: &Distribution, q: &Distribution) -> Result<f64> {
    qtilde.check_len(q.len())?;
    let mut total = 0.0;
    for (&a, &b) in qtilde.probs().iter().zip(q.probs()) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return Ok(f64::INFINITY);
        }
        total += a * (a / b).ln();
    }
    Ok(total.max(0.0))
}

/// Minimizer of `E₀(ρ,Q,Q̃) + D(Q̃‖Q)` over `Q̃`, together with the minimum.
///
/// The objective is linear plus a divergence, so the minimizer is the tilt
/// `Q̃*(x) ∝ Q(x) exp(-E(x))` and the minimum equals `E₀(ρ,Q)`.
pub fn e0_decomposition_minimizer(
    rho: f64,
    q: &Distribution,
    ch: &Channel,
) -> Result<(Distribution, f64)> {
    check_rho(rho)?;
    q.check_len(ch.num_inputs())?;
    if let Some(index) = q.first_zero() {
        return Err(Error::NonPositiveInput { index });
    }
    let letters = per_letter(rho, q, ch)?;
    let log_w: Vec<f64> = q
        .probs()
        .iter()
        .zip(letters.values())
        .map(|(p, v)| p.ln() - v)
        .collect();
    let tilted = Distribution::from_log_weights(&log_w)?;
    let minimum = letters.evaluate(&tilted)? + kl_divergence(&tilted, q)?;
    Ok((tilted, minimum))
}
