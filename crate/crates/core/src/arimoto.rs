//! Arimoto's alternating maximization for `max_Q E₀(ρ,Q)` and its `ρ → 0`
//! limit, the 1972 capacity iteration.
//!
//! One step freezes the backward matrix `Φ(x|y)` computed from the current
//! input and maximizes over the input; the composition is the closed-form
//! map [`q_update`]. Each step never decreases `E₀(ρ,·)`.

use std::io::Write;

use serde::Serialize;

use crate::dmc::{check_rho, Channel, Distribution};
use crate::error::{Error, Result};
use crate::exponents::{gallager_e0, log_output_mixture, mutual_information, per_letter};
use crate::numeric::{log_sum_exp, scaled_ln};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Backward transition matrix `Φ(x|y)`, stored `|Y| × |X|`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiMatrix {
    num_inputs: usize,
    num_outputs: usize,
    matrix: Vec<f64>,
    degenerate_outputs: Vec<usize>,
}

impl PhiMatrix {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.matrix[y * self.num_inputs + x]
    }

    /// `Φ(·|y)`.
    pub fn row(&self, y: usize) -> &[f64] {
        &self.matrix[y * self.num_inputs..(y + 1) * self.num_inputs]
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    /// Outputs no input in the support of `Q` can reach. Their rows are all
    /// zero instead of a distribution.
    pub fn degenerate_outputs(&self) -> &[usize] {
        &self.degenerate_outputs
    }
}

/// `Φ(x|y) = Q(x)P^{1/(1+ρ)}(y|x) / Σ_x' Q(x')P^{1/(1+ρ)}(y|x')`.
pub fn phi_step(rho: f64, q: &Distribution, ch: &Channel) -> Result<PhiMatrix> {
    check_rho(rho)?;
    q.check_len(ch.num_inputs())?;
    let a = 1.0 / (1.0 + rho);
    let inner = log_output_mixture(ch, q, a);
    let nx = ch.num_inputs();
    let mut matrix = vec![0.0; nx * ch.num_outputs()];
    let mut degenerate_outputs = Vec::new();
    for (y, &norm) in inner.iter().enumerate() {
        if norm == f64::NEG_INFINITY {
            degenerate_outputs.push(y);
            continue;
        }
        for x in 0..nx {
            if q[x] > 0.0 {
                matrix[y * nx + x] = (q[x].ln() + scaled_ln(ch.prob(x, y), a) - norm).exp();
            }
        }
    }
    Ok(PhiMatrix {
        num_inputs: nx,
        num_outputs: ch.num_outputs(),
        matrix,
        degenerate_outputs,
    })
}

/// Maximizes the Arimoto form over the input with `Φ` held fixed:
/// `Q'(x) ∝ [Σ_y P(y|x) Φ^{-ρ}(x|y)]^{-1/ρ}`.
pub fn maximize_given_phi(rho: f64, phi: &PhiMatrix, ch: &Channel) -> Result<Distribution> {
    check_rho(rho)?;
    if phi.num_inputs() != ch.num_inputs() || phi.num_outputs() != ch.num_outputs() {
        return Err(Error::LengthMismatch {
            expected: ch.num_inputs(),
            found: phi.num_inputs(),
        });
    }
    let log_w: Vec<f64> = (0..ch.num_inputs())
        .map(|x| {
            let mut blocked = false;
            let terms: Vec<f64> = (0..ch.num_outputs())
                .filter(|&y| ch.prob(x, y) > 0.0)
                .map(|y| {
                    let f = phi.get(x, y);
                    if f == 0.0 {
                        blocked = true;
                    }
                    ch.prob(x, y).ln() - rho * f.ln()
                })
                .collect();
            if blocked {
                // Φ(x|y) = 0 on a reachable output: the bracket is infinite
                f64::NEG_INFINITY
            } else {
                -log_sum_exp(terms) / rho
            }
        })
        .collect();
    Distribution::from_log_weights(&log_w)
}

/// One Arimoto step
/// `Q'(x) ∝ Q(x) [Σ_y P^{1/(1+ρ)}(y|x) (Σ_x' Q(x')P^{1/(1+ρ)}(y|x'))^ρ]^{-1/ρ}`,
/// computed as `ln Q(x) + E(x)/ρ` and normalized in the log domain.
pub fn q_update(rho: f64, q: &Distribution, ch: &Channel) -> Result<Distribution> {
    let letters = per_letter(rho, q, ch)?;
    let log_w: Vec<f64> = q
        .probs()
        .iter()
        .zip(letters.values())
        .map(|(&p, &v)| {
            if p == 0.0 {
                f64::NEG_INFINITY
            } else {
                p.ln() + v / rho
            }
        })
        .collect();
    Distribution::from_log_weights(&log_w)
}

/// The `ρ → 0` limit of [`q_update`]:
/// `Q'(x) ∝ Q(x) exp{Σ_y P(y|x) ln[P(y|x) / Σ_x' Q(x')P(y|x')]}`.
pub fn capacity_update(q: &Distribution, ch: &Channel) -> Result<Distribution> {
    q.check_len(ch.num_inputs())?;
    let output: Vec<f64> = (0..ch.num_outputs())
        .map(|y| (0..ch.num_inputs()).map(|x| q[x] * ch.prob(x, y)).sum())
        .collect();
    let log_w: Vec<f64> = (0..ch.num_inputs())
        .map(|x| {
            if q[x] == 0.0 {
                return f64::NEG_INFINITY;
            }
            let info: f64 = ch
                .row(x)
                .iter()
                .zip(&output)
                .filter(|(p, _)| **p > 0.0)
                .map(|(p, py)| p * (p.ln() - py.ln()))
                .sum();
            q[x].ln() + info
        })
        .collect();
    Distribution::from_log_weights(&log_w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    ToleranceMet,
    MaxIterations,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StopReason::ToleranceMet => write!(f, "ToleranceMet"),
            StopReason::MaxIterations => write!(f, "MaxIterations"),
        }
    }
}

/// Iterates of a solve together with the objective at each.
///
/// For [`solve`] the objective is `E₀(ρ,Q_k)`; for [`solve_capacity`] it is
/// `I(Q_k,P)` and `rho` is recorded as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ArimotoTrace {
    pub iterates: Vec<(Distribution, f64)>,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub rho: f64,
}

impl ArimotoTrace {
    pub fn final_input(&self) -> &Distribution {
        &self.iterates.last().expect("trace holds the start").0
    }

    pub fn final_objective(&self) -> f64 {
        self.iterates.last().expect("trace holds the start").1
    }

    /// Number of updates performed.
    pub fn iterations(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn is_monotone(&self, slack: f64) -> bool {
        self.iterates.windows(2).all(|w| w[1].1 >= w[0].1 - slack)
    }

    /// Writes `iter,Q_0,…,Q_{|X|-1},objective`, one row per iterate.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let k = self.iterates.first().map_or(0, |(q, _)| q.len());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["iter".to_string()];
        header.extend((0..k).map(|x| format!("Q_{x}")));
        header.push("objective".into());
        w.write_record(&header).map_err(csv_err)?;
        for (i, (q, obj)) in self.iterates.iter().enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(q.probs().iter().map(|p| format!("{p:.17e}")));
            row.push(format!("{obj:.17e}"));
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn check_start(q0: &Distribution, ch: &Channel, tol: f64) -> Result<()> {
    q0.check_len(ch.num_inputs())?;
    if let Some(index) = q0.first_zero() {
        return Err(Error::NonPositiveStart { index });
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    Ok(())
}

fn iterate<U, O>(
    rho: f64,
    q0: &Distribution,
    tol: f64,
    max_iter: usize,
    update: U,
    objective: O,
) -> Result<ArimotoTrace>
where
    U: Fn(&Distribution) -> Result<Distribution>,
    O: Fn(&Distribution) -> Result<f64>,
{
    let mut iterates = vec![(q0.clone(), objective(q0)?)];
    let mut stop_reason = StopReason::MaxIterations;
    for _ in 0..max_iter {
        let current = &iterates.last().expect("non-empty").0;
        let next = update(current)?;
        let delta = next.max_abs_diff(current);
        let value = objective(&next)?;
        iterates.push((next, value));
        if delta < tol {
            stop_reason = StopReason::ToleranceMet;
            break;
        }
    }
    Ok(ArimotoTrace {
        iterates,
        converged: stop_reason == StopReason::ToleranceMet,
        stop_reason,
        rho,
    })
}

/// Runs [`q_update`] from `q0` until `‖Q_{k+1} - Q_k‖∞ < tol` or `max_iter`
/// updates.
///
/// `q0` must be strictly positive: a zero coordinate stays zero forever.
pub fn solve(
    rho: f64,
    q0: &Distribution,
    ch: &Channel,
    tol: f64,
    max_iter: usize,
) -> Result<ArimotoTrace> {
    check_rho(rho)?;
    check_start(q0, ch, tol)?;
    iterate(
        rho,
        q0,
        tol,
        max_iter,
        |q| q_update(rho, q, ch),
        |q| gallager_e0(rho, q, ch),
    )
}

/// Runs [`capacity_update`]; the trace objective is `I(Q_k,P)`.
pub fn solve_capacity(
    q0: &Distribution,
    ch: &Channel,
    tol: f64,
    max_iter: usize,
) -> Result<ArimotoTrace> {
    check_start(q0, ch, tol)?;
    iterate(
        0.0,
        q0,
        tol,
        max_iter,
        |q| capacity_update(q, ch),
        |q| mutual_information(q, ch),
    )
}
