//! Brute-force references used to cross-check the closed forms.
//!
//! These routines enumerate instead of solving: every type of a given
//! denominator, every output sequence of a short block, every point of a
//! simplex lattice. They are slow by construction and guarded by size
//! limits.

use statrs::function::gamma::ln_gamma;

use crate::dmc::{check_rho, Channel, Distribution, EmpiricalType};
use crate::error::{Error, Result};
use crate::exponents::{conditional_e0_general, kl_divergence, per_letter, PerLetterExponent};

/// Largest number of types [`enumerate_types`] will produce.
pub const TYPE_LIMIT: u64 = 10_000_000;
/// Largest `|Y|^n` [`exhaustive_conditional_bound`] will sum over.
pub const OUTPUT_SPACE_LIMIT: u64 = 1_000_000;
/// Largest input alphabet accepted by [`grid_min_decomposition`].
pub const GRID_ALPHABET_LIMIT: usize = 4;

/// Number of types with denominator `n` on `k` symbols, `C(n+k-1, k-1)`.
pub fn type_count(n: u64, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let r = (k - 1) as f64;
    let n = n as f64;
    (ln_gamma(n + r + 1.0) - ln_gamma(r + 1.0) - ln_gamma(n + 1.0))
        .exp()
        .round()
}

fn check_type_count(n: u64, k: usize) -> Result<()> {
    let count = type_count(n, k);
    if count > TYPE_LIMIT as f64 {
        return Err(Error::TooManyTypes {
            count,
            limit: TYPE_LIMIT,
        });
    }
    Ok(())
}

/// Calls `f` on every composition of `n` into `k` non-negative parts, in
/// decreasing lexicographic order.
pub(crate) fn for_each_composition(n: u64, k: usize, mut f: impl FnMut(&[u64])) {
    fn rec(pos: usize, remaining: u64, counts: &mut [u64], f: &mut impl FnMut(&[u64])) {
        if pos == counts.len() - 1 {
            counts[pos] = remaining;
            f(counts);
            return;
        }
        for c in (0..=remaining).rev() {
            counts[pos] = c;
            rec(pos + 1, remaining - c, counts, f);
        }
    }
    if k == 0 {
        return;
    }
    let mut counts = vec![0u64; k];
    rec(0, n, &mut counts, &mut f);
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeClassEntry {
    pub ty: EmpiricalType,
    /// `ln [n! / Π_x counts[x]!]`.
    pub log_coefficient: f64,
    /// `ln Pr(type class)` for i.i.d. draws from `Q`; `-inf` off the support.
    pub log_prob: f64,
}

/// All types of denominator `n` with their class probabilities under `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeClassTable {
    pub n: u64,
    pub alphabet_size: usize,
    pub entries: Vec<TypeClassEntry>,
}

impl TypeClassTable {
    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|e| e.log_prob.exp()).sum()
    }
}

pub fn enumerate_types(n: u64, alphabet_size: usize, q: &Distribution) -> Result<TypeClassTable> {
    if n == 0 {
        return Err(Error::ZeroBlockLength);
    }
    q.check_len(alphabet_size)?;
    check_type_count(n, alphabet_size)?;
    let log_q: Vec<f64> = q.probs().iter().map(|p| p.ln()).collect();
    let ln_n_fact = ln_gamma(n as f64 + 1.0);
    let mut entries = Vec::new();
    for_each_composition(n, alphabet_size, |counts| {
        let log_coefficient =
            ln_n_fact - counts.iter().map(|&c| ln_gamma(c as f64 + 1.0)).sum::<f64>();
        let log_prob = log_coefficient
            + counts
                .iter()
                .zip(&log_q)
                .filter(|(c, _)| **c > 0)
                .map(|(&c, lq)| c as f64 * lq)
                .sum::<f64>();
        entries.push(TypeClassEntry {
            ty: EmpiricalType::new(counts.to_vec(), n).expect("composition sums to n"),
            log_coefficient,
            log_prob,
        });
    });
    Ok(TypeClassTable {
        n,
        alphabet_size,
        entries,
    })
}

/// Result of a search over the type lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeArgmax {
    pub ty: EmpiricalType,
    pub value: f64,
    /// `false` when the constraint set held no type and the
    /// divergence-minimizing type was returned instead.
    pub feasible: bool,
}

fn type_divergence(counts: &[u64], n: f64, q: &Distribution) -> f64 {
    let mut total = 0.0;
    for (x, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        if q[x] == 0.0 {
            return f64::INFINITY;
        }
        let p = c as f64 / n;
        total += p * (p / q[x]).ln();
    }
    total.max(0.0)
}

fn type_exponent(letters: &PerLetterExponent, counts: &[u64], n: f64) -> f64 {
    counts
        .iter()
        .zip(letters.values())
        .filter(|(c, _)| **c > 0)
        .map(|(&c, v)| c as f64 * v)
        .sum::<f64>()
        / n
}

/// Replace when strictly better, or equal and lexicographically smaller.
fn better(value: f64, counts: &[u64], best: &Option<(Vec<u64>, f64)>) -> bool {
    match best {
        None => true,
        Some((bc, bv)) => value > *bv || (value == *bv && counts < bc.as_slice()),
    }
}

/// Exact argmax of `E(T) - ρ D(T‖Q)` over types of denominator `n`.
pub fn best_type_exact(
    rho: f64,
    q: &Distribution,
    ch: &Channel,
    n: u64,
) -> Result<LatticeArgmax> {
    check_rho(rho)?;
    if n == 0 {
        return Err(Error::ZeroBlockLength);
    }
    q.check_len(ch.num_inputs())?;
    check_type_count(n, ch.num_inputs())?;
    let letters = per_letter(rho, q, ch)?;
    let nf = n as f64;
    let mut best: Option<(Vec<u64>, f64)> = None;
    for_each_composition(n, ch.num_inputs(), |counts| {
        let value = type_exponent(&letters, counts, nf) - rho * type_divergence(counts, nf, q);
        if better(value, counts, &best) {
            best = Some((counts.to_vec(), value));
        }
    });
    let (counts, value) = best.expect("at least one type");
    Ok(LatticeArgmax {
        ty: EmpiricalType::new(counts, n)?,
        value,
        feasible: true,
    })
}

/// Exact argmax of `E(T)` over types with `D(T‖Q) ≤ radius`.
///
/// If no type lies in the ball, the type of smallest divergence is returned
/// with `feasible = false`.
pub fn constrained_best_type(
    rho: f64,
    q: &Distribution,
    ch: &Channel,
    n: u64,
    radius: f64,
) -> Result<LatticeArgmax> {
    check_rho(rho)?;
    if n == 0 {
        return Err(Error::ZeroBlockLength);
    }
    if !(radius >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "radius must be non-negative, got {radius}"
        )));
    }
    q.check_len(ch.num_inputs())?;
    check_type_count(n, ch.num_inputs())?;
    let letters = per_letter(rho, q, ch)?;
    let nf = n as f64;
    let mut best: Option<(Vec<u64>, f64)> = None;
    // fallback keyed on -divergence so `better` picks the closest type
    let mut closest: Option<(Vec<u64>, f64)> = None;
    for_each_composition(n, ch.num_inputs(), |counts| {
        let div = type_divergence(counts, nf, q);
        if div <= radius {
            let value = type_exponent(&letters, counts, nf);
            if better(value, counts, &best) {
                best = Some((counts.to_vec(), value));
            }
        } else if best.is_none() && better(-div, counts, &closest) {
            closest = Some((counts.to_vec(), -div));
        }
    });
    match best {
        Some((counts, value)) => Ok(LatticeArgmax {
            ty: EmpiricalType::new(counts, n)?,
            value,
            feasible: true,
        }),
        None => {
            let (counts, _) = closest.expect("at least one type");
            let value = type_exponent(&letters, &counts, nf);
            Ok(LatticeArgmax {
                ty: EmpiricalType::new(counts, n)?,
                value,
                feasible: false,
            })
        }
    }
}

/// Minimum of `E₀(ρ,Q,Q̃) + D(Q̃‖Q)` over the simplex lattice of spacing at
/// most `step`.
///
/// The per-symbol exponents are taken from the general-`s` evaluation at
/// point masses, not from the closed-form tilt.
pub fn grid_min_decomposition(
    rho: f64,
    q: &Distribution,
    ch: &Channel,
    step: f64,
) -> Result<(Distribution, f64)> {
    check_rho(rho)?;
    let k = ch.num_inputs();
    if k > GRID_ALPHABET_LIMIT {
        return Err(Error::AlphabetTooLarge {
            found: k,
            limit: GRID_ALPHABET_LIMIT,
        });
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidStep(step));
    }
    q.check_len(k)?;
    let s = 1.0 / (1.0 + rho);
    let values = (0..k)
        .map(|x| conditional_e0_general(s, rho, q, &Distribution::point_mass(k, x), ch))
        .collect::<Result<Vec<f64>>>()?;
    let resolution = (1.0 / step - 1e-9).ceil() as u64;
    let nf = resolution as f64;
    let mut best: Option<(Vec<u64>, f64)> = None;
    for_each_composition(resolution, k, |counts| {
        let e: f64 = counts
            .iter()
            .zip(&values)
            .filter(|(c, _)| **c > 0)
            .map(|(&c, v)| c as f64 / nf * v)
            .sum();
        let value = e + type_divergence(counts, nf, q);
        // minimizing: negate for `better`
        if better(-value, counts, &best) {
            best = Some((counts.to_vec(), -value));
        }
    });
    let (counts, neg) = best.expect("lattice is non-empty");
    let point = EmpiricalType::new(counts, resolution)?.to_distribution();
    Ok((point, -neg))
}

/// Brute-force evaluation of the block conditional bound
/// `M^ρ Σ_𝐲 P^{1-sρ}(𝐲|𝐱_m) [Σ_𝐱 Q(𝐱) P^s(𝐲|𝐱)]^ρ`
/// for the transmitted word `word`, summing over all `|Y|^n` output
/// sequences. The inner sum over input sequences factors per letter.
pub fn exhaustive_conditional_bound(
    s: f64,
    rho: f64,
    q: &Distribution,
    ch: &Channel,
    word: &[usize],
    codebook_size: u64,
) -> Result<f64> {
    check_rho(rho)?;
    if !(s > 0.0 && s * rho < 1.0) {
        return Err(Error::InvalidS { s, rho });
    }
    q.check_len(ch.num_inputs())?;
    if word.is_empty() {
        return Err(Error::EmptyWord);
    }
    for (position, &symbol) in word.iter().enumerate() {
        if symbol >= ch.num_inputs() {
            return Err(Error::SymbolOutOfRange {
                position,
                symbol,
                alphabet_size: ch.num_inputs(),
            });
        }
    }
    let ny = ch.num_outputs();
    let count = (ny as f64).powi(word.len() as i32);
    if count > OUTPUT_SPACE_LIMIT as f64 {
        return Err(Error::OutputSpaceTooLarge {
            count,
            limit: OUTPUT_SPACE_LIMIT,
        });
    }
    let count = count as usize;
    // Σ_x Q(x) P^s(y|x) per output letter
    let mixture: Vec<f64> = (0..ny)
        .map(|y| {
            (0..ch.num_inputs())
                .filter(|&x| q[x] > 0.0)
                .map(|x| q[x] * ch.prob(x, y).powf(s))
                .sum()
        })
        .collect();
    let own = 1.0 - s * rho;
    let mut ys = vec![0usize; word.len()];
    let mut total = 0.0;
    for _ in 0..count {
        let mut sent = 1.0;
        let mut others = 1.0;
        for (k, &y) in ys.iter().enumerate() {
            sent *= ch.prob(word[k], y).powf(own);
            others *= mixture[y];
        }
        if sent > 0.0 && others > 0.0 {
            total += sent * others.powf(rho);
        }
        // odometer increment
        for digit in ys.iter_mut() {
            *digit += 1;
            if *digit < ny {
                break;
            }
            *digit = 0;
        }
    }
    Ok((codebook_size as f64).powf(rho) * total)
}

/// Exhaustive double maximization over nested codebooks:
/// `max_M max_{m ≤ M} {E(Q_m) - ρ ln(M)/n}` for `M = 1..=scores.len()`.
///
/// `scores[m-1]` is `E(Q_m)`. Returns the 1-based winning index and value,
/// preferring the smallest `M` and then the smallest `m` on ties.
pub fn exhaustive_double_max(scores: &[f64], rho: f64, n: u64) -> Option<(u64, f64)> {
    let mut best: Option<(u64, f64)> = None;
    for big_m in 1..=scores.len() {
        let penalty = rho * (big_m as f64).ln() / n as f64;
        for (i, &e) in scores[..big_m].iter().enumerate() {
            let value = e - penalty;
            if best.is_none_or(|(_, v)| value > v) {
                best = Some((i as u64 + 1, value));
            }
        }
    }
    best
}

/// `D(T‖Q)` for a type, exposed for diagnostics.
pub fn divergence_of_type(ty: &EmpiricalType, q: &Distribution) -> Result<f64> {
    kl_divergence(&ty.to_distribution(), q)
}
