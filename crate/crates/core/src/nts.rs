//! Monte Carlo experiment for natural type selection in channel coding.
//!
//! An infinite list of i.i.d. codewords is scored by the rate-penalized
//! conditional exponent `E(Q_m) - ρ ln(m)/n`; the favorite index `N_n` is the
//! first index attaining the maximum. Only the type of a codeword enters the
//! score, so codewords are drawn directly as multinomial count vectors.
//!
//! Two searches are provided. [`Search::Stream`] walks the list one codeword
//! at a time and stops once `ρ ln(m)/n` exceeds `max_x E(x) - best`, the
//! point past which no codeword can win. That point sits near
//! `exp{n (E_max - best)/ρ}`, far beyond reach for moderate `n`, so
//! [`Search::SkipAhead`] samples the same process exactly by jumping over
//! codewords that cannot beat the incumbent: the gap to the next codeword
//! whose type could still win is geometric with parameter equal to the
//! total class probability of those types.

use std::io::Write;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution as _};
use rayon::prelude::*;
use serde::Serialize;

use crate::arimoto::csv_err;
use crate::dmc::{check_rho, Channel, ChannelSpec, Distribution, EmpiricalType};
use crate::error::{Error, Result};
use crate::exponents::{kl_divergence, per_letter, PerLetterExponent};
use crate::numeric::log_add_exp;
use crate::oracle::{enumerate_types, type_count, TYPE_LIMIT};

pub const DEFAULT_M_CAP: u64 = 100_000_000;

/// How a trial walks the codeword list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Search {
    /// Draw every codeword in order.
    Stream,
    /// Draw only codewords that could still win; exact in distribution.
    SkipAhead,
    /// `SkipAhead` when the types of length `n` can be enumerated, else
    /// `Stream`.
    Auto,
}

#[derive(Debug, Clone)]
pub struct NtsConfig {
    pub rho: f64,
    pub q: Distribution,
    pub ch: Channel,
    pub n: u64,
    pub trials: usize,
    pub seed: u64,
    /// Hard cap on codewords drawn per trial.
    pub m_cap: Option<u64>,
    pub search: Search,
}

impl NtsConfig {
    pub fn new(rho: f64, q: Distribution, ch: Channel, n: u64, trials: usize, seed: u64) -> Self {
        NtsConfig {
            rho,
            q,
            ch,
            n,
            trials,
            seed,
            m_cap: Some(DEFAULT_M_CAP),
            search: Search::Auto,
        }
    }

    pub fn with_m_cap(mut self, m_cap: Option<u64>) -> Self {
        self.m_cap = m_cap;
        self
    }

    pub fn with_search(mut self, search: Search) -> Self {
        self.search = search;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_rho(self.rho)?;
        self.q.check_len(self.ch.num_inputs())?;
        if self.n == 0 {
            return Err(Error::ZeroBlockLength);
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.m_cap == Some(0) {
            return Err(Error::InvalidConfig("m_cap must be at least 1".into()));
        }
        if let Some(index) = self.q.first_zero() {
            return Err(Error::NonPositiveInput { index });
        }
        Ok(())
    }

    fn resolved_search(&self) -> Search {
        match self.search {
            Search::Auto => {
                if type_count(self.n, self.ch.num_inputs()) <= TYPE_LIMIT as f64 {
                    Search::SkipAhead
                } else {
                    Search::Stream
                }
            }
            s => s,
        }
    }
}

/// RNG for trial `t`: the ChaCha stream `t` under key `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Type of an i.i.d.(`Q`) word of length `n`, drawn as a multinomial count
/// vector through conditional binomials.
pub fn sample_codeword<R: Rng + ?Sized>(q: &Distribution, n: u64, rng: &mut R) -> EmpiricalType {
    let k = q.len();
    let mut counts = vec![0u64; k];
    let mut remaining = n;
    let mut mass = 1.0;
    for x in 0..k - 1 {
        if remaining == 0 {
            break;
        }
        let p = if mass > 0.0 {
            (q[x] / mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let c = if p >= 1.0 {
            remaining
        } else if p <= 0.0 {
            0
        } else {
            Binomial::new(remaining, p)
                .expect("p in (0,1)")
                .sample(rng)
        };
        counts[x] = c;
        remaining -= c;
        mass -= q[x];
    }
    counts[k - 1] += remaining;
    EmpiricalType::new(counts, n).expect("counts sum to n")
}

/// Outcome of one favorite-type search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FavoriteTypeResult {
    /// 1-based index `N_n` of the winning codeword.
    pub winner_index: u64,
    pub winner_type: EmpiricalType,
    /// `E(Q_{N_n}) - ρ ln(N_n)/n`.
    pub value: f64,
    /// Codewords actually drawn and scored.
    pub codewords_examined: u64,
    /// Position in the list where the search stopped. Equals
    /// `codewords_examined` for a streamed search; may be astronomically
    /// large (or infinite) after skipping.
    pub stream_position: f64,
    /// The search hit `m_cap` before its stopping rule fired.
    pub truncated: bool,
}

#[inline]
fn score(letters: &PerLetterExponent, counts: &[u64], n: f64) -> f64 {
    letters.weighted(
        &counts
            .iter()
            .map(|&c| c as f64 / n)
            .collect::<Vec<_>>(),
    )
}

#[inline]
fn penalty(rho: f64, index: f64, n: f64) -> f64 {
    rho * index.ln() / n
}

struct Streamer {
    letters: PerLetterExponent,
    e_max: f64,
}

impl Streamer {
    fn new(cfg: &NtsConfig) -> Result<Self> {
        let letters = per_letter(cfg.rho, &cfg.q, &cfg.ch)?;
        let e_max = letters.max_value();
        Ok(Streamer { letters, e_max })
    }

    fn run(
        &self,
        cfg: &NtsConfig,
        rng: &mut ChaCha8Rng,
        mut record: Option<&mut Vec<EmpiricalType>>,
    ) -> FavoriteTypeResult {
        let n = cfg.n as f64;
        let cap = cfg.m_cap.unwrap_or(u64::MAX);
        let mut best = f64::NEG_INFINITY;
        let mut winner: Option<(u64, EmpiricalType)> = None;
        let mut m: u64 = 1;
        let truncated = loop {
            // E(Q_m) ≤ e_max, so nothing from index m on can strictly win
            if m > 1 && penalty(cfg.rho, m as f64, n) >= self.e_max - best {
                break false;
            }
            if m > cap {
                break true;
            }
            let ty = sample_codeword(&cfg.q, cfg.n, rng);
            let value = score(&self.letters, ty.counts(), n) - penalty(cfg.rho, m as f64, n);
            if let Some(r) = record.as_deref_mut() {
                r.push(ty.clone());
            }
            if value > best {
                best = value;
                winner = Some((m, ty));
            }
            m += 1;
        };
        let (winner_index, winner_type) = winner.expect("first codeword always scores");
        FavoriteTypeResult {
            winner_index,
            winner_type,
            value: best,
            codewords_examined: m - 1,
            stream_position: (m - 1) as f64,
            truncated,
        }
    }
}

/// Types sorted by decreasing exponent with cumulative log class
/// probabilities, shared by all skip-ahead trials of one configuration.
struct SkipAheadTable {
    exponents: Vec<f64>,
    types: Vec<EmpiricalType>,
    log_cumulative: Vec<f64>,
}

impl SkipAheadTable {
    fn new(cfg: &NtsConfig) -> Result<Self> {
        let letters = per_letter(cfg.rho, &cfg.q, &cfg.ch)?;
        let table = enumerate_types(cfg.n, cfg.ch.num_inputs(), &cfg.q)?;
        let n = cfg.n as f64;
        let mut rows: Vec<(f64, f64, EmpiricalType)> = table
            .entries
            .into_iter()
            .filter(|e| e.log_prob > f64::NEG_INFINITY)
            .map(|e| (score(&letters, e.ty.counts(), n), e.log_prob, e.ty))
            .collect();
        rows.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.2.cmp(&b.2)));
        let mut log_cumulative = Vec::with_capacity(rows.len());
        let mut acc = f64::NEG_INFINITY;
        for r in &rows {
            acc = log_add_exp(acc, r.1);
            log_cumulative.push(acc);
        }
        Ok(SkipAheadTable {
            exponents: rows.iter().map(|r| r.0).collect(),
            types: rows.into_iter().map(|r| r.2).collect(),
            log_cumulative,
        })
    }

    /// Geometric gap on `{1, 2, …}` with success probability `exp(log_p)`.
    fn gap(log_p: f64, rng: &mut ChaCha8Rng) -> f64 {
        if log_p >= -1e-15 {
            return 1.0;
        }
        // u in (0, 1]
        let u = 1.0 - rng.random::<f64>();
        let p = log_p.exp();
        let g = if p > 0.0 {
            u.ln() / (-p).ln_1p()
        } else {
            -u.ln() * (-log_p).exp()
        };
        g.floor() + 1.0
    }

    fn run(&self, cfg: &NtsConfig, rng: &mut ChaCha8Rng) -> FavoriteTypeResult {
        let n = cfg.n as f64;
        let cap = cfg.m_cap.unwrap_or(u64::MAX);
        let mut position = 0.0f64;
        let mut best = f64::NEG_INFINITY;
        let mut winner: Option<(f64, usize)> = None;
        let mut draws = 0u64;
        let truncated = loop {
            let threshold = if winner.is_none() {
                f64::NEG_INFINITY
            } else {
                best + penalty(cfg.rho, position + 1.0, n)
            };
            let live = self.exponents.partition_point(|&e| e > threshold);
            if live == 0 {
                break false;
            }
            if draws >= cap {
                break true;
            }
            let log_p = self.log_cumulative[live - 1];
            position += Self::gap(log_p, rng);
            if !position.is_finite() {
                break false;
            }
            let u = 1.0 - rng.random::<f64>();
            let target = u.ln() + log_p;
            let i = self.log_cumulative[..live]
                .partition_point(|&c| c < target)
                .min(live - 1);
            draws += 1;
            let value = self.exponents[i] - penalty(cfg.rho, position, n);
            if value > best {
                best = value;
                winner = Some((position, i));
            }
        };
        let (index, i) = winner.expect("first draw always scores");
        let winner_index = if index >= u64::MAX as f64 {
            u64::MAX
        } else {
            index as u64
        };
        FavoriteTypeResult {
            winner_index,
            winner_type: self.types[i].clone(),
            value: self.exponents[i] - penalty(cfg.rho, winner_index as f64, n),
            codewords_examined: draws,
            stream_position: position,
            truncated,
        }
    }
}

enum Searcher {
    Stream(Streamer),
    SkipAhead(SkipAheadTable),
}

impl Searcher {
    fn new(cfg: &NtsConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(match cfg.resolved_search() {
            Search::SkipAhead => Searcher::SkipAhead(SkipAheadTable::new(cfg)?),
            _ => Searcher::Stream(Streamer::new(cfg)?),
        })
    }

    fn run(&self, cfg: &NtsConfig, rng: &mut ChaCha8Rng) -> FavoriteTypeResult {
        match self {
            Searcher::Stream(s) => s.run(cfg, rng, None),
            Searcher::SkipAhead(t) => t.run(cfg, rng),
        }
    }
}

/// Finds the favorite codeword `N_n = argmax_m {E(Q_m) - ρ ln(m)/n}` of one
/// random list, smallest index on ties.
///
/// A search that reaches `m_cap` returns its incumbent with
/// `truncated = true`.
pub fn favorite_type(cfg: &NtsConfig, rng: &mut ChaCha8Rng) -> Result<FavoriteTypeResult> {
    Ok(Searcher::new(cfg)?.run(cfg, rng))
}

/// Streamed search that also returns every type drawn, in order.
pub fn favorite_type_recorded(
    cfg: &NtsConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(FavoriteTypeResult, Vec<EmpiricalType>)> {
    cfg.validate()?;
    let streamer = Streamer::new(cfg)?;
    let mut stream = Vec::new();
    let result = streamer.run(cfg, rng, Some(&mut stream));
    Ok((result, stream))
}

/// Echo of the configuration in results files.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub rho: f64,
    pub q: Distribution,
    pub channel: ChannelSpec,
    pub n: u64,
    pub trials: usize,
    pub seed: u64,
    pub m_cap: Option<u64>,
    pub search: Search,
}

impl From<&NtsConfig> for ConfigEcho {
    fn from(cfg: &NtsConfig) -> Self {
        ConfigEcho {
            rho: cfg.rho,
            q: cfg.q.clone(),
            channel: ChannelSpec::from(&cfg.ch),
            n: cfg.n,
            trials: cfg.trials,
            seed: cfg.seed,
            m_cap: cfg.m_cap,
            search: cfg.resolved_search(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NtsAggregate {
    pub config: ConfigEcho,
    pub target: Distribution,
    /// Average of the winner types over trials.
    pub mean_type: Distribution,
    /// Total variation between `mean_type` and `target`.
    pub tv_to_target: f64,
    /// Median over trials of the total variation between the winner type
    /// and `target`.
    pub median_tv: f64,
    pub truncated_count: usize,
    pub per_trial: Vec<FavoriteTypeResult>,
}

impl NtsAggregate {
    pub fn trial_tv(&self) -> Vec<f64> {
        self.per_trial
            .iter()
            .map(|r| r.winner_type.to_distribution().total_variation(&self.target))
            .collect()
    }

    /// One row per trial.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let k = self.target.len();
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = vec!["n".into(), "trial".into(), "winner_index".into()];
        header.extend((0..k).map(|x| format!("count_{x}")));
        header.extend(
            ["value", "tv", "codewords_examined", "truncated"]
                .iter()
                .map(|s| s.to_string()),
        );
        w.write_record(&header).map_err(csv_err)?;
        self.write_csv_rows(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub(crate) fn write_csv_rows<W: Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        for (t, (r, tv)) in self.per_trial.iter().zip(self.trial_tv()).enumerate() {
            let mut row = vec![
                self.config.n.to_string(),
                t.to_string(),
                r.winner_index.to_string(),
            ];
            row.extend(r.winner_type.counts().iter().map(|c| c.to_string()));
            row.push(format!("{:.17e}", r.value));
            row.push(format!("{tv:.17e}"));
            row.push(r.codewords_examined.to_string());
            row.push(r.truncated.to_string());
            w.write_record(&row).map_err(csv_err)?;
        }
        Ok(())
    }
}

/// Median, averaging the two middle values for an even count.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k == 0 {
        f64::NAN
    } else if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Runs `cfg.trials` independent searches on the current rayon pool.
/// Trial `t` uses [`trial_rng`]`(seed, t)`, so results do not depend on
/// scheduling.
pub fn run_trials(cfg: &NtsConfig, target: &Distribution) -> Result<NtsAggregate> {
    target.check_len(cfg.ch.num_inputs())?;
    let searcher = Searcher::new(cfg)?;
    let per_trial: Vec<FavoriteTypeResult> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| searcher.run(cfg, &mut trial_rng(cfg.seed, t)))
        .collect();
    aggregate(cfg, target, per_trial)
}

/// [`run_trials`] on a dedicated pool of `threads` workers.
pub fn run_trials_with_threads(
    cfg: &NtsConfig,
    target: &Distribution,
    threads: usize,
) -> Result<NtsAggregate> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    pool.install(|| run_trials(cfg, target))
}

fn aggregate(
    cfg: &NtsConfig,
    target: &Distribution,
    per_trial: Vec<FavoriteTypeResult>,
) -> Result<NtsAggregate> {
    let k = cfg.ch.num_inputs();
    let mut sums = vec![0.0; k];
    for r in &per_trial {
        for (s, p) in sums.iter_mut().zip(r.winner_type.to_distribution().probs()) {
            *s += p;
        }
    }
    let mean_type = Distribution::from_weights(&sums)?;
    let tvs: Vec<f64> = per_trial
        .iter()
        .map(|r| r.winner_type.to_distribution().total_variation(target))
        .collect();
    Ok(NtsAggregate {
        config: cfg.into(),
        target: target.clone(),
        tv_to_target: mean_type.total_variation(target).min(1.0),
        median_tv: median(&tvs),
        truncated_count: per_trial.iter().filter(|r| r.truncated).count(),
        mean_type,
        per_trial,
    })
}

/// `⌈exp{n D(Q'‖Q)}⌉`, the codebook size at which a codeword of type near
/// `Q'` is expected to appear.
///
/// Returned as an integer-valued float: it overflows `u64` once
/// `n D(Q'‖Q)` passes about 44.
pub fn codebook_size_for_target(n: u64, q: &Distribution, qprime: &Distribution) -> Result<f64> {
    if n == 0 {
        return Err(Error::ZeroBlockLength);
    }
    let d = kl_divergence(qprime, q)?;
    if d.is_infinite() {
        return Err(Error::InfiniteDivergence);
    }
    Ok((n as f64 * d).exp().ceil())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(v: &[f64]) -> Distribution {
        Distribution::new(v.to_vec()).unwrap()
    }

    fn bsc() -> Channel {
        Channel::bsc(0.2).unwrap()
    }

    #[test]
    fn deterministic_source() {
        let mut rng = trial_rng(1, 0);
        let t = sample_codeword(&d(&[1.0, 0.0]), 17, &mut rng);
        assert_eq!(t.counts(), &[17, 0]);
        let t = sample_codeword(&d(&[0.0, 0.0, 1.0]), 5, &mut rng);
        assert_eq!(t.counts(), &[0, 0, 5]);
    }

    #[test]
    fn large_n_concentrates() {
        let mut rng = trial_rng(3, 0);
        let t = sample_codeword(&d(&[0.5, 0.5]), 100_000, &mut rng);
        assert!((t.to_distribution()[0] - 0.5).abs() < 0.01);
    }

    #[test]
    fn multinomial_mean() {
        let q = d(&[0.1, 0.9]);
        let mut rng = trial_rng(11, 0);
        let mut acc = 0.0;
        for _ in 0..10_000 {
            acc += sample_codeword(&q, 100, &mut rng).to_distribution()[0];
        }
        assert!((acc / 10_000.0 - 0.1).abs() < 0.005);
    }

    #[test]
    fn config_validation() {
        let base = NtsConfig::new(0.1, d(&[0.1, 0.9]), bsc(), 10, 1, 0);
        assert!(base.validate().is_ok());
        let mut c = base.clone();
        c.n = 0;
        assert_eq!(c.validate(), Err(Error::ZeroBlockLength));
        let mut c = base.clone();
        c.trials = 0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.q = d(&[1.0, 0.0]);
        assert!(c.validate().is_err());
        let mut c = base;
        c.rho = 2.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn value_recomputes_from_fields() {
        for search in [Search::Stream, Search::SkipAhead] {
            let cfg = NtsConfig::new(0.5, d(&[0.3, 0.7]), bsc(), 12, 1, 5).with_search(search);
            let letters = per_letter(0.5, &cfg.q, &cfg.ch).unwrap();
            for t in 0..50 {
                let r = favorite_type(&cfg, &mut trial_rng(5, t)).unwrap();
                let want = letters.evaluate(&r.winner_type.to_distribution()).unwrap()
                    - 0.5 * (r.winner_index as f64).ln() / 12.0;
                assert!((r.value - want).abs() < 1e-12);
                assert!(!r.truncated);
            }
        }
    }

    #[test]
    fn n_equal_one_picks_point_masses() {
        let cfg = NtsConfig::new(0.3, d(&[0.5, 0.5]), bsc(), 1, 1, 2).with_search(Search::Stream);
        let (r, stream) = favorite_type_recorded(&cfg, &mut trial_rng(2, 0)).unwrap();
        assert_eq!(r.winner_type.n(), 1);
        assert_eq!(stream.len() as u64, r.codewords_examined);
    }

    #[test]
    fn cap_truncates() {
        // the stopping rule needs roughly e^13 draws here
        let cfg = NtsConfig::new(0.1, d(&[0.1, 0.9]), bsc(), 30, 1, 0)
            .with_m_cap(Some(10))
            .with_search(Search::Stream);
        let r = favorite_type(&cfg, &mut trial_rng(0, 0)).unwrap();
        assert!(r.truncated);
        assert_eq!(r.codewords_examined, 10);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn codebook_size() {
        let q = d(&[0.1, 0.9]);
        assert_eq!(codebook_size_for_target(100, &q, &q).unwrap(), 1.0);
        let qp = d(&[0.5, 0.5]);
        let div = 0.5 * (0.5f64 / 0.1).ln() + 0.5 * (0.5f64 / 0.9).ln();
        let m = codebook_size_for_target(100, &q, &qp).unwrap();
        assert_eq!(m, (100.0 * div).exp().ceil());
        assert_eq!(codebook_size_for_target(1, &q, &qp).unwrap(), div.exp().ceil());
        assert_eq!(
            codebook_size_for_target(0, &q, &qp),
            Err(Error::ZeroBlockLength)
        );
        assert_eq!(
            codebook_size_for_target(5, &d(&[1.0, 0.0]), &qp),
            Err(Error::InfiniteDivergence)
        );
    }
}
