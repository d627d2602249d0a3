mod common;

use std::collections::HashMap;

use common::*;
use gallager_forge::arimoto::q_update;
use gallager_forge::dmc::{Channel, Distribution, EmpiricalType};
use gallager_forge::exponents::{conditional_e0, kl_divergence, per_letter};
use gallager_forge::nts::*;
use gallager_forge::oracle::exhaustive_double_max;

fn scores(rho: f64, q: &Distribution, ch: &Channel, stream: &[EmpiricalType]) -> Vec<f64> {
    let letters = per_letter(rho, q, ch).unwrap();
    stream
        .iter()
        .map(|t| letters.evaluate(&t.to_distribution()).unwrap())
        .collect()
}

fn small_config(n: u64) -> NtsConfig {
    NtsConfig::new(1.0, d(&[0.3, 0.7]), bsc(), n, 1, 3)
        .with_m_cap(Some(1000))
        .with_search(Search::Stream)
}

#[test]
fn sample_codeword_examples() {
    let mut r = rng(21);
    assert_eq!(sample_codeword(&d(&[1.0, 0.0]), 37, &mut r).counts(), &[37, 0]);
    let q = d(&[0.1, 0.9]);
    let mut mean = 0.0;
    for _ in 0..10_000 {
        mean += sample_codeword(&q, 100, &mut r).counts()[0] as f64 / 100.0;
    }
    assert!((mean / 10_000.0 - 0.1).abs() < 0.005);
    let t = sample_codeword(&d(&[0.5, 0.5]), 100_000, &mut r);
    assert!((t.to_distribution()[0] - 0.5).abs() < 0.01);
}

#[test]
fn codebook_size_examples() {
    let q = d(&[0.1, 0.9]);
    assert_eq!(codebook_size_for_target(50, &q, &q).unwrap(), 1.0);
    let qp = d(&[0.5, 0.5]);
    let dv = 0.5 * (0.5f64 / 0.1).ln() + 0.5 * (0.5f64 / 0.9).ln();
    let m = codebook_size_for_target(100, &q, &qp).unwrap();
    assert_eq!(m, (100.0 * dv).exp().ceil());
    assert_eq!(codebook_size_for_target(1, &q, &qp).unwrap(), dv.exp().ceil());
    assert!(codebook_size_for_target(0, &q, &qp).is_err());
}

#[test]
fn single_symbol_blocks_pick_best_letter_seen() {
    let ch = random_channel(3, 3, &mut rng(22));
    let q = d(&[0.2, 0.3, 0.5]);
    let cfg = NtsConfig::new(0.5, q.clone(), ch.clone(), 1, 1, 0).with_search(Search::Stream);
    let letters = per_letter(0.5, &q, &ch).unwrap();
    for t in 0..50 {
        let (res, stream) = favorite_type_recorded(&cfg, &mut trial_rng(9, t)).unwrap();
        let first_best = stream
            .iter()
            .enumerate()
            .map(|(m, ty)| (m, letters.evaluate(&ty.to_distribution()).unwrap() - 0.5 * ((m + 1) as f64).ln()))
            .fold((0, f64::NEG_INFINITY), |acc, (m, v)| if v > acc.1 { (m, v) } else { acc });
        assert_eq!(res.winner_index, first_best.0 as u64 + 1);
    }
}

#[test]
fn exhaustive_double_max_agrees_with_search() {
    for t in 0..100 {
        let cfg = small_config(8 + t % 5);
        let (res, stream) = favorite_type_recorded(&cfg, &mut trial_rng(5, t)).unwrap();
        assert_eq!(res.codewords_examined as usize, stream.len());
        let s = scores(cfg.rho, &cfg.q, &cfg.ch, &stream);
        let (idx, value) = exhaustive_double_max(&s, cfg.rho, cfg.n).unwrap();
        assert_eq!(idx, res.winner_index);
        assert!((value - res.value).abs() < 1e-12);
    }
}

#[test]
fn stopping_rule_never_misses_a_winner() {
    let mut checked = 0;
    for t in 0..200 {
        let cfg = small_config(6 + t % 10);
        let mut r = trial_rng(6, t);
        let (res, mut stream) = favorite_type_recorded(&cfg, &mut r).unwrap();
        if res.truncated {
            continue;
        }
        checked += 1;
        let examined = stream.len();
        for _ in 0..examined {
            stream.push(sample_codeword(&cfg.q, cfg.n, &mut r));
        }
        let s = scores(cfg.rho, &cfg.q, &cfg.ch, &stream);
        let (idx, value) = exhaustive_double_max(&s, cfg.rho, cfg.n).unwrap();
        assert_eq!(idx, res.winner_index);
        assert!(value <= res.value + 1e-12);
    }
    assert!(checked > 100);
}

#[test]
fn winner_dominates_every_prefix() {
    for t in 0..50 {
        let cfg = small_config(10);
        let (res, stream) = favorite_type_recorded(&cfg, &mut trial_rng(7, t)).unwrap();
        let s = scores(cfg.rho, &cfg.q, &cfg.ch, &stream);
        let mut running = f64::NEG_INFINITY;
        for (m, &e) in s.iter().enumerate() {
            running = running.max(e);
            let bound = running - cfg.rho * ((m + 1) as f64).ln() / cfg.n as f64;
            assert!(res.value >= bound - 1e-12);
        }
    }
}

#[test]
fn value_recomputes_from_fields() {
    for search in [Search::Stream, Search::SkipAhead] {
        let cfg = NtsConfig::new(0.1, d(&[0.1, 0.9]), bsc(), 60, 20, 4)
            .with_m_cap(Some(100_000))
            .with_search(search);
        let agg = run_trials(&cfg, &q_update(0.1, &cfg.q, &cfg.ch).unwrap()).unwrap();
        for r in &agg.per_trial {
            let e = conditional_e0(0.1, &cfg.q, &r.winner_type.to_distribution(), &cfg.ch).unwrap();
            let v = e - 0.1 * (r.winner_index as f64).ln() / 60.0;
            assert!((v - r.value).abs() < 1e-12);
        }
    }
}

#[test]
fn aggregate_is_independent_of_thread_count() {
    let cfg = NtsConfig::new(0.1, d(&[0.1, 0.9]), bsc(), 100, 64, 11);
    let target = q_update(0.1, &cfg.q, &cfg.ch).unwrap();
    let one = serde_json::to_string(&run_trials_with_threads(&cfg, &target, 1).unwrap()).unwrap();
    let four = serde_json::to_string(&run_trials_with_threads(&cfg, &target, 4).unwrap()).unwrap();
    let again = serde_json::to_string(&run_trials_with_threads(&cfg, &target, 4).unwrap()).unwrap();
    assert_eq!(one, four);
    assert_eq!(four, again);
}

#[test]
fn single_trial_reproduces_favorite_type() {
    let cfg = NtsConfig::new(0.1, d(&[0.1, 0.9]), bsc(), 80, 1, 123);
    let agg = run_trials(&cfg, &Distribution::uniform(2)).unwrap();
    let direct = favorite_type(&cfg, &mut trial_rng(123, 0)).unwrap();
    assert_eq!(agg.per_trial, vec![direct]);
}

#[test]
fn aggregate_invariants() {
    let cfg = NtsConfig::new(0.5, d(&[0.2, 0.3, 0.5]), random_channel(3, 4, &mut rng(23)), 30, 50, 1);
    let agg = run_trials(&cfg, &Distribution::uniform(3)).unwrap();
    assert!((agg.mean_type.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!((0.0..=1.0).contains(&agg.tv_to_target));
    assert_eq!(agg.per_trial.len(), 50);
}

#[test]
fn identity_channel_concentrates_at_uniform() {
    let u = Distribution::uniform(3);
    for rho in [0.2, 1.0] {
        let cfg = NtsConfig::new(rho, u.clone(), Channel::identity(3).unwrap(), 60, 200, 2);
        let agg = run_trials(&cfg, &u).unwrap();
        assert!(agg.tv_to_target < 0.02, "tv {}", agg.tv_to_target);
    }
}

#[test]
fn fixed_point_input_keeps_uniform_mean() {
    let u = Distribution::uniform(2);
    let cfg = NtsConfig::new(0.1, u.clone(), bsc(), 200, 200, 8);
    let agg = run_trials(&cfg, &u).unwrap();
    assert!(agg.tv_to_target < 0.02);
}

#[test]
fn cap_marks_truncation() {
    let cfg = NtsConfig::new(0.1, d(&[0.1, 0.9]), bsc(), 30, 20, 1)
        .with_m_cap(Some(10))
        .with_search(Search::Stream);
    let agg = run_trials(&cfg, &Distribution::uniform(2)).unwrap();
    assert_eq!(agg.truncated_count, 20);
    assert!(agg.per_trial.iter().all(|r| r.codewords_examined == 10));
}

#[test]
fn skip_ahead_matches_stream_in_distribution() {
    let base = NtsConfig::new(1.0, d(&[0.3, 0.7]), bsc(), 10, 4000, 31).with_m_cap(None);
    let freq = |search| {
        let agg = run_trials(&base.clone().with_search(search), &Distribution::uniform(2)).unwrap();
        let mut h = vec![0.0f64; 11];
        for r in &agg.per_trial {
            h[r.winner_type.counts()[0] as usize] += 1.0 / 4000.0;
        }
        h
    };
    let a = freq(Search::Stream);
    let b = freq(Search::SkipAhead);
    let tv: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0;
    assert!(tv < 0.04, "{a:?} vs {b:?}");
}

#[test]
fn first_occurrence_of_modal_type_is_deep() {
    let q = d(&[0.3, 0.7]);
    let n = 40;
    let cfg = NtsConfig::new(1.0, q.clone(), bsc(), n, 1000, 41);
    let agg = run_trials(&cfg, &Distribution::uniform(2)).unwrap();
    let mut counts: HashMap<EmpiricalType, usize> = HashMap::new();
    for r in &agg.per_trial {
        *counts.entry(r.winner_type.clone()).or_default() += 1;
    }
    let modal = counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
        .unwrap()
        .0;
    let div = kl_divergence(&modal.to_distribution(), &q).unwrap();
    let mut deep = 0;
    for t in 0..1000 {
        let mut r = trial_rng(42, t);
        let mut m = 1u64;
        while sample_codeword(&q, n, &mut r) != modal {
            m += 1;
        }
        if (m as f64).ln() / n as f64 > div - 0.15 {
            deep += 1;
        }
    }
    assert!(deep >= 950, "{deep} of 1000");
}

#[test]
fn config_validation() {
    let base = NtsConfig::new(0.5, d(&[0.5, 0.5]), bsc(), 10, 1, 0);
    assert!(NtsConfig { n: 0, ..base.clone() }.validate().is_err());
    assert!(NtsConfig { trials: 0, ..base.clone() }.validate().is_err());
    assert!(NtsConfig { rho: 0.0, ..base.clone() }.validate().is_err());
    assert!(NtsConfig { q: d(&[0.0, 1.0]), ..base.clone() }.validate().is_err());
    assert!(base.validate().is_ok());
}

#[test]
fn csv_rows_match_header() {
    let cfg = NtsConfig::new(0.1, d(&[0.1, 0.9]), bsc(), 50, 10, 0);
    let agg = run_trials(&cfg, &Distribution::uniform(2)).unwrap();
    let mut buf = Vec::new();
    agg.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    let cols = lines.next().unwrap().split(',').count();
    assert_eq!(cols, 9);
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|l| l.split(',').count() == cols));
}
