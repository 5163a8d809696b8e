//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use timt_core::format::{parse_response, Tag, TaskLayout};
use timt_core::grpo::{
    compute_advantages, grpo_objective, Candidate, KlMode, QuestionVocab, RolloutGroup, ToyPolicy,
    Trainer, TrainerConfig,
};
use timt_core::reward::{
    correlation_matrix, final_reward, rank_correlation, CorrelationKind, RewardMode,
};
use timt_core::textmetrics::{
    bleu, cer, chrf_pp, edit_distance_norm, meteor, token_f1, tokenize, Lang, Metric,
};
use timt_core::{build_curriculum, CurriculumStrategy, Difficulty, TimtRecord};
use timt_harness::experiments::toy_rollouts;
use timt_harness::score::score_all;
use timt_harness::service::{router, AppState};
use timt_harness::Dataset;
use timt_oracles as oracle;
use tokio::io::{AsyncReadExt, AsyncWriteExt};

type Check = fn() -> Result<String, String>;

const WORDS: [&str; 12] = [
    "the", "cat", "sat", "on", "mat", "a", "dog", "ran", ",", "open", "door", ".",
];
const HANZI: [&str; 10] = ["老", "友", "记", "你", "好", "世", "界", "。", "门", "开"];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn repo_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn sentence(rng: &mut impl Rng, pool: &[&str], min: usize, max: usize) -> String {
    let n = rng.gen_range(min..=max);
    (0..n)
        .map(|_| *pool.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

fn toks(s: &str, lang: &Lang) -> Vec<String> {
    tokenize(s, lang).tokens
}

fn chars(s: &str) -> Vec<char> {
    s.chars().collect()
}

fn metric_oracle_equivalence() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut compared = 0;
    for i in 0..200 {
        let (pool, lang): (&[&str], Lang) = if i % 3 == 2 {
            (&HANZI, "zh".into())
        } else {
            (&WORDS, "en".into())
        };
        let h = sentence(&mut rng, pool, 0, 12);
        let r = sentence(&mut rng, pool, 1, 12);
        let (ht, rt) = (toks(&h, &lang), toks(&r, &lang));
        let pairs = [
            ("bleu", bleu(&h, &r, &lang), oracle::bleu(&ht, &rt)),
            ("chrf_pp", chrf_pp(&h, &r), oracle::chrf_pp(&h, &r)),
            ("meteor", meteor(&h, &r, &lang), oracle::meteor(&ht, &rt)),
            (
                "token_f1",
                token_f1(&h, &r, &lang),
                oracle::token_f1(&ht, &rt),
            ),
            (
                "edit_distance",
                edit_distance_norm(&h, &r, &lang).map_err(|e| e.to_string())?,
                oracle::levenshtein(&ht, &rt) as f64 / rt.len() as f64,
            ),
            (
                "cer",
                cer(&h, &r).map_err(|e| e.to_string())?,
                oracle::levenshtein(&chars(&h), &chars(&r)) as f64 / r.chars().count() as f64,
            ),
        ];
        for (name, got, want) in pairs {
            ensure((got - want).abs() <= 1e-9, || {
                format!("{name} on {h:?} / {r:?}: {got} vs oracle {want}")
            })?;
            compared += 1;
        }
    }
    Ok(format!("{compared} metric values match oracles to 1e-9"))
}

fn random_record(rng: &mut impl Rng, i: usize) -> TimtRecord {
    let (src, tgt): (&str, &str) = if rng.gen_bool(0.5) {
        ("en", "zh")
    } else {
        ("zh", "en")
    };
    let pool = |l: &str| -> &'static [&'static str] {
        if l == "zh" {
            &HANZI
        } else {
            &WORDS
        }
    };
    let s = sentence(rng, pool(src), 1, 10);
    let t = sentence(rng, pool(tgt), 1, 10);
    TimtRecord::new(format!("r{i}"), src, tgt, s, t, rng.gen_range(1..8), None)
}

fn oracle_translation(seg: &str, rec: &TimtRecord, mode: &RewardMode) -> f64 {
    let (h, r) = (
        toks(seg, &rec.tgt_lang),
        toks(&rec.reference_translation, &rec.tgt_lang),
    );
    let v: Vec<f64> = mode
        .components()
        .iter()
        .map(|m| match m {
            Metric::Bleu => oracle::bleu(&h, &r),
            Metric::ChrFpp => oracle::chrf_pp(seg, &rec.reference_translation),
            Metric::Meteor => oracle::meteor(&h, &r),
            other => panic!("not a translation metric: {other}"),
        })
        .collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn reward_formula_exactness() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let modes = RewardMode::standard_modes();
    let (mut valid, mut invalid) = (0, 0);
    for i in 0..1000 {
        let rec = random_record(&mut rng, i);
        let layout = *TaskLayout::ALL.choose(&mut rng).unwrap();
        let mode = modes.choose(&mut rng).unwrap();
        let src_pool: &[&str] = if rec.src_lang.is_unsegmented() {
            &HANZI
        } else {
            &WORDS
        };
        let tgt_pool: &[&str] = if rec.tgt_lang.is_unsegmented() {
            &HANZI
        } else {
            &WORDS
        };
        let rec_seg = sentence(&mut rng, src_pool, 0, 10);
        let trans_seg = sentence(&mut rng, tgt_pool, 0, 10);
        let mut raw = layout.render(&rec_seg, "reasoning", &trans_seg);
        match rng.gen_range(0..6) {
            0 => raw.push_str(" trailing"),
            1 => raw = raw.replacen(Tag::Translate.close(), "", 1),
            _ => {}
        }
        let b =
            final_reward(&parse_response(&raw, layout), &rec, mode).map_err(|e| e.to_string())?;
        if !parse_response(&raw, layout).format_ok {
            ensure(
                b.final_reward == -3.0 && b.recognition.is_none() && b.translation.is_none(),
                || format!("case {i}: broken format gave {b:?}"),
            )?;
            invalid += 1;
            continue;
        }
        valid += 1;
        let trans = oracle_translation(&trans_seg, &rec, mode);
        let rec_reward = if layout.requires(Tag::Recognize) {
            let (h, r) = (
                toks(&rec_seg, &rec.src_lang),
                toks(&rec.source_text, &rec.src_lang),
            );
            let clamp = |x: f64| (1.0 - x).clamp(0.0, 1.0);
            let terms = [
                ("rec_bleu", oracle::bleu(&h, &r)),
                ("rec_meteor", oracle::meteor(&h, &r)),
                ("rec_token_f1", oracle::token_f1(&h, &r)),
                (
                    "rec_edit_distance",
                    oracle::levenshtein(&h, &r) as f64 / r.len() as f64,
                ),
                (
                    "rec_cer",
                    oracle::levenshtein(&chars(&rec_seg), &chars(&rec.source_text)) as f64
                        / rec.source_text.chars().count() as f64,
                ),
            ];
            for (key, want) in terms {
                let got = b
                    .component(key)
                    .ok_or_else(|| format!("case {i}: missing {key}"))?;
                ensure((got - want).abs() <= 1e-12, || {
                    format!("case {i}: {key} {got} vs {want}")
                })?;
            }
            let r = (terms[0].1 + terms[1].1 + terms[2].1 + clamp(terms[3].1) + clamp(terms[4].1))
                / 5.0;
            let got = b
                .recognition
                .ok_or_else(|| format!("case {i}: recognition missing"))?;
            ensure((got - r).abs() <= 1e-12, || {
                format!("case {i}: recognition {got} vs {r}")
            })?;
            r
        } else {
            ensure(b.recognition.is_none(), || {
                format!("case {i}: unexpected recognition")
            })?;
            0.0
        };
        let want = 1.0 + rec_reward + trans;
        ensure((b.final_reward - want).abs() <= 1e-12, || {
            format!("case {i}: final {} vs {want}", b.final_reward)
        })?;
    }
    Ok(format!(
        "{valid} well-formed and {invalid} malformed cases exact to 1e-12"
    ))
}

fn advantage_normalization() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut zero_var = 0;
    for i in 0..1000 {
        let g = rng.gen_range(2..=32);
        let rewards: Vec<f64> = if i % 10 == 0 {
            vec![rng.gen_range(-3.0..3.0); g]
        } else {
            (0..g).map(|_| rng.gen_range(-3.0..3.0)).collect()
        };
        let a = compute_advantages(&rewards).map_err(|e| e.to_string())?;
        let n = g as f64;
        let mean = a.iter().sum::<f64>() / n;
        let std = (a.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        if a.iter().all(|x| *x == 0.0) {
            zero_var += 1;
            continue;
        }
        ensure(mean.abs() < 1e-9 && (std - 1.0).abs() < 1e-9, || {
            format!("group {i}: mean {mean} std {std}")
        })?;
    }
    let hand = |r: &[f64], want: &[f64]| -> Result<(), String> {
        let a = compute_advantages(r).map_err(|e| e.to_string())?;
        ensure(
            a.iter().zip(want).all(|(x, w)| (x - w).abs() < 1e-4),
            || format!("{r:?} -> {a:?}"),
        )
    };
    hand(&[0.0, 1.0], &[-1.0, 1.0])?;
    hand(&[1.0, 2.0, 3.0], &[-1.2247, 0.0, 1.2247])?;
    Ok(format!(
        "1000 groups standardized ({zero_var} zero-variance), hand cases reproduced"
    ))
}

struct GradInstance {
    policy: ToyPolicy,
    group: RolloutGroup,
    config: TrainerConfig,
}

fn grad_instance(rng: &mut impl Rng, kl_mode: KlMode) -> GradInstance {
    let n = rng.gen_range(3..8);
    let mut logits = |k: usize, s: f64| (0..k).map(|_| rng.gen_range(-s..s)).collect::<Vec<f64>>();
    let q = QuestionVocab::new("q", (0..n).map(|i| format!("o{i}")).collect());
    let mut policy = ToyPolicy::from_logits(vec![q], vec![logits(n, 1.0)]);
    let current = logits(n, 1.5);
    let behavior: Vec<f64> = current
        .iter()
        .map(|t| t + rng.gen_range(-0.6..0.6))
        .collect();
    policy.set_params(&current);
    policy.set_behavior(&behavior);
    let g = rng.gen_range(2..12);
    let (old, refl) = (policy.behavior_log_probs(0), policy.reference_log_probs(0));
    let candidates = (0..g)
        .map(|_| {
            let a = rng.gen_range(0..n);
            Candidate {
                response: format!("o{a}"),
                action: a,
                old_logprobs: Some(vec![old[a]]),
                ref_logprobs: Some(vec![refl[a]]),
            }
        })
        .collect();
    let rewards = (0..g).map(|_| rng.gen_range(-3.0..3.0)).collect();
    GradInstance {
        policy,
        group: RolloutGroup::new("q", candidates, rewards).unwrap(),
        config: TrainerConfig {
            beta: rng.gen_range(0.0..0.2),
            epsilon: rng.gen_range(0.1..0.3),
            kl_mode,
            ..TrainerConfig::default()
        },
    }
}

fn gradient_correctness() -> Result<String, String> {
    const H: f64 = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut done, mut skipped, mut clip_pos, mut clip_neg, mut worst) = (0, 0, 0, 0, 0.0f64);
    while done < 100 {
        let inst = grad_instance(
            &mut rng,
            if done % 2 == 0 {
                KlMode::Estimator
            } else {
                KlMode::Exact
            },
        );
        let lp = inst.policy.log_probs(0);
        let eps = inst.config.epsilon;
        let ratios: Vec<f64> = inst
            .group
            .candidates
            .iter()
            .map(|c| (lp[c.action] - c.old_logprobs.as_ref().unwrap()[0]).exp())
            .collect();
        // central differences straddling a clip kink are not a valid oracle
        if ratios
            .iter()
            .any(|r| (r - 1.0 - eps).abs() < 1e-3 || (r - 1.0 + eps).abs() < 1e-3)
        {
            skipped += 1;
            continue;
        }
        for (r, a) in ratios.iter().zip(&inst.group.advantages) {
            clip_pos += (*a > 0.0 && *r > 1.0 + eps) as usize;
            clip_neg += (*a < 0.0 && *r < 1.0 - eps) as usize;
        }
        let value = |theta: &[f64]| {
            let mut p = inst.policy.clone();
            p.set_params(theta);
            grpo_objective(&inst.group, &p, &inst.config).unwrap().value
        };
        let analytic = grpo_objective(&inst.group, &inst.policy, &inst.config)
            .map_err(|e| e.to_string())?
            .gradient;
        let theta = inst.policy.params().to_vec();
        let numeric: Vec<f64> = (0..theta.len())
            .map(|k| {
                let (mut up, mut down) = (theta.clone(), theta.clone());
                up[k] += H;
                down[k] -= H;
                (value(&up) - value(&down)) / (2.0 * H)
            })
            .collect();
        let diff = analytic
            .iter()
            .zip(&numeric)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let rel = diff / numeric.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-6);
        worst = worst.max(rel);
        ensure(rel <= 1e-4, || {
            format!("instance {done}: relative error {rel:e}")
        })?;
        done += 1;
    }
    ensure(clip_pos > 0 && clip_neg > 0, || {
        format!("clipping not exercised on both signs (+{clip_pos}, -{clip_neg})")
    })?;
    Ok(format!("100 instances, worst relative error {worst:.2e}, clipped +{clip_pos}/-{clip_neg}, {skipped} near-kink draws skipped"))
}

fn synthetic() -> Result<Dataset, String> {
    Dataset::load(repo_path("../../data/synthetic.jsonl")).map_err(|e| e.to_string())
}

fn format_learning_dynamics() -> Result<String, String> {
    let records = synthetic()?.records().to_vec();
    let mut notes = Vec::new();
    for seed in 0..3 {
        let t0 = Instant::now();
        let config = TrainerConfig {
            seed,
            max_steps: 501,
            ..TrainerConfig::default()
        };
        let mut trainer = Trainer::new(records.clone(), config).map_err(|e| e.to_string())?;
        let mut translation = Vec::new();
        let summary = trainer
            .run(|r| translation.push(r.mean_translation))
            .map_err(|e| e.to_string())?;
        let converged = summary.steps_to_format_convergence;
        ensure(converged.is_some_and(|s| s < 200), || {
            format!("seed {seed}: format convergence at {converged:?}")
        })?;
        let gain = translation[500] - translation[0];
        ensure(gain >= 0.1, || {
            format!("seed {seed}: translation gain {gain:.4}")
        })?;
        ensure(t0.elapsed() < Duration::from_secs(120), || {
            format!("seed {seed}: {:?}", t0.elapsed())
        })?;
        notes.push(format!(
            "seed {seed}: converged at step {}, translation {:.3} -> {:.3}",
            converged.unwrap(),
            translation[0],
            translation[500]
        ));
    }
    Ok(notes.join("; "))
}

fn curriculum_invariants() -> Result<String, String> {
    let records = synthetic()?.records().to_vec();
    let level = |id: &String| records.iter().find(|r| &r.id == id).unwrap().difficulty;
    let levels = |s, seed| -> Result<Vec<Difficulty>, String> {
        Ok(build_curriculum(&records, s, seed)
            .map_err(|e| e.to_string())?
            .order
            .iter()
            .map(level)
            .collect())
    };
    for seed in 0..5 {
        let asc = levels(CurriculumStrategy::Ascend, seed)?;
        ensure(asc.windows(2).all(|w| w[0] <= w[1]), || {
            format!("seed {seed}: ascend out of order")
        })?;
        let mut rev = asc.clone();
        rev.reverse();
        ensure(levels(CurriculumStrategy::Descend, seed)? == rev, || {
            format!("seed {seed}: descend is not the level reverse")
        })?;
        let a = build_curriculum(&records, CurriculumStrategy::Shuffle, seed).unwrap();
        ensure(
            a == build_curriculum(&records, CurriculumStrategy::Shuffle, seed).unwrap(),
            || "shuffle not reproducible".into(),
        )?;
        let b = build_curriculum(&records, CurriculumStrategy::Shuffle, seed + 100).unwrap();
        ensure(a.order != b.order, || {
            format!("seeds {seed} and {} gave the same shuffle", seed + 100)
        })?;
    }
    let bands: Vec<usize> = Difficulty::ALL
        .iter()
        .map(|d| records.iter().filter(|r| r.difficulty == *d).count())
        .collect();
    Ok(format!(
        "{} records (easy/medium/hard {bands:?}), 5 seeds and 5 shuffle seed pairs",
        records.len()
    ))
}

fn correlation_fidelity() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 50 {
        let n = rng.gen_range(2..40);
        let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(0..6) as f64).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.gen_range(0..6) as f64).collect();
        let (Ok(k), Ok(s)) = (
            rank_correlation(&xs, &ys, CorrelationKind::Kendall),
            rank_correlation(&xs, &ys, CorrelationKind::Spearman),
        ) else {
            continue;
        };
        ensure((k - oracle::kendall_tau_b(&xs, &ys)).abs() <= 1e-9, || {
            format!("kendall {xs:?} {ys:?}")
        })?;
        ensure((s - oracle::spearman(&xs, &ys)).abs() <= 1e-9, || {
            format!("spearman {xs:?} {ys:?}")
        })?;
        checked += 1;
    }
    let dataset = synthetic()?;
    let rollouts = toy_rollouts(dataset.records(), TaskLayout::FullTasks, 200, 7);
    let scored = score_all(
        &dataset,
        &rollouts,
        TaskLayout::FullTasks,
        &RewardMode::mixed(),
    )
    .map_err(|e| e.to_string())?;
    let modes = RewardMode::standard_modes();
    let series: Vec<Vec<f64>> = modes
        .iter()
        .map(|m| {
            scored
                .iter()
                .map(|s| s.breakdown.final_under(m).unwrap())
                .collect()
        })
        .collect();
    for kind in [CorrelationKind::Spearman, CorrelationKind::Kendall] {
        let m = correlation_matrix(&series, kind).map_err(|e| e.to_string())?;
        for (i, row) in m.iter().enumerate() {
            ensure(row[i] == 1.0, || format!("{kind:?} diagonal {i}"))?;
            for (j, v) in row.iter().enumerate() {
                ensure(v.is_finite() && *v == m[j][i], || {
                    format!("{kind:?} entry ({i},{j})")
                })?;
            }
        }
    }
    Ok("50 tied vectors match pair enumeration; 4x4 matrices over 200 rollouts symmetric, unit-diagonal, finite".into())
}

/// Minimal HTTP/1.1 client: one request per connection.
async fn http_post(addr: std::net::SocketAddr, body: &[u8]) -> Result<(u16, Vec<u8>), String> {
    let mut stream = tokio::net::TcpStream::connect(addr)
        .await
        .map_err(|e| e.to_string())?;
    let head = format!(
        "POST /v1/score HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        body.len()
    );
    stream
        .write_all(head.as_bytes())
        .await
        .map_err(|e| e.to_string())?;
    stream.write_all(body).await.map_err(|e| e.to_string())?;
    let mut raw = Vec::new();
    stream
        .read_to_end(&mut raw)
        .await
        .map_err(|e| e.to_string())?;
    let split = raw
        .windows(4)
        .position(|w| w == b"\r\n\r\n")
        .ok_or("no header terminator")?;
    let header = String::from_utf8_lossy(&raw[..split]).to_ascii_lowercase();
    let status = header
        .split_whitespace()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .ok_or("bad status line")?;
    let body = raw[split + 4..].to_vec();
    if let Some(len) = header
        .lines()
        .find_map(|l| l.strip_prefix("content-length:"))
    {
        let len: usize = len.trim().parse().map_err(|_| "bad content-length")?;
        ensure(body.len() == len, || {
            format!("body {} bytes, header says {len}", body.len())
        })?;
    }
    Ok((status, body))
}

fn service_determinism() -> Result<String, String> {
    let request = std::fs::read(repo_path("tests/fixtures/replay_request.json"))
        .map_err(|e| e.to_string())?;
    let recorded = std::fs::read(repo_path("tests/fixtures/replay_response.json"))
        .map_err(|e| e.to_string())?;
    let dataset = synthetic()?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0")
            .await
            .map_err(|e| e.to_string())?;
        let addr = listener.local_addr().map_err(|e| e.to_string())?;
        let app = router(AppState::new(dataset));
        let server = tokio::spawn(async move { axum::serve(listener, app).await });
        let request = Arc::new(request);
        let tasks: Vec<_> = (0..32)
            .map(|_| {
                let request = Arc::clone(&request);
                tokio::spawn(async move { http_post(addr, &request).await })
            })
            .collect();
        let mut bodies = Vec::new();
        for t in tasks {
            let (status, body) = t.await.map_err(|e| e.to_string())??;
            ensure(status == 200, || {
                format!("status {status}: {}", String::from_utf8_lossy(&body))
            })?;
            bodies.push(body);
        }
        ensure(bodies.iter().all(|b| *b == bodies[0]), || {
            "concurrent bodies differ".into()
        })?;
        let (_, replay) = http_post(addr, &request).await?;
        server.abort();
        ensure(replay == recorded, || {
            format!(
                "replay differs from recording:\n{}\n{}",
                String::from_utf8_lossy(&replay),
                String::from_utf8_lossy(&recorded)
            )
        })?;
        Ok(format!(
            "32 concurrent bodies identical ({} bytes); replay matches recording byte-for-byte",
            bodies[0].len()
        ))
    })
}

fn fuzz_input(rng: &mut impl Rng, layout: TaskLayout) -> String {
    const PIECES: [&str; 12] = [
        "<recognize>",
        "</recognize>",
        "<think>",
        "</think>",
        "<translate>",
        "</translate>",
        " ",
        "\n",
        "<",
        ">",
        "/",
        "x",
    ];
    let random_text = |rng: &mut ChaCha8Rng, n: usize| -> String {
        (0..n)
            .map(|_| match rng.gen_range(0..4) {
                0 => rng.gen_range(' '..='~'),
                1 => rng.gen_range('\u{4e00}'..='\u{4fff}'),
                2 => char::from_u32(rng.gen_range(0..0x11000)).unwrap_or('\u{fffd}'),
                _ => *['<', '>', '/', ' ', '\n', '\t'].choose(rng).unwrap(),
            })
            .collect()
    };
    let mut r = ChaCha8Rng::seed_from_u64(rng.gen());
    match rng.gen_range(0..3) {
        0 => random_text(&mut r, rng.gen_range(0..80)),
        1 => (0..rng.gen_range(0..20))
            .map(|_| *PIECES.choose(rng).unwrap())
            .collect(),
        _ => {
            let segs: Vec<String> = (0..3)
                .map(|_| random_text(&mut r, rng.gen_range(0..12)).replace(['<', '>'], ""))
                .collect();
            let mut s = layout.render(&segs[0], &segs[1], &segs[2]);
            if rng.gen_bool(0.3) {
                let at = s.char_indices().map(|(i, _)| i).collect::<Vec<_>>();
                s.insert_str(*at.choose(rng).unwrap(), PIECES.choose(rng).unwrap());
            }
            s
        }
    }
}

fn parser_robustness() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut ok = 0;
    for layout in TaskLayout::ALL {
        for i in 0..10_000 {
            let raw = fuzz_input(&mut rng, layout);
            let parsed = catch_unwind(|| parse_response(&raw, layout))
                .map_err(|_| format!("{layout} input {i} panicked: {raw:?}"))?;
            if parsed.format_ok {
                ok += 1;
                let rendered = parsed
                    .render()
                    .ok_or_else(|| format!("{layout} input {i}: cannot render"))?;
                ensure(parse_response(&rendered, layout) == parsed, || {
                    format!("{layout} input {i} does not round-trip: {raw:?}")
                })?;
            }
        }
    }
    Ok(format!(
        "40000 inputs, no panic, {ok} well-formed parses round-trip"
    ))
}

fn main() {
    let criteria: [(&str, Duration, Check); 9] = [
        (
            "metric oracle equivalence",
            Duration::from_secs(10),
            metric_oracle_equivalence,
        ),
        (
            "reward formula exactness",
            Duration::from_secs(5),
            reward_formula_exactness,
        ),
        (
            "advantage normalization",
            Duration::from_secs(2),
            advantage_normalization,
        ),
        (
            "gradient correctness",
            Duration::from_secs(30),
            gradient_correctness,
        ),
        (
            "format-learning dynamics",
            Duration::from_secs(360),
            format_learning_dynamics,
        ),
        (
            "curriculum invariants",
            Duration::from_secs(1),
            curriculum_invariants,
        ),
        (
            "correlation fidelity",
            Duration::from_secs(5),
            correlation_fidelity,
        ),
        (
            "service determinism",
            Duration::from_secs(10),
            service_determinism,
        ),
        (
            "parser robustness",
            Duration::from_secs(10),
            parser_robustness,
        ),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = t0.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= *budget {
                Ok(detail)
            } else {
                Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}"))
            }
        });
        match outcome {
            Ok(detail) => println!("PASS [{}] {name} ({elapsed:.2?}): {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL [{}] {name} ({elapsed:.2?}): {reason}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
