//! Acceptance gate. Each criterion prints one PASS/FAIL line; the process exits
//! non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lsaqu_core::{
    build_raw_matrix, build_space, build_subspace, build_vocabulary, classify_all, confusion, fit_log_entropy,
    fit_tfidf, load_documents, metrics, predict, truncated_svd, ClassifierConfig, Document, DocumentFormat, LabelMode,
    LsaError, Neighbor64, OriginKind, Predicted, Prediction64, ProjectedVector64, QuIndicator, ReviewItem, RulePath,
    SchemeKind, SemanticSpace64, Semantics, Source, SpaceConfig, Subspace64, SvdOptions, TermDocMatrix64, Tokenizer,
};

type Outcome = Result<String, String>;

struct Criterion {
    id: u8,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures/separable")
        .join(name)
}

fn oracle_singular_values(rows: &[Vec<f64>]) -> Vec<f64> {
    let (m, n) = (rows.len(), rows[0].len());
    let a = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
    let mut s: Vec<f64> = a.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

fn svd_oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_sigma, mut worst_orth) = (0.0f64, 0.0f64);
    for case in 0..200 {
        let m = rng.gen_range(1..=50);
        let n = rng.gen_range(1..=50);
        let density = rng.gen_range(0.05..=0.5);
        let mut trips = Vec::new();
        for i in 0..m {
            for j in 0..n {
                if rng.gen_bool(density) {
                    trips.push((i, j, rng.gen_range(0.05..4.0)));
                }
            }
        }
        if trips.is_empty() {
            trips.push((rng.gen_range(0..m), rng.gen_range(0..n), 1.0));
        }
        let a = TermDocMatrix64::from_triplets(m, n, trips, Semantics::Weighted).map_err(|e| e.to_string())?;
        let want = oracle_singular_values(&a.to_dense());
        let k = rng.gen_range(1..=m.min(n));
        let svd = truncated_svd(&a, k, &SvdOptions::default()).map_err(|e| format!("case {case}: {e}"))?;
        let rank_k = want.iter().take(k).filter(|&&s| s > want[0] * 1e-12).count();
        ensure(svd.effective_k() == rank_k, || {
            format!("case {case}: effective k {} vs oracle rank {rank_k}", svd.effective_k())
        })?;
        for (i, s) in svd.sigma.iter().enumerate() {
            worst_sigma = worst_sigma.max((s - want[i]).abs());
        }
        worst_orth = worst_orth.max(svd.u.orthonormality_error());
        ensure(worst_sigma <= 1e-8 && worst_orth <= 1e-8, || {
            format!("case {case} ({m}x{n}, k={k}): |Δσ| {worst_sigma:.2e}, orthonormality {worst_orth:.2e}")
        })?;
    }
    Ok(format!(
        "200 matrices, max |Δσ| {worst_sigma:.1e}, max ‖UᵀU−I‖ {worst_orth:.1e}"
    ))
}

fn eckart_young() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for case in 0..20 {
        let m = rng.gen_range(3..=25);
        let n = rng.gen_range(3..=25);
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let trips = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &v)| (i, j, v)));
        let a = TermDocMatrix64::from_triplets(m, n, trips, Semantics::Weighted).map_err(|e| e.to_string())?;
        let k = rng.gen_range(1..m.min(n));
        let svd = truncated_svd(&a, k, &SvdOptions::default()).map_err(|e| e.to_string())?;
        let mut residual = 0.0;
        for (i, row) in rows.iter().enumerate() {
            for (j, a_ij) in row.iter().enumerate() {
                let approx: f64 = (0..k).map(|c| svd.u[(i, c)] * svd.sigma[c] * svd.v[(j, c)]).sum();
                residual += (a_ij - approx).powi(2);
            }
        }
        let tail: f64 = oracle_singular_values(&rows)[k..].iter().map(|s| s * s).sum();
        let rel = (residual - tail).abs() / tail;
        worst = worst.max(rel);
        ensure(rel <= 1e-6, || {
            format!("case {case} ({m}x{n}, k={k}): relative error {rel:.2e}")
        })?;
    }
    Ok(format!("20 matrices, max relative error {worst:.1e}"))
}

fn random_corpus(rng: &mut ChaCha8Rng, vocab: usize, max_docs: usize) -> Vec<Document> {
    let n_docs = rng.gen_range(3..=max_docs);
    (0..n_docs)
        .map(|d| {
            let len = rng.gen_range(2..=8);
            let words: Vec<String> = (0..len).map(|_| format!("w{}x", rng.gen_range(0..vocab))).collect();
            Document::corpus(format!("d{d}"), words.join(" "))
        })
        .collect()
}

fn fold_in_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut empty = 0;
    for case in 0..20 {
        let docs = random_corpus(&mut rng, 14, 12);
        let weighting = if case % 2 == 0 {
            SchemeKind::LogEntropy
        } else {
            SchemeKind::Tfidf
        };
        let config = SpaceConfig {
            weighting,
            ..SpaceConfig::default()
        };
        let (space, _): (SemanticSpace64, _) = build_space(&docs, &config).map_err(|e| e.to_string())?;
        let v = space.v().ok_or("V was not kept")?;
        for (i, doc) in docs.iter().enumerate() {
            match space.fold_in(doc) {
                Ok(q) => {
                    for (a, b) in q.coords.iter().zip(v.row(i)) {
                        worst = worst.max((a - b).abs());
                    }
                }
                Err(LsaError::EmptyProjection { .. }) => {
                    empty += 1;
                    ensure(v.row(i).iter().all(|x| x.abs() <= 1e-8), || {
                        format!("case {case}: doc {i} folds to zero but its V row does not")
                    })?;
                }
                Err(e) => return Err(e.to_string()),
            }
        }
        ensure(worst <= 1e-8, || format!("case {case}: max deviation {worst:.2e}"))?;
    }
    Ok(format!(
        "20 corpora, max |q̂ − v| {worst:.1e} ({empty} all-zero documents)"
    ))
}

fn weighting_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let tok = Tokenizer::default();
    let (mut n_single, mut n_uniform, mut n_ubiq) = (0, 0, 0);
    for case in 0..1000 {
        let n_docs = rng.gen_range(2..=12);
        let uniform_tf = rng.gen_range(1..=3);
        let docs: Vec<Document> = (0..n_docs)
            .map(|d| {
                let mut words: Vec<String> = (0..rng.gen_range(0..=6))
                    .map(|_| format!("w{}x", rng.gen_range(0..8)))
                    .collect();
                words.extend(std::iter::repeat_n("uniformx".to_owned(), uniform_tf));
                if rng.gen_bool(0.5) {
                    words.extend(std::iter::repeat_n(format!("solo{d}x"), rng.gen_range(1..=4)));
                }
                words.shuffle(&mut rng);
                Document::corpus(format!("d{d}"), words.join(" "))
            })
            .collect();
        let vocab = build_vocabulary(&docs, &tok).map_err(|e| e.to_string())?;
        let raw = build_raw_matrix::<f64>(&docs, &vocab, &tok)
            .map_err(|e| e.to_string())?
            .matrix;
        let le = fit_log_entropy(&raw).map_err(|e| e.to_string())?;
        let tfidf = fit_tfidf(&raw).map_err(|e| e.to_string())?;
        let n = n_docs as f64;
        for (t, term) in vocab.terms().iter().enumerate() {
            let tfs: Vec<f64> = (0..n_docs).map(|d| raw.get(t, d)).filter(|&x| x > 0.0).collect();
            let gf: f64 = tfs.iter().sum();
            let entropy: f64 = tfs.iter().map(|tf| (tf / gf) * (tf / gf).ln()).sum();
            let g_oracle = (1.0 + entropy / n.ln()).clamp(0.0, 1.0);
            let g = le.global_weights[t];
            let idf = tfidf.global_weights[t];
            ensure((0.0..=1.0).contains(&g), || {
                format!("case {case}: g({term}) = {g} outside [0, 1]")
            })?;
            ensure((g - g_oracle).abs() <= 1e-12, || {
                format!("case {case}: g({term}) = {g}, expected {g_oracle}")
            })?;
            ensure((idf - (n / tfs.len() as f64).ln()).abs() <= 1e-12, || {
                format!("case {case}: idf({term}) = {idf}")
            })?;
            if tfs.len() == 1 {
                n_single += 1;
                ensure(g == 1.0, || {
                    format!("case {case}: single-document term {term} has g = {g}")
                })?;
            }
            if term == "uniformx" {
                n_uniform += 1;
                ensure(g.abs() <= 1e-12, || format!("case {case}: uniform term has g = {g}"))?;
            }
            if tfs.len() == n_docs {
                n_ubiq += 1;
                ensure(idf == 0.0, || {
                    format!("case {case}: ubiquitous term {term} has idf = {idf}")
                })?;
            }
        }
    }
    Ok(format!(
        "1000 corpora; {n_single} single-document, {n_uniform} uniform, {n_ubiq} ubiquitous terms checked"
    ))
}

use QuIndicator::{Effectiveness as E, Efficiency as F, FreedomFromRisk as R};

fn nb(id: &str, label: QuIndicator, score: f64) -> Neighbor64 {
    Neighbor64 {
        scale_id: id.into(),
        label,
        score,
    }
}

/// Neighbors in rank order get ids `n0`, `n1`, ... unless given explicitly.
fn list(entries: &[(f64, QuIndicator)]) -> Vec<Neighbor64> {
    entries
        .iter()
        .enumerate()
        .map(|(i, &(s, l))| nb(&format!("n{i}"), l, s))
        .collect()
}

fn rule_table() -> Outcome {
    use RulePath::{MajorityVote as Maj, TieBrokenByScore as Tie, VarianceGap as Gap};
    let t = 0.2;
    let cases: Vec<(Vec<Neighbor64>, f64, QuIndicator, RulePath)> = vec![
        // single neighbor
        (list(&[(0.9, E)]), t, E, Gap),
        (list(&[(0.1, R)]), t, R, Gap),
        (list(&[(-0.5, F)]), t, F, Gap),
        // gap above the threshold
        (list(&[(0.75, E), (0.5, F), (0.5, F), (0.25, F)]), t, E, Gap),
        (list(&[(1.0, R), (0.5, E)]), t, R, Gap),
        (
            list(&[(0.875, F), (0.625, R), (0.5, R), (0.5, R), (0.25, R), (0.125, R)]),
            t,
            F,
            Gap,
        ),
        (
            list(&[(0.5, E), (0.25, F), (0.25, F), (0.125, F), (0.0, F), (-0.25, F)]),
            t,
            E,
            Gap,
        ),
        (list(&[(0.0, R), (-0.25, E), (-0.5, E)]), t, R, Gap),
        (list(&[(-0.25, E), (-0.5, F), (-0.5, F)]), t, E, Gap),
        // gap equal to the threshold is not above it
        (list(&[(0.75, E), (0.5, F), (0.5, F)]), 0.25, F, Maj),
        // gap below the threshold, unique majority
        (
            list(&[(0.75, E), (0.625, F), (0.5, F), (0.375, F), (0.25, E), (0.125, R)]),
            t,
            F,
            Maj,
        ),
        (list(&[(0.5, R), (0.5, R), (0.5, E)]), t, R, Maj),
        (
            list(&[(0.9, E), (0.8, E), (0.7, E), (0.6, F), (0.5, F), (0.4, R)]),
            t,
            E,
            Maj,
        ),
        (
            list(&[(0.5, F), (0.375, E), (0.25, E), (0.125, E), (0.0, R), (-0.125, R)]),
            t,
            E,
            Maj,
        ),
        (list(&[(0.3, R), (0.25, F), (0.2, F)]), t, F, Maj),
        (
            list(&[(0.5, R), (0.5, R), (0.5, R), (0.5, R), (0.5, R), (0.5, R)]),
            t,
            R,
            Maj,
        ),
        (list(&[(0.5, E), (0.375, E)]), t, E, Maj),
        (list(&[(-0.25, E), (-0.375, F), (-0.5, F)]), t, F, Maj),
        (list(&[(0.5, F), (0.4375, R), (0.375, R), (0.25, R)]), t, R, Maj),
        // two-way frequency ties
        (list(&[(0.5, E), (0.375, F)]), t, E, Tie),
        (list(&[(0.5, F), (0.4375, E), (0.375, E), (0.25, F)]), t, F, Tie),
        (
            list(&[(0.5, E), (0.4375, F), (0.375, F), (0.25, E), (0.125, R)]),
            t,
            E,
            Tie,
        ),
        (
            list(&[(0.625, F), (0.5, R), (0.5, R), (0.375, F), (0.25, F), (0.125, R)]),
            t,
            F,
            Tie,
        ),
        (
            list(&[(0.5, E), (0.4375, F), (0.375, R), (0.25, F), (0.125, R)]),
            t,
            F,
            Tie,
        ),
        (
            list(&[(0.5, E), (0.4375, R), (0.375, F), (0.25, F), (0.125, R)]),
            t,
            R,
            Tie,
        ),
        (vec![nb("s1", E, 0.5), nb("s2", F, 0.5)], t, E, Tie),
        (vec![nb("a", F, 0.5), nb("b", E, 0.5)], t, F, Tie),
        // three-way frequency ties
        (list(&[(0.5, R), (0.4375, E), (0.375, F)]), t, R, Tie),
        (
            list(&[(0.5, E), (0.4375, E), (0.375, F), (0.25, F), (0.125, R), (0.0, R)]),
            t,
            E,
            Tie,
        ),
        (
            list(&[(0.25, F), (0.125, R), (0.0, E), (-0.125, F), (-0.25, R), (-0.375, E)]),
            t,
            F,
            Tie,
        ),
        (vec![nb("s-a", R, 0.5), nb("s-b", E, 0.5), nb("s-c", F, 0.5)], t, R, Tie),
        // other thresholds
        (list(&[(0.5, E), (0.4375, F), (0.375, F)]), 0.0, E, Gap),
        (vec![nb("a", E, 0.5), nb("b", F, 0.5), nb("c", F, 0.5)], 0.0, F, Maj),
        (list(&[(1.0, E), (-1.0, F)]), 2.0, E, Tie),
        (list(&[(1.0, R), (-0.5, F), (-0.5, F)]), 1.0, R, Gap),
    ];
    let mut covered = BTreeMap::new();
    for (i, (neighbors, threshold, label, path)) in cases.iter().enumerate() {
        let got = predict(neighbors, *threshold).map_err(|e| format!("trace {i}: {e}"))?;
        ensure(got == (*label, *path), || {
            format!("trace {i}: got {got:?}, expected {:?}", (label, path))
        })?;
        *covered.entry(path.as_str()).or_insert(0) += 1;
    }
    ensure(cases.len() >= 30, || format!("only {} traces", cases.len()))?;
    Ok(format!("{} traces match; by rule path {covered:?}", cases.len()))
}

fn unit_vector(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if v.iter().any(|x| x.abs() > 1e-3) {
            return v;
        }
    }
}

/// Scores every scale, sorts the full list and applies the decision rule by counting.
fn oracle_predict(
    review: &[f64],
    scales: &[ProjectedVector64],
    top_n: usize,
    threshold: f64,
) -> (Predicted, RulePath, Vec<String>) {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut scored: Vec<(f64, &str, QuIndicator)> = scales
        .iter()
        .map(|s| {
            let d: f64 = review.iter().zip(&s.coords).map(|(a, b)| a * b).sum();
            let c = (d / (norm(review) * norm(&s.coords))).clamp(-1.0, 1.0);
            (c, s.origin_id.as_str(), s.label.unwrap())
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
    scored.truncate(top_n);
    let ids = scored.iter().map(|s| s.1.to_owned()).collect();
    if scored.len() == 1 || scored[0].0 - scored[1].0 > threshold {
        return (scored[0].2.into(), RulePath::VarianceGap, ids);
    }
    let mut counts: BTreeMap<QuIndicator, usize> = BTreeMap::new();
    for s in &scored {
        *counts.entry(s.2).or_default() += 1;
    }
    let max = *counts.values().max().unwrap();
    let leaders: Vec<QuIndicator> = counts.iter().filter(|(_, &c)| c == max).map(|(&l, _)| l).collect();
    if leaders.len() == 1 {
        return (leaders[0].into(), RulePath::MajorityVote, ids);
    }
    let first = scored.iter().find(|s| leaders.contains(&s.2)).unwrap();
    (first.2.into(), RulePath::TieBrokenByScore, ids)
}

fn brute_force_classifier() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut compared = 0;
    for case in 0..50 {
        let k = rng.gen_range(1..=10);
        let n_scales = rng.gen_range(1..=100);
        let n_reviews = rng.gen_range(1..=50);
        let mut scales: Vec<ProjectedVector64> = Vec::new();
        for i in 0..n_scales {
            let coords = if i > 0 && rng.gen_bool(0.15) {
                scales[rng.gen_range(0..i)].coords.clone()
            } else {
                unit_vector(&mut rng, k)
            };
            scales.push(ProjectedVector64 {
                coords,
                origin_id: format!("s{:03}", rng.gen_range(0..1000) * 1000 + i),
                origin_kind: OriginKind::Scale,
                label: Some(QuIndicator::ALL[rng.gen_range(0..3)]),
                space: "space".into(),
            });
        }
        let reviews: Vec<ReviewItem<f64>> = (0..n_reviews)
            .map(|i| ReviewItem {
                id: format!("r{i}"),
                vector: (!rng.gen_bool(0.05)).then(|| ProjectedVector64 {
                    coords: unit_vector(&mut rng, k),
                    origin_id: format!("r{i}"),
                    origin_kind: OriginKind::Review,
                    label: None,
                    space: "space".into(),
                }),
            })
            .collect();
        let config = ClassifierConfig {
            top_n: rng.gen_range(1..=10),
            variance_threshold: rng.gen_range(0.0..0.5),
        };
        let sub = Subspace64::new(scales.clone(), reviews.clone()).map_err(|e| e.to_string())?;
        let preds = classify_all(&sub, &config).map_err(|e| e.to_string())?;
        for (p, r) in preds.iter().zip(&reviews) {
            compared += 1;
            ensure(p.review_id == r.id, || format!("case {case}: order changed"))?;
            let Some(v) = &r.vector else {
                ensure(
                    p.predicted == Predicted::Unclassifiable && p.rule_path.is_none(),
                    || format!("case {case}: {} should be unclassifiable", r.id),
                )?;
                continue;
            };
            let (label, path, ids) = oracle_predict(&v.coords, &scales, config.top_n, config.variance_threshold);
            let got_ids: Vec<String> = p.neighbors.iter().map(|n| n.scale_id.clone()).collect();
            ensure(
                p.predicted == label && p.rule_path == Some(path) && got_ids == ids,
                || {
                    format!(
                        "case {case}, {}: got {:?}/{:?}, oracle {label:?}/{path:?}",
                        r.id, p.predicted, p.rule_path
                    )
                },
            )?;
        }
    }
    Ok(format!("50 subspaces, {compared} reviews, 100% agreement"))
}

fn fixture_predictions() -> Result<(Vec<Prediction64>, BTreeMap<String, QuIndicator>), String> {
    let load = |name, source, mode| {
        load_documents(fixture(name), DocumentFormat::JsonLines, source, mode).map_err(|e| e.to_string())
    };
    let corpus = load("corpus.jsonl", Source::Corpus, LabelMode::None)?;
    let scales = load("scales.jsonl", Source::Scale, LabelMode::PerLineField)?;
    let reviews = load("reviews.jsonl", Source::Review, LabelMode::PerLineField)?;
    ensure((corpus.len(), scales.len(), reviews.len()) == (30, 9, 15), || {
        "fixture sizes changed".into()
    })?;
    let (space, _): (SemanticSpace64, _) = build_space(&corpus, &SpaceConfig::default()).map_err(|e| e.to_string())?;
    let (sub, _) = build_subspace(&scales, &reviews, &space).map_err(|e| e.to_string())?;
    let preds = classify_all(&sub, &ClassifierConfig::default()).map_err(|e| e.to_string())?;
    let gold = reviews.iter().map(|r| (r.id.clone(), r.label.unwrap())).collect();
    Ok((preds, gold))
}

fn separable_fixture() -> Outcome {
    let (preds, gold) = fixture_predictions()?;
    let m = metrics(&confusion(&preds, &gold).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(m.macro_f == 1.0, || format!("macro F {}", m.macro_f))?;
    let first = serde_json::to_string(&preds).unwrap();
    let again = serde_json::to_string(&fixture_predictions()?.0).unwrap();
    ensure(first == again, || "library predictions differ between runs".into())?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for run in 0..2 {
        let space = dir.path().join(format!("space{run}.lsa"));
        let out = dir.path().join(format!("pred{run}.jsonl"));
        let bin = env!("CARGO_BIN_EXE_lsaqu");
        let ok = Command::new(bin)
            .args(["build-space", "--corpus"])
            .arg(fixture("corpus.jsonl"))
            .arg("--out")
            .arg(&space)
            .env_remove("LSAQU_SEED")
            .output()
            .map_err(|e| e.to_string())?
            .status
            .success()
            && Command::new(bin)
                .arg("classify")
                .arg("--space")
                .arg(&space)
                .arg("--scales")
                .arg(fixture("scales.jsonl"))
                .arg("--reviews")
                .arg(fixture("reviews.jsonl"))
                .arg("--out")
                .arg(&out)
                .output()
                .map_err(|e| e.to_string())?
                .status
                .success();
        ensure(ok, || "CLI run failed".into())?;
        files.push(fs::read(&out).map_err(|e| e.to_string())?);
    }
    ensure(files[0] == files[1], || "CLI prediction files differ".into())?;
    Ok(format!(
        "macro F 1.0 on {} reviews; predictions byte-identical across runs",
        preds.len()
    ))
}

fn metrics_arithmetic() -> Outcome {
    let pred = |id: &str, p: Option<QuIndicator>| Prediction64 {
        review_id: id.into(),
        predicted: p.map_or(Predicted::Unclassifiable, Predicted::from),
        rule_path: None,
        neighbors: vec![],
    };
    let score = |pairs: &[(QuIndicator, Option<QuIndicator>)]| {
        let preds: Vec<_> = pairs
            .iter()
            .enumerate()
            .map(|(i, &(_, p))| pred(&format!("r{i}"), p))
            .collect();
        let gold: BTreeMap<_, _> = pairs
            .iter()
            .enumerate()
            .map(|(i, &(g, _))| (format!("r{i}"), g))
            .collect();
        metrics(&confusion(&preds, &gold).unwrap()).unwrap()
    };
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;

    let m = score(&[(E, Some(E)), (E, Some(E)), (E, Some(F)), (F, Some(F)), (R, Some(E))]);
    ensure((m.macro_f - 0.444444).abs() <= 1e-6, || {
        format!("macro_f {}", m.macro_f)
    })?;
    let e = m.of(E);
    ensure(
        (e.tp, e.fp, e.fn_) == (2, 1, 1) && close(e.f_measure, 2.0 / 3.0),
        || format!("effectiveness {e:?}"),
    )?;
    let f = m.of(F);
    ensure(
        (f.tp, f.fp, f.fn_) == (1, 1, 0) && close(f.precision, 0.5) && f.recall == 1.0,
        || format!("efficiency {f:?}"),
    )?;
    ensure(m.of(R).f_measure == 0.0 && m.of(R).fn_ == 1, || {
        format!("freedom from risk {:?}", m.of(R))
    })?;

    let perfect = score(&[(E, Some(E)), (F, Some(F)), (R, Some(R))]);
    ensure(perfect.macro_f == 1.0, || "perfect predictions".into())?;
    let silent = score(&[(E, Some(E))]);
    ensure(
        silent.of(R).precision == 0.0 && silent.of(R).recall == 0.0 && silent.of(R).f_measure == 0.0,
        || "0/0 is not 0".into(),
    )?;
    let half = score(&[(E, Some(E)), (F, Some(E)), (E, Some(R))]);
    ensure(
        (half.of(E).precision, half.of(E).recall, half.of(E).f_measure) == (0.5, 0.5, 0.5),
        || "TP=FP=FN=1".into(),
    )?;
    let unclassified = score(&[(F, Some(F)), (F, None)]);
    ensure(
        unclassified.of(F).recall == 0.5 && unclassified.of(F).precision == 1.0,
        || "unclassifiable is a false negative".into(),
    )?;
    Ok(format!("macro_f {:.6} and 4 trivial cases", m.macro_f))
}

fn sweep_structure() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let reviews_corpus = dir.path().join("reviews_corpus.txt");
    let text: String = fs::read_to_string(fixture("reviews.jsonl"))
        .map_err(|e| e.to_string())?
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["text"]
                .as_str()
                .unwrap()
                .to_owned()
                + "\n"
        })
        .collect();
    fs::write(&reviews_corpus, text).map_err(|e| e.to_string())?;
    let corpus = fixture("corpus.jsonl");
    let r = reviews_corpus.to_str().unwrap();
    let paragraphs_file = dir.path().join("paragraphs.txt");
    let paragraphs: String = fs::read_to_string(&corpus)
        .map_err(|e| e.to_string())?
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["text"]
                .as_str()
                .unwrap()
                .to_owned()
                + "\n"
        })
        .collect();
    fs::write(&paragraphs_file, paragraphs).map_err(|e| e.to_string())?;
    let p = paragraphs_file.to_str().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_lsaqu"))
        .args(["sweep", "--format", "text"])
        .args(["--variant", &format!("paragraphs={p}")])
        .args(["--variant", &format!("reviews={r}")])
        .args(["--variant", &format!("both={p},{r}")])
        .args(["--weightings", "log-entropy,tfidf"])
        .arg("--scales")
        .arg(fixture("scales.jsonl"))
        .arg("--reviews")
        .arg(fixture("reviews.jsonl"))
        .arg("--out")
        .arg(&out)
        .env_remove("LSAQU_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())?;
    let csv = fs::read_to_string(&out).map_err(|e| e.to_string())?;
    let mut lines = csv.lines();
    let header = lines.next().unwrap_or_default();
    let expected = "corpus_variant,weighting,k,effective_k,f_effectiveness,f_efficiency,f_freedom_from_risk,macro_f";
    ensure(header == expected, || format!("header {header:?}"))?;
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    ensure(rows.len() == 6, || format!("{} rows", rows.len()))?;
    let mut combos = Vec::new();
    for row in &rows {
        ensure(row.len() == 8, || format!("row {row:?}"))?;
        for f in &row[4..] {
            let x: f64 = f.parse().map_err(|_| format!("non-numeric F {f:?}"))?;
            ensure((0.0..=1.0).contains(&x), || format!("F {x} outside [0, 1]"))?;
        }
        combos.push((row[0], row[1]));
    }
    let mut want = Vec::new();
    for v in ["paragraphs", "reviews", "both"] {
        for w in ["log-entropy", "tfidf"] {
            want.push((v, w));
        }
    }
    ensure(combos == want, || format!("configurations {combos:?}"))?;
    Ok("3 corpus variants × 2 weightings = 6 rows, 8 columns".into())
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "SVD oracle equivalence",
            budget: Some(Duration::from_secs(30)),
            run: svd_oracle_equivalence,
        },
        Criterion {
            id: 2,
            name: "Eckart–Young residual",
            budget: Some(Duration::from_secs(5)),
            run: eckart_young,
        },
        Criterion {
            id: 3,
            name: "fold-in identity",
            budget: Some(Duration::from_secs(10)),
            run: fold_in_identity,
        },
        Criterion {
            id: 4,
            name: "weighting invariants",
            budget: Some(Duration::from_secs(10)),
            run: weighting_invariants,
        },
        Criterion {
            id: 5,
            name: "classifier rule table",
            budget: None,
            run: rule_table,
        },
        Criterion {
            id: 6,
            name: "brute-force classifier",
            budget: Some(Duration::from_secs(30)),
            run: brute_force_classifier,
        },
        Criterion {
            id: 7,
            name: "separable fixture",
            budget: Some(Duration::from_secs(5)),
            run: separable_fixture,
        },
        Criterion {
            id: 8,
            name: "metrics arithmetic",
            budget: None,
            run: metrics_arithmetic,
        },
        Criterion {
            id: 9,
            name: "sweep structure",
            budget: None,
            run: sweep_structure,
        },
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {elapsed:.2?}, budget {b:?}")),
            (o, _) => o,
        };
        let budget = c.budget.map_or(String::new(), |b| format!(" / {b:?}"));
        match outcome {
            Ok(detail) => println!("PASS  [{}] {:<24} {detail} ({elapsed:.2?}{budget})", c.id, c.name),
            Err(why) => {
                failed += 1;
                println!("FAIL  [{}] {:<24} {why} ({elapsed:.2?}{budget})", c.id, c.name);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
