use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use lsaqu_core::{
    build_space, build_subspace, classify_all, confusion, load_documents, load_space, metrics, save_space,
    ClassMetrics, ClassifierConfig, ConfusionMatrix, Document, DocumentFormat, LabelMode, LsaError, Prediction64,
    QuIndicator, RulePath, SemanticSpace64, Source, SpaceConfig, SvdOptions,
};

use crate::{
    effective_seed, BuildSpaceArgs, ClassifyArgs, ClassifyOpts, CliError, CliResult, EvaluateArgs, SpaceArgs,
    SweepArgs, Weighting,
};

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn emit(out: &mut impl Write, value: &serde_json::Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(CliError::Serialize)?;
    writeln!(out, "{text}").map_err(|e| CliError::io("<stdout>", e))
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// Concatenates corpus files. With several files, each id is prefixed by the file's
/// 1-based position (`2/doc-000001`) so ids stay unique.
fn load_corpus(paths: &[PathBuf], format: DocumentFormat) -> CliResult<Vec<Document>> {
    let mut docs = Vec::new();
    for (i, path) in paths.iter().enumerate() {
        let mut part = load_documents(path, format, Source::Corpus, LabelMode::None)?;
        if paths.len() > 1 {
            for d in &mut part {
                d.id = format!("{}/{}", i + 1, d.id);
            }
        }
        docs.extend(part);
    }
    Ok(docs)
}

fn space_config(k: usize, weighting: Weighting, args: &SpaceArgs, keep_v: Option<bool>) -> CliResult<SpaceConfig> {
    Ok(SpaceConfig {
        k,
        weighting: weighting.into(),
        keep_v,
        svd: SvdOptions {
            method: args.svd.into(),
            seed: effective_seed(args.seed)?,
            ..SvdOptions::default()
        },
        ..SpaceConfig::default()
    })
}

pub fn build_space_cmd(a: &BuildSpaceArgs, out: &mut impl Write) -> CliResult<()> {
    let docs = load_corpus(&a.corpus, a.space.format.into())?;
    let config = space_config(a.k, a.weighting, &a.space, a.keep_v.then_some(true))?;
    let (space, report) = build_space::<f64>(&docs, &config)?;
    save_space(&space, &a.out)?;
    let top: Vec<f64> = space.sigma().iter().take(10).copied().collect();
    emit(
        out,
        &json!({
            "out": a.out,
            "n_docs": docs.len(),
            "vocab_size": report.vocab_size,
            "requested_k": report.requested_k,
            "effective_k": report.effective_k,
            "rank": report.effective_k,
            "weighting": config.weighting,
            "seed": config.svd.seed,
            "lanczos_steps": report.lanczos_steps,
            "top_singular_values": top,
            "fingerprint": space.fingerprint(),
            "warnings": report.warnings,
        }),
    )
}

fn load_scales_and_reviews(opts: &ClassifyOpts) -> CliResult<(Vec<Document>, Vec<Document>)> {
    let scales = load_documents(
        &opts.scales,
        DocumentFormat::JsonLines,
        Source::Scale,
        LabelMode::PerLineField,
    )?;
    let reviews = load_documents(
        &opts.reviews,
        opts.reviews_format.into(),
        Source::Review,
        LabelMode::PerLineField,
    )?;
    Ok((scales, reviews))
}

fn predictions_for(
    space: &SemanticSpace64,
    scales: &[Document],
    reviews: &[Document],
    opts: &ClassifyOpts,
) -> CliResult<Vec<Prediction64>> {
    let (sub, excluded) = build_subspace(scales, reviews, space)?;
    if !excluded.reviews.is_empty() {
        log::warn!(
            "{} review(s) share no weighted term with the space and are unclassifiable",
            excluded.reviews.len()
        );
    }
    let config = ClassifierConfig {
        top_n: opts.top_n,
        variance_threshold: opts.variance_threshold,
    };
    Ok(classify_all(&sub, &config)?)
}

pub fn classify_cmd(a: &ClassifyArgs, out: &mut impl Write) -> CliResult<()> {
    let space: SemanticSpace64 = load_space(&a.space)?;
    let (scales, reviews) = load_scales_and_reviews(&a.opts)?;
    let preds = predictions_for(&space, &scales, &reviews, &a.opts)?;

    let mut w = create(&a.out)?;
    for p in &preds {
        let line = serde_json::to_string(p).map_err(CliError::Serialize)?;
        writeln!(w, "{line}").map_err(|e| CliError::io(&a.out, e))?;
    }
    w.flush().map_err(|e| CliError::io(&a.out, e))?;

    let mut counts: BTreeMap<&str, usize> = [
        RulePath::VarianceGap.as_str(),
        RulePath::MajorityVote.as_str(),
        RulePath::TieBrokenByScore.as_str(),
        "unclassifiable",
    ]
    .into_iter()
    .map(|k| (k, 0))
    .collect();
    for p in &preds {
        let key = p.rule_path.map_or("unclassifiable", RulePath::as_str);
        *counts.get_mut(key).expect("known rule path") += 1;
    }
    emit(
        out,
        &json!({
            "out": a.out,
            "n_reviews": preds.len(),
            "rule_paths": counts,
        }),
    )
}

#[derive(Deserialize)]
struct GoldRecord {
    id: String,
    label: String,
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<Vec<T>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| LsaError::Format {
            line: i + 1,
            message: format!("{}: {e}", path.display()),
        })?;
        out.push(rec);
    }
    Ok(out)
}

fn load_gold(path: &Path) -> CliResult<BTreeMap<String, QuIndicator>> {
    let mut gold = BTreeMap::new();
    for (i, rec) in read_jsonl::<GoldRecord>(path)?.into_iter().enumerate() {
        let label = rec
            .label
            .parse()
            .map_err(|message| LsaError::Label { line: i + 1, message })?;
        if gold.insert(rec.id.clone(), label).is_some() {
            return Err(LsaError::DuplicateId(rec.id).into());
        }
    }
    Ok(gold)
}

fn gold_from_reviews(reviews: &[Document]) -> CliResult<BTreeMap<String, QuIndicator>> {
    reviews
        .iter()
        .map(|r| {
            r.label
                .map(|l| (r.id.clone(), l))
                .ok_or_else(|| LsaError::MissingGold(r.id.clone()).into())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub n_evaluated: usize,
    pub n_correct: usize,
    pub n_unclassifiable: usize,
    /// Gold ids with no prediction; they are not scored.
    pub n_gold_without_prediction: usize,
}

/// Contents of the `evaluate` report file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    /// Row and column order of `confusion`.
    pub labels: Vec<String>,
    /// `confusion[gold][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    /// Unclassifiable reviews per gold label, in `labels` order.
    pub unclassifiable: Vec<usize>,
    pub per_class: BTreeMap<String, ClassReport>,
    pub macro_f: f64,
    pub counts: Counts,
    pub notes: Vec<String>,
    pub config: BTreeMap<String, String>,
}

impl EvaluationReport {
    fn new(cm: &ConfusionMatrix, m: &ClassMetrics, unused_gold: usize, config: BTreeMap<String, String>) -> Self {
        let per_class = QuIndicator::ALL
            .iter()
            .map(|&q| {
                let s = m.of(q);
                let r = ClassReport {
                    tp: s.tp,
                    fp: s.fp,
                    fn_: s.fn_,
                    precision: round6(s.precision),
                    recall: round6(s.recall),
                    f_measure: round6(s.f_measure),
                };
                (q.as_str().to_owned(), r)
            })
            .collect();
        EvaluationReport {
            labels: QuIndicator::ALL.iter().map(|q| q.as_str().to_owned()).collect(),
            confusion: cm.counts.iter().map(|r| r.to_vec()).collect(),
            unclassifiable: cm.unclassifiable.to_vec(),
            per_class,
            macro_f: round6(m.macro_f),
            counts: Counts {
                n_evaluated: cm.n_evaluated,
                n_correct: cm.correct(),
                n_unclassifiable: cm.unclassifiable.iter().sum(),
                n_gold_without_prediction: unused_gold,
            },
            notes: vec![
                "precision, recall and F-measure are 0 when their denominator is 0".into(),
                "unclassifiable reviews count as false negatives of their gold label".into(),
                "macro_f is the unweighted mean of the three per-label F-measures".into(),
            ],
            config,
        }
    }
}

pub fn evaluate_cmd(a: &EvaluateArgs, out: &mut impl Write) -> CliResult<()> {
    let preds: Vec<Prediction64> = read_jsonl(&a.predictions)?;
    let gold = load_gold(&a.gold)?;
    let cm = confusion(&preds, &gold)?;
    let m = metrics(&cm)?;
    let unused = gold.len() - cm.n_evaluated;
    if unused > 0 {
        log::warn!("{unused} gold label(s) have no prediction and are not scored");
    }
    let config = BTreeMap::from([
        ("predictions".to_owned(), a.predictions.display().to_string()),
        ("gold".to_owned(), a.gold.display().to_string()),
    ]);
    let report = EvaluationReport::new(&cm, &m, unused, config);
    let mut w = create(&a.out)?;
    serde_json::to_writer_pretty(&mut w, &report).map_err(CliError::Serialize)?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(&a.out, e))?;
    writeln!(out, "macro_f {:.6}", m.macro_f).map_err(|e| CliError::io("<stdout>", e))
}

/// One line of the sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub corpus_variant: String,
    pub weighting: String,
    pub k: usize,
    pub effective_k: usize,
    pub f_effectiveness: f64,
    pub f_efficiency: f64,
    pub f_freedom_from_risk: f64,
    pub macro_f: f64,
}

fn parse_variants(raw: &[String]) -> CliResult<Vec<(String, Vec<PathBuf>)>> {
    let mut out: Vec<(String, Vec<PathBuf>)> = Vec::new();
    for entry in raw {
        let (name, files) = entry
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("variant {entry:?} is not NAME=FILE[,FILE...]")))?;
        let name = name.trim();
        let files: Vec<PathBuf> = files
            .split(',')
            .map(str::trim)
            .filter(|f| !f.is_empty())
            .map(PathBuf::from)
            .collect();
        if name.is_empty() || files.is_empty() {
            return Err(CliError::Usage(format!(
                "variant {entry:?} needs a name and at least one file"
            )));
        }
        match out.iter().find(|(n, _)| n == name) {
            Some((_, prev)) if *prev == files => log::warn!("variant {name} given twice; running it once"),
            Some(_) => {
                return Err(CliError::Usage(format!(
                    "variant name {name} is used for different files"
                )))
            }
            None => out.push((name.to_owned(), files)),
        }
    }
    Ok(out)
}

fn dedup<T: PartialEq + Copy + std::fmt::Debug>(values: &[T], what: &str) -> Vec<T> {
    let mut out = Vec::new();
    for &v in values {
        if out.contains(&v) {
            log::warn!("{what} {v:?} given twice; running it once");
        } else {
            out.push(v);
        }
    }
    out
}

pub fn sweep_cmd(a: &SweepArgs, out: &mut impl Write) -> CliResult<()> {
    let variants = parse_variants(&a.variants)?;
    let weightings = dedup(&a.weightings, "weighting");
    let ks = dedup(&a.k, "k");
    let (scales, reviews) = load_scales_and_reviews(&a.opts)?;
    let gold = match &a.gold {
        Some(path) => load_gold(path)?,
        None => gold_from_reviews(&reviews)?,
    };

    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (name, files) in &variants {
        let docs = load_corpus(files, a.space.format.into())?;
        for &weighting in &weightings {
            for &k in &ks {
                if !seen.insert((name.clone(), weighting, k)) {
                    continue;
                }
                let config = space_config(k, weighting, &a.space, Some(false))?;
                let (space, report) = build_space::<f64>(&docs, &config)?;
                let preds = predictions_for(&space, &scales, &reviews, &a.opts)?;
                let m = metrics(&confusion(&preds, &gold)?)?;
                let f = |q| round6(m.of(q).f_measure);
                rows.push(SweepRow {
                    corpus_variant: name.clone(),
                    weighting: config.weighting.as_str().to_owned(),
                    k,
                    effective_k: report.effective_k,
                    f_effectiveness: f(QuIndicator::Effectiveness),
                    f_efficiency: f(QuIndicator::Efficiency),
                    f_freedom_from_risk: f(QuIndicator::FreedomFromRisk),
                    macro_f: round6(m.macro_f),
                });
            }
        }
    }

    let file = File::create(&a.out).map_err(|e| CliError::io(&a.out, e))?;
    let mut w = csv::Writer::from_writer(file);
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| CliError::io(&a.out, e))?;

    emit(
        out,
        &json!({
            "out": a.out,
            "rows": rows.len(),
            "n_reviews": reviews.len(),
        }),
    )
}
