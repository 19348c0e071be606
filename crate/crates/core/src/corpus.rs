//! Core corpus data model: documents, filter verdicts, shard manifests, and
//! pipeline reports.
//!
//! Documents are immutable value types; every pipeline stage consumes a
//! document and produces a [`FilterVerdict`] without mutating shared state,
//! which is what makes the stages embarrassingly parallel.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::mixture::LanguageDistribution;

/// Language code for documents whose language has not been established yet.
pub const LANG_UNDETERMINED: &str = "und";

/// One text record flowing through the pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    /// Stable unique id within a shard.
    pub id: String,
    pub text: String,
    /// ISO 639-1 code, `"code"` for source code, or `"und"` when unknown.
    #[serde(default = "default_lang")]
    pub lang: String,
    /// Free-form dataset label.
    #[serde(default)]
    pub source: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, String>,
}

fn default_lang() -> String {
    LANG_UNDETERMINED.to_string()
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            lang: default_lang(),
            source: String::new(),
            meta: BTreeMap::new(),
        }
    }

    pub fn with_lang(mut self, lang: impl Into<String>) -> Self {
        self.lang = lang.into();
        self
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }
}

/// Pipeline stage that produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    LangId,
    Heuristic,
    Repetition,
    Blacklist,
    Dedup,
    EvalDedup,
    SftLength,
    SftShort,
    SftLangMismatch,
}

impl Stage {
    /// Cleaning stages in their fixed execution order, followed by the SFT
    /// filters.
    pub const ALL: [Stage; 9] = [
        Stage::LangId,
        Stage::Heuristic,
        Stage::Repetition,
        Stage::Blacklist,
        Stage::Dedup,
        Stage::EvalDedup,
        Stage::SftLength,
        Stage::SftShort,
        Stage::SftLangMismatch,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::LangId => "lang_id",
            Stage::Heuristic => "heuristic",
            Stage::Repetition => "repetition",
            Stage::Blacklist => "blacklist",
            Stage::Dedup => "dedup",
            Stage::EvalDedup => "eval_dedup",
            Stage::SftLength => "sft_length",
            Stage::SftShort => "sft_short",
            Stage::SftLangMismatch => "sft_lang_mismatch",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of applying one filter to one document.
///
/// A dropping verdict always carries the violated rule, the measured value,
/// and the configured threshold so reports can attribute every removal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterVerdict {
    pub keep: bool,
    pub stage: Stage,
    /// Name of the specific rule that decided, e.g. `min_words`.
    pub rule: String,
    /// Measured quantity the rule compared.
    pub value: f64,
    /// Configured bound the value was compared against.
    pub threshold: f64,
}

impl FilterVerdict {
    pub fn keep(stage: Stage) -> Self {
        Self {
            keep: true,
            stage,
            rule: String::new(),
            value: 0.0,
            threshold: 0.0,
        }
    }

    pub fn keep_with(stage: Stage, rule: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            keep: true,
            stage,
            rule: rule.into(),
            value,
            threshold,
        }
    }

    pub fn drop(stage: Stage, rule: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            keep: false,
            stage,
            rule: rule.into(),
            value,
            threshold,
        }
    }
}

/// What a dataset is for; selects the default cleaning stage subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetRole {
    Web,
    HighQuality,
    Code,
    Sft,
    Eval,
}

impl DatasetRole {
    pub fn as_str(self) -> &'static str {
        match self {
            DatasetRole::Web => "web",
            DatasetRole::HighQuality => "high_quality",
            DatasetRole::Code => "code",
            DatasetRole::Sft => "sft",
            DatasetRole::Eval => "eval",
        }
    }
}

/// One shard line of a manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardEntry {
    pub path: String,
    pub documents: u64,
    pub words: u64,
    /// Token count under the manifest's tokenizer; 0 when not tokenized yet.
    #[serde(default)]
    pub tokens: u64,
    pub lang: String,
}

/// Shard inventory with per-language counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub role: DatasetRole,
    /// Id of the tokenizer that produced the token counts, when any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokenizer: Option<String>,
    pub shards: Vec<ShardEntry>,
}

impl DatasetManifest {
    pub fn new(name: impl Into<String>, role: DatasetRole) -> Self {
        Self {
            name: name.into(),
            role,
            tokenizer: None,
            shards: Vec::new(),
        }
    }

    /// Per-language totals as (documents, words, tokens).
    pub fn totals_by_lang(&self) -> BTreeMap<String, (u64, u64, u64)> {
        let mut out: BTreeMap<String, (u64, u64, u64)> = BTreeMap::new();
        for shard in &self.shards {
            let e = out.entry(shard.lang.clone()).or_insert((0, 0, 0));
            e.0 += shard.documents;
            e.1 += shard.words;
            e.2 += shard.tokens;
        }
        out
    }

    pub fn total_tokens(&self) -> u64 {
        self.shards.iter().map(|s| s.tokens).sum()
    }

    pub fn total_words(&self) -> u64 {
        self.shards.iter().map(|s| s.words).sum()
    }

    pub fn total_documents(&self) -> u64 {
        self.shards.iter().map(|s| s.documents).sum()
    }
}

/// Aggregate statistics derived from a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    /// Normalized language weights. Based on token counts when present,
    /// falling back to word counts and then document counts.
    pub distribution: LanguageDistribution,
    /// Which count column the distribution was normalized from.
    pub weight_basis: WeightBasis,
    pub documents: BTreeMap<String, u64>,
    pub words: BTreeMap<String, u64>,
    pub tokens: BTreeMap<String, u64>,
    pub total_documents: u64,
    pub total_words: u64,
    pub total_tokens: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightBasis {
    Tokens,
    Words,
    Documents,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusError {
    /// Manifest has no shards, or all counts are zero.
    EmptyManifest,
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::EmptyManifest => write!(f, "manifest has no countable shards"),
        }
    }
}

impl core::error::Error for CorpusError {}

/// Computes per-language counts and the normalized language distribution of
/// a manifest.
pub fn corpus_stats(manifest: &DatasetManifest) -> Result<CorpusStats, CorpusError> {
    let totals = manifest.totals_by_lang();
    if totals.is_empty() {
        return Err(CorpusError::EmptyManifest);
    }
    let mut documents = BTreeMap::new();
    let mut words = BTreeMap::new();
    let mut tokens = BTreeMap::new();
    for (lang, (d, w, t)) in &totals {
        documents.insert(lang.clone(), *d);
        words.insert(lang.clone(), *w);
        tokens.insert(lang.clone(), *t);
    }
    let total_documents: u64 = documents.values().sum();
    let total_words: u64 = words.values().sum();
    let total_tokens: u64 = tokens.values().sum();

    let (basis, counts) = if total_tokens > 0 {
        (WeightBasis::Tokens, &tokens)
    } else if total_words > 0 {
        (WeightBasis::Words, &words)
    } else if total_documents > 0 {
        (WeightBasis::Documents, &documents)
    } else {
        return Err(CorpusError::EmptyManifest);
    };
    let distribution =
        LanguageDistribution::from_counts(counts).map_err(|_| CorpusError::EmptyManifest)?;

    Ok(CorpusStats {
        distribution,
        weight_basis: basis,
        documents,
        words,
        tokens,
        total_documents,
        total_words,
        total_tokens,
    })
}

/// In/kept counters plus a drop-reason histogram for one stage.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageStats {
    pub docs_in: u64,
    pub docs_kept: u64,
    /// rule name -> number of documents dropped by it
    pub drop_reasons: BTreeMap<String, u64>,
}

impl StageStats {
    pub fn retention(&self) -> f64 {
        if self.docs_in == 0 {
            1.0
        } else {
            self.docs_kept as f64 / self.docs_in as f64
        }
    }

    /// docs_in == docs_kept + total drops.
    pub fn is_conserved(&self) -> bool {
        let dropped: u64 = self.drop_reasons.values().sum();
        self.docs_in == self.docs_kept + dropped
    }
}

/// Per-language in/kept counters over a whole pipeline.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LangRetention {
    pub docs_in: u64,
    pub docs_kept: u64,
}

/// Accounting for one pipeline run: stage-by-stage stats in execution order
/// plus per-language retention.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    /// (stage, stats) in the order stages executed.
    pub stages: Vec<(Stage, StageStats)>,
    pub languages: BTreeMap<String, LangRetention>,
}

impl PipelineReport {
    pub fn new() -> Self {
        Self::default()
    }

    fn stage_entry(&mut self, stage: Stage) -> &mut StageStats {
        if let Some(pos) = self.stages.iter().position(|(s, _)| *s == stage) {
            &mut self.stages[pos].1
        } else {
            self.stages.push((stage, StageStats::default()));
            &mut self.stages.last_mut().unwrap().1
        }
    }

    /// Records one verdict for a document in `lang`. Call once per document
    /// per executed stage.
    pub fn record(&mut self, lang: &str, verdict: &FilterVerdict) {
        let stats = self.stage_entry(verdict.stage);
        stats.docs_in += 1;
        if verdict.keep {
            stats.docs_kept += 1;
        } else {
            let rule = if verdict.rule.is_empty() {
                "unspecified"
            } else {
                verdict.rule.as_str()
            };
            *stats.drop_reasons.entry(rule.to_string()).or_insert(0) += 1;
        }
        let _ = lang;
    }

    /// Records that a document in `lang` entered the pipeline and whether it
    /// survived all stages.
    pub fn record_language(&mut self, lang: &str, kept: bool) {
        let e = self.languages.entry(lang.to_string()).or_default();
        e.docs_in += 1;
        if kept {
            e.docs_kept += 1;
        }
    }

    pub fn stage_stats(&self, stage: Stage) -> Option<&StageStats> {
        self.stages.iter().find(|(s, _)| *s == stage).map(|(_, v)| v)
    }

    /// Overall retention: kept of the final stage divided by in of the first.
    pub fn retention(&self) -> f64 {
        match (self.stages.first(), self.stages.last()) {
            (Some((_, first)), Some((_, last))) => {
                if first.docs_in == 0 {
                    1.0
                } else {
                    last.docs_kept as f64 / first.docs_in as f64
                }
            }
            _ => 1.0,
        }
    }

    /// Checks docs_in == docs_kept + drops at every stage and that each
    /// stage's input equals the previous stage's kept documents.
    pub fn is_conserved(&self) -> bool {
        let mut prev_kept: Option<u64> = None;
        for (_, stats) in &self.stages {
            if !stats.is_conserved() {
                return false;
            }
            if let Some(prev) = prev_kept {
                if stats.docs_in != prev {
                    return false;
                }
            }
            prev_kept = Some(stats.docs_kept);
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn manifest_with(tokens: &[(&str, u64)]) -> DatasetManifest {
        let mut m = DatasetManifest::new("test", DatasetRole::Web);
        for (lang, t) in tokens {
            m.shards.push(ShardEntry {
                path: alloc::format!("{lang}.jsonl"),
                documents: 1,
                words: *t / 2,
                tokens: *t,
                lang: (*lang).to_string(),
            });
        }
        m
    }

    #[test]
    fn stats_normalizes_token_counts() {
        let m = manifest_with(&[("en", 300), ("de", 100), ("fi", 100)]);
        let stats = corpus_stats(&m).unwrap();
        assert_eq!(stats.weight_basis, WeightBasis::Tokens);
        assert!((stats.distribution.weight("en") - 0.6).abs() < 1e-12);
        assert!((stats.distribution.weight("de") - 0.2).abs() < 1e-12);
        assert!((stats.distribution.weight("fi") - 0.2).abs() < 1e-12);
        assert_eq!(stats.total_tokens, 500);
    }

    #[test]
    fn stats_single_language_is_degenerate() {
        let m = manifest_with(&[("fi", 42)]);
        let stats = corpus_stats(&m).unwrap();
        assert_eq!(stats.distribution.weight("fi"), 1.0);
    }

    #[test]
    fn stats_empty_manifest_errors() {
        let m = DatasetManifest::new("empty", DatasetRole::Web);
        assert_eq!(corpus_stats(&m), Err(CorpusError::EmptyManifest));
    }

    #[test]
    fn stats_invariant_under_shard_reordering() {
        let m1 = manifest_with(&[("en", 300), ("de", 100), ("fi", 100)]);
        let mut m2 = m1.clone();
        m2.shards.reverse();
        assert_eq!(
            corpus_stats(&m1).unwrap().distribution,
            corpus_stats(&m2).unwrap().distribution
        );
    }

    // FineWeb-2 web-data token counts per language, in billions. The
    // published per-language percentages do not renormalize to these counts
    // (they sum past 100%), so the distribution here is what the token
    // column itself implies.
    #[test]
    fn stats_fineweb2_token_counts() {
        let rows: &[(&str, u64)] = &[
            ("en", 325),
            ("de", 213),
            ("es", 177),
            ("fr", 177),
            ("it", 78),
            ("nl", 62),
            ("pt", 107),
            ("pl", 50),
            ("sv", 22),
            ("cs", 30),
            ("fi", 20),
            ("bg", 11),
            ("el", 12),
        ];
        let m = manifest_with(rows);
        let stats = corpus_stats(&m).unwrap();
        let total: u64 = rows.iter().map(|(_, t)| *t).sum();
        assert_eq!(total, 1284);
        let en = stats.distribution.weight("en");
        assert!((en - 325.0 / 1284.0).abs() < 1e-12);
        // English dominates but stays under 40%.
        for (lang, _) in rows {
            if *lang != "en" {
                assert!(stats.distribution.weight(lang) <= en);
            }
        }
        assert!(en < 0.40);
    }

    #[test]
    fn report_records_and_conserves() {
        let mut report = PipelineReport::new();
        let keep = FilterVerdict::keep(Stage::Heuristic);
        let drop = FilterVerdict::drop(Stage::Heuristic, "min_words", 5.0, 50.0);
        report.record("en", &keep);
        report.record("en", &keep);
        report.record("en", &drop);
        let stats = report.stage_stats(Stage::Heuristic).unwrap();
        assert_eq!(stats.docs_in, 3);
        assert_eq!(stats.docs_kept, 2);
        assert_eq!(stats.drop_reasons.get("min_words"), Some(&1));
        assert!(stats.is_conserved());
    }

    #[test]
    fn chained_retention_is_product_of_stage_retentions() {
        let mut report = PipelineReport::new();
        // Stage 1: 10 in, 5 kept. Stage 2: 5 in, 2 kept.
        for i in 0..10 {
            let v = if i < 5 {
                FilterVerdict::keep(Stage::Heuristic)
            } else {
                FilterVerdict::drop(Stage::Heuristic, "max_words", 1e6, 1e5)
            };
            report.record("en", &v);
        }
        for i in 0..5 {
            let v = if i < 2 {
                FilterVerdict::keep(Stage::Repetition)
            } else {
                FilterVerdict::drop(Stage::Repetition, "duplicate_lines", 0.9, 0.3)
            };
            report.record("en", &v);
        }
        assert!(report.is_conserved());
        let product: f64 = report
            .stages
            .iter()
            .map(|(_, s)| s.retention())
            .product();
        assert!((report.retention() - product).abs() < 1e-12);
        assert!((report.retention() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn verdict_drop_populates_rule_and_threshold() {
        let v = FilterVerdict::drop(Stage::Blacklist, "blacklist_hits", 3.0, 0.0);
        assert!(!v.keep);
        assert!(!v.rule.is_empty());
    }
}
