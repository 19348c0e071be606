//! Data-mixture construction: language distributions, cap/floor solving,
//! decay-stage mixtures, and token sampling plans.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::DatasetManifest;
use crate::rng::{fnv1a64_parts, SplitMix64};

/// Tolerance on distribution sums.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Normalized mapping language -> weight. Weights are non-negative and sum
/// to 1 within [`SUM_TOLERANCE`] by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LanguageDistribution {
    weights: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MixtureError {
    EmptyDistribution,
    NegativeWeight { lang: String },
    NotNormalized { sum: f64 },
    InfeasibleSpec { reason: String },
    InvalidShare { value: f64 },
    ZeroTotal,
    NoAvailability { dataset: String, lang: String },
}

impl fmt::Display for MixtureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MixtureError::EmptyDistribution => write!(f, "distribution has no languages"),
            MixtureError::NegativeWeight { lang } => {
                write!(f, "negative weight for language {lang}")
            }
            MixtureError::NotNormalized { sum } => {
                write!(f, "weights sum to {sum}, expected 1")
            }
            MixtureError::InfeasibleSpec { reason } => {
                write!(f, "infeasible mixture spec: {reason}")
            }
            MixtureError::InvalidShare { value } => {
                write!(f, "share {value} outside [0, 1]")
            }
            MixtureError::ZeroTotal => write!(f, "total token budget must be positive"),
            MixtureError::NoAvailability { dataset, lang } => {
                write!(
                    f,
                    "cell ({dataset}, {lang}) has positive weight but no available tokens"
                )
            }
        }
    }
}

impl core::error::Error for MixtureError {}

impl LanguageDistribution {
    /// Builds a distribution by normalizing arbitrary non-negative weights.
    pub fn normalized(weights: &BTreeMap<String, f64>) -> Result<Self, MixtureError> {
        if weights.is_empty() {
            return Err(MixtureError::EmptyDistribution);
        }
        for (lang, w) in weights {
            if !w.is_finite() || *w < 0.0 {
                return Err(MixtureError::NegativeWeight { lang: lang.clone() });
            }
        }
        let sum: f64 = weights.values().sum();
        if sum <= 0.0 {
            return Err(MixtureError::EmptyDistribution);
        }
        Ok(Self {
            weights: weights.iter().map(|(l, w)| (l.clone(), w / sum)).collect(),
        })
    }

    /// Builds a distribution from integer counts (tokens, words, documents).
    pub fn from_counts(counts: &BTreeMap<String, u64>) -> Result<Self, MixtureError> {
        let weights: BTreeMap<String, f64> = counts
            .iter()
            .map(|(l, c)| (l.clone(), *c as f64))
            .collect();
        Self::normalized(&weights)
    }

    /// Accepts weights that already sum to 1 within [`SUM_TOLERANCE`].
    pub fn from_weights(weights: BTreeMap<String, f64>) -> Result<Self, MixtureError> {
        if weights.is_empty() {
            return Err(MixtureError::EmptyDistribution);
        }
        for (lang, w) in &weights {
            if !w.is_finite() || *w < 0.0 {
                return Err(MixtureError::NegativeWeight { lang: lang.clone() });
            }
        }
        let sum: f64 = weights.values().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(MixtureError::NotNormalized { sum });
        }
        Ok(Self { weights })
    }

    pub fn uniform<'a>(langs: impl IntoIterator<Item = &'a str>) -> Result<Self, MixtureError> {
        let langs: Vec<&str> = langs.into_iter().collect();
        if langs.is_empty() {
            return Err(MixtureError::EmptyDistribution);
        }
        let w = 1.0 / langs.len() as f64;
        Ok(Self {
            weights: langs.iter().map(|l| (l.to_string(), w)).collect(),
        })
    }

    pub fn weight(&self, lang: &str) -> f64 {
        self.weights.get(lang).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.weights.iter().map(|(l, w)| (l.as_str(), *w))
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.weights.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.weights.values().sum()
    }

    pub fn as_map(&self) -> &BTreeMap<String, f64> {
        &self.weights
    }
}

/// Named mixture families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixtureKind {
    /// English capped at 20%, every language floored at 3%.
    Balanced,
    /// English capped at 30%, every language floored at 1%.
    Intermediate,
    /// Pre-cleaning distribution passed through unchanged.
    Original,
    /// Post-cleaning distribution passed through unchanged.
    Train,
    /// Uniform over the source languages.
    Equal,
    /// Decay-stage mixture; combined with `hq_share` via [`decay_mixture`].
    Decay,
}

/// Constraints for [`solve_distribution`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub kind: MixtureKind,
    /// Per-language maximum weights.
    #[serde(default)]
    pub caps: BTreeMap<String, f64>,
    /// Per-language minimum weights.
    #[serde(default)]
    pub floors: BTreeMap<String, f64>,
    /// Minimum weight applied to every source language without an explicit
    /// floor entry.
    #[serde(default)]
    pub default_floor: f64,
    /// High-quality share for decay mixtures.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hq_share: Option<f64>,
    #[serde(default)]
    pub allow_repetition: bool,
}

impl MixtureSpec {
    pub fn passthrough(kind: MixtureKind) -> Self {
        Self {
            kind,
            caps: BTreeMap::new(),
            floors: BTreeMap::new(),
            default_floor: 0.0,
            hq_share: None,
            allow_repetition: false,
        }
    }

    /// English share capped at 20%, no language below 3%.
    pub fn balanced(english: &str) -> Self {
        let mut spec = Self::passthrough(MixtureKind::Balanced);
        spec.caps.insert(english.to_string(), 0.20);
        spec.default_floor = 0.03;
        spec
    }

    /// English share capped at 30%, no language below 1%.
    pub fn intermediate(english: &str) -> Self {
        let mut spec = Self::passthrough(MixtureKind::Intermediate);
        spec.caps.insert(english.to_string(), 0.30);
        spec.default_floor = 0.01;
        spec
    }

    pub fn equal() -> Self {
        Self::passthrough(MixtureKind::Equal)
    }

    fn floor_for(&self, lang: &str) -> f64 {
        self.floors.get(lang).copied().unwrap_or(self.default_floor)
    }

    fn cap_for(&self, lang: &str) -> f64 {
        self.caps.get(lang).copied().unwrap_or(1.0)
    }

    /// Checks joint feasibility against a language set.
    pub fn validate<'a>(
        &self,
        langs: impl IntoIterator<Item = &'a str>,
    ) -> Result<(), MixtureError> {
        let mut floor_sum = 0.0;
        for lang in langs {
            let floor = self.floor_for(lang);
            let cap = self.cap_for(lang);
            if !(0.0..=1.0).contains(&floor) || !(0.0..=1.0).contains(&cap) {
                return Err(MixtureError::InfeasibleSpec {
                    reason: format!("bounds for {lang} outside [0,1]"),
                });
            }
            if cap < floor {
                return Err(MixtureError::InfeasibleSpec {
                    reason: format!("cap {cap} below floor {floor} for {lang}"),
                });
            }
            floor_sum += floor;
        }
        if floor_sum > 1.0 + SUM_TOLERANCE {
            return Err(MixtureError::InfeasibleSpec {
                reason: format!("floors sum to {floor_sum} > 1"),
            });
        }
        if let Some(share) = self.hq_share {
            if !(0.0..=1.0).contains(&share) {
                return Err(MixtureError::InvalidShare { value: share });
            }
        }
        Ok(())
    }
}

/// Rebalances `source` under the spec's caps and floors.
///
/// Languages whose proportional share exceeds their cap sit exactly at the
/// cap; languages that would fall below their floor sit exactly at the
/// floor; the remaining mass is split proportionally to `source` among the
/// unconstrained languages, iterating until no constraint is newly violated.
pub fn solve_distribution(
    source: &LanguageDistribution,
    spec: &MixtureSpec,
) -> Result<LanguageDistribution, MixtureError> {
    if source.is_empty() {
        return Err(MixtureError::EmptyDistribution);
    }
    spec.validate(source.languages())?;

    if spec.kind == MixtureKind::Equal {
        return LanguageDistribution::uniform(source.languages());
    }

    let mut fixed: BTreeMap<String, f64> = BTreeMap::new();
    loop {
        let free: Vec<(&str, f64)> = source
            .iter()
            .filter(|(l, _)| !fixed.contains_key(*l))
            .collect();
        let fixed_mass: f64 = fixed.values().sum();
        let remaining = 1.0 - fixed_mass;
        if free.is_empty() {
            if remaining.abs() > SUM_TOLERANCE {
                return Err(MixtureError::InfeasibleSpec {
                    reason: format!("constraints leave {remaining} unassigned"),
                });
            }
            break;
        }
        if remaining < -SUM_TOLERANCE {
            return Err(MixtureError::InfeasibleSpec {
                reason: "floors exceed available mass".to_string(),
            });
        }
        let free_source: f64 = free.iter().map(|(_, w)| *w).sum();
        let mut violated = false;
        for (lang, src_w) in &free {
            let share = if free_source > 0.0 {
                remaining * src_w / free_source
            } else {
                remaining / free.len() as f64
            };
            let cap = spec.cap_for(lang);
            let floor = spec.floor_for(lang);
            if share > cap + 1e-15 {
                fixed.insert(lang.to_string(), cap);
                violated = true;
            } else if share < floor - 1e-15 {
                fixed.insert(lang.to_string(), floor);
                violated = true;
            }
        }
        if !violated {
            for (lang, src_w) in &free {
                let share = if free_source > 0.0 {
                    remaining * src_w / free_source
                } else {
                    remaining / free.len() as f64
                };
                fixed.insert(lang.to_string(), share);
            }
            break;
        }
    }
    LanguageDistribution::from_weights(fixed)
}

/// Per-(dataset, language) weights; outer key is the dataset block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMix {
    /// dataset -> language -> weight over the whole mixture
    pub cells: BTreeMap<String, BTreeMap<String, f64>>,
    /// dataset -> exact total mass of the block
    pub block_totals: BTreeMap<String, f64>,
}

impl DatasetMix {
    /// One block holding a whole distribution.
    pub fn single(dataset: &str, dist: &LanguageDistribution) -> Self {
        let mut cells = BTreeMap::new();
        cells.insert(
            dataset.to_string(),
            dist.iter()
                .map(|(l, w)| (l.to_string(), w))
                .collect::<BTreeMap<_, _>>(),
        );
        let mut block_totals = BTreeMap::new();
        block_totals.insert(dataset.to_string(), 1.0);
        Self {
            cells,
            block_totals,
        }
    }

    pub fn block_sum(&self, dataset: &str) -> f64 {
        self.cells
            .get(dataset)
            .map(|m| m.values().sum())
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.cells.values().flat_map(|m| m.values()).sum()
    }
}

/// Scales a block distribution so its cells sum to exactly `mass`: the
/// floating-point residue of the products is folded into the last cell.
fn scaled_block(dist: &LanguageDistribution, mass: f64) -> BTreeMap<String, f64> {
    let mut out: BTreeMap<String, f64> = BTreeMap::new();
    if mass == 0.0 || dist.is_empty() {
        return out;
    }
    let langs: Vec<&str> = dist.languages().collect();
    let mut running = 0.0;
    for (i, lang) in langs.iter().enumerate() {
        let w = if i + 1 == langs.len() {
            mass - running
        } else {
            dist.weight(lang) * mass
        };
        running += w;
        out.insert(lang.to_string(), w);
    }
    out
}

pub const WEB_DATASET: &str = "web";
pub const HQ_DATASET: &str = "high_quality";

/// Decay-stage mixture: `hq_share` of the mass goes to the high-quality
/// block, the rest to web data with web's internal proportions preserved.
pub fn decay_mixture(
    web: &LanguageDistribution,
    hq: &LanguageDistribution,
    hq_share: f64,
) -> Result<DatasetMix, MixtureError> {
    if !(0.0..=1.0).contains(&hq_share) || !hq_share.is_finite() {
        return Err(MixtureError::InvalidShare { value: hq_share });
    }
    let mut cells = BTreeMap::new();
    let mut block_totals = BTreeMap::new();
    let hq_cells = scaled_block(hq, hq_share);
    let web_cells = scaled_block(web, 1.0 - hq_share);
    if !hq_cells.is_empty() {
        cells.insert(HQ_DATASET.to_string(), hq_cells);
        block_totals.insert(HQ_DATASET.to_string(), hq_share);
    }
    if !web_cells.is_empty() {
        cells.insert(WEB_DATASET.to_string(), web_cells);
        block_totals.insert(WEB_DATASET.to_string(), 1.0 - hq_share);
    }
    Ok(DatasetMix {
        cells,
        block_totals,
    })
}

/// One cell of a sampling plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanCell {
    /// Requested tokens for this cell; cell budgets sum to the plan total.
    pub budget_tokens: u64,
    /// Tokens actually available in the manifests.
    pub available_tokens: u64,
    /// How many passes over the available data the budget implies; 1 unless
    /// repetition is allowed and the budget exceeds availability.
    pub repetition_factor: u64,
    /// Seed for shard draw order within the cell.
    pub seed: u64,
}

impl PlanCell {
    /// Tokens the executor should actually take.
    pub fn effective_tokens(&self, allow_repetition: bool) -> u64 {
        if allow_repetition {
            self.budget_tokens
        } else {
            self.budget_tokens.min(self.available_tokens)
        }
    }
}

/// A shortfall note for a cell whose budget exceeded availability while
/// repetition was disallowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shortfall {
    pub dataset: String,
    pub lang: String,
    pub requested: u64,
    pub available: u64,
}

/// Deterministic sampling plan over (dataset, language) cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub total_tokens: u64,
    pub allow_repetition: bool,
    pub seed: u64,
    /// dataset -> language -> cell
    pub cells: BTreeMap<String, BTreeMap<String, PlanCell>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub shortfalls: Vec<Shortfall>,
}

impl SamplingPlan {
    pub fn budget_sum(&self) -> u64 {
        self.cells
            .values()
            .flat_map(|m| m.values())
            .map(|c| c.budget_tokens)
            .sum()
    }
}

/// Splits `total_tokens` over the cells of `target` by largest remainder,
/// then derives per-cell repetition factors from availability.
pub fn build_plan(
    manifests: &[DatasetManifest],
    target: &DatasetMix,
    total_tokens: u64,
    allow_repetition: bool,
    seed: u64,
) -> Result<SamplingPlan, MixtureError> {
    if total_tokens == 0 {
        return Err(MixtureError::ZeroTotal);
    }

    // Availability per (dataset, lang); words stand in when no token counts
    // exist yet.
    let mut available: BTreeMap<(String, String), u64> = BTreeMap::new();
    for manifest in manifests {
        for (lang, (_d, words, tokens)) in manifest.totals_by_lang() {
            let count = if tokens > 0 { tokens } else { words };
            *available
                .entry((manifest.name.clone(), lang))
                .or_insert(0) += count;
        }
    }

    // Largest-remainder apportionment keeps the budget sum exact.
    let mut flat: Vec<(&str, &str, f64)> = Vec::new();
    for (dataset, langs) in &target.cells {
        for (lang, w) in langs {
            flat.push((dataset, lang, *w));
        }
    }
    let mut budgets: Vec<u64> = Vec::with_capacity(flat.len());
    let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(flat.len());
    let mut assigned: u64 = 0;
    for (i, (_, _, w)) in flat.iter().enumerate() {
        let raw = w * total_tokens as f64;
        let base = raw.floor() as u64;
        budgets.push(base);
        assigned += base;
        remainders.push((i, raw - base as f64));
    }
    let mut residue = total_tokens.saturating_sub(assigned);
    remainders.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    for (idx, _) in remainders {
        if residue == 0 {
            break;
        }
        budgets[idx] += 1;
        residue -= 1;
    }

    let mut cells: BTreeMap<String, BTreeMap<String, PlanCell>> = BTreeMap::new();
    let mut shortfalls = Vec::new();
    for ((dataset, lang, _w), budget) in flat.iter().zip(budgets) {
        let avail = available
            .get(&((*dataset).to_string(), (*lang).to_string()))
            .copied()
            .unwrap_or(0);
        if budget > 0 && avail == 0 {
            return Err(MixtureError::NoAvailability {
                dataset: (*dataset).to_string(),
                lang: (*lang).to_string(),
            });
        }
        let repetition = if budget == 0 || avail == 0 {
            1
        } else if allow_repetition {
            budget.div_ceil(avail)
        } else {
            if budget > avail {
                shortfalls.push(Shortfall {
                    dataset: (*dataset).to_string(),
                    lang: (*lang).to_string(),
                    requested: budget,
                    available: avail,
                });
            }
            1
        };
        let cell_seed = SplitMix64::new(seed ^ fnv1a64_parts([*dataset, *lang], seed)).next_u64();
        cells.entry((*dataset).to_string()).or_default().insert(
            (*lang).to_string(),
            PlanCell {
                budget_tokens: budget,
                available_tokens: avail,
                repetition_factor: repetition.max(1),
                seed: cell_seed,
            },
        );
    }

    Ok(SamplingPlan {
        total_tokens,
        allow_repetition,
        seed,
        cells,
        shortfalls,
    })
}
