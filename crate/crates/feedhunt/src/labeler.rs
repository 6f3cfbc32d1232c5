//! Minimal AV-label family labeler: tokenize detection labels, strip
//! generic/category tokens through a taxonomy, resolve aliases, and vote.
//!
//! This is intentionally a small plurality labeler, not a full labeling
//! toolchain; the taxonomy is a user-editable text file.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

/// A family name needs support from at least this many engines.
pub const MIN_FAMILY_SUPPORT: usize = 2;
/// Tokens shorter than this are dropped during tokenization.
pub const MIN_TOKEN_LEN: usize = 4;

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("{path}:{line}: {reason}")]
    Parse { path: String, line: usize, reason: String },
    #[error("alias target {0:?} is itself aliased")]
    AliasChain(String),
}

/// Token classification tables. Categories are tag paths such as `FAM`,
/// `GEN`, `BEH`, `FILE`, `CLASS` or `CLASS:pup`; anything else in the second
/// column is read as an alias target.
#[derive(Debug, Clone, Default)]
pub struct Taxonomy {
    categories: HashMap<String, String>,
    aliases: HashMap<String, String>,
    noise: HashSet<String>,
}

fn is_category(value: &str) -> bool {
    let head = value.split(':').next().unwrap_or("");
    matches!(head, "FAM" | "CLASS" | "BEH" | "FILE" | "GEN")
}

impl Taxonomy {
    pub fn builtin() -> Self {
        let text = include_str!("../data/taxonomy.txt");
        Self::parse(text, "<builtin>").expect("builtin taxonomy is valid")
    }

    pub fn from_path(path: &Path) -> Result<Self, TaxonomyError> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Two-column text: `token<TAB>category` or `alias<TAB>canonical`, with
    /// `token<TAB>NOISE` marking engine-noise tokens dropped at tokenization.
    pub fn parse(text: &str, origin: &str) -> Result<Self, TaxonomyError> {
        let mut tax = Self::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (token, value) = line.split_once('\t').ok_or_else(|| TaxonomyError::Parse {
                path: origin.to_string(),
                line: no + 1,
                reason: "expected token<TAB>value".to_string(),
            })?;
            let token = token.trim().to_lowercase();
            let value = value.trim();
            if value == "NOISE" {
                tax.noise.insert(token);
            } else if is_category(value) {
                tax.categories.insert(token, value.to_string());
            } else {
                tax.aliases.insert(token, value.to_lowercase());
            }
        }
        // canonical targets are never themselves aliased
        for target in tax.aliases.values() {
            if tax.aliases.contains_key(target) {
                return Err(TaxonomyError::AliasChain(target.clone()));
            }
        }
        Ok(tax)
    }

    fn knows(&self, token: &str) -> bool {
        self.categories.contains_key(token) || self.aliases.contains_key(token)
    }

    /// Lowercases, splits on non-alphanumeric bytes, and drops short tokens,
    /// pure hex/digit tokens, the engine's own name, and noise tokens.
    /// Tokens present in the taxonomy are exempt from the length and hex
    /// filters so short classifiers like `pup` survive.
    pub fn tokenize_label(&self, engine: &str, label: &str) -> Vec<String> {
        let engine = engine.to_lowercase();
        label
            .to_lowercase()
            .split(|c: char| !c.is_ascii_alphanumeric())
            .filter(|t| !t.is_empty())
            .filter(|t| {
                self.knows(t)
                    || (t.len() >= MIN_TOKEN_LEN
                        && !t.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)))
            })
            .filter(|t| *t != engine && !self.noise.contains(*t))
            .map(String::from)
            .collect()
    }

    /// Applies the alias map once, then classifies. Unmatched tokens come
    /// back as `Unknown` family candidates.
    pub fn resolve_token(&self, token: &str) -> ResolvedToken {
        let canonical = self.aliases.get(token).map(String::as_str).unwrap_or(token);
        match self.categories.get(canonical) {
            Some(cat) if cat == "FAM" => ResolvedToken::Family(canonical.to_string()),
            Some(cat) => ResolvedToken::Category {
                token: canonical.to_string(),
                category: cat.clone(),
            },
            None => ResolvedToken::Unknown(canonical.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResolvedToken {
    /// A family known to the taxonomy.
    Family(String),
    /// Not in the taxonomy; still a family candidate.
    Unknown(String),
    /// A non-family token (class, behavior, file property, generic).
    Category { token: String, category: String },
}

impl ResolvedToken {
    /// Tag string for category tokens, e.g. `BEH:ddos` or `CLASS:pup`.
    pub fn tag(&self) -> Option<String> {
        match self {
            ResolvedToken::Category { token, category } => {
                if category.split(':').next_back() == Some(token.as_str()) {
                    Some(category.clone())
                } else {
                    Some(format!("{category}:{token}"))
                }
            }
            _ => None,
        }
    }

    fn is_pup_marker(&self) -> bool {
        matches!(self, ResolvedToken::Category { category, .. } if category == "CLASS:pup" || category.starts_with("CLASS:pup:"))
    }
}

/// Labeling outcome for one sample.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabelResult {
    /// Plurality family, prefixed `FAM:` when the token is in the taxonomy
    /// and `UNK:` otherwise; NULL without support from two engines.
    pub family: Option<String>,
    /// Category tags seen in at least two engines' labels, with engine
    /// counts, ordered by descending count then tag.
    pub tags: Vec<(String, usize)>,
    /// True when engines using PUP-class tokens are a strict majority of the
    /// engines that labeled the sample.
    pub is_pup: bool,
}

/// Votes a family over all engines' labels. Each engine contributes each
/// distinct candidate once, however often the token repeats in its label.
pub fn label_sample(labels: &[(String, Option<String>)], taxonomy: &Taxonomy) -> LabelResult {
    // (token, known) -> engine count
    let mut candidates: BTreeMap<(String, bool), usize> = BTreeMap::new();
    let mut tag_counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut labeled_engines = 0usize;
    let mut pup_engines = 0usize;

    for (engine, label) in labels {
        let Some(label) = label.as_deref().filter(|l| !l.trim().is_empty()) else {
            continue;
        };
        labeled_engines += 1;
        let mut engine_candidates: BTreeSet<(String, bool)> = BTreeSet::new();
        let mut engine_tags: BTreeSet<String> = BTreeSet::new();
        let mut engine_pup = false;
        for token in taxonomy.tokenize_label(engine, label) {
            let resolved = taxonomy.resolve_token(&token);
            engine_pup |= resolved.is_pup_marker();
            match &resolved {
                ResolvedToken::Family(t) => {
                    engine_candidates.insert((t.clone(), true));
                }
                ResolvedToken::Unknown(t) => {
                    engine_candidates.insert((t.clone(), false));
                }
                ResolvedToken::Category { .. } => {
                    engine_tags.extend(resolved.tag());
                }
            }
        }
        for c in engine_candidates {
            *candidates.entry(c).or_default() += 1;
        }
        for t in engine_tags {
            *tag_counts.entry(t).or_default() += 1;
        }
        if engine_pup {
            pup_engines += 1;
        }
    }

    // highest engine count, ties broken by token text (BTreeMap order)
    let family = candidates
        .iter()
        .filter(|(_, &count)| count >= MIN_FAMILY_SUPPORT)
        .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0 .0.cmp(&a.0 .0)))
        .map(|((token, known), _)| {
            if *known { format!("FAM:{token}") } else { format!("UNK:{token}") }
        });

    let mut tags: Vec<(String, usize)> = tag_counts
        .into_iter()
        .filter(|(_, c)| *c >= MIN_FAMILY_SUPPORT)
        .collect();
    tags.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    LabelResult {
        family,
        tags,
        is_pup: pup_engines * 2 > labeled_engines,
    }
}
