//! Text embeddings and cosine distance for fast-path retrieval.
//!
//! [`ReferenceEmbedder`] is an offline, deterministic hashed bag of tokens and
//! character trigrams. It is good at what the fast path needs, recognising
//! near-identical canonical task strings, and makes retrieval testable without
//! a network. [`HttpEmbedder`] talks to an external provider under the same
//! contract.

use std::cmp::Ordering;
use std::time::Duration;

use async_trait::async_trait;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::MemoryRecord;

pub const DEFAULT_DIMENSION: usize = 256;
pub const DEFAULT_SEED: u64 = 0x0005_eed0_fa57_u64;

/// Unit-norm vector, or the all-zero vector flagged degenerate.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector<T> {
    values: Vec<T>,
    degenerate: bool,
}

impl<T: Float> EmbeddingVector<T> {
    /// L2-normalizes raw feature weights. All-zero input yields the
    /// degenerate vector.
    pub fn from_weights(weights: Vec<T>) -> Self {
        let norm = weights.iter().fold(T::zero(), |acc, w| acc + *w * *w).sqrt();
        if norm == T::zero() {
            return EmbeddingVector { values: weights, degenerate: true };
        }
        EmbeddingVector { values: weights.into_iter().map(|w| w / norm).collect(), degenerate: false }
    }

    /// Wraps values that are already normalized, checking the norm.
    pub fn from_unit(values: Vec<T>) -> Result<Self> {
        let norm = values.iter().fold(T::zero(), |acc, w| acc + *w * *w).sqrt();
        if norm == T::zero() {
            return Ok(EmbeddingVector { values, degenerate: true });
        }
        let tol = T::from(1e-6).unwrap_or_else(T::epsilon);
        if (norm - T::one()).abs() > tol {
            return Err(Error::InvalidInput("embedding is not unit norm".into()));
        }
        Ok(EmbeddingVector { values, degenerate: false })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn norm(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, w| acc + *w * *w).sqrt()
    }
}

/// `1 - cos(a, b)`.
pub fn cosine_distance<T: Float>(a: &EmbeddingVector<T>, b: &EmbeddingVector<T>) -> Result<T> {
    cosine_distance_slices(a.values(), b.values())
}

pub(crate) fn cosine_distance_slices<T: Float>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), actual: b.len() });
    }
    let (mut dot, mut na, mut nb) = (T::zero(), T::zero(), T::zero());
    for (x, y) in a.iter().zip(b) {
        dot = dot + *x * *y;
        na = na + *x * *x;
        nb = nb + *y * *y;
    }
    if na == T::zero() || nb == T::zero() {
        return Err(Error::DegenerateVector);
    }
    let sim = dot / (na.sqrt() * nb.sqrt());
    let sim = sim.min(T::one()).max(-T::one());
    Ok(T::one() - sim)
}

/// Feature extraction and bucket hashing for the reference embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceEmbedder {
    pub dimension: usize,
    pub seed: u64,
}

impl Default for ReferenceEmbedder {
    fn default() -> Self {
        ReferenceEmbedder { dimension: DEFAULT_DIMENSION, seed: DEFAULT_SEED }
    }
}

impl ReferenceEmbedder {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidInput("embedding dimension must be positive".into()));
        }
        Ok(ReferenceEmbedder { dimension, seed: DEFAULT_SEED })
    }

    /// Case-folded alphanumeric tokens, each followed by its character
    /// trigrams.
    pub fn features(text: &str) -> Vec<String> {
        let folded = text.to_lowercase();
        let mut out = Vec::new();
        for token in folded.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
            out.push(token.to_string());
            let chars: Vec<char> = token.chars().collect();
            for window in chars.windows(3) {
                out.push(window.iter().collect());
            }
        }
        out
    }

    pub fn bucket(&self, feature: &str) -> usize {
        (fnv1a(self.seed, feature.as_bytes()) % self.dimension as u64) as usize
    }

    pub fn embed_as<T: Float>(&self, text: &str) -> EmbeddingVector<T> {
        let mut counts = vec![T::zero(); self.dimension];
        for feature in Self::features(text) {
            let b = self.bucket(&feature);
            counts[b] = counts[b] + T::one();
        }
        EmbeddingVector::from_weights(counts)
    }

    pub fn embed_reference(&self, text: &str) -> EmbeddingVector<f64> {
        self.embed_as::<f64>(text)
    }
}

fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET ^ seed;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(PRIME);
    }
    hash
}

/// Pluggable embedding provider.
#[async_trait]
pub trait Embedder: Send + Sync {
    fn dimension(&self) -> usize;
    async fn embed(&self, text: &str) -> Result<EmbeddingVector<f64>>;
}

#[async_trait]
impl Embedder for ReferenceEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    async fn embed(&self, text: &str) -> Result<EmbeddingVector<f64>> {
        Ok(self.embed_reference(text))
    }
}

/// External provider: `POST {text}` answered by `{vector}`.
pub struct HttpEmbedder {
    client: reqwest::Client,
    endpoint: String,
    dimension: usize,
}

impl HttpEmbedder {
    pub fn new(endpoint: impl Into<String>, dimension: usize, timeout: Duration) -> Result<Self> {
        let client = reqwest::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::ProviderUnavailable(e.to_string()))?;
        Ok(HttpEmbedder { client, endpoint: endpoint.into(), dimension })
    }
}

#[derive(Deserialize)]
struct VectorBody {
    vector: Vec<f64>,
}

#[async_trait]
impl Embedder for HttpEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    async fn embed(&self, text: &str) -> Result<EmbeddingVector<f64>> {
        let resp = self
            .client
            .post(&self.endpoint)
            .json(&serde_json::json!({ "text": text }))
            .send()
            .await
            .map_err(|e| Error::ProviderUnavailable(e.to_string()))?;
        let body: VectorBody = resp.json().await.map_err(|e| Error::ProviderUnavailable(e.to_string()))?;
        if body.vector.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, actual: body.vector.len() });
        }
        Ok(EmbeddingVector::from_weights(body.vector))
    }
}

/// Stored records ordered by distance to `query`, ties broken by earliest
/// `created_at` and then by insertion index. Degenerate records are skipped;
/// a degenerate query matches nothing.
pub fn ranked(query: &EmbeddingVector<f64>, store: &[MemoryRecord]) -> Result<Vec<(usize, f64)>> {
    if query.is_degenerate() {
        return Ok(Vec::new());
    }
    let mut out = Vec::with_capacity(store.len());
    for (i, record) in store.iter().enumerate() {
        match cosine_distance_slices(query.values(), &record.embedding) {
            Ok(d) => out.push((i, d)),
            Err(Error::DegenerateVector) => continue,
            Err(e) => return Err(e),
        }
    }
    out.sort_by(|(ia, da), (ib, db)| {
        da.partial_cmp(db)
            .unwrap_or(Ordering::Equal)
            .then_with(|| store[*ia].created_at.cmp(&store[*ib].created_at))
            .then_with(|| ia.cmp(ib))
    });
    Ok(out)
}

/// Argmin of [`ranked`]; `None` for an empty store.
pub fn nearest<'a>(
    query: &EmbeddingVector<f64>,
    store: &'a [MemoryRecord],
) -> Result<Option<(&'a MemoryRecord, f64)>> {
    Ok(ranked(query, store)?.first().map(|(i, d)| (&store[*i], *d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emotion::{EmotionLabel, Script};
    use chrono::{TimeZone, Utc};
    use proptest::prelude::*;

    fn record(text: &str, embedder: &ReferenceEmbedder, secs: i64) -> MemoryRecord {
        MemoryRecord {
            main_task: text.into(),
            embedding: embedder.embed_reference(text).into_values(),
            script: Script::single("ok", EmotionLabel::Neutral).unwrap(),
            created_at: Utc.timestamp_opt(secs, 0).unwrap(),
            hit_count: 0,
        }
    }

    #[test]
    fn case_fold_invariance() {
        let e = ReferenceEmbedder::default();
        assert_eq!(e.embed_reference("plan a day trip"), e.embed_reference("Plan A Day Trip"));
    }

    #[test]
    fn empty_text_is_degenerate() {
        let v = ReferenceEmbedder::default().embed_reference("");
        assert!(v.is_degenerate());
        assert!(v.values().iter().all(|x| *x == 0.0));
        assert_eq!(v.dimension(), DEFAULT_DIMENSION);
    }

    #[test]
    fn brute_force_feature_oracle() {
        let e = ReferenceEmbedder::default();
        // "abc def": tokens abc, def; each is exactly one trigram long.
        let features = ["abc", "abc", "def", "def"];
        let mut counts = vec![0.0f64; e.dimension];
        for f in features {
            counts[e.bucket(f)] += 1.0;
        }
        let norm = counts.iter().map(|c| c * c).sum::<f64>().sqrt();
        let expected: Vec<f64> = counts.iter().map(|c| c / norm).collect();
        assert_eq!(e.embed_reference("abc def").values(), expected.as_slice());
    }

    #[test]
    fn features_enumerate_tokens_and_trigrams() {
        assert_eq!(ReferenceEmbedder::features("Day-trip!"), vec!["day", "day", "trip", "tri", "rip"]);
        assert!(ReferenceEmbedder::features("  ;; ").is_empty());
    }

    #[test]
    fn distance_identity_and_orthogonality() {
        let e = ReferenceEmbedder::default();
        let v = e.embed_reference("plan a day trip");
        assert!(cosine_distance(&v, &v).unwrap().abs() < 1e-12);

        let mut a = vec![0.0; 4];
        let mut b = vec![0.0; 4];
        a[0] = 1.0;
        b[3] = 2.0;
        let d = cosine_distance(&EmbeddingVector::from_weights(a), &EmbeddingVector::from_weights(b)).unwrap();
        assert_eq!(d, 1.0);
    }

    #[test]
    fn distance_matches_independent_dot_product() {
        let e = ReferenceEmbedder::default();
        let a = e.embed_reference("day trip");
        let b = e.embed_reference("day journey");
        // independent route: recount features into buckets and compute raw cosine
        let count = |t: &str| {
            let mut c = vec![0u32; e.dimension];
            for f in ReferenceEmbedder::features(t) {
                c[e.bucket(&f)] += 1;
            }
            c
        };
        let (ca, cb) = (count("day trip"), count("day journey"));
        let dot: f64 = ca.iter().zip(&cb).map(|(x, y)| f64::from(x * y)).sum();
        let na: f64 = ca.iter().map(|x| f64::from(x * x)).sum::<f64>().sqrt();
        let nb: f64 = cb.iter().map(|x| f64::from(x * x)).sum::<f64>().sqrt();
        let expected = 1.0 - dot / (na * nb);
        assert!((cosine_distance(&a, &b).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn distance_errors() {
        let a = EmbeddingVector::from_weights(vec![1.0, 0.0]);
        let b = EmbeddingVector::from_weights(vec![1.0, 0.0, 0.0]);
        assert!(matches!(cosine_distance(&a, &b), Err(Error::DimensionMismatch { .. })));
        let z = EmbeddingVector::from_weights(vec![0.0, 0.0]);
        assert!(matches!(cosine_distance(&a, &z), Err(Error::DegenerateVector)));
    }

    #[test]
    fn generic_over_f32() {
        let e = ReferenceEmbedder::default();
        let a: EmbeddingVector<f32> = e.embed_as("plan a day trip");
        let b: EmbeddingVector<f32> = e.embed_as("plan a night trip");
        let d = cosine_distance(&a, &b).unwrap();
        let d64 = cosine_distance(&e.embed_reference("plan a day trip"), &e.embed_reference("plan a night trip")).unwrap();
        assert!((f64::from(d) - d64).abs() < 1e-5);
    }

    #[test]
    fn nearest_identity_and_empty() {
        let e = ReferenceEmbedder::default();
        let r = record("plan a day trip", &e, 0);
        let store = vec![r.clone()];
        let (best, d) = nearest(&e.embed_reference("plan a day trip"), &store).unwrap().unwrap();
        assert_eq!(best, &r);
        assert!(d.abs() < 1e-12);
        assert!(nearest(&e.embed_reference("x"), &[]).unwrap().is_none());
    }

    #[test]
    fn nearest_matches_exhaustive_scan() {
        let e = ReferenceEmbedder::default();
        let store = vec![
            record("tell a ghost story", &e, 1),
            record("plan a day trip to new york city", &e, 2),
            record("play relaxing piano music", &e, 3),
        ];
        let q = e.embed_reference("plan a trip to the city");
        let mut best = (usize::MAX, f64::INFINITY);
        for (i, r) in store.iter().enumerate() {
            let d = cosine_distance_slices(q.values(), &r.embedding).unwrap();
            if d < best.1 {
                best = (i, d);
            }
        }
        let (rec, d) = nearest(&q, &store).unwrap().unwrap();
        assert_eq!(rec, &store[best.0]);
        assert_eq!(d, best.1);
    }

    #[test]
    fn ties_break_by_earliest_created_at() {
        let e = ReferenceEmbedder::default();
        let late = record("same task", &e, 50);
        let early = record("same task", &e, 10);
        let store = vec![late, early.clone()];
        let (rec, _) = nearest(&e.embed_reference("same task"), &store).unwrap().unwrap();
        assert_eq!(rec.created_at, early.created_at);
    }

    proptest! {
        #[test]
        fn symmetric(a in "[a-z ]{1,30}", b in "[a-z ]{1,30}") {
            let e = ReferenceEmbedder::default();
            let (va, vb) = (e.embed_reference(&a), e.embed_reference(&b));
            prop_assume!(!va.is_degenerate() && !vb.is_degenerate());
            let d1 = cosine_distance(&va, &vb).unwrap();
            let d2 = cosine_distance(&vb, &va).unwrap();
            prop_assert!((d1 - d2).abs() <= 1e-12);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&d1));
        }

        #[test]
        fn unit_norm(text in "[A-Za-z0-9 ,.]{1,40}") {
            let v = ReferenceEmbedder::default().embed_reference(&text);
            prop_assume!(!v.is_degenerate());
            prop_assert!((v.norm() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn argmin_is_scale_invariant(scale in 1u32..50, texts in proptest::collection::vec("[a-z]{2,8}( [a-z]{2,8}){0,3}", 2..6), q in "[a-z]{2,8}( [a-z]{2,8}){0,3}") {
            let e = ReferenceEmbedder::default();
            let counts = |t: &str| {
                let mut c = vec![0.0f64; e.dimension];
                for f in ReferenceEmbedder::features(t) {
                    c[e.bucket(&f)] += 1.0;
                }
                c
            };
            let build = |k: f64| -> Vec<MemoryRecord> {
                texts.iter().enumerate().map(|(i, t)| MemoryRecord {
                    main_task: t.clone(),
                    embedding: EmbeddingVector::from_weights(counts(t).into_iter().map(|c| c * k).collect()).into_values(),
                    script: Script::single("ok", EmotionLabel::Neutral).unwrap(),
                    created_at: Utc.timestamp_opt(i as i64, 0).unwrap(),
                    hit_count: 0,
                }).collect()
            };
            let query = e.embed_reference(&q);
            let a = build(1.0);
            let b = build(f64::from(scale));
            let best_a = nearest(&query, &a).unwrap().map(|(_, d)| d);
            let chosen_b = ranked(&query, &b).unwrap().first().map(|(i, _)| *i);
            match (best_a, chosen_b) {
                (Some(da), Some(ib)) => {
                    // the record picked on scaled data is optimal on the original data
                    let d = cosine_distance_slices(query.values(), &a[ib].embedding).unwrap();
                    prop_assert!((d - da).abs() <= 1e-12);
                    let unique = ranked(&query, &a).unwrap().iter().filter(|(_, x)| (x - da).abs() <= 1e-12).count() == 1;
                    if unique {
                        prop_assert_eq!(&a[ib].main_task, &nearest(&query, &a).unwrap().unwrap().0.main_task);
                    }
                }
                (None, None) => {}
                other => prop_assert!(false, "mismatch {:?}", other),
            }
        }
    }
}
