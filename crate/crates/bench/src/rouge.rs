//! ROUGE-L over whitespace tokens and the pairwise diversity filter.

/// Pairs scoring above this are considered near-duplicates.
pub const DIVERSITY_THRESHOLD: f64 = 0.7;

/// Case-folded whitespace split.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_lowercase).collect()
}

pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// LCS-based F1. Zero when either side is empty or nothing matches.
pub fn rouge_l<T: PartialEq>(reference: &[T], candidate: &[T]) -> f64 {
    let lcs = lcs_len(reference, candidate);
    if lcs == 0 {
        return 0.0;
    }
    let p = lcs as f64 / candidate.len() as f64;
    let r = lcs as f64 / reference.len() as f64;
    2.0 * p * r / (p + r)
}

pub fn rouge_l_text(reference: &str, candidate: &str) -> f64 {
    rouge_l(&tokenize(reference), &tokenize(candidate))
}

/// Greedy admission: a text is kept only if it scores at most the
/// threshold against everything kept before it.
#[derive(Debug, Clone, Default)]
pub struct DiversityPool {
    kept: Vec<Vec<String>>,
    threshold: Option<f64>,
}

impl DiversityPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_threshold(threshold: f64) -> Self {
        DiversityPool { kept: Vec::new(), threshold: Some(threshold) }
    }

    pub fn admits(&self, text: &str) -> bool {
        let t = tokenize(text);
        let limit = self.threshold.unwrap_or(DIVERSITY_THRESHOLD);
        !t.is_empty() && self.kept.iter().all(|k| rouge_l(k, &t) <= limit)
    }

    pub fn try_admit(&mut self, text: &str) -> bool {
        if self.admits(text) {
            self.kept.push(tokenize(text));
            true
        } else {
            false
        }
    }

    pub fn len(&self) -> usize {
        self.kept.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kept.is_empty()
    }
}

/// Largest pairwise score among `texts` (0 for fewer than two).
pub fn max_pairwise<S: AsRef<str>>(texts: &[S]) -> f64 {
    let toks: Vec<Vec<String>> = texts.iter().map(|t| tokenize(t.as_ref())).collect();
    let mut max = 0.0f64;
    for i in 0..toks.len() {
        for j in i + 1..toks.len() {
            max = max.max(rouge_l(&toks[i], &toks[j]));
        }
    }
    max
}
