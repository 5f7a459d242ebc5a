//! Synthetic question populations.
//!
//! A question owns one answer space and `N + 1` transform profiles. Transform
//! 0 is the identity; transforms `1..=N` shift the logits of every correct
//! answer by a per-transform constant, which changes how hard the variant is
//! without changing which answers are correct.

use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::{self, Policy};
use crate::rng;

/// Two success rates closer than this are treated as equal by the diversity check.
pub const DIVERSITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct AnswerSpace {
    vocab_size: usize,
    correct_set: Vec<usize>,
}

impl AnswerSpace {
    pub fn new(vocab_size: usize, correct: impl IntoIterator<Item = usize>) -> Result<Self> {
        if vocab_size < 2 {
            return Err(Error::param(format!("vocab_size must be >= 2, got {vocab_size}")));
        }
        let correct_set: Vec<usize> = correct.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if correct_set.is_empty() {
            return Err(Error::param("correct_set must be nonempty"));
        }
        if let Some(&bad) = correct_set.iter().find(|&&o| o >= vocab_size) {
            return Err(Error::param(format!(
                "correct answer {bad} outside vocabulary of size {vocab_size}"
            )));
        }
        Ok(Self {
            vocab_size,
            correct_set,
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// Sorted, deduplicated indices of the correct answers.
    pub fn correct_set(&self) -> &[usize] {
        &self.correct_set
    }

    pub fn is_correct(&self, answer: usize) -> bool {
        self.correct_set.binary_search(&answer).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformProfile {
    pub logit_shift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticQuestion {
    id: u64,
    answer_space: AnswerSpace,
    transforms: Vec<TransformProfile>,
}

impl SyntheticQuestion {
    /// `shifts[0]` is the identity transform and must be exactly 0.
    pub fn new(id: u64, answer_space: AnswerSpace, shifts: &[f64]) -> Result<Self> {
        match shifts.first() {
            None => return Err(Error::param(format!("question {id}: no transforms"))),
            Some(&s) if s != 0.0 => {
                return Err(Error::param(format!(
                    "question {id}: identity transform has shift {s}, expected 0"
                )))
            }
            _ => {}
        }
        if let Some(s) = shifts.iter().find(|s| !s.is_finite()) {
            return Err(Error::param(format!("question {id}: non-finite shift {s}")));
        }
        Ok(Self {
            id,
            answer_space,
            transforms: shifts
                .iter()
                .map(|&logit_shift| TransformProfile { logit_shift })
                .collect(),
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn answer_space(&self) -> &AnswerSpace {
        &self.answer_space
    }

    pub fn transforms(&self) -> &[TransformProfile] {
        &self.transforms
    }

    /// Number of non-identity transforms.
    pub fn n_transforms(&self) -> usize {
        self.transforms.len() - 1
    }

    pub fn shift(&self, transform_index: usize) -> Option<f64> {
        self.transforms.get(transform_index).map(|t| t.logit_shift)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioDoc", into = "ScenarioDoc")]
pub struct Scenario {
    seed: u64,
    n_transforms: usize,
    questions: Vec<SyntheticQuestion>,
}

impl Scenario {
    pub fn new(seed: u64, n_transforms: usize, questions: Vec<SyntheticQuestion>) -> Result<Self> {
        if questions.is_empty() {
            return Err(Error::param("scenario needs at least one question"));
        }
        let mut seen = HashSet::new();
        for q in &questions {
            if !seen.insert(q.id) {
                return Err(Error::param(format!("duplicate question id {}", q.id)));
            }
            if q.n_transforms() != n_transforms {
                return Err(Error::param(format!(
                    "question {} has {} transforms, scenario declares {}",
                    q.id,
                    q.n_transforms(),
                    n_transforms
                )));
            }
        }
        Ok(Self {
            seed,
            n_transforms,
            questions,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_transforms(&self) -> usize {
        self.n_transforms
    }

    pub fn questions(&self) -> &[SyntheticQuestion] {
        &self.questions
    }

    pub fn question(&self, id: u64) -> Option<&SyntheticQuestion> {
        self.questions.iter().find(|q| q.id == id)
    }

    /// Total number of (question, transform) contexts.
    pub fn n_contexts(&self) -> usize {
        self.questions.len() * (self.n_transforms + 1)
    }

    /// Largest absolute logit shift over all transforms.
    pub fn max_abs_shift(&self) -> f64 {
        self.questions
            .iter()
            .flat_map(|q| q.transforms.iter())
            .map(|t| t.logit_shift.abs())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuestionDoc {
    id: u64,
    vocab_size: usize,
    correct_set: Vec<usize>,
    shifts: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    seed: u64,
    n_transforms: usize,
    questions: Vec<QuestionDoc>,
}

impl TryFrom<ScenarioDoc> for Scenario {
    type Error = Error;

    fn try_from(doc: ScenarioDoc) -> Result<Self> {
        let questions = doc
            .questions
            .into_iter()
            .map(|q| {
                let space = AnswerSpace::new(q.vocab_size, q.correct_set)?;
                SyntheticQuestion::new(q.id, space, &q.shifts)
            })
            .collect::<Result<Vec<_>>>()?;
        Scenario::new(doc.seed, doc.n_transforms, questions)
    }
}

impl From<Scenario> for ScenarioDoc {
    fn from(s: Scenario) -> Self {
        ScenarioDoc {
            seed: s.seed,
            n_transforms: s.n_transforms,
            questions: s
                .questions
                .into_iter()
                .map(|q| QuestionDoc {
                    id: q.id,
                    vocab_size: q.answer_space.vocab_size,
                    correct_set: q.answer_space.correct_set,
                    shifts: q.transforms.iter().map(|t| t.logit_shift).collect(),
                })
                .collect(),
        }
    }
}

/// Draws a scenario. Each question gets one correct answer chosen uniformly
/// from the vocabulary, and transforms `1..=N` get shifts uniform on
/// `[-difficulty_spread, +difficulty_spread)`.
pub fn generate_scenario(
    n_questions: usize,
    n_transforms: usize,
    difficulty_spread: f64,
    vocab_size: usize,
    seed: u64,
) -> Result<Scenario> {
    if n_questions == 0 {
        return Err(Error::param("n_questions must be >= 1"));
    }
    if vocab_size < 2 {
        return Err(Error::param(format!("vocab_size must be >= 2, got {vocab_size}")));
    }
    if !(difficulty_spread >= 0.0 && difficulty_spread.is_finite()) {
        return Err(Error::param(format!(
            "difficulty_spread must be finite and >= 0, got {difficulty_spread}"
        )));
    }
    let mut stream = rng::substream(seed, "scenario", &[]);
    let mut questions = Vec::with_capacity(n_questions);
    for id in 0..n_questions as u64 {
        let correct = stream.gen_range(0..vocab_size);
        let mut shifts = Vec::with_capacity(n_transforms + 1);
        shifts.push(0.0);
        for _ in 0..n_transforms {
            let u: f64 = stream.gen();
            shifts.push(difficulty_spread * (2.0 * u - 1.0));
        }
        let space = AnswerSpace::new(vocab_size, [correct])?;
        questions.push(SyntheticQuestion::new(id, space, &shifts)?);
    }
    Scenario::new(seed, n_transforms, questions)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub qid: u64,
    /// Exact per-transform success rates under the audited policy.
    pub rhos: Vec<f64>,
    pub pooled_success: f64,
    pub solvable: bool,
    pub consistent: bool,
    pub diverse: bool,
}

/// Audits solvability, answer-set consistency and transform diversity for
/// every question under `policy`.
pub fn check_assumptions(scenario: &Scenario, policy: &Policy) -> Result<Vec<AssumptionReport>> {
    scenario
        .questions()
        .iter()
        .map(|q| {
            let rhos = (0..q.transforms.len())
                .map(|t| policy::success_rate(policy, q, t))
                .collect::<Result<Vec<_>>>()?;
            let pooled_success = rhos.iter().sum::<f64>() / rhos.len() as f64;
            let diverse = rhos.iter().enumerate().any(|(i, a)| {
                rhos[i + 1..]
                    .iter()
                    .any(|b| (a - b).abs() > DIVERSITY_TOLERANCE)
            });
            Ok(AssumptionReport {
                qid: q.id,
                rhos,
                pooled_success,
                solvable: pooled_success > 0.0,
                // one AnswerSpace per question, shared by every transform
                consistent: true,
                diverse,
            })
        })
        .collect()
}
