//! Seeded stratified train/test splits and cohort sampling.
//!
//! Split algorithm: indices are grouped by class in input order and each
//! group is shuffled with its own ChaCha8 stream (`seed`, stream = class
//! rank). Class `k` contributes `floor(n_k * t / n)` test items, and the
//! remaining seats go to the largest remainders `(n_k * t) mod n`, lower
//! rank first on ties. All quota arithmetic is integral.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::instruction::InstructionRecord;
use super::ordinal::OrdinalClass;
use crate::curation::LpiExample;

pub const DEFAULT_TOLERANCE_PP: f64 = 2.0;

pub trait Labeled {
    fn ordinal(&self) -> OrdinalClass;
}

impl Labeled for LpiExample {
    fn ordinal(&self) -> OrdinalClass {
        LpiExample::ordinal(self)
    }
}

impl Labeled for InstructionRecord {
    fn ordinal(&self) -> OrdinalClass {
        self.output_class()
    }
}

impl Labeled for OrdinalClass {
    fn ordinal(&self) -> OrdinalClass {
        *self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestSize {
    Count(usize),
    Fraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub test_size: TestSize,
    pub seed: u64,
    pub tolerance_pp: f64,
}

impl SplitSpec {
    pub fn with_count(test_count: usize, seed: u64) -> Self {
        SplitSpec { test_size: TestSize::Count(test_count), seed, tolerance_pp: DEFAULT_TOLERANCE_PP }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error("test size {test_count} must be smaller than the {n} available examples")]
    TooSmall { test_count: usize, n: usize },
    #[error("invalid test size: {0}")]
    InvalidTestSize(String),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("class {class} would deviate by {deviation_pp:.3} pp from its parent share (tolerance {tolerance_pp} pp)")]
    InfeasibleTolerance { class: OrdinalClass, deviation_pp: f64, tolerance_pp: f64 },
    #[error("cohort of {n} requested from {available} examples")]
    TooLarge { n: usize, available: usize },
}

fn resolve_test_count(size: TestSize, n: usize) -> Result<usize, SamplingError> {
    let count = match size {
        TestSize::Count(c) => c,
        TestSize::Fraction(f) => {
            if !(f > 0.0 && f < 1.0) {
                return Err(SamplingError::InvalidTestSize(format!("fraction {f} outside (0, 1)")));
            }
            (f * n as f64).round() as usize
        }
    };
    if count == 0 {
        return Err(SamplingError::InvalidTestSize("test set would be empty".into()));
    }
    if count >= n {
        return Err(SamplingError::TooSmall { test_count: count, n });
    }
    Ok(count)
}

/// Per-class test quotas by largest remainder.
fn quotas(class_counts: &[usize; 5], n: usize, test_count: usize) -> [usize; 5] {
    let mut quota = [0usize; 5];
    let mut remainders = Vec::with_capacity(5);
    for (k, &c) in class_counts.iter().enumerate() {
        let scaled = c as u128 * test_count as u128;
        quota[k] = (scaled / n as u128) as usize;
        remainders.push((scaled % n as u128, k));
    }
    let assigned: usize = quota.iter().sum();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, k) in remainders.iter().take(test_count - assigned) {
        quota[k] += 1;
    }
    quota
}

/// Returns `(train, test)` index lists, each ascending.
pub fn stratified_split_indices<T: Labeled>(items: &[T], spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>), SamplingError> {
    if !(spec.tolerance_pp.is_finite() && spec.tolerance_pp > 0.0) {
        return Err(SamplingError::BadTolerance(spec.tolerance_pp));
    }
    let n = items.len();
    let test_count = resolve_test_count(spec.test_size, n)?;

    let mut groups: [Vec<usize>; 5] = Default::default();
    for (i, item) in items.iter().enumerate() {
        groups[item.ordinal().rank()].push(i);
    }
    let counts = groups.each_ref().map(Vec::len);
    let quota = quotas(&counts, n, test_count);

    for class in OrdinalClass::ALL {
        let k = class.rank();
        let parent = 100.0 * counts[k] as f64 / n as f64;
        let test = 100.0 * quota[k] as f64 / test_count as f64;
        let deviation = (test - parent).abs();
        if deviation > spec.tolerance_pp {
            return Err(SamplingError::InfeasibleTolerance {
                class,
                deviation_pp: deviation,
                tolerance_pp: spec.tolerance_pp,
            });
        }
    }

    let mut in_test = vec![false; n];
    for (k, group) in groups.iter_mut().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(k as u64);
        group.shuffle(&mut rng);
        for &i in &group[..quota[k]] {
            in_test[i] = true;
        }
    }
    let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| in_test[i]);
    Ok((train, test))
}

pub fn stratified_split<T: Labeled + Clone>(items: &[T], spec: &SplitSpec) -> Result<(Vec<T>, Vec<T>), SamplingError> {
    let (train, test) = stratified_split_indices(items, spec)?;
    Ok((
        train.into_iter().map(|i| items[i].clone()).collect(),
        test.into_iter().map(|i| items[i].clone()).collect(),
    ))
}

/// Uniform sample of `n` items without replacement, in sampled order.
pub fn sample_cohort<T: Clone>(items: &[T], n: usize, seed: u64) -> Result<Vec<T>, SamplingError> {
    if n > items.len() {
        return Err(SamplingError::TooLarge { n, available: items.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..items.len()).collect();
    let (chosen, _) = order.partial_shuffle(&mut rng, n);
    Ok(chosen.iter().map(|&i| items[i].clone()).collect())
}
