use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::rng::{Purpose, RngStream};

use super::dataset::{Dataset, Labels};
use super::error::DataError;

/// Pixel noise standard deviation of [`synth_digits`].
pub const SYNTH_NOISE: f64 = 0.5;

/// Class templates used by [`synth_digits`]: `classes` binary images of
/// `side × side` pixels with roughly a third of the pixels lit.
pub fn digit_templates(side: usize, classes: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = RngStream::new(seed, Purpose::DataGeneration);
    (0..classes).map(|_| (0..side * side).map(|_| if rng.random_bool(0.35) { 1.0 } else { 0.0 }).collect()).collect()
}

/// Synthetic `side × side` "digits": template of the class plus Gaussian
/// noise, clamped to `[0, 1]`. Example `i` has class `i mod classes`, so
/// classes are balanced.
pub fn synth_digits(n: usize, side: usize, classes: usize, seed: u64) -> Result<Dataset, DataError> {
    if classes < 2 || side == 0 {
        return Err(DataError::Shape("need at least two classes and a positive side".into()));
    }
    if n < classes {
        return Err(DataError::Shape(format!("{n} examples cannot cover {classes} classes")));
    }
    let templates = digit_templates(side, classes, seed);
    let mut rng = RngStream::new(seed, Purpose::DataGeneration).child();
    let noise = Normal::new(0.0, SYNTH_NOISE).expect("finite scale");
    let mut features = Vec::with_capacity(n * side * side);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % classes;
        features.extend(templates[c].iter().map(|t| (t + noise.sample(&mut rng)).clamp(0.0, 1.0)));
        labels.push(c);
    }
    Dataset::new(features, side * side, Labels::Classes(labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_shaped() {
        let a = synth_digits(100, 8, 10, 3).unwrap();
        assert_eq!(a, synth_digits(100, 8, 10, 3).unwrap());
        assert_eq!(a.cols(), 64);
        assert!(a.features().iter().all(|v| (0.0..=1.0).contains(v)));
        let counts = a.classes().unwrap().iter().fold([0; 10], |mut acc, &c| {
            acc[c] += 1;
            acc
        });
        assert_eq!(counts, [10; 10]);
    }

    #[test]
    fn too_few_examples() {
        assert!(synth_digits(9, 8, 10, 0).is_err());
    }
}
