use std::ops::AddAssign;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        ConfusionCounts { tp, fp, fn_, tn }
    }

    #[inline]
    pub fn record(&mut self, truth: bool, predicted: bool) {
        match (truth, predicted) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
        self.tn += o.tn;
    }
}

/// `None` marks an undefined ratio (zero denominator).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct F1Scores {
    pub sensitivity: Option<f64>,
    pub precision: Option<f64>,
    pub f1: Option<f64>,
}

/// Sensitivity, precision and their harmonic mean.
///
/// With no true positives but some errors, F1 is 0. With no positives at all
/// (`tp = fp = fn = 0`) F1 is undefined and excluded from averages.
pub fn compute_f1(c: &ConfusionCounts) -> F1Scores {
    let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
    let sensitivity = ratio(c.tp, c.tp + c.fn_);
    let precision = ratio(c.tp, c.tp + c.fp);
    let f1 = if c.tp == 0 {
        (c.fp + c.fn_ > 0).then_some(0.0)
    } else {
        let (s, p) = (sensitivity.unwrap(), precision.unwrap());
        Some(2.0 * s * p / (s + p))
    };
    F1Scores { sensitivity, precision, f1 }
}
