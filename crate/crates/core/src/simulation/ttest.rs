//! Paired t-tests on per-replication integrated squared errors.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Significance {
    Ns,
    P05,
    P01,
}

impl Significance {
    pub fn from_p(p: f64) -> Self {
        if p < 0.01 {
            Significance::P01
        } else if p < 0.05 {
            Significance::P05
        } else {
            Significance::Ns
        }
    }

    /// Table marker: nothing, a dagger for 5% and a double dagger for 1%.
    pub fn marker(self) -> &'static str {
        match self {
            Significance::Ns => "",
            Significance::P05 => "\u{2020}",
            Significance::P01 => "\u{2021}",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTTest {
    pub t: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub mean_diff: f64,
    pub n: usize,
    /// All differences identical, so the statistic is undefined.
    pub degenerate: bool,
}

impl PairedTTest {
    pub fn significance(&self) -> Significance {
        Significance::from_p(self.p)
    }
}

/// Two-sided paired t-test of `mean(a - b) = 0`.
pub fn paired_ise_ttest(a: &[f64], b: &[f64]) -> Result<PairedTTest> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "paired samples differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::invalid("a paired t-test needs at least two pairs"));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if !(var > 0.0) {
        let p = if mean == 0.0 { 1.0 } else { 0.0 };
        let t = if mean == 0.0 {
            0.0
        } else {
            mean.signum() * f64::INFINITY
        };
        return Ok(PairedTTest {
            t,
            p,
            mean_diff: mean,
            n,
            degenerate: true,
        });
    }
    let t = mean / (var / n as f64).sqrt();
    let dist =
        StudentsT::new(0.0, 1.0, (n - 1) as f64).map_err(|e| Error::invalid(e.to_string()))?;
    let p = 2.0 * dist.sf(t.abs());
    Ok(PairedTTest {
        t,
        p,
        mean_diff: mean,
        n,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_example() {
        // differences 1, 2, 3, 4, 5: mean 3, sd sqrt(2.5), t = 3 / sqrt(0.5)
        let a = [2.0, 4.0, 6.0, 8.0, 10.0];
        let b = [1.0, 2.0, 3.0, 4.0, 5.0];
        let r = paired_ise_ttest(&a, &b).unwrap();
        assert!((r.t - 3.0 / 0.5f64.sqrt()).abs() < 1e-12);
        // two-sided p for t = 4.2426 on 4 dof
        assert!((r.p - 0.013_235_600).abs() < 1e-6, "{}", r.p);
        assert_eq!(r.significance(), Significance::P05);
    }

    #[test]
    fn constant_differences_are_flagged() {
        let r = paired_ise_ttest(&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]).unwrap();
        assert!(r.degenerate && r.p == 1.0);
        assert!(paired_ise_ttest(&[1.0], &[2.0]).is_err());
    }
}
