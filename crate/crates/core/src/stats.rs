//! Sample moments with Monte Carlo standard errors.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    /// Biased (1/n) central second moment.
    pub var: f64,
    /// Central fourth moment.
    pub m4: f64,
}

impl Moments {
    pub fn of<I: IntoIterator<Item = f64>>(values: I) -> Moments {
        let xs: Vec<f64> = values.into_iter().collect();
        let n = xs.len();
        if n == 0 {
            return Moments {
                n,
                mean: f64::NAN,
                var: f64::NAN,
                m4: f64::NAN,
            };
        }
        let nf = n as f64;
        let mean = xs.iter().sum::<f64>() / nf;
        let (mut s2, mut s4) = (0.0, 0.0);
        for x in &xs {
            let d = x - mean;
            let d2 = d * d;
            s2 += d2;
            s4 += d2 * d2;
        }
        Moments {
            n,
            mean,
            var: s2 / nf,
            m4: s4 / nf,
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.var.sqrt()
    }

    /// Standard error of the mean.
    pub fn mean_se(&self) -> f64 {
        (self.var / self.n as f64).sqrt()
    }

    /// Standard error of the variance estimate, `sqrt((m4 - s⁴)/n)`.
    pub fn var_se(&self) -> f64 {
        ((self.m4 - self.var * self.var).max(0.0) / self.n as f64).sqrt()
    }

    /// Relative standard error of the standard deviation (delta method).
    pub fn std_dev_rel_se(&self) -> f64 {
        self.var_se() / (2.0 * self.var)
    }
}
