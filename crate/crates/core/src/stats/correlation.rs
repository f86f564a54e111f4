use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::mismatch("correlation inputs", x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Degenerate(format!("correlation needs at least 3 points, got {n}")));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Upper tail `P(T > t)` of Student's t with `df` degrees of freedom.
pub fn student_t_sf(t: f64, df: f64) -> f64 {
    let x = df / (df + t * t);
    let tail = 0.5 * beta_reg(df / 2.0, 0.5, x);
    if t >= 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    /// Tests whether the candidate correlation exceeds the baseline's.
    #[default]
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilliamsResult {
    pub t: f64,
    pub p: f64,
    pub df: usize,
}

/// Williams test for two dependent correlations sharing one variable.
///
/// `r12` = corr(human, candidate), `r13` = corr(human, baseline),
/// `r23` = corr(candidate, baseline), over `n` items. The t statistic has
/// `n - 3` degrees of freedom.
pub fn williams_test(r12: f64, r13: f64, r23: f64, n: usize, tail: Tail) -> Result<WilliamsResult> {
    if n <= 3 {
        return Err(Error::Degenerate(format!("Williams test needs n > 3, got {n}")));
    }
    for r in [r12, r13, r23] {
        if !(r > -1.0 && r < 1.0) {
            return Err(Error::Degenerate(format!("correlation {r} outside (-1, 1)")));
        }
    }
    let nf = n as f64;
    // Written symmetrically in (r12, r13) so swapping them negates t exactly.
    let k = 1.0 - (r12 * r12 + r13 * r13) - r23 * r23 + 2.0 * (r12 * r13) * r23;
    if k <= 0.0 {
        return Err(Error::Degenerate(format!("correlation matrix determinant {k} is not positive")));
    }
    let denom = (2.0 * k * (nf - 1.0) / (nf - 3.0) + ((r12 + r13).powi(2) / 4.0) * (1.0 - r23).powi(3)).sqrt();
    let t = (r12 - r13) * ((nf - 1.0) * (1.0 + r23)).sqrt() / denom;
    let df = n - 3;
    let p = match tail {
        Tail::One => student_t_sf(t, df as f64),
        Tail::Two => (2.0 * student_t_sf(t.abs(), df as f64)).min(1.0),
    };
    Ok(WilliamsResult { t, p, df })
}
