//! Ordinary least squares with full inference: Householder QR with column
//! pivoting, coefficient standard errors from the inverse normal matrix,
//! two-sided t p-values, and the model F test.
//!
//! Predictors enter as single integer codes, not dummy columns; the emitted
//! tables reproduce that modelling choice deliberately.

use crate::analysis::AnalysisRow;
use crate::statcore::{f_cdf, two_sided_p, StatError};
use crate::types::{FactorSet, Predictor, Trait};
use serde::{Deserialize, Serialize};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RegressError {
    #[error("design is empty after filtering")]
    EmptyDesign,
    #[error("need n > p + 1 observations; got n = {n}, p = {p}")]
    TooFewRows { n: usize, p: usize },
    #[error("design is rank deficient at column {column:?}")]
    RankDeficient { column: String },
    #[error("predictor vector length {got} does not match fit with {expected} predictors")]
    LengthMismatch { got: usize, expected: usize },
    #[error(transparent)]
    Stat(#[from] StatError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    /// Missing predictor codes enter the design as the number 0.
    ZeroInclude,
    /// Rows with any missing predictor are excluded.
    DropRow,
}

impl FromStr for MissingPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zero" | "zero-include" => Ok(MissingPolicy::ZeroInclude),
            "drop" | "drop-row" => Ok(MissingPolicy::DropRow),
            _ => Err(format!("unknown missing policy {s:?} (expected zero|drop)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DesignSpec {
    pub target: Trait,
    pub predictors: Vec<Predictor>,
    pub missing_policy: MissingPolicy,
}

/// Row-major design matrix (without intercept column) and response vector.
#[derive(Debug, Clone)]
pub struct Design {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub n: usize,
    pub p: usize,
}

/// Extract the design for one trait. Rows with a missing trait score are
/// always excluded; missing predictors follow the policy. Output order
/// follows input order.
pub fn build_design(rows: &[AnalysisRow], spec: &DesignSpec) -> Result<Design, RegressError> {
    assert!(!spec.predictors.is_empty(), "predictors must be nonempty");
    let p = spec.predictors.len();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for row in rows {
        let Some(score) = row.scores.get(spec.target) else {
            continue;
        };
        let codes: Vec<u8> = spec
            .predictors
            .iter()
            .map(|pr| row.predictors.get(*pr))
            .collect();
        if spec.missing_policy == MissingPolicy::DropRow && codes.iter().any(|&c| c == 0) {
            continue;
        }
        y.push(score as f64);
        x.extend(codes.iter().map(|&c| c as f64));
    }
    if y.is_empty() {
        return Err(RegressError::EmptyDesign);
    }
    Ok(Design {
        n: y.len(),
        x,
        y,
        p,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitTerm {
    pub name: String,
    pub beta: f64,
    pub se: f64,
    pub t: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionFit {
    /// Intercept first, then one term per predictor in design order.
    pub terms: Vec<FitTerm>,
    pub f: f64,
    pub p_model: f64,
    pub n: usize,
    pub df_resid: usize,
    pub r2: f64,
}

impl RegressionFit {
    pub fn intercept(&self) -> f64 {
        self.terms[0].beta
    }

    pub fn coefficients(&self) -> impl Iterator<Item = &FitTerm> {
        self.terms.iter().skip(1)
    }
}

const RANK_TOL_FACTOR: f64 = 1e-10;

/// Fit by Householder QR with column pivoting on the intercept-augmented
/// design. `term_names` has length p (predictor names, no intercept).
pub fn ols_fit(design: &Design, term_names: &[String]) -> Result<RegressionFit, RegressError> {
    let n = design.n;
    let p = design.p;
    assert_eq!(term_names.len(), p);
    if n <= p + 1 {
        return Err(RegressError::TooFewRows { n, p });
    }
    let m = p + 1; // intercept column first

    // Column-major augmented matrix for cache-friendly Householder steps.
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(m);
    a.push(vec![1.0; n]);
    for j in 0..p {
        a.push((0..n).map(|i| design.x[i * p + j]).collect());
    }
    let mut qty = design.y.clone();

    let max_norm = a
        .iter()
        .map(|col| col.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0f64, f64::max);
    let tol = RANK_TOL_FACTOR * max_norm;

    let mut perm: Vec<usize> = (0..m).collect();
    let mut r = vec![vec![0.0f64; m]; m];

    for k in 0..m {
        // Pivot: remaining column with the largest norm below row k.
        let (best, best_norm) = (k..m)
            .map(|j| {
                let norm = a[j][k..].iter().map(|v| v * v).sum::<f64>().sqrt()
;
                (j, norm)
            })
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        a.swap(k, best);
        perm.swap(k, best);
        if best_norm <= tol {
            let col = perm[k];
            let name = if col == 0 {
                "constant".to_string()
            } else {
                term_names[col - 1].clone()
            };
            return Err(RegressError::RankDeficient { column: name });
        }

        // Householder reflector for column k.
        let alpha = -a[k][k].signum() * best_norm;
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        a[k][k] = alpha;
        for x in a[k][k + 1..].iter_mut() {
            *x = 0.0;
        }
        if vnorm2 > 0.0 {
            for col in a.iter_mut().skip(k + 1) {
                let dot: f64 = v.iter().zip(&col[k..]).map(|(vi, ci)| vi * ci).sum();
                let scale = 2.0 * dot / vnorm2;
                for (vi, ci) in v.iter().zip(col[k..].iter_mut()) {
                    *ci -= scale * vi;
                }
            }
            let dot: f64 = v.iter().zip(&qty[k..]).map(|(vi, yi)| vi * yi).sum();
            let scale = 2.0 * dot / vnorm2;
            for (vi, yi) in v.iter().zip(qty[k..].iter_mut()) {
                *yi -= scale * vi;
            }
        }
        for i in 0..=k {
            r[i][k] = a[k][i];
        }
    }

    // Back substitution: R b = qty[0..m], in pivoted order.
    let mut b_piv = vec![0.0f64; m];
    for i in (0..m).rev() {
        let mut s = qty[i];
        for j in i + 1..m {
            s -= r[i][j] * b_piv[j];
        }
        b_piv[i] = s / r[i][i];
    }

    // R^{-1} for the covariance diagonal: (X'X)^{-1} = R^{-1} R^{-T}.
    let mut rinv = vec![vec![0.0f64; m]; m];
    for j in (0..m).rev() {
        rinv[j][j] = 1.0 / r[j][j];
        for i in (0..j).rev() {
            let mut s = 0.0;
            for k in i + 1..=j {
                s += r[i][k] * rinv[k][j];
            }
            rinv[i][j] = -s / r[i][i];
        }
    }
    let cov_diag_piv: Vec<f64> = (0..m)
        .map(|i| (i..m).map(|j| rinv[i][j] * rinv[i][j]).sum())
        .collect();

    // Undo the pivot.
    let mut beta = vec![0.0f64; m];
    let mut cov_diag = vec![0.0f64; m];
    for k in 0..m {
        beta[perm[k]] = b_piv[k];
        cov_diag[perm[k]] = cov_diag_piv[k];
    }

    let sse: f64 = qty[m..].iter().map(|v| v * v).sum();
    let df_resid = n - m;
    let sigma2 = sse / df_resid as f64;

    let y_mean = design.y.iter().sum::<f64>() / n as f64;
    let sst: f64 = design.y.iter().map(|v| (v - y_mean).powi(2)).sum();
    let r2 = if sst > 0.0 {
        (1.0 - sse / sst).clamp(0.0, 1.0)
    } else {
        // Constant response: the intercept reproduces it exactly.
        1.0
    };

    let (f, p_model) = if p > 0 && r2 < 1.0 {
        let f = (r2 / p as f64) / ((1.0 - r2) / df_resid as f64);
        (f, 1.0 - f_cdf(f, p as u64, df_resid as u64)?)
    } else if p > 0 {
        (f64::INFINITY, 0.0)
    } else {
        (0.0, 1.0)
    };

    let mut terms = Vec::with_capacity(m);
    for i in 0..m {
        let name = if i == 0 {
            "constant".to_string()
        } else {
            term_names[i - 1].clone()
        };
        let se = (sigma2 * cov_diag[i]).sqrt();
        let t = if se > 0.0 { beta[i] / se } else { 0.0 };
        let p_val = if se > 0.0 {
            two_sided_p(t, df_resid as u64)?
        } else {
            0.0
        };
        terms.push(FitTerm {
            name,
            beta: beta[i],
            se,
            t,
            p: p_val,
        });
    }

    Ok(RegressionFit {
        terms,
        f,
        p_model,
        n,
        df_resid,
        r2,
    })
}

/// Evaluate the fitted equation at one predictor-code vector.
pub fn predict(fit: &RegressionFit, x: &[f64]) -> Result<f64, RegressError> {
    let expected = fit.terms.len() - 1;
    if x.len() != expected {
        return Err(RegressError::LengthMismatch {
            got: x.len(),
            expected,
        });
    }
    Ok(fit.intercept()
        + fit
            .coefficients()
            .zip(x)
            .map(|(term, xi)| term.beta * xi)
            .sum::<f64>())
}

/// Fit one of the fifteen factor-set x trait models.
pub fn fit_factor_model(
    rows: &[AnalysisRow],
    factor_set: FactorSet,
    target: Trait,
    missing_policy: MissingPolicy,
) -> Result<RegressionFit, RegressError> {
    let spec = DesignSpec {
        target,
        predictors: factor_set.predictors().to_vec(),
        missing_policy,
    };
    let design = build_design(rows, &spec)?;
    let names: Vec<String> = spec
        .predictors
        .iter()
        .map(|p| p.as_str().to_string())
        .collect();
    ols_fit(&design, &names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::EncodedPredictors;
    use crate::scoring::TraitScores;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn design(x: &[&[f64]], y: &[f64]) -> Design {
        let p = x[0].len();
        Design {
            x: x.iter().flat_map(|r| r.iter().copied()).collect(),
            y: y.to_vec(),
            n: y.len(),
            p,
        }
    }

    #[test]
    fn exact_linear_data() {
        let d = design(&[&[1.0], &[2.0], &[3.0]], &[5.0, 7.0, 9.0]);
        let fit = ols_fit(&d, &["x".into()]).unwrap();
        assert_close(fit.intercept(), 3.0, 1e-10);
        assert_close(fit.terms[1].beta, 2.0, 1e-10);
        assert_close(fit.r2, 1.0, 1e-12);
    }

    #[test]
    fn intercept_only_is_mean() {
        let d = Design {
            x: vec![],
            y: vec![1.0, 2.0, 3.0],
            n: 3,
            p: 0,
        };
        let fit = ols_fit(&d, &[]).unwrap();
        assert_close(fit.intercept(), 2.0, 1e-12);
    }

    #[test]
    fn rank_deficiency_names_column() {
        // Second predictor duplicates the first.
        let d = design(
            &[&[1.0, 1.0], &[2.0, 2.0], &[3.0, 3.0], &[4.0, 4.0]],
            &[1.0, 2.0, 2.5, 4.0],
        );
        match ols_fit(&d, &["a".into(), "b".into()]) {
            Err(RegressError::RankDeficient { column }) => {
                assert!(column == "a" || column == "b");
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn too_few_rows_rejected() {
        let d = design(&[&[1.0], &[2.0]], &[1.0, 2.0]);
        assert!(matches!(
            ols_fit(&d, &["x".into()]),
            Err(RegressError::TooFewRows { .. })
        ));
    }

    #[test]
    fn matches_normal_equations_small() {
        // Fixed 6x2 design checked against the normal-equations oracle.
        let d = design(
            &[
                &[1.0, 2.0],
                &[2.0, 1.0],
                &[3.0, 4.0],
                &[4.0, 3.0],
                &[5.0, 7.0],
                &[6.0, 5.0],
            ],
            &[3.1, 3.9, 7.2, 8.8, 13.1, 14.2],
        );
        let fit = ols_fit(&d, &["a".into(), "b".into()]).unwrap();
        let oracle = normal_equations(&d);
        for (i, term) in fit.terms.iter().enumerate() {
            assert_close(term.beta, oracle[i], 1e-10);
        }
        // Residual orthogonality: X'r ~ 0.
        let resid: Vec<f64> = (0..d.n)
            .map(|i| {
                let pred = fit.intercept()
                    + fit.terms[1].beta * d.x[i * 2]
                    + fit.terms[2].beta * d.x[i * 2 + 1];
                d.y[i] - pred
            })
            .collect();
        let ynorm: f64 = d.y.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(resid.iter().sum::<f64>().abs() <= 1e-8 * ynorm);
        for j in 0..2 {
            let dot: f64 = (0..d.n).map(|i| resid[i] * d.x[i * 2 + j]).sum();
            assert!(dot.abs() <= 1e-8 * ynorm);
        }
        // F consistency with R2.
        let f_expected =
            (fit.r2 / 2.0) / ((1.0 - fit.r2) / fit.df_resid as f64);
        assert_close(fit.f, f_expected, 1e-9);
    }

    /// Brute-force normal equations solver, used as the oracle.
    pub(crate) fn normal_equations(d: &Design) -> Vec<f64> {
        let m = d.p + 1;
        let xi = |i: usize, j: usize| -> f64 {
            if j == 0 {
                1.0
            } else {
                d.x[i * d.p + (j - 1)]
            }
        };
        let mut ata = vec![vec![0.0f64; m]; m];
        let mut aty = vec![0.0f64; m];
        for i in 0..d.n {
            for j in 0..m {
                aty[j] += xi(i, j) * d.y[i];
                for k in 0..m {
                    ata[j][k] += xi(i, j) * xi(i, k);
                }
            }
        }
        // Gaussian elimination with partial pivoting.
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&a, &b| ata[a][col].abs().total_cmp(&ata[b][col].abs()))
                .unwrap();
            ata.swap(col, piv);
            aty.swap(col, piv);
            for row in col + 1..m {
                let factor = ata[row][col] / ata[col][col];
                for k in col..m {
                    ata[row][k] -= factor * ata[col][k];
                }
                aty[row] -= factor * aty[col];
            }
        }
        let mut b = vec![0.0f64; m];
        for i in (0..m).rev() {
            let mut s = aty[i];
            for j in i + 1..m {
                s -= ata[i][j] * b[j];
            }
            b[i] = s / ata[i][i];
        }
        b
    }

    #[test]
    fn predict_hand_values() {
        let fit = RegressionFit {
            terms: vec![
                FitTerm { name: "constant".into(), beta: 27.758, se: 0.0, t: 0.0, p: 0.0 },
                FitTerm { name: "growth".into(), beta: 1.153, se: 0.0, t: 0.0, p: 0.0 },
                FitTerm { name: "gender".into(), beta: 0.637, se: 0.0, t: 0.0, p: 0.0 },
                FitTerm { name: "hand".into(), beta: -0.378, se: 0.0, t: 0.0, p: 0.0 },
            ],
            f: 0.0,
            p_model: 0.0,
            n: 0,
            df_resid: 0,
            r2: 0.0,
        };
        assert_close(predict(&fit, &[1.0, 1.0, 1.0]).unwrap(), 29.170, 1e-9);
        assert_close(predict(&fit, &[0.0, 0.0, 0.0]).unwrap(), 27.758, 1e-12);
        assert!(matches!(
            predict(&fit, &[1.0]),
            Err(RegressError::LengthMismatch { .. })
        ));

        let fit2 = RegressionFit {
            terms: vec![
                FitTerm { name: "constant".into(), beta: 28.946, se: 0.0, t: 0.0, p: 0.0 },
                FitTerm { name: "religion".into(), beta: 0.214, se: 0.0, t: 0.0, p: 0.0 },
                FitTerm { name: "race".into(), beta: 0.423, se: 0.0, t: 0.0, p: 0.0 },
                FitTerm { name: "voted".into(), beta: -0.768, se: 0.0, t: 0.0, p: 0.0 },
            ],
            ..fit.clone()
        };
        assert_close(predict(&fit2, &[9.0, 4.0, 1.0]).unwrap(), 31.796, 1e-9);
    }

    fn row(e: Option<u8>, growth: u8, gender: u8, hand: u8) -> AnalysisRow {
        let mut predictors = EncodedPredictors::default();
        predictors.growth = growth;
        predictors.gender = gender;
        predictors.hand = hand;
        AnalysisRow {
            source: "t".into(),
            row_index: 0,
            scores: TraitScores {
                e,
                ..Default::default()
            },
            predictors,
            country: None,
        }
    }

    #[test]
    fn design_policies() {
        let rows = vec![
            row(Some(30), 1, 2, 1),
            row(Some(40), 0, 1, 1), // missing growth
            row(None, 2, 2, 2),     // missing target
        ];
        let spec = DesignSpec {
            target: Trait::E,
            predictors: vec![Predictor::Growth, Predictor::Gender, Predictor::Hand],
            missing_policy: MissingPolicy::ZeroInclude,
        };
        let d = build_design(&rows, &spec).unwrap();
        assert_eq!(d.n, 2);
        assert_eq!(&d.x[3..6], &[0.0, 1.0, 1.0]); // zero enters as 0

        let spec_drop = DesignSpec {
            missing_policy: MissingPolicy::DropRow,
            ..spec
        };
        let d2 = build_design(&rows, &spec_drop).unwrap();
        assert_eq!(d2.n, 1);
    }

    #[test]
    fn design_empty_after_filter() {
        let rows = vec![row(None, 1, 1, 1)];
        let spec = DesignSpec {
            target: Trait::E,
            predictors: vec![Predictor::Growth],
            missing_policy: MissingPolicy::ZeroInclude,
        };
        assert!(matches!(
            build_design(&rows, &spec),
            Err(RegressError::EmptyDesign)
        ));
    }

    #[test]
    fn factor_model_structure() {
        // 40 synthetic rows with a planted linear signal.
        let mut rows = Vec::new();
        for i in 0..40u8 {
            let growth = i % 4 + 1;
            let gender = i % 3 + 1;
            let hand = i % 2 + 1;
            let score = (20 + 2 * growth + gender) as u8;
            rows.push(row(Some(score), growth, gender, hand));
        }
        let fit =
            fit_factor_model(&rows, FactorSet::Biological, Trait::E, MissingPolicy::ZeroInclude)
                .unwrap();
        assert_eq!(fit.terms.len(), 4);
        assert_close(fit.terms[1].beta, 2.0, 1e-8);
        assert_close(fit.terms[2].beta, 1.0, 1e-8);
    }
}
