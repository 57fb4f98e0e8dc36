//! Selection rules that decide which unknowns stay in the local set.
//!
//! Two residual rules compare each `|f_i|` with a global scale (RMS or mean
//! absolute value) times `alpha`; the step rule keeps unknowns whose Newton
//! update is at least as large as the unknown itself. The `*OrStep` kinds
//! keep an unknown if either rule wants it.

use serde::{Deserialize, Serialize};

use crate::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    ResidualRms,
    ResidualMean,
    #[serde(rename = "step")]
    StepSize,
    ResidualRmsOrStep,
    ResidualMeanOrStep,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleConfig {
    pub kind: RuleKind,
    /// Tolerance control, `0 < alpha <= 1`. Smaller is stricter about
    /// dropping unknowns, so sets get larger.
    pub alpha: f64,
    /// Floor on the selected set size, 0 disables it.
    pub min_set_size: usize,
}

impl RuleConfig {
    pub fn new(kind: RuleKind, alpha: f64) -> Self {
        Self {
            kind,
            alpha,
            min_set_size: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

impl Default for RuleConfig {
    fn default() -> Self {
        Self::new(RuleKind::ResidualMean, 0.01)
    }
}

pub fn rms_norm(f: &[f64]) -> Result<f64> {
    if f.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok((f.iter().map(|v| v * v).sum::<f64>() / f.len() as f64).sqrt())
}

pub fn mean_abs(f: &[f64]) -> Result<f64> {
    if f.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(f.iter().map(|v| v.abs()).sum::<f64>() / f.len() as f64)
}

fn flags_above(f: &[f64], threshold: f64) -> Vec<bool> {
    // an identically zero residual has nothing left to solve for
    if threshold == 0.0 && f.iter().all(|v| *v == 0.0) {
        return vec![false; f.len()];
    }
    f.iter().map(|v| v.abs() >= threshold).collect()
}

/// `|f_i| >= alpha * rms(f)`.
pub fn flags_residual_rms(f: &[f64], alpha: f64) -> Result<Vec<bool>> {
    Ok(flags_above(f, alpha * rms_norm(f)?))
}

/// `|f_i| >= alpha * mean(|f|)`.
pub fn flags_residual_mean(f: &[f64], alpha: f64) -> Result<Vec<bool>> {
    Ok(flags_above(f, alpha * mean_abs(f)?))
}

/// `|dx_i| >= |x_i|`.
pub fn flags_step_size(dx: &[f64], x: &[f64]) -> Result<Vec<bool>> {
    check_len(x.len(), dx.len())?;
    Ok(dx.iter().zip(x).map(|(d, v)| d.abs() >= v.abs()).collect())
}

/// Applies the configured rule to a full-length residual `f`, step `dx` and
/// iterate `x`.
pub fn select_flags(f: &[f64], dx: &[f64], x: &[f64], cfg: &RuleConfig) -> Result<Vec<bool>> {
    check_len(f.len(), dx.len())?;
    check_len(f.len(), x.len())?;
    let or = |a: Vec<bool>, b: Vec<bool>| -> Vec<bool> {
        a.into_iter().zip(b).map(|(p, q)| p || q).collect()
    };
    let mut flags = match cfg.kind {
        RuleKind::ResidualRms => flags_residual_rms(f, cfg.alpha)?,
        RuleKind::ResidualMean => flags_residual_mean(f, cfg.alpha)?,
        RuleKind::StepSize => flags_step_size(dx, x)?,
        RuleKind::ResidualRmsOrStep => {
            or(flags_residual_rms(f, cfg.alpha)?, flags_step_size(dx, x)?)
        }
        RuleKind::ResidualMeanOrStep => {
            or(flags_residual_mean(f, cfg.alpha)?, flags_step_size(dx, x)?)
        }
    };
    let selected = flags.iter().filter(|&&b| b).count();
    if selected < cfg.min_set_size {
        let mut order: Vec<usize> = (0..f.len()).collect();
        // stable sort, so equal magnitudes keep the lower index first
        order.sort_by(|&a, &b| f[b].abs().total_cmp(&f[a].abs()));
        flags.iter_mut().for_each(|b| *b = false);
        for &k in order.iter().take(cfg.min_set_size) {
            flags[k] = true;
        }
    }
    Ok(flags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn norms() {
        assert_relative_eq!(rms_norm(&[3.0, 4.0]).unwrap(), 12.5f64.sqrt());
        assert_relative_eq!(rms_norm(&[-2.5; 7]).unwrap(), 2.5, epsilon = 1e-15);
        assert_eq!(rms_norm(&[0.0; 4]).unwrap(), 0.0);
        assert!(rms_norm(&[]).is_err());

        assert_eq!(mean_abs(&[1.0, -2.0, 3.0]).unwrap(), 2.0);
        assert_eq!(mean_abs(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(mean_abs(&[-5.0]).unwrap(), 5.0);
        assert!(mean_abs(&[]).is_err());
    }

    #[test]
    fn rms_rule() {
        assert_eq!(flags_residual_rms(&[1.0; 4], 1.0).unwrap(), vec![true; 4]);
        // rms = sqrt((100 + 3 * 0.01) / 4) ~= 5.0007
        assert_eq!(
            flags_residual_rms(&[10.0, 0.1, 0.1, 0.1], 1.0).unwrap(),
            vec![true, false, false, false]
        );
        assert_eq!(
            flags_residual_rms(&[1e-3, 0.0, -4.0, 1e-200], 1e-300).unwrap(),
            vec![true, false, true, true]
        );
    }

    #[test]
    fn mean_rule() {
        assert_eq!(flags_residual_mean(&[1.0; 4], 1.0).unwrap(), vec![true; 4]);
        assert_eq!(
            flags_residual_mean(&[4.0, 0.0, 0.0, 0.0], 1.0).unwrap(),
            vec![true, false, false, false]
        );
        assert_eq!(
            flags_residual_mean(&[2.0, 2.0, 0.0, 0.0], 0.5).unwrap(),
            vec![true, true, false, false]
        );
        // signed residuals count by magnitude
        assert_eq!(
            flags_residual_mean(&[-3.0, -3.0, -0.1], 1.0).unwrap(),
            vec![true, true, false]
        );
    }

    #[test]
    fn step_rule() {
        assert_eq!(flags_step_size(&[0.5], &[1.0]).unwrap(), vec![false]);
        assert_eq!(flags_step_size(&[2.0], &[1.0]).unwrap(), vec![true]);
        assert_eq!(flags_step_size(&[1e-12], &[0.0]).unwrap(), vec![true]);
        assert!(flags_step_size(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn select_modes() {
        let z = [0.0; 4];
        let f = [4.0, 0.0, 0.0, 0.0];
        let cfg = RuleConfig::new(RuleKind::ResidualMean, 1.0);
        assert_eq!(
            select_flags(&f, &z, &z, &cfg).unwrap(),
            vec![true, false, false, false]
        );

        let cfg = RuleConfig::new(RuleKind::ResidualMeanOrStep, 1.0);
        assert_eq!(
            select_flags(&f, &[0.0, 9.0, 0.0, 0.0], &[0.0, 1.0, 1.0, 1.0], &cfg).unwrap(),
            vec![true, true, false, false]
        );

        let cfg = RuleConfig {
            kind: RuleKind::StepSize,
            alpha: 1.0,
            min_set_size: 2,
        };
        assert_eq!(
            select_flags(&[3.0, 1.0, 2.0, 0.0], &z, &[1.0; 4], &cfg).unwrap(),
            vec![true, false, true, false]
        );
    }

    #[test]
    fn min_set_size_ties_prefer_low_index() {
        let cfg = RuleConfig {
            kind: RuleKind::StepSize,
            alpha: 1.0,
            min_set_size: 2,
        };
        let flags = select_flags(&[1.0, 2.0, 2.0, 2.0], &[0.0; 4], &[1.0; 4], &cfg).unwrap();
        assert_eq!(flags, vec![false, true, true, false]);
    }

    #[test]
    fn zero_residual_selects_nothing() {
        assert_eq!(flags_residual_mean(&[0.0; 3], 0.5).unwrap(), vec![false; 3]);
        assert_eq!(flags_residual_rms(&[0.0; 3], 1.0).unwrap(), vec![false; 3]);
    }

    #[test]
    fn alpha_validation() {
        assert!(RuleConfig::new(RuleKind::ResidualRms, 0.0)
            .validate()
            .is_err());
        assert!(RuleConfig::new(RuleKind::ResidualRms, 1.5)
            .validate()
            .is_err());
        assert!(RuleConfig::new(RuleKind::ResidualRms, 1.0)
            .validate()
            .is_ok());
    }

    #[test]
    fn rule_names_round_trip() {
        let names = [
            "\"residual_rms\"",
            "\"residual_mean\"",
            "\"step\"",
            "\"residual_rms_or_step\"",
            "\"residual_mean_or_step\"",
        ];
        for name in names {
            let kind: RuleKind = serde_json::from_str(name).unwrap();
            assert_eq!(serde_json::to_string(&kind).unwrap(), name);
        }
    }
}
