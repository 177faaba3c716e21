//! Parameter sweeps: classification rate as a function of memory and
//! threshold, each alone and as cumulative concatenations.

use std::fmt;
use std::io::Write;

use anyhow::Result;
use clap::ValueEnum;
use dpsw_core::eval::cross_validate;
use dpsw_core::{FeatureColumn, FeatureMatrix, Rule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    /// One memory value at a time, on the unthresholded map (k = 0).
    Memory,
    /// Growing prefixes of the memory set, k = 0.
    MemoryCombination,
    /// One threshold index at a time, all memories.
    Threshold,
    /// Growing prefixes of the threshold set, all memories.
    ThresholdCombination,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Memory => "memory",
            Axis::MemoryCombination => "memory-combination",
            Axis::Threshold => "threshold",
            Axis::ThresholdCombination => "threshold-combination",
        }
    }

    pub fn uses_thresholds(self) -> bool {
        matches!(self, Axis::Threshold | Axis::ThresholdCombination)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: Axis,
    pub rules: Vec<Rule>,
    pub setting: Vec<u32>,
    pub dimension: usize,
    pub ccr_mean: f64,
    pub ccr_std: f64,
}

impl SweepRow {
    pub fn rule_label(&self) -> &'static str {
        match self.rules.as_slice() {
            [Rule::Min] => "min",
            [Rule::Max] => "max",
            _ => "both",
        }
    }

    /// `3` for a single value, `0+1+2` for a combination.
    pub fn setting_label(&self) -> String {
        self.setting
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join("+")
    }
}

pub struct SweepPlan<'a> {
    pub axis: Axis,
    pub curves: &'a [Vec<Rule>],
    pub memories: &'a [u32],
    pub thresholds: &'a [u32],
    pub folds: usize,
    pub seed: u64,
    pub ridge: f64,
}

/// Evaluates every setting of the sweep on columns of `features`, which must
/// cover all rules, memories and (for threshold axes) thresholds involved.
pub fn run(features: &FeatureMatrix, plan: &SweepPlan<'_>) -> Result<Vec<SweepRow>> {
    let values: &[u32] = if plan.axis.uses_thresholds() {
        plan.thresholds
    } else {
        plan.memories
    };
    let settings: Vec<Vec<u32>> = match plan.axis {
        Axis::Memory | Axis::Threshold => values.iter().map(|&v| vec![v]).collect(),
        Axis::MemoryCombination | Axis::ThresholdCombination => {
            (1..=values.len()).map(|n| values[..n].to_vec()).collect()
        }
    };
    let mut rows = Vec::new();
    for rules in plan.curves {
        for setting in &settings {
            let keep = |c: &FeatureColumn| {
                rules.contains(&c.rule)
                    && if plan.axis.uses_thresholds() {
                        setting.contains(&c.k) && plan.memories.contains(&(c.memory as u32))
                    } else {
                        c.k == 0 && setting.contains(&(c.memory as u32))
                    }
            };
            let subset = features.select(keep)?;
            let report = cross_validate(&subset.to_dataset()?, plan.folds, plan.seed, plan.ridge)?;
            rows.push(SweepRow {
                axis: plan.axis,
                rules: rules.clone(),
                setting: setting.clone(),
                dimension: subset.dimension,
                ccr_mean: report.ccr_mean,
                ccr_std: report.ccr_std,
            });
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record([
        "axis",
        "rule",
        "setting",
        "dimension",
        "ccr_mean",
        "ccr_std",
    ])?;
    for r in rows {
        w.write_record([
            r.axis.name().to_string(),
            r.rule_label().to_string(),
            r.setting_label(),
            r.dimension.to_string(),
            r.ccr_mean.to_string(),
            r.ccr_std.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
