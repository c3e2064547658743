//! Exact follower oracle and the three-stage sample-average estimator of the
//! follower's optimal spread, with gap statistics.
//!
//! Stage 1 solves the sampled follower problem exactly on M independent
//! batches of N realizations, giving a statistical lower bound. Stage 2
//! screens the batch responses on a larger fresh sample. Stage 3 re-evaluates
//! the chosen response on a still larger sample, giving an upper bound, the
//! gap estimate, its variance, and a confidence interval on the gap.

use std::time::{Duration, Instant};

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::diffusion::{
    spread, spread_counts, DeactivationSet, LhsSampler, SeedSet, ThresholdSample, ThresholdSampler,
};
use crate::error::{ImpdError, Result};
use crate::instance::ImpdInstance;
use crate::rng::substream;

/// Seed-set sizes beyond this are rejected by the exact follower oracle.
pub const EXACT_ORACLE_MAX_SEED: usize = 30;

/// Sample sizes and seed for the three-stage estimator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaaParams {
    /// Batch sample size N.
    pub batch_size: usize,
    /// Number of batches M.
    pub batch_count: usize,
    /// Screening sample size N'.
    pub select_size: usize,
    /// Final evaluation sample size N''.
    pub final_size: usize,
    pub rng_seed: u64,
}

impl Default for SaaParams {
    fn default() -> Self {
        SaaParams {
            batch_size: 50,
            batch_count: 20,
            select_size: 2000,
            final_size: 10_000,
            rng_seed: 0,
        }
    }
}

impl SaaParams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    /// A cheaper profile for search loops where the estimator is called per
    /// candidate solution.
    pub fn reduced() -> Self {
        SaaParams {
            batch_size: 30,
            batch_count: 10,
            select_size: 500,
            final_size: 2000,
            rng_seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.batch_size < 1 {
            return Err(ImpdError::InvalidArgument("batch size must be >= 1".into()));
        }
        if self.batch_count < 2 {
            return Err(ImpdError::InvalidArgument(
                "batch count must be >= 2 for the variance estimate".into(),
            ));
        }
        if self.select_size < 1 || self.final_size < 2 {
            return Err(ImpdError::InvalidArgument(
                "screening and final sample sizes must be positive (final >= 2)".into(),
            ));
        }
        Ok(())
    }
}

/// Output of the three-stage estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct SaaReport {
    pub best_response: DeactivationSet,
    /// Mean of the batch optima (statistical lower bound).
    pub lower_bound: f64,
    /// Final-sample value of the chosen response (upper bound); this is the
    /// leader-side objective value.
    pub upper_bound: f64,
    pub per_batch_values: Vec<f64>,
    pub gap: f64,
    /// Variance contribution of the final-sample estimate.
    pub var_upper: f64,
    /// Variance contribution of the batch-mean estimate.
    pub var_lower: f64,
    pub gap_variance: f64,
    /// 95% CI bounds on the gap, as a percentage of the upper bound.
    /// NaN when the upper bound is zero (interval undefined).
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub dof: f64,
    pub wall_time: Duration,
}

impl SaaReport {
    pub fn gap_percent(&self) -> f64 {
        if self.upper_bound == 0.0 {
            f64::NAN
        } else {
            100.0 * self.gap / self.upper_bound
        }
    }
}

/// Exact sampled follower problem: the deactivation set minimizing the mean
/// influenced count over `sample`, and that minimum.
///
/// Spread is antitone in the deactivation set, so only budget-maximal
/// subsets need to be searched. Ties go to the lexicographically smallest
/// member list.
pub fn solve_allp_exact(
    inst: &ImpdInstance,
    x: &SeedSet,
    sample: &ThresholdSample,
) -> Result<(DeactivationSet, f64)> {
    if x.len() > EXACT_ORACLE_MAX_SEED {
        return Err(ImpdError::Guard(format!(
            "seed set of size {} is too large for the exact follower oracle (max {EXACT_ORACLE_MAX_SEED})",
            x.len()
        )));
    }
    let mut best: Option<(DeactivationSet, f64)> = None;
    crate::subsets::for_each_maximal_subset(
        x.members(),
        &inst.deactivation_costs,
        inst.follower_budget,
        &mut |members| {
            let y = DeactivationSet::new(members.to_vec());
            let z = spread(&inst.graph, x, &y, sample)?;
            if best.as_ref().map_or(true, |(_, zb)| z < *zb) {
                best = Some((y, z));
            }
            Ok(())
        },
    )?;
    Ok(best.expect("at least the empty deactivation set is feasible"))
}

/// Eq.-style gap variance terms from retained internals: the final-sample
/// counts and the per-batch optima.
pub fn gap_variance(
    final_counts: &[usize],
    final_mean: f64,
    per_batch_values: &[f64],
) -> Result<(f64, f64)> {
    let n2 = final_counts.len();
    let m = per_batch_values.len();
    if n2 < 2 || m < 2 {
        return Err(ImpdError::InvalidArgument(
            "gap variance needs at least 2 final realizations and 2 batches".into(),
        ));
    }
    let v_upper = final_counts
        .iter()
        .map(|&g| (final_mean - g as f64).powi(2))
        .sum::<f64>()
        / (n2 as f64 * (n2 as f64 - 1.0));
    let batch_mean = per_batch_values.iter().sum::<f64>() / m as f64;
    let v_lower = per_batch_values
        .iter()
        .map(|&z| (z - batch_mean).powi(2))
        .sum::<f64>()
        / (m as f64 * (m as f64 - 1.0));
    Ok((v_upper, v_lower))
}

/// Two-sided Student-t quantile at confidence `1 - alpha` with (possibly
/// fractional) degrees of freedom.
fn t_quantile(alpha: f64, dof: f64) -> f64 {
    if !dof.is_finite() || dof > 1e12 {
        let normal = Normal::new(0.0, 1.0).unwrap();
        return normal.inverse_cdf(1.0 - alpha / 2.0);
    }
    let t = StudentsT::new(0.0, 1.0, dof).expect("valid dof");
    t.inverse_cdf(1.0 - alpha / 2.0)
}

/// Welch-Satterthwaite degrees of freedom for the two variance terms.
pub fn welch_dof(v_upper: f64, v_lower: f64, final_size: usize, batch_count: usize) -> f64 {
    let denom = v_upper.powi(2) / (final_size as f64 - 1.0)
        + v_lower.powi(2) / (batch_count as f64 - 1.0);
    if denom == 0.0 {
        f64::INFINITY
    } else {
        (v_upper + v_lower).powi(2) / denom
    }
}

/// CI on the gap as a percentage of the upper bound: `(lo, hi, dof)`.
pub fn confidence_interval(
    gap: f64,
    v_upper: f64,
    v_lower: f64,
    final_size: usize,
    batch_count: usize,
    upper_bound: f64,
    alpha: f64,
) -> Result<(f64, f64, f64)> {
    if v_upper < 0.0 || v_lower < 0.0 {
        return Err(ImpdError::InvalidArgument("variances must be >= 0".into()));
    }
    if upper_bound == 0.0 {
        return Err(ImpdError::InvalidArgument(
            "confidence interval undefined for zero upper bound".into(),
        ));
    }
    let dof = welch_dof(v_upper, v_lower, final_size, batch_count);
    let total = v_upper + v_lower;
    if total == 0.0 {
        let g = 100.0 * gap / upper_bound;
        return Ok((g, g, dof));
    }
    let half = t_quantile(alpha, dof) * total.sqrt();
    Ok((
        100.0 * (gap - half) / upper_bound,
        100.0 * (gap + half) / upper_bound,
        dof,
    ))
}

/// Three-stage estimator with the default Latin Hypercube thresholds.
pub fn saa_evaluate(inst: &ImpdInstance, x: &SeedSet, params: &SaaParams) -> Result<SaaReport> {
    saa_evaluate_with(inst, x, params, &LhsSampler)
}

/// Three-stage estimator with an explicit threshold generator.
///
/// RNG sub-streams are derived from `params.rng_seed` per batch and per
/// stage, so identical params give a bit-identical report (modulo wall time).
pub fn saa_evaluate_with(
    inst: &ImpdInstance,
    x: &SeedSet,
    params: &SaaParams,
    sampler: &dyn ThresholdSampler,
) -> Result<SaaReport> {
    params.validate()?;
    let start = Instant::now();
    let n = inst.node_count();

    if x.is_empty() {
        return Ok(SaaReport {
            best_response: DeactivationSet::empty(),
            lower_bound: 0.0,
            upper_bound: 0.0,
            per_batch_values: vec![0.0; params.batch_count],
            gap: 0.0,
            var_upper: 0.0,
            var_lower: 0.0,
            gap_variance: 0.0,
            ci_lo: f64::NAN,
            ci_hi: f64::NAN,
            dof: f64::NAN,
            wall_time: start.elapsed(),
        });
    }

    // Stage 1: batch optima and candidate responses.
    let mut responses = Vec::with_capacity(params.batch_count);
    let mut per_batch_values = Vec::with_capacity(params.batch_count);
    for m in 0..params.batch_count {
        let mut rng = substream(params.rng_seed, "saa-batch", m as u64);
        let sample = sampler.sample(n, params.batch_size, &mut rng);
        let (y, z) = solve_allp_exact(inst, x, &sample)?;
        responses.push(y);
        per_batch_values.push(z);
    }
    let lower_bound = per_batch_values.iter().sum::<f64>() / params.batch_count as f64;

    // Stage 2: screen responses on a fresh sample; ties to the smallest batch.
    let mut rng = substream(params.rng_seed, "saa-select", 0);
    let select_sample = sampler.sample(n, params.select_size, &mut rng);
    let mut best_idx = 0usize;
    let mut best_val = f64::INFINITY;
    for (m, y) in responses.iter().enumerate() {
        let v = spread(&inst.graph, x, y, &select_sample)?;
        if v < best_val {
            best_val = v;
            best_idx = m;
        }
    }
    let best_response = responses.swap_remove(best_idx);

    // Stage 3: final evaluation and gap statistics.
    let mut rng = substream(params.rng_seed, "saa-final", 0);
    let final_sample = sampler.sample(n, params.final_size, &mut rng);
    let final_counts = spread_counts(&inst.graph, x, &best_response, &final_sample)?;
    let upper_bound =
        final_counts.iter().sum::<usize>() as f64 / final_counts.len() as f64;
    let gap = upper_bound - lower_bound;
    let (var_upper, var_lower) = gap_variance(&final_counts, upper_bound, &per_batch_values)?;
    let (ci_lo, ci_hi, dof) = if upper_bound == 0.0 {
        (f64::NAN, f64::NAN, f64::NAN)
    } else {
        confidence_interval(
            gap,
            var_upper,
            var_lower,
            params.final_size,
            params.batch_count,
            upper_bound,
            0.05,
        )?
    };

    Ok(SaaReport {
        best_response,
        lower_bound,
        upper_bound,
        per_batch_values,
        gap,
        var_upper,
        var_lower,
        gap_variance: var_upper + var_lower,
        ci_lo,
        ci_hi,
        dof,
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{FixedSampler, NodeSet};
    use crate::graph::generate_watts_strogatz;
    use crate::instance::{demo, CostMode, ImpdInstance};
    use crate::rng::substream;
    use rand::seq::SliceRandom;
    use rand::Rng;

    fn six_node() -> ImpdInstance {
        demo::six_node_instance()
    }

    #[test]
    fn worked_example_oracle_values() {
        let inst = six_node();
        let sample = ThresholdSample::constant(&demo::six_node_thresholds(), 1);
        let (y, z) = solve_allp_exact(&inst, &NodeSet::new(vec![0, 3]), &sample).unwrap();
        assert_eq!(y.members(), &[0]);
        assert_eq!(z, 1.0);

        let (y, z) = solve_allp_exact(&inst, &NodeSet::new(vec![1, 2]), &sample).unwrap();
        assert_eq!(y.members(), &[1]);
        assert_eq!(z, 2.0);
    }

    #[test]
    fn zero_budget_keeps_everything_active() {
        let mut inst = six_node();
        inst.follower_budget = 0.0;
        let sample = ThresholdSample::constant(&demo::six_node_thresholds(), 1);
        let x = NodeSet::new(vec![0, 3]);
        let (y, z) = solve_allp_exact(&inst, &x, &sample).unwrap();
        assert!(y.is_empty());
        assert_eq!(z, 6.0);
    }

    #[test]
    fn oracle_guard() {
        let mut rng = substream(1, "guard", 0);
        let g = generate_watts_strogatz(40, 4, 0.1, &mut rng).unwrap();
        let inst =
            ImpdInstance::new(g, vec![1.0; 40], vec![1.0; 40], 40.0, 1.0, CostMode::Cardinality)
                .unwrap();
        let x = NodeSet::new((0..31).collect());
        let sample = ThresholdSample::constant(&vec![0.5; 40], 1);
        assert!(matches!(
            solve_allp_exact(&inst, &x, &sample),
            Err(ImpdError::Guard(_))
        ));
    }

    /// Full 2^|x| brute force over feasible deactivation subsets.
    fn brute_force_follower(
        inst: &ImpdInstance,
        x: &NodeSet,
        sample: &ThresholdSample,
    ) -> (NodeSet, f64) {
        let members = x.members();
        let k = members.len();
        let mut best: Option<(NodeSet, f64)> = None;
        for mask in 0..(1u32 << k) {
            let y: Vec<u32> = (0..k)
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| members[i])
                .collect();
            let y = NodeSet::new(y);
            if inst.deactivation_cost(&y) > inst.follower_budget {
                continue;
            }
            let z = spread(&inst.graph, x, &y, sample).unwrap();
            if best.as_ref().map_or(true, |(_, zb)| z < *zb) {
                best = Some((y, z));
            }
        }
        best.unwrap()
    }

    #[test]
    fn oracle_matches_brute_force_and_is_maximal() {
        for trial in 0..200u64 {
            let mut rng = substream(trial, "oracle-bf", 0);
            let n = 14 + (trial % 6) as usize;
            let g = generate_watts_strogatz(n, 4, 0.3, &mut rng).unwrap();
            let cost_based = trial % 2 == 1;
            let (e, mode) = if cost_based {
                let costs: Vec<f64> = (0..n)
                    .map(|_| *[10.0, 15.0, 20.0].choose(&mut rng).unwrap())
                    .collect();
                (costs, CostMode::CostBased)
            } else {
                (vec![1.0; n], CostMode::Cardinality)
            };
            let c = if cost_based { e.clone() } else { vec![1.0; n] };
            let inst = ImpdInstance::new(
                g,
                c,
                e,
                1e9,
                if cost_based { 25.0 } else { 2.0 },
                mode,
            )
            .unwrap();
            let k = 1 + (rng.gen::<usize>() % 8);
            let mut ids: Vec<u32> = (0..n as u32).collect();
            ids.shuffle(&mut rng);
            let x = NodeSet::new(ids[..k].to_vec());
            let sample = crate::diffusion::sample_thresholds_lhs(n, 20, &mut rng);

            let (y, z) = solve_allp_exact(&inst, &x, &sample).unwrap();
            let (_, z_bf) = brute_force_follower(&inst, &x, &sample);
            assert!(
                (z - z_bf).abs() < 1e-12,
                "trial {trial}: oracle {z} vs brute force {z_bf}"
            );
            // Budget-maximality of the returned set.
            let slack = inst.follower_budget - inst.deactivation_cost(&y);
            for i in x.iter() {
                if !y.contains(i) {
                    assert!(
                        inst.deactivation_costs[i as usize] > slack,
                        "trial {trial}: node {i} still fits the follower budget"
                    );
                }
            }
        }
    }

    #[test]
    fn degenerate_sampler_gives_zero_gap_and_variance() {
        let inst = six_node();
        let sampler = FixedSampler(demo::six_node_thresholds());
        let params = SaaParams {
            batch_size: 4,
            batch_count: 3,
            select_size: 8,
            final_size: 16,
            rng_seed: 11,
        };
        let report =
            saa_evaluate_with(&inst, &NodeSet::new(vec![0, 3]), &params, &sampler).unwrap();
        assert_eq!(report.lower_bound, 1.0);
        assert_eq!(report.upper_bound, 1.0);
        assert_eq!(report.gap, 0.0);
        assert_eq!(report.gap_variance, 0.0);
        assert_eq!(report.ci_lo, 0.0);
        assert_eq!(report.ci_hi, 0.0);
    }

    #[test]
    fn empty_seed_report_is_zero() {
        let inst = six_node();
        let report = saa_evaluate(&inst, &NodeSet::empty(), &SaaParams::default()).unwrap();
        assert_eq!(report.lower_bound, 0.0);
        assert_eq!(report.upper_bound, 0.0);
        assert!(report.ci_lo.is_nan());
    }

    #[test]
    fn variance_hand_example() {
        // Two batches {4, 6} with identical final counts: the batch term is
        // (1/(2*1)) * ((4-5)^2 + (6-5)^2) = 1.0 and the final term is 0.
        let counts = vec![5usize; 10];
        let (v_upper, v_lower) = gap_variance(&counts, 5.0, &[4.0, 6.0]).unwrap();
        assert_eq!(v_upper, 0.0);
        assert_eq!(v_lower, 1.0);
        assert!(gap_variance(&counts, 5.0, &[4.0]).is_err());
        assert!(gap_variance(&[5], 5.0, &[4.0, 6.0]).is_err());
    }

    #[test]
    fn variance_matches_textbook_recomputation() {
        let mut rng = substream(77, "var", 0);
        let counts: Vec<usize> = (0..50).map(|_| rng.gen::<usize>() % 12).collect();
        let mean = counts.iter().sum::<usize>() as f64 / 50.0;
        let batches: Vec<f64> = (0..6).map(|_| rng.gen::<f64>() * 10.0).collect();
        let (v_upper, v_lower) = gap_variance(&counts, mean, &batches).unwrap();

        let sample_var = |xs: &[f64]| {
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
        };
        let counts_f: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        assert!((v_upper - sample_var(&counts_f) / 50.0).abs() < 1e-12);
        assert!((v_lower - sample_var(&batches) / 6.0).abs() < 1e-12);
    }

    #[test]
    fn ci_degenerate_and_symmetric_dof() {
        let (lo, hi, _) = confidence_interval(2.0, 0.0, 0.0, 100, 10, 8.0, 0.05).unwrap();
        assert_eq!(lo, 100.0 * 2.0 / 8.0);
        assert_eq!(lo, hi);

        // Equal variances and equal sizes collapse Welch to 2(M-1).
        let dof = welch_dof(0.3, 0.3, 10, 10);
        assert!((dof - 18.0).abs() < 1e-9);
    }

    #[test]
    fn ci_brackets_gap_with_positive_width() {
        let inst = table_shape_instance(40, 0.0513, 123);
        let x = NodeSet::new(vec![1, 5, 9, 14, 22, 31]);
        let params = SaaParams {
            batch_size: 50,
            batch_count: 20,
            select_size: 2000,
            final_size: 10_000,
            rng_seed: 5,
        };
        let report = saa_evaluate(&inst, &x, &params).unwrap();
        let gap_pct = report.gap_percent();
        assert!(report.ci_lo <= gap_pct + 1e-9 && gap_pct <= report.ci_hi + 1e-9);
        assert!(report.ci_hi > report.ci_lo);
        // Recompute the interval from the stored per-sample values.
        let (lo, hi, _) = confidence_interval(
            report.gap,
            report.var_upper,
            report.var_lower,
            params.final_size,
            params.batch_count,
            report.upper_bound,
            0.05,
        )
        .unwrap();
        assert!((lo - report.ci_lo).abs() < 1e-9);
        assert!((hi - report.ci_hi).abs() < 1e-9);
    }

    fn table_shape_instance(n: usize, density: f64, seed: u64) -> ImpdInstance {
        let mut rng = substream(seed, "saa-inst", 0);
        let g = crate::graph::watts_strogatz_at_density(n, density, 0.1, &mut rng).unwrap();
        ImpdInstance::new(
            g,
            vec![1.0; n],
            vec![1.0; n],
            n as f64,
            2.0,
            CostMode::Cardinality,
        )
        .unwrap()
    }

    #[test]
    fn identical_params_give_identical_reports() {
        let inst = table_shape_instance(20, 0.105, 9);
        let x = NodeSet::new(vec![0, 4, 11]);
        let params = SaaParams::reduced().with_seed(31);
        let a = saa_evaluate(&inst, &x, &params).unwrap();
        let b = saa_evaluate(&inst, &x, &params).unwrap();
        assert_eq!(a.best_response, b.best_response);
        assert_eq!(a.lower_bound, b.lower_bound);
        assert_eq!(a.upper_bound, b.upper_bound);
        assert_eq!(a.per_batch_values, b.per_batch_values);
        assert_eq!(a.ci_lo, b.ci_lo);
        assert_eq!(a.ci_hi, b.ci_hi);
    }

    #[test]
    fn lower_bound_below_upper_bound_in_expectation() {
        let inst = table_shape_instance(20, 0.105, 17);
        let x = NodeSet::new(vec![2, 7, 13]);
        let mut lbs = Vec::new();
        let mut ubs = Vec::new();
        for run in 0..30u64 {
            let params = SaaParams {
                batch_size: 20,
                batch_count: 5,
                select_size: 200,
                final_size: 500,
                rng_seed: 900 + run,
            };
            let r = saa_evaluate(&inst, &x, &params).unwrap();
            lbs.push(r.lower_bound);
            ubs.push(r.upper_bound);
        }
        let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
        let se = |xs: &[f64]| {
            let m = mean(xs);
            (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>()
                / (xs.len() as f64 - 1.0)
                / xs.len() as f64)
                .sqrt()
        };
        let slack = 2.0 * (se(&lbs) + se(&ubs));
        assert!(
            mean(&lbs) <= mean(&ubs) + slack,
            "mean LB {} vs mean UB {} (slack {slack})",
            mean(&lbs),
            mean(&ubs)
        );
    }

    #[test]
    fn estimator_monotone_under_seed_growth() {
        let inst = table_shape_instance(20, 0.105, 23);
        let params = SaaParams::reduced().with_seed(55);
        let x = NodeSet::new(vec![3, 8]);
        let x_big = NodeSet::new(vec![3, 8, 15]);
        let a = saa_evaluate(&inst, &x, &params).unwrap();
        let b = saa_evaluate(&inst, &x_big, &params).unwrap();
        // Same rng_seed means shared threshold streams; allow CI slack.
        let slack = (a.gap_variance + b.gap_variance).sqrt() * 2.0 + 1e-9;
        assert!(
            a.upper_bound <= b.upper_bound + slack,
            "{} vs {}",
            a.upper_bound,
            b.upper_bound
        );
    }
}
