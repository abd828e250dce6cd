//! Experiment drivers: local-global scans, equidistribution sweeps and
//! genus comparisons over ranges of n, with deterministic JSON reports.

use std::time::{Duration, Instant};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, GaussMatrix};
use crate::enumerate::{count_solutions, solve_scaled_isometry, EnumerateOptions};
use crate::equidist::{
    cap_discrepancy, embed_rotations, embed_solutions, haar_sample, weyl_discrepancy, DiscrepancyReport,
    EmpiricalSample, GroupKind, Reference,
};
use crate::error::{Error, Result};
use crate::forms::{genus_equivalent, Form, FormKind, GenusOptions, GenusVerdict};
use crate::locals::{local_profile, LocalOptions};
use crate::so3::rotation_numerators;

/// Slack allowed when checking that a sequence of gaps does not increase.
pub const TREND_SLACK: f64 = 1e-12;

/// Which n in the range to keep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NFilter {
    #[default]
    All,
    Odd,
    Prime,
    CoprimeTo(u64),
}

impl NFilter {
    pub fn keeps(self, n: u64) -> bool {
        match self {
            NFilter::All => true,
            NFilter::Odd => n.is_odd(),
            NFilter::Prime => is_prime(n),
            NFilter::CoprimeTo(m) => n.gcd(&m) == 1,
        }
    }
}

/// Everything an experiment run needs besides the forms themselves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Path of the form's JSON file.
    pub form: Option<String>,
    /// Second form for genus comparisons.
    pub second_form: Option<String>,
    pub n_min: u64,
    pub n_max: u64,
    /// Explicit levels; overrides the range when present.
    pub n_list: Option<Vec<u64>>,
    pub filter: NFilter,
    /// Node budget of each local search.
    pub local_budget: u64,
    /// Precision cap of each local search.
    pub max_precision: Option<u32>,
    /// Node budget of each genus witness search.
    pub genus_budget: u64,
    /// Stop counting global solutions beyond this many.
    pub count_cap: Option<usize>,
    /// Wall-clock budget for a whole run; levels not reached are reported
    /// as unknown.
    pub time_budget_secs: Option<u64>,
    pub degree: u32,
    pub haar_samples: usize,
    pub seed: u64,
    pub cap_angles: Vec<f64>,
    pub workers: Option<usize>,
    pub out: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            form: None,
            second_form: None,
            n_min: 1,
            n_max: 10,
            n_list: None,
            filter: NFilter::All,
            local_budget: 200_000,
            max_precision: None,
            genus_budget: 200_000,
            count_cap: Some(10_000),
            time_budget_secs: None,
            degree: 2,
            haar_samples: 100_000,
            seed: 0,
            cap_angles: vec![std::f64::consts::FRAC_PI_3, std::f64::consts::FRAC_PI_2],
            workers: None,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Levels to run, after the filter, in increasing order.
    pub fn levels(&self) -> Vec<u64> {
        let mut ns: Vec<u64> = match &self.n_list {
            Some(list) => list.clone(),
            None => (self.n_min.max(1)..=self.n_max).collect(),
        };
        ns.retain(|&n| n >= 1 && self.filter.keeps(n));
        ns.sort_unstable();
        ns.dedup();
        ns
    }

    fn local_options(&self) -> LocalOptions {
        LocalOptions { budget: self.local_budget, max_e: self.max_precision, ..LocalOptions::default() }
    }

    fn enumerate_options(&self) -> EnumerateOptions {
        EnumerateOptions { limit: self.count_cap, workers: self.workers, ..Default::default() }
    }

    fn deadline(&self) -> Option<Instant> {
        self.time_budget_secs.map(|s| Instant::now() + Duration::from_secs(s))
    }
}

fn expired(deadline: Option<Instant>) -> bool {
    deadline.is_some_and(|d| Instant::now() >= d)
}

/// How local and global answers relate at one level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    Agree,
    /// Locally solvable everywhere but no global solution.
    SmallNException,
    /// A global solution exists yet some prime says no. Never expected:
    /// it would mean a bug.
    Contradiction,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: u64,
    /// `None` when some local search ran out of budget.
    pub local_member: Option<bool>,
    /// Primes with a certified no.
    pub failing_primes: Vec<u64>,
    pub global_count: u64,
    /// True when the count stopped at the cap.
    pub count_capped: bool,
    pub agreement: Agreement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub form: String,
    pub rows: Vec<ScanRow>,
    pub exceptions: Vec<u64>,
    pub contradictions: Vec<u64>,
    /// Some row is unknown because a budget ran out.
    pub partial: bool,
}

/// For each level: the local profile, a (capped) global count, and how the
/// two compare.
pub fn run_local_global_scan(form: &Form, cfg: &ExperimentConfig) -> Result<ScanReport> {
    let deadline = cfg.deadline();
    let mut rows = Vec::new();
    for n in cfg.levels() {
        if expired(deadline) {
            rows.push(ScanRow {
                n,
                local_member: None,
                failing_primes: Vec::new(),
                global_count: 0,
                count_capped: false,
                agreement: Agreement::Unknown,
            });
            continue;
        }
        let profile = local_profile(form, n, cfg.local_options())?;
        let member = profile.member();
        let failing_primes = profile.verdicts.iter().filter(|v| v.is_no()).map(|v| v.p).collect();
        let opts = cfg.enumerate_options();
        let count = count_solutions(form, n, opts)?;
        let count_capped = opts.limit.is_some_and(|l| count >= l as u64);
        let agreement = match (member, count > 0) {
            (Some(true), true) | (Some(false), false) => Agreement::Agree,
            (Some(true), false) => Agreement::SmallNException,
            (Some(false), true) => Agreement::Contradiction,
            (None, _) => Agreement::Unknown,
        };
        rows.push(ScanRow { n, local_member: member, failing_primes, global_count: count, count_capped, agreement });
    }
    let pick = |a: Agreement| rows.iter().filter(|r| r.agreement == a).map(|r| r.n).collect::<Vec<_>>();
    Ok(ScanReport {
        form: form.label(),
        exceptions: pick(Agreement::SmallNException),
        contradictions: pick(Agreement::Contradiction),
        partial: rows.iter().any(|r| r.agreement == Agreement::Unknown),
        rows,
    })
}

/// One level of an equidistribution sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n: u64,
    pub nonempty: bool,
    pub size: usize,
    /// "quaternion" or "enumeration".
    pub method: String,
    pub orthogonality_residual: Option<f64>,
    /// sup of the monomial gaps up to the configured degree.
    pub sup_gap: Option<f64>,
    pub weyl: Option<DiscrepancyReport>,
    pub caps: Option<DiscrepancyReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub form: String,
    pub degree: u32,
    pub haar_samples: usize,
    pub seed: u64,
    /// Largest Monte Carlo standard error among the references.
    pub reference_std_error: f64,
    pub records: Vec<SweepRecord>,
    /// sup gaps over the nonempty levels do not increase (up to
    /// [`TREND_SLACK`]).
    pub non_increasing: bool,
    pub partial: bool,
}

fn is_sum_of_three_squares(form: &Form) -> bool {
    form.kind() == FormKind::Quadratic && form.rank() == 3 && *form.gram() == GaussMatrix::identity(3)
}

/// Γ_n embedded in the real group, or `None` when empty.
pub fn level_sample(form: &Form, n: u64, workers: Option<usize>) -> Result<(Option<EmpiricalSample>, &'static str)> {
    if is_sum_of_three_squares(form) && n.is_odd() {
        let rots = rotation_numerators(n)?;
        return Ok((Some(embed_rotations(n, &rots)?), "quaternion"));
    }
    let set = solve_scaled_isometry(form, n, EnumerateOptions { workers, ..Default::default() })?;
    if set.is_empty() {
        return Ok((None, "enumeration"));
    }
    Ok((Some(embed_solutions(form, &set)?), "enumeration"))
}

/// Weyl and cap discrepancies of Γ_n against one Haar reference per run.
pub fn run_equidist_sweep(form: &Form, cfg: &ExperimentConfig) -> Result<SweepReport> {
    let kind = GroupKind::from(form.kind());
    let reference = haar_sample(form.rank(), cfg.haar_samples, cfg.seed, kind)?;
    let deadline = cfg.deadline();
    let mut records = Vec::new();
    let mut std_error: f64 = 0.0;
    let mut partial = false;
    for n in cfg.levels() {
        if expired(deadline) {
            partial = true;
            break;
        }
        let (sample, method) = level_sample(form, n, cfg.workers)?;
        let Some(sample) = sample else {
            records.push(SweepRecord {
                n,
                nonempty: false,
                size: 0,
                method: method.into(),
                orthogonality_residual: None,
                sup_gap: None,
                weyl: None,
                caps: None,
            });
            continue;
        };
        let weyl = weyl_discrepancy(&sample, Reference::Sample(&reference), cfg.degree)?;
        std_error = std_error.max(weyl.max_std_error());
        let caps = if form.rank() == 3 && kind == GroupKind::Orthogonal && !cfg.cap_angles.is_empty() {
            Some(cap_discrepancy(&sample, &[0.0, 0.0, 1.0], &cfg.cap_angles)?)
        } else {
            None
        };
        records.push(SweepRecord {
            n,
            nonempty: true,
            size: sample.len(),
            method: method.into(),
            orthogonality_residual: Some(sample.orthogonality_residual),
            sup_gap: Some(weyl.sup_gap()),
            weyl: Some(weyl),
            caps,
        });
    }
    let gaps: Vec<f64> = records.iter().filter_map(|r| r.sup_gap).collect();
    Ok(SweepReport {
        form: form.label(),
        degree: cfg.degree,
        haar_samples: cfg.haar_samples,
        seed: cfg.seed,
        reference_std_error: std_error,
        non_increasing: gaps.windows(2).all(|w| w[1] <= w[0] + TREND_SLACK),
        partial,
        records,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenusRow {
    pub n: u64,
    pub count_first: u64,
    pub count_second: u64,
    pub capped: bool,
    /// Exactly one of the two forms has a solution at this level.
    pub exception: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenusCompareReport {
    pub first: String,
    pub second: String,
    pub verdict: GenusVerdict,
    pub rows: Vec<GenusRow>,
    pub exceptions: Vec<u64>,
    pub partial: bool,
}

/// Genus verdict for two forms, then solution counts side by side.
pub fn run_genus_compare(first: &Form, second: &Form, cfg: &ExperimentConfig) -> Result<GenusCompareReport> {
    let verdict = genus_equivalent(first, second, GenusOptions { budget: cfg.genus_budget, ..Default::default() })?;
    let opts = cfg.enumerate_options();
    let deadline = cfg.deadline();
    let mut rows = Vec::new();
    let mut partial = matches!(verdict, GenusVerdict::Undetermined { .. });
    for n in cfg.levels() {
        if expired(deadline) {
            partial = true;
            break;
        }
        let a = count_solutions(first, n, opts)?;
        let b = count_solutions(second, n, opts)?;
        let capped = opts.limit.is_some_and(|l| a >= l as u64 || b >= l as u64);
        rows.push(GenusRow { n, count_first: a, count_second: b, capped, exception: (a > 0) != (b > 0) });
    }
    Ok(GenusCompareReport {
        first: first.label(),
        second: second.label(),
        verdict,
        exceptions: rows.iter().filter(|r| r.exception).map(|r| r.n).collect(),
        partial,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn id(k: usize) -> Form {
        Form::identity(FormKind::Quadratic, k).unwrap()
    }

    #[test]
    fn levels_and_filters() {
        let cfg = ExperimentConfig { n_min: 1, n_max: 12, filter: NFilter::Odd, ..Default::default() };
        assert_eq!(cfg.levels(), vec![1, 3, 5, 7, 9, 11]);
        let cfg = ExperimentConfig { filter: NFilter::CoprimeTo(6), ..cfg };
        assert_eq!(cfg.levels(), vec![1, 5, 7, 11]);
        let cfg = ExperimentConfig { n_list: Some(vec![13, 4, 4, 2]), filter: NFilter::Prime, ..Default::default() };
        assert_eq!(cfg.levels(), vec![2, 13]);
        let empty = ExperimentConfig { n_min: 5, n_max: 4, ..Default::default() };
        assert!(empty.levels().is_empty());
    }

    #[test]
    fn config_defaults_fill_missing_fields() {
        let cfg = ExperimentConfig::from_json(r#"{"n_max": 20, "filter": {"coprime_to": 10}}"#).unwrap();
        assert_eq!(cfg.n_max, 20);
        assert_eq!(cfg.filter, NFilter::CoprimeTo(10));
        assert_eq!(cfg.haar_samples, 100_000);
        assert!(ExperimentConfig::from_json(r#"{"n_maximum": 3}"#).is_err());
    }

    #[test]
    fn scan_sum_of_three_squares() {
        let cfg = ExperimentConfig { n_min: 1, n_max: 10, ..Default::default() };
        let r = run_local_global_scan(&id(3), &cfg).unwrap();
        assert_eq!(r.rows.len(), 10);
        for row in &r.rows {
            assert_eq!(row.agreement, Agreement::Agree, "n = {}", row.n);
            assert_eq!(row.local_member, Some(row.n % 2 == 1));
            if row.n % 2 == 0 {
                assert_eq!(row.failing_primes, vec![2]);
            }
        }
        assert!(!r.partial && r.exceptions.is_empty());
        let none = run_local_global_scan(&id(3), &ExperimentConfig { n_list: Some(vec![]), ..cfg }).unwrap();
        assert!(none.rows.is_empty());
    }

    #[test]
    fn expired_budget_marks_rows_unknown() {
        let cfg = ExperimentConfig { n_max: 3, time_budget_secs: Some(0), ..Default::default() };
        let r = run_local_global_scan(&id(3), &cfg).unwrap();
        assert!(r.partial);
        assert!(r.rows.iter().all(|row| row.agreement == Agreement::Unknown));
    }

    #[test]
    fn small_sweep() {
        let cfg = ExperimentConfig { n_list: Some(vec![1, 2, 3, 5]), haar_samples: 2000, ..Default::default() };
        let r = run_equidist_sweep(&id(3), &cfg).unwrap();
        assert_eq!(r.records.len(), 4);
        assert!(!r.records[1].nonempty);
        assert_eq!(r.records[0].size, 24);
        assert_eq!(r.records[2].method, "quaternion");
        let again = run_equidist_sweep(&id(3), &cfg).unwrap();
        assert_eq!(serde_json::to_string(&r).unwrap(), serde_json::to_string(&again).unwrap());
    }

    #[test]
    fn genus_compare_cases() {
        let cfg = ExperimentConfig { n_max: 6, ..Default::default() };
        let q = Form::from_rows(&[[2, 1], [1, 3]]).unwrap();
        // gᵗQg for the unimodular g = [[1, 1], [0, 1]]
        let q2 = Form::from_rows(&[[2, 3], [3, 7]]).unwrap();
        let r = run_genus_compare(&q, &q2, &cfg).unwrap();
        assert!(matches!(r.verdict, GenusVerdict::SameGenus { .. }));
        assert!(r.rows.iter().all(|row| row.count_first == row.count_second));
        let r = run_genus_compare(&id(2), &Form::from_rows(&[[1, 0], [0, 2]]).unwrap(), &cfg).unwrap();
        assert!(matches!(r.verdict, GenusVerdict::Distinct { .. }));
        assert_eq!(r.rows.len(), 6);
    }

    fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
        (
            1u64..50,
            0u64..50,
            prop::option::of(prop::collection::vec(1u64..100, 0..5)),
            prop_oneof![Just(NFilter::All), Just(NFilter::Odd), Just(NFilter::Prime), (1u64..30).prop_map(NFilter::CoprimeTo)],
            any::<u64>(),
            prop::option::of(1usize..1000),
            prop::collection::vec(0.0f64..3.2, 0..3),
            prop::option::of("[a-z]{1,8}\\.json"),
        )
            .prop_map(|(lo, span, list, filter, seed, cap, angles, form)| ExperimentConfig {
                n_min: lo,
                n_max: lo + span,
                n_list: list,
                filter,
                seed,
                count_cap: cap,
                cap_angles: angles,
                form,
                ..Default::default()
            })
    }

    proptest! {
        #[test]
        fn config_round_trip(cfg in arb_config()) {
            let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
