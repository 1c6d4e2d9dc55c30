use serde::Serialize;

use super::SuiteKind;
use crate::charfn::BoundReport;
use crate::field::FieldSpec;

/// One verified case inside a suite.
#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub index: usize,
    pub name: String,
    pub params: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_report: Option<BoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub pass: bool,
}

impl CaseReport {
    pub fn new(index: usize, name: impl Into<String>, params: serde_json::Value) -> Self {
        CaseReport {
            index,
            name: name.into(),
            params,
            statistic: None,
            p_value: None,
            threshold: None,
            bound_report: None,
            detail: None,
            pass: false,
        }
    }

    pub fn from_bound_report(index: usize, name: impl Into<String>, rep: BoundReport) -> Self {
        let mut c = CaseReport::new(index, name, rep.params.clone());
        c.pass = rep.pass;
        c.bound_report = Some(rep);
        c
    }
}

/// A full suite run. The wall clock is measured but deliberately kept out
/// of the serialized form so a rerun with the same seed produces
/// byte-identical JSON.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub schema: String,
    pub suite: SuiteKind,
    pub field: FieldSpec,
    pub seed: u64,
    pub environment: String,
    pub cases: Vec<CaseReport>,
    pub pass: bool,
    #[serde(skip)]
    pub wall_clock_ms: u128,
}

impl SuiteReport {
    pub fn assemble(
        suite: SuiteKind,
        field: FieldSpec,
        seed: u64,
        mut cases: Vec<CaseReport>,
        wall_clock_ms: u128,
    ) -> Self {
        cases.sort_by_key(|c| c.index);
        let pass = cases.iter().all(|c| c.pass);
        SuiteReport {
            schema: "1".to_string(),
            suite,
            field,
            seed,
            environment: format!(
                "{} {}",
                env!("CARGO_PKG_NAME"),
                env!("CARGO_PKG_VERSION")
            ),
            cases,
            pass,
            wall_clock_ms,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Flat CSV, one row per case, for external plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "index,name,pass,statistic,p_value,threshold,main_term,estimate_re,estimate_im,std_error,bound,trials\n",
        );
        let fmt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        for c in &self.cases {
            let (main, re, im, se, bound, trials) = match &c.bound_report {
                Some(b) => (
                    Some(b.main_term),
                    Some(b.estimate.value.re),
                    Some(b.estimate.value.im),
                    Some(b.estimate.std_error),
                    Some(b.bound),
                    Some(b.estimate.trials),
                ),
                None => (None, None, None, None, None, None),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                c.index,
                c.name.replace(',', ";"),
                c.pass,
                fmt(c.statistic),
                fmt(c.p_value),
                fmt(c.threshold),
                fmt(main),
                fmt(re),
                fmt(im),
                fmt(se),
                fmt(bound),
                trials.map(|t| t.to_string()).unwrap_or_default(),
            ));
        }
        out
    }
}
