use num_complex::Complex64;
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

/// A Monte Carlo average of unit-modulus phases with its sampling error.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: Complex64,
    /// Sample standard deviation divided by the square root of the trial
    /// count.
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

impl Estimate {
    /// Combined standard error of the difference of two independent
    /// estimates.
    pub fn combined_std_error(&self, other: &Estimate) -> f64 {
        (self.std_error * self.std_error + other.std_error * other.std_error).sqrt()
    }

    /// Whether the two estimates agree within `k` combined standard errors
    /// (plus a little float slack for exact cases).
    pub fn agrees_with(&self, other: &Estimate, k: f64) -> bool {
        (self.value - other.value).norm() <= k * self.combined_std_error(other) + 1e-12
    }

    /// Distance to a real target in units of this estimate's own error.
    pub fn within_of(&self, target: f64, k: f64) -> bool {
        (self.value - Complex64::new(target, 0.0)).norm() <= k * self.std_error + 1e-12
    }
}

impl Serialize for Estimate {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Estimate", 5)?;
        st.serialize_field("re", &self.value.re)?;
        st.serialize_field("im", &self.value.im)?;
        st.serialize_field("std_error", &self.std_error)?;
        st.serialize_field("trials", &self.trials)?;
        st.serialize_field("seed", &self.seed)?;
        st.end()
    }
}

/// A bound-style verification record: a main term, a deterministic bound,
/// and the Monte Carlo estimate to compare, with the pass flag
/// `|estimate - main_term| <= bound + 3 std_error`.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub experiment: String,
    pub params: serde_json::Value,
    pub main_term: f64,
    pub bound: f64,
    pub estimate: Estimate,
    pub pass: bool,
}

impl BoundReport {
    pub fn evaluate(
        experiment: impl Into<String>,
        params: serde_json::Value,
        main_term: f64,
        bound: f64,
        estimate: Estimate,
    ) -> Self {
        let dev = (estimate.value - Complex64::new(main_term, 0.0)).norm();
        // The deterministic bound and the sampling noise are kept separate;
        // the tiny additive slack absorbs float reduction order.
        let pass = dev <= bound + 3.0 * estimate.std_error + 1e-12;
        BoundReport {
            experiment: experiment.into(),
            params,
            main_term,
            bound,
            estimate,
            pass,
        }
    }

    pub fn deviation(&self) -> f64 {
        (self.estimate.value - Complex64::new(self.main_term, 0.0)).norm()
    }
}

impl Serialize for BoundReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct EstimateValue {
            re: f64,
            im: f64,
        }
        let mut st = serializer.serialize_struct("BoundReport", 9)?;
        st.serialize_field("experiment", &self.experiment)?;
        st.serialize_field("params", &self.params)?;
        st.serialize_field("main_term", &self.main_term)?;
        st.serialize_field("bound", &self.bound)?;
        st.serialize_field(
            "estimate",
            &EstimateValue {
                re: self.estimate.value.re,
                im: self.estimate.value.im,
            },
        )?;
        st.serialize_field("std_error", &self.estimate.std_error)?;
        st.serialize_field("trials", &self.estimate.trials)?;
        st.serialize_field("seed", &self.estimate.seed)?;
        st.serialize_field("pass", &self.pass)?;
        st.end()
    }
}
