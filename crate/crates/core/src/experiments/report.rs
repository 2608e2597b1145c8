use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: &str, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.to_string(), points }
    }

    /// `y` values at `x = 0, 1, 2, ...`.
    pub fn indexed(label: &str, ys: impl IntoIterator<Item = f64>) -> Self {
        Series::new(label, ys.into_iter().enumerate().map(|(i, y)| (i as f64, y)).collect())
    }
}

/// Output of one demo run. Maps are ordered so serialization is stable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DemoReport {
    pub demo: String,
    pub parameters: BTreeMap<String, Value>,
    pub series: Vec<Series>,
    pub verdict: BTreeMap<String, Value>,
}

impl DemoReport {
    pub fn new(demo: &str) -> Self {
        DemoReport { demo: demo.to_string(), parameters: BTreeMap::new(), series: Vec::new(), verdict: BTreeMap::new() }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn verdict(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.verdict.insert(key.to_string(), value.into());
        self
    }

    pub fn series(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    pub fn to_json_value(&self) -> Value {
        serde_json::to_value(self).expect("report is always serializable")
    }

    /// Flattened `(series label, x, y)` rows in series order.
    pub fn rows(&self) -> Vec<(String, f64, f64)> {
        self.series
            .iter()
            .flat_map(|s| s.points.iter().map(move |&(x, y)| (s.label.clone(), x, y)))
            .collect()
    }
}
