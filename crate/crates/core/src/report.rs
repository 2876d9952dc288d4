//! Small shared report types serialized by the CLI.

use serde::{Deserialize, Serialize};

/// Summary statistics of a scalar diagnostic over a grid.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BandSummary {
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl BandSummary {
    pub fn from_values(values: &[f64]) -> BandSummary {
        assert!(!values.is_empty(), "band over an empty grid");
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for &v in values {
            min = min.min(v);
            max = max.max(v);
            sum += v;
        }
        BandSummary { count: values.len(), min, max, mean: sum / values.len() as f64 }
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

/// Declarative plot description emitted next to CSV data files.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<PlotSeries>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlotSeries {
    pub name: String,
    pub csv: String,
    pub x_col: String,
    pub y_col: String,
}
