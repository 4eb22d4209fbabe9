use std::fmt;

use crate::nulldist::{NullTable, TableKey};
use crate::numerics::chi2_sf;

#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    ChiSquared { df: usize },
    NoncentralChiSquared { df: usize, lambda: f64 },
    Simulated(TableKey),
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reference::ChiSquared { df } => write!(f, "chi2 df={df}"),
            Reference::NoncentralChiSquared { df, lambda } => {
                write!(f, "noncentral-chi2 df={df} lambda={lambda}")
            }
            Reference::Simulated(key) => write!(f, "simulated {key}"),
        }
    }
}

/// Per-component detail of a report.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentRow {
    /// 1-based component index.
    pub component: usize,
    pub value: f64,
    pub df: Option<usize>,
    pub p_value: Option<f64>,
    /// Fixed benchmark the value is compared with.
    pub critical: Option<f64>,
}

impl ComponentRow {
    pub fn chi2(component: usize, value: f64, df: usize) -> Self {
        ComponentRow {
            component,
            value,
            df: Some(df),
            p_value: Some(chi2_sf(value, df as f64)),
            critical: None,
        }
    }

    pub fn benchmark(component: usize, value: f64, critical: f64) -> Self {
        ComponentRow {
            component,
            value,
            df: None,
            p_value: None,
            critical: Some(critical),
        }
    }

    pub fn exceeds(&self) -> Option<bool> {
        self.critical.map(|c| self.value > c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub name: String,
    pub value: f64,
    pub reference: Reference,
    pub p_value: f64,
    pub components: Vec<ComponentRow>,
}

impl TestReport {
    pub fn simulated(
        name: &str,
        value: f64,
        table: &NullTable,
        components: Vec<ComponentRow>,
    ) -> Self {
        TestReport {
            name: name.to_string(),
            value,
            reference: Reference::Simulated(table.key().clone()),
            p_value: table.p_value(value),
            components,
        }
    }

    pub fn rejects(&self, level: f64) -> bool {
        self.p_value <= level
    }
}

/// Text record:
///
/// ```text
/// test A2
/// value 3.1
/// reference chi2 df=8
/// p_value 0.93
/// component 1 value=1.2 df=4 p_value=0.87
/// end
/// ```
impl fmt::Display for TestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "test {}", self.name)?;
        writeln!(f, "value {}", self.value)?;
        writeln!(f, "reference {}", self.reference)?;
        writeln!(f, "p_value {}", self.p_value)?;
        for row in &self.components {
            write!(f, "component {} value={}", row.component, row.value)?;
            if let Some(df) = row.df {
                write!(f, " df={df}")?;
            }
            if let Some(p) = row.p_value {
                write!(f, " p_value={p}")?;
            }
            if let (Some(c), Some(e)) = (row.critical, row.exceeds()) {
                write!(f, " critical={c} exceeds={e}")?;
            }
            writeln!(f)?;
        }
        writeln!(f, "end")
    }
}
