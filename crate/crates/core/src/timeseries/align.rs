use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::Serialize;

use super::{TimeSeries, YearMonth};
use crate::error::{Error, Result};

/// Rows where the target and every retained predictor are observed.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    column_names: Vec<String>,
    dates: Vec<YearMonth>,
    rows: DMatrix<f64>,
    target_name: String,
    target: Vec<f64>,
}

/// Record of a predictor dropped during alignment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignWarning {
    pub column: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Alignment {
    pub design: DesignMatrix,
    pub warnings: Vec<AlignWarning>,
}

/// A contiguous monthly span ready for the sampler: `y` carries missing
/// entries where alignment dropped a row and `x` holds zeros there.
#[derive(Debug, Clone)]
pub struct ModelInputs {
    pub y: TimeSeries,
    pub names: Vec<String>,
    pub x: DMatrix<f64>,
}

impl DesignMatrix {
    /// Builds a design from already aligned pieces.
    pub fn new(
        column_names: Vec<String>,
        dates: Vec<YearMonth>,
        rows: DMatrix<f64>,
        target_name: impl Into<String>,
        target: Vec<f64>,
    ) -> Result<Self> {
        let n = dates.len();
        if rows.nrows() != n || target.len() != n || rows.ncols() != column_names.len() {
            return Err(Error::Dimension(format!(
                "design {}x{} with {} names, {} dates, {} targets",
                rows.nrows(),
                rows.ncols(),
                column_names.len(),
                n,
                target.len()
            )));
        }
        if n == 0 {
            return Err(Error::Alignment("design has no rows".into()));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Schema("design dates must be strictly increasing".into()));
        }
        if rows.iter().chain(target.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index: 0,
                message: "design contains a non-finite cell".into(),
            });
        }
        Ok(Self {
            column_names,
            dates,
            rows,
            target_name: target_name.into(),
            target,
        })
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn dates(&self) -> &[YearMonth] {
        &self.dates
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn n(&self) -> usize {
        self.dates.len()
    }

    pub fn k(&self) -> usize {
        self.column_names.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.column(j).iter().copied().collect()
    }

    /// Keeps only the named columns, in the given order.
    pub fn select(&self, names: &[String]) -> Result<Self> {
        let idx = names
            .iter()
            .map(|n| {
                self.column_names
                    .iter()
                    .position(|c| c == n)
                    .ok_or_else(|| Error::Config(format!("predictor {n:?} not in design")))
            })
            .collect::<Result<Vec<_>>>()?;
        let rows = DMatrix::from_fn(self.n(), idx.len(), |i, j| self.rows[(i, idx[j])]);
        Self::new(names.to_vec(), self.dates.clone(), rows, self.target_name.clone(), self.target.clone())
    }

    /// Expands to the contiguous month span from first to last row.
    pub fn model_inputs(&self) -> ModelInputs {
        let start = self.dates[0];
        let span = start.months_until(*self.dates.last().unwrap()) as usize + 1;
        let mut y = vec![None; span];
        let mut x = DMatrix::zeros(span, self.k());
        for (i, d) in self.dates.iter().enumerate() {
            let t = start.months_until(*d) as usize;
            y[t] = Some(self.target[i]);
            x.row_mut(t).copy_from(&self.rows.row(i));
        }
        ModelInputs {
            y: TimeSeries::new(self.target_name.clone(), start, y).expect("finite by construction"),
            names: self.column_names.clone(),
            x,
        }
    }
}

/// Intersects the target with every predictor on observed months.
///
/// Constant predictors (zero variance over the retained rows) are dropped and
/// reported in `warnings`.
pub fn align(target: &TimeSeries, predictors: &[TimeSeries]) -> Result<Alignment> {
    let mut dates: BTreeSet<YearMonth> = (0..target.len())
        .filter(|&i| target.values()[i].is_some())
        .map(|i| target.date(i))
        .collect();
    for p in predictors {
        dates.retain(|d| p.get(*d).is_some());
    }
    if dates.is_empty() {
        return Err(Error::Alignment(format!(
            "target {:?} shares no observed month with all {} predictors",
            target.name(),
            predictors.len()
        )));
    }
    let dates: Vec<YearMonth> = dates.into_iter().collect();
    let mut warnings = Vec::new();
    let mut names = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for p in predictors {
        let col: Vec<f64> = dates.iter().map(|d| p.get(*d).unwrap()).collect();
        let first = col[0];
        if col.iter().all(|v| *v == first) {
            log::warn!("dropping constant predictor {:?}", p.name());
            warnings.push(AlignWarning {
                column: p.name().to_string(),
                reason: "zero variance over aligned rows".into(),
            });
            continue;
        }
        names.push(p.name().to_string());
        columns.push(col);
    }
    let n = dates.len();
    let rows = DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i]);
    let y = dates.iter().map(|d| target.get(*d).unwrap()).collect();
    Ok(Alignment {
        design: DesignMatrix::new(names, dates, rows, target.name(), y)?,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ym(y: i32, m: u32) -> YearMonth {
        YearMonth::new(y, m).unwrap()
    }

    fn ramp(name: &str, from: YearMonth, to: YearMonth) -> TimeSeries {
        let n = from.months_until(to) as usize + 1;
        let v: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() + i as f64 * 0.01).collect();
        TimeSeries::from_values(name, from, &v).unwrap()
    }

    #[test]
    fn rows_restricted_to_common_window() {
        let y = ramp("cpu", ym(1987, 4), ym(2021, 6));
        let x = ramp("trend", ym(2004, 1), ym(2021, 6));
        let a = align(&y, &[x]).unwrap();
        assert_eq!(a.design.dates()[0], ym(2004, 1));
        assert_eq!(*a.design.dates().last().unwrap(), ym(2021, 6));
        assert_eq!(a.design.n(), 210);
    }

    #[test]
    fn identical_dates_keep_full_length() {
        let y = ramp("y", ym(2000, 1), ym(2010, 12));
        let x = ramp("x", ym(2000, 1), ym(2010, 12));
        assert_eq!(align(&y, &[x]).unwrap().design.n(), y.len());
    }

    #[test]
    fn interior_gaps_reduce_rows() {
        let y = ramp("y", ym(2000, 1), ym(2004, 12));
        let mut vals: Vec<Option<f64>> = ramp("x", ym(2000, 1), ym(2004, 12)).values().to_vec();
        for i in [10, 11, 30] {
            vals[i] = None;
        }
        let x = TimeSeries::new("x", ym(2000, 1), vals).unwrap();
        // oracle: explicit date-set intersection
        let ys: BTreeSet<_> = (0..y.len()).map(|i| y.date(i)).collect();
        let xs: BTreeSet<_> = (0..x.len()).filter(|&i| x.values()[i].is_some()).map(|i| x.date(i)).collect();
        let expected = ys.intersection(&xs).count();
        let a = align(&y, &[x]).unwrap();
        assert_eq!(a.design.n(), expected);
        assert_eq!(a.design.n(), y.len() - 3);
        let inputs = a.design.model_inputs();
        assert_eq!(inputs.y.len(), y.len());
        assert_eq!(inputs.y.values().iter().filter(|v| v.is_none()).count(), 3);
    }

    #[test]
    fn constant_columns_dropped_with_warning() {
        let y = ramp("y", ym(2000, 1), ym(2001, 12));
        let c = TimeSeries::from_values("c", ym(2000, 1), &[5.0; 24]).unwrap();
        let x = ramp("x", ym(2000, 1), ym(2001, 12));
        let a = align(&y, &[c, x]).unwrap();
        assert_eq!(a.design.column_names(), &["x".to_string()]);
        assert_eq!(a.warnings.len(), 1);
        assert_eq!(a.warnings[0].column, "c");
    }

    #[test]
    fn disjoint_ranges_fail() {
        let y = ramp("y", ym(2000, 1), ym(2000, 12));
        let x = ramp("x", ym(2001, 1), ym(2001, 12));
        assert!(matches!(align(&y, &[x]), Err(Error::Alignment(_))));
    }
}
