//! Default data tables for figures 1 to 9.
//!
//! Each figure id maps to one or more named tables; they are written as
//! `<name>.csv`. Figures 4 to 6 come as one file per parameter choice.

use std::fs;
use std::path::{Path, PathBuf};

use crate::analysis::{sweep, Axis, SweepKind, Table};
use crate::error::{LottoError, Result};
use crate::multistage::{
    lower_bound, phi, phi_dagger, psi, psi_dagger, upper_bound, Field, MultistageInstance,
};

pub const FIGURE_IDS: std::ops::RangeInclusive<u8> = 1..=9;

/// Optional override of the number of points on each continuous axis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Resolution {
    pub points: Option<usize>,
}

impl Resolution {
    fn or(&self, default: usize) -> usize {
        self.points.unwrap_or(default)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureTable {
    pub name: String,
    pub table: Table,
}

fn steps(start: f64, step: f64, n: usize) -> Axis {
    Axis::from_values((0..n).map(|i| start + step * i as f64).collect()).expect("fixed axis")
}

fn single(name: &str, table: Table) -> Vec<FigureTable> {
    vec![FigureTable { name: name.into(), table }]
}

const ENVELOPE_US: [f64; 2] = [0.4, 0.7];
const BOUND_FAMILIES: [(&str, [f64; 3]); 2] = [("a", [0.3, 0.4, 0.5]), ("b", [0.31, 0.33, 0.35])];
pub const BUDGET_COSTS: [f64; 5] = [0.5, 1.0, 2.0, 4.0, 100.0];

/// Tables behind figure `id`.
pub fn figure_tables(id: u8, res: Resolution) -> Result<Vec<FigureTable>> {
    Ok(match id {
        1 => single(
            "fig1",
            sweep(SweepKind::ValueVsRatio, &steps(0.0, 0.2, 6), &Axis::linspace(0.0, 3.0, res.or(301))?)?,
        ),
        2 => single(
            "fig2",
            sweep(
                SweepKind::ValueVsU,
                &Axis::from_values(vec![0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0])?,
                &Axis::linspace(0.0, 1.0, res.or(201))?,
            )?,
        ),
        3 => single(
            "fig3",
            sweep(
                SweepKind::ValueHeatmap,
                &Axis::linspace(0.0, 3.0, res.or(301))?,
                &Axis::linspace(0.0, 1.0, res.or(201))?,
            )?,
        ),
        4 | 5 => {
            let xs = Axis::linspace(0.01, 6.0, res.or(600))?;
            ENVELOPE_US
                .iter()
                .map(|&u| -> Result<FigureTable> {
                    let f = Field::new(1.0, u)?;
                    let rows = xs
                        .values()
                        .iter()
                        .map(|&x| -> Result<Vec<f64>> {
                            Ok(if id == 4 {
                                vec![x, psi(x, &f)?, psi_dagger(x, &f)?]
                            } else {
                                vec![x, phi(x, &f), phi_dagger(x, &f)]
                            })
                        })
                        .collect::<Result<_>>()?;
                    let cols: &[&str] = if id == 4 { &["x", "psi", "psi_dagger"] } else { &["x", "phi", "phi_dagger"] };
                    Ok(FigureTable { name: format!("fig{id}_u{u}"), table: Table::new(cols, rows) })
                })
                .collect::<Result<_>>()?
        }
        6 => {
            let ratios = Axis::linspace(0.01, 3.0, res.or(300))?;
            BOUND_FAMILIES
                .iter()
                .map(|(tag, us)| -> Result<FigureTable> {
                    let fields = us.iter().map(|&u| Field::new(1.0 / 3.0, u)).collect::<Result<Vec<_>>>()?;
                    let rows = ratios
                        .values()
                        .iter()
                        .map(|&x| -> Result<Vec<f64>> {
                            let inst = MultistageInstance::new(x, 1.0, fields.clone())?;
                            Ok(vec![x, lower_bound(&inst).0, upper_bound(&inst).0])
                        })
                        .collect::<Result<_>>()?;
                    Ok(FigureTable { name: format!("fig6_{tag}"), table: Table::new(&["ratio", "lower", "upper"], rows) })
                })
                .collect::<Result<_>>()?
        }
        7 => single(
            "fig7",
            sweep(
                SweepKind::IrHeatmap,
                &Axis::linspace(0.0, 2.0, res.or(201))?,
                &Axis::linspace(0.0, 1.0, res.or(101))?,
            )?,
        ),
        8 => single(
            "fig8",
            sweep(SweepKind::Contours, &steps(0.1, 0.1, 9), &Axis::linspace(0.0, 1.0, res.or(201))?)?,
        ),
        9 => single(
            "fig9",
            sweep(
                SweepKind::BudgetCurves,
                &Axis::from_values(BUDGET_COSTS.to_vec())?,
                &Axis::linspace(0.01, 6.0, res.or(600))?,
            )?,
        ),
        other => {
            return Err(LottoError::OutOfDomain(format!("figure id must be in 1..=9, got {other}")));
        }
    })
}

/// Writes every table of figure `id` into `dir` and returns the paths.
pub fn write_figure(id: u8, res: Resolution, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let tables = figure_tables(id, res).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e))?;
    fs::create_dir_all(dir)?;
    tables
        .iter()
        .map(|t| {
            let path = dir.join(format!("{}.csv", t.name));
            t.table.write_csv(fs::File::create(&path)?)?;
            Ok(path)
        })
        .collect()
}
