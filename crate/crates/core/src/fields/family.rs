use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{GridSpec, ScalarField};
use crate::fmt::float;
use crate::sine_gordon::{self, KinkParams};
use crate::{Error, Result};

/// Coefficients of `ω₁ = u12 dt + v12 dx`, `ω₂ = u13 dt + v13 dx`,
/// `ω₁₂ = u23 dt + v23 dx`.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    pub u12: ScalarField,
    pub u13: ScalarField,
    pub u23: ScalarField,
    pub v12: ScalarField,
    pub v13: ScalarField,
    pub v23: ScalarField,
}

impl CoefficientSet {
    /// Every coefficient constant on `grid`, in the order `u12, u13, u23, v12, v13, v23`.
    pub fn uniform(grid: GridSpec, c: [f64; 6]) -> Self {
        let f = |v| ScalarField::constant(grid, v);
        CoefficientSet { u12: f(c[0]), u13: f(c[1]), u23: f(c[2]), v12: f(c[3]), v13: f(c[4]), v23: f(c[5]) }
    }

    pub fn fields(&self) -> [&ScalarField; 6] {
        [&self.u12, &self.u13, &self.u23, &self.v12, &self.v13, &self.v23]
    }

    pub fn grid(&self) -> &GridSpec {
        self.u12.grid()
    }

    pub fn check(&self) -> Result<&GridSpec> {
        let g = self.grid();
        if self.fields().iter().all(|f| f.grid() == g) {
            Ok(g)
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn sampled_only(&self) -> Self {
        CoefficientSet {
            u12: self.u12.sampled_only(),
            u13: self.u13.sampled_only(),
            u23: self.u23.sampled_only(),
            v12: self.v12.sampled_only(),
            v13: self.v13.sampled_only(),
            v23: self.v23.sampled_only(),
        }
    }
}

/// Second fundamental form entries `h11, h22` and `h = h12 = h21`.
#[derive(Debug, Clone)]
pub struct SecondFormCoeffs {
    pub h11: ScalarField,
    pub h22: ScalarField,
    pub h: ScalarField,
}

impl SecondFormCoeffs {
    pub fn uniform(grid: GridSpec, h11: f64, h22: f64, h: f64) -> Self {
        SecondFormCoeffs {
            h11: ScalarField::constant(grid, h11),
            h22: ScalarField::constant(grid, h22),
            h: ScalarField::constant(grid, h),
        }
    }

    pub fn fields(&self) -> [&ScalarField; 3] {
        [&self.h11, &self.h22, &self.h]
    }

    pub fn sampled_only(&self) -> Self {
        SecondFormCoeffs { h11: self.h11.sampled_only(), h22: self.h22.sampled_only(), h: self.h.sampled_only() }
    }
}

/// Grid shared by a coefficient set and its second-form companion.
pub(crate) fn shared_grid(c: &CoefficientSet, s: &SecondFormCoeffs) -> Result<GridSpec> {
    let g = *c.check()?;
    if s.fields().iter().all(|f| *f.grid() == g) {
        Ok(g)
    } else {
        Err(Error::GridMismatch)
    }
}

/// Constant values for every coefficient; unspecified ones are zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantValues {
    pub u12: f64,
    pub u13: f64,
    pub u23: f64,
    pub v12: f64,
    pub v13: f64,
    pub v23: f64,
    pub h11: f64,
    pub h22: f64,
    pub h: f64,
}

/// Named scenario generators for the nine coefficient fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    Zero,
    Constant(ConstantValues),
    SineGordonKink(KinkParams),
    CustomCsv { path: PathBuf },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Zero => "zero",
            Family::Constant(_) => "constant",
            Family::SineGordonKink(_) => "sine_gordon_kink",
            Family::CustomCsv { .. } => "custom_csv",
        }
    }

    /// Whether the family yields closed-form fields (as opposed to loaded samples).
    pub fn is_closed_form(&self) -> bool {
        !matches!(self, Family::CustomCsv { .. })
    }
}

pub fn sample_family(family: &Family, grid: &GridSpec) -> Result<(CoefficientSet, SecondFormCoeffs)> {
    match family {
        Family::Zero => Ok((CoefficientSet::uniform(*grid, [0.0; 6]), SecondFormCoeffs::uniform(*grid, 0.0, 0.0, 0.0))),
        Family::Constant(c) => Ok((
            CoefficientSet::uniform(*grid, [c.u12, c.u13, c.u23, c.v12, c.v13, c.v23]),
            SecondFormCoeffs::uniform(*grid, c.h11, c.h22, c.h),
        )),
        Family::SineGordonKink(p) => {
            let phi = sine_gordon::kink_field(*grid, *p);
            Ok(sine_gordon::coefficients_from_phi(&phi))
        }
        Family::CustomCsv { path } => read_coefficient_csv(path, grid),
    }
}

pub const CSV_HEADER: [&str; 11] = ["j", "n", "u12", "u13", "u23", "v12", "v13", "v23", "h11", "h22", "h"];

/// Load the nine fields from a `j,n,u12,...,h` CSV with one row per node.
pub fn read_coefficient_csv(path: &Path, grid: &GridSpec) -> Result<(CoefficientSet, SecondFormCoeffs)> {
    let shape = |reason: String| Error::CsvShape { path: path.to_path_buf(), reason };
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err)?;
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(shape(format!(
            "expected header `{}`, found `{}`",
            CSV_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut columns = vec![vec![f64::NAN; grid.len()]; 9];
    let mut seen = vec![false; grid.len()];
    let mut rows = 0usize;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let row = line + 2;
        let parse_index = |k: usize| -> Result<usize> {
            record[k].parse().map_err(|_| shape(format!("row {row}: bad index `{}`", &record[k])))
        };
        let (j, n) = (parse_index(0)?, parse_index(1)?);
        if !grid.contains(j, n) {
            return Err(shape(format!("row {row}: node ({j}, {n}) outside the {}x{} grid", grid.nx(), grid.nt())));
        }
        let idx = grid.index(j, n);
        if std::mem::replace(&mut seen[idx], true) {
            return Err(shape(format!("row {row}: node ({j}, {n}) appears twice")));
        }
        for (c, column) in columns.iter_mut().enumerate() {
            let raw = &record[c + 2];
            let v: f64 =
                raw.parse().map_err(|_| shape(format!("row {row}: bad number `{raw}` in `{}`", CSV_HEADER[c + 2])))?;
            if !v.is_finite() {
                return Err(shape(format!("row {row}: non-finite `{}`", CSV_HEADER[c + 2])));
            }
            column[idx] = v;
        }
        rows += 1;
    }
    if rows != grid.len() {
        return Err(shape(format!("{rows} rows for a {}x{} grid ({} nodes)", grid.nx(), grid.nt(), grid.len())));
    }
    let mut it = columns.into_iter().map(|v| ScalarField::from_values(*grid, v));
    let mut next = || it.next().expect("nine columns");
    Ok((
        CoefficientSet { u12: next()?, u13: next()?, u23: next()?, v12: next()?, v13: next()?, v23: next()? },
        SecondFormCoeffs { h11: next()?, h22: next()?, h: next()? },
    ))
}

pub fn write_coefficient_csv(mut w: impl Write, c: &CoefficientSet, s: &SecondFormCoeffs) -> Result<()> {
    let g = shared_grid(c, s)?;
    writeln!(w, "{}", CSV_HEADER.join(","))?;
    let fields: Vec<&ScalarField> = c.fields().into_iter().chain(s.fields()).collect();
    for n in 0..g.nt() {
        for j in 0..g.nx() {
            write!(w, "{j},{n}")?;
            for f in &fields {
                write!(w, ",{}", float(f.at(j, n)))?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}
