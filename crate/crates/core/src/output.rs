//! CSV tables. Floats are written in shortest round-trip form, rows end in `\n`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::control::DriveSpec;
use crate::error::{Error, Result};
use crate::propagator::TrajectoryRecord;

/// A named numeric table; written as `<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: Vec<String>) -> Self {
        Table { name: name.into(), header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io { context: format!("table {}", self.name), message: e.to_string() };
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| format!("{x:?}"))).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io { context: format!("table {}", self.name), message: e.to_string() })?;
        Ok(String::from_utf8(bytes).expect("ascii output"))
    }

    pub fn from_csv_str(name: impl Into<String>, text: &str) -> Result<Self> {
        let name = name.into();
        let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let io = |e: csv::Error| Error::Io { context: format!("table {name}"), message: e.to_string() };
        let header = r.headers().map_err(io)?.iter().map(str::to_owned).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(io)?;
            let row = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| Error::Io { context: format!("table {name}"), message: format!("`{s}`: {e}") }))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Table { name, header, rows })
    }

    /// Writes `<dir>/<name>.csv` and returns the path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("{}.csv", self.name));
        fs::write(&path, self.to_csv_string()?).map_err(|e| io_error(&path, e))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("table");
        Self::from_csv_str(name, &text)
    }
}

pub(crate) fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io { context: path.display().to_string(), message: e.to_string() }
}

/// A set of tables for one figure or study.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub name: String,
    pub tables: Vec<Table>,
}

impl Bundle {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        self.tables.iter().map(|t| t.write(dir)).collect()
    }
}

/// tau, re_psi_i, im_psi_i …, then pop_<frame>_<n> for each attached frame.
pub fn trajectory_table(name: &str, t: &TrajectoryRecord) -> Table {
    let dim = t.states.first().map_or(0, |s| s.dim());
    let mut header = vec!["tau".to_owned()];
    for i in 0..dim {
        header.push(format!("re_psi_{i}"));
        header.push(format!("im_psi_{i}"));
    }
    for (label, pops) in &t.populations {
        let n = pops.first().map_or(0, Vec::len);
        header.extend((0..n).map(|k| format!("pop_{label}_{k}")));
    }
    let mut table = Table::new(name, header);
    for (j, (&tau, psi)) in t.tau_grid.iter().zip(&t.states).enumerate() {
        let mut row = vec![tau];
        for z in psi.amplitudes() {
            row.push(z.re);
            row.push(z.im);
        }
        for pops in t.populations.values() {
            row.extend_from_slice(&pops[j]);
        }
        table.push(row);
    }
    table
}

/// epsilon, infidelity.
pub fn sweep_table(name: &str, epsilons: &[f64], infidelities: &[f64]) -> Table {
    let mut table = Table::new(name, vec!["epsilon".into(), "infidelity".into()]);
    for (&e, &i) in epsilons.iter().zip(infidelities) {
        table.push(vec![e, i]);
    }
    table
}

/// tau, then re_i_j, im_i_j in row-major order.
pub fn drive_table(name: &str, d: &DriveSpec) -> Table {
    let dim = d.dim().unwrap_or(0);
    let mut header = vec!["tau".to_owned()];
    for i in 0..dim {
        for j in 0..dim {
            header.push(format!("re_{i}_{j}"));
            header.push(format!("im_{i}_{j}"));
        }
    }
    let mut table = Table::new(name, header);
    for (&tau, m) in d.tau_grid.iter().zip(&d.sampled_drive) {
        let mut row = vec![tau];
        for z in m.as_slice() {
            row.push(z.re);
            row.push(z.im);
        }
        table.push(row);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        let mut t = Table::new("t", vec!["a".into(), "b".into()]);
        t.push(vec![0.1, 1.0 / 3.0]);
        t.push(vec![1e-300, -2.5e17]);
        let text = t.to_csv_string().unwrap();
        assert!(text.starts_with("a,b\n0.1,0.3333333333333333\n"));
        assert!(!text.contains('\r'));
        assert_eq!(Table::from_csv_str("t", &text).unwrap(), t);
    }

    #[test]
    fn sweep_header() {
        let t = sweep_table("s", &[0.1], &[0.01]);
        assert_eq!(t.to_csv_string().unwrap(), "epsilon,infidelity\n0.1,0.01\n");
    }

    #[test]
    fn drive_header() {
        let d = DriveSpec::zero(2, 0.1, &[0.0, 1.0]);
        assert_eq!(
            drive_table("d", &d).header.join(","),
            "tau,re_0_0,im_0_0,re_0_1,im_0_1,re_1_0,im_1_0,re_1_1,im_1_1"
        );
    }
}
