//! gnuplot scripts for emitted bundles.
//!
//! Figure bundles with `<fig><col>_populations` and `<fig><col>_hamiltonian`
//! tables get a two-row grid: populations on top, Hamiltonian elements below.
//! Any other bundle gets one panel per table.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use adiabat::output::{Bundle, Table};
use adiabat::Error;

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

fn panel(out: &mut String, t: &Table, title: &str) {
    let file = quote(&format!("{}.csv", t.name));
    let _ = writeln!(out, "set title {}", quote(title));
    let _ = writeln!(out, "set xlabel {}", quote(&t.header[0]));
    let curves: Vec<String> = (1..t.header.len())
        .map(|c| {
            let src = if c == 1 { file.clone() } else { "''".to_owned() };
            format!("{src} using 1:{} with lines title {}", c + 1, quote(&t.header[c]))
        })
        .collect();
    let _ = writeln!(out, "plot {}", curves.join(", \\\n     "));
}

/// Script text for `bundle`; refuses bundles without tables.
pub fn plot_script(bundle: &Bundle) -> Result<String, Error> {
    if bundle.tables.is_empty() {
        return Err(Error::InvalidArgument(format!("bundle `{}` has no tables to plot", bundle.name)));
    }
    let top: Vec<&Table> = bundle.tables.iter().filter(|t| t.name.ends_with("_populations")).collect();
    let bottom: Vec<&Table> = bundle.tables.iter().filter(|t| t.name.ends_with("_hamiltonian")).collect();
    let grid = !top.is_empty() && top.len() == bottom.len();
    let (rows, cols) = if grid { (2, top.len()) } else { (1, bundle.tables.len()) };

    let mut s = String::new();
    let _ = writeln!(s, "# {}: run with `gnuplot {}.gp` from this directory", bundle.name, bundle.name);
    s.push_str("set datafile separator ','\n");
    s.push_str("set key top right\n");
    let _ = writeln!(s, "set terminal pngcairo size {},{}", 500 * cols, 400 * rows);
    let _ = writeln!(s, "set output {}", quote(&format!("{}.png", bundle.name)));
    let _ = writeln!(s, "set multiplot layout {rows},{cols}");
    if grid {
        for (i, t) in top.iter().enumerate() {
            let label = (b'a' + i as u8) as char;
            panel(&mut s, t, &format!("({label}) populations"));
        }
        for (i, t) in bottom.iter().enumerate() {
            let label = (b'a' + i as u8) as char;
            panel(&mut s, t, &format!("({label}) Hamiltonian elements"));
        }
    } else {
        for t in &bundle.tables {
            panel(&mut s, t, &t.name);
        }
    }
    s.push_str("unset multiplot\n");
    Ok(s)
}

/// Writes `<dir>/<bundle>.gp` next to the bundle's CSV files.
pub fn emit_plot_script(bundle: &Bundle, dir: &Path) -> Result<PathBuf, Error> {
    let text = plot_script(bundle)?;
    let path = dir.join(format!("{}.gp", bundle.name));
    fs::write(&path, text).map_err(|e| Error::Io { context: path.display().to_string(), message: e.to_string() })?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotes_are_escaped() {
        assert_eq!(quote("it's"), "'it''s'");
    }
}
