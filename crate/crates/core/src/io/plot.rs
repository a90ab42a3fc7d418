//! Plot data and gnuplot scripts for scaling fits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::table::write_file;
use crate::experiments::ScalingFit;
use crate::{Error, Result};

/// Paths written by [`write_fit_plot`].
#[derive(Debug, Clone, PartialEq)]
pub struct PlotFiles {
    pub data: PathBuf,
    pub line: PathBuf,
    pub script: PathBuf,
}

fn axis_labels(fit: &ScalingFit) -> (&'static str, &'static str) {
    use crate::experiments::FitMode::*;
    match fit.mode {
        NvBulk => ("log(nv)", "log E^{1/p}|Lambda_n|^p"),
        NKolmogorov => ("log n", "log median Delta_n"),
        EdgeKappa => ("log(n(kappa+v))", "log E^{1/p}|Im Lambda_n|^p"),
    }
}

/// Writes `stem.dat` (predictor, response), `stem_fit.dat` (fitted line at
/// the extreme predictors) and `stem.gp`.
pub fn write_fit_plot(dir: impl AsRef<Path>, stem: &str, fit: &ScalingFit) -> Result<PlotFiles> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (xl, yl) = axis_labels(fit);

    let mut data = format!("# {xl}\t{yl}\n");
    for (x, y) in fit.predictor.iter().zip(&fit.response) {
        let _ = writeln!(data, "{x:?}\t{y:?}");
    }
    let lo = fit.predictor.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = fit.predictor.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut line = format!("# slope {:?} intercept {:?} r2 {:?}\n", fit.slope, fit.intercept, fit.r_squared);
    for x in [lo, hi] {
        let _ = writeln!(line, "{x:?}\t{:?}", fit.predict(x));
    }
    let script = format!(
        "set xlabel \"{xl}\"\nset ylabel \"{yl}\"\nset key top right\n\
         plot \"{stem}.dat\" using 1:2 with points title \"data\", \\\n     \
         \"{stem}_fit.dat\" using 1:2 with lines title \"slope {:.4}\"\n",
        fit.slope
    );

    let files = PlotFiles {
        data: dir.join(format!("{stem}.dat")),
        line: dir.join(format!("{stem}_fit.dat")),
        script: dir.join(format!("{stem}.gp")),
    };
    write_file(&files.data, data.as_bytes())?;
    write_file(&files.line, line.as_bytes())?;
    write_file(&files.script, script.as_bytes())?;
    Ok(files)
}
