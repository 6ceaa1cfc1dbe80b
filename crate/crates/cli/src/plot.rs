//! gnuplot scripts for the CSV reports. Scripts are only written, never run.

use std::fs;
use std::path::Path;

use crate::CliError;

/// What a CSV report contains, for choosing the plot layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotLayout {
    /// `n,M,ks,...`: KS distance against n on a log x-axis.
    Convergence,
    /// `x,A_N,F_limit,gap`: logarithmic average and limit CDF.
    Asclt,
    /// `n,gm_prefix,gm_loo,err_prefix,err_loo`: errors against n, log-log.
    Slln,
}

pub fn plot_script(layout: PlotLayout, csv_path: &Path) -> String {
    let csv = csv_path.display().to_string().replace('\'', "\\'");
    let head = "set datafile separator ','\nset key autotitle columnhead\nset key left top\nset grid\n".to_string();
    let body = match layout {
        PlotLayout::Convergence => format!(
            "set logscale x\nset xlabel 'n'\nset ylabel 'KS distance'\n\
             plot '{csv}' using 1:3 with linespoints title 'KS distance'\n"
        ),
        PlotLayout::Asclt => format!(
            "set xlabel 'x'\nset ylabel 'CDF'\n\
             plot '{csv}' using 1:2 with linespoints title 'A_N(x)', \\\n     '{csv}' using 1:3 with lines title 'limit CDF'\n"
        ),
        PlotLayout::Slln => format!(
            "set logscale xy\nset xlabel 'n'\nset ylabel '|geometric mean - mu|'\n\
             plot '{csv}' using 1:4 with linespoints title 'prefix', \\\n     '{csv}' using 1:5 with linespoints title 'leave-one-out'\n"
        ),
    };
    head + &body
}

/// Writes the script for a report with `rows` data rows. Empty reports are
/// refused.
pub fn emit_plot_script(layout: PlotLayout, rows: usize, csv_path: &Path, out: &Path) -> Result<(), CliError> {
    if rows == 0 {
        return Err(CliError::Io("refusing to write a plot script for an empty report".into()));
    }
    fs::write(out, plot_script(layout, csv_path)).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))
}
