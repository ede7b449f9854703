//! Command implementations. Each writes its artifacts below `out` and
//! returns the text meant for standard output.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::dgsolver::{dump_field, dump_field_2d, load_field, AnyField};
use crate::filtercore::{build_filter, export_kernel, FilterConfig};
use crate::postproc::{boundary_markers, dense_grid, pointwise_samples, BoundaryPolicy};

use super::acceptance::{evaluate, AcceptanceOptions, AcceptanceOutcome};
use super::config::{Experiment, RunConfig};
use super::report::{render_table, ConvergenceReport};
use super::run::{exact_at, filter_solution, run_kernel, sweep, Filtered, Solution, SolveCache};
use super::HarnessError;

/// Default density of point-wise error samples.
pub const POINTWISE_PER_ELEMENT: usize = 20;

fn ensure_dir(dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

fn write(path: &Path, contents: &str) -> Result<(), HarnessError> {
    fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

/// File-name fragment for a run: label reduced to `[a-z0-9-]`.
pub fn slug(run: &RunConfig) -> String {
    let mut s: String =
        run.label.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '-' }).collect();
    while s.contains("--") {
        s = s.replace("--", "-");
    }
    format!("{}-k{}", s.trim_matches('-'), run.k)
}

/// Exports the unscaled kernel of every run.
pub fn cmd_build_filter(exp: &Experiment, out: &Path) -> Result<String, HarnessError> {
    ensure_dir(out)?;
    let mut text = String::new();
    let mut seen = Vec::new();
    for run in &exp.runs {
        let key = (run.k, run.basis, run.node_kind().name(), run.node_kind().epsilon().map(f64::to_bits));
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let kernel = build_filter(&FilterConfig::new(run.k, run.basis.kind(), run.node_kind()))?;
        let path = out.join(format!("kernel-k{}-{}-{}.json", run.k, run.basis.name(), run.node_kind().name()));
        write(&path, &export_kernel(&kernel)?)?;
        let coeffs: Vec<String> = kernel.coefficients().iter().map(|c| format!("{c:e}")).collect();
        text.push_str(&format!(
            "k={} basis={} nodes={}{}: support {} (in units of H), coefficients [{}] -> {}\n",
            run.k,
            run.basis.name(),
            run.node_kind().name(),
            run.node_kind().epsilon().map(|e| format!(" eps={e}")).unwrap_or_default(),
            kernel.support_width(),
            coeffs.join(", "),
            path.display()
        ));
    }
    Ok(text)
}

/// Solves every run at every resolution and stores the final fields.
pub fn cmd_run_dg(exp: &Experiment, out: &Path) -> Result<String, HarnessError> {
    ensure_dir(out)?;
    let cache = SolveCache::new();
    let mut text = String::new();
    for run in &exp.runs {
        let problem = run.problem.advection();
        let exact = exact_at(&problem);
        for &n in &run.n {
            let solution = cache.solve(run, n)?;
            let path = out.join(format!("dg-{}d-k{}-n{n}.json", run.problem.dimension, run.k));
            let (json, err) = match &*solution {
                Solution::One(f) => (dump_field(f), f.l2_error(|x| exact(x, 0.0))),
                Solution::Two(f) => (dump_field_2d(f), f.l2_error(&exact)),
            };
            write(&path, &json)?;
            text.push_str(&format!("k={} N={n}: DG L2 error {err:e} -> {}\n", run.k, path.display()));
        }
    }
    Ok(text)
}

/// Filters every run at every resolution, or a stored field when `field`
/// is given, and writes the filtered samples as CSV.
pub fn cmd_filter(exp: &Experiment, out: &Path, field: Option<&Path>) -> Result<String, HarnessError> {
    ensure_dir(out)?;
    let mut text = String::new();
    let cache = SolveCache::new();
    let mut jobs: Vec<(RunConfig, usize, std::sync::Arc<Solution>)> = Vec::new();
    if let Some(path) = field {
        let json = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let solution = match load_field(&json)? {
            AnyField::One(f) => Solution::One(f),
            AnyField::Two(f) => Solution::Two(f),
        };
        let n = match &solution {
            Solution::One(f) => f.mesh().n,
            Solution::Two(f) => f.mesh().x.n,
        };
        let run = exp.runs.first().ok_or_else(|| HarnessError::Config("no run to take the kernel from".into()))?;
        jobs.push((run.clone(), n, std::sync::Arc::new(solution)));
    } else {
        for run in &exp.runs {
            for &n in &run.n {
                jobs.push((run.clone(), n, cache.solve(run, n)?));
            }
        }
    }
    for (run, n, solution) in jobs {
        let problem = run.problem.advection();
        let exact = exact_at(&problem);
        let path = out.join(format!("filtered-{}-n{n}.csv", slug(&run)));
        let (csv, err) = match filter_solution(&run, &solution)? {
            Filtered::One(ff) => (ff.to_csv(|x| exact(x, 0.0)), ff.l2_error(|x| exact(x, 0.0))),
            Filtered::Two(ff) => (ff.to_csv(&exact), ff.l2_error(&exact)),
        };
        write(&path, &csv)?;
        text.push_str(&format!("{} k={} N={n}: filtered L2 error {err:e} -> {}\n", run.label, run.k, path.display()));
    }
    Ok(text)
}

/// Convergence sweeps. `convergence.csv` gains a line as soon as each row
/// is done; the aligned table is written once all runs finish.
pub fn cmd_convergence(exp: &Experiment, out: &Path) -> Result<(String, Vec<ConvergenceReport>), HarnessError> {
    ensure_dir(out)?;
    let csv_path = out.join("convergence.csv");
    let mut csv = File::create(&csv_path).map_err(|e| HarnessError::io(&csv_path, e))?;
    let io = |e| HarnessError::io(&csv_path, e);
    writeln!(csv, "{}", ConvergenceReport::CSV_HEADER).map_err(io)?;
    let cache = SolveCache::new();
    let mut reports = Vec::new();
    for run in &exp.runs {
        let mut written = 0;
        let mut flush = |report: &ConvergenceReport| -> std::io::Result<()> {
            let lines = report.csv_rows();
            for line in lines.lines().skip(written) {
                writeln!(csv, "{line}")?;
            }
            written = report.rows.len();
            csv.flush()
        };
        let mut io_error = None;
        let result = sweep(run, &cache, |r| {
            if let Err(e) = flush(r) {
                io_error.get_or_insert(e);
            }
        });
        if let Some(e) = io_error {
            return Err(HarnessError::io(&csv_path, e));
        }
        match result {
            Ok(report) => reports.push(report),
            Err((_, e)) => return Err(e),
        }
    }
    let table = render_table(&reports);
    let table_path = out.join("convergence.txt");
    write(&table_path, &table)?;
    Ok((format!("{table}\nwrote {} and {}\n", csv_path.display(), table_path.display()), reports))
}

/// Gnuplot script for a point-wise error file, with vertical lines at the
/// switch between shifted and symmetric kernels when present.
pub fn pointwise_script(csv_name: &str, title: &str, markers: Option<(f64, f64)>) -> String {
    let mut s = format!(
        "# gnuplot script\n\
         set datafile separator ','\n\
         set logscale y\n\
         set format y '%.0e'\n\
         set xlabel 'x'\n\
         set ylabel '|error|'\n\
         set title '{title}'\n"
    );
    if let Some((l, r)) = markers {
        for x in [l, r] {
            s.push_str(&format!("set arrow from {x:e}, graph 0 to {x:e}, graph 1 nohead dashtype 2\n"));
        }
    }
    s.push_str(&format!(
        "plot '{csv_name}' using 1:5 every ::1 with lines title 'DG', \\\n     '{csv_name}' using 1:6 every ::1 with lines title 'filtered'\n"
    ));
    s
}

/// Point-wise errors of every 1D run on a dense grid.
pub fn cmd_pointwise(exp: &Experiment, out: &Path, per_element: usize) -> Result<String, HarnessError> {
    ensure_dir(out)?;
    let cache = SolveCache::new();
    let mut text = String::new();
    for run in &exp.runs {
        if run.problem.dimension != 1 {
            return Err(HarnessError::Config(format!("pointwise output supports 1D runs only ({})", run.label)));
        }
        let problem = run.problem.advection();
        for &n in &run.n {
            let solution = cache.solve(run, n)?;
            let Solution::One(field) = &*solution else { unreachable!("1D run") };
            let kernel = run_kernel(run, field.mesh().h())?;
            let xs = dense_grid(field, per_element);
            let policy = run.policy.policy();
            let samples = pointwise_samples(field, &kernel, |x| problem.exact_1d(x, problem.final_time), &xs, policy)?;
            let stem = format!("pointwise-{}-n{n}", slug(run));
            let mut csv = String::from("x,u_exact,u_h,u_star,err_h,err_star,policy\n");
            for s in &samples {
                csv.push_str(&format!(
                    "{:e},{:e},{:e},{:e},{:e},{:e},{}\n",
                    s.x,
                    s.exact,
                    s.u_h,
                    s.u_star,
                    s.err_h(),
                    s.err_star(),
                    s.tag.label()
                ));
            }
            let markers = (policy == BoundaryPolicy::PositionDependent)
                .then(|| boundary_markers(&kernel, (field.mesh().a, field.mesh().b)));
            write(&out.join(format!("{stem}.csv")), &csv)?;
            if let Some((l, r)) = markers {
                write(&out.join(format!("{stem}-markers.csv")), &format!("x\n{l:e}\n{r:e}\n"))?;
            }
            let title = format!("{} k={} N={n}", run.label, run.k);
            write(&out.join(format!("{stem}.gp")), &pointwise_script(&format!("{stem}.csv"), &title, markers))?;
            let max_h = samples.iter().map(|s| s.err_h()).fold(0.0, f64::max);
            let max_star = samples.iter().map(|s| s.err_star()).fold(0.0, f64::max);
            text.push_str(&format!(
                "{title}: max |err| DG {max_h:.3e}, filtered {max_star:.3e} -> {}\n",
                out.join(format!("{stem}.csv")).display()
            ));
        }
    }
    Ok(text)
}

#[derive(Debug, Serialize)]
pub struct VerifySummary<'a> {
    pub quick: bool,
    pub seed: u64,
    pub all_passed: bool,
    /// True when every failure is shared by the published values.
    pub acceptable: bool,
    pub criteria: &'a [super::Criterion],
}

/// Exit status of `verify`: 0 when every check passes, 2 when the only
/// failures are ones the published values share, 1 otherwise.
pub fn verify_exit_code(outcome: &AcceptanceOutcome) -> i32 {
    if outcome.all_passed() {
        0
    } else if outcome.acceptable() {
        2
    } else {
        1
    }
}

/// Runs the acceptance criteria. Returns the summary lines, the JSON
/// summary and the outcome.
pub fn cmd_verify(opts: &AcceptanceOptions, out: Option<&Path>) -> Result<(String, AcceptanceOutcome), HarnessError> {
    let outcome = evaluate(opts)?;
    let mut text: String = outcome.criteria.iter().map(|c| c.line() + "\n").collect();
    let summary = VerifySummary {
        quick: opts.quick,
        seed: opts.seed,
        all_passed: outcome.all_passed(),
        acceptable: outcome.acceptable(),
        criteria: &outcome.criteria,
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let path: PathBuf = dir.join("verify.json");
        write(&path, &json)?;
        for p in &outcome.presets {
            write(&dir.join(format!("{}.txt", p.name)), &render_table(&p.reports))?;
        }
        text.push_str(&format!("wrote {}\n", path.display()));
    } else {
        text.push_str(&json);
        text.push('\n');
    }
    Ok((text, outcome))
}
