use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::dgsolver::{solve, solve_2d, AdvectionProblem, DGField, DGField2D, Mesh1D, Mesh2D};
use crate::filtercore::{build_filter, FilterConfig, FilterKernel};
use crate::postproc::{filter_field, filter_field_2d, FilteredField, FilteredField2D};

use super::config::RunConfig;
use super::report::ConvergenceReport;
use super::HarnessError;

/// Final-time DG solution in one or two dimensions.
#[derive(Debug, Clone)]
pub enum Solution {
    One(DGField),
    Two(DGField2D),
}

/// Memoizes DG solves so runs sharing a problem, degree and mesh (the
/// variant columns of one table) solve once.
#[derive(Debug, Default)]
pub struct SolveCache {
    solved: Mutex<HashMap<String, Arc<Solution>>>,
}

impl SolveCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.solved.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn solve(&self, run: &RunConfig, n: usize) -> Result<Arc<Solution>, HarnessError> {
        let key = format!(
            "{}|{}|{}|{}|{}",
            serde_json::to_string(&run.problem).expect("problem serializes"),
            serde_json::to_string(&run.time_stepping).expect("stepping serializes"),
            run.problem.dimension,
            run.k,
            n
        );
        if let Some(s) = self.solved.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(s));
        }
        let problem = run.problem.advection();
        let solution = Arc::new(match run.problem.dimension {
            1 => Solution::One(solve(&problem, mesh_1d(run, n)?, run.k, &run.time_stepping)?),
            _ => Solution::Two(solve_2d(&problem, mesh_2d(run, n)?, run.k, &run.time_stepping)?),
        });
        self.solved.lock().expect("cache lock").insert(key, Arc::clone(&solution));
        Ok(solution)
    }
}

pub fn mesh_1d(run: &RunConfig, n: usize) -> Result<Mesh1D, HarnessError> {
    let [a, b] = run.problem.domain;
    Ok(Mesh1D::new(a, b, n)?)
}

pub fn mesh_2d(run: &RunConfig, n: usize) -> Result<Mesh2D, HarnessError> {
    let m = mesh_1d(run, n)?;
    Ok(Mesh2D::new(m, m))
}

/// The run's kernel scaled to `H = scaling_ratio · h`.
pub fn run_kernel(run: &RunConfig, h: f64) -> Result<FilterKernel, HarnessError> {
    let config = FilterConfig::new(run.k, run.basis.kind(), run.node_kind()).with_scaling(run.scaling_ratio * h);
    Ok(build_filter(&config)?)
}

/// Errors of one resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRow {
    pub n: usize,
    pub dg_error: f64,
    pub filtered_error: f64,
}

/// Filtered output of one resolution, kept for export.
#[derive(Debug, Clone)]
pub enum Filtered {
    One(FilteredField),
    Two(FilteredField2D),
}

pub fn filter_solution(run: &RunConfig, solution: &Solution) -> Result<Filtered, HarnessError> {
    Ok(match solution {
        Solution::One(f) => {
            let kernel = run_kernel(run, f.mesh().h())?;
            Filtered::One(filter_field(f, &kernel, run.policy.policy(), run.points())?)
        }
        Solution::Two(f) => {
            let kx = run_kernel(run, f.mesh().x.h())?;
            let ky = run_kernel(run, f.mesh().y.h())?;
            Filtered::Two(filter_field_2d(f, &kx, &ky, run.policy.policy(), run.points())?)
        }
    })
}

pub fn exact_at(problem: &AdvectionProblem) -> impl Fn(f64, f64) -> f64 + Sync + '_ {
    move |x, y| problem.exact(x, y, problem.final_time)
}

/// Solve (through the cache), filter and measure one resolution.
pub fn evaluate_row(run: &RunConfig, n: usize, cache: &SolveCache) -> Result<RunRow, HarnessError> {
    let solution = cache.solve(run, n)?;
    let problem = run.problem.advection();
    let exact = exact_at(&problem);
    let filtered = filter_solution(run, &solution)?;
    let (dg_error, filtered_error) = match (&*solution, &filtered) {
        (Solution::One(f), Filtered::One(ff)) => (f.l2_error(|x| exact(x, 0.0)), ff.l2_error(|x| exact(x, 0.0))),
        (Solution::Two(f), Filtered::Two(ff)) => (f.l2_error(&exact), ff.l2_error(&exact)),
        _ => unreachable!("filter output matches solution dimension"),
    };
    Ok(RunRow { n, dg_error, filtered_error })
}

/// Runs every resolution in order, handing each finished row to `sink`
/// before starting the next, so a failure keeps the rows already done.
pub fn sweep<F: FnMut(&ConvergenceReport)>(
    run: &RunConfig,
    cache: &SolveCache,
    mut sink: F,
) -> Result<ConvergenceReport, (ConvergenceReport, HarnessError)> {
    let mut report = ConvergenceReport::new(run);
    for &n in &run.n {
        match evaluate_row(run, n, cache) {
            Ok(row) => {
                report.push(row);
                sink(&report);
            }
            Err(e) => return Err((report, e)),
        }
    }
    Ok(report)
}

/// Sweeps of all runs of an experiment, sharing one cache.
pub fn run_experiment(runs: &[RunConfig], cache: &SolveCache) -> Result<Vec<ConvergenceReport>, HarnessError> {
    runs.iter().map(|r| sweep(r, cache, |_| {}).map_err(|(_, e)| e)).collect()
}
