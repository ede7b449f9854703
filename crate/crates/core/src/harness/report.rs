use serde::Serialize;

use super::config::RunConfig;
use super::run::RunRow;

/// `ln(e_a / e_b) / ln(n_b / n_a)`; `log2(e_N / e_2N)` for doubled meshes.
pub fn observed_order(n_a: usize, e_a: f64, n_b: usize, e_b: f64) -> f64 {
    (e_a / e_b).ln() / (n_b as f64 / n_a as f64).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportRow {
    pub n: usize,
    pub dg_error: f64,
    pub dg_order: Option<f64>,
    pub filtered_error: f64,
    pub filtered_order: Option<f64>,
}

/// Errors and orders of one sweep, with the settings that produced them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub label: String,
    pub dimension: usize,
    pub k: usize,
    pub basis: String,
    pub nodes: String,
    pub epsilon: Option<f64>,
    pub policy: String,
    pub scaling_ratio: f64,
    pub rows: Vec<ReportRow>,
}

impl ConvergenceReport {
    pub fn new(run: &RunConfig) -> Self {
        let kind = run.node_kind();
        Self {
            label: run.label.clone(),
            dimension: run.problem.dimension,
            k: run.k,
            basis: run.basis.name().into(),
            nodes: kind.name().into(),
            epsilon: kind.epsilon(),
            policy: run.policy.name().into(),
            scaling_ratio: run.scaling_ratio,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: RunRow) {
        let (dg_order, filtered_order) = match self.rows.last() {
            Some(p) => (
                Some(observed_order(p.n, p.dg_error, row.n, row.dg_error)),
                Some(observed_order(p.n, p.filtered_error, row.n, row.filtered_error)),
            ),
            None => (None, None),
        };
        self.rows.push(ReportRow {
            n: row.n,
            dg_error: row.dg_error,
            dg_order,
            filtered_error: row.filtered_error,
            filtered_order,
        });
    }

    pub fn row(&self, n: usize) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    pub const CSV_HEADER: &'static str =
        "label,dimension,k,basis,nodes,epsilon,policy,scaling_ratio,n,dg_error,dg_order,filtered_error,filtered_order";

    /// Data lines (no header). Floats use the shortest round-trip form.
    pub fn csv_rows(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        self.rows
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{},{},{},{:e},{},{:e},{},{:e},{}\n",
                    csv_field(&self.label),
                    self.dimension,
                    self.k,
                    self.basis,
                    self.nodes,
                    opt(self.epsilon),
                    self.policy,
                    self.scaling_ratio,
                    r.n,
                    r.dg_error,
                    opt(r.dg_order),
                    r.filtered_error,
                    opt(r.filtered_order)
                )
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}", Self::CSV_HEADER, self.csv_rows())
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// All reports as one CSV document.
pub fn reports_csv(reports: &[ConvergenceReport]) -> String {
    let mut out = format!("{}\n", ConvergenceReport::CSV_HEADER);
    for r in reports {
        out.push_str(&r.csv_rows());
    }
    out
}

fn elements_cell(dimension: usize, n: usize) -> String {
    if dimension == 2 {
        format!("{n}x{n}")
    } else {
        n.to_string()
    }
}

fn error_cell(e: Option<f64>) -> String {
    e.map(|v| format!("{v:.2e}")).unwrap_or_else(|| "-".into())
}

fn order_cell(o: Option<f64>) -> String {
    o.map(|v| format!("{v:.2}")).unwrap_or_else(|| "--".into())
}

/// Degree × Elements rows with a DG column pair followed by one
/// error/order pair per distinct run label.
pub fn render_table(reports: &[ConvergenceReport]) -> String {
    let mut labels: Vec<&str> = Vec::new();
    let mut degrees: Vec<usize> = Vec::new();
    for r in reports {
        if !labels.contains(&r.label.as_str()) {
            labels.push(&r.label);
        }
        if !degrees.contains(&r.k) {
            degrees.push(r.k);
        }
    }
    let mut grid: Vec<Vec<String>> = Vec::new();
    let mut header = vec!["Degree".to_string(), "Elements".to_string(), "DG Error".into(), "Order".into()];
    for l in &labels {
        header.push(format!("{l} Error"));
        header.push("Order".into());
    }
    grid.push(header);
    let mut separators = Vec::new();
    for &k in &degrees {
        separators.push(grid.len());
        let of_k: Vec<&ConvergenceReport> = reports.iter().filter(|r| r.k == k).collect();
        let mut ns: Vec<usize> = of_k.iter().flat_map(|r| r.rows.iter().map(|x| x.n)).collect();
        ns.sort_unstable();
        ns.dedup();
        let dimension = of_k[0].dimension;
        for (i, &n) in ns.iter().enumerate() {
            let dg = of_k.iter().find_map(|r| r.row(n));
            let mut line = vec![
                if i == 0 { format!("k = {k}") } else { String::new() },
                elements_cell(dimension, n),
                error_cell(dg.map(|r| r.dg_error)),
                order_cell(dg.and_then(|r| r.dg_order)),
            ];
            for l in &labels {
                let row = of_k.iter().find(|r| r.label == *l).and_then(|r| r.row(n));
                line.push(error_cell(row.map(|r| r.filtered_error)));
                line.push(order_cell(row.and_then(|r| r.filtered_order)));
            }
            grid.push(line);
        }
    }
    let cols = grid[0].len();
    let widths: Vec<usize> =
        (0..cols).map(|c| grid.iter().map(|row| row[c].chars().count()).max().unwrap_or(0)).collect();
    let total = widths.iter().sum::<usize>() + 2 * (cols - 1);
    let mut out = String::new();
    for (i, row) in grid.iter().enumerate() {
        if separators.contains(&i) {
            out.push_str(&"-".repeat(total));
            out.push('\n');
        }
        let cells: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}
