use std::path::Path;

use regime_core::generators::{
    gen_munk, gen_synthetic, simulate_angiogenesis, true_synthetic_hypotheses, AngioConfig, AngioState,
    Modulation, MunkConfig, SyntheticConfig,
};
use regime_core::{
    compute_area_weights, evaluate_labeling, global_score, DegeneratePolicy, Hypothesis, SelectorConfig, SelectorKind,
    SweepGrid, TermDataset,
};
use serde::Serialize;

use super::args::*;
use super::hypotheses::{parse_balance, read_labels, read_masks};
use crate::bench::{bench_csv, loglog_slope, run_benchmark, BenchConfig, BenchFamily, BenchRow};
use crate::error::{CliError, Result};
use crate::fsutil::write_atomic;
use crate::manifest::RunManifest;
use crate::parallel::{run_sweep_parallel, thread_pool};
use crate::report::{grid_csv, labels_csv, local_scores_csv, ClusterSummary, FitSummary, ScoreSummary};
use crate::store::{load_dataset, write_dataset, Format};

/// Prints a progress summary unless `--quiet` was given.
macro_rules! report {
    ($common:expr, $($arg:tt)*) => {
        if !$common.quiet {
            println!($($arg)*);
        }
    };
}

pub fn execute(cli: Cli, command_line: Vec<String>) -> Result<()> {
    match cli.command {
        Command::Gen(GenCommand::Synthetic(a)) => synthetic(&a, command_line),
        Command::Gen(GenCommand::Munk(a)) => munk(&a, command_line),
        Command::SimAngio(a) => sim_angio(&a, command_line),
        Command::Fit(a) => fit(&a, command_line),
        Command::Score(a) => score(&a, command_line),
        Command::Bench(a) => bench(&a, command_line),
    }
}

/// Collects the files a command writes into its output directory.
struct Output {
    dir: std::path::PathBuf,
    manifest: RunManifest,
}

impl Output {
    fn new(command: &str, config: &impl Serialize, common: &CommonArgs, command_line: Vec<String>) -> Result<Self> {
        std::fs::create_dir_all(&common.out).map_err(|e| CliError::io(&common.out, e))?;
        let mut manifest = RunManifest::new(command, config)?;
        manifest.command_line(command_line).seed("seed", common.seed);
        Ok(Self { dir: common.out.clone(), manifest })
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        self.manifest.input(path)?;
        Ok(())
    }

    fn text(&mut self, name: &str, contents: &str) -> Result<()> {
        write_atomic(&self.dir.join(name), contents.as_bytes())?;
        self.manifest.output(name);
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.text(name, &text)
    }

    fn dataset(&mut self, stem: &str, ds: &TermDataset, format: Format) -> Result<String> {
        let name = format!("{stem}.{}", format.extension());
        write_dataset(&self.dir.join(&name), ds, format)?;
        self.manifest.output(name.clone());
        Ok(name)
    }

    fn finish(self) -> Result<()> {
        self.manifest.write(&self.dir)
    }
}

fn synthetic(a: &SyntheticArgs, command_line: Vec<String>) -> Result<()> {
    let config = SyntheticConfig {
        d: a.d,
        nx: a.nx,
        ny: a.ny,
        lambda: a.lambda,
        beta: a.beta,
        eta0: a.eta0,
        omega: a.omega,
        modulation: match a.modulation {
            ModulationArg::Perturbed => Modulation::Perturbed,
            ModulationArg::Sine => Modulation::Sine,
        },
    };
    if !config.closes_exactly() {
        eprintln!("warning: d = {} is not a multiple of 4, so the terms do not sum to zero and closure is only approximate", a.d);
    }
    let ds = gen_synthetic(&config, a.common.seed)?;
    let mut out = Output::new("gen synthetic", a, &a.common, command_line)?;
    let name = out.dataset("synthetic", &ds, a.format)?;
    let mut masks = String::from("# generating balance of each observation\n");
    for h in true_synthetic_hypotheses(&ds)? {
        masks.push_str(&h.to_string());
        masks.push('\n');
    }
    out.text("synthetic_masks.txt", &masks)?;
    out.finish()?;
    report!(a.common, "wrote {} observations of {} terms to {}", ds.n_rows(), ds.n_terms(), a.common.out.join(name).display());
    Ok(())
}

#[derive(Serialize)]
struct MunkSummary {
    epsilon: f64,
    y_slice: f64,
    /// Centre of the x interval where both named balances score below 0.5.
    gap_center: Option<f64>,
    max_abs_residual: f64,
}

fn curve_csv(x: &[f64], score: &[f64]) -> String {
    let mut out = String::from("x,score\n");
    for (x, s) in x.iter().zip(score) {
        out.push_str(&format!("{x:?},{s:?}\n"));
    }
    out
}

fn munk(a: &MunkArgs, command_line: Vec<String>) -> Result<()> {
    let output = gen_munk(&MunkConfig { epsilon: a.epsilon, nx: a.nx, ny: a.ny, y_slice: a.y_slice })?;
    let mut out = Output::new("gen munk", a, &a.common, command_line)?;
    let ds = &output.dataset;
    out.dataset("munk", ds, a.format)?;
    let curves = &output.curves;
    out.text("munk_western_boundary.csv", &curve_csv(&curves.x, &curves.western_boundary))?;
    out.text("munk_sverdrup.csv", &curve_csv(&curves.x, &curves.sverdrup))?;
    let mut residual = String::from("x,y,residual\n");
    for (i, r) in output.residual.iter().enumerate() {
        let c = ds.coord(i).unwrap_or(&[]);
        residual.push_str(&format!("{:?},{:?},{r:?}\n", c[0], c[1]));
    }
    out.text("munk_residual.csv", &residual)?;
    let summary = MunkSummary {
        epsilon: a.epsilon,
        y_slice: a.y_slice,
        gap_center: curves.gap_center(0.5),
        max_abs_residual: output.residual.iter().fold(0.0, |m: f64, r| m.max(r.abs())),
    };
    out.json("munk_summary.json", &summary)?;
    out.finish()?;
    match summary.gap_center {
        Some(g) => report!(a.common, "both balances score below 0.5 around x = {g:.4}"),
        None => report!(a.common, "no gap between the two balances at y = {}", a.y_slice),
    }
    Ok(())
}

/// The `(n, c, f)` fields of a state as a three-column dataset.
fn state_dataset(s: &AngioState) -> Result<TermDataset> {
    let cells = s.n.len();
    let mut values = Vec::with_capacity(3 * cells);
    let mut coords = Vec::with_capacity(2 * cells);
    for i in 0..cells {
        values.extend_from_slice(&[s.n[i], s.c[i], s.f[i]]);
        let (x, y) = s.cell_center(i);
        coords.extend_from_slice(&[x, y]);
    }
    let h = s.h();
    Ok(TermDataset::new(values, 3, Some(vec![h * h; cells]))?
        .with_term_names(vec!["n".into(), "c".into(), "f".into()])?
        .with_coords(coords, vec!["x".into(), "y".into()])?)
}

#[derive(Serialize)]
struct AngioSummary {
    resolution: usize,
    t_end: f64,
    accepted_steps: usize,
    rejected_steps: usize,
    positivity_rejections: usize,
    clamped_values: usize,
    most_negative: f64,
    min_dt: f64,
    max_dt: f64,
    initial_total_cells: f64,
    final_total_cells: f64,
    relative_mass_change: f64,
    initial_center_of_mass_x: f64,
    final_center_of_mass_x: f64,
}

fn sim_angio(a: &SimAngioArgs, command_line: Vec<String>) -> Result<()> {
    let config = AngioConfig {
        resolution: a.resolution,
        t_end: a.t_end,
        noise_amp: a.noise,
        noise_ar: a.noise_ar,
        seed: a.common.seed,
        snapshot_times: a.snapshots.clone(),
        tol: a.tol,
        ..AngioConfig::default()
    };
    let run = simulate_angiogenesis(&config)?;
    let mut out = Output::new("sim-angio", a, &a.common, command_line)?;
    let name = out.dataset("angio", &run.terms, a.format)?;
    for s in &run.snapshots {
        out.dataset(&format!("state_t{:.4}", s.t), &state_dataset(s)?, a.format)?;
    }
    out.dataset("state_final", &state_dataset(&run.final_state)?, a.format)?;
    let (m0, m1) = (run.initial.total_cells(), run.final_state.total_cells());
    let st = run.stats;
    out.json(
        "angio_stats.json",
        &AngioSummary {
            resolution: a.resolution,
            t_end: run.final_state.t,
            accepted_steps: st.accepted_steps,
            rejected_steps: st.rejected_steps,
            positivity_rejections: st.positivity_rejections,
            clamped_values: st.clamped_values,
            most_negative: st.most_negative,
            min_dt: st.min_dt,
            max_dt: st.max_dt,
            initial_total_cells: m0,
            final_total_cells: m1,
            relative_mass_change: (m1 - m0) / m0,
            initial_center_of_mass_x: run.initial.center_of_mass_x(),
            final_center_of_mass_x: run.final_state.center_of_mass_x(),
        },
    )?;
    out.finish()?;
    report!(a.common, 
        "integrated to t = {} in {} steps ({} rejected); wrote {}",
        run.final_state.t,
        st.accepted_steps,
        st.rejected_steps,
        a.common.out.join(name).display()
    );
    Ok(())
}

fn load(path: &Path, area_weights: bool) -> Result<TermDataset> {
    let ds = load_dataset(path)?;
    if !area_weights {
        return Ok(ds);
    }
    let (Some(x), Some(y)) = (ds.coord_column("x"), ds.coord_column("y")) else {
        return Err(CliError::Argument(format!("{}: area weights need x and y columns", path.display())));
    };
    let coords: Vec<f64> = x.iter().zip(&y).flat_map(|(x, y)| [*x, *y]).collect();
    let weights = compute_area_weights(&coords)?;
    Ok(ds.with_weights(weights)?)
}

fn selector_config(s: &SelectorArgs, alpha: f64) -> SelectorConfig {
    let base = match s.selector {
        SelectorArg::Chs => SelectorConfig::chs(),
        SelectorArg::Spca => SelectorConfig::sparse_pca(alpha),
    };
    SelectorConfig {
        representative: s.representative.into(),
        spca_normalize: s.spca_normalize,
        chs_ceiling: s.chs_ceiling,
        ..base
    }
}

fn format_alpha(alpha: Option<f64>) -> String {
    alpha.map_or_else(|| "-".into(), |a| format!("{a:.4e}"))
}

fn fit(a: &FitArgs, command_line: Vec<String>) -> Result<()> {
    let ds = load(&a.data, a.selection.area_weights)?;
    let selector = selector_config(&a.selection, a.alpha.0[0]);
    let mut grid = SweepGrid::new(a.clusterer.into(), a.k.0.clone(), selector).with_seed(a.common.seed);
    if selector.kind == SelectorKind::SparsePca {
        grid = grid.with_alphas(a.alpha.0.clone());
    }
    grid.covariance = a.covariance.into();
    grid.degenerate_policy = a.selection.degenerate.into();
    grid.standardize = !a.no_standardize;
    grid.n_init = a.n_init;
    grid.max_iter = a.max_iter;
    grid.tol = a.tol;

    let pool = thread_pool(a.common.threads)?;
    let result = run_sweep_parallel(&ds, grid, &pool)?;
    let summary = FitSummary::new(&result, &ds);

    let mut out = Output::new("fit", a, &a.common, command_line)?;
    out.input(&a.data)?;
    out.text("grid.csv", &grid_csv(&result))?;
    out.json("summary.json", &summary)?;
    out.text("labels.csv", &labels_csv(&ds, &result.best_assignment.labels, &result.hypotheses))?;
    out.finish()?;

    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    for f in &summary.failures {
        eprintln!("warning: grid point k = {}, alpha = {} failed: {}", f.k, format_alpha(f.alpha), f.error);
    }
    report!(a.common, 
        "best k = {}, alpha = {}: global score {:.6} (full set {:.6})",
        summary.best_point.k,
        format_alpha(summary.best_point.alpha),
        summary.best_grid_score,
        summary.full_set_score
    );
    if summary.fell_back {
        report!(a.common, "no grid point beats the full set; reporting the all-terms balance everywhere");
    }
    for c in &summary.clusters {
        report!(a.common, "  cluster {:>3}  {:>8} rows  {}  [{}]  {:.6}", c.id, c.size, c.mask, c.names.join(", "), c.cluster_score);
    }
    Ok(())
}

fn score(a: &ScoreArgs, command_line: Vec<String>) -> Result<()> {
    let ds = load(&a.data, a.selection.area_weights)?;
    let policy: DegeneratePolicy = a.selection.degenerate.into();
    let mut inputs = vec![a.data.clone()];
    let (hypotheses, clusters): (Vec<Hypothesis>, Vec<ClusterSummary>) = match &a.source {
        HypothesisSource { masks: Some(path), .. } => {
            inputs.push(path.clone());
            (read_masks(path, &ds)?, Vec::new())
        }
        HypothesisSource { labels: Some(path), .. } => {
            inputs.push(path.clone());
            let labels = read_labels(path, ds.n_rows())?;
            let outcome = evaluate_labeling(&ds, &labels, &selector_config(&a.selection, a.alpha), policy)?;
            let clusters = outcome.clusters.iter().map(|c| ClusterSummary::new(c, ds.term_names())).collect();
            (outcome.hypotheses, clusters)
        }
        HypothesisSource { balance: Some(spec), .. } => (vec![parse_balance(spec, &ds)?; ds.n_rows()], Vec::new()),
        _ => return Err(CliError::Argument("give one of --masks, --labels or --balance".into())),
    };
    let report = global_score(&ds, &hypotheses, policy)?;
    let summary = ScoreSummary {
        global_score: report.global_score,
        full_set_score: report.full_set_score,
        observations: ds.n_rows(),
        degenerate_observations: ds.degenerate_mask().iter().filter(|b| **b).count(),
        clusters,
    };

    let mut out = Output::new("score", a, &a.common, command_line)?;
    for path in &inputs {
        out.input(path)?;
    }
    out.text("local_scores.csv", &local_scores_csv(&ds, &report, &hypotheses))?;
    out.json("score_summary.json", &summary)?;
    out.finish()?;
    report!(a.common, "global score {:.6} (full set {:.6})", summary.global_score, summary.full_set_score);
    Ok(())
}

#[derive(Serialize)]
struct BenchSummary<'a> {
    family: BenchFamily,
    rows: &'a [BenchRow],
    /// Log-log slope of time against the varied size.
    loglog_slope: Option<f64>,
    /// Time at the largest size over time at the smallest.
    last_over_first: f64,
}

fn bench(a: &BenchArgs, command_line: Vec<String>) -> Result<()> {
    let sizes = if a.sizes.is_empty() {
        match a.family {
            BenchFamily::ChsTerms => vec![6, 8, 10],
            BenchFamily::SpcaSamples => vec![1024, 2048, 4096, 8192],
        }
    } else {
        a.sizes.clone()
    };
    let config = BenchConfig {
        family: a.family,
        sizes,
        repeats: a.repeats,
        n: a.n,
        d: a.d,
        k: a.k,
        alpha: a.alpha,
        seed: a.common.seed,
    };
    let rows = run_benchmark(&config)?;
    let varied: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| match a.family {
            BenchFamily::ChsTerms => (r.d as f64, r.seconds),
            BenchFamily::SpcaSamples => (r.n as f64, r.seconds),
        })
        .collect();
    let summary = BenchSummary {
        family: a.family,
        rows: &rows,
        loglog_slope: loglog_slope(&varied),
        last_over_first: rows.last().map_or(1.0, |r| r.t_over_t0),
    };

    let mut out = Output::new("bench", a, &a.common, command_line)?;
    out.text("bench.csv", &bench_csv(&rows))?;
    out.json("bench_summary.json", &summary)?;
    out.finish()?;
    for r in &rows {
        report!(a.common, "n = {:>7}  d = {:>2}  {:.4} s  x{:.2}", r.n, r.d, r.seconds, r.t_over_t0);
    }
    Ok(())
}
