use std::time::Instant;

use ckd::baselines::fit_cca;
use ckd::data::{load_dataset, Dataset};
use ckd::eval::{evaluate_split, Similarity, Task};
use ckd::solver::{fit, Method, SolverConfig};
use ckd::CkdError;
use rayon::prelude::*;

use crate::args::{fill, read_config, required, AblateCmd, AblateFile, MethodArg, Overlay};
use crate::commands::{millis, write_file};
use crate::error::CliError;

pub const HEADER: [&str; 10] =
    ["method", "alpha1", "alpha2", "d", "map_i2t", "map_t2i", "avg", "converged", "wall_ms", "error"];

#[derive(Debug, Clone, Copy)]
struct Cell {
    method: Method,
    cfg: SolverConfig,
}

struct Scores {
    i2t: f64,
    t2i: f64,
    converged: Option<bool>,
}

struct Context<'a> {
    ds: &'a Dataset,
    ridge: f64,
    depth: Option<usize>,
    ms: &'a [usize],
    kind: Similarity,
}

fn run_cell(cell: &Cell, ctx: &Context) -> Result<Scores, CkdError> {
    let train = ctx.ds.train();
    let query = ctx.ds.query();
    let score = |project: &dyn Fn(&ckd::Matrix, ckd::solver::Modality) -> ckd::Result<ckd::Matrix>| {
        let map = |task| {
            evaluate_split(task, project, &query, &train, ctx.depth, ctx.ms, ctx.kind).map(|r| r.map)
        };
        Ok::<_, CkdError>((map(Task::I2T)?, map(Task::T2I)?))
    };
    if cell.method == Method::Cca {
        let model = fit_cca(&train.x1, &train.x2, cell.cfg.d, ctx.ridge)?;
        let (i2t, t2i) = score(&|x, m| model.project(x, m))?;
        return Ok(Scores { i2t, t2i, converged: None });
    }
    let (params, log) = fit(&train.x1, &train.x2, &train.y, &cell.cfg)?;
    let (i2t, t2i) = score(&|x, m| params.project(x, m))?;
    Ok(Scores { i2t, t2i, converged: Some(log.converged) })
}

fn cells(cmd: &AblateCmd, base: SolverConfig) -> Vec<Cell> {
    let grid = cmd.alpha1_grid.is_some() || cmd.alpha2_grid.is_some() || cmd.d_grid.is_some();
    let methods: Vec<MethodArg> = match &cmd.methods {
        Some(m) => m.clone(),
        None if grid => Vec::new(),
        None => vec![MethodArg::Ckd, MethodArg::CkdBeta0, MethodArg::Kdm, MethodArg::Cca],
    };
    let mut out: Vec<Cell> = methods
        .into_iter()
        .map(|m| {
            let method = Method::from(m);
            Cell { method, cfg: base.for_method(method) }
        })
        .collect();
    if grid {
        let a1 = cmd.alpha1_grid.clone().unwrap_or_else(|| vec![base.alpha1]);
        let a2 = cmd.alpha2_grid.clone().unwrap_or_else(|| vec![base.alpha2]);
        let ds = cmd.d_grid.clone().unwrap_or_else(|| vec![base.d]);
        for &alpha1 in &a1 {
            for &alpha2 in &a2 {
                for &d in &ds {
                    let cfg = SolverConfig { alpha1, alpha2, d, ..base };
                    out.push(Cell { method: ckd::solver::method_for(&cfg), cfg });
                }
            }
        }
    }
    out
}

pub fn run(mut cmd: AblateCmd) -> Result<(), CliError> {
    let file: AblateFile = read_config(cmd.config.as_deref())?;
    fill(&mut cmd.data, file.data);
    fill(&mut cmd.out, file.out);
    fill(&mut cmd.methods, file.methods);
    fill(&mut cmd.alpha1_grid, file.alpha1_grid);
    fill(&mut cmd.alpha2_grid, file.alpha2_grid);
    fill(&mut cmd.d_grid, file.d_grid);
    cmd.solver.overlay(file.solver);
    cmd.eval.overlay(file.eval);
    if cmd.solver.method.is_some() {
        return Err(CliError::Usage("ablate takes --methods, not --method".into()));
    }
    let data = required(cmd.data.clone(), "data")?;
    let out = required(cmd.out.clone(), "out")?;
    let depth = cmd.eval.depth()?;
    let ms = cmd.eval.cmc_depths()?;
    let base = cmd.solver.solver_config();

    let ds = load_dataset(&data)?;
    if ds.split.query.is_empty() {
        return Err(CkdError::Data("query split is empty".into()).into());
    }
    let ctx = Context { ds: &ds, ridge: cmd.solver.ridge(), depth, ms: &ms, kind: cmd.eval.similarity() };
    let cells = cells(&cmd, base);
    // par_iter keeps input order on collect
    let results: Vec<(Result<Scores, CkdError>, f64)> = cells
        .par_iter()
        .map(|cell| {
            let t = Instant::now();
            let r = run_cell(cell, &ctx);
            (r, millis(t.elapsed()))
        })
        .collect();

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(HEADER).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut failures = 0;
    for (cell, (result, wall)) in cells.iter().zip(&results) {
        let (alpha1, alpha2) = if cell.method == Method::Cca {
            (String::new(), String::new())
        } else {
            (cell.cfg.alpha1.to_string(), cell.cfg.alpha2.to_string())
        };
        let mut row = vec![cell.method.to_string(), alpha1, alpha2, cell.cfg.d.to_string()];
        match result {
            Ok(s) => {
                row.extend([
                    s.i2t.to_string(),
                    s.t2i.to_string(),
                    ((s.i2t + s.t2i) / 2.0).to_string(),
                    s.converged.map(|c| c.to_string()).unwrap_or_default(),
                    format!("{wall:.3}"),
                    String::new(),
                ]);
                println!("{:<12} d={:<3} avg MAP {:.4}", cell.method.to_string(), cell.cfg.d, (s.i2t + s.t2i) / 2.0);
            }
            Err(e) => {
                failures += 1;
                row.extend([String::new(), String::new(), String::new(), String::new(), format!("{wall:.3}"), e.to_string()]);
                eprintln!("{:<12} d={:<3} failed: {e}", cell.method.to_string(), cell.cfg.d);
            }
        }
        writer.write_record(&row).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    write_file(&out, bytes)?;
    println!("wrote {} rows to {} ({failures} failed)", cells.len(), out.display());
    Ok(())
}
