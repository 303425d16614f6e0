use std::path::{Path, PathBuf};
use std::time::Instant;

use ckd::baselines::fit_cca;
use ckd::data::load_dataset;
use ckd::model_io::SavedModel;
use ckd::solver::{fit, Method};

use crate::args::{fill, read_config, required, Overlay, TrainCmd, TrainFile};
use crate::commands::{millis, write_file};
use crate::error::CliError;

fn default_trace_path(model: &Path) -> PathBuf {
    model.with_extension("trace.csv")
}

pub fn run(mut cmd: TrainCmd) -> Result<(), CliError> {
    let file: TrainFile = read_config(cmd.config.as_deref())?;
    fill(&mut cmd.data, file.data);
    fill(&mut cmd.model, file.model);
    fill(&mut cmd.trace, file.trace);
    cmd.solver.overlay(file.solver);
    let data = required(cmd.data, "data")?;
    let model_path = required(cmd.model, "model")?;
    let method = cmd.solver.method();
    let cfg = cmd.solver.solver_config();
    cfg.validate(usize::MAX, usize::MAX)?;

    let ds = load_dataset(&data)?;
    let train = ds.train();
    let start = Instant::now();
    if method == Method::Cca {
        let model = fit_cca(&train.x1, &train.x2, cfg.d, cmd.solver.ridge())?;
        let first = model.correlations.first().copied().unwrap_or(0.0);
        SavedModel::Cca(model).save(&model_path)?;
        println!(
            "CCA on {} samples, d={}, leading correlation {first:.6}, {:.1} ms",
            train.y.n(),
            cfg.d,
            millis(start.elapsed())
        );
        return Ok(());
    }

    let (params, log) = fit(&train.x1, &train.x2, &train.y, &cfg)?;
    let elapsed = start.elapsed();
    let trace_path = cmd.trace.unwrap_or_else(|| default_trace_path(&model_path));
    let method = params.method;
    SavedModel::Ckd(params).save(&model_path)?;
    write_file(&trace_path, log.to_csv())?;

    let iterations = log.records.len() - 1;
    let last = log.records.last().expect("trace has the initial record");
    println!(
        "{method} on {} samples, d={}: {} after {iterations} iterations, objective {:.6e}, {:.1} ms",
        train.y.n(),
        cfg.d,
        if log.converged { "converged" } else { "stopped" },
        last.terms.total,
        millis(elapsed)
    );
    if log.converged {
        Ok(())
    } else {
        Err(CliError::NotConverged { iterations })
    }
}
