use std::collections::BTreeMap;
use std::time::Instant;

use ckd::data::load_dataset;
use ckd::eval::evaluate_split;
use ckd::model_io::SavedModel;
use serde::Serialize;

use crate::args::{fill, read_config, required, EvalCmd, EvalFile, Overlay};
use crate::commands::{millis, write_file};
use crate::error::CliError;

#[derive(Serialize)]
struct Timings {
    schema_version: u32,
    load_ms: f64,
    task_ms: BTreeMap<&'static str, f64>,
}

pub fn run(mut cmd: EvalCmd) -> Result<(), CliError> {
    let file: EvalFile = read_config(cmd.config.as_deref())?;
    fill(&mut cmd.model, file.model);
    fill(&mut cmd.data, file.data);
    fill(&mut cmd.out, file.out);
    cmd.eval.overlay(file.eval);
    let model_path = required(cmd.model, "model")?;
    let data = required(cmd.data, "data")?;
    let out = required(cmd.out, "out")?;
    let depth = cmd.eval.depth()?;
    let ms = cmd.eval.cmc_depths()?;
    let kind = cmd.eval.similarity();

    let start = Instant::now();
    let model = SavedModel::load(&model_path)?;
    let ds = load_dataset(&data)?;
    let (train, query) = (ds.train(), ds.query());
    let load_ms = millis(start.elapsed());

    let mut task_ms = BTreeMap::new();
    for task in cmd.eval.tasks() {
        let t = Instant::now();
        let report = evaluate_split(task, |x, m| model.project(x, m), &query, &train, depth, &ms, kind)?;
        task_ms.insert(task.as_str(), millis(t.elapsed()));
        let tag = task.as_str().to_ascii_lowercase();
        write_file(&out.join(format!("report_{tag}.json")), report.to_json() + "\n")?;
        write_file(&out.join(format!("cmc_{tag}.csv")), report.cmc_csv())?;
        print!("{}", report.to_text());
    }
    let timings = Timings { schema_version: ckd::eval::REPORT_SCHEMA_VERSION, load_ms, task_ms };
    let json = serde_json::to_string_pretty(&timings).expect("timings serialize") + "\n";
    write_file(&out.join("timings.json"), json)?;
    Ok(())
}
