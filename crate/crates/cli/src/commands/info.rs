use std::fs;

use ckd::data::load_dataset;
use ckd::model_io::{SavedModel, MAGIC};
use ckd::solver::Modality;
use ckd::CkdError;

use crate::args::InfoCmd;
use crate::error::CliError;

pub fn run(cmd: InfoCmd) -> Result<(), CliError> {
    let bytes = fs::read(&cmd.path).map_err(|e| CkdError::Io { path: cmd.path.clone(), source: e })?;
    if bytes.starts_with(MAGIC) {
        let model = SavedModel::from_bytes(&bytes)?;
        let (d1, d2, d) = model.dims();
        println!("model       {}", cmd.path.display());
        println!("method      {}", model.method());
        println!("dims        d1={d1} d2={d2} d={d}");
        match &model {
            SavedModel::Ckd(p) => {
                let c = &p.config;
                println!("alpha       {} {}", c.alpha1, c.alpha2);
                println!("lambda      {} {}", c.lambda1, c.lambda2);
                println!("beta        {}", c.beta);
                println!("max_iters   {}  rel_tol {}  eps {}", c.max_iters, c.rel_tol, c.row_norm_eps);
                println!("init        {:?} seed {}  aligned {}", c.init, c.seed, c.align);
                let zero_rows = |m| p.projection(m).row_iter().filter(|r| r.norm() < 1e-6).count();
                println!(
                    "near-zero rows  P1 {}/{d1}  P2 {}/{d2}",
                    zero_rows(Modality::First),
                    zero_rows(Modality::Second)
                );
            }
            SavedModel::Cca(b) => {
                println!("ridge       {}", b.ridge);
                let corr: Vec<String> = b.correlations.iter().map(|c| format!("{c:.4}")).collect();
                println!("correlations {}", corr.join(" "));
            }
        }
        return Ok(());
    }
    let ds = load_dataset(&cmd.path)?;
    let y = ds.y.matrix();
    let labels_per_row = y.row_iter().map(|r| r.sum()).sum::<f64>() / ds.n() as f64;
    println!("dataset     {}", ds.name.as_deref().unwrap_or("(unnamed)"));
    println!("samples     {}  train {}  query {}", ds.n(), ds.split.train.len(), ds.split.query.len());
    println!("dims        d1={} d2={}", ds.x1.ncols(), ds.x2.ncols());
    println!("classes     {}  mean labels per sample {labels_per_row:.3}", ds.y.classes());
    Ok(())
}
