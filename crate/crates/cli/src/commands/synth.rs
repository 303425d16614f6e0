use ckd::data::{save_dataset, synth};

use crate::args::{fill, read_config, required, Overlay, SynthCmd, SynthFile};
use crate::error::CliError;

pub fn run(mut cmd: SynthCmd) -> Result<(), CliError> {
    let file: SynthFile = read_config(cmd.config.as_deref())?;
    fill(&mut cmd.out, file.out);
    cmd.synth.overlay(file.synth);
    let out = required(cmd.out, "out")?;
    let spec = cmd.synth.spec();
    spec.validate()?;

    let mut ds = synth(&spec)?;
    ds.name = Some("synthetic".into());
    let manifest = save_dataset(&ds, &out)?;
    println!(
        "wrote {}: n={} d1={} d2={} classes={} train={} query={}",
        manifest.display(),
        ds.n(),
        ds.x1.ncols(),
        ds.x2.ncols(),
        ds.y.classes(),
        ds.split.train.len(),
        ds.split.query.len()
    );
    Ok(())
}
