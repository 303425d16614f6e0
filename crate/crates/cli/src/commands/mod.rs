use std::fs;
use std::path::Path;

use ckd::CkdError;

pub mod ablate;
pub mod eval;
pub mod info;
pub mod synth;
pub mod train;

pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CkdError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CkdError::Io { path: parent.to_path_buf(), source: e })?;
    }
    fs::write(path, contents).map_err(|e| CkdError::Io { path: path.to_path_buf(), source: e })
}

pub(crate) fn millis(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}
