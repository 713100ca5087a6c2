use std::fs::File;
use std::io::{BufWriter, Write};

use as_krylov::linop::{gen_sparse_spd, write_matrix_market_to};

use super::{diag_label, gen_params};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{timestamp_line, write_lines};

/// Writes `matrix_<label>.mtx` and a `matrix_<label>.toml` sidecar that can
/// be passed back through `--config`.
pub fn run(config: &ExperimentConfig) -> Result<(), CliError> {
    std::fs::create_dir_all(&config.output)?;
    for &diag in &config.diag {
        let params = gen_params(config, diag);
        let m = gen_sparse_spd(&params)?;
        let stem = format!("matrix_{}", diag_label(diag));
        let mtx = config.output.join(format!("{stem}.mtx"));
        let meta = [
            format!("n = {}", params.n),
            format!("density = {}", params.density),
            format!("diag = {}", params.diag),
            format!("seed = {}", params.seed),
        ];
        let mut w = BufWriter::new(File::create(&mtx)?);
        write_matrix_market_to(&m, &mut w, &meta)?;
        w.flush()?;
        let mut sidecar = vec![timestamp_line()];
        sidecar.extend(meta.iter().cloned());
        write_lines(&config.output.join(format!("{stem}.toml")), &sidecar)?;
        println!("{}: n = {}, nnz = {}", mtx.display(), m.n(), m.nnz());
    }
    Ok(())
}
