//! Implementations of the non-eval subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use mkpls::datasets::{load_manifest, synth_generate, write_dataset, SynthConfig, VisualUnit};
use mkpls::features::LbpConfig;
use mkpls::kernels::{gram_matrix, KernelSpec};
use mkpls::manifold::{diff_parameterization, fit_parameterization, BasisConfig};
use rayon::prelude::*;

use crate::experiment::obtain_params;
use crate::{CliError, CliResult};

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

/// Generate a synthetic dataset on disk; idempotent per seed.
pub fn cmd_synth(config: &SynthConfig, out: &Path) -> CliResult<PathBuf> {
    config
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let units = synth_generate(config)?;
    create_dir(out)?;
    Ok(write_dataset(&units, out)?)
}

/// Extract LBP features for every unit of a PGM-backed manifest and write
/// the dataset back in feature-CSV form.
pub fn cmd_features(manifest: &Path, lbp: &LbpConfig, out: &Path) -> CliResult<PathBuf> {
    lbp.validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let units = load_manifest(manifest, Some(lbp))?;
    create_dir(out)?;
    Ok(write_dataset(&units, out)?)
}

/// Fit one parameterization per unit and store each as a binary container
/// (`<id>.param`, or `<id>.diffparam` with `--diff`). Returns one log line
/// per unit with the fitted shape.
pub fn cmd_param(
    units: &[VisualUnit],
    basis: &BasisConfig,
    diff: bool,
    out: &Path,
) -> CliResult<Vec<String>> {
    create_dir(out)?;
    units
        .par_iter()
        .map(|u| {
            let c = if diff {
                diff_parameterization(&u.features, basis)?
            } else {
                fit_parameterization(&u.features, basis)?
            };
            let name = if diff {
                format!("{}.diffparam", u.id)
            } else {
                format!("{}.param", u.id)
            };
            c.write_binary(&out.join(&name))?;
            Ok(format!(
                "{}: {} ({}x{})",
                u.id,
                name,
                c.dim(),
                c.basis_count()
            ))
        })
        .collect::<mkpls::Result<Vec<String>>>()
        .map_err(CliError::from)
}

/// Emit the parameterization of one unit over a (lambda, n) grid as CSV
/// blocks (D rows of n values each), for external plotting of the
/// smoothness trade-off.
pub fn cmd_inspect_param(
    units: &[VisualUnit],
    unit_id: &str,
    lambdas: &[f64],
    ns: &[usize],
) -> CliResult<String> {
    let unit = units.iter().find(|u| u.id == unit_id).ok_or_else(|| {
        CliError::Data(mkpls::Error::InvalidInput(format!(
            "no unit with id {unit_id:?}"
        )))
    })?;
    if lambdas.is_empty() || ns.is_empty() {
        return Err(CliError::Config(
            "lambda and n grids must be nonempty".into(),
        ));
    }
    let mut out = String::new();
    for &lambda in lambdas {
        for &n in ns {
            let basis = BasisConfig::with(n, lambda, None, None)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let c = fit_parameterization(&unit.features, &basis)?;
            out.push_str(&format!("# lambda={lambda} n={n}\n"));
            for i in 0..c.dim() {
                let row: Vec<String> = c.matrix().row(i).iter().map(|v| format!("{v}")).collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
    }
    Ok(out)
}

/// Build the Gram matrix of a whole dataset (unit order = manifest order)
/// from precomputed parameterizations and write the binary container,
/// optionally with a CSV copy. Returns the resolved omega, if any.
pub fn cmd_gram(
    units: &[VisualUnit],
    params_dir: &Path,
    spec: &KernelSpec,
    basis: &BasisConfig,
    out: &Path,
    csv: bool,
) -> CliResult<Option<f64>> {
    let params = obtain_params(units, basis, spec.kind.needs_diff(), Some(params_dir))?;
    let gram = gram_matrix(&params, spec)?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            create_dir(parent)?;
        }
    }
    gram.write_binary(out)?;
    if csv {
        let mut csv_path = out.as_os_str().to_owned();
        csv_path.push(".csv");
        gram.write_csv(Path::new(&csv_path))?;
    }
    Ok(gram.omega())
}
