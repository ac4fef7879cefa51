//! Subcommand execution.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use mli_dm::link_sim::ber_vs_angle;
use mli_dm::metrics::{rate_at, ssr_vs_snr};
use mli_dm::scenario::TrialDesigner;
use mli_dm::Execution;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig};
use crate::output;
use crate::validate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Design,
    BerSweep,
    SsrSweep,
    Validate,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Design => "design",
            Command::BerSweep => "ber-sweep",
            Command::SsrSweep => "ssr-sweep",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] mli_dm::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{0} validation check(s) failed")]
    Validation(usize),
}

impl RunError {
    /// 0 success, 1 validation failure or I/O error, 2 configuration error.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Core(mli_dm::Error::Config(_)) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub quiet: bool,
    pub plot: bool,
    pub exec: Execution,
}

/// Writes `path` through `body`, mapping failures to [`RunError::Io`].
fn write_file<F>(path: &Path, body: F) -> Result<(), RunError>
where
    F: FnOnce(&mut BufWriter<File>) -> io::Result<()>,
{
    let io_err = |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    body(&mut w).and_then(|_| w.flush()).map_err(io_err)
}

fn prepare_out(dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// Runs one subcommand. Summary lines go to `log` unless `quiet`.
pub fn run<L: Write>(
    command: Command,
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    log: &mut L,
) -> Result<Vec<PathBuf>, RunError> {
    let mut say = |line: String| {
        if !opts.quiet {
            let _ = writeln!(log, "{line}");
        }
    };
    match command {
        Command::Validate => {
            let checks = validate::run_all(cfg);
            let failures = checks.iter().filter(|c| !c.passed).count();
            for c in &checks {
                say(c.to_string());
            }
            if failures > 0 {
                return Err(RunError::Validation(failures));
            }
            Ok(Vec::new())
        }
        Command::BerSweep => {
            let sweep = cfg.ber_sweep()?;
            let angles = cfg.angle_grid_deg.values("angle_grid_deg")?;
            let points = ber_vs_angle(&sweep, opts.exec)?;
            prepare_out(&opts.out_dir)?;
            let path = opts.out_dir.join("ber_vs_angle.csv");
            write_file(&path, |w| output::write_ber_csv(w, cfg, &angles, &points))?;
            let mut files = vec![path];
            if opts.plot {
                let script = opts.out_dir.join("plot_ber_vs_angle.py");
                write_file(&script, |w| w.write_all(output::BER_PLOT_SCRIPT.as_bytes()))?;
                files.push(script);
            }
            say(format!(
                "ber-sweep: {} angles x {} users x {} methods at {} dB, {} trials",
                angles.len(),
                sweep.scenario.users(),
                sweep.methods.len(),
                sweep.snr_db,
                sweep.trials
            ));
            for f in &files {
                say(format!("wrote {}", f.display()));
            }
            Ok(files)
        }
        Command::SsrSweep => {
            let sweep = cfg.ssr_sweep()?;
            let points = ssr_vs_snr(&sweep, opts.exec)?;
            prepare_out(&opts.out_dir)?;
            let path = opts.out_dir.join("ssr_vs_snr.csv");
            write_file(&path, |w| output::write_ssr_csv(w, cfg, &points))?;
            let mut files = vec![path];
            if opts.plot {
                let script = opts.out_dir.join("plot_ssr_vs_snr.py");
                write_file(&script, |w| w.write_all(output::SSR_PLOT_SCRIPT.as_bytes()))?;
                files.push(script);
            }
            let last = sweep.snr_db.last().copied().unwrap_or_default();
            for p in points.iter().filter(|p| p.snr_db == last) {
                say(format!("ssr-sweep: {} at {} dB = {:.3} bits/s/Hz", p.method, p.snr_db, p.ssr));
            }
            for f in &files {
                say(format!("wrote {}", f.display()));
            }
            Ok(files)
        }
        Command::Design => {
            let sc = cfg.scenario()?;
            let snr = cfg.ber_snr_db()?;
            let power = sc.power()?;
            let noise = sc.noise_for_snr(snr)?;
            let sigma_sq = noise.sigma_dk_sq[0];
            // the configured directions are taken as the measured ones
            let designer = TrialDesigner::new(&sc.geom, cfg.regime(), sc.desired.clone(), sc.eaves.clone(), &cfg.methods)?;
            let mut designs = Vec::with_capacity(cfg.methods.len());
            for &m in &cfg.methods {
                let d = designer.design(m, &power, &noise)?;
                for (k, &theta) in sc.desired.iter().enumerate() {
                    let gain = sc.geom.steering_vector(theta)?.dotc(&d.v()[k]).norm_sqr();
                    let rate = rate_at(&sc.geom, theta, k, &d, sigma_sq)?;
                    say(format!(
                        "design: {m} user {} at {} deg: |h^H v|^2 = {gain:.4}, rate = {rate:.3} bits/s/Hz",
                        k + 1,
                        cfg.desired_angles_deg[k]
                    ));
                }
                designs.push((m, d));
            }
            prepare_out(&opts.out_dir)?;
            let path = opts.out_dir.join("design.json");
            write_file(&path, |w| output::write_design_json(w, cfg, snr, &designs))?;
            say(format!("wrote {}", path.display()));
            Ok(vec![path])
        }
    }
}
