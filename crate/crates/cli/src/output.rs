//! CSV, JSON and plot-script emission.

use std::io::{self, Write};

use mli_dm::link_sim::BerPoint;
use mli_dm::metrics::SsrPoint;
use mli_dm::{BeamformerDesign, Method};
use serde::Serialize;

use crate::config::ExperimentConfig;

pub const BER_HEADER: &str = "angle_deg,user,method,ber,trials,symbols";
pub const SSR_HEADER: &str = "snr_db,method,ssr_bits_per_hz,trials";

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `# mli-dm <version> command=<cmd> config_sha256=<hex> seed=<seed> ...`
pub fn provenance_line(command: &str, cfg: &ExperimentConfig) -> String {
    format!(
        "# mli-dm {VERSION} command={command} config_sha256={} seed={} regime={}",
        cfg.sha256_hex(),
        cfg.seed,
        cfg.regime().as_str()
    )
}

/// One row per (angle, user, method); users are numbered from 1 and
/// `symbols` is the per-trial count.
pub fn write_ber_csv<W: Write>(
    mut w: W,
    cfg: &ExperimentConfig,
    angles_deg: &[f64],
    points: &[BerPoint],
) -> io::Result<()> {
    writeln!(w, "{}", provenance_line("ber-sweep", cfg))?;
    writeln!(w, "{BER_HEADER}")?;
    let per_angle = points.len() / angles_deg.len().max(1);
    for (i, p) in points.iter().enumerate() {
        let angle = angles_deg[i / per_angle.max(1)];
        writeln!(
            w,
            "{},{},{},{},{},{}",
            angle,
            p.user + 1,
            p.method,
            p.ber(),
            cfg.trials,
            cfg.symbols_per_trial
        )?;
    }
    Ok(())
}

pub fn write_ssr_csv<W: Write>(mut w: W, cfg: &ExperimentConfig, points: &[SsrPoint]) -> io::Result<()> {
    writeln!(w, "{}", provenance_line("ssr-sweep", cfg))?;
    writeln!(w, "{SSR_HEADER}")?;
    for p in points {
        writeln!(w, "{},{},{},{}", p.snr_db, p.method, p.ssr, p.trials)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct PowerJson {
    ps: f64,
    beta1_sq: f64,
    beta2_sq: f64,
    alpha1_sq: f64,
    alpha2_sq: f64,
}

/// Complex entries are `[re, im]` pairs; `t_an` is row-major.
#[derive(Debug, Serialize)]
struct DesignJson {
    method: String,
    regime: String,
    n_elements: usize,
    users: usize,
    power: PowerJson,
    v: Vec<Vec<[f64; 2]>>,
    t_an: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Serialize)]
struct DesignFile<'a> {
    tool: String,
    config_sha256: String,
    config: &'a ExperimentConfig,
    snr_db: f64,
    designs: Vec<DesignJson>,
}

pub fn write_design_json<W: Write>(
    w: W,
    cfg: &ExperimentConfig,
    snr_db: f64,
    designs: &[(Method, BeamformerDesign)],
) -> io::Result<()> {
    let designs = designs
        .iter()
        .map(|(m, d)| {
            let p = d.power();
            DesignJson {
                method: m.to_string(),
                regime: d.regime().as_str().to_string(),
                n_elements: d.n_elements(),
                users: d.users(),
                power: PowerJson {
                    ps: p.ps,
                    beta1_sq: p.beta1_sq,
                    beta2_sq: p.beta2_sq,
                    alpha1_sq: p.alpha1_sq,
                    alpha2_sq: p.alpha2_sq,
                },
                v: d.v().iter().map(|v| v.iter().map(|z| [z.re, z.im]).collect()).collect(),
                t_an: d
                    .t_an()
                    .row_iter()
                    .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
                    .collect(),
            }
        })
        .collect();
    let file = DesignFile {
        tool: format!("mli-dm {VERSION}"),
        config_sha256: cfg.sha256_hex(),
        config: cfg,
        snr_db,
        designs,
    };
    let mut w = w;
    serde_json::to_writer_pretty(&mut w, &file)?;
    writeln!(w)
}

pub const BER_PLOT_SCRIPT: &str = r##"import sys
import pandas as pd
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "ber_vs_angle.csv"
df = pd.read_csv(path, comment="#")
users = sorted(df.user.unique())
fig, axes = plt.subplots(1, len(users), figsize=(6 * len(users), 4), squeeze=False)
for ax, user in zip(axes[0], users):
    for method, g in df[df.user == user].groupby("method"):
        ax.semilogy(g.angle_deg, g.ber.clip(lower=1e-6), label=method)
    ax.set_title(f"user {user}")
    ax.set_xlabel("direction angle (deg)")
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
fig.tight_layout()
fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
"##;

pub const SSR_PLOT_SCRIPT: &str = r##"import sys
import pandas as pd
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "ssr_vs_snr.csv"
df = pd.read_csv(path, comment="#")
fig, ax = plt.subplots(figsize=(6, 4))
for method, g in df.groupby("method"):
    ax.plot(g.snr_db, g.ssr_bits_per_hz, marker="o", label=method)
ax.set_xlabel("SNR (dB)")
ax.set_ylabel("secrecy sum-rate (bits/s/Hz)")
ax.grid(True, alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
"##;
