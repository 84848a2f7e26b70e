//! `cosrod` command line: analyze rods with defects into exportable
//! component models, verify them against the built-in FEM oracle, and
//! sweep defect parameters.
//!
//! Exit codes: 0 success, 2 configuration/usage errors, 3 solver or
//! model-validity errors. Diagnostics go to standard error; the log level
//! is controlled by `RUST_LOG` only.

mod config;

use clap::{Parser, Subcommand, ValueEnum};
use cosrod::{
    assemble_component, defect_stiffness, export_component, modal_estimate, rows_to_csv,
    Boundary, CaseSpec, ComponentModel, DefectProfile, ExportFormat, RodSpec,
};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use config::{ConfigFile, ResolveError, ResolvedConfig};

#[derive(Parser)]
#[command(name = "cosrod", version, about = "Beam components with manufacturing defects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the component model and write it as JSON, with a summary on
    /// standard output.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the mesh-ladder verification over the configured cases and
    /// write the CSV report (fit diagnostics go to `<out>.fits.json`).
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep one parameter of the first configured defect.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: SweepParam,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export the component model in a chosen format.
    Export {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepParam {
    /// Strip depth (micrometers).
    Depth,
    /// Axial extent (micrometers).
    Extent,
    /// Center position (micrometers).
    Position,
    /// Amplitude override (dimensionless).
    Gamma,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    MatrixText,
}

enum CliError {
    Config(String),
    Solver(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Solver(m) => m,
        }
    }
}

impl From<cosrod::Error> for CliError {
    fn from(e: cosrod::Error) -> Self {
        CliError::Solver(e.to_string())
    }
}

impl From<ResolveError> for CliError {
    fn from(e: ResolveError) -> Self {
        match e {
            ResolveError::Config(c) => CliError::Config(c.to_string()),
            ResolveError::Solver(s) => CliError::Solver(s.to_string()),
        }
    }
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    };
    std::process::exit(code);
}

struct LoadedConfig {
    resolved: ResolvedConfig,
    sha256: String,
}

fn load_config(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let parsed = ConfigFile::parse(&text)
        .map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))?;
    let resolved = parsed.resolve()?;
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let sha256 = hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect::<String>();
    for w in resolved.rod.warnings() {
        log::warn!("{w}");
    }
    Ok(LoadedConfig { resolved, sha256 })
}

fn provenance_header(sha256: &str) -> String {
    format!(
        "# cosrod {}\n# config sha256 {}\n# oracle: 1-D variable-section shear-deformable beam FEM, consistent mass\n",
        env!("CARGO_PKG_VERSION"),
        sha256
    )
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Solver(format!("cannot write {}: {e}", path.display())))
}

fn build_component(cfg: &ResolvedConfig) -> Result<ComponentModel, CliError> {
    let profiles: Vec<DefectProfile> = cfg.defects.iter().map(|(_, p)| p.clone()).collect();
    let mut component = assemble_component(&cfg.rod, &profiles)?;
    component.name = cfg.name.clone();
    for w in &component.warnings {
        log::warn!("{w}");
    }
    Ok(component)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze { config, out } => cmd_analyze(&config, &out),
        Command::Verify { config, out } => cmd_verify(&config, &out),
        Command::Sweep {
            config,
            param,
            from,
            to,
            steps,
            out,
        } => cmd_sweep(&config, param, from, to, steps, &out),
        Command::Export { config, format, out } => cmd_export(&config, format, &out),
    }
}

fn cmd_analyze(config: &Path, out: &Path) -> Result<(), CliError> {
    let loaded = load_config(config)?;
    let cfg = &loaded.resolved;
    let component = build_component(cfg)?;
    export_component(&component, out, ExportFormat::Json)?;

    let k = component.k_ideal();
    let delta = component.k_defect_delta();
    let max_diag = (0..12).map(|i| k[(i, i)]).fold(f64::NEG_INFINITY, f64::max);
    let min_diag = (0..12).map(|i| k[(i, i)]).fold(f64::INFINITY, f64::min);
    let mut modal = Vec::new();
    for case in &cfg.cases {
        let comp_case = assemble_component(&cfg.rod, &case.profiles)?;
        let est = modal_estimate(&comp_case, case.boundary, case.tip_mass_kg)?;
        modal.push(serde_json::json!({
            "case": case.name,
            "frequency_hz": est.frequency_hz,
            "method": "condensed-eigen",
        }));
    }
    let summary = serde_json::json!({
        "name": cfg.name,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "config_sha256": loaded.sha256,
        "component_path": out.display().to_string(),
        "stiffness_ideal_extremes": {
            "max_abs": k.amax(),
            "max_diagonal": max_diag,
            "min_diagonal": min_diag,
        },
        "defect_delta": {
            "frobenius": delta.norm(),
            "axial_entry_n_per_m": delta[(8, 8)],
        },
        "modal_estimates": modal,
        "warnings": component.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(())
}

fn cmd_verify(config: &Path, out: &Path) -> Result<(), CliError> {
    let loaded = load_config(config)?;
    let cfg = &loaded.resolved;
    if cfg.ladder.is_empty() {
        return Err(CliError::Config(
            "verify needs a [verify] section with an element ladder".into(),
        ));
    }
    if cfg.cases.is_empty() {
        return Err(CliError::Config("verify needs at least one [[case]]".into()));
    }
    let cases: Vec<CaseSpec> = cfg
        .cases
        .iter()
        .map(|c| CaseSpec {
            name: c.name.clone(),
            rod: cfg.rod.clone(),
            profiles: c.profiles.clone(),
            boundary: c.boundary,
            tip_mass_kg: c.tip_mass_kg,
            ladder: cfg.ladder.clone(),
        })
        .collect();
    let rows = cosrod::compare_cases(&cases)?;

    let csv = format!("{}{}", provenance_header(&loaded.sha256), rows_to_csv(&rows));
    write_text(out, &csv)?;

    let fits: Vec<serde_json::Value> = rows
        .iter()
        .map(|r| {
            serde_json::json!({
                "case": r.case,
                "f_infinity_hz": r.fit.f_infinity,
                "delta_hz_elements": r.fit.delta,
                "residual_rms_relative": r.fit.residual,
                "points": r.fit.points.iter()
                    .map(|p| serde_json::json!([p.n_elements, p.frequency_hz]))
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    let fit_doc = serde_json::json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "config_sha256": loaded.sha256,
        "oracle": "1-D variable-section shear-deformable beam FEM, consistent mass",
        "cases": fits,
    });
    let fits_path = out.with_extension("fits.json");
    write_text(
        &fits_path,
        &format!("{}\n", serde_json::to_string_pretty(&fit_doc).expect("fit doc serializes")),
    )?;
    Ok(())
}

fn sweep_profile(
    rod: &RodSpec,
    base: &config::DefectConfig,
    param: SweepParam,
    value: f64,
) -> Result<DefectProfile, CliError> {
    use config::DefectKindConfig as K;
    const UM: f64 = 1e-6;
    if base.kind == K::Jitter {
        return Err(CliError::Config(
            "sweep parameters apply to localized (nick/blob) defects".into(),
        ));
    }
    let depth0 = base
        .depth_um
        .ok_or_else(|| CliError::Config("sweep defect needs depth_um".into()))?;
    let pos0 = base
        .position_um
        .ok_or_else(|| CliError::Config("sweep defect needs position_um".into()))?;
    // The extent stays pinned at its configured value during depth sweeps
    // so depth -> 0 remains a valid (vanishing) defect.
    let extent0 = base.extent_um.unwrap_or(depth0);
    let (s0, extent, depth) = match param {
        SweepParam::Depth => (pos0, extent0, value),
        SweepParam::Extent => (pos0, value, depth0),
        SweepParam::Position => (value, extent0, depth0),
        SweepParam::Gamma => (pos0, extent0, depth0),
    };
    let make = if base.kind == K::Nick {
        cosrod::make_nick
    } else {
        cosrod::make_blob
    };
    let mut profile = make(rod, s0 * UM, extent * UM, depth * UM)?;
    if matches!(param, SweepParam::Gamma) {
        profile.gamma = value;
    }
    Ok(profile)
}

fn cmd_sweep(
    config: &Path,
    param: SweepParam,
    from: f64,
    to: f64,
    steps: usize,
    out: &Path,
) -> Result<(), CliError> {
    let loaded = load_config(config)?;
    let cfg = &loaded.resolved;
    let text = std::fs::read_to_string(config)
        .map_err(|e| CliError::Config(format!("cannot read config: {e}")))?;
    let parsed = ConfigFile::parse(&text).map_err(CliError::Config)?;
    let base_defect = parsed
        .defects
        .first()
        .ok_or_else(|| CliError::Config("sweep needs at least one [[defect]]".into()))?
        .clone();
    let (boundary, tip) = cfg
        .cases
        .first()
        .map(|c| (c.boundary, c.tip_mass_kg))
        .unwrap_or((Boundary::CLAMP_END2, 0.0));

    let values: Vec<f64> = if steps <= 1 || from == to {
        vec![from]
    } else {
        (0..steps)
            .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
            .collect()
    };
    let mut csv = provenance_header(&loaded.sha256);
    csv.push_str("param_value,frequency_hz,defect_delta_axial_n_per_m\n");
    for v in values {
        let profile = sweep_profile(&cfg.rod, &base_defect, param, v)?;
        let delta = defect_stiffness(&cfg.rod, &profile)?;
        let component = assemble_component(&cfg.rod, &[profile])?;
        let est = modal_estimate(&component, boundary, tip)?;
        csv.push_str(&format!(
            "{v},{},{}\n",
            cosrod::format_significant(est.frequency_hz, 9),
            cosrod::format_significant(delta[(8, 8)], 9)
        ));
    }
    write_text(out, &csv)
}

fn cmd_export(config: &Path, format: Format, out: &Path) -> Result<(), CliError> {
    let loaded = load_config(config)?;
    let component = build_component(&loaded.resolved)?;
    let fmt = match format {
        Format::Json => ExportFormat::Json,
        Format::MatrixText => ExportFormat::MatrixText,
    };
    export_component(&component, out, fmt)?;
    Ok(())
}
