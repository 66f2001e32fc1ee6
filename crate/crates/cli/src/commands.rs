use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sica_core::binio::{read_json, write_json};
use sica_core::export::{max_rounds, write_components_csv, write_round_csv, SolutionDocument};
use sica_core::modefit::{fit_amplitudes_with, FitOptions};
use sica_core::signal::{fmt_f64, read_series_csv};
use sica_core::{
    empirical_cgf, generate_movie, negentropy_extract, reference_cgf, sample_detectors, sica_extract, DensityMovie,
    Ensemble, UnmixingSolution,
};

use crate::config::RunConfig;
use crate::{CliError, CumulantArgs, ExtractArgs, FitArgs, Method};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Default, Serialize, Deserialize)]
struct Manifest {
    version: String,
    runs: BTreeMap<String, RunRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RunRecord {
    config_hash: String,
    /// Input file name → SHA-256.
    inputs: BTreeMap<String, String>,
    /// Output path relative to the output directory → SHA-256.
    outputs: BTreeMap<String, String>,
}

fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn files_under(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            files_under(root, &p, out)?;
        } else {
            out.push(p.strip_prefix(root).expect("under root").to_path_buf());
        }
    }
    Ok(())
}

/// Records hashes of the inputs and of every output (files or directories).
fn write_manifest(cfg: &RunConfig, command: &str, inputs: &[&Path], outputs: &[&str]) -> Result<(), CliError> {
    let root = &cfg.output_dir;
    let path = root.join(MANIFEST);
    let mut manifest: Manifest =
        if path.is_file() { read_json(&path).unwrap_or_default() } else { Manifest::default() };
    manifest.version = env!("CARGO_PKG_VERSION").into();
    let mut input_map = BTreeMap::new();
    for p in inputs {
        let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let hash = if p.is_dir() { hash_tree(p)? } else { sha256_file(p)? };
        input_map.insert(name, hash);
    }
    let mut output_map = BTreeMap::new();
    for o in outputs {
        let full = root.join(o);
        let mut files = Vec::new();
        if full.is_dir() {
            files_under(root, &full, &mut files)?;
        } else {
            files.push(PathBuf::from(o));
        }
        for f in files {
            output_map.insert(f.to_string_lossy().replace('\\', "/"), sha256_file(&root.join(&f))?);
        }
    }
    manifest.runs.insert(command.into(), RunRecord { config_hash: cfg.hash(), inputs: input_map, outputs: output_map });
    write_json(&path, &manifest)?;
    Ok(())
}

fn hash_tree(dir: &Path) -> Result<String, CliError> {
    let mut files = Vec::new();
    files_under(dir, dir, &mut files)?;
    let mut h = Sha256::new();
    for f in files {
        h.update(f.to_string_lossy().as_bytes());
        h.update(sha256_file(&dir.join(&f))?.as_bytes());
    }
    Ok(hex::encode(h.finalize()))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))
}

pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let grid = cfg.spatial_grid();
    let movie = generate_movie(&cfg.trap, &cfg.modes, &cfg.noise, &grid, &cfg.time_grid)?;
    let detectors = sample_detectors(&movie, &cfg.detector_points())?;
    ensure_dir(&cfg.output_dir)?;
    movie.save(cfg.output_dir.join("movie"), Some(&detectors))?;
    detectors.write_csv_file(cfg.output_dir.join("detectors.csv"))?;
    write_manifest(cfg, "simulate", &[], &["movie", "detectors.csv"])?;
    println!(
        "simulated {} frames on a {}x{} grid, {} detectors -> {}",
        movie.n_frames(),
        grid.n_points,
        grid.n_points,
        detectors.n_channels(),
        cfg.output_dir.display()
    );
    Ok(())
}

pub fn extract(cfg: &RunConfig, args: &ExtractArgs) -> Result<(), CliError> {
    let raw = Ensemble::read_csv_file(&args.detectors)?;
    let n = args.components.unwrap_or(raw.n_channels());
    let sol: UnmixingSolution = match args.method {
        Method::Sica => sica_extract(&raw, n, &cfg.sica)?,
        Method::Ica => negentropy_extract(&raw, n, &cfg.negentropy, raw.grid().full())?,
    };
    if sol.components.is_empty() {
        let reason = sol.failures.first().map(|f| f.error.clone()).unwrap_or_else(|| "no components".into());
        return Err(CliError { kind: crate::Kind::Numeric, message: format!("extraction failed: {reason}") });
    }
    ensure_dir(&cfg.output_dir)?;
    let mut outputs = vec!["solution.json".to_string(), "components.csv".to_string()];
    SolutionDocument::from_solution(&sol).save(cfg.output_dir.join("solution.json"))?;
    write_components_csv(&sol, cfg.output_dir.join("components.csv"))?;
    for k in 1..=max_rounds(&sol) {
        let name = format!("components_round{k}.csv");
        write_round_csv(&sol, k, cfg.output_dir.join(&name))?;
        outputs.push(name);
    }
    let names: Vec<&str> = outputs.iter().map(String::as_str).collect();
    write_manifest(cfg, "extract", &[&args.detectors], &names)?;
    for c in &sol.components {
        println!(
            "component {}: frequency {:.6} phase {:.4} loss {:.3e} rounds {} ({:?})",
            c.extraction_index + 1,
            c.frequency,
            c.phase,
            c.loss,
            c.rounds.len(),
            c.status
        );
    }
    for f in &sol.failures {
        eprintln!("warning: component {} failed: {}", f.extraction_index + 1, f.error);
    }
    Ok(())
}

pub fn cumulants(cfg: &RunConfig, args: &CumulantArgs) -> Result<(), CliError> {
    let path = &args.components;
    let file = std::fs::File::open(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let (grid, names, columns) = read_series_csv(std::io::BufReader::new(file))?;
    let z: Vec<f64> = match &args.z {
        Some(z) => z.clone(),
        None => cfg.sica.z_grid.values().to_vec(),
    };
    if z.is_empty() || z.iter().any(|v| !v.is_finite()) {
        return Err(CliError::usage("--z needs finite values"));
    }
    let windows = match &args.solution {
        None => vec![grid.full(); columns.len()],
        Some(p) => {
            let doc = SolutionDocument::load(p)?;
            if doc.components.len() != columns.len() {
                return Err(CliError::io(format!(
                    "{} has {} components but {} has {} columns",
                    p.display(),
                    doc.components.len(),
                    path.display(),
                    columns.len()
                )));
            }
            doc.components
                .iter()
                .map(|c| {
                    let r = match args.round {
                        Some(k) => c.rounds.get(k.wrapping_sub(1)).or(c.rounds.last()),
                        None => c.rounds.last(),
                    };
                    r.map(|r| r.window()).unwrap_or(grid.full())
                })
                .collect()
        }
    };
    let mut table = Vec::with_capacity(columns.len());
    for (col, w) in columns.iter().zip(&windows) {
        if w.end > col.len() {
            return Err(CliError::io(format!("window {w:?} exceeds the {} samples in {}", col.len(), path.display())));
        }
        table.push(empirical_cgf(col, w.clone(), &z)?.k_values);
    }
    let reference: Vec<f64> = z.iter().map(|&v| reference_cgf(v)).collect();

    let mut text = String::from("z");
    for n in &names {
        text.push_str(&format!(",K_{n}"));
    }
    text.push_str(",K_ref\n");
    for (i, zi) in z.iter().enumerate() {
        text.push_str(&fmt_f64(*zi));
        for k in &table {
            text.push(',');
            text.push_str(&fmt_f64(k[i]));
        }
        text.push(',');
        text.push_str(&fmt_f64(reference[i]));
        text.push('\n');
    }
    ensure_dir(&cfg.output_dir)?;
    let out = cfg.output_dir.join(&args.name);
    std::fs::write(&out, text).map_err(|e| CliError::io(format!("{}: {e}", out.display())))?;
    let mut inputs: Vec<&Path> = vec![path];
    if let Some(s) = &args.solution {
        inputs.push(s);
    }
    write_manifest(cfg, &format!("cumulants:{}", args.name), &inputs, &[&args.name])?;
    for (n, k) in names.iter().zip(&table) {
        let dev = k.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let ss: f64 = k.iter().zip(&reference).map(|(a, b)| (a - b).powi(2)).sum();
        println!("{n}: max |K - K_ref| {dev:.4e}, sum of squares {ss:.4e}");
    }
    Ok(())
}

pub fn fit(cfg: &RunConfig, args: &FitArgs) -> Result<(), CliError> {
    let freqs: Vec<f64> = match (&args.frequencies, &args.solution) {
        (Some(f), _) => f.clone(),
        (None, Some(p)) => {
            // ascending order lines the maps up with dipole, quadrupole, breathing
            let mut f = SolutionDocument::load(p)?.frequencies();
            f.sort_by(f64::total_cmp);
            f
        }
        (None, None) => return Err(CliError::usage("fit needs --frequencies or --solution")),
    };
    let freqs: [f64; 3] = freqs
        .try_into()
        .map_err(|f: Vec<f64>| CliError::usage(format!("fit needs exactly 3 frequencies, got {}", f.len())))?;
    let movie = DensityMovie::load(&args.movie)?;
    let map = fit_amplitudes_with(&movie, freqs, FitOptions { with_sine: args.sine })?;
    ensure_dir(&cfg.output_dir)?;
    map.save(cfg.output_dir.join("modemap"), args.csv)?;
    let mut inputs: Vec<&Path> = vec![&args.movie];
    if let Some(s) = &args.solution {
        inputs.push(s);
    }
    write_manifest(cfg, "fit", &inputs, &["modemap"])?;
    let s = map.symmetry_scores();
    println!("symmetry scores: dipole {:.4} quadrupole {:.4} breathing {:.4}", s[0], s[1], s[2]);
    Ok(())
}
