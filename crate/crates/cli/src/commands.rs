//! Subcommand implementations.
//!
//! Each command is a thin orchestration of library calls plus file output;
//! all algorithmic behavior lives in the core crate. Commands are
//! deterministic for fixed flags, config, and seed: randomness is confined
//! to the per-sample counter-based generator behind `--seed`, and all
//! parallel reductions use fixed accumulation orders.

use std::fmt::Write as _;
use std::path::Path;

use lfrl_core::lightfield::write_image_png;
use lfrl_core::metrics::{db_error_fields, db_error_images, edge_energy, noise_std, PatchSpec};
use lfrl_core::synth::{add_poisson, parse_scene, render_blurred, render_still};
use lfrl_core::{
    blur, discretize, export_mosaic, read_lf, rl_deblur, write_lf, DeblurOutput, Error,
    LightField, Result, ValidityMask, Velocity6,
};

use crate::options::RunConfig;

/// Writes `lf` as `<stem>.lfb` plus a 16-bit PNG of its central view as
/// `<stem>_view.png` under `dir`.
fn write_outputs(lf: &LightField, dir: &Path, stem: &str) -> Result<()> {
    write_lf(lf, &dir.join(format!("{stem}.lfb")))?;
    write_image_png(&lf.central_view(), &dir.join(format!("{stem}_view.png")))?;
    Ok(())
}

fn load_scene(path: &Path) -> Result<(lfrl_core::synth::Scene, lfrl_core::synth::SynthConfig)> {
    parse_scene(&std::fs::read_to_string(path)?)
}

/// `synth`: render ground truth, optionally blurred and noised variants.
pub fn cmd_synth(scene_path: &Path, run: &RunConfig, out_dir: &Path) -> Result<()> {
    let (scene, mut cfg) = load_scene(scene_path)?;
    if let Some(peak) = run.photon_peak {
        cfg.photon_peak = peak;
    }
    std::fs::create_dir_all(out_dir)?;

    let still = render_still(&scene, &cfg)?;
    write_outputs(&still, out_dir, "still")?;

    let mut noise_source = None;
    if let Some(v) = run.velocity {
        let blurred = render_blurred(&scene, &cfg, &v)?;
        write_outputs(&blurred, out_dir, "blurred")?;
        noise_source = Some(blurred);
    }
    if run.photon_peak.is_some() {
        let source = noise_source.as_ref().unwrap_or(&still);
        let noisy = add_poisson(source, cfg.photon_peak, run.seed)?;
        write_outputs(&noisy, out_dir, "noisy")?;
    }
    Ok(())
}

/// `blur`: the renderer-based forward model applied to a stored light field.
pub fn cmd_blur(input: &Path, run: &RunConfig, out_dir: &Path) -> Result<()> {
    let velocity = run.velocity.unwrap_or_else(Velocity6::zero);
    let lf = read_lf(input)?;
    let traj = discretize(&velocity, run.rl.n_steps)?;
    let result = blur(&lf, &traj)?;
    std::fs::create_dir_all(out_dir)?;
    write_outputs(&result.lf, out_dir, "blurred")?;
    Ok(())
}

/// `deblur`: the full light-field RL loop with a per-iteration CSV trace.
pub fn cmd_deblur(
    input: &Path,
    truth: Option<&Path>,
    run: &RunConfig,
    out_dir: &Path,
) -> Result<()> {
    let velocity = run
        .velocity
        .ok_or_else(|| Error::config("deblur requires --velocity (or a config-file velocity)"))?;
    let observed = read_lf(input)?;
    let truth_lf = truth.map(read_lf).transpose()?;
    let mask = ValidityMask::all_true(observed.dims());

    let output = rl_deblur(
        &observed,
        &velocity,
        &run.rl,
        &run.reg,
        &mask,
        truth_lf.as_ref(),
    )?;

    std::fs::create_dir_all(out_dir)?;
    write_outputs(&output.lf, out_dir, "deblurred")?;
    std::fs::write(out_dir.join("diagnostics.csv"), diagnostics_csv(&output))?;
    Ok(())
}

/// Renders the iteration trace as CSV. The `db` column is empty unless a
/// ground-truth field was supplied.
fn diagnostics_csv(output: &DeblurOutput) -> String {
    let mut text = String::from("iteration,loglik,r_tv,r_ep,min,max,db\n");
    for s in &output.stats {
        let db = s.db.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{}",
            s.iteration, s.loglik, s.r_tv, s.r_ep, s.min, s.max, db
        );
    }
    text
}

/// `metrics`: fidelity and patch statistics of a test field against a truth
/// field, one CSV row per (image, metric, patch).
pub fn cmd_metrics(
    test_path: &Path,
    truth_path: &Path,
    patches: &[String],
    run: &RunConfig,
    out_csv: &Path,
) -> Result<()> {
    let mut test = read_lf(test_path)?;
    let mut truth = read_lf(truth_path)?;
    if run.crop_border > 0 {
        test = test.crop_aperture_border(run.crop_border)?;
        truth = truth.crop_aperture_border(run.crop_border)?;
    }

    let mut text = String::from("image,metric,patch,value\n");
    let _ = writeln!(text, "test,db_field,all,{}", db_error_fields(&test, &truth, None)?);
    let _ = writeln!(
        text,
        "test,db_central,all,{}",
        db_error_images(&test.central_view(), &truth.central_view(), None)?
    );
    for spec_text in patches {
        let patch = PatchSpec::parse(spec_text)?;
        // Colon-separated label so the patch spec survives the comma-
        // delimited CSV unquoted.
        let label = spec_text.replace(',', ":");
        let _ = writeln!(
            text,
            "test,db_patch,{label},{}",
            lfrl_core::metrics::db_error_patch(&test, &truth, &patch)?
        );
        for (name, lf) in [("test", &test), ("truth", &truth)] {
            let _ = writeln!(text, "{name},noise_std,{label},{}", noise_std(lf, &patch)?);
            let _ = writeln!(text, "{name},edge_energy,{label},{}", edge_energy(lf, &patch)?);
        }
    }
    if let Some(dir) = out_csv.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(out_csv, text)?;
    Ok(())
}

/// `sweep`: render the scene blurred at each velocity and record central-view
/// edge energy, the blur-strength proxy.
pub fn cmd_sweep(
    scene_path: &Path,
    velocities_text: &str,
    patch_text: Option<&str>,
    run: &RunConfig,
    out_csv: &Path,
) -> Result<()> {
    let (scene, mut cfg) = load_scene(scene_path)?;
    if let Some(peak) = run.photon_peak {
        cfg.photon_peak = peak;
    }
    let velocities: Vec<Velocity6> = velocities_text
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(Velocity6::parse)
        .collect::<Result<_>>()?;
    if velocities.is_empty() {
        return Err(Error::config("sweep needs at least one velocity"));
    }
    let dims = cfg.dims;
    let patch = match patch_text {
        Some(text) => PatchSpec::parse(text)?,
        None => PatchSpec {
            is: dims.ns / 2,
            it: dims.nt / 2,
            u0: 0,
            v0: 0,
            u1: dims.nu,
            v1: dims.nv,
        },
    };

    let mut text = String::from("index,tx,ty,tz,rx,ry,rz,edge_energy\n");
    for (index, v) in velocities.iter().enumerate() {
        let blurred = render_blurred(&scene, &cfg, v)?;
        let energy = edge_energy(&blurred, &patch)?;
        let _ = writeln!(
            text,
            "{index},{},{},{},{},{},{},{energy}",
            v.tx, v.ty, v.tz, v.rx, v.ry, v.rz
        );
    }
    if let Some(dir) = out_csv.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(out_csv, text)?;
    Ok(())
}

/// `view`: export one sub-aperture view (default: central) or the full
/// mosaic as 16-bit PNG.
pub fn cmd_view(
    input: &Path,
    s: Option<usize>,
    t: Option<usize>,
    mosaic: bool,
    run: &RunConfig,
    out_png: &Path,
) -> Result<()> {
    let mut lf = read_lf(input)?;
    if run.crop_border > 0 {
        lf = lf.crop_aperture_border(run.crop_border)?;
    }
    if let Some(dir) = out_png.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    if mosaic {
        if s.is_some() || t.is_some() {
            return Err(Error::config("--mosaic exports all views; drop --s/--t"));
        }
        return export_mosaic(&lf, out_png);
    }
    let dims = lf.dims();
    let is = s.unwrap_or(dims.ns / 2);
    let it = t.unwrap_or(dims.nt / 2);
    if is >= dims.ns || it >= dims.nt {
        return Err(Error::config(format!(
            "view ({is}, {it}) outside the {}x{} aperture grid",
            dims.ns, dims.nt
        )));
    }
    write_image_png(&lf.view_image(is, it), out_png)
}

/// Maps an error to the documented process exit code: 2 for configuration
/// problems (including degenerate geometry in the request), 3 for I/O and
/// file-format problems, 4 for numerical failure inside an iteration.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::DegenerateRay => 2,
        Error::Io(_) | Error::Format(_) => 3,
        Error::NumericalFailure { .. } => 4,
    }
}
