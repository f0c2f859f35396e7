use std::fs::File;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::RunConfig;
use super::output::{
    create_dir, create_file, list_snapshots, load_trajectory, render_field, render_strip, snapshot_name, write_json,
    Manifest, SNAPSHOT_DIR,
};
use crate::error::{Error, Result};
use crate::evolution::{fit_initial, run, FitReport, RunObserver, RunSetup, StepDiagnostics};
use crate::kan::{load_network, save_network, Network};
use crate::metrics::{energy_trace, format_table, write_rows, ErrorReport};
use crate::problems::snapshot::FieldSnapshot;
use crate::problems::{make_initial_condition, ProblemSpec};
use crate::spectral::{run_benchmark, vorticity};

fn say(quiet: bool, msg: impl AsRef<str>) {
    if !quiet {
        println!("{}", msg.as_ref());
    }
}

/// Child directories of a (possibly swept) run.
fn children(cfg: &RunConfig, out: &Path) -> Vec<(PathBuf, String, RunConfig)> {
    cfg.expand()
        .into_iter()
        .map(|(name, c)| {
            let dir = if name.is_empty() { out.to_path_buf() } else { out.join(&name) };
            (dir, name, c)
        })
        .collect()
}

fn write_parent(command: &str, method: &str, cfg: &RunConfig, out: &Path, names: Vec<String>) -> Result<()> {
    if cfg.sweep.is_none() {
        return Ok(());
    }
    let mut m = Manifest::new(command, method, cfg);
    m.children = names;
    m.status = "ok".into();
    m.write(out)
}

#[derive(Serialize)]
struct FitLogRow {
    iteration: usize,
    rms: f64,
    damping: f64,
    accepted: bool,
}

fn write_fit_log(path: &Path, report: &FitReport) -> Result<()> {
    let rows: Vec<FitLogRow> = report
        .history
        .iter()
        .map(|h| FitLogRow {
            iteration: h.iteration,
            rms: h.rms,
            damping: h.damping,
            accepted: h.accepted,
        })
        .collect();
    write_rows(create_file(path)?, &rows)
}

pub fn fit_ic(cfg: &RunConfig, out: &Path, quiet: bool) -> Result<()> {
    let mut names = Vec::new();
    for (dir, name, c) in children(cfg, out) {
        create_dir(&dir)?;
        let net = Network::new(c.network.spec(&c.problem))?;
        let colloc = c.collocation_set()?;
        let fit = c.fit_config();
        let problem = c.problem.spec();
        let report = fit_initial(&net, net.init_params(fit.seed), make_initial_condition(&problem), &colloc, &fit)?;
        save_network(&dir.join("network.evkn"), &net, &report.params)?;
        write_fit_log(&dir.join("fit_log.csv"), &report)?;
        let mut m = Manifest::new("fit-ic", c.network.method_tag(), &c);
        m.status = "ok".into();
        m.extra.insert("fit_rms".into(), report.rms.into());
        m.extra.insert("iterations".into(), report.iterations.into());
        m.extra.insert("converged".into(), report.converged.into());
        m.extra.insert("n_params".into(), net.n_params().into());
        m.write(&dir)?;
        say(
            quiet,
            format!(
                "{}: fit rms {:.3e} after {} iterations{}",
                dir.display(),
                report.rms,
                report.iterations,
                if report.converged { "" } else { " (not converged)" }
            ),
        );
        names.push(name);
    }
    write_parent("fit-ic", cfg.network.method_tag(), cfg, out, names)
}

#[derive(Serialize)]
struct DiagnosticsRow {
    step: usize,
    t: f64,
    residual_norm: Option<f64>,
    gamma_norm: Option<f64>,
    energy: f64,
    modified_energy: Option<f64>,
}

#[derive(Serialize)]
struct TimingRow {
    step: usize,
    wall_ms: f64,
}

/// Streams a run into its directory as results arrive.
struct DirWriter {
    dir: PathBuf,
    dt: f64,
    diagnostics: csv::Writer<File>,
    timing: csv::Writer<File>,
    snapshots: Vec<FieldSnapshot>,
    names: Vec<String>,
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::format(path, e.to_string())
}

impl DirWriter {
    fn new(dir: &Path, dt: f64) -> Result<Self> {
        create_dir(&dir.join(SNAPSHOT_DIR))?;
        Ok(DirWriter {
            dir: dir.to_path_buf(),
            dt,
            diagnostics: csv::Writer::from_writer(create_file(&dir.join("diagnostics.csv"))?),
            timing: csv::Writer::from_writer(create_file(&dir.join("timing.csv"))?),
            snapshots: Vec::new(),
            names: Vec::new(),
        })
    }
}

impl RunObserver for DirWriter {
    fn on_fit(&mut self, report: &FitReport) -> Result<()> {
        write_fit_log(&self.dir.join("fit_log.csv"), report)
    }

    fn on_snapshot(&mut self, snap: &FieldSnapshot) -> Result<()> {
        let name = snapshot_name((snap.t / self.dt).round() as usize);
        snap.save(&self.dir.join(SNAPSHOT_DIR).join(&name))?;
        self.names.push(name);
        self.snapshots.push(snap.clone());
        Ok(())
    }

    fn on_step(&mut self, d: &StepDiagnostics) -> Result<()> {
        let path = self.dir.join("diagnostics.csv");
        self.diagnostics
            .serialize(DiagnosticsRow {
                step: d.step,
                t: d.t,
                residual_norm: d.residual_norm,
                gamma_norm: d.gamma_norm,
                energy: d.energy,
                modified_energy: d.modified_energy,
            })
            .map_err(csv_err(&path))?;
        self.diagnostics.flush().map_err(|e| Error::io(&path, e))?;
        let path = self.dir.join("timing.csv");
        self.timing
            .serialize(TimingRow {
                step: d.step,
                wall_ms: d.wall_ms,
            })
            .map_err(csv_err(&path))?;
        self.timing.flush().map_err(|e| Error::io(&path, e))
    }
}

pub fn evolve(cfg: &RunConfig, out: &Path, init: Option<&Path>, quiet: bool) -> Result<()> {
    let mut names = Vec::new();
    for (dir, name, c) in children(cfg, out) {
        evolve_one(&c, &dir, init, quiet)?;
        names.push(name);
    }
    write_parent("evolve", cfg.network.method_tag(), cfg, out, names)
}

fn evolve_one(c: &RunConfig, dir: &Path, init: Option<&Path>, quiet: bool) -> Result<()> {
    create_dir(dir)?;
    let net_spec = c.network.spec(&c.problem);
    let (net, initial_params) = match init {
        Some(path) => {
            let (net, params) = load_network(path)?;
            if net.spec() != &net_spec {
                return Err(Error::validation(
                    "--init",
                    format!("{} holds a different network than the configuration", path.display()),
                ));
            }
            (net, Some(params))
        }
        None => (Network::new(net_spec)?, None),
    };
    let mut manifest = Manifest::new("evolve", c.network.method_tag(), c);
    manifest.extra.insert("n_params".into(), net.n_params().into());
    manifest.write(dir)?;
    let mut writer = DirWriter::new(dir, c.evolution.dt)?;
    let problem = c.problem.spec();
    let result = run(
        RunSetup {
            problem,
            net: &net,
            evolution: c.evolution,
            fit: c.fit_config(),
            colloc: c.collocation_set()?,
            snapshot_shape: c.snapshot_shape(),
            initial_params,
        },
        &mut writer,
    );
    manifest.snapshots = writer.names.clone();
    if let ProblemSpec::AllenCahn(spec) = problem {
        let rows = energy_trace(&writer.snapshots, &spec)?;
        write_rows(create_file(&dir.join("energy.csv"))?, &rows)?;
    }
    match result {
        Ok(summary) => {
            save_network(&dir.join("network.evkn"), &net, &summary.final_state.params)?;
            manifest.status = "ok".into();
            manifest.extra.insert("fit_rms".into(), summary.fit_rms.into());
            manifest.extra.insert("steps".into(), summary.final_state.step.into());
            manifest
                .extra
                .insert("energy_violations".into(), summary.energy_violations.into());
            manifest.write(dir)?;
            say(
                quiet,
                format!(
                    "{}: {} steps to t = {}, fit rms {:.3e}",
                    dir.display(),
                    summary.final_state.step,
                    summary.final_state.t,
                    summary.fit_rms
                ),
            );
            Ok(())
        }
        Err(e) => {
            manifest.status = e.to_string();
            manifest.write(dir)?;
            Err(e)
        }
    }
}

pub fn benchmark(cfg: &RunConfig, out: &Path, quiet: bool) -> Result<()> {
    let mut names = Vec::new();
    for (dir, name, c) in children(cfg, out) {
        create_dir(&dir.join(SNAPSHOT_DIR))?;
        let problem = c.problem.spec();
        let steps = c.evolution.snapshot_steps();
        let times = c.evolution.snapshot_times();
        let b = run_benchmark(&problem, &c.benchmark, &times, c.grid_size())?;
        let mut m = Manifest::new("benchmark", "spectral", &c);
        for (snap, &step) in b.snapshots.iter().zip(&steps) {
            let name = snapshot_name(step);
            snap.save(&dir.join(SNAPSHOT_DIR).join(&name))?;
            m.snapshots.push(name);
        }
        write_rows(create_file(&dir.join("trace.csv"))?, &b.trace)?;
        m.status = "ok".into();
        m.extra.insert("resolution".into(), b.resolution.into());
        m.extra.insert("dt".into(), b.dt.into());
        m.write(&dir)?;
        say(
            quiet,
            format!("{}: {} snapshots at n = {}, dt = {}", dir.display(), m.snapshots.len(), b.resolution, b.dt),
        );
        names.push(name);
    }
    write_parent("benchmark", "spectral", cfg, out, names)
}

pub const REPORTS_FILE: &str = "reports.json";

/// Compare run `a` against reference run `b` (child by child for sweeps).
pub fn compare(a: &Path, b: &Path, out: Option<&Path>, quiet: bool) -> Result<Vec<ErrorReport>> {
    let ma = Manifest::read(a)?;
    let mb = Manifest::read(b)?;
    let pairs: Vec<(String, PathBuf, PathBuf)> = if ma.children.is_empty() {
        vec![(String::new(), a.to_path_buf(), b.to_path_buf())]
    } else {
        ma.children
            .iter()
            .filter(|c| mb.children.contains(c))
            .map(|c| (c.clone(), a.join(c), b.join(c)))
            .collect()
    };
    if pairs.is_empty() {
        return Err(Error::Comparison("the two sweeps share no child runs".into()));
    }
    if let Some(dir) = out {
        create_dir(dir)?;
    }
    let mut reports = Vec::new();
    for (name, da, db) in pairs {
        let m = Manifest::read(&da)?;
        let ta = load_trajectory(&da)?;
        let tb = load_trajectory(&db)?;
        let r = ErrorReport::new(&m.problem, &m.parameter, m.value, &m.method, &ta, &tb)?;
        if let Some(dir) = out {
            let file = if name.is_empty() { "errors.csv".to_string() } else { format!("errors_{name}.csv") };
            r.write_csv(create_file(&dir.join(file))?)?;
        }
        say(
            quiet,
            format!(
                "{} {}={}: time-averaged {:.4e}, max {:.4e}, final relative {:.4e}",
                r.method,
                r.parameter,
                r.value,
                r.time_averaged,
                r.max_error,
                r.rows.last().map(|x| x.rel_error).unwrap_or(0.0)
            ),
        );
        reports.push(r);
    }
    if let Some(dir) = out {
        write_json(&dir.join(REPORTS_FILE), &reports)?;
        std::fs::write(dir.join("table.txt"), format_table(&reports)).map_err(|e| Error::io(dir, e))?;
    }
    Ok(reports)
}

/// Merge the reports of several comparisons into one table.
pub fn table(dirs: &[PathBuf], out: Option<&Path>, quiet: bool) -> Result<String> {
    let mut reports: Vec<ErrorReport> = Vec::new();
    for d in dirs {
        let path = if d.is_dir() { d.join(REPORTS_FILE) } else { d.clone() };
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut r: Vec<ErrorReport> = serde_json::from_str(&text).map_err(|e| Error::format(&path, e.to_string()))?;
        reports.append(&mut r);
    }
    let t = format_table(&reports);
    if let Some(dir) = out {
        create_dir(dir)?;
        std::fs::write(dir.join("table.txt"), &t).map_err(|e| Error::io(dir, e))?;
    }
    say(quiet, t.trim_end());
    Ok(t)
}

/// Render a snapshot file, or a run/snapshot directory.
///
/// A directory of 1D snapshots becomes one space-time strip at `out`; a
/// directory of 2D snapshots becomes one image per snapshot inside `out`.
pub fn render(input: &Path, out: Option<&Path>, component: usize, vort: bool, quiet: bool) -> Result<Vec<PathBuf>> {
    let prepare = |s: FieldSnapshot| -> Result<FieldSnapshot> {
        if vort {
            vorticity(&s)
        } else {
            Ok(s)
        }
    };
    let mut written = Vec::new();
    if input.is_dir() {
        let traj = if input.join(super::output::MANIFEST_FILE).exists() {
            load_trajectory(input)?
        } else {
            list_snapshots(input)?
                .iter()
                .map(|p| FieldSnapshot::load(p))
                .collect::<Result<Vec<_>>>()?
        };
        let traj = traj.into_iter().map(prepare).collect::<Result<Vec<_>>>()?;
        let first = traj
            .first()
            .ok_or_else(|| Error::validation("render input", format!("no snapshots in {}", input.display())))?;
        if first.dim() == 1 {
            let path = out.map(Path::to_path_buf).unwrap_or_else(|| input.join("strip.pgm"));
            render_strip(&traj, component)?.save(&path)?;
            written.push(path);
        } else {
            let dir = out.map(Path::to_path_buf).unwrap_or_else(|| input.join("images"));
            create_dir(&dir)?;
            for (i, s) in traj.iter().enumerate() {
                let path = dir.join(format!("frame_{i:04}.pgm"));
                render_field(s, component)?.save(&path)?;
                written.push(path);
            }
        }
    } else {
        let snap = prepare(FieldSnapshot::load(input)?)?;
        let path = out.map(Path::to_path_buf).unwrap_or_else(|| input.with_extension("pgm"));
        render_field(&snap, component)?.save(&path)?;
        written.push(path);
    }
    say(quiet, format!("wrote {} image(s)", written.len()));
    Ok(written)
}
