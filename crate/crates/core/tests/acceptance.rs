//! Acceptance suite. Prints one PASS/FAIL line per criterion and always exits 0;
//! the lines are the report. `EVOKAN_ACCEPTANCE=1,4` restricts the run to the
//! listed criteria.

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use evokan::cli::commands;
use evokan::cli::config::RunConfig;
use evokan::cli::output::load_trajectory;
use evokan::evolution::{evolve_step, CollocationSet, EvolutionConfig, EvolutionState, Integrator, ResidualOperator};
use evokan::kan::{bspline_basis, make_knots, Backend, Embedding, Network, NetworkSpec, ParamVector, ScaleMode};
use evokan::metrics::energy_trace;
use evokan::problems::{AllenCahnSpec, ProblemSpec};
use evokan::spectral::{
    ac_spectral_step_imex, ac_spectral_step_sav, nse_spectral_step, AcSpectralState, NseSpectralState,
    SpectralGrid,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("EVOKAN_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let criteria: [(usize, &str, Option<f64>, fn() -> Outcome); 9] = [
        (1, "differentiation", Some(30.0), c1_differentiation),
        (2, "splines", None, c2_splines),
        (3, "galerkin", None, c3_galerkin),
        (4, "spectral self-validation", Some(120.0), c4_spectral),
        (5, "sav stability", None, c5_sav_stability),
        (6, "ac1d reproduction", Some(900.0), c6_ac1d),
        (7, "ac2d", Some(1800.0), c7_ac2d),
        (8, "nse2d", Some(2700.0), c8_nse),
        (9, "determinism", None, c9_determinism),
    ];
    let mut passed = 0;
    let mut ran = 0;
    for (id, name, budget, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let t0 = Instant::now();
        let r = std::panic::catch_unwind(f).unwrap_or_else(|_| outcome(false, "panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        let in_time = budget.map_or(true, |b| secs < b);
        let pass = r.pass && in_time;
        let budget_note = match budget {
            Some(b) if !in_time => format!(", over the {b:.0} s budget"),
            _ => String::new(),
        };
        println!(
            "{} C{id} {name}: {} ({secs:.1} s{budget_note})",
            if pass { "PASS" } else { "FAIL" },
            r.detail
        );
        passed += pass as usize;
        ran += 1;
    }
    println!("acceptance: {passed}/{ran} criteria passed");
}

fn rel_max(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

fn random_network(rng: &mut ChaCha8Rng, backend: Backend) -> (Network, ParamVector) {
    let d = rng.gen_range(1..=2);
    let m = rng.gen_range(1..=2);
    let hidden = rng.gen_range(1..=2);
    let mut widths = vec![d];
    for _ in 0..hidden {
        widths.push(rng.gen_range(1..=5));
    }
    widths.push(m);
    let spec = NetworkSpec {
        backend,
        embedding: if rng.gen_bool(0.5) {
            Embedding::Identity
        } else {
            Embedding::PeriodicSinCos { half_period: 1.0 }
        },
        widths,
        order: rng.gen_range(2..=3),
        grid: rng.gen_range(3..=8),
        domain: (-1.0, 1.0),
        scales: ScaleMode::Trainable,
        full_hessian: d == 2 && rng.gen_bool(0.5),
    };
    let net = Network::new(spec).unwrap();
    let mut p = net.init_params(rng.gen());
    for v in p.as_mut_slice() {
        *v += rng.gen_range(-0.3..0.3);
    }
    (net, p)
}

fn c1_differentiation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = 1e-6;
    let mut worst_jac = 0.0f64;
    let mut worst_jet = 0.0f64;
    for i in 0..20 {
        let backend = if i % 2 == 0 { Backend::Kan } else { Backend::Mlp };
        let (net, p) = random_network(&mut rng, backend);
        let d = net.input_dim();
        let m = net.output_dim();
        let points: Vec<Vec<f64>> = (0..5).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();

        // Parameter Jacobian against central differences of the forward pass.
        let jac = net.param_jacobian(&p, &points).unwrap();
        let (mut diff, mut scale) = (0.0f64, 0.0f64);
        for j in 0..net.n_params() {
            let mut plus = p.clone();
            plus.0[j] += h;
            let mut minus = p.clone();
            minus.0[j] -= h;
            for (pi, x) in points.iter().enumerate() {
                let a = net.forward(&plus, x).unwrap();
                let b = net.forward(&minus, x).unwrap();
                for o in 0..m {
                    let fd = (a[o] - b[o]) / (2.0 * h);
                    let got = jac.row(pi * m + o)[j];
                    diff = diff.max((got - fd).abs());
                    scale = scale.max(got.abs());
                }
            }
        }
        worst_jac = worst_jac.max(rel_max(diff, scale));

        // Spatial jets: gradients from the forward pass, second derivatives
        // from differences of the (separately checked) gradients.
        let (mut diff, mut scale) = (0.0f64, 0.0f64);
        for x in &points {
            let jet = net.forward_jet(&p, x).unwrap();
            for a in 0..d {
                let mut xp = x.clone();
                xp[a] += h;
                let mut xm = x.clone();
                xm[a] -= h;
                let fp = net.forward(&p, &xp).unwrap();
                let fm = net.forward(&p, &xm).unwrap();
                let jp = net.forward_jet(&p, &xp).unwrap();
                let jm = net.forward_jet(&p, &xm).unwrap();
                for o in 0..m {
                    let g = (fp[o] - fm[o]) / (2.0 * h);
                    diff = diff.max((jet[o].grad[a] - g).abs());
                    scale = scale.max(jet[o].grad[a].abs());
                    let s = (jp[o].grad[a] - jm[o].grad[a]) / (2.0 * h);
                    diff = diff.max((jet[o].second[a] - s).abs());
                    scale = scale.max(jet[o].second[a].abs());
                    if let (Some(c), 0) = (&jet[o].cross, a) {
                        let mixed = (jp[o].grad[1] - jm[o].grad[1]) / (2.0 * h);
                        diff = diff.max((c[0] - mixed).abs());
                    }
                }
            }
        }
        worst_jet = worst_jet.max(rel_max(diff, scale));
    }
    outcome(
        worst_jac < 1e-5 && worst_jet < 1e-5,
        format!("max relative error jacobian {worst_jac:.2e}, jet {worst_jet:.2e} over 20 networks (tol 1e-5)"),
    )
}

fn c2_splines() -> Outcome {
    let mut pou = 0.0f64;
    for order in 1..=5 {
        for grid in [2, 3, 8, 13] {
            let kv = make_knots(-1.0, 1.0, grid, order).unwrap();
            for s in 0..=400 {
                let x = -1.0 + 2.0 * s as f64 / 400.0;
                let sum: f64 = (0..kv.n_basis()).map(|i| bspline_basis(&kv, i, x).unwrap()).sum();
                let act = kv.active_basis(x);
                let fast: f64 = act.values[..act.len].iter().sum();
                pou = pou.max((sum - 1.0).abs()).max((fast - 1.0).abs());
            }
        }
    }
    let kv = make_knots(-1.0, 1.0, 8, 3).unwrap();
    let t = kv.knots();
    let mut central = 0.0f64;
    for i in 0..kv.n_basis() {
        // Support [t_i, t_{i+4}]; only interior knots are inside the clamped domain.
        for (off, want) in [(1, 1.0 / 6.0), (2, 2.0 / 3.0), (3, 1.0 / 6.0)] {
            let x = t[i + off];
            if x > -1.0 && x < 1.0 {
                central = central.max((bspline_basis(&kv, i, x).unwrap() - want).abs());
                let act = kv.active_basis(x);
                if i >= act.first && i < act.first + act.len {
                    central = central.max((act.values[i - act.first] - want).abs());
                }
            }
        }
    }
    outcome(
        pou < 1e-12 && central < 1e-12,
        format!("partition of unity error {pou:.1e}, cubic 2/3 and 1/6 error {central:.1e} (tol 1e-12)"),
    )
}

/// Uniform cubic B-spline and its second derivative in the local coordinate `u ∈ [0, 4)`.
fn cardinal_cubic(u: f64) -> (f64, f64) {
    match u {
        u if (0.0..1.0).contains(&u) => (u * u * u / 6.0, u),
        u if (1.0..2.0).contains(&u) => ((-3.0 * u * u * u + 12.0 * u * u - 12.0 * u + 4.0) / 6.0, -3.0 * u + 4.0),
        u if (2.0..3.0).contains(&u) => ((3.0 * u * u * u - 24.0 * u * u + 60.0 * u - 44.0) / 6.0, 3.0 * u - 8.0),
        u if (3.0..4.0).contains(&u) => ((4.0 - u).powi(3) / 6.0, 4.0 - u),
        _ => (0.0, 0.0),
    }
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

fn c3_galerkin() -> Outcome {
    let grid = 8;
    let spec = NetworkSpec {
        backend: Backend::Kan,
        embedding: Embedding::Identity,
        widths: vec![1, 1],
        order: 3,
        grid,
        domain: (-1.0, 1.0),
        scales: ScaleMode::Fixed { base: 0.0, spline: 1.0 },
        full_hessian: false,
    };
    let net = Network::new(spec).unwrap();
    let nf = net.n_params();
    if nf != grid + 3 {
        return outcome(false, format!("expected {} spline features, network has {nf} parameters", grid + 3));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let c0: Vec<f64> = (0..nf).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n_pts = 64;
    let points: Vec<Vec<f64>> = (0..n_pts).map(|i| vec![-1.0 + 2.0 * (i as f64 + 0.5) / n_pts as f64]).collect();

    // Dense features on the uniform extended knot grid t_j = -1 + (j - 3) h.
    let hk = 2.0 / grid as f64;
    let phi = |x: f64, j: usize| cardinal_cubic((x - (-1.0 + (j as f64 - 3.0) * hk)) / hk);
    let mut ata = vec![vec![0.0; nf]; nf];
    let mut atb = vec![0.0; nf];
    for p in &points {
        let row: Vec<(f64, f64)> = (0..nf).map(|j| phi(p[0], j)).collect();
        let u_xx: f64 = row.iter().zip(&c0).map(|((_, d2), c)| d2 / (hk * hk) * c).sum();
        for a in 0..nf {
            atb[a] += row[a].0 * u_xx;
            for b in 0..nf {
                ata[a][b] += row[a].0 * row[b].0;
            }
        }
    }
    let cdot = solve_dense(ata, atb);
    let dt = 1e-3;
    let want: Vec<f64> = c0.iter().zip(&cdot).map(|(c, v)| c + dt * v).collect();

    let mut cfg = EvolutionConfig::new(dt, dt);
    cfg.integrator = Integrator::Euler;
    cfg.lambda = 0.0;
    let mut colloc = CollocationSet::from_points(points).unwrap();
    let op = ResidualOperator::Heat { diffusivity: 1.0 };
    let state = EvolutionState::new(ParamVector(c0), None);
    let (next, _) = evolve_step(&state, &net, &op, &mut colloc, &cfg).unwrap();
    let err = next.params.0.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    outcome(err < 1e-8, format!("{nf} features, 64 points: max parameter difference {err:.2e} (tol 1e-8)"))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn c4_spectral() -> Outcome {
    let pi = std::f64::consts::PI;
    let nu = 0.05;
    let grid = SpectralGrid::new(64, 2).unwrap();
    let pts = grid.points();
    let u: Vec<f64> = pts.iter().map(|p| (pi * p[0]).sin() * (pi * p[1]).cos()).collect();
    let v: Vec<f64> = pts.iter().map(|p| -(pi * p[0]).cos() * (pi * p[1]).sin()).collect();
    let mut st = NseSpectralState::new(grid, &u, &v);
    for _ in 0..100 {
        nse_spectral_step(&mut st, nu, 1e-3).unwrap();
    }
    let decay = (-2.0 * pi * pi * nu * 0.1).exp();
    let snap = st.snapshot();
    let n = u.len();
    let mut tg = 0.0f64;
    for i in 0..n {
        tg = tg.max((snap.values[i] - u[i] * decay).abs()).max((snap.values[n + i] - v[i] * decay).abs());
    }

    // The reaction term is scaled by 1/ε², so the profile saturates on a time
    // scale ~ε². A short horizon keeps the run in its smooth transient where
    // the error is still dominated by time discretization.
    let spec = AllenCahnSpec::one_d(0.1);
    let g = SpectralGrid::new(128, 1).unwrap();
    let t_end = 0.1;
    let ratio = |sav: bool| {
        let run = |dt: f64| {
            let mut s = AcSpectralState::from_initial_condition(g.clone(), &spec);
            for _ in 0..(t_end / dt).round() as usize {
                if sav {
                    ac_spectral_step_sav(&mut s, &spec, dt).unwrap();
                } else {
                    ac_spectral_step_imex(&mut s, &spec, dt).unwrap();
                }
            }
            s.u
        };
        let (a, b, c) = (run(2.5e-4), run(1.25e-4), run(6.25e-5));
        max_diff(&a, &b) / max_diff(&b, &c)
    };
    let (ri, rs) = (ratio(false), ratio(true));
    let in_band = |r: f64| (r - 2.0).abs() <= 0.2;
    outcome(
        tg < 1e-6 && in_band(ri) && in_band(rs),
        format!(
            "Taylor-Green max error {tg:.2e} (tol 1e-6); halving ratios IMEX {ri:.3}, SAV {rs:.3} (want 2.0 +- 0.2)"
        ),
    )
}

fn c5_sav_stability() -> Outcome {
    let spec = AllenCahnSpec::one_d(0.02);
    let g = SpectralGrid::new(512, 1).unwrap();
    let mut parts = Vec::new();
    let mut total = 0;
    for dt in [1e-3, 1e-2, 1e-1] {
        let mut s = AcSpectralState::from_initial_condition(g.clone(), &spec);
        let mut e = s.modified_energy(&spec);
        let mut rises = 0;
        for _ in 0..(1.0 / dt as f64).round() as usize {
            ac_spectral_step_sav(&mut s, &spec, dt).unwrap();
            let next = s.modified_energy(&spec);
            rises += (next > e) as usize;
            e = next;
        }
        total += rises;
        parts.push(format!("dt {dt:e}: {rises}"));
    }
    outcome(total == 0, format!("modified-energy increases {}", parts.join(", ")))
}

fn run_and_compare(cfg_json: &str, dir: &Path) -> Result<(evokan::metrics::ErrorReport, RunConfig), String> {
    let cfg = RunConfig::parse(cfg_json, Path::new("<acceptance>")).map_err(|e| e.to_string())?;
    let run = dir.join("run");
    let bench = dir.join("bench");
    commands::evolve(&cfg, &run, None, true).map_err(|e| format!("evolve: {e}"))?;
    commands::benchmark(&cfg, &bench, true).map_err(|e| format!("benchmark: {e}"))?;
    let mut reports = commands::compare(&run, &bench, None, true).map_err(|e| format!("compare: {e}"))?;
    Ok((reports.remove(0), cfg))
}

const PAPER_AC1D_EVOKAN: (f64, f64) = (1.6e-4, 2.3e-4);

fn c6_ac1d() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let make = |backend: &str| {
        format!(
            r#"{{"problem": {{"kind": "ac1d", "epsilon": 0.02}},
                "network": {{"backend": "{backend}"}},
                "evolution": {{"dt": 2.5e-4, "t_final": 1.0}}, "seed": 0}}"#
        )
    };
    let kan = run_and_compare(&make("kan"), &tmp.path().join("kan"));
    let mlp = run_and_compare(&make("mlp"), &tmp.path().join("mlp"));
    match (kan, mlp) {
        (Ok((k, _)), Ok((m, _))) => {
            let (ek, em) = (k.time_averaged, m.time_averaged);
            outcome(
                ek < 5e-3 && em < 2e-2 && ek <= em,
                format!(
                    "time-averaged error EvoKAN {ek:.3e} (tol 5e-3), EDNN {em:.3e} (tol 2e-2), ordering {}; published EvoKAN {:.1e}-{:.1e}",
                    if ek <= em { "holds" } else { "reversed" },
                    PAPER_AC1D_EVOKAN.0,
                    PAPER_AC1D_EVOKAN.1
                ),
            )
        }
        (k, m) => outcome(
            false,
            format!("run failed: kan {:?}, mlp {:?}", k.err(), m.err()),
        ),
    }
}

fn c7_ac2d() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    // 1e-3 blows up within ten steps; 32 points per axis keeps the run near budget.
    let cfg = r#"{"problem": {"kind": "ac2d", "epsilon": 0.05, "alpha": 1},
                  "evolution": {"dt": 5e-4, "t_final": 0.5, "snapshot_every": 20},
                  "collocation": {"kind": "uniform_grid", "n": 32}, "seed": 0}"#;
    match run_and_compare(cfg, tmp.path()) {
        Ok((report, cfg)) => {
            let rel = report.rows.last().map_or(f64::NAN, |r| r.rel_error);
            let ProblemSpec::AllenCahn(spec) = cfg.problem.spec() else {
                unreachable!()
            };
            let traj = load_trajectory(&tmp.path().join("run")).unwrap();
            let rises = energy_trace(&traj, &spec).unwrap().iter().filter(|r| r.increased).count();
            outcome(
                rel < 5e-2 && rises == 0,
                format!("final relative error {rel:.3e} (tol 5e-2), energy increases {rises} over {} snapshots", traj.len()),
            )
        }
        Err(e) => outcome(false, e),
    }
}

fn c8_nse() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{"problem": {"kind": "nse2d", "nu": 0.05, "ic": "divergence_free"},
                  "evolution": {"dt": 1e-3, "t_final": 0.2}, "seed": 0}"#;
    match run_and_compare(cfg, tmp.path()) {
        Ok((report, _)) => {
            let at = |t: f64| {
                report
                    .rows
                    .iter()
                    .find(|r| (r.t - t).abs() < 1e-9)
                    .map_or(f64::NAN, |r| r.rel_error)
            };
            let (a, b) = (at(0.1), at(0.2));
            outcome(
                a < 0.1 && b < 0.1,
                format!("relative velocity error {a:.3e} at t = 0.1, {b:.3e} at t = 0.2 (tol 1e-1)"),
            )
        }
        Err(e) => outcome(false, e),
    }
}

fn c9_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = RunConfig::parse(
        r#"{"problem": {"kind": "ac1d", "epsilon": 0.1},
            "network": {"widths": [1, 4, 4, 1], "grid": 5},
            "evolution": {"dt": 1e-3, "t_final": 0.02, "snapshot_every": 5},
            "fit": {"max_iters": 50}, "seed": 7}"#,
        Path::new("<acceptance>"),
    )
    .unwrap();
    let mut files = Vec::new();
    for name in ["a", "b"] {
        let dir = tmp.path().join(name);
        if let Err(e) = commands::evolve(&cfg, &dir, None, true) {
            return outcome(false, format!("evolve failed: {e}"));
        }
        files.push(std::fs::read(dir.join("diagnostics.csv")).unwrap());
    }
    let same = files[0] == files[1];
    let rows = files[0].iter().filter(|&&b| b == b'\n').count();
    outcome(same, format!("two seeded runs, diagnostics.csv {} ({rows} lines)", if same { "identical" } else { "differ" }))
}
