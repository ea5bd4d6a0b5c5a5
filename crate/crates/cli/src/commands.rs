//! One function per subcommand. Each writes its report and data files and
//! returns whether the run met its own pass criteria.

use anyhow::Result;
use serde::Serialize;

use eprlab_core::bell::run_bell;
use eprlab_core::measurement::{sample_joint, DiscreteReduction};
use eprlab_core::numerics::{marginal, phase_space_moments, PhaseSpaceMoments};
use eprlab_core::oracle::{epr_covariance, evolve_covariance, CovarianceState};
use eprlab_core::protocols::audit::run_oracle_check;
use eprlab_core::protocols::discriminator::run_discriminator;
use eprlab_core::protocols::epr_source;
use eprlab_core::protocols::kim_shih::{run_kim_shih, BoundReport};
use eprlab_core::protocols::persistence::run_correlation_persistence;
use eprlab_core::protocols::signaling::run_signaling_test;
use eprlab_core::{discrete_entangled, Axis, DispersionReport, FreeEvolve};

use crate::config::{RunConfig, StateKind};
use crate::output::{tau_tag, Output};

/// Detection events drawn by `state` for an EPR source.
const STATE_SAMPLES: usize = 10_000;

#[derive(Serialize)]
struct SampleSummary {
    count: usize,
    mean_x1: f64,
    mean_x2: f64,
    std_x1: f64,
    std_x2: f64,
    correlation: f64,
}

fn summarize(samples: &[(f64, f64)]) -> SampleSummary {
    let n = samples.len() as f64;
    let (m1, m2) = samples
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (mut v1, mut v2, mut c) = (0.0, 0.0, 0.0);
    for (x, y) in samples {
        v1 += (x - m1).powi(2);
        v2 += (y - m2).powi(2);
        c += (x - m1) * (y - m2);
    }
    SampleSummary {
        count: samples.len(),
        mean_x1: m1,
        mean_x2: m2,
        std_x1: (v1 / (n - 1.0)).sqrt(),
        std_x2: (v2 / (n - 1.0)).sqrt(),
        correlation: c / (v1 * v2).sqrt(),
    }
}

#[derive(Serialize)]
struct EprStateReport {
    grid_moments: PhaseSpaceMoments,
    oracle: CovarianceState,
    symplectic_eigenvalues: [f64; 2],
    correlation_quality: f64,
    particle1: DispersionReport,
    particle2: DispersionReport,
    samples: SampleSummary,
}

#[derive(Serialize)]
struct DiscreteStateReport {
    peak_positions: Vec<f64>,
    probabilities: Vec<f64>,
    trials: usize,
    frequencies: Vec<f64>,
}

fn particle_dispersion(m: &PhaseSpaceMoments, x: usize, p: usize, hbar: f64) -> DispersionReport {
    DispersionReport::new(m.mean[x], m.cov[x][x].sqrt(), m.mean[p], m.cov[p][p].sqrt(), hbar)
}

pub fn state(cfg: &RunConfig, out: &mut Output) -> Result<bool> {
    let grid = cfg.grid()?;
    match cfg.state.kind {
        StateKind::Epr => {
            let epr = cfg.epr()?;
            let psi = epr_source(grid, epr)?;
            let m = phase_space_moments(&psi)?;
            let oracle = epr_covariance(epr, grid.hbar());
            let samples = sample_joint(&psi, cfg.seed, STATE_SAMPLES)?;
            out.density("marginal_x1.csv", &marginal(&psi, Axis::One))?;
            out.density("marginal_x2.csv", &marginal(&psi, Axis::Two))?;
            out.csv(
                "samples.csv",
                &["x1", "x2"],
                samples.iter().map(|&(a, b)| vec![a, b]),
            )?;
            use eprlab_core::numerics::{P1, P2, X1, X2};
            let report = EprStateReport {
                particle1: particle_dispersion(&m, X1, P1, grid.hbar()),
                particle2: particle_dispersion(&m, X2, P2, grid.hbar()),
                symplectic_eigenvalues: CovarianceState {
                    mean: m.mean,
                    cov: m.cov,
                }
                .symplectic_eigenvalues(),
                grid_moments: m,
                oracle,
                correlation_quality: epr.correlation_quality(),
                samples: summarize(&samples),
            };
            println!(
                "EPR state: std_x2 = {:.6}, std_p2 = {:.6}, product = {:.6}",
                report.particle2.std_x, report.particle2.std_p, report.particle2.product
            );
            out.report("state", cfg, &report)?;
        }
        StateKind::Discrete => {
            let spec = cfg.discrete()?;
            let psi = discrete_entangled([grid, grid], spec)?;
            let reduction = DiscreteReduction::new(&psi, spec)?;
            let outcomes = reduction.sample_outcomes(cfg.seed, cfg.state.trials);
            let mut counts = vec![0usize; spec.terms];
            for j in outcomes {
                counts[j] += 1;
            }
            let frequencies: Vec<f64> = counts
                .iter()
                .map(|&c| c as f64 / cfg.state.trials as f64)
                .collect();
            let report = DiscreteStateReport {
                peak_positions: spec.peak_positions(),
                probabilities: reduction.probabilities().to_vec(),
                trials: cfg.state.trials,
                frequencies,
            };
            out.csv(
                "outcomes.csv",
                &["x1", "probability", "frequency"],
                (0..spec.terms).map(|j| {
                    vec![
                        report.peak_positions[j],
                        report.probabilities[j],
                        report.frequencies[j],
                    ]
                }),
            )?;
            for j in 0..spec.terms {
                println!(
                    "peak {j} at x1 = {:+.3}: probability {:.6}, frequency {:.6}",
                    report.peak_positions[j], report.probabilities[j], report.frequencies[j]
                );
            }
            out.report("state", cfg, &report)?;
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct EvolveRow {
    delay: f64,
    grid: PhaseSpaceMoments,
    oracle: CovarianceState,
    norm: f64,
}

pub fn evolve(cfg: &RunConfig, out: &mut Output) -> Result<bool> {
    let grid = cfg.grid()?;
    let epr = cfg.epr()?;
    let psi = epr_source(grid, epr)?;
    let source = epr_covariance(epr, grid.hbar());
    let mut rows = Vec::new();
    for &delay in &cfg.times.delays {
        let f = psi.free_evolve(delay)?;
        out.density(&format!("x2_{}.csv", tau_tag(delay)), &marginal(&f, Axis::Two))?;
        let m = phase_space_moments(&f)?;
        println!("delay {delay}: var_x2 = {:.8}", m.cov[2][2]);
        rows.push(EvolveRow {
            delay,
            grid: m,
            oracle: evolve_covariance(&source, delay, grid.constants().mass),
            norm: f.norm_sqr(),
        });
    }
    out.report("evolve", cfg, &rows)?;
    Ok(true)
}

pub fn discriminate(cfg: &RunConfig, out: &mut Output) -> Result<bool> {
    let report = run_discriminator(&cfg.discriminator()?)?;
    println!("delay    model  std_x        std_p        angular_width");
    for p in &report.points {
        for s in p.snapshots() {
            let tag = format!("{}_{}", s.model.label(), tau_tag(p.delay));
            if let Some(d) = &s.position_density {
                out.density(&format!("{tag}.csv"), d)?;
            }
            if let Some(d) = &s.momentum_density {
                out.density(&format!("{tag}_momentum.csv"), d)?;
            }
            let width = s.angular_width.map_or("-".to_string(), |w| format!("{w:.6e}"));
            println!(
                "{:<8} {:<6} {:<12.6} {:<12.6} {}",
                p.delay,
                s.model.label(),
                s.dispersion.std_x,
                s.dispersion.std_p,
                width
            );
        }
    }
    out.report("discriminate", cfg, &report)?;
    Ok(true)
}

pub fn signal_test(cfg: &RunConfig, out: &mut Output) -> Result<bool> {
    let report = run_signaling_test(&cfg.signaling_config()?)?;
    out.csv(
        "blocks.csv",
        &["block", "high", "detected", "sample_std", "decoded_high"],
        report.blocks.iter().enumerate().map(|(i, b)| {
            vec![
                i as f64,
                f64::from(u8::from(b.high)),
                b.detected as f64,
                b.sample_std,
                f64::from(u8::from(b.decoded_high)),
            ]
        }),
    )?;
    println!(
        "accuracy {:.4} (predicted {:.4}, floor {:.4}); Welch t = {:.3}, p = {:.3e}",
        report.accuracy, report.predicted_accuracy, report.accuracy_floor, report.welch_t, report.p_value
    );
    out.report("signal-test", cfg, &report)?;
    Ok(true)
}

#[derive(Serialize)]
struct KimShihRow {
    delay: f64,
    bound: BoundReport,
}

pub fn kim_shih(cfg: &RunConfig, out: &mut Output) -> Result<bool> {
    let mut rows = Vec::new();
    for &delay in &cfg.times.delays {
        let bound = run_kim_shih(&cfg.kim_shih(delay)?)?;
        println!(
            "delay {delay}: std_p2 = {:.6}, hbar/a = {:.6}, ratio = {:.6}{}",
            bound.std_p2,
            bound.collapse_bound,
            bound.ratio,
            if bound.below_bound {
                " (below the collapse bound)"
            } else {
                ""
            }
        );
        rows.push(KimShihRow { delay, bound });
    }
    out.report("kim-shih", cfg, &rows)?;
    Ok(true)
}

pub fn persistence(cfg: &RunConfig, out: &mut Output) -> Result<bool> {
    let report = run_correlation_persistence(&cfg.persistence()?)?;
    out.csv(
        "persistence.csv",
        &[
            "delay",
            "grid_mean_x2",
            "grid_std_x2",
            "oracle_mean_x2",
            "oracle_std_x2",
            "grid_residual_mean",
            "grid_residual_std",
            "oracle_residual_mean",
            "oracle_residual_std",
        ],
        report.rows.iter().map(|r| {
            vec![
                r.delay,
                r.grid_mean_x2,
                r.grid_std_x2,
                r.oracle_mean_x2,
                r.oracle_std_x2,
                r.grid_residual.mean,
                r.grid_residual.std,
                r.oracle_residual.mean,
                r.oracle_residual.std,
            ]
        }),
    )?;
    for r in &report.rows {
        println!(
            "delay {}: mean x2 {:.6} (oracle {:.6}), std x2 {:.6} (oracle {:.6})",
            r.delay, r.grid_mean_x2, r.oracle_mean_x2, r.grid_std_x2, r.oracle_std_x2
        );
    }
    out.report("persistence", cfg, &report)?;
    Ok(true)
}

pub fn bell(cfg: &RunConfig, out: &mut Output) -> Result<bool> {
    let report = run_bell()?;
    println!("local deterministic strategies: {}", report.lhv_strategies);
    println!("max |S| over local strategies:  {}", report.lhv_max_chsh);
    for (i, s) in report.qm_chsh.iter().enumerate() {
        println!("singlet S, setting order {i}:     {s:+.12}");
    }
    println!("max |S| for the singlet:         {:.12}", report.qm_max_abs_chsh);
    out.report("bell", cfg, &report)?;
    Ok(report.qm_max_abs_chsh > f64::from(report.lhv_max_chsh))
}

pub fn oracle_check(cfg: &RunConfig, out: &mut Output) -> Result<bool> {
    let report = run_oracle_check(&cfg.oracle_check()?)?;
    println!(
        "{:<24} {:>6} {:>16} {:>16} {:>10} {:>8}",
        "quantity", "delay", "grid", "oracle", "deviation", "status"
    );
    for r in &report.rows {
        println!(
            "{:<24} {:>6} {:>16.9e} {:>16.9e} {:>10.3e} {:>8}",
            r.quantity,
            r.delay,
            r.grid,
            r.oracle,
            r.deviation,
            if r.passed { "ok" } else { "FAIL" }
        );
    }
    out.csv(
        "oracle_check.csv",
        &["row", "delay", "grid", "oracle", "deviation", "tolerance"],
        report
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| vec![i as f64, r.delay, r.grid, r.oracle, r.deviation, r.tolerance]),
    )?;
    out.report("oracle-check", cfg, &report)?;
    Ok(report.passed)
}
