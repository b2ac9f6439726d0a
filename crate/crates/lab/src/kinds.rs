//! One pipeline per experiment kind.

use chainlab::dynamics::{run, ChainState, SimParams};
use chainlab::fluctuation::{BgExperiment, HydroErrorExperiment, MartingaleExperiment, TransportExperiment};
use chainlab::gibbs::{sample_chain, GibbsSpec};
use chainlab::potential::ModelParams;
use chainlab::rng::derive_stream;
use chainlab::thermo::{Thermo, ThermoCurve};
use chainlab::verify::{
    edgeworth_check, ee_gap, eig_bound, entropy_tools, gaussian_relative_entropy, moment_from_tail, poisson_solve, relative_entropy, subgaussian_order, Check, Distribution, LocalFunction,
    PoissonProblem, RhsSpec,
};
use rand::Rng;

use crate::config::{ExperimentConfig, FluctObservable, Kind, VerifyCheck};
use crate::output::{fmt_f64, Artifacts, Plot};

/// Failure of a pipeline after the config was accepted.
#[derive(Debug)]
pub enum RunError {
    Numerical(chainlab::error::Error),
    Io(anyhow::Error),
    /// At least one verification check failed; the report was still written.
    ChecksFailed(usize),
}

impl From<chainlab::error::Error> for RunError {
    fn from(e: chainlab::error::Error) -> Self {
        RunError::Numerical(e)
    }
}

impl From<anyhow::Error> for RunError {
    fn from(e: anyhow::Error) -> Self {
        RunError::Io(e)
    }
}

type Res = Result<(), RunError>;

pub fn run_kind(kind: Kind, cfg: &ExperimentConfig, art: &mut Artifacts) -> Res {
    match kind {
        Kind::Thermo => thermo(cfg, art),
        Kind::Simulate => simulate(cfg, art),
        Kind::Hydro => hydro(cfg, art),
        Kind::Fluct => fluct(cfg, art),
        Kind::Verify => verify(cfg, art),
    }
}

fn thermo(cfg: &ExperimentConfig, art: &mut Artifacts) -> Res {
    let (sigma, _) = cfg.sigma_gamma(cfg.n[0]);
    let sec = &cfg.thermo;
    let curve = ThermoCurve::with_grid(cfg.potential(), cfg.model.beta, sigma, sec.tau_max, sec.nodes)?;
    let rows: Vec<Vec<f64>> = (0..curve.tau_grid.len()).map(|k| vec![curve.tau_grid[k], curve.log_z_vals[k], curve.g_vals[k], curve.rbar_vals[k], curve.g2_vals[k]]).collect();
    art.csv("thermo.csv", &["tau", "log_z", "gibbs", "mean_stretch", "gibbs_second_derivative"], &rows)?;
    let th = &curve.thermo;
    let mut tension_rows = Vec::with_capacity(sec.r_nodes);
    for k in 0..sec.r_nodes {
        let r = -sec.r_max + 2.0 * sec.r_max * k as f64 / (sec.r_nodes - 1) as f64;
        let (t, t1, t2) = th.tension_derivatives(r)?;
        tension_rows.push(vec![r, t, t1, t2, th.free_energy(r)?]);
    }
    art.csv("tension.csv", &["r", "tension", "tension_d1", "tension_d2", "free_energy"], &tension_rows)?;
    std::fs::write(art.dir.join("thermo_curve.json"), curve.to_json()).map_err(anyhow::Error::from)?;
    art.files.push("thermo_curve.json".into());
    let plot = Plot::new(&format!("Tension, beta = {}, sigma = {sigma}", cfg.model.beta), "r", "tension")
        .line("tension", tension_rows.iter().map(|r| (r[0], r[1])).collect())
        .line("r", tension_rows.iter().map(|r| (r[0], r[0])).collect());
    art.svg("tension.svg", &plot)?;
    Ok(())
}

fn simulate(cfg: &ExperimentConfig, art: &mut Artifacts) -> Res {
    let pot = cfg.potential();
    let mut plot = Plot::new("Energy per site", "t", "energy / n");
    for &n in &cfg.n {
        let (sigma, gamma) = cfg.sigma_gamma(n);
        let thermo = Thermo::new(pot.clone(), cfg.model.beta, sigma)?;
        let spec = GibbsSpec::local(&thermo, n, |x| cfg.initial.eval(x).0, |x| cfg.initial.eval(x).1)?;
        let mut state = sample_chain(&spec, derive_stream(cfg.seed, 0, &format!("simulate-{n}")))?;
        let params = SimParams::new(pot.clone(), ModelParams { beta: cfg.model.beta, sigma, gamma }, n)?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        {
            let mut obs = |s: &ChainState| -> chainlab::error::Result<()> {
                rows.push(vec![s.t, s.sum_p(), s.sum_r(), s.energy(&pot, sigma)]);
                Ok(())
            };
            run(&mut state, &params, cfg.t_end, cfg.interval, &mut [&mut obs])?;
        }
        plot = plot.line(&format!("n = {n}"), rows.iter().map(|r| (r[0], r[3] / n as f64)).collect());
        art.csv(&format!("simulate_n{n}.csv"), &["t", "sum_p", "sum_r", "energy"], &rows)?;
        let fin: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 / n as f64, state.p[i], state.r[i]]).collect();
        art.csv(&format!("final_n{n}.csv"), &["x", "p", "r"], &fin)?;
    }
    art.svg("simulate_energy.svg", &plot)?;
    Ok(())
}

fn hydro(cfg: &ExperimentConfig, art: &mut Artifacts) -> Res {
    let regime = cfg.regime.expect("validated");
    let exp = HydroErrorExperiment {
        beta: cfg.model.beta,
        regime,
        sizes: cfg.n.clone(),
        replicas: cfg.replicas,
        t_end: cfg.t_end,
        p_exponent: cfg.hydro.p_exponent,
        initial: cfg.initial.clone(),
        test: cfg.hydro.test.clone(),
        base_seed: cfg.seed,
    };
    let rep = exp.run(&cfg.potential())?;
    let rows: Vec<Vec<f64>> = rep.points.iter().map(|p| vec![p.n as f64, p.sigma, p.gamma, p.estimate.value, p.estimate.se]).collect();
    art.csv("hydro.csv", &["n", "sigma", "gamma", "error", "se"], &rows)?;
    art.json("hydro.json", &rep)?;
    let plot = Plot::new(&format!("Hydrodynamic error, fitted exponent {:.3}", rep.exponent), "n", "error").scatter("error", rows.iter().map(|r| (r[0], r[3])).collect()).log_log();
    art.svg("hydro.svg", &plot)?;
    Ok(())
}

fn fluct(cfg: &ExperimentConfig, art: &mut Artifacts) -> Res {
    let f = cfg.fluct.as_ref().expect("validated");
    let n = cfg.n[0];
    match f.observable {
        FluctObservable::Transport => {
            let (_, gamma) = cfg.sigma_gamma(n);
            let exp = TransportExperiment { n, replicas: cfg.replicas, beta: cfg.model.beta, gamma, pbar: f.pbar, tau: f.tau, times: f.times.clone(), mode: f.mode, base_seed: cfg.seed };
            let checks = exp.run()?;
            let rows: Vec<Vec<String>> = checks
                .iter()
                .map(|c| vec![fmt_f64(c.t), c.quantity.clone(), fmt_f64(c.estimate.value), fmt_f64(c.estimate.se), fmt_f64(c.expected), fmt_f64(c.z())])
                .collect();
            art.csv_records("transport.csv", &["t", "quantity", "estimate", "se", "expected", "z"], &rows)?;
            art.json("transport.json", &checks)?;
        }
        FluctObservable::Martingale => {
            let (sigma, gamma) = cfg.sigma_gamma(n);
            let exp = MartingaleExperiment { n, replicas: cfg.replicas, beta: cfg.model.beta, sigma, gamma, t_end: cfg.t_end, interval: cfg.interval, test: f.test.clone(), base_seed: cfg.seed };
            let rep = exp.run(&cfg.potential())?;
            art.csv("martingale.csv", &["second_moment", "se", "formula"], &[vec![rep.second_moment.value, rep.second_moment.se, rep.formula]])?;
            art.json("martingale.json", &rep)?;
        }
        FluctObservable::BoltzmannGibbs => {
            let exp = BgExperiment {
                beta: cfg.model.beta,
                regime: cfg.regime.expect("validated"),
                sizes: cfg.n.clone(),
                replicas: cfg.replicas,
                t_end: cfg.t_end,
                interval: cfg.interval,
                initial: cfg.initial.clone(),
                weight: f.test.clone(),
                base_seed: cfg.seed,
                cfl: f.cfl,
            };
            let rep = exp.run(&cfg.potential())?;
            let rows: Vec<Vec<f64>> = rep.points.iter().map(|p| vec![p.n as f64, p.sigma, p.gamma, p.estimate.value, p.estimate.se]).collect();
            art.csv("boltzmann_gibbs.csv", &["n", "sigma", "gamma", "mean_abs_statistic", "se"], &rows)?;
            art.json("boltzmann_gibbs.json", &rep)?;
            let plot = Plot::new(&format!("Boltzmann-Gibbs statistic, ratio {:.3}", rep.ratio), "n", "E|statistic|").scatter("mean", rows.iter().map(|r| (r[0], r[3])).collect()).log_log();
            art.svg("boltzmann_gibbs.svg", &plot)?;
        }
    }
    Ok(())
}

fn verify(cfg: &ExperimentConfig, art: &mut Artifacts) -> Res {
    let sec = cfg.verify.as_ref().expect("validated");
    let beta = cfg.model.beta;
    let sigma = cfg.model.sigma;
    let pot = cfg.potential();
    let thermo = Thermo::new(pot.clone(), beta, sigma)?;
    let mut checks: Vec<Check> = Vec::new();
    for check in &sec.checks {
        match check {
            VerifyCheck::EigSweep => {
                let mut rng = derive_stream(cfg.seed, 0, "verify-eig");
                for k in 0..sec.instances {
                    let n = rng.random_range(2..=50usize);
                    let c: f64 = rng.random_range(0.1..5.0);
                    let b: Vec<f64> = (0..n).map(|_| rng.random_range(c..=10.0 * c)).collect();
                    let e = eig_bound(&b, c)?;
                    checks.push(Check::new(format!("eig_{k}_n{n}"), e.lambda_min, e.bound, e.ok));
                }
                let e = eig_bound(&[1.0, 1.0], 1.0)?;
                checks.push(Check::new("eig_equality_n2", e.lambda_min, e.bound, (e.lambda_min - e.bound).abs() <= 1e-12));
            }
            VerifyCheck::Edgeworth => {
                for &n in &cfg.n {
                    let taus: Vec<f64> = (0..n).map(|j| cfg.initial.eval(j as f64 / n as f64).1).collect();
                    let rep = edgeworth_check(&thermo, &taus)?;
                    checks.push(Check::new(format!("edgeworth_n{n}_mass"), rep.mass, 1.0, (rep.mass - 1.0).abs() <= 1e-7));
                    checks.push(Check::new(format!("edgeworth_n{n}_positivity"), rep.min_density, -1e-9, rep.min_density >= -1e-9));
                    if n >= 16 {
                        checks.push(Check::new(format!("edgeworth_n{n}_order2_vs_order0"), rep.errors[2], rep.errors[0], rep.errors[2] <= rep.errors[0]));
                    }
                    let rows: Vec<Vec<f64>> = rep.grid.iter().zip(&rep.density).map(|(x, g)| vec![*x, *g]).collect();
                    art.csv(&format!("edgeworth_n{n}.csv"), &["x", "density"], &rows)?;
                }
            }
            VerifyCheck::EeGap => {
                let mut gaps = Vec::new();
                let mut rows = Vec::new();
                for &n in &cfg.n {
                    let taus: Vec<f64> = (0..n).map(|j| cfg.initial.eval(j as f64 / n as f64).1).collect();
                    let g = ee_gap(&thermo, &taus, LocalFunction::PerturbationForce)?;
                    rows.push(vec![n as f64, g.gap, g.bound, g.variance]);
                    gaps.push((n, g.gap));
                }
                for w in gaps.windows(2) {
                    if w[1].0 == 2 * w[0].0 && w[0].1 > 0.0 {
                        let ratio = w[1].1 / w[0].1;
                        checks.push(Check::new(format!("ee_gap_ratio_n{}", w[0].0), ratio, 0.8, (0.3..=0.8).contains(&ratio)));
                    }
                }
                art.csv("ee_gap.csv", &["n", "gap", "bound", "variance"], &rows)?;
            }
            VerifyCheck::Subgaussian => {
                let g = subgaussian_order(&Distribution::Gaussian { var: 1.0 / beta }, 3.0, 6.0)?;
                let order = g.order.unwrap_or(f64::INFINITY);
                checks.push(Check::new("subgaussian_gaussian_order", order, 1.0 / beta, (order - 1.0 / beta).abs() <= 1e-8));
                for tau in [-2.0, -1.0, 0.0, 1.0, 2.0] {
                    let rep = subgaussian_order(&Distribution::Stretch { thermo: thermo.clone(), tau }, 8.0, 6.0)?;
                    checks.push(Check::new(format!("subgaussian_tail_tau{tau}"), rep.worst_tail_ratio, 1.0, rep.order.is_some() && rep.tail_ok));
                    checks.push(Check::new(format!("subgaussian_absolute_tau{tau}"), rep.worst_absolute_ratio, 1.0, rep.order.is_some() && rep.absolute_ok));
                }
            }
            VerifyCheck::Poisson => {
                let mut rng = derive_stream(cfg.seed, 0, "verify-poisson");
                let per_block = sec.instances.clamp(1, 10);
                for ell in [2usize, 3, 4] {
                    for k in 0..per_block {
                        let taus: Vec<f64> = (0..ell).map(|_| rng.random_range(-1.0..1.0)).collect();
                        let rhs = RhsSpec::random_waves(ell - 1, 3, &mut rng);
                        let sol = poisson_solve(&PoissonProblem::new(thermo.clone(), taus, rhs))?;
                        checks.push(Check::new(format!("poisson_l{ell}_{k}"), sol.max_grad, sol.grad_bound, sol.grad_bound_ok));
                    }
                }
            }
            VerifyCheck::Entropy => {
                let mu = [0.1, 0.2, 0.3, 0.4];
                let nu = [0.4, 0.3, 0.2, 0.1];
                let events = vec![vec![true, false, false, false], vec![true, true, false, false]];
                let obs = vec![vec![3.0, 1.0, -1.0, -3.0]];
                let rep = entropy_tools(&nu, &mu, &events, &obs, &[0.1, 0.5, 1.0, 2.0, 4.0])?;
                checks.extend(rep.checks.into_iter().map(|c| Check { name: format!("entropy_{}", c.name), ..c }));
                let (m, v) = (0.7, 1.9);
                let xs: Vec<f64> = (0..4001).map(|j| -15.0 + j as f64 * 0.0075).collect();
                let law = |mean: f64| {
                    let raw: Vec<f64> = xs.iter().map(|x| (-(x - mean) * (x - mean) / (2.0 * v)).exp()).collect();
                    let s: f64 = raw.iter().sum();
                    raw.into_iter().map(|r| r / s).collect::<Vec<_>>()
                };
                let h = relative_entropy(&law(m), &law(0.0))?;
                let exact = gaussian_relative_entropy(m, v, 0.0, v);
                checks.push(Check::new("entropy_gaussian_closed_form", h, exact, (h - exact).abs() <= 1e-10));
                let (moment, bound) = moment_from_tail(1.0, 2.0, 1.0, |l| 1f64.min(l.powi(-2)))?;
                checks.push(Check::new("entropy_moment_pareto", moment, bound, moment <= bound + 1e-8));
            }
        }
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    art.json("verify.json", &serde_json::json!({ "passed": failed == 0, "failed": failed, "checks": checks }))?;
    if failed > 0 {
        return Err(RunError::ChecksFailed(failed));
    }
    Ok(())
}
