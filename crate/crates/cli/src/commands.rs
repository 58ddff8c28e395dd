use std::path::PathBuf;

use circqft::circulant::{phase_equivalent_circulant, CirculantSpec, GaugeReduction};
use circqft::models::{solve_level_shifts, SixLevelModel};
use circqft::propagator::{
    dynamical_phase_prediction, evolve_with, factor_phased_dft, predict_permutation, EvolveOptions,
    DEFAULT_ACCEPT_RESIDUAL,
};
use circqft::qpe::{index_bits, run_qpe, sample_counts, PhaseValue};
use circqft::schedule::{adiabaticity_report, eigen_trajectories, uniform_grid, Direction, Schedule};
use circqft::{Error, C64};
use rayon::prelude::*;

use crate::config::{CommandError, ConfigError, ExperimentConfig, ModelConfig};
use crate::output::{header, line_chart, num, Output, Series};

pub struct RunOptions {
    pub out: PathBuf,
    pub svg: bool,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
}

type CmdResult = Result<(), CommandError>;

fn meta(opts: &RunOptions) -> serde_json::Value {
    serde_json::json!({ "svg": opts.svg, "steps": opts.steps, "seed": opts.seed })
}

fn bits_string(bits: &[u8]) -> String {
    bits.iter().map(|b| char::from(b'0' + b)).collect()
}

fn grid_of(s: &Schedule) -> Vec<f64> {
    let (a, b) = s.window();
    uniform_grid(a, b, s.steps())
}

pub fn eigentraj(cfg: &ExperimentConfig, opts: &RunOptions) -> CmdResult {
    let s = cfg.schedule(opts.steps)?;
    let traj = eigen_trajectories(&s, &grid_of(&s))?;
    let n = s.dim();
    let mut out = Output::new(&opts.out)?;

    let mut cols = header(&["t"]);
    cols.extend((0..n).map(|k| format!("eps_{k}")));
    let rows: Vec<Vec<String>> = traj
        .times
        .iter()
        .zip(&traj.eigenvalues)
        .map(|(&t, ev)| std::iter::once(num(t)).chain(ev.iter().map(|&e| num(e))).collect())
        .collect();
    out.csv("eigentraj.csv", &cols, &rows)?;

    if opts.svg {
        let series: Vec<Series> = (0..n)
            .map(|k| Series {
                label: format!("ε{k}"),
                points: traj.times.iter().zip(&traj.eigenvalues).map(|(&t, ev)| (t, ev[k])).collect(),
            })
            .collect();
        out.text("eigentraj.svg", &line_chart(&[("Instantaneous eigenvalues", "energy", &series)], "t"))?;
    }
    println!("points: {}", traj.times.len());
    println!("min gap: {} at t = {}", num(traj.min_gap), num(traj.min_gap_time));
    if traj.min_gap <= 0.0 {
        eprintln!("warning: eigenvalues touch inside the window");
    }
    out.finish("eigentraj", cfg, meta(opts))?;
    Ok(())
}

pub fn evolve(cfg: &ExperimentConfig, opts: &RunOptions) -> CmdResult {
    let s = cfg.schedule(opts.steps)?;
    let n = s.dim();
    let stride = (s.steps() / 400).max(1);
    let run = evolve_with(&s, EvolveOptions { sample_stride: stride, convergence_check: true })?;
    let mut out = Output::new(&opts.out)?;

    let u = &run.final_propagator;
    let rows: Vec<Vec<String>> = (0..n)
        .flat_map(|j| (0..n).map(move |k| (j, k)))
        .map(|(j, k)| {
            let z = u[(j, k)];
            vec![j.to_string(), k.to_string(), num(z.re), num(z.im), num(z.norm())]
        })
        .collect();
    out.csv("propagator.csv", &header(&["row", "col", "re", "im", "abs"]), &rows)?;

    let mut cols = header(&["t"]);
    for j in 0..n {
        cols.extend((0..n).map(|k| format!("p_{j}_{k}")));
    }
    let rows: Vec<Vec<String>> = run
        .times
        .iter()
        .zip(&run.samples)
        .map(|(&t, m)| {
            let mut row = vec![num(t)];
            row.extend(m.entries().iter().map(|z| num(z.norm_sqr())));
            row
        })
        .collect();
    out.csv("evolution.csv", &cols, &rows)?;

    println!("steps: {}", s.steps());
    println!("unitarity drift: {}", num(run.unitarity_drift));
    if let Some(c) = run.convergence_estimate {
        println!("step-doubling change: {}", num(c));
    }

    let fac = factor_phased_dft(u, s.direction());
    let fac = match fac {
        Ok(f) => f,
        Err(e) => {
            out.finish("evolve", cfg, meta(opts))?;
            return Err(e.into());
        }
    };
    let prediction = dynamical_phase_prediction(&s);
    if let Err(e) = &prediction {
        eprintln!("warning: no phase prediction: {e}");
    }
    let prediction = prediction.ok();
    let rows: Vec<Vec<String>> = (0..n)
        .map(|k| {
            let pick = |v: Option<&Vec<f64>>| v.map(|v| num(v[k])).unwrap_or_else(|| "nan".into());
            let dynamical = prediction.as_ref().map(|p| &p.dynamical);
            let geometric = prediction.as_ref().and_then(|p| p.geometric.as_ref());
            vec![k.to_string(), fac.sigma.apply(k).to_string(), num(fac.alpha[k]), pick(dynamical), pick(geometric)]
        })
        .collect();
    out.csv(
        "factorization.csv",
        &header(&["n", "sigma_n", "alpha_n", "dynamical_n", "geometric_n"]),
        &rows,
    )?;
    println!("factorization residual: {}", num(fac.residual));
    println!("permutation: {}", fac.sigma);
    if !fac.is_accepted(DEFAULT_ACCEPT_RESIDUAL) {
        eprintln!("warning: residual above {DEFAULT_ACCEPT_RESIDUAL}; evolution is not adiabatic");
    }
    out.finish("evolve", cfg, meta(opts))?;
    Ok(())
}

pub fn adiabaticity(cfg: &ExperimentConfig, opts: &RunOptions) -> CmdResult {
    let s = cfg.schedule(opts.steps)?;
    let report = adiabaticity_report(&s, &grid_of(&s))?;
    let mut out = Output::new(&opts.out)?;
    let rows: Vec<Vec<String>> =
        report.rows.iter().map(|r| vec![num(r.t), num(r.min_gap), num(r.max_coupling)]).collect();
    out.csv("adiabaticity.csv", &header(&["t", "min_gap", "max_coupling"]), &rows)?;
    if opts.svg {
        let gap = Series { label: "min gap".into(), points: report.rows.iter().map(|r| (r.t, r.min_gap)).collect() };
        let coupling = Series {
            label: "max coupling".into(),
            points: report.rows.iter().map(|r| (r.t, r.max_coupling)).collect(),
        };
        let svg = line_chart(
            &[("Smallest gap", "energy", &[gap]), ("Nonadiabatic coupling", "rate", &[coupling])],
            "t",
        );
        out.text("adiabaticity.svg", &svg)?;
    }
    println!("min gap: {}", num(report.min_gap));
    println!("max coupling: {}", num(report.max_coupling));
    println!("margin (gap/coupling): {}", num(report.margin));
    println!("heuristic scale 1/T: {}", num(report.heuristic_scale));
    if !report.warnings.is_empty() {
        let first = &report.warnings[0];
        eprintln!(
            "warning: {} near-degenerate points (first at t = {}, gap {})",
            report.warnings.len(),
            num(first.t),
            num(first.gap)
        );
    }
    out.finish("adiabaticity", cfg, meta(opts))?;
    Ok(())
}

pub fn qpe(cfg: &ExperimentConfig, opts: &RunOptions) -> CmdResult {
    let q = cfg.qpe.ok_or_else(|| ConfigError("qpe command needs a `qpe` section".into()))?;
    let phase = PhaseValue::new(q.phi, q.r)?;
    let s = cfg.schedule(opts.steps)?.with_direction(Direction::Inverse);
    let r = run_qpe(&phase, &s)?;
    let mut out = Output::new(&opts.out)?;

    let rows: Vec<Vec<String>> = r
        .fidelity_trace
        .iter()
        .map(|&(t, p)| {
            let (a, b) = s.coefficients(t);
            vec![num(t), num(a), num(b), num(p)]
        })
        .collect();
    out.csv("qpe_trace.csv", &header(&["t", "h0_amplitude", "h1_amplitude", "fidelity"]), &rows)?;

    let counts = match q.shots {
        Some(shots) => Some(sample_counts(&r.distribution, shots, opts.seed.unwrap_or(0))?),
        None => None,
    };
    let sigma = predict_permutation(s.h0(), s.h1())?;
    let mut cols = header(&["outcome", "bits", "measured_state", "probability", "oracle_probability"]);
    if counts.is_some() {
        cols.push("counts".into());
    }
    let inverse = sigma.inverse();
    let rows: Vec<Vec<String>> = (0..phase.dim())
        .map(|k| {
            let m = inverse.apply(k);
            let mut row = vec![
                k.to_string(),
                bits_string(&index_bits(k, q.r)),
                m.to_string(),
                num(r.distribution[m]),
                num(r.oracle_distribution[m]),
            ];
            if let Some(c) = &counts {
                row.push(c[m].to_string());
            }
            row
        })
        .collect();
    out.csv("qpe_distribution.csv", &cols, &rows)?;

    if opts.svg {
        let h0 = Series {
            label: "H0 amplitude".into(),
            points: r.fidelity_trace.iter().map(|&(t, _)| (t, s.coefficients(t).0)).collect(),
        };
        let h1 = Series {
            label: "H1 amplitude".into(),
            points: r.fidelity_trace.iter().map(|&(t, _)| (t, s.coefficients(t).1)).collect(),
        };
        let fid = Series { label: "fidelity".into(), points: r.fidelity_trace.clone() };
        let svg = line_chart(&[("Pulses", "amplitude", &[h0, h1]), ("Target probability", "P(t)", &[fid])], "t");
        out.text("qpe.svg", &svg)?;
    }

    println!("phi: {}", num(q.phi));
    println!("expected bits: {}{}", bits_string(&r.expansion.bits), if r.expansion.exact { "" } else { " (nearest; phase is not an exact r-bit fraction)" });
    println!("recovered bits: {}", bits_string(&r.top_bits));
    println!("final fidelity: {}", num(r.final_fidelity));
    println!("nearest-bits probability: {}", num(r.relabeled_distribution[r.expansion.index()]));
    println!("total variation vs oracle: {}", num(r.total_variation));
    out.finish("qpe", cfg, meta(opts))?;
    Ok(())
}

pub fn models(cfg: &ExperimentConfig, opts: &RunOptions) -> CmdResult {
    let mut out = Output::new(&opts.out)?;
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut push = |q: &str, k: usize, z: C64| rows.push(vec![q.into(), k.to_string(), num(z.re), num(z.im)]);
    let real = |x: f64| C64::new(x, 0.0);
    let mut failure = None;

    match &cfg.model {
        ModelConfig::FourLevel { energy, .. } => {
            let m = cfg.four_level(*energy)?;
            for (k, l) in m.levels().iter().enumerate() {
                push("h0_level", k, real(*l));
            }
            for (k, l) in m.circulant_eigenvalues().iter().enumerate() {
                push("circulant_eigenvalue", k, real(*l));
            }
            let shifts = solve_level_shifts(*energy);
            push("zeeman", 0, real(shifts.zeeman));
            push("ground_stark", 0, real(shifts.ground_stark));
            push("excited_stark", 0, real(shifts.excited_stark));
            println!("levels: {:?}", m.levels().map(num));
            println!("E_Z = {}, E_gS = {}, E_eS = {}", num(shifts.zeeman), num(shifts.ground_stark), num(shifts.excited_stark));
            match predict_permutation(&m.h0(), &m.h1()) {
                Ok(sigma) => {
                    for k in 0..4 {
                        push("sigma", k, real(sigma.apply(k) as f64));
                    }
                    println!("predicted permutation: {sigma}");
                }
                Err(e) => eprintln!("warning: {e}"),
            }
            if let Some(w) = m.spectrum_warning() {
                eprintln!("warning: circulant eigenvalues coincide: {:?}", w.coincident);
            }
        }
        ModelConfig::SixLevel { omega1, omega2, .. } => {
            let model = SixLevelModel::new(C64::new(omega1[0], omega1[1]), C64::new(omega2[0], omega2[1]));
            match model.gauge_reduction() {
                Ok(red) => report_reduction(&red, &mut push),
                Err(e) => {
                    println!(
                        "no gauge reduction: |Ω1| = {}, |Ω2| = {}; a diagonal phase change cannot equalize link moduli",
                        num(model.omega1.norm()),
                        num(model.omega2.norm())
                    );
                    failure = Some(e);
                }
            }
        }
        ModelConfig::Custom { .. } => {
            let (_, h1) = cfg.hamiltonians()?;
            match CirculantSpec::from_matrix(&h1) {
                Ok(spec) => {
                    for (k, z) in spec.eigenvalues().iter().enumerate() {
                        push("circulant_eigenvalue", k, *z);
                    }
                    println!("H1 is circulant; eigenvalues {:?}", spec.real_eigenvalues().iter().map(|x| num(*x)).collect::<Vec<_>>());
                }
                Err(_) => match phase_equivalent_circulant(&h1) {
                    Ok(red) => report_reduction(&red, &mut push),
                    Err(e) => failure = Some(e),
                },
            }
        }
    }
    out.csv("models.csv", &header(&["quantity", "index", "re", "im"]), &rows)?;
    out.finish("models", cfg, meta(opts))?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn report_reduction(red: &GaugeReduction, push: &mut impl FnMut(&str, usize, C64)) {
    for (k, b) in red.beta.iter().enumerate() {
        push("gauge_phase", k, C64::new(*b, 0.0));
    }
    for (k, z) in red.spec.first_column().iter().enumerate() {
        push("circulant_entry", k, *z);
    }
    for (k, l) in red.spec.real_eigenvalues().iter().enumerate() {
        push("circulant_eigenvalue", k, C64::new(*l, 0.0));
    }
    push("loop_product", 0, red.loop_product);
    push("residual", 0, C64::new(red.residual, 0.0));
    let c1 = red.spec.coefficient(1);
    println!("circulant c1 = {} exp(i {})", num(c1.norm()), num(c1.arg()));
    println!("loop product: {} + {}i", num(red.loop_product.re), num(red.loop_product.im));
    println!("reduction residual: {}", num(red.residual));
    let pairs = red.degenerate_pairs();
    if !pairs.is_empty() {
        eprintln!("warning: degenerate circulant eigenvalues {pairs:?}; the adiabatic map is not unique");
    }
}

pub fn sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> CmdResult {
    let values = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| ConfigError("sweep command needs a `sweep` section".into()))?
        .et_values
        .clone();
    if !matches!(cfg.model, ModelConfig::FourLevel { .. }) {
        return Err(ConfigError("sweep supports the four_level model only".into()).into());
    }
    let (phi, r) = cfg.qpe.map(|q| (q.phi, q.r)).unwrap_or((0.75, 2));
    if r != 2 {
        return Err(ConfigError("sweep uses the 4-level register, qpe.r must be 2".into()).into());
    }
    let phase = PhaseValue::new(phi, r)?;
    let timescale = cfg.pulse_pair().timescale();

    let rows: Vec<Result<Vec<String>, Error>> = values
        .par_iter()
        .map(|&et| {
            let energy = et / timescale;
            let (h0, h1) = cfg.four_level(energy)?.hamiltonians();
            let s = cfg.schedule_from(h0, h1, opts.steps).map_err(|e| match e {
                CommandError::Core(e) => e,
                other => Error::InvalidParameter(other.to_string()),
            })?;
            let s = s.with_direction(Direction::Forward);
            let run = evolve_with(&s, EvolveOptions { sample_stride: usize::MAX, convergence_check: false })?;
            let residual = factor_phased_dft(&run.final_propagator, Direction::Forward)
                .map(|f| f.residual)
                .unwrap_or(f64::NAN);
            let q = run_qpe(&phase, &s)?;
            Ok(vec![num(et), num(energy), num(residual), num(run.unitarity_drift), num(q.final_fidelity)])
        })
        .collect();
    let rows: Vec<Vec<String>> = rows.into_iter().collect::<Result<_, _>>()?;

    let mut out = Output::new(&opts.out)?;
    out.csv(
        "sweep.csv",
        &header(&["et", "energy", "residual", "unitarity_drift", "final_fidelity"]),
        &rows,
    )?;
    for row in &rows {
        println!("E·T = {}: residual {}, fidelity {}", row[0], row[2], row[4]);
    }
    out.finish("sweep", cfg, meta(opts))?;
    Ok(())
}
