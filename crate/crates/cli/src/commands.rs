use std::path::Path;

use serde::Serialize;
use serde_json::json;
use weakpde::assembly::sample_domains;
use weakpde::experiments::{
    load_base_field, run_ensemble_on, sweep_on, EnsembleResult, ExperimentConfig, SweepAxis, TermSummary,
};
use weakpde::field::{correlation_scales, mean_windowed_spectrum, power_spectrum, write_field};
use weakpde::ks::simulate_ks;
use weakpde::regression::{equation_string, normalize_to_term};
use weakpde::{Axis, Field2D};

use crate::error::{io_at, CliError, CliResult};
use crate::output::{write_atomic, RunManifest};
use crate::settings::{load, parse_values, resolve};
use crate::Common;

fn load_field(c: &ExperimentConfig, manifest: &mut RunManifest) -> CliResult<Field2D> {
    Ok(manifest.time("load", || load_base_field(&c.data))?)
}

pub fn simulate(config: Option<&Path>, out: &Path, seed: Option<u64>, duration: Option<f64>) -> CliResult<()> {
    let mut c = load(config)?;
    let mut sim = c.data.simulation.clone().unwrap_or_default();
    if let Some(s) = seed {
        sim.seed = s;
    }
    if let Some(d) = duration {
        sim.duration = d;
    }
    sim.validate()?;
    c.data.simulation = Some(sim.clone());
    c.data.file = None;
    let mut manifest = RunManifest::new("simulate", &c, json!({ "out": out }));
    let field = manifest.time("simulate", || simulate_ks(&sim))?;
    manifest.time("write", || write_atomic(out, |w| Ok(write_field(&field, w)?)))?;
    let m = manifest.write_for(out)?;
    println!(
        "wrote {} ({} x {} points, dx = {:.6}, dt = {}) and {}",
        out.display(),
        field.n_x(),
        field.n_t(),
        field.delta_x(),
        field.delta_t(),
        m.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct TrialReport {
    index: usize,
    noise_seed: u64,
    domain_seed: u64,
    active_terms: Vec<String>,
    /// Normalized so that the reference term has its true value when it
    /// survives; otherwise the unit-norm null vector.
    coefficients: Vec<f64>,
    equation: Option<String>,
    residual: Option<f64>,
    exact_support: bool,
    delta_c: Vec<(String, f64)>,
    failure: Option<String>,
}

#[derive(Serialize)]
struct IdentifyReport {
    labels: Vec<String>,
    reference_term: String,
    trials: Vec<TrialReport>,
    summary: Vec<TermSummary>,
    p_spurious: f64,
    p_missing: f64,
    failures: usize,
}

fn report(c: &ExperimentConfig, r: &EnsembleResult) -> CliResult<IdentifyReport> {
    let labels = c.labels();
    let truth = c.truth()?;
    let trials = r
        .trials
        .iter()
        .map(|t| {
            let (active_terms, coefficients, equation, residual) = match &t.model {
                Some(m) => {
                    let coefficients = normalize_to_term(m, truth.reference).unwrap_or_else(|_| m.coefficients.clone());
                    (
                        m.active_terms.iter().map(|&i| labels[i].clone()).collect(),
                        coefficients,
                        equation_string(m, &labels, truth.reference).ok(),
                        Some(m.residual),
                    )
                }
                None => (Vec::new(), Vec::new(), None, None),
            };
            TrialReport {
                index: t.index,
                noise_seed: t.noise_seed,
                domain_seed: t.domain_seed,
                active_terms,
                coefficients,
                equation,
                residual,
                exact_support: t.exact_support(),
                delta_c: t.errors.iter().map(|e| (labels[e.term].clone(), e.delta_c)).collect(),
                failure: t.failure.clone(),
            }
        })
        .collect();
    Ok(IdentifyReport {
        labels,
        reference_term: c.reference_term.clone(),
        trials,
        summary: r.summary.clone(),
        p_spurious: r.p_spurious,
        p_missing: r.p_missing,
        failures: r.failures,
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        writeln!(w).map_err(io_at(path))
    })
}

fn print_summary(summary: &[TermSummary], p_spurious: f64, p_missing: f64, m: usize) {
    println!("p_spurious = {p_spurious:.3}, p_missing = {p_missing:.3} over {m} trials");
    for s in summary {
        match (s.mean, s.ci_half_width) {
            (Some(mean), Some(ci)) => println!("  {:<10} mean delta_c = {mean:.3e} ± {ci:.1e}", s.label),
            (Some(mean), None) => println!("  {:<10} delta_c = {mean:.3e}", s.label),
            _ => println!("  {:<10} no trial with the exact support", s.label),
        }
    }
}

pub fn identify(common: &Common, trials: Option<usize>, out: &Path) -> CliResult<()> {
    let mut c = resolve(common)?;
    c.ensemble_size = trials.unwrap_or(1);
    c.validate()?;
    let mut manifest = RunManifest::new("identify", &c, json!({ "out": out }));
    let base = load_field(&c, &mut manifest)?;
    let result = manifest.time("identify", || run_ensemble_on(&c, &base))?;
    if result.failures == result.size() {
        let why = result.trials[0].failure.clone().unwrap_or_default();
        return Err(CliError::Numerical(format!("every trial failed; first: {why}")));
    }
    let rep = report(&c, &result)?;
    for t in rep.trials.iter().take(10) {
        match (&t.equation, &t.failure) {
            (Some(eq), _) => println!("trial {}: {eq}", t.index),
            (None, Some(f)) => println!("trial {}: failed: {f}", t.index),
            (None, None) => println!(
                "trial {}: reference term eliminated; kept {}",
                t.index,
                t.active_terms.join(", ")
            ),
        }
    }
    if rep.trials.len() > 10 {
        println!("... {} more trials in {}", rep.trials.len() - 10, out.display());
    }
    print_summary(&rep.summary, rep.p_spurious, rep.p_missing, rep.trials.len());
    manifest.time("write", || write_json(out, &rep))?;
    manifest.write_for(out)?;
    Ok(())
}

pub fn sweep(common: &Common, axis: &str, values: &str, trials: Option<usize>, out: &Path) -> CliResult<()> {
    let axis: SweepAxis = axis.parse()?;
    let values = parse_values(values)?;
    let mut c = resolve(common)?;
    if let Some(m) = trials {
        c.ensemble_size = m;
    }
    c.validate()?;
    // reject bad sweep points before any expensive work
    for &v in &values {
        axis.apply(&c, v)?;
    }
    let mut manifest = RunManifest::new("sweep", &c, json!({ "axis": axis.name(), "values": values, "out": out }));
    let base = load_field(&c, &mut manifest)?;
    let table = manifest.time("sweep", || sweep_on(&c, &base, axis, &values))?;
    for row in &table.rows {
        let r = &row.result;
        let dc: Vec<String> = r
            .summary
            .iter()
            .map(|s| match s.mean {
                Some(m) => format!("{}={m:.2e}", s.label),
                None => format!("{}=-", s.label),
            })
            .collect();
        println!(
            "{} = {}: p_spurious {:.2}, p_missing {:.2}, {}",
            axis,
            row.value,
            r.p_spurious,
            r.p_missing,
            dc.join(" ")
        );
    }
    manifest.time("write", || write_atomic(out, |w| Ok(table.write_csv(w)?)))?;
    manifest.write_for(out)?;
    Ok(())
}

pub fn spectrum(common: &Common, axis: Axis, windowed: Option<usize>, out: &Path) -> CliResult<()> {
    let c = resolve(common)?;
    let mut manifest = RunManifest::new(
        "spectrum",
        &c,
        json!({ "axis": axis, "windowed": windowed, "out": out }),
    );
    let base = load_field(&c, &mut manifest)?;
    let field = c.prepare_field(&base)?;
    let profile = manifest.time("spectrum", || -> CliResult<_> {
        Ok(match windowed {
            Some(n) => {
                let (hx, ht) = c.half_cells(&field)?;
                let domains = sample_domains(n, hx, ht, field.n_x(), field.n_t(), c.master_seed)?;
                mean_windowed_spectrum(&field, &domains, c.weights.alpha, c.weights.beta, axis)?
            }
            None => power_spectrum(&field, axis)?,
        })
    })?;
    manifest.time("write", || {
        write_atomic(out, |w| {
            let mut csv = csv::Writer::from_writer(w);
            let err = |e: csv::Error| CliError::Io(format!("{}: {e}", out.display()));
            csv.write_record(["frequency", "power"]).map_err(err)?;
            for (f, p) in profile.frequencies.iter().zip(&profile.power) {
                csv.write_record([format!("{f:e}"), format!("{p:e}")]).map_err(err)?;
            }
            csv.flush().map_err(io_at(out))
        })
    })?;
    manifest.write_for(out)?;
    println!(
        "{} points, dx = {:.6}, dt = {}; peak at {:.4}",
        profile.len(),
        field.delta_x(),
        field.delta_t(),
        profile.peak_frequency()
    );
    match correlation_scales(&field) {
        Ok((lx, lt)) => println!("correlation length {lx:.3}, correlation time {lt:.3}"),
        Err(e) => println!("correlation scales unavailable: {e}"),
    }
    Ok(())
}

pub fn print_config(common: &Common) -> CliResult<()> {
    let c = resolve(common)?;
    let text = toml::to_string(&c).map_err(|e| CliError::Config(e.to_string()))?;
    print!("{text}");
    Ok(())
}
