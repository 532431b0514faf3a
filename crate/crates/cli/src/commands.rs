use std::path::Path;

use snxp::cavity::group_delay_curve;
use snxp::fit::{delay_curve, fit_global, GlobalParams};
use snxp::foil::{
    chopper_transmission_freq, chopper_transmission_time, foil_transmission_freq,
    foil_transmission_time_smooth,
};
use snxp::format::{read_count_matrix, write_count_matrix};
use snxp::synth::synthesize;
use snxp::units::Units;
use snxp::Exec;

use crate::args::{DelayCmd, FitCmd, SpectrumCmd, SynthCmd};
use crate::config::{RunConfig, UnitMode};
use crate::error::CliError;
use crate::output::{create_dir, read, write_atomic, Cell, Table};

const SERIES_TOLERANCE: f64 = 1e-12;

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|i| a + i as f64 * step).collect()
}

/// Header names and leading cells for a detuning axis.
fn detuning_header(units: UnitMode) -> Vec<String> {
    let mut h = vec!["detuning".to_string()];
    if units.is_physical() {
        h.push("detuning_nev".into());
    }
    h
}

fn detuning_cells(units: UnitMode, d: f64) -> Vec<Cell> {
    let mut c = vec![Cell::F(d)];
    if units.is_physical() {
        c.push(Cell::F(Units::default().energy_to_nev(d)));
    }
    c
}

fn write_run_config(dir: &Path, user: &RunConfig) -> Result<(), CliError> {
    write_atomic(&dir.join("run.toml"), &user.to_toml())
}

pub fn spectrum(cmd: &SpectrumCmd, user: &RunConfig) -> Result<(), CliError> {
    let c = user.convert(UnitMode::Natural);
    let units = user.units;
    let s = c.spectrum;
    let dir = create_dir(&cmd.out)?;

    let centre = c.foil.doppler_detuning;
    let mut header = detuning_header(units);
    header.extend(["foil_abs", "foil_phase", "pulse_abs", "pulse_phase"].map(String::from));
    let mut freq = Table::new(&header);
    for d in linspace(centre - s.detuning_span, centre + s.detuning_span, s.n_points) {
        let foil = foil_transmission_freq(d, &c.foil);
        let pulse = chopper_transmission_freq(d, &c.chopper, &c.foil, SERIES_TOLERANCE)?;
        let mut row = detuning_cells(units, d);
        row.extend([
            Cell::F(foil.norm()),
            Cell::F(foil.arg()),
            Cell::F(pulse.norm()),
            Cell::F(pulse.arg()),
        ]);
        freq.row(&row);
    }

    let suffix = units.time_suffix();
    let mut time = Table::new(&[format!("t{suffix}"), "foil_abs".into(), "pulse_abs".into()]);
    for t in linspace(0.0, s.time_max, s.n_time_points) {
        time.row(&[
            Cell::F(units.time_out(t)),
            Cell::F(foil_transmission_time_smooth(t, &c.foil).norm()),
            Cell::F(chopper_transmission_time(t, &c.chopper, &c.foil).norm()),
        ]);
    }
    write_atomic(&dir.join("spectrum.csv"), &freq.into_string())?;
    write_atomic(&dir.join("time.csv"), &time.into_string())?;
    write_run_config(&dir, user)
}

pub fn delay(cmd: &DelayCmd, user: &RunConfig, exec: Exec) -> Result<(), CliError> {
    let c = user.convert(UnitMode::Natural);
    let units = user.units;
    let dir = create_dir(&cmd.out)?;
    let mut header = detuning_header(units);
    header.extend([
        format!("tau{}", units.time_suffix()),
        "reflection_abs".into(),
        "reliable".into(),
    ]);
    let mut table = Table::new(&header);
    for g in group_delay_curve(&c.sweep.detunings(), &c.cavity, exec) {
        let mut row = detuning_cells(units, g.detuning);
        row.extend([
            Cell::F(units.time_out(g.tau)),
            Cell::F(g.reflection.norm()),
            Cell::B(g.reliable),
        ]);
        table.row(&row);
    }
    write_atomic(&dir.join("delay.csv"), &table.into_string())?;
    write_run_config(&dir, user)
}

pub fn synth(cmd: &SynthCmd, user: &RunConfig, exec: Exec) -> Result<(), CliError> {
    let c = user.convert(UnitMode::Natural);
    let syn = synthesize(&c.sweep, c.foil.effective_thickness, &c.cavity, c.model, exec)?;
    if syn.expected.empty {
        eprintln!("warning: the model has no delayed signal; the count matrix is all zero");
    }
    write_atomic(&cmd.out, &write_count_matrix(&syn.data)?)?;
    println!(
        "{} counts in {} × {} bins written to {}",
        syn.data.total(),
        c.sweep.n_time_bins,
        c.sweep.n_detunings,
        cmd.out.display()
    );
    Ok(())
}

pub fn fit(cmd: &FitCmd, user: &RunConfig, exec: Exec) -> Result<(), CliError> {
    let c = user.convert(UnitMode::Natural);
    let units = user.units;
    let matrix = read_count_matrix(&read(&cmd.input)?)?;
    let data = matrix.to_dataset();
    let init = GlobalParams {
        kappa: c.cavity.kappa,
        g2n: c.cavity.g2n,
        delta_c: c.cavity.delta_c,
        effective_thickness: c.foil.effective_thickness,
    };
    let global = fit_global(&data, &init, &c.fit, exec)?;
    if !global.converged {
        eprintln!(
            "warning: global fit stopped after {} iterations without converging",
            global.iterations
        );
    }
    let curve = delay_curve(&data, &global, &c.fit, exec)?;
    let dir = create_dir(&cmd.out)?;

    let suffix = units.time_suffix();
    let truth = matrix.truth.as_ref().map(|t| &t.delays);
    let mut header = detuning_header(units);
    header.extend([format!("tau{suffix}"), format!("tau_stderr{suffix}"), "valid".into()]);
    if truth.is_some() {
        header.push(format!("true_tau{suffix}"));
    }
    let mut table = Table::new(&header);
    for (j, e) in curve.iter().enumerate() {
        let mut row = detuning_cells(units, e.detuning);
        row.extend([
            Cell::F(units.time_out(e.tau_mean)),
            Cell::F(units.time_out(e.tau_stderr)),
            Cell::B(e.is_valid()),
        ]);
        if let Some(d) = truth {
            row.push(Cell::F(units.time_out(d[j])));
        }
        table.row(&row);
    }

    let centres = matrix.config.bin_centers();
    let mut header = detuning_header(units);
    header.extend([
        format!("stage1_tau{suffix}"),
        "kept_starts".into(),
        "gated_counts".into(),
        "flags".into(),
    ]);
    let mut columns = Table::new(&header);
    for (j, e) in curve.iter().enumerate() {
        let gated: u64 = (0..centres.len())
            .filter(|&k| centres[k] >= c.fit.gate_start)
            .map(|k| matrix.counts[[k, j]])
            .sum();
        let flags: Vec<&str> = e.flags.iter().map(|f| f.as_str()).collect();
        let mut row = detuning_cells(units, e.detuning);
        row.extend([
            Cell::F(units.time_out(e.stage1_tau)),
            Cell::U(e.n_kept_starts as u64),
            Cell::U(gated),
            Cell::S(flags.join(";")),
        ]);
        columns.row(&row);
    }

    let global_toml = toml::to_string(&global).map_err(|e| CliError::Usage(e.to_string()))?;
    write_atomic(&dir.join("global_fit.toml"), &global_toml)?;
    write_atomic(&dir.join("delay_curve.csv"), &table.into_string())?;
    write_atomic(&dir.join("columns.csv"), &columns.into_string())?;
    write_run_config(&dir, user)?;
    let valid = curve.iter().filter(|e| e.is_valid()).count();
    println!(
        "global fit: κ = {}, g2N = {}, Δ_C = {}, L = {}; {valid}/{} delays valid",
        global.kappa,
        global.g2n,
        global.delta_c,
        global.effective_thickness,
        curve.len()
    );
    Ok(())
}
