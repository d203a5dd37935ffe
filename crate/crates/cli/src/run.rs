//! Experiment drivers. Each returns its artifacts in memory; nothing is written on failure.

use fhm_core::ansatz::build_hva;
use fhm_core::dynamics::{spin_correlation, structure_factor, CorrelationSeries, Propagator, TrotterPlan};
use fhm_core::exact::{sector_ground_energy, sector_spectrum, EigenSystem};
use fhm_core::model::{band_energy, fermi_sea, free_fermion_energy, hamiltonian_qubit, HubbardParams, Spin};
use fhm_core::qeom::{build_pool_with, run_qeom, Direction, Thresholds};
use fhm_core::resources as res;
use fhm_core::spectral::{exact_lehmann, greens_function, omega_grid, PeakKind, SpectralResult};
use fhm_core::vqe::sector_vqe;
use fhm_core::State64;
use rayon::prelude::*;

use crate::config::{Experiment, GroundSource, PropagatorChoice, RunConfig, StateSource};
use crate::error::CliError;
use crate::output::{json, text, Artifact, Table};

pub fn run(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    match cfg.experiment.expect("resolved config") {
        Experiment::GroundScan => ground_scan(cfg),
        Experiment::Gaps => gaps(cfg),
        Experiment::Spectral => spectral(cfg),
        Experiment::Dynamics => dynamics(cfg),
        Experiment::Resources => resources(cfg),
        Experiment::Band => band(cfg),
    }
}

/// `(t', U)` points, `U` outermost.
fn scan_points(cfg: &RunConfig) -> Vec<(f64, f64)> {
    cfg.u_values().iter().flat_map(|&u| cfg.t_primes().iter().map(move |&tp| (tp, u))).collect()
}

fn check_sector(cfg: &RunConfig, (nu, nd): (usize, usize)) -> Result<(), CliError> {
    if nu > cfg.l || nd > cfg.l {
        return Err(CliError::Config(format!("sector ({nu}, {nd}) infeasible on {} sites", cfg.l)));
    }
    Ok(())
}

fn ground_scan(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let sector = cfg.sector();
    check_sector(cfg, sector)?;
    let points = scan_points(cfg);
    let header = ["t_prime", "U", "sector_up", "sector_down", "energy", "iterations", "fidelity"];
    let mut out = Vec::new();
    if cfg.solver.exact() {
        let energies = points
            .par_iter()
            .map(|&(tp, u)| Ok(sector_ground_energy(&cfg.params(tp, u)?, sector.0, sector.1)?))
            .collect::<Result<Vec<f64>, CliError>>()?;
        let mut t = Table::new("ground_scan_exact.csv", &header)?;
        for (&(tp, u), e) in points.iter().zip(energies) {
            t.row((tp, u, sector.0, sector.1, e, None::<usize>, None::<f64>))?;
        }
        out.push(t.finish()?);
    }
    if cfg.solver.vqe() {
        let results = points
            .par_iter()
            .map(|&(tp, u)| Ok(sector_vqe(&cfg.params(tp, u)?, cfg.depth(), sector, &cfg.vqe)?))
            .collect::<Result<Vec<_>, CliError>>()?;
        let mut t = Table::new("ground_scan_vqe.csv", &header)?;
        let mut detail = Vec::new();
        for (&(tp, u), r) in points.iter().zip(&results) {
            t.row((tp, u, sector.0, sector.1, r.energy, r.iterations, r.fidelity_vs_exact))?;
            detail.push(serde_json::json!({
                "t_prime": tp,
                "U": u,
                "energy": r.energy,
                "stage1_energy": r.stage1_energy,
                "stage_iterations": r.stage_iterations,
                "converged": r.converged,
                "theta_opt": r.theta_opt,
            }));
        }
        out.push(t.finish()?);
        out.push(json("vqe_parameters.json", serde_json::json!({ "depth": cfg.depth(), "points": detail })));
    }
    Ok(out)
}

/// Ground energies of the four sectors entering the charge and spin gaps.
fn gap_energies(cfg: &RunConfig, p: &HubbardParams, vqe: bool) -> Result<[f64; 4], CliError> {
    let h = cfg.l / 2;
    let sectors = [(h, h), (h + 1, h), (h - 1, h), (h + 2, h - 2)];
    let mut e = [0.0; 4];
    for (slot, &s) in e.iter_mut().zip(&sectors) {
        *slot = if vqe { sector_vqe(p, cfg.depth(), s, &cfg.vqe)?.energy } else { sector_ground_energy(p, s.0, s.1)? };
    }
    Ok(e)
}

fn gaps(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    if cfg.l % 2 != 0 {
        return Err(CliError::Config(format!("gaps need an even number of sites, got {}", cfg.l)));
    }
    let points = scan_points(cfg);
    let header = ["t_prime", "U", "charge_gap", "spin_gap", "e_half", "e_plus", "e_minus", "e_spin"];
    let mut out = Vec::new();
    for (vqe, name) in [(false, "gaps_exact.csv"), (true, "gaps_vqe.csv")] {
        if (vqe && !cfg.solver.vqe()) || (!vqe && !cfg.solver.exact()) {
            continue;
        }
        let rows = points
            .par_iter()
            .map(|&(tp, u)| gap_energies(cfg, &cfg.params(tp, u)?, vqe))
            .collect::<Result<Vec<_>, CliError>>()?;
        let mut t = Table::new(name, &header)?;
        for (&(tp, u), e) in points.iter().zip(rows) {
            let charge = e[1] + e[2] - 2.0 * e[0];
            let spin = e[3] - e[0];
            t.row((tp, u, charge, spin, e[0], e[1], e[2], e[3]))?;
        }
        out.push(t.finish()?);
    }
    Ok(out)
}

/// Ground state of `sector` from exact diagonalization or VQE.
fn ground_state(cfg: &RunConfig, p: &HubbardParams, sector: (usize, usize)) -> Result<(f64, State64), CliError> {
    match cfg.ground {
        GroundSource::Exact => {
            let h = hamiltonian_qubit(p)?;
            let s = sector_spectrum(&h, sector.0, sector.1, Some(1))?;
            Ok((s.eigenvalues[0], s.eigenvectors[0].clone()))
        }
        GroundSource::Vqe => {
            let r = sector_vqe(p, cfg.depth(), sector, &cfg.vqe)?;
            let state = build_hva(p, cfg.depth(), sector)?.circuit.run(&r.theta_opt)?;
            Ok((r.energy, state))
        }
    }
}

struct SpectralPoint {
    results: Vec<SpectralResult<f64>>,
    qeom: Option<serde_json::Value>,
}

fn spectral_point(cfg: &RunConfig, p: &HubbardParams, ks: &[f64], omega: &[f64]) -> Result<SpectralPoint, CliError> {
    let spin = cfg.spin();
    match cfg.states {
        StateSource::Exact if cfg.ground == GroundSource::Exact => {
            let ex = exact_lehmann(p, spin)?;
            let results = ks.iter().map(|&k| ex.spectral(k, spin, cfg.eta, omega)).collect::<Result<_, _>>()?;
            Ok(SpectralPoint { results, qeom: None })
        }
        StateSource::Exact => {
            let ex = exact_lehmann(p, spin)?;
            let (e0, g) = ground_state(cfg, p, p.half_filling())?;
            let results = ks
                .iter()
                .map(|&k| greens_function((e0, &g), &ex.plus, &ex.minus, k, spin, cfg.eta, omega))
                .collect::<Result<_, _>>()?;
            Ok(SpectralPoint { results, qeom: None })
        }
        StateSource::Qeom => {
            if spin != Spin::Up {
                return Err(CliError::Config("qEOM pools add or remove spin-up particles; use spin \"up\"".to_string()));
            }
            let h = hamiltonian_qubit(p)?;
            let (e0, g) = ground_state(cfg, p, p.half_filling())?;
            let mut plus = Vec::new();
            let mut minus = Vec::new();
            let mut diag = Vec::new();
            for dir in [Direction::Charging, Direction::Decharging] {
                let sol = run_qeom(&g, &h, &build_pool_with(p.l, dir, cfg.pool)?, &Thresholds::default())?;
                let states: Vec<(f64, State64)> = sol.retained().map(|(e, s)| (e, s.clone())).collect();
                diag.push(sol.to_json());
                match dir {
                    Direction::Charging => plus = states,
                    Direction::Decharging => minus = states,
                }
            }
            let results = ks
                .iter()
                .map(|&k| greens_function((e0, &g), &plus, &minus, k, spin, cfg.eta, omega))
                .collect::<Result<_, _>>()?;
            Ok(SpectralPoint { results, qeom: Some(serde_json::json!({ "ground_energy": e0, "solutions": diag })) })
        }
    }
}

fn spectral(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let ks = cfg.momenta();
    let omega: Vec<f64> = omega_grid(cfg.omega.lo, cfg.omega.hi, cfg.omega.step);
    let points = scan_points(cfg);
    let computed = points
        .par_iter()
        .map(|&(tp, u)| spectral_point(cfg, &cfg.params(tp, u)?, &ks, &omega))
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut a = Table::new("spectral.csv", &["t_prime", "U", "k", "omega", "A"])?;
    let mut poles = Table::new("poles.csv", &["t_prime", "U", "k", "kind", "omega", "energy", "weight"])?;
    let mut qeom = Vec::new();
    for (&(tp, u), pt) in points.iter().zip(&computed) {
        for r in &pt.results {
            for (w, v) in r.omega.iter().zip(&r.a) {
                a.row((tp, u, r.k, w, v))?;
            }
            for c in &r.contributions {
                let kind = match c.kind {
                    PeakKind::Particle => "particle",
                    PeakKind::Hole => "hole",
                };
                poles.row((tp, u, r.k, kind, c.omega, c.energy, c.weight))?;
            }
        }
        if let Some(q) = &pt.qeom {
            qeom.push(serde_json::json!({ "t_prime": tp, "U": u, "qeom": q }));
        }
    }
    let mut out = vec![a.finish()?, poles.finish()?];
    if !qeom.is_empty() {
        out.push(json("qeom.json", serde_json::json!({ "pool": cfg.pool, "points": qeom })));
    }
    Ok(out)
}

fn dynamics(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let sector = cfg.sector();
    check_sector(cfg, sector)?;
    let js: Vec<usize> = (0..cfg.l).collect();
    let qs = cfg.momenta();
    let s_omega = cfg.s_omega.points();
    let plan = TrotterPlan { dt: cfg.dt, mode: cfg.trotter_mode() };
    let mut kinds = Vec::new();
    if matches!(cfg.propagator, PropagatorChoice::Trotter | PropagatorChoice::Both) {
        kinds.push("trotter");
    }
    if matches!(cfg.propagator, PropagatorChoice::Exact | PropagatorChoice::Both) {
        kinds.push("exact");
    }
    let points = scan_points(cfg);
    let mut out = Vec::new();
    for kind in kinds {
        let mut corr = Table::new(&format!("correlations_{kind}.csv"), &["t_prime", "U", "tau", "j", "re_C", "im_C"])?;
        let mut sq = Table::new(&format!("structure_factor_{kind}.csv"), &["t_prime", "U", "q", "omega", "S_zz", "S_zz_im"])?;
        for &(tp, u) in &points {
            let p = cfg.params(tp, u)?;
            let (_, g) = ground_state(cfg, &p, sector)?;
            let series: CorrelationSeries = if kind == "trotter" {
                spin_correlation(&g, &p, cfg.site, &js, cfg.tau_max, cfg.dt, &Propagator::Trotter(plan))?
            } else {
                let sys = EigenSystem::new(&hamiltonian_qubit(&p)?)?;
                spin_correlation(&g, &p, cfg.site, &js, cfg.tau_max, cfg.dt, &Propagator::Exact(&sys))?
            };
            for (ti, &tau) in series.times.iter().enumerate() {
                for (&j, vals) in series.js.iter().zip(&series.values) {
                    corr.row((tp, u, tau, j, vals[ti].re, vals[ti].im))?;
                }
            }
            for &q in &qs {
                let s = structure_factor(&series, cfg.l, q, &s_omega, cfg.window())?;
                for (w, z) in s_omega.iter().zip(s) {
                    sq.row((tp, u, q, w, z.re, z.im))?;
                }
            }
        }
        out.push(corr.finish()?);
        out.push(sq.finish()?);
    }
    Ok(out)
}

fn resources(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let spec = &cfg.resources;
    let (l, d) = spec.static_counts.expect("resolved config");
    let lt = spec.trotter.expect("resolved config");
    let st = res::static_gate_counts(l, d)?;
    let tr = res::trotter_gate_counts(lt)?;
    let mut routes = Table::new("routes.csv", &["preset", "sites", "qubits", "swap_upper_bound"])?;
    let mut presets = Vec::new();
    for name in &spec.routes {
        let (topo, map) = res::preset(name)?;
        let b = res::swap_upper_bound(&topo, &map, &res::ansatz_pairs(map.sites))?;
        routes.row((name, map.sites, topo.len(), b.total))?;
        presets.push(serde_json::json!({ "name": name, "sites": map.sites, "swap_upper_bound": b.total, "by_kind": b.by_kind }));
    }
    let scaling = res::all_to_all_scaling(&spec.scaling_sizes)?;
    let mut value = serde_json::json!({
        "static": st,
        "trotter": tr,
        "presets": presets,
        "leading_terms": [res::mapping_leading_term("fig7a", l, d)?, res::mapping_leading_term("fig7b", l, d)?],
        "all_to_all_scaling": scaling,
    });
    if lt == 20 {
        value["trotter_swap_discrepancy"] = serde_json::json!({
            "formula": tr.swaps,
            "table": res::TABLE_L20_SWAP_CNOTS,
        });
    }
    let table = if l == lt { res::report_table(l, d)? } else { render_counts(&st, &tr) };
    Ok(vec![json("resources.json", value), text("resources.txt", table), routes.finish()?])
}

fn render_counts(st: &res::StaticCounts, tr: &res::TrotterCounts) -> String {
    let mut s = format!("statics  L={} d={}\n", st.l, st.d);
    s.push_str("            RsY    RsZ    RsX  swaps\n");
    for (label, g) in [("gates", st.gates), ("cnots", st.cnots)] {
        s.push_str(&format!("{label:<7} {:>6} {:>6} {:>6} {:>6}\n", g.rsy, g.rsz, g.rsx, g.swaps));
    }
    s.push_str(&format!("dynamics L={}\n", tr.l));
    s.push_str("              U      t     t'  swaps\n");
    s.push_str(&format!("cnots   {:>6} {:>6} {:>6} {:>6}\n", tr.u, tr.t, tr.t_prime, tr.swaps));
    s
}

fn band(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let sector = cfg.sector();
    check_sector(cfg, sector)?;
    let mut t = Table::new("band.csv", &["t_prime", "k", "epsilon", "occupied_up", "occupied_down"])?;
    let mut f = Table::new("fermi.csv", &["t_prime", "sector_up", "sector_down", "free_energy", "fermi_momenta_up"])?;
    for &tp in cfg.t_primes() {
        let p = cfg.params(tp, cfg.u)?;
        let up = fermi_sea(&p, sector.0);
        let down = fermi_sea(&p, sector.1);
        let has = |sea: &[f64], k: f64| sea.iter().any(|&q| (q - k).abs() < 1e-12);
        for k in fhm_core::model::momenta(cfg.l) {
            t.row((tp, k, band_energy(&p, k), has(&up, k), has(&down, k)))?;
        }
        let mut sea = up.clone();
        sea.sort_by(f64::total_cmp);
        let listed: Vec<String> = sea.iter().map(|k| k.to_string()).collect();
        f.row((tp, sector.0, sector.1, free_fermion_energy(&p, sector.0, sector.1), listed.join(";")))?;
    }
    Ok(vec![t.finish()?, f.finish()?])
}
