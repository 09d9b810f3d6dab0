//! The batch subcommands. Each one computes everything in memory, then
//! writes its artifacts and a manifest in one go.

use std::path::{Path, PathBuf};
use std::time::Instant;

use dnls_core::augment::{
    assemble_jump, build_scattering_data, build_zeta_jump, check_product_condition, factorize_jump, schwarz_check,
    ArcData, ScatteringData,
};
use dnls_core::evolution::evolve_jump;
use dnls_core::potential::Potential;
use dnls_core::recon::{relative_l2, InverseConfig, InverseProblem, PointValue, REGULAR_SEMI_MINOR};
use dnls_core::rhp::SolveOptions;
use dnls_core::C64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::AppError;
use crate::io::{potential_csv, potential_json, table_csv, ArtifactRecord, Artifacts};
use crate::pde::step_dnls2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Direct,
    EvolveInvert,
    Roundtrip,
    ComparePde,
    Diag,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Direct => "direct",
            Command::EvolveInvert => "evolve-invert",
            Command::Roundtrip => "roundtrip",
            Command::ComparePde => "compare-pde",
            Command::Diag => "diag",
        }
    }
}

/// Runs `cmd` and writes its artifacts under `out`.
pub fn run(cmd: Command, cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, AppError> {
    let p = cfg.potential()?;
    let sd = build_scattering_data(&p, &cfg.direct())?;
    let mut art = Artifacts::default();
    let extra = match cmd {
        Command::Direct => direct(&sd, &mut art)?,
        Command::EvolveInvert => evolve_invert(cfg, &sd, &mut art)?,
        Command::Roundtrip => roundtrip(cfg, &p, &sd, &mut art)?,
        Command::ComparePde => compare_pde(cfg, &p, &sd, &mut art)?,
        Command::Diag => diag(cfg, &p, &sd, &mut art)?,
    };
    let manifest = Manifest::new(cmd, cfg, &p, &sd, art.records(), extra);
    art.add_json("manifest.json", &manifest);
    art.commit(out)
}

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub command: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    pub config: &'a RunConfig,
    pub potential: Value,
    pub r: f64,
    pub s_inf: f64,
    pub x0: f64,
    pub x0_left: Option<f64>,
    pub nodes: Value,
    pub times: &'a [f64],
    pub artifacts: Vec<ArtifactRecord>,
    pub summary: Value,
}

impl<'a> Manifest<'a> {
    fn new(
        cmd: Command,
        cfg: &'a RunConfig,
        p: &Potential,
        sd: &ScatteringData,
        artifacts: Vec<ArtifactRecord>,
        summary: Value,
    ) -> Manifest<'a> {
        let c = cfg.contour();
        Manifest {
            command: cmd.name(),
            version: env!("CARGO_PKG_VERSION"),
            config_hash: cfg.hash(),
            config: cfg,
            potential: json!({"half_width": p.half_width, "h": p.h, "points": p.len()}),
            r: sd.r,
            s_inf: sd.s_inf,
            x0: sd.x0,
            x0_left: sd.left.as_ref().map(|l| l.x0),
            nodes: json!({"n_arc": c.n_arc, "n_ray": c.n_ray, "total": sd.graph.n_total()}),
            times: &cfg.times,
            artifacts,
            summary,
        }
    }
}

fn pair(v: &C64) -> [f64; 2] {
    [v.re, v.im]
}

fn pairs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(pair).collect()
}

fn scattering_json(sd: &ScatteringData) -> Value {
    let arcs: Vec<Value> = sd
        .graph
        .arcs
        .iter()
        .zip(&sd.arcs)
        .map(|(arc, data)| {
            let d = match data {
                ArcData::Outer {
                    rho,
                    alpha,
                    alpha_breve,
                } => json!({"rho": pairs(rho), "alpha": pairs(alpha), "alpha_breve": pairs(alpha_breve)}),
                ArcData::Inner { rho0 } => json!({ "rho0": pairs(rho0) }),
                ArcData::Upper { inv_ab, inv_ab0, n21 } => {
                    json!({"inv_alpha_breve": pairs(inv_ab), "inv_alpha_breve0": pairs(inv_ab0), "n21": pairs(n21)})
                }
                ArcData::Lower { inv_a, inv_a0, n12 } => {
                    json!({"inv_alpha": pairs(inv_a), "inv_alpha0": pairs(inv_a0), "n12": pairs(n12)})
                }
            };
            json!({
                "piece": format!("{:?}", arc.piece),
                "plus": arc.plus,
                "minus": arc.minus,
                "nodes": pairs(&arc.nodes()),
                "data": d,
            })
        })
        .collect();
    json!({
        "r": sd.r,
        "s_inf": sd.s_inf,
        "x0": sd.x0,
        "x0_index": sd.x0_index,
        "arcs": arcs,
        "left": sd.left.as_ref().map(|l| scattering_json(l)),
    })
}

fn direct(sd: &ScatteringData, art: &mut Artifacts) -> Result<Value, AppError> {
    art.add_json("scattering.json", &scattering_json(sd));
    let mut rho_rows = Vec::new();
    let mut rho0_rows = Vec::new();
    for (arc, data) in sd.graph.arcs.iter().zip(&sd.arcs) {
        match data {
            ArcData::Outer { rho, .. } => {
                for (z, r) in arc.nodes().iter().zip(rho) {
                    rho_rows.push(vec![z.re, r.re, r.im]);
                }
            }
            ArcData::Inner { rho0 } => {
                for (z, r) in arc.nodes().iter().zip(rho0) {
                    rho0_rows.push(vec![z.re, r.re, r.im]);
                }
            }
            _ => {}
        }
    }
    rho_rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
    rho0_rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
    art.add("rho.csv", table_csv(&["lambda", "re", "im"], &rho_rows)?);
    art.add("rho0.csv", table_csv(&["lambda", "re", "im"], &rho0_rows)?);

    let jf = assemble_jump(sd);
    let off = jf.graph.offsets();
    let mut rows = Vec::new();
    for (ai, arc) in jf.graph.arcs.iter().enumerate() {
        for k in off[ai]..off[ai] + arc.n {
            let (z, j) = (jf.z[k], jf.j[k]);
            rows.push(vec![
                ai as f64, z.re, z.im, j[0][0].re, j[0][0].im, j[0][1].re, j[0][1].im, j[1][0].re, j[1][0].im,
                j[1][1].re, j[1][1].im,
            ]);
        }
    }
    art.add(
        "jump.csv",
        table_csv(
            &[
                "arc", "z_re", "z_im", "j11_re", "j11_im", "j12_re", "j12_im", "j21_re", "j21_im", "j22_re", "j22_im",
            ],
            &rows,
        )?,
    );
    Ok(json!({"max_det_error": jf.max_det_error()}))
}

fn inverse_config(cfg: &RunConfig, sigma: bool) -> InverseConfig {
    InverseConfig {
        overlap_tol: cfg.tolerances.overlap,
        solve: SolveOptions {
            sigma,
            ..SolveOptions::default()
        },
        ..InverseConfig::default()
    }
}

fn x_grid(cfg: &RunConfig) -> Potential {
    Potential::zero(cfg.x_grid.half_width, cfg.x_grid.h)
}

/// All grid points, in parallel; results keep grid order.
pub fn sweep(ip: &InverseProblem, xs: &[f64], icfg: &InverseConfig, tol: f64) -> Result<Vec<PointValue>, AppError> {
    let pts = xs
        .par_iter()
        .map(|&x| ip.q_at(x, icfg))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(bad) = pts.iter().find(|p| !(p.residual <= tol)) {
        return Err(AppError::Numeric(format!(
            "BC residual {:e} at x = {} exceeds {tol:e}",
            bad.residual, bad.x
        )));
    }
    Ok(pts)
}

fn checked_overlap(ip: &InverseProblem, icfg: &InverseConfig) -> Result<f64, AppError> {
    let m = ip.overlap_mismatch(icfg)?;
    if m > icfg.overlap_tol {
        return Err(dnls_core::Error::Overlap(m).into());
    }
    Ok(m)
}

/// Inverse map at one time on the configured x-grid.
pub fn invert_at(
    cfg: &RunConfig,
    ip: &InverseProblem,
    sigma: bool,
) -> Result<(Potential, Vec<PointValue>, f64), AppError> {
    let icfg = inverse_config(cfg, sigma);
    let overlap = checked_overlap(ip, &icfg)?;
    let grid = x_grid(cfg);
    let pts = sweep(ip, &grid.grid(), &icfg, cfg.tolerances.residual)?;
    let q = Potential {
        q: pts.iter().map(|p| p.q).collect(),
        ..grid
    };
    Ok((q, pts, overlap))
}

fn diag_rows(pts: &[PointValue]) -> Vec<Vec<f64>> {
    pts.iter()
        .map(|p| vec![p.x, p.residual, p.sigma_min.unwrap_or(f64::NAN)])
        .collect()
}

/// Problem at `t = 0`, with the regularized copy when `sigma_min` is wanted.
fn base_problem(sd: &ScatteringData, sigma: bool) -> Result<InverseProblem, AppError> {
    let ip = InverseProblem::new(sd, 0.0)?;
    Ok(if sigma { ip.with_regular(sd, REGULAR_SEMI_MINOR)? } else { ip })
}

fn evolve_invert(cfg: &RunConfig, sd: &ScatteringData, art: &mut Artifacts) -> Result<Value, AppError> {
    let base = base_problem(sd, cfg.sigma)?;
    let mut summary = Vec::new();
    for &t in &cfg.times {
        let ip = base.at_time(sd, t)?;
        let (q, pts, overlap) = invert_at(cfg, &ip, cfg.sigma)?;
        art.add(format!("q_t{t}.csv"), potential_csv(&q)?);
        art.add_json(format!("q_t{t}.json"), &potential_json(&q, Some(t)));
        art.add(
            format!("diag_t{t}.csv"),
            table_csv(&["x", "residual", "sigma_min"], &diag_rows(&pts))?,
        );
        summary.push(json!({"t": t, "overlap": overlap, "l2_norm": q.l2_norm()}));
    }
    Ok(Value::Array(summary))
}

fn roundtrip(cfg: &RunConfig, p: &Potential, sd: &ScatteringData, art: &mut Artifacts) -> Result<Value, AppError> {
    let ip = base_problem(sd, cfg.sigma)?;
    let (q, pts, overlap) = invert_at(cfg, &ip, cfg.sigma)?;
    let exact: Vec<C64> = q.grid().iter().map(|&x| p.interp(x)).collect();
    let rel = relative_l2(&q.q, &exact);
    let max = q.q.iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let rows: Vec<Vec<f64>> = q
        .grid()
        .iter()
        .zip(q.q.iter().zip(&exact))
        .map(|(x, (a, b))| vec![*x, a.re, a.im, b.re, b.im])
        .collect();
    art.add("roundtrip.csv", table_csv(&["x", "re", "im", "re_in", "im_in"], &rows)?);
    art.add(
        "diag_t0.csv",
        table_csv(&["x", "residual", "sigma_min"], &diag_rows(&pts))?,
    );
    let report = json!({"rel_l2": rel, "max_error": max, "overlap": overlap});
    art.add_json("roundtrip.json", &report);
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareRow {
    pub t: f64,
    /// discrete L2 norm of the difference on the x-grid
    pub l2_error: f64,
    pub max_error: f64,
    pub runtime_s: f64,
    pub ist_runtime_s: f64,
    pub pde_runtime_s: f64,
    pub pde_l2_drift: f64,
}

/// IST and PDE solutions at each configured time.
pub fn compare_rows(
    cfg: &RunConfig,
    p: &Potential,
    sd: &ScatteringData,
) -> Result<(Vec<CompareRow>, Vec<(Potential, Potential)>), AppError> {
    let grid = x_grid(cfg);
    // one forward and one backward PDE run
    let mut fwd: Vec<f64> = cfg.times.iter().copied().filter(|t| *t >= 0.0).collect();
    let mut bwd: Vec<f64> = cfg.times.iter().copied().filter(|t| *t < 0.0).collect();
    fwd.sort_by(f64::total_cmp);
    bwd.sort_by(|a, b| b.total_cmp(a));
    let clock = Instant::now();
    let runs = [step_dnls2(p, &fwd, &cfg.pde)?, step_dnls2(p, &bwd, &cfg.pde)?];
    let pde_time = clock.elapsed().as_secs_f64() / cfg.times.len().max(1) as f64;

    let base = InverseProblem::new(sd, 0.0)?;
    let mut rows = Vec::new();
    let mut curves = Vec::new();
    for &t in &cfg.times {
        let clock = Instant::now();
        let (q, _, _) = invert_at(cfg, &base.at_time(sd, t)?, false)?;
        let ist_time = clock.elapsed().as_secs_f64();
        let run = &runs[usize::from(t < 0.0)];
        let k = run.times.iter().position(|s| *s == t).expect("time was scheduled");
        let pq = run.sample(k, &grid);
        let diff: Vec<f64> = q.q.iter().zip(&pq.q).map(|(a, b)| (a - b).norm()).collect();
        rows.push(CompareRow {
            t,
            l2_error: (grid.h * diff.iter().map(|d| d * d).sum::<f64>()).sqrt(),
            max_error: diff.iter().copied().fold(0.0, f64::max),
            runtime_s: ist_time + pde_time,
            ist_runtime_s: ist_time,
            pde_runtime_s: pde_time,
            pde_l2_drift: run.l2_drift,
        });
        curves.push((q, pq));
    }
    Ok((rows, curves))
}

fn compare_pde(cfg: &RunConfig, p: &Potential, sd: &ScatteringData, art: &mut Artifacts) -> Result<Value, AppError> {
    let (rows, curves) = compare_rows(cfg, p, sd)?;
    for (row, (q, pq)) in rows.iter().zip(&curves) {
        let tidy: Vec<Vec<f64>> = q
            .grid()
            .iter()
            .zip(q.q.iter().zip(&pq.q))
            .map(|(x, (a, b))| vec![*x, a.re, a.im, b.re, b.im])
            .collect();
        art.add(
            format!("compare_t{}.csv", row.t),
            table_csv(&["x", "ist_re", "ist_im", "pde_re", "pde_im"], &tidy)?,
        );
    }
    let report = serde_json::to_value(&rows).expect("plain data serializes");
    art.add_json("compare_pde.json", &report);
    Ok(report)
}

fn diag(cfg: &RunConfig, p: &Potential, sd: &ScatteringData, art: &mut Artifacts) -> Result<Value, AppError> {
    let jf = factorize_jump(&assemble_jump(sd))?;
    let s = sd.s_inf;
    let mut product = Vec::new();
    for node in [s, -s] {
        let r = check_product_condition(&jf, C64::new(node, 0.0))?;
        product.push(json!({"node": node, "order0": r.order0, "order1": r.order1}));
    }
    let zjf = build_zeta_jump(p, sd.r, sd.x0_index, &cfg.contour())?;
    let (min_eig, schwarz) = schwarz_check(&zjf);

    let base = base_problem(sd, true)?;
    let mut per_t = Vec::new();
    for &t in &cfg.times {
        let ip = base.at_time(sd, t)?;
        let (_, pts, overlap) = invert_at(cfg, &ip, true)?;
        art.add(
            format!("diag_t{t}.csv"),
            table_csv(&["x", "residual", "sigma_min"], &diag_rows(&pts))?,
        );
        let sig = pts.iter().filter_map(|p| p.sigma_min).fold(f64::INFINITY, f64::min);
        let res = pts.iter().map(|p| p.residual).fold(0.0, f64::max);
        let det = evolve_jump(&jf, t).max_det_error();
        per_t.push(json!({"t": t, "overlap": overlap, "min_sigma": sig, "max_residual": res, "det_error": det}));
    }
    let report = json!({
        "product_condition": product,
        "schwarz": {"min_eigenvalue": min_eig, "max_deviation": schwarz},
        "times": per_t,
    });
    art.add_json("diag.json", &report);
    Ok(report)
}
