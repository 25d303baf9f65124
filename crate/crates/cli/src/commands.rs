//! The six commands. Each returns its artifacts and a one-paragraph summary;
//! nothing touches the disk here.

use hardyopt_core::calculus::{coarea_constants, coarea_reduce, flux_sweep, relative_deviation, LevelIntegrand, RadialFunction};
use hardyopt_core::domain::{classify_ends, green_radial, GreenProfile, Limit};
use hardyopt_core::optimality::{null_sequence, optimality_probe, verify_construction, CutoffShape};
use hardyopt_core::rellich::{davies_hinz_weights, rellich_check, rellich_weights, LogGaussianBump};
use hardyopt_core::weights::{
    interpolated_weight, ground_state_quotient_weight, hardy_weight_alpha, hardy_weight_case1, hardy_weight_case2, hardy_weight_two_ends,
    optimal_alpha, GroundState, Weight,
};
use hardyopt_core::Exec;
use serde::Serialize;

use crate::config::{ConstructionKind, IntegrandSpec, RellichKind, RunConfig};
use crate::output::{csv_table, json_report, num, Artifact};
use crate::CliError;

pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub summary: String,
}

fn profile(cfg: &RunConfig) -> Result<GreenProfile, CliError> {
    Ok(match &cfg.profile {
        Some(spec) => {
            let (form, scale) = spec.form_and_scale();
            GreenProfile::from_form(form, scale, cfg.params()?, cfg.domain)?
        }
        None => green_radial(&cfg.params()?, &cfg.domain)?,
    })
}

fn construct(cfg: &RunConfig) -> Result<(Weight, GroundState, GreenProfile), CliError> {
    let g = profile(cfg)?;
    let p = cfg.p;
    let gamma = cfg.gamma.unwrap_or_else(|| g.inner_limit().finite().unwrap_or(0.0));
    let (w, v) = match cfg.construction {
        ConstructionKind::Case1 => hardy_weight_case1(&g)?,
        ConstructionKind::Case2 => hardy_weight_case2(&g, gamma)?,
        ConstructionKind::GroundStateQuotient => ground_state_quotient_weight(&g, gamma)?,
        ConstructionKind::Alpha => hardy_weight_alpha(&g, cfg.alpha.unwrap_or(optimal_alpha(p)))?,
        ConstructionKind::Interpolated => interpolated_weight(&g, gamma, cfg.alpha.unwrap_or(0.5))?,
        ConstructionKind::TwoEnds => {
            let (inf, sup) = g.range();
            hardy_weight_two_ends(&g, cfg.m.unwrap_or(inf), cfg.big_m.unwrap_or(sup), cfg.alpha.unwrap_or(optimal_alpha(p)))?
        }
    };
    Ok((w, v, g))
}

fn table_radii(cfg: &RunConfig) -> Vec<f64> {
    let mut radii = match &cfg.grid {
        Some(grid) => {
            let coord = cfg.domain.coordinate();
            let (a, b) = (coord.to_s(grid.r_lo), coord.to_s(grid.r_hi));
            let last = (grid.nodes - 1) as f64;
            let mut r: Vec<f64> = (0..grid.nodes).map(|i| coord.to_r(a + (b - a) * i as f64 / last)).collect();
            r.extend(grid.include.iter().copied());
            r
        }
        None => cfg.domain.sample_radii(121, 6.0),
    };
    radii.retain(|r| cfg.domain.contains(*r));
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    radii
}

#[derive(Serialize)]
struct WeightResult {
    weight: hardyopt_core::weights::WeightDescriptor,
    profile: hardyopt_core::domain::ProfileDescriptor,
    ends: (hardyopt_core::domain::EndBehavior, hardyopt_core::domain::EndBehavior),
    rows: usize,
}

pub fn weight(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (w, v, g) = construct(cfg)?;
    let radii = table_radii(cfg);
    if radii.is_empty() {
        return Err(CliError::Config("no tabulation radius lies inside the domain".into()));
    }
    let rows: Vec<Vec<String>> = radii.iter().map(|&r| vec![num(r), num(w.eval(r)), num(v.eval(r))]).collect();
    let result = WeightResult { weight: w.descriptor(), profile: g.descriptor()?, ends: classify_ends(&g), rows: rows.len() };
    Ok(Outcome {
        summary: format!(
            "{:?} weight on {:?}: {} rows, profile class {}",
            w.construction(),
            cfg.domain,
            rows.len(),
            g.classification().name()
        ),
        artifacts: vec![json_report("weight.json", "weight", cfg, &result)?, csv_table("weight.csv", &["r", "W", "v"], &rows)?],
    })
}

pub fn verify(cfg: &RunConfig, exec: Exec) -> Result<Outcome, CliError> {
    let (w, v, g) = construct(cfg)?;
    let report = verify_construction(&w, &v, &g, &cfg.verify_spec(exec))?;
    let mut windows = Vec::new();
    for (tag, seq) in [
        ("global", &report.global_windows),
        ("near_inner", &report.near_inner_windows),
        ("near_outer", &report.near_outer_windows),
    ] {
        for x in seq.iter() {
            windows.push(vec![tag.to_string(), num(x.window.r_lo), num(x.window.r_hi), num(x.lambda_hat), x.iterations.to_string()]);
        }
    }
    let nulls: Vec<Vec<String>> = report
        .null_seq_table
        .iter()
        .map(|r| vec![num(r.index), num(r.x), num(r.y), num(r.qsim), num(r.normalization), num(r.normalized_energy)])
        .collect();
    let masses: Vec<Vec<String>> =
        report.mass_divergence.iter().map(|m| vec![num(m.t_minus), num(m.t_plus), num(m.mass)]).collect();
    let mut artifacts = vec![
        json_report("verify.json", "verify", cfg, &report)?,
        csv_table("windows.csv", &["sequence", "r_lo", "r_hi", "lambda_hat", "iterations"], &windows)?,
        csv_table("null_seq.csv", &["index", "x", "y", "qsim", "normalization", "normalized_energy"], &nulls)?,
        csv_table("mass.csv", &["t_minus", "t_plus", "mass"], &masses)?,
    ];
    if let Some(grid) = &report.minimizer_grid {
        let rows: Vec<Vec<String>> =
            grid.nodes().iter().zip(report.minimizer.values()).map(|(r, f)| vec![num(*r), num(*f)]).collect();
        artifacts.push(csv_table("minimizer.csv", &["r", "phi"], &rows)?);
    }
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    Ok(Outcome {
        summary: format!(
            "{:?}: lambda_hat {:.6} (expected {}), checks {}",
            report.construction,
            report.lambda_hat,
            report.expected_lambda0,
            if failed.is_empty() { "all passed".to_string() } else { format!("failed: {}", failed.join(", ")) }
        ),
        artifacts,
    })
}

#[derive(Serialize)]
struct NullSeqResult {
    cutoff_shape: CutoffShape,
    rows: Vec<hardyopt_core::optimality::NullSequenceRow>,
}

pub fn null_seq(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (_, v, g) = construct(cfg)?;
    let shape = CutoffShape::for_ground_state(&v)?;
    let params = cfg.params()?;
    let rows = cfg
        .sequence_indices
        .iter()
        .map(|&k| null_sequence(&params, &v, &g.domain(), shape, k))
        .collect::<Result<Vec<_>, _>>()?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![num(r.index), num(r.x), num(r.y), num(r.qsim), num(r.normalization), num(r.normalized_energy)])
        .collect();
    let energies: Vec<String> = rows.iter().map(|r| format!("{:.4e}", r.normalized_energy)).collect();
    let result = NullSeqResult { cutoff_shape: shape, rows };
    Ok(Outcome {
        summary: format!("{shape:?} cutoffs, normalized energies [{}]", energies.join(", ")),
        artifacts: vec![
            json_report("null_seq.json", "null-seq", cfg, &result)?,
            csv_table("null_seq.csv", &["index", "x", "y", "qsim", "normalization", "normalized_energy"], &table)?,
        ],
    })
}

fn default_integrands(g: &GreenProfile, levels: usize) -> Result<Vec<IntegrandSpec>, CliError> {
    let beta = g.params().beta();
    let (inf, sup) = g.range();
    let v_sup = match sup {
        Limit::Finite(x) => x.powf(beta),
        Limit::Infinite => f64::INFINITY,
    };
    let v_inf = inf.powf(beta);
    let ls: Vec<f64> = g.sample_levels(levels.max(8)).into_iter().filter(|t| *t > v_inf && *t < v_sup).collect();
    if ls.len() < 4 {
        return Err(CliError::Config("too few levels inside the ranges of the profile and its ground state".into()));
    }
    let n = ls.len() - 1;
    Ok(vec![
        IntegrandSpec::Indicator { lo: ls[n / 4], hi: ls[3 * n / 4] },
        IntegrandSpec::Bump { lo: ls[n / 8], hi: ls[n - n / 8], k: 1.0 },
    ])
}

#[derive(Serialize)]
struct CoareaRow {
    integrand: IntegrandSpec,
    report: hardyopt_core::calculus::CoareaReport,
    ground_relative_error: f64,
    green_relative_error: f64,
}

#[derive(Serialize)]
struct CoareaResult {
    constants: hardyopt_core::calculus::CoareaConstants,
    flux_relative_deviation: f64,
    integrands: Vec<CoareaRow>,
}

pub fn coarea(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let g = profile(cfg)?;
    let constants = coarea_constants(&g)?;
    let sweep = flux_sweep(&g, cfg.coarea.levels)?;
    let fluxes: Vec<f64> = sweep.iter().map(|x| x.1).collect();
    let deviation = relative_deviation(&fluxes);
    let specs = if cfg.coarea.integrands.is_empty() { default_integrands(&g, cfg.coarea.levels)? } else { cfg.coarea.integrands.clone() };
    let mut rows = Vec::new();
    for spec in specs {
        let f = match spec {
            IntegrandSpec::Indicator { lo, hi } => LevelIntegrand::indicator(lo, hi),
            IntegrandSpec::Bump { lo, hi, k } => LevelIntegrand::bump(lo, hi, k),
        };
        let report = coarea_reduce(&f, &g)?;
        rows.push(CoareaRow {
            integrand: spec,
            ground_relative_error: report.ground_relative_error(),
            green_relative_error: report.green_relative_error(),
            report,
        });
    }
    let flux_rows: Vec<Vec<String>> = sweep.iter().map(|(t, f)| vec![num(*t), num(*f)]).collect();
    let sides: Vec<Vec<String>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let x = &r.report;
            vec![i.to_string(), num(x.ground_lhs), num(x.ground_rhs), num(x.green_lhs), num(x.green_rhs)]
        })
        .collect();
    let worst = rows.iter().map(|r| r.ground_relative_error.max(r.green_relative_error)).fold(0.0, f64::max);
    let result = CoareaResult { constants, flux_relative_deviation: deviation, integrands: rows };
    Ok(Outcome {
        summary: format!(
            "flux {:.12} with relative deviation {deviation:.2e} over {} levels; c = {:.12}; worst identity error {worst:.2e}",
            constants.c_tilde,
            fluxes.len(),
            constants.c
        ),
        artifacts: vec![
            json_report("coarea.json", "coarea-check", cfg, &result)?,
            csv_table("flux.csv", &["t", "flux"], &flux_rows)?,
            csv_table("coarea.csv", &["integrand", "ground_lhs", "ground_rhs", "green_lhs", "green_rhs"], &sides)?,
        ],
    })
}

#[derive(Serialize)]
struct RellichResult {
    kind: RellichKind,
    exponent: f64,
    constant: f64,
    min_ratio: f64,
    argmin: usize,
    family_size: usize,
}

pub fn rellich(cfg: &RunConfig, exec: Exec) -> Result<Outcome, CliError> {
    let params = cfg.params()?;
    let sec = &cfg.rellich;
    let exponent = sec.exponent.unwrap_or(2.0 - cfg.n as f64);
    let v = RadialFunction::power(exponent);
    let triple = match sec.kind {
        RellichKind::Rellich => rellich_weights(&v, sec.alpha, &params, &cfg.domain)?,
        RellichKind::DaviesHinz => davies_hinz_weights(&v, sec.delta, &params, &cfg.domain)?,
    };
    let family = LogGaussianBump::random_family(sec.family_size, cfg.seed);
    let check = rellich_check(&triple, &family, &params, exec)?;
    let rows: Vec<Vec<String>> = family
        .iter()
        .zip(&check.ratios)
        .map(|(b, q)| vec![num(b.power), num(b.center), num(b.width), num(*q)])
        .collect();
    let result = RellichResult {
        kind: sec.kind,
        exponent,
        constant: check.constant,
        min_ratio: check.min_ratio,
        argmin: check.argmin,
        family_size: family.len(),
    };
    Ok(Outcome {
        summary: format!("constant {:.12}, smallest ratio {:.12} over {} bumps", check.constant, check.min_ratio, family.len()),
        artifacts: vec![
            json_report("rellich.json", "rellich", cfg, &result)?,
            csv_table("rellich.csv", &["power", "center", "width", "ratio"], &rows)?,
        ],
    })
}

pub fn probe(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.p;
    let gammas = cfg.probe.gammas.clone().unwrap_or_else(|| vec![1.0 / p, 2.0 / p]);
    let mut results = Vec::new();
    for &gamma in &gammas {
        for &eps in &cfg.probe.eps {
            results.push(optimality_probe(p, gamma, eps)?);
        }
    }
    let rows: Vec<Vec<String>> =
        results.iter().map(|r| vec![num(r.gamma), num(r.eps), num(r.lhs), num(r.rhs), num(r.ratio)]).collect();
    let k = cfg.probe.eps.len();
    let growth: Vec<String> = results
        .chunks(k)
        .map(|c| format!("gamma {:.4}: ratio {:.4} -> {:.4}", c[0].gamma, c[0].ratio, c[k - 1].ratio))
        .collect();
    Ok(Outcome {
        summary: growth.join("; "),
        artifacts: vec![
            json_report("probe.json", "probe-optimality", cfg, &results)?,
            csv_table("probe.csv", &["gamma", "eps", "lhs", "rhs", "ratio"], &rows)?,
        ],
    })
}
