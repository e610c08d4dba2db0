use std::f64::consts::PI;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde_json::{json, Map, Value};
use vml_core::exact::ExactScalar;
use vml_core::geometry::{FlatTorus, Grid};
use vml_core::hecke::{TowerDatum, TowerReport};
use vml_core::pi1::{abelianization, moduli_pi1, nogo_check, GroupPresentation, Pi1Error};
use vml_core::strata::{enumerate_partitions, stratum_info, sym_betti, EffectiveDivisor};
use vml_core::vortex::{self, energy_report, flux, SolveOptions, VortexError, VortexProblem, VortexSolution};

use crate::args::{AbelianizeArgs, HeckeArgs, Pi1Args, StrataArgs, VortexArgs};
use crate::canonical::write_atomic;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Infeasible,
    Failed,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Infeasible => "infeasible",
            Status::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub results: Value,
    pub diagnostics: Map<String, Value>,
}

impl Outcome {
    fn ok(results: Value, diagnostics: Map<String, Value>) -> Self {
        Self { status: Status::Ok, results, diagnostics }
    }
}

/// A numeric diagnostic together with the tolerance it is judged against.
pub fn check(value: impl Into<Value>, tolerance: f64, passed: bool) -> Value {
    json!({"value": value.into(), "tolerance": tolerance, "passed": passed})
}

/// `|value| ≤ tolerance`.
pub fn within(value: f64, tolerance: f64) -> Value {
    check(value, tolerance, value.abs() <= tolerance)
}

/// Exact count of mismatches, which must be zero.
pub fn exact(mismatches: usize) -> Value {
    check(mismatches as u64, 0.0, mismatches == 0)
}

pub fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_file(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::from_json(path.display().to_string(), &e))
}

/// Splits a comma-separated option value, keeping the 1-based column of each item.
fn items(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut column = 1;
    text.split(',').map(move |item| {
        let start = column + (item.len() - item.trim_start().len());
        column += item.chars().count() + 1;
        (start, item.trim())
    })
}

fn option_error(option: &str, column: usize, message: impl Into<String>) -> CliError {
    CliError::Parse { source_name: format!("--{option}"), line: 1, column, message: message.into() }
}

fn parse_complex(option: &str, column: usize, text: &str) -> Result<Complex64, CliError> {
    ExactScalar::from_str(text)
        .map(|z| z.to_complex64())
        .map_err(|e| option_error(option, column, e.to_string()))
}

pub fn parse_points(text: &str) -> Result<Vec<(Complex64, u32)>, CliError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    items(text)
        .map(|(column, item)| {
            let (z, m) = match item.rsplit_once(':') {
                Some((z, m)) => {
                    let mult = m
                        .trim()
                        .parse::<u32>()
                        .map_err(|_| option_error("points", column + z.len() + 1, format!("bad multiplicity `{m}`")))?;
                    (z, mult)
                }
                None => (item, 1),
            };
            Ok((parse_complex("points", column, z)?, m))
        })
        .collect()
}

pub fn parse_torus(args: &VortexArgs) -> Result<FlatTorus, CliError> {
    let invalid = |e: vml_core::geometry::GeometryError| CliError::Invalid(e.to_string());
    if let Some(text) = &args.torus {
        let sides: Vec<(usize, &str)> = items(text).collect();
        let [(c1, l1), (c2, l2)] = sides.as_slice() else {
            return Err(option_error("torus", 1, "expected two side lengths `L1,L2`"));
        };
        let l1: f64 = l1.parse().map_err(|_| option_error("torus", *c1, format!("bad length `{l1}`")))?;
        let l2: f64 = l2.parse().map_err(|_| option_error("torus", *c2, format!("bad length `{l2}`")))?;
        return FlatTorus::rectangular(l1, l2).map_err(invalid);
    }
    if let Some(text) = &args.periods {
        let periods: Vec<(usize, &str)> = items(text).collect();
        let [(c1, p1), (c2, p2)] = periods.as_slice() else {
            return Err(option_error("periods", 1, "expected two periods `a+bi,c+di`"));
        };
        let p1 = parse_complex("periods", *c1, p1)?;
        let p2 = parse_complex("periods", *c2, p2)?;
        return FlatTorus::new(p1, p2).map_err(invalid);
    }
    let volume = args.volume.ok_or_else(|| CliError::Usage("one of --torus, --periods, --volume is required".into()))?;
    FlatTorus::square_with_volume(volume).map_err(invalid)
}

/// The quantitative identities a converged solution must satisfy.
pub fn vortex_diagnostics(sol: &VortexSolution, torus: &FlatTorus, tol: f64) -> Map<String, Value> {
    let d = sol.degree as f64;
    let energy = energy_report(sol);
    let expected_integral = sol.tau * torus.volume() - 4.0 * PI * d / (sol.e * sol.e);
    let integral = sol.integral_modulus_sq();
    let rel = |a: f64, b: f64| if b == 0.0 { a.abs() } else { a / b };
    let mut diag = Map::new();
    diag.insert("residual_sup".into(), check(sol.residual_sup, tol, sol.residual_sup <= tol));
    diag.insert(
        "integral_identity_rel_error".into(),
        within(rel(integral - expected_integral, expected_integral), 1e-8),
    );
    diag.insert("flux_error".into(), within(flux(sol) - d, 1e-9 * d.max(1.0)));
    diag.insert(
        "bogomolnyi_rel_gap".into(),
        within(rel(energy.total - energy.bogomolnyi_bound, energy.bogomolnyi_bound), 1e-6),
    );
    diag.insert(
        "magnetic_potential_rel_diff".into(),
        within(rel(energy.magnetic - energy.potential, energy.potential), 1e-8),
    );
    diag
}

fn solution_json(sol: &VortexSolution) -> Value {
    let energy = energy_report(sol);
    let rho = sol.modulus_sq();
    json!({
        "degree": sol.degree,
        "newton_iters": sol.newton_iters,
        "cg_iters": sol.cg_iters,
        "residual_sup": sol.residual_sup,
        "residual_history": sol.residual_history,
        "energy": energy,
        "flux": flux(sol),
        "integral_modulus_sq": sol.integral_modulus_sq(),
        "min_modulus_sq": rho.values.iter().cloned().fold(f64::INFINITY, f64::min),
        "max_modulus_sq": rho.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    })
}

fn dump_fields(sol: &VortexSolution, dir: &Path) -> Result<Vec<String>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let fields = [
        ("h.csv", sol.h.clone()),
        ("v.csv", sol.v.clone()),
        ("modulus_sq.csv", sol.modulus_sq()),
        ("magnetic_field.csv", sol.magnetic_field()),
    ];
    let mut written = Vec::new();
    for (name, field) in fields {
        let path = dir.join(name);
        write_atomic(&path, &field.to_csv())?;
        written.push(path.display().to_string());
    }
    Ok(written)
}

pub fn vortex_solve(args: &VortexArgs) -> Result<Outcome, CliError> {
    let torus = parse_torus(args)?;
    let grid = Grid::square(args.grid).map_err(|e| CliError::Invalid(e.to_string()))?;
    let divisor = EffectiveDivisor::new(parse_points(&args.points)?).map_err(|e| CliError::Invalid(e.to_string()))?;
    let problem = VortexProblem::new(torus, grid, divisor.clone(), args.e, args.tau)
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let bradlow = vortex::check_bradlow(&problem);
    let mut results = json!({
        "torus": {
            "period1": complex_json(torus.period1()),
            "period2": complex_json(torus.period2()),
            "volume": torus.volume(),
        },
        "grid": {"n1": grid.n1(), "n2": grid.n2()},
        "divisor": divisor.points().iter()
            .map(|p| json!({"position": complex_json(p.position), "multiplicity": p.multiplicity}))
            .collect::<Vec<_>>(),
        "bradlow": bradlow,
    });
    let mut diagnostics = Map::new();
    let margin_check = check(bradlow.margin, 0.0, bradlow.feasible || divisor.is_empty());
    let options = SolveOptions { tol: args.tol, max_iters: args.max_iters, ..SolveOptions::default() };
    match vortex::solve_with(&problem, options) {
        Ok(sol) => {
            merge(&mut results, solution_json(&sol));
            if let Some(dir) = &args.dump_fields {
                results["field_files"] = json!(dump_fields(&sol, dir)?);
            }
            diagnostics = vortex_diagnostics(&sol, &torus, args.tol);
            diagnostics.insert("bradlow_margin".into(), margin_check);
            Ok(Outcome::ok(results, diagnostics))
        }
        Err(VortexError::BradlowViolation { margin }) => {
            diagnostics.insert("bradlow_margin".into(), margin_check);
            diagnostics.insert("error".into(), json!(format!("Bradlow bound violated, margin {margin}")));
            Ok(Outcome { status: Status::Infeasible, results, diagnostics })
        }
        Err(VortexError::NoConvergence { solution }) => {
            merge(&mut results, solution_json(&solution));
            diagnostics.insert(
                "residual_sup".into(),
                check(solution.residual_sup, args.tol, false),
            );
            diagnostics.insert("bradlow_margin".into(), margin_check);
            diagnostics.insert("error".into(), json!("Newton iteration did not converge"));
            Ok(Outcome { status: Status::Failed, results, diagnostics })
        }
        Err(e) => Err(CliError::Invalid(e.to_string())),
    }
}

fn merge(target: &mut Value, extra: Value) {
    if let (Some(t), Value::Object(e)) = (target.as_object_mut(), extra) {
        t.extend(e);
    }
}

pub fn hecke_build(args: &HeckeArgs) -> Result<Outcome, CliError> {
    let datum: TowerDatum = parse_json(&args.datum)?;
    let report = TowerReport::build(args.n, &datum).map_err(|e| CliError::Invalid(e.to_string()))?;
    let degree_gap = report.det.degree().unwrap_or(0).abs_diff(datum.degree());
    let mut multiplicity_mismatches = 0;
    let mut exponent_mismatches = 0;
    for (group, local) in datum.groups.iter().zip(&report.local_types) {
        let m = group.hyperplanes.len();
        multiplicity_mismatches += usize::from(report.divisor.multiplicity_at(&group.point) as usize != m);
        exponent_mismatches += usize::from(local.exponents.iter().sum::<usize>() != m);
    }
    let mut diagnostics = Map::new();
    diagnostics.insert("det_degree_gap".into(), exact(degree_gap));
    diagnostics.insert("multiplicity_mismatches".into(), exact(multiplicity_mismatches));
    diagnostics.insert("local_exponent_sum_mismatches".into(), exact(exponent_mismatches));
    let results = serde_json::to_value(&report).map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(Outcome::ok(results, diagnostics))
}

pub fn strata_enum(args: &StrataArgs) -> Result<Outcome, CliError> {
    let partitions = enumerate_partitions(args.d).map_err(|e| CliError::Invalid(e.to_string()))?;
    let d = args.d as usize;
    let strata = partitions
        .iter()
        .map(|p| stratum_info(p, args.n, d))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let formula_mismatches = strata
        .iter()
        .filter(|s| s.total_dim != s.num_points + (args.n - 1) * d || s.codim != d - s.num_points)
        .count();
    let generic_dim = strata.iter().find(|s| s.partition.is_generic()).map(|s| s.total_dim);
    let betti = sym_betti(args.g, d);
    let mut diagnostics = Map::new();
    diagnostics.insert("dimension_formula_mismatches".into(), exact(formula_mismatches));
    diagnostics.insert("generic_dim_gap".into(), exact(generic_dim.unwrap_or(0).abs_diff(args.n * d)));
    let results = json!({
        "g": args.g,
        "n": args.n,
        "d": d,
        "strata": strata,
        "generic_dim": generic_dim,
        "betti": betti,
    });
    Ok(Outcome::ok(results, diagnostics))
}

fn positive_degree(d: i64) -> Result<usize, CliError> {
    usize::try_from(d)
        .ok()
        .filter(|&d| d >= 1)
        .ok_or_else(|| CliError::Invalid(format!("degree must be at least 1, got {d}")))
}

pub fn pi1_moduli(args: &Pi1Args) -> Result<Outcome, CliError> {
    let d = positive_degree(args.d)?;
    let m = moduli_pi1(args.g, args.n, d).map_err(|e| CliError::Invalid(e.to_string()))?;
    let b1 = sym_betti(args.g, d).b1().clone();
    let mut diagnostics = Map::new();
    diagnostics.insert(
        "b1_agreement_gap".into(),
        exact((m.invariants.free_rank as u64).abs_diff(u64::try_from(b1).unwrap_or(u64::MAX)) as usize),
    );
    if d >= 2 {
        diagnostics.insert("torsion_count".into(), exact(m.invariants.torsion.len()));
        diagnostics.insert("free_rank_gap".into(), exact(m.invariants.free_rank.abs_diff(2 * args.g)));
    }
    let results = serde_json::to_value(&m).map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(Outcome::ok(results, diagnostics))
}

pub fn pi1_nogo(args: &Pi1Args) -> Result<Outcome, CliError> {
    match nogo_check(args.g, args.n, args.d) {
        Ok(report) => {
            let mut diagnostics = Map::new();
            diagnostics.insert("rep_variety_dim_gap".into(), exact(report.rep_variety_dim.abs_diff(2 * args.g)));
            let results = serde_json::to_value(&report).map_err(|e| CliError::Internal(e.to_string()))?;
            Ok(Outcome::ok(results, diagnostics))
        }
        Err(Pi1Error::OutOfScopeDegree(d)) => {
            let mut diagnostics = Map::new();
            diagnostics.insert("error".into(), json!(format!("degree {d} is out of scope; the statement needs d > 1")));
            Ok(Outcome { status: Status::Infeasible, results: Value::Null, diagnostics })
        }
        Err(e) => Err(CliError::Invalid(e.to_string())),
    }
}

pub fn pi1_abelianize(args: &AbelianizeArgs) -> Result<Outcome, CliError> {
    let presentation: GroupPresentation = parse_json(&args.presentation)?;
    let invariants = abelianization(&presentation);
    let results = json!({"presentation": presentation, "invariants": invariants});
    Ok(Outcome::ok(results, Map::new()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_parse_with_columns() {
        let pts = parse_points("1+2i:2, -0.5i, 3").unwrap();
        assert_eq!(pts, vec![(Complex64::new(1.0, 2.0), 2), (Complex64::new(0.0, -0.5), 1), (Complex64::new(3.0, 0.0), 1)]);
        match parse_points("1+2i, 3+xi:1") {
            Err(CliError::Parse { column, .. }) => assert_eq!(column, 7),
            other => panic!("{other:?}"),
        }
        match parse_points("1:0x") {
            Err(CliError::Parse { column, .. }) => assert_eq!(column, 3),
            other => panic!("{other:?}"),
        }
        assert!(parse_points("").unwrap().is_empty());
    }
}
