//! The full verification sweep behind `report-all`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use vml_core::exact::ExactScalar;
use vml_core::geometry::{FlatTorus, Grid};
use vml_core::hecke::{
    build_tower, local_type, phi_divisor, random_datum, random_multiplicities, random_points, theta_section,
    transverse_group, Hyperplane, PolyMatrix, TowerDatum, TowerGroup,
};
use vml_core::pi1::{character_table_abelian, group_elements, moduli_pi1, nogo_check};
use vml_core::strata::{enumerate_partitions, stratum_info, sym_betti, EffectiveDivisor};
use vml_core::vortex::{energy_report, flux, solve, VortexError, VortexProblem};

use crate::commands::{check, exact, within};

const SOLVE_BUDGET: Duration = Duration::from_secs(10);

pub struct Criterion {
    pub id: usize,
    pub title: &'static str,
    pub diagnostics: Map<String, Value>,
    pub sample_sizes: Map<String, Value>,
}

impl Criterion {
    fn new(id: usize, title: &'static str) -> Self {
        Self { id, title, diagnostics: Map::new(), sample_sizes: Map::new() }
    }

    fn record(&mut self, key: impl Into<String>, value: Value) {
        self.diagnostics.insert(key.into(), value);
    }

    fn sample(&mut self, key: &str, count: usize) {
        self.sample_sizes.insert(key.into(), json!(count));
    }

    pub fn passed(&self) -> bool {
        self.diagnostics.values().all(|d| d.get("passed").and_then(Value::as_bool).unwrap_or(true))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "title": self.title,
            "passed": self.passed(),
            "diagnostics": self.diagnostics,
            "sample_sizes": self.sample_sizes,
        })
    }
}

fn benchmark_points(d: usize) -> Vec<(Complex64, u32)> {
    [Complex64::new(1.3, 2.1), Complex64::new(4.6, 5.2), Complex64::new(5.9, 1.4)]
        .into_iter()
        .take(d)
        .map(|z| (z, 1))
        .collect()
}

fn problem(volume: f64, d: usize, grid: usize) -> VortexProblem {
    let torus = FlatTorus::square_with_volume(volume).expect("positive volume");
    let divisor = EffectiveDivisor::new(benchmark_points(d)).expect("distinct points");
    VortexProblem::new(torus, Grid::square(grid).expect("valid grid"), divisor, 1.0, 1.0).expect("valid couplings")
}

fn vortex_criteria(grid: usize) -> [Criterion; 3] {
    let mut c1 = Criterion::new(1, "Bogomol'nyi saturation");
    let mut c2 = Criterion::new(2, "flux quantization");
    let mut c3 = Criterion::new(3, "Bradlow threshold");
    for d in 1..=3 {
        let start = Instant::now();
        match solve(&problem(50.0, d, grid), 1e-10, 50) {
            Ok(sol) => {
                let elapsed = start.elapsed();
                let energy = energy_report(&sol);
                let bound = energy.bogomolnyi_bound;
                c1.record(format!("d{d}.total_energy_rel_error"), within((energy.total - bound) / bound, 1e-6));
                c1.record(
                    format!("d{d}.magnetic_potential_rel_diff"),
                    within((energy.magnetic - energy.potential) / energy.potential, 1e-8),
                );
                c1.record(
                    format!("d{d}.solve_within_budget"),
                    json!({"passed": elapsed <= SOLVE_BUDGET, "tolerance_seconds": SOLVE_BUDGET.as_secs()}),
                );
                c2.record(format!("d{d}.flux_error"), within(flux(&sol) - d as f64, 1e-9 * d as f64));
            }
            Err(e) => {
                c1.record(format!("d{d}.solve"), json!({"passed": false, "error": e.to_string()}));
                c2.record(format!("d{d}.solve"), json!({"passed": false, "error": e.to_string()}));
            }
        }
        let threshold = 4.0 * PI * d as f64;
        match solve(&problem(threshold * 1.01, d, grid), 1e-10, 50) {
            Ok(sol) => {
                let expected = threshold * 1.01 - threshold;
                c3.record(
                    format!("d{d}.near_threshold_integral_rel_error"),
                    within((sol.integral_modulus_sq() - expected) / expected, 1e-6),
                );
            }
            Err(e) => c3.record(format!("d{d}.near_threshold"), json!({"passed": false, "error": e.to_string()})),
        }
        let refused = matches!(
            solve(&problem(threshold * 0.95, d, grid), 1e-10, 50),
            Err(VortexError::BradlowViolation { .. })
        );
        c3.record(format!("d{d}.below_threshold_refused"), json!({"passed": refused}));
    }
    [c1, c2, c3]
}

fn hecke_exactness(seed: u64) -> Criterion {
    let mut c = Criterion::new(4, "Hecke exactness");
    let failures: [usize; 3] = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(i));
            let n = rng.random_range(1..=4);
            let d = rng.random_range(1..=6);
            let mults = random_multiplicities(&mut rng, d, 4);
            let datum = random_datum(&mut rng, n, &mults);
            let Ok(m) = build_tower(n, &datum) else {
                return [1, 1, 1];
            };
            let degree = usize::from(m.det().degree() != Some(d));
            let (mult, local) = match phi_divisor(&m, &datum.points()) {
                Ok(div) => datum.groups.iter().fold((0, 0), |(a, b), g| {
                    let k = g.hyperplanes.len();
                    (
                        a + usize::from(div.multiplicity_at(&g.point) as usize != k),
                        b + usize::from(local_type(&m, &g.point).iter().sum::<usize>() != k),
                    )
                }),
                Err(_) => (1, 1),
            };
            [degree, mult, local]
        })
        .reduce(|| [0; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
    c.sample("towers", 1000);
    c.record("det_degree_mismatches", exact(failures[0]));
    c.record("multiplicity_mismatches", exact(failures[1]));
    c.record("local_exponent_sum_mismatches", exact(failures[2]));
    c
}

fn section_identity(seed: u64) -> Criterion {
    let mut c = Criterion::new(5, "section identity");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7e7a);
    let mut mismatches = 0;
    for _ in 0..500 {
        let n = rng.random_range(1..=4);
        let d = rng.random_range(1..=6);
        let mults = random_multiplicities(&mut rng, d, 4);
        let points = random_points(&mut rng, mults.len());
        let divisor = EffectiveDivisor::new(points.iter().cloned().zip(mults.iter().map(|&m| m as u32)).collect())
            .expect("distinct points");
        let ok = theta_section(n, &divisor)
            .and_then(|t| phi_divisor(&t, &points))
            .is_ok_and(|back| back.same_as(&divisor));
        mismatches += usize::from(!ok);
    }
    c.sample("divisors", 500);
    c.record("phi_theta_mismatches", exact(mismatches));
    c
}

fn local_type_discrimination() -> Criterion {
    let mut c = Criterion::new(6, "local-type discrimination");
    let x = ExactScalar::zero();
    let first = Hyperplane::coordinate(2, 0);
    let transverse = transverse_group(2, &x, &[first.clone(), Hyperplane::coordinate(2, 1)]).expect("transverse data");
    let nested = TowerGroup { point: x.clone(), hyperplanes: vec![first.clone(), first] };
    for (name, group, expected) in [("transverse", transverse, vec![1, 1]), ("nested", nested, vec![0, 2])] {
        let m = build_tower(2, &TowerDatum { groups: vec![group] }).expect("valid datum");
        let elimination = local_type(&m, &x);
        let minors = minors_local_type(&m, &x);
        c.record(
            name,
            json!({"passed": elimination == expected && minors == expected, "smith": elimination, "minors": minors, "tolerance": 0.0}),
        );
    }
    c
}

fn minors_local_type(m: &PolyMatrix, x: &ExactScalar) -> Vec<usize> {
    let mut e: Vec<usize> =
        m.invariant_factors_from_minors().iter().map(|f| f.order_at(x).unwrap_or(usize::MAX)).collect();
    e.sort_unstable();
    e
}

fn dimension_formulas() -> Criterion {
    let mut c = Criterion::new(7, "dimension formulas");
    let mut mismatches = 0;
    let mut checked = 0;
    for d in 1..=8usize {
        for n in 1..=4 {
            for p in enumerate_partitions(d as i64).expect("positive degree") {
                let s = stratum_info(&p, n, d).expect("matching degree");
                let a = p.len();
                checked += 1;
                mismatches += usize::from(s.total_dim != a + (n - 1) * d || s.codim != d - a);
                if p.is_generic() {
                    mismatches += usize::from(s.total_dim != n * d);
                }
            }
        }
    }
    c.sample("strata", checked);
    c.record("formula_mismatches", exact(mismatches));
    c
}

fn pi1_pipeline() -> Criterion {
    let mut c = Criterion::new(8, "fundamental group pipeline");
    let mut mismatches = 0;
    for g in 0..=4usize {
        for n in 1..=3 {
            for d in 2..=5 {
                let ok = moduli_pi1(g, n, d).is_ok_and(|m| {
                    m.invariants.free_rank == 2 * g
                        && m.invariants.torsion.is_empty()
                        && *sym_betti(g, d).b1() == (2 * g).into()
                });
                mismatches += usize::from(!ok);
            }
        }
    }
    c.record("sweep_mismatches", exact(mismatches));
    c
}

fn nogo(seed: u64) -> Criterion {
    let mut c = Criterion::new(9, "no-go for nonabelian statistics");
    let mut mismatches = 0;
    for g in 0..=4usize {
        for n in 1..=3 {
            for d in 2..=5 {
                let ok = nogo_check(g, n, d)
                    .is_ok_and(|r| r.pi1_abelian && r.max_irreducible_rank == 1 && r.rep_variety_dim == 2 * g);
                mismatches += usize::from(!ok);
            }
        }
    }
    c.record("sweep_mismatches", exact(mismatches));

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc4a7);
    let (mut table_mismatches, mut worst_orthogonality) = (0, 0.0f64);
    let mut groups = 0;
    while groups < 50 {
        let factors: Vec<u64> = (0..rng.random_range(1..=3)).map(|_| rng.random_range(2..=20)).collect();
        let order: u64 = factors.iter().product();
        if order > 200 {
            continue;
        }
        groups += 1;
        let Ok(table) = character_table_abelian(&factors) else {
            table_mismatches += 1;
            continue;
        };
        let dims_ok = table.iter().all(|ch| ch.dimension() == 1)
            && table.len() as u64 == order
            && table.iter().map(|ch| (ch.dimension() * ch.dimension()) as u64).sum::<u64>() == order;
        table_mismatches += usize::from(!dims_ok);
        let elements = group_elements(&factors);
        for a in table.iter().take(3) {
            for b in table.iter().rev().take(3) {
                let s: Complex64 = elements.iter().map(|x| a.value(&factors, x) * b.value(&factors, x).conj()).sum();
                let expected = if a == b { order as f64 } else { 0.0 };
                worst_orthogonality = worst_orthogonality.max((s - expected).norm() / order as f64);
            }
        }
    }
    c.sample("character_groups", groups);
    c.record("character_table_mismatches", exact(table_mismatches));
    c.record("orthogonality_error", within(worst_orthogonality, 1e-9));
    c
}

pub fn run(seed: u64, grid: usize) -> Vec<Criterion> {
    let mut out: Vec<Criterion> = vortex_criteria(grid).into();
    out.push(hecke_exactness(seed));
    out.push(section_identity(seed));
    out.push(local_type_discrimination());
    out.push(dimension_formulas());
    out.push(pi1_pipeline());
    out.push(nogo(seed));
    out
}

/// Results and diagnostics sections of the `report-all` envelope.
pub fn summarize(criteria: &[Criterion]) -> (Value, Map<String, Value>) {
    let all_passed = criteria.iter().all(Criterion::passed);
    let results = json!({
        "all_passed": all_passed,
        "criteria": criteria.iter().map(Criterion::to_json).collect::<Vec<_>>(),
    });
    let mut diagnostics = Map::new();
    for c in criteria {
        for (k, v) in &c.diagnostics {
            diagnostics.insert(format!("c{}.{k}", c.id), v.clone());
        }
    }
    diagnostics.insert(
        "criteria_failed".into(),
        check(criteria.iter().filter(|c| !c.passed()).count() as u64, 0.0, all_passed),
    );
    (results, diagnostics)
}
