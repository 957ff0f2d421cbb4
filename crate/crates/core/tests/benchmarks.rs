use thermoporo::benchmarks::{self, BenchmarkKind};
use thermoporo::linsolve::SolveOptions;
use thermoporo::fespace::{DofLayout, Field};
use thermoporo::mesh::Mesh;
use thermoporo::params::ProblemParams;
use thermoporo::C64;

#[test]
fn temperature_pin_shifts_pressure_uniformly() {
    let spec = benchmarks::cantilever_setup(8).unwrap();
    let mesh = Mesh::uniform_unit_square(8).unwrap().tag_boundary(&spec.boundary).unwrap();
    let layout = DofLayout::new(&mesh).unwrap();
    let p = ProblemParams { omega: 5.0, ..spec.params.clone() };
    let solve = |c: C64| {
        let fields = benchmarks::solve_configuration(&mesh, &layout, &p, &spec.load, Some((0, c)), &SolveOptions::default());
        fields.unwrap().0
    };
    let c = C64::new(0.7, -0.3);
    let (x0, x1) = (solve(C64::new(0.0, 0.0)), solve(c));
    let expect = -c * p.beta / p.alpha;
    let lp = layout.slice(&x0, Field::P);
    let rp = layout.slice(&x1, Field::P);
    for (a, b) in lp.iter().zip(rp) {
        assert!((b - a - expect).norm() < 1e-9, "{} vs {}", b - a, expect);
    }
    let lt = layout.slice(&x0, Field::T);
    let rt = layout.slice(&x1, Field::T);
    for (a, b) in lt.iter().zip(rt) {
        assert!((b - a - c).norm() < 1e-9);
    }
}

#[test]
fn both_benchmarks_solve_across_meshes() {
    for kind in [BenchmarkKind::Cantilever, BenchmarkKind::Layered] {
        for n in [16, 32] {
            let spec = kind.setup(n).unwrap();
            let runs = benchmarks::run_benchmark(&spec, &[1.0, 25.0], &SolveOptions::default()).unwrap();
            for f in &runs {
                assert!(f.solve.residual <= 1e-10, "{kind} n={n}: {:e}", f.solve.residual);
                assert!(f.pressure().iter().all(|v| v.re.is_finite() && v.im.is_finite()));
                assert!(f.pressure().iter().any(|v| v.norm() > 0.0));
            }
        }
    }
}

#[test]
fn cantilever_frequencies_are_below_critical() {
    let spec = benchmarks::cantilever_setup(16).unwrap();
    let crit = spec.params.critical_frequency(1e-7).unwrap();
    assert!(crit > 1e6 * 25.0, "{crit:e}");
}

#[test]
fn cantilever_pressure_has_no_checkerboard() {
    let spec = benchmarks::cantilever_setup(32).unwrap();
    let runs = benchmarks::run_benchmark(&spec, &[1.0], &SolveOptions::default()).unwrap();
    let column: Vec<f64> = benchmarks::left_column_real_pressure(&runs[0]).into_iter().map(|(_, v)| v).collect();
    let metric = benchmarks::oscillation_metric(&column).unwrap();
    assert!(metric <= 1.05, "{metric}");
}

#[test]
fn layered_profile_is_monotone_at_low_frequency() {
    let spec = benchmarks::layered_setup(32).unwrap();
    let runs = benchmarks::run_benchmark(&spec, &[1.0], &SolveOptions::default()).unwrap();
    let line: Vec<f64> = benchmarks::pressure_line_sample(&runs[0], 0.5).into_iter().map(|(_, v)| v).collect();
    assert_eq!(line.len(), 32);
    assert!(benchmarks::oscillation_metric(&line).unwrap() <= 1.1);
}
