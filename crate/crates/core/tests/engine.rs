use stopgrid::continuous;
use stopgrid::engine::reference;
use stopgrid::engine::{
    classify, run, run_partial, run_refined, ClassifyOptions, Cutoff, Geometry, GridOffset, Induction, Parity,
    RunConfig, RunOptions, RunStatus, TerminalMode,
};
use stopgrid::lowerbound::{self, LowerBoundCalibration};
use stopgrid::{ExtendedReal, Precision, Verdict};

fn geometry(cutoff: Cutoff, parity: Parity) -> Geometry {
    Geometry::new(*continuous::solution(), GridOffset::default(), cutoff, parity)
}

fn calibration(t: u64) -> LowerBoundCalibration {
    lowerbound::calibrate(t as f64).unwrap()
}

fn single_thread() -> RunOptions {
    RunOptions {
        threads: Some(1),
        ..RunOptions::default()
    }
}

#[test]
fn full_cone_matches_reference_recursion() {
    let horizon = 200;
    let cal = calibration(horizon);
    let oracle = reference::full_cone(horizon, &cal);
    let mut ind = Induction::<f64>::with_bounds(geometry(Cutoff::FullCone, Parity::Both), horizon, &cal).unwrap();
    let mut worst = 0.0f64;
    for level in &oracle {
        ind.step_to(level.n).unwrap();
        let slice = ind.current();
        for x in level.lo..level.lo + level.upper.len() as i64 {
            let (ru, rl) = level.get(x).unwrap();
            let (u, l) = slice.get(x).expect("engine covers the reference cone");
            worst = worst.max((u - ru).abs()).max((l - rl).abs());
        }
    }
    assert!(worst <= 1e-15, "max cell difference {worst:e}");
}

#[test]
fn origin_bracket_matches_reference() {
    let horizon = 200;
    let cal = calibration(horizon);
    let (lo, hi) = reference::origin_bracket(&reference::full_cone(horizon, &cal)).unwrap();
    let mut config = RunConfig::new(horizon, 10);
    config.cutoff = Cutoff::FullCone;
    let table = run(&config, &single_thread()).unwrap();
    let v = table.v00.unwrap();
    assert!((v.lower.to_f64() - lo).abs() <= 1e-15);
    assert!((v.upper.to_f64() - hi).abs() <= 1e-15);
}

#[test]
fn parity_classes_reproduce_the_full_run_bitwise() {
    let horizon = 300;
    let cal = calibration(horizon);
    for cutoff in [Cutoff::FullCone, Cutoff::Lateral { margin: 4, sigmas: 1.0 }] {
        let mut both = Induction::<f64>::with_bounds(geometry(cutoff, Parity::Both), horizon, &cal).unwrap();
        let mut even = Induction::<f64>::with_bounds(geometry(cutoff, Parity::Even), horizon, &cal).unwrap();
        let mut odd = Induction::<f64>::with_bounds(geometry(cutoff, Parity::Odd), horizon, &cal).unwrap();
        for n in (1..horizon).rev() {
            both.step_to(n).unwrap();
            even.step_to(n).unwrap();
            odd.step_to(n).unwrap();
            let full = both.current();
            for m in full.x_min()..=full.x_max() {
                let part = if Parity::Even.admits(n, m) { even.current() } else { odd.current() };
                let (u, l) = full.get(m).unwrap();
                let (pu, pl) = part.get(m).unwrap();
                assert_eq!(u.to_bits(), pu.to_bits(), "upper ({n}, {m})");
                assert_eq!(l.to_bits(), pl.to_bits(), "lower ({n}, {m})");
            }
        }
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let horizon = 5000;
    let cal = calibration(horizon);
    let g = geometry(Cutoff::FullCone, Parity::Both);
    let mut one = Induction::<ExtendedReal>::with_bounds(g, horizon, &cal).unwrap().with_threads(1).unwrap();
    let mut four = Induction::<ExtendedReal>::with_bounds(g, horizon, &cal).unwrap().with_threads(4).unwrap();
    for target in [4000, 2500, 1] {
        one.step_to(target).unwrap();
        four.step_to(target).unwrap();
        assert_eq!(one.current(), four.current(), "level {target}");
    }

    let config = RunConfig::new(20_000, 200);
    let a = run(&config, &single_thread()).unwrap();
    let b = run(&config, &RunOptions { threads: Some(4), ..RunOptions::default() }).unwrap();
    assert_eq!(a, b);
}

#[test]
fn three_levels_from_twelve() {
    // mpmath at 40 digits: V^W and h_c at T = 12 pushed back to n = 9.
    const UPPER: [(i64, f64); 3] = [(-1, 0.095612021373812609705), (1, 0.16221486645930386392), (3, 1.0 / 3.0)];
    const LOWER: [(i64, f64); 3] = [(-1, 0.092119332837951083356), (1, 0.15963458410770035095), (3, 1.0 / 3.0)];
    let cal = calibration(12);
    assert!((cal.c - 0.46472636814927504).abs() < 1e-15);
    let mut ind = Induction::<f64>::with_bounds(geometry(Cutoff::FullCone, Parity::Both), 12, &cal).unwrap();
    ind.step_to(9).unwrap();
    for ((x, u), (_, l)) in UPPER.iter().zip(LOWER) {
        let (eu, el) = ind.current().get(*x).unwrap();
        assert!((eu - u).abs() < 1e-15, "upper at {x}: {eu} vs {u}");
        assert!((el - l).abs() < 1e-15, "lower at {x}: {el} vs {l}");
    }
}

#[test]
fn eight_two_is_a_stopping_point() {
    let report = classify(8, 2, &ClassifyOptions::default()).unwrap();
    assert_eq!(report.horizon, 9);
    assert_eq!(report.verdict, Verdict::Stop);
    // (1/3 + h(9, 1)) / 2 with h(9, 1) from mpmath
    let expected = (1.0 / 3.0 + 0.164039545153971855) / 2.0;
    assert!((report.cont_upper - expected).abs() < 1e-15);
    assert!((report.cont_upper - 0.2488).abs() < 5e-4);
    assert_eq!(report.gain, 0.25);
}

#[test]
fn origin_level_two_continues() {
    let report = classify(2, 0, &ClassifyOptions::default()).unwrap();
    assert_eq!(report.verdict, Verdict::Continue);
    assert!(report.v_lower > 0.0);
}

#[test]
fn far_above_the_boundary_stops() {
    let alpha = continuous::alpha();
    for n in [5u64, 40, 333, 2000] {
        let x = (alpha * (n as f64).sqrt() + 1.0).ceil() as i64 + 1;
        let report = classify(n, x, &ClassifyOptions::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Stop, "({n}, {x})");
    }
}

#[test]
fn classify_rejects_level_zero_and_short_horizons() {
    assert!(classify(0, 0, &ClassifyOptions::default()).is_err());
    let opts = ClassifyOptions {
        horizon: Some(8),
        ..ClassifyOptions::default()
    };
    assert!(classify(8, 2, &opts).is_err());
}

#[test]
fn slices_bracket_and_dominate_the_gain() {
    let horizon = 2000;
    let cal = calibration(horizon);
    let mut ind = Induction::<f64>::with_bounds(geometry(Cutoff::default(), Parity::Both), horizon, &cal).unwrap();
    loop {
        let s = ind.current();
        let n = s.level as f64;
        let mut last: Option<(f64, f64)> = None;
        for m in s.x_min()..=s.x_max() {
            let (u, l) = s.get(m).unwrap();
            let g = m as f64 / n;
            assert!(u >= l - 1e-15, "bracket at ({n}, {m})");
            assert!(u >= g && l >= g - 1e-15, "gain at ({n}, {m})");
            if let Some((pu, pl)) = last {
                assert!(u >= pu && l >= pl, "monotone at ({n}, {m})");
            }
            last = Some((u, l));
        }
        if ind.level() == 1 {
            break;
        }
        ind.step().unwrap();
    }
}

#[test]
fn boundary_stays_below_the_brownian_boundary() {
    let table = run(&RunConfig::new(10_000, 1000), &single_thread()).unwrap();
    let alpha = table.alpha;
    for level in &table.levels {
        let b = level.b.unwrap();
        assert!(b <= (alpha * (level.n as f64).sqrt()).ceil() as i64, "b({}) = {b}", level.n);
    }
    assert_eq!(table.levels.first().unwrap().n, 1);
    assert_eq!(table.levels.last().unwrap().n, 1000);
}

#[test]
fn verdicts_only_sharpen_with_the_horizon() {
    let mut short = RunConfig::new(1000, 100);
    short.window = 12;
    let mut long = short.clone();
    long.horizon = 10_000;
    let a = run(&short, &single_thread()).unwrap();
    let b = run(&long, &single_thread()).unwrap();
    let later: std::collections::HashMap<_, _> = b.cells.iter().map(|c| ((c.n, c.x), c.verdict)).collect();
    let mut compared = 0;
    for cell in &a.cells {
        if cell.verdict == Verdict::Unknown {
            continue;
        }
        if let Some(v) = later.get(&(cell.n, cell.x)) {
            assert_eq!(*v, cell.verdict, "({}, {})", cell.n, cell.x);
            compared += 1;
        }
    }
    assert!(compared > 1000);
}

#[test]
fn lateral_window_agrees_with_full_cone() {
    let mut config = RunConfig::new(3000, 50);
    config.precision = Precision::Extended;
    let lateral = run(&config, &single_thread()).unwrap();
    config.cutoff = Cutoff::FullCone;
    let full = run(&config, &single_thread()).unwrap();
    let (a, b) = (lateral.v00.unwrap(), full.v00.unwrap());
    assert!((a.lower - b.lower).abs().to_f64() < 1e-25);
    assert!((a.upper - b.upper).abs().to_f64() < 1e-25);
    for (x, y) in lateral.levels.iter().zip(&full.levels) {
        assert_eq!(x.b, y.b);
    }
}

#[test]
fn halted_run_resumes_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.ckpt");
    for precision in [Precision::Standard, Precision::Extended] {
        let mut config = RunConfig::new(4000, 300);
        config.precision = precision;
        let straight = run(&config, &single_thread()).unwrap();

        let opts = RunOptions {
            threads: Some(1),
            checkpoint: Some(path.clone()),
            checkpoint_every: 700,
            ..RunOptions::default()
        };
        match run_partial(&config, &opts, Some(150)).unwrap() {
            RunStatus::Halted { level } => assert_eq!(level, 150),
            RunStatus::Complete(_) => panic!("run did not halt"),
        }
        let resumed = run(&config, &RunOptions { resume: true, ..opts.clone() }).unwrap();
        assert_eq!(resumed, straight);

        let mut other = config.clone();
        other.depth = 299;
        assert!(run(&other, &RunOptions { resume: true, ..opts }).is_err());
    }
}

#[test]
fn haggstrom_terminal_gives_a_wider_bracket() {
    let config = RunConfig::new(2000, 10);
    let ours = run(&config, &single_thread()).unwrap().v00.unwrap();
    let theirs = run(
        &RunConfig {
            terminal: TerminalMode::Haggstrom,
            ..config
        },
        &single_thread(),
    )
    .unwrap()
    .v00
    .unwrap();
    assert!(theirs.width() > ours.width());
    assert!(theirs.contains(0.58590701282) && ours.contains(0.58590701282));
}

#[test]
fn refined_boundary_tracks_the_brownian_one() {
    let alpha = continuous::alpha();
    let points = run_refined(&RunConfig::new(400, 60), 2, &single_thread()).unwrap();
    assert!(points.iter().any(|p| p.t.fract() == 0.5));
    assert!(points.windows(2).all(|w| w[0].t < w[1].t));
    for p in points.iter().filter(|p| p.t >= 5.0) {
        let bw = alpha * p.t.sqrt();
        assert!(p.b <= bw.ceil() + 0.5 && p.b > bw - 2.0, "b({}) = {}", p.t, p.b);
    }
}

#[test]
fn invalid_configurations_are_rejected() {
    assert!(run(&RunConfig::new(100, 100), &RunOptions::default()).is_err());
    let mut config = RunConfig::new(100, 10);
    config.offset = GridOffset { t0: 1.5, x0: 0.0 };
    assert!(run(&config, &RunOptions::default()).is_err());
    let tiny = RunOptions {
        memory_limit: 1024,
        ..RunOptions::default()
    };
    assert!(matches!(
        run(&RunConfig::new(100_000, 10), &tiny),
        Err(stopgrid::Error::Resource(_))
    ));
}
