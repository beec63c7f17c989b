//! Acceptance run: one PASS/FAIL line per criterion, at the stated
//! tolerances. Run with `--nocapture` to see the report.

use std::f64::consts::{PI, TAU};
use std::fs;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use squeeze_core::floquet::{gamma_spread_over, monodromy_over, MonodromyReport, MotionClass};
use squeeze_core::propagator::{
    closed_form_rotation, propagate, BetaProfile, IntegratorConfig, SampledProfile, Segment,
};
use squeeze_core::pulse::{symmetric_product, two_step_squeeze};
use squeeze_core::strutt::{self, find_squeeze_points, trace_zero_curves, Element, GridSpec, StruttConfig};
use squeeze_core::sym2::{EigenKind, Mat2};
use squeeze_core::theta::{beta_from_theta, extract_theta, validate_theta, verify_roundtrip, ThetaSpec};
use squeeze_core::units::{
    dimensionless_from_physical, energy_scale, joules_to_ev, omega_from_wavelength, physical_from_dimensionless,
    sigma_from_belt, solenoid_field_gauss, voltages_at_energy_scale, BeltReading, CylinderParams, TrapParams,
    ELEMENTARY_CHARGE, PROTON_MASS,
};

struct Outcome {
    id: &'static str,
    pass: bool,
    summary: String,
}

fn outcome(id: &'static str, pass: bool, summary: String) -> Outcome {
    println!("criterion {id}: {} ({summary})", if pass { "PASS" } else { "FAIL" });
    Outcome { id, pass, summary }
}

/// Published parameter pairs and their printed propagators; `None` marks an
/// entry printed as approximately zero.
type Printed = [[Option<f64>; 2]; 2];

const REFERENCE: [((f64, f64), Printed); 4] = [
    ((PI / 3.0, PI / 5.0), [[Some(0.362), None], [Some(-1.114), Some(2.751)]]),
    ((PI / 2.0, 4.0 * PI / 13.0), [[Some(0.175), None], [Some(3.501), Some(5.798)]]),
    ((9.0 * PI / 16.0, 5.0 * PI / 11.0), [[Some(0.216), None], [Some(5.444), Some(4.833)]]),
    ((4.0 * PI / 13.0, 11.0 * PI / 41.0), [[Some(0.227), None], [None, Some(4.394)]]),
];

fn entry_ok(got: f64, printed: Option<f64>) -> bool {
    match printed {
        Some(v) => (got - v).abs() <= 0.02,
        None => got.abs() <= 0.01,
    }
}

fn fmt_printed(p: Option<f64>) -> String {
    p.map_or("~0".to_string(), |v| format!("{v:.3}"))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let cfg = IntegratorConfig::adaptive(1e-12);
    let mats: Vec<Mat2> = REFERENCE
        .iter()
        .map(|((b0, b1), _)| strutt::evaluate(*b0, *b1, strutt::DEFAULT_INTERVAL, &cfg).unwrap())
        .collect();
    let mut reproduced = true;
    let mut fallback = true;
    let mut report = vec![];
    for (u, ((b0, b1), printed)) in mats.iter().zip(REFERENCE.iter()) {
        let got = u.to_array();
        let want = [printed[0][0], printed[0][1], printed[1][0], printed[1][1]];
        let ok = got.iter().zip(want).all(|(&g, w)| entry_ok(g, w));
        reproduced &= ok;
        let r = MonodromyReport::from_matrix(*u, strutt::DEFAULT_INTERVAL.0, TAU, 1e-8).unwrap();
        let product = r.eigen.as_ref().map(|e| (e.eigenvalues[0] * e.eigenvalues[1]).re);
        let det_ok = u.det_defect() <= 1e-8;
        let class_ok = r.motion_class == MotionClass::IIISqueezing;
        let product_ok = product.is_some_and(|p| (p - 1.0).abs() <= 1e-6);
        fallback &= det_ok && class_ok && product_ok;
        report.push(format!(
            "  ({b0:.5}, {b1:.5}): computed [[{:.4}, {:.4}], [{:.4}, {:.4}]] printed [[{}, {}], [{}, {}]] {}; det-1 {:.1e}, class {}, lambda product {:.9}",
            got[0],
            got[1],
            got[2],
            got[3],
            fmt_printed(want[0]),
            fmt_printed(want[1]),
            fmt_printed(want[2]),
            fmt_printed(want[3]),
            if ok { "match" } else { "MISMATCH" },
            u.det() - 1.0,
            r.motion_class.label(),
            product.unwrap_or(f64::NAN),
        ));
    }
    let elapsed = start.elapsed().as_secs_f64();
    if !reproduced {
        println!("discrepancy report: the printed propagators are not reproduced under tau0 = pi/2:");
        for line in &report {
            println!("{line}");
        }
    }
    let timely = elapsed < 1.0;
    let pass = timely && (reproduced || fallback);
    let mode = if reproduced { "entries reproduced" } else { "printed entries not reproduced, fallback rule applied" };
    outcome(
        "1",
        pass,
        format!("{mode}; fallback det/class/product checks {}; {elapsed:.3} s", if fallback { "hold" } else { "fail" }),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let cfg = StruttConfig::default();
    let grid = strutt::scan(&GridSpec::default(), &cfg.integrator).unwrap();
    let red = trace_zero_curves(&grid, Element::U12, &cfg).unwrap();
    let blue = trace_zero_curves(&grid, Element::U21, &cfg).unwrap();
    let points = find_squeeze_points(&red, &blue, strutt::DEFAULT_INTERVAL, &cfg);
    let elapsed = start.elapsed().as_secs_f64();
    let target = (4.0 * PI / 13.0, 11.0 * PI / 41.0);
    for p in &points {
        println!(
            "  squeeze point ({:.5}, {:.5}): u11 {:.5}, u22 {:.5}, lambda {:.5}, distance to target {:.4}",
            p.beta0,
            p.beta1,
            p.u.u11,
            p.u.u22,
            p.lambda,
            ((p.beta0 - target.0).powi(2) + (p.beta1 - target.1).powi(2)).sqrt()
        );
    }
    let upper = points.iter().find(|p| {
        ((p.beta0 - target.0).powi(2) + (p.beta1 - target.1).powi(2)).sqrt() <= 0.05 && (p.lambda - 0.227).abs() <= 0.01
    });
    // The mirrored point expands q, so its stored factor is λ⁻¹.
    let mirrored = points.iter().find(|p| {
        ((p.beta0 - target.0).powi(2) + (p.beta1 + target.1).powi(2)).sqrt() <= 0.05 && (p.lambda - 4.394).abs() <= 0.05
    });
    let pass = upper.is_some() && mirrored.is_some() && elapsed < 60.0;
    outcome(
        "2",
        pass,
        format!(
            "{} squeeze points; point near target with lambda 0.227: {}; mirrored with 1/lambda 4.394: {}; {elapsed:.2} s",
            points.len(),
            if upper.is_some() { "found" } else { "not found" },
            if mirrored.is_some() { "found" } else { "not found" },
        ),
    )
}

fn random_periodic(rng: &mut impl Rng) -> (BetaProfile, f64, IntegratorConfig) {
    // Piecewise-constant profiles integrate exactly with closed-form steps.
    let exact = IntegratorConfig::magnus(16);
    match rng.gen_range(0..3) {
        0 => (BetaProfile::constant(rng.gen_range(-3.0..3.0)), rng.gen_range(0.1..3.0), exact),
        1 => (
            BetaProfile::paul(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
            TAU,
            IntegratorConfig::adaptive(1e-13),
        ),
        _ => {
            let n = rng.gen_range(2..=5);
            let segs: Vec<Segment> =
                (0..n).map(|_| Segment::new(rng.gen_range(0.05..3.0), rng.gen_range(-3.0..3.0))).collect();
            let p = BetaProfile::piecewise(segs).unwrap();
            let period = p.period().unwrap();
            (p, period, exact)
        }
    }
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut counts = [0usize; 3];
    let mut bad = vec![];
    let mut worst_spread = 0.0_f64;
    for k in 0..1000 {
        let (p, period, cfg) = random_periodic(&mut rng);
        let r = monodromy_over(&p, period, 0.0, &cfg).unwrap();
        counts[r.motion_class as usize] += 1;
        match (r.motion_class, &r.eigen) {
            (MotionClass::IStable, Some(e)) => {
                if e.kind != EigenKind::ComplexUnit || e.eigenvalues.iter().any(|z| (z.norm() - 1.0).abs() > 1e-9) {
                    bad.push(format!("#{k} class I eigenvalues {:?}", e.eigenvalues));
                }
            }
            (MotionClass::IIISqueezing, Some(e)) => {
                let [a, b] = e.eigenvalues;
                if a.im != 0.0 || b.im != 0.0 || (a.re * b.re - 1.0).abs() > 1e-9 {
                    bad.push(format!("#{k} class III eigenvalues {a} {b}"));
                }
            }
            (MotionClass::IIThreshold, _) => {}
            (c, None) => bad.push(format!("#{k} class {} without eigenstructure", c.label())),
        }
        let spread = gamma_spread_over(&p, period, &[0.0, period / 3.0, 2.0 * period / 3.0], &cfg).unwrap();
        worst_spread = worst_spread.max(spread);
        if spread > 1e-8 {
            bad.push(format!("#{k} gamma spread {spread:.2e}"));
        }
    }
    for b in bad.iter().take(5) {
        println!("  {b}");
    }
    outcome(
        "3",
        bad.is_empty(),
        format!(
            "classes I/II/III = {}/{}/{}; {} violations; largest gamma spread {worst_spread:.1e}",
            counts[0],
            counts[1],
            counts[2],
            bad.len()
        ),
    )
}

fn criterion_4() -> Outcome {
    let cfg = IntegratorConfig::default();
    let mut worst_closed = 0.0_f64;
    for k in [0.1, 0.5, 1.0, 2.0, 5.0] {
        let p = BetaProfile::constant(k * k);
        for i in 1..=40 {
            let t = 0.5 * i as f64;
            let u = propagate(&p, 0.0, t, &cfg).unwrap();
            worst_closed = worst_closed.max(u.max_abs_diff(&closed_form_rotation(k, t)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_plan = 0.0_f64;
    for _ in 0..50 {
        let plan = two_step_squeeze(rng.gen_range(0.2..5.0), rng.gen_range(0.2..5.0)).unwrap();
        let u = propagate(&plan.profile().unwrap(), 0.0, plan.total_duration(), &IntegratorConfig::adaptive(1e-13))
            .unwrap();
        worst_plan = worst_plan.max(u.max_abs_diff(&plan.predicted));
    }
    outcome(
        "4",
        worst_closed <= 1e-8 && worst_plan <= 1e-10,
        format!("closed form max error {worst_closed:.1e} (limit 1e-8); two-step plans max error {worst_plan:.1e} (limit 1e-10)"),
    )
}

fn equidiagonal(rng: &mut impl Rng) -> Mat2 {
    loop {
        let d: f64 = rng.gen_range(-2.0..2.0);
        let b: f64 = rng.gen_range(0.2..5.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let c = (d * d - 1.0) / b;
        if c.abs() <= 5.0 {
            return Mat2::new(d, b, c, d);
        }
    }
}

fn symmetric_profile(rng: &mut impl Rng, half_width: f64) -> BetaProfile {
    match rng.gen_range(0..4) {
        0 => BetaProfile::paul(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
        1 => BetaProfile::constant(rng.gen_range(-3.0..3.0)),
        2 => {
            let n = rng.gen_range(1..=3);
            let half: Vec<Segment> =
                (0..n).map(|_| Segment::new(rng.gen_range(0.2..1.5), rng.gen_range(-3.0..3.0))).collect();
            let mut segs = half.clone();
            segs.extend(half.iter().rev().skip(1).cloned());
            BetaProfile::piecewise(segs).unwrap()
        }
        _ => {
            let n = rng.gen_range(4..12);
            let right: Vec<f64> = (0..=n).map(|k| half_width * k as f64 / n as f64).collect();
            let vals: Vec<f64> = (0..=n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let mut tau: Vec<f64> = right.iter().rev().map(|t| -t).collect();
            tau.extend(right.iter().skip(1));
            let mut beta: Vec<f64> = vals.iter().rev().cloned().collect();
            beta.extend(vals.iter().skip(1));
            BetaProfile::Sampled(SampledProfile::new(tau, beta, None).unwrap())
        }
    }
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = IntegratorConfig::adaptive(1e-12);
    let mut worst_a = 0.0_f64;
    for _ in 0..100 {
        let t = rng.gen_range(0.3..2.5);
        let p = symmetric_profile(&mut rng, t);
        // A palindromic piecewise profile is symmetric about the centre of
        // its first period.
        let centre = match &p {
            BetaProfile::PiecewiseConstant { .. } => 0.5 * p.period().unwrap(),
            _ => 0.0,
        };
        let u = propagate(&p, centre - t, centre + t, &cfg).unwrap();
        worst_a = worst_a.max((u.u11 - u.u22).abs());
    }
    let mut worst_b = 0.0_f64;
    for _ in 0..1000 {
        let core = equidiagonal(&mut rng);
        let wings: Vec<Mat2> = (0..3).map(|_| equidiagonal(&mut rng)).collect();
        let u = symmetric_product(&core, &wings).unwrap();
        worst_b = worst_b.max((u.u11 - u.u22).abs() / u.max_abs().max(1.0));
    }
    let mut worst_c = 0.0_f64;
    for _ in 0..1000 {
        let (a, b) = (equidiagonal(&mut rng), equidiagonal(&mut rng));
        let s = a.anticommutator(&b);
        worst_c = worst_c.max((s.u11 - s.u22).abs() / s.max_abs().max(1.0));
    }
    outcome(
        "5",
        worst_a <= 1e-8 && worst_b <= 1e-12 && worst_c <= 1e-12,
        format!(
            "(a) symmetric profiles max |u11-u22| {worst_a:.1e}; (b) symmetric products {worst_b:.1e} relative; (c) anticommutators {worst_c:.1e} relative"
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cfg = IntegratorConfig::adaptive(1e-11);
    let mut worst_rt = 0.0_f64;
    let mut specs = vec![];
    for _ in 0..50 {
        let coeffs = vec![rng.gen_range(-0.1..0.1), rng.gen_range(-0.01..0.01), rng.gen_range(-0.001..0.001)];
        let spec = ThetaSpec::odd_poly(coeffs, 2.0).unwrap();
        worst_rt = worst_rt.max(verify_roundtrip(&spec, &cfg).unwrap().max_residual);
        specs.push(spec);
    }

    let mut worst_extract = 0.0_f64;
    let fine = IntegratorConfig::adaptive(1e-12);
    for _ in 0..10 {
        let p = if rng.gen::<bool>() {
            BetaProfile::paul(rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5))
        } else {
            BetaProfile::constant(rng.gen_range(-1.0..1.0))
        };
        let (t, n) = (1.5, 150);
        let theta = extract_theta(&p, t, n, &fine).unwrap();
        for k in 1..n {
            let tau = t * k as f64 / n as f64;
            worst_extract = worst_extract.max((beta_from_theta(&theta, tau).unwrap() - p.eval(tau).unwrap()).abs());
        }
    }

    // Fourier points are absent from near-linear θ; add families that have them.
    specs.push(ThetaSpec::sine(1.0, 2.0, 2.0).unwrap());
    specs.push(ThetaSpec::sine(2.0, 1.0, 2.0).unwrap());
    specs.push(ThetaSpec::odd_poly(vec![-0.3], 2.0).unwrap());
    let (mut zc, mut zc_fail, mut st, mut st_fail, mut fp, mut fp_fail) = (0, 0, 0, 0, 0, 0);
    let mut worst_identity = 0.0_f64;
    let mut worst_beta_prime = 0.0_f64;
    for spec in &specs {
        let r = validate_theta(spec, 64);
        zc += r.zero_crossings.len();
        zc_fail += r.zero_crossings.iter().filter(|z| !z.pass).count();
        st += r.stationary_beta_points.len();
        st_fail += r.stationary_beta_points.iter().filter(|s| !s.pass).count();
        fp += r.fourier_points.len();
        fp_fail += r.fourier_points.iter().filter(|f| !f.pass).count();
        for s in &r.stationary_beta_points {
            worst_identity = worst_identity.max(s.identity_residual);
            worst_beta_prime = worst_beta_prime.max(s.beta_prime.abs());
        }
    }
    if st_fail > 0 {
        println!(
            "  clause (ii): {st_fail} of {st} points where theta''' = 0 have |beta'| > 1e-8 (largest {worst_beta_prime:.2e}); \
             the identity beta' theta = -theta'''/2 - 2 beta theta' holds there to {worst_identity:.1e}"
        );
    }
    let clauses_ok = zc_fail == 0 && st_fail == 0 && fp_fail == 0;
    outcome(
        "6",
        worst_rt <= 1e-6 && worst_extract <= 1e-4 && clauses_ok,
        format!(
            "round trip max {worst_rt:.1e} (limit 1e-6); extraction max {worst_extract:.1e} (limit 1e-4); \
             clause (i) {}/{zc} pass, (ii) {}/{st} pass, (iii) {}/{fp} pass",
            zc - zc_fail,
            st - st_fail,
            fp - fp_fail
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_rt = 0.0_f64;
    for _ in 0..1000 {
        let (b0, b1) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let (m, r0, w) = (rng.gen_range(1e-27..1e-24), rng.gen_range(1e-3..1.0), rng.gen_range(1.0..1e8));
        let (phi0, phi1) = physical_from_dimensionless(b0, b1, ELEMENTARY_CHARGE, m, r0, w).unwrap();
        let p = TrapParams { charge: ELEMENTARY_CHARGE, mass: m, r0, omega: w, phi0, phi1 };
        let (c0, c1) = dimensionless_from_physical(&p).unwrap();
        worst_rt = worst_rt.max(((c0 - b0) / b0).abs()).max(((c1 - b1) / b1).abs());
    }

    let (b0, b1) = (4.0 * PI / 13.0, 11.0 * PI / 41.0);
    let (phi0, phi1) = voltages_at_energy_scale(b0, b1, 1.0423);
    let phi1_ok = (phi1 - 1.759).abs() <= 0.005;
    // The printed static voltage and the wavelength-derived scale are
    // inconsistent with the formulas; they must stay inconsistent.
    let phi0_discrepant = (phi0 - 1.268).abs() > 0.05 && (phi0 - 1.0423 * b0).abs() < 1e-12;
    let scale_ev = joules_to_ev(energy_scale(PROTON_MASS, 0.1, omega_from_wavelength(3000.0)));
    let wavelength_discrepant = (scale_ev - 1.04233).abs() > 1.0;

    let (omega, radius, q, h) = (1.0, 0.2, 1.0, 0.01);
    let field = |reading| {
        let sigma = sigma_from_belt(q, radius, h, reading).unwrap();
        solenoid_field_gauss(&CylinderParams { omega, radius, sigma }).unwrap()
    };
    let belt = field(BeltReading::SurfaceDensity);
    let per_radius = field(BeltReading::ChargePerRadius);
    // SI oracle: B = μ₀K with surface current K = σωR and σ = Q/(2πRh).
    let mu0 = 4e-7 * PI;
    let oracle_gauss = mu0 * (q / (2.0 * PI * radius * h)) * omega * radius * 1e4;
    let belt_ok = ((belt - oracle_gauss) / oracle_gauss).abs() <= 1e-9;
    println!(
        "  phi0 {phi0:.4} V (printed 1.268), phi1 {phi1:.4} V (printed 1.759); 3 km wave scale {scale_ev:.2} eV (printed 1.04233); \
         B {belt:.4} G from the belt reading, SI oracle {oracle_gauss:.4} G, {per_radius:.4} G without the circumference factor (printed 1.25)"
    );
    outcome(
        "7",
        worst_rt <= 1e-12 && phi1_ok && phi0_discrepant && wavelength_discrepant && belt_ok,
        format!(
            "round trip {worst_rt:.1e} relative; phi1 {}; phi0 discrepancy {}; wavelength discrepancy {}; belt reading vs SI oracle {}",
            if phi1_ok { "reproduced" } else { "off" },
            if phi0_discrepant { "kept" } else { "missing" },
            if wavelength_discrepant { "kept" } else { "missing" },
            if belt_ok { "agrees" } else { "disagrees" }
        ),
    )
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_squeeze"))
            .args(["--out", out.to_str().unwrap(), "scan"])
            .output()
            .expect("binary runs")
            .status;
        assert!(status.success());
        out
    };
    let (a, b) = (run("a"), run("b"));
    let files = ["grid.csv", "curves.csv", "squeeze_points.json", "map.svg"];
    let differing: Vec<&str> =
        files.iter().copied().filter(|f| fs::read(a.join(f)).unwrap() != fs::read(b.join(f)).unwrap()).collect();
    outcome(
        "8",
        differing.is_empty(),
        if differing.is_empty() {
            "two default scans wrote identical grid, curves, points and map files".into()
        } else {
            format!("files differ: {differing:?}")
        },
    )
}

#[test]
fn acceptance_criteria() {
    let results = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
    ];
    let failed: Vec<String> = results.iter().filter(|r| !r.pass).map(|r| format!("{}: {}", r.id, r.summary)).collect();
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
