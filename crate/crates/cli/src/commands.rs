use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::{Format, GlobalOpts};
use squeeze_core::floquet::{self, MonodromyReport};
use squeeze_core::propagator::{self, BetaProfile, ProfileJson, Segment};
use squeeze_core::pulse::{self, PulsePlan};
use squeeze_core::strutt::{self, AxisRange, Element, GridSpec, StruttConfig, StruttError};
use squeeze_core::sym2::Mat2;
use squeeze_core::theta::{self, ThetaJson};
use squeeze_core::units::{self, BeltReading, CylinderParams, TrapParams, ELEMENTARY_CHARGE, PROTON_MASS};

fn resolved<A: Serialize>(name: &str, g: &GlobalOpts, args: &A) -> Value {
    json!({ "command": name, "global": g, "args": args })
}

/// Writes the resolved configuration, with the output target and a
/// timestamp, to standard error.
fn echo(config: &Value, g: &GlobalOpts) {
    let mut stamped = config.clone();
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    stamped["timestamp_unix"] = json!(now);
    stamped["out"] = json!(g.out);
    eprintln!("config: {stamped}");
}

fn emit(g: &GlobalOpts, content: &str) -> Result<(), CliError> {
    match &g.out {
        Some(p) => fs::write(p, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn with_config(mut body: Value, config: &Value) -> String {
    if let Value::Object(m) = &mut body {
        m.insert("config".into(), config.clone());
    }
    serde_json::to_string_pretty(&body).expect("serializable") + "\n"
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn json_only(g: &GlobalOpts) -> Result<(), CliError> {
    match g.format {
        None | Some(Format::Json) => Ok(()),
        Some(f) => Err(CliError::Usage(format!("this command writes JSON, not {f:?}"))),
    }
}

// ---------------------------------------------------------------- scan

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 0.0)]
    pub beta0_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub beta0_max: f64,
    #[arg(long, default_value_t = 200)]
    pub beta0_n: usize,
    #[arg(long, default_value_t = -1.6)]
    pub beta1_min: f64,
    #[arg(long, default_value_t = 1.6)]
    pub beta1_max: f64,
    #[arg(long, default_value_t = 200)]
    pub beta1_n: usize,
    #[arg(long, default_value_t = FRAC_PI_2)]
    pub tau_start: f64,
    #[arg(long, default_value_t = 5.0 * FRAC_PI_2)]
    pub tau_end: f64,
    /// Skip zero-curve tracing and squeeze-point search.
    #[arg(long)]
    pub no_curves: bool,
}

fn traced(grid: &strutt::StruttGrid, e: Element, cfg: &StruttConfig) -> Result<Vec<strutt::ZeroCurve>, CliError> {
    match strutt::trace_zero_curves(grid, e, cfg) {
        Ok(c) => Ok(c),
        Err(StruttError::EmptyResult(_)) => {
            log::info!("no {e} = 0 curve inside the squeezing region");
            Ok(vec![])
        }
        Err(err) => Err(err.into()),
    }
}

pub fn scan(g: &GlobalOpts, a: &ScanArgs) -> Result<(), CliError> {
    let config = resolved("scan", g, a);
    echo(&config, g);
    let spec = GridSpec {
        beta0: AxisRange::new(a.beta0_min, a.beta0_max, a.beta0_n),
        beta1: AxisRange::new(a.beta1_min, a.beta1_max, a.beta1_n),
        interval: (a.tau_start, a.tau_end),
    };
    let cfg = StruttConfig { integrator: g.integrator()?, ..Default::default() };
    let grid = strutt::scan(&spec, &cfg.integrator)?;
    let (red, blue, points) = if a.no_curves {
        (vec![], vec![], vec![])
    } else {
        let red = traced(&grid, Element::U12, &cfg)?;
        let blue = traced(&grid, Element::U21, &cfg)?;
        let points = strutt::find_squeeze_points(&red, &blue, spec.interval, &cfg);
        (red, blue, points)
    };
    let squeezing = grid.cells.iter().filter(|c| c.is_squeezing()).count();
    eprintln!(
        "scan: {} cells, {squeezing} class III, {} u12 curves, {} u21 curves, {} squeeze points",
        grid.cells.len(),
        red.len(),
        blue.len(),
        points.len()
    );

    let grid_text = strutt::grid_csv(&grid, &config);
    match &g.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("grid.csv"), &grid_text)?;
            let mut all = red.clone();
            all.extend(blue.iter().cloned());
            fs::write(dir.join("curves.csv"), strutt::curves_csv(&all, &config))?;
            fs::write(dir.join("squeeze_points.json"), strutt::squeeze_json(&points, &config))?;
            fs::write(dir.join("map.svg"), strutt::svg_map(&grid, &red, &blue, &points, &config))?;
        }
        None => match g.format.unwrap_or(Format::Csv) {
            Format::Csv => print!("{grid_text}"),
            Format::Json => print!("{}", strutt::squeeze_json(&points, &config)),
            Format::Svg => print!("{}", strutt::svg_map(&grid, &red, &blue, &points, &config)),
        },
    }
    let failed = grid.cells.iter().filter(|c| c.error.is_some()).count();
    if failed > 0 {
        return Err(CliError::Numerical(format!("{failed} cells failed to integrate")));
    }
    Ok(())
}

// ----------------------------------------------------------- propagate

struct LoadedProfile {
    profile: BetaProfile,
    period: Option<f64>,
    default_end: Option<f64>,
}

/// Accepts a tagged profile or a pulse plan written by `compose`.
fn load_profile(path: &Path) -> Result<LoadedProfile, CliError> {
    let value = read_json(path)?;
    if value.get("type").is_some() {
        let mut v = value;
        if let Value::Object(m) = &mut v {
            m.remove("config");
        }
        let pj: ProfileJson = serde_json::from_value(v)?;
        let (profile, declared) = pj.into_profile()?;
        let period = declared.or(profile.period());
        return Ok(LoadedProfile { profile, period, default_end: period });
    }
    if value.get("segments").is_some() {
        let plan: PulsePlan = serde_json::from_value(value)?;
        let total = plan.total_duration();
        return Ok(LoadedProfile { profile: plan.profile()?, period: Some(total), default_end: Some(total) });
    }
    Err(CliError::Usage("profile JSON needs a \"type\" tag or pulse-plan \"segments\"".into()))
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct PropagateArgs {
    /// Profile JSON file (tagged profile or pulse plan).
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub tau0: f64,
    /// End time; defaults to one period after tau0 for periodic profiles.
    #[arg(long)]
    pub tau1: Option<f64>,
    /// Integrate the symmetric-interval equation over [-T, T] instead.
    #[arg(long)]
    pub symmetric: Option<f64>,
}

pub fn propagate(g: &GlobalOpts, a: &PropagateArgs) -> Result<(), CliError> {
    json_only(g)?;
    let config = resolved("propagate", g, a);
    echo(&config, g);
    let loaded = load_profile(&a.profile)?;
    let cfg = g.integrator()?;
    let (matrix, interval) = match a.symmetric {
        Some(t) => (propagator::propagate_symmetric(&loaded.profile, t, &cfg)?, (-t, t)),
        None => {
            let end = match (a.tau1, loaded.default_end) {
                (Some(t), _) => t,
                (None, Some(p)) => a.tau0 + p,
                (None, None) => return Err(CliError::Usage("--tau1 is required for aperiodic profiles".into())),
            };
            (propagator::propagate(&loaded.profile, a.tau0, end, &cfg)?, (a.tau0, end))
        }
    };
    let mut body = json!({
        "interval": [interval.0, interval.1],
        "matrix": matrix,
        "det": matrix.det(),
        "det_drift": matrix.det_defect(),
        "trace": matrix.trace(),
    });
    if let Some(period) = loaded.period {
        let report = floquet::monodromy_over(&loaded.profile, period, a.tau0, &cfg)?;
        body["monodromy"] = json!({ "period": period, "gamma": report.gamma, "class": report.motion_class });
    }
    emit(g, &with_config(body, &config))
}

// ------------------------------------------------------------ classify

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct ClassifyArgs {
    /// Profile JSON file.
    #[arg(long, required_unless_present = "random")]
    pub profile: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub tau0: f64,
    /// Period override (required for constant profiles without one).
    #[arg(long)]
    pub period: Option<f64>,
    /// Classify this many random periodic profiles drawn with --seed.
    #[arg(long, conflicts_with = "profile")]
    pub random: Option<usize>,
}

/// Constant, Paul or 2–5 segment piecewise profile with parameters in
/// [-3, 3], together with its period.
pub fn random_periodic_profile(rng: &mut impl Rng) -> (BetaProfile, f64) {
    match rng.gen_range(0..3) {
        0 => (BetaProfile::constant(rng.gen_range(-3.0..3.0)), rng.gen_range(0.1..3.0)),
        1 => (BetaProfile::paul(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)), TAU),
        _ => {
            let n = rng.gen_range(2..=5);
            let segs: Vec<Segment> =
                (0..n).map(|_| Segment::new(rng.gen_range(0.05..3.0), rng.gen_range(-3.0..3.0))).collect();
            let p = BetaProfile::piecewise(segs).expect("positive durations");
            let period = p.period().expect("piecewise period");
            (p, period)
        }
    }
}

pub fn classify(g: &GlobalOpts, a: &ClassifyArgs) -> Result<(), CliError> {
    json_only(g)?;
    let config = resolved("classify", g, a);
    echo(&config, g);
    let cfg = g.integrator()?;
    if let Some(n) = a.random {
        let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
        let mut counts = [0usize; 3];
        let mut reports = vec![];
        for _ in 0..n {
            let (p, period) = random_periodic_profile(&mut rng);
            let r = floquet::monodromy_over(&p, period, a.tau0, &cfg)?;
            counts[r.motion_class as usize] += 1;
            reports.push(json!({ "period": period, "gamma": r.gamma, "class": r.motion_class }));
        }
        let body = json!({ "counts": { "I": counts[0], "II": counts[1], "III": counts[2] }, "profiles": reports });
        return emit(g, &with_config(body, &config));
    }
    let path = a.profile.as_ref().expect("clap enforces --profile");
    let loaded = load_profile(path)?;
    let period =
        a.period.or(loaded.period).ok_or_else(|| CliError::Usage("profile has no period; pass --period".into()))?;
    let report: MonodromyReport = floquet::monodromy_over(&loaded.profile, period, a.tau0, &cfg)?;
    emit(g, &with_config(serde_json::to_value(&report)?, &config))
}

// ------------------------------------------------------------- compose

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct ComposeArgs {
    /// Oscillator frequency of the second stretch.
    #[arg(long, requires = "kappa2")]
    pub kappa1: Option<f64>,
    /// Oscillator frequency of the first stretch; the plan squeezes by -kappa2/kappa1.
    #[arg(long, requires = "kappa1")]
    pub kappa2: Option<f64>,
    /// Design a two-step plan for this squeezing factor.
    #[arg(long, conflicts_with_all = ["kappa1", "matrices"])]
    pub lambda: Option<f64>,
    /// JSON file {"core": [[a, b], [c, d]], "wings": [...]} for a symmetric product.
    #[arg(long, conflicts_with = "kappa1")]
    pub matrices: Option<PathBuf>,
}

#[derive(serde::Deserialize)]
struct ProductInput {
    core: Mat2,
    #[serde(default)]
    wings: Vec<Mat2>,
}

pub fn compose(g: &GlobalOpts, a: &ComposeArgs) -> Result<(), CliError> {
    json_only(g)?;
    let config = resolved("compose", g, a);
    echo(&config, g);
    let body = if let (Some(k1), Some(k2)) = (a.kappa1, a.kappa2) {
        plan_json(&pulse::two_step_squeeze(k1, k2)?)
    } else if let Some(l) = a.lambda {
        plan_json(&pulse::design_lambda(l)?)
    } else if let Some(path) = &a.matrices {
        let input: ProductInput = serde_json::from_value(read_json(path)?)?;
        let u = pulse::symmetric_product(&input.core, &input.wings)?;
        json!({ "product": u, "det": u.det(), "trace": u.trace(), "equidiagonal": u.is_equidiagonal(1e-12 * u.max_abs().max(1.0)) })
    } else {
        return Err(CliError::Usage("pass --kappa1/--kappa2, --lambda or --matrices".into()));
    };
    emit(g, &with_config(body, &config))
}

fn plan_json(plan: &PulsePlan) -> Value {
    let mut v = serde_json::to_value(plan).expect("serializable");
    v["jump_count"] = json!(plan.jump_count());
    v
}

// -------------------------------------------------------------- invert

#[derive(Args, Debug, Serialize)]
pub struct InvertArgs {
    /// Theta JSON file.
    #[arg(long)]
    pub theta: PathBuf,
    /// Number of beta samples over [0, T].
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
    /// Probe grid size for the validity report.
    #[arg(long, default_value_t = 64)]
    pub probes: usize,
    /// Skip the forward-integration round trip.
    #[arg(long)]
    pub no_roundtrip: bool,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn invert(g: &GlobalOpts, a: &InvertArgs) -> Result<(), CliError> {
    let config = resolved("invert", g, a);
    echo(&config, g);
    let mut raw = read_json(&a.theta)?;
    if let Value::Object(m) = &mut raw {
        m.remove("config");
    }
    let spec = serde_json::from_value::<ThetaJson>(raw)?.into_spec()?;
    if a.samples < 2 || a.probes < 16 {
        return Err(CliError::Usage("--samples must be >= 2 and --probes >= 16".into()));
    }
    let report = theta::validate_theta(&spec, a.probes);
    let clauses: Vec<String> = report.failed_clauses().iter().map(|c| c.to_string()).collect();
    let validity = json!({ "valid": report.is_valid(), "failed_clauses": clauses, "report": report });
    let to_dir = g.out.is_some() && g.format.is_none();
    if !report.is_valid() {
        let text = with_config(json!({ "validity": validity }), &config);
        match (&g.out, to_dir) {
            (Some(dir), true) => {
                fs::create_dir_all(dir)?;
                fs::write(dir.join("validity.json"), text)?;
            }
            _ => emit(g, &text)?,
        }
        return Err(CliError::Validation(format!("theta violates {}", clauses.join("; "))));
    }

    let t = spec.half_width();
    let mut csv_text = format!("# config: {config}\ntau,beta,u11,u12,u21,u22\n");
    let mut samples = vec![];
    for k in 0..a.samples {
        let tau = if k + 1 == a.samples { t } else { t * k as f64 / (a.samples - 1) as f64 };
        let beta = theta::beta_from_theta(&spec, tau)?;
        let u = theta::u_from_theta(&spec, tau)?;
        let _ = writeln!(
            csv_text,
            "{},{},{},{},{},{}",
            num(tau),
            num(beta),
            num(u.u11),
            num(u.u12),
            num(u.u21),
            num(u.u22)
        );
        samples.push(json!({ "tau": tau, "beta": beta, "u": u }));
    }
    let roundtrip = if a.no_roundtrip {
        Value::Null
    } else {
        let r = theta::verify_roundtrip(&spec, &g.integrator()?)?;
        eprintln!("round trip max residual {:.3e}", r.max_residual);
        serde_json::to_value(r)?
    };

    if to_dir {
        let dir = g.out.as_ref().expect("checked");
        fs::create_dir_all(dir)?;
        fs::write(dir.join("beta.csv"), &csv_text)?;
        fs::write(dir.join("validity.json"), with_config(json!({ "validity": validity }), &config))?;
        fs::write(dir.join("roundtrip.json"), with_config(json!({ "roundtrip": roundtrip }), &config))?;
        return Ok(());
    }
    match g.format.unwrap_or(Format::Json) {
        Format::Csv => emit(g, &csv_text),
        Format::Json => {
            emit(g, &with_config(json!({ "validity": validity, "roundtrip": roundtrip, "samples": samples }), &config))
        }
        Format::Svg => Err(CliError::Usage("invert writes CSV or JSON".into())),
    }
}

// --------------------------------------------------------------- units

#[derive(Args, Debug, Serialize)]
pub struct UnitsArgs {
    #[command(subcommand)]
    pub cmd: UnitsCmd,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitsCmd {
    /// Voltages to (beta0, beta1).
    #[command(allow_negative_numbers = true)]
    ToBeta {
        #[arg(long, default_value_t = ELEMENTARY_CHARGE)]
        charge_c: f64,
        #[arg(long, default_value_t = PROTON_MASS)]
        mass_kg: f64,
        #[arg(long)]
        r0_m: f64,
        #[arg(long)]
        omega_rad_per_s: f64,
        #[arg(long, default_value_t = 0.0)]
        phi0_v: f64,
        #[arg(long, default_value_t = 0.0)]
        phi1_v: f64,
    },
    /// (beta0, beta1) to voltages, from trap data or a given energy scale in eV.
    #[command(allow_negative_numbers = true)]
    ToVolts {
        #[arg(long)]
        beta0: f64,
        #[arg(long)]
        beta1: f64,
        #[arg(long, default_value_t = ELEMENTARY_CHARGE)]
        charge_c: f64,
        #[arg(long, default_value_t = PROTON_MASS)]
        mass_kg: f64,
        #[arg(long, required_unless_present = "scale_ev")]
        r0_m: Option<f64>,
        #[arg(long, required_unless_present = "scale_ev")]
        omega_rad_per_s: Option<f64>,
        /// omega^2 r0^2 m in eV, for a singly charged particle.
        #[arg(long, conflicts_with_all = ["r0_m", "omega_rad_per_s"])]
        scale_ev: Option<f64>,
    },
    /// Drive frequency and energy scale of a radio wave of given wavelength.
    Wavelength {
        #[arg(long)]
        wavelength_m: f64,
        #[arg(long)]
        r0_m: f64,
        #[arg(long, default_value_t = PROTON_MASS)]
        mass_kg: f64,
    },
    /// Field inside a rotating charged cylinder.
    #[command(allow_negative_numbers = true)]
    Solenoid {
        #[arg(long)]
        omega_rad_per_s: f64,
        #[arg(long)]
        radius_m: f64,
        /// Surface charge density in C/m^2.
        #[arg(long, required_unless_present = "belt_charge_c")]
        sigma_c_per_m2: Option<f64>,
        /// Charge carried by one belt, reported under both readings of sigma.
        #[arg(long, requires = "belt_height_m", conflicts_with = "sigma_c_per_m2")]
        belt_charge_c: Option<f64>,
        #[arg(long)]
        belt_height_m: Option<f64>,
    },
}

pub fn units(g: &GlobalOpts, a: &UnitsArgs) -> Result<(), CliError> {
    json_only(g)?;
    let config = resolved("units", g, a);
    echo(&config, g);
    let body = match a.cmd {
        UnitsCmd::ToBeta { charge_c, mass_kg, r0_m, omega_rad_per_s, phi0_v, phi1_v } => {
            let p = TrapParams {
                charge: charge_c,
                mass: mass_kg,
                r0: r0_m,
                omega: omega_rad_per_s,
                phi0: phi0_v,
                phi1: phi1_v,
            };
            let (b0, b1) = units::dimensionless_from_physical(&p)?;
            json!({
                "beta0": b0,
                "beta1": b1,
                "energy_scale_J": p.energy_scale(),
                "energy_scale_eV": units::joules_to_ev(p.energy_scale()),
                "drive_period_s": p.drive_period(),
            })
        }
        UnitsCmd::ToVolts { beta0, beta1, charge_c, mass_kg, r0_m, omega_rad_per_s, scale_ev } => {
            let (phi0, phi1, scale) = match (scale_ev, r0_m, omega_rad_per_s) {
                (Some(s), _, _) => {
                    let (a, b) = units::voltages_at_energy_scale(beta0, beta1, s);
                    (a, b, s)
                }
                (None, Some(r0), Some(w)) => {
                    let (a, b) = units::physical_from_dimensionless(beta0, beta1, charge_c, mass_kg, r0, w)?;
                    (a, b, units::joules_to_ev(units::energy_scale(mass_kg, r0, w)))
                }
                _ => return Err(CliError::Usage("pass --scale-ev or both --r0-m and --omega-rad-per-s".into())),
            };
            json!({ "phi0_V": phi0, "phi1_V": phi1, "energy_scale_eV": scale })
        }
        UnitsCmd::Wavelength { wavelength_m, r0_m, mass_kg } => {
            if wavelength_m.is_nan() || wavelength_m <= 0.0 {
                return Err(CliError::Usage("wavelength must be positive".into()));
            }
            let omega = units::omega_from_wavelength(wavelength_m);
            let e = units::energy_scale(mass_kg, r0_m, omega);
            json!({ "omega_rad_per_s": omega, "energy_scale_J": e, "energy_scale_eV": units::joules_to_ev(e) })
        }
        UnitsCmd::Solenoid { omega_rad_per_s, radius_m, sigma_c_per_m2, belt_charge_c, belt_height_m } => {
            let field = |sigma: f64| {
                units::solenoid_field_gauss(&CylinderParams { omega: omega_rad_per_s, radius: radius_m, sigma })
            };
            match (sigma_c_per_m2, belt_charge_c, belt_height_m) {
                (Some(s), _, _) => json!({ "sigma_C_per_m2": s, "B_G": field(s)? }),
                (None, Some(q), Some(h)) => {
                    let mut readings = vec![];
                    for r in [BeltReading::SurfaceDensity, BeltReading::ChargePerRadius] {
                        let s = units::sigma_from_belt(q, radius_m, h, r)?;
                        readings.push(json!({ "reading": r, "sigma_C_per_m2": s, "B_G": field(s)? }));
                    }
                    json!({ "readings": readings })
                }
                _ => {
                    return Err(CliError::Usage("pass --sigma-c-per-m2 or --belt-charge-c with --belt-height-m".into()))
                }
            }
        }
    };
    emit(g, &with_config(body, &config))
}
