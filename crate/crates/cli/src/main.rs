use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use implosion_core::barriers::{
    barrier_intersection, descriptor, dz_crossing_bnr4, implicit_descriptor, make_b_fl, make_b_fr, make_b_nl, make_b_nr,
    nullclines, portrait_grid, validity_time, write_barrier_csv, write_grid_csv, write_implicit_csv, write_nullclines_csv,
    BarrierRef,
};
use implosion_core::certify::{
    certificate_export, certify_crossing, near_field_report, CertifyOptions, Verdict, DEFAULT_BUDGET, DEFAULT_TOL,
    DEFAULT_T_MIN,
};
use implosion_core::euler::{find_po, k_of_r, sonic_data, Gamma, GasParams};
use implosion_core::profile::{physical_table, write_physical_csv, Profile, PROFILE_MAX_DXI};
use implosion_core::scalar::BigReal;
use implosion_core::shooting::{branch_trajectory, find_r_bisect_with, BranchSide, IntegratorOptions, ShootOptions};
use implosion_core::taylor::{locate_poles, r_sweep, taylor_at_ps_with, write_sweep_csv, TaylorOptions};
use implosion_core::{Error, Interval};

mod manifest;

use manifest::Manifest;

/// Self-similar implosion profiles: sonic-point data, Taylor series, barriers,
/// certification and shooting.
#[derive(Parser, Serialize)]
#[command(name = "implosion", version)]
struct Cli {
    /// Directory for all outputs; defaults to $IMPLOSION_OUT_DIR, then `out`.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Eigen-data at the sonic point and the exponent ratio k.
    K(KArgs),
    /// Taylor coefficients of the smooth solution at the sonic point.
    Taylor(TaylorArgs),
    /// Barrier curves, nullclines, intersections and certificates.
    Barriers(BarrierArgs),
    /// Bisection on r for a profile connecting the sonic point to P_0.
    Shoot(ShootArgs),
    /// The psi-field sampled on a grid, with nullclines.
    Portrait(PortraitArgs),
    /// Physical fields (u, sigma, rho) from a computed profile.
    Reconstruct(ReconstructArgs),
}

#[derive(Args, Serialize)]
struct KArgs {
    /// Adiabatic exponent, as `p/q` or a decimal.
    #[arg(long, default_value = "5/3")]
    gamma: String,
    #[arg(long, required_unless_present = "sweep")]
    r: Option<f64>,
    /// Sweep `RMIN RMAX STEPS` and write (r, k) to k_sweep.csv.
    #[arg(long, num_args = 3, value_names = ["RMIN", "RMAX", "STEPS"])]
    sweep: Option<Vec<f64>>,
}

#[derive(Clone, Copy, ValueEnum, Serialize, PartialEq)]
enum Precision {
    /// f64 up to order 100, multiprecision above.
    Auto,
    F64,
    Big,
}

#[derive(Args, Serialize)]
struct TaylorArgs {
    #[arg(long, default_value = "5/3")]
    gamma: String,
    #[arg(long, required_unless_present = "sweep")]
    r: Option<f64>,
    #[arg(long, default_value_t = 16)]
    order: usize,
    /// Output CSV (inside the output directory unless absolute).
    #[arg(long, default_value = "taylor.csv")]
    out: PathBuf,
    /// Continue through resonances |n - k| < 1e-8 instead of failing.
    #[arg(long)]
    allow_resonant: bool,
    #[arg(long, value_enum, default_value_t = Precision::Auto)]
    precision: Precision,
    /// Sweep `RMIN RMAX STEPS` instead of a single r; also locates poles of Z_n.
    #[arg(long, num_args = 3, value_names = ["RMIN", "RMAX", "STEPS"])]
    sweep: Option<Vec<f64>>,
}

#[derive(Args, Serialize)]
struct BarrierArgs {
    #[arg(long, default_value = "5/3")]
    gamma: String,
    #[arg(long)]
    r: f64,
    /// Order of the right barrier b_nr (3 or 4).
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 500.0)]
    beta: f64,
    /// Constant c in the b_nr domain t <= c beta |k - n|^(1/(n-1)).
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Overrides the b_nr domain end.
    #[arg(long)]
    t_max: Option<f64>,
    /// Certify the crossing signs with interval branch and bound.
    #[arg(long)]
    certify: bool,
    /// Certify b_nr on its whole domain rather than up to where it meets B_fr
    /// (n = 3) or D_Z = 0 (n = 4).
    #[arg(long)]
    full_domain: bool,
    /// Claim the opposite crossing signs (a negative control).
    #[arg(long)]
    reverse_sign: bool,
    #[arg(long, default_value_t = DEFAULT_T_MIN)]
    t_min: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Samples per barrier curve in the CSV output.
    #[arg(long, default_value_t = 400)]
    samples: usize,
}

#[derive(Args, Serialize)]
struct ShootArgs {
    #[arg(long, default_value = "7/5")]
    gamma: String,
    /// Window index: r is sought in (r_n, r_{n+1}).
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Launch offset in xi from the sonic point.
    #[arg(long, default_value_t = implosion_core::shooting::DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = 1e-10)]
    rtol: f64,
}

#[derive(Args, Serialize)]
struct PortraitArgs {
    #[arg(long, default_value = "5/3")]
    gamma: String,
    #[arg(long)]
    r: f64,
    /// `WMIN:WMAX:NW,ZMIN:ZMAX:NZ`.
    #[arg(long, default_value = "-4:4:81,-4:4:81", allow_hyphen_values = true)]
    grid: String,
    #[arg(long, default_value = "portrait.csv")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct ReconstructArgs {
    #[arg(long, default_value = "5/3")]
    gamma: String,
    /// Exponent; found by shooting in window `n` when absent.
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Blow-up time.
    #[arg(long = "T", default_value_t = 1.0)]
    big_t: f64,
    /// Times at which to tabulate, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,0.9")]
    t: Vec<f64>,
    /// Radii `RMIN:RMAX:SAMPLES`, log spaced.
    #[arg(long = "R", default_value = "0.01:1:50")]
    radius: String,
    #[arg(long, default_value = "physical.csv")]
    out: PathBuf,
}

const EXIT_DISPROVED: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

struct Ctx {
    dir: PathBuf,
    manifest: Manifest,
}

impl Ctx {
    fn path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.dir.join(p)
        }
    }

    fn create(&mut self, p: &Path) -> Result<BufWriter<File>, Error> {
        let path = self.path(p);
        self.manifest.outputs.push(p.display().to_string());
        Ok(BufWriter::new(File::create(path)?))
    }

    fn write_json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<(), Error> {
        let mut f = self.create(Path::new(name))?;
        serde_json::to_writer_pretty(&mut f, v)?;
        writeln!(f)?;
        Ok(())
    }
}

fn gamma(s: &str) -> Result<Gamma, Error> {
    s.parse()
}

fn range3(s: &str) -> Result<(f64, f64, usize), Error> {
    let bad = || Error::DomainError(format!("expected MIN:MAX:COUNT, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a = parts[0].trim().parse().map_err(|_| bad())?;
    let b = parts[1].trim().parse().map_err(|_| bad())?;
    let n = parts[2].trim().parse().map_err(|_| bad())?;
    Ok((a, b, n))
}

fn cmd_k(a: &KArgs, ctx: &mut Ctx) -> Result<u8, Error> {
    let g = gamma(&a.gamma)?;
    if let Some(sw) = &a.sweep {
        let steps = sw[2] as usize;
        let mut f = ctx.create(Path::new("k_sweep.csv"))?;
        writeln!(f, "r,k")?;
        for i in 0..steps.max(2) {
            let r = sw[0] + (sw[1] - sw[0]) * i as f64 / (steps.max(2) - 1) as f64;
            let k = k_of_r(g, r).map_or(f64::NAN, |k| k);
            writeln!(f, "{:.16e},{:.16e}", r, k)?;
        }
        return Ok(0);
    }
    let r = a.r.expect("clap enforces r without sweep");
    let p = GasParams::new(g, r);
    let k = k_of_r(g, r)?;
    let sd = sonic_data(&p)?;
    println!("gamma        {g}");
    println!("r            {r}");
    println!("k            {k:.16e}");
    println!("lambda_minus {:.16e}", sd.lambda_minus);
    println!("lambda_plus  {:.16e}", sd.lambda_plus);
    println!("nu_minus     [{:.16e}, {:.16e}]", sd.nu_minus[0], sd.nu_minus[1]);
    println!("nu_plus      [{:.16e}, {:.16e}]", sd.nu_plus[0], sd.nu_plus[1]);
    println!("P_s          [{:.16e}, {:.16e}]", sd.ps.0, sd.ps.1);
    ctx.manifest.results = json!({ "k": k, "lambda_minus": sd.lambda_minus, "lambda_plus": sd.lambda_plus, "ps": [sd.ps.0, sd.ps.1] });
    Ok(0)
}

fn cmd_taylor(a: &TaylorArgs, ctx: &mut Ctx) -> Result<u8, Error> {
    let g = gamma(&a.gamma)?;
    if let Some(sw) = &a.sweep {
        let rows = r_sweep(g, sw[0], sw[1], sw[2] as usize, a.order);
        let out = a.out.clone();
        write_sweep_csv(&rows, a.order, ctx.create(&out)?)?;
        let poles: Vec<_> = (1..=a.order).map(|n| json!({ "n": n, "poles": locate_poles(g, &rows, n) })).collect();
        ctx.write_json("poles.json", &poles)?;
        ctx.manifest.results = json!({ "poles": poles });
        return Ok(0);
    }
    let p = GasParams::new(g, a.r.expect("clap enforces r without sweep"));
    let opts = TaylorOptions { allow_resonant: a.allow_resonant, compensated: None };
    let big = match a.precision {
        Precision::Big => true,
        Precision::F64 => false,
        Precision::Auto => a.order > 100,
    };
    let out = a.out.clone();
    let warnings = if big {
        let s = taylor_at_ps_with::<BigReal>(&p, a.order, opts)?;
        s.write_csv(ctx.create(&out)?)?;
        s.warnings
    } else {
        let s = taylor_at_ps_with::<f64>(&p, a.order, opts)?;
        s.write_csv(ctx.create(&out)?)?;
        s.warnings
    };
    for w in &warnings {
        eprintln!("warning: near resonance at n={} (|n - k| = {:.3e})", w.n, w.gap);
    }
    ctx.manifest.results = json!({ "multiprecision": big, "near_resonances": warnings.iter().map(|w| w.n).collect::<Vec<_>>() });
    Ok(0)
}

#[derive(Serialize)]
struct CertSummary {
    label: String,
    claimed_sign: f64,
    range: [f64; 2],
    verdict: Verdict,
    leaf_count: usize,
    file: String,
}

fn cmd_barriers(a: &BarrierArgs, ctx: &mut Ctx) -> Result<u8, Error> {
    if a.n != 3 && a.n != 4 {
        return Err(Error::DomainError(format!("n must be 3 or 4, got {}", a.n)));
    }
    let g = GasParams::new(gamma(&a.gamma)?, a.r);
    let s = implosion_core::taylor::taylor_at_ps(&g, a.n.max(4) + 4)?;
    let k = s.k_at_r;
    let nl = make_b_nl(&s)?;
    let fl = make_b_fl(&g, &s)?;
    let mut nr = make_b_nr(&s, a.n, a.beta)?;
    nr.t_max = a.t_max.unwrap_or(implosion_core::barriers::b_nr_domain(k, a.n, a.beta, a.c));
    let fr = make_b_fr(&g, &s)?;

    let tv = validity_time(&nl, 1e-3, 1.0);
    let t_nl_fl = barrier_intersection(&nl, BarrierRef::Param(&fl)).ok();
    let t_nr_fr = barrier_intersection(&nr, BarrierRef::Implicit(&fr)).ok();
    let t_dz = if a.n == 4 { dz_crossing_bnr4(&nr, nr.t_max).ok() } else { None };

    write_barrier_csv(&nl, tv.unwrap_or(1.0), a.samples, ctx.create(Path::new("b_nl.csv"))?)?;
    write_barrier_csv(&fl, 1.0, a.samples, ctx.create(Path::new("b_fl.csv"))?)?;
    let nr_show = t_nr_fr.or(t_dz).map_or(nr.t_max.min(1.0), |t| (2.0 * t).min(nr.t_max));
    write_barrier_csv(&nr, nr_show, a.samples, ctx.create(Path::new(&format!("b_nr{}.csv", a.n)))?)?;
    write_implicit_csv(&fr, a.samples, ctx.create(Path::new("B_fr.csv"))?)?;
    let nc = nullclines(&g, (-4.0, 4.0), (-4.0, 4.0), 800);
    write_nullclines_csv(&nc, ctx.create(Path::new("nullclines.csv"))?)?;

    let point = |b: &implosion_core::ParamBarrier, t: Option<f64>| t.map(|t| [b.point(t).w, b.point(t).z]);
    let ps = s.ps();
    let po = find_po(&g)?;
    let inter = json!({
        "k": k,
        "P_s": [ps.0, ps.1],
        "P_o": [po.w, po.z],
        "t_v_b_nl": tv,
        "b_nl_b_fl": { "t": t_nl_fl, "point": point(&nl, t_nl_fl) },
        "b_nr_B_fr": { "t": t_nr_fr, "point": point(&nr, t_nr_fr), "t_over_abs_k_minus_n": t_nr_fr.map(|t| t / (k - a.n as f64).abs()) },
        "b_nr4_D_Z": { "t": t_dz, "point": point(&nr, t_dz) },
    });
    ctx.write_json("intersections.json", &inter)?;
    ctx.write_json(
        "barriers.json",
        &json!([descriptor(&nl), descriptor(&fl), descriptor(&nr), implicit_descriptor(&fr)]),
    )?;
    ctx.manifest.results = json!({ "intersections": inter });

    if !a.certify {
        return Ok(0);
    }
    let opts = CertifyOptions { tol: a.tol, budget: a.budget, record_leaves: true };
    let flip = if a.reverse_sign { -1.0 } else { 1.0 };
    let t_i = t_nl_fl.ok_or_else(|| Error::NoBarrierIntersection("b_nl".into()))?;
    let nr_sign = if a.n == 3 { 1.0 } else { -1.0 };
    let partner = if a.n == 3 { t_nr_fr } else { t_dz };
    let nr_hi = if a.full_domain { nr.t_max } else { partner.unwrap_or(nr.t_max) };
    let jobs: Vec<(String, BarrierRef<'_>, f64, f64, f64)> = vec![
        ("b_nl".into(), BarrierRef::Param(&nl), a.t_min, t_i, 1.0),
        ("b_fl".into(), BarrierRef::Param(&fl), t_i, 1.0 - a.t_min, 1.0),
        (format!("b_nr{}", a.n), BarrierRef::Param(&nr), a.t_min, nr_hi, nr_sign),
        ("B_fr".into(), BarrierRef::Implicit(&fr), a.t_min, fr.tau_max, 1.0),
    ];
    let jobs: Vec<_> = if a.n == 4 { jobs.into_iter().filter(|j| j.0 != "B_fr").collect() } else { jobs };
    let mut verdict = Verdict::Proved;
    let mut summary = Vec::new();
    for (label, target, lo, hi, sign) in jobs {
        let claimed = sign * flip;
        let cert = certify_crossing(target, Interval::new(lo, hi)?, claimed, &opts)?;
        let file = format!("cert_{label}.json");
        let path = ctx.path(Path::new(&file));
        certificate_export(&cert, &path)?;
        ctx.manifest.outputs.push(file.clone());
        println!("{label}: {:?} on [{lo:.6e}, {hi:.6e}] ({} leaves)", cert.verdict, cert.leaf_count);
        verdict = verdict.combine(cert.verdict);
        summary.push(CertSummary { label, claimed_sign: claimed, range: [lo, hi], verdict: cert.verdict, leaf_count: cert.leaf_count, file });
    }
    let near = near_field_report(&s, a.n, a.beta, a.t_min);
    ctx.manifest.results["certificates"] = json!(summary);
    ctx.manifest.results["near_field"] = json!(near);
    Ok(match verdict {
        Verdict::Proved => 0,
        Verdict::Disproved => EXIT_DISPROVED,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

fn cmd_shoot(a: &ShootArgs, ctx: &mut Ctx) -> Result<u8, Error> {
    let g = gamma(&a.gamma)?;
    let opts = ShootOptions {
        delta: a.delta,
        integrator: IntegratorOptions { rtol: a.rtol, atol: a.rtol * 1e-2, ..Default::default() },
        ..Default::default()
    };
    let rep = find_r_bisect_with(g, a.n, a.tol, &opts)?;
    println!("r = {:.12}", rep.r);
    ctx.write_json("shoot.json", &rep)?;
    let p = GasParams::new(g, rep.r);
    for (side, name) in [(BranchSide::Right, "right.csv"), (BranchSide::Left, "left.csv")] {
        let t = branch_trajectory(&p, side, a.delta, &opts.integrator)?;
        t.write_csv(ctx.create(Path::new(name))?)?;
    }
    ctx.manifest.results = json!({ "r": rep.r, "iterations": rep.iterations, "escape_window": rep.escape_window });
    Ok(0)
}

fn cmd_portrait(a: &PortraitArgs, ctx: &mut Ctx) -> Result<u8, Error> {
    let g = GasParams::new(gamma(&a.gamma)?, a.r);
    let (wspec, zspec) = a
        .grid
        .split_once(',')
        .ok_or_else(|| Error::DomainError(format!("expected WMIN:WMAX:NW,ZMIN:ZMAX:NZ, got {:?}", a.grid)))?;
    let (w0, w1, nw) = range3(wspec)?;
    let (z0, z1, nz) = range3(zspec)?;
    let grid = portrait_grid(&g, (w0, w1), (z0, z1), nw, nz);
    let out = a.out.clone();
    write_grid_csv(&grid, ctx.create(&out)?)?;
    let nc = nullclines(&g, (w0, w1), (z0, z1), 4 * nw.max(nz));
    write_nullclines_csv(&nc, ctx.create(Path::new("nullclines.csv"))?)?;
    ctx.manifest.results = json!({ "rows": grid.len() });
    Ok(0)
}

fn cmd_reconstruct(a: &ReconstructArgs, ctx: &mut Ctx) -> Result<u8, Error> {
    let g = gamma(&a.gamma)?;
    let r = match a.r {
        Some(r) => r,
        None => find_r_bisect_with(g, a.n, 1e-7, &ShootOptions::default())?.r,
    };
    let p = GasParams::new(g, r);
    let profile = Profile::build(&p, implosion_core::shooting::DEFAULT_DELTA, PROFILE_MAX_DXI)?;
    profile.write_csv(ctx.create(Path::new("profile.csv"))?)?;
    let (r0, r1, n) = range3(&a.radius)?;
    let rows = physical_table(&profile, a.big_t, &a.t, (r0, r1), n)?;
    let out = a.out.clone();
    write_physical_csv(&rows, ctx.create(&out)?)?;
    let (lo, hi) = profile.xi_range();
    ctx.manifest.results = json!({ "r": r, "xi_range": [lo, hi], "terminations": profile.terminations });
    Ok(0)
}

fn run(cli: &Cli, ctx: &mut Ctx) -> Result<u8, Error> {
    match &cli.command {
        Command::K(a) => cmd_k(a, ctx),
        Command::Taylor(a) => cmd_taylor(a, ctx),
        Command::Barriers(a) => cmd_barriers(a, ctx),
        Command::Shoot(a) => cmd_shoot(a, ctx),
        Command::Portrait(a) => cmd_portrait(a, ctx),
        Command::Reconstruct(a) => cmd_reconstruct(a, ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let dir = cli
        .out_dir
        .clone()
        .or_else(|| std::env::var_os("IMPLOSION_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    if let Err(e) = fs::create_dir_all(&dir) {
        eprintln!("error: cannot create {}: {e}", dir.display());
        return ExitCode::from(1);
    }
    let mut ctx = Ctx { manifest: Manifest::new(&cli, &dir), dir };
    let code = match run(&cli, &mut ctx) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            ctx.manifest.error = Some(e.to_string());
            1
        }
    };
    ctx.manifest.exit_code = code;
    if let Err(e) = ctx.manifest.write(&ctx.dir) {
        eprintln!("error: cannot write manifest: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
