mod config;

use std::f64::consts::TAU;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use ddephase::bifurcation::{self, Axis, Branch, Kind, Probes, SweepConfig, SweepMode};
use ddephase::dde::{self, Attractor, HistorySpec};
use ddephase::fourier::{FourierSeries, Lattice};
use ddephase::homological::{conjugacy_residual, ReduceOptions};
use ddephase::stuart_landau as sl;
use num_complex::Complex64;

use config::{RunConfig, SweepKind};

#[derive(Parser, Debug)]
#[command(name = "ddephase", version, about = "Phase reduction and simulation of delay-coupled Stuart-Landau oscillators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Configuration file with `key=value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Seed for random sweep probes.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    rho: Option<f64>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// Expansion order.
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Override any configuration key, e.g. `--set sweep.rho_n=32`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expand the invariant torus and reduced phase field; compare with closed forms.
    Reduce {
        /// Also print the coefficient JSON to stdout.
        #[arg(long)]
        emit_coefficients: bool,
    },
    /// Integrate the full delay system and write the trajectory.
    SimulateDde,
    /// Integrate the reduced phase-difference equation.
    SimulatePhase,
    /// Zero curves of the sync and splay eigenvalues over a range of delays.
    Curves,
    /// Classify attractors over a (rho, tau) grid; writes CSV and SVG.
    Sweep,
    /// Scaling of the conjugacy residuals with the coupling strength.
    Residual,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Solver(anyhow::Error),
    Io(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        let io = e.chain().any(|c| {
            c.downcast_ref::<std::io::Error>().is_some() || matches!(c.downcast_ref::<ddephase::Error>(), Some(ddephase::Error::Io(_)))
        });
        if io {
            Failure::Io(e)
        } else {
            Failure::Solver(e)
        }
    }
}

fn build_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            RunConfig::parse(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    let m = &mut cfg.model;
    for (slot, v) in [
        (&mut m.alpha, common.alpha),
        (&mut m.beta, common.beta),
        (&mut m.gamma, common.gamma),
        (&mut m.delta, common.delta),
        (&mut m.eps, common.eps),
        (&mut m.rho, common.rho),
        (&mut m.tau, common.tau),
    ] {
        if let Some(v) = v {
            *slot = v;
        }
    }
    if let Some(o) = common.order {
        cfg.order = o;
    }
    if let Some(s) = common.seed {
        cfg.seed = Some(s);
    }
    for a in &common.set {
        cfg.assign(a)?;
    }
    Ok(cfg)
}

struct Outputs {
    dir: PathBuf,
    header: String,
}

impl Outputs {
    fn new(dir: &Path, cfg: &RunConfig) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let header = format!("config_sha256={}", cfg.hash());
        let out = Outputs {
            dir: dir.to_path_buf(),
            header,
        };
        out.write_text("config.txt", "#", &cfg.emit())?;
        Ok(out)
    }

    fn create(&self, name: &str) -> Result<BufWriter<fs::File>> {
        let path = self.dir.join(name);
        let f = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(BufWriter::new(f))
    }

    /// Write `body` after a `<comment> config_sha256=...` line.
    fn write_text(&self, name: &str, comment: &str, body: &str) -> Result<()> {
        let mut w = self.create(name)?;
        writeln!(w, "{comment} {}", self.header)?;
        w.write_all(body.as_bytes())?;
        w.flush()?;
        Ok(())
    }

    fn write_with<F>(&self, name: &str, comment: &str, f: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> ddephase::Result<()>,
    {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write_text(name, comment, &String::from_utf8(buf).expect("writers emit UTF-8"))
    }
}

fn reduce_options(cfg: &RunConfig) -> ReduceOptions {
    ReduceOptions {
        order: cfg.k,
        lattice_points: (cfg.lattice > 0).then_some(cfg.lattice),
        tol_res: cfg.tol_res,
    }
}

fn mode_table(name: &str, s: &FourierSeries, out: &mut String) {
    use std::fmt::Write as _;
    let _ = writeln!(out, "{name}: {} modes", s.num_modes());
    for (k, c) in s.modes() {
        for (j, v) in c.iter().enumerate() {
            if v.norm() > 1e-14 {
                let _ = writeln!(out, "  [{j}] k={k:<10} {:+.12e} {:+.12e}i", v.re, v.im);
            }
        }
    }
}

fn cmd_reduce(cfg: &RunConfig, out: &Outputs, emit: bool) -> Result<()> {
    let p = cfg.model;
    let opts = reduce_options(cfg);
    let ex = sl::reduce_sl(&p, cfg.order, &opts)?;
    let lat = Lattice::new(2, 64);
    let mut report = String::new();
    use std::fmt::Write as _;
    let o = sl::orbit(&p)?;
    let _ = writeln!(report, "orbit radius {:.12}, frequency {:.12}", o.r, o.omega);
    for l in 1..=ex.max_order() {
        mode_table(&format!("f{l} (generic solver)"), ex.f(l), &mut report);
    }
    if ex.max_order() >= 1 {
        let d = ex.f(1).max_deviation(&sl::f1_closed(&p)?, &lat)?;
        let _ = writeln!(report, "max |f1 - closed form| = {d:.3e}");
    }
    if p.delta == 0.0 && ex.max_order() >= 1 {
        let d = ex.e(1).max_deviation(&sl::e1_closed(&p)?, &lat)?;
        let _ = writeln!(report, "max |e1 - closed form| = {d:.3e}");
    }
    if p.delta == 0.0 && ex.max_order() >= 2 {
        mode_table("f2 (closed form)", &sl::f2_closed(&p)?, &mut report);
        let d = ex.f(2).max_deviation(&sl::f2_closed(&p)?, &lat)?;
        let _ = writeln!(report, "max |f2 - closed form| = {d:.3e}");
    }
    for (l, t) in ex.orders.iter().enumerate() {
        if !t.near_resonant.is_empty() {
            let _ = writeln!(report, "order {l}: {} near-resonant modes", t.near_resonant.len());
        }
    }
    print!("{report}");
    out.write_text("reduce_report.txt", "#", &report)?;
    let doc = serde_json::json!({
        "config_sha256": cfg.hash(),
        "expansion": ex.to_document(),
    });
    let json = serde_json::to_string_pretty(&doc)?;
    let mut w = out.create("expansion.json")?;
    writeln!(w, "{json}")?;
    w.flush()?;
    if emit {
        println!("{json}");
    }
    Ok(())
}

fn unwrapped_arg(z: impl Iterator<Item = Complex64>) -> Vec<f64> {
    let mut acc: Vec<f64> = Vec::new();
    for v in z {
        let a = v.arg();
        let next = match acc.last() {
            Some(&prev) => prev + dde::wrap_pi(a - prev),
            None => a,
        };
        acc.push(next);
    }
    acc
}

fn cmd_simulate_dde(cfg: &RunConfig, out: &Outputs) -> Result<()> {
    let p = cfg.model;
    let h = if cfg.sim_h > 0.0 { cfg.sim_h } else { dde::default_step(&p)? };
    let tr = dde::integrate_dde(&p, &HistorySpec::with_phase_difference(cfg.sim_psi0), cfg.sim_t_end, h)?;
    out.write_with("trajectory.csv", "#", |w| tr.write_csv(w, cfg.sim_stride))?;
    let t_end = tr.end();
    let psi_end = tr.phase_difference(t_end)?;
    let mut report = format!("steps {} of h = {:.6e}; final phase difference {psi_end:.9}\n", tr.len() - 1, tr.h);
    if t_end > 0.0 {
        let freq: Vec<f64> = (0..2)
            .map(|j| {
                let a = unwrapped_arg(tr.z.iter().map(|z| z[j]));
                (a[a.len() - 1] - a[0]) / t_end
            })
            .collect();
        let drift = freq[0] - freq[1];
        report += &format!(
            "mean frequencies {:.9} {:.9}; mean phase-difference drift {drift:.3e}\n",
            freq[0], freq[1]
        );
        if p.eps == 0.0 {
            report += &format!("uncoupled: both oscillators rotate at constant frequency {:.9}\n", sl::orbit(&p)?.omega);
        }
    }
    report += &format!("attractor {}\n", Attractor::from_psi(psi_end).label());
    print!("{report}");
    out.write_text("simulate_dde_report.txt", "#", &report)
}

fn cmd_simulate_phase(cfg: &RunConfig, out: &Outputs) -> Result<()> {
    let p = cfg.model;
    let tr = sl::integrate_reduced(&p, cfg.order, cfg.sim_psi0, cfg.sim_t_end, cfg.phase_h)?;
    let mut csv = String::from("t,psi\n");
    let stride = cfg.sim_stride.max(1);
    let last = tr.t.len() - 1;
    for i in (0..tr.t.len()).filter(|&i| i % stride == 0 || i == last) {
        csv += &format!("{:?},{:?}\n", tr.t[i], tr.psi[i].rem_euclid(TAU));
    }
    out.write_text("phase.csv", "#", &csv)?;
    let mut report = format!("final phase difference {:.9}\nequilibria (order {}):\n", tr.psi[last].rem_euclid(TAU), cfg.order);
    for e in sl::reduced_equilibria(&p, cfg.order)? {
        report += &format!("  psi = {:.9}  slope {:+.6e}  {:?}\n", e.psi, e.slope, e.stability);
    }
    print!("{report}");
    out.write_text("simulate_phase_report.txt", "#", &report)
}

fn cmd_curves(cfg: &RunConfig, out: &Outputs) -> Result<()> {
    let axis = Axis {
        lo: cfg.curves_tau_min,
        hi: cfg.curves_tau_max,
        n: cfg.curves_tau_n,
        endpoint: true,
    };
    let combos = [
        (Kind::Sync, Branch::HalfPi, "sync_pi2"),
        (Kind::Splay, Branch::HalfPi, "splay_pi2"),
        (Kind::Sync, Branch::ThreeHalfPi, "sync_3pi2"),
        (Kind::Splay, Branch::ThreeHalfPi, "splay_3pi2"),
    ];
    let mut csv = String::from("tau");
    for (_, _, name) in combos {
        csv += &format!(",rho_{name},rho_{name}_taylor");
    }
    csv.push('\n');
    for tau in axis.values() {
        let p = sl::SLParams { tau, ..cfg.model };
        csv += &format!("{tau:?}");
        for (k, b, _) in combos {
            let num = bifurcation::rho_zero_numeric(k, b, &p).unwrap_or(f64::NAN);
            let tay = bifurcation::rho_taylor(k, b, &p)?;
            csv += &format!(",{num:?},{tay:?}");
        }
        csv.push('\n');
    }
    out.write_text("curves.csv", "#", &csv)?;
    println!("wrote {} rows to {}", axis.n, out.dir.join("curves.csv").display());
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig, out: &Outputs) -> Result<()> {
    let mut sc = SweepConfig::new(
        cfg.model,
        cfg.sweep_rho_n,
        cfg.sweep_tau_n,
        match cfg.sweep_mode {
            SweepKind::Reduced => SweepMode::Reduced,
            SweepKind::Dde => SweepMode::Dde,
        },
    );
    sc.rho = Axis {
        lo: cfg.sweep_rho_min,
        hi: cfg.sweep_rho_max,
        n: cfg.sweep_rho_n,
        endpoint: false,
    };
    sc.tau = Axis {
        lo: cfg.sweep_tau_min,
        hi: cfg.sweep_tau_max,
        n: cfg.sweep_tau_n,
        endpoint: true,
    };
    sc.t_end = cfg.sweep_t_end;
    sc.probes = match cfg.seed {
        Some(seed) => Probes::Random { seed },
        None => Probes::Fixed([cfg.sweep_probe1, cfg.sweep_probe2]),
    };
    let table = bifurcation::sweep(&sc)?;
    out.write_with("sweep.csv", "#", |w| table.write_csv(w))?;
    let mut svg = Vec::new();
    table.write_svg(&mut svg)?;
    let mut w = out.create("sweep.svg")?;
    writeln!(w, "<!-- {} -->", out.header)?;
    w.write_all(&svg)?;
    w.flush()?;
    let count = |a: &str, b: &str| {
        table
            .cells
            .iter()
            .filter(|c| c.probes[0].label() == a && c.probes[1].label() == b)
            .count()
    };
    let errors = table
        .cells
        .iter()
        .filter(|c| c.probes.iter().any(|p| p.error.is_some()))
        .count();
    println!(
        "{} cells: {} sync/sync, {} antiphase/antiphase, {} sync/antiphase, {} with errors",
        table.cells.len(),
        count("sync", "sync"),
        count("antiphase", "antiphase"),
        count("sync", "antiphase"),
        errors
    );
    Ok(())
}

fn cmd_residual(cfg: &RunConfig, out: &Outputs) -> Result<()> {
    let p = cfg.model;
    let opts = reduce_options(cfg);
    let model = sl::model(&p)?;
    let lat = Lattice::new(2, cfg.residual_lattice);
    let (hi, lo) = (cfg.residual_eps_hi, cfg.residual_eps_lo);
    let mut report = String::new();
    for order in 1..=cfg.order {
        let ex = sl::reduce_sl(&p, order, &opts)?;
        let a = conjugacy_residual(&ex, &model, hi, &lat, cfg.residual_s_points)?;
        let b = conjugacy_residual(&ex, &model, lo, &lat, cfg.residual_s_points)?;
        report += &format!(
            "order {order}: eps {hi}: r_fin {:.6e} r_tr {:.6e}; eps {lo}: r_fin {:.6e} r_tr {:.6e}; ratios r_fin {:.4} r_tr {:.4}\n",
            a.0,
            a.1,
            b.0,
            b.1,
            a.0 / b.0,
            a.1 / b.1
        );
    }
    print!("{report}");
    out.write_text("residual.txt", "#", &report)
}

fn run(cli: &Cli) -> std::result::Result<(), Failure> {
    let cfg = build_config(&cli.common).map_err(|e| match e.downcast_ref::<std::io::Error>() {
        Some(_) => Failure::Io(e),
        None => Failure::Solver(e),
    })?;
    let out = Outputs::new(&cli.common.out, &cfg).map_err(Failure::Io)?;
    let res = match &cli.command {
        Command::Reduce { emit_coefficients } => cmd_reduce(&cfg, &out, *emit_coefficients),
        Command::SimulateDde => cmd_simulate_dde(&cfg, &out),
        Command::SimulatePhase => cmd_simulate_phase(&cfg, &out),
        Command::Curves => cmd_curves(&cfg, &out),
        Command::Sweep => cmd_sweep(&cfg, &out),
        Command::Residual => cmd_residual(&cfg, &out),
    };
    res.map_err(Failure::from)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Solver(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("i/o error: {e:#}");
            ExitCode::from(3)
        }
    }
}
