use ahglue::gluing::{curvature_defect, ConformalField};
use ahglue::horizons::{detect, persistence_from};
use ahglue::io::{to_json, write_json};
use ahglue::mass::measure;
use ahglue::pipeline::{
    refine_study, run_pipeline, surfaces, sweep_tau, write_glued, write_horizons, write_mass, write_seeds, write_solve,
    Exit, Prepared, RunConfig,
};
use ahglue::yamabe::{exhaust, SolveResult, SolveSettings};
use ahglue::Result;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Multi-horizon asymptotically hyperbolic metrics by gluing and conformal
/// deformation.
#[derive(Parser)]
#[command(name = "ahglue", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML). Defaults to the two-center fixture.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `out` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated separations. Single-run commands use the first.
    #[arg(long, global = true, value_delimiter = ',')]
    tau: Vec<f64>,
    /// Grid levels for `refine`.
    #[arg(long, global = true, default_value_t = 2)]
    levels: usize,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build the seed profiles.
    Seed,
    /// Glue the seeds and sample the conformal factor.
    Glue,
    /// Solve the conformal equation by exhaustion.
    Solve,
    /// Locate CMC spheres before and after the solve.
    Horizons,
    /// Fit the mass aspect of the solved metric.
    Mass,
    /// Everything, with the invariant checks.
    Pipeline,
    /// Repeat the run over `--tau` and fit the decay exponents.
    SweepTau,
    /// Solve on successively halved grids.
    Refine,
}

struct Ctx {
    config: RunConfig,
    out: PathBuf,
    quiet: bool,
}

impl Ctx {
    fn say(&self, s: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", s.as_ref());
        }
    }
}

fn load(cli: &Cli) -> Result<Ctx> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::fixture(4.0),
    };
    if let (Some(&t), false) = (cli.tau.first(), matches!(cli.command, Command::SweepTau)) {
        config = config.with_tau(t);
    }
    let out = cli.out.clone().or_else(|| config.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    Ok(Ctx { config, out, quiet: cli.quiet })
}

fn solve(ctx: &Ctx) -> Result<(Prepared, ConformalField, SolveResult)> {
    let p = ctx.config.prepare()?;
    let glued = p.glued()?;
    let settings = SolveSettings { radii: p.radii.clone(), ..ctx.config.solve.clone() };
    let solved = exhaust(&glued, &settings)?;
    Ok((p, glued, solved))
}

fn run(cli: &Cli) -> Result<Exit> {
    let ctx = load(cli)?;
    let out = &ctx.out;
    match cli.command {
        Command::Seed => {
            let p = ctx.config.prepare()?;
            write_seeds(&p, out)?;
            for (k, s) in p.glue.profiles.iter().enumerate() {
                ctx.say(format!("center {k}: rho_h = {:.6}, min w = {:.6}, tail amplitude {:.6e}", s.rho_h, s.min_w(), s.decay_amplitude));
            }
        }
        Command::Glue => {
            let p = ctx.config.prepare()?;
            let glued = p.glued()?;
            write_glued(&glued, out)?;
            ctx.say(to_json(&curvature_defect(&glued).1)?);
        }
        Command::Solve => {
            let (_, _, solved) = solve(&ctx)?;
            write_solve(&solved, out)?;
            ctx.say(format!(
                "sup|u - 1| = {:.6e}, min w = {:.6}, {} Newton steps, Cauchy differences {:?}",
                solved.sup_dev,
                solved.min_w,
                solved.newton_steps(),
                solved.diffs
            ));
        }
        Command::Horizons => {
            let (_, glued, solved) = solve(&ctx)?;
            let before = detect(&glued, &ctx.config.scan)?;
            let after = detect(&solved.field, &ctx.config.scan)?;
            let shifts = persistence_from(&before, &after);
            write_horizons(&after, &solved.field, &ctx.config.scan, out)?;
            write_json(out.join("persistence.json"), &shifts)?;
            for s in surfaces(&after) {
                ctx.say(format!("center {} H = {:+}: found {}, mean radius {:.9}", s.center, s.target, s.found, s.mean_radius));
            }
            let structure = (0..after.nested.len()).all(|k| {
                let had = before.records.iter().filter(|r| r.center == k).all(|r| r.found());
                !had || after.nested[k]
            });
            if shifts.iter().any(|d| d.lost()) || !structure || !after.certified || !after.placed {
                return Ok(Exit::Invariant);
            }
        }
        Command::Mass => {
            let (_, _, solved) = solve(&ctx)?;
            let (fit, rep) = measure(&solved.field, ctx.config.c_cal())?;
            write_mass(&fit, &rep, out)?;
            ctx.say(format!("M = {:.10} (radicand {:.6e}, degenerate {})", rep.mass, rep.radicand, rep.degenerate));
            if !rep.valid {
                return Ok(Exit::Invariant);
            }
        }
        Command::Pipeline => {
            let b = run_pipeline(&ctx.config)?;
            b.write(out)?;
            for c in &b.summary.checks {
                let tag = if c.passed { "ok  " } else if c.hard { "FAIL" } else { "warn" };
                ctx.say(format!("{tag} {}: {}", c.name, c.detail));
            }
            ctx.say(format!("M = {:.10}", b.summary.mass.mass));
            return Ok(b.summary.exit);
        }
        Command::SweepTau => {
            let rep = sweep_tau(&ctx.config, &cli.tau)?;
            rep.write(out)?;
            for r in &rep.rows {
                ctx.say(format!("tau {}: glue defect {:.4e}, sup|u - 1| {:.4e}, max shift {:.4e}", r.tau, r.glue_defect, r.sup_dev, r.max_shift));
            }
            ctx.say(format!("slopes: defect {:?}, sup|u - 1| {:?}, shift {:?}", rep.defect_slope, rep.sup_dev_slope, rep.shift_slope));
            if let Some((t, e)) = &rep.failure {
                eprintln!("error: sweep stopped at tau = {t}: {e}");
                return Ok(rep.exit.unwrap_or(Exit::Solver));
            }
        }
        Command::Refine => {
            let rep = refine_study(&ctx.config, cli.levels)?;
            rep.write(out)?;
            for r in &rep.rows {
                ctx.say(format!("level {}: {} nodes, max|R + 6| {:.4e}, residual {:.3e}", r.level, r.nodes, r.defect, r.residual));
            }
            ctx.say(format!("defect orders {:?}", rep.defect_order));
        }
    }
    Ok(Exit::Ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Exit::Config.code() } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(&cli) {
        Ok(exit) => ExitCode::from(exit.code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Exit::of_error(&e).code() as u8)
        }
    }
}
