//! `equidecomp`: command-line front end for the equidecomposition laboratory.
//!
//! Exit codes: 0 when every check passes, 1 when a validation or inequality
//! check fails, 2 on usage or configuration errors. Errors are reported on
//! stderr as a single JSON object.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use equidecomp::expansion::spectrum::{dense_mean_zero_norm, punctured_block_norm, translation_closed_form};
use equidecomp::expansion::{build_expander, estimate_gap, verify_expansion, AveragingOperator, GapConfig};
use equidecomp::foliation::{
    construct_cube, diffuser_check, expander_size_bound, lps_gap, render_markdown, sphere_remark, tarski_piece_bound,
    Foliation, LedgerEntry,
};
use equidecomp::group::{lps_generators, plane_translations, sl2z_generators, torus_translations, GeneratorSet};
use equidecomp::matching::{run_until_stable, verify_no_short_augmenting_path};
use equidecomp::numeric::{q as rat, qi, RHO};
use equidecomp::par;
use equidecomp::pipeline::{disjointify, equidecompose, reduce_to_open, test_family, EquidecomposeConfig};
use equidecomp::space::{ModelSpec, SampledSet, SetPredicate, SpaceModel};
use equidecomp::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "equidecomp", version, about = "Equidecomposition experiments on finite and sampled models")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Seed for every random choice; equal seeds give identical reports.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print the full report as JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads; 0 uses all available cores.
    #[arg(long, global = true, env = "EQUIDECOMP_THREADS", default_value_t = 0)]
    threads: usize,
    /// Directory for report and certificate files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write plot data as CSV to this path (`-` for stdout).
    #[arg(long, global = true)]
    plot_data: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spectral gap of an averaging operator on a torus model.
    Gap(GapArgs),
    /// Minimal word length and size of an expanding word set.
    Expander(ExpanderArgs),
    /// Empirical expansion check of a word ball on the torus example.
    VerifyExpansion(TorusArgs),
    /// Staged matching on the torus example graphing.
    Match(MatchArgs),
    /// End-to-end equidecomposition with an independently validated certificate.
    Equidecompose(EquidecomposeArgs),
    /// Diffuser inequality on the sampled annulus.
    Diffuser(DiffuserArgs),
    /// Geometry of the cube diffuser.
    Cube(CubeArgs),
    /// Constant ledgers of the size bounds.
    Bounds(BoundsArgs),
    /// Reduction of a bounded set to an open set on a planar grid.
    ReduceOpen(ReduceArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GapModel {
    Torus,
    Punctured,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GapGenerators {
    Sl2z,
    Translations,
}

#[derive(Args, Debug)]
struct GapArgs {
    #[arg(long, value_enum, default_value = "punctured")]
    model: GapModel,
    #[arg(long, default_value_t = 31)]
    q: u64,
    #[arg(long, value_enum, default_value = "sl2z")]
    generators: GapGenerators,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    /// Also run the dense eigensolve (models up to 4096 points).
    #[arg(long)]
    dense: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WordGenerators {
    Lps,
    Sl2z,
}

#[derive(Args, Debug)]
struct ExpanderArgs {
    #[arg(long, value_enum, default_value = "lps")]
    generators: WordGenerators,
    #[arg(long)]
    eta: f64,
    /// Spectral gap; defaults to 1 - √5/3 for LPS and to the punctured-torus gap at prime `--q` for SL2.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, default_value_t = 101)]
    q: u64,
    /// Largest word set enumerated explicitly.
    #[arg(long, default_value_t = 200_000)]
    cap: usize,
}

#[derive(Args, Debug)]
struct TorusArgs {
    #[arg(long, default_value_t = 32)]
    q: u64,
    /// Radius of the SL2 word ball.
    #[arg(long, default_value_t = 4)]
    radius: usize,
    /// Number of random boxes in the test family.
    #[arg(long, default_value_t = 64)]
    family: usize,
}

#[derive(Args, Debug)]
struct MatchArgs {
    #[command(flatten)]
    torus: TorusArgs,
    #[arg(long, default_value_t = 64)]
    stages: u32,
}

#[derive(Args, Debug)]
struct EquidecomposeArgs {
    /// Experiment config (JSON); without it the torus example is run.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    torus: TorusArgs,
}

#[derive(Args, Debug)]
struct DiffuserArgs {
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 32)]
    bins: usize,
    /// Radial set as `a:b,c:d`; random unions are drawn when absent.
    #[arg(long)]
    intervals: Option<String>,
    /// Number of random unions when `--intervals` is absent.
    #[arg(long, default_value_t = 20)]
    sets: usize,
}

#[derive(Args, Debug)]
struct CubeArgs {
    /// Exit 1 unless every geometric check passes.
    #[arg(long)]
    check: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum Ledger {
    Size,
    Pieces,
    Sphere,
    All,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long, default_value_t = 6.1035e-5)]
    eta: f64,
    #[arg(long, value_enum, default_value = "size")]
    ledger: Ledger,
    /// Render the ledger as a Markdown table.
    #[arg(long)]
    markdown: bool,
}

#[derive(Args, Debug)]
struct ReduceArgs {
    #[arg(long, default_value_t = 32)]
    q: u64,
}

/// A finished command: the JSON report, a short human summary, optional CSV
/// plot data and whether every check passed.
struct Outcome {
    report: Value,
    summary: String,
    csv: Option<String>,
    files: Vec<(String, String)>,
    pass: bool,
}

impl Outcome {
    fn new(report: impl Serialize, summary: String, pass: bool) -> anyhow::Result<Outcome> {
        Ok(Outcome { report: serde_json::to_value(report)?, summary, csv: None, files: Vec::new(), pass })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            let message = e.render().to_string();
            eprintln!("{}", json!({ "error": "usage", "message": message.trim() }));
            return ExitCode::from(2);
        }
    };
    let threads = cli.global.threads;
    let result = par::with_threads(threads, || run(&cli));
    match result.and_then(|o| emit(&cli.global, o)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let (kind, code) = classify(&e);
            eprintln!("{}", json!({ "error": kind, "message": format!("{e:#}") }));
            ExitCode::from(code)
        }
    }
}

/// Failed checks exit 1; everything else is a usage or configuration error.
fn classify(e: &anyhow::Error) -> (&'static str, u8) {
    match e.downcast_ref::<Error>() {
        Some(
            Error::MeasureMismatch { .. }
            | Error::CoverFails { .. }
            | Error::ExpansionFails { .. }
            | Error::Residue { .. }
            | Error::Certificate(_)
            | Error::Infeasible(_)
            | Error::Resolution(_),
        ) => ("validation", 1),
        _ => ("usage", 2),
    }
}

fn emit(global: &Global, o: Outcome) -> anyhow::Result<bool> {
    if let Some(dir) = &global.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(&o.report)? + "\n")?;
        for (name, body) in &o.files {
            fs::write(dir.join(name), body)?;
        }
    }
    if let Some(path) = &global.plot_data {
        let csv = o.csv.as_deref().unwrap_or("");
        if path == Path::new("-") {
            out(csv)?;
        } else {
            fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    if global.json {
        out(&(serde_json::to_string_pretty(&o.report)? + "\n"))?;
    } else if global.plot_data.as_deref() != Some(Path::new("-")) {
        out(&format!("{}\n{}\n", o.summary.trim_end(), if o.pass { "PASS" } else { "FAIL" }))?;
    }
    Ok(o.pass)
}

/// Writes to stdout; a reader that closed the pipe early is not an error.
fn out(text: &str) -> anyhow::Result<()> {
    let mut stdout = std::io::stdout().lock();
    match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let seed = cli.global.seed;
    match &cli.command {
        Command::Gap(a) => gap(a, seed),
        Command::Expander(a) => expander(a),
        Command::VerifyExpansion(a) => verify(a, seed),
        Command::Match(a) => matching(a, seed),
        Command::Equidecompose(a) => equidecomposition(a, seed),
        Command::Diffuser(a) => diffuser(a, seed),
        Command::Cube(a) => cube(a),
        Command::Bounds(a) => bounds(a),
        Command::ReduceOpen(a) => reduce(a),
    }
}

fn gap(a: &GapArgs, seed: u64) -> anyhow::Result<Outcome> {
    let punctured = matches!(a.model, GapModel::Punctured);
    let model = Arc::new(SpaceModel::build(&ModelSpec::RationalTorus { q: a.q, punctured })?);
    let gens = match a.generators {
        GapGenerators::Sl2z => sl2z_generators(),
        GapGenerators::Translations => torus_translations(a.q)?,
    };
    let op = AveragingOperator::new(&model, &gens)?;
    let cfg = GapConfig { restarts: a.restarts, iterations: a.iterations, tolerance: 1e-9, seed };
    let est = estimate_gap(&op, &cfg);
    let dense = (a.dense && model.len() <= 4096).then(|| dense_mean_zero_norm(&op));
    let exact = match (a.generators, punctured) {
        (GapGenerators::Translations, false) => Some(("closed form", translation_closed_form(a.q))),
        (GapGenerators::Sl2z, true) => punctured_block_norm(a.q, &gens).ok().map(|n| ("character blocks", n)),
        _ => None,
    };
    let reference = dense.or(exact.map(|e| e.1));
    let pass = est.converged && reference.is_none_or(|r| (r - est.norm).abs() <= 1e-6);
    let mut summary = format!(
        "points {}, |Q| = {}, norm {:.12}, gap {:.12}, residual {:.2e}, converged {}",
        model.len(),
        gens.len(),
        est.norm,
        est.gap,
        est.residual,
        est.converged
    );
    if let Some(d) = dense {
        summary += &format!("\ndense eigensolve norm {d:.12}");
    }
    if let Some((label, n)) = exact {
        summary += &format!("\n{label} norm {n:.12}");
    }
    let report = json!({
        "model": model.spec,
        "generators": format!("{:?}", a.generators).to_lowercase(),
        "estimate": est,
        "dense_norm": dense,
        "exact": exact.map(|(label, norm)| json!({ "method": label, "norm": norm })),
        "pass": pass,
    });
    Outcome::new(report, summary, pass)
}

fn expander(a: &ExpanderArgs) -> anyhow::Result<Outcome> {
    let (q, c) = match a.generators {
        WordGenerators::Lps => (lps_generators(), a.c.unwrap_or_else(lps_gap)),
        WordGenerators::Sl2z => {
            let gens = sl2z_generators();
            let c = match a.c {
                Some(c) => c,
                None => 1.0 - punctured_block_norm(a.q, &gens)?,
            };
            (gens, c)
        }
    };
    let ex = build_expander(&q, c, a.eta, a.cap, true)?;
    let summary = format!(
        "c = {c:.6}, η = {}, |Q| = {}, l = {}, log5 |Q|^l = {:.3}, enumerated = {}",
        a.eta,
        q.len(),
        ex.l,
        ex.counting_bound_log5,
        ex.enumerated_size.map_or("no (symbolic)".to_string(), |n| n.to_string())
    );
    Outcome::new(&ex, summary, true)
}

fn torus_setup(t: &TorusArgs, seed: u64) -> anyhow::Result<(Arc<SpaceModel>, EquidecomposeConfig)> {
    let mut cfg = EquidecomposeConfig::torus_example(t.q, t.radius)?;
    cfg.family_size = t.family;
    cfg.seed = seed;
    let model = Arc::new(SpaceModel::build(&cfg.model)?);
    Ok((model, cfg))
}

fn eta_for(cfg: &EquidecomposeConfig) -> f64 {
    cfg.eta_fraction * (1.0f64 / 6.0).min(1.0 / (2.0 * cfg.cover.len() as f64))
}

fn verify(t: &TorusArgs, seed: u64) -> anyhow::Result<Outcome> {
    let (model, cfg) = torus_setup(t, seed)?;
    let eta = eta_for(&cfg);
    let r = cfg.gap.expanding_set(eta, cfg.size_cap)?;
    let a = SampledSet::from_predicate(&model, &cfg.a)?;
    let b = SampledSet::from_predicate(&model, &cfg.b)?;
    let c = a.union(&b)?;
    let family = test_family(&model, &[cfg.a.clone(), cfg.b.clone()], cfg.family_size, seed);
    let rep = verify_expansion(&model, &c, &r, eta, &family)?;
    let summary = format!(
        "η = {eta}, |R| = {}, {} test sets, worst margin {:.4e}",
        rep.r_size,
        rep.rows.len(),
        rep.worst_margin
    );
    let mut o = Outcome::new(&rep, summary, rep.pass)?;
    o.csv = Some(rep.plot_csv());
    Ok(o)
}

fn matching(m: &MatchArgs, seed: u64) -> anyhow::Result<Outcome> {
    let (model, cfg) = torus_setup(&m.torus, seed)?;
    let eta = eta_for(&cfg);
    let r = cfg.gap.expanding_set(eta, cfg.size_cap)?;
    let s = cfg.cover.product(&r, cfg.size_cap)?.union(&r.product(&cfg.cover, cfg.size_cap)?)?;
    let a = SampledSet::from_predicate(&model, &cfg.a)?;
    let b = SampledSet::from_predicate(&model, &cfg.b)?;
    let g = disjointify(&a, &b, &s)?;
    let (mat, stages) = run_until_stable(&g, m.stages);
    let last = mat.stage.max(1) as usize;
    let check = verify_no_short_augmenting_path(&g, &mat, 2 * last - 1);
    let flips_ok = stages.iter().all(|r| r.flipped_edge_mass <= r.flip_bound * (1.0 + 1e-12));
    let pass = check.ok && flips_ok && mat.is_valid(&g);
    let mut csv = String::from("stage,unmatched_left,unmatched_right,flipped_mass,flip_bound\n");
    for r in &stages {
        csv += &format!(
            "{},{},{},{},{}\n",
            r.stage, r.unmatched_left_mass, r.unmatched_right_mass, r.flipped_edge_mass, r.flip_bound
        );
    }
    let summary = format!(
        "{} + {} vertices, {} edges, |S| = {}, stage {} reached, matched {}, unmatched mass {:.3e}/{:.3e}",
        g.n_left,
        g.n_right,
        g.edges.len(),
        s.len(),
        mat.stage,
        mat.size(),
        stages.last().map_or(0.0, |r| r.unmatched_left_mass),
        stages.last().map_or(0.0, |r| r.unmatched_right_mass)
    );
    let report = json!({
        "vertices": [g.n_left, g.n_right],
        "edges": g.edges.len(),
        "s_size": s.len(),
        "matched": mat.size(),
        "stage": mat.stage,
        "stages": stages,
        "short_path_check": check,
        "flip_bounds_hold": flips_ok,
        "pass": pass,
    });
    let mut o = Outcome::new(report, summary, pass)?;
    o.csv = Some(csv);
    Ok(o)
}

fn equidecomposition(e: &EquidecomposeArgs, seed: u64) -> anyhow::Result<Outcome> {
    let (model, cfg) = match &e.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let cfg: EquidecomposeConfig =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            (Arc::new(SpaceModel::build(&cfg.model)?), cfg)
        }
        None => torus_setup(&e.torus, seed)?,
    };
    let out = equidecompose(&model, &cfg)?;
    let c = &out.certificate;
    let summary = format!(
        "η = {}, |R| = {}, |S| = {}, doubled {}, {} stages, {} pieces, residue mass {}, validation {}",
        out.eta,
        out.r_size,
        out.s_size,
        out.doubled,
        out.stages.len(),
        c.piece_count(),
        c.residue_mass,
        if out.validation.ok { "ok" } else { "failed" }
    );
    let mut csv = String::from("mu_u,mu_ru_cap_c\n");
    for row in &out.expansion.rows {
        csv += &format!("{},{}\n", row.mu_u, row.lhs);
    }
    let mut o = Outcome::new(&out, summary, out.validation.ok)?;
    o.files.push(("certificate.json".into(), c.to_json()? + "\n"));
    o.csv = Some(csv);
    Ok(o)
}

fn parse_intervals(s: &str) -> anyhow::Result<Vec<(f64, f64)>> {
    s.split(',')
        .map(|part| {
            let (a, b) = part.split_once(':').context("intervals are written a:b,c:d")?;
            let (a, b) = (a.trim().parse::<f64>()?, b.trim().parse::<f64>()?);
            anyhow::ensure!(1.0 <= a && a < b && b <= RHO, "interval {a}:{b} must lie in [1, {RHO}]");
            Ok((a, b))
        })
        .collect()
}

fn diffuser(d: &DiffuserArgs, seed: u64) -> anyhow::Result<Outcome> {
    let model = Arc::new(SpaceModel::build(&ModelSpec::AnnulusCloud { n: d.samples, seed, total_mass: None })?);
    let fol = Foliation::annulus(d.bins)?;
    let cube = construct_cube();
    let sets = match &d.intervals {
        Some(s) => vec![parse_intervals(s)?],
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            (0..d.sets)
                .map(|_| {
                    let k = rng.random_range(1..=4);
                    let mut cuts: Vec<f64> = (0..2 * k).map(|_| rng.random_range(1.0..RHO)).collect();
                    cuts.sort_by(f64::total_cmp);
                    cuts.chunks(2).map(|c| (c[0], c[1])).collect()
                })
                .collect()
        }
    };
    let reports = sets.iter().map(|r| diffuser_check(&cube, &model, r, &fol)).collect::<Result<Vec<_>, _>>()?;
    let failing = reports.iter().filter(|r| !r.pass).count();
    let csv = reports.iter().map(|r| r.plot_csv()).collect::<Vec<_>>().join("\n");
    let summary = format!("{} samples, {} bins, {} radial sets, {failing} failing", d.samples, d.bins, reports.len());
    let mut o = Outcome::new(json!({ "reports": reports, "failing": failing }), summary, failing == 0)?;
    o.csv = Some(csv);
    Ok(o)
}

fn cube(c: &CubeArgs) -> anyhow::Result<Outcome> {
    let cube = construct_cube();
    let g = cube.geometry();
    let checks = g.checks();
    let mut summary = format!(
        "h = {:.15} (√2/2, residual {:.1e})\nρ residual {:.1e}\nmax angle {:.15} (π/4 = {:.15}, corner residual {:.1e}, sampled max {:.15})",
        g.h,
        g.h_error,
        g.rho_error,
        g.corner_angle,
        std::f64::consts::FRAC_PI_4,
        g.corner_angle_error,
        g.max_sampled_angle
    );
    for (name, ok) in &checks {
        summary += &format!("\n  {} {name}", if *ok { "ok  " } else { "FAIL" });
    }
    let pass = !c.check || g.pass();
    let report = json!({ "cube": cube, "geometry": g, "checks": checks.iter().map(|(n, ok)| json!({ "check": n, "pass": ok })).collect::<Vec<_>>() });
    Outcome::new(report, summary, pass)
}

fn bounds(b: &BoundsArgs) -> anyhow::Result<Outcome> {
    let mut sections: Vec<(&str, Vec<LedgerEntry>)> = Vec::new();
    let want = |l: Ledger| b.ledger == l || b.ledger == Ledger::All;
    if want(Ledger::Size) {
        sections.push(("Expander size bound", expander_size_bound(b.eta)?.ledger()));
    }
    if want(Ledger::Pieces) {
        sections.push(("Piece bound for the ball", tarski_piece_bound().ledger()));
    }
    if want(Ledger::Sphere) {
        sections.push(("Sphere remark", sphere_remark()?.ledger()));
    }
    let summary = if b.markdown {
        sections.iter().map(|(t, e)| render_markdown(t, e)).collect::<Vec<_>>().join("\n")
    } else {
        sections
            .iter()
            .flat_map(|(t, e)| {
                std::iter::once(format!("{t}:")).chain(e.iter().map(|x| {
                    let mark = match x.check {
                        Some(true) => " [ok]",
                        Some(false) => " [mismatch]",
                        None => "",
                    };
                    format!("  {} = {}{mark}", x.name, x.value)
                }))
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    let report: Value = sections.iter().map(|(t, e)| (t.to_string(), json!(e))).collect::<serde_json::Map<_, _>>().into();
    Outcome::new(report, summary, true)
}

fn reduce(r: &ReduceArgs) -> anyhow::Result<Outcome> {
    let model = Arc::new(SpaceModel::build(&ModelSpec::PlaneGrid { q: r.q, lo: [-64, -64], hi: [64, 64] })?);
    let half = rat(1, 2);
    let t: GeneratorSet =
        plane_translations(&[[qi(0), qi(0)], [half, qi(0)], [-half, qi(0)], [qi(0), half], [qi(0), -half]])?;
    let a = SetPredicate::rect(&[-1.0, -1.0], &[1.0, 1.0]).minus(SetPredicate::rect(&[-0.125, -0.125], &[0.125, 0.125]));
    let c_open = SetPredicate::rect(&[-0.25, -0.25], &[0.25, 0.25]);
    let red = reduce_to_open(&model, &a, &t, &c_open)?;
    let ch = &red.check;
    let pass = ch.pieces_partition_source && ch.images_partition_target && ch.images_union_is_c && red.validation.ok;
    let summary = format!(
        "|T| = {}, {} pieces ({} distinct motions), pieces partition A: {}, images partition A' ∪ C: {}, moved pieces fill C: {}",
        t.len(),
        ch.piece_count,
        ch.distinct_motions,
        ch.pieces_partition_source,
        ch.images_partition_target,
        ch.images_union_is_c
    );
    let mut o = Outcome::new(&red, summary, pass)?;
    o.files.push(("certificate.json".into(), red.certificate.to_json()? + "\n"));
    Ok(o)
}
