//! Subcommand implementations and report types.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use corrclust::analysis::{
    brute_force_opt, check_claim_badbad, check_claim_numbad, spot_values, sweep_ratio_bounds,
    AnalysisConstants, ClaimReport, SpotValues, SweepConfig, SweepReport, SweepRow, Table,
    BRUTE_FORCE_MAX_N,
};
use corrclust::derandomize::verify_certificate;
use corrclust::lp::LpConfig;
use corrclust::relaxations::{solve_sa, solve_standard_lp, SaOptions};
use corrclust::rounding::cluster;
use corrclust::{
    clustering_cost, derandomized_cluster, make_star_gap, random_instance, Clustering, Distances,
    Fractional, RoundingCertificate, RoundingPolicy, SaValuation, SignedGraph,
};

use crate::{Algo, Cli, CliError, Command, GenFamily, Verify};

/// Instances up to this size get their optimum in reports.
const OPT_LIMIT: usize = 10;

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Serialize)]
struct InstanceInfo {
    source: String,
    n: usize,
    plus_edges: usize,
    minus_edges: usize,
}

#[derive(Debug, Serialize)]
struct RelaxationInfo {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    rounds: Option<usize>,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    variables: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    constraints: Option<usize>,
}

#[derive(Debug, Serialize)]
struct LpReport {
    command: &'static str,
    instance: InstanceInfo,
    relaxation: RelaxationInfo,
    max_triangle_violation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<f64>,
}

#[derive(Debug, Serialize)]
struct CostSummary {
    mean: f64,
    min: u64,
    max: u64,
}

#[derive(Debug, Serialize)]
struct RunReport {
    command: &'static str,
    instance: InstanceInfo,
    #[serde(skip_serializing_if = "Option::is_none")]
    relaxation: Option<RelaxationInfo>,
    algorithm: &'static str,
    seed: u64,
    trials: usize,
    cost: CostSummary,
    /// `mean cost / relaxation value`, when the value is positive.
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_ratio: Option<f64>,
    best_clustering: Vec<Vec<usize>>,
    best_cost: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    opt: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<f64>,
}

#[derive(Debug, Serialize)]
struct DerandReport {
    command: &'static str,
    instance: InstanceInfo,
    /// The instance in the text format, so the report can be re-checked on
    /// its own.
    instance_text: String,
    relaxation: RelaxationInfo,
    clustering: Vec<Vec<usize>>,
    cost: u64,
    /// `max_t α_t / β_t`.
    max_step_ratio: f64,
    /// `cost / LP value` of the fractional solution used.
    ratio_to_lp: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    opt: Option<u64>,
    certificate: RoundingCertificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<f64>,
}

#[derive(Debug, Serialize)]
struct OracleReport {
    command: &'static str,
    instance: InstanceInfo,
    cost: u64,
    clustering: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SweepSummary {
    command: &'static str,
    samples: usize,
    grid: usize,
    seed: u64,
    pass: bool,
    rows: Vec<SweepReport>,
}

#[derive(Debug, Serialize)]
struct ClaimSummary {
    command: &'static str,
    seed: u64,
    #[serde(flatten)]
    report: ClaimReport,
}

#[derive(Debug, Serialize)]
struct ConstantsReport {
    command: &'static str,
    constants: AnalysisConstants,
    final_ratio: f64,
    spot_values: SpotValues,
}

#[derive(Debug, Serialize)]
struct CertificateCheck {
    command: &'static str,
    pass: bool,
    n: usize,
    cost: f64,
    lp_value: f64,
    max_ratio: f64,
    steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct BenchRow {
    instance: String,
    n: usize,
    lp: f64,
    sa: f64,
    kwik_mean: f64,
    lp_kwik_mean: f64,
    cmsy_mean: f64,
    sa_round_mean: f64,
    derand: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    opt: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<f64>,
}

#[derive(Debug, Serialize)]
struct BenchReport {
    command: &'static str,
    seed: u64,
    trials: usize,
    rounds: usize,
    rows: Vec<BenchRow>,
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let g = &cli.global;
    let lp_config = LpConfig { backend: g.backend.into(), ..LpConfig::default() };
    let clock = Instant::now();
    let elapsed = || g.timings.then(|| clock.elapsed().as_secs_f64() * 1e3);
    let out = g.out.as_deref();
    match &cli.command {
        Command::Gen { family } => {
            let (header, graph) = match *family {
                GenFamily::Star { k } => (format!("# star k={k}"), make_star_gap(k)?),
                GenFamily::Random { n, p_plus, seed } => {
                    (format!("# random n={n} p_plus={p_plus} seed={seed}"), random_instance(n, p_plus, seed)?)
                }
            };
            emit_text(out, &format!("{header}\n{}", graph.to_text()))
        }
        Command::Lp { instance } => {
            let (graph, info) = load_instance(instance.as_deref())?;
            let sol = solve_standard_lp(&graph, &lp_config)?;
            let report = LpReport {
                command: "lp",
                instance: info,
                relaxation: RelaxationInfo {
                    kind: "standard",
                    rounds: None,
                    value: sol.value,
                    variables: None,
                    constraints: None,
                },
                max_triangle_violation: sol.distances.max_triangle_violation(),
                elapsed_ms: elapsed(),
            };
            emit_json(out, &report)
        }
        Command::Sa { rounds, valuation_out, instance } => {
            let (graph, info) = load_instance(instance.as_deref())?;
            let sol = solve_sa(&graph, *rounds, &SaOptions::default(), &lp_config)?;
            if let Some(path) = valuation_out {
                fs::write(path, sol.valuation.to_json())?;
            }
            let report = LpReport {
                command: "sa",
                instance: info,
                relaxation: sa_info(*rounds, &sol),
                max_triangle_violation: sol.valuation.distances().max_triangle_violation(),
                elapsed_ms: elapsed(),
            };
            emit_json(out, &report)
        }
        Command::Round { algo, trials, seed, rounds, instance } => {
            let (graph, info) = load_instance(instance.as_deref())?;
            let report = round_report(&graph, info, *algo, *trials, *seed, *rounds, &lp_config, elapsed)?;
            emit_json(out, &report)
        }
        Command::Derand { rounds, instance } => {
            let (graph, info) = load_instance(instance.as_deref())?;
            let sol = solve_sa(&graph, *rounds, &SaOptions::default(), &lp_config)?;
            let frac = Fractional::Lifted(&sol.valuation);
            let (clustering, certificate) =
                derandomized_cluster(&graph, &frac, &RoundingPolicy::sa_correlated(*rounds))?;
            let cost = clustering_cost(&graph, &clustering)?;
            let report = DerandReport {
                command: "derand",
                instance: info,
                instance_text: graph.to_text(),
                relaxation: sa_info(*rounds, &sol),
                clustering: clustering.blocks(),
                cost,
                max_step_ratio: certificate.max_ratio,
                ratio_to_lp: ratio_or_zero(cost as f64, certificate.lp_value),
                opt: optimum(&graph)?,
                certificate,
                elapsed_ms: elapsed(),
            };
            emit_json(out, &report)
        }
        Command::Oracle { instance } => {
            let (graph, info) = load_instance(instance.as_deref())?;
            let (clustering, cost) = brute_force_opt(&graph)?;
            let report = OracleReport {
                command: "oracle",
                instance: info,
                cost,
                clustering: clustering.blocks(),
                elapsed_ms: elapsed(),
            };
            emit_json(out, &report)
        }
        Command::Verify { what } => verify(what, out),
        Command::Bench { seed, trials, rounds } => {
            let report = bench(*seed, *trials, *rounds, &lp_config, cli.global.timings)?;
            emit_json(out, &report)
        }
    }
}

fn verify(what: &Verify, out: Option<&Path>) -> CliResult<()> {
    let c = AnalysisConstants::default();
    match what {
        Verify::Ratios { kind, table, samples, grid, seed } => {
            let rows: Vec<SweepRow> = if kind == "all" {
                SweepRow::ALL.to_vec()
            } else {
                vec![kind.parse()?]
            };
            let tables: Vec<Table> = if table == "both" {
                vec![Table::Ideal, Table::Special]
            } else {
                vec![table.parse()?]
            };
            let cfg = SweepConfig { samples: *samples, grid: *grid, seed: *seed };
            let mut reports = Vec::new();
            for t in &tables {
                for r in &rows {
                    reports.push(sweep_ratio_bounds(*r, *t, &c, &cfg)?);
                }
            }
            let pass = reports.iter().all(|r| r.pass);
            let summary = SweepSummary {
                command: "verify ratios",
                samples: *samples,
                grid: *grid,
                seed: *seed,
                pass,
                rows: reports,
            };
            emit_json(out, &summary)?;
            verdict(pass, "a ratio bound was exceeded")
        }
        Verify::Badbad { samples, seed } => {
            let report = check_claim_badbad(*samples, *seed, &c)?;
            let pass = report.pass;
            emit_json(out, &ClaimSummary { command: "verify badbad", seed: *seed, report })?;
            verdict(pass, "claim badbad violated")
        }
        Verify::Numbad { trials, max_n, seed } => {
            let report = check_claim_numbad(*trials, *max_n, *seed)?;
            let pass = report.pass;
            emit_json(out, &ClaimSummary { command: "verify numbad", seed: *seed, report })?;
            verdict(pass, "claim numbad violated")
        }
        Verify::Constants => {
            let report = ConstantsReport {
                command: "verify constants",
                constants: c,
                final_ratio: c.final_ratio(),
                spot_values: spot_values(&c)?,
            };
            emit_json(out, &report)
        }
        Verify::Certificate { report, instance } => {
            let text = read_input(report.as_deref())?;
            let value: Value =
                serde_json::from_str(&text).map_err(|e| CliError::usage(format!("report JSON: {e}")))?;
            let graph = match instance {
                Some(path) => load_instance(Some(path))?.0,
                None => {
                    let t = value
                        .get("instance_text")
                        .and_then(Value::as_str)
                        .ok_or_else(|| CliError::usage("report has no embedded instance; pass --instance"))?;
                    SignedGraph::parse(t)?
                }
            };
            let cert: RoundingCertificate = serde_json::from_value(
                value.get("certificate").cloned().ok_or_else(|| CliError::usage("report has no certificate"))?,
            )
            .map_err(|e| CliError::usage(format!("certificate: {e}")))?;
            let blocks: Vec<Vec<usize>> = serde_json::from_value(
                value.get("clustering").cloned().ok_or_else(|| CliError::usage("report has no clustering"))?,
            )
            .map_err(|e| CliError::usage(format!("clustering: {e}")))?;
            let clustering = Clustering::from_blocks(graph.n(), &blocks)?;
            let result = verify_certificate(&graph, &cert, &clustering);
            let check = CertificateCheck {
                command: "verify certificate",
                pass: result.is_ok(),
                n: cert.n,
                cost: cert.total_cost,
                lp_value: cert.lp_value,
                max_ratio: cert.max_ratio,
                steps: cert.steps.len(),
                error: result.as_ref().err().map(ToString::to_string),
            };
            emit_json(out, &check)?;
            result.map_err(CliError::from)
        }
    }
}

fn verdict(pass: bool, message: &str) -> CliResult<()> {
    if pass {
        Ok(())
    } else {
        Err(CliError::verification(message))
    }
}

fn sa_info(rounds: usize, sol: &corrclust::relaxations::SaSolution) -> RelaxationInfo {
    RelaxationInfo {
        kind: "sherali_adams",
        rounds: Some(rounds),
        value: sol.value,
        variables: Some(sol.variables),
        constraints: Some(sol.constraints),
    }
}

fn ratio_or_zero(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else {
        0.0
    }
}

fn optimum(g: &SignedGraph) -> CliResult<Option<u64>> {
    if g.n() <= OPT_LIMIT.min(BRUTE_FORCE_MAX_N) {
        Ok(Some(brute_force_opt(g)?.1))
    } else {
        Ok(None)
    }
}

enum Relaxed {
    None,
    Standard(Distances),
    Lifted(SaValuation),
}

impl Relaxed {
    fn fractional(&self) -> Option<Fractional<'_>> {
        match self {
            Relaxed::None => None,
            Relaxed::Standard(d) => Some(Fractional::Metric(d)),
            Relaxed::Lifted(y) => Some(Fractional::Lifted(y)),
        }
    }
}

/// Costs of `trials` independent runs; trial `t` uses stream `t` of a
/// ChaCha8 generator seeded with `seed`.
fn trial_costs(
    g: &SignedGraph,
    relaxed: &Relaxed,
    policy: &RoundingPolicy,
    trials: usize,
    seed: u64,
) -> CliResult<Vec<(u64, Clustering)>> {
    let frac = relaxed.fractional();
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let c = cluster(g, frac.as_ref(), policy, &mut rng)?;
            Ok((clustering_cost(g, &c)?, c))
        })
        .collect::<corrclust::Result<Vec<_>>>()
        .map_err(CliError::from)
}

#[allow(clippy::too_many_arguments)]
fn round_report(
    g: &SignedGraph,
    info: InstanceInfo,
    algo: Algo,
    trials: usize,
    seed: u64,
    rounds: usize,
    lp_config: &LpConfig,
    elapsed: impl Fn() -> Option<f64>,
) -> CliResult<RunReport> {
    if trials == 0 {
        return Err(CliError::usage("--trials must be positive"));
    }
    let (name, policy, relaxed, relaxation) = match algo {
        Algo::Kwik => ("kwik", RoundingPolicy::kwik(), Relaxed::None, None),
        Algo::Lpkwik | Algo::Cmsy => {
            let sol = solve_standard_lp(g, lp_config)?;
            let info = RelaxationInfo { kind: "standard", rounds: None, value: sol.value, variables: None, constraints: None };
            let (name, policy) = if algo == Algo::Lpkwik {
                ("lp_kwik", RoundingPolicy::lp_kwik())
            } else {
                ("cmsy", RoundingPolicy::cmsy())
            };
            (name, policy, Relaxed::Standard(sol.distances), Some(info))
        }
        Algo::Sa => {
            let sol = solve_sa(g, rounds, &SaOptions::default(), lp_config)?;
            let info = sa_info(rounds, &sol);
            ("sa_correlated", RoundingPolicy::sa_correlated(rounds), Relaxed::Lifted(sol.valuation), Some(info))
        }
    };
    let runs = trial_costs(g, &relaxed, &policy, trials, seed)?;
    let costs: Vec<u64> = runs.iter().map(|r| r.0).collect();
    let mean = costs.iter().sum::<u64>() as f64 / trials as f64;
    let (best_cost, best) = runs
        .iter()
        .min_by_key(|r| r.0)
        .map(|r| (r.0, r.1.blocks()))
        .expect("at least one trial");
    let mean_ratio = relaxation.as_ref().and_then(|r| (r.value > 1e-9).then(|| mean / r.value));
    Ok(RunReport {
        command: "round",
        instance: info,
        relaxation,
        algorithm: name,
        seed,
        trials,
        cost: CostSummary { mean, min: *costs.iter().min().expect("trials"), max: *costs.iter().max().expect("trials") },
        mean_ratio,
        best_clustering: best,
        best_cost,
        opt: optimum(g)?,
        elapsed_ms: elapsed(),
    })
}

fn mean_cost(g: &SignedGraph, relaxed: &Relaxed, policy: &RoundingPolicy, trials: usize, seed: u64) -> CliResult<f64> {
    let runs = trial_costs(g, relaxed, policy, trials, seed)?;
    Ok(runs.iter().map(|r| r.0).sum::<u64>() as f64 / trials.max(1) as f64)
}

fn bench(seed: u64, trials: usize, rounds: usize, lp_config: &LpConfig, timings: bool) -> CliResult<BenchReport> {
    if trials == 0 {
        return Err(CliError::usage("--trials must be positive"));
    }
    let mut suite: Vec<(String, SignedGraph)> = vec![
        ("star k=4".into(), make_star_gap(4)?),
        ("star k=8".into(), make_star_gap(8)?),
    ];
    for s in seed..seed + 4 {
        suite.push((format!("random n=8 seed={s}"), random_instance(8, 0.5, s)?));
    }
    let mut rows = Vec::new();
    for (name, g) in suite {
        let clock = Instant::now();
        let lp = solve_standard_lp(&g, lp_config)?;
        let r = rounds.min(g.n());
        let sa = solve_sa(&g, r, &SaOptions::default(), lp_config)?;
        let metric = Relaxed::Standard(lp.distances);
        let lifted = Relaxed::Lifted(sa.valuation);
        let policy = RoundingPolicy::sa_correlated(r);
        let frac = lifted.fractional().expect("lifted");
        let (clustering, _) = derandomized_cluster(&g, &frac, &policy)?;
        rows.push(BenchRow {
            n: g.n(),
            lp: lp.value,
            sa: sa.value,
            kwik_mean: mean_cost(&g, &Relaxed::None, &RoundingPolicy::kwik(), trials, seed)?,
            lp_kwik_mean: mean_cost(&g, &metric, &RoundingPolicy::lp_kwik(), trials, seed)?,
            cmsy_mean: mean_cost(&g, &metric, &RoundingPolicy::cmsy(), trials, seed)?,
            sa_round_mean: mean_cost(&g, &lifted, &policy, trials, seed)?,
            derand: clustering_cost(&g, &clustering)?,
            opt: optimum(&g)?,
            elapsed_ms: timings.then(|| clock.elapsed().as_secs_f64() * 1e3),
            instance: name,
        });
    }
    Ok(BenchReport { command: "bench", seed, trials, rounds, rows })
}

fn read_input(path: Option<&Path>) -> CliResult<String> {
    match path {
        Some(p) if p != Path::new("-") => fs::read_to_string(p)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", p.display()))),
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn load_instance(path: Option<&Path>) -> CliResult<(SignedGraph, InstanceInfo)> {
    let text = read_input(path)?;
    let g = SignedGraph::parse(&text)?;
    let source = match path {
        Some(p) if p != Path::new("-") => p.display().to_string(),
        _ => "stdin".to_string(),
    };
    let info = InstanceInfo { source, n: g.n(), plus_edges: g.plus_count(), minus_edges: g.minus_count() };
    Ok((g, info))
}

fn emit_text(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::usage(e.to_string()))?;
    text.push('\n');
    emit_text(out, &text)
}
