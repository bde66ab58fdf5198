use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context};
use serde::Serialize;

use grn_padic_core::{
    branch_and_bound_with, build_transition_map, builtin_dataset, checked_pow,
    exhaustive_minimize, fixed_point_report, ga_minimize, level_prefixes, minimizer_symmetry,
    parse_network_file, partial_order_summary, permuted_images, stability_scores, verify_level,
    BuiltinDataset, Class, FixedPointReport, GAConfig, NetworkDefinition, Ordering, OrderingBlock,
    SearchBudget, SearchResult, StabilityScores, TransitionMap,
};

use crate::args::{
    AnalyzeArgs, Cli, Command, CommonArgs, ExportTreeArgs, FixedPointsArgs, Format, Method,
    OptimizeArgs, VerifyArgs,
};

pub fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::FixedPoints(args) => cmd_fixed_points(args),
        Command::ExportTree(args) => cmd_export_tree(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn load(spec: &str) -> anyhow::Result<(NetworkDefinition, TransitionMap)> {
    let net = if let Some(id) = spec.strip_prefix("builtin:") {
        match id {
            "toy4" => builtin_dataset(BuiltinDataset::Toy4)?,
            "athaliana13" => builtin_dataset(BuiltinDataset::Athaliana13)?,
            other => bail!("unknown builtin network '{other}' (available: toy4, athaliana13)"),
        }
    } else {
        parse_network_file(Path::new(spec))
            .with_context(|| format!("loading network from {spec}"))?
    };
    let f = build_transition_map(&net)?;
    Ok((net, f))
}

fn resolve_ordering(
    net: &NetworkDefinition,
    f: &TransitionMap,
    common: &CommonArgs,
) -> anyhow::Result<Ordering> {
    let spec = common.ordering.as_str();
    if spec == "identity" {
        return Ok(Ordering::identity(f.n));
    }
    if let Some(m) = spec.strip_prefix("optimal:") {
        let method = match m {
            "exhaustive" => Method::Exhaustive,
            "bnb" => Method::Bnb,
            "ga" => Method::Ga,
            other => bail!("unknown search method 'optimal:{other}' (use exhaustive, bnb, or ga)"),
        };
        let result = run_search(f, method, common, None, None, None)?;
        return result
            .representative()
            .cloned()
            .context("search produced no ordering");
    }
    if net.named_orderings.contains_key(spec) {
        return Ok(net.ordering(spec)?);
    }
    if spec.contains(',') {
        let names: Vec<&str> = spec.split(',').map(str::trim).collect();
        return Ok(Ordering::from_names(&names, &net.gene_names)?);
    }
    bail!(
        "unknown ordering '{spec}': use \"identity\", comma-separated gene names, \
         an ordering declared in the network file, or optimal:<method>"
    )
}

fn run_search(
    f: &TransitionMap,
    method: Method,
    common: &CommonArgs,
    budget: Option<SearchBudget>,
    ga_population: Option<usize>,
    ga_generations: Option<usize>,
) -> anyhow::Result<SearchResult> {
    let search = || match method {
        Method::Exhaustive => exhaustive_minimize(f),
        Method::Bnb => branch_and_bound_with(f, None, budget, None),
        Method::Ga => {
            let mut cfg = GAConfig {
                seed: common.seed,
                ..GAConfig::default()
            };
            if let Some(p) = ga_population {
                cfg.population = p;
            }
            if let Some(g) = ga_generations {
                cfg.generations = g;
            }
            ga_minimize(f, &cfg)
        }
    };
    let result = match common.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()?
            .install(search),
        None => search(),
    }?;
    Ok(result)
}

fn timestamp(common: &CommonArgs) -> Option<u64> {
    (!common.no_timestamp).then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    })
}

fn header(net: &NetworkDefinition, f: &TransitionMap, ordering: Option<&Ordering>) -> String {
    let mut s = format!(
        "network: {} (p = {}, N = {}, {} states)\n",
        net.name,
        f.p,
        f.n,
        f.size()
    );
    if let Some(o) = ordering {
        let _ = writeln!(s, "ordering: {}", o.names(&net.gene_names).join(", "));
    }
    s
}

fn method_name(method: Method) -> &'static str {
    match method {
        Method::Exhaustive => "exhaustive",
        Method::Bnb => "branch-and-bound",
        Method::Ga => "genetic",
    }
}

fn pct_of(contrib: u128, total: u128) -> f64 {
    if total == 0 {
        0.0
    } else {
        (contrib as f64 * 1000.0 / total as f64).round() / 10.0
    }
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ControlIdentity {
    total: u128,
    expected: u128,
    ok: bool,
}

#[derive(Serialize)]
struct LevelRow {
    n: usize,
    expanding: u64,
    isometric: u64,
    contracting: u64,
    mu_e_contrib: u128,
    pct: f64,
}

#[derive(Serialize)]
struct AnalyzeReport {
    network: String,
    p: u64,
    num_genes: usize,
    ordering: Vec<String>,
    mu_e: u128,
    mu_a: u128,
    mu_i: u128,
    control_identity: ControlIdentity,
    per_level: Vec<LevelRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
}

fn level_rows(f: &TransitionMap, scores: &StabilityScores) -> anyhow::Result<Vec<LevelRow>> {
    let mut rows = Vec::with_capacity(scores.per_level.len());
    for lc in &scores.per_level {
        let weight = checked_pow(f.p, f.n - lc.n)? as u128;
        let contrib = lc.expanding as u128 * weight;
        rows.push(LevelRow {
            n: lc.n,
            expanding: lc.expanding,
            isometric: lc.isometric,
            contracting: lc.contracting,
            mu_e_contrib: contrib,
            pct: pct_of(contrib, scores.mu_e),
        });
    }
    Ok(rows)
}

fn cmd_analyze(args: AnalyzeArgs) -> anyhow::Result<i32> {
    let (net, f) = load(&args.common.network)?;
    let ordering = resolve_ordering(&net, &f, &args.common)?;
    let scores = stability_scores(&f, &ordering)?;
    let expected = StabilityScores::expected_total(f.p, f.n)?;
    let rows = level_rows(&f, &scores)?;
    let report = AnalyzeReport {
        network: net.name.clone(),
        p: f.p,
        num_genes: f.n,
        ordering: ordering
            .names(&net.gene_names)
            .iter()
            .map(|s| s.to_string())
            .collect(),
        mu_e: scores.mu_e,
        mu_a: scores.mu_a,
        mu_i: scores.mu_i,
        control_identity: ControlIdentity {
            total: scores.total(),
            expected,
            ok: scores.total() == expected,
        },
        per_level: rows,
        timestamp: timestamp(&args.common),
    };

    match args.format {
        Format::Text => {
            let mut out = header(&net, &f, Some(&ordering));
            let _ = writeln!(out, "mu_E = {}", report.mu_e);
            let _ = writeln!(out, "mu_A = {}", report.mu_a);
            let _ = writeln!(out, "mu_I = {}", report.mu_i);
            let ci = &report.control_identity;
            let _ = writeln!(
                out,
                "control identity: {}+{}+{} = {} (expected {}) [{}]",
                report.mu_e,
                report.mu_a,
                report.mu_i,
                ci.total,
                ci.expected,
                if ci.ok { "ok" } else { "MISMATCH" }
            );
            let _ = writeln!(out, "   n       E       I       A   muE_contrib     pct");
            for r in &report.per_level {
                let _ = writeln!(
                    out,
                    "{:4} {:7} {:7} {:7} {:13} {:>7.1}",
                    r.n, r.expanding, r.isometric, r.contracting, r.mu_e_contrib, r.pct
                );
            }
            if let Some(ts) = report.timestamp {
                let _ = writeln!(out, "timestamp: {ts}");
            }
            print!("{out}");
        }
        Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
        Format::Csv => {
            let mut out = String::new();
            if let Some(ts) = report.timestamp {
                let _ = writeln!(out, "# timestamp: {ts}");
            }
            let _ = writeln!(out, "n,E,I,A,muE_contrib,pct");
            for r in &report.per_level {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{:.1}",
                    r.n, r.expanding, r.isometric, r.contracting, r.mu_e_contrib, r.pct
                );
            }
            print!("{out}");
        }
        Format::Dot => bail!("analyze supports text, json, or csv output"),
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// optimize
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct OptimizeReport {
    network: String,
    p: u64,
    num_genes: usize,
    method: &'static str,
    result: SearchResult,
    representative_names: Vec<String>,
    /// 1-based position pairs, as displayed.
    symmetry_generators: Vec<(usize, usize)>,
    partial_order: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
}

fn block_names(blocks: &[OrderingBlock], gene_names: &[String]) -> Vec<Vec<String>> {
    blocks
        .iter()
        .map(|b| b.genes.iter().map(|&g| gene_names[g].clone()).collect())
        .collect()
}

fn cmd_optimize(args: OptimizeArgs) -> anyhow::Result<i32> {
    let (net, f) = load(&args.common.network)?;
    let budget = if args.max_evaluations.is_some() || args.max_seconds.is_some() {
        if args.method != Method::Bnb {
            bail!("--max-evaluations/--max-seconds apply only to --method bnb");
        }
        Some(SearchBudget {
            max_evaluations: args.max_evaluations,
            max_millis: args.max_seconds.map(|s| s.saturating_mul(1000)),
        })
    } else {
        None
    };
    let mut result = run_search(
        &f,
        args.method,
        &args.common,
        budget,
        args.ga_population,
        args.ga_generations,
    )?;
    if args.common.no_timestamp {
        result.wall_time_millis = 0;
    }
    let generators = minimizer_symmetry(&f, &result.minimizers)?;
    let blocks = partial_order_summary(&result.minimizers);
    let report = OptimizeReport {
        network: net.name.clone(),
        p: f.p,
        num_genes: f.n,
        method: method_name(args.method),
        representative_names: result
            .representative()
            .map(|o| o.names(&net.gene_names).iter().map(|s| s.to_string()).collect())
            .unwrap_or_default(),
        symmetry_generators: generators.iter().map(|&(i, j)| (i + 1, j + 1)).collect(),
        partial_order: block_names(&blocks, &net.gene_names),
        timestamp: timestamp(&args.common),
        result,
    };

    match args.format {
        Format::Text => {
            let mut out = header(&net, &f, None);
            let _ = writeln!(out, "method: {}", report.method);
            let _ = writeln!(out, "best mu_E: {}", report.result.best_score);
            let status = if report.result.certified {
                "certified"
            } else if args.method == Method::Bnb {
                "not certified; budget exhausted"
            } else {
                "not certified; heuristic search"
            };
            let _ = writeln!(out, "minimizers: {} ({status})", report.result.minimizers.len());
            let _ = writeln!(out, "representative: {}", report.representative_names.join(", "));
            if report.symmetry_generators.is_empty() {
                let _ = writeln!(out, "symmetry generators: none");
            } else {
                let pairs: Vec<String> = report
                    .symmetry_generators
                    .iter()
                    .map(|(i, j)| format!("({i},{j})"))
                    .collect();
                let _ = writeln!(out, "symmetry generators: {}", pairs.join(", "));
            }
            let order: Vec<String> = report
                .partial_order
                .iter()
                .map(|genes| {
                    if genes.len() == 1 {
                        genes[0].clone()
                    } else {
                        format!("{{{}}}", genes.join(", "))
                    }
                })
                .collect();
            let _ = writeln!(out, "partial order: {}", order.join(" | "));
            let _ = writeln!(out, "evaluations: {}", report.result.evaluations);
            if !args.common.no_timestamp {
                let _ = writeln!(out, "time: {} ms", report.result.wall_time_millis);
            }
            if let Some(ts) = report.timestamp {
                let _ = writeln!(out, "timestamp: {ts}");
            }
            print!("{out}");
        }
        Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
        Format::Csv | Format::Dot => bail!("optimize supports text or json output"),
    }
    Ok(if !report.result.certified && args.method == Method::Bnb {
        4
    } else {
        0
    })
}

// ---------------------------------------------------------------------------
// fixed-points
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct FixedPointsReport {
    network: String,
    p: u64,
    num_genes: usize,
    ordering: Vec<String>,
    depth: usize,
    fixed_points: Vec<FixedPointReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
}

fn cmd_fixed_points(args: FixedPointsArgs) -> anyhow::Result<i32> {
    let (net, f) = load(&args.common.network)?;
    let ordering = resolve_ordering(&net, &f, &args.common)?;
    let depth = args.depth.clamp(1, f.n.saturating_sub(1).max(1));
    let reports = fixed_point_report(&f, &ordering, Some(&net.labels))?;
    let out = FixedPointsReport {
        network: net.name.clone(),
        p: f.p,
        num_genes: f.n,
        ordering: ordering
            .names(&net.gene_names)
            .iter()
            .map(|s| s.to_string())
            .collect(),
        depth,
        fixed_points: reports,
        timestamp: timestamp(&args.common),
    };

    match args.format {
        Format::Text => {
            let mut text = header(&net, &f, Some(&ordering));
            let _ = writeln!(text, "fixed points: {}", out.fixed_points.len());
            if !out.fixed_points.is_empty() {
                let _ = writeln!(text, "   encoded  ball          sequence      label");
                for r in &out.fixed_points {
                    let ball = r
                        .ball_chain
                        .get(depth - 1)
                        .or_else(|| r.ball_chain.last());
                    let ball = match ball {
                        Some(b) => b.to_string(),
                        None => "-".to_string(),
                    };
                    let word: String = r.sequence_word().chars().take(depth).collect();
                    let label = r.label.as_deref().unwrap_or("-");
                    let _ = writeln!(text, "{:>10}  {:<12}  {:<12}  {}", r.encoded, ball, word, label);
                }
            }
            if let Some(ts) = out.timestamp {
                let _ = writeln!(text, "timestamp: {ts}");
            }
            print!("{text}");
        }
        Format::Json => println!("{}", serde_json::to_string_pretty(&out)?),
        Format::Csv => {
            let mut text = String::new();
            if let Some(ts) = out.timestamp {
                let _ = writeln!(text, "# timestamp: {ts}");
            }
            let _ = writeln!(text, "encoded,canonical,ball_level,ball_index,sequence,label");
            for r in &out.fixed_points {
                let ball = r.ball_chain.get(depth - 1).or_else(|| r.ball_chain.last());
                let (bl, bi) = match ball {
                    Some(b) => (b.level.to_string(), b.index.to_string()),
                    None => (String::new(), String::new()),
                };
                let word: String = r.sequence_word().chars().take(depth).collect();
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{}",
                    r.encoded,
                    r.canonical,
                    bl,
                    bi,
                    word,
                    r.label.as_deref().unwrap_or("")
                );
            }
            print!("{text}");
        }
        Format::Dot => bail!("fixed-points supports text, json, or csv output"),
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// export-tree
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct TreeNode {
    id: String,
    level: usize,
    index: u64,
    class: Option<Class>,
    parent: Option<String>,
    image_ball: Option<u64>,
}

#[derive(Serialize)]
struct TreeExport {
    network: String,
    p: u64,
    num_genes: usize,
    ordering: Vec<String>,
    depth: usize,
    image_arrows: bool,
    nodes: Vec<TreeNode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
}

fn class_fill(class: Option<Class>) -> &'static str {
    match class {
        None => "#eeeeee",
        Some(Class::Expanding) => "#fc9272",
        Some(Class::Isometric) => "#9ecae1",
        Some(Class::Contracting) => "#a1d99b",
    }
}

fn build_tree(
    net: &NetworkDefinition,
    f: &TransitionMap,
    ordering: &Ordering,
    depth: usize,
    image_arrows: bool,
    ts: Option<u64>,
) -> anyhow::Result<TreeExport> {
    let mut nodes = vec![TreeNode {
        id: "root".into(),
        level: 0,
        index: 0,
        class: None,
        parent: None,
        image_ball: None,
    }];
    let images = if image_arrows {
        Some(permuted_images(f, ordering)?)
    } else {
        None
    };
    for n in 1..=depth {
        let prefixes = level_prefixes(f, ordering, n)?;
        let modulus = checked_pow(f.p, n)?;
        let parent_mod = checked_pow(f.p, n - 1)?;
        for (c, &prefix) in prefixes.iter().enumerate() {
            let c = c as u64;
            let parent = if n == 1 {
                "root".to_string()
            } else {
                format!("b{}_{}", n - 1, c % parent_mod)
            };
            nodes.push(TreeNode {
                id: format!("b{n}_{c}"),
                level: n,
                index: c,
                class: Some(Class::from_prefix(prefix, n)),
                parent: Some(parent),
                image_ball: images.as_ref().map(|im| im[c as usize] % modulus),
            });
        }
    }
    Ok(TreeExport {
        network: net.name.clone(),
        p: f.p,
        num_genes: f.n,
        ordering: ordering
            .names(&net.gene_names)
            .iter()
            .map(|s| s.to_string())
            .collect(),
        depth,
        image_arrows,
        nodes,
        timestamp: ts,
    })
}

fn render_dot(tree: &TreeExport) -> String {
    let mut out = String::new();
    if let Some(ts) = tree.timestamp {
        let _ = writeln!(out, "// timestamp: {ts}");
    }
    let _ = writeln!(out, "digraph balls {{");
    let _ = writeln!(out, "  rankdir=TB;");
    let _ = writeln!(out, "  node [shape=box, style=filled, fontname=\"Helvetica\"];");
    for node in &tree.nodes {
        let label = if node.level == 0 {
            "level 0".to_string()
        } else {
            format!("({}, {}) {}", node.level, node.index, node.class.unwrap().letter())
        };
        let _ = writeln!(
            out,
            "  {} [label=\"{}\", fillcolor=\"{}\"];",
            node.id,
            label,
            class_fill(node.class)
        );
        if let Some(parent) = &node.parent {
            let _ = writeln!(out, "  {} -> {};", parent, node.id);
        }
    }
    if tree.image_arrows {
        for node in &tree.nodes {
            if let Some(target) = node.image_ball {
                if node.level > 0 && target != node.index {
                    let _ = writeln!(
                        out,
                        "  {} -> b{}_{} [style=dashed, color=\"#777777\", constraint=false];",
                        node.id, node.level, target
                    );
                }
            }
        }
    }
    let _ = writeln!(out, "}}");
    out
}

fn cmd_export_tree(args: ExportTreeArgs) -> anyhow::Result<i32> {
    let (net, f) = load(&args.common.network)?;
    let ordering = resolve_ordering(&net, &f, &args.common)?;
    let depth = args.depth.clamp(1, f.n.saturating_sub(1).max(1));
    let ts = timestamp(&args.common);
    let tree = build_tree(&net, &f, &ordering, depth, args.image_arrows, ts)?;
    let rendered = match args.format {
        Format::Dot => render_dot(&tree),
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&tree)?),
        Format::Text | Format::Csv => bail!("export-tree supports dot or json output"),
    };
    match &args.output {
        Some(path) => std::fs::write(path, rendered)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{rendered}"),
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct VerifyLevel {
    level: usize,
    balls: usize,
    samples: usize,
}

#[derive(Serialize)]
struct VerifyReport {
    network: String,
    p: u64,
    num_genes: usize,
    ordering: Vec<String>,
    seed: u64,
    levels: Vec<VerifyLevel>,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<i32> {
    let (net, f) = load(&args.common.network)?;
    let ordering = resolve_ordering(&net, &f, &args.common)?;
    let text_mode = args.format == Format::Text;
    if !matches!(args.format, Format::Text | Format::Json) {
        bail!("verify supports text or json output");
    }
    if text_mode {
        print!("{}", header(&net, &f, Some(&ordering)));
        println!(
            "samples: {} per ball at levels <= 4, {} beyond; seed {}",
            args.samples,
            args.samples.min(10),
            args.common.seed
        );
    }
    let mut levels = Vec::new();
    let mut total = 0usize;
    for n in 1..f.n.max(2) {
        let samples = if n <= 4 {
            args.samples
        } else {
            args.samples.min(10)
        };
        match verify_level(&f, &ordering, n, samples, args.common.seed) {
            Ok(balls) => {
                total += balls.len();
                if text_mode {
                    println!("level {n}: {} balls ok", balls.len());
                }
                levels.push(VerifyLevel {
                    level: n,
                    balls: balls.len(),
                    samples,
                });
            }
            Err(err) => {
                if text_mode {
                    println!("level {n}: FAIL");
                }
                return Err(err.into());
            }
        }
    }
    if text_mode {
        println!("result: pass ({total} balls)");
        if let Some(ts) = timestamp(&args.common) {
            println!("timestamp: {ts}");
        }
    } else {
        let report = VerifyReport {
            network: net.name.clone(),
            p: f.p,
            num_genes: f.n,
            ordering: ordering
                .names(&net.gene_names)
                .iter()
                .map(|s| s.to_string())
                .collect(),
            seed: args.common.seed,
            levels,
            pass: true,
            timestamp: timestamp(&args.common),
        };
        println!("{}", serde_json::to_string_pretty(&report)?);
    }
    Ok(0)
}
