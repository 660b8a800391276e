//! Command-line front end: file loading, subcommand dispatch, and report
//! aggregation. Exit code 0 means every check in the invocation passed, 1
//! means at least one check failed (reproducers are written next to the
//! report file, or to the working directory), and 2 means the invocation
//! itself was unusable: bad flags, missing files, malformed input.

use crate::ciucu::{
    build_symmetric, parse_axis, split_even_odd, verify_ciucu_lemma, verify_factorization,
    write_axis, AxisKind, SymmetricCompound,
};
use crate::compound::{
    build_compound, check_odd_leaves, family, parse_cpd, verify_divisibility, verify_zero_sum,
    write_cpd, write_cpdmap, CompoundGraph,
};
use crate::corpus::gen_corpus;
use crate::graph::{parse_pbg, write_pbg, PlanarBipartiteGraph};
use crate::oracle::{enumerate_matchings, oracle_count};
use crate::regions::{
    aztec_pillow, decompose_rectangle, pillow_divisibility_scan, rect_divisibility_scan,
    rectangle, EdgeWeights, PillowSpec, RectangleSpec,
};
use crate::report::VerificationReport;
use crate::ring::RingElement;
use crate::sign::{construct_sign_function, count_matchings};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

/// Overrides the bit precision of the closed-form count cross-check.
pub const PRECISION_ENV: &str = "MATCHKAST_PRECISION";

#[derive(Parser)]
#[command(
    name = "matchkast",
    version,
    about = "Exact perfect-matching counts on plane bipartite graphs"
)]
struct Cli {
    /// Also write every check outcome to this file: tab-separated rows, or
    /// JSON lines when the extension is .json or .jsonl
    #[arg(long, global = true, value_name = "PATH")]
    report: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the perfect-matching count of a pbg graph
    Count {
        /// Graph in pbg v1 form
        file: PathBuf,
    },
    /// Count matchings by exhaustive enumeration
    Oracle {
        /// Graph in pbg v1 form
        file: PathBuf,
        /// Also print each matching as its sorted edge ids
        #[arg(long)]
        list: bool,
    },
    /// Print a sign function for a pbg graph, one `edge sign` line each
    Signs {
        /// Graph in pbg v1 form
        file: PathBuf,
    },
    /// Build and check compound graphs described by cpd scripts
    #[command(subcommand)]
    Compound(CompoundCmd),
    /// Emit the m-by-n grid graph in pbg form
    Rect {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Weight each edge with its own variable instead of 1
        #[arg(long)]
        vars: bool,
        /// Write here instead of stdout
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Emit the Aztec pillow of a given order in pbg form
    Pillow {
        #[arg(long)]
        order: usize,
        /// Write here instead of stdout
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Cut an A-by-B rectangle into a-by-b blocks and stream every street
    /// resolution as one row: index, deleted dominoes, parts, count
    Decompose {
        /// Rows of the rectangle being cut
        #[arg(long = "A", value_name = "A")]
        big_m: usize,
        /// Columns of the rectangle being cut
        #[arg(long = "B", value_name = "B")]
        big_n: usize,
        /// Rows of one block; a+1 must divide A+1
        #[arg(long)]
        a: usize,
        /// Columns of one block; b+1 must divide B+1
        #[arg(long)]
        b: usize,
        /// Check that the piece counts sum to the rectangle count and that
        /// every piece places odd leaf counts on its street faces
        #[arg(long)]
        verify: bool,
    },
    /// Check count divisibility across nested rectangles
    ScanRect {
        /// Rows of the small rectangle
        #[arg(long)]
        a: usize,
        /// Columns of the small rectangle
        #[arg(long)]
        b: usize,
        /// Largest row count to scan
        #[arg(long = "max-A", value_name = "MAX_A")]
        max_a: usize,
        /// Largest column count to scan
        #[arg(long = "max-B", value_name = "MAX_B")]
        max_b: usize,
    },
    /// Check count divisibility across Aztec pillows
    ScanPillow {
        #[arg(long = "max-order", value_name = "MAX_ORDER")]
        max_order: usize,
    },
    /// Build and check mirror-symmetric compounds
    #[command(subcommand)]
    Ciucu(CiucuCmd),
    /// Write the deterministic test corpus as graph, script, and axis files
    GenCorpus {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest vertex count of a generated graph
        #[arg(long, default_value_t = 12)]
        budget: usize,
        /// Directory to fill (created if missing)
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum CompoundCmd {
    /// Assemble the compound graph a cpd script describes
    Build {
        /// Script in cpd v1 form; graph paths resolve relative to it
        script: PathBuf,
        /// Write the graph here and the vertex map next to it as
        /// `<PATH minus extension>.cpdmap`, instead of printing both
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Check that signed weights over a moving leaf's family sum to zero
    ZeroSum {
        /// Script in cpd v1 form
        script: PathBuf,
        /// Leaf to move (default: every leaf in turn)
        leaf: Option<String>,
    },
    /// Check that the base count divides the compound count
    Divide {
        /// Script in cpd v1 form
        script: PathBuf,
    },
    /// Check that every inner face of the supergraph holds an odd number
    /// of leaves
    OddLeaves {
        /// Script in cpd v1 form
        script: PathBuf,
    },
}

#[derive(Subcommand)]
enum CiucuCmd {
    /// Join a half graph and its mirror image along an axis
    Build {
        /// Half graph in pbg v1 form
        half: PathBuf,
        /// Axis description in axis v1 form
        axis: PathBuf,
        /// Write here instead of stdout
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Check that flipping a leaf to the other side preserves the count
    VerifyLemma {
        /// Half graph in pbg v1 form
        half: PathBuf,
        /// Axis description in axis v1 form
        axis: PathBuf,
        /// Leaf to flip (default: every leaf in turn)
        leaf: Option<String>,
    },
    /// Split a stem-only compound and check the 2^w count factorization
    Factorize {
        /// Half graph in pbg v1 form
        half: PathBuf,
        /// Axis description in axis v1 form
        axis: PathBuf,
    },
}

/// Parses `argv` and runs one subcommand, streaming to stdout.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let mut out = io::BufWriter::new(io::stdout().lock());
    let code = run_to(argv, &mut out);
    if out.flush().is_err() {
        return 2;
    }
    code
}

/// [`run`] against any sink; the tests capture output through this.
pub fn run_to<I, S, W>(argv: I, out: &mut W) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
    W: Write,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let report_path = cli.report.clone();
    let mut reports = Vec::new();
    if let Err(msg) = dispatch(cli.cmd, out, &mut reports) {
        eprintln!("error: {msg}");
        return 2;
    }
    if let Some(path) = &report_path {
        if let Err(msg) = write_report_file(path, &reports) {
            eprintln!("error: {msg}");
            return 2;
        }
    }
    finish(&reports, report_path.as_deref())
}

/// Failing reports exit 1; each reproducer is printed inline when it is a
/// single line (a rerun command) and otherwise written to a numbered file
/// whose path is printed (serialized input).
fn finish(reports: &[VerificationReport], report_path: Option<&Path>) -> i32 {
    let failures: Vec<&VerificationReport> =
        reports.iter().filter(|r| !r.passed()).collect();
    if failures.is_empty() {
        return 0;
    }
    for (i, r) in failures.iter().enumerate() {
        eprintln!("fail: {}: {}", r.subject, r.claim);
        match r.reproducer.as_deref() {
            Some(cmd) if !cmd.contains('\n') => eprintln!("  rerun: {cmd}"),
            Some(input) => match write_reproducer(report_path, i, input) {
                Ok(path) => eprintln!("  reproducer: {}", path.display()),
                Err(msg) => eprintln!("  reproducer not written: {msg}"),
            },
            None => {}
        }
    }
    1
}

fn write_reproducer(
    report_path: Option<&Path>,
    index: usize,
    input: &str,
) -> Result<PathBuf, String> {
    let stem = report_path
        .map(|p| p.with_extension(""))
        .unwrap_or_else(|| PathBuf::from("matchkast"));
    let path = PathBuf::from(format!("{}-repro-{index}.txt", stem.display()));
    fs::write(&path, input).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(path)
}

fn write_report_file(path: &Path, reports: &[VerificationReport]) -> Result<(), String> {
    let json = matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("json") | Some("jsonl")
    );
    let mut text = String::new();
    for r in reports {
        text.push_str(&if json { r.json_line() } else { r.tsv_line() });
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn dispatch(
    cmd: Cmd,
    out: &mut dyn Write,
    reports: &mut Vec<VerificationReport>,
) -> Result<(), String> {
    match cmd {
        Cmd::Count { file } => {
            let g = load_graph(&file)?;
            show(out, format!("{}\n", count_matchings(&g)))
        }
        Cmd::Oracle { file, list } => {
            let g = load_graph(&file)?;
            let count = oracle_count(&g).map_err(|e| format!("{}: {e}", file.display()))?;
            show(out, format!("{count}\n"))?;
            if list {
                let mut matchings =
                    enumerate_matchings(&g).map_err(|e| format!("{}: {e}", file.display()))?;
                matchings.sort();
                for m in matchings {
                    let ids: Vec<&str> = m.edges.iter().map(String::as_str).collect();
                    show(out, format!("{}\n", ids.join(" ")))?;
                }
            }
            Ok(())
        }
        Cmd::Signs { file } => {
            let g = load_graph(&file)?;
            let sign = construct_sign_function(&g);
            for (edge, s) in sign.iter() {
                show(out, format!("{edge} {}\n", if s > 0 { "+1" } else { "-1" }))?;
            }
            Ok(())
        }
        Cmd::Compound(sub) => dispatch_compound(sub, out, reports),
        Cmd::Rect { m, n, vars, out: dest } => {
            let spec = RectangleSpec::new(m, n).map_err(|e| e.to_string())?;
            let weights = if vars { EdgeWeights::Variables } else { EdgeWeights::Unit };
            let text = write_pbg(&rectangle(spec, weights)).map_err(|e| e.to_string())?;
            emit(out, dest.as_deref(), &text)
        }
        Cmd::Pillow { order, out: dest } => {
            let spec = PillowSpec::new(order).map_err(|e| e.to_string())?;
            let text = write_pbg(&aztec_pillow(spec)).map_err(|e| e.to_string())?;
            emit(out, dest.as_deref(), &text)
        }
        Cmd::Decompose { big_m, big_n, a, b, verify } => {
            decompose_cmd(big_m, big_n, a, b, verify, out, reports)
        }
        Cmd::ScanRect { a, b, max_a, max_b } => {
            let bits = precision_from_env()?;
            for r in rect_divisibility_scan(a, b, max_a, max_b, bits) {
                show(out, format!("{}\n", r.tsv_line()))?;
                reports.push(r);
            }
            Ok(())
        }
        Cmd::ScanPillow { max_order } => {
            for r in pillow_divisibility_scan(max_order) {
                show(out, format!("{}\n", r.tsv_line()))?;
                reports.push(r);
            }
            Ok(())
        }
        Cmd::Ciucu(sub) => dispatch_ciucu(sub, out, reports),
        Cmd::GenCorpus { seed, budget, out: dir } => gen_corpus_cmd(seed, budget, &dir, out),
    }
}

fn dispatch_compound(
    cmd: CompoundCmd,
    out: &mut dyn Write,
    reports: &mut Vec<VerificationReport>,
) -> Result<(), String> {
    match cmd {
        CompoundCmd::Build { script, out: dest } => {
            let h = load_compound(&script)?;
            let graph_text = write_pbg(h.graph()).map_err(|e| e.to_string())?;
            let map_text = write_cpdmap(&h);
            match dest {
                Some(path) => {
                    let map_path = path.with_extension("cpdmap");
                    fs::write(&path, graph_text)
                        .map_err(|e| format!("{}: {e}", path.display()))?;
                    fs::write(&map_path, map_text)
                        .map_err(|e| format!("{}: {e}", map_path.display()))?;
                    show(out, format!("wrote {}\n", path.display()))?;
                    show(out, format!("wrote {}\n", map_path.display()))
                }
                None => {
                    show(out, graph_text)?;
                    show(out, map_text)
                }
            }
        }
        CompoundCmd::ZeroSum { script, leaf } => {
            let h = load_compound(&script)?;
            let leaves: Vec<String> = match leaf {
                Some(id) => vec![id],
                None => h.leaves().iter().cloned().collect(),
            };
            if leaves.is_empty() {
                return Err(format!("{}: the compound has no leaves", script.display()));
            }
            for id in leaves {
                let fam = family(&h, &id).map_err(|e| format!("{}: {e}", script.display()))?;
                let r = verify_zero_sum(&fam)
                    .map_err(|e| format!("{}: {e}", script.display()))?;
                show(out, format!("{}\n", r.tsv_line()))?;
                reports.push(r);
            }
            Ok(())
        }
        CompoundCmd::Divide { script } => {
            let h = load_compound(&script)?;
            let r = verify_divisibility(&h).map_err(|e| format!("{}: {e}", script.display()))?;
            show(out, format!("{}\n", r.tsv_line()))?;
            reports.push(r);
            Ok(())
        }
        CompoundCmd::OddLeaves { script } => {
            let h = load_compound(&script)?;
            let odd =
                check_odd_leaves(&h).map_err(|e| format!("{}: {e}", script.display()))?;
            let subject = script.display().to_string();
            let claim = "every inner supergraph face holds an odd number of leaves";
            let r = if odd {
                VerificationReport::pass(subject, claim)
            } else {
                let repro = write_cpd("base.pbg", "super.pbg", h.script());
                VerificationReport::fail(subject, claim, "an even face exists", repro)
            };
            show(out, format!("{}\n", r.tsv_line()))?;
            reports.push(r);
            Ok(())
        }
    }
}

fn dispatch_ciucu(
    cmd: CiucuCmd,
    out: &mut dyn Write,
    reports: &mut Vec<VerificationReport>,
) -> Result<(), String> {
    match cmd {
        CiucuCmd::Build { half, axis, out: dest } => {
            let sc = load_symmetric(&half, &axis)?;
            let text = write_pbg(sc.graph()).map_err(|e| e.to_string())?;
            emit(out, dest.as_deref(), &text)
        }
        CiucuCmd::VerifyLemma { half, axis, leaf } => {
            let sc = load_symmetric(&half, &axis)?;
            let leaves: Vec<String> = match leaf {
                Some(id) => vec![id],
                None => sc
                    .axis()
                    .iter()
                    .filter(|v| matches!(v.kind, AxisKind::Leaf(_)))
                    .map(|v| v.id.clone())
                    .collect(),
            };
            if leaves.is_empty() {
                return Err(format!("{}: the axis has no leaves", axis.display()));
            }
            for id in leaves {
                let r = verify_ciucu_lemma(&sc, &id);
                show(out, format!("{}\n", r.tsv_line()))?;
                reports.push(r);
            }
            Ok(())
        }
        CiucuCmd::Factorize { half, axis } => {
            let sc = load_symmetric(&half, &axis)?;
            let (first, second) =
                split_even_odd(&sc).map_err(|e| format!("{}: {e}", axis.display()))?;
            let w = sc.w() / 2;
            show(out, format!("whole\t{}\n", count_matchings(sc.graph())))?;
            show(out, format!("first-half\t{}\n", count_matchings(&first)))?;
            show(out, format!("second-half\t{}\n", count_matchings(&second)))?;
            show(out, format!("stem-pairs\t{w}\n"))?;
            let r = verify_factorization(&sc);
            show(out, format!("{}\n", r.tsv_line()))?;
            reports.push(r);
            Ok(())
        }
    }
}

fn decompose_cmd(
    big_m: usize,
    big_n: usize,
    a: usize,
    b: usize,
    verify: bool,
    out: &mut dyn Write,
    reports: &mut Vec<VerificationReport>,
) -> Result<(), String> {
    let stream = decompose_rectangle(big_m, big_n, a, b).map_err(|e| e.to_string())?;
    let mut sum = RingElement::zero();
    let mut odd_violation: Option<(usize, usize)> = None;
    for (i, piece) in stream.enumerate() {
        let count = piece.count();
        let dominoes: Vec<String> = piece
            .dominoes
            .iter()
            .map(|((r1, c1), (r2, c2))| format!("{r1}.{c1}-{r2}.{c2}"))
            .collect();
        let dominoes = if dominoes.is_empty() { "-".to_string() } else { dominoes.join(";") };
        show(
            out,
            format!("{i}\t{dominoes}\t{}\t{count}\n", piece.parts.len()),
        )?;
        if verify {
            sum = sum.add(&count);
            for (j, part) in piece.parts.iter().enumerate() {
                let odd = check_odd_leaves(part).map_err(|e| e.to_string())?;
                if odd_violation.is_none() && !odd {
                    odd_violation = Some((i, j));
                }
            }
        }
    }
    if verify {
        let subject = format!("R({a},{b}) blocks in R({big_m},{big_n})");
        let repro =
            format!("decompose --A {big_m} --B {big_n} --a {a} --b {b} --verify");
        let whole = count_matchings(&rectangle(
            RectangleSpec::new(big_m, big_n).map_err(|e| e.to_string())?,
            EdgeWeights::Unit,
        ));
        let r = if sum == whole {
            VerificationReport::pass_with(
                subject.clone(),
                "piece counts sum to the rectangle count",
                format!("sum {sum}"),
            )
        } else {
            VerificationReport::fail(
                subject.clone(),
                "piece counts sum to the rectangle count",
                format!("sum {sum}, rectangle {whole}"),
                repro.clone(),
            )
        };
        show(out, format!("{}\n", r.tsv_line()))?;
        reports.push(r);
        let r = match odd_violation {
            None => VerificationReport::pass(
                subject,
                "every piece places odd leaf counts on its street faces",
            ),
            Some((i, j)) => VerificationReport::fail(
                subject,
                "every piece places odd leaf counts on its street faces",
                format!("piece {i}, part {j} has an even face"),
                repro,
            ),
        };
        show(out, format!("{}\n", r.tsv_line()))?;
        reports.push(r);
    }
    Ok(())
}

fn gen_corpus_cmd(
    seed: u64,
    budget: usize,
    dir: &Path,
    out: &mut dyn Write,
) -> Result<(), String> {
    if budget < 8 {
        return Err("a budget under 8 vertices cannot fit the fixed shapes".to_string());
    }
    let corpus = gen_corpus(seed, budget);
    fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let put = |name: String, text: String| -> Result<(), String> {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))
    };
    for (name, g) in &corpus.graphs {
        put(format!("{name}.pbg"), write_pbg(g).map_err(|e| e.to_string())?)?;
    }
    for (name, h) in &corpus.compounds {
        put(format!("{name}.base.pbg"), write_pbg(h.base()).map_err(|e| e.to_string())?)?;
        put(
            format!("{name}.super.pbg"),
            write_pbg(h.supergraph()).map_err(|e| e.to_string())?,
        )?;
        put(
            format!("{name}.cpd"),
            write_cpd(
                &format!("{name}.base.pbg"),
                &format!("{name}.super.pbg"),
                h.script(),
            ),
        )?;
    }
    for (name, sc) in &corpus.symmetric {
        put(format!("{name}.half.pbg"), write_pbg(sc.half()).map_err(|e| e.to_string())?)?;
        put(format!("{name}.axis"), write_axis(&spec_of(sc)))?;
    }
    show(out, format!("graphs\t{}\n", corpus.graphs.len()))?;
    show(out, format!("compounds\t{}\n", corpus.compounds.len()))?;
    show(out, format!("symmetric\t{}\n", corpus.symmetric.len()))
}

/// Recovers the axis description a symmetric compound was built from.
fn spec_of(sc: &SymmetricCompound) -> crate::ciucu::AxisSpec {
    crate::ciucu::AxisSpec {
        entries: sc
            .axis()
            .iter()
            .map(|v| crate::ciucu::AxisEntry {
                id: v.id.clone(),
                base_vertex: v.base_vertex.clone(),
                kind: v.kind,
            })
            .collect(),
    }
}

fn precision_from_env() -> Result<Option<usize>, String> {
    match std::env::var(PRECISION_ENV) {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| format!("{PRECISION_ENV} must be a bit count, got {s:?}")),
        Err(_) => Ok(None),
    }
}

fn show(out: &mut dyn Write, text: String) -> Result<(), String> {
    out.write_all(text.as_bytes()).map_err(|e| e.to_string())
}

fn emit(out: &mut dyn Write, dest: Option<&Path>, text: &str) -> Result<(), String> {
    match dest {
        Some(path) => {
            fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))?;
            show(out, format!("wrote {}\n", path.display()))
        }
        None => show(out, text.to_string()),
    }
}

fn read_text(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_graph(path: &Path) -> Result<PlanarBipartiteGraph, String> {
    parse_pbg(&read_text(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

/// Loads a cpd script; the two graph paths inside it resolve relative to
/// the script's directory.
fn load_compound(script: &Path) -> Result<CompoundGraph, String> {
    let cpd = parse_cpd(&read_text(script)?)
        .map_err(|e| format!("{}: {e}", script.display()))?;
    let dir = script.parent().filter(|p| !p.as_os_str().is_empty());
    let resolve = |rel: &str| match dir {
        Some(d) => d.join(rel),
        None => PathBuf::from(rel),
    };
    let base = load_graph(&resolve(&cpd.base_path))?;
    let sup = load_graph(&resolve(&cpd.super_path))?;
    build_compound(&base, &sup, &cpd.script).map_err(|e| format!("{}: {e}", script.display()))
}

fn load_symmetric(half: &Path, axis: &Path) -> Result<SymmetricCompound, String> {
    let g = load_graph(half)?;
    let spec =
        parse_axis(&read_text(axis)?).map_err(|e| format!("{}: {e}", axis.display()))?;
    build_symmetric(&g, &spec).map_err(|e| format!("{}: {e}", axis.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;

    static DIR_SEQ: AtomicUsize = AtomicUsize::new(0);

    // serializes the tests that read or write the precision variable
    static ENV_LOCK: Mutex<()> = Mutex::new(());

    fn env_guard() -> std::sync::MutexGuard<'static, ()> {
        ENV_LOCK.lock().unwrap_or_else(|p| p.into_inner())
    }

    /// A scratch directory unique to the calling test, removed on drop.
    struct Scratch(PathBuf);

    impl Scratch {
        fn new() -> Scratch {
            let dir = std::env::temp_dir().join(format!(
                "matchkast-cli-{}-{}",
                std::process::id(),
                DIR_SEQ.fetch_add(1, Ordering::Relaxed),
            ));
            fs::create_dir_all(&dir).expect("scratch dir");
            Scratch(dir)
        }

        fn path(&self, name: &str) -> PathBuf {
            self.0.join(name)
        }

        fn write(&self, name: &str, text: &str) -> PathBuf {
            let p = self.path(name);
            fs::write(&p, text).expect("scratch write");
            p
        }
    }

    impl Drop for Scratch {
        fn drop(&mut self) {
            let _ = fs::remove_dir_all(&self.0);
        }
    }

    fn capture(args: &[&str]) -> (i32, String) {
        let mut argv = vec!["matchkast"];
        argv.extend_from_slice(args);
        let mut buf = Vec::new();
        let code = run_to(argv, &mut buf);
        (code, String::from_utf8(buf).expect("utf-8 output"))
    }

    fn rect_pbg(m: usize, n: usize) -> String {
        let spec = RectangleSpec::new(m, n).expect("valid");
        write_pbg(&rectangle(spec, EdgeWeights::Unit)).expect("serializes")
    }

    #[test]
    fn count_prints_the_ring_element() {
        let dir = Scratch::new();
        let file = dir.write("r34.pbg", &rect_pbg(3, 4));
        let (code, output) = capture(&["count", file.to_str().expect("utf-8")]);
        assert_eq!(code, 0);
        assert_eq!(output, "11\n");
    }

    #[test]
    fn missing_files_are_usage_errors() {
        let (code, output) = capture(&["count", "missing.pbg"]);
        assert_eq!(code, 2);
        assert_eq!(output, "");
        let (code, _) = capture(&["count"]);
        assert_eq!(code, 2);
        let (code, _) = capture(&["no-such-command"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn oracle_lists_matchings_in_sorted_order() {
        let dir = Scratch::new();
        let file = dir.write("r22.pbg", &rect_pbg(2, 2));
        let (code, output) = capture(&["oracle", file.to_str().expect("utf-8"), "--list"]);
        assert_eq!(code, 0);
        assert_eq!(output, "2\nh1_1 h2_1\ns1_1 s1_2\n");
    }

    #[test]
    fn signs_cover_every_edge_with_unit_magnitude() {
        let dir = Scratch::new();
        let file = dir.write("r33.pbg", &rect_pbg(3, 3));
        let (code, output) = capture(&["signs", file.to_str().expect("utf-8")]);
        assert_eq!(code, 0);
        let g = parse_pbg(&rect_pbg(3, 3)).expect("parses");
        let lines: Vec<&str> = output.lines().collect();
        assert_eq!(lines.len(), g.edges().len());
        for line in lines {
            let (edge, sign) = line.split_once(' ').expect("two fields");
            assert!(g.edge(edge).is_some());
            assert!(sign == "+1" || sign == "-1");
        }
    }

    #[test]
    fn rect_emits_parseable_pbg_to_stdout_or_file() {
        let (code, output) = capture(&["rect", "--m", "2", "--n", "3"]);
        assert_eq!(code, 0);
        let g = parse_pbg(&output).expect("round-trips");
        assert_eq!(g.vertices().len(), 6);

        let dir = Scratch::new();
        let dest = dir.path("out.pbg");
        let (code, output) =
            capture(&["rect", "--m", "2", "--n", "3", "--out", dest.to_str().expect("utf-8")]);
        assert_eq!(code, 0);
        assert_eq!(output, format!("wrote {}\n", dest.display()));
        assert_eq!(fs::read_to_string(&dest).expect("written"), rect_pbg(2, 3));

        let (_, varied) = capture(&["rect", "--m", "2", "--n", "3", "--vars"]);
        let g = parse_pbg(&varied).expect("round-trips");
        assert!(!count_matchings(&g).is_constant());
    }

    #[test]
    fn pillow_emits_the_expected_order() {
        let (code, output) = capture(&["pillow", "--order", "3"]);
        assert_eq!(code, 0);
        let g = parse_pbg(&output).expect("round-trips");
        assert_eq!(g.black_count(), g.white_count());
        assert!(!count_matchings(&g).is_zero());
    }

    #[test]
    fn scan_rect_reports_every_pair_and_passes() {
        let _g = env_guard();
        let (code, output) = capture(&["scan-rect", "--a", "1", "--b", "1", "--max-A", "3", "--max-B", "3"]);
        assert_eq!(code, 0);
        // pairs (1,1) (1,3) (3,1) (3,3); the odd-area ones are vacuous
        assert_eq!(output.lines().count(), 4);
        for line in output.lines() {
            assert!(line.ends_with("pass\t1") || line.contains("vacuous"), "{line}");
        }
    }

    #[test]
    fn scan_pillow_is_clean_at_small_orders() {
        let (code, output) = capture(&["scan-pillow", "--max-order", "5"]);
        assert_eq!(code, 0);
        assert!(output.lines().any(|l| l.starts_with("AP_1|AP_5")));
    }

    #[test]
    fn report_files_switch_format_on_extension() {
        let _g = env_guard();
        let dir = Scratch::new();
        let tsv = dir.path("r.tsv");
        let (code, stdout_text) = capture(&[
            "scan-rect", "--a", "2", "--b", "2", "--max-A", "5", "--max-B", "5",
            "--report", tsv.to_str().expect("utf-8"),
        ]);
        assert_eq!(code, 0);
        let written = fs::read_to_string(&tsv).expect("report written");
        assert_eq!(written, stdout_text);

        let jsonl = dir.path("r.jsonl");
        let (code, _) = capture(&[
            "scan-rect", "--a", "2", "--b", "2", "--max-A", "5", "--max-B", "5",
            "--report", jsonl.to_str().expect("utf-8"),
        ]);
        assert_eq!(code, 0);
        for line in fs::read_to_string(&jsonl).expect("report written").lines() {
            let v: serde_json::Value = serde_json::from_str(line).expect("json lines");
            assert!(v["status"] == "pass" || v["status"] == "vacuous", "{v}");
        }
    }

    #[test]
    fn precision_env_is_validated() {
        let _g = env_guard();
        std::env::set_var(PRECISION_ENV, "not-a-number");
        let (code, _) = capture(&["scan-rect", "--a", "1", "--b", "1", "--max-A", "1", "--max-B", "1"]);
        std::env::remove_var(PRECISION_ENV);
        assert_eq!(code, 2);

        std::env::set_var(PRECISION_ENV, "256");
        let (code, output) = capture(&["scan-rect", "--a", "2", "--b", "2", "--max-A", "2", "--max-B", "2"]);
        std::env::remove_var(PRECISION_ENV);
        assert_eq!(code, 0);
        assert_eq!(output.lines().count(), 1);
    }

    #[test]
    fn decompose_verify_sums_to_the_rectangle_count() {
        let (code, output) = capture(&["decompose", "--A", "3", "--B", "2", "--a", "1", "--b", "2", "--verify"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = output.lines().collect();
        let checks = &lines[lines.len() - 2..];
        assert!(checks[0].contains("piece counts sum") && checks[0].contains("pass"));
        assert!(checks[1].contains("odd leaf counts") && checks[1].contains("pass"));
        let mut sum = num_bigint::BigInt::zero();
        for row in &lines[..lines.len() - 2] {
            let count: num_bigint::BigInt =
                row.rsplit('\t').next().expect("count column").parse().expect("integer");
            sum += count;
        }
        assert_eq!(sum, num_bigint::BigInt::from(3));

        let (code, _) = capture(&["decompose", "--A", "3", "--B", "3", "--a", "1", "--b", "1"]);
        assert_eq!(code, 2, "odd-area targets are rejected");
    }

    #[test]
    fn compound_subcommands_run_a_scripted_build() {
        let dir = Scratch::new();
        dir.write("base.pbg", &rect_pbg(2, 2));
        dir.write(
            "super.pbg",
            "pbg v1\nvertex u0 b\nvertex u1 w\nedge f0 u0 u1 1\nrot u0 f0\nrot u1 f0\nouter f0 u0\n",
        );
        let script = dir.write(
            "join.cpd",
            "cpd v1\nbase base.pbg\nsuper super.pbg\nstem f0 v1_2 0\nleaf u0 v1_1 0\n",
        );
        let script_arg = script.to_str().expect("utf-8");

        let dest = dir.path("h.pbg");
        let (code, output) =
            capture(&["compound", "build", script_arg, "--out", dest.to_str().expect("utf-8")]);
        assert_eq!(code, 0);
        assert_eq!(output.lines().count(), 2);
        let h = parse_pbg(&fs::read_to_string(&dest).expect("graph written")).expect("parses");
        assert_eq!(h.vertices().len(), 10);
        let map = fs::read_to_string(dir.path("h.cpdmap")).expect("sidecar written");
        assert!(map.starts_with("cpdmap v1\n"));
        assert!(map.contains("stem st0"));
        assert!(map.contains("leaf lf0"));

        let (code, stdout_text) = capture(&["compound", "build", script_arg]);
        assert_eq!(code, 0);
        assert!(stdout_text.starts_with("pbg v1\n"));
        assert!(stdout_text.contains("\ncpdmap v1\n"));

        let (code, output) = capture(&["compound", "zero-sum", script_arg]);
        assert_eq!(code, 0);
        assert!(output.contains("pass"));

        let (code, output) = capture(&["compound", "divide", script_arg]);
        assert_eq!(code, 0);
        assert!(output.contains("pass"));

        let (code, output) = capture(&["compound", "odd-leaves", script_arg]);
        assert_eq!(code, 0);
        assert!(output.contains("pass"));
    }

    #[test]
    fn ciucu_subcommands_build_verify_and_factor() {
        let dir = Scratch::new();
        let half = dir.write("half.pbg", &rect_pbg(1, 3));
        let half_arg = half.to_str().expect("utf-8");

        let stems = dir.write("stems.axis", "axis v1\nstem s0 v1_1\nstem s1 v1_3\n");
        let (code, output) = capture(&["ciucu", "build", half_arg, stems.to_str().expect("utf-8")]);
        assert_eq!(code, 0);
        let g = parse_pbg(&output).expect("round-trips");
        assert_eq!(g.vertices().len(), 8);

        let (code, output) =
            capture(&["ciucu", "factorize", half_arg, stems.to_str().expect("utf-8")]);
        assert_eq!(code, 0);
        assert!(output.starts_with("whole\t2\n"));
        assert!(output.contains("stem-pairs\t1\n"));
        assert!(output.lines().last().expect("report line").contains("pass"));

        let mixed = dir.write("mixed.axis", "axis v1\nstem s0 v1_1\nleaf f0 v1_3 L\n");
        let (code, output) =
            capture(&["ciucu", "verify-lemma", half_arg, mixed.to_str().expect("utf-8")]);
        assert_eq!(code, 0);
        assert!(output.contains("pass"));
        let (code, _) = capture(&[
            "ciucu", "verify-lemma", half_arg, mixed.to_str().expect("utf-8"), "zzz",
        ]);
        assert_eq!(code, 1);
    }

    #[test]
    fn gen_corpus_writes_loadable_files() {
        let dir = Scratch::new();
        let out_dir = dir.path("corpus");
        let (code, output) = capture(&[
            "gen-corpus", "--budget", "8", "--out", out_dir.to_str().expect("utf-8"),
        ]);
        assert_eq!(code, 0);
        let summary: Vec<&str> = output.lines().collect();
        assert_eq!(summary.len(), 3);
        assert!(summary[0].starts_with("graphs\t"));

        let mut names: Vec<String> = fs::read_dir(&out_dir)
            .expect("corpus dir")
            .map(|e| e.expect("entry").file_name().into_string().expect("utf-8"))
            .collect();
        names.sort();
        let pbg = names.iter().find(|n| n.ends_with(".pbg")).expect("graphs written");
        load_graph(&out_dir.join(pbg)).expect("corpus graphs parse");
        let cpd = names.iter().find(|n| n.ends_with(".cpd")).expect("scripts written");
        load_compound(&out_dir.join(cpd)).expect("corpus scripts build");
        let axis = names.iter().find(|n| n.ends_with(".axis")).expect("axes written");
        let half = axis.replace(".axis", ".half.pbg");
        load_symmetric(&out_dir.join(&half), &out_dir.join(axis))
            .expect("corpus axes build");
    }
}
