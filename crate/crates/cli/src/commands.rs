use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use hjsort::convergence::{default_meshes, run_study, StudySpec};
use hjsort::pareto::{pareto_fronts, pde_rank, rank_agreement, PointCloud};
use hjsort::schemes::{solve as solve_field, solve_rolling, SolveOptions, SolveReport, SolveStats};
use hjsort::testcases::to_u_scale;
use hjsort::{Error, GridField, GridSpec, Method, SchemeKind, TestCase};
use serde_json::json;

use crate::{ConvergenceArgs, FieldFormat, ParetoArgs, RhsArgs, SolveArgs, TableFormat};

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

fn config(error: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 2, error: error.into() }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: 1, error }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidGrid(_) | Error::UnknownCase(_) | Error::InvalidStudy(_) | Error::SpecMismatch { .. } => {
                config(e)
            }
            other => Failure { code: 1, error: other.into() },
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: 1, error: e.into() }
    }
}

type CmdResult = Result<(), Failure>;

fn method(force_bisection: bool) -> Method {
    if force_bisection {
        Method::Bisection
    } else {
        Method::Auto
    }
}

enum Rhs {
    Case(TestCase),
    Field(GridField),
}

impl Rhs {
    fn load(args: &RhsArgs, spec: GridSpec) -> Result<Self, Failure> {
        match &args.f_file {
            Some(path) => {
                let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
                let field = GridField::read_binary(BufReader::new(file))
                    .with_context(|| format!("reading {}", path.display()))?;
                if field.spec() != spec {
                    return Err(config(anyhow!(
                        "{} holds a grid with n={}, m={}, but n={}, m={} was requested",
                        path.display(),
                        field.spec().n(),
                        field.spec().m(),
                        spec.n(),
                        spec.m()
                    )));
                }
                Ok(Rhs::Field(field))
            }
            None => Ok(Rhs::Case(TestCase::parse(&args.case, args.k, args.big_c)?)),
        }
    }

    fn name(&self) -> String {
        match self {
            Rhs::Case(c) => c.name(),
            Rhs::Field(_) => "file".into(),
        }
    }

    fn exact(&self) -> Option<&TestCase> {
        match self {
            Rhs::Case(c) => Some(c),
            Rhs::Field(_) => None,
        }
    }

    fn solve(&self, spec: GridSpec, kind: SchemeKind, opts: SolveOptions) -> hjsort::Result<SolveReport> {
        match self {
            Rhs::Case(c) => solve_field(spec, kind, &|x: &[f64]| c.f(x), opts),
            Rhs::Field(f) => solve_field(spec, kind, f, opts),
        }
    }

    fn solve_rolling(
        &self,
        spec: GridSpec,
        kind: SchemeKind,
        opts: SolveOptions,
        visit: impl FnMut(&[usize], &[f64], f64),
    ) -> hjsort::Result<SolveStats> {
        let (stats, _) = match self {
            Rhs::Case(c) => solve_rolling(spec, kind, &|x: &[f64]| c.f(x), opts, visit)?,
            Rhs::Field(f) => solve_rolling(spec, kind, f, opts, visit)?,
        };
        Ok(stats)
    }
}

fn check_memory(spec: GridSpec, cap: u64) -> CmdResult {
    let bytes = spec.field_bytes();
    if bytes > u128::from(cap) {
        return Err(config(anyhow!(
            "a full grid with n={}, m={} needs {bytes} bytes, above the cap of {cap}; use --rolling or raise --mem-cap",
            spec.n(),
            spec.m()
        )));
    }
    Ok(())
}

/// Running maximum that sticks at NaN.
fn track_max(acc: &mut f64, d: f64) {
    if d.is_nan() || d > *acc {
        *acc = d;
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

pub fn solve(args: SolveArgs) -> CmdResult {
    let spec = GridSpec::new(args.n, args.m)?;
    if !args.rolling {
        check_memory(spec, args.mem_cap)?;
    }
    let rhs = Rhs::load(&args.rhs, spec)?;
    let kind = args.scheme;
    let opts = SolveOptions { method: method(args.force_bisection) };
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let stem = format!("{}_{}_n{}_m{}", kind.label(), rhs.name().replace(':', "-"), spec.n(), spec.m());

    let mut error_u = 0.0f64;
    let mut outputs: Vec<PathBuf> = Vec::new();
    let stats = if args.rolling {
        rhs.solve_rolling(spec, kind, opts, |_, x, v| {
            if let Some(case) = rhs.exact() {
                track_max(&mut error_u, (to_u_scale(kind, x, v) - case.u(x)).abs());
            }
        })?
    } else {
        let rep = rhs.solve(spec, kind, opts)?;
        if let Some(case) = rhs.exact() {
            rep.field.for_each_node(|_, x, v| track_max(&mut error_u, (to_u_scale(kind, x, v) - case.u(x)).abs()));
        }
        let path = args.out.join(format!(
            "{stem}.{}",
            match args.format {
                FieldFormat::Bin => "bin",
                FieldFormat::Csv => "csv",
            }
        ));
        let mut w = create(&path)?;
        match args.format {
            FieldFormat::Bin => rep.field.write_binary(&mut w)?,
            FieldFormat::Csv => rep.field.write_csv(&mut w)?,
        }
        w.flush()?;
        outputs.push(path);
        if args.emit_levelsets {
            let path = args.out.join(format!("{stem}.levelsets.csv"));
            let mut w = create(&path)?;
            rep.field.map(|x, v| to_u_scale(kind, x, v)).write_csv(&mut w)?;
            w.flush()?;
            outputs.push(path);
        }
        rep.stats
    };

    let report = json!({
        "scheme": kind.label(),
        "case": rhs.name(),
        "n": spec.n(),
        "m": spec.m(),
        "h": spec.h(),
        "method": if args.force_bisection { "bisection" } else { "auto" },
        "storage": if args.rolling { "rolling" } else { "full" },
        "linf_error_u": rhs.exact().map(|_| error_u),
        "stats": stats,
        "outputs": outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    });
    let report_path = args.out.join(format!("{stem}.report.json"));
    let mut w = create(&report_path)?;
    serde_json::to_writer_pretty(&mut w, &report).context("writing report")?;
    writeln!(w)?;
    w.flush()?;

    for p in &outputs {
        println!("wrote {}", p.display());
    }
    println!("wrote {}", report_path.display());
    if rhs.exact().is_some() {
        println!("h = {:e}, linf error (u scale) = {:.6e}", spec.h(), error_u);
    }
    Ok(())
}

pub fn convergence(args: ConvergenceArgs) -> CmdResult {
    let case = TestCase::parse(&args.case, args.k, args.big_c)?;
    let meshes = match args.meshes {
        Some(m) => m,
        None => default_meshes(args.n, args.max_k),
    };
    if args.jobs == 0 {
        return Err(config(anyhow!("--jobs must be at least 1")));
    }
    let study = StudySpec {
        schemes: args.scheme,
        case,
        n: args.n,
        meshes,
        method: method(args.force_bisection),
        jobs: args.jobs,
    };
    let study = run_study(&study)?;
    let text = match args.format {
        TableFormat::Markdown => study.to_markdown(),
        TableFormat::Csv => study.to_csv(),
        TableFormat::Json => study.to_json() + "\n",
    };
    match args.out {
        Some(path) => {
            let mut w = create(&path)?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn pareto(args: ParetoArgs) -> CmdResult {
    let file = File::open(&args.input).with_context(|| format!("opening {}", args.input.display()))?;
    let raw = PointCloud::read_csv(BufReader::new(file)).map_err(|e| anyhow!("{}: {e}", args.input.display()))?;
    if raw.is_empty() {
        return Err(anyhow!("{}: no points found", args.input.display()).into());
    }
    let cloud = if args.no_normalize { raw.clone() } else { raw.normalized() };
    let spec = GridSpec::new(cloud.dim(), args.m)?;
    check_memory(spec, args.mem_cap)?;
    let rhs = Rhs::load(&args.rhs, spec)?;
    let kind = args.scheme;
    let rep = rhs.solve(spec, kind, SolveOptions { method: method(args.force_bisection) })?;
    let u = rep.field.map(|x, v| to_u_scale(kind, x, v));

    let labels = pareto_fronts(&cloud);
    let ranks = pde_rank(&cloud, &u)?;

    let mut out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(create(path)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let header: Vec<String> = (1..=raw.dim()).map(|i| format!("x{i}")).collect();
    writeln!(out, "{},front,rank", header.join(","))?;
    for (i, p) in raw.points().enumerate() {
        for v in p {
            write!(out, "{v:.16e},")?;
        }
        writeln!(out, "{},{:.16e}", labels[i], ranks[i])?;
    }
    out.flush()?;

    let fronts = labels.iter().max().copied().unwrap_or(0);
    match rank_agreement(&labels, &ranks) {
        Ok(a) => eprintln!("points: {}, fronts: {fronts}, agreement: {a:.6}", raw.len()),
        Err(e) => eprintln!("points: {}, fronts: {fronts}, agreement undefined ({e})", raw.len()),
    }
    Ok(())
}
