use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use tropicast::arrangement::{intersect_components, intersect_polynomials, ArrangementError};
use tropicast::exactgeom::{lower_hull_subdivision, GeomError, Polytope};
use tropicast::fiber::{fiber_polytope, mixed_fiber_polytope, FiberError, LinearFunctional};
use tropicast::io::{
    from_json, to_json, ComplexJson, ErrorJson, FiberJson, IoError, LineJson, PolynomialJson, SipReportJson, SubdivisionJson, SystemJson, SCHEMA,
};
use tropicast::lines::{binomial2, caterpillar, caterpillar_sweep, check_caterpillar_bound, lower_bound_projection, sweep_csv, LinesError};
use tropicast::project::{image_dual_subdivision, monomial_pushforward, project_and_count, EmbeddedCurve, ProjectError, RationalProjection};
use tropicast::svg::{render_svg, SvgError, SvgPayload};
use tropicast::tropoly::{hypersurface, tropical_product_all, TropError};

#[derive(Parser)]
#[command(name = "tropicast", version, about = "Exact tropical curves, projections and fiber polytopes")]
struct Cli {
    /// Seed for randomized commands; TROPICAST_SEED takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Valuations of a polynomial given by rational coefficients.
    Tropicalize {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        prime: Option<u64>,
    },
    /// The tropical hypersurface of a polynomial.
    Hypersurface {
        #[arg(long)]
        poly: PathBuf,
    },
    /// Intersection of tropical hypersurfaces (factor lists are multiplied).
    Intersect {
        #[arg(long)]
        system: PathBuf,
    },
    /// Image of a curve under a rational projection, with its pieces.
    Project {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Self-intersection points of a projected curve.
    Selfint {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Fiber polytope of a polytope under a linear functional.
    Fiber {
        #[arg(long)]
        polytope: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        psi: String,
    },
    /// Mixed fiber polytope of several polytopes.
    Mixedfiber {
        #[arg(long, num_args = 1.., required = true)]
        polytopes: Vec<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        psi: String,
    },
    /// Dual subdivision of a projected curve, optionally compared with the
    /// subdivision of a pushed-forward polynomial.
    Dualsub {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
        /// Polynomial in the source variables whose pushforward is compared.
        #[arg(long)]
        compare: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// The standard caterpillar line in ℝⁿ with its system and projection.
    Caterpillar {
        #[arg(long)]
        n: usize,
        /// Projection matrix; defaults to the lower-bound construction.
        #[arg(long, allow_hyphen_values = true)]
        matrix: Option<String>,
    },
    /// Random bound checks, as CSV.
    Sweep {
        #[arg(long, default_value = "caterpillar")]
        family: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(#[from] IoError),
    #[error("{0}")]
    Geom(#[from] GeomError),
    #[error("{0}")]
    Trop(#[from] TropError),
    #[error("{0}")]
    Arrangement(#[from] ArrangementError),
    #[error("{0}")]
    Project(#[from] ProjectError),
    #[error("{0}")]
    Fiber(#[from] FiberError),
    #[error("{0}")]
    Lines(#[from] LinesError),
    #[error("{0}")]
    Svg(#[from] SvgError),
}

impl CliError {
    /// Input problems are usage errors; anything the geometry rejects is a
    /// degeneracy.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "input",
            CliError::Geom(_) => "geometry",
            CliError::Trop(_) => "tropical",
            CliError::Arrangement(_) => "intersection",
            CliError::Project(_) => "projection",
            CliError::Fiber(_) => "fiber",
            CliError::Lines(_) => "lines",
            CliError::Svg(_) => "svg",
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn parse_ints(s: &str) -> Result<Vec<i64>> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| CliError::Usage(format!("not an integer: {t}"))))
        .collect()
}

/// "1 0 1; 0 1 2", a JSON array of rows, or a file holding either.
fn parse_matrix(s: &str) -> Result<RationalProjection> {
    let text = if Path::new(s).is_file() { read(Path::new(s))? } else { s.to_string() };
    let rows: Vec<Vec<i64>> = match serde_json::from_str(&text) {
        Ok(rows) => rows,
        Err(_) => text.split(';').map(parse_ints).collect::<Result<_>>()?,
    };
    Ok(RationalProjection::new(rows)?)
}

fn parse_psi(s: &str) -> Result<LinearFunctional> {
    Ok(LinearFunctional::new(parse_ints(s)?)?)
}

enum CurveInput {
    Line(LineJson),
    System(Vec<Vec<tropicast::tropoly::ValuedPolynomial>>),
}

/// A line document (has "parent") or a system whose factor choices give the
/// components.
fn read_curve(path: &Path) -> Result<CurveInput> {
    let text = read(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(IoError::from)?;
    if value.get("parent").is_some() {
        return Ok(CurveInput::Line(from_json(&text)?));
    }
    Ok(CurveInput::System(from_json::<SystemJson>(&text)?.to_factors()?))
}

fn curves_of(input: &CurveInput) -> Result<(Vec<EmbeddedCurve>, Vec<tropicast::arrangement::IntersectionReport>)> {
    match input {
        CurveInput::Line(l) => Ok((vec![l.to_line()?.to_curve()], Vec::new())),
        CurveInput::System(factors) => {
            let reports = intersect_components(factors)?;
            let curves = reports.iter().map(|r| EmbeddedCurve::from_complex(&r.complex)).collect::<std::result::Result<_, _>>()?;
            Ok((curves, reports))
        }
    }
}

fn write_svg(path: &Option<PathBuf>, payload: SvgPayload) -> Result<()> {
    if let Some(p) = path {
        let svg = render_svg(payload)?;
        std::fs::write(p, svg).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CaterpillarJson {
    schema: String,
    line: LineJson,
    system: SystemJson,
    matrix: Vec<Vec<i64>>,
    count: usize,
    bound: usize,
}

#[derive(Serialize)]
struct DualsubJson {
    #[serde(flatten)]
    report: SipReportJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pushforward: Option<PolynomialJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pushforward_subdivision: Option<SubdivisionJson>,
}

fn run(cli: &Cli, seed: u64) -> Result<String> {
    Ok(match &cli.command {
        Command::Tropicalize { poly, prime } => {
            let mut doc: PolynomialJson = from_json(&read(poly)?)?;
            if prime.is_some() {
                doc.prime = *prime;
                for t in &mut doc.terms {
                    if t.coeff.is_some() {
                        t.val = None;
                    }
                }
            }
            to_json(&PolynomialJson::from_poly(&doc.to_poly()?))
        }
        Command::Hypersurface { poly } => {
            let f = from_json::<PolynomialJson>(&read(poly)?)?.to_poly()?;
            to_json(&ComplexJson::from_complex(&hypersurface(&f)?))
        }
        Command::Intersect { system } => {
            let factors = from_json::<SystemJson>(&read(system)?)?.to_factors()?;
            let fs = factors.iter().map(|f| tropical_product_all(f)).collect::<std::result::Result<Vec<_>, _>>()?;
            to_json(&ComplexJson::from_report(&intersect_polynomials(&fs)?))
        }
        Command::Project { curve, matrix, svg } => {
            let proj = parse_matrix(matrix)?;
            let (curves, _) = curves_of(&read_curve(curve)?)?;
            let img = tropicast::project::project_curves(&curves, &proj)?;
            write_svg(svg, SvgPayload::Image(&img))?;
            to_json(&SipReportJson::from_image(&img, true))
        }
        Command::Selfint { curve, matrix, svg } => {
            let proj = parse_matrix(matrix)?;
            let (curves, _) = curves_of(&read_curve(curve)?)?;
            let img = project_and_count(&curves, &proj)?;
            write_svg(svg, SvgPayload::Image(&img))?;
            to_json(&SipReportJson::from_image(&img, false))
        }
        Command::Fiber { polytope, psi } => {
            let p = read_polytope(polytope)?;
            to_json(&FiberJson::from_fiber(&fiber_polytope(&p, &parse_psi(psi)?)?))
        }
        Command::Mixedfiber { polytopes, psi } => {
            let ps = polytopes.iter().map(|p| read_polytope(p)).collect::<Result<Vec<_>>>()?;
            to_json(&FiberJson::from_fiber(&mixed_fiber_polytope(&ps, &parse_psi(psi)?)?))
        }
        Command::Dualsub { curve, matrix, compare, svg } => {
            let proj = parse_matrix(matrix)?;
            let (_, reports) = match read_curve(curve)? {
                CurveInput::Line(_) => return Err(CliError::Usage("dualsub needs a polynomial system".into())),
                sys => curves_of(&sys)?,
            };
            let pushforward = match compare {
                Some(path) => Some(monomial_pushforward(&from_json::<PolynomialJson>(&read(path)?)?.to_poly()?, proj.matrix())?),
                None => None,
            };
            let img = image_dual_subdivision(&reports, &proj, pushforward.as_ref())?;
            let mut report = SipReportJson::from_image(&img, false);
            let mut sub_json = None;
            if let Some(b) = &pushforward {
                let sub = lower_hull_subdivision(&b.lifted_support())?;
                if let (Some(d), Some(dj)) = (&img.dual_subdivision, report.dual_subdivision.as_mut()) {
                    dj.matches_pushforward = Some(d.matches(&sub));
                }
                sub_json = Some(SubdivisionJson::from_subdivision(&sub));
            }
            if let Some(d) = &img.dual_subdivision {
                write_svg(svg, SvgPayload::DualCells(d))?;
            }
            to_json(&DualsubJson { report, pushforward: pushforward.as_ref().map(PolynomialJson::from_poly), pushforward_subdivision: sub_json })
        }
        Command::Caterpillar { n, matrix } => {
            let c = caterpillar(*n, None)?;
            let proj = match matrix {
                Some(m) => parse_matrix(m)?,
                None => lower_bound_projection(*n)?,
            };
            let count = check_caterpillar_bound(&c.line, &proj)?.count;
            to_json(&CaterpillarJson {
                schema: SCHEMA.to_string(),
                line: LineJson::from_line(&c.line),
                system: SystemJson::from_polys(&c.system),
                matrix: proj.matrix().to_vec(),
                count,
                bound: binomial2(n - 1),
            })
        }
        Command::Sweep { family, n, trials } => {
            if family != "caterpillar" {
                return Err(CliError::Usage(format!("unknown family {family:?} (expected caterpillar)")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows = caterpillar_sweep(*n, *trials, &mut rng)?;
            return Ok(sweep_csv(&rows));
        }
    })
}

fn read_polytope(path: &Path) -> Result<Polytope> {
    Ok(from_json::<tropicast::io::PolytopeJson>(&read(path)?)?.to_polytope()?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let seed = match std::env::var("TROPICAST_SEED") {
        Ok(s) => match s.trim().parse() {
            Ok(v) => v,
            Err(_) => {
                eprintln!("{}", to_json(&ErrorJson::new("usage", format!("TROPICAST_SEED is not an integer: {s}"))));
                return ExitCode::from(1);
            }
        },
        Err(_) => cli.seed,
    };
    match run(&cli, seed) {
        Ok(mut out) => {
            if !out.ends_with('\n') {
                out.push('\n');
            }
            match &cli.output {
                Some(p) => {
                    if let Err(e) = std::fs::write(p, out) {
                        eprintln!("{}", to_json(&ErrorJson::new("usage", format!("{}: {e}", p.display()))));
                        return ExitCode::from(1);
                    }
                }
                None => print!("{out}"),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", to_json(&ErrorJson::new(e.kind(), &e)));
            ExitCode::from(e.exit_code())
        }
    }
}
