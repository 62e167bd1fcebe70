//! `calabi-gauge`: verification runs for invariant instantons on T*CP².

mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Result};
use calabi_gauge::bundles::{bundle_extends, bundle_table, GroupHom, Target};
use calabi_gauge::gauge::GaugeAlgebra;
use calabi_gauge::geometry::{asymptotic_rate_probe, CalabiStructure, ComplexStructure};
use calabi_gauge::instantons::classify::{cross_equivalences, lattice_sweep};
use calabi_gauge::instantons::extension::extension_check;
use calabi_gauge::instantons::families::{
    closed_form, completeness, constant_names, cross_check, template, verify_solution, SolutionFamily,
};
use calabi_gauge::instantons::ode::extract_ode;
use calabi_gauge::instantons::InstantonCondition;
use calabi_gauge::scalar::Samples;
use calabi_gauge::su3::{verify_structure_equations, StructureEquationTable};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use report::{Check, Format, RunReport, Table};

#[derive(Parser, Debug)]
#[command(name = "calabi-gauge", version, about = "Invariant instantons on the Calabi manifold T*CP2")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Gauge algebra: u1 or so3.
    #[arg(long, global = true, default_value = "u1")]
    gauge: GaugeAlgebra,
    /// Isotropy weight of the homogeneous bundle.
    #[arg(long, global = true, default_value_t = 2, allow_hyphen_values = true)]
    n: i64,
    /// Instanton family: spin7-I, spin7-J, spin7-K, su4-I, su4-J, su4-K or sp2.
    #[arg(long, global = true, default_value = "spin7-I")]
    family: InstantonCondition,
    #[arg(long = "C0", global = true, default_value_t = 0.0, allow_hyphen_values = true)]
    c0: f64,
    #[arg(long = "C1", global = true, default_value_t = 0.0, allow_hyphen_values = true)]
    c1: f64,
    #[arg(long = "C2", global = true, default_value_t = 0.0, allow_hyphen_values = true)]
    c2: f64,
    #[arg(long = "C3", global = true, default_value_t = 0.0, allow_hyphen_values = true)]
    c3: f64,
    /// Radii at which to evaluate, comma separated.
    #[arg(long, global = true, value_delimiter = ',', default_values_t = [1.5, 2.0, 5.0])]
    r: Vec<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance for numerical comparisons.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Calabi metric, hyperkähler and Cayley form identities.
    Geometry {
        /// Also check the su(3) structure equations.
        #[arg(long)]
        verify: bool,
    },
    /// Homogeneous bundles, their extensions and equivariant map spaces.
    Bundles {
        #[arg(long, num_args = 2, value_names = ["NMIN", "NMAX"], allow_hyphen_values = true, default_values_t = [-4, 4])]
        table: Vec<i64>,
    },
    /// Curvature of a family member.
    Curvature,
    /// Reduced ODE system of an instanton condition.
    DeriveOde,
    /// Integrates the reduced system and compares with the closed form.
    Solve {
        #[arg(long, default_value_t = 2.0)]
        from: f64,
        #[arg(long, default_value_t = 5.0)]
        to: f64,
    },
    /// Substitutes a family member into its condition and checks completeness.
    VerifyFamily,
    /// Decides whether a family member extends over the zero section.
    Extend,
    /// Evaluates all seven conditions and the implications between them.
    Classify {
        /// Also sweep this many random abelian family members.
        #[arg(long, default_value_t = 0)]
        count: usize,
    },
    /// Closed-form coefficients of every abelian family.
    Table,
    /// Runs every check with default settings.
    All,
}

struct Outcome {
    checks: Vec<Check>,
    data: Value,
    table: Option<Table>,
}

impl Outcome {
    fn new(checks: Vec<Check>, data: Value) -> Self {
        Outcome { checks, data, table: None }
    }
}

fn constants(c: &Common) -> Result<Vec<f64>> {
    let names = constant_names(c.family, c.gauge, c.n)?;
    Ok(names
        .iter()
        .map(|name| match *name {
            "C0" => c.c0,
            "C1" => c.c1,
            "C2" => c.c2,
            _ => c.c3,
        })
        .collect())
}

fn family(c: &Common) -> Result<SolutionFamily> {
    Ok(closed_form(c.family, c.gauge, c.n, &constants(c)?)?)
}

fn geometry(verify: bool) -> Outcome {
    let samples = Samples::standard();
    let calabi = CalabiStructure::build();
    let mut checks: Vec<Check> =
        calabi.identities(&samples).into_iter().map(|i| Check::new(i.name, i.passed, i.residual, samples.len())).collect();
    let decay = asymptotic_rate_probe(&[1e2, 1e3, 1e4]);
    checks.push(Check::new("cone decay rate -2", (decay.slope + 2.0).abs() < 1e-2, (decay.slope + 2.0).abs(), 3));
    let mut data = json!({ "decay": decay });
    if verify {
        let report = verify_structure_equations();
        checks.push(Check::new("structure equations", report.passed(), report.mismatches.len() as f64, 8));
        data["structure_equations"] = StructureEquationTable::computed().to_json();
    }
    Outcome::new(checks, data)
}

fn bundles(range: &[i64]) -> Result<Outcome> {
    let (lo, hi) = (range[0], range[1]);
    if lo > hi {
        bail!("empty range {lo}..{hi}");
    }
    let rows = bundle_table(lo, hi);
    let mut consistent = true;
    for n in lo..=hi {
        let any = (-hi.abs().max(lo.abs())..=hi.abs().max(lo.abs()))
            .any(|k| bundle_extends(n, GroupHom::Chi { target: Target::Circle, k }).unwrap_or(false));
        consistent &= any == (n % 2 == 0);
    }
    let table = Table {
        header: ["n", "gauge", "dimension", "extends_to"].map(String::from).to_vec(),
        rows: rows
            .iter()
            .map(|r| vec![r.n.to_string(), r.gauge.tag().into(), r.dimension.to_string(), r.extends_to.clone()])
            .collect(),
    };
    Ok(Outcome {
        checks: vec![Check::new("circle bundle extends iff n even", consistent, 0.0, (hi - lo + 1) as usize)],
        data: serde_json::to_value(&rows)?,
        table: Some(table),
    })
}

fn curvature(c: &Common) -> Result<Outcome> {
    let fam = family(c)?;
    let f = fam.ansatz.curvature()?;
    let samples = Samples::standard();
    let bianchi = fam.ansatz.bianchi_residual(&f)?;
    let norm = f.norm_sq()?;
    let values: Vec<Value> =
        c.r.iter().map(|&r| Ok(json!({"r": r, "norm_sq": f.norm_sq_at(r)?}))).collect::<Result<_>>()?;
    Ok(Outcome::new(
        vec![Check::new("Bianchi identity", bianchi.is_zero(&samples), bianchi.max_abs(&samples), samples.len())],
        json!({
            "connection": fam.ansatz.one_form().pretty(),
            "curvature": f.mc.pretty(),
            "norm_sq": norm.to_prefix(),
            "values": values,
        }),
    ))
}

fn derive_ode(c: &Common) -> Result<Outcome> {
    let sys = extract_ode(c.family, c.gauge, c.n)?;
    let check = Check::new(
        format!("{} equations reduce to {} independent", sys.equations, sys.independent),
        sys.independent == sys.unknowns.len() + sys.constraints.len(),
        0.0,
        Samples::standard().len(),
    );
    Ok(Outcome::new(vec![check], sys.to_json()))
}

fn solve(c: &Common, from: f64, to: f64) -> Result<Outcome> {
    let fam = family(c)?;
    let sys = extract_ode(c.family, c.gauge, c.n)?;
    let x = cross_check(&fam, &sys, from, to)?;
    let dev = x.max_deviation.max(x.constraint_deviation);
    Ok(Outcome::new(
        vec![Check::new("integration matches closed form", dev < c.tol, dev, 101)],
        serde_json::to_value(&x)?,
    ))
}

fn verify_family(c: &Common) -> Result<Outcome> {
    let fam = family(c)?;
    let samples = Samples::standard();
    let v = verify_solution(&fam, &samples)?;
    let mut checks = vec![Check::new(format!("{} residual", v.condition), v.passed, v.residual, v.samples)];
    let mut data = json!({ "verification": v, "constants": fam.constants });
    match completeness(c.family, c.gauge, c.n, c.tol) {
        Ok(comp) => {
            checks.push(Check::new("family is complete", comp.passed, comp.max_deviation, comp.dimension + 1));
            data["completeness"] = serde_json::to_value(&comp)?;
        }
        Err(e) => data["completeness"] = json!({ "skipped": e.to_string() }),
    }
    Ok(Outcome::new(checks, data))
}

fn extend(c: &Common) -> Result<Outcome> {
    let r = extension_check(&family(c)?)?;
    let check = Check::new("slope test agrees with analytic criterion", r.agrees, r.exponent, r.probe.len());
    Ok(Outcome::new(vec![check], serde_json::to_value(&r)?))
}

fn classify(c: &Common, count: usize) -> Result<Outcome> {
    let samples = Samples::spread(12, 1.1, 10.0);
    let fam = family(c)?;
    let cl = cross_equivalences(&fam.ansatz, &samples)?;
    let mut checks: Vec<Check> =
        cl.lattice.iter().map(|l| Check::new(l.statement.clone(), l.holds, 0.0, samples.len())).collect();
    let mut data = json!({ "classification": cl });
    if count > 0 {
        let sweep = lattice_sweep(c.seed, count, &samples)?;
        checks.push(Check::new("random lattice sweep", sweep.violations.is_empty(), sweep.violations.len() as f64, count));
        data["sweep"] = serde_json::to_value(&sweep)?;
    }
    Ok(Outcome::new(checks, data))
}

fn table(c: &Common) -> Result<Outcome> {
    let mut rows = Vec::new();
    for cond in InstantonCondition::ALL {
        let a = template(cond, GaugeAlgebra::U1, c.n)?;
        let l = match cond {
            InstantonCondition::Spin7(l) | InstantonCondition::Su4(l) => l.name().to_string(),
            InstantonCondition::Sp2 => "-".into(),
        };
        let mut row = vec![l, cond.tag()];
        row.extend(a.names().iter().map(|n| a.coefficient(n).map(|f| f.to_prefix()).unwrap_or_default()));
        rows.push(row);
    }
    let header: Vec<String> = ["L", "class", "p0", "p1", "p2"].map(String::from).to_vec();
    let data: Vec<Value> = rows
        .iter()
        .map(|row| Value::Object(header.iter().cloned().zip(row.iter().map(|v| json!(v))).collect()))
        .collect();
    Ok(Outcome { checks: Vec::new(), data: Value::Array(data), table: Some(Table { header, rows }) })
}

fn all(c: &Common) -> Result<Outcome> {
    let mut checks = Vec::new();
    let mut data = serde_json::Map::new();
    let g = geometry(true);
    checks.extend(g.checks);
    data.insert("geometry".into(), g.data);
    let samples = Samples::standard();
    for cond in InstantonCondition::ALL {
        for n in [-2, 2] {
            let k = constant_names(cond, GaugeAlgebra::U1, n)?.len();
            let cs: Vec<f64> = (0..k).map(|i| 0.5 + i as f64).collect();
            let fam = closed_form(cond, GaugeAlgebra::U1, n, &cs)?;
            let v = verify_solution(&fam, &samples)?;
            checks.push(Check::new(format!("{cond} n={n} solves its condition"), v.passed, v.residual, v.samples));
            let e = extension_check(&fam)?;
            checks.push(Check::new(format!("{cond} n={n} extension criterion"), e.agrees, e.exponent, e.probe.len()));
        }
    }
    for l in ComplexStructure::ALL {
        let fam = closed_form(InstantonCondition::Su4(l), GaugeAlgebra::So3, 0, &[1.0, -0.5, 0.25])?;
        let v = verify_solution(&fam, &samples)?;
        checks.push(Check::new(format!("su4-{} on E0 solves its condition", l.name()), v.passed, v.residual, v.samples));
    }
    let sweep = lattice_sweep(c.seed, 50, &Samples::spread(12, 1.1, 10.0))?;
    checks.push(Check::new("random lattice sweep", sweep.violations.is_empty(), sweep.violations.len() as f64, 50));
    data.insert("sweep".into(), serde_json::to_value(&sweep)?);
    Ok(Outcome::new(checks, Value::Object(data)))
}

fn run(cli: &Cli) -> Result<Outcome> {
    let c = &cli.common;
    match &cli.command {
        Command::Geometry { verify } => Ok(geometry(*verify)),
        Command::Bundles { table } => bundles(table),
        Command::Curvature => curvature(c),
        Command::DeriveOde => derive_ode(c),
        Command::Solve { from, to } => solve(c, *from, *to),
        Command::VerifyFamily => verify_family(c),
        Command::Extend => extend(c),
        Command::Classify { count } => classify(c, *count),
        Command::Table => table(c),
        Command::All => all(c),
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Geometry { .. } => "geometry",
        Command::Bundles { .. } => "bundles",
        Command::Curvature => "curvature",
        Command::DeriveOde => "derive-ode",
        Command::Solve { .. } => "solve",
        Command::VerifyFamily => "verify-family",
        Command::Extend => "extend",
        Command::Classify { .. } => "classify",
        Command::Table => "table",
        Command::All => "all",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let report = RunReport {
        schema: report::SCHEMA,
        command: command_name(&cli.command).into(),
        seed: cli.common.seed,
        checks: outcome.checks,
        wall_clock_ms: start.elapsed().as_millis(),
        data: outcome.data,
        table: outcome.table,
    };
    if let Err(e) = report.emit(cli.common.format, cli.common.out.as_deref()) {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
