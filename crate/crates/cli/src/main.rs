use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use lattice_forge::atlas::{parse_vector, Catalog, CatalogEntry};
use lattice_forge::classify::{complement_form_check, ClassifierContext};
use lattice_forge::coxeter::parabolic_subdiagrams;
use lattice_forge::disc::{two_elementary_invariants, identify_two_elementary, DiscriminantForm, DEFAULT_CENSUS_BOUND};
use lattice_forge::disc_group::{orbits_on_classes, GroupSpec};
use lattice_forge::matrix::{parse_rat, rat_string};
use lattice_forge::niemeier::{self, GenusOptions, CACHE_ENV, DATA_ENV};
use lattice_forge::roots::{identify_ade, short_vectors};
use lattice_forge::verify::{paper_verify_with, VerifyOptions, ITEMS};
use lattice_forge::vinberg::{vinberg_run, VinbergConfig};
use lattice_forge::{make_standard, GramLattice};
use num_rational::Ratio;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "lattice-forge", version, about = "Even lattices, discriminant forms, reflection groups and the double-plane K3 atlas")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Catalog file (JSON) replacing the built-in catalog.
    #[arg(long, global = true, value_name = "FILE")]
    catalog: Option<PathBuf>,
    /// Data root; glue files are read from its `niemeier/` subdirectory.
    #[arg(long, global = true, env = DATA_ENV, value_name = "DIR")]
    data_dir: Option<PathBuf>,
    /// Cache directory for genus-table rows.
    #[arg(long, global = true, env = CACHE_ENV, value_name = "DIR")]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct LatticeArg {
    /// A JSON lattice file, a catalog name (S, T, M_v, L_K3, ...) or an expression such as `U+E8+A1^2`.
    #[arg(long, short = 'l')]
    lattice: String,
}

#[derive(Subcommand)]
enum Command {
    /// Discriminant form: invariant factors, generators, q values and census.
    Disc {
        #[command(flatten)]
        lattice: LatticeArg,
        /// Expected census, e.g. `0:6,1:10,1/2:10,3/2:6`.
        #[arg(long)]
        expect_census: Option<String>,
    },
    /// Rank, determinant, signature, parity and Nikulin invariants.
    Invariants {
        #[command(flatten)]
        lattice: LatticeArg,
        /// Expected Nikulin triple, e.g. `((2,15),5,1)`.
        #[arg(long)]
        expect: Option<String>,
    },
    /// Orthogonal complement of the span of some vectors.
    Complement {
        #[command(flatten)]
        lattice: LatticeArg,
        /// Vectors separated by `;`, as coordinates or named combinations.
        #[arg(long)]
        vectors: String,
    },
    /// Roots of a negative definite lattice.
    Roots {
        #[command(flatten)]
        lattice: LatticeArg,
        /// Also count vectors of this norm.
        #[arg(long, allow_hyphen_values = true)]
        norm: Option<i64>,
        /// Expected root system, e.g. `E8+A1^5`.
        #[arg(long)]
        expect: Option<String>,
    },
    /// Δ label of a −2 vector or I label of an isotropic vector.
    Classify {
        #[command(flatten)]
        lattice: LatticeArg,
        #[arg(long)]
        vector: String,
        /// Vector whose half marks the class ξ, e.g. `r1` in T.
        #[arg(long)]
        marked: Option<String>,
        #[arg(long)]
        expect: Option<String>,
    },
    /// Orbits of O(q) on discriminant classes.
    Orbits {
        #[command(flatten)]
        lattice: LatticeArg,
        /// Only classes with this q value in [0, 2).
        #[arg(long)]
        q: Option<String>,
        /// Use the stabilizer of the class of this vector divided by 2.
        #[arg(long)]
        stabilizer: Option<String>,
        #[arg(long)]
        expect_count: Option<usize>,
    },
    /// Vinberg's algorithm on a hyperbolic lattice.
    Vinberg {
        #[command(flatten)]
        lattice: LatticeArg,
        /// Controlling vector, e.g. `e+f`.
        #[arg(long)]
        controller: String,
        /// Allowed root norms, comma separated.
        #[arg(long, default_value = "-2,-4", allow_hyphen_values = true)]
        norms: String,
        /// Stop once the squared height exceeds this.
        #[arg(long, default_value = "10000")]
        max_height_sq: String,
        #[arg(long, default_value_t = 128)]
        max_roots: usize,
        /// Print the Coxeter diagram in Graphviz DOT format.
        #[arg(long)]
        dot: bool,
    },
    /// Complements of E7⊕A1^4 and E7⊕D4 in four Niemeier lattices.
    Niemeier {
        /// Include entries repeated from earlier rows.
        #[arg(long)]
        all: bool,
    },
    /// Run every check of the atlas.
    Verify {
        /// Restrict to these item ids (comma separated).
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
    /// List catalog entries, or write the catalog as JSON.
    Catalog {
        #[arg(long, value_name = "FILE")]
        write: Option<PathBuf>,
    },
}

struct Ctx {
    json: bool,
    catalog: Catalog,
    data_dir: PathBuf,
    cache_dir: Option<PathBuf>,
}

struct Resolved {
    lattice: GramLattice,
    entry: Option<CatalogEntry>,
}

impl Resolved {
    fn vector(&self, text: &str) -> Result<Vec<i64>> {
        let v = match &self.entry {
            Some(e) => e.vector(text)?,
            None => parse_vector(text, self.lattice.rank(), |_| None)?,
        };
        Ok(v)
    }
}

impl Ctx {
    fn resolve(&self, arg: &LatticeArg) -> Result<Resolved> {
        let p = Path::new(&arg.lattice);
        if p.is_file() {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let lattice: GramLattice = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            return Ok(Resolved { lattice, entry: None });
        }
        if let Ok(e) = self.catalog.get(&arg.lattice) {
            return Ok(Resolved { lattice: e.lattice.clone(), entry: Some(e.clone()) });
        }
        let lattice = make_standard(&arg.lattice).map_err(|e| anyhow!("`{}` is not a file, catalog name or lattice expression: {e}", arg.lattice))?;
        Ok(Resolved { lattice, entry: None })
    }

    fn emit(&self, value: &Value, text: String) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(value).expect("json"));
        } else {
            print!("{text}");
        }
    }
}

fn status(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_catalog(path: Option<&Path>) -> Result<Catalog> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing catalog {}", p.display()))
        }
        None => Ok(Catalog::standard()?),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let catalog = load_catalog(cli.catalog.as_deref())?;
    let ctx = Ctx {
        json: cli.json,
        catalog,
        data_dir: cli.data_dir.map(|d| d.join("niemeier")).unwrap_or_else(niemeier::default_data_dir),
        cache_dir: Some(cli.cache_dir.unwrap_or_else(niemeier::default_cache_dir)),
    };
    if !matches!(cli.command, Command::Verify { .. } | Command::Catalog { .. }) {
        let check = ctx.catalog.validate();
        if !check.holds() {
            bail!("catalog self-check failed: {}", check.failures.join("; "));
        }
    }
    match cli.command {
        Command::Disc { lattice, expect_census } => disc(&ctx, &lattice, expect_census),
        Command::Invariants { lattice, expect } => invariants(&ctx, &lattice, expect),
        Command::Complement { lattice, vectors } => complement(&ctx, &lattice, &vectors),
        Command::Roots { lattice, norm, expect } => roots(&ctx, &lattice, norm, expect),
        Command::Classify { lattice, vector, marked, expect } => classify(&ctx, &lattice, &vector, marked, expect),
        Command::Orbits { lattice, q, stabilizer, expect_count } => orbits(&ctx, &lattice, q, stabilizer, expect_count),
        Command::Vinberg { lattice, controller, norms, max_height_sq, max_roots, dot } => {
            vinberg(&ctx, &lattice, &controller, &norms, &max_height_sq, max_roots, dot)
        }
        Command::Niemeier { all } => niemeier_table(&ctx, all),
        Command::Verify { only } => verify(&ctx, only),
        Command::Catalog { write } => list_catalog(&ctx, write),
    }
}

fn disc(ctx: &Ctx, arg: &LatticeArg, expect: Option<String>) -> Result<ExitCode> {
    let r = ctx.resolve(arg)?;
    let d = DiscriminantForm::new(&r.lattice)?;
    let census = d.census_strings(DEFAULT_CENSUS_BOUND).ok();
    let mut pass = true;
    if let Some(want) = &expect {
        let want: BTreeMap<String, u64> = want
            .split(',')
            .map(|kv| {
                let (k, v) = kv.split_once(':').ok_or_else(|| anyhow!("census entries look like `q:count`"))?;
                Ok((rat_string(&parse_rat(k.trim())?), v.trim().parse::<u64>()?))
            })
            .collect::<Result<_>>()?;
        pass = census.as_ref() == Some(&want);
    }
    let mut v = d.to_json();
    v["census"] = json!(census);
    v["lattice"] = json!(r.lattice.label());
    let mut text = format!("{}: A_L of order {} with invariant factors {:?}\n", r.lattice.label(), d.order(), d.invariant_factors());
    for (i, q) in v["generator_q"].as_array().into_iter().flatten().enumerate() {
        text.push_str(&format!("  x{} q = {}\n", i + 1, q.as_str().unwrap_or("")));
    }
    match &census {
        Some(c) => text.push_str(&format!("census {}\n", c.iter().map(|(k, n)| format!("{k}:{n}")).collect::<Vec<_>>().join(" "))),
        None => text.push_str("census skipped (group too large)\n"),
    }
    if expect.is_some() {
        v["expected_census_matches"] = json!(pass);
        text.push_str(&format!("expected census {}\n", if pass { "matches" } else { "DIFFERS" }));
    }
    ctx.emit(&v, text);
    Ok(status(pass))
}

fn invariants(ctx: &Ctx, arg: &LatticeArg, expect: Option<String>) -> Result<ExitCode> {
    let r = ctx.resolve(arg)?;
    let l = &r.lattice;
    let b = l.basic_invariants();
    let sig = l.signature();
    let two = two_elementary_invariants(l).ok();
    let names: Vec<&str> = ctx.catalog.names();
    let ident = identify_two_elementary(l, &ctx.catalog.candidates(&names)).ok().and_then(|i| i.name);
    let mut pass = true;
    if let Some(want) = &expect {
        pass = two.map(|t| t.to_string()) == Some(want.replace(' ', ""));
    }
    let v = json!({
        "lattice": l.label(),
        "rank": b.rank,
        "determinant": b.determinant.to_string(),
        "signature": sig,
        "even": b.is_even,
        "unimodular": b.is_unimodular,
        "two_elementary": two.map(|t| t.to_string()),
        "identified": ident,
        "expectation_met": expect.as_ref().map(|_| pass),
    });
    let mut text = format!("{}: rank {}, det {}, signature {sig}, {}\n", l.label(), b.rank, b.determinant, if b.is_even { "even" } else { "odd" });
    if let Some(t) = two {
        text.push_str(&format!("2-elementary {t}"));
        if let Some(n) = &ident {
            text.push_str(&format!(", same invariants as catalog {n}"));
        }
        text.push('\n');
    }
    if expect.is_some() {
        text.push_str(&format!("expected invariants {}\n", if pass { "match" } else { "DIFFER" }));
    }
    ctx.emit(&v, text);
    Ok(status(pass))
}

fn complement(ctx: &Ctx, arg: &LatticeArg, vectors: &str) -> Result<ExitCode> {
    let r = ctx.resolve(arg)?;
    let sub: Vec<Vec<i64>> = vectors.split(';').filter(|s| !s.trim().is_empty()).map(|s| r.vector(s)).collect::<Result<_>>()?;
    let perp = r.lattice.orthogonal_complement(&sub)?;
    let c = &perp.lattice;
    let two = two_elementary_invariants(c).ok().map(|t| t.to_string());
    let d = DiscriminantForm::new(c)?;
    let witness = if r.lattice.determinant().abs() == 1 { Some(complement_form_check(&sub, &r.lattice)?) } else { None };
    let pass = witness.as_ref().is_none_or(|w| w.holds());
    let v = json!({
        "basis": perp.embedding.to_rows(),
        "gram": c.gram().to_rows(),
        "signature": c.signature(),
        "invariant_factors": d.invariant_factors(),
        "two_elementary": two,
        "form_check": witness.as_ref().map(|w| json!({ "negates_q": w.negates_q, "bijective": w.bijective })),
    });
    let mut text = format!("complement of rank {}, signature {}, invariant factors {:?}\n", c.rank(), c.signature(), d.invariant_factors());
    if let Some(t) = &two {
        text.push_str(&format!("2-elementary {t}\n"));
    }
    if let Some(w) = &witness {
        text.push_str(&format!("q on the complement is −q on the span: {}\n", w.holds()));
    }
    for row in perp.embedding.to_rows() {
        text.push_str(&format!("  {row:?}\n"));
    }
    ctx.emit(&v, text);
    Ok(status(pass))
}

fn roots(ctx: &Ctx, arg: &LatticeArg, norm: Option<i64>, expect: Option<String>) -> Result<ExitCode> {
    let r = ctx.resolve(arg)?;
    if !r.lattice.is_negative_definite() {
        bail!("roots needs a negative definite lattice");
    }
    let ty = identify_ade(&r.lattice)?;
    let count = ty.root_count();
    let extra = norm.map(|k| short_vectors(&r.lattice, k).map(|s| s.len())).transpose()?;
    let pass = match &expect {
        Some(w) => ty == w.parse()?,
        None => true,
    };
    let v = json!({ "root_system": ty.to_string(), "pretty": ty.pretty(), "roots": count, "norm": norm, "vectors_of_norm": extra, "expectation_met": expect.as_ref().map(|_| pass) });
    let mut text = format!("root system {} with {count} roots\n", ty.pretty());
    if let (Some(k), Some(n)) = (norm, extra) {
        text.push_str(&format!("{n} vectors of norm {k}\n"));
    }
    ctx.emit(&v, text);
    Ok(status(pass))
}

fn classify(ctx: &Ctx, arg: &LatticeArg, vector: &str, marked: Option<String>, expect: Option<String>) -> Result<ExitCode> {
    let r = ctx.resolve(arg)?;
    let v = r.vector(vector)?;
    let cc = ClassifierContext::new(&r.lattice)?;
    let mark = marked.as_deref().map(|m| r.vector(m).and_then(|w| Ok(cc.form().class_of_fraction(&w, 2)?))).transpose()?;
    let norm = r.lattice.norm(&v);
    let label = match norm {
        -2 => cc.classify_minus2(&v, mark.as_ref())?.to_string(),
        0 => cc.classify_isotropic(&v, mark.as_ref())?.to_string(),
        n => bail!("classify takes −2 or isotropic vectors, got norm {n}"),
    };
    let pass = expect.as_ref().is_none_or(|e| *e == label);
    let out = json!({ "vector": v, "norm": norm, "divisibility": r.lattice.divisibility(&v)?, "label": label, "marked": marked, "expectation_met": expect.as_ref().map(|_| pass) });
    ctx.emit(&out, format!("{label}\n"));
    Ok(status(pass))
}

fn orbits(ctx: &Ctx, arg: &LatticeArg, q: Option<String>, stabilizer: Option<String>, expect: Option<usize>) -> Result<ExitCode> {
    let r = ctx.resolve(arg)?;
    let cc = ClassifierContext::new(&r.lattice)?;
    let d = cc.form();
    let spec = match &stabilizer {
        Some(s) => GroupSpec::Stabilizer(d.class_of_fraction(&r.vector(s)?, 2)?),
        None => GroupSpec::Full,
    };
    let want_q = q.as_deref().map(parse_rat).transpose()?;
    let orbits = orbits_on_classes(d, cc.group(), &spec, |x| want_q.as_ref().is_none_or(|w| d.q_value(x).map(|v| &v == w).unwrap_or(false)))?;
    let rows: Vec<Value> = orbits
        .iter()
        .map(|o| {
            let qv = d.q_value(&o[0]).map(|x| rat_string(&x)).unwrap_or_default();
            json!({ "size": o.len(), "q": qv, "members": o.iter().map(|c| c.coeffs().to_vec()).collect::<Vec<_>>() })
        })
        .collect();
    let pass = expect.is_none_or(|n| n == orbits.len());
    let v = json!({ "group_order": cc.group().order(), "orbits": rows, "count": orbits.len(), "expectation_met": expect.map(|_| pass) });
    let mut text = format!("|O(q)| = {}, {} orbits\n", cc.group().order(), orbits.len());
    for row in &rows {
        text.push_str(&format!("  size {} q {}\n", row["size"], row["q"].as_str().unwrap_or("")));
    }
    ctx.emit(&v, text);
    Ok(status(pass))
}

fn vinberg(ctx: &Ctx, arg: &LatticeArg, controller: &str, norms: &str, max_h: &str, max_roots: usize, dot: bool) -> Result<ExitCode> {
    let r = ctx.resolve(arg)?;
    let x = r.vector(controller)?;
    let norms: Vec<i64> = norms.split(',').map(|s| s.trim().parse::<i64>()).collect::<std::result::Result<_, _>>()?;
    let h = parse_rat(max_h)?;
    let h = Ratio::new(h.numer().try_into().map_err(|_| anyhow!("height bound too large"))?, h.denom().try_into().map_err(|_| anyhow!("height bound too large"))?);
    let cfg = VinbergConfig::new(x).with_norms(&norms).with_max_height_sq(h).with_max_roots(max_roots);
    let run = vinberg_run(&r.lattice, &cfg)?;
    let d = run.diagram(&r.lattice)?;
    if dot {
        print!("{}", d.to_dot());
        return Ok(status(run.is_complete()));
    }
    let report = parabolic_subdiagrams(&d);
    let mut v = run.to_json();
    v["parabolic_classes"] = json!(report.classes);
    let mut text = format!("{} roots, {} at height 0, status {}\n", run.roots.len(), run.height_zero, if run.is_complete() { "complete (finite volume)" } else { "inconclusive" });
    for (i, root) in run.roots.iter().enumerate() {
        text.push_str(&format!("  r{i:<3} norm {:>3} (x, x̄) = {:<3} {:?}\n", root.norm, root.pairing, root.vector));
    }
    for (name, n) in &report.classes {
        text.push_str(&format!("  parabolic {name} × {n}\n"));
    }
    ctx.emit(&v, text);
    Ok(status(run.is_complete()))
}

fn niemeier_table(ctx: &Ctx, all: bool) -> Result<ExitCode> {
    let opts = GenusOptions { data_dir: ctx.data_dir.clone(), cache_dir: ctx.cache_dir.clone() };
    let table = niemeier::genus_table_with(&opts)?;
    let mut v = serde_json::to_value(&table)?;
    if !all {
        for row in v["rows"].as_array_mut().into_iter().flatten() {
            for g in ["g1", "g2"] {
                if let Some(list) = row[g].as_array_mut() {
                    list.retain(|e| !e["repeated"].as_bool().unwrap_or(false));
                }
            }
        }
    }
    v["genus_consistent"] = json!(table.genus_consistent());
    ctx.emit(&v, table.render_text());
    Ok(status(table.genus_consistent()))
}

fn verify(ctx: &Ctx, only: Vec<String>) -> Result<ExitCode> {
    for o in &only {
        if !ITEMS.iter().any(|(id, _)| id == o) {
            bail!("unknown item `{o}`; known: {}", ITEMS.iter().map(|(id, _)| *id).collect::<Vec<_>>().join(", "));
        }
    }
    let opts = VerifyOptions { catalog: ctx.catalog.clone(), data_dir: ctx.data_dir.clone(), cache_dir: ctx.cache_dir.clone(), only };
    let report = paper_verify_with(&opts);
    ctx.emit(&report.to_json(), report.render_text());
    Ok(ExitCode::from(report.exit_code() as u8))
}

fn list_catalog(ctx: &Ctx, write: Option<PathBuf>) -> Result<ExitCode> {
    if let Some(p) = write {
        std::fs::write(&p, serde_json::to_string_pretty(&ctx.catalog)?).with_context(|| format!("writing {}", p.display()))?;
        return Ok(ExitCode::SUCCESS);
    }
    let check = ctx.catalog.validate();
    let rows: Vec<Value> = ctx
        .catalog
        .entries
        .iter()
        .map(|e| json!({ "name": e.name, "expression": e.expression, "rank": e.lattice.rank(), "distinguished": e.distinguished.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(), "notes": e.notes }))
        .collect();
    let mut text = String::new();
    for e in &ctx.catalog.entries {
        text.push_str(&format!("{:<6} {:<20} {}\n", e.name, e.expression, e.notes));
    }
    text.push_str(&format!("self-check: {}\n", if check.holds() { "ok".to_string() } else { check.failures.join("; ") }));
    ctx.emit(&json!({ "entries": rows, "self_check": check }), text);
    Ok(status(check.holds()))
}
