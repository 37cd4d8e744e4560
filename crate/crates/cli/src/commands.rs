use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use hyperdescent::descent::{
    self, canonical_comparison, check_sheaf_on_basis, comparison_is_natural, hypersheaf_suite,
    right_kan_extend, roundtrip_theorem_check, RoundtripConfig, SetPresheaf,
};
use hyperdescent::homotopy::{
    check_coinitial, run_counterexample, verify_sym_coinitiality_instance, Aggregate, CounterexampleFixture,
};
use hyperdescent::hypercover::{cech_from_cover, refine_to_basis, Hypercover};
use hyperdescent::io::{HypercoverFile, PosetMapFile, PresheafFile, SimplicialSetFile, SpaceFile};
use hyperdescent::simplicial::{boundary_of_simplex, standard_simplex, FiniteTypeSimplicialSet};
use hyperdescent::topology::Basis;
use hyperdescent::{FiniteSpace, OpenSet};

use crate::report::Report;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
}

fn load_space(path: &Path) -> Result<(FiniteSpace, Basis)> {
    let file = SpaceFile::parse(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    let space = file.to_space()?;
    let basis = file.to_basis(&space)?;
    Ok((space, basis))
}

fn load_presheaf(space: &FiniteSpace, path: &Path) -> Result<SetPresheaf> {
    let file = PresheafFile::parse(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    Ok(file.to_presheaf(space)?)
}

fn load_hypercover(path: &Path) -> Result<(Hypercover, SpaceFile)> {
    let file = HypercoverFile::parse(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    Ok((file.to_hypercover()?, file.space))
}

/// `a,b,c` as a subset of the space.
fn parse_points(space: &FiniteSpace, text: &str) -> Result<OpenSet> {
    let names: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    Ok(space.subset(names)?)
}

fn names(space: &FiniteSpace, sets: &[OpenSet]) -> Vec<Vec<String>> {
    sets.iter().map(|&s| space.point_names(s)).collect()
}

fn show_all(space: &FiniteSpace, sets: &[OpenSet]) -> String {
    sets.iter().map(|&s| space.show(s)).collect::<Vec<_>>().join(", ")
}

#[derive(Serialize)]
struct TopologyRecord {
    points: Vec<String>,
    opens: Vec<Vec<String>>,
    valid: bool,
    witness: Option<String>,
}

#[derive(Serialize)]
struct BasisRecord {
    members: Vec<Vec<String>>,
    declared: bool,
    valid: bool,
    intersection_stable: Option<bool>,
    witness: Option<String>,
}

pub fn check_topology(report: &mut Report, path: &Path) -> Result<()> {
    let file = SpaceFile::parse(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    let space = file.to_space_unchecked()?;
    let witness = space.verify_topology();
    report.record(
        "topology",
        &TopologyRecord {
            points: space.names().to_vec(),
            opens: names(&space, space.opens()),
            valid: witness.is_none(),
            witness: witness.as_ref().map(|w| w.to_string()),
        },
    )?;
    if let Some(w) = witness {
        report.line(format!("invalid topology: {w}"));
        report.fail();
        return Ok(());
    }
    report.line(format!("valid topology on {} points with {} opens", space.point_count(), space.opens().len()));
    let declared = file.basis.is_some();
    let record = match file.to_basis(&space) {
        Ok(basis) => {
            let stable = basis.is_intersection_stable();
            report.line(format!(
                "{} basis {{{}}}, {}∩-stable",
                if declared { "declared" } else { "minimal" },
                show_all(&space, basis.members()),
                if stable { "" } else { "not " }
            ));
            BasisRecord {
                members: names(&space, basis.members()),
                declared,
                valid: true,
                intersection_stable: Some(stable),
                witness: None,
            }
        }
        Err(e) => {
            report.line(format!("invalid basis: {e}"));
            report.fail();
            BasisRecord {
                members: file.basis.clone().unwrap_or_default(),
                declared,
                valid: false,
                intersection_stable: None,
                witness: Some(e.to_string()),
            }
        }
    };
    report.record("basis", &record)
}

pub fn minimal_basis(report: &mut Report, path: &Path, output: Option<&Path>) -> Result<()> {
    let (space, _) = load_space(path)?;
    let basis = space.minimal_basis();
    report.line(format!("minimal basis: {}", show_all(&space, basis.members())));
    report.record(
        "minimal_basis",
        &serde_json::json!({
            "members": names(&space, basis.members()),
            "intersection_stable": basis.is_intersection_stable(),
        }),
    )?;
    if let Some(out) = output {
        write_json(out, &SpaceFile::from_space(&space, Some(&basis)))?;
    }
    Ok(())
}

fn record_check(report: &mut Report, h: &Hypercover, n_max: usize) -> Result<()> {
    let check = h.check(n_max)?;
    let space = h.space();
    match &check.failure {
        None => report.line(format!("covering condition holds through dimension {}", check.checked_up_to)),
        Some(w) => {
            report.line(format!("covering condition fails: {}", w.describe(space)));
            report.fail();
        }
    }
    report.record(
        "hypercover_check",
        &serde_json::json!({
            "target": space.point_names(h.target()),
            "simplices": (0..=h.spine().max_dim()).map(|d| h.spine().count(d)).collect::<Vec<_>>(),
            "checked_up_to": check.checked_up_to,
            "holds": check.holds(),
            "witness": check.failure.as_ref().map(|w| w.record(space)),
        }),
    )
}

pub fn cech(
    report: &mut Report,
    path: &Path,
    covers: &[String],
    target: Option<&str>,
    trunc: usize,
    output: Option<&Path>,
) -> Result<()> {
    let (space, _) = load_space(path)?;
    if covers.is_empty() {
        bail!("at least one --cover is required");
    }
    let opens = covers.iter().map(|c| parse_points(&space, c)).collect::<Result<Vec<_>>>()?;
    let target = match target {
        Some(t) => parse_points(&space, t)?,
        None => space.full(),
    };
    let h = cech_from_cover(&space, target, &opens, trunc)?;
    report.line(format!("Čech nerve of {{{}}} over {}", show_all(&space, &opens), space.show(target)));
    for d in 0..=h.spine().max_dim().min(1) {
        for (id, &o) in h.assignment()[d].iter().enumerate() {
            report.line(format!("  {d}-simplex {}: {}", h.spine().label(d, id), space.show(o)));
        }
    }
    record_check(report, &h, trunc)?;
    let file = HypercoverFile::from_hypercover(&h);
    if report.passed() {
        if let Some(out) = output {
            write_json(out, &file)?;
        }
    }
    report.record("cech", &file)
}

pub fn check_hypercover(report: &mut Report, path: &Path, trunc: Option<usize>) -> Result<()> {
    let (h, _) = load_hypercover(path)?;
    let n = trunc.unwrap_or_else(|| h.default_check_bound());
    record_check(report, &h, n)
}

pub fn refine(report: &mut Report, path: &Path, trunc: usize, output: Option<&Path>) -> Result<()> {
    let (h, space_file) = load_hypercover(path)?;
    let basis = space_file.to_basis(h.space())?;
    let r = refine_to_basis(&h, &basis, trunc)?;
    let space = h.space();
    let basis_valued = r.hypercover().assignment().iter().flatten().all(|&o| basis.contains(o));
    let projection = r.check_projection();
    report.line(format!(
        "refined over basis {{{}}}: simplices per level {:?}",
        show_all(space, basis.members()),
        r.level_cardinalities()
    ));
    report.require(basis_valued);
    if let Err(e) = &projection {
        report.line(format!("projection check fails: {e}"));
        report.fail();
    }
    record_check(report, r.hypercover(), trunc)?;
    report.record(
        "refine",
        &serde_json::json!({
            "basis": names(space, basis.members()),
            "levels": r.level_cardinalities(),
            "basis_valued": basis_valued,
            "projection_witness": projection.err(),
        }),
    )?;
    if let Some(out) = output {
        write_json(out, &HypercoverFile::from_hypercover(r.hypercover()))?;
    }
    Ok(())
}

pub fn check_sheaf(report: &mut Report, space_path: &Path, presheaf: &Path) -> Result<()> {
    let (space, basis) = load_space(space_path)?;
    let f = load_presheaf(&space, presheaf)?;
    let witness = check_sheaf_on_basis(&f, &basis)?;
    match &witness {
        None => report.line("sheaf condition holds on every basis cover"),
        Some(w) => {
            report.line(format!("sheaf condition fails on a cover of {}: {:?}", w.target.join(""), w.failure));
            report.fail();
        }
    }
    report.record("sheaf", &serde_json::json!({ "holds": witness.is_none(), "witness": witness }))
}

pub fn check_hypersheaf(report: &mut Report, space_path: &Path, presheaf: &Path, trunc: usize) -> Result<()> {
    let (space, basis) = load_space(space_path)?;
    let f = load_presheaf(&space, presheaf)?;
    let suite = hypersheaf_suite(&basis, trunc)?;
    let witness = descent::check_hypersheaf(&f, &suite)?;
    match &witness {
        None => report.line(format!("descent holds along all {} suite hypercovers", suite.len())),
        Some(w) => {
            report.line(format!("descent fails along {}: {:?}", w.hypercover, w.failure));
            report.fail();
        }
    }
    report.record(
        "hypersheaf",
        &serde_json::json!({ "suite_size": suite.len(), "holds": witness.is_none(), "witness": witness }),
    )
}

pub fn kan_extend(report: &mut Report, space_path: &Path, presheaf: &Path, output: Option<&Path>) -> Result<()> {
    let (space, basis) = load_space(space_path)?;
    let f = load_presheaf(&space, presheaf)?;
    let ext = right_kan_extend(&f, &basis)?;
    let comparison = canonical_comparison(&f, &ext)?;
    let natural = comparison_is_natural(&f, &ext)?;
    for (u, values) in ext.presheaf().values() {
        report.line(format!("  {}: {} elements", space.show(u), values.len()));
    }
    if let Some((u, failure)) = &comparison {
        report.line(format!("restriction back to {} is not a bijection: {failure:?}", space.show(*u)));
        report.fail();
    }
    if let Some((u, v)) = natural {
        report.line(format!("comparison is not natural along {} ⊇ {}", space.show(u), space.show(v)));
        report.fail();
    }
    let file = PresheafFile::from_presheaf(ext.presheaf());
    report.record(
        "kan_extension",
        &serde_json::json!({
            "extension": file,
            "comparison_witness": comparison.map(|(u, w)| serde_json::json!({ "open": space.point_names(u), "failure": w })),
            "naturality_witness": natural.map(|(u, v)| [space.point_names(u), space.point_names(v)]),
        }),
    )?;
    if let Some(out) = output {
        write_json(out, &file)?;
    }
    Ok(())
}

pub fn roundtrip(report: &mut Report, path: &Path, config: RoundtripConfig, claimed: &[PathBuf]) -> Result<()> {
    let (space, basis) = load_space(path)?;
    let claimed = claimed.iter().map(|p| load_presheaf(&space, p)).collect::<Result<Vec<_>>>()?;
    let r = roundtrip_theorem_check(&basis, &config, &claimed)?;
    report.line(format!(
        "basis: {} of {} presheaves are hypersheaves (suite {}); O(X): {} of {} (suite {})",
        r.basis_hypersheaves, r.basis_presheaves, r.basis_suite_size, r.space_hypersheaves, r.space_presheaves, r.space_suite_size
    ));
    if !claimed.is_empty() {
        report.line(format!("{} of {} claimed presheaves are hypersheaves", r.claimed_hypersheaves, claimed.len()));
    }
    for failure in &r.failures {
        report.line(format!("  failure at {} (presheaf {}): {}", failure.stage, failure.presheaf, failure.detail));
    }
    report.require(r.passed());
    report.record("roundtrip", &r)
}

pub fn coinitial(report: &mut Report, path: &Path, degree: usize) -> Result<()> {
    let file: PosetMapFile = serde_json::from_str(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    let map = file.to_map()?;
    let r = check_coinitial(&map, degree)?;
    for v in &r.verdicts {
        report.line(format!("  comma over {} ({} objects): {:?}", v.object, v.comma.len(), v.verdict));
    }
    report.line(format!("aggregate: {:?}", r.aggregate));
    report.require(r.aggregate == Aggregate::Coinitial);
    report.record("coinitial", &r)
}

fn builtin_complex(name: &str) -> Result<Option<FiniteTypeSimplicialSet>> {
    let Some((kind, n)) = name.split_once(':') else { return Ok(None) };
    let n: usize = match n.parse() {
        Ok(n) => n,
        Err(_) => return Ok(None),
    };
    match kind {
        "simplex" => Ok(Some(standard_simplex(n))),
        "boundary" if n >= 1 => Ok(Some(boundary_of_simplex(n))),
        "boundary" => bail!("boundary:0 is empty"),
        _ => Ok(None),
    }
}

pub fn sym_coinitial(report: &mut Report, complex: &str, levels: usize, degree: usize) -> Result<()> {
    let k = match builtin_complex(complex)? {
        Some(k) => k,
        None => {
            let path = Path::new(complex);
            let file: SimplicialSetFile =
                serde_json::from_str(&read(path)?).with_context(|| format!("in {}", path.display()))?;
            file.to_complex()?
        }
    };
    let r = verify_sym_coinitiality_instance(&k, levels, degree)?;
    let certified = r.slices.iter().filter(|s| s.verdict.is_contractible()).count();
    report.line(format!(
        "{} slices through level {levels}: {certified} certified contractible, {} obstructed",
        r.slices.len(),
        r.obstructed
    ));
    for s in r.slices.iter().filter(|s| !s.verdict.is_contractible()) {
        report.line(format!("  level {} class {}: {:?}", s.level, s.class, s.verdict));
    }
    report.require(r.obstructed == 0);
    report.record("sym_coinitial", &r)
}

pub fn counterexample(report: &mut Report, fixture: Option<&Path>, degree: usize) -> Result<()> {
    let fixture = match fixture {
        None => CounterexampleFixture::standard(),
        Some(path) => {
            let file: PosetMapFile =
                serde_json::from_str(&read(path)?).with_context(|| format!("in {}", path.display()))?;
            file.to_fixture()?
        }
    };
    let r = run_counterexample(&fixture, degree)?;
    report.line(format!("I → J: {:?}", r.base.aggregate));
    report.line(format!("I/{} → J/f({}): {:?}", r.v, r.v, r.induced.aggregate));
    match &r.empty_comma_witness {
        Some(w) => report.line(format!("empty comma category over {w}")),
        None => report.line("no empty comma category"),
    }
    report.require(r.reproduced);
    report.record("counterexample", &r)
}
