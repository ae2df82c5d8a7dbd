use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{CampaignConfig, OutputFormat};
use super::generate::{gen_random_annulus, instance_seed};
use super::report::{summarize, BoundReport, TagSummary, BoundTag, REPORT_FORMAT_VERSION};
use super::verify::{
    critical_t1, verify_conformal_volume_bound, verify_free_boundary_identities, verify_supercritical,
    verify_supercritical_closed_form, verify_topological_bound, verify_volume_lower_bounds,
};
use crate::annulus::FlatAnnulus;
use crate::catenoid::{catenoid_mesh, catenoid_param_mesh};
use crate::error::{Error, Result};
use crate::free_boundary::FreeBoundaryThresholds;
use crate::mesh::build_disk_mesh;
use crate::mesh::fixtures::{equatorial_disk, pants, random_embedded_annulus, torus_with_hole};

const RANDOM_ANNULUS_FAMILY: u64 = 1;
const EMBEDDED_ANNULUS_FAMILY: u64 = 2;

/// One unit of work in a campaign.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    RandomAnnulus { index: usize, seed: u64 },
    Pants(usize),
    TorusWithHole,
    Disk { n_r: usize },
    /// Equatorial disk at the finest level: free boundary and chain checks.
    EquatorialDisk { n_r: usize },
    ClosedFormAnnuli,
    Catenoid,
    EmbeddedAnnulus { index: usize, seed: u64 },
}

impl Instance {
    pub fn id(&self) -> String {
        match self {
            Instance::RandomAnnulus { index, .. } => format!("random-annulus-{index:04}"),
            Instance::Pants(v) => format!("pants-{v}"),
            Instance::TorusWithHole => "torus-with-hole".into(),
            Instance::Disk { n_r } => format!("disk-r{n_r}"),
            Instance::EquatorialDisk { n_r } => format!("equatorial-disk-r{n_r}"),
            Instance::ClosedFormAnnuli => "closed-form".into(),
            Instance::Catenoid => "critical-catenoid".into(),
            Instance::EmbeddedAnnulus { index, .. } => format!("embedded-annulus-{index:02}"),
        }
    }
}

/// Instances in report order.
pub fn plan(cfg: &CampaignConfig) -> Vec<Instance> {
    let mut out = Vec::new();
    out.push(Instance::ClosedFormAnnuli);
    for index in 0..cfg.random_annuli {
        let seed = instance_seed(cfg.seed, RANDOM_ANNULUS_FAMILY, index as u64);
        out.push(Instance::RandomAnnulus { index, seed });
    }
    out.extend((0..cfg.pants_fixtures).map(Instance::Pants));
    if cfg.torus_fixture {
        out.push(Instance::TorusWithHole);
    }
    out.extend(cfg.disk_levels.iter().map(|&n_r| Instance::Disk { n_r }));
    if let Some(&n_r) = cfg.disk_levels.iter().max() {
        out.push(Instance::EquatorialDisk { n_r });
    }
    if cfg.catenoid {
        out.push(Instance::Catenoid);
    }
    for index in 0..cfg.embedded_annuli {
        let seed = instance_seed(cfg.seed, EMBEDDED_ANNULUS_FAMILY, index as u64);
        out.push(Instance::EmbeddedAnnulus { index, seed });
    }
    out
}

fn with_seed(reports: Vec<BoundReport>, seed: u64) -> Vec<BoundReport> {
    reports.into_iter().map(|r| r.with("seed", seed)).collect()
}

/// All reports for one instance.
pub fn run_instance(instance: &Instance, cfg: &CampaignConfig) -> Result<Vec<BoundReport>> {
    let id = instance.id();
    let opt = cfg.optimizer();
    let thresholds = FreeBoundaryThresholds::uniform(cfg.free_boundary_tol);
    match *instance {
        Instance::RandomAnnulus { seed, .. } => {
            let mesh = gen_random_annulus(seed, cfg.annulus_n_theta)?;
            let mut out = verify_topological_bound(&id, &mesh, cfg.fem_tol)?;
            out.extend(verify_supercritical(&id, &mesh, cfg.fem_tol)?.report().cloned());
            Ok(with_seed(out, seed))
        }
        Instance::Pants(v) => verify_topological_bound(&id, &pants(v)?, cfg.fem_tol),
        Instance::TorusWithHole => verify_topological_bound(&id, &torus_with_hole(24, 12)?, cfg.fem_tol),
        Instance::Disk { n_r } => verify_topological_bound(&id, &build_disk_mesh(n_r, cfg.disk_n_theta)?, cfg.fem_tol),
        Instance::EquatorialDisk { n_r } => {
            let disk = equatorial_disk(n_r, cfg.disk_n_theta)?;
            let mut out = verify_free_boundary_identities(&id, &disk, &opt, &thresholds, cfg.fem_tol)?;
            out.extend(verify_conformal_volume_bound(&id, &disk, &opt, cfg.fem_tol, cfg.chain_tol)?);
            out.extend(verify_volume_lower_bounds(&id, &disk, &opt, cfg.fem_tol)?);
            Ok(out)
        }
        Instance::ClosedFormAnnuli => {
            let t1 = critical_t1();
            let cases = [
                ("closed-form/critical", FlatAnnulus::new(1.0, 1.0, 2.0 * t1)?),
                ("closed-form/flat-T3", FlatAnnulus::new(1.0, 1.0, 3.0)?),
                ("closed-form/alpha4-T8", FlatAnnulus::new(1.0, 4.0, 8.0)?),
            ];
            Ok(cases
                .iter()
                .filter_map(|(name, m)| {
                    verify_supercritical_closed_form(name, m, cfg.closed_form_tol).report().cloned()
                })
                .collect())
        }
        Instance::Catenoid => {
            let cat = catenoid_mesh(0.0, cfg.catenoid_n_t, cfg.catenoid_n_theta)?;
            let param = catenoid_param_mesh(0.0, cfg.catenoid_n_t, cfg.catenoid_n_theta)?;
            let mut out = verify_topological_bound(&id, &cat.mesh, cfg.fem_tol)?;
            out.extend(verify_supercritical(&format!("{id}/param"), &param, cfg.fem_tol)?.report().cloned());
            out.extend(verify_free_boundary_identities(&id, &cat.mesh, &opt, &thresholds, cfg.fem_tol)?);
            out.extend(verify_conformal_volume_bound(&id, &cat.mesh, &opt, cfg.fem_tol, cfg.chain_tol)?);
            out.extend(verify_volume_lower_bounds(&id, &cat.mesh, &opt, cfg.fem_tol)?);
            Ok(out)
        }
        Instance::EmbeddedAnnulus { seed, .. } => {
            let mesh = random_embedded_annulus(seed, cfg.embedded_n_t, cfg.embedded_n_theta)?;
            let mut out = verify_topological_bound(&id, &mesh, cfg.fem_tol)?;
            out.extend(verify_conformal_volume_bound(&id, &mesh, &opt, cfg.fem_tol, cfg.chain_tol)?);
            out.extend(verify_volume_lower_bounds(&id, &mesh, &opt, cfg.fem_tol)?);
            Ok(with_seed(out, seed))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceError {
    pub id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignOutcome {
    pub version: u32,
    pub seed: u64,
    pub summary: BTreeMap<BoundTag, TagSummary>,
    pub errors: Vec<InstanceError>,
    pub reports: Vec<BoundReport>,
}

impl CampaignOutcome {
    /// No failed report and no instance error.
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.reports.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BoundReport> {
        self.reports.iter().filter(|r| !r.pass)
    }
}

/// Runs every instance of the plan concurrently and collects reports in
/// plan order. Instance errors are recorded, not propagated.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignOutcome> {
    cfg.validate()?;
    let instances = plan(cfg);
    let results: Vec<(String, Result<Vec<BoundReport>>)> = instances
        .par_iter()
        .map(|inst| (inst.id(), run_instance(inst, cfg)))
        .collect();
    let mut reports = Vec::new();
    let mut errors = Vec::new();
    for (id, r) in results {
        match r {
            Ok(rs) => reports.extend(rs),
            Err(e) => errors.push(InstanceError {
                id,
                message: e.to_string(),
            }),
        }
    }
    Ok(CampaignOutcome {
        version: REPORT_FORMAT_VERSION,
        seed: cfg.seed,
        summary: summarize(&reports),
        errors,
        reports,
    })
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<W: Write>(mut w: W, value: &impl Serialize) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::InvalidInput(e.to_string()))?;
    writeln!(w).map_err(|source| Error::Io {
        path: "<output>".into(),
        source,
    })
}

/// One CSV row per report. The first column carries the format version;
/// metadata is embedded as a JSON string.
pub fn write_reports_csv<W: Write>(w: W, reports: &[BoundReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| Error::InvalidInput(format!("csv output: {e}"));
    out.write_record(["version", "id", "tag", "lhs", "rhs", "margin", "tolerance", "strict", "pass", "metadata"])
        .map_err(csv_err)?;
    for r in reports {
        let meta = serde_json::to_string(&r.metadata).map_err(|e| Error::InvalidInput(e.to_string()))?;
        out.write_record([
            REPORT_FORMAT_VERSION.to_string(),
            r.id.clone(),
            r.tag.to_string(),
            format!("{:e}", r.lhs),
            format!("{:e}", r.rhs),
            format!("{:e}", r.margin),
            format!("{:e}", r.tolerance),
            r.strict.to_string(),
            r.pass.to_string(),
            meta,
        ])
        .map_err(csv_err)?;
    }
    out.flush().map_err(|source| Error::Io {
        path: "<output>".into(),
        source,
    })
}

/// Writes a campaign outcome in the configured format.
pub fn write_outcome<W: Write>(w: W, outcome: &CampaignOutcome, format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Json => write_json(w, outcome),
        OutputFormat::Csv => write_reports_csv(w, &outcome.reports),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> CampaignConfig {
        CampaignConfig {
            random_annuli: 2,
            annulus_n_theta: 16,
            pants_fixtures: 1,
            torus_fixture: false,
            disk_levels: vec![4],
            catenoid: true,
            catenoid_n_t: 8,
            catenoid_n_theta: 32,
            embedded_annuli: 1,
            embedded_n_t: 4,
            embedded_n_theta: 16,
            fem_tol: 5e-2,
            optimizer_starts: 4,
            optimizer_max_iterations: 8,
            optimizer_tolerance: 1e-3,
            ..CampaignConfig::default()
        }
    }

    #[test]
    fn plan_is_ordered_and_seeded() {
        let p = plan(&tiny());
        assert_eq!(p[0], Instance::ClosedFormAnnuli);
        let ids: Vec<String> = p.iter().map(Instance::id).collect();
        let mut unique = ids.clone();
        unique.dedup();
        assert_eq!(unique, ids);
        assert_eq!(plan(&tiny()), p);
    }

    #[test]
    fn tiny_campaign_covers_every_tag_and_is_reproducible() {
        let cfg = tiny();
        let a = run_campaign(&cfg).unwrap();
        assert!(a.errors.is_empty(), "{:?}", a.errors);
        for tag in BoundTag::ALL {
            assert!(a.summary.contains_key(&tag), "no report for {tag}");
        }
        assert!(a.passed(), "{:#?}", a.failures().collect::<Vec<_>>());
        let b = run_campaign(&cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let r = vec![BoundReport::new("x", BoundTag::TopologicalBound, 1.0, 2.0, 0.0).with("n", 3)];
        let mut buf = Vec::new();
        write_reports_csv(&mut buf, &r).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("version,id,tag"));
        assert!(lines.next().unwrap().starts_with("1,x,TH2.3,"));
    }
}
