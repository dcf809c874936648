//! Report bundles: every number carries how it was obtained, tables are
//! sorted by their index, and the JSON form round-trips exactly.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cocycle::{Analysis, TableRow};
use crate::error::Result;
use crate::flow::{ContinuousCertificate, FlowSplitting, TimeRow};
use crate::scenario::ScenarioConfig;
use crate::subspace::Subspace;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Read off a computation on the samples.
    Measured,
    /// Produced by a fit or an envelope over measured tables.
    Fitted,
    /// A closed-form bound evaluated at measured or fitted inputs.
    ClosedFormBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub provenance: Provenance,
    /// Name of the index column: `n` for steps, `t` for times.
    pub index: String,
    pub rows: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub scenario: String,
    /// SHA-256 of the canonical JSON of the validated config.
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointBundle {
    pub x: Vec<f64>,
    /// Orthonormal basis columns of `E(x)`.
    pub e: Vec<Vec<f64>>,
    pub f: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStatus {
    pub dominated: bool,
    pub verified: bool,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub run: RunInfo,
    pub status: RunStatus,
    pub quantities: BTreeMap<String, Quantity>,
    pub tables: BTreeMap<String, Table>,
    pub splitting: Vec<PointBundle>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    CsvTables,
}

impl ReportBundle {
    pub fn new(run: RunInfo) -> ReportBundle {
        ReportBundle {
            run,
            status: RunStatus::default(),
            quantities: BTreeMap::new(),
            tables: BTreeMap::new(),
            splitting: Vec::new(),
        }
    }

    pub fn for_config(cfg: &ScenarioConfig) -> ReportBundle {
        ReportBundle::new(RunInfo {
            scenario: cfg.name.clone(),
            config_hash: cfg.hash(),
            seed: cfg.seed,
            version: VERSION.to_string(),
        })
    }

    /// Records a finite value; non-finite ones are noted instead, since
    /// JSON has no representation for them.
    pub fn put(&mut self, name: &str, value: f64, provenance: Provenance) {
        if value.is_finite() {
            self.quantities.insert(name.to_string(), Quantity { value, provenance });
        } else {
            self.status.notes.push(format!("{name} is not finite ({value})"));
        }
    }

    pub fn put_table(&mut self, name: &str, index: &str, rows: impl IntoIterator<Item = (f64, f64)>, p: Provenance) {
        let mut rows: Vec<[f64; 2]> =
            rows.into_iter().filter(|r| r.0.is_finite() && r.1.is_finite()).map(|r| [r.0, r.1]).collect();
        rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
        self.tables.insert(name.to_string(), Table { provenance: p, index: index.to_string(), rows });
    }

    fn put_steps(&mut self, name: &str, rows: &[TableRow], p: Provenance) {
        self.put_table(name, "n", rows.iter().map(|r| (r.n as f64, r.value)), p);
    }

    fn put_times(&mut self, name: &str, rows: &[TimeRow], p: Provenance) {
        self.put_table(name, "t", rows.iter().map(|r| (r.t, r.value)), p);
    }

    pub fn add_analysis(&mut self, a: &Analysis) {
        use Provenance::*;
        let c = &a.certificate;
        self.status.dominated = c.pass;
        self.status.verified = a.verified();
        self.status.notes.extend(c.diagnosis.iter().cloned());
        self.put("k", c.k as f64, Measured);
        self.put("tau_fit", c.tau_fit, Fitted);
        self.put("k_fit", c.k_fit, Fitted);
        self.put("k_least_squares", c.k_least_squares, Fitted);
        self.put("fit_rms", c.fit_rms, Fitted);
        self.put("ratio_at_zero", c.ratio_at_zero, Measured);
        self.put_steps("domination_table", &c.per_n_ratios, Measured);
        if let Some(s) = &a.splitting {
            self.put_steps("convergence_table", &s.convergence_table, Measured);
            self.put_steps("lower_convergence_table", &s.lower_convergence_table, Measured);
            if let Some(env) = &s.convergence_envelope {
                self.put("convergence_rate", env.rate, Fitted);
                self.put("convergence_constant", env.constant, Fitted);
            }
            if let Some(i) = s.stabilization_index {
                self.put("stabilization_index", i as f64, Measured);
            }
            if let Some(cont) = &s.continuity {
                self.put("continuity_grid_spacing", cont.grid_spacing, Measured);
                self.put("continuity_modulus_e", cont.modulus_e, Measured);
                self.put("continuity_modulus_f", cont.modulus_f, Measured);
            }
            let proj = s.points.iter().map(|p| p.proj_norm).fold(0.0, f64::max);
            self.put("max_projection_norm", proj, Measured);
            self.splitting = s
                .points
                .iter()
                .map(|p| PointBundle { x: p.x.clone(), e: p.e.columns(), f: p.f.columns(), provenance: Measured })
                .collect();
        }
        if let Some(v) = &a.verification {
            self.status.notes.extend(v.reasons.iter().cloned());
            self.put("equivariance_residual_e", v.equivariance_residual_e, Measured);
            self.put("equivariance_residual_f", v.equivariance_residual_f, Measured);
            self.put("resolved_through", v.resolved_through as f64, Measured);
            self.put("min_one_step_norm", v.min_one_step_norm, Measured);
            self.put_steps("splitting_ratio_table", &v.domination_table, Measured);
            if let Some(env) = &v.envelope {
                self.put("splitting_rate", env.rate, Fitted);
                self.put("splitting_constant", env.constant, Fitted);
            }
            if let Some(k) = v.k_tilde {
                self.put("k_tilde", k, Measured);
            }
        }
        if let Some(r) = &a.r_e {
            self.put("r_e_estimate", r.estimate, Measured);
            self.put("log_r_e_estimate", r.log_estimate, Measured);
            self.put("log_r_e_lower_bound", r.log_lower_bound, ClosedFormBound);
            self.put("r_e_lower_bound", r.lower_bound, ClosedFormBound);
            self.put("q_index", r.q_index as f64, ClosedFormBound);
            self.put("log_r_e_lower_bound_alt", r.log_lower_bound_alt, ClosedFormBound);
            self.put("q_index_alt", r.q_index_alt as f64, ClosedFormBound);
            self.put("kappa", r.kappa, Measured);
            self.put("r_e_projection_bound", r.projection_check.rhs, ClosedFormBound);
            if !r.holds {
                self.status.notes.push("R_E estimate is below its lower bound".into());
            }
        }
        if let Some(cv) = &a.converse {
            self.put("converse_c0", cv.c0, Measured);
            self.put("converse_k_prime", cv.k_prime, Fitted);
            self.put("converse_checked_through", cv.checked_through as f64, Measured);
            self.put_steps("converse_margin_table", &cv.margin_table, Measured);
            if !cv.holds {
                let first = cv.margin_table.iter().find(|r| r.value > 1.0).map_or(0, |r| r.n);
                let fitted = a.verification.as_ref().map_or(0, |v| v.resolved_through);
                self.status.notes.push(format!(
                    "converse inequality with K' = K C0 fails from n = {first} (envelope measured through n = {fitted})"
                ));
            }
        }
    }

    pub fn add_continuous(&mut self, c: &ContinuousCertificate) {
        use Provenance::*;
        self.status.dominated = c.pass;
        self.status.notes.extend(c.diagnosis.iter().cloned());
        self.put("k", c.k as f64, Measured);
        self.put("gamma_fit", c.gamma, Fitted);
        self.put("c_fit", c.c_const, Fitted);
        self.put("continuous_fit_rms", c.fit_rms, Fitted);
        self.put("eps_grid", c.eps_grid as f64, Measured);
        self.put_times("continuous_domination_table", &c.ratio_table, Measured);
    }

    pub fn add_flow(&mut self, f: &FlowSplitting) {
        use Provenance::*;
        self.status.verified = f.pass;
        self.status.notes.extend(f.reasons.iter().cloned());
        self.put("discretization_agreement", f.agreement, Measured);
        self.put("sup_norm_unit_time", f.sup_norm_unit_time, Measured);
        self.put("min_norm_unit_time", f.min_norm_unit_time, Measured);
        if let Some(g) = f.gamma {
            self.put("splitting_gamma", g, Fitted);
        }
        if let Some(c) = f.c_const {
            self.put("splitting_c", c, Fitted);
        }
        self.put_times("splitting_ratio_table", &f.ratio_table, Measured);
        for d in &f.discretizations {
            self.put(&format!("m{}_tau_fit", d.m), d.tau_fit, Fitted);
            self.put(&format!("m{}_equivariance_residual_e", d.m), d.verification.equivariance_residual_e, Measured);
            self.put(&format!("m{}_equivariance_residual_f", d.m), d.verification.equivariance_residual_f, Measured);
            self.put_steps(&format!("m{}_convergence_table", d.m), &d.splitting.convergence_table, Measured);
        }
        if let Some(d) = f.discretizations.first() {
            self.splitting = d
                .splitting
                .points
                .iter()
                .map(|p| PointBundle { x: p.x.clone(), e: p.e.columns(), f: p.f.columns(), provenance: Measured })
                .collect();
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<ReportBundle> {
        Ok(serde_json::from_str(text)?)
    }

    /// `index,value` with a header row, comma separated, LF line endings.
    pub fn table_csv(&self, name: &str) -> Result<Option<String>> {
        let Some(t) = self.tables.get(name) else { return Ok(None) };
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record([t.index.as_str(), "value"])?;
        for [i, v] in &t.rows {
            let i = if t.index == "n" { format!("{}", *i as u64) } else { format!("{i}") };
            w.write_record([i, format!("{v:e}")])?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(Some(String::from_utf8(bytes).expect("csv output is utf-8")))
    }

    /// The subspace bases at each sample, as `Subspace`s.
    pub fn bundles(&self) -> Vec<(Vec<f64>, Subspace, Subspace)> {
        let to_sub = |cols: &[Vec<f64>]| {
            let vs: Vec<nalgebra::DVector<f64>> =
                cols.iter().map(|c| nalgebra::DVector::from_column_slice(c)).collect();
            Subspace::from_vectors(&vs).ok()
        };
        self.splitting.iter().filter_map(|p| Some((p.x.clone(), to_sub(&p.e)?, to_sub(&p.f)?))).collect()
    }
}

/// Writes `report.json` and/or one `<table>.csv` per table into `dir`.
pub fn emit_report(bundle: &ReportBundle, dir: &Path, formats: &[ReportFormat]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if formats.contains(&ReportFormat::Json) {
        let p = dir.join("report.json");
        fs::write(&p, bundle.to_json()?)?;
        written.push(p);
    }
    if formats.contains(&ReportFormat::CsvTables) {
        for name in bundle.tables.keys() {
            let p = dir.join(format!("{name}.csv"));
            fs::write(&p, bundle.table_csv(name)?.expect("table exists"))?;
            written.push(p);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run() -> RunInfo {
        RunInfo { scenario: "t".into(), config_hash: "00".repeat(32), seed: 1, version: VERSION.into() }
    }

    #[test]
    fn empty_bundle_is_valid_json() {
        let b = ReportBundle::new(run());
        let json = b.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["tables"], serde_json::json!({}));
        assert_eq!(v["splitting"], serde_json::json!([]));
        assert_eq!(ReportBundle::from_json(&json).unwrap(), b);
    }

    #[test]
    fn tables_are_sorted_and_non_finite_values_noted() {
        let mut b = ReportBundle::new(run());
        b.put_table("x", "n", [(2.0, 0.25), (1.0, 0.5), (3.0, f64::NAN)], Provenance::Measured);
        assert_eq!(b.tables["x"].rows, vec![[1.0, 0.5], [2.0, 0.25]]);
        b.put("bad", f64::INFINITY, Provenance::Measured);
        assert!(!b.quantities.contains_key("bad"));
        assert_eq!(b.status.notes.len(), 1);
        assert_eq!(b.table_csv("x").unwrap().unwrap(), "n,value\n1,5e-1\n2,2.5e-1\n");
    }

    #[test]
    fn emit_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut b = ReportBundle::new(run());
        b.put_table("domination_table", "n", [(1.0, 0.5)], Provenance::Measured);
        let files = emit_report(&b, dir.path(), &[ReportFormat::Json, ReportFormat::CsvTables]).unwrap();
        assert_eq!(files.len(), 2);
        let back = ReportBundle::from_json(&fs::read_to_string(&files[0]).unwrap()).unwrap();
        assert_eq!(back, b);
    }
}
