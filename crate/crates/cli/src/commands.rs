use anyhow::{bail, Context};
use serde_json::{json, Map, Value};

use jacobi_spectra::asymptotics::{fit_decay, residual_table, AsymptoticRow};
use jacobi_spectra::diagonalize::{
    bessel_bound, build_bundle, check_bessel_bound, check_bessel_bound_with,
    check_laguerre_bound, check_offset_decay, verify_similarity, BoundCheckReport,
};
use jacobi_spectra::eigensolve::{converged_spectrum, SpectralRequest};
use jacobi_spectra::model::{
    r_tilde, r_tilde_oracle_finite_sum, r_tilde_oracle_sum,
    r_tilde_sum_cutoff, u_column_norm_sq, u_element, u_element_contour, CONTOUR_MAX_INDEX,
};
use jacobi_spectra::ModelParams;

use crate::args::{
    AsymptoticsArgs, CommonArgs, IndexRange, OracleArgs, VerifyArgs, ASYMPTOTICS_RANGE,
    SPECTRUM_RANGE,
};
use crate::output::{Report, Table};

pub const EXIT_UNCONVERGED: u8 = 2;
pub const EXIT_CHECK_FAILED: u8 = 3;

const ORACLE_LIMIT: f64 = 1e-9;
const SIMILARITY_DIM: usize = 256;
const SIMILARITY_LIMIT: f64 = 1e-10;
const ORTHONORMALITY_MAX_N: usize = 100;
const ORTHONORMALITY_LIMIT: f64 = 1e-9;
const OFFSET_P_MAX: usize = 5;
const OFFSET_FIRST_EXP: u32 = 6;
const OFFSET_BLOCKS: usize = 5;

pub struct Outcome {
    pub report: Report,
    pub code: u8,
    /// Human-readable lines for stderr.
    pub notes: Vec<String>,
}

fn params(c: &CommonArgs) -> anyhow::Result<ModelParams> {
    Ok(ModelParams::new(c.g, c.c1, c.c2)?)
}

fn base_config(command: &str, c: &CommonArgs, range: IndexRange) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("g".into(), json!(c.g));
    m.insert("c1".into(), json!(c.c1));
    m.insert("c2".into(), json!(c.c2));
    m.insert("n".into(), json!(range.to_string()));
    m.insert("tol".into(), json!(c.tol));
    m.insert("format".into(), json!(c.format));
    m
}

fn check_table() -> Table {
    Table::new(&["check", "status", "metric", "value", "grid_size", "violations"])
}

pub fn spectrum(c: &CommonArgs) -> anyhow::Result<Outcome> {
    let p = params(c)?;
    let range = c.n.unwrap_or(SPECTRUM_RANGE);
    let req = SpectralRequest::new(range.lo, range.hi, c.tol)?;
    let slice = converged_spectrum(&p, &req)?;
    let mut table = Table::new(&["n", "lambda", "truncation_N", "est_error", "converged"]);
    for (i, n) in slice.indices().enumerate() {
        table.push(vec![
            n.into(),
            slice.values[i].into(),
            slice.truncation_n.into(),
            slice.est_error[i].into(),
            slice.converged[i].into(),
        ]);
    }
    let mut notes = Vec::new();
    let code = if slice.all_converged() {
        0
    } else {
        let missing = slice.converged.iter().filter(|c| !**c).count();
        notes.push(format!(
            "{missing} indices did not converge at truncation {}",
            slice.truncation_n
        ));
        EXIT_UNCONVERGED
    };
    Ok(Outcome {
        report: Report {
            config: Value::Object(base_config("spectrum", c, range)),
            table,
            fits: Map::new(),
            checks: check_table(),
        },
        code,
        notes,
    })
}

fn fit_entry(pairs: &[(usize, f64)]) -> Value {
    match fit_decay(pairs) {
        Ok(fit) => serde_json::to_value(fit).unwrap_or(Value::Null),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

pub fn asymptotics(a: &AsymptoticsArgs) -> anyhow::Result<Outcome> {
    let c = &a.common;
    let p = params(c)?;
    let range = c.n.unwrap_or(ASYMPTOTICS_RANGE);
    let mut notes = Vec::new();
    if p.g == 0.0 {
        notes.push("warning: g = 0, the asymptotic formula is not meaningful".into());
    }
    let mut result = residual_table(&p, range.lo, range.hi, c.tol)?;
    if let Some((amp, alpha)) = a.inject_power_law {
        for row in &mut result.rows {
            let v = amp * (row.n.max(1) as f64).powf(-alpha);
            row.r1 = v;
            row.r2 = v;
            row.s_n = v;
        }
    }
    let floor = 10.0 * c.tol;
    let series = |f: fn(&AsymptoticRow) -> f64, floor: f64| -> Vec<(usize, f64)> {
        result
            .rows
            .iter()
            .map(|r| (r.n, f(r).abs()))
            .filter(|&(_, v)| v > floor)
            .collect()
    };
    let mut fits = Map::new();
    fits.insert("r1".into(), fit_entry(&series(|r| r.r1, floor)));
    fits.insert("r2".into(), fit_entry(&series(|r| r.r2, floor)));
    fits.insert("s_n".into(), fit_entry(&series(|r| r.s_n, 0.0)));

    let mut table = Table::new(&[
        "n",
        "lambda",
        "first_order",
        "diag_corr",
        "r1",
        "r2",
        "s_n",
        "s_n_tail_bound",
    ]);
    for r in &result.rows {
        table.push(vec![
            r.n.into(),
            r.lambda.into(),
            r.first_order.into(),
            r.diag_corr.into(),
            r.r1.into(),
            r.r2.into(),
            r.s_n.into(),
            r.s_n_tail_bound.into(),
        ]);
    }
    let code = if result.all_converged() {
        0
    } else {
        notes.push("some eigenvalues did not converge".into());
        EXIT_UNCONVERGED
    };
    let mut config = base_config("asymptotics", c, range);
    config.insert("truncation_N".into(), json!(result.truncation_n));
    Ok(Outcome {
        report: Report {
            config: Value::Object(config),
            table,
            fits,
            checks: check_table(),
        },
        code,
        notes,
    })
}

struct CheckLine {
    name: &'static str,
    status: &'static str,
    metric: &'static str,
    value: f64,
    grid_size: usize,
    violations: usize,
}

impl CheckLine {
    fn from_bounds(name: &'static str, r: &BoundCheckReport, skip_reason: &'static str) -> Self {
        let status = if !r.applicable {
            skip_reason
        } else if r.passed() {
            "PASS"
        } else {
            "FAIL"
        };
        Self {
            name,
            status,
            metric: "max_ratio",
            value: r.max_ratio,
            grid_size: r.grid_size,
            violations: r.violations.len(),
        }
    }

    fn threshold(name: &'static str, metric: &'static str, value: f64, ok: bool, grid_size: usize) -> Self {
        Self {
            name,
            status: if ok { "PASS" } else { "FAIL" },
            metric,
            value,
            grid_size,
            violations: usize::from(!ok),
        }
    }
}

pub fn verify(v: &VerifyArgs) -> anyhow::Result<Outcome> {
    let c = &v.common;
    let p = params(c)?;
    let grid = v.xgrid.points();
    let mut lines = Vec::new();

    let bessel = if v.inject_fault {
        check_bessel_bound_with(v.smax, &grid, |s, x| -bessel_bound(s, x))?
    } else {
        check_bessel_bound(v.smax, &grid)?
    };
    lines.push(CheckLine::from_bounds("bessel_bound", &bessel, "SKIPPED"));

    let x = if p.g == 0.0 { 1.0 } else { 4.0 * p.g * p.g };
    let orders: Vec<u32> = (0u32..)
        .take_while(|&s| (s as u64).checked_pow(16).is_some_and(|n0| n0 <= v.nmax as u64))
        .collect();
    let laguerre = check_laguerre_bound(x, &orders, v.nmax)?;
    lines.push(CheckLine::from_bounds("laguerre_bound", &laguerre, "SKIPPED"));

    let offsets = check_offset_decay(p.g, OFFSET_P_MAX, OFFSET_FIRST_EXP, OFFSET_BLOCKS)?;
    lines.push(CheckLine::from_bounds("offset_decay", &offsets, "SKIPPED(g=0)"));

    let bundle = build_bundle(p.g, SIMILARITY_DIM)?;
    let sim = verify_similarity(&bundle)?;
    lines.push(CheckLine::threshold(
        "similarity_identity",
        "max_abs_defect",
        sim.max_abs_defect,
        sim.max_abs_defect < SIMILARITY_LIMIT,
        sim.block * sim.block,
    ));
    let structure = bundle.antisymmetry_defect().max(bundle.commutator_defect());
    lines.push(CheckLine::threshold(
        "k_structure",
        "max_abs_defect",
        structure,
        structure == 0.0,
        SIMILARITY_DIM * SIMILARITY_DIM,
    ));

    let mut ortho = 0.0f64;
    for n in 0..=ORTHONORMALITY_MAX_N {
        let col = u_column_norm_sq(n, p.g, 1e-12, 100_000)?;
        ortho = ortho.max((col.sum_sq - 1.0).abs());
    }
    lines.push(CheckLine::threshold(
        "orthonormality",
        "max_abs_defect",
        ortho,
        ortho < ORTHONORMALITY_LIMIT,
        ORTHONORMALITY_MAX_N + 1,
    ));

    let rt = &bundle.rt;
    let asym = rt.sub(&rt.transpose()).max_abs();
    lines.push(CheckLine::threshold(
        "rtilde_symmetry",
        "max_abs_defect",
        asym,
        asym == 0.0,
        SIMILARITY_DIM * SIMILARITY_DIM,
    ));

    let mut checks = check_table();
    let mut notes = Vec::new();
    let mut failed = false;
    for l in &lines {
        failed |= l.status == "FAIL";
        notes.push(format!(
            "{} {} {}={:e} grid={} violations={}",
            l.status, l.name, l.metric, l.value, l.grid_size, l.violations
        ));
        checks.push(vec![
            l.name.into(),
            l.status.into(),
            l.metric.into(),
            l.value.into(),
            l.grid_size.into(),
            l.violations.into(),
        ]);
    }
    let mut config = base_config("verify", c, c.n.unwrap_or(SPECTRUM_RANGE));
    config.insert("smax".into(), json!(v.smax));
    config.insert("xgrid".into(), json!(format!("{}:{}:{}", v.xgrid.lo, v.xgrid.hi, v.xgrid.count)));
    config.insert("nmax".into(), json!(v.nmax));
    config.insert("laguerre_x".into(), json!(x));
    Ok(Outcome {
        report: Report {
            config: Value::Object(config),
            table: checks.clone(),
            fits: Map::new(),
            checks,
        },
        code: if failed { EXIT_CHECK_FAILED } else { 0 },
        notes,
    })
}

#[derive(Default)]
struct Worst {
    value: f64,
    at: (usize, usize),
}

impl Worst {
    fn update(&mut self, dev: f64, k: usize, m: usize) {
        let dev = if dev.is_nan() { f64::INFINITY } else { dev };
        if dev > self.value {
            self.value = dev;
            self.at = (k, m);
        }
    }
}

pub fn oracle(o: &OracleArgs) -> anyhow::Result<Outcome> {
    let c = &o.common;
    let p = params(c)?;
    if o.cap > CONTOUR_MAX_INDEX {
        bail!("--cap {} exceeds the oracle limit of {CONTOUR_MAX_INDEX}", o.cap);
    }
    if o.points < 64 {
        bail!("--points {} is below the minimum of 64", o.points);
    }
    let g = p.g;
    let mut u = Worst::default();
    let mut series = Worst::default();
    let mut finite = Worst::default();
    for k in 0..=o.cap {
        for m in 0..=o.cap {
            let contour = u_element_contour(k, m, g, o.points).unwrap_or(f64::NAN);
            u.update((contour - u_element(k, m, g)).abs(), k, m);
            let closed = r_tilde(k, m, g);
            let s = r_tilde_sum_cutoff(k, m, g, 1e-12, 1_000_000)
                .map_or(f64::NAN, |cut| r_tilde_oracle_sum(k, m, g, cut));
            series.update((closed - s).abs(), k, m);
            let f = r_tilde_oracle_finite_sum(k, m, g).context("finite-sum oracle")?;
            finite.update((closed - f).abs(), k, m);
        }
    }
    let mut table = Table::new(&["route", "max_deviation", "at_k", "at_m", "status"]);
    let mut checks = check_table();
    let mut notes = Vec::new();
    let mut failed = false;
    let grid = (o.cap + 1) * (o.cap + 1);
    for (name, w) in [
        ("u_closed_vs_contour", &u),
        ("rtilde_closed_vs_series", &series),
        ("rtilde_closed_vs_finite_sum", &finite),
    ] {
        let ok = w.value < ORACLE_LIMIT;
        failed |= !ok;
        let status = if ok { "PASS" } else { "FAIL" };
        notes.push(format!("{status} {name} max_deviation={:e} at ({}, {})", w.value, w.at.0, w.at.1));
        table.push(vec![name.into(), w.value.into(), w.at.0.into(), w.at.1.into(), status.into()]);
        checks.push(vec![
            name.into(),
            status.into(),
            "max_deviation".into(),
            w.value.into(),
            grid.into(),
            usize::from(!ok).into(),
        ]);
    }
    let mut config = base_config("oracle", c, c.n.unwrap_or(SPECTRUM_RANGE));
    config.insert("cap".into(), json!(o.cap));
    config.insert("points".into(), json!(o.points));
    Ok(Outcome {
        report: Report {
            config: Value::Object(config),
            table,
            fits: Map::new(),
            checks,
        },
        code: if failed { EXIT_CHECK_FAILED } else { 0 },
        notes,
    })
}
