//! CSV artifacts and the run manifest.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use mixscale_core::{MixingReport, RNG_ALGORITHM};

use crate::config::Params;
use crate::experiments::Experiment;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_path(dir: &Path, report: &MixingReport) -> PathBuf {
    dir.join(format!("{}.csv", report.name))
}

pub fn manifest_path(dir: &Path, exp: Experiment) -> PathBuf {
    dir.join(format!("{}.manifest.txt", exp.name()))
}

/// Plain-text manifest: the resolved configuration, then per report its
/// file, measured scalars and checks. Contains nothing run-dependent
/// beyond the inputs, so it is as reproducible as the CSVs.
pub fn manifest(exp: Experiment, params: &Params, reports: &[MixingReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "experiment={}", exp.name());
    let _ = writeln!(out, "version={}", env!("CARGO_PKG_VERSION"));
    if exp.uses_seed() {
        let _ = writeln!(out, "rng={RNG_ALGORITHM}");
    }
    out.push_str("\n[config]\n");
    for (k, v) in params.iter() {
        let _ = writeln!(out, "{k}={v}");
    }
    for rep in reports {
        let _ = writeln!(out, "\n[report {}]", rep.name);
        let _ = writeln!(out, "file={}.csv", rep.name);
        let _ = writeln!(out, "rows={}", rep.rows.len());
        let _ = writeln!(out, "passed={}", rep.passed());
        for (k, v) in &rep.scalars {
            let _ = writeln!(out, "scalar {k}={}", num(*v));
        }
        for f in &rep.fits {
            let _ = writeln!(
                out,
                "fit {}: exponent={} residual={}",
                f.label,
                num(f.exponent),
                num(f.residual)
            );
        }
        for c in &rep.checks {
            let _ = writeln!(
                out,
                "check {} {}: {} <= {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.label,
                num(c.lhs),
                num(c.rhs)
            );
        }
    }
    let ok = reports.iter().all(MixingReport::passed);
    let _ = writeln!(out, "\nstatus={}", if ok { "pass" } else { "fail" });
    out
}

pub fn write_all(
    dir: &Path,
    exp: Experiment,
    params: &Params,
    reports: &[MixingReport],
) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::with_capacity(reports.len() + 1);
    for rep in reports {
        let path = csv_path(dir, rep);
        std::fs::write(&path, rep.to_csv())?;
        written.push(path);
    }
    let path = manifest_path(dir, exp);
    std::fs::write(&path, manifest(exp, params, reports))?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mixscale_core::Check;

    #[test]
    fn manifest_lists_config_and_checks() {
        let exp = Experiment::DyadicEstimates;
        let params = Params::resolve(exp.defaults(), &[("J".into(), "4".into())]).unwrap();
        let mut rep = MixingReport::new("demo", &["a"]);
        rep.push_scalar("c", 0.5);
        rep.push_check(Check::new("x", 2.0, 1.0));
        let m = manifest(exp, &params, &[rep]);
        assert!(m.contains("J=4\n"));
        assert!(m.contains("rng=ChaCha8Rng (rand_chacha)"));
        assert!(m.contains("scalar c=5.0000000000000000e-1"));
        assert!(m.contains("check FAIL x"));
        assert!(m.ends_with("status=fail\n"));
    }
}
