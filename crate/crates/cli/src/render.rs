//! CSV rendering. Numbers use `{:.16e}` (17 significant digits, no locale).

use std::fmt::Write;

use serde_json::{Map, Value};

use sobstab_core::functionals::DeficitReport;
use sobstab_core::hessian::{Branch, HessianSpectrum};
use sobstab_core::optimizer::OptimizationOutcome;
use sobstab_core::stability::ScanResult;

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn json_cell(v: &Value) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => num(f),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

pub fn scan_csv(s: &ScanResult) -> String {
    let mut out = String::from("eps,norm_sq,lq_norm,deficit,dist_sq,quotient\n");
    for i in 0..s.epsilons.len() {
        let row = [
            s.epsilons[i],
            s.norm_sqs[i],
            s.lq_norms[i],
            s.deficits[i],
            s.dist_sqs[i],
            s.quotients[i],
        ];
        let cells: Vec<String> = row.iter().map(|&v| num(v)).collect();
        writeln!(out, "{}", cells.join(",")).unwrap();
    }
    writeln!(
        out,
        "fitted_exponent,{},extrapolated_constant,{}",
        num(s.fitted_exponent),
        num(s.extrapolated_constant)
    )
    .unwrap();
    out
}

pub fn deficit_csv(r: &DeficitReport) -> String {
    format!(
        "norm_sq,lq_norm,deficit,mean,dist_sq,quotient,quadrature_points\n{},{},{},{},{},{},{}\n",
        num(r.norm_sq),
        num(r.lq_norm),
        num(r.deficit),
        num(r.mean),
        num(r.dist_sq),
        r.quotient.map(num).unwrap_or_default(),
        r.quadrature_points
    )
}

pub fn spectrum_csv(s: &HessianSpectrum) -> String {
    let mut out = String::from("k,l,branch,raw_eigenvalue,normalized_eigenvalue,multiplicity\n");
    for e in &s.entries {
        let branch = match e.mode.branch {
            Branch::Even => "even",
            Branch::Cos => "cos",
            Branch::Sin => "sin",
        };
        writeln!(
            out,
            "{},{},{branch},{},{},{}",
            e.mode.k,
            e.mode.l,
            num(e.raw_eigenvalue),
            num(e.normalized_eigenvalue),
            e.multiplicity
        )
        .unwrap();
    }
    out
}

pub fn sweep_csv(rows: &[Value]) -> String {
    let mut out = String::from("factor,radius,negative,zero,positive\n");
    for r in rows {
        let c = &r["counts"];
        writeln!(
            out,
            "{},{},{},{},{}",
            json_cell(&r["factor"]),
            json_cell(&r["radius"]),
            c["negative"],
            c["zero"],
            c["positive"]
        )
        .unwrap();
    }
    out
}

pub fn optimize_csv(o: &OptimizationOutcome) -> String {
    let mut out =
        String::from("restart,mean_zero,start_quotient,best_quotient,iterations,converged\n");
    for r in &o.restart_summaries {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.index,
            r.mean_zero,
            num(r.start_quotient),
            num(r.best_quotient),
            r.iterations,
            r.converged
        )
        .unwrap();
    }
    writeln!(out, "best_quotient,{},kernel_fraction,{}", num(o.best_quotient), num(o.kernel_fraction))
        .unwrap();
    out
}

pub fn key_value_csv(m: &Map<String, Value>) -> String {
    let mut out = String::from("key,value\n");
    for (k, v) in m {
        writeln!(out, "{k},{}", json_cell(v)).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(num(1.0 / 3.0), "3.3333333333333331e-1");
        assert_eq!(num(-2.0), "-2.0000000000000000e0");
        let back: f64 = num(0.1 + 0.2).parse().unwrap();
        assert_eq!(back, 0.1 + 0.2);
    }
}
