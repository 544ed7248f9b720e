//! Report rendering: human-readable text and byte-deterministic JSON for
//! every command output. No timestamps, stable key and list ordering.

use serde_json::{json, Map, Value};

use fibercalc_core::certify::{Certificate, CertificateStatus, FamilyResult};
use fibercalc_core::construct::{RouteCheck, StabilizationReport};
use fibercalc_core::fibration::Fibration;
use fibercalc_core::invariants::InvariantReport;
use fibercalc_core::linalg::{AbelianGroup, IntMatrix};

use crate::format::{fibration_value, Meta};

pub fn h1_value(group: &AbelianGroup) -> Value {
    let torsion: Vec<Value> = group
        .torsion()
        .iter()
        .map(|d| match d.to_string().parse::<i64>() {
            Ok(n) => json!(n),
            Err(_) => Value::String(d.to_string()),
        })
        .collect();
    json!({ "rank": group.rank(), "torsion": torsion })
}

fn matrix_value(m: &IntMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| {
                Value::Array(
                    (0..m.cols())
                        .map(|j| Value::String(m.get(i, j).to_string()))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn invariant_report_value(report: &InvariantReport) -> Value {
    let mut root = Map::new();
    root.insert("euler".into(), json!(report.euler));
    root.insert("signature".into(), json!(report.signature));
    root.insert("h1".into(), h1_value(&report.h1));
    root.insert("b1".into(), json!(report.b1));
    root.insert("b2".into(), json!(report.b2));
    root.insert("vanishing_cycles".into(), json!(report.vanishing_cycles));
    root.insert(
        "minimality_basis".into(),
        match report.minimality_basis {
            Some(b) => json!(b.as_str()),
            None => Value::Null,
        },
    );
    root.insert(
        "fiber_h1_map".into(),
        match &report.fiber_h1_map {
            Some(m) => matrix_value(m),
            None => Value::Null,
        },
    );
    Value::Object(root)
}

pub fn invariant_report_text(name: &str, report: &InvariantReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("invariants of {}\n", name));
    out.push_str(&format!("  euler characteristic  e = {}\n", report.euler));
    out.push_str(&format!(
        "  signature             sigma = {}\n",
        report.signature
    ));
    out.push_str(&format!("  first homology        H_1 = {}\n", report.h1));
    out.push_str(&format!(
        "  betti numbers         b_1 = {}, b_2 = {}\n",
        report.b1, report.b2
    ));
    out.push_str(&format!(
        "  vanishing cycles      k = {}\n",
        report.vanishing_cycles
    ));
    out.push_str(&format!(
        "  minimality            {}\n",
        report
            .minimality_basis
            .map(|b| b.as_str())
            .unwrap_or("not established")
    ));
    out
}

pub fn certificate_value(cert: &Certificate) -> Value {
    let premises: Vec<Value> = cert
        .premises
        .iter()
        .map(|p| {
            json!({
                "condition": p.condition,
                "evidence": p.evidence,
                "rule": p.rule,
                "holds": p.holds,
            })
        })
        .collect();
    json!({
        "kind": cert.kind.as_str(),
        "status": match &cert.status {
            CertificateStatus::Granted => json!("granted"),
            CertificateStatus::Refused(reason) => json!({ "refused": reason }),
        },
        "conclusion": cert.conclusion,
        "premises": premises,
    })
}

pub fn certificate_text(cert: &Certificate) -> String {
    let mut out = String::new();
    out.push_str(&format!("certificate: {}\n", cert.kind.as_str()));
    for p in &cert.premises {
        out.push_str(&format!(
            "  [{}] {}\n        evidence: {}\n        rule: {}\n",
            if p.holds { "ok" } else { "FAIL" },
            p.condition,
            p.evidence,
            p.rule
        ));
    }
    match &cert.status {
        CertificateStatus::Granted => {
            out.push_str(&format!("  GRANTED: {}\n", cert.conclusion));
        }
        CertificateStatus::Refused(reason) => {
            out.push_str(&format!("  REFUSED: {}\n", reason));
        }
    }
    out
}

pub fn stabilization_value(report: &StabilizationReport, meta: &Meta) -> Value {
    let mut root = Map::new();
    root.insert(
        "result".into(),
        match &report.result {
            Some(f) => fibration_value(f, meta),
            None => Value::Null,
        },
    );
    if let Some(p) = &report.partial {
        root.insert(
            "partial".into(),
            json!({ "euler": p.euler, "signature": p.signature }),
        );
    }
    let curve_value = |c: &fibercalc_core::monodromy::CurveClass| {
        Value::Array(
            c.klass()
                .iter()
                .map(|e| Value::String(e.to_string()))
                .collect(),
        )
    };
    root.insert(
        "selected_curve".into(),
        report
            .selected_curve
            .as_ref()
            .map(curve_value)
            .unwrap_or(Value::Null),
    );
    root.insert(
        "second_curve".into(),
        report
            .second_curve
            .as_ref()
            .map(curve_value)
            .unwrap_or(Value::Null),
    );
    root.insert(
        "kernel_dim".into(),
        report.kernel_dim.map(|d| json!(d)).unwrap_or(Value::Null),
    );
    root.insert("b1_before".into(), json!(report.b1_before));
    root.insert(
        "b1_after".into(),
        report.b1_after.map(|b| json!(b)).unwrap_or(Value::Null),
    );
    root.insert("sigma_before".into(), json!(report.sigma_before));
    root.insert("sigma_after".into(), json!(report.sigma_after));
    root.insert("euler_after".into(), json!(report.euler_after));
    root.insert(
        "h1_after".into(),
        report
            .h1_after
            .as_ref()
            .map(h1_value)
            .unwrap_or(Value::Null),
    );
    root.insert(
        "cross_check".into(),
        json!(match report.cross_check {
            RouteCheck::DualAgreed => "dual-route-agreed",
            RouteCheck::SingleRoute => "single-route",
            RouteCheck::Partial => "partial",
        }),
    );
    root.insert(
        "closed_form_minus_2h".into(),
        json!(report.closed_form_minus_2h),
    );
    root.insert(
        "closed_form_minus_2g".into(),
        report
            .closed_form_minus_2g
            .map(|v| json!(v))
            .unwrap_or(Value::Null),
    );
    Value::Object(root)
}

pub fn stabilization_text(report: &StabilizationReport) -> String {
    let mut out = String::new();
    out.push_str("stabilization report\n");
    if let Some(f) = &report.result {
        out.push_str(&format!(
            "  result: {} of fiber genus {} over base genus {}\n",
            f.kind.as_str(),
            f.fiber_genus,
            f.base_genus
        ));
    } else {
        out.push_str("  result: partial invariants only\n");
    }
    if let Some(c) = &report.selected_curve {
        out.push_str(&format!(
            "  selected curve: [{}]\n",
            c.klass()
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    if let Some(c) = &report.second_curve {
        out.push_str(&format!(
            "  second curve:   [{}]\n",
            c.klass()
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    if let Some(d) = report.kernel_dim {
        out.push_str(&format!("  kernel dimension d = {}\n", d));
    }
    out.push_str(&format!(
        "  b_1: {} -> {}\n",
        report.b1_before,
        report
            .b1_after
            .map(|b| b.to_string())
            .unwrap_or_else(|| "?".into())
    ));
    out.push_str(&format!(
        "  sigma: {} -> {} (Novikov)\n",
        report.sigma_before, report.sigma_after
    ));
    out.push_str(&format!("  euler: {}\n", report.euler_after));
    if let Some(h1) = &report.h1_after {
        out.push_str(&format!("  H_1 after: {}\n", h1));
    }
    out.push_str(&format!(
        "  H_1 routes: {}\n",
        match report.cross_check {
            RouteCheck::DualAgreed => "presentation and Mayer-Vietoris agree",
            RouteCheck::SingleRoute => "declared route only",
            RouteCheck::Partial => "not computed (partial)",
        }
    ));
    out.push_str(&format!(
        "  closed forms: b1_1 + b1_2 - 2h = {}, b1_1 + b1_2 - 2g + d = {}\n",
        report.closed_form_minus_2h,
        report
            .closed_form_minus_2g
            .map(|v| v.to_string())
            .unwrap_or_else(|| "?".into())
    ));
    out
}

pub fn family_value(result: &FamilyResult) -> Value {
    let members: Vec<Value> = result
        .members
        .iter()
        .map(|member| {
            let f = &member.fibration;
            json!({
                "m": member.m,
                "kind": f.kind.as_str(),
                "fiber_genus": f.fiber_genus,
                "base_genus": f.base_genus,
                "fibration": fibration_value(f, &Meta::default()),
                "noncomplex": certificate_value(&member.noncomplex),
            })
        })
        .collect();
    let distinctions: Vec<Value> = result
        .distinctions
        .iter()
        .map(|(i, j, cert)| {
            json!({
                "members": [result.members[*i].m, result.members[*j].m],
                "certificate": certificate_value(cert),
            })
        })
        .collect();
    json!({ "members": members, "distinctions": distinctions })
}

pub fn family_text(result: &FamilyResult) -> String {
    let mut out = String::new();
    out.push_str(&format!("family with {} members\n", result.members.len()));
    for member in &result.members {
        let f = &member.fibration;
        let h1 = fibercalc_core::invariants::h1_group(f);
        let sigma = fibercalc_core::invariants::signature(f);
        out.push_str(&format!(
            "  m = {:>3}: {} genus ({}, {}), sigma = {}, H_1 = {}, certificate {}\n",
            member.m,
            f.kind.as_str(),
            f.fiber_genus,
            f.base_genus,
            sigma.map(|s| s.to_string()).unwrap_or_else(|_| "?".into()),
            h1.map(|g| g.to_string()).unwrap_or_else(|_| "?".into()),
            if member.noncomplex.granted() {
                "granted"
            } else {
                "REFUSED"
            },
        ));
    }
    let granted = result
        .distinctions
        .iter()
        .filter(|(_, _, c)| c.granted())
        .count();
    out.push_str(&format!(
        "  pairwise distinctions: {} of {} granted\n",
        granted,
        result.distinctions.len()
    ));
    out
}

pub fn validity_text(f: &Fibration) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{} of fiber genus {} over base genus {}: ",
        f.kind.as_str(),
        f.fiber_genus,
        f.base_genus
    ));
    match &f.body {
        fibercalc_core::fibration::Body::Explicit(fact) => {
            out.push_str(&format!(
                "explicit, {} handles, {} vanishing cycles, homological relation holds\n",
                fact.handles.len(),
                fact.vanishing_cycles.len()
            ));
            if !f.asserted.mcg_valid {
                out.push_str(
                    "  note: homological validity is necessary but not sufficient; \
                     mcg_valid is not asserted\n",
                );
            }
        }
        fibercalc_core::fibration::Body::Opaque(d) => {
            out.push_str(&format!(
                "opaque (declared invariants, source: {}), declarations consistent\n",
                d.source
            ));
        }
    }
    out
}
