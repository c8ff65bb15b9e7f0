//! Output formats.

use std::fmt::Write as _;
use std::path::Path;

use crate::bundle::{LimitEntry, LimitTable, ReportBundle, StructureTable};
use crate::config::Cx;
use crate::run::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

pub fn render(bundle: &ReportBundle, format: Format) -> String {
    match format {
        Format::Json => to_json(bundle),
        Format::Csv => to_csv(bundle),
        Format::Markdown => to_markdown(bundle),
    }
}

/// Writes the rendered bundle to `path`, or to stdout when `path` is `None`.
pub fn emit(bundle: &ReportBundle, format: Format, path: Option<&Path>) -> Result<(), RunError> {
    let text = render(bundle, format);
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| RunError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Canonical JSON. Floats use the shortest representation that parses back
/// to the same bits.
pub fn to_json(bundle: &ReportBundle) -> String {
    let mut s = serde_json::to_string_pretty(bundle).expect("bundle holds only finite numbers");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> serde_json::Result<ReportBundle> {
    serde_json::from_str(text)
}

/// Tensor rows `table,t,i,j,k,re,im,limit_class`; the oracle table of
/// `zoo-run` uses `label,max_deviation`.
pub fn to_csv(bundle: &ReportBundle) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let write = |w: &mut csv::Writer<Vec<u8>>, row: &[String]| w.write_record(row).expect("in-memory write");
    if let Some(oracle) = bundle.oracle.as_ref().filter(|_| !has_tensors(bundle)) {
        write(&mut w, &["label".into(), "max_deviation".into()]);
        for d in &oracle.deviations {
            write(&mut w, &[d.label.clone(), num(d.max_deviation)]);
        }
    } else {
        let header = ["table", "t", "i", "j", "k", "re", "im", "limit_class"];
        write(&mut w, &header.map(String::from));
        for table in &bundle.evolution {
            for (i, col) in table.columns.iter().enumerate() {
                for (k, z) in col.coords.iter().enumerate() {
                    let row = ["evolution".into(), num(table.t), i.to_string(), String::new(), k.to_string()];
                    write(&mut w, &[row.as_slice(), &cx_cells(Some(*z)), &[String::new()]].concat());
                }
            }
        }
        for table in &bundle.structure_tables {
            structure_rows(table, |row| write(&mut w, &row));
        }
        if let Some(c) = &bundle.contraction {
            for (name, table) in [("alpha_inf", &c.alpha_inf), ("c_inf", &c.c_inf), ("s_inf", &c.s_inf)] {
                for e in &table.entries {
                    let row = [name.into(), "inf".into(), e.i.to_string(), e.j.to_string(), e.k.to_string()];
                    write(&mut w, &[row.as_slice(), &cx_cells(e.value), &[e.class.clone()]].concat());
                }
            }
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 records")
}

fn has_tensors(b: &ReportBundle) -> bool {
    !b.evolution.is_empty() || !b.structure_tables.is_empty() || b.contraction.is_some()
}

fn structure_rows(table: &StructureTable, mut f: impl FnMut(Vec<String>)) {
    let n = table.size;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut row = vec![table.kind.clone(), num(table.t), i.to_string(), j.to_string(), k.to_string()];
                row.extend(cx_cells(Some(table.get(i, j, k))));
                row.push(String::new());
                f(row);
            }
        }
    }
}

/// Shortest representation that parses back to the same `f64`; integers
/// print without a fractional part.
fn num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        x.to_string()
    } else {
        serde_json::to_string(&x).expect("finite")
    }
}

fn cx_cells(z: Option<Cx>) -> [String; 2] {
    match z {
        Some(Cx(re, im)) => [num(re), num(im)],
        None => [String::new(), String::new()],
    }
}

const SHOW_TOL: f64 = 1e-12;

fn fmt_cx(z: Cx) -> String {
    let clean = |x: f64| if x.abs() < SHOW_TOL { 0.0 } else { x };
    let (re, im) = (clean(z.0), clean(z.1));
    match (re == 0.0, im == 0.0) {
        (_, true) => format!("{re:.6}"),
        (true, false) => format!("{im:.6}i"),
        _ => format!("{re:.6}{im:+.6}i"),
    }
}

fn is_shown(z: Cx) -> bool {
    z.0.abs() >= SHOW_TOL || z.1.abs() >= SHOW_TOL
}

fn limit_cell(e: &LimitEntry) -> String {
    match (&e.value, &e.exponent, &e.frequencies, &e.power) {
        (Some(v), ..) => fmt_cx(*v),
        (_, Some(z), ..) => format!("grows like e^({})t", fmt_cx(*z)),
        (_, _, Some(f), _) => format!("oscillates at {f:?}"),
        (_, _, _, Some(p)) => format!("grows like t^{p}"),
        _ => String::new(),
    }
}

pub fn to_markdown(bundle: &ReportBundle) -> String {
    let m = &bundle.metadata;
    let labels = &m.basis.labels;
    let mut s = String::new();
    let _ = writeln!(s, "# dissipalg {}\n", m.command);
    let model = serde_json::to_string(&m.model.source).unwrap_or_default();
    let _ = writeln!(s, "- model: `{model}`");
    for (k, v) in &m.model.derived {
        let _ = writeln!(s, "- {k}: {v}");
    }
    let _ = writeln!(s, "- basis: {} ({})", m.basis.kind, labels.join(", "));
    let _ = writeln!(s, "- rate scale γ_max: {}", m.rate_scale);
    let _ = writeln!(
        s,
        "- tolerances: spec_rel {:e}, coeff_rel {:e}{}",
        m.tolerances.spec_rel,
        m.tolerances.coeff_rel,
        if m.tolerances.overrides.is_empty() {
            String::new()
        } else {
            format!(" (set by {})", m.tolerances.overrides.join(", "))
        }
    );
    let _ = writeln!(s, "- version: {} {}", m.tool, m.version);

    if let Some(c) = &bundle.contraction {
        let names: Vec<String> = c
            .survivors
            .iter()
            .map(|v| if v.is_identity_multiple() { "𝟙".to_string() } else { v.label.clone() })
            .map(|l| format!("\"{l}\""))
            .collect();
        let _ = writeln!(s, "\n## Survivors\n\nsurvivors: [{}]\n", names.join(", "));
        for v in &c.survivors {
            let note = if v.is_identity_multiple() { " (multiple of 𝟙)" } else { "" };
            let _ = writeln!(s, "- {}{note}", v.label);
        }
        let d = &c.diagnostics;
        let _ = writeln!(s, "\n## Algebra\n");
        let _ = writeln!(s, "abelian: {}\n", d.survivors_abelian);
        let _ = writeln!(s, "- full c(∞) vanishes: {}", d.is_abelian);
        let _ = writeln!(s, "- center dimension: {}", d.center_dim);
        match d.associativity_residual {
            Some(r) => {
                let _ = writeln!(s, "- associativity residual of ∘∞: {r:.3e}");
            }
            None => {
                let _ = writeln!(s, "- associativity residual of ∘∞: not finite");
            }
        }
        let witness: Vec<String> = d
            .abelian_subalgebra_witness
            .iter()
            .map(|w| w.iter().map(|&i| labels[i].clone()).collect::<Vec<_>>().join(", "))
            .map(|w| format!("{{{w}}}"))
            .collect();
        let _ = writeln!(s, "- abelian witness: {}", witness.join(" "));
        let eig: Vec<String> = c.eigenvalues.iter().map(|&z| fmt_cx(z)).collect();
        let _ = writeln!(s, "- L♯ eigenvalues: {}", eig.join(", "));
        limit_section(&mut s, "α(∞)", &c.alpha_inf, labels);
        limit_section(&mut s, "c(∞)", &c.c_inf, labels);
    }

    for table in &bundle.structure_tables {
        let _ = writeln!(
            s,
            "\n## {} at t = {} / γ_max (method {})\n",
            table.kind, table.t, table.method
        );
        let _ = writeln!(s, "| i | j | k | value |\n|---|---|---|---|");
        let n = table.size;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let z = table.get(i, j, k);
                    if is_shown(z) {
                        let _ = writeln!(s, "| {} | {} | {} | {} |", labels[i], labels[j], labels[k], fmt_cx(z));
                    }
                }
            }
        }
    }

    for table in &bundle.evolution {
        let _ = writeln!(s, "\n## Λ♯ₜ at t = {} / γ_max\n", table.t);
        let _ = writeln!(s, "| A | Λ♯ₜ[A] |\n|---|---|");
        for col in &table.columns {
            let terms: Vec<String> = col
                .coords
                .iter()
                .zip(labels)
                .filter(|(z, _)| is_shown(**z))
                .map(|(z, l)| format!("({}) {l}", fmt_cx(*z)))
                .collect();
            let image = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
            let _ = writeln!(s, "| {} | {image} |", col.label);
        }
    }

    if let Some(o) = &bundle.oracle {
        let _ = writeln!(s, "\n## Oracle deviations ({})\n", o.model);
        let _ = writeln!(s, "| operator | max deviation |\n|---|---|");
        for d in &o.deviations {
            let _ = writeln!(s, "| {} | {:.3e} |", d.label, d.max_deviation);
        }
        let _ = writeln!(s, "\nmax deviation: {:.3e}", o.max_deviation);
    }
    s
}

/// Nonzero convergent entries and every non-convergent one.
fn limit_section(s: &mut String, title: &str, table: &LimitTable, labels: &[String]) {
    let _ = writeln!(s, "\n## {title}\n");
    let _ = writeln!(s, "| i | j | k | value | class |\n|---|---|---|---|---|");
    for e in &table.entries {
        if e.value.is_some_and(|v| !is_shown(v)) {
            continue;
        }
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} |",
            labels[e.i],
            labels[e.j],
            labels[e.k],
            limit_cell(e),
            e.class
        );
    }
}
