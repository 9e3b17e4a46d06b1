//! Metrics supplied as a TOML table of component expressions.
//!
//! ```toml
//! id = "warped"
//! description = "optional"
//! margin = 0.01          # optional
//! fd_step = 1e-4         # optional
//! samples = [[-1, 1], [-1, 1], [0.5, 2]]   # optional sampling box
//!
//! [domain]
//! u1 = [-2.0, 2.0]
//! u2 = [-2.0, 2.0]
//! u3 = [0.1, 3.0]
//!
//! [metric]
//! g11 = "1"
//! g22 = "exp(2*u1)"
//! g33 = "1"
//! # omitted off-diagonal components are zero
//!
//! [fields]
//! up = ["0", "0", "1"]
//! ```
//!
//! Partials of custom metrics are always taken by finite differences.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use nalgebra::Matrix3;
use serde::Deserialize;

use super::expr::{self, Expr};
use super::{CatalogEntry, CatalogParams, FieldEntry};
use crate::error::{Error, Result};
use crate::geometry::{MetricChart, Vec3};
use crate::triad::VectorFieldSpec;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricFile {
    id: String,
    description: Option<String>,
    margin: Option<f64>,
    fd_step: Option<f64>,
    samples: Option<[[f64; 2]; 3]>,
    domain: Domain,
    metric: BTreeMap<String, String>,
    #[serde(default)]
    fields: BTreeMap<String, [String; 3]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Domain {
    u1: [f64; 2],
    u2: [f64; 2],
    u3: [f64; 2],
}

fn component_index(key: &str) -> Result<(usize, usize)> {
    let b = key.as_bytes();
    if b.len() == 3 && b[0] == b'g' && (b'1'..=b'3').contains(&b[1]) && (b'1'..=b'3').contains(&b[2]) {
        Ok(((b[1] - b'1') as usize, (b[2] - b'1') as usize))
    } else {
        Err(Error::MetricFile(format!("unknown metric component `{key}`")))
    }
}

pub fn parse_metric_file(src: &str) -> Result<CatalogEntry> {
    let file: MetricFile = toml::from_str(src).map_err(|e| Error::MetricFile(e.to_string()))?;

    let mut comps: [[Option<Expr>; 3]; 3] = Default::default();
    for (key, text) in &file.metric {
        let (i, j) = component_index(key)?;
        let e = expr::parse(text)?;
        let (a, b) = (i.min(j), i.max(j));
        if comps[a][b].is_some() {
            return Err(Error::MetricFile(format!("component g{}{} given twice", a + 1, b + 1)));
        }
        comps[a][b] = Some(e);
    }
    let comps = Arc::new(comps);
    let g = {
        let comps = comps.clone();
        move |u: &[f64; 3]| {
            Matrix3::from_fn(|i, j| {
                let (a, b) = (i.min(j), i.max(j));
                comps[a][b].as_ref().map_or(0.0, |e| e.eval(u))
            })
        }
    };

    let d = &file.domain;
    let domain = [(d.u1[0], d.u1[1]), (d.u2[0], d.u2[1]), (d.u3[0], d.u3[1])];
    if domain.iter().any(|(lo, hi)| !(lo < hi)) {
        return Err(Error::MetricFile("domain intervals must have lo < hi".into()));
    }
    let mut chart = MetricChart::new(format!("custom/{}", file.id), domain, Arc::new(g));
    if let Some(m) = file.margin {
        if !(m > 0.0) {
            return Err(Error::MetricFile("margin must be positive".into()));
        }
        chart = chart.with_margin(m);
    }
    if let Some(h) = file.fd_step {
        if !(h > 0.0) {
            return Err(Error::MetricFile("fd_step must be positive".into()));
        }
        chart = chart.with_fd_step(h);
    }

    let sample_box = match file.samples {
        Some(s) => [(s[0][0], s[0][1]), (s[1][0], s[1][1]), (s[2][0], s[2][1])],
        None => {
            let inset = |(lo, hi): (f64, f64)| {
                let w = hi - lo;
                (lo + 0.1 * w, hi - 0.1 * w)
            };
            domain.map(inset)
        }
    };
    let centre = sample_box.map(|(lo, hi)| 0.5 * (lo + hi));

    let mut fields = Vec::new();
    for (name, comps) in &file.fields {
        let parsed = [expr::parse(&comps[0])?, expr::parse(&comps[1])?, expr::parse(&comps[2])?];
        let f = move |u: &[f64; 3]| Vec3::new(parsed[0].eval(u), parsed[1].eval(u), parsed[2].eval(u));
        fields.push(FieldEntry {
            spec: VectorFieldSpec::new(name.clone(), Arc::new(f)),
            description: "custom field",
            sample_box,
            flow_start: centre,
            flow_length: 0.5,
            geodesic: false,
        });
    }

    Ok(CatalogEntry {
        manifold_id: format!("custom/{}", file.id),
        description: file.description.unwrap_or_else(|| "custom metric".into()),
        params: CatalogParams::default(),
        chart,
        fields,
        expected: Vec::new(),
        default_samples: 100,
    })
}

pub fn load_metric_file(path: &Path) -> Result<CatalogEntry> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| Error::MetricFile(format!("{}: {e}", path.display())))?;
    parse_metric_file(&src)
}

#[cfg(test)]
mod tests {
    use super::*;

    const WARPED: &str = r#"
id = "warped"
[domain]
u1 = [-2.0, 2.0]
u2 = [-2.0, 2.0]
u3 = [-2.0, 2.0]
[metric]
g11 = "1"
g22 = "exp(2*u1)"
g33 = "exp(2*u1)"
[fields]
normal = ["1", "0", "0"]
"#;

    #[test]
    fn parses_and_builds_fd_chart() {
        let e = parse_metric_file(WARPED).unwrap();
        assert_eq!(e.manifold_id, "custom/warped");
        assert!(!e.chart.has_analytic_partials());
        let m = e.chart.metric_at(&[0.5, 0.0, 0.0]).unwrap();
        assert!((m.g[(1, 1)] - 1f64.exp()).abs() < 1e-14);
        assert_eq!(m.g[(0, 1)], 0.0);
        assert_eq!(e.field_ids(), vec!["normal"]);
    }

    #[test]
    fn hyperbolic_warped_product_has_scalar_minus_six() {
        // dr² + e^{2r}(dy² + dz²) is hyperbolic space
        let e = parse_metric_file(WARPED).unwrap();
        let c = e.chart.curvature(&[0.3, 0.1, -0.2]).unwrap();
        assert!((c.scalar + 6.0).abs() < 1e-5, "{}", c.scalar);
    }

    #[test]
    fn bad_files_are_rejected() {
        assert!(parse_metric_file("id = 1").is_err());
        let dup = WARPED.replace("g33 = \"exp(2*u1)\"", "g33 = \"1\"\ng21 = \"0\"\ng12 = \"0\"");
        assert!(matches!(parse_metric_file(&dup), Err(Error::MetricFile(_))));
        let bad_key = WARPED.replace("g33", "g34");
        assert!(parse_metric_file(&bad_key).is_err());
        let bad_expr = WARPED.replace("exp(2*u1)\"\ng33", "exp(2*)\"\ng33");
        assert!(parse_metric_file(&bad_expr).is_err());
    }
}
