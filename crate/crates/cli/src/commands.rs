use serde::Serialize;

use np3_core::catalog::{self, CatalogEntry, Expected, ExpectedValue, MANIFOLD_IDS};
use np3_core::flow::{self, FocusingReport, GoldbergSachsReport, OmegaReport, PrincipalReport};
use np3_core::triad::{Classification, FrameField, SpinCoefficients, Triad};
use np3_core::verify::{self, ResidualReport, TriadCurvature};
use np3_core::Error;

use crate::config::{catalog_params, CatalogArgs, CliError, Defaults, Format, Run, RunArgs};
use crate::output::{self, document, sci, table, write_csv, write_json, write_text};
use crate::Status;

type CmdResult = Result<Status, CliError>;

#[derive(Serialize)]
struct FieldListing<'a> {
    field_id: &'a str,
    description: &'static str,
    geodesic: bool,
    sample_box: [(f64, f64); 3],
    flow_start: [f64; 3],
    flow_length: f64,
}

#[derive(Serialize)]
struct ManifoldListing<'a> {
    manifold_id: &'a str,
    description: &'a str,
    chart_id: &'a str,
    domain: [(f64, f64); 3],
    params: catalog::CatalogParams,
    fields: Vec<FieldListing<'a>>,
}

fn listing(e: &CatalogEntry) -> ManifoldListing<'_> {
    ManifoldListing {
        manifold_id: &e.manifold_id,
        description: &e.description,
        chart_id: &e.chart.chart_id,
        domain: e.chart.domain,
        params: e.params,
        fields: e
            .fields
            .iter()
            .map(|f| FieldListing {
                field_id: &f.spec.field_id,
                description: f.description,
                geodesic: f.geodesic,
                sample_box: f.sample_box,
                flow_start: f.flow_start,
                flow_length: f.flow_length,
            })
            .collect(),
    }
}

fn params_text(p: &catalog::CatalogParams) -> String {
    let mut parts = Vec::new();
    if let Some(r) = p.r {
        parts.push(format!("r={r}"));
    }
    if let Some(l) = p.lambda {
        parts.push(format!("lambda={l}"));
    }
    if parts.is_empty() {
        "-".into()
    } else {
        parts.join(",")
    }
}

pub fn catalog_list(args: &CatalogArgs) -> CmdResult {
    let params = catalog_params(&args.params);
    let entries: Vec<CatalogEntry> = MANIFOLD_IDS
        .iter()
        .map(|id| {
            // overrides apply only to the families that take them
            let p = catalog::CatalogParams {
                r: params.r.filter(|_| *id == "s3_round"),
                lambda: params.lambda.filter(|_| *id == "berger"),
            };
            catalog::load(id, p)
        })
        .collect::<Result<_, _>>()?;
    match args.format {
        Format::Json => {
            let list: Vec<_> = entries.iter().map(listing).collect();
            write_json(None, &list)?;
        }
        Format::Csv => {
            #[derive(Serialize)]
            struct Row<'a> {
                manifold_id: &'a str,
                params: String,
                fields: String,
            }
            let rows: Vec<Row> = entries
                .iter()
                .map(|e| Row {
                    manifold_id: &e.manifold_id,
                    params: params_text(&e.params),
                    fields: e.field_ids().join(" "),
                })
                .collect();
            write_csv(None, &rows)?;
        }
        Format::Table => {
            let rows: Vec<Vec<String>> = entries
                .iter()
                .map(|e| {
                    vec![
                        e.manifold_id.clone(),
                        params_text(&e.params),
                        e.field_ids().join(","),
                        e.description.clone(),
                    ]
                })
                .collect();
            write_text(None, &table(&["manifold", "params", "fields", "description"], &rows))?;
        }
    }
    Ok(Status::Pass)
}

#[derive(Serialize)]
struct ExpectedListing<'a> {
    field_id: Option<&'a str>,
    quantity: catalog::Quantity,
    value: Option<f64>,
    closed_form: bool,
    tol: f64,
    oracle: &'static str,
}

fn expected_listing(x: &Expected) -> ExpectedListing<'_> {
    let value = match &x.value {
        ExpectedValue::Constant(c) => Some(*c),
        ExpectedValue::Closed(_) => None,
    };
    ExpectedListing {
        field_id: x.field_id.as_deref(),
        quantity: x.quantity,
        value,
        closed_form: value.is_none(),
        tol: x.tol,
        oracle: x.oracle,
    }
}

pub fn catalog_show(id: &str, args: &CatalogArgs) -> CmdResult {
    let entry = catalog::load(id, catalog_params(&args.params))?;
    let expected: Vec<_> = entry.expected.iter().map(expected_listing).collect();
    match args.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Show<'a> {
                manifold: ManifoldListing<'a>,
                expected: Vec<ExpectedListing<'a>>,
            }
            write_json(
                None,
                &Show {
                    manifold: listing(&entry),
                    expected,
                },
            )?;
        }
        Format::Csv => write_csv(None, &expected)?,
        Format::Table => {
            let mut text = format!(
                "{} ({})\nchart {} on {:?}\n\n",
                entry.manifold_id,
                entry.description,
                entry.chart.chart_id,
                entry.chart.domain
            );
            let rows: Vec<Vec<String>> = entry
                .fields
                .iter()
                .map(|f| {
                    vec![
                        f.spec.field_id.clone(),
                        f.geodesic.to_string(),
                        f.flow_length.to_string(),
                        f.description.to_string(),
                    ]
                })
                .collect();
            text.push_str(&table(&["field", "geodesic", "flow_length", "description"], &rows));
            text.push('\n');
            let rows: Vec<Vec<String>> = expected
                .iter()
                .map(|x| {
                    vec![
                        x.field_id.unwrap_or("-").to_string(),
                        format!("{:?}", x.quantity),
                        x.value.map_or("closed form".into(), |v| v.to_string()),
                        format!("{:e}", x.tol),
                        x.oracle.to_string(),
                    ]
                })
                .collect();
            text.push_str(&table(&["field", "quantity", "expected", "tol", "oracle"], &rows));
            write_text(None, &text)?;
        }
    }
    Ok(Status::Pass)
}

#[derive(Serialize)]
struct Invariants {
    orthonormality_residual: f64,
    rho_residual: f64,
    epsilon_real_part: f64,
    epsilon_frame_residual: f64,
    sigma_shear_residual: f64,
    ricci_star_residual: f64,
}

#[derive(Serialize)]
struct Analysis {
    point: np3_core::ChartPoint,
    triad: Triad,
    spin_coefficients: SpinCoefficients,
    triad_curvature: TriadCurvature,
    scalar_curvature: f64,
    killing_residual: f64,
    classification: Classification,
    invariants: Invariants,
}

pub fn analyze(args: &RunArgs) -> CmdResult {
    let run = Run::resolve(
        args,
        Defaults {
            command: "analyze",
            tol: 1e-7,
            fd_tol: 1e-4,
            format: Format::Json,
            flow: false,
            sampled: false,
        },
    )?;
    let u = run.point_or(run.field.flow_start);
    let chart = &run.entry.chart;
    chart.check_point(&u)?;
    let ff = FrameField::new(chart, &run.field.spec, &u)?.with_config(run.cfg.numeric);
    let probe = verify::Probe::new(ff, &u)?;
    let sc = probe.sc;
    let conn = &probe.conn;
    let a = Analysis {
        point: chart.point(u),
        triad: conn.triad.clone(),
        spin_coefficients: sc,
        triad_curvature: probe.tc,
        scalar_curvature: probe.curvature.scalar,
        killing_residual: conn.killing_residual(),
        classification: Classification::from_coefficients(&sc, run.cfg.tol),
        invariants: Invariants {
            orthonormality_residual: conn.triad.orthonormality_residual(&conn.metric),
            rho_residual: sc.rho_residual(),
            epsilon_real_part: sc.epsilon.re.abs(),
            epsilon_frame_residual: (sc.epsilon - conn.epsilon_from_frame()).norm(),
            sigma_shear_residual: (sc.sigma - conn.shear_from_screen()).norm(),
            ricci_star_residual: probe.ricci_star_residual(),
        },
    };
    let out = run.cfg.out.as_deref();
    match run.cfg.format {
        Format::Json => write_json(out, &document(&run.cfg, &a, &a.classification))?,
        Format::Csv | Format::Table => {
            let c = |name: &str, z: (f64, f64)| vec![name.to_string(), output::num(z.0), output::num(z.1)];
            let rows = vec![
                c("kappa", (sc.kappa.re, sc.kappa.im)),
                c("rho", (sc.rho.re, sc.rho.im)),
                c("sigma", (sc.sigma.re, sc.sigma.im)),
                c("epsilon", (sc.epsilon.re, sc.epsilon.im)),
                c("beta", (sc.beta.re, sc.beta.im)),
                c("div", (sc.div, 0.0)),
                c("omega", (sc.omega, 0.0)),
                c("shear_mag2", (sc.shear_mag2, 0.0)),
                c("ric_kk", (probe.tc.ric_kk, 0.0)),
                c("ric_mm", (probe.tc.ric_mm.re, probe.tc.ric_mm.im)),
                c("ric_km", (probe.tc.ric_km.re, probe.tc.ric_km.im)),
                c("ric_mmbar", (probe.tc.ric_mmbar, 0.0)),
                c("S", (a.scalar_curvature, 0.0)),
                c("killing_residual", (a.killing_residual, 0.0)),
            ];
            let cl = &a.classification;
            let flags = [
                ("geodesic", cl.geodesic),
                ("divergence_free", cl.divergence_free),
                ("shear_free", cl.shear_free),
                ("hypersurface_orthogonal", cl.hypersurface_orthogonal),
                ("killing", cl.killing),
            ];
            if run.cfg.format == Format::Csv {
                #[derive(Serialize)]
                struct Row<'a> {
                    quantity: &'a str,
                    re: String,
                    im: String,
                }
                let mut csv_rows: Vec<Row> = rows
                    .iter()
                    .map(|r| Row {
                        quantity: &r[0],
                        re: r[1].clone(),
                        im: r[2].clone(),
                    })
                    .collect();
                for (name, v) in flags {
                    csv_rows.push(Row {
                        quantity: name,
                        re: v.to_string(),
                        im: String::new(),
                    });
                }
                write_csv(out, &csv_rows)?;
            } else {
                let mut text = format!("{} / {} at {:?}\n\n", run.cfg.manifold_id, run.cfg.field_id, u);
                text.push_str(&table(&["quantity", "re", "im"], &rows));
                text.push('\n');
                let flag_rows: Vec<Vec<String>> =
                    flags.iter().map(|(n, v)| vec![n.to_string(), v.to_string()]).collect();
                text.push_str(&table(&["flag", "value"], &flag_rows));
                write_text(out, &text)?;
            }
        }
    }
    Ok(Status::Pass)
}

#[derive(Serialize)]
struct VerifySummary<'a> {
    all_pass: bool,
    failed: Vec<&'a str>,
    points: usize,
    max_residual: f64,
    worst_equation: &'a str,
}

pub fn verify(args: &RunArgs) -> CmdResult {
    let run = Run::resolve(
        args,
        Defaults {
            command: "verify",
            tol: 1e-5,
            fd_tol: 1e-3,
            format: Format::Json,
            flow: false,
            sampled: true,
        },
    )?;
    let points = run.points()?;
    let reports = verify::verify_batch(
        &run.entry.chart,
        &run.field.spec,
        &points,
        run.cfg.numeric,
        run.cfg.tol,
    )?;
    let worst = reports
        .iter()
        .max_by(|a, b| a.max_residual.total_cmp(&b.max_residual))
        .expect("at least one identity");
    let summary = VerifySummary {
        all_pass: reports.iter().all(|r| r.pass),
        failed: reports.iter().filter(|r| !r.pass).map(|r| r.equation_id.as_str()).collect(),
        points: points.len(),
        max_residual: worst.max_residual,
        worst_equation: &worst.equation_id,
    };
    let out = run.cfg.out.as_deref();
    match run.cfg.format {
        Format::Json => write_json(out, &document(&run.cfg, &reports, &summary))?,
        Format::Csv => write_csv(out, &report_rows(&reports))?,
        Format::Table => {
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    vec![
                        r.equation_id.clone(),
                        sci(r.max_residual),
                        sci(r.mean_residual),
                        sci(r.tol),
                        if r.pass { "pass" } else { "FAIL" }.into(),
                    ]
                })
                .collect();
            let mut text = table(&["equation", "max", "mean", "tol", "status"], &rows);
            text.push_str(&format!(
                "\n{} points, {}\n",
                summary.points,
                if summary.all_pass { "all pass" } else { "failures present" }
            ));
            write_text(out, &text)?;
        }
    }
    Ok(if summary.all_pass {
        Status::Pass
    } else {
        Status::CheckFailed
    })
}

#[derive(Serialize)]
struct ReportRow<'a> {
    equation_id: &'a str,
    points: usize,
    max_residual: f64,
    mean_residual: f64,
    tol: f64,
    pass: bool,
    worst_u1: Option<f64>,
    worst_u2: Option<f64>,
    worst_u3: Option<f64>,
}

fn report_rows(reports: &[ResidualReport]) -> Vec<ReportRow<'_>> {
    reports
        .iter()
        .map(|r| {
            let w = r.worst_point.as_ref().map(|p| p.u);
            ReportRow {
                equation_id: &r.equation_id,
                points: r.points,
                max_residual: r.max_residual,
                mean_residual: r.mean_residual,
                tol: r.tol,
                pass: r.pass,
                worst_u1: w.map(|u| u[0]),
                worst_u2: w.map(|u| u[1]),
                worst_u3: w.map(|u| u[2]),
            }
        })
        .collect()
}

/// Relative transport tolerance per unit of geodesic parameter.
const TRANSPORT_TOL: f64 = 1e-5;

#[derive(Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
enum Focusing {
    Checked(FocusingReport),
    NotApplicable { reason: String },
}

#[derive(Serialize)]
struct FlowResults<'a, T: Serialize> {
    trace: T,
    omega: &'a OmegaReport,
    focusing: &'a Focusing,
}

#[derive(Serialize)]
struct FlowSummary {
    length: f64,
    step: f64,
    samples: usize,
    max_div_deviation: f64,
    max_omega_deviation: f64,
    transport_tol: f64,
    transport_consistent: bool,
    omega_verdict: flow::OmegaVerdict,
    sign_changes: usize,
    predicted_blowup_t: Option<f64>,
    pass: bool,
}

pub fn flow(args: &RunArgs) -> CmdResult {
    let run = Run::resolve(
        args,
        Defaults {
            command: "flow",
            tol: 1e-6,
            fd_tol: 1e-4,
            format: Format::Csv,
            flow: true,
            sampled: false,
        },
    )?;
    let chart = &run.entry.chart;
    let spec = &run.field.spec;
    let p0 = run.point_or(run.field.flow_start);
    chart.check_point(&p0)?;
    let (length, step) = (run.cfg.length.unwrap_or(0.0), run.cfg.step.unwrap_or(1e-3));
    let cfg = run.cfg.numeric;
    let trace = flow::transport_kinematics(chart, spec, &p0, length, step, cfg)?;
    let omega = OmegaReport::from_trace(&trace, run.cfg.tol);
    let focusing = match flow::focusing_check(chart, spec, &p0, length, step, run.cfg.tol, cfg) {
        Ok(r) => Focusing::Checked(r),
        Err(Error::HypothesesViolated(reason)) => Focusing::NotApplicable { reason },
        Err(e) => return Err(e.into()),
    };
    let transport_tol = TRANSPORT_TOL * trace.length.max(1.0);
    let (dd, dw) = (trace.max_div_deviation(), trace.max_omega_deviation());
    let transport_consistent = dd < transport_tol && dw < transport_tol;
    let summary = FlowSummary {
        length: trace.length,
        step: trace.step,
        samples: trace.direct.len(),
        max_div_deviation: dd,
        max_omega_deviation: dw,
        transport_tol,
        transport_consistent,
        omega_verdict: omega.verdict,
        sign_changes: omega.sign_changes,
        predicted_blowup_t: match &focusing {
            Focusing::Checked(r) => r.predicted_blowup_t,
            Focusing::NotApplicable { .. } => None,
        },
        pass: transport_consistent && omega.verdict != flow::OmegaVerdict::Mixed,
    };
    let out = run.cfg.out.as_deref();
    let rows = trace.rows();
    match run.cfg.format {
        Format::Json => {
            let results = FlowResults {
                trace: &rows,
                omega: &omega,
                focusing: &focusing,
            };
            write_json(out, &document(&run.cfg, results, &summary))?;
        }
        Format::Csv => {
            write_csv(out, &rows)?;
            let results = FlowResults {
                trace: (),
                omega: &omega,
                focusing: &focusing,
            };
            let text = output::json_string(&document(&run.cfg, results, &summary))?;
            if out.is_some() {
                write_text(None, &(text + "\n"))?;
            } else {
                eprintln!("{text}");
            }
        }
        Format::Table => {
            let mut rows = vec![
                vec!["length".into(), summary.length.to_string()],
                vec!["step".into(), summary.step.to_string()],
                vec!["samples".into(), summary.samples.to_string()],
                vec!["max_div_deviation".into(), sci(dd)],
                vec!["max_omega_deviation".into(), sci(dw)],
                vec!["omega_min_abs".into(), sci(omega.omega_min_abs)],
                vec!["omega_max_abs".into(), sci(omega.omega_max_abs)],
                vec!["sign_changes".into(), omega.sign_changes.to_string()],
            ];
            match &focusing {
                Focusing::Checked(r) => {
                    let opt = |v: Option<f64>| v.map_or("-".into(), |x| x.to_string());
                    rows.push(vec!["predicted_blowup_t".into(), opt(r.predicted_blowup_t)]);
                    rows.push(vec!["crossing_t".into(), opt(r.crossing_t)]);
                }
                Focusing::NotApplicable { reason } => rows.push(vec!["focusing".into(), reason.clone()]),
            }
            let mut text = table(&["quantity", "value"], &rows);
            text.push_str(&format!("\n{}\n", omega.statement));
            write_text(out, &text)?;
        }
    }
    Ok(if summary.pass {
        Status::Pass
    } else {
        Status::CheckFailed
    })
}

#[derive(Serialize)]
struct PrincipalResults<'a> {
    reports: &'a [PrincipalReport],
    goldberg_sachs: Option<&'a GoldbergSachsReport>,
}

#[derive(Serialize)]
struct PrincipalSummary {
    points: usize,
    hypotheses_hold: bool,
    violation: Option<String>,
    biconditional_holds: Option<bool>,
    two_principal_and_killing: Option<bool>,
    neither: Option<bool>,
}

pub fn principal(args: &RunArgs) -> CmdResult {
    let run = Run::resolve(
        args,
        Defaults {
            command: "principal",
            tol: 1e-7,
            fd_tol: 1e-4,
            format: Format::Json,
            flow: false,
            sampled: true,
        },
    )?;
    let points = run.points()?;
    let chart = &run.entry.chart;
    let spec = &run.field.spec;
    let cfg = run.cfg.numeric;
    let reports: Vec<PrincipalReport> = points
        .iter()
        .map(|u| flow::principal_check(chart, spec, u, run.cfg.tol, cfg))
        .collect::<Result<_, _>>()?;
    let (gs, violation) = match flow::goldberg_sachs_check(chart, spec, &points, run.cfg.tol, cfg) {
        Ok(r) => (Some(r), None),
        Err(Error::HypothesesViolated(reason)) => (None, Some(reason)),
        Err(e) => return Err(e.into()),
    };
    let summary = PrincipalSummary {
        points: points.len(),
        hypotheses_hold: violation.is_none(),
        violation: violation.clone(),
        biconditional_holds: gs.as_ref().map(|g| g.biconditional_holds),
        two_principal_and_killing: gs.as_ref().map(|g| g.all_two_principal_and_killing),
        neither: gs.as_ref().map(|g| g.all_neither),
    };
    let out = run.cfg.out.as_deref();
    match run.cfg.format {
        Format::Json => {
            let results = PrincipalResults {
                reports: &reports,
                goldberg_sachs: gs.as_ref(),
            };
            write_json(out, &document(&run.cfg, results, &summary))?;
        }
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                u1: f64,
                u2: f64,
                u3: f64,
                #[serde(rename = "sup_Rk")]
                sup_rk: f64,
                #[serde(rename = "kappaS_residual")]
                kappa_s_residual: f64,
                shear_omega_residual: f64,
                scalar_evolution_residual: f64,
                #[serde(rename = "S")]
                scalar: f64,
                killing_residual: f64,
                two_principal: bool,
                killing: bool,
            }
            let rows: Vec<Row> = reports
                .iter()
                .map(|r| Row {
                    u1: r.point.u[0],
                    u2: r.point.u[1],
                    u3: r.point.u[2],
                    sup_rk: r.sup_rk,
                    kappa_s_residual: r.kappa_s_residual,
                    shear_omega_residual: r.shear_omega_residual,
                    scalar_evolution_residual: r.scalar_evolution_residual,
                    scalar: r.scalar,
                    killing_residual: r.killing_residual,
                    two_principal: r.two_principal,
                    killing: r.killing,
                })
                .collect();
            write_csv(out, &rows)?;
        }
        Format::Table => {
            let max = |f: fn(&PrincipalReport) -> f64| reports.iter().map(f).fold(0.0, f64::max);
            let rows = vec![
                vec!["points".into(), reports.len().to_string()],
                vec!["max sup_Rk".into(), sci(max(|r| r.sup_rk))],
                vec!["max |kappa S|".into(), sci(max(|r| r.kappa_s_residual))],
                vec!["max ||sigma|^2 - omega^2/4|".into(), sci(max(|r| r.shear_omega_residual))],
                vec!["max |k[S] + div S|".into(), sci(max(|r| r.scalar_evolution_residual))],
                vec!["max killing_residual".into(), sci(max(|r| r.killing_residual))],
                vec![
                    "biconditional".into(),
                    summary
                        .biconditional_holds
                        .map_or_else(|| format!("hypotheses violated: {}", violation.clone().unwrap_or_default()), |b| b.to_string()),
                ],
            ];
            write_text(out, &table(&["quantity", "value"], &rows))?;
        }
    }
    Ok(match (&violation, summary.biconditional_holds) {
        (Some(reason), _) => {
            eprintln!("hypotheses violated: {reason}");
            Status::Usage
        }
        (None, Some(true)) => Status::Pass,
        _ => Status::CheckFailed,
    })
}
