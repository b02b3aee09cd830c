//! Execution of each subcommand into a [`Report`] and its plot tables.

use std::path::Path;

use nalgebra::DMatrix;
use smva_core::fixtures;
use smva_core::methods::standardized;
use smva_core::{
    bca, from_edge_list, load_dataset, mc_bounds, mem_basis, moran, moran_scatter, moran_test,
    multispati, parse_coordinates, parse_edge_list, parse_partition, pca, pcaiv_mem, pcaiv_poly,
    procrustes_test, row_standardize, Alternative, Connectivity, Dataset, DiagramResult, Partition,
    SpatialWeights,
};

use crate::config::{Analysis, Command, PlotKind, RunConfig, WeightsChoice};
use crate::report::{Cell, Report, Table};
use crate::Failure;

/// Everything a command may read, aligned on the dataset ids.
pub struct Inputs {
    pub data: Option<Dataset>,
    pub ids: Vec<String>,
    pub connectivity: Option<Connectivity>,
    pub regions: Option<Vec<String>>,
    pub coords: Option<DMatrix<f64>>,
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))
}

fn graph_ids(edges: &[(String, String)]) -> Vec<String> {
    let mut ids: Vec<String> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (a, b) in edges {
        for id in [a, b] {
            if seen.insert(id.clone()) {
                ids.push(id.clone());
            }
        }
    }
    ids
}

pub fn load_inputs(cfg: &RunConfig) -> Result<Inputs, Failure> {
    let graph_only = matches!(cfg.command, Command::Mem | Command::McBounds);
    let bundled = cfg.data.is_none() && !(graph_only && cfg.edges.is_some());
    let mut inputs = if bundled {
        let f = fixtures::guerry()?;
        Inputs {
            ids: f.data.ids().to_vec(),
            data: Some(f.data),
            connectivity: Some(f.connectivity),
            regions: Some(f.regions),
            coords: Some(f.coords),
        }
    } else if let Some(path) = &cfg.data {
        let data = load_dataset(path).map_err(|e| match e {
            smva_core::Error::Io(io) => {
                Failure::Validation(format!("cannot read {}: {io}", path.display()))
            }
            other => other.into(),
        })?;
        Inputs {
            ids: data.ids().to_vec(),
            data: Some(data),
            connectivity: None,
            regions: None,
            coords: None,
        }
    } else {
        Inputs {
            data: None,
            ids: Vec::new(),
            connectivity: None,
            regions: None,
            coords: None,
        }
    };
    if let Some(path) = &cfg.edges {
        let edges = parse_edge_list(&read(path)?)?;
        if inputs.ids.is_empty() {
            inputs.ids = graph_ids(&edges);
        }
        inputs.connectivity = Some(from_edge_list(&edges, &inputs.ids)?);
    }
    if let Some(path) = &cfg.partition {
        inputs.regions = Some(parse_partition(&read(path)?, &inputs.ids)?);
    }
    if let Some(path) = &cfg.coords {
        inputs.coords = Some(parse_coordinates(&read(path)?, &inputs.ids)?);
    }
    Ok(inputs)
}

impl Inputs {
    fn data(&self) -> Result<&Dataset, Failure> {
        self.data
            .as_ref()
            .ok_or_else(|| Failure::Validation("this command needs --data".into()))
    }

    fn weights(&self, choice: WeightsChoice) -> Result<SpatialWeights, Failure> {
        let c = self
            .connectivity
            .as_ref()
            .ok_or_else(|| Failure::Validation("this command needs --edges".into()))?;
        Ok(match choice {
            WeightsChoice::Row => row_standardize(c)?,
            WeightsChoice::Binary => SpatialWeights::binary(c),
        })
    }

    fn optional_weights(&self, choice: WeightsChoice) -> Result<Option<SpatialWeights>, Failure> {
        match self.connectivity {
            Some(_) => self.weights(choice).map(Some),
            None => Ok(None),
        }
    }

    fn partition(&self) -> Result<Partition, Failure> {
        let labels = self
            .regions
            .as_ref()
            .ok_or_else(|| Failure::Validation("this command needs --partition".into()))?;
        Ok(Partition::from_labels(labels)?)
    }

    fn coords(&self) -> Result<&DMatrix<f64>, Failure> {
        self.coords
            .as_ref()
            .ok_or_else(|| Failure::Validation("this command needs --coords".into()))
    }
}

/// Plot tables available for a result.
#[derive(Default)]
pub struct Plots {
    pub screeplot: Option<Table>,
    pub circle: Option<Table>,
    pub scores: Option<Table>,
    pub arrows: Option<Table>,
    pub scatter: Option<Table>,
}

impl Plots {
    pub fn take(self, kind: PlotKind, command: &str) -> Result<Table, Failure> {
        let t = match kind {
            PlotKind::Screeplot => self.screeplot,
            PlotKind::Circle => self.circle,
            PlotKind::Scores => self.scores,
            PlotKind::Arrows => self.arrows,
            PlotKind::Scatter => self.scatter,
        };
        t.ok_or_else(|| {
            Failure::Validation(format!(
                "plot kind `{}` is not available for `{command}`",
                format!("{kind:?}").to_lowercase()
            ))
        })
    }
}

fn axis_names(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|a| format!("{prefix}{a}")).collect()
}

/// Rows ordered by id.
fn id_table(name: &str, ids: &[String], columns: Vec<String>, m: &[&DMatrix<f64>]) -> Table {
    let mut header = vec!["id".to_string()];
    header.extend(columns);
    let mut t = Table::with_columns(name, header);
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
    for i in order {
        let mut row = vec![Cell::Text(ids[i].clone())];
        for block in m {
            row.extend(block.row(i).iter().map(|v| Cell::Num(*v)));
        }
        t.push(row);
    }
    t
}

fn eigen_table(eigenvalues: &[f64], total: f64) -> Table {
    let mut t = Table::new(
        "eigenvalues",
        &["axis", "eigenvalue", "share", "cumulative"],
    );
    let mut cum = 0.0;
    for (k, l) in eigenvalues.iter().enumerate() {
        cum += l / total;
        t.push(vec![
            (k + 1).into(),
            (*l).into(),
            (l / total).into(),
            cum.into(),
        ]);
    }
    t
}

fn correlations(x: &DMatrix<f64>, scores: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows() as f64;
    DMatrix::from_fn(x.ncols(), scores.ncols(), |j, k| {
        let a = x.column(j);
        let b = scores.column(k);
        let (ma, mb) = (a.sum() / n, b.sum() / n);
        let cov: f64 = a
            .iter()
            .zip(b.iter())
            .map(|(u, v)| (u - ma) * (v - mb))
            .sum();
        let va: f64 = a.iter().map(|u| (u - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|v| (v - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    })
}

/// Tables shared by every ordination: spectrum, scores, variable
/// coordinates and the spatial autocorrelation of each score.
fn ordination(
    report: &mut Report,
    data: &Dataset,
    diagram: &DiagramResult,
    scores: &DMatrix<f64>,
    w: Option<&SpatialWeights>,
    axes: usize,
) -> Result<Plots, Failure> {
    let k = axes.min(scores.ncols());
    let lead = scores.columns(0, k).into_owned();
    report.scalar("rank", diagram.rank);
    report.scalar("total_inertia", diagram.total_inertia);
    let eig = eigen_table(&diagram.eigenvalues, diagram.total_inertia);
    report.table(eig.clone());
    let scores_table = id_table("row_scores", data.ids(), axis_names("axis", k), &[&lead]);
    report.table(scores_table.clone());
    let mut cols = Table::with_columns("column_scores", {
        let mut h = vec!["variable".to_string()];
        h.extend(axis_names("axis", k));
        h
    });
    for (j, label) in data.labels().iter().enumerate() {
        let mut row = vec![Cell::Text(label.clone())];
        row.extend((0..k).map(|a| Cell::Num(diagram.column_scores[(j, a)])));
        cols.push(row);
    }
    report.table(cols);
    let corr = correlations(&standardized(data)?, &lead);
    let mut circle = Table::with_columns("circle", {
        let mut h = vec!["variable".to_string()];
        h.extend(axis_names("axis", k));
        h
    });
    for (j, label) in data.labels().iter().enumerate() {
        let mut row = vec![Cell::Text(label.clone())];
        row.extend((0..k).map(|a| Cell::Num(corr[(j, a)])));
        circle.push(row);
    }
    let mut screeplot = Table::new("screeplot", &["axis", "eigenvalue", "share"]);
    for r in &eig.rows {
        screeplot.push(r[..3].to_vec());
    }
    let mut plots = Plots {
        screeplot: Some(screeplot),
        circle: Some(circle),
        scores: Some(Table {
            name: "scores".into(),
            columns: {
                let mut h = vec!["id".to_string()];
                h.extend(axis_names("s", k));
                h
            },
            rows: scores_table.rows,
        }),
        ..Plots::default()
    };
    if let Some(w) = w {
        let mut mc = Table::new("score_moran", &["axis", "mc"]);
        for a in 0..k {
            let r: Vec<f64> = lead.column(a).iter().copied().collect();
            mc.push(vec![(a + 1).into(), moran(&r, w)?.into()]);
        }
        report.table(mc);
        let lag = w.lag_matrix(&lead)?;
        let mut cols = axis_names("s", k);
        cols.extend(axis_names("lag_s", k));
        plots.arrows = Some(id_table("arrows", data.ids(), cols, &[&lead, &lag]));
    }
    Ok(plots)
}

fn two_columns(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    m.columns(0, k.min(m.ncols())).into_owned()
}

/// Leading scores of one analysis, for concordance.
fn analysis_scores(inputs: &Inputs, cfg: &RunConfig, a: Analysis) -> Result<DMatrix<f64>, Failure> {
    let data = inputs.data()?;
    let k = cfg.axes;
    Ok(match a {
        Analysis::Pca => two_columns(&pca(data, true, true)?.row_scores, k),
        Analysis::Bca => two_columns(&bca(data, &inputs.partition()?)?.row_projections, k),
        Analysis::Poly => two_columns(
            &pcaiv_poly(data, inputs.coords()?, cfg.degree)?.row_projections,
            k,
        ),
        Analysis::Mem => two_columns(
            &pcaiv_mem(data, &inputs.weights(cfg.weights)?, cfg.mem_count)?.row_projections,
            k,
        ),
        Analysis::Ms => two_columns(
            &multispati(data, &inputs.weights(cfg.weights)?)?
                .diagram
                .row_scores,
            k,
        ),
    })
}

fn procrustes_table(
    inputs: &Inputs,
    cfg: &RunConfig,
    analyses: &[Analysis],
) -> Result<Table, Failure> {
    let mut scores = Vec::new();
    for &a in analyses {
        if !scores.iter().any(|(b, _)| *b == a) {
            scores.push((a, analysis_scores(inputs, cfg, a)?));
        }
    }
    let mut t = Table::new("procrustes", &["first", "second", "statistic", "p_value"]);
    for i in 0..scores.len() {
        for j in 0..i {
            let (a, sa) = &scores[i];
            let (b, sb) = &scores[j];
            if sa.ncols() != sb.ncols() {
                return Err(Failure::Validation(format!(
                    "{} has {} axes, {} has {}",
                    a.label(),
                    sa.ncols(),
                    b.label(),
                    sb.ncols()
                )));
            }
            let r = procrustes_test(sa, sb, cfg.permutations, cfg.seed)?;
            t.push(vec![
                a.label().into(),
                b.label().into(),
                r.statistic.into(),
                r.p_value.into(),
            ]);
        }
    }
    Ok(t)
}

fn moran_table(
    data: &Dataset,
    w: &SpatialWeights,
    cfg: &RunConfig,
    only: Option<&str>,
    alternative: Alternative,
) -> Result<Table, Failure> {
    let labels: Vec<&String> = match only {
        Some(v) => vec![data
            .labels()
            .iter()
            .find(|l| *l == v)
            .ok_or_else(|| Failure::Validation(format!("unknown variable `{v}`")))?],
        None => data.labels().iter().collect(),
    };
    let mut t = Table::new(
        "moran",
        &[
            "variable",
            "mc",
            "p_value",
            "null_mean",
            "null_sd",
            "null_min",
            "null_max",
        ],
    );
    for label in labels {
        let x = data.column(label).expect("label exists");
        let r = moran_test(&x, w, cfg.permutations, cfg.seed, alternative)?;
        let s = r.null_summary;
        t.push(vec![
            label.as_str().into(),
            r.mc.into(),
            r.p_value.into(),
            s.mean.into(),
            s.sd.into(),
            s.min.into(),
            s.max.into(),
        ]);
    }
    Ok(t)
}

pub fn execute(cfg: &RunConfig, inputs: &Inputs) -> Result<(Report, Plots), Failure> {
    let name = cfg.command.name();
    let mut report = Report::new(name);
    let plots = match &cfg.command {
        Command::Pca => {
            let data = inputs.data()?;
            let res = pca(data, true, true)?;
            report.scalar("n", data.n());
            report.scalar("p", data.p());
            let w = inputs.optional_weights(cfg.weights)?;
            ordination(
                &mut report,
                data,
                &res,
                &res.row_scores,
                w.as_ref(),
                cfg.axes,
            )?
        }
        Command::Bca => {
            let data = inputs.data()?;
            let part = inputs.partition()?;
            let res = bca(data, &part)?;
            report.scalar("groups", part.g());
            report.scalar("between_ratio", res.between_ratio);
            let w = inputs.optional_weights(cfg.weights)?;
            let plots = ordination(
                &mut report,
                data,
                &res.diagram,
                &res.row_projections,
                w.as_ref(),
                cfg.axes,
            )?;
            let mut header = vec!["group".to_string(), "weight".to_string()];
            header.extend(data.labels().iter().cloned());
            let mut means = Table::with_columns("group_means", header);
            let k = cfg.axes.min(res.diagram.rank);
            let mut gs = Table::with_columns("group_scores", {
                let mut h = vec!["group".to_string()];
                h.extend(axis_names("axis", k));
                h
            });
            for (g, group) in part.group_names().iter().enumerate() {
                let mut row = vec![group.as_str().into(), res.group_weights[g].into()];
                row.extend(res.group_means.row(g).iter().map(|v| Cell::Num(*v)));
                means.push(row);
                let mut row = vec![group.as_str().into()];
                row.extend((0..k).map(|a| Cell::Num(res.diagram.row_scores[(g, a)])));
                gs.push(row);
            }
            report.table(means);
            report.table(gs);
            plots
        }
        Command::PcaivPoly | Command::PcaivMem => {
            let data = inputs.data()?;
            let w = inputs.optional_weights(cfg.weights)?;
            let res = if cfg.command == Command::PcaivPoly {
                report.scalar("degree", cfg.degree);
                pcaiv_poly(data, inputs.coords()?, cfg.degree)?
            } else {
                report.scalar("mem_count", cfg.mem_count);
                pcaiv_mem(data, &inputs.weights(cfg.weights)?, cfg.mem_count)?
            };
            report.scalar("predictors", res.predictors.ncols());
            report.scalar("explained_ratio", res.explained_ratio);
            ordination(
                &mut report,
                data,
                &res.diagram,
                &res.row_projections,
                w.as_ref(),
                cfg.axes,
            )?
        }
        Command::Multispati => {
            let data = inputs.data()?;
            let w = inputs.weights(cfg.weights)?;
            let res = multispati(data, &w)?;
            let mut plots = ordination(
                &mut report,
                data,
                &res.diagram,
                &res.diagram.row_scores,
                Some(&w),
                cfg.axes,
            )?;
            let mut axes = Table::new("axes", &["axis", "eigenvalue", "variance", "mc"]);
            for k in 0..res.diagram.rank {
                axes.push(vec![
                    (k + 1).into(),
                    res.diagram.eigenvalues[k].into(),
                    res.axis_variance[k].into(),
                    res.axis_mc[k].into(),
                ]);
            }
            report.table(axes);
            let mut all = Table::new("spectrum", &["axis", "eigenvalue"]);
            for (k, l) in res.all_eigenvalues.iter().enumerate() {
                all.push(vec![(k + 1).into(), (*l).into()]);
            }
            report.table(all);
            let k = cfg.axes.min(res.diagram.rank);
            let lag = two_columns(&res.lag_scores, k);
            report.table(id_table(
                "lag_scores",
                data.ids(),
                axis_names("axis", k),
                &[&lag],
            ));
            let screeplot = plots.screeplot.as_mut().expect("ordination screeplot");
            screeplot.rows.clear();
            for (k, l) in res.all_eigenvalues.iter().enumerate() {
                screeplot.push(vec![
                    (k + 1).into(),
                    (*l).into(),
                    (l / res.diagram.total_inertia).into(),
                ]);
            }
            plots
        }
        Command::Moran {
            variable,
            alternative,
        } => {
            let data = inputs.data()?;
            let w = inputs.weights(cfg.weights)?;
            let alternative = Alternative::from(*alternative);
            report.scalar("n_perm", cfg.permutations);
            report.scalar("seed", cfg.seed);
            report.scalar("alternative", alternative.as_str());
            report.table(moran_table(
                data,
                &w,
                cfg,
                variable.as_deref(),
                alternative,
            )?);
            Plots::default()
        }
        Command::MoranScatter { variable } => {
            let data = inputs.data()?;
            let w = inputs.weights(cfg.weights)?;
            let x = data
                .column(variable)
                .ok_or_else(|| Failure::Validation(format!("unknown variable `{variable}`")))?;
            let s = moran_scatter(&x, &w)?;
            report.scalar("variable", variable.as_str());
            report.scalar("slope", s.slope);
            report.scalar("max_cooks_d", data.ids()[s.max_cooks_d()].as_str());
            let m = DMatrix::from_fn(data.n(), 3, |i, j| [s.z[i], s.z_lag[i], s.cooks_d[i]][j]);
            let cols = vec!["z".to_string(), "z_lag".into(), "cooks_d".into()];
            let t = id_table("scatter", data.ids(), cols, &[&m]);
            report.table(t.clone());
            Plots {
                scatter: Some(t),
                ..Plots::default()
            }
        }
        Command::Mem => {
            let w = inputs.weights(cfg.weights)?;
            let basis = mem_basis(&w)?;
            let k = cfg.mem_count.min(basis.len());
            let mut t = Table::new("eigenvalues", &["mem", "eigenvalue", "mc"]);
            for (j, (l, mc)) in basis
                .eigenvalues
                .iter()
                .zip(basis.moran_values())
                .enumerate()
            {
                t.push(vec![(j + 1).into(), (*l).into(), mc.into()]);
            }
            report.scalar("n", basis.n());
            report.table(t);
            let v = two_columns(&basis.vectors, k);
            report.table(id_table(
                "vectors",
                &inputs.ids,
                axis_names("MEM", k),
                &[&v],
            ));
            Plots::default()
        }
        Command::McBounds => {
            let w = inputs.weights(cfg.weights)?;
            let (lo, hi) = mc_bounds(&w)?;
            report.scalar("n", w.n());
            report.scalar("lower", lo);
            report.scalar("upper", hi);
            Plots::default()
        }
        Command::Procrustes { analyses } => {
            if analyses.len() < 2 {
                return Err(Failure::Validation(
                    "procrustes needs at least two analyses".into(),
                ));
            }
            report.scalar("n_perm", cfg.permutations);
            report.scalar("seed", cfg.seed);
            report.scalar("axes", cfg.axes);
            report.table(procrustes_table(inputs, cfg, analyses)?);
            Plots::default()
        }
        Command::ReproducePaper => {
            reproduce(&mut report, inputs, cfg)?;
            Plots::default()
        }
    };
    Ok((report, plots))
}

fn share_rows(t: &mut Table, analysis: &str, diagram: &DiagramResult, axes: usize) {
    for (k, s) in diagram.shares().iter().take(axes).enumerate() {
        t.push(vec![
            analysis.into(),
            (k + 1).into(),
            diagram.eigenvalues[k].into(),
            (*s).into(),
        ]);
    }
}

/// Every headline figure for the loaded inputs in one report.
fn reproduce(report: &mut Report, inputs: &Inputs, cfg: &RunConfig) -> Result<(), Failure> {
    let data = inputs.data()?;
    let w = inputs.weights(cfg.weights)?;
    report.scalar("n", data.n());
    report.scalar("p", data.p());
    report.scalar("n_perm", cfg.permutations);
    report.scalar("seed", cfg.seed);
    report.table(moran_table(data, &w, cfg, None, Alternative::Greater)?);

    let p = pca(data, true, true)?;
    let b = bca(data, &inputs.partition()?)?;
    let poly = pcaiv_poly(data, inputs.coords()?, cfg.degree)?;
    let mem = pcaiv_mem(data, &w, cfg.mem_count)?;
    let ms = multispati(data, &w)?;
    report.scalar("pca_total_inertia", p.eigenvalues.iter().sum::<f64>());
    report.scalar("bca_between_ratio", b.between_ratio);
    report.scalar("pcaiv_poly_explained_ratio", poly.explained_ratio);
    report.scalar("pcaiv_mem_explained_ratio", mem.explained_ratio);

    let mut shares = Table::new("shares", &["analysis", "axis", "eigenvalue", "share"]);
    share_rows(&mut shares, "PCA", &p, cfg.axes);
    share_rows(&mut shares, "BCA", &b.diagram, cfg.axes);
    share_rows(&mut shares, "POLY", &poly.diagram, cfg.axes);
    share_rows(&mut shares, "MEM", &mem.diagram, cfg.axes);
    report.table(shares);

    let mut pca_mc = Table::new("pca_score_moran", &["axis", "mc"]);
    for k in 0..cfg.axes.min(p.rank) {
        let r: Vec<f64> = p.row_scores.column(k).iter().copied().collect();
        pca_mc.push(vec![(k + 1).into(), moran(&r, &w)?.into()]);
    }
    report.table(pca_mc);

    let mut axes = Table::new(
        "multispati",
        &["axis", "eigenvalue", "variance", "mc", "variance_times_mc"],
    );
    for k in 0..ms.diagram.rank {
        axes.push(vec![
            (k + 1).into(),
            ms.diagram.eigenvalues[k].into(),
            ms.axis_variance[k].into(),
            ms.axis_mc[k].into(),
            (ms.axis_variance[k] * ms.axis_mc[k]).into(),
        ]);
    }
    report.table(axes);

    let all = [
        Analysis::Pca,
        Analysis::Bca,
        Analysis::Poly,
        Analysis::Mem,
        Analysis::Ms,
    ];
    report.table(procrustes_table(inputs, cfg, &all)?);

    let mut influence = Table::new("max_cooks_d", &["variable", "id", "cooks_d"]);
    let mut lag_cols = Vec::new();
    for label in data.labels() {
        let x = data.column(label).expect("label exists");
        let s = moran_scatter(&x, &w)?;
        let i = s.max_cooks_d();
        influence.push(vec![
            label.as_str().into(),
            data.ids()[i].as_str().into(),
            s.cooks_d[i].into(),
        ]);
        lag_cols.push(w.lag(&x)?);
    }
    report.table(influence);
    let lags = DMatrix::from_fn(data.n(), data.p(), |i, j| lag_cols[j][i]);
    report.table(id_table(
        "lagged_values",
        data.ids(),
        data.labels().to_vec(),
        &[&lags],
    ));
    Ok(())
}
