//! Parameter sweeps driven by a JSON spec, written as long-format CSV.
//!
//! A sweep walks a one-dimensional grid, draws `reps` fresh instances per
//! grid value with seeds `base_seed + rep`, runs every listed method on the
//! same draw, and emits one `param,method,rep,metric,value` row per metric.
//! Rows are sorted by grid position, method position, rep, then metric name,
//! so identical specs reproduce identical bytes. Cells run in parallel; the
//! row order does not depend on the schedule.

use std::fmt::Write as _;

use ndarray::{Array1, Array2, ArrayView2};
use score_core::community::hamming_error;
use score_core::mixedmem::mixed_score;
use score_core::netcore::synthetic::{
    dcbm_instance, mixed_instance, DirichletGroup, MixedInstanceSpec, ThetaSpec,
};
use score_core::netcore::{expected_adjacency, giant_component, sample_dcmm};
use score_core::rng::derive_seed;
use score_core::par;
use score_core::spectra::{eigs_sym, ratio_normalize_columns, ThresholdRule};
use score_core::vertexhunt::VhMethod;

use crate::report::Reporter;
use crate::{BenchArgs, CliError, MethodTuning};

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GroupSpec {
    pub count: usize,
    pub alpha: Vec<f64>,
}

/// Mixed-membership instance whose common degree level comes from the grid.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct MixedSweepInstance {
    pub k: usize,
    pub within: f64,
    pub between: f64,
    pub pure_per_community: usize,
    pub groups: Vec<GroupSpec>,
}

/// Block-model instance whose degree parameters are scaled by the grid.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct CommunitySweepInstance {
    pub n: usize,
    pub k: usize,
    pub within: f64,
    pub between: f64,
    pub theta: ThetaSpec,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", rename_all_fields = "kebab-case")]
pub enum SweepSpec {
    /// Grid over the common degree level; per method, the distance between
    /// hunted and planted simplex vertices plus the membership error.
    VertexHunting {
        param: String,
        grid: Vec<f64>,
        methods: Vec<String>,
        reps: usize,
        base_seed: u64,
        instance: MixedSweepInstance,
    },
    /// Grid over a degree scale factor; per method, the label error rate.
    Community {
        param: String,
        grid: Vec<f64>,
        methods: Vec<String>,
        reps: usize,
        base_seed: u64,
        instance: CommunitySweepInstance,
    },
}

struct Row {
    grid_idx: usize,
    param: f64,
    method_idx: usize,
    method: String,
    rep: usize,
    metric: &'static str,
    value: f64,
}

pub fn run_bench(args: &BenchArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", args.spec.display())))?;
    let spec: SweepSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: invalid sweep spec: {e}", args.spec.display())))?;
    let config = serde_json::json!({
        "spec_file": args.spec.display().to_string(),
        "spec": spec,
    });
    let mut rep = Reporter::new("bench", &config, args.common.seed, &args.common.out_dir)?;
    let (grid_len, methods_len, reps, base_seed) = match &spec {
        SweepSpec::VertexHunting { grid, methods, reps, base_seed, .. }
        | SweepSpec::Community { grid, methods, reps, base_seed, .. } => {
            (grid.len(), methods.len(), *reps, *base_seed)
        }
    };
    if grid_len == 0 || methods_len == 0 || reps == 0 {
        return Err(CliError::Usage(
            "sweep needs a nonempty grid, methods, and reps".into(),
        ));
    }
    let cells: Vec<Result<Vec<Row>, CliError>> = par::map_indexed(grid_len * reps, |idx| {
        let grid_idx = idx / reps;
        let rep_idx = idx % reps;
        let seed = base_seed + rep_idx as u64;
        match &spec {
            SweepSpec::VertexHunting { grid, methods, instance, .. } => {
                vertex_hunting_cell(grid[grid_idx], grid_idx, rep_idx, methods, instance, seed)
            }
            SweepSpec::Community { grid, methods, instance, .. } => {
                community_cell(grid[grid_idx], grid_idx, rep_idx, methods, instance, seed)
            }
        }
    });
    let mut rows = Vec::new();
    for cell in cells {
        rows.extend(cell?);
    }
    rows.sort_by(|a, b| {
        (a.grid_idx, a.method_idx, a.rep, a.metric)
            .cmp(&(b.grid_idx, b.method_idx, b.rep, b.metric))
    });
    let mut csv = String::from("param,method,rep,metric,value\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{},{},{},{}", r.param, r.method, r.rep, r.metric, r.value);
    }
    rep.artifact("results.csv", &csv)?;
    rep.metric("rows", rows.len() as f64);
    rep.metric("cells", (grid_len * methods_len * reps) as f64);
    rep.finish()
}

pub(crate) fn parse_vh_method(name: &str) -> Result<VhMethod, CliError> {
    match name {
        "sp" => Ok(VhMethod::Sp),
        "cvs" => Ok(VhMethod::Cvs),
        "svs0" => Ok(VhMethod::Svs0),
        "svs-star" => Ok(VhMethod::SvsStar),
        "svs-plus" => Ok(VhMethod::SvsPlus),
        other => Err(CliError::Usage(format!(
            "unknown vertex hunting method `{other}`; expected one of sp, cvs, \
             svs0, svs-star, svs-plus"
        ))),
    }
}

/// One (grid value, rep) draw of the vertex-hunting sweep: the planted
/// vertices come from the noiseless expected adjacency restricted to the
/// giant component, and every method sees the same sampled graph.
fn vertex_hunting_cell(
    beta: f64,
    grid_idx: usize,
    rep_idx: usize,
    methods: &[String],
    instance: &MixedSweepInstance,
    seed: u64,
) -> Result<Vec<Row>, CliError> {
    let spec = MixedInstanceSpec {
        k: instance.k,
        within: instance.within,
        between: instance.between,
        pure_per_community: instance.pure_per_community,
        groups: instance
            .groups
            .iter()
            .map(|g| DirichletGroup {
                count: g.count,
                alpha: g.alpha.clone(),
            })
            .collect(),
        theta: ThetaSpec::Fixed { value: beta },
    };
    let (params, pi) = mixed_instance(&spec, seed)?;
    let g = sample_dcmm(&params, derive_seed(seed, "sweep-net", 0))?;
    let (giant, map) = giant_component(&g);
    let k = instance.k;
    let pi_giant = select_rows(&pi.view(), &map);
    let truth_vertices = planted_vertices(&params, &map, &pi_giant.view(), k)?;
    let mut rows = Vec::new();
    for (method_idx, name) in methods.iter().enumerate() {
        let method = parse_vh_method(name)?;
        let est = mixed_score(
            &giant,
            k,
            method,
            &Default::default(),
            ThresholdRule::Auto,
            seed,
        )?;
        let vertex_error = vertex_distance(&est.vertices.vertices.view(), &truth_vertices.view())?;
        let (mse, _) = best_membership_metrics(&est.pi_hat.view(), &pi_giant.view())?;
        for (metric, value) in [("membership_mse", mse), ("vertex_error", vertex_error)] {
            rows.push(Row {
                grid_idx,
                param: beta,
                method_idx,
                method: name.clone(),
                rep: rep_idx,
                metric,
                value,
            });
        }
    }
    Ok(rows)
}

fn community_cell(
    scale: f64,
    grid_idx: usize,
    rep_idx: usize,
    methods: &[String],
    instance: &CommunitySweepInstance,
    seed: u64,
) -> Result<Vec<Row>, CliError> {
    let (mut params, labels) = dcbm_instance(
        instance.n,
        instance.k,
        instance.within,
        instance.between,
        instance.theta.clone(),
        seed,
    )?;
    params.theta.mapv_inplace(|t| t * scale);
    let g = sample_dcmm(&params, derive_seed(seed, "sweep-net", 0))?;
    let (giant, map) = giant_component(&g);
    let truth: Vec<usize> = map.iter().map(|&i| labels[i]).collect();
    let tuning = MethodTuning::default();
    let mut rows = Vec::new();
    for (method_idx, name) in methods.iter().enumerate() {
        let res = crate::run_named_method(&giant, instance.k, name, &tuning, seed)?;
        let (_, rate) = hamming_error(&res.labels, &truth)?;
        rows.push(Row {
            grid_idx,
            param: scale,
            method_idx,
            method: name.clone(),
            rep: rep_idx,
            metric: "hamming",
            value: rate,
        });
    }
    Ok(rows)
}

fn select_rows(m: &ArrayView2<f64>, rows: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((rows.len(), m.ncols()));
    for (r, &i) in rows.iter().enumerate() {
        out.row_mut(r).assign(&m.row(i));
    }
    out
}

/// Simplex vertices of the noiseless model: ratio rows of the expected
/// adjacency's eigenvectors, averaged over each community's pure nodes.
fn planted_vertices(
    params: &score_core::netcore::DcmmParams,
    keep: &[usize],
    pi_kept: &ArrayView2<f64>,
    k: usize,
) -> Result<Array2<f64>, CliError> {
    let (omega, _) = expected_adjacency(params, true);
    let omega_sub = select_rows(&select_rows(&omega.view(), keep).t(), keep);
    let eig = eigs_sym(&omega_sub.view(), k)?;
    // A huge fixed clip leaves the oracle ratios untouched.
    let ratios = ratio_normalize_columns(&eig.vectors.view(), ThresholdRule::Fixed(1e9))?.r;
    let mut vertices = Array2::zeros((k, k - 1));
    for c in 0..k {
        let mut count = 0usize;
        let mut sum = Array1::<f64>::zeros(k - 1);
        for (r, pi_row) in pi_kept.rows().into_iter().enumerate() {
            if pi_row[c] > 1.0 - 1e-12 {
                sum += &ratios.row(r);
                count += 1;
            }
        }
        if count == 0 {
            return Err(CliError::Runtime(format!(
                "no pure node of community {c} survived in the giant component"
            )));
        }
        vertices
            .row_mut(c)
            .assign(&(sum / count as f64));
    }
    Ok(vertices)
}

/// Worst per-vertex Euclidean distance under the best matching of estimated
/// to planted vertices.
fn vertex_distance(est: &ArrayView2<f64>, truth: &ArrayView2<f64>) -> Result<f64, CliError> {
    let k = truth.nrows();
    if est.nrows() != k || est.ncols() != truth.ncols() {
        return Err(CliError::Runtime(format!(
            "vertex sets disagree: {}x{} vs {}x{}",
            est.nrows(),
            est.ncols(),
            k,
            truth.ncols()
        )));
    }
    let mut best = f64::INFINITY;
    for perm in permutations(k)? {
        let mut worst: f64 = 0.0;
        for (c, t_row) in truth.rows().into_iter().enumerate() {
            let d2: f64 = est
                .row(perm[c])
                .iter()
                .zip(t_row)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            worst = worst.max(d2.sqrt());
        }
        best = best.min(worst);
    }
    Ok(best)
}

/// Mean squared row error and worst row l1 error at the column permutation
/// that minimizes the squared error.
pub(crate) fn best_membership_metrics(
    est: &ArrayView2<f64>,
    truth: &ArrayView2<f64>,
) -> Result<(f64, f64), CliError> {
    let (n, k) = (truth.nrows(), truth.ncols());
    if est.nrows() != n || est.ncols() != k {
        return Err(CliError::Runtime(format!(
            "membership matrices disagree: {}x{} vs {n}x{k}",
            est.nrows(),
            est.ncols()
        )));
    }
    let mut best = (f64::INFINITY, f64::INFINITY);
    for perm in permutations(k)? {
        let mut sq = 0.0;
        let mut max_l1: f64 = 0.0;
        for i in 0..n {
            let mut l1 = 0.0;
            for c in 0..k {
                let d = est[[i, perm[c]]] - truth[[i, c]];
                sq += d * d;
                l1 += d.abs();
            }
            max_l1 = max_l1.max(l1);
        }
        let mse = sq / n as f64;
        if mse < best.0 {
            best = (mse, max_l1);
        }
    }
    Ok(best)
}

pub(crate) fn permutations(k: usize) -> Result<Vec<Vec<usize>>, CliError> {
    if k > 8 {
        return Err(CliError::Runtime(format!(
            "permutation matching supports at most 8 communities, got {k}"
        )));
    }
    let mut all = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::new();
        for p in &all {
            for c in 0..k {
                if !p.contains(&c) {
                    let mut q = p.clone();
                    q.push(c);
                    next.push(q);
                }
            }
        }
        all = next;
    }
    Ok(all)
}
