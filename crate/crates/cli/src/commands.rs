use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use pairplan_core::baselines::{
    complete_pairs, cosine_pairs, default_reference, estimate_inference_cost, oneref_pairs, window_pairs,
};
use pairplan_core::splat::{make_fixture_scene, PinholeCamera, Rgb};
use pairplan_core::view_graph::{
    check_connectivity, circular_distance, classify_range, edge_importance, expand_to_directed_pairs, plan_gaps,
    to_dot, CandidateEdge, DirectionMode, PairingPlan,
};
use pairplan_core::wavelet::{combined_loss, dwt2_multi, pyramid_dump, FilterKind, PerBand};
use serde::Serialize;

use crate::config::{RunConfig, Strategy};
use crate::error::{invalid, CliError, Result};
use crate::images;

/// Selected pairs for one strategy. Baseline edges carry the same
/// importance scores GAPS would assign, so totals are comparable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanReport {
    pub strategy: Strategy,
    pub n: usize,
    pub mode: DirectionMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub views: Option<Vec<String>>,
    pub edges: Vec<CandidateEdge>,
    pub pairs: Vec<(usize, usize)>,
    pub pair_count: usize,
    pub undirected_count: usize,
    pub total_weight: f64,
    pub connected: bool,
    pub estimated_mb: f64,
}

fn score_pairs(config: &RunConfig, n: usize, pairs: &[(usize, usize)]) -> Result<PairingPlan> {
    let params = config.gaps.params(n);
    params.validate()?;
    let undirected: BTreeSet<(usize, usize)> = pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let edges = undirected
        .into_iter()
        .map(|(i, j)| {
            let distance = circular_distance(i, j, n)?;
            Ok(CandidateEdge {
                i,
                j,
                distance,
                range: classify_range(distance, &params),
                weight: edge_importance(distance, &params),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PairingPlan::from_edges(edges))
}

/// Builds the plan for `n` views. `views` is only needed by the cosine
/// strategy.
pub fn plan(config: &RunConfig, n: usize, views: Option<&[PathBuf]>) -> Result<PlanReport> {
    if n < 2 {
        return invalid(format!("at least 2 views are required, got {n}"));
    }
    let mode = config.mode;
    let (plan, pairs) = if config.strategy == Strategy::Gaps {
        let plan = plan_gaps(&config.gaps.problem(n)?, mode);
        let pairs = expand_to_directed_pairs(&plan, mode);
        (plan, pairs)
    } else {
        let both = match config.strategy {
            Strategy::Complete => complete_pairs(n),
            Strategy::Oneref => {
                let reference = config.oneref.reference.unwrap_or_else(|| default_reference(n));
                oneref_pairs(n, reference)?
            }
            Strategy::Window => window_pairs(n, config.window.window),
            Strategy::Cosine => {
                let Some(views) = views else {
                    return invalid("the cosine strategy needs images; pass --views-dir");
                };
                let features = views
                    .iter()
                    .enumerate()
                    .map(|(i, p)| images::descriptor(p, i))
                    .collect::<Result<Vec<_>>>()?;
                cosine_pairs(&features, config.cosine.k_nearest, config.cosine.sim_min)?
            }
            Strategy::Gaps => unreachable!(),
        };
        let plan = score_pairs(config, n, &both)?;
        let pairs = match mode {
            DirectionMode::Both => both,
            DirectionMode::Forward => expand_to_directed_pairs(&plan, mode),
        };
        (plan, pairs)
    };
    log::debug!("{} plan for {n} views: {} edges", config.strategy.as_str(), plan.len());
    Ok(PlanReport {
        strategy: config.strategy,
        n,
        mode,
        views: views.map(|v| {
            v.iter()
                .map(|p| p.file_name().unwrap_or_default().to_string_lossy().into_owned())
                .collect()
        }),
        edges: plan.edges().to_vec(),
        pair_count: pairs.len(),
        undirected_count: plan.len(),
        total_weight: plan.total_weight(),
        connected: check_connectivity(&plan, n).connected,
        estimated_mb: estimate_inference_cost(pairs.len(), config.cost.per_pair_mb, config.cost.base_mb),
        pairs,
    })
}

pub fn plan_dot(report: &PlanReport) -> String {
    to_dot(&PairingPlan::from_edges(report.edges.clone()), report.n)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub strategy: Strategy,
    pub n: usize,
    pub pairs: usize,
    pub undirected: usize,
    pub estimated_mb: f64,
}

/// One row per `(strategy, n)`, strategies in the given order and view
/// counts ascending.
pub fn compare(config: &RunConfig, strategies: &[Strategy], counts: &[usize]) -> Result<Vec<CompareRow>> {
    let counts: BTreeSet<usize> = counts.iter().copied().collect();
    let mut rows = Vec::new();
    for &strategy in strategies {
        let config = RunConfig {
            strategy,
            ..config.clone()
        };
        for &n in &counts {
            let report = plan(&config, n, None)?;
            rows.push(CompareRow {
                strategy,
                n,
                pairs: report.pair_count,
                undirected: report.undirected_count,
                estimated_mb: report.estimated_mb,
            });
        }
    }
    Ok(rows)
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from("strategy,n,pairs,undirected,estimated_mb\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.strategy.as_str(),
            r.n,
            r.pairs,
            r.undirected,
            r.estimated_mb
        );
    }
    out
}

#[derive(Debug, Serialize)]
struct ManifestView {
    index: usize,
    image: String,
    depth: String,
    camera: PinholeCamera,
}

#[derive(Debug, Serialize)]
struct Manifest {
    preset: String,
    seed: u64,
    background: Rgb,
    width: usize,
    height: usize,
    views: Vec<ManifestView>,
}

/// Renders every camera of a fixture preset into `out_dir`: one PNG and
/// one depth dump per view, `manifest.json` with the poses in capture order
/// and `scene.json` with the full scene. Returns the number of views.
pub fn render(preset: &str, seed: u64, out_dir: &Path) -> Result<usize> {
    let scene = make_fixture_scene(preset, seed)?;
    fs::create_dir_all(out_dir).map_err(CliError::io(out_dir))?;
    let mut views = Vec::with_capacity(scene.cameras.len());
    for (index, camera) in scene.cameras.iter().enumerate() {
        let frame = scene.render_view(index)?;
        let image = format!("view_{index:02}.png");
        let depth = format!("view_{index:02}_depth.bin");
        images::save_png(&out_dir.join(&image), frame.color.view())?;
        images::save_array2(&out_dir.join(&depth), frame.depth.view())?;
        views.push(ManifestView {
            index,
            image,
            depth,
            camera: camera.clone(),
        });
    }
    let (width, height) = scene.cameras.first().map_or((0, 0), |c| c.resolution());
    let manifest = Manifest {
        preset: scene.preset.clone(),
        seed,
        background: scene.background,
        width,
        height,
        views,
    };
    write_json(&out_dir.join("manifest.json"), &manifest)?;
    write_json(&out_dir.join("scene.json"), &scene)?;
    log::info!("rendered {} views into {}", scene.cameras.len(), out_dir.display());
    Ok(scene.cameras.len())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelBands {
    pub level: usize,
    #[serde(flatten)]
    pub bands: PerBand<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossReport {
    pub gt: String,
    pub rendered: String,
    pub shape: Vec<usize>,
    pub filter: FilterKind,
    pub levels: usize,
    pub lambda: PerBand<f64>,
    pub photometric_weight: f64,
    pub wavelet_weight: f64,
    pub total: f64,
    pub photometric: f64,
    pub wavelet: f64,
    /// Weighted contribution of each band, finest level first.
    pub per_level: Vec<LevelBands>,
}

pub fn loss(config: &RunConfig, gt_path: &Path, rendered_path: &Path) -> Result<LossReport> {
    let gt = images::load_array(gt_path)?;
    let rendered = images::load_array(rendered_path)?;
    if gt.shape() != rendered.shape() {
        return invalid(format!(
            "image shapes differ: {} is {:?}, {} is {:?}",
            gt_path.display(),
            gt.shape(),
            rendered_path.display(),
            rendered.shape()
        ));
    }
    let w = &config.wavelet;
    let result = combined_loss(
        gt.view(),
        rendered.view(),
        &w.spec(),
        w.photometric_weight,
        w.wavelet_weight,
    )?;
    Ok(LossReport {
        gt: gt_path.display().to_string(),
        rendered: rendered_path.display().to_string(),
        shape: gt.shape().to_vec(),
        filter: w.filter,
        levels: w.levels,
        lambda: w.lambda,
        photometric_weight: w.photometric_weight,
        wavelet_weight: w.wavelet_weight,
        total: result.total,
        photometric: result.photometric,
        wavelet: result.wavelet,
        per_level: result
            .per_band
            .into_iter()
            .map(|(level, bands)| LevelBands { level, bands })
            .collect(),
    })
}

/// Decomposes every channel of `input` and writes the pyramid dump to `out`.
pub fn dwt(config: &RunConfig, input: &Path, out: &Path) -> Result<()> {
    let array = images::load_array(input)?;
    let spec = config.wavelet.spec();
    let pyramids = array
        .axis_iter(ndarray::Axis(2))
        .map(|channel| dwt2_multi(channel, &spec))
        .collect::<pairplan_core::Result<Vec<_>>>()?;
    let (header, data) = pyramid_dump(&pyramids);
    images::save_dump(out, &header, &data)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    text
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)).map_err(CliError::io(path))
}

/// Writes `text` to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(CliError::io(path)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_strategy(strategy: Strategy) -> RunConfig {
        RunConfig {
            strategy,
            ..RunConfig::default()
        }
    }

    #[test]
    fn baseline_counts() {
        assert_eq!(
            plan(&with_strategy(Strategy::Complete), 9, None).unwrap().pair_count,
            72
        );
        assert_eq!(plan(&with_strategy(Strategy::Oneref), 12, None).unwrap().pair_count, 22);
        let mut window = with_strategy(Strategy::Window);
        assert_eq!(plan(&window, 2, None).unwrap().pair_count, 2);
        window.window = crate::config::WindowConfig { window: 50 };
        assert_eq!(plan(&window, 6, None).unwrap().pair_count, 30);
    }

    #[test]
    fn gaps_triangle_doubled() {
        let mut config = with_strategy(Strategy::Gaps);
        config.gaps.offsets = Some(vec![1]);
        config.gaps.degree_budget = 2;
        let report = plan(&config, 3, None).unwrap();
        assert_eq!(report.pair_count, 6);
        assert_eq!(report.undirected_count, 3);
        assert!(report.connected);
    }

    #[test]
    fn forward_mode_halves_baselines() {
        let mut config = with_strategy(Strategy::Complete);
        config.mode = DirectionMode::Forward;
        let report = plan(&config, 5, None).unwrap();
        assert_eq!(report.pair_count, 10);
        assert!(report.pairs.iter().all(|&(i, j)| i < j));
    }

    #[test]
    fn baseline_edges_are_scored() {
        let report = plan(&with_strategy(Strategy::Oneref), 6, None).unwrap();
        let expected: f64 = report.edges.iter().map(|e| e.weight).sum();
        assert_eq!(report.total_weight, expected);
        assert!(report.edges.iter().all(|e| e.i == 3 || e.j == 3));
    }

    #[test]
    fn cosine_without_views_is_rejected() {
        let err = plan(&with_strategy(Strategy::Cosine), 4, None).unwrap_err();
        assert_eq!(err.exit_code(), CliError::VALIDATION);
    }

    #[test]
    fn compare_rows_are_ordered() {
        let rows = compare(
            &RunConfig::default(),
            &[Strategy::Complete, Strategy::Oneref],
            &[12, 3, 9, 6],
        )
        .unwrap();
        let pairs: Vec<usize> = rows.iter().map(|r| r.pairs).collect();
        assert_eq!(pairs, vec![6, 30, 72, 132, 4, 10, 16, 22]);
        let csv = compare_csv(&rows);
        assert!(csv.starts_with("strategy,n,pairs,undirected,estimated_mb\ncomplete,3,6,3,2600\n"));
    }
}
