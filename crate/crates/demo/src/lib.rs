//! Browser demo: synthetic data, training, retrieval and the semantic graph,
//! exposed to JavaScript as JSON-in/JSON-out functions.

use ckd::baselines::{fit_cca, DEFAULT_RIDGE};
use ckd::data::{synth, Dataset, SynthSpec};
use ckd::eval::{evaluate_split, RetrievalReport, Similarity, Task, DEFAULT_CMC_DEPTHS};
use ckd::semgraph::build_graph;
use ckd::solver::{fit, Method, Modality, SolverConfig};
use ckd::{CkdError, Matrix, Result};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Largest sample count the page will generate.
pub const MAX_SAMPLES: usize = 600;
/// Largest sample count drawn in the similarity heatmap.
pub const MAX_HEATMAP: usize = 120;

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoParams {
    pub n: usize,
    pub c: usize,
    pub d1: usize,
    pub d2: usize,
    pub noise: f64,
    pub labels_max: usize,
    pub seed: u64,
    pub d: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub beta: f64,
    pub method: String,
}

impl Default for DemoParams {
    fn default() -> Self {
        Self {
            n: 200,
            c: 5,
            d1: 30,
            d2: 20,
            noise: 4.0,
            labels_max: 1,
            seed: 0,
            d: 5,
            alpha: 100.0,
            lambda: 0.01,
            beta: 1.0,
            method: "ckd".into(),
        }
    }
}

impl DemoParams {
    fn dataset(&self) -> Result<Dataset> {
        if self.n > MAX_SAMPLES {
            return Err(CkdError::InvalidConfig(format!("n is limited to {MAX_SAMPLES} in the demo")));
        }
        synth(&SynthSpec {
            n: self.n,
            c: self.c,
            d1: self.d1,
            d2: self.d2,
            latent_dim: SynthSpec::default().latent_dim.min(self.d1).min(self.d2),
            noise_sigma: self.noise,
            labels_min: 1,
            labels_max: self.labels_max.max(1),
            seed: self.seed,
            ..SynthSpec::default()
        })
    }

    fn solver(&self) -> SolverConfig {
        SolverConfig {
            d: self.d,
            alpha1: self.alpha,
            alpha2: self.alpha,
            lambda1: self.lambda,
            lambda2: self.lambda,
            beta: self.beta,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub class: usize,
    pub modality: u8,
}

#[derive(Debug, Serialize)]
pub struct TaskScore {
    pub map: f64,
    pub cmc: Vec<(usize, f64)>,
}

impl From<RetrievalReport> for TaskScore {
    fn from(r: RetrievalReport) -> Self {
        Self { map: r.map, cmc: r.cmc.into_iter().collect() }
    }
}

#[derive(Debug, Serialize)]
pub struct TrainResult {
    pub method: String,
    pub objective: Vec<f64>,
    pub converged: bool,
    pub i2t: TaskScore,
    pub t2i: TaskScore,
    /// First two subspace coordinates of every query sample in both modalities.
    pub points: Vec<Point>,
}

#[derive(Debug, Serialize)]
pub struct MethodScore {
    pub method: String,
    pub map_i2t: f64,
    pub map_t2i: f64,
    pub avg: f64,
}

#[derive(Debug, Serialize)]
pub struct GraphView {
    pub n: usize,
    /// Row-major `n x n` similarity, samples ordered by first class.
    pub similarity: Vec<f64>,
    pub classes: Vec<usize>,
    pub mean_degree: f64,
}

type Projector<'a> = Box<dyn Fn(&Matrix, Modality) -> Result<Matrix> + 'a>;

fn scores(ds: &Dataset, project: &Projector) -> Result<(RetrievalReport, RetrievalReport)> {
    let (train, query) = (ds.train(), ds.query());
    let run = |task| evaluate_split(task, project, &query, &train, None, &DEFAULT_CMC_DEPTHS, Similarity::Nc);
    Ok((run(Task::I2T)?, run(Task::T2I)?))
}

fn first_class(ds: &Dataset, i: usize) -> usize {
    ds.y.positives(i).first().copied().unwrap_or(0)
}

pub fn train(params: &DemoParams) -> Result<TrainResult> {
    let method: Method = params.method.parse()?;
    let ds = params.dataset()?;
    let train = ds.train();
    let (project, objective, converged): (Projector, Vec<f64>, bool) = if method == Method::Cca {
        let model = fit_cca(&train.x1, &train.x2, params.d, DEFAULT_RIDGE)?;
        (Box::new(move |x, m| model.project(x, m)), Vec::new(), true)
    } else {
        let cfg = params.solver().for_method(method);
        let (model, log) = fit(&train.x1, &train.x2, &train.y, &cfg)?;
        (Box::new(move |x, m| model.project(x, m)), log.objectives(), log.converged)
    };
    let (i2t, t2i) = scores(&ds, &project)?;

    let query = ds.query();
    let mut points = Vec::new();
    for (tag, m) in [(1u8, Modality::First), (2u8, Modality::Second)] {
        let v = project(query.features(m), m)?;
        for (k, &i) in ds.split.query.iter().enumerate() {
            points.push(Point {
                x: v[(k, 0)],
                y: if v.ncols() > 1 { v[(k, 1)] } else { 0.0 },
                class: first_class(&ds, i),
                modality: tag,
            });
        }
    }
    Ok(TrainResult {
        method: method.to_string(),
        objective,
        converged,
        i2t: i2t.into(),
        t2i: t2i.into(),
        points,
    })
}

pub fn compare(params: &DemoParams) -> Result<Vec<MethodScore>> {
    let mut out = Vec::new();
    for method in ["ckd", "ckd-beta0", "kdm", "cca"] {
        let r = train(&DemoParams { method: method.into(), ..params.clone() })?;
        out.push(MethodScore {
            method: r.method,
            map_i2t: r.i2t.map,
            map_t2i: r.t2i.map,
            avg: (r.i2t.map + r.t2i.map) / 2.0,
        });
    }
    Ok(out)
}

pub fn graph(params: &DemoParams) -> Result<GraphView> {
    let ds = params.dataset()?;
    let n = ds.n().min(MAX_HEATMAP);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (first_class(&ds, i), i));
    let y = ds.y.select_rows(&order);
    let g = build_graph(&y);
    let s = g.similarity();
    let similarity = (0..n).flat_map(|i| (0..n).map(move |j| s[(i, j)])).collect();
    let mean_degree = g.laplacian().diagonal().mean();
    Ok(GraphView {
        n,
        similarity,
        classes: order.iter().map(|&i| first_class(&ds, i)).collect(),
        mean_degree,
    })
}

fn call<T: Serialize>(json: &str, f: impl Fn(&DemoParams) -> Result<T>) -> std::result::Result<String, String> {
    let params: DemoParams = if json.trim().is_empty() {
        DemoParams::default()
    } else {
        serde_json::from_str(json).map_err(|e| format!("bad parameters: {e}"))?
    };
    let out = f(&params).map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&out).expect("demo output serializes"))
}

#[wasm_bindgen(js_name = trainModel)]
pub fn train_model(params: &str) -> std::result::Result<String, JsValue> {
    call(params, train).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = compareMethods)]
pub fn compare_methods(params: &str) -> std::result::Result<String, JsValue> {
    call(params, compare).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = semanticGraph)]
pub fn semantic_graph(params: &str) -> std::result::Result<String, JsValue> {
    call(params, graph).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn train_returns_curve_points_and_scores() {
        let r = train(&DemoParams { noise: 0.0, ..DemoParams::default() }).unwrap();
        assert!(r.objective.len() >= 2);
        assert!(r.objective.windows(2).all(|w| w[1] <= w[0] + 1e-6 * w[0].abs().max(1.0)));
        assert_eq!(r.points.len(), 2 * 60);
        assert!(r.i2t.map >= 0.98 && r.t2i.map >= 0.98);
        assert_eq!(r.i2t.cmc.len(), DEFAULT_CMC_DEPTHS.len());
    }

    #[test]
    fn compare_lists_four_methods() {
        let rows = compare(&DemoParams { n: 120, ..DemoParams::default() }).unwrap();
        let names: Vec<&str> = rows.iter().map(|r| r.method.as_str()).collect();
        assert_eq!(names, ["CKD", "CKD(beta=0)", "KDM-like", "CCA"]);
        assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.avg)));
    }

    #[test]
    fn graph_is_sorted_and_symmetric() {
        let g = graph(&DemoParams { labels_max: 3, ..DemoParams::default() }).unwrap();
        assert_eq!(g.n, MAX_HEATMAP);
        assert_eq!(g.similarity.len(), g.n * g.n);
        assert!(g.classes.windows(2).all(|w| w[0] <= w[1]));
        for i in 0..g.n {
            assert_eq!(g.similarity[i * g.n + i], 1.0);
            for j in 0..i {
                assert_eq!(g.similarity[i * g.n + j], g.similarity[j * g.n + i]);
            }
        }
    }

    #[test]
    fn json_interface() {
        let out = call(r#"{"n": 80, "method": "kdm"}"#, train).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["method"], "KDM-like");
        assert!(call(r#"{"bogus": 1}"#, train).unwrap_err().contains("bogus"));
        assert!(call(r#"{"method": "svm"}"#, train).is_err());
        assert!(call(r#"{"n": 100000}"#, train).is_err());
        assert!(call("", graph).is_ok());
    }
}
