//! JSON model files.
//!
//! Trees are stored as nested objects: internal nodes as
//! `{"feature", "threshold", "mean", "count", "left", "right"}` and leaves as
//! `{"leaf": true, "value", "count"}`. Node counts are kept because the
//! path-conditional attribution weights branches by them.

use bimq_core::features::FEATURE_NAMES;
use bimq_core::learn::{Dataset, ForestKind, ForestModel, ForestParams, KnnModel, LinearModel, Model, Node, Predict};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

pub const MODEL_FILE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    /// Leaderboard name, e.g. `ExtraTrees`.
    pub name: String,
    pub n_features: usize,
    pub feature_names: Vec<String>,
    pub model: ModelDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelDoc {
    Linear { model: LinearModel },
    Knn { k: usize, rows: Vec<Vec<f64>>, targets: Vec<f64>, groups: Vec<String> },
    Forest { method: ForestKind, params: ForestParams, seed: u64, trees: Vec<Value> },
}

fn node_to_json(node: &Node) -> Value {
    match node {
        Node::Leaf { prediction, count } => json!({ "leaf": true, "value": prediction, "count": count }),
        Node::Internal { feature, threshold, left, right, mean, count } => json!({
            "feature": feature,
            "threshold": threshold,
            "mean": mean,
            "count": count,
            "left": node_to_json(left),
            "right": node_to_json(right),
        }),
    }
}

fn get<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value, String> {
    obj.get(key).ok_or_else(|| format!("node is missing `{key}`"))
}

fn num(obj: &Map<String, Value>, key: &str) -> Result<f64, String> {
    get(obj, key)?.as_f64().ok_or_else(|| format!("`{key}` is not a number"))
}

fn uint(obj: &Map<String, Value>, key: &str) -> Result<usize, String> {
    get(obj, key)?
        .as_u64()
        .and_then(|v| usize::try_from(v).ok())
        .ok_or_else(|| format!("`{key}` is not a non-negative integer"))
}

fn node_from_json(v: &Value, n_features: usize) -> Result<Node, String> {
    let obj = v.as_object().ok_or("tree node is not an object")?;
    if obj.get("leaf").and_then(Value::as_bool) == Some(true) {
        return Ok(Node::Leaf { prediction: num(obj, "value")?, count: uint(obj, "count")? });
    }
    let feature = uint(obj, "feature")?;
    if feature >= n_features {
        return Err(format!("split feature {feature} out of range"));
    }
    Ok(Node::Internal {
        feature,
        threshold: num(obj, "threshold")?,
        mean: num(obj, "mean")?,
        count: uint(obj, "count")?,
        left: Box::new(node_from_json(get(obj, "left")?, n_features)?),
        right: Box::new(node_from_json(get(obj, "right")?, n_features)?),
    })
}

impl ModelFile {
    pub fn from_model(model: &Model) -> Self {
        let doc = match model {
            Model::Linear(m) => ModelDoc::Linear { model: m.clone() },
            Model::Knn(m) => ModelDoc::Knn {
                k: m.k,
                rows: m.train.rows().map(<[f64]>::to_vec).collect(),
                targets: m.train.y.clone(),
                groups: m.train.groups.clone(),
            },
            Model::Forest(f) => ModelDoc::Forest {
                method: f.kind,
                params: f.params,
                seed: f.seed,
                trees: f.trees.iter().map(node_to_json).collect(),
            },
        };
        ModelFile {
            version: MODEL_FILE_VERSION,
            name: model.name(),
            n_features: model.n_features(),
            feature_names: FEATURE_NAMES.iter().take(model.n_features()).map(|s| s.to_string()).collect(),
            model: doc,
        }
    }

    pub fn to_model(&self) -> Result<Model, String> {
        if self.version != MODEL_FILE_VERSION {
            return Err(format!("unsupported model file version {}", self.version));
        }
        let model = match &self.model {
            ModelDoc::Linear { model } => {
                if model.weights.len() != self.n_features {
                    return Err("weight count does not match n_features".into());
                }
                Model::Linear(model.clone())
            }
            ModelDoc::Knn { k, rows, targets, groups } => {
                let train = Dataset::from_rows(rows, targets.clone(), groups.clone()).map_err(|e| e.to_string())?;
                if train.n_features != self.n_features {
                    return Err("training rows do not match n_features".into());
                }
                Model::Knn(KnnModel::fit(&train, *k).map_err(|e| e.to_string())?)
            }
            ModelDoc::Forest { method, params, seed, trees } => {
                if trees.is_empty() {
                    return Err("forest has no trees".into());
                }
                let trees = trees
                    .iter()
                    .map(|t| node_from_json(t, self.n_features))
                    .collect::<Result<Vec<_>, _>>()?;
                Model::Forest(ForestModel {
                    kind: *method,
                    params: *params,
                    seed: *seed,
                    n_features: self.n_features,
                    trees,
                })
            }
        };
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("model documents always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let v: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        match v.get("version") {
            Some(Value::Number(_)) => {}
            _ => return Err("model file has no version".into()),
        }
        serde_json::from_value(v).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use bimq_core::learn::{default_suite, ModelSpec};

    fn data() -> Dataset {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 / 7.0, ((i * 13) % 11) as f64, (i % 3) as f64 * 0.1]).collect();
        let y = rows.iter().map(|r| r[0] * 2.0 + r[1].sqrt() - r[2]).collect();
        Dataset::from_rows(&rows, y, (0..40).map(|i| format!("D{}", i % 5)).collect()).unwrap()
    }

    #[test]
    fn every_suite_model_round_trips() {
        let d = data();
        for spec in default_suite(3) {
            let spec = match spec {
                ModelSpec::Forest { kind, mut params } => {
                    params.n_trees = params.n_trees.min(5);
                    ModelSpec::Forest { kind, params }
                }
                s => s,
            };
            let model = spec.fit(&d, 11).unwrap();
            let file = ModelFile::from_model(&model);
            let back = ModelFile::from_json(&file.to_json()).unwrap().to_model().unwrap();
            assert_eq!(back, model, "{}", spec.name());
            assert_eq!(back.predict(&d), model.predict(&d));
        }
    }

    #[test]
    fn version_is_mandatory() {
        let d = data();
        let model = ModelSpec::Ols.fit(&d, 0).unwrap();
        let mut v: Value = serde_json::from_str(&ModelFile::from_model(&model).to_json()).unwrap();
        v.as_object_mut().unwrap().remove("version");
        assert!(ModelFile::from_json(&v.to_string()).is_err());
        v["version"] = json!(99);
        assert!(ModelFile::from_json(&v.to_string()).unwrap().to_model().is_err());
    }
}
