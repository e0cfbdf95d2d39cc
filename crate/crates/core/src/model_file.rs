//! JSON model files.
//!
//! ```json
//! {
//!   "metadata": { "generator": "copy", "factored": true },
//!   "n": 2,
//!   "head_alphabet": { "size": 2 },
//!   "dep_alphabets": [ { "size": 2 }, { "size": 2, "labels": ["a", "b"] } ],
//!   "head_prior": [0.5, 0.5],
//!   "cond_tables": [ [[0.9, 0.1], [0.1, 0.9]], [[0.9, 0.1], [0.1, 0.9]] ]
//! }
//! ```
//!
//! A joint that does not factor stores `joint` (flat, row-major, head first)
//! in place of `head_prior` and `cond_tables`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::dist::{check_factorization, Alphabet, FactoredModel, JointTable, VariableId};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub metadata: Map<String, Value>,
    pub n: usize,
    pub head_alphabet: Alphabet,
    pub dep_alphabets: Vec<Alphabet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head_prior: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cond_tables: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint: Option<Vec<f64>>,
}

/// A model read from disk: either factored or an arbitrary joint.
#[derive(Clone, Debug, PartialEq)]
pub enum LoadedModel {
    Factored(FactoredModel),
    Joint(JointTable),
}

impl LoadedModel {
    pub fn joint(&self) -> Result<JointTable> {
        match self {
            LoadedModel::Factored(m) => crate::dist::build_joint(m),
            LoadedModel::Joint(j) => Ok(j.clone()),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            LoadedModel::Factored(m) => m.n(),
            LoadedModel::Joint(j) => j.dependents().len(),
        }
    }
}

impl ModelDocument {
    pub fn from_factored(model: &FactoredModel, metadata: Map<String, Value>) -> Self {
        ModelDocument {
            metadata,
            n: model.n(),
            head_alphabet: model.head_alphabet().clone(),
            dep_alphabets: model.dep_alphabets().to_vec(),
            head_prior: Some(model.head_prior().to_vec()),
            cond_tables: Some(model.cond_tables().to_vec()),
            joint: None,
        }
    }

    /// Serializes a joint over `L, M_1..M_n`, recording in the metadata
    /// whether it factors.
    pub fn from_joint(joint: &JointTable, mut metadata: Map<String, Value>) -> Result<Self> {
        let n = crate::placement::dependent_count(joint)?;
        let report = check_factorization(joint, crate::dist::MODEL_SUM_TOL)?;
        metadata.insert("factored".into(), Value::Bool(report.holds));
        metadata.insert("max_factorization_violation".into(), Value::from(report.max_violation));
        Ok(ModelDocument {
            metadata,
            n,
            head_alphabet: joint.alphabet(VariableId::Head).expect("has head").clone(),
            dep_alphabets: (1..=n)
                .map(|i| joint.alphabet(VariableId::Dep(i)).expect("has dep").clone())
                .collect(),
            head_prior: None,
            cond_tables: None,
            joint: Some(joint.probabilities().to_vec()),
        })
    }

    pub fn into_model(self) -> Result<LoadedModel> {
        if self.dep_alphabets.len() != self.n {
            return Err(Error::InvalidModel(format!(
                "n = {} but {} dep_alphabets given",
                self.n,
                self.dep_alphabets.len()
            )));
        }
        match (self.head_prior, self.cond_tables, self.joint) {
            (Some(prior), Some(tables), None) => Ok(LoadedModel::Factored(FactoredModel::new(
                self.head_alphabet,
                self.dep_alphabets,
                prior,
                tables,
            )?)),
            (None, None, Some(probs)) => {
                let mut vars = vec![(VariableId::Head, self.head_alphabet)];
                vars.extend(
                    self.dep_alphabets
                        .into_iter()
                        .enumerate()
                        .map(|(i, a)| (VariableId::Dep(i + 1), a)),
                );
                Ok(LoadedModel::Joint(JointTable::new(vars, probs)?))
            }
            _ => Err(Error::InvalidModel(
                "give either head_prior and cond_tables, or joint".into(),
            )),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}

pub fn parse_model(text: &str) -> Result<LoadedModel> {
    let doc: ModelDocument =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("model file: {e}")))?;
    doc.into_model()
}

pub fn load_model(path: &Path) -> Result<LoadedModel> {
    let text = fs::read_to_string(path)?;
    parse_model(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn save_document(doc: &ModelDocument, path: &Path) -> Result<()> {
    fs::write(path, doc.to_json())?;
    Ok(())
}
