//! JSON snapshot of a module: bindings, basis and generator mode matrices.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{GradedModule, HighestWeight, OracleError};
use crate::expr::FieldExpr;

#[derive(Clone, Debug, Serialize)]
pub struct MatrixDump {
    pub generator: String,
    pub mode: i64,
    /// `[row, col, value]` with exact values as strings.
    pub entries: Vec<(usize, usize, String)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModuleDump {
    pub bindings: BTreeMap<String, String>,
    pub cutoff: u32,
    pub highest_weight: String,
    pub level_dims: Vec<usize>,
    pub basis: Vec<String>,
    pub matrices: Vec<MatrixDump>,
}

impl GradedModule<'_> {
    /// Every generator mode whose level shift lies in `-cutoff..=cutoff`.
    pub fn dump(&self) -> Result<ModuleDump, OracleError> {
        let alg = self.algebra();
        let bindings = self
            .bindings()
            .iter()
            .map(|(i, v)| (alg.params().name(i).to_string(), v.to_string()))
            .collect();
        let highest_weight = match self.highest_weight() {
            HighestWeight::Vacuum => "vacuum".to_string(),
            HighestWeight::Verma(eig) => {
                let parts: Vec<String> = eig
                    .iter()
                    .map(|(g, v)| format!("{}={v}", alg.generator_name(*g)))
                    .collect();
                format!("verma({})", parts.join(", "))
            }
        };
        let cut = self.cutoff() as i64;
        let mut matrices = Vec::new();
        for g in 0..alg.generators().len() {
            let h = alg.weight_of(g) as i64;
            for n in (h - 1 - cut)..=(h - 1 + cut) {
                let m = self.mode_of(&FieldExpr::Generator(g), n)?;
                matrices.push(MatrixDump {
                    generator: alg.generator_name(g).to_string(),
                    mode: n,
                    entries: m
                        .entries
                        .iter()
                        .map(|((r, c), v)| (*r, *c, v.to_string()))
                        .collect(),
                });
            }
        }
        Ok(ModuleDump {
            bindings,
            cutoff: self.cutoff(),
            highest_weight,
            level_dims: self.level_dims(),
            basis: self.flat_basis().into_iter().map(|w| self.label(w)).collect(),
            matrices,
        })
    }
}
