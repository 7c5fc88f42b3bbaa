//! Comparison of a symbolic normal form with the expression it came from,
//! mode by mode on every basis state.

use crate::expr::{FieldExpr, NormalForm};
use crate::scalar::GaussRat;

use super::{FieldMemo, GradedModule, OracleError, Vector};

#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    pub n: i64,
    pub state: String,
    pub symbolic: String,
    pub direct: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    /// Number of (mode, basis state) pairs compared.
    pub checked: usize,
    pub mismatch: Option<Mismatch>,
}

impl VerifyReport {
    pub fn agrees(&self) -> bool {
        self.mismatch.is_none()
    }
}

impl GradedModule<'_> {
    /// Compare `nf_n` with `expr_n` on all basis states up to the cutoff, for
    /// every `n` whose level shift lies in `-cutoff..=cutoff`. Images are
    /// compared in full, including components above the cutoff.
    pub fn verify_against_symbolic(
        &self,
        nf: &NormalForm,
        expr: &FieldExpr,
    ) -> Result<VerifyReport, OracleError> {
        let symbolic = nf.to_expr();
        let cut = self.cutoff() as i64;
        let range = [self.weight_range(&symbolic), self.weight_range(expr)]
            .into_iter()
            .flatten()
            .reduce(|(a, b), (c, d)| (a.min(c), b.max(d)));
        let mut report = VerifyReport {
            checked: 0,
            mismatch: None,
        };
        let Some((lo, hi)) = range else {
            return Ok(report);
        };
        let mut memo = FieldMemo::new();
        for n in (lo - 1 - cut)..=(hi - 1 + cut) {
            for w in self.flat_basis() {
                let v: Vector = [(w.clone(), GaussRat::from_int(1))].into_iter().collect();
                let s = self.apply_field_memo(&symbolic, n, &v, &mut memo)?;
                let d = self.apply_field_memo(expr, n, &v, &mut memo)?;
                report.checked += 1;
                if s != d {
                    report.mismatch = Some(Mismatch {
                        n,
                        state: self.label(w),
                        symbolic: self.render_vector(&s),
                        direct: self.render_vector(&d),
                    });
                    return Ok(report);
                }
            }
        }
        Ok(report)
    }

    pub fn render_vector(&self, v: &Vector) -> String {
        if v.is_empty() {
            return "0".to_string();
        }
        v.iter()
            .map(|(w, c)| format!("({c}) {}", self.label(w)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}
