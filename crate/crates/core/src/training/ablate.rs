use super::{evaluate, train, ThresholdMode, TrainConfig};
use crate::error::Result;
use crate::fusion::{ModalityMask, Variant};
use crate::metrics::{MetricReport, REPORT_CSV_HEADER};
use crate::par;
use crate::traindata::{Dataset, Split};

/// One row of the comparison table: a model name and the variant and mask
/// behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowSpec {
    pub model: &'static str,
    pub variant: Variant,
    pub mask: ModalityMask,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub spec: RowSpec,
    pub report: MetricReport,
}

impl AblationRow {
    pub fn csv_row(&self) -> String {
        self.report.csv_row(self.spec.model, &self.spec.mask.label())
    }
}

fn mask(code: &str) -> ModalityMask {
    code.parse().expect("static mask code")
}

/// The twelve rows in table order: Majority, MPF-1 ×3, MPF-2 ×3, SVM,
/// NN-Early, NN-Cube, NN-TC, MPF.
pub fn ablation_rows() -> Vec<RowSpec> {
    let row = |model, variant, code| RowSpec {
        model,
        variant,
        mask: mask(code),
    };
    vec![
        row("Majority", Variant::Majority, "FSC"),
        row("MPF-1", Variant::Mpf, "F"),
        row("MPF-1", Variant::Mpf, "S"),
        row("MPF-1", Variant::Mpf, "C"),
        row("MPF-2", Variant::Mpf, "FS"),
        row("MPF-2", Variant::Mpf, "FC"),
        row("MPF-2", Variant::Mpf, "SC"),
        row("SVM", Variant::LinearHinge, "FSC"),
        row("NN-Early", Variant::NnEarly, "FSC"),
        row("NN-Cube", Variant::NnCube, "FSC"),
        row("NN-TC", Variant::NnTanhCube, "FSC"),
        row("MPF", Variant::Mpf, "FSC"),
    ]
}

/// Trains and tests every row of `rows` with `base`'s seed and
/// hyperparameters; only the variant and mask change between rows.
pub fn ablate(
    base: &TrainConfig,
    dataset: &Dataset,
    rows: &[RowSpec],
    mode: ThresholdMode,
) -> Result<Vec<AblationRow>> {
    base.validate()?;
    par::map(base.execution, rows, |_, spec| {
        let cfg = TrainConfig {
            variant: spec.variant,
            mask: spec.mask,
            ..base.clone()
        };
        let outcome = train(&cfg, dataset)?;
        let report = evaluate(&outcome.params, dataset, Split::Test, mode, base.execution)?;
        Ok(AblationRow { spec: *spec, report })
    })
    .into_iter()
    .collect()
}

pub fn table_csv(rows: &[AblationRow]) -> String {
    let mut out = format!("{REPORT_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}
