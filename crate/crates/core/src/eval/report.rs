use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{exact_match, token_f1, EvalError};
use crate::corpus::{tokenize, QAExample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalExampleResult {
    pub example_id: String,
    pub best_f1: f64,
    pub em: u8,
    pub prediction_text: String,
    /// Index of the first gold answer reaching `best_f1`.
    pub matched_gold: usize,
}

impl EvalExampleResult {
    /// Scores `prediction` against every gold answer and keeps the best.
    pub fn score(example_id: &str, prediction: &str, golds: &[String]) -> Self {
        let mut best_f1 = f64::NEG_INFINITY;
        let mut matched_gold = 0;
        let mut em = 0;
        for (i, gold) in golds.iter().enumerate() {
            let f1 = token_f1(prediction, gold);
            if f1 > best_f1 {
                best_f1 = f1;
                matched_gold = i;
            }
            em = em.max(exact_match(prediction, gold));
        }
        Self {
            example_id: example_id.to_string(),
            best_f1: best_f1.max(0.0),
            em,
            prediction_text: prediction.to_string(),
            matched_gold,
        }
    }
}

/// How answer lengths are measured for the histograms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LengthUnit {
    /// Whitespace-separated tokens of the raw answer.
    #[default]
    Whitespace,
    /// Tokens under the corpus tokenizer.
    Tokens,
    Chars,
}

impl LengthUnit {
    pub fn measure(self, text: &str) -> usize {
        match self {
            Self::Whitespace => text.split_whitespace().count(),
            Self::Tokens => tokenize(text).len(),
            Self::Chars => text.chars().count(),
        }
    }
}

pub fn length_histogram<S: AsRef<str>>(texts: &[S], unit: LengthUnit) -> BTreeMap<usize, usize> {
    let mut hist = BTreeMap::new();
    for t in texts {
        *hist.entry(unit.measure(t.as_ref())).or_default() += 1;
    }
    hist
}

/// Aggregate scores of one system on one dataset. Scores are stored at full
/// precision on the 0-100 scale; rounding happens only in [`render_table`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(rename = "dataset")]
    pub dataset_name: String,
    #[serde(rename = "system")]
    pub system_name: String,
    #[serde(rename = "macro_f1")]
    pub macro_f1_x100: f64,
    #[serde(rename = "em")]
    pub em_x100: f64,
    #[serde(rename = "n")]
    pub example_count: usize,
    pub per_example: Vec<EvalExampleResult>,
    pub pred_lengths: BTreeMap<usize, usize>,
    pub gold_lengths: BTreeMap<usize, usize>,
    /// Dataset examples that had no prediction and were scored as empty.
    #[serde(default)]
    pub missing_predictions: Vec<String>,
}

impl EvalReport {
    /// Builds a report whose aggregates are the plain means of `per_example`, x100.
    pub fn from_results(
        dataset_name: &str,
        system_name: &str,
        per_example: Vec<EvalExampleResult>,
    ) -> Result<Self, EvalError> {
        if per_example.is_empty() {
            return Err(EvalError::EmptyDataset);
        }
        let n = per_example.len() as f64;
        let f1_sum: f64 = per_example.iter().map(|r| r.best_f1).sum();
        let em_sum: f64 = per_example.iter().map(|r| r.em as f64).sum();
        Ok(Self {
            dataset_name: dataset_name.to_string(),
            system_name: system_name.to_string(),
            macro_f1_x100: 100.0 * f1_sum / n,
            em_x100: 100.0 * em_sum / n,
            example_count: per_example.len(),
            per_example,
            pred_lengths: BTreeMap::new(),
            gold_lengths: BTreeMap::new(),
            missing_predictions: Vec::new(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let raw = std::fs::read_to_string(path).map_err(|e| EvalError::Io(path.display().to_string(), e))?;
        serde_json::from_str(&raw).map_err(|e| EvalError::Format(e.to_string()))
    }
}

/// Scores every dataset example against its prediction. Examples without a
/// prediction are scored as the empty answer and listed in `missing_predictions`.
///
/// The gold histogram measures each example's first gold answer.
pub fn evaluate(
    predictions: &BTreeMap<String, String>,
    dataset: &[QAExample],
    dataset_name: &str,
    system_name: &str,
    unit: LengthUnit,
) -> Result<EvalReport, EvalError> {
    if dataset.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let mut seen = HashSet::new();
    for ex in dataset {
        if !seen.insert(ex.id.as_str()) {
            return Err(EvalError::DuplicateExample(ex.id.clone()));
        }
        if ex.gold_answers.is_empty() {
            return Err(EvalError::NoGold(ex.id.clone()));
        }
    }

    let mut missing = Vec::new();
    let per_example: Vec<EvalExampleResult> = dataset
        .iter()
        .map(|ex| {
            let prediction = predictions.get(&ex.id).map(String::as_str).unwrap_or_else(|| {
                missing.push(ex.id.clone());
                ""
            });
            EvalExampleResult::score(&ex.id, prediction, &ex.gold_answers)
        })
        .collect();

    let preds: Vec<&str> = per_example.iter().map(|r| r.prediction_text.as_str()).collect();
    let golds: Vec<&str> = dataset.iter().map(|ex| ex.gold_answers[0].as_str()).collect();
    let pred_lengths = length_histogram(&preds, unit);
    let gold_lengths = length_histogram(&golds, unit);

    let mut report = EvalReport::from_results(dataset_name, system_name, per_example)?;
    report.pred_lengths = pred_lengths;
    report.gold_lengths = gold_lengths;
    report.missing_predictions = missing;
    Ok(report)
}

pub fn load_predictions(path: &Path) -> Result<BTreeMap<String, String>, EvalError> {
    let raw = std::fs::read_to_string(path).map_err(|e| EvalError::Io(path.display().to_string(), e))?;
    serde_json::from_str(&raw).map_err(|e| EvalError::Format(e.to_string()))
}

/// Plain-text table with one row per report and scores to two decimals.
pub fn render_table(reports: &[EvalReport]) -> String {
    let headers = ["Dataset", "QA System", "F1 Score", "EM"];
    let rows: Vec<[String; 4]> = reports
        .iter()
        .map(|r| {
            [
                r.dataset_name.clone(),
                r.system_name.clone(),
                format!("{:.2}", r.macro_f1_x100),
                format!("{:.2}", r.em_x100),
            ]
        })
        .collect();

    let mut widths = headers.map(|h| h.chars().count());
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }

    let mut out = String::new();
    let line = |out: &mut String, cells: [&str; 4]| {
        let _ = writeln!(
            out,
            "{:<w0$} | {:<w1$} | {:>w2$} | {:>w3$}",
            cells[0],
            cells[1],
            cells[2],
            cells[3],
            w0 = widths[0],
            w1 = widths[1],
            w2 = widths[2],
            w3 = widths[3]
        );
    };
    line(&mut out, headers);
    let _ = writeln!(
        out,
        "{}",
        widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-")
    );
    let mut previous_dataset: Option<&str> = None;
    for row in &rows {
        // dataset name only on the first row of each group
        let dataset = if previous_dataset == Some(row[0].as_str()) { "" } else { row[0].as_str() };
        previous_dataset = Some(row[0].as_str());
        line(&mut out, [dataset, &row[1], &row[2], &row[3]]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(id: &str, golds: &[&str]) -> QAExample {
        QAExample {
            id: id.into(),
            question: "q".into(),
            context: None,
            article_id: None,
            gold_answers: golds.iter().map(|g| g.to_string()).collect(),
        }
    }

    fn preds(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn perfect_predictions() {
        let data = [ex("1", &["14 days"]), ex("2", &["RNA virus"])];
        let r = evaluate(&preds(&[("1", "14 days"), ("2", "RNA virus")]), &data, "d", "s", LengthUnit::Whitespace).unwrap();
        assert_eq!(r.macro_f1_x100, 100.0);
        assert_eq!(r.em_x100, 100.0);
        assert_eq!(r.example_count, 2);
    }

    #[test]
    fn macro_average() {
        // best_f1 = 1, 0.8, 0
        let data = [ex("1", &["14 days"]), ex("2", &["14 days"]), ex("3", &["14 days"])];
        let p = preds(&[("1", "14 days"), ("2", "about 14 days"), ("3", "masks")]);
        let r = evaluate(&p, &data, "d", "s", LengthUnit::Whitespace).unwrap();
        let f1s: Vec<f64> = r.per_example.iter().map(|e| e.best_f1).collect();
        assert_eq!(f1s[0], 1.0);
        assert!((f1s[1] - 0.8).abs() < 1e-12);
        assert_eq!(f1s[2], 0.0);
        assert!((r.macro_f1_x100 - 60.0).abs() < 1e-9);
        assert_eq!(format!("{:.2}", r.macro_f1_x100), "60.00");
    }

    #[test]
    fn best_over_golds() {
        let r = EvalExampleResult::score("x", "14 days", &["two weeks".into(), "about 14 days".into(), "14 days".into()]);
        assert_eq!(r.best_f1, 1.0);
        assert_eq!(r.em, 1);
        assert_eq!(r.matched_gold, 2);
    }

    #[test]
    fn missing_predictions_score_empty() {
        let data = [ex("1", &["14 days"]), ex("2", &["x"])];
        let r = evaluate(&preds(&[("1", "14 days")]), &data, "d", "s", LengthUnit::Whitespace).unwrap();
        assert_eq!(r.missing_predictions, vec!["2".to_string()]);
        assert_eq!(r.per_example[1].best_f1, 0.0);
        assert_eq!(r.em_x100, 50.0);
    }

    #[test]
    fn dataset_errors() {
        assert!(matches!(
            evaluate(&preds(&[]), &[], "d", "s", LengthUnit::Whitespace),
            Err(EvalError::EmptyDataset)
        ));
        let dup = [ex("1", &["a"]), ex("1", &["b"])];
        assert!(matches!(
            evaluate(&preds(&[]), &dup, "d", "s", LengthUnit::Whitespace),
            Err(EvalError::DuplicateExample(_))
        ));
    }

    #[test]
    fn histograms() {
        let h = length_histogram(&["14 days", "14 days", "a b c"], LengthUnit::Whitespace);
        assert_eq!(h, BTreeMap::from([(2, 2), (3, 1)]));
        assert!(length_histogram::<&str>(&[], LengthUnit::Whitespace).is_empty());
        assert_eq!(LengthUnit::Tokens.measure("RNA-virus"), 2);
        assert_eq!(LengthUnit::Whitespace.measure("RNA-virus"), 1);
        assert_eq!(LengthUnit::Chars.measure("14 days"), 7);

        let data = [ex("1", &["14 days"]), ex("2", &["x"]), ex("3", &["a b c"])];
        let r = evaluate(&preds(&[("1", "two")]), &data, "d", "s", LengthUnit::Whitespace).unwrap();
        assert_eq!(r.pred_lengths.values().sum::<usize>(), 3);
        assert_eq!(r.gold_lengths.values().sum::<usize>(), 3);
    }

    #[test]
    fn json_field_names() {
        let data = [ex("1", &["14 days"])];
        let r = evaluate(&preds(&[("1", "14 days")]), &data, "triplets", "baseline", LengthUnit::Whitespace).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in ["dataset", "system", "macro_f1", "em", "n", "per_example", "pred_lengths", "gold_lengths"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["pred_lengths"]["2"], 1);
    }

    #[test]
    fn table_rendering() {
        let mut a = EvalReport::from_results("triplets", "reader-a", vec![EvalExampleResult::score("1", "x", &["x".into()])]).unwrap();
        a.macro_f1_x100 = 23.37;
        a.em_x100 = 13.043478260869565;
        let mut b = a.clone();
        b.system_name = "reader-b".into();
        b.macro_f1_x100 = 26.32;
        b.em_x100 = 800.0 / 69.0;
        let table = render_table(&[a, b]);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("Dataset"));
        assert!(lines[2].contains("triplets") && lines[2].contains("23.37") && lines[2].contains("13.04"));
        assert!(!lines[3].contains("triplets") && lines[3].contains("26.32") && lines[3].contains("11.59"));
    }
}
