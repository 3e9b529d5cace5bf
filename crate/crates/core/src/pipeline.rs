//! Corpus-level glue: turning discussions into training sequences, the saved
//! tagger (CRF plus fitted feature extractor) and the predictions TSV.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::corpus::{Discussion, LabelSource, OrdinalLabel};
use crate::crf::{CrfModel, LabeledSequence, NUM_LABELS};
use crate::error::{Error, Result};
use crate::eval::{collapse_labels, GoldUnit, ThreeWay};
use crate::features::{FeatureExtractor, FeatureVector, UnitContext};

/// Fits the extractor's corpus statistics on every unit of `corpus`.
pub fn fit_extractor(extractor: &mut FeatureExtractor, corpus: &[Discussion]) {
    let units: Vec<_> = corpus
        .iter()
        .flat_map(|d| {
            d.turns
                .iter()
                .flat_map(move |t| t.units.iter().map(move |u| (u, UnitContext::for_turn(d, t))))
        })
        .collect();
    extractor.fit(&units);
}

/// Feature vectors of every unit of a turn, in order.
pub fn turn_features(
    extractor: &FeatureExtractor,
    discussion: &Discussion,
    turn_index: usize,
) -> Result<Vec<FeatureVector>> {
    let turn = &discussion.turns[turn_index];
    let ctx = UnitContext::for_turn(discussion, turn);
    turn.units.iter().map(|u| extractor.extract(u, &ctx)).collect()
}

/// One sequence per turn. Turns with any unlabeled unit are skipped.
pub fn training_sequences(
    corpus: &[Discussion],
    extractor: &FeatureExtractor,
    source: LabelSource,
) -> Result<Vec<LabeledSequence>> {
    let mut out = Vec::new();
    let mut skipped = 0usize;
    for d in corpus {
        for (ti, turn) in d.turns.iter().enumerate() {
            let labels: Option<Vec<OrdinalLabel>> = turn
                .units
                .iter()
                .map(|u| source.resolve(u))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .collect();
            match labels {
                Some(labels) => out.push(LabeledSequence::new(turn_features(extractor, d, ti)?, labels)),
                None => skipped += 1,
            }
        }
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} turns with unlabeled units");
    }
    Ok(out)
}

/// Gold labels and provenance for every unit, keyed like the predictions TSV.
pub fn gold_units(corpus: &[Discussion], source: LabelSource) -> Result<Vec<(UnitKey, GoldUnit)>> {
    let mut out = Vec::new();
    for d in corpus {
        for t in &d.turns {
            for (i, u) in t.units.iter().enumerate() {
                let key = UnitKey {
                    discussion_id: d.id.clone(),
                    turn_id: t.id.clone(),
                    unit_index: i,
                };
                let label = source
                    .resolve(u)?
                    .ok_or_else(|| Error::Data(format!("unit {key} has no {source:?} label")))?;
                out.push((
                    key,
                    GoldUnit {
                        label: collapse_labels(label),
                        turn_inherited: u.label_from_turn_level(),
                    },
                ));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnitKey {
    pub discussion_id: String,
    pub turn_id: String,
    pub unit_index: usize,
}

impl std::fmt::Display for UnitKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/{}", self.discussion_id, self.turn_id, self.unit_index)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitPrediction {
    pub key: UnitKey,
    pub label: OrdinalLabel,
    pub posteriors: [f64; NUM_LABELS],
}

/// A trained CRF together with the extractor that produced its features.
#[derive(Clone, Debug)]
pub struct Tagger {
    pub model: CrfModel,
    pub extractor: FeatureExtractor,
}

impl Tagger {
    /// CRF container followed by the extractor as length-prefixed JSON.
    pub fn write<W: Write>(&self, w: &mut W) -> Result<()> {
        let io = |e| Error::Input(format!("writing model: {e}"));
        self.model.write(w).map_err(io)?;
        let json =
            serde_json::to_vec(&self.extractor).map_err(|e| Error::Input(format!("serializing extractor: {e}")))?;
        w.write_all(&(json.len() as u64).to_le_bytes()).map_err(io)?;
        w.write_all(&json).map_err(io)
    }

    pub fn read<R: Read>(r: &mut R) -> Result<Self> {
        let model = CrfModel::read(r)?;
        let mut len = [0u8; 8];
        r.read_exact(&mut len)
            .map_err(|e| Error::ModelFormat(format!("extractor section: {e}")))?;
        let mut json = vec![0u8; u64::from_le_bytes(len) as usize];
        r.read_exact(&mut json)
            .map_err(|e| Error::ModelFormat(format!("extractor section: {e}")))?;
        let extractor =
            serde_json::from_slice(&json).map_err(|e| Error::ModelFormat(format!("extractor section: {e}")))?;
        Ok(Self { model, extractor })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(f);
        self.write(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(&mut BufReader::new(f))
    }

    /// Viterbi labels and posterior marginals for every unit of the corpus.
    pub fn tag(&self, corpus: &[Discussion]) -> Result<Vec<UnitPrediction>> {
        let mut out = Vec::new();
        for d in corpus {
            for (ti, turn) in d.turns.iter().enumerate() {
                let xs = turn_features(&self.extractor, d, ti)?;
                let labels = self.model.viterbi(&xs)?;
                let lattice = self.model.forward_backward(&xs)?;
                for (i, label) in labels.into_iter().enumerate() {
                    out.push(UnitPrediction {
                        key: UnitKey {
                            discussion_id: d.id.clone(),
                            turn_id: turn.id.clone(),
                            unit_index: i,
                        },
                        label,
                        posteriors: lattice.unary_marginals(i),
                    });
                }
            }
        }
        Ok(out)
    }
}

const PREDICTION_HEADER: &str = "discussion_id\tturn_id\tunit_index\tlabel_5way\tlabel_3way\tp_NN\tp_N\tp_O\tp_P\tp_PP";

pub fn write_predictions<W: Write>(mut w: W, predictions: &[UnitPrediction]) -> std::io::Result<()> {
    writeln!(w, "{PREDICTION_HEADER}")?;
    for p in predictions {
        write!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            p.key.discussion_id,
            p.key.turn_id,
            p.key.unit_index,
            p.label,
            collapse_labels(p.label)
        )?;
        for v in p.posteriors {
            write!(w, "\t{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// 3-way predictions, as written by the baseline.
pub fn write_three_way<W: Write>(mut w: W, predictions: &[(UnitKey, ThreeWay)]) -> std::io::Result<()> {
    writeln!(w, "discussion_id\tturn_id\tunit_index\tlabel_3way")?;
    for (k, label) in predictions {
        writeln!(w, "{}\t{}\t{}\t{label}", k.discussion_id, k.turn_id, k.unit_index)?;
    }
    Ok(())
}

/// Reads the `label_3way` column of either predictions format.
pub fn read_three_way<R: BufRead>(r: R) -> Result<HashMap<UnitKey, ThreeWay>> {
    let mut lines = r.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line.map_err(|e| Error::Input(e.to_string()))?,
        None => return Err(Error::Input("empty predictions file".into())),
    };
    let columns: Vec<&str> = header.split('\t').collect();
    let col = |name: &str| {
        columns.iter().position(|c| *c == name).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing column {name}"),
        })
    };
    let (cd, ct, cu, cl) = (
        col("discussion_id")?,
        col("turn_id")?,
        col("unit_index")?,
        col("label_3way")?,
    );
    let mut out = HashMap::new();
    for (i, line) in lines {
        let line = line.map_err(|e| Error::Input(e.to_string()))?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let parse_err = |message: String| Error::Parse { line: i + 1, message };
        if fields.len() != columns.len() {
            return Err(parse_err(format!(
                "{} fields, expected {}",
                fields.len(),
                columns.len()
            )));
        }
        let key = UnitKey {
            discussion_id: fields[cd].to_string(),
            turn_id: fields[ct].to_string(),
            unit_index: fields[cu]
                .parse()
                .map_err(|e| parse_err(format!("unit_index {:?}: {e}", fields[cu])))?,
        };
        let label: ThreeWay = fields[cl].parse().map_err(|e: Error| parse_err(e.to_string()))?;
        if out.insert(key.clone(), label).is_some() {
            return Err(parse_err(format!("duplicate prediction for {key}")));
        }
    }
    Ok(out)
}

/// Aligns predictions to gold units; every gold unit must have a prediction.
pub fn align(
    gold: &[(UnitKey, GoldUnit)],
    pred: &HashMap<UnitKey, ThreeWay>,
) -> Result<(Vec<GoldUnit>, Vec<ThreeWay>)> {
    let mut g = Vec::with_capacity(gold.len());
    let mut p = Vec::with_capacity(gold.len());
    for (key, unit) in gold {
        let label = pred
            .get(key)
            .ok_or_else(|| Error::Input(format!("no prediction for unit {key}")))?;
        g.push(*unit);
        p.push(*label);
    }
    if pred.len() != gold.len() {
        return Err(Error::Input(format!(
            "{} predictions for {} gold units",
            pred.len(),
            gold.len()
        )));
    }
    Ok((g, p))
}
