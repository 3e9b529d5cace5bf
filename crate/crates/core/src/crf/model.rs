use std::collections::HashMap;
use std::io::{Read, Write};

use crate::corpus::OrdinalLabel;
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::isotonic::{ConstraintGroup, Direction};

use super::inference::{viterbi_decode, Lattice};

pub const NUM_LABELS: usize = OrdinalLabel::COUNT;
pub const NUM_TRANSITIONS: usize = NUM_LABELS * NUM_LABELS;

/// Bidirectional feature-name <-> dense id map. Ids follow insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FeatureIndex {
    names: Vec<String>,
    ids: HashMap<String, u32>,
}

impl FeatureIndex {
    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut index = Self::default();
        for n in names {
            index.insert(n.into());
        }
        index
    }

    pub fn insert(&mut self, name: String) -> u32 {
        if let Some(&id) = self.ids.get(&name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.ids.insert(name.clone(), id);
        self.names.push(name);
        id
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &str)> {
        self.names.iter().enumerate().map(|(i, n)| (i as u32, n.as_str()))
    }

    /// Active ids of a feature vector; unknown features are dropped.
    pub fn encode(&self, fv: &FeatureVector) -> Vec<u32> {
        let mut ids: Vec<u32> = fv.names().filter_map(|n| self.get(n)).collect();
        ids.sort_unstable();
        ids
    }
}

/// Linear-chain CRF over the five ordinal labels.
///
/// `transitions[prev * 5 + cur]` holds lambda(prev, cur); `emissions[f * 5 + y]`
/// holds mu(y, f). There are no start/end transitions.
#[derive(Clone, Debug, PartialEq)]
pub struct CrfModel {
    index: FeatureIndex,
    transitions: [f64; NUM_TRANSITIONS],
    emissions: Vec<f64>,
    constraints: Vec<ConstraintGroup>,
}

impl CrfModel {
    /// All-zero model over `index`.
    pub fn new(index: FeatureIndex) -> Self {
        let n = index.len();
        Self {
            index,
            transitions: [0.0; NUM_TRANSITIONS],
            emissions: vec![0.0; n * NUM_LABELS],
            constraints: Vec::new(),
        }
    }

    pub fn from_parts(
        index: FeatureIndex,
        transitions: [f64; NUM_TRANSITIONS],
        emissions: Vec<f64>,
        constraints: Vec<ConstraintGroup>,
    ) -> Result<Self> {
        if emissions.len() != index.len() * NUM_LABELS {
            return Err(Error::Input(format!(
                "{} emission weights for {} features",
                emissions.len(),
                index.len()
            )));
        }
        if transitions.iter().chain(&emissions).any(|w| !w.is_finite()) {
            return Err(Error::Input("non-finite weight".into()));
        }
        Ok(Self {
            index,
            transitions,
            emissions,
            constraints,
        })
    }

    pub fn feature_index(&self) -> &FeatureIndex {
        &self.index
    }

    pub fn transitions(&self) -> &[f64; NUM_TRANSITIONS] {
        &self.transitions
    }

    pub fn emissions(&self) -> &[f64] {
        &self.emissions
    }

    pub fn constraints(&self) -> &[ConstraintGroup] {
        &self.constraints
    }

    pub fn is_isotonic(&self) -> bool {
        !self.constraints.is_empty()
    }

    pub fn transition(&self, prev: OrdinalLabel, cur: OrdinalLabel) -> f64 {
        self.transitions[prev.index() * NUM_LABELS + cur.index()]
    }

    pub fn set_transition(&mut self, prev: OrdinalLabel, cur: OrdinalLabel, w: f64) {
        self.transitions[prev.index() * NUM_LABELS + cur.index()] = w;
    }

    pub fn emission(&self, feature: u32, label: OrdinalLabel) -> f64 {
        self.emissions[feature as usize * NUM_LABELS + label.index()]
    }

    pub fn set_emission(&mut self, feature: u32, label: OrdinalLabel, w: f64) {
        self.emissions[feature as usize * NUM_LABELS + label.index()] = w;
    }

    pub fn emission_row(&self, feature: u32) -> [f64; NUM_LABELS] {
        let b = feature as usize * NUM_LABELS;
        std::array::from_fn(|y| self.emissions[b + y])
    }

    pub fn encode(&self, xs: &[FeatureVector]) -> Vec<Vec<u32>> {
        xs.iter().map(|x| self.index.encode(x)).collect()
    }

    /// Per-position log emission potentials.
    pub fn node_scores(&self, encoded: &[Vec<u32>]) -> Vec<[f64; NUM_LABELS]> {
        node_scores(&self.emissions, encoded)
    }

    /// Unnormalized log score of a label sequence.
    pub fn score(&self, xs: &[FeatureVector], labels: &[OrdinalLabel]) -> f64 {
        let nodes = self.node_scores(&self.encode(xs));
        sequence_score(&nodes, &self.transitions, labels.iter().map(|l| l.index()))
    }

    pub fn forward_backward(&self, xs: &[FeatureVector]) -> Result<Lattice> {
        if xs.is_empty() {
            return Err(Error::Input("empty sequence".into()));
        }
        Ok(Lattice::new(self.node_scores(&self.encode(xs)), &self.transitions))
    }

    pub fn viterbi(&self, xs: &[FeatureVector]) -> Result<Vec<OrdinalLabel>> {
        if xs.is_empty() {
            return Err(Error::Input("empty sequence".into()));
        }
        let (path, _) = viterbi_decode(&self.node_scores(&self.encode(xs)), &self.transitions);
        Ok(path.into_iter().map(|y| OrdinalLabel::ALL[y]).collect())
    }

    const MAGIC: &'static [u8; 8] = b"ISOCRF\0\0";
    const VERSION: u32 = 1;

    /// Binary container: magic, version, label order, feature strings,
    /// transition and emission weights (little-endian f64), constraint groups.
    pub fn write<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(Self::MAGIC)?;
        w.write_all(&Self::VERSION.to_le_bytes())?;
        w.write_all(&(NUM_LABELS as u32).to_le_bytes())?;
        for l in OrdinalLabel::ALL {
            write_str(w, l.as_str())?;
        }
        w.write_all(&(self.index.len() as u32).to_le_bytes())?;
        for (_, name) in self.index.iter() {
            write_str(w, name)?;
        }
        for t in &self.transitions {
            w.write_all(&t.to_le_bytes())?;
        }
        w.write_all(&(self.emissions.len() as u64).to_le_bytes())?;
        for e in &self.emissions {
            w.write_all(&e.to_le_bytes())?;
        }
        w.write_all(&(self.constraints.len() as u32).to_le_bytes())?;
        for g in &self.constraints {
            w.write_all(&g.feature_id.to_le_bytes())?;
            w.write_all(&[match g.direction {
                Direction::Ascending => 0u8,
                Direction::Descending => 1u8,
            }])?;
        }
        Ok(())
    }

    pub fn read<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 8];
        read_exact(r, &mut magic)?;
        if &magic != Self::MAGIC {
            return Err(Error::ModelFormat("bad magic".into()));
        }
        let version = read_u32(r)?;
        if version != Self::VERSION {
            return Err(Error::ModelFormat(format!("unsupported version {version}")));
        }
        let n_labels = read_u32(r)? as usize;
        if n_labels != NUM_LABELS {
            return Err(Error::ModelFormat(format!("{n_labels} labels")));
        }
        for l in OrdinalLabel::ALL {
            let s = read_string(r)?;
            if s != l.as_str() {
                return Err(Error::ModelFormat(format!("label order: expected {l}, found {s}")));
            }
        }
        let n_features = read_u32(r)? as usize;
        let mut index = FeatureIndex::default();
        for _ in 0..n_features {
            let name = read_string(r)?;
            if index.get(&name).is_some() {
                return Err(Error::ModelFormat(format!("duplicate feature {name:?}")));
            }
            index.insert(name);
        }
        let mut transitions = [0.0; NUM_TRANSITIONS];
        for t in transitions.iter_mut() {
            *t = read_f64(r)?;
        }
        let n_emissions = read_u64(r)? as usize;
        if n_emissions != n_features * NUM_LABELS {
            return Err(Error::ModelFormat(format!(
                "{n_emissions} emissions for {n_features} features"
            )));
        }
        let mut emissions = Vec::with_capacity(n_emissions);
        for _ in 0..n_emissions {
            emissions.push(read_f64(r)?);
        }
        let n_groups = read_u32(r)? as usize;
        let mut constraints = Vec::with_capacity(n_groups);
        for _ in 0..n_groups {
            let feature_id = read_u32(r)?;
            if feature_id as usize >= n_features {
                return Err(Error::ModelFormat(format!(
                    "constraint on unknown feature {feature_id}"
                )));
            }
            let mut d = [0u8];
            read_exact(r, &mut d)?;
            let direction = match d[0] {
                0 => Direction::Ascending,
                1 => Direction::Descending,
                x => return Err(Error::ModelFormat(format!("bad direction tag {x}"))),
            };
            constraints.push(ConstraintGroup {
                feature: index.name(feature_id).to_string(),
                feature_id,
                direction,
            });
        }
        Self::from_parts(index, transitions, emissions, constraints).map_err(|e| Error::ModelFormat(e.to_string()))
    }
}

pub(crate) fn node_scores(emissions: &[f64], encoded: &[Vec<u32>]) -> Vec<[f64; NUM_LABELS]> {
    encoded
        .iter()
        .map(|ids| {
            let mut s = [0.0; NUM_LABELS];
            for &f in ids {
                let b = f as usize * NUM_LABELS;
                for (y, v) in s.iter_mut().enumerate() {
                    *v += emissions[b + y];
                }
            }
            s
        })
        .collect()
}

pub(crate) fn sequence_score(
    nodes: &[[f64; NUM_LABELS]],
    transitions: &[f64; NUM_TRANSITIONS],
    labels: impl IntoIterator<Item = usize>,
) -> f64 {
    let mut score = 0.0;
    let mut prev: Option<usize> = None;
    for (t, y) in labels.into_iter().enumerate() {
        score += nodes[t][y];
        if let Some(p) = prev {
            score += transitions[p * NUM_LABELS + y];
        }
        prev = Some(y);
    }
    score
}

fn write_str<W: Write>(w: &mut W, s: &str) -> std::io::Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::ModelFormat(format!("truncated: {e}")))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_string<R: Read>(r: &mut R) -> Result<String> {
    let len = read_u32(r)? as usize;
    if len > 1 << 20 {
        return Err(Error::ModelFormat(format!("string length {len}")));
    }
    let mut buf = vec![0u8; len];
    read_exact(r, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::ModelFormat(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_is_injective() {
        let idx = FeatureIndex::from_names(["a", "b", "a", "c"]);
        assert_eq!(idx.len(), 3);
        assert_eq!(idx.get("c"), Some(2));
        assert_eq!(idx.name(1), "b");
        let fv = FeatureVector::from_names(["c", "a", "zzz"]);
        assert_eq!(idx.encode(&fv), vec![0, 2]);
    }

    #[test]
    fn file_round_trip_is_bit_exact() {
        let idx = FeatureIndex::from_names(["lex:uni=agree", "lex:uni=no"]);
        let mut m = CrfModel::new(idx);
        m.set_transition(OrdinalLabel::N, OrdinalLabel::PP, 0.1 + 0.2);
        m.set_emission(1, OrdinalLabel::O, -1.0 / 3.0);
        m.set_emission(0, OrdinalLabel::PP, f64::MIN_POSITIVE);
        m.constraints.push(ConstraintGroup {
            feature: "lex:uni=agree".into(),
            feature_id: 0,
            direction: Direction::Ascending,
        });
        let mut buf = Vec::new();
        m.write(&mut buf).unwrap();
        let back = CrfModel::read(&mut buf.as_slice()).unwrap();
        assert_eq!(back, m);
        for (a, b) in back.emissions.iter().zip(&m.emissions) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert!(CrfModel::read(&mut &buf[..buf.len() - 3]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(CrfModel::read(&mut bad.as_slice()).is_err());
    }

    #[test]
    fn empty_sequence_rejected() {
        let m = CrfModel::new(FeatureIndex::default());
        assert!(m.viterbi(&[]).is_err());
        assert!(m.forward_backward(&[]).is_err());
    }
}
