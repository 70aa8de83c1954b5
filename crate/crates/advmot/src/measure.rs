//! Labeled empirical measures and class-subset bookkeeping.
//!
//! A [`LabeledMeasure`] is a finite positive measure on `X × {1..K}`: a list
//! of weighted atoms `(x, label)`. Atoms are kept in a canonical order
//! (label, then coordinates) and exact duplicates are merged at construction,
//! so tensor indices and LP column orders are reproducible across runs.

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

use crate::{Error, Result};

/// One weighted atom of a labeled measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    /// Feature coordinates.
    pub coords: Vec<f64>,
    /// Class label in `1..=num_classes`.
    pub label: usize,
    /// Nonnegative mass carried by this atom.
    pub weight: f64,
}

/// A finite positive measure on `X × {1..K}` with a fixed atom order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledMeasure {
    points: Vec<LabeledPoint>,
    num_classes: usize,
    dim: usize,
}

impl LabeledMeasure {
    /// Builds a measure from raw atoms, validating invariants, sorting atoms
    /// by (label, coordinates) and merging bit-identical duplicates.
    ///
    /// Zero-weight atoms are dropped; weights must be nonnegative and finite,
    /// labels in `1..=num_classes`, and all coordinates share one dimension.
    pub fn new(points: Vec<LabeledPoint>, num_classes: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        if num_classes < 1 {
            return Err(Error::ClassCount(num_classes));
        }
        let dim = points[0].coords.len();
        for p in &points {
            if p.coords.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.coords.len(),
                });
            }
            if p.coords.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite("coordinates"));
            }
            if !p.weight.is_finite() {
                return Err(Error::NonFinite("weight"));
            }
            if p.weight < 0.0 {
                return Err(Error::NegativeWeight(p.weight));
            }
            if p.label < 1 || p.label > num_classes {
                return Err(Error::LabelOutOfRange {
                    label: p.label,
                    num_classes,
                });
            }
        }
        let mut points: Vec<LabeledPoint> = points.into_iter().filter(|p| p.weight > 0.0).collect();
        if points.is_empty() {
            return Err(Error::ZeroMass);
        }
        points.sort_by(|a, b| {
            a.label
                .cmp(&b.label)
                .then_with(|| coord_key(&a.coords).cmp(&coord_key(&b.coords)))
        });
        // Merge atoms that agree bit-for-bit; no epsilon snapping.
        let mut merged: Vec<LabeledPoint> = Vec::with_capacity(points.len());
        for p in points {
            match merged.last_mut() {
                Some(last) if last.label == p.label && coords_eq(&last.coords, &p.coords) => {
                    last.weight += p.weight;
                }
                _ => merged.push(p),
            }
        }
        Ok(Self {
            points: merged,
            num_classes,
            dim,
        })
    }

    /// Parses delimited text with header `x0,...,x{d-1},label[,weight]`.
    ///
    /// Missing weights default to `1/n`. `num_classes` is the largest label
    /// seen unless `min_classes` asks for more (classes may be empty).
    pub fn from_csv<R: Read>(reader: R, min_classes: Option<usize>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let mut label_col = None;
        let mut weight_col = None;
        let mut coord_cols = Vec::new();
        for (i, h) in headers.iter().enumerate() {
            match h {
                "label" => label_col = Some(i),
                "weight" => weight_col = Some(i),
                _ => coord_cols.push(i),
            }
        }
        let label_col = label_col.ok_or_else(|| Error::Config("missing 'label' column".into()))?;
        if coord_cols.is_empty() {
            return Err(Error::Config("no coordinate columns".into()));
        }
        let mut rows: Vec<(Vec<f64>, usize, Option<f64>)> = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let mut coords = Vec::with_capacity(coord_cols.len());
            for &c in &coord_cols {
                let v: f64 = record
                    .get(c)
                    .ok_or_else(|| Error::Config("short row".into()))?
                    .parse()
                    .map_err(|e| Error::Config(format!("bad coordinate: {e}")))?;
                coords.push(v);
            }
            let label: usize = record
                .get(label_col)
                .ok_or_else(|| Error::Config("short row".into()))?
                .parse()
                .map_err(|e| Error::Config(format!("bad label: {e}")))?;
            let weight = match weight_col {
                Some(c) => Some(
                    record
                        .get(c)
                        .ok_or_else(|| Error::Config("short row".into()))?
                        .parse::<f64>()
                        .map_err(|e| Error::Config(format!("bad weight: {e}")))?,
                ),
                None => None,
            };
            rows.push((coords, label, weight));
        }
        if rows.is_empty() {
            return Err(Error::EmptyInput);
        }
        let n = rows.len();
        let max_label = rows.iter().map(|r| r.1).max().unwrap_or(0);
        let num_classes = max_label.max(min_classes.unwrap_or(0)).max(1);
        let points = rows
            .into_iter()
            .map(|(coords, label, w)| LabeledPoint {
                coords,
                label,
                weight: w.unwrap_or(1.0 / n as f64),
            })
            .collect();
        Self::new(points, num_classes)
    }

    /// Serializes the measure as JSON (atoms, class count, dimension).
    pub fn to_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer(writer, self)?;
        Ok(())
    }

    /// Reads a measure previously written by [`Self::to_json`].
    pub fn from_json<R: Read>(reader: R) -> Result<Self> {
        let m: LabeledMeasure = serde_json::from_reader(reader)?;
        Self::new(m.points, m.num_classes)
    }

    pub fn points(&self) -> &[LabeledPoint] {
        &self.points
    }

    pub fn num_atoms(&self) -> usize {
        self.points.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total mass, summed in atom order.
    pub fn total_mass(&self) -> f64 {
        self.points.iter().map(|p| p.weight).sum()
    }

    /// Mass carried by class `i`.
    pub fn class_mass(&self, label: usize) -> f64 {
        self.points
            .iter()
            .filter(|p| p.label == label)
            .map(|p| p.weight)
            .sum()
    }

    /// Restriction of the measure to one class (may be empty: zero atoms).
    ///
    /// The slice keeps `num_classes` and `dim`, so slices of the same measure
    /// remain comparable.
    pub fn class_slice(&self, label: usize) -> Result<LabeledMeasure> {
        if label < 1 || label > self.num_classes {
            return Err(Error::LabelOutOfRange {
                label,
                num_classes: self.num_classes,
            });
        }
        Ok(LabeledMeasure {
            points: self
                .points
                .iter()
                .filter(|p| p.label == label)
                .cloned()
                .collect(),
            num_classes: self.num_classes,
            dim: self.dim,
        })
    }

    /// Atom indices belonging to each class, in canonical atom order.
    pub fn atoms_by_class(&self) -> Vec<Vec<usize>> {
        let mut by_class = vec![Vec::new(); self.num_classes];
        for (i, p) in self.points.iter().enumerate() {
            by_class[p.label - 1].push(i);
        }
        by_class
    }

    /// The measure scaled by `a > 0`.
    pub fn scaled(&self, a: f64) -> Result<LabeledMeasure> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::NonFinite("scale factor"));
        }
        let points = self
            .points
            .iter()
            .map(|p| LabeledPoint {
                coords: p.coords.clone(),
                label: p.label,
                weight: p.weight * a,
            })
            .collect();
        LabeledMeasure::new(points, self.num_classes)
    }

    /// The measure rescaled to total mass one.
    pub fn normalized(&self) -> Result<LabeledMeasure> {
        self.scaled(1.0 / self.total_mass())
    }
}

fn coords_eq(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn coord_key(coords: &[f64]) -> Vec<u64> {
    // total_cmp-compatible sortable key (coords are finite by construction)
    coords
        .iter()
        .map(|c| {
            let bits = c.to_bits();
            if bits >> 63 == 0 {
                bits ^ (1 << 63)
            } else {
                !bits
            }
        })
        .collect()
}

/// Index space for the ghost-augmented support: the `n` atoms of a measure
/// plus one distinguished ghost atom at index `n`.
///
/// The ghost atom lets all MOT marginals share one fixed distribution; a
/// ghost entry in a tuple means "this slot groups nothing".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GhostIndex {
    num_atoms: usize,
}

impl GhostIndex {
    pub fn new(num_atoms: usize) -> Self {
        Self { num_atoms }
    }

    /// Number of marginal entries: atoms plus the ghost.
    pub fn len(&self) -> usize {
        self.num_atoms + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn num_atoms(&self) -> usize {
        self.num_atoms
    }

    /// Index of the ghost atom.
    pub fn ghost(&self) -> usize {
        self.num_atoms
    }

    pub fn is_ghost(&self, idx: usize) -> bool {
        idx == self.num_atoms
    }
}

/// Enumeration of all nonempty subsets of `{1..K}` as bitmasks
/// (bit `i-1` set means class `i` is in the subset), in a deterministic
/// order: by popcount, then by numeric mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetTable {
    num_classes: usize,
    masks: Vec<u32>,
}

impl SubsetTable {
    /// Enumerates subsets for `2 <= K <= 16` (tensor and column counts
    /// explode beyond that; the cap is a hard contract).
    pub fn new(num_classes: usize) -> Result<Self> {
        if !(2..=16).contains(&num_classes) {
            return Err(Error::ClassCount(num_classes));
        }
        let mut masks: Vec<u32> = (1..(1u32 << num_classes)).collect();
        masks.sort_by_key(|m| (m.count_ones(), *m));
        Ok(Self { num_classes, masks })
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// All nonempty subsets, `2^K - 1` masks.
    pub fn masks(&self) -> &[u32] {
        &self.masks
    }

    /// Subsets containing class `i` (1-based).
    pub fn containing(&self, label: usize) -> impl Iterator<Item = u32> + '_ {
        let bit = 1u32 << (label - 1);
        self.masks.iter().copied().filter(move |m| m & bit != 0)
    }

    /// Class labels (1-based, ascending) in a mask.
    pub fn members(mask: u32) -> Vec<usize> {
        (0..32)
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| b + 1)
            .collect()
    }

    pub fn contains(mask: u32, label: usize) -> bool {
        mask & (1 << (label - 1)) != 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(coords: &[f64], label: usize, weight: f64) -> LabeledPoint {
        LabeledPoint {
            coords: coords.to_vec(),
            label,
            weight,
        }
    }

    #[test]
    fn csv_defaults_to_uniform_weights() {
        let data = "x0,x1,label\n0,0,1\n1,0,2\n0,1,2\n";
        let m = LabeledMeasure::from_csv(data.as_bytes(), None).unwrap();
        assert_eq!(m.num_atoms(), 3);
        for p in m.points() {
            assert!((p.weight - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(m.num_classes(), 2);
    }

    #[test]
    fn csv_requires_label_column_and_parsable_rows() {
        assert!(matches!(
            LabeledMeasure::from_csv("x0,x1\n0,0\n".as_bytes(), None),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            LabeledMeasure::from_csv("x0,label\nnot_a_number,1\n".as_bytes(), None),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            LabeledMeasure::from_csv("x0,label\n".as_bytes(), None),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn duplicate_atoms_merge() {
        let m =
            LabeledMeasure::new(vec![pt(&[0.0, 0.0], 1, 0.2), pt(&[0.0, 0.0], 1, 0.2)], 3).unwrap();
        assert_eq!(m.num_atoms(), 1);
        assert!((m.points()[0].weight - 0.4).abs() < 1e-15);
        assert!((m.total_mass() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn label_out_of_range_rejected() {
        let err = LabeledMeasure::new(vec![pt(&[0.0], 5, 1.0)], 3).unwrap_err();
        assert!(matches!(err, Error::LabelOutOfRange { label: 5, .. }));
    }

    #[test]
    fn negative_weight_and_dim_mismatch_rejected() {
        assert!(matches!(
            LabeledMeasure::new(vec![pt(&[0.0], 1, -0.5)], 2),
            Err(Error::NegativeWeight(_))
        ));
        assert!(matches!(
            LabeledMeasure::new(vec![pt(&[0.0], 1, 1.0), pt(&[0.0, 1.0], 1, 1.0)], 2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn class_slice_keeps_mass() {
        // one atom per class with distinct weights
        let m = LabeledMeasure::new(
            vec![pt(&[0.0], 1, 0.5), pt(&[1.0], 2, 0.3), pt(&[2.0], 3, 0.2)],
            3,
        )
        .unwrap();
        let s1 = m.class_slice(1).unwrap();
        assert_eq!(s1.num_atoms(), 1);
        assert!((s1.total_mass() - 0.5).abs() < 1e-15);
        // empty slice has zero atoms and zero mass
        let m2 = LabeledMeasure::new(vec![pt(&[0.0], 1, 1.0)], 2).unwrap();
        let s2 = m2.class_slice(2).unwrap();
        assert_eq!(s2.num_atoms(), 0);
        assert_eq!(s2.total_mass(), 0.0);
    }

    #[test]
    fn class_slice_mass_on_uniform_sample() {
        // 8 points, 4 classes, two atoms per class, uniform 1/8 weights
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push(pt(&[i as f64], i % 4 + 1, 1.0 / 8.0));
        }
        let m = LabeledMeasure::new(pts, 4).unwrap();
        assert!((m.class_mass(3) - 2.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn subset_table_small_cases() {
        let t2 = SubsetTable::new(2).unwrap();
        assert_eq!(t2.masks(), &[0b01, 0b10, 0b11]);
        let t3 = SubsetTable::new(3).unwrap();
        assert_eq!(t3.masks().len(), 7);
        let with2: Vec<u32> = t3.containing(2).collect();
        assert_eq!(with2, vec![0b010, 0b011, 0b110, 0b111]);
        assert_eq!(SubsetTable::new(4).unwrap().masks().len(), 15);
        assert!(SubsetTable::new(1).is_err());
        assert!(SubsetTable::new(17).is_err());
    }

    proptest! {
        #[test]
        fn mass_is_conserved_by_slicing(
            weights in proptest::collection::vec(0.01f64..10.0, 1..20),
            labels in proptest::collection::vec(1usize..=4, 20),
        ) {
            let pts: Vec<LabeledPoint> = weights
                .iter()
                .enumerate()
                .map(|(i, &w)| pt(&[i as f64, (i * i) as f64], labels[i], w))
                .collect();
            let m = LabeledMeasure::new(pts, 4).unwrap();
            let total: f64 = (1..=4).map(|i| m.class_slice(i).unwrap().total_mass()).sum();
            prop_assert!((total - m.total_mass()).abs() <= 1e-12 * (1.0 + m.total_mass()));
        }

        #[test]
        fn json_round_trip_is_identity(
            weights in proptest::collection::vec(0.01f64..10.0, 1..12),
            labels in proptest::collection::vec(1usize..=3, 12),
            coords in proptest::collection::vec(-1e3f64..1e3, 24),
        ) {
            let pts: Vec<LabeledPoint> = weights
                .iter()
                .enumerate()
                .map(|(i, &w)| pt(&[coords[2 * i], coords[2 * i + 1]], labels[i], w))
                .collect();
            let m = LabeledMeasure::new(pts, 3).unwrap();
            let mut buf = Vec::new();
            m.to_json(&mut buf).unwrap();
            let back = LabeledMeasure::from_json(&buf[..]).unwrap();
            prop_assert_eq!(m, back);
        }

        #[test]
        fn subset_table_round_trip(k in 2usize..=8) {
            let t = SubsetTable::new(k).unwrap();
            prop_assert_eq!(t.masks().len(), (1usize << k) - 1);
            for i in 1..=k {
                for &mask in t.masks() {
                    let listed = t.containing(i).any(|m| m == mask);
                    prop_assert_eq!(listed, SubsetTable::contains(mask, i));
                }
            }
        }
    }
}
