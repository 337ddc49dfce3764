//! Trial dataset model: subject records, aggregate bins, segment rules.
//!
//! Ranges on the test scale are half-open `(lo, hi]`, so a value of exactly
//! 80 falls in the segment "up to 80". The first bin produced by
//! [`bin_counts`] is closed on the left so that the lowest edge is counted.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::likelihood::OutcomeModel;
use crate::normal::TruncatedNormal;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Arm(String);

impl Arm {
    pub fn new(label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        let ok = !label.is_empty() && label.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
        if ok {
            Ok(Arm(label))
        } else {
            Err(Error::InvalidInput(format!("invalid arm label {label:?}")))
        }
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Arm {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Arm::new(s)
    }
}

impl From<Arm> for String {
    fn from(a: Arm) -> String {
        a.0
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One or more arms pooled for analysis (e.g. both irbesartan doses).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArmSet(BTreeSet<Arm>);

impl ArmSet {
    pub fn new<I: IntoIterator<Item = Arm>>(arms: I) -> Result<Self> {
        let set: BTreeSet<Arm> = arms.into_iter().collect();
        if set.is_empty() {
            return Err(Error::InvalidInput("empty arm set".into()));
        }
        Ok(ArmSet(set))
    }

    pub fn single(arm: Arm) -> Self {
        ArmSet(BTreeSet::from([arm]))
    }

    pub fn parse(labels: &str) -> Result<Self> {
        let arms = labels.split(['+', ',']).map(|s| Arm::new(s.trim())).collect::<Result<Vec<_>>>()?;
        ArmSet::new(arms)
    }

    pub fn contains(&self, arm: &Arm) -> bool {
        self.0.contains(arm)
    }

    pub fn is_subset(&self, other: &ArmSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arm> {
        self.0.iter()
    }

    /// Labels joined with `+`.
    pub fn label(&self) -> String {
        self.0.iter().map(Arm::label).collect::<Vec<_>>().join("+")
    }
}

/// Half-open interval `(lo, hi]`; `hi` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidInput(format!("invalid interval ({lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, v: f64) -> bool {
        v > self.lo && v <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        other.lo >= self.lo && other.hi <= self.hi
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let hi = self.hi.is_finite().then_some(self.hi);
        (self.lo, hi).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (lo, hi): (f64, Option<f64>) = Deserialize::deserialize(d)?;
        Interval::new(lo, hi.unwrap_or(f64::INFINITY)).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub baseline: f64,
    pub arm: Arm,
    pub outcome: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome_value: Option<f64>,
}

/// Count row: `events` of `total` subjects in arm `arm` with baseline in `(lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateBin {
    pub lo: f64,
    pub hi: f64,
    pub arm: Arm,
    pub events: u64,
    pub total: u64,
}

impl AggregateBin {
    pub fn new(lo: f64, hi: f64, arm: Arm, events: u64, total: u64) -> Result<Self> {
        if !(lo > 0.0) || !(lo < hi) || !hi.is_finite() {
            return Err(Error::InvalidInput(format!("invalid bin range ({lo}, {hi}]")));
        }
        if events > total {
            return Err(Error::InvalidInput(format!("bin events {events} exceed total {total}")));
        }
        Ok(AggregateBin { lo, hi, arm, events, total })
    }

    pub fn range(&self) -> Interval {
        Interval { lo: self.lo, hi: self.hi }
    }

    pub fn non_events(&self) -> u64 {
        self.total - self.events
    }
}

/// Event and subject counts for some sub-population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub events: u64,
    pub total: u64,
}

impl Counts {
    pub fn non_events(&self) -> u64 {
        self.total - self.events
    }

    pub fn proportion(&self) -> Option<f64> {
        (self.total > 0).then(|| self.events as f64 / self.total as f64)
    }
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, rhs: Counts) {
        self.events += rhs.events;
        self.total += rhs.total;
    }
}

/// Metadata not carried by the CSV body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub eligibility: (f64, f64),
    #[serde(default)]
    pub outcome_threshold: Option<f64>,
    pub control: String,
    /// Allowed arm labels; any well-formed label when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arms: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl Default for DatasetMeta {
    fn default() -> Self {
        DatasetMeta {
            eligibility: (0.0, f64::INFINITY),
            outcome_threshold: None,
            control: "placebo".to_string(),
            arms: None,
            name: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialDataset {
    pub name: String,
    pub records: Vec<SubjectRecord>,
    pub bins: Vec<AggregateBin>,
    /// Closed eligibility range on the test scale.
    pub eligibility: (f64, f64),
    pub outcome_threshold: Option<f64>,
    pub control: Arm,
}

impl TrialDataset {
    pub fn new(
        name: impl Into<String>,
        records: Vec<SubjectRecord>,
        bins: Vec<AggregateBin>,
        eligibility: (f64, f64),
        outcome_threshold: Option<f64>,
        control: Arm,
    ) -> Result<Self> {
        if records.is_empty() && bins.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let ds = TrialDataset { name: name.into(), records, bins, eligibility, outcome_threshold, control };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.eligibility;
        if !(lo >= 0.0) || !(lo < hi) {
            return Err(Error::InvalidDataset(format!("invalid eligibility range [{lo}, {hi}]")));
        }
        for (i, r) in self.records.iter().enumerate() {
            if !(r.baseline > 0.0) || !r.baseline.is_finite() {
                return Err(Error::InvalidDataset(format!("record {i}: baseline {} is not positive", r.baseline)));
            }
            if r.baseline < lo || r.baseline > hi {
                return Err(Error::InvalidDataset(format!(
                    "record {i}: baseline {} outside eligibility [{lo}, {hi}]",
                    r.baseline
                )));
            }
            if let (Some(v), Some(t)) = (r.outcome_value, self.outcome_threshold) {
                if (v > t) != r.outcome {
                    return Err(Error::InvalidDataset(format!(
                        "record {i}: outcome flag disagrees with outcome value {v} at threshold {t}"
                    )));
                }
            }
        }
        for arm in self.arms() {
            let mut ranges: Vec<Interval> =
                self.bins.iter().filter(|b| b.arm == arm).map(AggregateBin::range).collect();
            ranges.sort_by(|a, b| a.lo.total_cmp(&b.lo));
            if ranges.windows(2).any(|w| w[0].overlaps(&w[1])) {
                return Err(Error::InvalidDataset(format!("overlapping bins for arm {arm}")));
            }
        }
        if (!self.records.is_empty() || !self.bins.is_empty()) && !self.arms().contains(&self.control) {
            return Err(Error::InvalidDataset(format!("control arm {} has no data", self.control)));
        }
        Ok(())
    }

    pub fn arms(&self) -> BTreeSet<Arm> {
        self.records.iter().map(|r| r.arm.clone()).chain(self.bins.iter().map(|b| b.arm.clone())).collect()
    }

    /// Every arm other than the control, pooled.
    pub fn treatment_arms(&self) -> Option<ArmSet> {
        let rest: Vec<Arm> = self.arms().into_iter().filter(|a| *a != self.control).collect();
        ArmSet::new(rest).ok()
    }

    pub fn has_records(&self) -> bool {
        !self.records.is_empty()
    }

    /// Total subjects and events over the full range for `arms`.
    pub fn arm_counts(&self, arms: &ArmSet) -> Counts {
        let mut c = Counts::default();
        for r in self.records.iter().filter(|r| arms.contains(&r.arm)) {
            c += Counts { events: r.outcome as u64, total: 1 };
        }
        for b in self.bins.iter().filter(|b| arms.contains(&b.arm)) {
            c += Counts { events: b.events, total: b.total };
        }
        c
    }

    /// Counts for `arms` with baseline in `range`. Bins must lie wholly
    /// inside or outside the range.
    pub fn counts_in(&self, range: &Interval, arms: &ArmSet) -> Result<Counts> {
        let mut c = Counts::default();
        for r in &self.records {
            if arms.contains(&r.arm) && range.contains(r.baseline) {
                c += Counts { events: r.outcome as u64, total: 1 };
            }
        }
        for b in self.bins.iter().filter(|b| arms.contains(&b.arm)) {
            let br = b.range();
            if range.contains_interval(&br) {
                c += Counts { events: b.events, total: b.total };
            } else if range.overlaps(&br) {
                let boundary = if br.lo < range.lo { range.lo } else { range.hi };
                return Err(Error::BoundaryMismatch { lo: b.lo, hi: b.hi, arm: b.arm.to_string(), boundary });
            }
        }
        Ok(c)
    }

    /// Copy of this dataset with every outcome relabelled as
    /// `outcome_value > threshold`.
    pub fn relabel_outcomes(&self, threshold: f64) -> Result<TrialDataset> {
        if self.records.is_empty() || self.records.iter().any(|r| r.outcome_value.is_none()) {
            return Err(Error::InsufficientData("relabelling needs subject records with outcome values".into()));
        }
        let records = self
            .records
            .iter()
            .map(|r| SubjectRecord { outcome: r.outcome_value.is_some_and(|v| v > threshold), ..r.clone() })
            .collect();
        Ok(TrialDataset { records, outcome_threshold: Some(threshold), ..self.clone() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub range: Interval,
    pub arms: ArmSet,
}

/// Allocation of test-value ranges to arms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRule {
    segments: Vec<Segment>,
}

impl SegmentRule {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidInput("segment rule has no segments".into()));
        }
        for (i, a) in segments.iter().enumerate() {
            for b in &segments[i + 1..] {
                if a.range.overlaps(&b.range) {
                    return Err(Error::InvalidInput(format!(
                        "segments ({}, {}] and ({}, {}] overlap",
                        a.range.lo, a.range.hi, b.range.lo, b.range.hi
                    )));
                }
            }
        }
        Ok(SegmentRule { segments })
    }

    /// Two segments: `(0, threshold]` to `below` and `(threshold, inf)` to `above`.
    pub fn threshold_split(threshold: f64, below: ArmSet, above: ArmSet) -> Result<Self> {
        SegmentRule::new(vec![
            Segment { range: Interval::new(0.0, threshold)?, arms: below },
            Segment { range: Interval::new(threshold, f64::INFINITY)?, arms: above },
        ])
    }

    /// Control below the threshold, all other arms pooled above it.
    pub fn standard(data: &TrialDataset, threshold: f64) -> Result<Self> {
        let treated = data.treatment_arms().ok_or_else(|| Error::InsufficientData("both arms required".into()))?;
        SegmentRule::threshold_split(threshold, ArmSet::single(data.control.clone()), treated)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// The segment whose arm set includes every arm of `group`.
    pub fn segment_for(&self, group: &ArmSet) -> Option<&Segment> {
        self.segments.iter().find(|s| group.is_subset(&s.arms))
    }

    pub fn check_arms(&self, data: &TrialDataset) -> Result<()> {
        let present = data.arms();
        for s in &self.segments {
            for a in s.arms.iter() {
                if !present.contains(a) {
                    return Err(Error::InvalidInput(format!("segment arm {a} not present in dataset")));
                }
            }
        }
        Ok(())
    }
}

/// Keeps only records and bins in a segment assigned to their arm.
pub fn apply_segment_filter(data: &TrialDataset, rule: &SegmentRule) -> Result<TrialDataset> {
    rule.check_arms(data)?;
    let records = data
        .records
        .iter()
        .filter(|r| rule.segments().iter().any(|s| s.arms.contains(&r.arm) && s.range.contains(r.baseline)))
        .cloned()
        .collect();
    let mut bins = Vec::new();
    for b in &data.bins {
        let br = b.range();
        for s in rule.segments().iter().filter(|s| s.arms.contains(&b.arm)) {
            if s.range.contains_interval(&br) {
                bins.push(b.clone());
                break;
            } else if s.range.overlaps(&br) {
                let boundary = if br.lo < s.range.lo { s.range.lo } else { s.range.hi };
                return Err(Error::BoundaryMismatch { lo: b.lo, hi: b.hi, arm: b.arm.to_string(), boundary });
            }
        }
    }
    Ok(TrialDataset { name: format!("{} (segmental)", data.name), records, bins, ..data.clone() })
}

/// Histogram of `arm`'s records over `edges`. The first bin is `[e0, e1]`,
/// later bins `(e_i, e_{i+1}]`.
pub fn bin_counts(data: &TrialDataset, edges: &[f64], arm: &Arm) -> Result<Vec<AggregateBin>> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("bin edges must be strictly ascending with at least two edges".into()));
    }
    if !(edges[0] > 0.0) {
        return Err(Error::InvalidInput("bin edges must be positive".into()));
    }
    let nb = edges.len() - 1;
    let mut counts = vec![Counts::default(); nb];
    let (first, last) = (edges[0], edges[nb]);
    for r in data.records.iter().filter(|r| &r.arm == arm) {
        let v = r.baseline;
        if v < first || v > last {
            return Err(Error::OutOfRange { value: v, lo: first, hi: last });
        }
        // index of the first edge >= v, shifted onto bins
        let idx = edges.partition_point(|&e| e < v).saturating_sub(1).min(nb - 1);
        counts[idx] += Counts { events: r.outcome as u64, total: 1 };
    }
    Ok(edges
        .windows(2)
        .zip(counts)
        .map(|(w, c)| AggregateBin { lo: w[0], hi: w[1], arm: arm.clone(), events: c.events, total: c.total })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReconstructionStrategy {
    /// All subjects at the geometric midpoint of their bin.
    Midpoint,
    /// ln values drawn from the outcome-conditional Gaussian truncated to
    /// the bin; bin `i` uses random stream `i` of `seed`.
    ModelConditional { model: OutcomeModel, seed: u64 },
}

/// Expands bins into subject records, events first within each bin.
pub fn reconstruct_records_from_bins(bins: &[AggregateBin], strategy: &ReconstructionStrategy) -> Vec<SubjectRecord> {
    let mut out = Vec::with_capacity(bins.iter().map(|b| b.total as usize).sum());
    for (i, bin) in bins.iter().enumerate() {
        let mid = (bin.lo * bin.hi).sqrt();
        let (llo, lhi) = (bin.lo.ln(), bin.hi.ln());
        let mut rng = match strategy {
            ReconstructionStrategy::ModelConditional { seed, .. } => Some(rng::stream(*seed, i as u64)),
            ReconstructionStrategy::Midpoint => None,
        };
        for k in 0..bin.total {
            let outcome = k < bin.events;
            let baseline = match (strategy, rng.as_mut()) {
                (ReconstructionStrategy::ModelConditional { model, .. }, Some(rng)) => {
                    let g = if outcome { &model.with_outcome } else { &model.without_outcome };
                    let ln = match TruncatedNormal::new(g.mu, g.sigma, llo, lhi) {
                        Ok(t) if t.mass() > 0.0 => t.sample(rng),
                        _ => llo + rand::Rng::random::<f64>(rng) * (lhi - llo),
                    };
                    ln.exp().clamp(bin.lo.max(f64::MIN_POSITIVE), bin.hi)
                }
                _ => mid,
            };
            out.push(SubjectRecord { baseline, arm: bin.arm.clone(), outcome, outcome_value: None });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvFormat {
    Subject,
    Bin,
}

const SUBJECT_HEADER: [&str; 3] = ["aer", "arm", "outcome"];
const BIN_HEADER: [&str; 5] = ["lo", "hi", "arm", "events", "total"];

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_positive(field: &str, name: &str, line: usize) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| parse_err(line, format!("{name}: not a number: {field:?}")))?;
    if !(v > 0.0) || !v.is_finite() {
        return Err(parse_err(line, format!("{name}: must be positive, got {v}")));
    }
    Ok(v)
}

fn parse_count(field: &str, name: &str, line: usize) -> Result<u64> {
    field.trim().parse().map_err(|_| parse_err(line, format!("{name}: not a non-negative integer: {field:?}")))
}

fn parse_arm(field: &str, meta: &DatasetMeta, line: usize) -> Result<Arm> {
    let arm = Arm::new(field.trim()).map_err(|_| parse_err(line, format!("invalid arm label {field:?}")))?;
    if let Some(allowed) = &meta.arms {
        if !allowed.iter().any(|a| a == arm.label()) {
            return Err(parse_err(line, format!("unknown arm label {:?}", arm.label())));
        }
    }
    Ok(arm)
}

/// Parses a subject or bin CSV. Row order is preserved.
pub fn parse_dataset(text: &str, format: CsvFormat, meta: &DatasetMeta) -> Result<TrialDataset> {
    let mut reader =
        csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> =
        reader.headers().map_err(|e| parse_err(1, e.to_string()))?.iter().map(str::to_string).collect();
    let with_value = match format {
        CsvFormat::Subject => {
            let ok3 = header.len() == 3 && header.iter().zip(SUBJECT_HEADER).all(|(h, e)| h == e);
            let ok4 = header.len() == 4
                && header.iter().zip(SUBJECT_HEADER).all(|(h, e)| h == e)
                && header[3] == "outcome_value";
            if !(ok3 || ok4) {
                return Err(parse_err(
                    1,
                    format!("expected header aer,arm,outcome[,outcome_value], got {}", header.join(",")),
                ));
            }
            ok4
        }
        CsvFormat::Bin => {
            if header.len() != 5 || header.iter().zip(BIN_HEADER).any(|(h, e)| h != e) {
                return Err(parse_err(1, format!("expected header lo,hi,arm,events,total, got {}", header.join(","))));
            }
            false
        }
    };
    let width = header.len();

    let mut records = Vec::new();
    let mut bins = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() == 1 && row.get(0) == Some("") {
            continue;
        }
        if row.len() != width {
            return Err(parse_err(line, format!("expected {width} columns, found {}", row.len())));
        }
        match format {
            CsvFormat::Subject => {
                let baseline = parse_positive(&row[0], "aer", line)?;
                let arm = parse_arm(&row[1], meta, line)?;
                let outcome = match row[2].trim() {
                    "0" => false,
                    "1" => true,
                    other => return Err(parse_err(line, format!("outcome must be 0 or 1, got {other:?}"))),
                };
                let outcome_value = if with_value && !row[3].trim().is_empty() {
                    Some(parse_positive(&row[3], "outcome_value", line)?)
                } else {
                    None
                };
                let (lo, hi) = meta.eligibility;
                if baseline < lo || baseline > hi {
                    return Err(parse_err(line, format!("aer {baseline} outside eligibility [{lo}, {hi}]")));
                }
                if let (Some(v), Some(t)) = (outcome_value, meta.outcome_threshold) {
                    if (v > t) != outcome {
                        return Err(parse_err(
                            line,
                            format!("outcome {} inconsistent with outcome_value {v} at threshold {t}", outcome as u8),
                        ));
                    }
                }
                records.push(SubjectRecord { baseline, arm, outcome, outcome_value });
            }
            CsvFormat::Bin => {
                let lo = parse_positive(&row[0], "lo", line)?;
                let hi = parse_positive(&row[1], "hi", line)?;
                let arm = parse_arm(&row[2], meta, line)?;
                let events = parse_count(&row[3], "events", line)?;
                let total = parse_count(&row[4], "total", line)?;
                let bin = AggregateBin::new(lo, hi, arm, events, total).map_err(|e| parse_err(line, e.to_string()))?;
                bins.push(bin);
            }
        }
    }
    if records.is_empty() && bins.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let control = Arm::new(meta.control.clone())?;
    TrialDataset::new(
        meta.name.clone().unwrap_or_else(|| "dataset".into()),
        records,
        bins,
        meta.eligibility,
        meta.outcome_threshold,
        control,
    )
}

/// Serialises records (subject format) or bins (bin format) back to CSV.
pub fn write_dataset(data: &TrialDataset, format: CsvFormat) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    match format {
        CsvFormat::Subject => {
            let with_value = data.records.iter().any(|r| r.outcome_value.is_some());
            if with_value {
                w.write_record(["aer", "arm", "outcome", "outcome_value"]).unwrap();
            } else {
                w.write_record(SUBJECT_HEADER).unwrap();
            }
            for r in &data.records {
                let mut row = vec![r.baseline.to_string(), r.arm.to_string(), (r.outcome as u8).to_string()];
                if with_value {
                    row.push(r.outcome_value.map(|v| v.to_string()).unwrap_or_default());
                }
                w.write_record(&row).unwrap();
            }
        }
        CsvFormat::Bin => {
            w.write_record(BIN_HEADER).unwrap();
            for b in &data.bins {
                w.write_record([
                    b.lo.to_string(),
                    b.hi.to_string(),
                    b.arm.to_string(),
                    b.events.to_string(),
                    b.total.to_string(),
                ])
                .unwrap();
            }
        }
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}
