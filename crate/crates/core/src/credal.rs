//! First-order credal sets and credal conditioning.
//!
//! Conditioning on an observed event `E` moves every member onto a new
//! outcome space whose outcomes are exactly the members of `E`. The
//! [`EventMap`] records that re-indexing so events can be pushed forward
//! (`F ↦ F ∩ E`) and pulled back again.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::prob::{self, event_mass, Event, FiniteDistribution, OutcomeSpace};
use crate::{Error, Result};

/// TV distance under which two conditioned members are treated as one.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// How merged members count when a credal set is turned into weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MergeWeighting {
    /// Every distinct member counts once.
    #[default]
    CountOnce,
    /// A member counts as many times as members were merged into it.
    Multiplicity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CredalSet {
    space: Arc<OutcomeSpace>,
    members: Vec<FiniteDistribution>,
    labels: Option<Vec<String>>,
    multiplicity: Vec<usize>,
}

impl CredalSet {
    pub fn new(members: Vec<FiniteDistribution>) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptyCredalSet)?;
        let space = first.space().clone();
        if members.iter().any(|m| m.space() != &space) {
            return Err(Error::SpaceMismatch);
        }
        let multiplicity = alloc::vec![1; members.len()];
        Ok(Self { space, members, labels: None, multiplicity })
    }

    /// Attaches one label (usually the parameter value) per member.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.members.len() {
            return Err(Error::LengthMismatch { expected: self.members.len(), actual: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    pub fn members(&self) -> &[FiniteDistribution] {
        &self.members
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn multiplicity(&self) -> &[usize] {
        &self.multiplicity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Normalized member weights for a counting measure over the set.
    pub fn weights(&self, mode: MergeWeighting) -> Vec<f64> {
        match mode {
            MergeWeighting::CountOnce => alloc::vec![1.0 / self.len() as f64; self.len()],
            MergeWeighting::Multiplicity => {
                let total: usize = self.multiplicity.iter().sum();
                self.multiplicity.iter().map(|&m| m as f64 / total as f64).collect()
            }
        }
    }
}

/// Re-indexing induced by observing `event`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventMap {
    source_size: usize,
    event: Event,
    target: Arc<OutcomeSpace>,
    source_to_target: Vec<Option<usize>>,
}

impl EventMap {
    /// Map for observing `event` on `source`. Fails on an empty event,
    /// which has no outcome space to map onto.
    pub fn new(source: &OutcomeSpace, event: &Event) -> Result<Self> {
        if event.space_size() != source.len() {
            return Err(Error::SpaceMismatch);
        }
        let target = OutcomeSpace::new(event.indices().iter().map(|&i| source.labels()[i].clone()))?;
        let mut source_to_target = alloc::vec![None; source.len()];
        for (t, &s) in event.indices().iter().enumerate() {
            source_to_target[s] = Some(t);
        }
        Ok(Self { source_size: source.len(), event: event.clone(), target: Arc::new(target), source_to_target })
    }

    pub fn source_size(&self) -> usize {
        self.source_size
    }

    pub fn event(&self) -> &Event {
        &self.event
    }

    pub fn target(&self) -> &Arc<OutcomeSpace> {
        &self.target
    }

    /// Target index of a source outcome, `None` outside the event.
    pub fn image_of(&self, source_index: usize) -> Option<usize> {
        self.source_to_target.get(source_index).copied().flatten()
    }
}

/// `F ↦ F ∩ E`, re-indexed onto the target space.
pub fn map_event(m: &EventMap, f: &Event) -> Result<Event> {
    if f.space_size() != m.source_size {
        return Err(Error::SpaceMismatch);
    }
    Event::new(m.target.len(), f.indices().iter().filter_map(|&i| m.image_of(i)))
}

/// Source-space preimage of a target event; always a subset of `E`.
pub fn preimage(m: &EventMap, target_event: &Event) -> Result<Event> {
    if target_event.space_size() != m.target.len() {
        return Err(Error::SpaceMismatch);
    }
    Event::new(m.source_size, target_event.indices().iter().map(|&t| m.event.indices()[t]))
}

/// Conditions every member on `e`, drops members with `P(e) = 0`, moves the
/// survivors onto the mapped space and merges members closer than
/// [`MERGE_TOLERANCE`] in TV, accumulating their multiplicity.
pub fn credal_condition(c: &CredalSet, e: &Event) -> Result<(CredalSet, EventMap)> {
    if e.space_size() != c.space.len() {
        return Err(Error::SpaceMismatch);
    }
    if e.is_empty() {
        return Err(Error::AllMembersZero);
    }
    let map = EventMap::new(&c.space, e)?;
    let mut members: Vec<FiniteDistribution> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut multiplicity: Vec<usize> = Vec::new();

    for (i, member) in c.members.iter().enumerate() {
        let mass = event_mass(member.probs(), e);
        if mass <= 0.0 {
            continue;
        }
        let probs: Vec<f64> = e.indices().iter().map(|&s| member.probs()[s] / mass).collect();
        match members.iter().position(|m| prob::tv_distance_slices(m.probs(), &probs) < MERGE_TOLERANCE) {
            Some(j) => multiplicity[j] += c.multiplicity[i],
            None => {
                members.push(FiniteDistribution::from_parts_unchecked(map.target.clone(), probs));
                multiplicity.push(c.multiplicity[i]);
                if let Some(l) = &c.labels {
                    labels.push(l[i].clone());
                }
            }
        }
    }
    if members.is_empty() {
        return Err(Error::AllMembersZero);
    }
    let labels = c.labels.as_ref().map(|_| labels);
    Ok((CredalSet { space: map.target.clone(), members, labels, multiplicity }, map))
}

/// `(min, max)` of `P(e)` over the members.
pub fn probability_range(c: &CredalSet, e: &Event) -> Result<(f64, f64)> {
    if e.space_size() != c.space.len() {
        return Err(Error::SpaceMismatch);
    }
    Ok(c.members
        .iter()
        .map(|m| event_mass(m.probs(), e))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p), hi.max(p))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{CoinMatchingFamily, ParamFamily};
    use crate::prob::make_distribution;

    #[test]
    fn one_member_dies() {
        let s = Arc::new(OutcomeSpace::indexed(2).unwrap());
        let c = CredalSet::new(alloc::vec![
            make_distribution(s.clone(), &[1.0, 0.0]).unwrap(),
            make_distribution(s, &[0.0, 1.0]).unwrap(),
        ])
        .unwrap();
        let e = Event::singleton(2, 0).unwrap();
        let (next, map) = credal_condition(&c, &e).unwrap();
        assert_eq!(next.len(), 1);
        assert_eq!(next.members()[0].probs(), &[1.0]);
        assert_eq!(map.image_of(0), Some(0));
        assert_eq!(map.image_of(1), None);
    }

    #[test]
    fn all_zero_is_an_error() {
        let s = Arc::new(OutcomeSpace::indexed(2).unwrap());
        let c = CredalSet::new(alloc::vec![make_distribution(s, &[0.0, 1.0]).unwrap()]).unwrap();
        assert_eq!(credal_condition(&c, &Event::singleton(2, 0).unwrap()), Err(Error::AllMembersZero));
        assert_eq!(credal_condition(&c, &Event::empty(2)), Err(Error::AllMembersZero));
    }

    #[test]
    fn coin_matching_dilates() {
        let fam = CoinMatchingFamily::new();
        let c = fam.grid_credal_set(101).unwrap();
        let m = fam.matching_event();
        assert_eq!(probability_range(&c, &m).unwrap(), (0.5, 0.5));
        let h1 = fam.first_heads_event();
        let (post, map) = credal_condition(&c, &h1).unwrap();
        assert_eq!(post.len(), 101);
        assert_eq!(post.space().labels(), &["H1H2", "H1T2"]);
        for (i, member) in post.members().iter().enumerate() {
            let p = i as f64 / 100.0;
            assert!((member.prob(0) - p).abs() < 1e-15);
            assert!((member.prob(1) - (1.0 - p)).abs() < 1e-15);
        }
        let m_image = map_event(&map, &m).unwrap();
        let (lo, hi) = probability_range(&post, &m_image).unwrap();
        assert_eq!((lo, hi), (0.0, 1.0));
    }

    #[test]
    fn duplicates_merge_with_multiplicity() {
        // members differ only outside the observed event
        let s = Arc::new(OutcomeSpace::indexed(3).unwrap());
        let c = CredalSet::new(alloc::vec![
            make_distribution(s.clone(), &[0.25, 0.25, 0.5]).unwrap(),
            make_distribution(s.clone(), &[0.1, 0.1, 0.8]).unwrap(),
            make_distribution(s, &[0.3, 0.1, 0.6]).unwrap(),
        ])
        .unwrap();
        let e = Event::new(3, [0, 1]).unwrap();
        let (post, _) = credal_condition(&c, &e).unwrap();
        assert_eq!(post.len(), 2);
        assert_eq!(post.multiplicity(), &[2, 1]);
        assert_eq!(post.weights(MergeWeighting::CountOnce), alloc::vec![0.5, 0.5]);
        let w = post.weights(MergeWeighting::Multiplicity);
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn map_event_cases() {
        let s = OutcomeSpace::indexed(5).unwrap();
        let e = Event::new(5, [1, 2, 4]).unwrap();
        let m = EventMap::new(&s, &e).unwrap();
        assert_eq!(map_event(&m, &Event::new(5, [1, 4]).unwrap()).unwrap().indices(), &[0, 2]);
        assert!(map_event(&m, &Event::new(5, [0, 3]).unwrap()).unwrap().is_empty());
        let f = Event::new(5, [0, 2]).unwrap();
        let g = Event::new(5, [2, 3]).unwrap();
        assert_eq!(map_event(&m, &f).unwrap(), map_event(&m, &g).unwrap());
        let back = preimage(&m, &Event::new(3, [0, 2]).unwrap()).unwrap();
        assert_eq!(back.indices(), &[1, 4]);
    }

    #[test]
    fn conditioning_on_everything_is_identity() {
        let fam = CoinMatchingFamily::new();
        let c = fam.grid_credal_set(11).unwrap();
        let (post, map) = credal_condition(&c, &Event::full(4)).unwrap();
        assert_eq!(post.members(), c.members());
        for i in 0..4 {
            assert_eq!(map.image_of(i), Some(i));
        }
    }

    #[test]
    fn range_of_singleton() {
        let fam = CoinMatchingFamily::new();
        let c = CredalSet::new(alloc::vec![fam.eval(&[0.3])]).unwrap();
        let e = fam.first_heads_event();
        let p = prob::event_probability(&c.members()[0], &e).unwrap();
        assert_eq!(probability_range(&c, &e).unwrap(), (p, p));
    }
}
