use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::error::{Error, Result};

/// Assignment of every labeled answer to one of `folds` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub assignments: BTreeMap<String, usize>,
    pub folds: usize,
    pub seed: u64,
}

impl FoldPlan {
    pub fn fold_of(&self, video_id: &str) -> Option<usize> {
        self.assignments.get(video_id).copied()
    }

    pub fn test_ids(&self, fold: usize) -> impl Iterator<Item = &str> {
        self.assignments
            .iter()
            .filter(move |(_, &f)| f == fold)
            .map(|(id, _)| id.as_str())
    }

    pub fn train_ids(&self, fold: usize) -> impl Iterator<Item = &str> {
        self.assignments
            .iter()
            .filter(move |(_, &f)| f != fold)
            .map(|(id, _)| id.as_str())
    }
}

/// Shuffles each class with a seeded generator and deals it round-robin
/// over the folds, so per-fold counts of a class differ by at most one.
/// The second class continues dealing where the first stopped, which keeps
/// fold sizes balanced overall as well.
pub fn stratified_kfold(labels: &BTreeMap<String, Label>, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    let mut by_class: BTreeMap<Label, Vec<&String>> = BTreeMap::new();
    by_class.insert(Label::Spam, Vec::new());
    by_class.insert(Label::Legitimate, Vec::new());
    for (id, &label) in labels {
        match label {
            Label::Unlabeled => {
                return Err(Error::BadLabel {
                    video: id.clone(),
                    reason: "cannot stratify unlabeled videos".into(),
                })
            }
            l => by_class.get_mut(&l).unwrap().push(id),
        }
    }
    for (label, ids) in &by_class {
        if ids.len() < k {
            return Err(Error::InfeasibleFolds {
                label: label.to_string(),
                count: ids.len(),
                folds: k,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = BTreeMap::new();
    let mut next = 0usize;
    for ids in by_class.values_mut() {
        ids.shuffle(&mut rng);
        for id in ids.iter() {
            assignments.insert((*id).clone(), next % k);
            next += 1;
        }
    }
    Ok(FoldPlan {
        assignments,
        folds: k,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(spam: usize, legit: usize) -> BTreeMap<String, Label> {
        let mut m = BTreeMap::new();
        for i in 0..spam {
            m.insert(format!("s{i}"), Label::Spam);
        }
        for i in 0..legit {
            m.insert(format!("l{i}"), Label::Legitimate);
        }
        m
    }

    fn counts(plan: &FoldPlan, labels: &BTreeMap<String, Label>, class: Label) -> Vec<usize> {
        let mut c = vec![0; plan.folds];
        for (id, &f) in &plan.assignments {
            if labels[id] == class {
                c[f] += 1;
            }
        }
        c
    }

    #[test]
    fn tiny_balanced() {
        let l = labels(5, 5);
        let plan = stratified_kfold(&l, 5, 1).unwrap();
        assert_eq!(counts(&plan, &l, Label::Spam), vec![1; 5]);
        assert_eq!(counts(&plan, &l, Label::Legitimate), vec![1; 5]);
    }

    #[test]
    fn infeasible() {
        let err = stratified_kfold(&labels(3, 10), 5, 0).unwrap_err();
        assert!(matches!(err, Error::InfeasibleFolds { count: 3, folds: 5, .. }));
        assert!(stratified_kfold(&labels(10, 10), 1, 0).is_err());
    }

    #[test]
    fn uneven_classes_stay_stratified() {
        for (s, l, k) in [(13, 29, 5), (7, 7, 3), (100, 3, 3), (11, 12, 4)] {
            let lab = labels(s, l);
            let plan = stratified_kfold(&lab, k, 9).unwrap();
            assert_eq!(plan.assignments.len(), s + l);
            for class in [Label::Spam, Label::Legitimate] {
                let c = counts(&plan, &lab, class);
                assert!(c.iter().max().unwrap() - c.iter().min().unwrap() <= 1, "{c:?}");
            }
            let sizes: Vec<usize> = (0..k).map(|f| plan.test_ids(f).count()).collect();
            assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let lab = labels(40, 40);
        assert_eq!(
            stratified_kfold(&lab, 5, 3).unwrap(),
            stratified_kfold(&lab, 5, 3).unwrap()
        );
        assert_ne!(
            stratified_kfold(&lab, 5, 3).unwrap(),
            stratified_kfold(&lab, 5, 4).unwrap()
        );
    }
}
