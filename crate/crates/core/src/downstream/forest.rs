//! Random forest of CART classification trees with Gini splits.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::rng::Seed;

use super::encode::FeatureMatrix;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf {
        class: u32,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_row(&self, x: &[f64]) -> u32 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ForestParams {
    pub trees: usize,
    /// `None` grows trees until leaves are pure or unsplittable.
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub seed: Seed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub(crate) trees: Vec<Tree>,
    pub(crate) n_classes: usize,
    /// Mean-decrease-in-impurity per encoded feature, normalized per tree and
    /// averaged.
    pub(crate) importances: Vec<f64>,
}

impl Forest {
    pub fn fit(x: &FeatureMatrix, y: &[u32], n_classes: usize, params: &ForestParams) -> Forest {
        let mut importances = vec![0.0; x.cols];
        let mut trees = Vec::with_capacity(params.trees);
        for t in 0..params.trees {
            let mut rng = params.seed.derive_index(t as u64).rng("forest.tree");
            let rows: Vec<usize> = if params.bootstrap {
                (0..x.rows).map(|_| rng.random_range(0..x.rows)).collect()
            } else {
                (0..x.rows).collect()
            };
            let mut builder = TreeBuilder {
                x,
                y,
                n_classes,
                max_depth: params.max_depth.unwrap_or(usize::MAX),
                mtry: ((x.cols as f64).sqrt().floor() as usize).clamp(1, x.cols.max(1)),
                rng: &mut rng,
                nodes: Vec::new(),
                importance: vec![0.0; x.cols],
            };
            builder.grow(rows, 0);
            let total: f64 = builder.importance.iter().sum();
            if total > 0.0 {
                for (acc, v) in importances.iter_mut().zip(&builder.importance) {
                    *acc += v / total;
                }
            }
            trees.push(Tree {
                nodes: builder.nodes,
            });
        }
        if !trees.is_empty() {
            for v in importances.iter_mut() {
                *v /= trees.len() as f64;
            }
        }
        Forest {
            trees,
            n_classes,
            importances,
        }
    }

    /// Majority vote; ties go to the lowest class index.
    pub fn predict_row(&self, x: &[f64]) -> u32 {
        let mut votes = vec![0usize; self.n_classes];
        for t in &self.trees {
            votes[t.predict_row(x) as usize] += 1;
        }
        majority(&votes)
    }

    pub fn vote_share(&self, x: &[f64]) -> Vec<f64> {
        let mut votes = vec![0.0; self.n_classes];
        for t in &self.trees {
            votes[t.predict_row(x) as usize] += 1.0;
        }
        let n = self.trees.len().max(1) as f64;
        votes.into_iter().map(|v| v / n).collect()
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn encoded_importances(&self) -> &[f64] {
        &self.importances
    }
}

fn majority(counts: &[usize]) -> u32 {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate().skip(1) {
        if c > counts[best] {
            best = i;
        }
    }
    best as u32
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    decrease: f64,
}

struct TreeBuilder<'a> {
    x: &'a FeatureMatrix,
    y: &'a [u32],
    n_classes: usize,
    max_depth: usize,
    mtry: usize,
    rng: &'a mut ChaCha8Rng,
    nodes: Vec<Node>,
    importance: Vec<f64>,
}

impl TreeBuilder<'_> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let mut counts = vec![0usize; self.n_classes];
        for &r in &rows {
            counts[self.y[r] as usize] += 1;
        }
        let class = majority(&counts);
        self.nodes.push(Node::Leaf { class });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.max_depth || rows.len() < 2 || self.x.cols == 0 {
            return id;
        }
        let parent = gini(&counts, rows.len());
        let Some(split) = self.find_split(&rows, &counts, parent) else {
            return id;
        };
        self.importance[split.feature] += split.decrease * rows.len() as f64;
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&r| self.x.get(r, split.feature) <= split.threshold);
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }

    /// Best split over a random subset of `mtry` features; if none of them can
    /// separate the node, the remaining features are tried in index order.
    fn find_split(&mut self, rows: &[usize], counts: &[usize], parent: f64) -> Option<BestSplit> {
        let p = self.x.cols;
        let mut drawn: Vec<usize> = sample(self.rng, p, self.mtry).into_vec();
        drawn.sort_unstable();
        if let Some(best) = self.best_over(&drawn, rows, counts, parent) {
            return Some(best);
        }
        let rest: Vec<usize> = (0..p).filter(|f| drawn.binary_search(f).is_err()).collect();
        self.best_over(&rest, rows, counts, parent)
    }

    fn best_over(
        &self,
        features: &[usize],
        rows: &[usize],
        counts: &[usize],
        parent: f64,
    ) -> Option<BestSplit> {
        let n = rows.len();
        let mut best: Option<BestSplit> = None;
        let mut pairs: Vec<(f64, u32)> = Vec::with_capacity(n);
        let mut left = vec![0usize; self.n_classes];
        let mut right = vec![0usize; self.n_classes];
        for &f in features {
            pairs.clear();
            pairs.extend(rows.iter().map(|&r| (self.x.get(r, f), self.y[r])));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            if pairs[0].0 == pairs[n - 1].0 {
                continue;
            }
            left.iter_mut().for_each(|c| *c = 0);
            right.copy_from_slice(counts);
            for k in 0..n - 1 {
                let c = pairs[k].1 as usize;
                left[c] += 1;
                right[c] -= 1;
                let (lo, hi) = (pairs[k].0, pairs[k + 1].0);
                if lo == hi {
                    continue;
                }
                let nl = k + 1;
                let nr = n - nl;
                let weighted =
                    (nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr)) / n as f64;
                let decrease = parent - weighted;
                if best.as_ref().is_none_or(|b| decrease > b.decrease) {
                    let mid = lo + (hi - lo) / 2.0;
                    let threshold = if mid < hi { mid } else { lo };
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        decrease,
                    });
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gini_of_pure_and_balanced() {
        assert_eq!(gini(&[4, 0], 4), 0.0);
        assert!((gini(&[2, 2], 4) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_unbootstrapped_tree_memorizes() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i * 7 % 40) as f64, (i % 3) as f64])
            .collect();
        let y: Vec<u32> = (0..40).map(|i| ((i * 13) % 5 % 2) as u32).collect();
        let x = FeatureMatrix::from_rows(&rows);
        let f = Forest::fit(
            &x,
            &y,
            2,
            &ForestParams {
                trees: 1,
                max_depth: None,
                bootstrap: false,
                seed: Seed(1),
            },
        );
        for (i, &yi) in y.iter().enumerate().take(40) {
            assert_eq!(f.predict_row(x.row(i)), yi);
        }
    }

    #[test]
    fn depth_limit_respected() {
        let rows: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64]).collect();
        let y: Vec<u32> = (0..64).map(|i| (i % 2) as u32).collect();
        let x = FeatureMatrix::from_rows(&rows);
        let f = Forest::fit(
            &x,
            &y,
            2,
            &ForestParams {
                trees: 3,
                max_depth: Some(2),
                bootstrap: true,
                seed: Seed(9),
            },
        );
        assert!(f.trees().iter().all(|t| t.depth() <= 2));
    }
}
