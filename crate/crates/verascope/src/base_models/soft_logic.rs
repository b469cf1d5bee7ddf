//! Joint credibility refinement over the publisher-document-actor graph.
//!
//! Each edge says "this source's credibility and that document's truth
//! should agree"; labeled documents anchor the system. The objective is a
//! sum of squared hinges per edge plus squared anchor residuals, which is
//! convex, so projected gradient descent with a small enough step
//! decreases it monotonically to the global minimum.

use std::collections::BTreeMap;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Step of `None` derives a safe rate from the graph's degree bound.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftLogicHyper {
    pub step: Option<f64>,
    pub iters: usize,
}

impl Default for SoftLogicHyper {
    fn default() -> SoftLogicHyper {
        SoftLogicHyper {
            step: None,
            iters: 2000,
        }
    }
}

/// Variables live in one flat vector: publishers, then documents, then
/// actors, each segment in the id order of the corresponding list.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SoftLogicGraph {
    pub publishers: Vec<String>,
    pub docs: Vec<String>,
    pub actors: Vec<String>,
    /// `(publisher index, doc index)` pairs.
    pub publisher_doc_edges: Vec<(usize, usize)>,
    /// `(actor index, doc index)` pairs, one per distinct engaging pair.
    pub actor_doc_edges: Vec<(usize, usize)>,
    /// Doc index to anchored truth value in `[0, 1]`.
    pub anchors: BTreeMap<usize, f64>,
}

/// Refined scores, all in `[0, 1]`; 1 means credible / true.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftLogicResult {
    pub publisher_credibility: BTreeMap<String, f64>,
    pub doc_truth: BTreeMap<String, f64>,
    pub actor_credibility: BTreeMap<String, f64>,
    /// Objective before each iteration plus the final value.
    pub objective_trace: Vec<f64>,
}

impl SoftLogicGraph {
    /// Graph over every publisher, document, and engaging actor in the
    /// corpus. `anchors` maps document ids to target truth values.
    pub fn from_corpus(corpus: &Corpus, anchors: &BTreeMap<String, f64>) -> Result<SoftLogicGraph> {
        let publishers: Vec<String> =
            corpus.publishers().map(|p| p.publisher_id.clone()).collect();
        let docs: Vec<String> = corpus.doc_ids().map(str::to_string).collect();
        let actors: Vec<String> = corpus.actors().map(|a| a.actor_ref().to_string()).collect();
        let pub_idx: BTreeMap<&str, usize> = publishers
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let doc_idx: BTreeMap<&str, usize> =
            docs.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let actor_idx: BTreeMap<&str, usize> = actors
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();

        let mut publisher_doc_edges = Vec::new();
        for doc in corpus.documents() {
            // A publisher without a record contributes no constraint.
            if let Some(&p) = pub_idx.get(doc.publisher_id.as_str()) {
                publisher_doc_edges.push((p, doc_idx[doc.doc_id.as_str()]));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut actor_doc_edges = Vec::new();
        for item in corpus.items() {
            let aref = format!("{}:{}", item.platform, item.actor_id);
            let Some(&a) = actor_idx.get(aref.as_str()) else {
                continue;
            };
            let d = doc_idx[item.doc_id.as_str()];
            if seen.insert((a, d)) {
                actor_doc_edges.push((a, d));
            }
        }

        let mut anchor_map = BTreeMap::new();
        for (doc_id, &value) in anchors {
            let Some(&d) = doc_idx.get(doc_id.as_str()) else {
                return Err(Error::UnknownDocument(doc_id.clone()));
            };
            if !(0.0..=1.0).contains(&value) || !value.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "anchor for `{doc_id}` is {value}, outside [0,1]"
                )));
            }
            anchor_map.insert(d, value);
        }
        Ok(SoftLogicGraph {
            publishers,
            docs,
            actors,
            publisher_doc_edges,
            actor_doc_edges,
            anchors: anchor_map,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.publishers.len() + self.docs.len() + self.actors.len()
    }

    fn doc_var(&self, d: usize) -> usize {
        self.publishers.len() + d
    }

    fn actor_var(&self, a: usize) -> usize {
        self.publishers.len() + self.docs.len() + a
    }

    /// Squared-hinge disagreement over all edges plus squared anchor
    /// residuals, with the analytic gradient.
    pub fn objective_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        assert_eq!(x.len(), self.n_vars());
        let mut f = 0.0;
        let mut g = vec![0.0; x.len()];
        let edge = |f: &mut f64, g: &mut Vec<f64>, source: usize, doc: usize| {
            let (c, t) = (x[source], x[doc]);
            let over = (c - t).max(0.0);
            let under = (t - c).max(0.0);
            *f += over * over + under * under;
            g[source] += 2.0 * over - 2.0 * under;
            g[doc] += 2.0 * under - 2.0 * over;
        };
        for &(p, d) in &self.publisher_doc_edges {
            edge(&mut f, &mut g, p, self.doc_var(d));
        }
        for &(a, d) in &self.actor_doc_edges {
            edge(&mut f, &mut g, self.actor_var(a), self.doc_var(d));
        }
        for (&d, &label) in &self.anchors {
            let t = x[self.doc_var(d)];
            f += (t - label) * (t - label);
            g[self.doc_var(d)] += 2.0 * (t - label);
        }
        (f, g)
    }

    /// Upper bound on the objective's curvature: `4 * max_degree + 2`.
    /// Descent with the reciprocal step cannot overshoot.
    fn curvature_bound(&self) -> f64 {
        let mut degree = vec![0usize; self.n_vars()];
        for &(p, d) in &self.publisher_doc_edges {
            degree[p] += 1;
            degree[self.doc_var(d)] += 1;
        }
        for &(a, d) in &self.actor_doc_edges {
            degree[self.actor_var(a)] += 1;
            degree[self.doc_var(d)] += 1;
        }
        let max_degree = degree.into_iter().max().unwrap_or(0);
        (4 * max_degree + 2) as f64
    }
}

/// Minimizes the graph objective from an all-0.5 start by projected
/// gradient descent onto `[0, 1]`.
pub fn refine(graph: &SoftLogicGraph, hyper: &SoftLogicHyper) -> Result<SoftLogicResult> {
    let step = match hyper.step {
        Some(s) => {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::InvalidConfig(format!("step {s} must be positive")));
            }
            s
        }
        None => 1.0 / graph.curvature_bound(),
    };
    let mut x = vec![0.5; graph.n_vars()];
    let mut trace = Vec::with_capacity(hyper.iters + 1);
    for iteration in 0..=hyper.iters {
        let (f, g) = graph.objective_and_gradient(&x);
        if !f.is_finite() {
            return Err(Error::NonFinite {
                what: "objective",
                iteration,
            });
        }
        trace.push(f);
        if iteration == hyper.iters {
            break;
        }
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi = (*xi - step * gi).clamp(0.0, 1.0);
        }
    }
    let take = |ids: &[String], offset: usize| -> BTreeMap<String, f64> {
        ids.iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), x[offset + i]))
            .collect()
    };
    Ok(SoftLogicResult {
        publisher_credibility: take(&graph.publishers, 0),
        doc_truth: take(&graph.docs, graph.publishers.len()),
        actor_credibility: take(
            &graph.actors,
            graph.publishers.len() + graph.docs.len(),
        ),
        objective_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn lonely_graph() -> SoftLogicGraph {
        SoftLogicGraph {
            publishers: vec!["p1".to_string(), "p2".to_string()],
            docs: vec!["d1".to_string()],
            actors: vec!["alpha:a1".to_string()],
            ..SoftLogicGraph::default()
        }
    }

    #[test]
    fn no_edges_and_no_anchors_leave_everything_at_half() {
        let result = refine(&lonely_graph(), &SoftLogicHyper::default()).unwrap();
        assert!(result.publisher_credibility.values().all(|v| *v == 0.5));
        assert!(result.doc_truth.values().all(|v| *v == 0.5));
        assert!(result.actor_credibility.values().all(|v| *v == 0.5));
        assert!(result.objective_trace.iter().all(|f| *f == 0.0));
    }

    #[test]
    fn anchored_true_document_pulls_its_publisher_to_one() {
        let mut graph = SoftLogicGraph {
            publishers: vec!["pub".to_string()],
            docs: vec!["doc".to_string()],
            ..SoftLogicGraph::default()
        };
        graph.publisher_doc_edges.push((0, 0));
        graph.anchors.insert(0, 1.0);
        let result = refine(&graph, &SoftLogicHyper::default()).unwrap();
        assert!((result.publisher_credibility["pub"] - 1.0).abs() <= 1e-3);
        assert!((result.doc_truth["doc"] - 1.0).abs() <= 1e-3);
    }

    fn random_graph(rng: &mut ChaCha8Rng) -> SoftLogicGraph {
        let n_pub = rng.gen_range(1..4);
        let n_doc = rng.gen_range(1..6);
        let n_act = rng.gen_range(0..5);
        let mut graph = SoftLogicGraph {
            publishers: (0..n_pub).map(|i| format!("p{i}")).collect(),
            docs: (0..n_doc).map(|i| format!("d{i}")).collect(),
            actors: (0..n_act).map(|i| format!("alpha:a{i}")).collect(),
            ..SoftLogicGraph::default()
        };
        for d in 0..n_doc {
            graph
                .publisher_doc_edges
                .push((rng.gen_range(0..n_pub), d));
            if rng.gen_bool(0.5) {
                graph.anchors.insert(d, rng.gen_range(0.0..=1.0));
            }
        }
        for a in 0..n_act {
            for d in 0..n_doc {
                if rng.gen_bool(0.4) {
                    graph.actor_doc_edges.push((a, d));
                }
            }
        }
        graph
    }

    #[test]
    fn objective_never_increases_and_variables_stay_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let graph = random_graph(&mut rng);
            let result = refine(
                &graph,
                &SoftLogicHyper {
                    step: None,
                    iters: 300,
                },
            )
            .unwrap();
            for pair in result.objective_trace.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-12, "objective rose: {pair:?}");
            }
            let in_range = |m: &BTreeMap<String, f64>| {
                m.values().all(|v| (0.0..=1.0).contains(v))
            };
            assert!(in_range(&result.publisher_credibility));
            assert!(in_range(&result.doc_truth));
            assert!(in_range(&result.actor_credibility));
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let graph = random_graph(&mut rng);
        let eps = 1e-6;
        for _ in 0..5 {
            let x: Vec<f64> = (0..graph.n_vars())
                .map(|_| rng.gen_range(0.0..=1.0))
                .collect();
            let (_, g) = graph.objective_and_gradient(&x);
            for j in 0..x.len() {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += eps;
                xm[j] -= eps;
                let fd = (graph.objective_and_gradient(&xp).0
                    - graph.objective_and_gradient(&xm).0)
                    / (2.0 * eps);
                let rel = (g[j] - fd).abs() / g[j].abs().max(fd.abs()).max(1e-8);
                assert!(rel <= 1e-4, "var {j}: analytic {} vs fd {fd}", g[j]);
            }
        }
    }

    #[test]
    fn corpus_graphs_wire_edges_and_validate_anchors() {
        use crate::corpus::synth::{generate, SynthConfig};
        let cfg = SynthConfig {
            n_docs: 12,
            n_publishers: 3,
            n_background_actors: 10,
            engagement_range: (2, 6),
            clusters: vec![],
            n_alias_pairs: 0,
            ..SynthConfig::default()
        };
        let (corpus, _) = generate(&cfg, 31).unwrap();
        let mut anchors = BTreeMap::new();
        let first = corpus.doc_ids().next().unwrap().to_string();
        anchors.insert(first.clone(), 1.0);
        let graph = SoftLogicGraph::from_corpus(&corpus, &anchors).unwrap();
        assert_eq!(graph.publisher_doc_edges.len(), 12);
        assert_eq!(graph.anchors.len(), 1);
        assert!(!graph.actor_doc_edges.is_empty());
        let distinct: std::collections::BTreeSet<_> =
            graph.actor_doc_edges.iter().collect();
        assert_eq!(distinct.len(), graph.actor_doc_edges.len());

        anchors.insert("missing".to_string(), 1.0);
        assert!(SoftLogicGraph::from_corpus(&corpus, &anchors).is_err());
        anchors.remove("missing");
        anchors.insert(first, 1.5);
        assert!(SoftLogicGraph::from_corpus(&corpus, &anchors).is_err());
    }
}
