//! Bipartite diffusion recommenders (resource spreading, heat averaging,
//! and their one-parameter hybrid), similarity-weighted rating prediction,
//! fixed-temperature recommendation on item graphs, top-N list assembly,
//! and seeded leave-probe-out evaluation.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::absorbing::heat_equilibrium;
use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, DirectedGraph, NodeId};
use crate::matrix::ScoreVector;
use crate::similarity::{pearson_similarity, ProfileAxis, SimilarityMatrix};

/// Balance and initial-resource parameters of the hybrid diffusion.
#[derive(Debug, Clone, Copy)]
pub struct HybridParams {
    /// 1 recovers pure resource spreading, 0 pure heat averaging.
    pub lambda: f64,
    /// Initial resource on a collected item scales as `k^theta`; 0 gives
    /// every collected item one unit. Negative values favor the niche.
    pub theta: f64,
}

impl Default for HybridParams {
    fn default() -> Self {
        HybridParams {
            lambda: 1.0,
            theta: 0.0,
        }
    }
}

/// Ranked recommendations with the collected items that were withheld.
#[derive(Debug, Clone)]
pub struct RecommendationList {
    /// The receiving user, when the list was built from a bipartite graph.
    pub user: Option<usize>,
    /// `(item, score)` with non-increasing scores, ties by ascending id.
    pub items: Vec<(usize, f64)>,
    /// Items barred from the list (already collected, or boundary nodes).
    pub excluded: BTreeSet<usize>,
}

/// Core two-pass diffusion: items push resource to their users, users push
/// it back to items, with the hybrid exponents applied at both item ends.
/// The transfer matrix `W_αβ = k_α^{λ−1} k_β^{−λ} Σ_i A_iα A_iβ / k_i`
/// is never materialized.
fn diffusion_scores(
    b: &BipartiteGraph,
    user: usize,
    lambda: f64,
    theta: f64,
) -> Result<ScoreVector> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::BadParameter {
            name: "lambda",
            value: lambda,
            expected: "in [0, 1]",
        });
    }
    if user >= b.user_count() {
        return Err(Error::UnknownLabel {
            label: format!("user #{user}"),
        });
    }
    if b.user_degree(user) == 0 {
        return Err(Error::ColdStart {
            user: b.user_label(user).to_owned(),
        });
    }
    let items = b.item_count();
    // Initial resource k_β^θ on collected items, pre-scaled by the k_β^{−λ}
    // leaving-item exponent.
    let mut outgoing = vec![0.0; items];
    for e in b.items_of(user) {
        let k = b.item_degree(e.item) as f64;
        outgoing[e.item] = k.powf(theta) * k.powf(-lambda);
    }
    let mut on_users = vec![0.0; b.user_count()];
    for (i, slot) in on_users.iter_mut().enumerate() {
        let mut acc = 0.0;
        for e in b.items_of(i) {
            acc += outgoing[e.item];
        }
        *slot = acc / b.user_degree(i).max(1) as f64;
    }
    let mut scores = vec![0.0; items];
    for i in 0..b.user_count() {
        if on_users[i] == 0.0 {
            continue;
        }
        for e in b.items_of(i) {
            scores[e.item] += on_users[i];
        }
    }
    for (a, s) in scores.iter_mut().enumerate() {
        let k = b.item_degree(a) as f64;
        if k > 0.0 {
            *s *= k.powf(lambda - 1.0);
        }
    }
    ScoreVector::raw(scores)
}

/// Resource-spreading scores: each collected item's resource (one unit, or
/// `k^theta`) is split evenly among its users, then each user splits their
/// holdings evenly among their items. Collected items keep their scores
/// here; exclude them when building a list.
pub fn probs_scores(b: &BipartiteGraph, user: usize, theta: f64) -> Result<ScoreVector> {
    diffusion_scores(b, user, 1.0, theta)
}

/// Heat-averaging scores: each user averages their collected items'
/// resource, then each item averages its users' values. Favors the niche
/// where resource spreading favors the popular.
pub fn heats_scores(b: &BipartiteGraph, user: usize) -> Result<ScoreVector> {
    diffusion_scores(b, user, 0.0, 0.0)
}

/// Hybrid diffusion interpolating between heat averaging (`lambda = 0`)
/// and resource spreading (`lambda = 1`).
pub fn hybrid_scores(b: &BipartiteGraph, user: usize, params: HybridParams) -> Result<ScoreVector> {
    diffusion_scores(b, user, params.lambda, params.theta)
}

/// Predicted rating of `item` for `user`: the user's mean rating plus the
/// similarity-weighted mean-centered deviations of everyone who rated the
/// item. Errs with a no-prediction signal when nobody informative rated it;
/// callers typically fall back to the user's mean.
pub fn predict_rating(
    b: &BipartiteGraph,
    similarity: &SimilarityMatrix,
    user: usize,
    item: usize,
) -> Result<f64> {
    let no_prediction = || Error::NoPrediction {
        user: b.user_label(user).to_owned(),
        item: b.item_label(item).to_owned(),
    };
    let mu = b.mean_rating(user).ok_or_else(no_prediction)?;
    let mut num = 0.0;
    let mut mass = 0.0;
    for (j, rating) in b.users_of(item) {
        if j == user {
            continue;
        }
        let (Some(r), Some(mu_j)) = (rating, b.mean_rating(j)) else {
            continue;
        };
        let s = similarity.get(user, j);
        num += s * (r - mu_j);
        mass += s.abs();
    }
    if mass == 0.0 {
        return Err(no_prediction());
    }
    Ok(mu + num / mass)
}

/// `predict_rating` with the standard fallback: the user's mean rating
/// when no informative rater exists.
pub fn predict_rating_or_mean(
    b: &BipartiteGraph,
    similarity: &SimilarityMatrix,
    user: usize,
    item: usize,
) -> Result<f64> {
    match predict_rating(b, similarity, user, item) {
        Ok(r) => Ok(r),
        Err(Error::NoPrediction { .. }) => Ok(b.mean_rating(user).unwrap_or(0.0)),
        Err(e) => Err(e),
    }
}

/// Ranks free items of an item graph by their equilibrium temperature when
/// liked items are pinned at 1 and disliked at 0. With no disliked items
/// every reachable free node settles at exactly 1 and the ranking
/// degenerates to id order.
pub fn temperature_recommend(
    item_graph: &DirectedGraph,
    liked: &[NodeId],
    disliked: &[NodeId],
) -> Result<RecommendationList> {
    if liked.is_empty() {
        return Err(Error::BadParameter {
            name: "liked",
            value: 0.0,
            expected: "at least one liked item",
        });
    }
    let liked_set: BTreeSet<NodeId> = liked.iter().copied().collect();
    if let Some(&both) = disliked.iter().find(|d| liked_set.contains(d)) {
        return Err(Error::BadParameter {
            name: "disliked",
            value: both as f64,
            expected: "no overlap with the liked set",
        });
    }
    let mut boundary: Vec<(NodeId, f64)> = liked.iter().map(|&i| (i, 1.0)).collect();
    boundary.extend(disliked.iter().map(|&i| (i, 0.0)));
    let temperatures = heat_equilibrium(item_graph, &boundary)?;
    let excluded: BTreeSet<NodeId> = boundary.iter().map(|&(i, _)| i).collect();
    Ok(top_n(
        &temperatures,
        &excluded,
        item_graph.node_count(),
    ))
}

/// The `n` highest-scoring non-excluded items; fewer when the candidates
/// run out. Ties break by ascending item id.
pub fn top_n(scores: &ScoreVector, exclude: &BTreeSet<usize>, n: usize) -> RecommendationList {
    let items = scores
        .ranked()
        .into_iter()
        .filter(|i| !exclude.contains(i))
        .take(n)
        .map(|i| (i, scores.values()[i]))
        .collect();
    RecommendationList {
        user: None,
        items,
        excluded: exclude.clone(),
    }
}

/// How the evaluation scores candidate items for a user.
#[derive(Debug, Clone, Copy)]
pub enum ScoreMethod {
    /// Resource spreading with initial-resource exponent θ.
    Probs { theta: f64 },
    /// Heat averaging.
    Heats,
    /// The λ/θ hybrid.
    Hybrid(HybridParams),
    /// Rating prediction from user–user Pearson similarity.
    CollaborativeFiltering,
    /// Uniform random scores from the evaluation seed; the null baseline
    /// whose recovery score sits at 0.5.
    Random,
}

/// Leave-probe-out evaluation settings.
#[derive(Debug, Clone, Copy)]
pub struct EvaluationConfig {
    pub method: ScoreMethod,
    /// Per-user fraction of collected items moved to the probe, in (0,1).
    pub probe_fraction: f64,
    /// Seed of the probe split (and of the random scorer).
    pub seed: u64,
    /// List length for precision, diversity, and degree metrics.
    pub list_length: usize,
}

/// Aggregate metrics of one evaluation run.
#[derive(Debug, Clone)]
pub struct EvaluationReport {
    /// Mean normalized rank of probe items among the user's uncollected
    /// items: 0 is perfect, 0.5 is random.
    pub recovery: f64,
    /// Mean fraction of each user's top list that came from their probe.
    pub precision: f64,
    /// Mean pairwise Hamming distance between users' top lists: 0 when all
    /// lists coincide, 1 when no two share an item.
    pub diversity: f64,
    /// Mean training degree of recommended items (popularity bias probe).
    pub average_recommended_degree: f64,
    /// Users with a nonempty probe who were scored.
    pub users_evaluated: usize,
    /// Users whose probe came out empty (degree too small for the
    /// fraction); they stay in training and contribute no metrics.
    pub users_skipped: usize,
    /// Total user–item pairs withheld.
    pub probe_size: usize,
}

fn score_candidates(
    training: &BipartiteGraph,
    similarity: Option<&SimilarityMatrix>,
    method: ScoreMethod,
    user: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    match method {
        ScoreMethod::Probs { theta } => Ok(probs_scores(training, user, theta)?.into_values()),
        ScoreMethod::Heats => Ok(heats_scores(training, user)?.into_values()),
        ScoreMethod::Hybrid(params) => Ok(hybrid_scores(training, user, params)?.into_values()),
        ScoreMethod::CollaborativeFiltering => {
            let sim = similarity.expect("similarity precomputed for CF");
            (0..training.item_count())
                .map(|item| predict_rating_or_mean(training, sim, user, item))
                .collect()
        }
        ScoreMethod::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(user as u64 + 1);
            Ok((0..training.item_count())
                .map(|_| rand::Rng::gen::<f64>(&mut rng))
                .collect())
        }
    }
}

/// Splits off a seeded per-user probe, scores every user on the training
/// remainder, and reports recovery, precision, diversity, and popularity
/// metrics. The split and all scores depend only on the config, never on
/// thread scheduling.
pub fn evaluate(b: &BipartiteGraph, config: &EvaluationConfig) -> Result<EvaluationReport> {
    if !(config.probe_fraction > 0.0 && config.probe_fraction < 1.0) {
        return Err(Error::BadParameter {
            name: "probe_fraction",
            value: config.probe_fraction,
            expected: "in the open interval (0, 1)",
        });
    }
    if config.list_length == 0 {
        return Err(Error::BadParameter {
            name: "list_length",
            value: 0.0,
            expected: "at least 1",
        });
    }
    let users = b.user_count();
    // Per-user probe draw, independent of iteration order.
    let mut probe: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); users];
    for (u, probe_items) in probe.iter_mut().enumerate() {
        let d = b.user_degree(u);
        let count = (config.probe_fraction * d as f64).floor() as usize;
        if count == 0 {
            continue;
        }
        let items: Vec<usize> = b.items_of(u).map(|e| e.item).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(u as u64 + 1);
        for k in sample(&mut rng, items.len(), count) {
            probe_items.insert(items[k]);
        }
    }
    let training = b.filter_entries(|e| !probe[e.user].contains(&e.item));
    let similarity = match config.method {
        ScoreMethod::CollaborativeFiltering => {
            Some(pearson_similarity(&training, ProfileAxis::Users)?)
        }
        _ => None,
    };
    let evaluated: Vec<usize> = (0..users).filter(|&u| !probe[u].is_empty()).collect();
    let per_user: Vec<(f64, f64, Vec<usize>, usize)> = evaluated
        .par_iter()
        .map(|&u| -> Result<(f64, f64, Vec<usize>, usize)> {
            let scores = score_candidates(&training, similarity.as_ref(), config.method, u, config.seed)?;
            let collected: BTreeSet<usize> = training.items_of(u).map(|e| e.item).collect();
            // Candidates: everything the user has not collected in training.
            let mut candidates: Vec<usize> =
                (0..b.item_count()).filter(|i| !collected.contains(i)).collect();
            candidates.sort_by(|&ia, &ib| scores[ib].total_cmp(&scores[ia]).then(ia.cmp(&ib)));
            let eligible = candidates.len() as f64;
            let mut recovery_sum = 0.0;
            for &p in &probe[u] {
                // Tie-averaged rank: items scoring strictly higher, plus
                // half of the equal-scoring group (self included). The
                // half-step offset centers a random ranking at exactly 0.5
                // for any eligible count.
                let s = scores[p];
                let higher = candidates.iter().filter(|&&c| scores[c] > s).count() as f64;
                let equal = candidates.iter().filter(|&&c| scores[c] == s).count() as f64;
                recovery_sum += (higher + (equal + 1.0) / 2.0 - 0.5) / eligible;
            }
            let top: Vec<usize> = candidates
                .iter()
                .copied()
                .take(config.list_length)
                .collect();
            let hits = top.iter().filter(|i| probe[u].contains(i)).count();
            let precision = hits as f64 / config.list_length as f64;
            Ok((recovery_sum, precision, top, probe[u].len()))
        })
        .collect::<Result<_>>()?;
    let users_evaluated = per_user.len();
    let users_skipped = users - users_evaluated;
    let probe_size: usize = per_user.iter().map(|(_, _, _, k)| k).sum();
    if users_evaluated == 0 || probe_size == 0 {
        return Err(Error::BadParameter {
            name: "probe_fraction",
            value: config.probe_fraction,
            expected: "a fraction selecting at least one probe item",
        });
    }
    let recovery =
        per_user.iter().map(|(r, _, _, _)| r).sum::<f64>() / probe_size as f64;
    let precision =
        per_user.iter().map(|(_, p, _, _)| p).sum::<f64>() / users_evaluated as f64;
    let mut degree_sum = 0.0;
    let mut degree_count = 0usize;
    for (_, _, top, _) in &per_user {
        for &i in top {
            degree_sum += training.item_degree(i) as f64;
            degree_count += 1;
        }
    }
    let average_recommended_degree = degree_sum / degree_count.max(1) as f64;
    let mut diversity_sum = 0.0;
    let mut pair_count = 0usize;
    for a in 0..per_user.len() {
        for c in (a + 1)..per_user.len() {
            let (la, lc) = (&per_user[a].2, &per_user[c].2);
            let overlap = la.iter().filter(|i| lc.contains(i)).count();
            let longest = la.len().max(lc.len());
            if longest > 0 {
                diversity_sum += 1.0 - overlap as f64 / longest as f64;
                pair_count += 1;
            }
        }
    }
    let diversity = if pair_count > 0 {
        diversity_sum / pair_count as f64
    } else {
        0.0
    };
    Ok(EvaluationReport {
        recovery,
        precision,
        diversity,
        average_recommended_degree,
        users_evaluated,
        users_skipped,
        probe_size,
    })
}
