//! Ordering search: find gene orderings minimizing the expanding score mu_E.
//!
//! Three strategies share one evaluator:
//!
//! * exhaustive enumeration (small N, certifies by brute force),
//! * depth-first branch-and-bound over ordering prefixes — sound because the
//!   expanding count at level n depends only on the first n positions, so the
//!   partial score of a prefix lower-bounds every completion,
//! * a permutation genetic algorithm (tournament selection, order crossover,
//!   swap mutation), never certified but fast at scale.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::TransitionMap;
use crate::padic::{checked_pow, Ordering};
use crate::stability::stability_scores;

/// Hard ceiling for [`exhaustive_minimize`]: N! beyond this is unreasonable.
pub const EXHAUSTIVE_CAP: usize = 8;

/// Which strategy produced a [`SearchResult`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMethod {
    Exhaustive,
    BranchAndBound,
    Genetic,
}

/// Outcome of an ordering search.
///
/// `evaluations` counts full orderings scored (exhaustive, genetic) or
/// prefix extensions scored (branch-and-bound).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub method: SearchMethod,
    pub best_score: u128,
    /// All minimizers found, sorted lexicographically by position content.
    /// Complete exactly when `certified` is true.
    pub minimizers: Vec<Ordering>,
    /// True when the whole space was covered (possibly with sound pruning).
    pub certified: bool,
    pub evaluations: u64,
    pub wall_time_millis: u64,
}

impl SearchResult {
    /// Lexicographically smallest minimizer, the canonical representative.
    pub fn representative(&self) -> Option<&Ordering> {
        self.minimizers.first()
    }
}

/// Node/time limits for branch-and-bound. Exceeding either ends the search
/// with `certified = false`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_evaluations: Option<u64>,
    pub max_millis: Option<u64>,
}

/// Search progress callbacks: a new incumbent, or a periodic heartbeat.
#[derive(Clone, Copy, Debug)]
pub enum SearchEvent {
    Improved { best_score: u128, evaluations: u64 },
    Tick { evaluations: u64 },
}

pub type ProgressFn<'a> = dyn FnMut(SearchEvent) + 'a;

/// Genetic algorithm parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GAConfig {
    pub population: usize,
    pub generations: usize,
    pub tournament: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub elitism: usize,
    pub seed: u64,
}

impl Default for GAConfig {
    fn default() -> Self {
        GAConfig {
            population: 200,
            generations: 500,
            tournament: 4,
            crossover_rate: 0.9,
            mutation_rate: 0.2,
            elitism: 2,
            seed: 1,
        }
    }
}

impl GAConfig {
    fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::InvalidSearchConfig(
                "population must be at least 2".into(),
            ));
        }
        if self.elitism >= self.population {
            return Err(Error::InvalidSearchConfig(
                "elitism must be below the population size".into(),
            ));
        }
        if self.tournament == 0 {
            return Err(Error::InvalidSearchConfig(
                "tournament size must be positive".into(),
            ));
        }
        for (name, rate) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::InvalidSearchConfig(format!(
                    "{name} must lie in [0, 1], got {rate}"
                )));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Fast mu_E evaluation
// ---------------------------------------------------------------------------

/// Precomputed digit tables for scoring many orderings against one map.
///
/// Scoring walks positions left to right, extending each state's ball prefix
/// and image prefix by one digit and counting balls whose members' image
/// prefixes disagree — exactly the expanding balls at that level.
pub struct Evaluator {
    p: u64,
    n: usize,
    size: usize,
    /// `state_digits[g][m]`: digit of state m at gene g.
    state_digits: Vec<Vec<u32>>,
    /// `image_digits[g][m]`: digit of the image of m at gene g.
    image_digits: Vec<Vec<u32>>,
    /// `weights[n]` = p^(N-n) for levels 1..N-1 (index 0 unused).
    weights: Vec<u128>,
}

/// Reusable buffers for [`Evaluator::mu_e_with`]; one per thread.
pub struct EvalScratch {
    ball: Vec<u64>,
    img: Vec<u64>,
    seen: Vec<bool>,
    dirty: Vec<bool>,
    reference: Vec<u64>,
}

impl Evaluator {
    pub fn new(f: &TransitionMap) -> Result<Self> {
        if f.p >= (1 << 32) {
            return Err(Error::InvalidSearchConfig(format!(
                "search requires p < 2^32, got {}",
                f.p
            )));
        }
        let size = f.images.len();
        let n = f.n;
        let mut state_digits = vec![vec![0u32; size]; n];
        let mut image_digits = vec![vec![0u32; size]; n];
        for m in 0..size {
            let mut rest = m as u64;
            let mut rest_img = f.images[m];
            for g in 0..n {
                state_digits[g][m] = (rest % f.p) as u32;
                image_digits[g][m] = (rest_img % f.p) as u32;
                rest /= f.p;
                rest_img /= f.p;
            }
        }
        let mut weights = vec![0u128; n.max(1)];
        for level in 1..n {
            weights[level] = checked_pow(f.p, n - level)? as u128;
        }
        Ok(Evaluator {
            p: f.p,
            n,
            size,
            state_digits,
            image_digits,
            weights,
        })
    }

    pub fn scratch(&self) -> EvalScratch {
        let balls_max = self.size / self.p.max(2) as usize;
        EvalScratch {
            ball: vec![0u64; self.size],
            img: vec![0u64; self.size],
            seen: vec![false; balls_max.max(1)],
            dirty: vec![false; balls_max.max(1)],
            reference: vec![0u64; balls_max.max(1)],
        }
    }

    /// mu_E of a full ordering, reusing caller-provided buffers.
    pub fn mu_e_with(&self, perm: &[usize], scratch: &mut EvalScratch) -> u128 {
        debug_assert_eq!(perm.len(), self.n);
        scratch.ball[..self.size].fill(0);
        scratch.img[..self.size].fill(0);
        let mut total: u128 = 0;
        let mut weight_radix: u64 = 1;
        for level in 1..self.n {
            let g = perm[level - 1];
            let sd = &self.state_digits[g];
            let id = &self.image_digits[g];
            for m in 0..self.size {
                scratch.ball[m] += sd[m] as u64 * weight_radix;
                scratch.img[m] += id[m] as u64 * weight_radix;
            }
            weight_radix *= self.p;
            let balls = weight_radix as usize;
            scratch.seen[..balls].fill(false);
            scratch.dirty[..balls].fill(false);
            let mut expanding: u64 = 0;
            for m in 0..self.size {
                let b = scratch.ball[m] as usize;
                if !scratch.seen[b] {
                    scratch.seen[b] = true;
                    scratch.reference[b] = scratch.img[m];
                } else if !scratch.dirty[b] && scratch.reference[b] != scratch.img[m] {
                    scratch.dirty[b] = true;
                    expanding += 1;
                }
            }
            total += expanding as u128 * self.weights[level];
        }
        total
    }

    /// Convenience wrapper allocating fresh buffers.
    pub fn mu_e(&self, ordering: &Ordering) -> u128 {
        let mut scratch = self.scratch();
        self.mu_e_with(ordering.as_slice(), &mut scratch)
    }

    pub fn num_genes(&self) -> usize {
        self.n
    }
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration
// ---------------------------------------------------------------------------

/// Scores every ordering. Refuses N beyond [`EXHAUSTIVE_CAP`].
pub fn exhaustive_minimize(f: &TransitionMap) -> Result<SearchResult> {
    exhaustive_minimize_with_cap(f, EXHAUSTIVE_CAP)
}

pub fn exhaustive_minimize_with_cap(f: &TransitionMap, cap: usize) -> Result<SearchResult> {
    if f.n > cap {
        return Err(Error::ExhaustiveCap { n: f.n, cap });
    }
    let start = Instant::now();
    let evaluator = Evaluator::new(f)?;
    let mut scratch = evaluator.scratch();
    let mut best: Option<u128> = None;
    let mut minimizers: Vec<Vec<usize>> = Vec::new();
    let mut evaluations = 0u64;
    let mut perm: Vec<usize> = (0..f.n).collect();
    // Heap's algorithm, iterative.
    let mut stack = vec![0usize; f.n.max(1)];
    let mut consider = |perm: &[usize], evals: &mut u64| {
        *evals += 1;
        let score = evaluator.mu_e_with(perm, &mut scratch);
        match best {
            Some(b) if score > b => {}
            Some(b) if score == b => minimizers.push(perm.to_vec()),
            _ => {
                best = Some(score);
                minimizers.clear();
                minimizers.push(perm.to_vec());
            }
        }
    };
    consider(&perm, &mut evaluations);
    let mut i = 1;
    while i < f.n {
        if stack[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(stack[i], i);
            }
            consider(&perm, &mut evaluations);
            stack[i] += 1;
            i = 1;
        } else {
            stack[i] = 0;
            i += 1;
        }
    }
    minimizers.sort();
    Ok(SearchResult {
        method: SearchMethod::Exhaustive,
        best_score: best.unwrap_or(0),
        minimizers: minimizers
            .into_iter()
            .map(|p| Ordering::new(p).expect("permutations stay valid"))
            .collect(),
        certified: true,
        evaluations,
        wall_time_millis: start.elapsed().as_millis() as u64,
    })
}

// ---------------------------------------------------------------------------
// Branch and bound
// ---------------------------------------------------------------------------

/// Complete search with pruning. The incumbent is seeded by a short genetic
/// run unless one is supplied. Collects every minimizer when it finishes;
/// a budgeted, cut-short run returns `certified = false`.
pub fn branch_and_bound_minimize(
    f: &TransitionMap,
    incumbent: Option<&Ordering>,
) -> Result<SearchResult> {
    branch_and_bound_with(f, incumbent, None, None)
}

pub fn branch_and_bound_with(
    f: &TransitionMap,
    incumbent: Option<&Ordering>,
    budget: Option<SearchBudget>,
    mut progress: Option<&mut ProgressFn<'_>>,
) -> Result<SearchResult> {
    let start = Instant::now();
    let evaluator = Evaluator::new(f)?;
    let n = f.n;

    let seed_ordering: Ordering = match incumbent {
        Some(o) => {
            if o.len() != n {
                return Err(Error::InvalidOrdering(format!(
                    "incumbent has {} positions, network has {n}",
                    o.len()
                )));
            }
            o.clone()
        }
        None if n > 3 => {
            let warmup = GAConfig {
                population: 64,
                generations: 60,
                seed: 0x5eed,
                ..GAConfig::default()
            };
            let ga = ga_minimize(f, &warmup)?;
            ga.representative()
                .cloned()
                .unwrap_or_else(|| Ordering::identity(n))
        }
        None => Ordering::identity(n),
    };
    let mut scratch = evaluator.scratch();
    let incumbent_score = evaluator.mu_e_with(seed_ordering.as_slice(), &mut scratch);

    let mut state = BnbState {
        evaluator: &evaluator,
        levels: (0..=n)
            .map(|_| LevelBufs {
                ball: vec![0u64; f.images.len()],
                img: vec![0u64; f.images.len()],
            })
            .collect(),
        scratch,
        prefix: Vec::with_capacity(n),
        used: vec![false; n],
        best: incumbent_score,
        minimizers: BTreeSet::new(),
        evaluations: 0,
        budget,
        start,
        exhausted: false,
    };
    // The seed is only a bound; if it is optimal the DFS rediscovers it, so
    // the minimizer set stays consistent with full enumeration.
    if n <= 1 {
        state.minimizers.insert((0..n).collect());
        state.best = 0;
    } else {
        state.dfs(0, 0, progress.as_deref_mut());
    }

    let minimizers: Vec<Ordering> = state
        .minimizers
        .iter()
        .cloned()
        .map(|p| Ordering::new(p).expect("permutations stay valid"))
        .collect();
    let certified = !state.exhausted;
    // A budget cut can leave the seed as the best known score with no
    // enumerated witness; fall back to the seed ordering.
    let (best_score, minimizers) = if minimizers.is_empty() {
        (state.best, vec![seed_ordering])
    } else {
        (state.best, minimizers)
    };
    Ok(SearchResult {
        method: SearchMethod::BranchAndBound,
        best_score,
        minimizers,
        certified,
        evaluations: state.evaluations,
        wall_time_millis: start.elapsed().as_millis() as u64,
    })
}

struct LevelBufs {
    ball: Vec<u64>,
    img: Vec<u64>,
}

struct BnbState<'a> {
    evaluator: &'a Evaluator,
    levels: Vec<LevelBufs>,
    scratch: EvalScratch,
    prefix: Vec<usize>,
    used: Vec<bool>,
    best: u128,
    minimizers: BTreeSet<Vec<usize>>,
    evaluations: u64,
    budget: Option<SearchBudget>,
    start: Instant,
    exhausted: bool,
}

impl BnbState<'_> {
    /// Expanding-ball count at level `depth + 1` if `gene` is placed next.
    fn extension_count(&mut self, depth: usize, gene: usize) -> u64 {
        let ev = self.evaluator;
        let radix = ev.weights_radix(depth);
        let balls = (radix * ev.p as u64) as usize;
        let parent = &self.levels[depth];
        let sd = &ev.state_digits[gene];
        let id = &ev.image_digits[gene];
        self.scratch.seen[..balls].fill(false);
        self.scratch.dirty[..balls].fill(false);
        let mut expanding = 0u64;
        for m in 0..ev.size {
            let b = (parent.ball[m] + sd[m] as u64 * radix) as usize;
            let x = parent.img[m] + id[m] as u64 * radix;
            if !self.scratch.seen[b] {
                self.scratch.seen[b] = true;
                self.scratch.reference[b] = x;
            } else if !self.scratch.dirty[b] && self.scratch.reference[b] != x {
                self.scratch.dirty[b] = true;
                expanding += 1;
            }
        }
        expanding
    }

    /// Materializes child prefix arrays at `depth + 1` for a chosen gene.
    fn push_level(&mut self, depth: usize, gene: usize) {
        let ev = self.evaluator;
        let radix = ev.weights_radix(depth);
        let (head, tail) = self.levels.split_at_mut(depth + 1);
        let parent = &head[depth];
        let child = &mut tail[0];
        let sd = &ev.state_digits[gene];
        let id = &ev.image_digits[gene];
        for m in 0..ev.size {
            child.ball[m] = parent.ball[m] + sd[m] as u64 * radix;
            child.img[m] = parent.img[m] + id[m] as u64 * radix;
        }
    }

    fn over_budget(&mut self) -> bool {
        if let Some(b) = self.budget {
            if let Some(max) = b.max_evaluations {
                if self.evaluations >= max {
                    return true;
                }
            }
            if let Some(ms) = b.max_millis {
                if self.evaluations % 256 == 0
                    && self.start.elapsed().as_millis() as u64 >= ms
                {
                    return true;
                }
            }
        }
        false
    }

    fn dfs(&mut self, depth: usize, cost: u128, mut progress: Option<&mut ProgressFn<'_>>) {
        let n = self.evaluator.n;
        // Score each unused gene as the next position.
        let mut children: Vec<(u128, usize)> = Vec::with_capacity(n - depth);
        for gene in 0..n {
            if self.used[gene] {
                continue;
            }
            if self.over_budget() {
                self.exhausted = true;
                return;
            }
            self.evaluations += 1;
            if self.evaluations % 65536 == 0 {
                if let Some(p) = progress.as_deref_mut() {
                    p(SearchEvent::Tick {
                        evaluations: self.evaluations,
                    });
                }
            }
            let e = self.extension_count(depth, gene);
            let child_cost = cost + e as u128 * self.evaluator.weights[depth + 1];
            children.push((child_cost, gene));
        }
        children.sort();
        for (child_cost, gene) in children {
            if child_cost > self.best {
                continue; // equal costs must continue: all optima are wanted
            }
            if depth + 1 == n - 1 {
                // Leaf: the final position is forced by elimination.
                let mut full = self.prefix.clone();
                full.push(gene);
                full.push((0..n).find(|g| !self.used[*g] && *g != gene).unwrap());
                if child_cost < self.best || self.minimizers.is_empty() {
                    if child_cost < self.best {
                        self.minimizers.clear();
                    }
                    self.best = child_cost;
                    self.minimizers.insert(full);
                    if let Some(p) = progress.as_deref_mut() {
                        p(SearchEvent::Improved {
                            best_score: self.best,
                            evaluations: self.evaluations,
                        });
                    }
                } else if child_cost == self.best {
                    self.minimizers.insert(full);
                }
                continue;
            }
            self.push_level(depth, gene);
            self.prefix.push(gene);
            self.used[gene] = true;
            self.dfs(depth + 1, child_cost, progress.as_deref_mut());
            self.used[gene] = false;
            self.prefix.pop();
            if self.exhausted {
                return;
            }
        }
    }
}

impl Evaluator {
    /// p^depth, the radix multiplier for the next digit.
    fn weights_radix(&self, depth: usize) -> u64 {
        let mut r = 1u64;
        for _ in 0..depth {
            r *= self.p;
        }
        r
    }
}

// ---------------------------------------------------------------------------
// Genetic algorithm
// ---------------------------------------------------------------------------

/// Permutation GA. Never certifies; returns every distinct best-scoring
/// ordering it evaluated. Deterministic for a fixed seed and config
/// regardless of thread count: all randomness happens on one thread, worker
/// threads only score.
pub fn ga_minimize(f: &TransitionMap, config: &GAConfig) -> Result<SearchResult> {
    ga_minimize_with(f, config, None)
}

pub fn ga_minimize_with(
    f: &TransitionMap,
    config: &GAConfig,
    mut progress: Option<&mut ProgressFn<'_>>,
) -> Result<SearchResult> {
    config.validate()?;
    let start = Instant::now();
    let evaluator = Evaluator::new(f)?;
    let n = f.n;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);

    let mut population: Vec<Vec<usize>> = (0..config.population)
        .map(|_| random_permutation(&mut rng, n))
        .collect();

    let mut cache: HashMap<Vec<usize>, u128> = HashMap::new();
    let mut evaluations = 0u64;
    let mut best_score: Option<u128> = None;
    let mut best_set: BTreeSet<Vec<usize>> = BTreeSet::new();

    for _generation in 0..=config.generations {
        evaluate_batch(&evaluator, &population, &mut cache, &mut evaluations);
        // Deterministic rank: score, then lexicographic permutation.
        population.sort_by(|a, b| (cache[a], a).cmp(&(cache[b], b)));
        let gen_best = cache[&population[0]];
        let improved = best_score.map(|b| gen_best < b).unwrap_or(true);
        if improved {
            best_score = Some(gen_best);
            best_set.clear();
            if let Some(p) = progress.as_deref_mut() {
                p(SearchEvent::Improved {
                    best_score: gen_best,
                    evaluations,
                });
            }
        }
        if gen_best == best_score.unwrap() {
            for member in &population {
                if cache[member] == gen_best {
                    best_set.insert(member.clone());
                } else {
                    break; // sorted: nothing later can match
                }
            }
        }
        if _generation == config.generations {
            break;
        }

        let mut next: Vec<Vec<usize>> = population[..config.elitism].to_vec();
        while next.len() < config.population {
            let a = tournament(&mut rng, &population, &cache, config.tournament);
            let b = tournament(&mut rng, &population, &cache, config.tournament);
            let mut child = if rng.gen_bool(config.crossover_rate) {
                order_crossover(&mut rng, a, b)
            } else {
                a.clone()
            };
            if n >= 2 && rng.gen_bool(config.mutation_rate) {
                let i = rng.gen_range(0..n);
                let mut j = rng.gen_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                child.swap(i, j);
            }
            next.push(child);
        }
        population = next;
    }

    Ok(SearchResult {
        method: SearchMethod::Genetic,
        best_score: best_score.unwrap_or(0),
        minimizers: best_set
            .into_iter()
            .map(|p| Ordering::new(p).expect("permutations stay valid"))
            .collect(),
        certified: false,
        evaluations,
        wall_time_millis: start.elapsed().as_millis() as u64,
    })
}

fn random_permutation(rng: &mut ChaCha12Rng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

/// Scores any unseen members, in parallel, and returns nothing: results land
/// in the cache. Parallelism cannot affect values, so determinism holds.
fn evaluate_batch(
    evaluator: &Evaluator,
    population: &[Vec<usize>],
    cache: &mut HashMap<Vec<usize>, u128>,
    evaluations: &mut u64,
) {
    let misses: BTreeSet<&Vec<usize>> = population
        .iter()
        .filter(|p| !cache.contains_key(*p))
        .collect();
    let misses: Vec<&Vec<usize>> = misses.into_iter().collect();
    let scored: Vec<(Vec<usize>, u128)> = misses
        .par_iter()
        .map_init(
            || evaluator.scratch(),
            |scratch, perm| ((*perm).clone(), evaluator.mu_e_with(perm, scratch)),
        )
        .collect();
    *evaluations += scored.len() as u64;
    cache.extend(scored);
}

fn tournament<'a>(
    rng: &mut ChaCha12Rng,
    population: &'a [Vec<usize>],
    cache: &HashMap<Vec<usize>, u128>,
    k: usize,
) -> &'a Vec<usize> {
    let mut best: Option<&Vec<usize>> = None;
    for _ in 0..k {
        let candidate = &population[rng.gen_range(0..population.len())];
        best = Some(match best {
            None => candidate,
            Some(cur) if (cache[candidate], candidate) < (cache[cur], cur) => candidate,
            Some(cur) => cur,
        });
    }
    best.expect("tournament size is positive")
}

/// OX1: copy a slice from the first parent, fill the rest in the second
/// parent's cyclic order.
fn order_crossover(rng: &mut ChaCha12Rng, a: &[usize], b: &[usize]) -> Vec<usize> {
    let n = a.len();
    if n < 2 {
        return a.to_vec();
    }
    let mut i = rng.gen_range(0..n);
    let mut j = rng.gen_range(0..n);
    if i > j {
        std::mem::swap(&mut i, &mut j);
    }
    let mut child = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for k in i..=j {
        child[k] = a[k];
        used[a[k]] = true;
    }
    let mut write = (j + 1) % n;
    for step in 0..n {
        let gene = b[(j + 1 + step) % n];
        if used[gene] {
            continue;
        }
        child[write] = gene;
        used[gene] = true;
        write = (write + 1) % n;
    }
    debug_assert!(!child.contains(&usize::MAX));
    child
}

// ---------------------------------------------------------------------------
// Structure of the minimizer set
// ---------------------------------------------------------------------------

/// Position transpositions under which the minimizer set is closed and every
/// member keeps its full score triple. Returned as 0-based position pairs.
pub fn minimizer_symmetry(
    f: &TransitionMap,
    minimizers: &[Ordering],
) -> Result<Vec<(usize, usize)>> {
    if minimizers.is_empty() {
        return Ok(Vec::new());
    }
    let n = minimizers[0].len();
    let set: BTreeSet<&Ordering> = minimizers.iter().collect();
    let mut triples: HashMap<Ordering, (u128, u128, u128)> = HashMap::new();
    let mut triple_of = |f: &TransitionMap, o: &Ordering| -> Result<(u128, u128, u128)> {
        if let Some(t) = triples.get(o) {
            return Ok(*t);
        }
        let s = stability_scores(f, o)?;
        let t = (s.mu_e, s.mu_a, s.mu_i);
        triples.insert(o.clone(), t);
        Ok(t)
    };
    let mut generators = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut qualifies = true;
            for m in minimizers {
                let swapped = m.swap_positions(i, j);
                if !set.contains(&swapped) {
                    qualifies = false;
                    break;
                }
                if triple_of(f, &swapped)? != triple_of(f, m)? {
                    qualifies = false;
                    break;
                }
            }
            if qualifies {
                generators.push((i, j));
            }
        }
    }
    Ok(generators)
}

/// One block of the leveled summary: a run of positions whose genes shuffle
/// only among themselves across the minimizer set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderingBlock {
    pub positions: Vec<usize>,
    /// Canonical gene indices appearing in those positions, sorted.
    pub genes: Vec<usize>,
}

/// Collapses a minimizer set into ordered blocks: positions sharing any gene
/// across minimizers merge into one block.
pub fn partial_order_summary(minimizers: &[Ordering]) -> Vec<OrderingBlock> {
    let Some(first) = minimizers.first() else {
        return Vec::new();
    };
    let n = first.len();
    let mut content: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for m in minimizers {
        for k in 0..n {
            content[k].insert(m.gene_at(k));
        }
    }
    // Union-find over positions, merged when contents intersect.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    for i in 0..n {
        for j in i + 1..n {
            if !content[i].is_disjoint(&content[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut blocks: Vec<OrderingBlock> = Vec::new();
    let mut root_block: HashMap<usize, usize> = HashMap::new();
    for k in 0..n {
        let root = find(&mut parent, k);
        let idx = *root_block.entry(root).or_insert_with(|| {
            blocks.push(OrderingBlock {
                positions: Vec::new(),
                genes: Vec::new(),
            });
            blocks.len() - 1
        });
        blocks[idx].positions.push(k);
        for &g in &content[k] {
            if !blocks[idx].genes.contains(&g) {
                blocks[idx].genes.push(g);
            }
        }
    }
    for block in &mut blocks {
        block.genes.sort_unstable();
    }
    blocks.sort_by_key(|b| b.positions[0]);
    blocks
}
