//! Ant-colony search over a fixed pool of random feasible portfolios.
//!
//! Each ant starts at a random node and, for `lifetime - 1` steps, draws a
//! destination with probability ∝ τ(edge)·η(node); it moves only when the
//! destination has a higher objective. Deposits are applied after all ants of
//! an iteration finish, in ant order, so results do not depend on how the
//! walks were scheduled.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PortfolioCandidate, PortfolioProblem};
use crate::error::{Error, Result};

/// Dense pheromone matrices beyond this many nodes get unreasonably large.
pub const MAX_NODES: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcoParams {
    pub nodes: usize,
    pub ants: usize,
    pub iterations: usize,
    pub lifetime: usize,
    pub evaporation: f64,
    pub deposit: f64,
    pub initial_pheromone: f64,
    /// Added to `max(objective, 0)` so every node stays reachable.
    pub heuristic_floor: f64,
    pub seed: u64,
}

impl Default for AcoParams {
    fn default() -> Self {
        AcoParams {
            nodes: 2000,
            ants: 50,
            iterations: 400,
            lifetime: 20,
            evaporation: 0.1,
            deposit: 1.0,
            initial_pheromone: 1.0,
            heuristic_floor: 1e-6,
            seed: 0,
        }
    }
}

impl AcoParams {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("nodes", self.nodes),
            ("ants", self.ants),
            ("iterations", self.iterations),
            ("lifetime", self.lifetime),
        ];
        for (name, v) in counts {
            if v < 1 {
                return Err(Error::Config(format!("aco.{name}: must be at least 1")));
            }
        }
        if self.nodes > MAX_NODES {
            return Err(Error::Config(format!("aco.nodes: at most {MAX_NODES}")));
        }
        if !(self.evaporation > 0.0 && self.evaporation < 1.0) {
            return Err(Error::Config("aco.evaporation: must lie in (0, 1)".to_string()));
        }
        let positive = [
            ("deposit", self.deposit),
            ("initial_pheromone", self.initial_pheromone),
            ("heuristic_floor", self.heuristic_floor),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("aco.{name}: must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    /// Best objective among nodes any ant has reached so far.
    pub best_objective: f64,
    pub winner_node: usize,
    pub ants_at_winner: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PheromoneStats {
    /// Largest pheromone level observed on any edge during the run.
    pub max_seen: f64,
    /// Smallest pheromone level at the end of the run.
    pub min_final: f64,
}

#[derive(Debug, Clone)]
pub struct AcoOutcome {
    pub best: PortfolioCandidate,
    pub best_node: usize,
    /// The node most ants ended on in the final iteration.
    pub consensus: PortfolioCandidate,
    pub consensus_node: usize,
    /// Best objective in the initial pool.
    pub pool_best: f64,
    pub trace: Vec<TraceRow>,
    pub pheromone: PheromoneStats,
}

struct Walk {
    visited_best: usize,
    terminal: usize,
    /// `(from, to, normalized gain)`
    edges: Vec<(usize, usize, f64)>,
}

/// Pheromone as `scale · stored`, so evaporation is a single multiply.
struct Pheromone {
    n: usize,
    stored: Vec<f64>,
    scale: f64,
}

impl Pheromone {
    fn new(n: usize, tau0: f64) -> Self {
        Pheromone {
            n,
            stored: vec![tau0; n * n],
            scale: 1.0,
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.stored[i * self.n..(i + 1) * self.n]
    }

    fn add(&mut self, from: usize, to: usize, amount: f64) -> f64 {
        let cell = &mut self.stored[from * self.n + to];
        *cell += amount / self.scale;
        *cell * self.scale
    }

    fn evaporate(&mut self, rho: f64) {
        self.scale *= 1.0 - rho;
        if self.scale < 1e-150 {
            let s = self.scale;
            self.stored.iter_mut().for_each(|v| *v *= s);
            self.scale = 1.0;
        }
    }

    fn min(&self) -> f64 {
        self.stored.iter().copied().fold(f64::INFINITY, f64::min) * self.scale
    }
}

fn better(objectives: &[f64], a: usize, b: usize) -> usize {
    // higher objective wins, ties go to the lower index
    if objectives[b] > objectives[a] || (objectives[b] == objectives[a] && b < a) {
        b
    } else {
        a
    }
}

pub fn solve_aco(problem: &PortfolioProblem, params: &AcoParams) -> Result<AcoOutcome> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let nodes: Vec<PortfolioCandidate> = (0..params.nodes)
        .map(|_| problem.random_feasible(&mut rng))
        .collect::<Result<_>>()?;
    let n = nodes.len();
    let objectives: Vec<f64> = nodes.iter().map(|c| c.objective).collect();
    let heuristic: Vec<f64> = objectives
        .iter()
        .map(|o| o.max(0.0) + params.heuristic_floor)
        .collect();
    let (lo, hi) = objectives
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), o| (l.min(*o), h.max(*o)));
    let range = hi - lo;
    let pool_best = (0..n).fold(0, |b, i| better(&objectives, b, i));

    let mut tau = Pheromone::new(n, params.initial_pheromone);
    let mut max_seen = params.initial_pheromone;
    let share = params.deposit / (2.0 * params.ants as f64);
    let mut trace = Vec::with_capacity(params.iterations);
    let mut best_visited: Option<usize> = None;
    let mut consensus = 0;

    for iteration in 1..=params.iterations {
        let seeds: Vec<u64> = (0..params.ants).map(|_| rng.next_u64()).collect();
        let walks: Vec<Walk> = seeds
            .par_iter()
            .map(|&seed| walk(seed, &tau, &objectives, &heuristic, range, params.lifetime))
            .collect();

        let mut counts = vec![0usize; n];
        for w in &walks {
            counts[w.terminal] += 1;
            best_visited = Some(match best_visited {
                Some(b) => better(&objectives, b, w.visited_best),
                None => w.visited_best,
            });
            for &(from, to, gain) in &w.edges {
                max_seen = max_seen.max(tau.add(from, to, share * gain));
            }
        }
        let winner = walks.iter().map(|w| w.terminal).fold(walks[0].terminal, |a, b| {
            if counts[b] > counts[a] {
                b
            } else if counts[b] == counts[a] {
                better(&objectives, a, b)
            } else {
                a
            }
        });
        for w in walks.iter().filter(|w| w.terminal == winner) {
            for &(from, to, _) in &w.edges {
                max_seen = max_seen.max(tau.add(from, to, share));
            }
        }
        tau.evaporate(params.evaporation);
        consensus = winner;
        trace.push(TraceRow {
            iteration,
            best_objective: objectives[best_visited.expect("at least one ant")],
            winner_node: winner,
            ants_at_winner: counts[winner],
        });
    }

    let visited = best_visited.expect("at least one iteration");
    // the pool was fully evaluated while it was generated
    let best_node = better(&objectives, visited, pool_best);
    Ok(AcoOutcome {
        best: nodes[best_node].clone(),
        best_node,
        consensus: nodes[consensus].clone(),
        consensus_node: consensus,
        pool_best: objectives[pool_best],
        trace,
        pheromone: PheromoneStats {
            max_seen,
            min_final: tau.min(),
        },
    })
}

fn walk(
    seed: u64,
    tau: &Pheromone,
    objectives: &[f64],
    heuristic: &[f64],
    range: f64,
    lifetime: usize,
) -> Walk {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = objectives.len();
    let mut current = rng.random_range(0..n);
    let mut visited_best = current;
    let mut edges = Vec::new();
    for _ in 2..=lifetime {
        if n < 2 {
            break;
        }
        let row = tau.row(current);
        let total: f64 = row
            .iter()
            .zip(heuristic)
            .enumerate()
            .filter(|(j, _)| *j != current)
            .map(|(_, (t, h))| t * h)
            .sum();
        let mut target = rng.random::<f64>() * total;
        let mut next = if current == n - 1 { n - 2 } else { n - 1 };
        for (j, (t, h)) in row.iter().zip(heuristic).enumerate() {
            if j == current {
                continue;
            }
            target -= t * h;
            if target < 0.0 {
                next = j;
                break;
            }
        }
        visited_best = better(objectives, visited_best, next);
        if objectives[next] > objectives[current] {
            let gain = if range > 0.0 {
                (objectives[next] - objectives[current]) / range
            } else {
                1.0
            };
            edges.push((current, next, gain));
            current = next;
        }
    }
    Walk {
        visited_best,
        terminal: current,
        edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::TriangularFuzzyNumber;
    use crate::portfolio::{Asset, MuSMode, PortfolioParams};

    fn problem() -> PortfolioProblem {
        let t = |a, b, c| TriangularFuzzyNumber::new(a, b, c).unwrap();
        PortfolioProblem::new(
            vec![
                Asset::new("A", t(0.10, 0.13, 0.22), 0.001),
                Asset::new("B", t(0.05, 0.08, 0.16), 0.002),
                Asset::new("C", t(0.00, 0.04, 0.12), 0.004),
            ],
            PortfolioParams {
                mu_s: MuSMode::Fixed(0.0016),
                ..Default::default()
            },
        )
        .unwrap()
    }

    fn small() -> AcoParams {
        AcoParams {
            nodes: 200,
            ants: 10,
            iterations: 30,
            lifetime: 8,
            seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn params_validation() {
        assert!(AcoParams { ants: 0, ..small() }.validate().is_err());
        assert!(AcoParams { evaporation: 1.0, ..small() }.validate().is_err());
        assert!(AcoParams { nodes: MAX_NODES + 1, ..small() }.validate().is_err());
        assert!(small().validate().is_ok());
    }

    #[test]
    fn trace_shape_and_monotonicity() {
        let out = solve_aco(&problem(), &small()).unwrap();
        assert_eq!(out.trace.len(), 30);
        assert!(out.trace.windows(2).all(|w| w[1].best_objective >= w[0].best_objective));
        assert!(out.trace.iter().all(|r| r.ants_at_winner >= 1 && r.winner_node < 200));
        assert!(out.best.objective >= out.pool_best);
        assert!(out.best.is_feasible());
    }

    #[test]
    fn single_node_pool() {
        let out = solve_aco(&problem(), &AcoParams { nodes: 1, ..small() }).unwrap();
        assert_eq!(out.best_node, 0);
        assert_eq!(out.trace[0].ants_at_winner, 10);
    }

    #[test]
    fn pheromone_stays_bounded() {
        let p = small();
        let out = solve_aco(&problem(), &p).unwrap();
        assert!(out.pheromone.min_final > 0.0);
        assert!(out.pheromone.max_seen <= p.initial_pheromone + p.deposit * p.iterations as f64);
    }
}
