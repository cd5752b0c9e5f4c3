//! Seeded random instance generators.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agents::TieBreak;
use crate::matroid::FeasibilitySystem;
use crate::mechanism::Instance;
use crate::scalar::{q, Rational};
use crate::stochastic::{JointDistribution, ScalarDistribution, SignalGrid};
use crate::valuation::{PiecewiseLinear, StepFunction, ValuationFamily, ValuationProfile};

use super::fixtures;
use super::HarnessError;

type R = Rational;

pub const GENERATORS: [&str; 7] = [
    "correlated-private",
    "weighted-sum",
    "additive-interdependent",
    "concave-additive",
    "regular-marginals",
    "random-matroid",
    "gap",
];

/// Redraws allowed per emitted instance.
const MAX_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatroidChoice {
    Uniform1,
    Uniform2,
    Partition,
    Graphic,
    Transversal,
    /// One of the above per instance.
    Mixed,
}

impl fmt::Display for MatroidChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatroidChoice::Uniform1 => "1-uniform",
            MatroidChoice::Uniform2 => "2-uniform",
            MatroidChoice::Partition => "partition",
            MatroidChoice::Graphic => "graphic",
            MatroidChoice::Transversal => "transversal",
            MatroidChoice::Mixed => "mixed",
        })
    }
}

impl FromStr for MatroidChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "1-uniform" | "single-item" => MatroidChoice::Uniform1,
            "2-uniform" => MatroidChoice::Uniform2,
            "partition" => MatroidChoice::Partition,
            "graphic" => MatroidChoice::Graphic,
            "transversal" => MatroidChoice::Transversal,
            "mixed" => MatroidChoice::Mixed,
            other => return Err(format!("unknown matroid `{other}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub agents: usize,
    /// Grid points per agent.
    pub grid: usize,
    pub count: usize,
    pub matroid: MatroidChoice,
    /// Joint table distribution instead of independent marginals.
    pub correlated: bool,
    pub beta: R,
    pub k: u32,
    pub eps: R,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            agents: 3,
            grid: 3,
            count: 1,
            matroid: MatroidChoice::Uniform1,
            correlated: true,
            beta: q(1, 2),
            k: 3,
            eps: q(1, 10),
        }
    }
}

impl GenParams {
    /// Applies one `key=value` setting.
    pub fn set(&mut self, setting: &str) -> Result<(), HarnessError> {
        let bad = |m: String| HarnessError::Generator {
            name: "params".into(),
            message: m,
        };
        let (key, value) = setting
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, got `{setting}`")))?;
        let int = |v: &str| v.parse::<usize>().map_err(|e| bad(format!("{key}: {e}")));
        let num = |v: &str| crate::scalar::parse::<R>(v).map_err(|e| bad(format!("{key}: {e}")));
        match key {
            "agents" | "n" => self.agents = int(value)?,
            "grid" => self.grid = int(value)?,
            "count" => self.count = int(value)?,
            "matroid" => self.matroid = value.parse().map_err(bad)?,
            "correlated" => self.correlated = value.parse().map_err(|e| bad(format!("{key}: {e}")))?,
            "beta" => self.beta = num(value)?,
            "k" => self.k = int(value)? as u32,
            "eps" => self.eps = num(value)?,
            other => return Err(bad(format!("unknown parameter `{other}`"))),
        }
        Ok(())
    }
}

/// `count` instances of the named family, deterministic in `seed`. Draws
/// that fail the family's assumption checks are redrawn.
pub fn generate_instances(name: &str, params: &GenParams, seed: u64) -> Result<Vec<Instance<R>>, HarnessError> {
    let fail = |m: String| HarnessError::Generator {
        name: name.to_string(),
        message: m,
    };
    if !GENERATORS.contains(&name) {
        return Err(HarnessError::UnknownGenerator(name.to_string()));
    }
    if name == "gap" {
        let inst = fixtures::gap(params.k, params.eps.clone()).map_err(|e| fail(e.to_string()))?;
        return Ok(vec![inst]);
    }
    if params.agents == 0 || params.grid == 0 {
        return Err(fail("need at least one agent and one grid point".into()));
    }
    if name == "weighted-sum" && params.beta >= q(1, 1) {
        return Err(fail(format!("beta = {} breaks single crossing; use beta < 1", params.beta)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(params.count);
    let mut rejected = 0usize;
    for c in 0..params.count {
        let mut attempts = 0;
        let inst = loop {
            attempts += 1;
            if attempts > MAX_ATTEMPTS {
                return Err(fail(format!("no acceptable draw in {MAX_ATTEMPTS} attempts")));
            }
            let label = format!("{name}-s{seed}-{c}");
            match draw(name, params, &label, &mut rng) {
                Some(inst) => break inst,
                None => rejected += 1,
            }
        };
        out.push(inst);
    }
    if rejected > 0 {
        log::info!("{name}: redrew {rejected} samples that failed the family's checks");
    }
    Ok(out)
}

fn draw(name: &str, p: &GenParams, label: &str, rng: &mut ChaCha8Rng) -> Option<Instance<R>> {
    let n = p.agents;
    let (n, grid_size) = match name {
        "random-matroid" => (rng.gen_range(2..=n.max(2)), 2),
        _ => (n, p.grid),
    };
    let feas = matroid(p.matroid, n, rng);
    let grids: Vec<Vec<R>> = (0..n).map(|_| grid_points(rng, grid_size)).collect();
    let grid = SignalGrid::new(grids.clone()).ok()?;
    let correlated = p.correlated && !matches!(name, "regular-marginals" | "random-matroid");
    let dist = if correlated {
        table_distribution(&grid, rng)
    } else {
        product_distribution(&grid, rng)
    };
    let family = match name {
        "correlated-private" | "regular-marginals" | "random-matroid" => ValuationFamily::Private,
        "weighted-sum" => ValuationFamily::WeightedSum { beta: p.beta.clone() },
        "additive-interdependent" => ValuationFamily::Additive {
            terms: additive_terms(&grids, rng),
        },
        "concave-additive" => ValuationFamily::ConcaveAdditive {
            terms: additive_terms(&grids, rng),
            outer: (0..n).map(|_| concave_outer(rng)).collect(),
        },
        _ => unreachable!("checked by the caller"),
    };
    let valuation = ValuationProfile::new(n, family).ok()?;
    let inst = Instance::new(label, grid, dist, valuation, feas, TieBreak::ascending(n)).ok()?;
    let ok = match name {
        "regular-marginals" => (0..n).all(|i| {
            let atoms = inst.grid().points(i).iter().cloned().zip(inst.dist().marginal(i).iter().cloned()).collect();
            ScalarDistribution::new(atoms).is_ok_and(|d| d.regularity_report().is_regular)
        }),
        "correlated-private" | "random-matroid" => true,
        _ => {
            let a = inst.assumptions();
            a.a1_holds() && a.a2_holds() && a.a3_holds()
        }
    };
    ok.then_some(inst)
}

/// `size` distinct integers from 1..=8, increasing.
fn grid_points(rng: &mut ChaCha8Rng, size: usize) -> Vec<R> {
    let mut pool: Vec<i64> = (1..=8.max(size as i64)).collect();
    pool.shuffle(rng);
    let mut pts: Vec<i64> = pool.into_iter().take(size).collect();
    pts.sort_unstable();
    pts.into_iter().map(|x| q(x, 1)).collect()
}

/// Integer weights in 0..=4 per profile, normalized; some profiles get no mass.
fn table_distribution(grid: &SignalGrid<R>, rng: &mut ChaCha8Rng) -> JointDistribution<R> {
    let space = grid.space();
    let mut w: Vec<i64> = (0..space.len()).map(|_| rng.gen_range(0..=4)).collect();
    if w.iter().all(|&x| x == 0) {
        let k = rng.gen_range(0..w.len());
        w[k] = 1;
    }
    let total: i64 = w.iter().sum();
    let entries = w
        .into_iter()
        .enumerate()
        .filter(|(_, x)| *x > 0)
        .map(|(idx, x)| (space.decode(idx), q(x, total)))
        .collect();
    JointDistribution::from_table(grid, entries).expect("normalized by construction")
}

fn product_distribution(grid: &SignalGrid<R>, rng: &mut ChaCha8Rng) -> JointDistribution<R> {
    let marginals = (0..grid.agents())
        .map(|i| {
            let w: Vec<i64> = (0..grid.size(i)).map(|_| rng.gen_range(1..=4)).collect();
            let total: i64 = w.iter().sum();
            w.into_iter().map(|x| q(x, total)).collect()
        })
        .collect();
    JointDistribution::from_product(grid, marginals).expect("normalized by construction")
}

/// Own terms rise by 2..=4 per grid step, cross terms by 0..=1, so raising
/// `s_i` always moves `v_i` more than any `v_j`.
fn additive_terms(grids: &[Vec<R>], rng: &mut ChaCha8Rng) -> Vec<Vec<StepFunction<R>>> {
    let n = grids.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let (start, lo, hi) = if i == j { (rng.gen_range(1..=3), 2, 4) } else { (0, 0, 1) };
                    let mut level = start;
                    let steps = grids[j]
                        .iter()
                        .enumerate()
                        .map(|(k, x)| {
                            if k > 0 {
                                level += rng.gen_range(lo..=hi);
                            }
                            (x.clone(), q(level, 1))
                        })
                        .collect();
                    StepFunction { steps }
                })
                .collect()
        })
        .collect()
}

/// Increasing concave piecewise-linear map with slopes drawn from
/// {1, 3/4, 1/2, 1/4}, sorted decreasing.
fn concave_outer(rng: &mut ChaCha8Rng) -> PiecewiseLinear<R> {
    let choices: [R; 4] = [q(1, 1), q(3, 4), q(1, 2), q(1, 4)];
    let mut slopes: Vec<R> = (0..3).map(|_| choices[rng.gen_range(0..4)].clone()).collect();
    slopes.sort_by(|a, b| b.cmp(a));
    let mut points = vec![(q(0, 1), q(0, 1))];
    let mut y: R = q(0, 1);
    for (k, s) in slopes.into_iter().enumerate() {
        y += s * q::<R>(6, 1);
        points.push((q(6 * (k as i64 + 1), 1), y.clone()));
    }
    PiecewiseLinear::new(points).expect("increasing breakpoints")
}

pub fn matroid(choice: MatroidChoice, n: usize, rng: &mut ChaCha8Rng) -> FeasibilitySystem {
    let choice = match choice {
        MatroidChoice::Mixed => *[
            MatroidChoice::Uniform1,
            MatroidChoice::Uniform2,
            MatroidChoice::Partition,
            MatroidChoice::Graphic,
            MatroidChoice::Transversal,
        ]
        .choose(rng)
        .expect("nonempty"),
        c => c,
    };
    match choice {
        MatroidChoice::Uniform1 => FeasibilitySystem::uniform(n, 1),
        MatroidChoice::Uniform2 => FeasibilitySystem::uniform(n, 2.min(n)),
        MatroidChoice::Partition => {
            let parts = n.div_ceil(2).max(1);
            let mut blocks = vec![Vec::new(); parts];
            for a in 0..n {
                blocks[rng.gen_range(0..parts)].push(a);
            }
            blocks.retain(|b| !b.is_empty());
            let caps = blocks.iter().map(|b| rng.gen_range(1..=b.len())).collect();
            FeasibilitySystem::partition(n, blocks, caps)
        }
        MatroidChoice::Graphic => {
            let vertices = n.max(2);
            let edges = (0..n)
                .map(|_| {
                    let u = rng.gen_range(0..vertices);
                    let mut v = rng.gen_range(0..vertices - 1);
                    if v >= u {
                        v += 1;
                    }
                    (u.min(v), u.max(v))
                })
                .collect();
            FeasibilitySystem::graphic(vertices, edges)
        }
        MatroidChoice::Transversal => {
            let slots = n.saturating_sub(1).max(1);
            let adjacency = (0..n)
                .map(|_| {
                    let mut adj: Vec<usize> = (0..slots).filter(|_| rng.gen_bool(0.5)).collect();
                    if adj.is_empty() {
                        adj.push(rng.gen_range(0..slots));
                    }
                    adj
                })
                .collect();
            FeasibilitySystem::transversal(n, adjacency)
        }
        MatroidChoice::Mixed => unreachable!("resolved above"),
    }
    .expect("valid matroid by construction")
}
