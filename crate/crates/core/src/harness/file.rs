//! JSON instance files.
//!
//! ```json
//! {
//!   "name": "tiny-1",
//!   "agents": 2,
//!   "grid": [["1", "2"], ["1", "2"]],
//!   "distribution": {"kind": "product", "marginals": [["1/2", "1/2"], ["1/2", "1/2"]]},
//!   "valuation": {"kind": "private"},
//!   "feasibility": {"kind": "uniform", "k": 1},
//!   "tie_break": [0, 1]
//! }
//! ```
//!
//! Numbers may be JSON numbers or strings such as `"7/10"`. Table
//! distributions list `{"signals": [...], "prob": ...}` atoms by signal value;
//! table valuations list `{"signals": [...], "values": [...]}` rows, one per
//! profile.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::agents::{AgentSet, TieBreak};
use crate::matroid::{FeasibilityKind, FeasibilitySystem};
use crate::mechanism::Instance;
use crate::scalar::Scalar;
use crate::stochastic::{DistributionForm, JointDistribution, SignalGrid};
use crate::valuation::{PiecewiseLinear, StepFunction, ValuationFamily, ValuationProfile};

use super::HarnessError;

/// A number kept as text so rationals survive the round trip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Num(pub String);

impl Num {
    pub fn of<S: Scalar>(x: &S) -> Self {
        Num(x.to_string())
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Num {
    fn serialize<Se: Serializer>(&self, s: Se) -> Result<Se::Ok, Se::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(serde_json::Number),
        }
        Ok(match Raw::deserialize(d)? {
            Raw::Text(s) => Num(s),
            Raw::Number(n) => Num(n.to_string()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub agents: usize,
    pub grid: Vec<Vec<Num>>,
    pub distribution: DistributionBlock,
    pub valuation: ValuationBlock,
    pub feasibility: FeasibilityBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie_break: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionBlock {
    Product { marginals: Vec<Vec<Num>> },
    Table { atoms: Vec<Atom> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub signals: Vec<Num>,
    pub prob: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueRow {
    pub signals: Vec<Num>,
    pub values: Vec<Num>,
}

/// `(point, value)` pairs.
pub type Points = Vec<(Num, Num)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ValuationBlock {
    Private,
    WeightedSum { beta: Num },
    /// `terms[i][j]`: step function of `s_j` in agent `i`'s value.
    Additive { terms: Vec<Vec<Points>> },
    ConcaveAdditive { terms: Vec<Vec<Points>>, outer: Vec<Points> },
    Table { rows: Vec<ValueRow> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FeasibilityBlock {
    Uniform { k: usize },
    Partition { blocks: Vec<Vec<usize>>, capacities: Vec<usize> },
    Transversal { adjacency: Vec<Vec<usize>> },
    Graphic { vertices: usize, edges: Vec<(usize, usize)> },
    Explicit { sets: Vec<Vec<usize>> },
}

struct Ctx<'a> {
    file: &'a str,
}

impl Ctx<'_> {
    fn err(&self, field: impl Into<String>, message: impl fmt::Display) -> HarnessError {
        HarnessError::Field {
            file: self.file.to_string(),
            field: field.into(),
            message: message.to_string(),
        }
    }

    fn num<S: Scalar>(&self, field: impl Fn() -> String, n: &Num) -> Result<S, HarnessError> {
        S::parse_literal(&n.0).map_err(|e| self.err(field(), e))
    }

    fn points<S: Scalar>(&self, field: &str, pts: &Points) -> Result<Vec<(S, S)>, HarnessError> {
        pts.iter()
            .enumerate()
            .map(|(k, (x, y))| {
                Ok((
                    self.num(|| format!("{field}[{k}][0]"), x)?,
                    self.num(|| format!("{field}[{k}][1]"), y)?,
                ))
            })
            .collect()
    }

    fn terms<S: Scalar>(&self, field: &str, terms: &[Vec<Points>]) -> Result<Vec<Vec<StepFunction<S>>>, HarnessError> {
        terms
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, pts)| {
                        Ok(StepFunction {
                            steps: self.points(&format!("{field}[{i}][{j}]"), pts)?,
                        })
                    })
                    .collect()
            })
            .collect()
    }

    fn profile<S: Scalar>(&self, field: &str, grid: &SignalGrid<S>, signals: &[Num]) -> Result<Vec<usize>, HarnessError> {
        if signals.len() != grid.agents() {
            return Err(self.err(field, format!("{} signals for {} agents", signals.len(), grid.agents())));
        }
        signals
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let x: S = self.num(|| format!("{field}[{i}]"), n)?;
                grid.index_of(i, &x)
                    .ok_or_else(|| self.err(format!("{field}[{i}]"), format!("{x} is not a grid point of agent {i}")))
            })
            .collect()
    }
}

impl InstanceFile {
    pub fn parse(file: &str, text: &str) -> Result<Self, HarnessError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| HarnessError::Field {
            file: file.to_string(),
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }

    /// Validates the file into an instance; `file` labels error messages.
    pub fn build<S: Scalar>(&self, file: &str) -> Result<Instance<S>, HarnessError> {
        let cx = Ctx { file };
        let n = self.agents;
        if self.grid.len() != n {
            return Err(cx.err("grid", format!("{} agent grids for {n} agents", self.grid.len())));
        }
        let points = self
            .grid
            .iter()
            .enumerate()
            .map(|(i, g)| {
                g.iter()
                    .enumerate()
                    .map(|(k, x)| cx.num(|| format!("grid[{i}][{k}]"), x))
                    .collect::<Result<Vec<S>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let grid = SignalGrid::new(points).map_err(|e| cx.err("grid", e))?;

        let dist = match &self.distribution {
            DistributionBlock::Product { marginals } => {
                let m = marginals
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        row.iter()
                            .enumerate()
                            .map(|(k, p)| cx.num(|| format!("distribution.marginals[{i}][{k}]"), p))
                            .collect::<Result<Vec<S>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                JointDistribution::from_product(&grid, m).map_err(|e| cx.err("distribution.marginals", e))?
            }
            DistributionBlock::Table { atoms } => {
                let entries = atoms
                    .iter()
                    .enumerate()
                    .map(|(a, atom)| {
                        let field = format!("distribution.atoms[{a}]");
                        Ok((
                            cx.profile(&format!("{field}.signals"), &grid, &atom.signals)?,
                            cx.num(|| format!("{field}.prob"), &atom.prob)?,
                        ))
                    })
                    .collect::<Result<Vec<(Vec<usize>, S)>, HarnessError>>()?;
                JointDistribution::from_table(&grid, entries).map_err(|e| cx.err("distribution.atoms", e))?
            }
        };

        let family = match &self.valuation {
            ValuationBlock::Private => ValuationFamily::Private,
            ValuationBlock::WeightedSum { beta } => ValuationFamily::WeightedSum {
                beta: cx.num(|| "valuation.beta".into(), beta)?,
            },
            ValuationBlock::Additive { terms } => ValuationFamily::Additive {
                terms: cx.terms("valuation.terms", terms)?,
            },
            ValuationBlock::ConcaveAdditive { terms, outer } => ValuationFamily::ConcaveAdditive {
                terms: cx.terms("valuation.terms", terms)?,
                outer: outer
                    .iter()
                    .enumerate()
                    .map(|(i, pts)| {
                        let field = format!("valuation.outer[{i}]");
                        PiecewiseLinear::new(cx.points(&field, pts)?).map_err(|e| cx.err(field, e))
                    })
                    .collect::<Result<_, _>>()?,
            },
            ValuationBlock::Table { rows } => {
                let space = grid.space();
                let mut values: Vec<Option<Vec<S>>> = vec![None; space.len()];
                for (r, row) in rows.iter().enumerate() {
                    let field = format!("valuation.rows[{r}]");
                    let idx = space.index(&cx.profile(&format!("{field}.signals"), &grid, &row.signals)?);
                    if row.values.len() != n {
                        return Err(cx.err(format!("{field}.values"), format!("{} values for {n} agents", row.values.len())));
                    }
                    let vals = row
                        .values
                        .iter()
                        .enumerate()
                        .map(|(i, v)| cx.num(|| format!("{field}.values[{i}]"), v))
                        .collect::<Result<Vec<S>, _>>()?;
                    if values[idx].replace(vals).is_some() {
                        return Err(cx.err(format!("{field}.signals"), "profile listed twice"));
                    }
                }
                if let Some(missing) = values.iter().position(Option::is_none) {
                    let signals = grid.signals_of(&space.decode(missing));
                    let shown: Vec<String> = signals.iter().map(|s| s.to_string()).collect();
                    return Err(cx.err("valuation.rows", format!("no row for profile ({})", shown.join(", "))));
                }
                ValuationFamily::Table {
                    values: values.into_iter().map(Option::unwrap).collect(),
                }
            }
        };
        let valuation = ValuationProfile::new(n, family).map_err(|e| cx.err("valuation", e))?;

        let feas = match &self.feasibility {
            FeasibilityBlock::Uniform { k } => FeasibilitySystem::uniform(n, *k),
            FeasibilityBlock::Partition { blocks, capacities } => {
                FeasibilitySystem::partition(n, blocks.clone(), capacities.clone())
            }
            FeasibilityBlock::Transversal { adjacency } => {
                if adjacency.len() != n {
                    return Err(cx.err("feasibility.adjacency", format!("{} rows for {n} agents", adjacency.len())));
                }
                FeasibilitySystem::transversal(n, adjacency.clone())
            }
            FeasibilityBlock::Graphic { vertices, edges } => {
                if edges.len() != n {
                    return Err(cx.err("feasibility.edges", format!("{} edges for {n} agents", edges.len())));
                }
                FeasibilitySystem::graphic(*vertices, edges.clone())
            }
            FeasibilityBlock::Explicit { sets } => FeasibilitySystem::explicit(
                n,
                sets.iter().map(|s| s.iter().copied().collect()).collect(),
            ),
        }
        .map_err(|e| cx.err("feasibility", e))?;

        let tie = match &self.tie_break {
            None => TieBreak::ascending(n),
            Some(order) => TieBreak::from_order(order.clone())
                .filter(|t| t.len() == n)
                .ok_or_else(|| cx.err("tie_break", format!("must be a permutation of 0..{n}")))?,
        };
        let name = self.name.clone().unwrap_or_else(|| file.to_string());
        Instance::new(name, grid, dist, valuation, feas, tie).map_err(|e| cx.err("valuation", e))
    }

    pub fn from_instance<S: Scalar>(inst: &Instance<S>) -> Self {
        let n = inst.agents();
        let grid = inst.grid();
        let space = inst.space();
        let nums = |v: &[S]| v.iter().map(Num::of).collect::<Vec<_>>();
        let signals = |idx: usize| nums(&grid.signals_of(&space.decode(idx)));
        let distribution = match inst.dist().form() {
            DistributionForm::Product => DistributionBlock::Product {
                marginals: (0..n).map(|i| nums(inst.dist().marginal(i))).collect(),
            },
            DistributionForm::Table => DistributionBlock::Table {
                atoms: inst
                    .dist()
                    .support_indices()
                    .into_iter()
                    .map(|idx| Atom {
                        signals: signals(idx),
                        prob: Num::of(inst.dist().prob_at(idx)),
                    })
                    .collect(),
            },
        };
        let pts = |p: &[(S, S)]| p.iter().map(|(x, y)| (Num::of(x), Num::of(y))).collect::<Points>();
        let terms = |t: &[Vec<StepFunction<S>>]| {
            t.iter()
                .map(|row| row.iter().map(|f| pts(&f.steps)).collect())
                .collect()
        };
        let valuation = match inst.valuation().family() {
            ValuationFamily::Private => ValuationBlock::Private,
            ValuationFamily::WeightedSum { beta } => ValuationBlock::WeightedSum { beta: Num::of(beta) },
            ValuationFamily::Additive { terms: t } => ValuationBlock::Additive { terms: terms(t) },
            ValuationFamily::ConcaveAdditive { terms: t, outer } => ValuationBlock::ConcaveAdditive {
                terms: terms(t),
                outer: outer.iter().map(|h| pts(&h.points)).collect(),
            },
            ValuationFamily::Table { values } => ValuationBlock::Table {
                rows: values
                    .iter()
                    .enumerate()
                    .map(|(idx, v)| ValueRow {
                        signals: signals(idx),
                        values: nums(v),
                    })
                    .collect(),
            },
        };
        let ids = |s: &AgentSet| s.iter().collect::<Vec<_>>();
        let feasibility = match inst.feasibility().kind() {
            FeasibilityKind::Uniform { k } => FeasibilityBlock::Uniform { k: *k },
            FeasibilityKind::Partition { blocks, capacities } => FeasibilityBlock::Partition {
                blocks: blocks.iter().map(ids).collect(),
                capacities: capacities.clone(),
            },
            FeasibilityKind::Transversal { adjacency, .. } => FeasibilityBlock::Transversal {
                adjacency: adjacency.clone(),
            },
            FeasibilityKind::Graphic { vertices, edges } => FeasibilityBlock::Graphic {
                vertices: *vertices,
                edges: edges.clone(),
            },
            FeasibilityKind::Explicit { family } => FeasibilityBlock::Explicit {
                sets: family.iter().map(ids).collect(),
            },
        };
        let order = inst.tie_break().order().to_vec();
        InstanceFile {
            name: Some(inst.name.clone()),
            agents: n,
            grid: (0..n).map(|i| nums(grid.points(i))).collect(),
            distribution,
            valuation,
            feasibility,
            tie_break: (order != (0..n).collect::<Vec<_>>()).then_some(order),
        }
    }
}

pub fn load_instance<S: Scalar>(path: &Path) -> Result<Instance<S>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let label = path.display().to_string();
    InstanceFile::parse(&label, &text)?.build(&label)
}

pub fn save_instance<S: Scalar>(inst: &Instance<S>, path: &Path) -> Result<(), HarnessError> {
    std::fs::write(path, InstanceFile::from_instance(inst).to_json()).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Instances of a directory's `*.json` files, sorted by file name.
pub fn load_dir<S: Scalar>(dir: &Path) -> Result<Vec<Instance<S>>, HarnessError> {
    let entries = std::fs::read_dir(dir).map_err(|source| HarnessError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_instance(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::fixtures::{gap, nonmat1, tiny1};
    use crate::scalar::{q, Rational};

    type R = Rational;

    const TINY: &str = r#"{
        "name": "tiny-1",
        "agents": 2,
        "grid": [[1, 2], ["1", "2"]],
        "distribution": {"kind": "product", "marginals": [["1/2", "1/2"], [0.5, 0.5]]},
        "valuation": {"kind": "private"},
        "feasibility": {"kind": "uniform", "k": 1}
    }"#;

    fn field_of(err: HarnessError) -> String {
        match err {
            HarnessError::Field { field, .. } => field,
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn parses_the_tiny_fixture() {
        let inst: Instance<R> = InstanceFile::parse("t", TINY).unwrap().build("t").unwrap();
        assert_eq!(inst.agents(), 2);
        assert_eq!(inst.dist().prob(&[1, 0]), &q(1, 4));
        assert!(inst.is_private() && inst.feasibility().is_single_item());
    }

    #[test]
    fn round_trips() {
        for inst in [tiny1::<R>(), nonmat1(), gap(3, q(1, 10)).unwrap()] {
            let file = InstanceFile::from_instance(&inst);
            let back: Instance<R> = InstanceFile::parse("x", &file.to_json()).unwrap().build("x").unwrap();
            assert_eq!(InstanceFile::from_instance(&back), file);
            assert_eq!(back.values().row(0), inst.values().row(0));
        }
    }

    #[test]
    fn gap_file_is_a_table() {
        let file = InstanceFile::from_instance(&gap::<R>(3, q(1, 10)).unwrap());
        assert!(matches!(file.distribution, DistributionBlock::Table { ref atoms } if atoms.len() == 4));
        assert!(matches!(file.valuation, ValuationBlock::Table { .. }));
    }

    #[test]
    fn normalization_error_names_the_field() {
        let text = TINY.replace(r#"[0.5, 0.5]"#, r#"[0.5, 0.49]"#);
        let err = InstanceFile::parse("t", &text).unwrap().build::<R>("t").unwrap_err();
        assert_eq!(field_of(err), "distribution.marginals");
    }

    #[test]
    fn off_grid_atom_names_the_field() {
        let text = TINY.replace(
            r#"{"kind": "product", "marginals": [["1/2", "1/2"], [0.5, 0.5]]}"#,
            r#"{"kind": "table", "atoms": [{"signals": [1, 1], "prob": 0.5}, {"signals": [2, 3], "prob": 0.5}]}"#,
        );
        let err = InstanceFile::parse("t", &text).unwrap().build::<R>("t").unwrap_err();
        assert_eq!(field_of(err), "distribution.atoms[1].signals[1]");
    }

    #[test]
    fn schema_errors_carry_a_path() {
        let text = TINY.replace(r#""k": 1"#, r#""k": "one""#);
        assert_eq!(field_of(InstanceFile::parse("t", &text).unwrap_err()), "feasibility");
        let text = TINY.replace(r#""agents": 2"#, r#""agents": -2"#);
        assert_eq!(field_of(InstanceFile::parse("t", &text).unwrap_err()), "agents");
    }

    #[test]
    fn monotonicity_failures_are_rejected() {
        let text = TINY.replace(
            r#"{"kind": "private"}"#,
            r#"{"kind": "table", "rows": [
                {"signals": [1, 1], "values": [1, 1]}, {"signals": [1, 2], "values": [1, 2]},
                {"signals": [2, 1], "values": [1, 1]}, {"signals": [2, 2], "values": [2, 2]}]}"#,
        );
        let err = InstanceFile::parse("t", &text).unwrap().build::<R>("t").unwrap_err();
        assert!(err.to_string().contains("monotonicity"), "{err}");
    }
}
