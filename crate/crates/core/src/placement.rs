//! Budgeted maximum coverage over gateway coverage masks.
//!
//! The objective is the number of covered cells `|∪_{g∈S} C_g|`, which is
//! monotone submodular, so greedy selection is within `1 - 1/e` of the
//! optimum. All selection routines break ties by the lowest site id and stop
//! as soon as no remaining gateway adds a cell.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};
use core::fmt;

use crate::cellset::CellSet;
use crate::coverage::{check_masks, fraction, CoverageError, CoverageMask};

/// Largest candidate count [`exhaustive_optimum`] will enumerate.
pub const MAX_EXHAUSTIVE_SITES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub enum PlacementError {
    ZeroBudget,
    TooLarge { sites: usize },
    Coverage(CoverageError),
}

impl fmt::Display for PlacementError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlacementError::ZeroBudget => f.write_str("budget K must be >= 1"),
            PlacementError::TooLarge { sites } => write!(
                f,
                "{sites} candidate sites exceed the exhaustive search limit of {MAX_EXHAUSTIVE_SITES}"
            ),
            PlacementError::Coverage(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for PlacementError {}

impl From<CoverageError> for PlacementError {
    fn from(e: CoverageError) -> Self {
        PlacementError::Coverage(e)
    }
}

/// Ordered gateway picks with per-step gains.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub order: Vec<usize>,
    /// Cells newly covered by each pick.
    pub marginal_cells: Vec<usize>,
    /// Cumulative covered fraction after each pick.
    pub fractions: Vec<f64>,
    pub budget: usize,
}

impl Selection {
    pub fn covered_cells(&self) -> usize {
        self.marginal_cells.iter().sum()
    }
}

/// Work counters for comparing selection strategies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SelectionStats {
    /// Number of marginal-gain evaluations against the current union.
    pub gain_evaluations: usize,
}

/// Masks sorted by site id, after compatibility checks.
fn prepared(
    masks: &[CoverageMask],
    budget: usize,
) -> Result<(Vec<&CoverageMask>, usize), PlacementError> {
    if budget == 0 {
        return Err(PlacementError::ZeroBudget);
    }
    let (_, denominator) = check_masks(masks)?;
    let mut sorted: Vec<&CoverageMask> = masks.iter().collect();
    sorted.sort_by_key(|m| m.site_id());
    Ok((sorted, denominator))
}

struct Builder {
    covered: CellSet,
    denominator: usize,
    sel: Selection,
}

impl Builder {
    fn new(universe: usize, denominator: usize, budget: usize) -> Self {
        Builder {
            covered: CellSet::new(universe),
            denominator,
            sel: Selection {
                order: Vec::new(),
                marginal_cells: Vec::new(),
                fractions: Vec::new(),
                budget,
            },
        }
    }

    fn push(&mut self, m: &CoverageMask, gain: usize) {
        self.covered.union_with(m.cells());
        self.sel.order.push(m.site_id());
        self.sel.marginal_cells.push(gain);
        self.sel
            .fractions
            .push(fraction(self.covered.count(), self.denominator));
    }
}

/// Plain greedy: each round evaluates every remaining gateway.
pub fn greedy_select(masks: &[CoverageMask], budget: usize) -> Result<Selection, PlacementError> {
    greedy_select_instrumented(masks, budget).map(|(s, _)| s)
}

pub fn greedy_select_instrumented(
    masks: &[CoverageMask],
    budget: usize,
) -> Result<(Selection, SelectionStats), PlacementError> {
    let (sorted, denominator) = prepared(masks, budget)?;
    let mut stats = SelectionStats::default();
    let mut b = Builder::new(sorted[0].grid().cell_count(), denominator, budget);
    let mut taken = alloc::vec![false; sorted.len()];
    while b.sel.order.len() < budget {
        let mut best: Option<(usize, usize)> = None;
        for (k, m) in sorted.iter().enumerate() {
            if taken[k] {
                continue;
            }
            stats.gain_evaluations += 1;
            let gain = m.cells().difference_count(&b.covered);
            // strict `>` keeps the lowest id among equal gains
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((k, gain));
            }
        }
        match best {
            Some((k, gain)) if gain > 0 => {
                taken[k] = true;
                b.push(sorted[k], gain);
            }
            _ => break,
        }
    }
    Ok((b.sel, stats))
}

/// Heap entry: upper bound on the gain, with the lowest id winning ties.
#[derive(PartialEq, Eq)]
struct Candidate {
    bound: usize,
    index: Reverse<usize>,
    /// Round at which `bound` was computed.
    round: usize,
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .cmp(&other.bound)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lazy (CELF-style) greedy. Produces exactly the output of
/// [`greedy_select`] while re-evaluating only candidates whose stale bound
/// reaches the top of the heap.
pub fn lazy_greedy_select(
    masks: &[CoverageMask],
    budget: usize,
) -> Result<Selection, PlacementError> {
    lazy_greedy_select_instrumented(masks, budget).map(|(s, _)| s)
}

pub fn lazy_greedy_select_instrumented(
    masks: &[CoverageMask],
    budget: usize,
) -> Result<(Selection, SelectionStats), PlacementError> {
    let (sorted, denominator) = prepared(masks, budget)?;
    let mut stats = SelectionStats::default();
    let mut b = Builder::new(sorted[0].grid().cell_count(), denominator, budget);
    // initial bounds are exact gains against the empty union
    let mut heap: BinaryHeap<Candidate> = sorted
        .iter()
        .enumerate()
        .map(|(k, m)| Candidate {
            bound: m.count(),
            index: Reverse(k),
            round: 0,
        })
        .collect();
    let mut round = 0;
    while b.sel.order.len() < budget {
        let Some(top) = heap.pop() else { break };
        if top.round == round {
            // Every other entry has bound <= top.bound, and equal bounds
            // with lower ids sit above `top`, so this is the greedy winner.
            if top.bound == 0 {
                break;
            }
            b.push(sorted[top.index.0], top.bound);
            round += 1;
        } else {
            stats.gain_evaluations += 1;
            let gain = sorted[top.index.0].cells().difference_count(&b.covered);
            heap.push(Candidate {
                bound: gain,
                index: top.index,
                round,
            });
        }
    }
    Ok((b.sel, stats))
}

/// Cells `g` adds on top of `subset`.
pub fn marginal_gain(
    masks: &[CoverageMask],
    subset: &[usize],
    g: usize,
) -> Result<usize, CoverageError> {
    let union = crate::coverage::union_cells(masks, subset)?;
    let m = masks
        .iter()
        .find(|m| m.site_id() == g)
        .ok_or(CoverageError::UnknownSite { site: g })?;
    Ok(m.cells().difference_count(&union))
}

/// Exact maximizer of covered cells over subsets of size at most `budget`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Optimum {
    /// Site ids, ascending.
    pub subset: Vec<usize>,
    pub cells: usize,
}

/// Enumerates all subsets of size `min(budget, G)` in lexicographic order
/// and keeps the first one with the most covered cells. Coverage is
/// monotone, so this is also optimal over every smaller size.
pub fn exhaustive_optimum(
    masks: &[CoverageMask],
    budget: usize,
) -> Result<Optimum, PlacementError> {
    let (sorted, _) = prepared(masks, budget)?;
    let g = sorted.len();
    if g > MAX_EXHAUSTIVE_SITES {
        return Err(PlacementError::TooLarge { sites: g });
    }
    let k = budget.min(g);
    let universe = sorted[0].grid().cell_count();

    // prefix unions along the current combination avoid recomputing from scratch
    let mut idx: Vec<usize> = (0..k).collect();
    let mut prefix: Vec<CellSet> = Vec::with_capacity(k + 1);
    prefix.push(CellSet::new(universe));
    for &i in &idx {
        let mut next = prefix.last().unwrap().clone();
        next.union_with(sorted[i].cells());
        prefix.push(next);
    }
    let mut best = Optimum {
        subset: idx.iter().map(|&i| sorted[i].site_id()).collect(),
        cells: prefix[k].count(),
    };
    // advance to the next combination in lexicographic order
    while let Some(pos) = (0..k).rev().find(|&p| idx[p] < g - k + p) {
        idx[pos] += 1;
        for p in pos + 1..k {
            idx[p] = idx[p - 1] + 1;
        }
        prefix.truncate(pos + 1);
        for &i in &idx[pos..] {
            let mut next = prefix.last().unwrap().clone();
            next.union_with(sorted[i].cells());
            prefix.push(next);
        }
        let cells = prefix[k].count();
        if cells > best.cells {
            best = Optimum {
                subset: idx.iter().map(|&i| sorted[i].site_id()).collect(),
                cells,
            };
        }
    }
    Ok(best)
}

/// Per-gateway coverage fraction, descending, ties by lowest id.
pub fn standalone_ranking(masks: &[CoverageMask]) -> Result<Vec<(usize, f64)>, PlacementError> {
    let (_, denominator) = check_masks(masks)?;
    let mut counts: Vec<(usize, usize)> = masks.iter().map(|m| (m.site_id(), m.count())).collect();
    counts.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(counts
        .into_iter()
        .map(|(id, c)| (id, fraction(c, denominator)))
        .collect())
}
