//! Knowledge compilation of Boolean formulas into decision-DNNF circuits.
//!
//! The formula is first hash-consed into a simplifying expression arena. The
//! compiler then repeatedly branches on the lowest-index symbol (Shannon
//! expansion), and splits conjunctions whose operands share no symbols into
//! decomposable AND nodes. Both the compile step and restrictions are memoized
//! on canonical expression ids, so equal residual sub-formulas are compiled once.

use std::collections::HashMap;

use crate::ast::{Domain, Formula, SymbolId, SymbolTable};
use crate::error::{Error, Result};
use crate::numeric::KahanSum;

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CircuitNode {
    Const(bool),
    /// `symbol ? high : low`
    Decision {
        symbol: SymbolId,
        low: NodeId,
        high: NodeId,
    },
    /// Conjunction of sub-circuits over pairwise disjoint symbols.
    And(Vec<NodeId>),
}

/// A rooted DAG; children always precede their parents in `nodes`.
#[derive(Debug, Clone)]
pub struct CompiledCircuit {
    nodes: Vec<CircuitNode>,
    root: NodeId,
}

type ExprId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Expr {
    Const(bool),
    Var(u32),
    Not(ExprId),
    And(ExprId, ExprId),
    Or(ExprId, ExprId),
    Iff(ExprId, ExprId),
}

#[derive(Default)]
struct Arena {
    exprs: Vec<Expr>,
    unique: HashMap<Expr, ExprId>,
    support: Vec<Vec<u32>>,
    restrict_memo: HashMap<(ExprId, u32, bool), ExprId>,
}

const FALSE: ExprId = 0;
const TRUE: ExprId = 1;

impl Arena {
    fn new() -> Self {
        let mut a = Arena::default();
        a.intern(Expr::Const(false));
        a.intern(Expr::Const(true));
        a
    }

    fn intern(&mut self, e: Expr) -> ExprId {
        if let Some(&id) = self.unique.get(&e) {
            return id;
        }
        let support = match e {
            Expr::Const(_) => Vec::new(),
            Expr::Var(v) => vec![v],
            Expr::Not(a) => self.support[a as usize].clone(),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Iff(a, b) => {
                merge(&self.support[a as usize], &self.support[b as usize])
            }
        };
        let id = self.exprs.len() as ExprId;
        self.exprs.push(e);
        self.support.push(support);
        self.unique.insert(e, id);
        id
    }

    fn var(&mut self, v: u32) -> ExprId {
        self.intern(Expr::Var(v))
    }

    fn not(&mut self, a: ExprId) -> ExprId {
        match self.exprs[a as usize] {
            Expr::Const(b) => self.intern(Expr::Const(!b)),
            Expr::Not(inner) => inner,
            _ => self.intern(Expr::Not(a)),
        }
    }

    fn and(&mut self, a: ExprId, b: ExprId) -> ExprId {
        match (a, b) {
            (FALSE, _) | (_, FALSE) => FALSE,
            (TRUE, x) | (x, TRUE) => x,
            _ if a == b => a,
            _ if self.is_negation(a, b) => FALSE,
            _ => self.intern(Expr::And(a.min(b), a.max(b))),
        }
    }

    fn or(&mut self, a: ExprId, b: ExprId) -> ExprId {
        match (a, b) {
            (TRUE, _) | (_, TRUE) => TRUE,
            (FALSE, x) | (x, FALSE) => x,
            _ if a == b => a,
            _ if self.is_negation(a, b) => TRUE,
            _ => self.intern(Expr::Or(a.min(b), a.max(b))),
        }
    }

    fn iff(&mut self, a: ExprId, b: ExprId) -> ExprId {
        match (a, b) {
            (TRUE, x) | (x, TRUE) => x,
            (FALSE, x) | (x, FALSE) => self.not(x),
            _ if a == b => TRUE,
            _ if self.is_negation(a, b) => FALSE,
            _ => self.intern(Expr::Iff(a.min(b), a.max(b))),
        }
    }

    fn is_negation(&self, a: ExprId, b: ExprId) -> bool {
        self.exprs[a as usize] == Expr::Not(b) || self.exprs[b as usize] == Expr::Not(a)
    }

    fn lower_formula(&mut self, f: &Formula) -> Result<ExprId> {
        Ok(match f {
            Formula::Atom(id) => self.var(id.0 as u32),
            Formula::True => TRUE,
            Formula::False => FALSE,
            Formula::Not(a) => {
                let a = self.lower_formula(a)?;
                self.not(a)
            }
            Formula::And(a, b) => {
                let (a, b) = (self.lower_formula(a)?, self.lower_formula(b)?);
                self.and(a, b)
            }
            Formula::Or(a, b) => {
                let (a, b) = (self.lower_formula(a)?, self.lower_formula(b)?);
                self.or(a, b)
            }
            Formula::Implies(a, b) => {
                let (a, b) = (self.lower_formula(a)?, self.lower_formula(b)?);
                let na = self.not(a);
                self.or(na, b)
            }
            Formula::Iff(a, b) => {
                let (a, b) = (self.lower_formula(a)?, self.lower_formula(b)?);
                self.iff(a, b)
            }
            Formula::LinCmp(_) => {
                return Err(Error::Unsupported(
                    "linear comparisons cannot be compiled to a Boolean circuit".into(),
                ))
            }
        })
    }

    /// Substitute `var := value` and simplify.
    fn restrict(&mut self, e: ExprId, var: u32, value: bool) -> ExprId {
        if self.support[e as usize].binary_search(&var).is_err() {
            return e;
        }
        if let Some(&r) = self.restrict_memo.get(&(e, var, value)) {
            return r;
        }
        let r = match self.exprs[e as usize] {
            Expr::Const(_) => e,
            Expr::Var(_) => {
                if value {
                    TRUE
                } else {
                    FALSE
                }
            }
            Expr::Not(a) => {
                let a = self.restrict(a, var, value);
                self.not(a)
            }
            Expr::And(a, b) => {
                let (a, b) = (self.restrict(a, var, value), self.restrict(b, var, value));
                self.and(a, b)
            }
            Expr::Or(a, b) => {
                let (a, b) = (self.restrict(a, var, value), self.restrict(b, var, value));
                self.or(a, b)
            }
            Expr::Iff(a, b) => {
                let (a, b) = (self.restrict(a, var, value), self.restrict(b, var, value));
                self.iff(a, b)
            }
        };
        self.restrict_memo.insert((e, var, value), r);
        r
    }

    /// Operands of a top-level conjunction, flattened.
    fn conjuncts(&self, e: ExprId, out: &mut Vec<ExprId>) {
        match self.exprs[e as usize] {
            Expr::And(a, b) => {
                self.conjuncts(a, out);
                self.conjuncts(b, out);
            }
            _ => out.push(e),
        }
    }
}

fn merge(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

struct Compiler {
    arena: Arena,
    nodes: Vec<CircuitNode>,
    unique: HashMap<CircuitNode, NodeId>,
    memo: HashMap<ExprId, NodeId>,
}

impl Compiler {
    fn node(&mut self, n: CircuitNode) -> NodeId {
        if let Some(&id) = self.unique.get(&n) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(n.clone());
        self.unique.insert(n, id);
        id
    }
}

/// Compile a Boolean formula into a deterministic, decomposable circuit.
pub fn compile(f: &Formula, table: &SymbolTable) -> Result<CompiledCircuit> {
    f.validate(table)?;
    for id in f.free_symbols() {
        let sym = table.get(id);
        if sym.domain != Domain::Boolean {
            return Err(Error::Unsupported(format!(
                "circuit compilation needs Boolean symbols; `{}` is {}",
                sym.name, sym.domain
            )));
        }
    }
    let mut arena = Arena::new();
    let root_expr = arena.lower_formula(f)?;
    let mut c = Compiler {
        arena,
        nodes: Vec::new(),
        unique: HashMap::new(),
        memo: HashMap::new(),
    };
    let root = c.compile(root_expr);
    Ok(CompiledCircuit {
        nodes: c.nodes,
        root,
    })
}

impl Compiler {
    fn compile(&mut self, e: ExprId) -> NodeId {
        if let Some(&n) = self.memo.get(&e) {
            return n;
        }
        let n = match self.arena.exprs[e as usize] {
            Expr::Const(b) => self.node(CircuitNode::Const(b)),
            Expr::And(..) => {
                let mut conjuncts = Vec::new();
                self.arena.conjuncts(e, &mut conjuncts);
                let groups = group_disjoint(&self.arena, &conjuncts);
                if groups.len() > 1 {
                    let mut children = Vec::with_capacity(groups.len());
                    for g in groups {
                        let mut acc = TRUE;
                        for p in g {
                            acc = self.arena.and(acc, p);
                        }
                        children.push(self.compile(acc));
                    }
                    self.node(CircuitNode::And(children))
                } else {
                    self.shannon(e)
                }
            }
            _ => self.shannon(e),
        };
        self.memo.insert(e, n);
        n
    }

    fn shannon(&mut self, e: ExprId) -> NodeId {
        let var = self.arena.support[e as usize][0];
        let lo = self.arena.restrict(e, var, false);
        let hi = self.arena.restrict(e, var, true);
        let low = self.compile(lo);
        let high = self.compile(hi);
        if low == high {
            return low;
        }
        self.node(CircuitNode::Decision {
            symbol: SymbolId(var as usize),
            low,
            high,
        })
    }
}

fn group_disjoint(arena: &Arena, conjuncts: &[ExprId]) -> Vec<Vec<ExprId>> {
    let mut groups: Vec<(Vec<u32>, Vec<ExprId>)> = Vec::new();
    for &c in conjuncts {
        let mut support = arena.support[c as usize].clone();
        let mut members = vec![c];
        // absorb every existing group that shares a symbol
        let mut i = 0;
        while i < groups.len() {
            if intersects(&groups[i].0, &support) {
                let (s, m) = groups.swap_remove(i);
                support = merge(&support, &s);
                members.extend(m);
            } else {
                i += 1;
            }
        }
        groups.push((support, members));
    }
    // deterministic order: by smallest symbol
    groups.sort_by_key(|(s, _)| s.first().copied());
    groups
        .into_iter()
        .map(|(_, mut m)| {
            m.sort_unstable();
            m
        })
        .collect()
}

fn intersects(a: &[u32], b: &[u32]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

impl CompiledCircuit {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn nodes(&self) -> &[CircuitNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Weighted model count with independent probabilities indexed by symbol id.
    ///
    /// Symbols skipped by a path contribute `p + (1 - p) = 1`.
    pub fn wmc(&self, probs: &[f64]) -> f64 {
        self.node_values(probs)[self.root]
    }

    pub(crate) fn node_values(&self, probs: &[f64]) -> Vec<f64> {
        let mut val = vec![0.0; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            val[i] = match n {
                CircuitNode::Const(b) => f64::from(u8::from(*b)),
                CircuitNode::Decision { symbol, low, high } => {
                    let p = probs[symbol.0];
                    let mut s = KahanSum::new();
                    s.add((1.0 - p) * val[*low]);
                    s.add(p * val[*high]);
                    s.total()
                }
                CircuitNode::And(children) => children.iter().map(|c| val[*c]).product(),
            };
        }
        val
    }

    /// Symbols each node depends on, sorted.
    pub fn supports(&self) -> Vec<Vec<SymbolId>> {
        let mut out: Vec<Vec<SymbolId>> = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let s = match n {
                CircuitNode::Const(_) => Vec::new(),
                CircuitNode::Decision { symbol, low, high } => {
                    let mut s = vec![*symbol];
                    s.extend(&out[*low]);
                    s.extend(&out[*high]);
                    s.sort_unstable();
                    s.dedup();
                    s
                }
                CircuitNode::And(children) => {
                    let mut s: Vec<SymbolId> = children
                        .iter()
                        .flat_map(|c| out[*c].iter().copied())
                        .collect();
                    s.sort_unstable();
                    s.dedup();
                    s
                }
            };
            out.push(s);
        }
        out
    }

    /// Check decomposability and decision structure; returns a description of the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let supports = self.supports();
        for (i, n) in self.nodes.iter().enumerate() {
            match n {
                CircuitNode::Const(_) => {}
                CircuitNode::Decision { symbol, low, high } => {
                    if *low >= i || *high >= i {
                        return Err(format!("node {i}: child after parent"));
                    }
                    if supports[*low].contains(symbol) || supports[*high].contains(symbol) {
                        return Err(format!(
                            "node {i}: symbol {} tested twice on a path",
                            symbol.0
                        ));
                    }
                    if low == high {
                        return Err(format!("node {i}: redundant decision"));
                    }
                }
                CircuitNode::And(children) => {
                    let mut seen: Vec<SymbolId> = Vec::new();
                    for c in children {
                        if *c >= i {
                            return Err(format!("node {i}: child after parent"));
                        }
                        if supports[*c].iter().any(|s| seen.contains(s)) {
                            return Err(format!("node {i}: conjuncts share a symbol"));
                        }
                        seen.extend(&supports[*c]);
                    }
                }
            }
        }
        Ok(())
    }
}
