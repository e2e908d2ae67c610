//! Compilation of [`Regex`] ASTs into trimmed, total DFAs and the language
//! analyses used for algorithm selection.
//!
//! Construction is Thompson NFA followed by the subset construction. The
//! empty subset is always materialised as the dead state so the transition
//! function is total. No minimisation is performed.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::graph::Label;
use crate::regex::Regex;

pub type Word = Vec<Label>;

/// Default cap for [`Dfa::words_up_to`].
pub const DEFAULT_WORD_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxWordLength {
    /// The language has no words.
    Empty,
    Finite(usize),
    Infinite,
}

impl fmt::Display for MaxWordLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxWordLength::Empty => f.write_str("empty"),
            MaxWordLength::Finite(n) => write!(f, "{n}"),
            MaxWordLength::Infinite => f.write_str("infinite"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LanguageProfile {
    pub is_empty: bool,
    pub is_finite: bool,
    pub max_word_length: MaxWordLength,
    /// Finite and every word has length at most two.
    pub short2: bool,
}

impl LanguageProfile {
    /// Longest word length for finite languages (`0` for the empty language).
    pub fn finite_bound(&self) -> Option<usize> {
        match self.max_word_length {
            MaxWordLength::Empty => Some(0),
            MaxWordLength::Finite(n) => Some(n),
            MaxWordLength::Infinite => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dfa {
    alphabet: Vec<Label>,
    symbol_pos: HashMap<Label, usize>,
    // row-major: state * |alphabet| + symbol
    transitions: Vec<usize>,
    state_count: usize,
    start: usize,
    dead: usize,
    accepting: FixedBitSet,
    useful: FixedBitSet,
}

impl Dfa {
    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn alphabet(&self) -> &[Label] {
        &self.alphabet
    }

    pub fn symbol_index(&self, label: &Label) -> Option<usize> {
        self.symbol_pos.get(label).copied()
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn dead_state(&self) -> usize {
        self.dead
    }

    #[inline]
    pub fn next(&self, state: usize, symbol: usize) -> usize {
        self.transitions[state * self.alphabet.len() + symbol]
    }

    #[inline]
    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting.contains(state)
    }

    /// Reachable from the start state and co-reachable to an accepting state.
    #[inline]
    pub fn is_useful(&self, state: usize) -> bool {
        self.useful.contains(state)
    }

    pub fn accepts_epsilon(&self) -> bool {
        self.is_accepting(self.start)
    }

    /// Runs the word; symbols outside the alphabet reject.
    pub fn accepts<L: AsRef<str>>(&self, word: &[L]) -> bool {
        let mut state = self.start;
        for sym in word {
            match self.symbol_pos.get(&Label::new(sym.as_ref())) {
                Some(&i) => state = self.next(state, i),
                None => return false,
            }
        }
        self.is_accepting(state)
    }

    /// Every state is accepting on every reachable path, i.e. the language
    /// is Σ* over the alphabet.
    pub fn is_universal(&self) -> bool {
        let mut seen = FixedBitSet::with_capacity(self.state_count);
        let mut stack = vec![self.start];
        seen.insert(self.start);
        while let Some(q) = stack.pop() {
            if !self.is_accepting(q) {
                return false;
            }
            for a in 0..self.alphabet.len() {
                let r = self.next(q, a);
                if !seen.put(r) {
                    stack.push(r);
                }
            }
        }
        true
    }

    pub fn profile(&self) -> LanguageProfile {
        if !self.is_useful(self.start) {
            return LanguageProfile {
                is_empty: true,
                is_finite: true,
                max_word_length: MaxWordLength::Empty,
                short2: true,
            };
        }
        // Longest path over the useful subautomaton; a back edge means a
        // useful cycle, hence infinitely many words.
        let k = self.alphabet.len();
        let mut color = vec![0u8; self.state_count];
        let mut longest = vec![0usize; self.state_count];
        let mut stack: Vec<(usize, usize)> = vec![(self.start, 0)];
        color[self.start] = 1;
        while let Some(top) = stack.len().checked_sub(1) {
            let (q, next_sym) = stack[top];
            if next_sym < k {
                let r = self.next(q, next_sym);
                stack[top].1 += 1;
                if !self.is_useful(r) {
                    continue;
                }
                match color[r] {
                    0 => {
                        color[r] = 1;
                        stack.push((r, 0));
                    }
                    1 => {
                        return LanguageProfile {
                            is_empty: false,
                            is_finite: false,
                            max_word_length: MaxWordLength::Infinite,
                            short2: false,
                        }
                    }
                    _ => {}
                }
            } else {
                stack.pop();
                color[q] = 2;
                // Useful states are co-reachable, so every successor chain
                // ends in an accepting state and the longest continuation is
                // the longest accepted suffix.
                let mut best = 0;
                for a in 0..k {
                    let r = self.next(q, a);
                    if self.is_useful(r) {
                        best = best.max(longest[r] + 1);
                    }
                }
                longest[q] = best;
            }
        }
        let max = longest[self.start];
        LanguageProfile {
            is_empty: false,
            is_finite: true,
            max_word_length: MaxWordLength::Finite(max),
            short2: max <= 2,
        }
    }

    /// All accepted words of length at most `n`, failing once more than
    /// `cap` words have been produced.
    pub fn words_up_to(&self, n: usize, cap: usize) -> Result<BTreeSet<Word>> {
        let dist = self.distance_to_accepting();
        let mut out = BTreeSet::new();
        let mut word: Vec<usize> = Vec::new();
        self.collect_words(self.start, n, cap, &dist, &mut word, &mut out)?;
        Ok(out)
    }

    fn collect_words(
        &self,
        state: usize,
        remaining: usize,
        cap: usize,
        dist: &[usize],
        word: &mut Vec<usize>,
        out: &mut BTreeSet<Word>,
    ) -> Result<()> {
        if dist[state] > remaining {
            return Ok(());
        }
        if self.is_accepting(state) {
            if out.len() >= cap {
                return Err(Error::EnumerationOverflow { cap });
            }
            out.insert(word.iter().map(|&a| self.alphabet[a].clone()).collect());
        }
        if remaining == 0 {
            return Ok(());
        }
        for a in 0..self.alphabet.len() {
            let r = self.next(state, a);
            if self.is_useful(r) {
                word.push(a);
                self.collect_words(r, remaining - 1, cap, dist, word, out)?;
                word.pop();
            }
        }
        Ok(())
    }

    /// Shortest distance from each state to an accepting state
    /// (`usize::MAX` when none is reachable).
    pub fn distance_to_accepting(&self) -> Vec<usize> {
        let k = self.alphabet.len();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); self.state_count];
        for q in 0..self.state_count {
            for a in 0..k {
                preds[self.next(q, a)].push(q);
            }
        }
        let mut dist = vec![usize::MAX; self.state_count];
        let mut queue = VecDeque::new();
        for q in self.accepting.ones() {
            dist[q] = 0;
            queue.push_back(q);
        }
        while let Some(q) = queue.pop_front() {
            for &p in &preds[q] {
                if dist[p] == usize::MAX {
                    dist[p] = dist[q] + 1;
                    queue.push_back(p);
                }
            }
        }
        dist
    }
}

/// Thompson NFA: symbol edges carry alphabet positions.
struct Nfa {
    eps: Vec<Vec<usize>>,
    sym: Vec<Vec<(usize, usize)>>,
}

impl Nfa {
    fn add_state(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.sym.push(Vec::new());
        self.eps.len() - 1
    }

    fn build(&mut self, ast: &Regex, symbols: &HashMap<Label, usize>, k: usize) -> (usize, usize) {
        let s = self.add_state();
        let f = self.add_state();
        match ast {
            Regex::Empty => {}
            Regex::Epsilon => self.eps[s].push(f),
            Regex::Symbol(l) => self.sym[s].push((symbols[l], f)),
            Regex::Any => {
                for a in 0..k {
                    self.sym[s].push((a, f));
                }
            }
            Regex::Union(l, r) => {
                let (ls, lf) = self.build(l, symbols, k);
                let (rs, rf) = self.build(r, symbols, k);
                self.eps[s].extend([ls, rs]);
                self.eps[lf].push(f);
                self.eps[rf].push(f);
            }
            Regex::Concat(l, r) => {
                let (ls, lf) = self.build(l, symbols, k);
                let (rs, rf) = self.build(r, symbols, k);
                self.eps[s].push(ls);
                self.eps[lf].push(rs);
                self.eps[rf].push(f);
            }
            Regex::Star(inner) => {
                let (is, ifin) = self.build(inner, symbols, k);
                self.eps[s].extend([is, f]);
                self.eps[ifin].extend([is, f]);
            }
        }
        (s, f)
    }

    fn closure(&self, set: &mut FixedBitSet) {
        let mut stack: Vec<usize> = set.ones().collect();
        while let Some(q) = stack.pop() {
            for &r in &self.eps[q] {
                if !set.put(r) {
                    stack.push(r);
                }
            }
        }
    }
}

/// Compiles `ast` over `alphabet`; every symbol of the AST must belong to it.
pub fn compile(ast: &Regex, alphabet: &BTreeSet<Label>) -> Result<Dfa> {
    for l in ast.symbols() {
        if !alphabet.contains(&l) {
            return Err(Error::AlphabetMismatch(l.to_string()));
        }
    }
    let alphabet: Vec<Label> = alphabet.iter().cloned().collect();
    let symbol_pos: HashMap<Label, usize> = alphabet
        .iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), i))
        .collect();
    let k = alphabet.len();

    let mut nfa = Nfa {
        eps: Vec::new(),
        sym: Vec::new(),
    };
    let (nfa_start, nfa_final) = nfa.build(ast, &symbol_pos, k);
    let n = nfa.eps.len();

    let mut subsets: Vec<FixedBitSet> = Vec::new();
    let mut index: HashMap<FixedBitSet, usize> = HashMap::new();
    let mut transitions: Vec<usize> = Vec::new();

    let dead_set = FixedBitSet::with_capacity(n);
    let mut start_set = FixedBitSet::with_capacity(n);
    start_set.insert(nfa_start);
    nfa.closure(&mut start_set);

    let mut intern = |set: FixedBitSet, subsets: &mut Vec<FixedBitSet>| -> usize {
        if let Some(&i) = index.get(&set) {
            return i;
        }
        let i = subsets.len();
        index.insert(set.clone(), i);
        subsets.push(set);
        i
    };
    let start = intern(start_set, &mut subsets);
    let dead = intern(dead_set, &mut subsets);

    let mut next = 0;
    while next < subsets.len() {
        let current = subsets[next].clone();
        let mut moves: Vec<FixedBitSet> = vec![FixedBitSet::with_capacity(n); k];
        for q in current.ones() {
            for &(a, r) in &nfa.sym[q] {
                moves[a].insert(r);
            }
        }
        for mut target in moves {
            nfa.closure(&mut target);
            let j = intern(target, &mut subsets);
            transitions.push(j);
        }
        next += 1;
    }

    let state_count = subsets.len();
    let mut accepting = FixedBitSet::with_capacity(state_count);
    for (i, set) in subsets.iter().enumerate() {
        if set.contains(nfa_final) {
            accepting.insert(i);
        }
    }

    let mut dfa = Dfa {
        alphabet,
        symbol_pos,
        transitions,
        state_count,
        start,
        dead,
        accepting,
        useful: FixedBitSet::with_capacity(state_count),
    };
    dfa.useful = useful_states(&dfa);
    Ok(dfa)
}

fn useful_states(dfa: &Dfa) -> FixedBitSet {
    let k = dfa.alphabet.len();
    let mut reachable = FixedBitSet::with_capacity(dfa.state_count);
    reachable.insert(dfa.start);
    let mut stack = vec![dfa.start];
    while let Some(q) = stack.pop() {
        for a in 0..k {
            let r = dfa.next(q, a);
            if !reachable.put(r) {
                stack.push(r);
            }
        }
    }
    let dist = dfa.distance_to_accepting();
    let mut useful = FixedBitSet::with_capacity(dfa.state_count);
    for q in reachable.ones() {
        if dist[q] != usize::MAX {
            useful.insert(q);
        }
    }
    useful
}
