//! Propositions as canonical truth tables over a fixed, ordered variable list.
//!
//! Row `r` of a table stands for the valuation in which variable `i` is true
//! exactly when bit `i` of `r` is set. Two propositions over the same variable
//! count are equal iff they have the same satisfying rows.

use std::fmt;

use super::CoreError;

/// Largest number of propositional variables a specification may declare.
pub const MAX_VARS: usize = 8;

/// A total assignment of truth values to the first `nvars` variables.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Valuation {
    nvars: u8,
    bits: u8,
}

impl Valuation {
    pub fn new(nvars: usize, bits: u8) -> Valuation {
        assert!(nvars <= MAX_VARS, "at most {MAX_VARS} variables");
        let mask = row_mask(nvars);
        Valuation { nvars: nvars as u8, bits: bits & mask }
    }

    /// The valuation assigning `true` to every variable.
    pub fn all_true(nvars: usize) -> Valuation {
        Valuation::new(nvars, 0xff)
    }

    pub fn from_bools(values: &[bool]) -> Valuation {
        let mut bits = 0u8;
        for (i, &b) in values.iter().enumerate() {
            if b {
                bits |= 1 << i;
            }
        }
        Valuation::new(values.len(), bits)
    }

    /// Every valuation over `nvars` variables, in row order.
    pub fn all(nvars: usize) -> impl Iterator<Item = Valuation> {
        assert!(nvars <= MAX_VARS, "at most {MAX_VARS} variables");
        (0..(1usize << nvars)).map(move |r| Valuation { nvars: nvars as u8, bits: r as u8 })
    }

    pub fn nvars(&self) -> usize {
        self.nvars as usize
    }

    pub fn row(&self) -> usize {
        self.bits as usize
    }

    pub fn get(&self, var: usize) -> bool {
        assert!(var < self.nvars(), "variable index out of range");
        self.bits & (1 << var) != 0
    }

    pub fn with(&self, var: usize, value: bool) -> Valuation {
        assert!(var < self.nvars(), "variable index out of range");
        let bits = if value { self.bits | (1 << var) } else { self.bits & !(1 << var) };
        Valuation { nvars: self.nvars, bits }
    }
}

fn row_mask(nvars: usize) -> u8 {
    if nvars >= 8 {
        0xff
    } else {
        ((1u16 << nvars) - 1) as u8
    }
}

/// A proposition, stored as the set of rows of its truth table that satisfy it.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prop {
    nvars: u8,
    rows: [u64; 4],
}

impl Prop {
    fn full_rows(nvars: usize) -> [u64; 4] {
        let n = 1usize << nvars;
        let mut rows = [0u64; 4];
        for (w, word) in rows.iter_mut().enumerate() {
            let lo = w * 64;
            if n >= lo + 64 {
                *word = u64::MAX;
            } else if n > lo {
                *word = (1u64 << (n - lo)) - 1;
            }
        }
        rows
    }

    pub fn truth(nvars: usize) -> Prop {
        assert!(nvars <= MAX_VARS, "at most {MAX_VARS} variables");
        Prop { nvars: nvars as u8, rows: Prop::full_rows(nvars) }
    }

    pub fn falsity(nvars: usize) -> Prop {
        assert!(nvars <= MAX_VARS, "at most {MAX_VARS} variables");
        Prop { nvars: nvars as u8, rows: [0; 4] }
    }

    pub fn constant(nvars: usize, value: bool) -> Prop {
        if value {
            Prop::truth(nvars)
        } else {
            Prop::falsity(nvars)
        }
    }

    /// The proposition that holds exactly when variable `var` is true.
    pub fn var(nvars: usize, var: usize) -> Prop {
        assert!(var < nvars, "variable index out of range");
        Prop::from_fn(nvars, |v| v.get(var))
    }

    pub fn from_fn(nvars: usize, mut f: impl FnMut(Valuation) -> bool) -> Prop {
        let mut p = Prop::falsity(nvars);
        for v in Valuation::all(nvars) {
            if f(v) {
                p.set_row(v.row());
            }
        }
        p
    }

    /// Builds a proposition from a raw row bitset; bits beyond the table are ignored.
    pub fn from_rows(nvars: usize, rows: [u64; 4]) -> Prop {
        let full = Prop::full_rows(nvars);
        let mut masked = [0u64; 4];
        for i in 0..4 {
            masked[i] = rows[i] & full[i];
        }
        Prop { nvars: nvars as u8, rows: masked }
    }

    fn set_row(&mut self, r: usize) {
        self.rows[r / 64] |= 1u64 << (r % 64);
    }

    pub fn nvars(&self) -> usize {
        self.nvars as usize
    }

    pub fn rows(&self) -> [u64; 4] {
        self.rows
    }

    pub fn holds(&self, v: Valuation) -> bool {
        debug_assert_eq!(self.nvars, v.nvars, "variable-list mismatch");
        let r = v.row();
        self.rows[r / 64] & (1u64 << (r % 64)) != 0
    }

    pub fn not(&self) -> Prop {
        let full = Prop::full_rows(self.nvars());
        let mut rows = [0u64; 4];
        for i in 0..4 {
            rows[i] = !self.rows[i] & full[i];
        }
        Prop { nvars: self.nvars, rows }
    }

    pub fn and(&self, other: &Prop) -> Prop {
        assert_eq!(self.nvars, other.nvars, "variable-list mismatch");
        let mut rows = [0u64; 4];
        for i in 0..4 {
            rows[i] = self.rows[i] & other.rows[i];
        }
        Prop { nvars: self.nvars, rows }
    }

    pub fn or(&self, other: &Prop) -> Prop {
        assert_eq!(self.nvars, other.nvars, "variable-list mismatch");
        let mut rows = [0u64; 4];
        for i in 0..4 {
            rows[i] = self.rows[i] | other.rows[i];
        }
        Prop { nvars: self.nvars, rows }
    }

    pub fn is_false(&self) -> bool {
        self.rows == [0; 4]
    }

    pub fn is_true(&self) -> bool {
        self.rows == Prop::full_rows(self.nvars())
    }

    pub fn is_satisfiable(&self) -> bool {
        !self.is_false()
    }

    /// Every valuation satisfying `self` also satisfies `other`.
    pub fn implies(&self, other: &Prop) -> bool {
        self.and(&other.not()).is_false()
    }

    pub fn satisfying(&self) -> impl Iterator<Item = Valuation> + '_ {
        Valuation::all(self.nvars()).filter(move |v| self.holds(*v))
    }

    pub fn count(&self) -> usize {
        self.rows.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Renders the proposition as a small disjunction of conjunctions of literals.
    pub fn to_formula(&self, names: &[impl AsRef<str>]) -> String {
        assert_eq!(names.len(), self.nvars(), "variable-list mismatch");
        if self.is_true() {
            return "true".to_string();
        }
        if self.is_false() {
            return "false".to_string();
        }
        let cubes = self.cover();
        let render_cube = |c: &Cube, parenthesize: bool| {
            let lits: Vec<String> = (0..self.nvars())
                .filter(|i| c.care & (1 << i) != 0)
                .map(|i| {
                    let n = names[i].as_ref();
                    if c.value & (1 << i) != 0 {
                        n.to_string()
                    } else {
                        format!("!{n}")
                    }
                })
                .collect();
            if lits.len() > 1 && parenthesize {
                format!("({})", lits.join(" & "))
            } else {
                lits.join(" & ")
            }
        };
        if cubes.len() == 1 {
            return render_cube(&cubes[0], false);
        }
        cubes.iter().map(|c| render_cube(c, true)).collect::<Vec<_>>().join(" | ")
    }

    /// Greedy cover of the satisfying rows by prime implicants.
    fn cover(&self) -> Vec<Cube> {
        let n = self.nvars();
        let mut primes: Vec<Cube> = Vec::new();
        // Enumerate cubes from largest (fewest cared variables) to smallest.
        let mut cubes: Vec<Cube> = Vec::new();
        for care in 0..(1u16 << n) {
            let care = care as u8;
            let mut value = care;
            loop {
                cubes.push(Cube { care, value });
                if value == 0 {
                    break;
                }
                value = (value - 1) & care;
            }
        }
        cubes.sort_by_key(|c| c.care.count_ones());
        for c in cubes {
            if !self.contains_cube(&c, n) {
                continue;
            }
            if primes.iter().any(|p| p.covers(&c)) {
                continue;
            }
            primes.push(c);
        }
        let mut remaining = *self;
        let mut chosen = Vec::new();
        while !remaining.is_false() {
            let best = primes
                .iter()
                .max_by_key(|c| c.as_prop(n).and(&remaining).count())
                .copied()
                .expect("primes cover every satisfying row");
            remaining = remaining.and(&best.as_prop(n).not());
            chosen.push(best);
        }
        chosen.sort();
        chosen
    }

    fn contains_cube(&self, c: &Cube, n: usize) -> bool {
        c.as_prop(n).implies(self)
    }

    pub(crate) fn check_arity(&self, nvars: usize) -> Result<(), CoreError> {
        if self.nvars() == nvars {
            Ok(())
        } else {
            Err(CoreError::VariableMismatch { expected: nvars, found: self.nvars() })
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
struct Cube {
    care: u8,
    value: u8,
}

impl Cube {
    fn covers(&self, other: &Cube) -> bool {
        self.care & other.care == self.care && (other.value & self.care) == self.value
    }

    fn as_prop(&self, n: usize) -> Prop {
        Prop::from_fn(n, |v| (v.row() as u8) & self.care == self.value)
    }
}

impl fmt::Debug for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.nvars()).map(|i| format!("p{i}")).collect();
        write!(f, "Prop({})", self.to_formula(&names))
    }
}

/// Evaluates `p` under `v`, rejecting valuations over a different variable list.
pub fn prop_eval(p: &Prop, v: &Valuation) -> Result<bool, CoreError> {
    if p.nvars() != v.nvars() {
        return Err(CoreError::VariableMismatch { expected: p.nvars(), found: v.nvars() });
    }
    Ok(p.holds(*v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_and_eval() {
        for v in Valuation::all(2) {
            assert!(prop_eval(&Prop::truth(2), &v).unwrap());
            let p = Prop::var(2, 0);
            assert!(!prop_eval(&p.and(&p.not()), &v).unwrap());
        }
        let p_or_q = Prop::var(2, 0).or(&Prop::var(2, 1));
        let v = Valuation::from_bools(&[false, true]);
        assert!(prop_eval(&p_or_q, &v).unwrap());
    }

    #[test]
    fn eval_rejects_mismatch() {
        let v = Valuation::all_true(3);
        assert!(matches!(
            prop_eval(&Prop::truth(2), &v),
            Err(CoreError::VariableMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn eight_variables_use_every_word() {
        let p = Prop::var(8, 7);
        assert_eq!(p.count(), 128);
        assert!(p.not().and(&p).is_false());
        assert!(p.or(&p.not()).is_true());
        assert!(p.holds(Valuation::all_true(8)));
    }

    #[test]
    fn formula_rendering() {
        let names = ["P", "Q"];
        let p = Prop::var(2, 0);
        let q = Prop::var(2, 1);
        assert_eq!(p.to_formula(&names), "P");
        assert_eq!(p.not().to_formula(&names), "!P");
        assert_eq!(p.and(&q).to_formula(&names), "P & Q");
        assert_eq!(p.or(&q).to_formula(&names), "P | Q");
        assert_eq!(p.not().or(&q).to_formula(&names), "!P | Q");
    }
}
