//! A single-tape machine with explicit step semantics.
//!
//! Program text, one directive or rule per line, `#` starts a comment:
//!
//! ```text
//! name   halt3          # optional
//! start  s
//! halt   h              # one or more halting states
//! blank  _              # optional, default '_'
//! input  11             # optional initial tape, head on the first cell
//! s 1 -> s 1 R          # state, read, next state, write, move (L, R or N)
//! s _ -> h _ N
//! ```
//!
//! One step applies one rule. A machine has halted within `l` steps when it
//! sits in a halting state after at most `l` steps, or earlier finds no
//! rule for its state and symbol (a stuck machine halts).

use std::collections::{BTreeSet, HashMap};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    Left,
    Right,
    Stay,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Rule {
    next: usize,
    write: char,
    mv: Move,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Machine {
    pub name: String,
    states: Vec<String>,
    start: usize,
    halting: BTreeSet<usize>,
    blank: char,
    input: Vec<char>,
    rules: HashMap<(usize, char), Rule>,
}

fn bad(line: usize, msg: impl Into<String>) -> Error {
    Error::MalformedProgram(format!("line {line}: {}", msg.into()))
}

fn symbol(tok: &str, line: usize) -> Result<char> {
    let mut cs = tok.chars();
    match (cs.next(), cs.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(bad(line, format!("symbol {tok:?} must be a single character"))),
    }
}

impl Machine {
    pub fn parse(text: &str) -> Result<Self> {
        let mut states: Vec<String> = Vec::new();
        let index = |s: &str, states: &mut Vec<String>| -> usize {
            match states.iter().position(|x| x == s) {
                Some(i) => i,
                None => {
                    states.push(s.to_string());
                    states.len() - 1
                }
            }
        };
        let mut name = None;
        let mut start = None;
        let mut halting = BTreeSet::new();
        let mut blank = None;
        let mut input = None;
        let mut rules = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let toks: Vec<&str> = body.split_whitespace().collect();
            match toks[0] {
                "name" if toks.len() == 2 && name.is_none() => name = Some(toks[1].to_string()),
                "start" if toks.len() == 2 && start.is_none() => {
                    start = Some(index(toks[1], &mut states))
                }
                "halt" if toks.len() >= 2 => {
                    for t in &toks[1..] {
                        halting.insert(index(t, &mut states));
                    }
                }
                "blank" if toks.len() == 2 && blank.is_none() => blank = Some(symbol(toks[1], line)?),
                "input" if toks.len() <= 2 && input.is_none() => {
                    input = Some(toks.get(1).map_or(Vec::new(), |s| s.chars().collect()))
                }
                "name" | "start" | "blank" | "input" | "halt" => {
                    return Err(bad(line, format!("bad or repeated '{}' directive", toks[0])))
                }
                _ => {
                    if toks.len() != 6 || toks[2] != "->" {
                        return Err(bad(line, "expected 'state read -> next write move'"));
                    }
                    let from = index(toks[0], &mut states);
                    let read = symbol(toks[1], line)?;
                    let next = index(toks[3], &mut states);
                    let write = symbol(toks[4], line)?;
                    let mv = match toks[5] {
                        "L" => Move::Left,
                        "R" => Move::Right,
                        "N" => Move::Stay,
                        m => return Err(bad(line, format!("move {m:?} is not L, R or N"))),
                    };
                    if rules.insert((from, read), Rule { next, write, mv }).is_some() {
                        return Err(bad(line, format!("second rule for ({}, {read})", toks[0])));
                    }
                }
            }
        }
        let start = start.ok_or_else(|| Error::MalformedProgram("missing 'start' directive".into()))?;
        if halting.is_empty() {
            return Err(Error::MalformedProgram("missing 'halt' directive".into()));
        }
        if let Some((&(s, c), _)) = rules.iter().find(|((s, _), _)| halting.contains(s)) {
            return Err(Error::MalformedProgram(format!(
                "halting state {} has a rule on {c:?}",
                states[s]
            )));
        }
        Ok(Machine {
            name: name.unwrap_or_else(|| "machine".into()),
            states,
            start,
            halting,
            blank: blank.unwrap_or('_'),
            input: input.unwrap_or_default(),
            rules,
        })
    }

    /// The number of steps after which the machine has halted, if that
    /// happens within `budget` steps.
    pub fn halting_step(&self, budget: u64) -> Option<u64> {
        let mut tape = self.input.clone();
        if tape.is_empty() {
            tape.push(self.blank);
        }
        let mut head = 0usize;
        let mut state = self.start;
        let mut step = 0u64;
        loop {
            if self.halting.contains(&state) {
                return Some(step);
            }
            let Some(rule) = self.rules.get(&(state, tape[head])) else {
                return Some(step);
            };
            if step == budget {
                return None;
            }
            step += 1;
            tape[head] = rule.write;
            state = rule.next;
            match rule.mv {
                Move::Left if head == 0 => tape.insert(0, self.blank),
                Move::Left => head -= 1,
                Move::Right => {
                    head += 1;
                    if head == tape.len() {
                        tape.push(self.blank);
                    }
                }
                Move::Stay => {}
            }
        }
    }

    /// `g_A(m, l)`: has the machine halted within `steps` steps.
    pub fn halts_within(&self, steps: u64) -> bool {
        self.halting_step(steps).is_some()
    }
}

impl FromStr for Machine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Machine::parse(s)
    }
}

/// Parses `program` and reports whether it halts within `steps` steps.
pub fn run_machine(program: &str, steps: u64) -> Result<bool> {
    Ok(Machine::parse(program)?.halts_within(steps))
}

/// `h(m, k) = sum_{l=0}^{2^(k+2)} (1 - g_A(m, l))` for `k = 0..=kmax`,
/// with the halting step if it falls inside the largest budget.
pub fn gate_table(m: &Machine, kmax: u32) -> Result<(Vec<u64>, Option<u64>)> {
    if kmax > 40 {
        return Err(Error::resource(format!("kmax = {kmax} needs more than 2^42 steps")));
    }
    let top = 1u64 << (kmax + 2);
    let s = m.halting_step(top);
    // g_A(m, l) = 1 exactly for l >= s, so the sum counts l < s
    let h = (0..=kmax)
        .map(|k| {
            let len = (1u64 << (k + 2)) + 1;
            s.map_or(len, |s| s.min(len))
        })
        .collect();
    Ok((h, s))
}

/// `halt` after exactly `s` steps: moves right over `s - 1` marks, then one
/// more step into the halting state.
pub fn counter_program(s: u64) -> String {
    if s == 0 {
        return "name halt0\nstart h\nhalt h\n".into();
    }
    format!(
        "name halt{s}\nstart s\nhalt h\nblank _\ninput {}\ns 1 -> s 1 R\ns _ -> h _ N\n",
        "1".repeat(s as usize - 1)
    )
}

/// Runs right forever.
pub const LOOP_PROGRAM: &str = "name loop\nstart s\nhalt h\nblank _\ns _ -> s _ R\n";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counter_halts_on_time() {
        let m = Machine::parse(&counter_program(37)).unwrap();
        assert!(!m.halts_within(36));
        assert!(m.halts_within(37));
        assert_eq!(m.halting_step(1000), Some(37));
        let z = Machine::parse(&counter_program(0)).unwrap();
        assert!(z.halts_within(0));
    }

    #[test]
    fn loop_never_halts() {
        assert!(!run_machine(LOOP_PROGRAM, 1_000_000).unwrap());
    }

    #[test]
    fn table_freezes() {
        let m = Machine::parse(&counter_program(37)).unwrap();
        let (h, s) = gate_table(&m, 6).unwrap();
        assert_eq!(s, Some(37));
        assert_eq!(h, vec![5, 9, 17, 33, 37, 37, 37]);
        let l = Machine::parse(LOOP_PROGRAM).unwrap();
        assert_eq!(gate_table(&l, 3).unwrap(), (vec![5, 9, 17, 33], None));
    }

    #[test]
    fn monotone_in_steps() {
        let m = Machine::parse(&counter_program(9)).unwrap();
        let v: Vec<bool> = (0..20).map(|l| m.halts_within(l)).collect();
        assert!(v.windows(2).all(|w| !w[0] || w[1]));
    }

    #[test]
    fn malformed() {
        for bad in [
            "start s\n",
            "halt h\ns _ -> h _ R\n",
            "start s\nhalt h\ns _ -> h _ X\n",
            "start s\nhalt h\ns __ -> h _ R\n",
            "start s\nhalt h\ns _ -> h _ R\ns _ -> s _ R\n",
            "start s\nhalt h\nh _ -> s _ R\n",
        ] {
            assert!(matches!(Machine::parse(bad), Err(Error::MalformedProgram(_))), "{bad}");
        }
    }
}
