#![allow(clippy::needless_range_loop)]
#![allow(dead_code)]

use std::collections::BTreeMap;

use iap_core::domains::{example_elevator, gen_elevator};
use iap_core::mvpop::copy_layout;
use iap_core::{MultiSet, Mvpop, Plan, ProblemInstance};

pub fn elevator(k: usize) -> ProblemInstance {
    gen_elevator(&example_elevator(k).unwrap()).unwrap()
}

pub fn plan(pi: &ProblemInstance, names: &[&str]) -> Plan {
    Plan::new(names.iter().map(|n| pi.action_id(n).unwrap()).collect())
}

pub fn counts(pi: &ProblemInstance, mult: &[(&str, usize)]) -> MultiSet {
    let mut c = vec![0; pi.iad.num_actions()];
    c[pi.goal] = 1;
    for (name, m) in mult {
        c[pi.action_id(name).unwrap()] = *m;
    }
    MultiSet::from_counts(pi, c).unwrap()
}

/// Looks up a copy by label, `"u.1"` or `"g"` for copy 0.
pub fn copy(pi: &ProblemInstance, p: &Mvpop, label: &str) -> usize {
    let (name, index) = match label.rsplit_once('.') {
        Some((n, i)) if i.chars().all(|c| c.is_ascii_digit()) => (n, i.parse().unwrap()),
        _ => (label, 0),
    };
    p.find(pi.action_id(name).unwrap(), index)
        .unwrap_or_else(|| panic!("no copy {label}"))
}

/// Builds an MvPOP from `(row, column, value)` entries, all others zero.
pub fn table(pi: &ProblemInstance, mult: &[(&str, usize)], entries: &[(&str, &str, i64)]) -> Mvpop {
    let ms = counts(pi, mult);
    let copies = copy_layout(&ms);
    let n = copies.len();
    let goal = copies.iter().position(|c| c.action == pi.goal).unwrap();
    let blank = Mvpop::new(copies.clone(), vec![vec![0; n]; n], goal).unwrap();
    let mut m = vec![vec![0; n]; n];
    for (b, a, v) in entries {
        m[copy(pi, &blank, b)][copy(pi, &blank, a)] = *v;
    }
    Mvpop::new(copies, m, goal).unwrap()
}

/// Every copy sequence that linearizes `p`, found by plain backtracking.
pub fn labeled_linearizations(p: &Mvpop) -> Vec<Vec<usize>> {
    fn go(p: &Mvpop, emitted: &mut Vec<i64>, seq: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let n = p.size();
        let g = p.goal();
        if (0..n).all(|a| a == g || emitted[a] == p.entry(g, a)) {
            let mut s = seq.clone();
            s.push(g);
            out.push(s);
            return;
        }
        for c in 0..n {
            if c == g || emitted[c] == p.entry(g, c) {
                continue;
            }
            if emitted[c] == 0 && (0..n).any(|a| emitted[a] < p.entry(c, a)) {
                continue;
            }
            emitted[c] += 1;
            seq.push(c);
            go(p, emitted, seq, out);
            seq.pop();
            emitted[c] -= 1;
        }
    }
    let mut out = Vec::new();
    go(p, &mut vec![0; p.size()], &mut Vec::new(), &mut out);
    out
}

/// For each used pair `(b, a)`, the spread between the most and the fewest
/// occurrences of `a` seen before any occurrence of `b`, over all labeled
/// linearizations.
pub fn observed_spread(p: &Mvpop) -> Vec<Vec<i64>> {
    let n = p.size();
    let mut range: BTreeMap<(usize, usize), (i64, i64)> = BTreeMap::new();
    for seq in labeled_linearizations(p) {
        let mut seen = vec![0i64; n];
        for &b in &seq {
            if b != p.goal() {
                for a in 0..n {
                    if a == p.goal() || p.entry(p.goal(), a) == 0 {
                        continue;
                    }
                    let r = range.entry((b, a)).or_insert((i64::MAX, i64::MIN));
                    r.0 = r.0.min(seen[a]);
                    r.1 = r.1.max(seen[a]);
                }
            }
            seen[b] += 1;
        }
    }
    let mut spread = vec![vec![0; n]; n];
    for ((b, a), (lo, hi)) in range {
        spread[b][a] = hi - lo;
    }
    spread
}
