//! Lempel–Ziv (1976) complexity of a median-binarized sequence.

use super::FeatureError;

pub const MIN_LZ_LEN: usize = 64;

/// Suffix automaton over a small dense alphabet, extended one symbol at a time.
struct SuffixAutomaton {
    alpha: usize,
    next: Vec<u32>,
    link: Vec<u32>,
    len: Vec<u32>,
    last: u32,
}

const NONE: u32 = u32::MAX;

impl SuffixAutomaton {
    fn with_capacity(alpha: usize, n: usize) -> Self {
        let mut sa = Self {
            alpha,
            next: Vec::with_capacity(2 * n * alpha),
            link: Vec::with_capacity(2 * n),
            len: Vec::with_capacity(2 * n),
            last: 0,
        };
        sa.add_state(0, NONE);
        sa
    }

    fn add_state(&mut self, len: u32, link: u32) -> u32 {
        self.next.extend(std::iter::repeat(NONE).take(self.alpha));
        self.link.push(link);
        self.len.push(len);
        (self.len.len() - 1) as u32
    }

    fn go(&self, state: u32, c: u8) -> u32 {
        self.next[state as usize * self.alpha + c as usize]
    }

    fn set(&mut self, state: u32, c: u8, to: u32) {
        self.next[state as usize * self.alpha + c as usize] = to;
    }

    fn extend(&mut self, c: u8) {
        let cur = self.add_state(self.len[self.last as usize] + 1, NONE);
        let mut p = self.last;
        while p != NONE && self.go(p, c) == NONE {
            self.set(p, c, cur);
            p = self.link[p as usize];
        }
        if p == NONE {
            self.link[cur as usize] = 0;
        } else {
            let q = self.go(p, c);
            if self.len[p as usize] + 1 == self.len[q as usize] {
                self.link[cur as usize] = q;
            } else {
                let clone = self.add_state(self.len[p as usize] + 1, self.link[q as usize]);
                let (src, dst) = (q as usize * self.alpha, clone as usize * self.alpha);
                self.next.copy_within(src..src + self.alpha, dst);
                while p != NONE && self.go(p, c) == q {
                    self.set(p, c, clone);
                    p = self.link[p as usize];
                }
                self.link[q as usize] = clone;
                self.link[cur as usize] = clone;
            }
        }
        self.last = cur;
    }
}

/// Number of phrases in the LZ76 exhaustive parse.
///
/// A phrase starting at `l` grows while it still occurs in the text before
/// its last symbol, the Kaspar–Schuster criterion. Occurrence is tested
/// against a suffix automaton of that prefix, which keeps the parse linear.
pub fn lz76_phrase_count(s: &[u8]) -> usize {
    let n = s.len();
    if n < 2 {
        return n;
    }
    let alpha = *s.iter().max().unwrap() as usize + 1;
    let mut sa = SuffixAutomaton::with_capacity(alpha, n);
    sa.extend(s[0]);
    let (mut c, mut l) = (1usize, 1usize);
    while l < n {
        // The automaton holds s[..l + k] whenever s[l + k] is tested.
        let (mut state, mut k) = (0u32, 0usize);
        loop {
            let nx = sa.go(state, s[l + k]);
            if nx == NONE {
                sa.extend(s[l + k]);
                c += 1;
                l += k + 1;
                break;
            }
            state = nx;
            k += 1;
            if l + k == n {
                c += 1;
                l = n;
                break;
            }
            sa.extend(s[l + k - 1]);
            // A split may have moved the current string into a clone.
            while sa.len[sa.link[state as usize] as usize] as usize >= k {
                state = sa.link[state as usize];
            }
        }
    }
    c
}

pub(crate) fn median(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `s_i = 1` where `x_i` exceeds the median.
pub fn binarize_median(x: &[f64]) -> Vec<u8> {
    let med = median(x);
    x.iter().map(|&v| u8::from(v > med)).collect()
}

/// Phrase count normalised by `n / log2 n`.
pub fn lz_complexity(segment: &[f64]) -> Result<f64, FeatureError> {
    if segment.len() < MIN_LZ_LEN {
        return Err(FeatureError::TooShort {
            what: "Lempel-Ziv input",
            needed: MIN_LZ_LEN,
            got: segment.len(),
        });
    }
    Ok(normalized_lz(&binarize_median(segment)))
}

pub fn normalized_lz(bits: &[u8]) -> f64 {
    let n = bits.len() as f64;
    lz76_phrase_count(bits) as f64 * n.log2() / n
}
