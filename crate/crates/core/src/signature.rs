//! Truncated signatures of time-augmented piecewise-linear paths.
//!
//! # Coordinate order
//!
//! Coefficients are stored flat over the alphabet `{0, ..., d}` (letter 0 is
//! the time channel), grouped by word length, and within one length in
//! lexicographic order of the base-`(d+1)` digit string. The flat index of a
//! length-`k` word `w` is
//!
//! ```text
//! ((d+1)^k - 1) / d  +  sum_j w_j (d+1)^(k-1-j)
//! ```
//!
//! so for `d = 1, N = 2` the order is `[(), (0), (1), (0,0), (0,1), (1,0), (1,1)]`.
//! This order is part of the serialized feature format (version 1) and must not
//! change.
//!
//! A pruned signature keeps the empty word and every word whose last letter
//! is not 0, in the same relative order, giving `(d+1)^N` coordinates.
//!
//! Signatures are computed exactly for the linear interpolant of the samples:
//! each segment contributes the tensor exponential of its increment and the
//! segments are folded together with Chen's identity.

use std::fmt;

use crate::error::{Error, Result};
use crate::path::{DiscretePath, Window};

/// Ordered multi-index over `{0, ..., d}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word([self.0.as_slice(), other.0.as_slice()].concat())
    }
}

impl From<&[usize]> for Word {
    fn from(letters: &[usize]) -> Self {
        Word(letters.to_vec())
    }
}

impl<const K: usize> From<[usize; K]> for Word {
    fn from(letters: [usize; K]) -> Self {
        Word(letters.to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

fn pow(base: usize, exp: usize) -> usize {
    base.pow(exp as u32)
}

/// Flat offset of the first length-`k` word over an alphabet of `alphabet` letters.
fn level_offset(alphabet: usize, k: usize) -> usize {
    (0..k).map(|j| pow(alphabet, j)).sum()
}

/// Length of a full truncated signature, `((d+1)^(N+1) - 1) / d`.
pub fn signature_len(d: usize, depth: usize) -> usize {
    level_offset(d + 1, depth + 1)
}

/// Length of a pruned signature, `(d+1)^N`.
pub fn pruned_len(d: usize, depth: usize) -> usize {
    pow(d + 1, depth)
}

/// Dimension of the contextual feature vector `[X_start, pruned signature]`.
pub fn feature_dim(d: usize, depth: usize) -> usize {
    d + pruned_len(d, depth)
}

/// Flat index of `word` in the canonical order for base channel count `d`.
pub fn word_index(d: usize, word: &[usize]) -> usize {
    let alphabet = d + 1;
    level_offset(alphabet, word.len()) + word.iter().fold(0, |acc, &l| acc * alphabet + l)
}

pub fn canonical_words(d: usize, depth: usize) -> Vec<Word> {
    let alphabet = d + 1;
    let mut words = vec![Word::empty()];
    let mut level = vec![Word::empty()];
    for _ in 0..depth {
        level = level
            .iter()
            .flat_map(|w| (0..alphabet).map(move |l| w.concat(&Word(vec![l]))))
            .collect();
        words.extend(level.iter().cloned());
    }
    words
}

/// Words kept by [`prune`], in storage order.
pub fn pruned_words(d: usize, depth: usize) -> Vec<Word> {
    canonical_words(d, depth)
        .into_iter()
        .filter(|w| w.last() != Some(0))
        .collect()
}

/// Every order-preserving interleaving of `u` and `v`, with multiplicity.
pub fn shuffle(u: &Word, v: &Word) -> Vec<Word> {
    fn go(u: &[usize], v: &[usize], prefix: &mut Vec<usize>, out: &mut Vec<Word>) {
        if u.is_empty() || v.is_empty() {
            let mut w = prefix.clone();
            w.extend_from_slice(u);
            w.extend_from_slice(v);
            out.push(Word(w));
            return;
        }
        prefix.push(u[0]);
        go(&u[1..], v, prefix, out);
        prefix.pop();
        prefix.push(v[0]);
        go(u, &v[1..], prefix, out);
        prefix.pop();
    }
    let mut out = Vec::new();
    go(
        &u.0,
        &v.0,
        &mut Vec::with_capacity(u.len() + v.len()),
        &mut out,
    );
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignatureVector {
    d: usize,
    depth: usize,
    coeffs: Vec<f64>,
}

impl SignatureVector {
    pub fn identity(d: usize, depth: usize) -> Self {
        let mut coeffs = vec![0.0; signature_len(d, depth)];
        coeffs[0] = 1.0;
        Self { d, depth, coeffs }
    }

    pub fn from_coeffs(d: usize, depth: usize, coeffs: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::shape("signatures need d >= 1"));
        }
        if coeffs.len() != signature_len(d, depth) {
            return Err(Error::shape(format!(
                "{} coefficients for d={d}, N={depth} (expected {})",
                coeffs.len(),
                signature_len(d, depth)
            )));
        }
        Ok(Self { d, depth, coeffs })
    }

    pub fn base_channels(&self) -> usize {
        self.d
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coefficient of `word`; `None` if the word is longer than the depth or
    /// uses a letter outside `{0, ..., d}`.
    pub fn get(&self, word: &[usize]) -> Option<f64> {
        if word.len() > self.depth || word.iter().any(|&l| l > self.d) {
            return None;
        }
        Some(self.coeffs[word_index(self.d, word)])
    }

    /// Coefficients of words of length `k`.
    pub fn level(&self, k: usize) -> &[f64] {
        let a = self.d + 1;
        let off = level_offset(a, k);
        &self.coeffs[off..off + pow(a, k)]
    }
}

/// Tensor exponential of one linear segment: the coefficient of `w` is
/// `prod_j increment[w_j] / |w|!`.
pub fn segment_signature(increment: &[f64], depth: usize) -> Result<SignatureVector> {
    if increment.len() < 2 {
        return Err(Error::shape(
            "increment must cover time plus at least one channel",
        ));
    }
    let d = increment.len() - 1;
    let mut coeffs = vec![0.0; signature_len(d, depth)];
    write_segment(increment, depth, &mut coeffs);
    Ok(SignatureVector { d, depth, coeffs })
}

fn write_segment(increment: &[f64], depth: usize, out: &mut [f64]) {
    let a = increment.len();
    out[0] = 1.0;
    for k in 1..=depth {
        let prev = level_offset(a, k - 1);
        let cur = level_offset(a, k);
        let inv_k = 1.0 / k as f64;
        for i in 0..pow(a, k - 1) {
            let base = out[prev + i] * inv_k;
            for (c, dx) in increment.iter().enumerate() {
                out[cur + i * a + c] = base * dx;
            }
        }
    }
}

fn concat_into(a: &[f64], b: &[f64], out: &mut [f64], alphabet: usize, depth: usize) {
    out[0] = a[0] * b[0];
    for k in 1..=depth {
        let ok = level_offset(alphabet, k);
        let size_k = pow(alphabet, k);
        out[ok..ok + size_k].fill(0.0);
        for j in 0..=k {
            let oa = level_offset(alphabet, j);
            let ob = level_offset(alphabet, k - j);
            let nb = pow(alphabet, k - j);
            let bs = &b[ob..ob + nb];
            for ia in 0..pow(alphabet, j) {
                let av = a[oa + ia];
                if av == 0.0 {
                    continue;
                }
                let dst = &mut out[ok + ia * nb..ok + (ia + 1) * nb];
                for (o, bv) in dst.iter_mut().zip(bs) {
                    *o += av * bv;
                }
            }
        }
    }
}

/// Signature of the concatenation of the two underlying paths, truncated at
/// their shared depth.
pub fn chen_concat(a: &SignatureVector, b: &SignatureVector) -> Result<SignatureVector> {
    if a.d != b.d || a.depth != b.depth {
        return Err(Error::shape(format!(
            "cannot concatenate (d={}, N={}) with (d={}, N={})",
            a.d, a.depth, b.d, b.depth
        )));
    }
    let mut coeffs = vec![0.0; a.coeffs.len()];
    concat_into(&a.coeffs, &b.coeffs, &mut coeffs, a.d + 1, a.depth);
    Ok(SignatureVector {
        d: a.d,
        depth: a.depth,
        coeffs,
    })
}

/// Depth-`depth` signature of a time-augmented path (channel 0 must equal the
/// timestamps).
pub fn signature(path: &DiscretePath, depth: usize) -> Result<SignatureVector> {
    if path.channels() < 2 {
        return Err(Error::NotAugmented);
    }
    if path.len() < 2 {
        return Err(Error::InvalidPath(
            "a signature needs at least two samples".into(),
        ));
    }
    if path
        .times()
        .iter()
        .zip(path.rows())
        .any(|(t, r)| r[0] != *t)
    {
        return Err(Error::NotAugmented);
    }
    let alphabet = path.channels();
    let d = alphabet - 1;
    let len = signature_len(d, depth);
    let mut acc = vec![0.0; len];
    acc[0] = 1.0;
    let mut seg = vec![0.0; len];
    let mut out = vec![0.0; len];
    let mut inc = vec![0.0; alphabet];
    let mut prev = path.row(0);
    for row in path.rows().skip(1) {
        for ((dx, x1), x0) in inc.iter_mut().zip(row).zip(prev) {
            *dx = x1 - x0;
        }
        write_segment(&inc, depth, &mut seg);
        concat_into(&acc, &seg, &mut out, alphabet, depth);
        std::mem::swap(&mut acc, &mut out);
        prev = row;
    }
    Ok(SignatureVector {
        d,
        depth,
        coeffs: acc,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrunedSignature {
    d: usize,
    depth: usize,
    coeffs: Vec<f64>,
}

impl PrunedSignature {
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn base_channels(&self) -> usize {
        self.d
    }

    pub fn depth(&self) -> usize {
        self.depth
    }
}

/// Drops every coordinate whose word ends in the time letter 0. Those are
/// linear combinations of the kept ones (shuffle with the word `(0)`, whose
/// coefficient is the window length), so the kept set spans the same features.
pub fn prune(sig: &SignatureVector) -> PrunedSignature {
    let a = sig.d + 1;
    let mut coeffs = Vec::with_capacity(pruned_len(sig.d, sig.depth));
    coeffs.push(sig.coeffs[0]);
    for k in 1..=sig.depth {
        let level = sig.level(k);
        // within a level, the last letter is the index modulo the alphabet size
        coeffs.extend(
            level
                .iter()
                .enumerate()
                .filter(|(i, _)| i % a != 0)
                .map(|(_, c)| *c),
        );
    }
    PrunedSignature {
        d: sig.d,
        depth: sig.depth,
        coeffs,
    }
}

/// Context feature `[X_start, pruned signature]` for one round.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub round: usize,
    pub coords: Vec<f64>,
}

impl FeatureVector {
    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

fn window_signature(window: &Window, depth: usize) -> Result<SignatureVector> {
    signature(&window.path.shift_to_origin().time_augment(), depth)
}

/// Builds the DisSigUCB context: the window is shifted to start at time 0,
/// time-augmented, signed to depth `depth`, pruned, and prefixed with the
/// window's initial value.
pub fn feature_vector(window: &Window, depth: usize) -> Result<FeatureVector> {
    let pruned = prune(&window_signature(window, depth)?);
    let mut coords = window.path.first_row().to_vec();
    coords.extend_from_slice(pruned.coeffs());
    Ok(FeatureVector {
        round: window.round,
        coords,
    })
}

/// Same as [`feature_vector`] but with the full, unpruned signature. Used
/// only to exhibit the collinearity that pruning removes.
pub fn unpruned_feature_vector(window: &Window, depth: usize) -> Result<FeatureVector> {
    let sig = window_signature(window, depth)?;
    let mut coords = window.path.first_row().to_vec();
    coords.extend_from_slice(sig.coeffs());
    Ok(FeatureVector {
        round: window.round,
        coords,
    })
}

/// Reference values of single signature coordinates by direct quadrature of
/// the defining iterated integral. Independent of the Chen-fold route above.
pub mod oracle {
    use super::Word;
    use crate::path::DiscretePath;

    /// Driving increments of each channel on a grid refined `refinement`
    /// times per segment.
    fn refined_increments(path: &DiscretePath, refinement: usize) -> Vec<Vec<f64>> {
        let refinement = refinement.max(1);
        let h = 1.0 / refinement as f64;
        let mut steps = Vec::with_capacity((path.len() - 1) * refinement);
        for i in 1..path.len() {
            let inc: Vec<f64> = path
                .row(i)
                .iter()
                .zip(path.row(i - 1))
                .map(|(a, b)| (a - b) * h)
                .collect();
            steps.extend(std::iter::repeat_n(inc, refinement));
        }
        steps
    }

    /// Iterated integral of `word` by recursive left-point Riemann-Stieltjes
    /// sums: the inner integral is accumulated first and integrated against
    /// the next letter's increments. Error is O(1/refinement) for words of
    /// length >= 2; level 1 is exact.
    pub fn oracle_coefficient(path: &DiscretePath, word: &Word, refinement: usize) -> f64 {
        nested_sum(path, word, refinement, false)
    }

    /// Same nested sums with the trapezoid rule in each step. The error
    /// expansion is in even powers of the step, so one Richardson step between
    /// `refinement` and `2 * refinement` leaves an O(refinement^-4) error.
    pub fn oracle_coefficient_extrapolated(
        path: &DiscretePath,
        word: &Word,
        refinement: usize,
    ) -> f64 {
        let coarse = nested_sum(path, word, refinement, true);
        let fine = nested_sum(path, word, 2 * refinement, true);
        (4.0 * fine - coarse) / 3.0
    }

    fn nested_sum(path: &DiscretePath, word: &Word, refinement: usize, trapezoid: bool) -> f64 {
        if word.is_empty() {
            return 1.0;
        }
        let steps = refined_increments(path, refinement);
        // inner[m] = value of the partial iterated integral at grid point m
        let mut inner = vec![1.0; steps.len() + 1];
        for &letter in word.letters() {
            let mut next = vec![0.0; steps.len() + 1];
            for (m, inc) in steps.iter().enumerate() {
                let integrand = if trapezoid {
                    0.5 * (inner[m] + inner[m + 1])
                } else {
                    inner[m]
                };
                next[m + 1] = next[m] + integrand * inc[letter];
            }
            inner = next;
        }
        inner[steps.len()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn canonical_order_d1_n2() {
        let words = canonical_words(1, 2);
        let expected: Vec<Word> = vec![
            Word::empty(),
            Word::from([0]),
            Word::from([1]),
            Word::from([0, 0]),
            Word::from([0, 1]),
            Word::from([1, 0]),
            Word::from([1, 1]),
        ];
        assert_eq!(words, expected);
        assert_eq!(words.len(), signature_len(1, 2));
        assert_eq!(canonical_words(2, 1).len(), 4);
        assert_eq!(word_index(1, &[1, 0]), 5);
        for (i, w) in canonical_words(3, 3).iter().enumerate() {
            assert_eq!(word_index(3, w.letters()), i);
        }
    }

    #[test]
    fn segment_closed_forms() {
        let s = segment_signature(&[1.0, 1.0], 2).unwrap();
        assert_eq!(s.coeffs(), &[1.0, 1.0, 1.0, 0.5, 0.5, 0.5, 0.5]);

        let l = 2.5;
        let c = segment_signature(&[l, 0.0], 2).unwrap();
        assert_eq!(c.get(&[0]), Some(l));
        assert_eq!(c.get(&[0, 0]), Some(l * l / 2.0));
        for w in canonical_words(1, 2)
            .iter()
            .filter(|w| w.letters().contains(&1))
        {
            assert_eq!(c.get(w.letters()), Some(0.0));
        }

        let z = segment_signature(&[0.0, 0.0, 0.0], 3).unwrap();
        assert_eq!(z, SignatureVector::identity(2, 3));
    }

    #[test]
    fn concat_identity_and_levels() {
        let a = segment_signature(&[0.3, -1.2, 0.7], 3).unwrap();
        let e = SignatureVector::identity(2, 3);
        assert_eq!(chen_concat(&a, &e).unwrap(), a);
        assert_eq!(chen_concat(&e, &a).unwrap(), a);

        let b = segment_signature(&[0.1, 0.4, -0.2], 3).unwrap();
        let ab = chen_concat(&a, &b).unwrap();
        for ((x, y), z) in ab.level(1).iter().zip(a.level(1)).zip(b.level(1)) {
            assert!((x - (y + z)).abs() < 1e-15);
        }

        let mismatched = segment_signature(&[0.1, 0.4], 3).unwrap();
        assert!(matches!(
            chen_concat(&a, &mismatched),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn collinear_halves_give_the_whole_segment() {
        let delta = [0.8, -1.5, 2.0];
        let half: Vec<f64> = delta.iter().map(|x| x / 2.0).collect();
        let h = segment_signature(&half, 4).unwrap();
        let joined = chen_concat(&h, &h).unwrap();
        let whole = segment_signature(&delta, 4).unwrap();
        for (x, y) in joined.coeffs().iter().zip(whole.coeffs()) {
            assert!(close(*x, *y, 1e-14));
        }
    }

    #[test]
    fn straight_line_signature() {
        let single = DiscretePath::scalar(vec![0.0, 1.0], vec![0.0, 1.0])
            .unwrap()
            .time_augment();
        assert_eq!(
            signature(&single, 2).unwrap(),
            segment_signature(&[1.0, 1.0], 2).unwrap()
        );

        let refined = DiscretePath::scalar(vec![0.0, 0.5, 1.0], vec![0.0, 0.5, 1.0])
            .unwrap()
            .time_augment();
        let s = signature(&refined, 2).unwrap();
        for (x, y) in s
            .coeffs()
            .iter()
            .zip(segment_signature(&[1.0, 1.0], 2).unwrap().coeffs())
        {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn signature_requires_augmentation() {
        let p = DiscretePath::scalar(vec![0.0, 1.0], vec![5.0, 1.0]).unwrap();
        assert!(matches!(signature(&p, 2), Err(Error::NotAugmented)));
        let two =
            DiscretePath::from_rows(vec![0.0, 1.0], &[vec![0.0, 1.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(signature(&two, 2), Err(Error::NotAugmented)));
    }

    #[test]
    fn shuffle_examples() {
        let mut s = shuffle(&Word::from([1]), &Word::from([0]));
        s.sort();
        assert_eq!(s, vec![Word::from([0, 1]), Word::from([1, 0])]);

        assert_eq!(
            shuffle(&Word::from([1]), &Word::from([1])),
            vec![Word::from([1, 1]), Word::from([1, 1])]
        );

        let mut s = shuffle(&Word::from([1, 2]), &Word::from([3]));
        s.sort();
        assert_eq!(
            s,
            vec![
                Word::from([1, 2, 3]),
                Word::from([1, 3, 2]),
                Word::from([3, 1, 2])
            ]
        );
        assert_eq!(
            shuffle(&Word::empty(), &Word::from([2, 1])),
            vec![Word::from([2, 1])]
        );
    }

    #[test]
    fn pruning_examples() {
        assert_eq!(
            pruned_words(1, 2),
            vec![
                Word::empty(),
                Word::from([1]),
                Word::from([0, 1]),
                Word::from([1, 1])
            ]
        );
        assert_eq!(
            pruned_words(2, 1),
            vec![Word::empty(), Word::from([1]), Word::from([2])]
        );
        let line = segment_signature(&[1.0, 1.0], 2).unwrap();
        assert_eq!(prune(&line).coeffs(), &[1.0, 1.0, 0.5, 0.5]);
        for d in 1..=3 {
            for n in 1..=4 {
                assert_eq!(pruned_words(d, n).len(), pruned_len(d, n));
                let sig = SignatureVector::identity(d, n);
                assert_eq!(prune(&sig).coeffs().len(), pruned_len(d, n));
            }
        }
    }

    #[test]
    fn pruned_coordinates_follow_pruned_words() {
        let sig = segment_signature(&[0.5, 0.3, -0.7], 3).unwrap();
        let pruned = prune(&sig);
        for (w, c) in pruned_words(2, 3).iter().zip(pruned.coeffs()) {
            assert_eq!(sig.get(w.letters()), Some(*c));
        }
    }

    #[test]
    fn feature_vector_examples() {
        let line = Window::new(
            1,
            DiscretePath::scalar(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap(),
        );
        assert_eq!(
            feature_vector(&line, 2).unwrap().coords,
            vec![0.0, 1.0, 1.0, 0.5, 0.5]
        );

        // same line observed later in time: the shift removes the absolute time
        let late = Window::new(
            8,
            DiscretePath::scalar(vec![7.0, 7.5, 8.0], vec![0.0, 0.5, 1.0]).unwrap(),
        );
        let f = feature_vector(&late, 2).unwrap();
        for (x, y) in f.coords.iter().zip([0.0, 1.0, 1.0, 0.5, 0.5]) {
            assert!((x - y).abs() < 1e-12);
        }

        let c = 3.25;
        let flat = Window::new(
            2,
            DiscretePath::scalar(vec![1.0, 1.5, 2.0], vec![c; 3]).unwrap(),
        );
        let f = feature_vector(&flat, 3).unwrap();
        assert_eq!(f.coords.len(), 1 + 8);
        assert_eq!(f.coords[0], c);
        assert_eq!(f.coords[1], 1.0);
        assert!(f.coords[2..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn oracle_simple_words() {
        let l = 2.0;
        let times: Vec<f64> = (0..=4).map(|k| k as f64 * l / 4.0).collect();
        let p = DiscretePath::scalar(times, vec![0.0, 1.0, -0.5, 0.25, 2.0])
            .unwrap()
            .time_augment();
        assert!((oracle::oracle_coefficient(&p, &Word::from([1]), 1) - 2.0).abs() < 1e-12);
        let r = 200;
        let tt = oracle::oracle_coefficient(&p, &Word::from([0, 0]), r);
        // left-point error is L^2 / (2 * steps)
        assert!((tt - l * l / 2.0).abs() <= l * l / (4 * r) as f64 + 1e-12);

        let line = DiscretePath::scalar(vec![0.0, 1.0], vec![0.0, 1.0])
            .unwrap()
            .time_augment();
        assert!((oracle::oracle_coefficient(&line, &Word::from([1, 1]), 1000) - 0.5).abs() < 1e-3);
        assert!(
            (oracle::oracle_coefficient_extrapolated(&line, &Word::from([1, 1]), 10) - 0.5).abs()
                < 1e-14
        );
    }
}
