//! Pauli strings in packed symplectic form and real Pauli sums.
//!
//! Position `k` of a word (`k = 0` is the leftmost letter) is stored as bit
//! `k % 64` of word `k / 64` in both the x and z bit-vectors:
//!
//! | letter | x | z |
//! |--------|---|---|
//! | I      | 0 | 0 |
//! | X      | 1 | 0 |
//! | Y      | 1 | 1 |
//! | Z      | 0 | 1 |

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// One of the four scalar phases `{+1, +i, -1, -i}`, stored as the power of `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(power: u32) -> Self {
        Phase((power % 4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }

    /// `+1.0` or `-1.0` for real phases, `None` for `±i`.
    pub fn real_sign(self) -> Option<f64> {
        match self.0 {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;

    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.0 {
            0 => "+1",
            1 => "+i",
            2 => "-1",
            _ => "-i",
        };
        f.write_str(s)
    }
}

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }
}

/// An n-qubit tensor product of I, X, Y, Z without a scalar phase.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    num_qubits: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliString {
    pub fn identity(num_qubits: usize) -> Self {
        let words = num_qubits.div_ceil(64);
        PauliString {
            num_qubits,
            x: vec![0; words],
            z: vec![0; words],
        }
    }

    pub fn from_letters(letters: &[Letter]) -> Self {
        let mut p = PauliString::identity(letters.len());
        for (k, &l) in letters.iter().enumerate() {
            p.set(k, l);
        }
        p
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn letter(&self, k: usize) -> Letter {
        assert!(k < self.num_qubits, "qubit index {k} out of range");
        let (w, b) = (k / 64, k % 64);
        Letter::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn set(&mut self, k: usize, letter: Letter) {
        assert!(k < self.num_qubits, "qubit index {k} out of range");
        let (w, b) = (k / 64, k % 64);
        let (x, z) = letter.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((x as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((z as u64) << b);
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.num_qubits).map(move |k| self.letter(k))
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(self.z.iter()).all(|&w| w == 0)
    }

    /// Number of non-identity positions.
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    fn check_same_size(&self, other: &PauliString) -> Result<()> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::QubitMismatch {
                left: self.num_qubits,
                right: other.num_qubits,
            });
        }
        Ok(())
    }

    /// Count of positions where both letters are non-identity and differ.
    fn anticommuting_positions(&self, other: &PauliString) -> u32 {
        self.x
            .iter()
            .zip(&self.z)
            .zip(other.x.iter().zip(&other.z))
            .map(|((x1, z1), (x2, z2))| ((x1 & z2) ^ (z1 & x2)).count_ones())
            .sum()
    }

    /// Qubit-wise commutation: at every position the letters agree or one is I.
    pub fn qwc_commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_same_size(other)?;
        Ok(self.qwc_unchecked(other))
    }

    /// Operator commutation: the number of locally anticommuting positions is even.
    pub fn fc_commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_same_size(other)?;
        Ok(self.fc_unchecked(other))
    }

    pub(crate) fn qwc_unchecked(&self, other: &PauliString) -> bool {
        self.x
            .iter()
            .zip(&self.z)
            .zip(other.x.iter().zip(&other.z))
            .all(|((x1, z1), (x2, z2))| (x1 & z2) ^ (z1 & x2) == 0)
    }

    pub(crate) fn fc_unchecked(&self, other: &PauliString) -> bool {
        self.anticommuting_positions(other) % 2 == 0
    }

    /// Operator product `self · other = phase · R`.
    pub fn product(&self, other: &PauliString) -> Result<(Phase, PauliString)> {
        self.check_same_size(other)?;
        // Per qubit, write P = i^{xz} X^x Z^z. Moving Z^{z1} past X^{x2}
        // contributes (-1)^{z1 x2}; the i^{xz} prefactors are rebalanced
        // against the product's own x·z term.
        let mut power: i64 = 0;
        let mut rx = Vec::with_capacity(self.x.len());
        let mut rz = Vec::with_capacity(self.z.len());
        for ((x1, z1), (x2, z2)) in self.x.iter().zip(&self.z).zip(other.x.iter().zip(&other.z)) {
            let x3 = x1 ^ x2;
            let z3 = z1 ^ z2;
            power += (x1 & z1).count_ones() as i64;
            power += (x2 & z2).count_ones() as i64;
            power += 2 * (z1 & x2).count_ones() as i64;
            power -= (x3 & z3).count_ones() as i64;
            rx.push(x3);
            rz.push(z3);
        }
        let product = PauliString {
            num_qubits: self.num_qubits,
            x: rx,
            z: rz,
        };
        Ok((Phase::from_power(power.rem_euclid(4) as u32), product))
    }

    /// Bit masks `(x, z)` over basis-state indices, where qubit `k` of the word
    /// addresses bit `n - 1 - k` of the index (leftmost letter is the most
    /// significant tensor factor).
    pub fn index_masks(&self) -> (usize, usize) {
        assert!(self.num_qubits <= 63, "index masks need at most 63 qubits");
        let mut xm = 0usize;
        let mut zm = 0usize;
        for k in 0..self.num_qubits {
            let bit = 1usize << (self.num_qubits - 1 - k);
            match self.letter(k) {
                Letter::I => {}
                Letter::X => xm |= bit,
                Letter::Y => {
                    xm |= bit;
                    zm |= bit;
                }
                Letter::Z => zm |= bit,
            }
        }
        (xm, zm)
    }

    /// Number of Y letters.
    pub fn y_count(&self) -> u32 {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x & z).count_ones())
            .sum()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.letters() {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::InvalidWord {
                word: s.to_string(),
                reason: "empty word".into(),
            });
        }
        let letters = s
            .chars()
            .map(|c| {
                Letter::from_char(c).ok_or_else(|| Error::InvalidWord {
                    word: s.to_string(),
                    reason: format!("illegal character {c:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString::from_letters(&letters))
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic by word, `I < X < Y < Z`.
impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.letters().cmp(other.letters())
    }
}

/// Real linear combination of non-identity Pauli strings plus a constant.
///
/// Terms keep the order of their first appearance in the input; that order is
/// the vertex order used by every grouping algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    num_qubits: usize,
    terms: Vec<(PauliString, f64)>,
    index: HashMap<PauliString, usize>,
    identity_offset: f64,
}

impl PauliSum {
    pub fn new(num_qubits: usize) -> Self {
        PauliSum {
            num_qubits,
            terms: Vec::new(),
            index: HashMap::new(),
            identity_offset: 0.0,
        }
    }

    /// Builds a sum from `(coefficient, string)` pairs, merging duplicates and
    /// splitting off the identity.
    pub fn from_terms<I>(num_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, PauliString)>,
    {
        let mut acc: Vec<(PauliString, f64)> = Vec::new();
        let mut index: HashMap<PauliString, usize> = HashMap::new();
        let mut offset = 0.0;
        for (c, p) in terms {
            if p.num_qubits() != num_qubits {
                return Err(Error::QubitMismatch {
                    left: num_qubits,
                    right: p.num_qubits(),
                });
            }
            if p.is_identity() {
                offset += c;
                continue;
            }
            match index.get(&p) {
                Some(&i) => acc[i].1 += c,
                None => {
                    index.insert(p.clone(), acc.len());
                    acc.push((p, c));
                }
            }
        }
        let mut sum = PauliSum::new(num_qubits);
        sum.identity_offset = offset;
        for (p, c) in acc {
            if c != 0.0 {
                sum.index.insert(p.clone(), sum.terms.len());
                sum.terms.push((p, c));
            }
        }
        Ok(sum)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn identity_offset(&self) -> f64 {
        self.identity_offset
    }

    pub fn terms(&self) -> &[(PauliString, f64)] {
        &self.terms
    }

    pub fn string(&self, i: usize) -> &PauliString {
        &self.terms[i].0
    }

    pub fn coefficient(&self, i: usize) -> f64 {
        self.terms[i].1
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.1).collect()
    }

    pub fn strings(&self) -> Vec<PauliString> {
        self.terms.iter().map(|t| t.0.clone()).collect()
    }

    pub fn position(&self, p: &PauliString) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// Σ|c_P| including the identity offset.
    pub fn l1_norm(&self) -> f64 {
        self.identity_offset.abs() + self.terms.iter().map(|t| t.1.abs()).sum::<f64>()
    }

    /// Canonical text form: one `<coefficient> <word>` line per term, sorted by
    /// word, coefficients with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut lines: Vec<(PauliString, f64)> = self.terms.clone();
        if self.identity_offset != 0.0 {
            lines.push((PauliString::identity(self.num_qubits), self.identity_offset));
        }
        lines.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out = String::new();
        for (p, c) in lines {
            out.push_str(&format!("{c:.16e} {p}\n"));
        }
        out
    }
}

/// Parses the one-term-per-line Pauli-sum format.
///
/// Blank lines and lines starting with `#` are skipped. Each remaining line is
/// `<coefficient> <word>`.
pub fn parse_pauli_sum(text: &str) -> Result<PauliSum> {
    let mut num_qubits: Option<usize> = None;
    let mut terms = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(coef), Some(word), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: line_no,
                message: "expected `<coefficient> <word>`".into(),
            });
        };
        let c: f64 = coef.parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("malformed coefficient {coef:?}"),
        })?;
        if !c.is_finite() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("non-finite coefficient {coef:?}"),
            });
        }
        let p: PauliString = word.parse::<PauliString>().map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        match num_qubits {
            None => num_qubits = Some(p.num_qubits()),
            Some(n) if n != p.num_qubits() => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!(
                        "word {word} has length {}, expected {n}",
                        p.num_qubits()
                    ),
                })
            }
            _ => {}
        }
        terms.push((c, p));
    }
    let n = num_qubits.ok_or(Error::Parse {
        line: 0,
        message: "no terms found".into(),
    })?;
    PauliSum::from_terms(n, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn parse_splits_identity() {
        let sum = parse_pauli_sum("-0.811 IIII\n0.172 ZIII").unwrap();
        assert_eq!(sum.len(), 1);
        assert_eq!(sum.string(0), &p("ZIII"));
        assert_eq!(sum.coefficient(0), 0.172);
        assert_eq!(sum.identity_offset(), -0.811);
    }

    #[test]
    fn parse_cancels_duplicates() {
        let sum = parse_pauli_sum("0.5 XZ\n-0.5 XZ").unwrap();
        assert!(sum.is_empty());
        assert_eq!(sum.identity_offset(), 0.0);
    }

    #[test]
    fn parse_merges_duplicates_in_first_position() {
        let sum = parse_pauli_sum("# comment\n1 ZI\n2 IZ\n\n3 ZI\n1e-1 XX").unwrap();
        assert_eq!(sum.strings(), vec![p("ZI"), p("IZ"), p("XX")]);
        assert_eq!(sum.coefficients(), vec![4.0, 2.0, 0.1]);
    }

    #[test]
    fn parse_errors_name_line() {
        match parse_pauli_sum("1.0 X\n2.0 XY") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_pauli_sum("1.0 X\nabc Y") {
            Err(Error::Parse { line: 2, message }) => assert!(message.contains("coefficient")),
            other => panic!("unexpected {other:?}"),
        }
        match parse_pauli_sum("1.0 XQ") {
            Err(Error::Parse { line: 1, message }) => assert!(message.contains("illegal")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_pauli_sum("# nothing\n").is_err());
    }

    #[test]
    fn commutation_examples() {
        assert!(!p("XX").qwc_commutes(&p("YY")).unwrap());
        assert!(p("XX").fc_commutes(&p("YY")).unwrap());
        assert!(p("ZIII").qwc_commutes(&p("IZII")).unwrap());
        assert!(!p("X").fc_commutes(&p("Y")).unwrap());
        assert!(p("XYZ").qwc_commutes(&p("XYZ")).unwrap());
        assert!(matches!(
            p("X").qwc_commutes(&p("XX")),
            Err(Error::QubitMismatch { .. })
        ));
    }

    #[test]
    fn product_examples() {
        assert_eq!(p("XX").product(&p("YY")).unwrap(), (Phase::MINUS_ONE, p("ZZ")));
        assert_eq!(p("XYZ").product(&p("III")).unwrap(), (Phase::ONE, p("XYZ")));
        assert_eq!(p("X").product(&p("Y")).unwrap(), (Phase::I, p("Z")));
        assert_eq!(p("Y").product(&p("X")).unwrap(), (Phase::MINUS_I, p("Z")));
        assert_eq!(p("Z").product(&p("X")).unwrap(), (Phase::I, p("Y")));
    }

    #[test]
    fn long_strings_span_words() {
        let mut s = "I".repeat(70);
        s.replace_range(65..66, "Y");
        let a = p(&s);
        assert_eq!(a.letter(65), Letter::Y);
        assert_eq!(a.weight(), 1);
        assert_eq!(a.to_string(), s);
    }

    fn mat(l: Letter) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match l {
            Letter::I => [[one, o], [o, one]],
            Letter::X => [[o, one], [one, o]],
            Letter::Y => [[o, -i], [i, o]],
            Letter::Z => [[one, o], [o, -one]],
        }
    }

    fn mul2(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
        let mut r = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    r[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        r
    }

    /// Per-qubit 2×2 matrix oracle for the phase of a product.
    fn oracle_product(a: &PauliString, b: &PauliString) -> (Complex64, PauliString) {
        let mut phase = Complex64::new(1.0, 0.0);
        let mut letters = Vec::new();
        for (la, lb) in a.letters().zip(b.letters()) {
            let m = mul2(mat(la), mat(lb));
            let found = [Letter::I, Letter::X, Letter::Y, Letter::Z]
                .into_iter()
                .find_map(|l| {
                    let t = mat(l);
                    // m = s · t for some scalar s; find it from a nonzero entry.
                    let (i, j) = if t[0][0].norm() > 0.5 { (0, 0) } else { (0, 1) };
                    let s = m[i][j] / t[i][j];
                    let ok = (0..2).all(|r| (0..2).all(|c| (m[r][c] - s * t[r][c]).norm() < 1e-12));
                    ok.then_some((s, l))
                })
                .unwrap();
            phase *= found.0;
            letters.push(found.1);
        }
        (phase, PauliString::from_letters(&letters))
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
        proptest::collection::vec(0u8..4, n).prop_map(|v| {
            let letters: Vec<Letter> = v
                .into_iter()
                .map(|b| [Letter::I, Letter::X, Letter::Y, Letter::Z][b as usize])
                .collect();
            PauliString::from_letters(&letters)
        })
    }

    fn arb_triple() -> impl Strategy<Value = (PauliString, PauliString, PauliString)> {
        (1usize..=3).prop_flat_map(|n| (arb_pauli(n), arb_pauli(n), arb_pauli(n)))
    }

    proptest! {
        #[test]
        fn product_matches_matrix_oracle((a, b, _c) in arb_triple()) {
            let (phase, r) = a.product(&b).unwrap();
            let (oracle_phase, oracle_r) = oracle_product(&a, &b);
            prop_assert_eq!(r, oracle_r);
            prop_assert!((phase.to_complex() - oracle_phase).norm() < 1e-12);
        }

        #[test]
        fn product_is_associative((a, b, c) in arb_triple()) {
            let (p1, ab) = a.product(&b).unwrap();
            let (p2, ab_c) = ab.product(&c).unwrap();
            let (q1, bc) = b.product(&c).unwrap();
            let (q2, a_bc) = a.product(&bc).unwrap();
            prop_assert_eq!(ab_c, a_bc);
            prop_assert_eq!(p1 * p2, q1 * q2);
        }

        #[test]
        fn fc_iff_phases_agree((a, b, _c) in arb_triple()) {
            let (pab, _) = a.product(&b).unwrap();
            let (pba, _) = b.product(&a).unwrap();
            prop_assert_eq!(a.fc_commutes(&b).unwrap(), pab == pba);
            if a.fc_commutes(&b).unwrap() {
                prop_assert!(pab.is_real());
            }
        }

        #[test]
        fn qwc_implies_fc((a, b, _c) in arb_triple()) {
            if a.qwc_commutes(&b).unwrap() {
                prop_assert!(a.fc_commutes(&b).unwrap());
            }
        }

        #[test]
        fn text_round_trip(
            raw in proptest::collection::vec((arb_pauli(4), -10.0f64..10.0), 1..12),
            offset in -5.0f64..5.0,
        ) {
            let mut terms: Vec<(f64, PauliString)> = raw.into_iter().map(|(p, c)| (c, p)).collect();
            terms.push((offset, PauliString::identity(4)));
            let sum = PauliSum::from_terms(4, terms).unwrap();
            let again = parse_pauli_sum(&sum.to_text()).unwrap();
            prop_assert_eq!(again.identity_offset().to_bits(), sum.identity_offset().to_bits());
            prop_assert_eq!(again.len(), sum.len());
            for (p, c) in sum.terms() {
                let j = again.position(p).unwrap();
                prop_assert_eq!(again.coefficient(j).to_bits(), c.to_bits());
            }
        }
    }
}
