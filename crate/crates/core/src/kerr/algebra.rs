//! Normally ordered polynomials in the four bosonic modes `a1, a2, b1, b2`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul};

use num_complex::Complex64 as C64;

/// Highest total degree any spin second moment needs.
pub const MAX_DEGREE: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    A1 = 0,
    A2 = 1,
    B1 = 2,
    B2 = 3,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::A1, Mode::A2, Mode::B1, Mode::B2];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Mode {
        Mode::ALL[i]
    }

    pub fn label(self) -> &'static str {
        match self {
            Mode::A1 => "a1",
            Mode::A2 => "a2",
            Mode::B1 => "b1",
            Mode::B2 => "b2",
        }
    }
}

/// `prod_mu (a_mu†)^{create[mu]} (a_mu)^{annihilate[mu]}`, all daggers left.
///
/// Different modes commute, so this exponent pair fully identifies a
/// normally ordered monomial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub create: [u8; 4],
    pub annihilate: [u8; 4],
}

impl Monomial {
    pub const IDENTITY: Monomial = Monomial {
        create: [0; 4],
        annihilate: [0; 4],
    };

    pub fn creation(mode: Mode) -> Self {
        let mut m = Self::IDENTITY;
        m.create[mode.index()] = 1;
        m
    }

    pub fn annihilation(mode: Mode) -> Self {
        let mut m = Self::IDENTITY;
        m.annihilate[mode.index()] = 1;
        m
    }

    /// `a_mu† a_mu`
    pub fn number(mode: Mode) -> Self {
        let mut m = Self::IDENTITY;
        m.create[mode.index()] = 1;
        m.annihilate[mode.index()] = 1;
        m
    }

    pub fn degree(&self) -> u32 {
        self.create.iter().chain(&self.annihilate).map(|&e| e as u32).sum()
    }

    /// Hermitian conjugate, still normally ordered.
    pub fn dagger(&self) -> Self {
        Self {
            create: self.annihilate,
            annihilate: self.create,
        }
    }

    pub fn is_hermitian(&self) -> bool {
        self.create == self.annihilate
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut put = |f: &mut fmt::Formatter<'_>, s: String| -> fmt::Result {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            f.write_str(&s)
        };
        for (dagger, exps) in [(true, &self.create), (false, &self.annihilate)] {
            for mode in Mode::ALL {
                let e = exps[mode.index()];
                if e == 0 {
                    continue;
                }
                let base = if dagger {
                    format!("{}†", mode.label())
                } else {
                    mode.label().to_string()
                };
                put(f, if e == 1 { base } else { format!("{base}^{e}") })?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

fn binomial(n: u8, k: u8) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(k: u8) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Normal-ordered expansion of `a^n (a†)^m` for a single mode:
/// `sum_k C(n,k) C(m,k) k! (a†)^{m-k} a^{n-k}`.
fn reorder_single(n: u8, m: u8) -> Vec<(u8, u8, f64)> {
    (0..=n.min(m))
        .map(|k| (m - k, n - k, binomial(n, k) * binomial(m, k) * factorial(k)))
        .collect()
}

/// Linear combination of normally ordered monomials.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, C64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: C64) -> Self {
        Self::term(Monomial::IDENTITY, c)
    }

    pub fn term(mono: Monomial, coeff: C64) -> Self {
        let mut p = Self::zero();
        p.add_term(mono, coeff);
        p
    }

    pub fn monomial(mono: Monomial) -> Self {
        Self::term(mono, C64::new(1.0, 0.0))
    }

    pub fn add_term(&mut self, mono: Monomial, coeff: C64) {
        let entry = self.terms.entry(mono).or_insert(C64::new(0.0, 0.0));
        *entry += coeff;
        if *entry == C64::new(0.0, 0.0) {
            self.terms.remove(&mono);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mono: &Monomial) -> C64 {
        self.terms.get(mono).copied().unwrap_or_default()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.add_term(*m, v * c);
        }
        out
    }

    pub fn dagger(&self) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.add_term(m.dagger(), v.conj());
        }
        out
    }

    /// Drops coefficients with magnitude at or below `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(_, v)| v.norm() > tol)
                .map(|(m, v)| (*m, *v))
                .collect(),
        }
    }

    /// Largest coefficient magnitude of `self - other`.
    pub fn max_difference(&self, other: &Polynomial) -> f64 {
        let mut worst = 0.0f64;
        for (m, v) in &self.terms {
            worst = worst.max((v - other.coefficient(m)).norm());
        }
        for (m, v) in &other.terms {
            if !self.terms.contains_key(m) {
                worst = worst.max(v.norm());
            }
        }
        worst
    }
}

/// Normally ordered product of two normally ordered monomials.
pub fn multiply_monomials(left: &Monomial, right: &Monomial) -> Vec<(Monomial, f64)> {
    // Modes commute, so each mode is reordered independently and the
    // per-mode expansions are combined as a Cartesian product.
    let mut acc: Vec<(Monomial, f64)> = vec![(Monomial::IDENTITY, 1.0)];
    for mode in 0..4 {
        let pieces = reorder_single(left.annihilate[mode], right.create[mode]);
        let mut next = Vec::with_capacity(acc.len() * pieces.len());
        for (mono, c) in &acc {
            for &(cr, an, w) in &pieces {
                let mut m = *mono;
                m.create[mode] = left.create[mode] + cr;
                m.annihilate[mode] = an + right.annihilate[mode];
                next.push((m, c * w));
            }
        }
        acc = next;
    }
    acc
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (ml, cl) in &self.terms {
            for (mr, cr) in &rhs.terms {
                for (m, w) in multiply_monomials(ml, mr) {
                    out.add_term(m, cl * cr * w);
                }
            }
        }
        out
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, *c);
        }
        out
    }
}

/// Linear substitution `a'_mu = sum_nu u[mu][nu] a_nu` of the four modes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearModeMap {
    pub u: [[C64; 4]; 4],
}

impl LinearModeMap {
    /// The 50:50 beam splitter mixing `a_i` with `b_i`:
    /// `a_i' = (a_i + e^{i phi} b_i)/sqrt 2`, `b_i' = (-e^{-i phi} a_i + b_i)/sqrt 2`.
    pub fn beam_splitter(phi: f64) -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut u = [[C64::new(0.0, 0.0); 4]; 4];
        for (a, b) in [(Mode::A1, Mode::B1), (Mode::A2, Mode::B2)] {
            let (a, b) = (a.index(), b.index());
            u[a][a] = C64::new(r, 0.0);
            u[a][b] = C64::from_polar(r, phi);
            u[b][a] = -C64::from_polar(r, -phi);
            u[b][b] = C64::new(r, 0.0);
        }
        Self { u }
    }

    /// Conjugate transpose, the inverse of a unitary map.
    pub fn adjoint(&self) -> Self {
        let mut u = [[C64::new(0.0, 0.0); 4]; 4];
        for (i, row) in u.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.u[j][i].conj();
            }
        }
        Self { u }
    }

    fn image(&self, mode: usize, dagger: bool) -> Polynomial {
        let mut p = Polynomial::zero();
        for nu in Mode::ALL {
            let c = self.u[mode][nu.index()];
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            if dagger {
                p.add_term(Monomial::creation(nu), c.conj());
            } else {
                p.add_term(Monomial::annihilation(nu), c);
            }
        }
        p
    }

    /// Rewrites a polynomial in the mapped modes as one in the original modes.
    pub fn substitute(&self, poly: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (mono, coeff) in poly.terms() {
            let mut acc = Polynomial::constant(*coeff);
            for (dagger, exps) in [(true, &mono.create), (false, &mono.annihilate)] {
                for (mode, &e) in exps.iter().enumerate() {
                    let factor = self.image(mode, dagger);
                    for _ in 0..e {
                        acc = &acc * &factor;
                    }
                }
            }
            out = &out + &acc;
        }
        out.pruned(1e-15)
    }
}

/// Expands a polynomial in post-beam-splitter modes into pre-beam-splitter
/// modes for relative phase `phi`.
pub fn beamsplitter_expand(post: &Polynomial, phi: f64) -> Polynomial {
    LinearModeMap::beam_splitter(phi).substitute(post)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    fn a(mode: Mode) -> Polynomial {
        Polynomial::monomial(Monomial::annihilation(mode))
    }

    fn ad(mode: Mode) -> Polynomial {
        Polynomial::monomial(Monomial::creation(mode))
    }

    #[test]
    fn canonical_commutator() {
        for mode in Mode::ALL {
            let lhs = &(&a(mode) * &ad(mode)) + &(&ad(mode) * &a(mode)).scale(-one());
            assert_eq!(lhs, Polynomial::constant(one()));
        }
        let mixed = &(&a(Mode::A1) * &ad(Mode::B2)) + &(&ad(Mode::B2) * &a(Mode::A1)).scale(-one());
        assert!(mixed.is_empty());
    }

    #[test]
    fn squared_number_operator() {
        // (a† a)^2 = a†^2 a^2 + a† a
        let n = Polynomial::monomial(Monomial::number(Mode::A2));
        let sq = &n * &n;
        let mut expect = Polynomial::monomial(Monomial::number(Mode::A2));
        let mut m = Monomial::IDENTITY;
        m.create[1] = 2;
        m.annihilate[1] = 2;
        expect.add_term(m, one());
        assert_eq!(sq, expect);
    }

    #[test]
    fn single_mode_reordering() {
        // a^2 a†^2 = a†^2 a^2 + 4 a† a + 2
        let terms = reorder_single(2, 2);
        assert_eq!(terms, vec![(2, 2, 1.0), (1, 1, 4.0), (0, 0, 2.0)]);
    }

    #[test]
    fn display_format() {
        let mut m = Monomial::IDENTITY;
        m.create[0] = 2;
        m.annihilate[3] = 1;
        assert_eq!(m.to_string(), "a1†^2 b2");
        assert_eq!(Monomial::IDENTITY.to_string(), "1");
    }

    #[test]
    fn total_number_is_beam_splitter_invariant() {
        let total = Mode::ALL.iter().fold(Polynomial::zero(), |acc, &m| {
            &acc + &Polynomial::monomial(Monomial::number(m))
        });
        for phi in [0.0, 0.4, FRAC_PI_2, 3.0] {
            assert!(beamsplitter_expand(&total, phi).max_difference(&total) < 1e-15);
        }
    }

    #[test]
    fn single_mode_image() {
        let post = a(Mode::A1);
        let pre = beamsplitter_expand(&post, FRAC_PI_2);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((pre.coefficient(&Monomial::annihilation(Mode::A1)) - C64::new(r, 0.0)).norm() < 1e-15);
        assert!((pre.coefficient(&Monomial::annihilation(Mode::B1)) - C64::new(0.0, r)).norm() < 1e-15);
        assert_eq!(pre.len(), 2);
    }

    #[test]
    fn transformed_modes_keep_commutators() {
        for phi in [0.0, 1.1, FRAC_PI_2] {
            let map = LinearModeMap::beam_splitter(phi);
            for i in 0..4 {
                let norm: f64 = map.u[i].iter().map(|c| c.norm_sqr()).sum();
                assert!((norm - 1.0).abs() < 1e-15);
                let ai = map.substitute(&a(Mode::from_index(i)));
                let adi = map.substitute(&ad(Mode::from_index(i)));
                let comm = &(&ai * &adi) + &(&adi * &ai).scale(-one());
                assert!(comm.max_difference(&Polynomial::constant(one())) < 1e-15);
            }
        }
    }

    fn arb_monomial() -> impl Strategy<Value = Monomial> {
        prop::collection::vec(0usize..8, 0..=4).prop_map(|slots| {
            let mut m = Monomial::IDENTITY;
            for s in slots {
                if s < 4 {
                    m.create[s] += 1;
                } else {
                    m.annihilate[s - 4] += 1;
                }
            }
            m
        })
    }

    fn arb_polynomial() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec((arb_monomial(), -2.0f64..2.0, -2.0f64..2.0), 1..5).prop_map(|terms| {
            let mut p = Polynomial::zero();
            for (m, re, im) in terms {
                p.add_term(m, C64::new(re, im));
            }
            p
        })
    }

    proptest! {
        #[test]
        fn beam_splitter_round_trip(p in arb_polynomial(), phi in 0.0f64..std::f64::consts::TAU) {
            let map = LinearModeMap::beam_splitter(phi);
            let back = map.adjoint().substitute(&map.substitute(&p));
            prop_assert!(back.max_difference(&p) < 1e-12);
        }

        #[test]
        fn product_is_associative(x in arb_monomial(), y in arb_monomial(), z in arb_monomial()) {
            let (x, y, z) = (Polynomial::monomial(x), Polynomial::monomial(y), Polynomial::monomial(z));
            let left = &(&x * &y) * &z;
            let right = &x * &(&y * &z);
            prop_assert!(left.max_difference(&right) < 1e-9);
        }

        #[test]
        fn dagger_reverses_products(x in arb_polynomial(), y in arb_polynomial()) {
            let lhs = (&x * &y).dagger();
            let rhs = &y.dagger() * &x.dagger();
            prop_assert!(lhs.max_difference(&rhs) < 1e-9);
        }
    }
}
