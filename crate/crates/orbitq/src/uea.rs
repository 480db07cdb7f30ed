//! Enveloping-algebra arithmetic over the complexified algebra: free words,
//! normal ordering against a partitioned basis, the Casimir element, root
//! decompositions relative to a Cartan subalgebra of the stabilizer, the
//! projection onto the Cartan polynomial ring, and character evaluation.

use std::collections::BTreeMap;
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{OrbitqError, Result};
use crate::liealg::{AlgebraElement, CElement, MatrixLieAlgebra};
use crate::numerics::{self, CMat, CVec};
use crate::orbit::HyperbolicOrbit;

const SPARSIFY_EPS: f64 = 1e-12;

/// An ordered basis of the complexified algebra with its block partition
/// (negative | Cartan | positive) and the structure constants rewritten
/// against it.
#[derive(Debug)]
pub struct UeaBasis {
    pub algebra: MatrixLieAlgebra,
    pub elements: Vec<CElement>,
    pub n_neg: usize,
    pub n_cartan: usize,
    pub n_pos: usize,
    structure: Vec<Vec<CVec>>,
    to_coords: CMat,
    id: u64,
}

impl UeaBasis {
    pub fn custom(
        algebra: &MatrixLieAlgebra,
        elements: Vec<CElement>,
        n_neg: usize,
        n_cartan: usize,
        n_pos: usize,
    ) -> Result<Arc<UeaBasis>> {
        let d = algebra.d;
        if elements.len() != d || n_neg + n_cartan + n_pos != d {
            return Err(OrbitqError::Config(format!(
                "basis partition {n_neg}+{n_cartan}+{n_pos} does not cover dimension {d}"
            )));
        }
        let mut t = CMat::zeros(d, d);
        for (j, e) in elements.iter().enumerate() {
            t.set_column(j, &e.coeffs);
        }
        let to_coords = t.clone().try_inverse().ok_or_else(|| {
            OrbitqError::Config("ordered basis does not span the complexified algebra".into())
        })?;
        let mut structure = Vec::with_capacity(d);
        for a in 0..d {
            let mut row = Vec::with_capacity(d);
            for b in 0..d {
                let br = algebra.bracket_c(&elements[a], &elements[b]);
                row.push(&to_coords * br.coeffs);
            }
            structure.push(row);
        }

        let mut hasher = DefaultHasher::new();
        algebra.name.hash(&mut hasher);
        algebra.n.hash(&mut hasher);
        (n_neg, n_cartan, n_pos).hash(&mut hasher);
        for e in &elements {
            for c in e.coeffs.iter() {
                c.re.to_bits().hash(&mut hasher);
                c.im.to_bits().hash(&mut hasher);
            }
        }
        let id = hasher.finish();

        Ok(Arc::new(UeaBasis {
            algebra: algebra.clone(),
            elements,
            n_neg,
            n_cartan,
            n_pos,
            structure,
            to_coords,
            id,
        }))
    }

    /// The algebra's own ordered basis, treated as one undivided block.
    pub fn standard(algebra: &MatrixLieAlgebra) -> Arc<UeaBasis> {
        let elements: Vec<CElement> = (0..algebra.d)
            .map(|i| algebra.complexify(&algebra.basis_element(i)))
            .collect();
        UeaBasis::custom(algebra, elements, 0, algebra.d, 0)
            .expect("the defining basis is always independent")
    }

    pub fn cartan_range(&self) -> std::ops::Range<usize> {
        self.n_neg..self.n_neg + self.n_cartan
    }
}

/// A finite complex combination of words in a fixed ordered basis.
#[derive(Debug, Clone)]
pub struct UEAElement {
    pub basis: Arc<UeaBasis>,
    pub terms: BTreeMap<Vec<u8>, Complex64>,
}

fn check_compatible(a: &UEAElement, b: &UEAElement) -> Result<()> {
    if a.basis.id != b.basis.id {
        return Err(OrbitqError::BasisMismatch {
            left: format!("{} ({} elements)", a.basis.algebra.name, a.basis.elements.len()),
            right: format!("{} ({} elements)", b.basis.algebra.name, b.basis.elements.len()),
        });
    }
    Ok(())
}

impl UEAElement {
    pub fn zero(basis: &Arc<UeaBasis>) -> UEAElement {
        UEAElement { basis: Arc::clone(basis), terms: BTreeMap::new() }
    }

    pub fn one(basis: &Arc<UeaBasis>) -> UEAElement {
        let mut terms = BTreeMap::new();
        terms.insert(Vec::new(), Complex64::new(1.0, 0.0));
        UEAElement { basis: Arc::clone(basis), terms }
    }

    pub fn generator(basis: &Arc<UeaBasis>, i: usize) -> UEAElement {
        let mut terms = BTreeMap::new();
        terms.insert(vec![i as u8], Complex64::new(1.0, 0.0));
        UEAElement { basis: Arc::clone(basis), terms }
    }

    pub fn from_terms(
        basis: &Arc<UeaBasis>,
        entries: &[(Vec<u8>, Complex64)],
    ) -> UEAElement {
        let mut terms: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
        for (w, c) in entries {
            *terms.entry(w.clone()).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        terms.retain(|_, c| c.norm() > SPARSIFY_EPS);
        UEAElement { basis: Arc::clone(basis), terms }
    }

    pub fn scale(&self, s: Complex64) -> UEAElement {
        let terms = self.terms.iter().map(|(w, c)| (w.clone(), c * s)).collect();
        UEAElement { basis: Arc::clone(&self.basis), terms }
    }

    pub fn add(&self, other: &UEAElement) -> Result<UEAElement> {
        check_compatible(self, other)?;
        let mut terms = self.terms.clone();
        for (w, c) in &other.terms {
            *terms.entry(w.clone()).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        terms.retain(|_, c| c.norm() > SPARSIFY_EPS);
        Ok(UEAElement { basis: Arc::clone(&self.basis), terms })
    }

    pub fn sub(&self, other: &UEAElement) -> Result<UEAElement> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(|w| w.len()).max().unwrap_or(0)
    }
}

/// Bilinear word-concatenation product in the free algebra.
pub fn uea_multiply(x: &UEAElement, y: &UEAElement) -> Result<UEAElement> {
    check_compatible(x, y)?;
    let mut terms: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
    for (wx, cx) in &x.terms {
        for (wy, cy) in &y.terms {
            let mut w = wx.clone();
            w.extend_from_slice(wy);
            *terms.entry(w).or_insert(Complex64::new(0.0, 0.0)) += cx * cy;
        }
    }
    terms.retain(|_, c| c.norm() > SPARSIFY_EPS);
    Ok(UEAElement { basis: Arc::clone(&x.basis), terms })
}

pub fn uea_bracket(x: &UEAElement, y: &UEAElement) -> Result<UEAElement> {
    uea_multiply(x, y)?.sub(&uea_multiply(y, x)?)
}

fn normal_form_with<F: FnMut(usize) -> usize>(x: &UEAElement, mut pick: F) -> UEAElement {
    let basis = &x.basis;
    let mut result: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
    let mut work: Vec<(Vec<u8>, Complex64)> =
        x.terms.iter().map(|(w, c)| (w.clone(), *c)).collect();
    while let Some((w, c)) = work.pop() {
        if c.norm() <= SPARSIFY_EPS {
            continue;
        }
        let descents: Vec<usize> = (0..w.len().saturating_sub(1))
            .filter(|&i| w[i] > w[i + 1])
            .collect();
        if descents.is_empty() {
            *result.entry(w).or_insert(Complex64::new(0.0, 0.0)) += c;
            continue;
        }
        let i = descents[pick(descents.len())];
        let (a, b) = (w[i] as usize, w[i + 1] as usize);
        let mut swapped = w.clone();
        swapped.swap(i, i + 1);
        work.push((swapped, c));
        let coeffs = &basis.structure[a][b];
        for (k, s) in coeffs.iter().enumerate() {
            if s.norm() > SPARSIFY_EPS {
                let mut reduced = Vec::with_capacity(w.len() - 1);
                reduced.extend_from_slice(&w[..i]);
                reduced.push(k as u8);
                reduced.extend_from_slice(&w[i + 2..]);
                work.push((reduced, c * s));
            }
        }
    }
    result.retain(|_, c| c.norm() > SPARSIFY_EPS);
    UEAElement { basis: Arc::clone(basis), terms: result }
}

/// Rewrite every word into non-decreasing index order, resolving the first
/// descent at each step.
pub fn pbw_normal_form(x: &UEAElement) -> UEAElement {
    normal_form_with(x, |_| 0)
}

/// Same rewriting relation under a seeded random choice of descent; used to
/// exercise confluence.
pub fn pbw_normal_form_seeded(x: &UEAElement, seed: u64) -> UEAElement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    normal_form_with(x, move |n| rng.random_range(0..n))
}

/// The quadratic element built from the inverse of the trace-form matrix of
/// the adjoint representation, expressed on the standard basis.
pub fn casimir(algebra: &MatrixLieAlgebra) -> Result<UEAElement> {
    let d = algebra.d;
    let svd = algebra.killing.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-10 * smax || smax == 0.0 {
        return Err(OrbitqError::SingularKilling(algebra.name.clone()));
    }
    let inv = algebra
        .killing
        .clone()
        .try_inverse()
        .ok_or_else(|| OrbitqError::SingularKilling(algebra.name.clone()))?;
    let basis = UeaBasis::standard(algebra);
    let mut entries = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if inv[(i, j)].abs() > SPARSIFY_EPS {
                entries.push((vec![i as u8, j as u8], Complex64::new(inv[(i, j)], 0.0)));
            }
        }
    }
    Ok(UEAElement::from_terms(&basis, &entries))
}

/// One root: its functional against the Cartan basis, the (normalized) root
/// vector, and the positivity flag.
#[derive(Debug, Clone)]
pub struct RootDatum {
    pub alpha: CVec,
    pub vector: CElement,
    pub positive: bool,
}

/// Cartan basis, roots, and the induced ordered basis
/// negative roots | Cartan | positive roots.
#[derive(Debug)]
pub struct RootSystemData {
    pub cartan_basis: Vec<CElement>,
    pub roots: Vec<RootDatum>,
    pub basis: Arc<UeaBasis>,
}

fn root_sort_key(alpha: &CVec) -> Vec<f64> {
    alpha.iter().flat_map(|c| [c.re, c.im]).collect()
}

fn lex_less(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        if (x - y).abs() > 1e-12 {
            return x.partial_cmp(y).unwrap();
        }
    }
    std::cmp::Ordering::Equal
}

/// Greedy maximal commuting subset of the stabilizer basis, usable as the
/// Cartan input of root_decomposition whenever the stabilizer basis itself
/// contains a maximal torus (true for all catalog orbits). The decomposition
/// rejects the result if it falls short of maximality.
pub fn levi_cartan(orbit: &HyperbolicOrbit) -> Vec<CElement> {
    let algebra = &orbit.algebra;
    let mut chosen: Vec<AlgebraElement> = Vec::new();
    for b in &orbit.l_basis {
        let commutes = chosen.iter().all(|c| {
            algebra.bracket(c, b).coeffs.norm()
                < 1e-9 * (1.0 + b.coeffs.norm()) * (1.0 + c.coeffs.norm())
        });
        if commutes {
            chosen.push(b.clone());
        }
    }
    chosen.iter().map(|a| algebra.complexify(a)).collect()
}

/// Simultaneous eigendecomposition of the Cartan adjoints on the
/// complexified algebra. Positivity follows the grading direction: a root is
/// positive when its value on the alignment element (default X0) has
/// positive real part, with lexicographic tie-breaking inside the
/// stabilizer.
pub fn root_decomposition(
    orbit: &HyperbolicOrbit,
    cartan_basis: &[CElement],
    align: Option<&AlgebraElement>,
) -> Result<RootSystemData> {
    let algebra = &orbit.algebra;
    let d = algebra.d;
    let r = cartan_basis.len();
    if r == 0 || r > d {
        return Err(OrbitqError::NotCartan { reason: format!("{r} Cartan elements supplied") });
    }
    let default_align = orbit.x0.clone();
    let align_elem = align.unwrap_or(&default_align);
    let align_c = algebra.complexify(align_elem);
    for (i, y) in cartan_basis.iter().enumerate() {
        let with_align = algebra.bracket_c(&align_c, y);
        let scale = (1.0 + y.coeffs.norm()) * (1.0 + align_c.coeffs.norm());
        if with_align.coeffs.norm() > 1e-9 * scale {
            return Err(OrbitqError::NotCartan {
                reason: format!(
                    "element {i} does not lie in the stabilizer aligned with the grading direction"
                ),
            });
        }
        for (j, z) in cartan_basis.iter().enumerate().skip(i + 1) {
            let br = algebra.bracket_c(y, z);
            if br.coeffs.norm() > 1e-9 * (1.0 + y.coeffs.norm()) * (1.0 + z.coeffs.norm()) {
                return Err(OrbitqError::NotCartan {
                    reason: format!("elements {i} and {j} do not commute"),
                });
            }
        }
    }

    const PRIMES: [f64; 8] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0];
    let mut combo = CMat::zeros(d, d);
    for (i, y) in cartan_basis.iter().enumerate() {
        let weight = Complex64::new(PRIMES[i % PRIMES.len()].sqrt(), 0.0);
        combo += algebra.ad_matrix_c(y) * weight;
    }
    let scale = 1.0 + combo.norm();
    let tol = 1e-7 * scale;
    let eigs = numerics::complex_eigenvalues_c(&combo)?;
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for lam in eigs {
        match clusters.iter_mut().find(|(c, _)| (lam - *c).norm() <= tol) {
            Some((c, count)) => {
                *c = (*c * (*count as f64) + lam) / (*count as f64 + 1.0);
                *count += 1;
            }
            None => clusters.push((lam, 1)),
        }
    }

    let mut roots: Vec<RootDatum> = Vec::new();
    let mut total_dim = 0usize;
    for (center, mult) in &clusters {
        let shifted = combo.clone() - CMat::identity(d, d) * *center;
        let space = numerics::null_space_c(&shifted, 1e-8);
        if space.len() != *mult {
            return Err(OrbitqError::DefectiveAd {
                reason: format!(
                    "joint eigenvalue {center} has multiplicity {mult} but eigenspace dimension {}",
                    space.len()
                ),
            });
        }
        total_dim += space.len();
        if center.norm() <= tol {
            if space.len() != r {
                return Err(OrbitqError::NotCartan {
                    reason: format!(
                        "centralizer of the Cartan set has dimension {}, expected {r}",
                        space.len()
                    ),
                });
            }
            continue;
        }
        if space.len() != 1 {
            return Err(OrbitqError::NotCartan {
                reason: format!("root space at {center} has dimension {}", space.len()),
            });
        }
        let mut v = space[0].clone();
        let vnorm = v.norm();
        v /= Complex64::new(vnorm, 0.0);
        let mut pivot = 0usize;
        for i in 0..d {
            if v[i].norm() > v[pivot].norm() {
                pivot = i;
            }
        }
        let phase = v[pivot] / Complex64::new(v[pivot].norm(), 0.0);
        v /= phase;
        let vector = algebra.celement(v);

        let mut alpha = CVec::zeros(r);
        let denom = vector.coeffs.dotc(&vector.coeffs);
        for (i, y) in cartan_basis.iter().enumerate() {
            let w = algebra.bracket_c(y, &vector);
            let a = vector.coeffs.dotc(&w.coeffs) / denom;
            let residual = (&w.coeffs - &vector.coeffs * a).norm();
            if residual > 1e-8 * (1.0 + vector.coeffs.norm()) {
                return Err(OrbitqError::DefectiveAd {
                    reason: format!(
                        "candidate root vector is not a joint eigenvector (residual {residual:.3e})"
                    ),
                });
            }
            alpha[i] = a;
        }
        roots.push(RootDatum { alpha, vector, positive: false });
    }
    if total_dim != d {
        return Err(OrbitqError::DefectiveAd {
            reason: format!("joint eigenspaces span dimension {total_dim} of {d}"),
        });
    }

    let mut cartan_mat = CMat::zeros(d, r);
    for (j, y) in cartan_basis.iter().enumerate() {
        cartan_mat.set_column(j, &y.coeffs);
    }
    let (align_coords, _) = numerics::lstsq_c(&cartan_mat, &align_c.coeffs);

    for root in &mut roots {
        let mut value = Complex64::new(0.0, 0.0);
        for i in 0..r {
            value += align_coords[i] * root.alpha[i];
        }
        root.positive = if value.re.abs() > 1e-8 {
            value.re > 0.0
        } else {
            let key = root_sort_key(&root.alpha);
            key.iter().find(|x| x.abs() > 1e-8).map(|x| *x > 0.0).unwrap_or(false)
        };
    }

    for root in &roots {
        let negated = -&root.alpha;
        let paired = roots.iter().any(|other| {
            (&other.alpha - &negated).norm() < 1e-6 && other.positive != root.positive
        });
        if !paired {
            return Err(OrbitqError::NotCartan {
                reason: "positivity assignment is not symmetric under negation".into(),
            });
        }
    }

    let mut negatives: Vec<&RootDatum> = roots.iter().filter(|r| !r.positive).collect();
    let mut positives: Vec<&RootDatum> = roots.iter().filter(|r| r.positive).collect();
    negatives.sort_by(|a, b| lex_less(&root_sort_key(&a.alpha), &root_sort_key(&b.alpha)));
    positives.sort_by(|a, b| lex_less(&root_sort_key(&a.alpha), &root_sort_key(&b.alpha)));
    let mut elements: Vec<CElement> = negatives.iter().map(|r| r.vector.clone()).collect();
    elements.extend(cartan_basis.iter().cloned());
    elements.extend(positives.iter().map(|r| r.vector.clone()));
    let n_neg = negatives.len();
    let n_pos = positives.len();
    let basis = UeaBasis::custom(algebra, elements, n_neg, r, n_pos)?;

    Ok(RootSystemData { cartan_basis: cartan_basis.to_vec(), roots, basis })
}

/// Re-express an element on another ordered basis of the same algebra by
/// substituting each letter.
pub fn change_basis(x: &UEAElement, to: &Arc<UeaBasis>) -> Result<UEAElement> {
    if x.basis.algebra.name != to.algebra.name || x.basis.algebra.d != to.algebra.d {
        return Err(OrbitqError::BasisMismatch {
            left: x.basis.algebra.name.clone(),
            right: to.algebra.name.clone(),
        });
    }
    if x.basis.id == to.id {
        return Ok(UEAElement { basis: Arc::clone(to), terms: x.terms.clone() });
    }
    let d = to.algebra.d;
    let letter_images: Vec<CVec> = (0..d)
        .map(|a| &to.to_coords * &x.basis.elements[a].coeffs)
        .collect();
    let mut terms: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
    for (w, c) in &x.terms {
        let mut partial: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
        partial.insert(Vec::new(), *c);
        for &letter in w {
            let img = &letter_images[letter as usize];
            let mut next: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
            for (prefix, pc) in &partial {
                for (j, mu) in img.iter().enumerate() {
                    if mu.norm() > SPARSIFY_EPS {
                        let mut word = prefix.clone();
                        word.push(j as u8);
                        *next.entry(word).or_insert(Complex64::new(0.0, 0.0)) += pc * mu;
                    }
                }
            }
            partial = next;
        }
        for (word, pc) in partial {
            *terms.entry(word).or_insert(Complex64::new(0.0, 0.0)) += pc;
        }
    }
    terms.retain(|_, c| c.norm() > SPARSIFY_EPS);
    Ok(UEAElement { basis: Arc::clone(to), terms })
}

/// A commutative polynomial in the Cartan variables, stored by multidegree.
#[derive(Debug, Clone)]
pub struct HCPolynomial {
    pub rank: usize,
    pub terms: BTreeMap<Vec<u8>, Complex64>,
}

impl HCPolynomial {
    pub fn evaluate(&self, values: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (md, c) in &self.terms {
            let mut term = *c;
            for (i, &e) in md.iter().enumerate() {
                for _ in 0..e {
                    term *= values[i];
                }
            }
            acc += term;
        }
        acc
    }
}

/// How the Cartan-polynomial part is read off the normal form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HcStrategy {
    /// Project the symmetrized principal symbol letterwise onto the Cartan
    /// block. Default.
    #[default]
    Symmetrized,
    /// Keep the purely-Cartan words of the normal form directly.
    NormalOrdered,
}

/// Projection output: the Cartan polynomial plus the centrality diagnosis of
/// the input.
#[derive(Debug, Clone)]
pub struct HcProjection {
    pub polynomial: HCPolynomial,
    pub central: bool,
    pub centrality_defect: f64,
}

fn multidegree(word: &[u8], d: usize) -> Vec<u8> {
    let mut md = vec![0u8; d];
    for &l in word {
        md[l as usize] += 1;
    }
    md
}

fn permutations(word: &[u8]) -> Vec<Vec<u8>> {
    if word.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..word.len() {
        let mut rest = word.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            let mut w = vec![head];
            w.append(&mut tail);
            out.push(w);
        }
    }
    out
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product::<f64>().max(1.0)
}

/// The commutative principal-symbol expansion of an element: top-degree
/// terms are read off, their symmetrization is subtracted, and the
/// remainder is processed recursively.
fn commutative_symbol(x: &UEAElement) -> Result<BTreeMap<Vec<u8>, Complex64>> {
    let d = x.basis.algebra.d;
    let mut out: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
    let mut work = pbw_normal_form(x);
    while !work.is_zero() {
        let k = work.max_degree();
        let top: Vec<(Vec<u8>, Complex64)> = work
            .terms
            .iter()
            .filter(|(w, _)| w.len() == k)
            .map(|(w, c)| (w.clone(), *c))
            .collect();
        let mut sym_entries: Vec<(Vec<u8>, Complex64)> = Vec::new();
        for (w, c) in &top {
            *out.entry(multidegree(w, d)).or_insert(Complex64::new(0.0, 0.0)) += c;
            let perms = permutations(w);
            let weight = c / Complex64::new(factorial(k), 0.0);
            for p in perms {
                sym_entries.push((p, weight));
            }
        }
        if k == 0 {
            break;
        }
        let sym = UEAElement::from_terms(&x.basis, &sym_entries);
        work = pbw_normal_form(&work.sub(&sym)?);
        if work.max_degree() >= k && !work.is_zero() {
            return Err(OrbitqError::Config(
                "symbol extraction failed to reduce the degree".into(),
            ));
        }
    }
    out.retain(|_, c| c.norm() > SPARSIFY_EPS);
    Ok(out)
}

/// Project an element onto a polynomial in the Cartan variables of the
/// given root decomposition.
pub fn hc_project(
    z: &UEAElement,
    roots: &RootSystemData,
    strategy: HcStrategy,
) -> Result<HcProjection> {
    let zb = change_basis(z, &roots.basis)?;
    let d = roots.basis.algebra.d;
    let r = roots.basis.n_cartan;
    let cartan = roots.basis.cartan_range();

    let mut defect: f64 = 0.0;
    for k in 0..d {
        let gen = UEAElement::generator(&roots.basis, k);
        let br = pbw_normal_form(&uea_bracket(&zb, &gen)?);
        defect = defect.max(br.norm());
    }
    let central = defect < 1e-8;

    let mut poly: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
    match strategy {
        HcStrategy::NormalOrdered => {
            let nf = pbw_normal_form(&zb);
            for (w, c) in &nf.terms {
                if w.iter().all(|&l| cartan.contains(&(l as usize))) {
                    let mut md = vec![0u8; r];
                    for &l in w {
                        md[l as usize - roots.basis.n_neg] += 1;
                    }
                    *poly.entry(md).or_insert(Complex64::new(0.0, 0.0)) += c;
                }
            }
        }
        HcStrategy::Symmetrized => {
            let symbol = commutative_symbol(&zb)?;
            for (md_full, c) in &symbol {
                let outside: u32 = md_full
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !cartan.contains(i))
                    .map(|(_, &e)| e as u32)
                    .sum();
                if outside == 0 {
                    let md: Vec<u8> = cartan.clone().map(|i| md_full[i]).collect();
                    *poly.entry(md).or_insert(Complex64::new(0.0, 0.0)) += c;
                }
            }
        }
    }
    poly.retain(|_, c| c.norm() > SPARSIFY_EPS);
    Ok(HcProjection {
        polynomial: HCPolynomial { rank: r, terms: poly },
        central,
        centrality_defect: defect,
    })
}

/// The character value: the projected polynomial evaluated on phi of the
/// Cartan basis.
pub fn infinitesimal_character(
    z: &UEAElement,
    orbit: &HyperbolicOrbit,
    roots: &RootSystemData,
    strategy: HcStrategy,
) -> Result<Complex64> {
    let proj = hc_project(z, roots, strategy)?;
    let values: Vec<Complex64> = roots.cartan_basis.iter().map(|y| orbit.phi(y)).collect();
    Ok(proj.polynomial.evaluate(&values))
}

/// The character evaluated through a conjugated Cartan set at a point of the
/// orbit: the Cartan basis and the alignment direction are both moved by g,
/// the decomposition is rebuilt, and the polynomial is evaluated on the
/// Hamiltonians at g. Independence of g is the fiber-constancy statement.
pub fn infchar_at_point(
    z: &UEAElement,
    orbit: &HyperbolicOrbit,
    roots: &RootSystemData,
    g: &crate::liealg::GroupElement,
    strategy: HcStrategy,
) -> Result<Complex64> {
    let algebra = &orbit.algebra;
    let moved_cartan: Vec<CElement> = roots
        .cartan_basis
        .iter()
        .map(|y| algebra.adjoint_action_c(g, y))
        .collect::<Result<_>>()?;
    let align = algebra.adjoint_action(g, &orbit.x0)?;
    let moved_roots = root_decomposition(orbit, &moved_cartan, Some(&align))?;
    let proj = hc_project(z, &moved_roots, strategy)?;
    let values: Vec<Complex64> = moved_cartan
        .iter()
        .map(|y| orbit.hamiltonian(y, g))
        .collect::<Result<_>>()?;
    Ok(proj.polynomial.evaluate(&values))
}
