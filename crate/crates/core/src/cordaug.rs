//! Augmentation candidates of the framed cord algebra of a braid closure:
//! broken-cord evaluation through the meridian operators, the finite list
//! of relations that certifies a candidate, index sets, and the dilation
//! action with its canonical orbit representatives.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::braid::{self, BraidWord, ComponentMap, MeridianWord};
use crate::error::{Error, Result};
use crate::exactfield::{FieldSpec, Scalar};
use crate::exactlinalg::{is_zero_vec, unit, Matrix, Vector};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AugCandidate {
    pub field: FieldSpec,
    pub n: usize,
    pub r: usize,
    /// strand ↦ component, 0-based
    pub component_map: Vec<usize>,
    /// R[i][j] = ε(γ_ij)
    pub r_mat: Matrix,
    pub lambda: Vec<Scalar>,
    pub mu: Vec<Scalar>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugCandidateJson {
    pub field: String,
    pub n: usize,
    pub r: usize,
    pub component_map: Vec<usize>,
    #[serde(rename = "R")]
    pub r_mat: Vec<Vec<String>>,
    pub lambda: Vec<String>,
    pub mu: Vec<String>,
}

impl AugCandidate {
    pub fn new(
        field: FieldSpec,
        component_map: Vec<usize>,
        r_mat: Matrix,
        lambda: Vec<Scalar>,
        mu: Vec<Scalar>,
    ) -> Result<Self> {
        let n = component_map.len();
        let r = lambda.len();
        if r_mat.rows() != n || r_mat.cols() != n {
            return Err(Error::Dimension(format!(
                "R is {}x{}, expected {n}x{n}",
                r_mat.rows(),
                r_mat.cols()
            )));
        }
        if mu.len() != r || component_map.iter().any(|&s| s >= r) {
            return Err(Error::Dimension("component data".into()));
        }
        if lambda.iter().chain(&mu).any(|x| x.is_zero()) {
            return Err(Error::Input("lambda and mu must be units".into()));
        }
        Ok(AugCandidate {
            field,
            n,
            r,
            component_map,
            r_mat,
            lambda,
            mu,
        })
    }

    pub fn comp(&self, i: usize) -> usize {
        self.component_map[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> &Scalar {
        self.r_mat.get(i, j)
    }

    pub fn to_json(&self) -> AugCandidateJson {
        AugCandidateJson {
            field: self.field.to_string(),
            n: self.n,
            r: self.r,
            component_map: self.component_map.iter().map(|s| s + 1).collect(),
            r_mat: self.r_mat.to_strings(),
            lambda: self.lambda.iter().map(|x| x.to_string()).collect(),
            mu: self.mu.iter().map(|x| x.to_string()).collect(),
        }
    }

    pub fn from_json(j: &AugCandidateJson) -> Result<Self> {
        let field: FieldSpec = j.field.parse()?;
        if j.component_map.contains(&0) {
            return Err(Error::Input("component labels are 1-based".into()));
        }
        let cm: Vec<usize> = j.component_map.iter().map(|s| s - 1).collect();
        let r_mat = Matrix::parse_strings(field, &j.r_mat)?;
        let parse = |v: &[String]| -> Result<Vec<Scalar>> {
            v.iter().map(|s| field.parse_scalar(s)).collect()
        };
        let c = AugCandidate::new(field, cm, r_mat, parse(&j.lambda)?, parse(&j.mu)?)?;
        if c.n != j.n || c.r != j.r {
            return Err(Error::Input("n or r disagrees with the matrix data".into()));
        }
        Ok(c)
    }
}

/// Everything about a braid that the relation checks need, computed once.
#[derive(Debug, Clone)]
pub struct LinkData {
    pub braid: BraidWord,
    pub components: ComponentMap,
    pub tau: Vec<usize>,
    pub wirtinger: Vec<(MeridianWord, MeridianWord)>,
    pub segments: Vec<MeridianWord>,
    pub longitudes: Vec<MeridianWord>,
}

impl LinkData {
    /// Fails with NonMonotoneComponents; use `braid::monotonize` first.
    pub fn new(b: &BraidWord) -> Result<Self> {
        let components = braid::component_map(b)?;
        let longitudes = (0..components.r)
            .map(|s| braid::longitude_word(b, s))
            .collect();
        Ok(LinkData {
            braid: b.clone(),
            tau: braid::permutation(b),
            wirtinger: braid::wirtinger_relations(b),
            segments: braid::segment_words(b),
            longitudes,
            components,
        })
    }

    pub fn n(&self) -> usize {
        self.braid.n
    }

    pub fn r(&self) -> usize {
        self.components.r
    }

    pub fn is_base(&self, i: usize) -> bool {
        self.components.base_strand[self.components.map[i]] == i
    }
}

/// N_t = Id − R_t e_tᵀ, and its inverse Id + μ⁻¹ R_t e_tᵀ.
pub fn meridian_operator(c: &AugCandidate, t: usize, exponent: i8) -> Matrix {
    let f = c.field;
    let col = c.r_mat.column(t);
    let mut m = Matrix::identity(f, c.n);
    let coef = if exponent > 0 {
        f.one().neg()
    } else {
        c.mu[c.comp(t)].inv().expect("mu is a unit")
    };
    for (i, x) in col.iter().enumerate() {
        let v = m.get(i, t).add(&x.mul(&coef));
        m.set(i, t, v);
    }
    m
}

/// Cached meridian operators for repeated loop evaluation.
#[derive(Clone)]
pub struct Operators {
    plus: Vec<Matrix>,
    minus: Vec<Matrix>,
    field: FieldSpec,
    n: usize,
}

impl Operators {
    pub fn new(c: &AugCandidate) -> Self {
        Operators {
            plus: (0..c.n).map(|t| meridian_operator(c, t, 1)).collect(),
            minus: (0..c.n).map(|t| meridian_operator(c, t, -1)).collect(),
            field: c.field,
            n: c.n,
        }
    }

    pub fn loop_matrix(&self, h: &MeridianWord) -> Matrix {
        let mut acc = Matrix::identity(self.field, self.n);
        for &(t, e) in &h.letters {
            acc = acc.mul(if e > 0 { &self.plus[t] } else { &self.minus[t] });
        }
        acc
    }

    /// loop_matrix(h)·v without forming the product matrix.
    pub fn apply(&self, h: &MeridianWord, v: &[Scalar]) -> Vector {
        let mut out = v.to_vec();
        for &(t, e) in h.letters.iter().rev() {
            out = if e > 0 { &self.plus[t] } else { &self.minus[t] }.mul_vec(&out);
        }
        out
    }
}

pub fn loop_matrix(c: &AugCandidate, h: &MeridianWord) -> Matrix {
    Operators::new(c).loop_matrix(h)
}

/// ε of the broken cord leaving strand i, running around h, ending at j.
pub fn eval_broken_cord(c: &AugCandidate, i: usize, h: &MeridianWord, j: usize) -> Scalar {
    let col = Operators::new(c).apply(h, &c.r_mat.column(j));
    col[i].clone()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationFailure {
    pub family: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub failures: Vec<RelationFailure>,
    /// relation families that were checked, for transparency
    pub families: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Checker<'a> {
    c: &'a AugCandidate,
    link: &'a LinkData,
    ops: Operators,
    stop_early: bool,
    failures: Vec<RelationFailure>,
}

impl Checker<'_> {
    fn fail(&mut self, family: &str, detail: String) -> bool {
        self.failures.push(RelationFailure {
            family: family.into(),
            detail,
        });
        self.stop_early
    }

    fn normalization(&mut self) -> bool {
        let f = self.c.field;
        for i in 0..self.c.n {
            let want = f.one().sub(&self.c.mu[self.c.comp(i)]);
            if self.c.entry(i, i) != &want {
                let d = format!(
                    "R[{0}][{0}] = {1}, expected {want}",
                    i + 1,
                    self.c.entry(i, i)
                );
                if self.fail("normalization", d) {
                    return true;
                }
            }
        }
        false
    }

    fn meridian(&mut self) -> bool {
        let c = self.c;
        for t in 0..c.n {
            let mu = &c.mu[c.comp(t)];
            let m = MeridianWord::gen(t);
            // left: ε(m_t γ_tj) = μ ε(γ_tj)
            for j in 0..c.n {
                let col = self.ops.apply(&m, &c.r_mat.column(j));
                if col[t] != mu.mul(c.entry(t, j))
                    && self.fail(
                        "meridian-left",
                        format!("strand {}, column {}", t + 1, j + 1),
                    )
                {
                    return true;
                }
            }
            // right: ε(γ_it m_t) = μ ε(γ_it)
            let col = self.ops.apply(&m, &c.r_mat.column(t));
            for i in 0..c.n {
                if col[i] != mu.mul(c.entry(i, t))
                    && self.fail("meridian-right", format!("row {}, strand {}", i + 1, t + 1))
                {
                    return true;
                }
            }
        }
        false
    }

    /// Longitude relations involving component s only.
    fn longitude(&mut self, s: usize) -> bool {
        let c = self.c;
        let lam = &c.lambda[s];
        let lam_inv = lam.inv().expect("lambda is a unit");
        let b = self.link.components.base_strand[s];
        let lr = self.ops.loop_matrix(&self.link.longitudes[s]).mul(&c.r_mat);
        for j in 0..c.n {
            if lr.get(b, j) != &lam.mul(c.entry(b, j))
                && self.fail(
                    "longitude-left",
                    format!("component {}, column {}", s + 1, j + 1),
                )
            {
                return true;
            }
        }
        for i in 0..c.n {
            if lr.get(i, b) != &lam.mul(c.entry(i, b))
                && self.fail(
                    "longitude-right",
                    format!("component {}, row {}", s + 1, i + 1),
                )
            {
                return true;
            }
        }
        for i in self.link.components.strands_of(s) {
            let kappa = if self.link.is_base(i) {
                lam_inv.clone()
            } else {
                c.field.one()
            };
            let ti = self.link.tau[i];
            let seg = self.ops.loop_matrix(&self.link.segments[i]);
            let sr = seg.mul(&c.r_mat);
            for j in 0..c.n {
                if c.entry(ti, j) != &kappa.mul(sr.get(i, j)) {
                    let d = format!("strand {} to {}, column {}", i + 1, ti + 1, j + 1);
                    if self.fail("segment-row", d) {
                        return true;
                    }
                }
            }
            let moved = seg.mul_vec(&c.r_mat.column(ti));
            for k in 0..c.n {
                if c.entry(k, i) != &kappa.mul(&moved[k]) {
                    let d = format!("strand {} to {}, row {}", i + 1, ti + 1, k + 1);
                    if self.fail("segment-column", d) {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn skein(&mut self) -> bool {
        let c = self.c;
        for t in 0..c.n {
            let nr = self.ops.plus[t].mul(&c.r_mat);
            for i in 0..c.n {
                for j in 0..c.n {
                    let rhs = nr.get(i, j).add(&c.entry(i, t).mul(c.entry(t, j)));
                    if c.entry(i, j) != &rhs {
                        let d = format!("({}, {}, {})", i + 1, t + 1, j + 1);
                        if self.fail("skein", d) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    fn wirtinger(&mut self) -> bool {
        let c = self.c;
        for (i, (lhs, rhs)) in self.link.wirtinger.iter().enumerate() {
            let a = self.ops.loop_matrix(lhs).mul(&c.r_mat);
            let b = self.ops.loop_matrix(rhs).mul(&c.r_mat);
            if a != b && self.fail("wirtinger", format!("meridian {}", i + 1)) {
                return true;
            }
        }
        false
    }
}

fn link_matches(c: &AugCandidate, link: &LinkData) -> Option<RelationFailure> {
    if c.n != link.n() || c.r != link.r() || c.component_map != link.components.map {
        Some(RelationFailure {
            family: "shape".into(),
            detail: format!(
                "candidate has n={}, r={}, components {:?}; braid closure has n={}, r={}, components {:?}",
                c.n,
                c.r,
                c.component_map,
                link.n(),
                link.r(),
                link.components.map
            ),
        })
    } else {
        None
    }
}

pub const FAMILIES: [&str; 5] = [
    "normalization",
    "meridian",
    "longitude",
    "skein",
    "wirtinger",
];

pub fn check_relations_with(c: &AugCandidate, link: &LinkData) -> ValidationReport {
    let families = FAMILIES.iter().map(|s| s.to_string()).collect();
    if let Some(f) = link_matches(c, link) {
        return ValidationReport {
            failures: vec![f],
            families,
        };
    }
    let mut ck = Checker {
        c,
        link,
        ops: Operators::new(c),
        stop_early: false,
        failures: Vec::new(),
    };
    ck.normalization();
    ck.meridian();
    for s in 0..c.r {
        ck.longitude(s);
    }
    ck.skein();
    ck.wirtinger();
    ValidationReport {
        failures: ck.failures,
        families,
    }
}

pub fn check_relations(c: &AugCandidate, b: &BraidWord) -> ValidationReport {
    match LinkData::new(b) {
        Ok(link) => check_relations_with(c, &link),
        Err(e) => ValidationReport {
            failures: vec![RelationFailure {
                family: "shape".into(),
                detail: e.to_string(),
            }],
            families: Vec::new(),
        },
    }
}

/// The λ-independent relations (normalization, meridian, skein, Wirtinger),
/// stopping at the first failure. Used by the enumerator.
pub fn passes_lambda_free(c: &AugCandidate, link: &LinkData) -> bool {
    if link_matches(c, link).is_some() {
        return false;
    }
    let mut ck = Checker {
        c,
        link,
        ops: Operators::new(c),
        stop_early: true,
        failures: Vec::new(),
    };
    !(ck.normalization() || ck.meridian() || ck.skein() || ck.wirtinger())
}

/// The values of λ_s for which component s's longitude relations hold,
/// given everything else in c. Other λ entries of c are ignored.
pub fn admissible_lambdas(c: &AugCandidate, link: &LinkData, s: usize) -> Result<Vec<Scalar>> {
    let mut out = Vec::new();
    let ops = Operators::new(c);
    for lam in c.field.enumerate(true)? {
        let mut trial = c.clone();
        trial.lambda[s] = lam.clone();
        let mut ck = Checker {
            c: &trial,
            link,
            ops: ops.clone(),
            stop_early: true,
            failures: Vec::new(),
        };
        if !ck.longitude(s) {
            out.push(lam);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSets {
    pub i_prime: BTreeSet<usize>,
    pub i_dprime: BTreeSet<usize>,
    pub j_prime: BTreeSet<usize>,
    pub j_dprime: BTreeSet<usize>,
}

pub fn index_sets(c: &AugCandidate) -> IndexSets {
    let mut s = IndexSets {
        i_prime: BTreeSet::new(),
        i_dprime: BTreeSet::new(),
        j_prime: BTreeSet::new(),
        j_dprime: BTreeSet::new(),
    };
    for i in 0..c.n {
        if is_zero_vec(&c.r_mat.row(i)) {
            s.i_dprime.insert(i);
        } else {
            s.i_prime.insert(i);
        }
        if is_zero_vec(&c.r_mat.column(i)) {
            s.j_dprime.insert(i);
        } else {
            s.j_prime.insert(i);
        }
    }
    s
}

pub fn is_generic(c: &AugCandidate) -> bool {
    let s = index_sets(c);
    s.i_dprime.is_empty() && s.j_dprime.is_empty()
}

/// Components whose strands all have zero row and zero column.
pub fn degenerate_components(c: &AugCandidate) -> Vec<usize> {
    let s = index_sets(c);
    (0..c.r)
        .filter(|&k| {
            (0..c.n)
                .filter(|&i| c.comp(i) == k)
                .all(|i| s.i_dprime.contains(&i) && s.j_dprime.contains(&i))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DilationParam {
    pub d: Vec<Scalar>,
}

impl DilationParam {
    pub fn new(d: Vec<Scalar>) -> Result<Self> {
        if d.iter().any(|x| x.is_zero()) {
            return Err(Error::Input("dilation entries must be units".into()));
        }
        Ok(DilationParam { d })
    }

    pub fn identity(field: FieldSpec, r: usize) -> Self {
        DilationParam {
            d: vec![field.one(); r],
        }
    }

    pub fn is_reduced(&self) -> bool {
        self.d.first().is_none_or(|x| x.is_one())
    }

    pub fn compose(&self, o: &DilationParam) -> Self {
        DilationParam {
            d: self.d.iter().zip(&o.d).map(|(a, b)| a.mul(b)).collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        DilationParam {
            d: self.d.iter().map(|a| a.inv().expect("unit")).collect(),
        }
    }
}

/// R′[i][j] = (d_{c(i)}/d_{c(j)}) R[i][j]; λ and μ unchanged.
pub fn apply_dilation(c: &AugCandidate, d: &DilationParam) -> AugCandidate {
    let mut out = c.clone();
    for i in 0..c.n {
        for j in 0..c.n {
            let (si, sj) = (c.comp(i), c.comp(j));
            if si == sj {
                continue;
            }
            let f = d.d[si].mul(&d.d[sj].inv().expect("unit"));
            out.r_mat.set(i, j, c.entry(i, j).mul(&f));
        }
    }
    out
}

/// All reduced dilation parameters (d_1 = 1) over a prime field.
pub fn reduced_dilations(field: FieldSpec, r: usize) -> Result<Vec<DilationParam>> {
    let units = field.enumerate(true)?;
    let mut out = vec![vec![field.one()]];
    for _ in 1..r {
        let mut next = Vec::new();
        for d in &out {
            for u in &units {
                let mut e = d.clone();
                e.push(u.clone());
                next.push(e);
            }
        }
        out = next;
    }
    if r == 0 {
        out = vec![vec![]];
    }
    Ok(out.into_iter().map(|d| DilationParam { d }).collect())
}

/// Orbit representative under reduced dilations.
///
/// Components are joined when some nonzero mixed entry links them. Starting
/// from component 1, repeatedly take the smallest unprocessed component
/// linked to a processed one and scale it so that the first nonzero
/// row-major entry linking it to the processed set becomes 1. A component
/// linked to nothing processed starts a new root with d = 1.
pub fn canonical_form(c: &AugCandidate) -> (AugCandidate, DilationParam) {
    let f = c.field;
    let mut d: Vec<Option<Scalar>> = vec![None; c.r];
    if c.r == 0 {
        return (c.clone(), DilationParam { d: vec![] });
    }
    d[0] = Some(f.one());
    let mut done = 1;
    while done < c.r {
        let mut pick: Option<(usize, Scalar)> = None;
        'outer: for s in 0..c.r {
            if d[s].is_some() {
                continue;
            }
            for i in 0..c.n {
                for j in 0..c.n {
                    let x = c.entry(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    let (si, sj) = (c.comp(i), c.comp(j));
                    if si == s && sj != s {
                        if let Some(dj) = &d[sj] {
                            // (d_s / d_j) x = 1
                            pick = Some((s, dj.mul(&x.inv().expect("nonzero"))));
                            break 'outer;
                        }
                    } else if sj == s && si != s {
                        if let Some(di) = &d[si] {
                            // (d_i / d_s) x = 1
                            pick = Some((s, di.mul(x)));
                            break 'outer;
                        }
                    }
                }
            }
        }
        let (s, v) = pick.unwrap_or_else(|| {
            let s = (0..c.r)
                .find(|&s| d[s].is_none())
                .expect("unprocessed component");
            (s, f.one())
        });
        d[s] = Some(v);
        done += 1;
    }
    let d = DilationParam {
        d: d.into_iter().map(|x| x.expect("assigned")).collect(),
    };
    (apply_dilation(c, &d), d)
}

/// Column R_t as a vector.
pub fn column(c: &AugCandidate, t: usize) -> Vector {
    c.r_mat.column(t)
}

/// e_t as a vector in k^n.
pub fn basis_vector(c: &AugCandidate, t: usize) -> Vector {
    unit(c.field, c.n, t)
}
