//! Rank-one simple sheaves on a braid closure in combinatorial form: a
//! representation of the link group by meridian matrices M_i, one stalk
//! hyperplane W_i per disk strand, and a list of degenerate summands.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::braid::{self, BraidWord, MeridianWord};
use crate::error::{Error, Result};
use crate::exactfield::{FieldSpec, Scalar};
use crate::exactlinalg::{
    enumerate_projective, enumerate_vectors, is_zero_vec, Matrix, Subspace, Vector,
};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DegenerateSummand {
    pub component: usize,
    pub alpha: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SheafData {
    pub field: FieldSpec,
    pub braid: BraidWord,
    pub dim: usize,
    pub m: Vec<Matrix>,
    pub w: Vec<Subspace>,
    pub deg: Vec<DegenerateSummand>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegenerateJson {
    pub component: usize,
    pub alpha: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheafJson {
    pub field: String,
    pub braid: BraidWord,
    #[serde(rename = "N")]
    pub dim: usize,
    #[serde(rename = "M")]
    pub m: Vec<Vec<Vec<String>>>,
    /// basis vectors of each W_i as matrix columns
    #[serde(rename = "W")]
    pub w: Vec<Vec<Vec<String>>>,
    pub deg: Vec<DegenerateJson>,
}

impl SheafData {
    pub fn to_json(&self) -> SheafJson {
        SheafJson {
            field: self.field.to_string(),
            braid: self.braid.clone(),
            dim: self.dim,
            m: self.m.iter().map(|x| x.to_strings()).collect(),
            w: self.w.iter().map(|x| x.basis().to_strings()).collect(),
            deg: self
                .deg
                .iter()
                .map(|d| DegenerateJson {
                    component: d.component + 1,
                    alpha: d.alpha.to_string(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &SheafJson) -> Result<Self> {
        let field: FieldSpec = j.field.parse()?;
        let braid = BraidWord::new(j.braid.n, j.braid.word.clone())?;
        if j.m.len() != braid.n || j.w.len() != braid.n {
            return Err(Error::Input("need one M and one W per strand".into()));
        }
        let n = j.dim;
        let m =
            j.m.iter()
                .map(|x| {
                    let mat = if n == 0 {
                        Matrix::zeros(field, 0, 0)
                    } else {
                        Matrix::parse_strings(field, x)?
                    };
                    if mat.rows() != n || mat.cols() != n {
                        return Err(Error::Dimension("meridian matrix is not N x N".into()));
                    }
                    Ok(mat)
                })
                .collect::<Result<Vec<_>>>()?;
        let w =
            j.w.iter()
                .map(|x| {
                    let b = Matrix::parse_strings(field, x)?;
                    if !x.is_empty() && b.rows() != n {
                        return Err(Error::Dimension(
                            "W basis vectors must have length N".into(),
                        ));
                    }
                    let cols: Vec<Vector> = (0..b.cols()).map(|c| b.column(c)).collect();
                    Ok(Subspace::span(field, n, &cols))
                })
                .collect::<Result<Vec<_>>>()?;
        let mut deg = j
            .deg
            .iter()
            .map(|d| {
                if d.component == 0 {
                    return Err(Error::Input("component labels are 1-based".into()));
                }
                Ok(DegenerateSummand {
                    component: d.component - 1,
                    alpha: field.parse_scalar(&d.alpha)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        deg.sort();
        Ok(SheafData {
            field,
            braid,
            dim: n,
            m,
            w,
            deg,
        })
    }

    pub fn n(&self) -> usize {
        self.braid.n
    }

    pub fn is_deg_strand(&self, i: usize) -> bool {
        let cm = braid::cycle_labels(&self.braid);
        self.deg.iter().any(|d| d.component == cm.map[i])
    }

    pub fn full_space(&self) -> Subspace {
        Subspace::full(self.field, self.dim)
    }
}

/// Evaluates meridian words through ρ(m_i) = M_i.
pub struct Rep<'a> {
    m: &'a [Matrix],
    minv: Vec<Matrix>,
    field: FieldSpec,
    dim: usize,
}

impl<'a> Rep<'a> {
    /// None if some M_i is singular.
    pub fn new(f: &'a SheafData) -> Option<Self> {
        Self::from_matrices(f.field, f.dim, &f.m)
    }

    pub fn from_matrices(field: FieldSpec, dim: usize, m: &'a [Matrix]) -> Option<Self> {
        let minv = m.iter().map(|x| x.inverse()).collect::<Option<Vec<_>>>()?;
        Some(Rep {
            m,
            minv,
            field,
            dim,
        })
    }

    pub fn eval(&self, w: &MeridianWord) -> Matrix {
        let mut acc = Matrix::identity(self.field, self.dim);
        for &(t, e) in &w.letters {
            acc = acc.mul(if e > 0 { &self.m[t] } else { &self.minv[t] });
        }
        acc
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheafReport {
    pub failures: Vec<String>,
}

impl SheafReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn validate(f: &SheafData) -> SheafReport {
    let mut out = Vec::new();
    let n = f.n();
    if f.m.len() != n || f.w.len() != n {
        out.push(format!(
            "shape: {} meridian matrices and {} stalks for {} strands",
            f.m.len(),
            f.w.len(),
            n
        ));
        return SheafReport { failures: out };
    }
    for i in 0..n {
        if f.m[i].rows() != f.dim || f.m[i].cols() != f.dim || f.w[i].ambient_dim() != f.dim {
            out.push(format!(
                "shape: strand {} data is not in dimension {}",
                i + 1,
                f.dim
            ));
            return SheafReport { failures: out };
        }
    }
    let cm = braid::cycle_labels(&f.braid);
    for (k, d) in f.deg.iter().enumerate() {
        if d.component >= cm.r {
            out.push(format!("degenerate: no component {}", d.component + 1));
        }
        if d.alpha.is_zero() {
            out.push(format!(
                "degenerate: component {} has zero monodromy",
                d.component + 1
            ));
        }
        if f.deg[..k].iter().any(|e| e.component == d.component) {
            out.push(format!(
                "degenerate: component {} listed twice",
                d.component + 1
            ));
        }
    }
    let Some(rep) = Rep::new(f) else {
        out.push("invertibility: some meridian matrix is singular".into());
        return SheafReport { failures: out };
    };
    for (i, (lhs, rhs)) in braid::wirtinger_relations(&f.braid).iter().enumerate() {
        if rep.eval(lhs) != rep.eval(rhs) {
            out.push(format!("wirtinger: relation at meridian {} fails", i + 1));
        }
    }
    for i in 0..n {
        for v in f.w[i].basis_vectors() {
            if f.m[i].mul_vec(&v) != v {
                out.push(format!(
                    "meridian-triviality: M{0} moves a vector of W{0}",
                    i + 1
                ));
                break;
            }
        }
        let want = if f.is_deg_strand(i) {
            f.dim
        } else {
            f.dim.wrapping_sub(1)
        };
        if f.w[i].dim() != want {
            out.push(format!(
                "simpleness: W{} has dimension {}, expected {}",
                i + 1,
                f.w[i].dim(),
                want as isize
            ));
        }
    }
    let tau = braid::permutation(&f.braid);
    let segs = braid::segment_words(&f.braid);
    for i in 0..n {
        let moved = f.w[tau[i]].map(&rep.eval(&segs[i]));
        if moved != f.w[i] {
            out.push(format!(
                "compatibility: transport of W{} does not match W{}",
                tau[i] + 1,
                i + 1
            ));
        }
    }
    SheafReport { failures: out }
}

pub fn global_sections(f: &SheafData) -> Subspace {
    let mut g = f.full_space();
    for w in &f.w {
        g = g.intersect(w).expect("stalks share the ambient space");
    }
    g
}

/// V₀ = Σ im(Id − M_t).
pub fn stabilized_space(f: &SheafData) -> Subspace {
    let id = Matrix::identity(f.field, f.dim);
    let mut v0 = Subspace::zero(f.field, f.dim);
    for m in &f.m {
        v0 = v0.sum(&id.sub(m).image()).expect("same ambient");
    }
    v0
}

/// The subobject on V₀, written in the echelon basis of V₀, together with
/// the inclusion matrix (columns = that basis).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stabilized {
    pub v0: Subspace,
    pub inclusion: Matrix,
    pub sheaf: SheafData,
}

/// Restrict a map that preserves `sub` to it, in the echelon basis.
pub fn restrict(m: &Matrix, sub: &Subspace) -> Matrix {
    let cols: Vec<Vector> = sub
        .basis_vectors()
        .iter()
        .map(|b| {
            sub.coordinates(&m.mul_vec(b))
                .expect("subspace is invariant under the map")
        })
        .collect();
    Matrix::from_columns(m.field(), sub.dim(), &cols)
}

/// A subspace of `sub`, rewritten in the echelon coordinates of `sub`.
pub fn in_coordinates(w: &Subspace, sub: &Subspace) -> Subspace {
    let inter = w.intersect(sub).expect("same ambient");
    let cols: Vec<Vector> = inter
        .basis_vectors()
        .iter()
        .map(|v| sub.coordinates(v).expect("inside"))
        .collect();
    Subspace::span(w.field(), sub.dim(), &cols)
}

pub fn once_stabilized(f: &SheafData) -> Stabilized {
    let v0 = stabilized_space(f);
    let m = f.m.iter().map(|x| restrict(x, &v0)).collect();
    let w = f.w.iter().map(|x| in_coordinates(x, &v0)).collect();
    Stabilized {
        inclusion: v0.basis().clone(),
        sheaf: SheafData {
            field: f.field,
            braid: f.braid.clone(),
            dim: v0.dim(),
            m,
            w,
            deg: f.deg.clone(),
        },
        v0,
    }
}

/// Stable means Γ = 0, V₀ = V, and no degenerate summand.
pub fn is_stable(f: &SheafData) -> bool {
    f.deg.is_empty() && global_sections(f).is_zero() && stabilized_space(f).is_full()
}

/// A constant-sheaf quotient: a functional vanishing on V₀ and nonzero on
/// every W_i.
pub fn constant_quotient(f: &SheafData) -> Option<Vector> {
    let v0 = stabilized_space(f);
    if v0.is_full() {
        return None;
    }
    let ann = v0.annihilator();
    let hits_all = |phi: &Vector| {
        f.w.iter().all(|w| {
            w.basis_vectors()
                .iter()
                .any(|b| !crate::exactlinalg::dot_in(f.field, phi, b).is_zero())
        })
    };
    match f.field {
        FieldSpec::Prime(_) => {
            let coeffs = enumerate_projective(f.field, ann.rows()).ok()?;
            coeffs
                .iter()
                .map(|c| ann.vec_mul(c))
                .find(|phi| hits_all(phi))
        }
        FieldSpec::Rationals => {
            // over an infinite field a finite union of proper subspaces of
            // (V/V₀)* never covers it, so a witness exists iff every W_i
            // survives in the quotient; search small combinations for it
            if !f.w.iter().all(|w| !v0.contains_subspace(w)) {
                return None;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            for _ in 0..4096 {
                let c: Vector = (0..ann.rows())
                    .map(|_| f.field.from_i64(rng.gen_range(-5..=5)))
                    .collect();
                let phi = ann.vec_mul(&c);
                if hits_all(&phi) {
                    return Some(phi);
                }
            }
            None
        }
    }
}

/// Common fixed space of all meridians.
pub fn fixed_space(f: &SheafData) -> Subspace {
    let id = Matrix::identity(f.field, f.dim);
    let mut fix = f.full_space();
    for m in &f.m {
        fix = fix.intersect(&m.sub(&id).kernel()).expect("same ambient");
    }
    fix
}

/// A split summand: a fixed vector v outside some stalks with an invariant
/// complementary hyperplane compatible with the stalks. Returns (v, φ) with
/// the complement = ker φ.
pub fn split_trivial_summand(f: &SheafData) -> Option<(Vector, Vector)> {
    let fix = fixed_space(f);
    if fix.is_zero() {
        return None;
    }
    let candidates: Vec<Vector> = match f.field {
        FieldSpec::Prime(_) => enumerate_projective(f.field, fix.dim())
            .ok()?
            .iter()
            .map(|c| fix.basis().mul_vec(c))
            .collect(),
        // heuristic over Q: basis of the fixed space only
        FieldSpec::Rationals => fix.basis_vectors(),
    };
    let id = Matrix::identity(f.field, f.dim);
    for v in candidates {
        let outside: Vec<usize> = (0..f.n()).filter(|&i| !f.w[i].contains(&v)).collect();
        if outside.is_empty() {
            continue;
        }
        // unknown φ as a column; rows of the system act on it
        let mut rows: Vec<Vector> = vec![v.clone()];
        let mut rhs: Vector = vec![f.field.one()];
        for m in &f.m {
            let d = m.sub(&id);
            for c in 0..f.dim {
                rows.push(d.column(c));
                rhs.push(f.field.zero());
            }
        }
        for &i in &outside {
            for b in f.w[i].basis_vectors() {
                rows.push(b);
                rhs.push(f.field.zero());
            }
        }
        let sys = Matrix::from_rows(f.field, rows).expect("uniform rows");
        if let Some(phi) = sys.solve(&rhs) {
            return Some((v, phi));
        }
    }
    None
}

/// Reducedness of the matrix part alone (degenerate list ignored).
pub fn is_reduced_part(f: &SheafData) -> bool {
    global_sections(f).is_zero()
        && constant_quotient(f).is_none()
        && split_trivial_summand(f).is_none()
}

pub fn is_reduced(f: &SheafData) -> bool {
    f.deg.is_empty() && is_reduced_part(f)
}

fn sampled_combinations(
    field: FieldSpec,
    basis: &[Vector],
) -> Box<dyn Iterator<Item = Vector> + '_> {
    let d = basis.len();
    let len = basis.first().map_or(0, |b| b.len());
    let combine = move |c: &[Scalar]| -> Vector {
        let mut acc = vec![field.zero(); len];
        for (x, b) in c.iter().zip(basis) {
            if !x.is_zero() {
                acc = acc.iter().zip(b).map(|(a, y)| a.add(&x.mul(y))).collect();
            }
        }
        acc
    };
    let exhaustive = match field {
        FieldSpec::Prime(p) => (p as f64).powi(d as i32) <= 65536.0,
        FieldSpec::Rationals => false,
    };
    if exhaustive {
        let all = enumerate_vectors(field, d).expect("prime field");
        Box::new(all.into_iter().map(move |c| combine(&c)))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let firsts: Vec<Vector> = basis.to_vec();
        Box::new(firsts.into_iter().chain((0..8192).map(move |_| {
            let c: Vector = (0..d)
                .map(|_| match field {
                    FieldSpec::Prime(p) => field.from_i64(rng.gen_range(0..p as i64)),
                    FieldSpec::Rationals => field.from_i64(rng.gen_range(-4..=4)),
                })
                .collect();
            combine(&c)
        })))
    }
}

/// An invertible P with P M_i^F = M_i^G P and P(W_i^F) = W_i^G, if one is
/// found. Exhaustive over small solution spaces of the intertwiner system,
/// deterministic sampling otherwise.
pub fn isomorphic(f: &SheafData, g: &SheafData) -> Option<Matrix> {
    if f.field != g.field
        || f.braid != g.braid
        || f.dim != g.dim
        || f.deg != g.deg
        || f.w.len() != g.w.len()
    {
        return None;
    }
    if f.w.iter().zip(&g.w).any(|(a, b)| a.dim() != b.dim()) {
        return None;
    }
    let n = f.dim;
    if n == 0 {
        return Some(Matrix::zeros(f.field, 0, 0));
    }
    let field = f.field;
    let var = |a: usize, b: usize| a * n + b;
    let mut rows: Vec<Vector> = Vec::new();
    for (mf, mg) in f.m.iter().zip(&g.m) {
        // (P MF − MG P)[a][c] = Σ_b P[a][b] MF[b][c] − Σ_b MG[a][b] P[b][c]
        for a in 0..n {
            for c in 0..n {
                let mut row = vec![field.zero(); n * n];
                for b in 0..n {
                    row[var(a, b)] = row[var(a, b)].add(mf.get(b, c));
                    row[var(b, c)] = row[var(b, c)].sub(mg.get(a, b));
                }
                rows.push(row);
            }
        }
    }
    for (wf, wg) in f.w.iter().zip(&g.w) {
        let ann = wg.annihilator();
        for k in 0..ann.rows() {
            let gk = ann.row(k);
            for w in wf.basis_vectors() {
                // gk · P · w = Σ_{a,b} gk[a] P[a][b] w[b]
                let mut row = vec![field.zero(); n * n];
                for a in 0..n {
                    for b in 0..n {
                        row[var(a, b)] = gk[a].mul(&w[b]);
                    }
                }
                rows.push(row);
            }
        }
    }
    let sys = Matrix::from_rows(field, rows).expect("uniform rows");
    let sol = sys.kernel().basis_vectors();
    if sol.is_empty() {
        return None;
    }
    let found = sampled_combinations(field, &sol)
        .filter(|x| !is_zero_vec(x))
        .map(|x| {
            let rows: Vec<Vector> = x.chunks(n).map(|c| c.to_vec()).collect();
            Matrix::from_rows(field, rows).expect("square")
        })
        .find(|p| !p.determinant().is_zero());
    found
}
