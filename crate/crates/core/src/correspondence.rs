//! The two directions between augmentations and sheaves: reading an
//! augmentation off a sheaf through a local trivialization, and building
//! the augmentation sheaf from the column span of R. Round-trip verifiers
//! and the trace formulas live here too.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::braid::{self, MeridianWord};
use crate::cordaug::{
    check_relations_with, degenerate_components, index_sets, meridian_operator, AugCandidate,
    LinkData,
};
use crate::error::{Error, Result};
use crate::exactfield::{FieldSpec, Scalar};
use crate::exactlinalg::{
    dot_in, enumerate_projective, enumerate_vectors, is_zero_vec, unit, Matrix, Subspace, Vector,
};
use crate::sheafmodel::{
    global_sections, isomorphic, once_stabilized, restrict, validate, DegenerateSummand, Rep,
    SheafData,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalTrivialization {
    /// f_i as row vectors
    pub f: Vec<Vector>,
    /// right inverses f_i⁻¹(1) as column vectors
    pub finv: Vec<Vector>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffEntry {
    pub location: String,
    pub expected: String,
    pub got: String,
}

pub type DiffReport = Vec<DiffEntry>;

fn diff(location: impl Into<String>, expected: impl ToString, got: impl ToString) -> DiffEntry {
    DiffEntry {
        location: location.into(),
        expected: expected.to_string(),
        got: got.to_string(),
    }
}

fn first_nonzero_normalized(v: &[Scalar]) -> Vector {
    match v.iter().find(|x| !x.is_zero()) {
        Some(x) => {
            let inv = x.inv().expect("nonzero");
            v.iter().map(|y| y.mul(&inv)).collect()
        }
        None => v.to_vec(),
    }
}

fn right_inverse(field: FieldSpec, f: &[Scalar]) -> Option<Vector> {
    let row = Matrix::from_rows(field, vec![f.to_vec()]).ok()?;
    row.solve(&[field.one()])
}

fn link_of(f: &SheafData) -> Result<LinkData> {
    LinkData::new(&f.braid)
}

/// λ_s read off a functional at the base strand: f_b ρ(L_s) finv_b.
fn lambda_at(
    rep: &Rep<'_>,
    link: &LinkData,
    s: usize,
    fb: &[Scalar],
    finvb: &[Scalar],
    field: FieldSpec,
) -> Scalar {
    let l = rep.eval(&link.longitudes[s]);
    dot_in(field, fb, &l.mul_vec(finvb))
}

/// Annihilator of W_b normalized at the base strand of each component,
/// transported around the component by the segment words.
pub fn choose_trivialization(f: &SheafData) -> Result<LocalTrivialization> {
    let link = link_of(f)?;
    let rep = Rep::new(f).ok_or_else(|| Error::Input("singular meridian matrix".into()))?;
    let field = f.field;
    let n = f.n();
    let mut fs = vec![vec![field.zero(); f.dim]; n];
    for s in 0..link.r() {
        if f.deg.iter().any(|d| d.component == s) {
            continue;
        }
        let b = link.components.base_strand[s];
        let ann = f.w[b].annihilator();
        if ann.rows() != 1 {
            return Err(Error::InvalidTrivialization(format!(
                "W{} does not have codimension 1",
                b + 1
            )));
        }
        fs[b] = first_nonzero_normalized(&ann.row(0));
        propagate(&rep, &link, s, &mut fs, field)?;
    }
    let finv = (0..n)
        .map(|i| {
            if is_zero_vec(&fs[i]) {
                Ok(vec![field.zero(); f.dim])
            } else {
                right_inverse(field, &fs[i])
                    .ok_or_else(|| Error::InvalidTrivialization("no right inverse".into()))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalTrivialization { f: fs, finv })
}

/// Given f at the base strand of s, fill in the other strands of s by
/// f_{τ(i)} = κ_i f_i ρ(Seg_i), κ = λ⁻¹ at the base strand and 1 elsewhere.
fn propagate(
    rep: &Rep<'_>,
    link: &LinkData,
    s: usize,
    fs: &mut [Vector],
    field: FieldSpec,
) -> Result<()> {
    let b = link.components.base_strand[s];
    let finvb = right_inverse(field, &fs[b])
        .ok_or_else(|| Error::InvalidTrivialization("zero functional".into()))?;
    let lam = lambda_at(rep, link, s, &fs[b], &finvb, field);
    let lam_inv = lam
        .inv()
        .map_err(|_| Error::InvalidTrivialization("longitude kills the stalk".into()))?;
    let mut i = b;
    loop {
        let next = link.tau[i];
        if next == b {
            break;
        }
        let kappa = if i == b { lam_inv.clone() } else { field.one() };
        let seg = rep.eval(&link.segments[i]);
        fs[next] = seg.vec_mul(&fs[i]).iter().map(|x| x.mul(&kappa)).collect();
        i = next;
    }
    Ok(())
}

/// Checks f_i|W_i = 0, f_i finv_i = 1, and the transport rule along every
/// component; degenerate strands must carry zero data.
pub fn check_trivialization(f: &SheafData, t: &LocalTrivialization) -> Result<()> {
    let link = link_of(f)?;
    let rep = Rep::new(f).ok_or_else(|| Error::Input("singular meridian matrix".into()))?;
    let field = f.field;
    let bad = |m: String| Err(Error::InvalidTrivialization(m));
    if t.f.len() != f.n() || t.finv.len() != f.n() {
        return bad("one functional per strand".into());
    }
    for i in 0..f.n() {
        if t.f[i].len() != f.dim || t.finv[i].len() != f.dim {
            return bad(format!("strand {} has wrong length", i + 1));
        }
        if f.is_deg_strand(i) {
            if !is_zero_vec(&t.f[i]) {
                return bad(format!("strand {} is degenerate but f is nonzero", i + 1));
            }
            continue;
        }
        if is_zero_vec(&t.f[i]) {
            return bad(format!("f{} is zero", i + 1));
        }
        for w in f.w[i].basis_vectors() {
            if !dot_in(field, &t.f[i], &w).is_zero() {
                return bad(format!("f{0} does not vanish on W{0}", i + 1));
            }
        }
        if !dot_in(field, &t.f[i], &t.finv[i]).is_one() {
            return bad(format!("f{0} finv{0} is not 1", i + 1));
        }
    }
    for s in 0..link.r() {
        if f.deg.iter().any(|d| d.component == s) {
            continue;
        }
        let b = link.components.base_strand[s];
        let lam = lambda_at(&rep, &link, s, &t.f[b], &t.finv[b], field);
        let Ok(lam_inv) = lam.inv() else {
            return bad(format!("longitude of component {} kills the stalk", s + 1));
        };
        for i in link.components.strands_of(s) {
            let kappa = if i == b { lam_inv.clone() } else { field.one() };
            let want: Vector = rep
                .eval(&link.segments[i])
                .vec_mul(&t.f[i])
                .iter()
                .map(|x| x.mul(&kappa))
                .collect();
            if want != t.f[link.tau[i]] {
                return bad(format!(
                    "f{} is not the transport of f{}",
                    link.tau[i] + 1,
                    i + 1
                ));
            }
        }
    }
    Ok(())
}

/// R_ij = f_i (Id − M_j) finv_j, λ_s = f_b ρ(L_s) finv_b,
/// μ_s = 1 − f_b (Id − M_b) finv_b; degenerate summands give λ = α, μ = 1.
pub fn sheaf_to_aug(f: &SheafData, t: &LocalTrivialization) -> Result<AugCandidate> {
    check_trivialization(f, t)?;
    let link = link_of(f)?;
    let rep = Rep::new(f).ok_or_else(|| Error::Input("singular meridian matrix".into()))?;
    let field = f.field;
    let n = f.n();
    let id = Matrix::identity(field, f.dim);
    let moved: Vec<Vector> = (0..n)
        .map(|j| id.sub(&f.m[j]).mul_vec(&t.finv[j]))
        .collect();
    let mut r = Matrix::zeros(field, n, n);
    for i in 0..n {
        for j in 0..n {
            r.set(i, j, dot_in(field, &t.f[i], &moved[j]));
        }
    }
    let mut lambda = Vec::new();
    let mut mu = Vec::new();
    for s in 0..link.r() {
        if let Some(d) = f.deg.iter().find(|d| d.component == s) {
            lambda.push(d.alpha.clone());
            mu.push(field.one());
            continue;
        }
        let b = link.components.base_strand[s];
        lambda.push(lambda_at(&rep, &link, s, &t.f[b], &t.finv[b], field));
        mu.push(field.one().sub(&dot_in(field, &t.f[b], &moved[b])));
    }
    if mu.iter().any(|x| x.is_zero()) {
        return Err(Error::InvalidTrivialization(
            "a meridian matrix acts by zero on its stalk quotient".into(),
        ));
    }
    AugCandidate::new(field, link.components.map.clone(), r, lambda, mu)
}

/// The three trace-formula values (λ_s, μ_s, ε(c)) for the pure cord of
/// component s that runs once around `loop_word`.
pub fn pure_cord_trace(
    f: &SheafData,
    s: usize,
    loop_word: &MeridianWord,
) -> Result<(Scalar, Scalar, Scalar)> {
    if f.deg.iter().any(|d| d.component == s) {
        return Err(Error::Input(format!(
            "component {} is a degenerate summand",
            s + 1
        )));
    }
    let link = link_of(f)?;
    let rep = Rep::new(f).ok_or_else(|| Error::Input("singular meridian matrix".into()))?;
    let b = link.components.base_strand[s];
    let l = rep.eval(&link.longitudes[s]);
    let lam = l.trace().sub(&restrict(&l, &f.w[b]).trace());
    let id = Matrix::identity(f.field, f.dim);
    let mu = f.field.one().sub(&id.sub(&f.m[b]).trace());
    let h = rep.eval(loop_word);
    let mh = f.m[b].mul(&h);
    let c = h.sub(&mh).trace();
    Ok((lam, mu, c))
}

/// A sheaf built from an augmentation, realized inside k^n: `basis` holds
/// the chosen basis vectors of V_ε as columns and the sheaf data are in
/// those coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realized {
    pub sheaf: SheafData,
    pub basis: Matrix,
    /// whether the first basis vector is the extra vector R₀
    pub has_r0: bool,
}

fn coords(basis: &Matrix, x: &[Scalar]) -> Vector {
    basis.solve(x).expect("vector lies in the realized space")
}

fn pivot_columns(c: &AugCandidate) -> Vec<usize> {
    c.r_mat.rref().1
}

fn realize(c: &AugCandidate, link: &LinkData, basis: Matrix, has_r0: bool) -> Realized {
    let field = c.field;
    let dim = basis.cols();
    let deg = degenerate_components(c);
    let m = (0..c.n)
        .map(|t| {
            let nt = meridian_operator(c, t, 1);
            let cols: Vec<Vector> = (0..dim)
                .map(|k| coords(&basis, &nt.mul_vec(&basis.column(k))))
                .collect();
            Matrix::from_columns(field, dim, &cols)
        })
        .collect();
    let w = (0..c.n)
        .map(|i| {
            if deg.contains(&c.comp(i)) {
                Subspace::full(field, dim)
            } else {
                let row = basis.vec_mul(&unit(field, c.n, i));
                Matrix::from_rows(field, vec![row])
                    .map(|r| r.kernel())
                    .unwrap_or_else(|_| Subspace::full(field, dim))
            }
        })
        .collect();
    let deg = deg
        .into_iter()
        .map(|s| DegenerateSummand {
            component: s,
            alpha: c.lambda[s].clone(),
        })
        .collect();
    Realized {
        sheaf: SheafData {
            field,
            braid: link.braid.clone(),
            dim,
            m,
            w,
            deg,
        },
        basis,
        has_r0,
    }
}

fn require_aug(c: &AugCandidate, link: &LinkData) -> Result<()> {
    let rep = check_relations_with(c, link);
    if rep.is_ok() {
        Ok(())
    } else {
        let f = &rep.failures[0];
        Err(Error::NotAnAugmentation(format!(
            "{} relation fails ({}), {} failures in total",
            f.family,
            f.detail,
            rep.failures.len()
        )))
    }
}

/// The augmentation representation on span{R_j}, basis = pivot columns.
pub fn aug_to_subsheaf(c: &AugCandidate, link: &LinkData) -> Result<Realized> {
    require_aug(c, link)?;
    let piv = pivot_columns(c);
    let basis = c.r_mat.select_columns(&piv);
    let mut out = realize(c, link, basis, false);
    out.sheaf.deg.clear();
    Ok(out)
}

/// R₀ = −Σ e_i over zero-row strands outside degenerate components, or
/// None when there are no such strands.
pub fn extension_vector(c: &AugCandidate) -> Option<Vector> {
    let deg = degenerate_components(c);
    let sets = index_sets(c);
    let ext: Vec<usize> = sets
        .i_dprime
        .iter()
        .copied()
        .filter(|&i| !deg.contains(&c.comp(i)))
        .collect();
    if ext.is_empty() {
        return None;
    }
    let mut v = vec![c.field.zero(); c.n];
    for i in ext {
        v[i] = c.field.one().neg();
    }
    Some(v)
}

/// The augmentation sheaf: V_ε = span{R₀, R_j}, M_i = N_i restricted,
/// W_i = ker e_iᵀ, with degenerate components split off.
///
/// When the canonical R₀ does not give a valid sheaf, the column span alone
/// and then every other extension vector are tried in a fixed order. Any
/// sheaf realizing c with ∩W_i = 0 embeds in Fⁿ through its f_i in one of
/// these forms, so over a finite field an error here means c is not realized
/// by such a sheaf.
pub fn aug_to_sheaf(c: &AugCandidate, link: &LinkData) -> Result<Realized> {
    require_aug(c, link)?;
    let piv = pivot_columns(c);
    let span: Vec<Vector> = piv.iter().map(|&j| c.r_mat.column(j)).collect();
    let build = |r0: Option<&Vector>| -> (Realized, Vec<String>) {
        let mut cols: Vec<Vector> = r0.into_iter().cloned().collect();
        cols.extend(span.iter().cloned());
        let basis = Matrix::from_columns(c.field, c.n, &cols);
        let out = realize(c, link, basis, r0.is_some());
        let rep = validate(&out.sheaf);
        (out, rep.failures)
    };
    let r0 = extension_vector(c);
    let (out, failures) = build(r0.as_ref());
    if failures.is_empty() {
        return Ok(out);
    }
    if r0.is_some() && build(None).1.is_empty() {
        return Ok(build(None).0);
    }
    let col_span = Subspace::span(c.field, c.n, &span);
    if let Ok(vs) = enumerate_projective(c.field, c.n) {
        for v in vs.iter().filter(|v| !col_span.contains(v)) {
            if Some(v) == r0.as_ref() {
                continue;
            }
            let (alt, fails) = build(Some(v));
            if fails.is_empty() {
                return Ok(alt);
            }
        }
    }
    Err(Error::NotAnAugmentation(format!(
        "augmentation sheaf is invalid: {}",
        failures.join("; ")
    )))
}

/// f_i = e_iᵀ on V_ε and finv_i = e_k / f_i(e_k) for the last coordinate k
/// where f_i is nonzero.
pub fn canonical_trivialization(c: &AugCandidate, link: &LinkData) -> Result<LocalTrivialization> {
    let real = aug_to_sheaf(c, link)?;
    Ok(canonical_trivialization_of(c, &real))
}

pub fn canonical_trivialization_of(c: &AugCandidate, real: &Realized) -> LocalTrivialization {
    let field = c.field;
    let dim = real.basis.cols();
    let mut f = Vec::new();
    let mut finv = Vec::new();
    for i in 0..c.n {
        if real.sheaf.is_deg_strand(i) {
            f.push(vec![field.zero(); dim]);
            finv.push(vec![field.zero(); dim]);
            continue;
        }
        let fi = real.basis.vec_mul(&unit(field, c.n, i));
        let mut v = vec![field.zero(); dim];
        if let Some(k) = (0..dim).rev().find(|&k| !fi[k].is_zero()) {
            v[k] = fi[k].inv().expect("nonzero");
        }
        f.push(fi);
        finv.push(v);
    }
    LocalTrivialization { f, finv }
}

fn diff_augs(expected: &AugCandidate, got: &AugCandidate) -> DiffReport {
    let mut out = Vec::new();
    if expected.n != got.n || expected.r != got.r || expected.component_map != got.component_map {
        out.push(diff(
            "shape",
            format!("n={} r={}", expected.n, expected.r),
            format!("n={} r={}", got.n, got.r),
        ));
        return out;
    }
    for i in 0..expected.n {
        for j in 0..expected.n {
            if expected.entry(i, j) != got.entry(i, j) {
                out.push(diff(
                    format!("R[{}][{}]", i + 1, j + 1),
                    expected.entry(i, j),
                    got.entry(i, j),
                ));
            }
        }
    }
    for s in 0..expected.r {
        if expected.lambda[s] != got.lambda[s] {
            out.push(diff(
                format!("lambda[{}]", s + 1),
                &expected.lambda[s],
                &got.lambda[s],
            ));
        }
        if expected.mu[s] != got.mu[s] {
            out.push(diff(format!("mu[{}]", s + 1), &expected.mu[s], &got.mu[s]));
        }
    }
    out
}

/// sheaf_to_aug(aug_to_sheaf(c), canonical trivialization) compared with c.
pub fn roundtrip_aug(c: &AugCandidate, link: &LinkData) -> DiffReport {
    let run = || -> Result<AugCandidate> {
        let real = aug_to_sheaf(c, link)?;
        let t = canonical_trivialization_of(c, &real);
        sheaf_to_aug(&real.sheaf, &t)
    };
    match run() {
        Ok(got) => diff_augs(c, &got),
        Err(e) => vec![diff("pipeline", "ok", e)],
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheafRoundTrip {
    pub diff: DiffReport,
    pub notes: Vec<String>,
}

/// A vector outside every non-degenerate stalk: basis vectors, then sums
/// of two, then (finite fields) everything.
pub fn transverse_vector(f: &SheafData) -> Option<Vector> {
    let field = f.field;
    let n = f.dim;
    let stalks: Vec<&Subspace> = (0..f.n())
        .filter(|&i| !f.is_deg_strand(i))
        .map(|i| &f.w[i])
        .collect();
    let ok = |v: &Vector| stalks.iter().all(|w| !w.contains(v));
    let mut tries: Vec<Vector> = (0..n).map(|k| unit(field, n, k)).collect();
    for a in 0..n {
        for b in a + 1..n {
            let mut v = unit(field, n, a);
            v[b] = field.one();
            tries.push(v);
        }
    }
    if let Some(v) = tries.into_iter().find(|v| ok(v)) {
        return Some(v);
    }
    enumerate_vectors(field, n)
        .ok()?
        .into_iter()
        .find(|v| !is_zero_vec(v) && ok(v))
}

/// Rebuilds the augmentation sheaf of ε_F and compares it with F: the map
/// R_i ↦ (Id − M_i)v / f_i(v) must be an isomorphism of the augmentation
/// subsheaf onto the once-stabilized part of F, the zero-row strands must be
/// exactly those whose stalk contains V₀, and the whole sheaf must be
/// isomorphic to F.
pub fn roundtrip_sheaf(f: &SheafData) -> Result<SheafRoundTrip> {
    let mut out = SheafRoundTrip::default();
    let field = f.field;
    let n = f.n();
    if !global_sections(f).is_zero() {
        out.diff
            .push(diff("global_sections", 0, global_sections(f).dim()));
        return Ok(out);
    }
    let link = link_of(f)?;
    let triv = choose_trivialization(f)?;
    let eps = sheaf_to_aug(f, &triv)?;
    let id = Matrix::identity(field, f.dim);

    let u_cols: Vec<Vector> = match transverse_vector(f) {
        Some(v) => (0..n)
            .map(|i| {
                if f.is_deg_strand(i) {
                    vec![field.zero(); f.dim]
                } else {
                    let fv = dot_in(field, &triv.f[i], &v).inv().expect("transverse");
                    id.sub(&f.m[i])
                        .mul_vec(&v)
                        .iter()
                        .map(|x| x.mul(&fv))
                        .collect()
                }
            })
            .collect(),
        None => {
            out.notes.push(
                "no vector avoids every stalk over this field; used (Id − M_i) f_i⁻¹(1) instead"
                    .into(),
            );
            (0..n)
                .map(|i| id.sub(&f.m[i]).mul_vec(&triv.finv[i]))
                .collect()
        }
    };
    let u = Matrix::from_columns(field, f.dim, &u_cols);
    let r = &eps.r_mat;

    // well defined on span R, and injective there
    let ker_r = r.kernel();
    for a in ker_r.basis_vectors() {
        if !is_zero_vec(&u.mul_vec(&a)) {
            out.diff
                .push(diff("Psi", "ker R in ker U", "not well defined"));
            break;
        }
    }
    if u.rank() != r.rank() {
        out.diff.push(diff("Psi.rank", r.rank(), u.rank()));
    }
    let stab = once_stabilized(f);
    if u.image() != stab.v0 {
        out.diff.push(diff(
            "Psi.image",
            format!("V0 of dim {}", stab.v0.dim()),
            u.image(),
        ));
    }
    // Ψ N_t = M_t Ψ, with N_t R = R (Id − e_t R^t)
    for t in 0..n {
        let mut corr = Matrix::identity(field, n);
        for j in 0..n {
            let v = corr.get(t, j).sub(r.get(t, j));
            corr.set(t, j, v);
        }
        if u.mul(&corr) != f.m[t].mul(&u) {
            out.diff
                .push(diff(format!("M[{}]", t + 1), "intertwined", "mismatch"));
        }
    }
    for i in 0..n {
        let row = Matrix::from_rows(field, vec![r.row(i)]).expect("row");
        let sub_w = row.kernel().map(&u);
        let want = f.w[i].intersect(&stab.v0).expect("same ambient");
        if sub_w != want {
            out.diff.push(diff(format!("W[{}]", i + 1), &want, &sub_w));
        }
    }

    let sets = index_sets(&eps);
    for i in 0..n {
        if f.is_deg_strand(i) {
            continue;
        }
        let zero_row = sets.i_dprime.contains(&i);
        let contains = f.w[i].contains_subspace(&stab.v0);
        if zero_row != contains {
            out.diff.push(diff(
                format!("I''[{}]", i + 1),
                format!("V0 in W{}: {contains}", i + 1),
                format!("zero row: {zero_row}"),
            ));
        }
    }
    let extra = (0..n).any(|i| !f.is_deg_strand(i) && sets.i_dprime.contains(&i));
    let codim = f.dim - stab.v0.dim();
    if codim != usize::from(extra) {
        out.diff.push(diff("dim V/V0", usize::from(extra), codim));
    }
    let deg_back: Vec<usize> = degenerate_components(&eps);
    let deg_f: Vec<usize> = f.deg.iter().map(|d| d.component).collect();
    if deg_back != deg_f {
        out.diff
            .push(diff("deg", format!("{deg_f:?}"), format!("{deg_back:?}")));
    }
    match aug_to_sheaf(&eps, &link) {
        Ok(real) => {
            if isomorphic(f, &real.sheaf).is_none() {
                out.diff
                    .push(diff("sheaf", "isomorphic to F", "no isomorphism found"));
            }
        }
        Err(e) => out.diff.push(diff("aug_to_sheaf", "ok", e)),
    }
    Ok(out)
}

/// Per-component rescaling of f and a random shift of each right inverse
/// inside ker f_i. The result is again a valid trivialization.
pub fn random_trivialization<R: Rng>(
    f: &SheafData,
    base: &LocalTrivialization,
    rng: &mut R,
) -> Result<LocalTrivialization> {
    let link = link_of(f)?;
    let field = f.field;
    let scales: Vec<Scalar> = (0..link.r()).map(|_| random_unit(field, rng)).collect();
    let mut out = base.clone();
    for i in 0..f.n() {
        if is_zero_vec(&base.f[i]) {
            continue;
        }
        let c = &scales[link.components.map[i]];
        out.f[i] = base.f[i].iter().map(|x| x.mul(c)).collect();
        let cinv = c.inv().expect("unit");
        out.finv[i] = random_right_inverse(field, &out.f[i], &base.finv[i], &cinv, rng);
    }
    Ok(out)
}

/// finv·c⁻¹ plus a random element of ker f.
fn random_right_inverse<R: Rng>(
    field: FieldSpec,
    f: &[Scalar],
    finv: &[Scalar],
    cinv: &Scalar,
    rng: &mut R,
) -> Vector {
    let row = Matrix::from_rows(field, vec![f.to_vec()]).expect("row");
    let mut v: Vector = finv.iter().map(|x| x.mul(cinv)).collect();
    for k in row.kernel().basis_vectors() {
        let a = random_scalar(field, rng);
        v = v.iter().zip(&k).map(|(x, y)| x.add(&a.mul(y))).collect();
    }
    v
}

/// Same functionals, different right inverses.
pub fn shift_right_inverses<R: Rng>(
    base: &LocalTrivialization,
    field: FieldSpec,
    rng: &mut R,
) -> LocalTrivialization {
    let mut out = base.clone();
    for i in 0..base.f.len() {
        if is_zero_vec(&base.f[i]) {
            continue;
        }
        out.finv[i] = random_right_inverse(field, &base.f[i], &base.finv[i], &field.one(), rng);
    }
    out
}

pub fn random_scalar<R: Rng>(field: FieldSpec, rng: &mut R) -> Scalar {
    match field {
        FieldSpec::Prime(p) => field.from_i64(rng.gen_range(0..p as i64)),
        FieldSpec::Rationals => field
            .ratio(rng.gen_range(-9..=9), rng.gen_range(1..=4))
            .expect("nonzero denominator"),
    }
}

pub fn random_unit<R: Rng>(field: FieldSpec, rng: &mut R) -> Scalar {
    loop {
        let x = random_scalar(field, rng);
        if !x.is_zero() {
            return x;
        }
    }
}

/// (Id − M_s) finv_s f_s = Id − M_s for every non-degenerate strand.
pub fn gauge_identity_holds(f: &SheafData, t: &LocalTrivialization) -> bool {
    let id = Matrix::identity(f.field, f.dim);
    (0..f.n()).filter(|&i| !f.is_deg_strand(i)).all(|i| {
        let d = id.sub(&f.m[i]);
        let proj = Matrix::outer(&t.finv[i], &t.f[i]);
        d.mul(&proj) == d
    })
}

/// F ⊕ (constant line inside every stalk), with the trivialization
/// extended by zero. The induced augmentation must not change.
pub fn add_constant_block(
    f: &SheafData,
    t: &LocalTrivialization,
) -> (SheafData, LocalTrivialization) {
    let field = f.field;
    let d = f.dim + 1;
    let grow = |m: &Matrix| {
        let mut g = Matrix::identity(field, d);
        for a in 0..f.dim {
            for b in 0..f.dim {
                g.set(a, b, m.get(a, b).clone());
            }
        }
        g
    };
    let pad = |v: &Vector| {
        let mut w = v.clone();
        w.push(field.zero());
        w
    };
    let m = f.m.iter().map(grow).collect();
    let w =
        f.w.iter()
            .map(|s| {
                let mut vs: Vec<Vector> = s.basis_vectors().iter().map(pad).collect();
                vs.push(unit(field, d, f.dim));
                Subspace::span(field, d, &vs)
            })
            .collect();
    let g = SheafData {
        field,
        braid: f.braid.clone(),
        dim: d,
        m,
        w,
        deg: f.deg.clone(),
    };
    let t2 = LocalTrivialization {
        f: t.f.iter().map(pad).collect(),
        finv: t.finv.iter().map(pad).collect(),
    };
    (g, t2)
}

/// The diagonal intertwiner D = diag(d_{c(1)},…,d_{c(n)}) restricted to the
/// realized spaces: maps span R of c onto span R of d·c.
pub fn dilation_intertwiner(c: &AugCandidate, d: &crate::cordaug::DilationParam) -> Matrix {
    let mut m = Matrix::zeros(c.field, c.n, c.n);
    for i in 0..c.n {
        m.set(i, i, d.d[c.comp(i)].clone());
    }
    m
}

/// λ and μ read at every strand of the component rather than only the base
/// strand; used to test strand independence.
pub fn mu_at_strand(f: &SheafData, t: &LocalTrivialization, i: usize) -> Scalar {
    let id = Matrix::identity(f.field, f.dim);
    f.field.one().sub(&dot_in(
        f.field,
        &t.f[i],
        &id.sub(&f.m[i]).mul_vec(&t.finv[i]),
    ))
}

/// Component-level helper for callers holding only a braid.
pub fn link_data(b: &braid::BraidWord) -> Result<LinkData> {
    LinkData::new(b)
}
