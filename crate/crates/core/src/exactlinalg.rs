//! Dense exact linear algebra: matrices, subspaces in canonical echelon form,
//! and the lattice operations the sheaf model needs.

use std::fmt;

use crate::error::{Error, Result};
use crate::exactfield::{FieldSpec, Scalar};

pub type Vector = Vec<Scalar>;

/// Row-major dense matrix. The field is stored so that empty matrices still
/// know where they live.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: FieldSpec, rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::Dimension("ragged rows".into()));
            }
            for x in row {
                if x.field() != field {
                    return Err(Error::MixedField(field.to_string(), x.field().to_string()));
                }
                data.push(x);
            }
        }
        Ok(Matrix {
            field,
            rows: r,
            cols: c,
            data,
        })
    }

    /// Convenience constructor from small integers.
    pub fn from_i64(field: FieldSpec, rows: &[&[i64]]) -> Self {
        let v = rows
            .iter()
            .map(|r| r.iter().map(|&x| field.from_i64(x)).collect())
            .collect();
        Self::from_rows(field, v).expect("well-formed literal")
    }

    pub fn from_columns(field: FieldSpec, rows: usize, cols: &[Vector]) -> Self {
        let mut m = Self::zeros(field, rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length");
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    /// Rank-one product u·φ (column times row).
    pub fn outer(u: &[Scalar], phi: &[Scalar]) -> Self {
        let field = u.first().or(phi.first()).map(|x| x.field());
        let field = field.expect("outer product of empty vectors has no field");
        let mut m = Self::zeros(field, u.len(), phi.len());
        for (i, a) in u.iter().enumerate() {
            for (j, b) in phi.iter().enumerate() {
                m.set(i, j, a.mul(b));
            }
        }
        m
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vector {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vector> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn checked_mul(&self, o: &Matrix) -> Result<Matrix> {
        if self.field != o.field {
            return Err(Error::MixedField(
                self.field.to_string(),
                o.field.to_string(),
            ));
        }
        if self.cols != o.rows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let mut m = Self::zeros(self.field, self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        let v = m.get(i, j).add(&a.mul(b));
                        m.set(i, j, v);
                    }
                }
            }
        }
        Ok(m)
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        self.checked_mul(o).expect("matrix product shape")
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vector {
        assert_eq!(v.len(), self.cols, "matrix-vector shape");
        (0..self.rows)
            .map(|i| {
                let mut acc = self.field.zero();
                for (j, x) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_zero() && !x.is_zero() {
                        acc = acc.add(&a.mul(x));
                    }
                }
                acc
            })
            .collect()
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[Scalar]) -> Vector {
        assert_eq!(v.len(), self.rows, "vector-matrix shape");
        (0..self.cols)
            .map(|j| {
                let mut acc = self.field.zero();
                for (i, x) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_zero() && !x.is_zero() {
                        acc = acc.add(&x.mul(a));
                    }
                }
                acc
            })
            .collect()
    }

    fn zip(&self, o: &Matrix, f: impl Fn(&Scalar, &Scalar) -> Scalar) -> Matrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix shape");
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&o.data)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, o: &Matrix) -> Matrix {
        self.zip(o, |a, b| a.add(b))
    }

    pub fn sub(&self, o: &Matrix) -> Matrix {
        self.zip(o, |a, b| a.sub(b))
    }

    pub fn scale(&self, s: &Scalar) -> Matrix {
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.mul(s)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let x = self.get(i, j);
                    if i == j {
                        x.is_one()
                    } else {
                        x.is_zero()
                    }
                })
            })
    }

    pub fn trace(&self) -> Scalar {
        let mut t = self.field.zero();
        for i in 0..self.rows.min(self.cols) {
            t = t.add(self.get(i, i));
        }
        t
    }

    /// Columns listed by index, in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        let cols: Vec<Vector> = idx.iter().map(|&j| self.column(j)).collect();
        Self::from_columns(self.field, self.rows, &cols)
    }

    pub fn hstack(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.rows, o.rows, "hstack rows");
        let mut m = Self::zeros(self.field, self.rows, self.cols + o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
            for j in 0..o.cols {
                m.set(i, self.cols + j, o.get(i, j).clone());
            }
        }
        m
    }

    pub fn vstack(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.cols, "vstack cols");
        let mut data = self.data.clone();
        data.extend(o.data.iter().cloned());
        Matrix {
            field: self.field,
            rows: self.rows + o.rows,
            cols: self.cols,
            data,
        }
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..m.cols {
                    m.data.swap(p * m.cols + j, r * m.cols + j);
                }
            }
            let inv = m.get(r, c).inv().expect("pivot is nonzero");
            for j in c..m.cols {
                let v = m.get(r, j).mul(&inv);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in c..m.cols {
                    let v = m.get(i, j).sub(&f.mul(m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of {x : Mx = 0}, free variables set to unit vectors in order.
    pub fn kernel(&self) -> Subspace {
        let (e, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let vecs: Vec<Vector> = free
            .iter()
            .map(|&fc| {
                let mut v = vec![self.field.zero(); self.cols];
                v[fc] = self.field.one();
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = e.get(r, fc).neg();
                }
                v
            })
            .collect();
        Subspace::span(self.field, self.cols, &vecs)
    }

    pub fn image(&self) -> Subspace {
        let cols: Vec<Vector> = (0..self.cols).map(|j| self.column(j)).collect();
        Subspace::span(self.field, self.rows, &cols)
    }

    /// Some x with Mx = b, free variables zero; None when b is not in the image.
    pub fn solve(&self, b: &[Scalar]) -> Option<Vector> {
        assert_eq!(b.len(), self.rows, "solve rhs length");
        let aug = self.hstack(&Matrix::from_columns(self.field, self.rows, &[b.to_vec()]));
        let (e, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![self.field.zero(); self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = e.get(r, self.cols).clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let (e, pivots) = self.hstack(&Matrix::identity(self.field, n)).rref();
        if pivots.len() < n || (n > 0 && pivots[n - 1] != n - 1) {
            return None;
        }
        let mut inv = Matrix::zeros(self.field, n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, e.get(i, n + j).clone());
            }
        }
        Some(inv)
    }

    pub fn determinant(&self) -> Scalar {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let mut m = self.clone();
        let n = self.rows;
        let mut det = self.field.one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m.get(i, c).is_zero()) else {
                return self.field.zero();
            };
            if p != c {
                for j in 0..n {
                    m.data.swap(p * n + j, c * n + j);
                }
                det = det.neg();
            }
            let piv = m.get(c, c).clone();
            det = det.mul(&piv);
            let inv = piv.inv().expect("nonzero pivot");
            for i in c + 1..n {
                let f = m.get(i, c).mul(&inv);
                if f.is_zero() {
                    continue;
                }
                for j in c..n {
                    let v = m.get(i, j).sub(&f.mul(m.get(c, j)));
                    m.set(i, j, v);
                }
            }
        }
        det
    }

    pub fn pow(&self, e: i64) -> Option<Matrix> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut acc = Matrix::identity(self.field, self.rows);
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Some(acc)
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_string()).collect())
            .collect()
    }

    pub fn parse_strings(field: FieldSpec, rows: &[Vec<String>]) -> Result<Matrix> {
        let v = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|s| field.parse_scalar(s))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(field, v)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.to_strings().into_iter().map(|r| r.join(" ")).collect();
        write!(f, "[{}]", rows.join("; "))
    }
}

pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    assert_eq!(a.len(), b.len(), "dot length");
    let field = a.first().map(|x| x.field());
    let mut acc = match field {
        Some(f) => f.zero(),
        None => panic!("dot of empty vectors has no field; use dot_in"),
    };
    for (x, y) in a.iter().zip(b) {
        acc = acc.add(&x.mul(y));
    }
    acc
}

pub fn dot_in(field: FieldSpec, a: &[Scalar], b: &[Scalar]) -> Scalar {
    if a.is_empty() {
        field.zero()
    } else {
        dot(a, b)
    }
}

pub fn unit(field: FieldSpec, n: usize, i: usize) -> Vector {
    let mut v = vec![field.zero(); n];
    v[i] = field.one();
    v
}

pub fn is_zero_vec(v: &[Scalar]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn scale_vec(v: &[Scalar], s: &Scalar) -> Vector {
    v.iter().map(|x| x.mul(s)).collect()
}

pub fn add_vec(a: &[Scalar], b: &[Scalar]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

pub fn sub_vec(a: &[Scalar], b: &[Scalar]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

/// A subspace of k^ambient. The basis columns are in reduced column echelon
/// form, so equal subspaces have identical representations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient: usize,
    basis: Matrix,
}

impl Subspace {
    pub fn span(field: FieldSpec, ambient: usize, vectors: &[Vector]) -> Self {
        let rows = Matrix::from_columns(field, ambient, vectors).transpose();
        let (e, pivots) = rows.rref();
        let kept: Vec<Vector> = (0..pivots.len()).map(|i| e.row(i)).collect();
        Subspace {
            ambient,
            basis: Matrix::from_columns(field, ambient, &kept),
        }
    }

    pub fn zero(field: FieldSpec, ambient: usize) -> Self {
        Self::span(field, ambient, &[])
    }

    pub fn full(field: FieldSpec, ambient: usize) -> Self {
        Matrix::identity(field, ambient).image()
    }

    pub fn field(&self) -> FieldSpec {
        self.basis.field()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<Vector> {
        (0..self.dim()).map(|j| self.basis.column(j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    fn check_ambient(&self, o: &Subspace) -> Result<()> {
        if self.ambient != o.ambient {
            return Err(Error::Dimension(format!(
                "ambient {} vs {}",
                self.ambient, o.ambient
            )));
        }
        Ok(())
    }

    pub fn sum(&self, o: &Subspace) -> Result<Subspace> {
        self.check_ambient(o)?;
        let mut v = self.basis_vectors();
        v.extend(o.basis_vectors());
        Ok(Subspace::span(self.field(), self.ambient, &v))
    }

    /// Row functionals (as a matrix) whose common kernel is this subspace.
    pub fn annihilator(&self) -> Matrix {
        let k = self.basis.transpose().kernel();
        k.basis.transpose()
    }

    pub fn intersect(&self, o: &Subspace) -> Result<Subspace> {
        self.check_ambient(o)?;
        Ok(self.annihilator().vstack(&o.annihilator()).kernel())
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.ambient, "membership vector length");
        self.basis.solve(v).is_some()
    }

    pub fn contains_subspace(&self, o: &Subspace) -> bool {
        o.basis_vectors().iter().all(|v| self.contains(v))
    }

    /// Image under a linear map of matching source dimension.
    pub fn map(&self, m: &Matrix) -> Subspace {
        assert_eq!(m.cols(), self.ambient, "map source dimension");
        let v: Vec<Vector> = self.basis_vectors().iter().map(|b| m.mul_vec(b)).collect();
        Subspace::span(m.field(), m.rows(), &v)
    }

    /// Coordinates of v in the echelon basis, if v lies in the subspace.
    pub fn coordinates(&self, v: &[Scalar]) -> Option<Vector> {
        self.basis.solve(v)
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "span{}", self.basis.transpose())
    }
}

/// All vectors of k^n over a prime field, in lexicographic residue order.
pub fn enumerate_vectors(field: FieldSpec, n: usize) -> Result<Vec<Vector>> {
    let elems = field.enumerate(false)?;
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * elems.len());
        for v in &out {
            for e in &elems {
                let mut w = v.clone();
                w.push(e.clone());
                next.push(w);
            }
        }
        out = next;
    }
    Ok(out)
}

/// One representative per line of k^n (first nonzero coordinate equal to 1).
pub fn enumerate_projective(field: FieldSpec, n: usize) -> Result<Vec<Vector>> {
    Ok(enumerate_vectors(field, n)?
        .into_iter()
        .filter(|v| v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_one()))
        .collect())
}

/// All subspaces of k^n over a prime field. Exponential; meant for n ≤ 3 or 4.
pub fn enumerate_subspaces(field: FieldSpec, n: usize) -> Result<Vec<Subspace>> {
    let lines = enumerate_projective(field, n)?;
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    let mut frontier = vec![Subspace::zero(field, n)];
    seen.insert(format!("{}", frontier[0]));
    out.push(frontier[0].clone());
    while let Some(s) = frontier.pop() {
        for l in &lines {
            if s.contains(l) {
                continue;
            }
            let mut v = s.basis_vectors();
            v.push(l.clone());
            let t = Subspace::span(field, n, &v);
            if seen.insert(format!("{t}")) {
                out.push(t.clone());
                frontier.push(t);
            }
        }
    }
    Ok(out)
}
