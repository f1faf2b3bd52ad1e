//! Fixed-size vector and 4x4 matrix helpers.

pub type Vec2 = [f64; 2];
pub type Vec3 = [f64; 3];
pub type Vec4 = [f64; 4];
pub type Mat4 = [[f64; 4]; 4];

#[inline]
pub fn dot2(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm2(a: Vec2) -> f64 {
    libm::hypot(a[0], a[1])
}

/// Determinant of the matrix with rows `a` and `b`.
#[inline]
pub fn wedge(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn norm<const N: usize>(a: &[f64; N]) -> f64 {
    libm::sqrt(a.iter().map(|x| x * x).sum())
}

pub fn dist<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// `a + h * b`, elementwise.
#[inline]
pub fn axpy<const N: usize>(a: &[f64; N], h: f64, b: &[f64; N]) -> [f64; N] {
    let mut out = *a;
    for (o, x) in out.iter_mut().zip(b) {
        *o += h * x;
    }
    out
}

pub fn is_finite<const N: usize>(a: &[f64; N]) -> bool {
    a.iter().all(|x| x.is_finite())
}

pub fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn mat_vec(a: &Mat4, x: &Vec4) -> Vec4 {
    let mut out = [0.0; 4];
    for (o, row) in out.iter_mut().zip(a) {
        *o = row.iter().zip(x).map(|(r, v)| r * v).sum();
    }
    out
}

pub fn transpose(a: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i];
        }
    }
    out
}

/// Frobenius norm.
pub fn frobenius(a: &Mat4) -> f64 {
    libm::sqrt(a.iter().flatten().map(|x| x * x).sum())
}

/// Gauss-Jordan elimination with partial pivoting. `None` if singular.
pub fn invert4(a: &Mat4) -> Option<Mat4> {
    let mut m = *a;
    let mut inv = [[0.0; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap_or(col);
        if m[pivot][col] == 0.0 {
            return None;
        }
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let p = m[col][col];
        for k in 0..4 {
            m[col][k] /= p;
            inv[col][k] /= p;
        }
        for row in 0..4 {
            if row == col {
                continue;
            }
            let factor = m[row][col];
            if factor == 0.0 {
                continue;
            }
            for k in 0..4 {
                m[row][k] -= factor * m[col][k];
                inv[row][k] -= factor * inv[col][k];
            }
        }
    }
    Some(inv)
}
