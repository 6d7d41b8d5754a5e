//! Perturbing a map with unit-modulus spectrum to one of finite order.
//!
//! The spectrum is split into groups (eigenvalue `1`, eigenvalue `−1`, and
//! conjugate pairs `e^{±iφ}`). Each group is handled on its generalized
//! eigenspace: semisimple groups are rotated onto the nearest grid angle
//! `2πk/q`, non-semisimple ones are split into distinct roots of unity.

use std::f64::consts::PI;

use cocycle_core::linalg::{eigenvalues, null_space, op_norm};
use cocycle_core::Matrix;
use nalgebra::Complex;

use crate::error::{PerturbError, Result};

/// Allowed distance of the spectrum from the unit circle.
pub const UNIT_TOL: f64 = 1e-8;

/// Required accuracy of `L̃^q = Id`.
pub const ORDER_TOL: f64 = 1e-8;

const SEMISIMPLE_TOL: f64 = 1e-9;
const MAX_ORDER: usize = 1 << 20;

#[derive(Clone, Debug)]
pub struct FiniteOrder {
    pub matrix: Matrix,
    /// `q` with `matrix^q = Id`; every eigenvalue is a `q`-th root of unity.
    pub order: usize,
    pub deviation: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Kind {
    Plus,
    Minus,
    Pair(f64),
}

struct Group {
    kind: Kind,
    /// Orthonormal basis of the generalized eigenspace.
    basis: Matrix,
    /// Restriction in that basis.
    block: Matrix,
    semisimple: bool,
}

/// `L̃` with `‖L̃ − L‖ ≤ eps`, diagonalizable, with `L̃^q = Id` for the smallest `q` found.
pub fn finite_order_perturbation(l: &Matrix, eps: f64) -> Result<FiniteOrder> {
    let d = l.nrows();
    if d == 0 || l.ncols() != d {
        return Err(PerturbError::Argument(format!("expected a square matrix, got {}×{}", l.nrows(), l.ncols())));
    }
    if !(eps > 0.0) {
        return Err(PerturbError::Argument(format!("eps must be positive, got {eps}")));
    }
    let groups = split_spectrum(l, eps)?;
    let mut w = Matrix::zeros(d, d);
    let mut col = 0;
    for g in &groups {
        let k = g.basis.ncols();
        w.columns_mut(col, k).copy_from(&g.basis);
        col += k;
    }
    let w_inv = w
        .clone()
        .try_inverse()
        .ok_or_else(|| PerturbError::Numerical("generalized eigenspaces are not independent".into()))?;

    let mut q = 1;
    while q <= MAX_ORDER {
        if let Some(blocks) = groups.iter().map(|g| rounded_block(g, q)).collect::<Option<Vec<_>>>() {
            let mut b = Matrix::zeros(d, d);
            let mut at = 0;
            for blk in &blocks {
                let k = blk.nrows();
                b.view_mut((at, at), (k, k)).copy_from(blk);
                at += k;
            }
            let matrix = &w * b * &w_inv;
            let deviation = op_norm(&(&matrix - l));
            if deviation <= eps {
                let residual = op_norm(&(power(&matrix, q) - Matrix::identity(d, d)));
                if residual <= ORDER_TOL {
                    return Ok(FiniteOrder { matrix, order: q, deviation });
                }
            }
        }
        q = if q == 1 { 2 } else { q + 2 };
    }
    Err(PerturbError::capability(format!("no order up to {MAX_ORDER} fits within eps = {eps}"), eps, None))
}

fn split_spectrum(l: &Matrix, eps: f64) -> Result<Vec<Group>> {
    let d = l.nrows();
    let ev = eigenvalues(l);
    let tol = (eps / 4.0).min(1e-3);
    // Single-linkage clusters.
    let mut label: Vec<usize> = (0..d).collect();
    for a in 0..d {
        for b in 0..d {
            if (ev[a] - ev[b]).norm() <= tol && label[a] != label[b] {
                let (from, to) = (label[b], label[a]);
                label.iter_mut().filter(|x| **x == from).for_each(|x| *x = to);
            }
        }
    }
    let mut ids: Vec<usize> = label.clone();
    ids.sort_unstable();
    ids.dedup();
    let mut groups = Vec::new();
    for id in ids {
        let members: Vec<Complex<f64>> = (0..d).filter(|&k| label[k] == id).map(|k| ev[k]).collect();
        let m = members.len();
        let mean = members.iter().sum::<Complex<f64>>() / m as f64;
        let moduli: f64 = members.iter().map(|z| z.norm().ln()).sum();
        if (mean.norm() - 1.0).abs() > UNIT_TOL || moduli.abs() > UNIT_TOL * m as f64 {
            return Err(PerturbError::Precondition(format!(
                "eigenvalue cluster near {:.6}{:+.6}i is off the unit circle",
                mean.re, mean.im
            )));
        }
        let id_d = Matrix::identity(d, d);
        let (kind, poly, k) = if (mean - 1.0).norm() <= tol {
            (Kind::Plus, l - &id_d, m)
        } else if (mean + 1.0).norm() <= tol {
            (Kind::Minus, l + &id_d, m)
        } else if mean.im > 0.0 {
            let phi = mean.arg();
            (Kind::Pair(phi), l * l - l * (2.0 * phi.cos()) + &id_d, 2 * m)
        } else {
            continue;
        };
        let reps = if matches!(kind, Kind::Pair(_)) { m } else { k };
        let basis = null_space(&power(&poly, reps), k);
        let block = basis.transpose() * l * &basis;
        let id_k = Matrix::identity(k, k);
        let annihilator = match kind {
            Kind::Plus => &block - &id_k,
            Kind::Minus => &block + &id_k,
            Kind::Pair(phi) => &block * &block - &block * (2.0 * phi.cos()) + &id_k,
        };
        let semisimple = op_norm(&annihilator) <= SEMISIMPLE_TOL;
        groups.push(Group { kind, basis, block, semisimple });
    }
    Ok(groups)
}

/// The group's block rounded to `q`-th roots of unity, or `None` when `q`
/// is too coarse.
fn rounded_block(g: &Group, q: usize) -> Option<Matrix> {
    let k = g.block.nrows();
    let id = Matrix::identity(k, k);
    match (g.kind, g.semisimple) {
        (Kind::Plus, true) => Some(id),
        (Kind::Minus, true) => (q % 2 == 0).then(|| -id),
        (Kind::Plus, false) => unipotent_split(&g.block, q),
        (Kind::Minus, false) => unipotent_split(&(-&g.block), q).map(|b| -b),
        (Kind::Pair(phi), true) => {
            let psi = grid_angles(phi, q, 1)?[0];
            let j = (&g.block - &id * phi.cos()) / phi.sin();
            Some(id * psi.cos() + j * psi.sin())
        }
        (Kind::Pair(phi), false) => rotation_split(&g.block, phi, q),
    }
}

/// Splits a unipotent block into distinct roots of unity of order `q`.
fn unipotent_split(b: &Matrix, q: usize) -> Option<Matrix> {
    let k = b.nrows();
    if q < 4 || k / 2 > q / 2 - 1 {
        return None;
    }
    let (z, mut t) = unipotent_schur(b);
    for p in 0..k / 2 {
        let s = 2 * p;
        let psi = 2.0 * PI * (p + 1) as f64 / q as f64;
        let b01 = t[(s, s + 1)];
        let (sin, cos) = psi.sin_cos();
        let pair = if b01.abs() >= sin {
            // Trace 2cos ψ and determinant 1, keeping the off-diagonal entry.
            let e = 2.0 - 2.0 * cos;
            [1.0 - e, b01, -e / b01, 1.0]
        } else {
            let b1 = if b01 < 0.0 { -sin } else { sin };
            [cos, b1, -sin * sin / b1, cos]
        };
        t[(s, s)] = pair[0];
        t[(s, s + 1)] = pair[1];
        t[(s + 1, s)] = pair[2];
        t[(s + 1, s + 1)] = pair[3];
    }
    Some(&z * t * z.transpose())
}

/// Orthogonal `z` with `zᵀbz` upper triangular up to noise, for unipotent `b`.
/// A general Schur solver may return a rotation-like 2×2 block here, since
/// the eigenvalue `1` is defective and numerically splits into a tiny pair.
fn unipotent_schur(b: &Matrix) -> (Matrix, Matrix) {
    let k = b.nrows();
    let mut z = Matrix::identity(k, k);
    for s in 0..k.saturating_sub(1) {
        let t = z.transpose() * b * &z;
        let sub = t.view((s, s), (k - s, k - s)) - Matrix::identity(k - s, k - s);
        let mut v = null_space(&sub, 1).column(0).into_owned();
        if v[0] > 0.0 {
            v = -v;
        }
        // Householder reflection sending e_1 to v.
        let mut u = v;
        u[0] -= 1.0;
        let norm = u.norm();
        if norm == 0.0 {
            continue;
        }
        u /= norm;
        let h = Matrix::identity(k - s, k - s) - &u * u.transpose() * 2.0;
        let tail = z.columns(s, k - s) * h;
        z.columns_mut(s, k - s).copy_from(&tail);
    }
    let mut t = (z.transpose() * b * &z).upper_triangle();
    t.fill_diagonal(1.0);
    (z, t)
}

/// Moves each 2×2 rotation block of a non-semisimple pair group to its own grid angle.
fn rotation_split(b: &Matrix, phi: f64, q: usize) -> Option<Matrix> {
    let k = b.nrows();
    let (z, mut t) = nalgebra::linalg::Schur::new(b.clone()).unpack();
    let angles = grid_angles(phi, q, k / 2)?;
    let mut s = 0;
    let mut used = 0;
    while s < k {
        if s + 1 < k && t[(s + 1, s)].abs() > 0.0 {
            let x = t.view((s, s), (2, 2)).into_owned();
            let tr = x.trace() / 2.0;
            let det = x.determinant();
            let w = (det - tr * tr).max(0.0).sqrt();
            if w == 0.0 {
                return None;
            }
            // x = m·(tr I + w J)·m⁻¹ with J = (x − tr I)/w.
            let j = (&x - Matrix::identity(2, 2) * tr) / w;
            let psi = angles[used];
            used += 1;
            let y = Matrix::identity(2, 2) * psi.cos() + j * psi.sin();
            t.view_mut((s, s), (2, 2)).copy_from(&y);
            for r in s..s + 2 {
                for c in 0..s {
                    t[(r, c)] = 0.0;
                }
            }
            s += 2;
        } else {
            return None;
        }
    }
    Some(&z * t * z.transpose())
}

/// The `count` grid angles `2πk/q` in `(0, π)` nearest to `phi`, distinct.
fn grid_angles(phi: f64, q: usize, count: usize) -> Option<Vec<f64>> {
    if q < 4 || count > q / 2 - 1 {
        return None;
    }
    let step = 2.0 * PI / q as f64;
    let mut ks: Vec<usize> = (1..q / 2).collect();
    ks.sort_by(|&a, &b| (a as f64 * step - phi).abs().total_cmp(&(b as f64 * step - phi).abs()));
    Some(ks[..count].iter().map(|&k| k as f64 * step).collect())
}

fn power(m: &Matrix, mut e: usize) -> Matrix {
    let mut base = m.clone();
    let mut acc = Matrix::identity(m.nrows(), m.ncols());
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_angles_are_distinct_and_nearest() {
        let a = grid_angles(1.0, 12, 2).unwrap();
        assert!((a[0] - PI / 3.0).abs() < 1e-15);
        assert!((a[1] - PI / 6.0).abs() < 1e-15);
        assert!(grid_angles(1.0, 2, 1).is_none());
    }

    #[test]
    fn power_by_squaring() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert_eq!(power(&m, 5)[(0, 1)], 5.0);
    }
}
