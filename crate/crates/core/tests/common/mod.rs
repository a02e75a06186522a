#![allow(dead_code)]

use std::collections::HashSet;

use lls_core::curve::Component;
use lls_core::kernel::{KernelModel, RefinedSeries};
use lls_core::matrix::{Matrix, Vector};
use lls_core::scalar::Field;
use lls_core::subspace::{map_image, map_kernel, Subspace};
use lls_core::transfer::Direction;

/// Every vector of F_p^n.
pub fn all_vectors(field: Field, n: usize) -> Vec<Vector> {
    let elems = field.elements().expect("finite field");
    let mut out: Vec<Vector> = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                elems.iter().map(move |e| {
                    let mut w = v.clone();
                    w.push(e.clone());
                    w
                })
            })
            .collect();
    }
    out
}

/// Every element of a subspace over a finite field.
pub fn elements(s: &Subspace) -> HashSet<Vector> {
    let f = s.field();
    let n = s.ambient_dim();
    all_vectors(f, s.dim())
        .into_iter()
        .map(|coeffs| {
            let mut acc = vec![f.zero(); n];
            for (c, b) in coeffs.iter().zip(s.basis_vectors()) {
                for (a, x) in acc.iter_mut().zip(b) {
                    *a = &*a + &(c * x);
                }
            }
            acc
        })
        .collect()
}

pub fn matrix(field: Field, rows: usize, cols: usize, entries: &[i64]) -> Matrix {
    let data: Vec<Vector> = (0..rows)
        .map(|r| (0..cols).map(|c| field.from_i64(entries[(r * cols + c) % entries.len().max(1)])).collect())
        .collect();
    Matrix::from_rows(field, cols, data).unwrap()
}

pub fn span(field: Field, n: usize, vecs: &[Vec<i64>]) -> Subspace {
    let rows = vecs.iter().map(|v| (0..n).map(|k| field.from_i64(v[k % v.len()])).collect()).collect();
    Subspace::span(field, n, rows).unwrap()
}

/// Checks kernel, preimage, intersection and images at every cell of an
/// instance over a small prime field against exhaustive enumeration.
pub fn brute_force_agrees(h: &RefinedSeries) -> Result<(), String> {
    let m = KernelModel::new(h.clone(), Default::default()).map_err(|e| e.to_string())?;
    let f = h.curve().field();
    let series: Vec<HashSet<Vector>> = Component::ALL.iter().map(|&q| elements(h.v(q))).collect();
    let mut brute_k = std::collections::HashMap::new();
    for (i, l) in m.grid.keys() {
        let space = m.table.ambient((i, l)).unwrap();
        let alphas: Vec<Matrix> = Component::ALL.iter().map(|&q| space.alpha(q)).collect();
        let brute: HashSet<Vector> = all_vectors(f, space.dim())
            .into_iter()
            .filter(|v| alphas.iter().zip(&series).all(|(a, s)| s.contains(&a.apply(v).unwrap())))
            .collect();
        if elements(m.grid.get(i, l)) != brute {
            return Err(format!("K_{i}{l} differs from enumeration"));
        }
        brute_k.insert((i, l), brute);
    }
    for edge in m.table.edges() {
        for dir in [Direction::Down, Direction::Up] {
            let map = m.table.get(edge.base.cell(), edge.q, dir).unwrap();
            let src = map.source.cell();
            let img: HashSet<Vector> = brute_k[&src].iter().map(|v| map.apply(v)).collect();
            if elements(&map_image(&map.matrix, m.grid.get(src.0, src.1)).unwrap()) != img {
                return Err(format!("image of K at {src:?} along {edge:?} {dir:?} differs"));
            }
            let ker: HashSet<Vector> = all_vectors(f, map.matrix.ncols())
                .into_iter()
                .filter(|v| map.apply(v).iter().all(|s| s.is_zero()))
                .collect();
            if elements(&map_kernel(&map.matrix)) != ker {
                return Err(format!("kernel along {edge:?} {dir:?} differs"));
            }
        }
    }
    Ok(())
}
