//! Exactly integrated multilinear element matrices on a cell of side `h`.
//!
//! Local vertex `a` of a cell has offset bit `a_m = (a >> m) & 1` along axis
//! `m`, matching [`GridDomain::cell_vertices`](crate::geometry::GridDomain::cell_vertices).

/// `G[k][l][a][b] = ∫_cell ∂_k φ_a ∂_l φ_b`.
pub type GradProducts = [[[[f64; 4]; 4]; 2]; 2];

pub fn gradient_products(dim: usize, h: f64) -> GradProducts {
    let stiff = |a: usize, b: usize| if a == b { 1.0 / h } else { -1.0 / h };
    let mass = |a: usize, b: usize| if a == b { h / 3.0 } else { h / 6.0 };
    // ∫ φ'_a φ_b on one interval
    let mixed = |a: usize, _b: usize| if a == 0 { -0.5 } else { 0.5 };
    let nv = 1usize << dim;
    let mut g = [[[[0.0; 4]; 4]; 2]; 2];
    for k in 0..dim {
        for l in 0..dim {
            for a in 0..nv {
                for b in 0..nv {
                    let mut p = 1.0;
                    for m in 0..dim {
                        let (am, bm) = ((a >> m) & 1, (b >> m) & 1);
                        p *= match (m == k, m == l) {
                            (true, true) => stiff(am, bm),
                            (true, false) => mixed(am, bm),
                            (false, true) => mixed(bm, am),
                            (false, false) => mass(am, bm),
                        };
                    }
                    g[k][l][a][b] = p;
                }
            }
        }
    }
    g
}

fn symmetrize(k: &mut [f64], m: usize) {
    for a in 0..m {
        for b in a + 1..m {
            let s = 0.5 * (k[a * m + b] + k[b * m + a]);
            k[a * m + b] = s;
            k[b * m + a] = s;
        }
    }
}

/// Stiffness of `½∫ coeff·|∇u|²`, size `2^dim`.
pub fn scalar_stiffness(dim: usize, h: f64, coeff: f64) -> Vec<f64> {
    let g = gradient_products(dim, h);
    let m = 1usize << dim;
    let mut k = vec![0.0; m * m];
    for a in 0..m {
        for b in 0..m {
            k[a * m + b] = coeff * (0..dim).map(|d| g[d][d][a][b]).sum::<f64>();
        }
    }
    symmetrize(&mut k, m);
    k
}

/// Stiffness of `μ∫|E(U)|² + (λ/2)∫(div U)²`, size `2^dim·dim`, local index
/// `vertex·dim + component`.
pub fn elastic_stiffness(dim: usize, h: f64, mu: f64, lambda: f64) -> Vec<f64> {
    let g = gradient_products(dim, h);
    let nv = 1usize << dim;
    let m = nv * dim;
    let mut k = vec![0.0; m * m];
    for a in 0..nv {
        for i in 0..dim {
            for b in 0..nv {
                for j in 0..dim {
                    let mut v = mu * g[j][i][a][b] + lambda * g[i][j][a][b];
                    if i == j {
                        v += mu * (0..dim).map(|d| g[d][d][a][b]).sum::<f64>();
                    }
                    k[(a * dim + i) * m + b * dim + j] = v;
                }
            }
        }
    }
    symmetrize(&mut k, m);
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(k: &[f64], v: &[f64]) -> f64 {
        let m = v.len();
        let mut s = 0.0;
        for a in 0..m {
            for b in 0..m {
                s += v[a] * k[a * m + b] * v[b];
            }
        }
        0.5 * s
    }

    #[test]
    fn one_dimensional_stiffness() {
        let k = scalar_stiffness(1, 0.5, 1.0);
        assert_eq!(k, vec![2.0, -2.0, -2.0, 2.0]);
        let e = elastic_stiffness(1, 0.5, 1.0, 3.0);
        assert_eq!(e, vec![10.0, -10.0, -10.0, 10.0]);
    }

    #[test]
    fn linear_field_energy_2d() {
        // u = x on a unit cell: ½∫|∇u|² = ½
        let k = scalar_stiffness(2, 1.0, 1.0);
        let u = [0.0, 1.0, 0.0, 1.0];
        assert!((quad(&k, &u) - 0.5).abs() < 1e-15);
        let rowsum: Vec<f64> = (0..4).map(|a| (0..4).map(|b| k[a * 4 + b]).sum()).collect();
        assert!(rowsum.iter().all(|s| s.abs() < 1e-15));
    }

    #[test]
    fn stretch_energy_density() {
        // U = (x, 0) on a unit cell: energy μ + λ/2
        let (mu, lambda) = (1.3, 0.7);
        let k = elastic_stiffness(2, 1.0, mu, lambda);
        let xs = [0.0, 1.0, 0.0, 1.0];
        let mut v = vec![0.0; 8];
        for a in 0..4 {
            v[a * 2] = xs[a];
        }
        assert!((quad(&k, &v) - (mu + 0.5 * lambda)).abs() < 1e-14);
    }

    #[test]
    fn rigid_motions_have_no_energy() {
        let h = 0.3;
        let k = elastic_stiffness(2, h, 2.0, 5.0);
        let pts = [[0.1, 0.2], [0.1 + h, 0.2], [0.1, 0.2 + h], [0.1 + h, 0.2 + h]];
        let fields: [fn([f64; 2]) -> [f64; 2]; 3] = [|_| [1.0, 0.0], |_| [0.0, 1.0], |p| [-p[1], p[0]]];
        for f in fields {
            let v: Vec<f64> = pts.iter().flat_map(|&p| f(p)).collect();
            let kv: Vec<f64> = (0..8).map(|a| (0..8).map(|b| k[a * 8 + b] * v[b]).sum()).collect();
            assert!(kv.iter().all(|x| x.abs() < 1e-13), "{kv:?}");
        }
    }

    #[test]
    fn element_matrices_are_symmetric() {
        let k = elastic_stiffness(2, 0.1, 1.0, 2.0);
        for a in 0..8 {
            for b in 0..8 {
                assert_eq!(k[a * 8 + b], k[b * 8 + a]);
            }
        }
    }
}
