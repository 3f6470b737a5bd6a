//! Green-formula gradients and limited face extrapolation on unstructured meshes.

use nalgebra::Vector2;
use rayon::prelude::*;

use crate::mesh2d::{BoundaryKind, FaceNeighbor, Point, UnstructuredMesh};

/// Reconstructed fields `(ρ, ρu, ρv, p)`.
pub type Fields = [f64; 4];

#[derive(Debug, Clone, PartialEq)]
pub struct CellReconstruction {
    pub gradient: [Vector2<f64>; 4],
    pub alpha: [f64; 4],
    /// `(m_K, M_K)` per field over the neighbour set.
    pub bounds: [(f64, f64); 4],
    /// Extrapolated values, one per face of the cell in the cell's face order.
    pub face_values: Vec<Fields>,
}

/// Face mean on an internal face (`θ`-weighted) or a fluid boundary face (cell value).
pub fn face_mean(
    mesh: &UnstructuredMesh,
    k: usize,
    f: usize,
    z_k: f64,
    z_neighbor: Option<f64>,
) -> f64 {
    match (mesh.interface_point(k, f), z_neighbor) {
        // same as (1 − θ) z_K + θ z_L, but exact when z_L = z_K
        (Ok((_, theta)), Some(z_l)) => z_k + theta * (z_l - z_k),
        _ => z_k,
    }
}

/// Face mean on a wall: density and pressure copied, normal momentum removed.
pub fn wall_face_mean(z: &Fields, n: &Point) -> Fields {
    let q = Vector2::new(z[1], z[2]);
    let qt = q - q.dot(n) * n;
    [z[0], qt.x, qt.y, z[3]]
}

/// `(1/|K|) Σ |f| z̄_f n_f`, written as `Σ |f| (z̄_f − z_K) n_f` which is the same sum on
/// a closed polygon and vanishes exactly for a constant field.
pub fn green_gradient(mesh: &UnstructuredMesh, k: usize, z_k: f64, means: &[f64]) -> Vector2<f64> {
    let cell = &mesh.cells[k];
    let mut g = Vector2::zeros();
    for (&f, &zf) in cell.faces.iter().zip(means) {
        g += mesh.faces[f].length * (zf - z_k) * mesh.outward_normal(k, f);
    }
    g / cell.area
}

/// `α_K(z)` from the neighbour values and the faces taking part in the limitation.
pub fn limiting_coefficient(
    mesh: &UnstructuredMesh,
    k: usize,
    z_k: f64,
    neighbor_values: &[f64],
    gradient: &Vector2<f64>,
    strength: f64,
    limited_faces: &[usize],
) -> f64 {
    let x = mesh.cells[k].centroid;
    let denom = limited_faces
        .iter()
        .map(|&f| gradient.dot(&(mesh.faces[f].point - x)).abs())
        .fold(0.0, f64::max);
    if denom == 0.0 {
        return 1.0;
    }
    if neighbor_values.is_empty() {
        return 0.0;
    }
    let m = neighbor_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let mx = neighbor_values
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if z_k <= m || z_k >= mx {
        return 0.0;
    }
    (strength * (mx - z_k).min(z_k - m) / denom).min(1.0)
}

pub fn extrapolate_to_faces(
    mesh: &UnstructuredMesh,
    k: usize,
    z_k: f64,
    gradient: &Vector2<f64>,
    alpha: f64,
) -> Vec<f64> {
    let x = mesh.cells[k].centroid;
    mesh.cells[k]
        .faces
        .iter()
        .map(|&f| z_k + alpha * gradient.dot(&(mesh.faces[f].point - x)))
        .collect()
}

/// Full limited reconstruction of one cell from a snapshot of all cell fields.
pub fn reconstruct_cell(
    mesh: &UnstructuredMesh,
    k: usize,
    z: &[Fields],
    strength: f64,
) -> CellReconstruction {
    let cell = &mesh.cells[k];
    let nf = cell.faces.len();
    let mut means = vec![[0.0; 4]; nf];
    let mut neighbors: Vec<Fields> = Vec::with_capacity(nf);
    let mut limited = Vec::with_capacity(nf);
    for (i, &f) in cell.faces.iter().enumerate() {
        let face = &mesh.faces[f];
        match face.right {
            FaceNeighbor::Cell(_) => {
                let l = mesh.across(k, f).expect("internal face");
                for c in 0..4 {
                    means[i][c] = face_mean(mesh, k, f, z[k][c], Some(z[l][c]));
                }
                neighbors.push(z[l]);
                limited.push(f);
            }
            FaceNeighbor::Boundary(BoundaryKind::Wall) => {
                means[i] = wall_face_mean(&z[k], &mesh.outward_normal(k, f));
                neighbors.push(means[i]);
                limited.push(f);
            }
            FaceNeighbor::Boundary(_) => means[i] = z[k],
        }
    }
    let mut rec = CellReconstruction {
        gradient: [Vector2::zeros(); 4],
        alpha: [0.0; 4],
        bounds: [(0.0, 0.0); 4],
        face_values: vec![[0.0; 4]; nf],
    };
    for c in 0..4 {
        let zc: Vec<f64> = means.iter().map(|m| m[c]).collect();
        let nv: Vec<f64> = neighbors.iter().map(|v| v[c]).collect();
        let g = green_gradient(mesh, k, z[k][c], &zc);
        let a = limiting_coefficient(mesh, k, z[k][c], &nv, &g, strength, &limited);
        rec.gradient[c] = g;
        rec.alpha[c] = a;
        rec.bounds[c] = (
            nv.iter().copied().fold(f64::INFINITY, f64::min),
            nv.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        );
        for (i, v) in extrapolate_to_faces(mesh, k, z[k][c], &g, a)
            .into_iter()
            .enumerate()
        {
            rec.face_values[i][c] = v;
        }
    }
    rec
}

/// Reconstructs every cell from the same snapshot.
pub fn reconstruct_all(
    mesh: &UnstructuredMesh,
    z: &[Fields],
    strength: f64,
) -> Vec<CellReconstruction> {
    (0..mesh.n_cells())
        .into_par_iter()
        .map(|k| reconstruct_cell(mesh, k, z, strength))
        .collect()
}

/// Largest violation of `k(m − z_K) ≤ α∇z·(y − x) ≤ k(M − z_K)` over the faces of `k` that
/// take part in the limitation. Cells clamped to `α = 0` only need face values equal to `z_K`.
pub fn constraint_violation(
    mesh: &UnstructuredMesh,
    k: usize,
    z_k: &Fields,
    rec: &CellReconstruction,
    strength: f64,
) -> f64 {
    let mut worst: f64 = 0.0;
    let cell = &mesh.cells[k];
    for (i, &f) in cell.faces.iter().enumerate() {
        let limited = match mesh.faces[f].right {
            FaceNeighbor::Cell(_) | FaceNeighbor::Boundary(BoundaryKind::Wall) => true,
            FaceNeighbor::Boundary(_) => false,
        };
        for c in 0..4 {
            let incr = rec.face_values[i][c] - z_k[c];
            if rec.alpha[c] == 0.0 {
                worst = worst.max(incr.abs());
                continue;
            }
            if !limited {
                continue;
            }
            let (m, mx) = rec.bounds[c];
            if rec.alpha[c] == 1.0 && rec.gradient[c] == Vector2::zeros() {
                worst = worst.max(incr.abs());
                continue;
            }
            worst = worst
                .max(strength * (m - z_k[c]) - incr)
                .max(incr - strength * (mx - z_k[c]));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(nx: usize, ny: usize, wall_bottom: bool) -> UnstructuredMesh {
        let mut s = format!("vertices {}\n", (nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                s += &format!("{} {}\n", i as f64 / nx as f64, j as f64 / ny as f64);
            }
        }
        let v = |i: usize, j: usize| j * (nx + 1) + i;
        s += &format!("cells {}\n", nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                s += &format!(
                    "4 {} {} {} {}\n",
                    v(i, j),
                    v(i + 1, j),
                    v(i + 1, j + 1),
                    v(i, j + 1)
                );
            }
        }
        s += &format!("boundary {}\n", 2 * (nx + ny));
        let bottom = if wall_bottom { "wall" } else { "fluid" };
        for i in 0..nx {
            s += &format!("{} {} {bottom}\n", v(i, 0), v(i + 1, 0));
            s += &format!("{} {} fluid\n", v(i, ny), v(i + 1, ny));
        }
        for j in 0..ny {
            s += &format!("{} {} fluid\n", v(0, j), v(0, j + 1));
            s += &format!("{} {} fluid\n", v(nx, j), v(nx, j + 1));
        }
        UnstructuredMesh::parse(&s).unwrap()
    }

    fn perturbed_triangles(n: usize, seed: u64) -> UnstructuredMesh {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let h = 1.0 / n as f64;
        let mut s = format!("vertices {}\n", (n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                let interior = i > 0 && i < n && j > 0 && j < n;
                let (dx, dy) = if interior {
                    (
                        rng.random_range(-0.2..0.2) * h,
                        rng.random_range(-0.2..0.2) * h,
                    )
                } else {
                    (0.0, 0.0)
                };
                s += &format!("{} {}\n", i as f64 * h + dx, j as f64 * h + dy);
            }
        }
        let v = |i: usize, j: usize| j * (n + 1) + i;
        s += &format!("cells {}\n", 2 * n * n);
        for j in 0..n {
            for i in 0..n {
                s += &format!("3 {} {} {}\n", v(i, j), v(i + 1, j), v(i + 1, j + 1));
                s += &format!("3 {} {} {}\n", v(i, j), v(i + 1, j + 1), v(i, j + 1));
            }
        }
        s += &format!("boundary {}\n", 4 * n);
        for i in 0..n {
            s += &format!("{} {} wall\n", v(i, 0), v(i + 1, 0));
            s += &format!("{} {} wall\n", v(i, n), v(i + 1, n));
            s += &format!("{} {} fluid\n", v(0, i), v(0, i + 1));
            s += &format!("{} {} fluid\n", v(n, i), v(n, i + 1));
        }
        UnstructuredMesh::parse(&s).unwrap()
    }

    fn means_of(mesh: &UnstructuredMesh, k: usize, z: &[f64]) -> Vec<f64> {
        mesh.cells[k]
            .faces
            .iter()
            .map(|&f| face_mean(mesh, k, f, z[k], mesh.across(k, f).map(|l| z[l])))
            .collect()
    }

    #[test]
    fn internal_mean() {
        let m = grid(3, 3, false);
        let f = m.cells[4].faces[0];
        assert_eq!(face_mean(&m, 4, f, 1.0, Some(3.0)), 2.0);
        assert_eq!(face_mean(&m, 0, m.cells[0].faces[0], 1.5, None), 1.5);
    }

    #[test]
    fn wall_means() {
        let n = Point::new(0.0, -1.0);
        let z = [1.2, 0.7, 0.0, 2.0];
        assert_eq!(wall_face_mean(&z, &n), z);
        let z = [1.2, 0.0, -1.2, 2.0]; // u = n
        let w = wall_face_mean(&z, &n);
        assert_eq!(w, [1.2, 0.0, 0.0, 2.0]);
        let n = Point::new(0.6, 0.8);
        let w = wall_face_mean(&[2.0, 1.0, 3.0, 1.0], &n);
        assert!((w[1] * n.x + w[2] * n.y).abs() < 1e-15);
    }

    #[test]
    fn linear_field_on_cartesian_interior() {
        let m = grid(3, 3, false);
        let (a, b) = (2.0, -0.7);
        let z: Vec<f64> = m
            .cells
            .iter()
            .map(|c| a * c.centroid.x + b * c.centroid.y)
            .collect();
        let g = green_gradient(&m, 4, z[4], &means_of(&m, 4, &z));
        assert!((g - Vector2::new(a, b)).norm() < 1e-13);
        let limited: Vec<usize> = m.cells[4].faces.clone();
        let nv: Vec<f64> = limited
            .iter()
            .map(|&f| z[m.across(4, f).unwrap()])
            .collect();
        let alpha = limiting_coefficient(&m, 4, z[4], &nv, &g, 0.75, &limited);
        assert_eq!(alpha, 1.0);
        for (v, &f) in extrapolate_to_faces(&m, 4, z[4], &g, alpha)
            .iter()
            .zip(&m.cells[4].faces)
        {
            let y = m.faces[f].point;
            assert!((v - (a * y.x + b * y.y)).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_field_and_extremum() {
        let m = grid(3, 3, false);
        let z = vec![1.0; 9];
        let g = green_gradient(&m, 4, 1.0, &means_of(&m, 4, &z));
        assert_eq!(g, Vector2::zeros());
        let faces = m.cells[4].faces.clone();
        assert_eq!(
            limiting_coefficient(&m, 4, 1.0, &[1.0; 4], &g, 0.75, &faces),
            1.0
        );

        let mut z = vec![0.0; 9];
        z[4] = 1.0;
        z[5] = 0.5;
        let g = green_gradient(&m, 4, z[4], &means_of(&m, 4, &z));
        let nv: Vec<f64> = faces.iter().map(|&f| z[m.across(4, f).unwrap()]).collect();
        let alpha = limiting_coefficient(&m, 4, z[4], &nv, &g, 0.75, &faces);
        assert_eq!(alpha, 0.0);
        assert!(extrapolate_to_faces(&m, 4, z[4], &g, alpha)
            .iter()
            .all(|&v| v == 1.0));
    }

    #[test]
    fn gradient_is_linear() {
        let m = perturbed_triangles(4, 3);
        let z1: Vec<f64> = m.cells.iter().map(|c| c.centroid.x.sin()).collect();
        let z2: Vec<f64> = m
            .cells
            .iter()
            .map(|c| c.centroid.y * c.centroid.x)
            .collect();
        let sum: Vec<f64> = z1.iter().zip(&z2).map(|(a, b)| 2.0 * a + b).collect();
        for k in 0..m.n_cells() {
            let g1 = green_gradient(&m, k, z1[k], &means_of(&m, k, &z1));
            let g2 = green_gradient(&m, k, z2[k], &means_of(&m, k, &z2));
            let gs = green_gradient(&m, k, sum[k], &means_of(&m, k, &sum));
            assert!((gs - (2.0 * g1 + g2)).norm() < 1e-12);
        }
    }

    #[test]
    fn corner_wall_pseudo_neighbours() {
        let m = grid(3, 3, true);
        let z: Vec<Fields> = m
            .cells
            .iter()
            .map(|c| [1.0 + c.centroid.x, 0.3, -0.4 + c.centroid.y, 2.0])
            .collect();
        let rec = reconstruct_cell(&m, 1, &z, 0.75);
        // bottom wall face enters the bounds with zero normal momentum
        assert!(rec.bounds[2].0 <= 0.0 && rec.bounds[2].1 >= 0.0);
        assert!(constraint_violation(&m, 1, &z[1], &rec, 0.75) <= 1e-13);
    }

    #[test]
    fn uniform_flow_is_exact() {
        let m = perturbed_triangles(6, 11);
        let z = vec![[1.4, 0.42, -0.28, 1.0]; m.n_cells()];
        for (k, rec) in reconstruct_all(&m, &z, 0.75).iter().enumerate() {
            let wall = m.cells[k]
                .faces
                .iter()
                .any(|&f| m.faces[f].boundary() == Some(BoundaryKind::Wall));
            if wall {
                // the wall pseudo-neighbour breaks uniformity of the momentum only
                assert_eq!(rec.alpha[0], 1.0);
                assert_eq!(rec.alpha[3], 1.0);
            } else {
                assert_eq!(rec.alpha, [1.0; 4]);
                assert!(rec.face_values.iter().all(|v| *v == z[k]));
            }
            assert!(constraint_violation(&m, k, &z[k], rec, 0.75) <= 1e-13);
        }
    }

    proptest! {
        #[test]
        fn constraints_hold(seed in 0u64..1000, kk in prop::sample::select(vec![0.5, 0.75, 1.0])) {
            use rand::{Rng, SeedableRng};
            let m = perturbed_triangles(4, seed);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let z: Vec<Fields> = (0..m.n_cells())
                .map(|_| [rng.random_range(0.5..2.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.5..2.0)])
                .collect();
            for (k, rec) in reconstruct_all(&m, &z, kk).iter().enumerate() {
                prop_assert!(rec.alpha.iter().all(|a| (0.0..=1.0).contains(a)));
                prop_assert!(constraint_violation(&m, k, &z[k], rec, kk) <= 1e-13);
            }
        }

        #[test]
        fn alpha_shift_and_scale_invariant(seed in 0u64..200, shift in -5.0f64..5.0, scale in 0.1f64..10.0) {
            use rand::{Rng, SeedableRng};
            let m = perturbed_triangles(3, seed);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let z: Vec<f64> = (0..m.n_cells()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let zs: Vec<f64> = z.iter().map(|v| scale * v + shift).collect();
            for k in 0..m.n_cells() {
                let alpha = |z: &[f64]| {
                    let g = green_gradient(&m, k, z[k], &means_of(&m, k, z));
                    let faces: Vec<usize> = m.cells[k].faces.iter().copied().filter(|&f| m.across(k, f).is_some()).collect();
                    let nv: Vec<f64> = faces.iter().map(|&f| z[m.across(k, f).unwrap()]).collect();
                    limiting_coefficient(&m, k, z[k], &nv, &g, 0.75, &faces)
                };
                prop_assert!((alpha(&z) - alpha(&zs)).abs() < 1e-9);
            }
        }
    }
}
