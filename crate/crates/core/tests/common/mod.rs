#![allow(dead_code)]

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Mesh text for `[0, 1]²` cut into `n × n` quads, `split` of them halved into triangles.
/// Interior vertices are jittered; walls on the bottom and top, `sides` on the left and right.
pub fn mixed_mesh(n: usize, split: usize, jitter: f64, sides: &str, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1.0 / n as f64;
    let v = |i: usize, j: usize| j * (n + 1) + i;
    let mut s = format!("vertices {}\n", (n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let (mut x, mut y) = (i as f64 * h, j as f64 * h);
            if i > 0 && i < n && j > 0 && j < n {
                x += jitter * h * rng.random_range(-1.0..1.0);
                y += jitter * h * rng.random_range(-1.0..1.0);
            }
            s += &format!("{x:.17e} {y:.17e}\n");
        }
    }
    let halved: Vec<usize> = sample(&mut rng, n * n, split).into_vec();
    let mut cells = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1));
            if halved.contains(&(j * n + i)) {
                if (i + j) % 2 == 0 {
                    cells.push(format!("3 {a} {b} {c}"));
                    cells.push(format!("3 {a} {c} {d}"));
                } else {
                    cells.push(format!("3 {a} {b} {d}"));
                    cells.push(format!("3 {b} {c} {d}"));
                }
            } else {
                cells.push(format!("4 {a} {b} {c} {d}"));
            }
        }
    }
    s += &format!("cells {}\n{}\n", cells.len(), cells.join("\n"));
    s += &format!("boundary {}\n", 4 * n);
    for i in 0..n {
        s += &format!("{} {} wall\n", v(i, 0), v(i + 1, 0));
        s += &format!("{} {} wall\n", v(i, n), v(i + 1, n));
    }
    for j in 0..n {
        s += &format!("{} {} {sides}\n", v(0, j), v(0, j + 1));
        s += &format!("{} {} {sides}\n", v(n, j), v(n, j + 1));
    }
    s
}
