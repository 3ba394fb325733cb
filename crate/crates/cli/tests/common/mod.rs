//! Test-side references that share no code with the library.
#![allow(dead_code)]

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use skinseg::{Connectivity, Label, TriangleMesh};

pub fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["skinseg", "--quiet"];
    argv.extend_from_slice(args);
    skinseg_cli::run(argv)
}

pub fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

/// Writes a phantom through the CLI and returns the header path.
pub fn phantom(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let out = dir.join(format!("{name}.json"));
    let mut args = vec!["phantom", "-o", p(&out)];
    args.extend_from_slice(extra);
    assert_eq!(run(&args), 0, "phantom {name}");
    out
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Labels from connected components of the below-isovalue pixels.
///
/// Union-find over all sub-isovalue pixels; the seed's component is
/// background, at-or-above pixels touching it are boundary, the rest interior.
pub fn component_oracle(
    nx: usize,
    ny: usize,
    data: &[f32],
    iso: f64,
    seed: (usize, usize),
    conn: Connectivity,
) -> Vec<Label> {
    let low = |x: usize, y: usize| (data[x + nx * y] as f64) < iso;
    let mut parent: Vec<usize> = (0..nx * ny).collect();
    let forward: &[(i64, i64)] = match conn {
        Connectivity::Four => &[(1, 0), (0, 1)],
        Connectivity::Eight => &[(1, 0), (0, 1), (1, 1), (-1, 1)],
    };
    for y in 0..ny {
        for x in 0..nx {
            if !low(x, y) {
                continue;
            }
            for &(dx, dy) in forward {
                let (qx, qy) = (x as i64 + dx, y as i64 + dy);
                if qx < 0 || qx >= nx as i64 || qy >= ny as i64 {
                    continue;
                }
                let (qx, qy) = (qx as usize, qy as usize);
                if low(qx, qy) {
                    let a = find(&mut parent, x + nx * y);
                    let b = find(&mut parent, qx + nx * qy);
                    parent[a] = b;
                }
            }
        }
    }
    let root = find(&mut parent, seed.0 + nx * seed.1);
    let bg: Vec<bool> = (0..nx * ny)
        .map(|i| low(i % nx, i / nx) && find(&mut parent, i) == root)
        .collect();
    (0..nx * ny)
        .map(|i| {
            let (x, y) = ((i % nx) as i64, (i / nx) as i64);
            if bg[i] {
                return Label::Background;
            }
            let touches = (-1i64..=1).any(|dy| {
                (-1i64..=1).any(|dx| {
                    let ok = match conn {
                        Connectivity::Four => (dx == 0) != (dy == 0),
                        Connectivity::Eight => dx != 0 || dy != 0,
                    };
                    let (qx, qy) = (x + dx, y + dy);
                    ok && qx >= 0
                        && qy >= 0
                        && qx < nx as i64
                        && qy < ny as i64
                        && bg[(qx + nx as i64 * qy) as usize]
                })
            });
            if !low(x as usize, y as usize) && touches {
                Label::Boundary
            } else {
                Label::Interior
            }
        })
        .collect()
}

/// O(n·m) nearest-vertex distances.
pub fn brute_force_distances(from: &[[f64; 3]], to: &[[f64; 3]]) -> Vec<f64> {
    from.iter()
        .map(|a| {
            to.iter()
                .map(|b| {
                    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
                    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
                })
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .collect()
}

/// Every undirected edge shared by exactly two triangles.
pub fn closed_by_edge_count(mesh: &TriangleMesh) -> bool {
    let mut uses: HashMap<(u32, u32), usize> = HashMap::new();
    for t in &mesh.triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *uses.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    !uses.is_empty() && uses.values().all(|&n| n == 2)
}
