//! Marching-squares extraction of the zero level set of a scalar field.
//!
//! Used to seed dense boundary polylines for implicitly defined domains.
//! Segment endpoints live on grid edges, so chaining is exact (edges are
//! keyed by index, not by floating-point position).

use std::collections::HashMap;

use super::point::{pt, Point};

/// Edge identifier inside the sampling grid.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum EdgeId {
    /// Horizontal edge from node (i, j) to (i+1, j).
    H(usize, usize),
    /// Vertical edge from node (i, j) to (i, j+1).
    V(usize, usize),
}

/// Traces the zero level set of `phi` (negative = inside) over a regular
/// `nx × ny` cell grid on the box [lo, hi].  Returns chained polylines;
/// closed loops have matching first/last points removed and are flagged by
/// the caller's use (the chain returned here simply repeats no point).
pub fn trace_zero_contour<F: Fn(Point) -> f64>(
    phi: F,
    lo: Point,
    hi: Point,
    nx: usize,
    ny: usize,
) -> Vec<Vec<Point>> {
    assert!(nx >= 2 && ny >= 2);
    let dx = (hi.x - lo.x) / nx as f64;
    let dy = (hi.y - lo.y) / ny as f64;
    let node = |i: usize, j: usize| pt(lo.x + i as f64 * dx, lo.y + j as f64 * dy);

    // Sample the field; exact zeros are nudged to "outside" so every node
    // has a decisive sign (∂Ω belongs to the complement of the open set).
    let mut vals = vec![0.0f64; (nx + 1) * (ny + 1)];
    for j in 0..=ny {
        for i in 0..=nx {
            let v = phi(node(i, j));
            vals[j * (nx + 1) + i] = if v == 0.0 { f64::MIN_POSITIVE } else { v };
        }
    }
    let val = |i: usize, j: usize| vals[j * (nx + 1) + i];

    let mut edge_points: HashMap<EdgeId, Point> = HashMap::new();
    let mut segments: Vec<(EdgeId, EdgeId)> = Vec::new();

    let mut interp = |id: EdgeId, a: Point, b: Point, va: f64, vb: f64| -> EdgeId {
        edge_points.entry(id).or_insert_with(|| {
            let t = va / (va - vb);
            a + (b - a) * t.clamp(0.0, 1.0)
        });
        id
    };

    for j in 0..ny {
        for i in 0..nx {
            let v00 = val(i, j);
            let v10 = val(i + 1, j);
            let v11 = val(i + 1, j + 1);
            let v01 = val(i, j + 1);
            let inside =
                (v00 < 0.0, v10 < 0.0, v11 < 0.0, v01 < 0.0);
            let code = (inside.0 as u8)
                | (inside.1 as u8) << 1
                | (inside.2 as u8) << 2
                | (inside.3 as u8) << 3;
            if code == 0 || code == 15 {
                continue;
            }
            let p00 = node(i, j);
            let p10 = node(i + 1, j);
            let p11 = node(i + 1, j + 1);
            let p01 = node(i, j + 1);
            let bottom = || (EdgeId::H(i, j), p00, p10, v00, v10);
            let right = || (EdgeId::V(i + 1, j), p10, p11, v10, v11);
            let top = || (EdgeId::H(i, j + 1), p01, p11, v01, v11);
            let left = || (EdgeId::V(i, j), p00, p01, v00, v01);

            let mut emit = |e1: (EdgeId, Point, Point, f64, f64),
                            e2: (EdgeId, Point, Point, f64, f64)| {
                let a = interp(e1.0, e1.1, e1.2, e1.3, e1.4);
                let b = interp(e2.0, e2.1, e2.2, e2.3, e2.4);
                segments.push((a, b));
            };

            match code {
                1 | 14 => emit(bottom(), left()),
                2 | 13 => emit(bottom(), right()),
                4 | 11 => emit(right(), top()),
                8 | 7 => emit(left(), top()),
                3 | 12 => emit(left(), right()),
                6 | 9 => emit(bottom(), top()),
                5 | 10 => {
                    // Saddle: disambiguate with the center sample.
                    let center = phi(pt(
                        0.5 * (p00.x + p10.x),
                        0.5 * (p00.y + p01.y),
                    ));
                    let center_inside = center < 0.0;
                    let connect_first = (code == 5) == center_inside;
                    if connect_first {
                        emit(bottom(), right());
                        emit(left(), top());
                    } else {
                        emit(bottom(), left());
                        emit(right(), top());
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    chain_segments(&segments, &edge_points)
}

fn chain_segments(
    segments: &[(EdgeId, EdgeId)],
    points: &HashMap<EdgeId, Point>,
) -> Vec<Vec<Point>> {
    let mut adjacency: HashMap<EdgeId, Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        adjacency.entry(*a).or_default().push(k);
        adjacency.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut chains = Vec::new();

    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (a0, b0) = segments[start];
        let mut chain = vec![a0, b0];
        // Extend forward from the tail, then backward from the head.
        for _pass in 0..2 {
            loop {
                let tail = *chain.last().unwrap();
                let next = adjacency
                    .get(&tail)
                    .and_then(|ks| ks.iter().find(|&&k| !used[k]).copied());
                match next {
                    Some(k) => {
                        used[k] = true;
                        let (a, b) = segments[k];
                        chain.push(if a == tail { b } else { a });
                    }
                    None => break,
                }
            }
            chain.reverse();
        }
        let pts: Vec<Point> = chain.iter().map(|id| points[id]).collect();
        chains.push(pts);
    }
    // Largest first: callers typically want the principal loop.
    chains.sort_by_key(|c| std::cmp::Reverse(c.len()));
    chains
}
