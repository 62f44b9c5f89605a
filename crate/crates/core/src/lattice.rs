//! Short-vector enumeration for integral positive-definite quadratic forms:
//! LLL pre-reduction followed by Fincke–Pohst depth-first search.

use crate::exec::Exec;

/// A lattice given by an integral Gram matrix, LLL-reduced on construction.
#[derive(Debug, Clone)]
pub struct Lattice {
    dim: usize,
    /// Rows are the reduced basis vectors in original coordinates.
    transform: Vec<Vec<i64>>,
    reduced_gram: Vec<Vec<i64>>,
    /// q[i][i] = squared GS length, q[i][j] (j > i) = μ_{j,i}.
    q: Vec<Vec<f64>>,
}

fn gram_schmidt(g: &[Vec<i64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = g.len();
    let mut mu = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for i in 0..n {
        for j in 0..i {
            let mut s = g[i][j] as f64;
            for k in 0..j {
                s -= mu[j][k] * mu[i][k] * b[k];
            }
            mu[i][j] = s / b[j];
        }
        let mut s = g[i][i] as f64;
        for k in 0..i {
            s -= mu[i][k] * mu[i][k] * b[k];
        }
        b[i] = s;
        mu[i][i] = 1.0;
    }
    (mu, b)
}

/// b_k ← b_k − r·b_j on both the Gram matrix and the transform.
fn row_sub(g: &mut [Vec<i64>], t: &mut [Vec<i64>], k: usize, j: usize, r: i64) {
    let n = g.len();
    for i in 0..n {
        g[k][i] -= r * g[j][i];
    }
    for i in 0..n {
        g[i][k] -= r * g[i][j];
    }
    for i in 0..t[k].len() {
        t[k][i] -= r * t[j][i];
    }
}

fn swap(g: &mut [Vec<i64>], t: &mut [Vec<i64>], a: usize, b: usize) {
    g.swap(a, b);
    for row in g.iter_mut() {
        row.swap(a, b);
    }
    t.swap(a, b);
}

fn lll(g: &mut [Vec<i64>], t: &mut [Vec<i64>], delta: f64) {
    let n = g.len();
    let mut k = 1;
    while k < n {
        let (mut mu, b) = gram_schmidt(g);
        for j in (0..k).rev() {
            let r = mu[k][j].round() as i64;
            if r != 0 {
                row_sub(g, t, k, j, r);
                for l in 0..j {
                    mu[k][l] -= r as f64 * mu[j][l];
                }
                mu[k][j] -= r as f64;
            }
        }
        if b[k] < (delta - mu[k][k - 1] * mu[k][k - 1]) * b[k - 1] {
            swap(g, t, k, k - 1);
            k = k.max(2) - 1;
        } else {
            k += 1;
        }
    }
}

impl Lattice {
    pub fn new(gram: &[Vec<i64>]) -> Lattice {
        let dim = gram.len();
        let mut g: Vec<Vec<i64>> = gram.to_vec();
        let mut transform: Vec<Vec<i64>> = (0..dim)
            .map(|i| (0..dim).map(|j| i64::from(i == j)).collect())
            .collect();
        if dim > 1 {
            lll(&mut g, &mut transform, 0.99);
        }
        let (mu, b) = gram_schmidt(&g);
        let mut q = vec![vec![0.0; dim]; dim];
        for i in 0..dim {
            q[i][i] = b[i];
            for j in i + 1..dim {
                q[i][j] = mu[j][i];
            }
        }
        Lattice {
            dim,
            transform,
            reduced_gram: g,
            q,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Reduced basis vectors in original coordinates.
    pub fn reduced_basis(&self) -> &[Vec<i64>] {
        &self.transform
    }

    pub fn reduced_gram(&self) -> &[Vec<i64>] {
        &self.reduced_gram
    }

    /// Map reduced coordinates to original coordinates.
    pub fn to_original(&self, x: &[i64]) -> Vec<i64> {
        let mut out = vec![0i64; self.dim];
        for (xi, row) in x.iter().zip(&self.transform) {
            if *xi != 0 {
                for (o, r) in out.iter_mut().zip(row) {
                    *o += xi * r;
                }
            }
        }
        out
    }

    /// Exact value of the form at reduced coordinates.
    pub fn norm(&self, x: &[i64]) -> i64 {
        let g = &self.reduced_gram;
        let mut s = 0i64;
        for i in 0..self.dim {
            if x[i] == 0 {
                continue;
            }
            let mut r = 0i64;
            for j in 0..self.dim {
                r += g[i][j] * x[j];
            }
            s += x[i] * r;
        }
        s
    }

    /// Visit every nonzero vector with form value ≤ `bound`, in reduced
    /// coordinates. With `half`, only one of each ±x pair is visited.
    /// Results are returned in a schedule-independent order.
    pub fn enumerate<R, F>(&self, bound: f64, half: bool, exec: Exec, visit: F) -> Vec<R>
    where
        R: Send,
        F: Fn(&[i64]) -> Option<R> + Sync + Send,
    {
        if self.dim == 0 {
            return Vec::new();
        }
        let slack = bound * 1e-9 + 1e-9;
        let bound = bound + slack;
        // Split the top levels into independent subtrees.
        let split = self.dim.min(3);
        let mut prefixes: Vec<Node> = Vec::new();
        let root = Node::new(self.dim, bound);
        self.expand(root, half, self.dim - split, &mut |node| {
            prefixes.push(node)
        });
        exec.flat_map(&prefixes, |node| {
            let mut out = Vec::new();
            self.expand(node.clone(), half, 0, &mut |leaf| {
                if leaf.x.iter().any(|&c| c != 0) {
                    if let Some(r) = visit(&leaf.x) {
                        out.push(r);
                    }
                }
            });
            out
        })
    }

    /// Number of nonzero vectors with form value ≤ `bound`.
    pub fn count(&self, bound: f64, half: bool, exec: Exec) -> usize {
        self.enumerate(bound, half, exec, |_| Some(())).len()
    }

    /// Depth-first expansion of `node` down to `stop` fixed levels.
    fn expand(&self, node: Node, half: bool, stop: usize, emit: &mut dyn FnMut(Node)) {
        let mut node = node;
        self.descend(&mut node, half, stop, emit);
    }

    fn descend(&self, node: &mut Node, half: bool, stop: usize, emit: &mut dyn FnMut(Node)) {
        let level = node.level;
        if level == stop {
            emit(node.clone());
            return;
        }
        let i = level - 1;
        let mut c = 0.0;
        for j in level..self.dim {
            c -= self.q[i][j] * node.x[j] as f64;
        }
        let rem = node.rem;
        let qi = self.q[i][i];
        let r = (rem / qi).max(0.0).sqrt();
        let lo = if half && node.zero_above {
            0
        } else {
            (c - r).ceil() as i64
        };
        let hi = (c + r).floor() as i64;
        let zero_above = node.zero_above;
        for xi in lo..=hi {
            let d = xi as f64 - c;
            let used = qi * d * d;
            if used > rem {
                continue;
            }
            node.x[i] = xi;
            node.level = i;
            node.rem = rem - used;
            node.zero_above = zero_above && xi == 0;
            self.descend(node, half, stop, emit);
        }
        node.x[i] = 0;
        node.level = level;
        node.rem = rem;
        node.zero_above = zero_above;
    }
}

#[derive(Debug, Clone)]
struct Node {
    x: Vec<i64>,
    level: usize,
    rem: f64,
    zero_above: bool,
}

impl Node {
    fn new(dim: usize, bound: f64) -> Node {
        Node {
            x: vec![0; dim],
            level: dim,
            rem: bound,
            zero_above: true,
        }
    }
}
