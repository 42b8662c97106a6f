//! Small exact integer matrices: Bareiss determinants, adjugates and
//! Smith normal form. Sizes here are the field degree (or twice it), so
//! everything is dense and `i128`.

use std::fmt;

#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i128>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[i128]> = (0..self.rows).map(|r| self.row(r)).collect();
        f.debug_struct("IntMatrix").field("rows", &rows).finish()
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<i128>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> i128 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: i128) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[i128] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for r in 0..self.rows {
                self.data.swap(r * self.cols + a, r * self.cols + b);
            }
        }
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> i128 {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return 1;
        }
        let mut a = self.clone();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if a.get(k, k) == 0 {
                match (k + 1..n).find(|&r| a.get(r, k) != 0) {
                    Some(r) => {
                        a.swap_rows(k, r);
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            let pivot = a.get(k, k);
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * pivot - a.get(i, k) * a.get(k, j)) / prev;
                    a.set(i, j, v);
                }
                a.set(i, k, 0);
            }
            prev = pivot;
        }
        sign * a.get(n - 1, n - 1)
    }

    fn minor(&self, skip_r: usize, skip_c: usize) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.rows - 1, self.cols - 1);
        let mut rr = 0;
        for r in 0..self.rows {
            if r == skip_r {
                continue;
            }
            let mut cc = 0;
            for c in 0..self.cols {
                if c == skip_c {
                    continue;
                }
                out.set(rr, cc, self.get(r, c));
                cc += 1;
            }
            rr += 1;
        }
        out
    }

    /// Classical adjugate, so that `adj * self = det * I`.
    pub fn adjugate(&self) -> IntMatrix {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut adj = IntMatrix::zeros(n, n);
        if n == 1 {
            adj.set(0, 0, 1);
            return adj;
        }
        for r in 0..n {
            for c in 0..n {
                let cof = self.minor(r, c).det();
                let signed = if (r + c) % 2 == 0 { cof } else { -cof };
                adj.set(c, r, signed);
            }
        }
        adj
    }

    pub fn mul_vec(&self, v: &[i128]) -> Vec<i128> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Invariant factors (absolute values, in order) of the Smith normal form.
    /// Zero factors for rank-deficient matrices are omitted.
    pub fn smith_diagonal(&self) -> Vec<i128> {
        let mut a = self.clone();
        let (nr, nc) = (a.rows, a.cols);
        let mut diag = Vec::new();
        for t in 0..nr.min(nc) {
            // smallest nonzero entry of the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for r in t..nr {
                for c in t..nc {
                    let v = a.get(r, c);
                    if v != 0 && best.is_none_or(|(br, bc)| v.abs() < a.get(br, bc).abs()) {
                        best = Some((r, c));
                    }
                }
            }
            let Some((br, bc)) = best else { break };
            a.swap_rows(t, br);
            a.swap_cols(t, bc);
            loop {
                let p = a.get(t, t);
                let mut clean = true;
                for r in t + 1..nr {
                    let q = a.get(r, t) / p;
                    if q != 0 {
                        for c in t..nc {
                            let v = a.get(r, c) - q * a.get(t, c);
                            a.set(r, c, v);
                        }
                    }
                    if a.get(r, t) != 0 {
                        clean = false;
                    }
                }
                for c in t + 1..nc {
                    let q = a.get(t, c) / p;
                    if q != 0 {
                        for r in t..nr {
                            let v = a.get(r, c) - q * a.get(r, t);
                            a.set(r, c, v);
                        }
                    }
                    if a.get(t, c) != 0 {
                        clean = false;
                    }
                }
                if !clean {
                    // a remainder smaller than the pivot exists; bring it in
                    let mut best = (t, t);
                    for r in t + 1..nr {
                        if a.get(r, t) != 0 && a.get(r, t).abs() < a.get(best.0, best.1).abs() {
                            best = (r, t);
                        }
                    }
                    for c in t + 1..nc {
                        if a.get(t, c) != 0 && a.get(t, c).abs() < a.get(best.0, best.1).abs() {
                            best = (t, c);
                        }
                    }
                    a.swap_rows(t, best.0);
                    a.swap_cols(t, best.1);
                    continue;
                }
                // pivot must divide the remaining block
                let offender = (t + 1..nr)
                    .flat_map(|r| (t + 1..nc).map(move |c| (r, c)))
                    .find(|&(r, c)| a.get(r, c) % p != 0);
                match offender {
                    Some((r, _)) => {
                        for c in t..nc {
                            let v = a.get(t, c) + a.get(r, c);
                            a.set(t, c, v);
                        }
                    }
                    None => break,
                }
            }
            diag.push(a.get(t, t).abs());
        }
        diag
    }

    /// Index in `Z^rows` of the Z-module spanned by the columns, or `None`
    /// when the columns do not have full rank.
    pub fn column_span_index(&self) -> Option<u128> {
        let diag = self.smith_diagonal();
        if diag.len() < self.rows {
            return None;
        }
        Some(diag.iter().map(|&d| d as u128).product())
    }
}
