use std::fmt;

/// Square boolean matrix produced by a selector. Rows are query positions,
/// columns are key positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SelectionMatrix {
    n: usize,
    bits: Vec<bool>,
}

impl SelectionMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> bool) -> SelectionMatrix {
        let mut bits = Vec::with_capacity(n * n);
        for q in 0..n {
            for k in 0..n {
                bits.push(f(q, k));
            }
        }
        SelectionMatrix { n, bits }
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> SelectionMatrix {
        let n = rows.len();
        assert!(
            rows.iter().all(|r| r.len() == n),
            "selection matrix must be square"
        );
        SelectionMatrix {
            n,
            bits: rows.concat(),
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, query: usize, key: usize) -> bool {
        self.bits[query * self.n + key]
    }

    pub fn row(&self, query: usize) -> &[bool] {
        &self.bits[query * self.n..(query + 1) * self.n]
    }

    pub fn selected(&self, query: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(query)
            .iter()
            .enumerate()
            .filter_map(|(k, b)| b.then_some(k))
    }

    pub fn width(&self, query: usize) -> usize {
        self.row(query).iter().filter(|b| **b).count()
    }

    pub fn rows(&self) -> Vec<Vec<bool>> {
        (0..self.n).map(|q| self.row(q).to_vec()).collect()
    }

    pub fn zip_with(
        &self,
        other: &SelectionMatrix,
        f: impl Fn(bool, bool) -> bool,
    ) -> SelectionMatrix {
        debug_assert_eq!(self.n, other.n);
        SelectionMatrix {
            n: self.n,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    pub fn complement(&self) -> SelectionMatrix {
        SelectionMatrix {
            n: self.n,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }
}

impl fmt::Display for SelectionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            if q > 0 {
                f.write_str("\n")?;
            }
            for b in self.row(q) {
                f.write_str(if *b { "T" } else { "F" })?;
            }
        }
        Ok(())
    }
}

/// Real-valued matrix produced by a scorer, indexed like a selection matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreMatrix {
    n: usize,
    values: Vec<f64>,
}

impl ScoreMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> ScoreMatrix {
        let mut values = Vec::with_capacity(n * n);
        for q in 0..n {
            for k in 0..n {
                values.push(f(q, k));
            }
        }
        ScoreMatrix { n, values }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, query: usize, key: usize) -> f64 {
        self.values[query * self.n + key]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values
            .chunks(self.n.max(1))
            .map(<[f64]>::to_vec)
            .collect()
    }
}
