use crate::imaging::Plane;

/// Summed-area table with a zero guard row and column.
#[derive(Clone, Debug)]
pub struct IntegralImage {
    height: usize,
    width: usize,
    table: Vec<f64>,
}

impl IntegralImage {
    pub fn new(plane: &Plane) -> Self {
        let (h, w) = plane.dims();
        let stride = w + 1;
        let mut table = vec![0.0; (h + 1) * stride];
        for r in 0..h {
            let mut row_sum = 0.0;
            for c in 0..w {
                row_sum += plane[(r, c)];
                table[(r + 1) * stride + c + 1] = table[r * stride + c + 1] + row_sum;
            }
        }
        Self {
            height: h,
            width: w,
            table,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.table[r * (self.width + 1) + c]
    }

    /// Sum over rows `r0..r1` and columns `c0..c1` (half-open).
    pub fn rect(&self, r0: usize, c0: usize, r1: usize, c1: usize) -> f64 {
        debug_assert!(r0 <= r1 && c0 <= c1 && r1 <= self.height && c1 <= self.width);
        self.at(r1, c1) - self.at(r0, c1) - self.at(r1, c0) + self.at(r0, c0)
    }

    /// Sum over a `rows`×`cols` box with top-left `(row, col)`, clipped to the image.
    #[inline]
    pub fn box_sum(&self, row: isize, col: isize, rows: isize, cols: isize) -> f64 {
        let h = self.height as isize;
        let w = self.width as isize;
        let r0 = row.clamp(0, h);
        let c0 = col.clamp(0, w);
        let r1 = (row + rows).clamp(0, h);
        let c1 = (col + cols).clamp(0, w);
        if r1 <= r0 || c1 <= c0 {
            return 0.0;
        }
        self.rect(r0 as usize, c0 as usize, r1 as usize, c1 as usize)
    }
}
