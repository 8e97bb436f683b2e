use image::GrayImage;
use rand::Rng;

use super::AssetError;

/// Grayscale placement map read as an unnormalized probability mass over
/// pixels: brighter pixels are proportionally more likely.
#[derive(Clone, Debug)]
pub struct HeatMap {
    width: u32,
    height: u32,
    values: Vec<u8>,
    /// `row_cum[y]` = mass of rows `0..=y`.
    row_cum: Vec<u64>,
}

impl HeatMap {
    pub fn new(image: GrayImage) -> Result<Self, AssetError> {
        let (width, height) = image.dimensions();
        let values = image.into_raw();
        let mut row_cum = Vec::with_capacity(height as usize);
        let mut total = 0u64;
        for row in values.chunks_exact(width.max(1) as usize) {
            total += row.iter().map(|&v| v as u64).sum::<u64>();
            row_cum.push(total);
        }
        if total == 0 {
            return Err(AssetError::AllBlackMap);
        }
        Ok(HeatMap { width, height, values, row_cum })
    }

    /// Checks the map covers a page of exactly `width` × `height` pixels.
    pub fn check_dimensions(&self, width: u32, height: u32) -> Result<(), AssetError> {
        if (self.width, self.height) != (width, height) {
            return Err(AssetError::DimensionMismatch {
                expected: (width, height),
                got: (self.width, self.height),
            });
        }
        Ok(())
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn total_mass(&self) -> u64 {
        *self.row_cum.last().expect("non-empty map")
    }

    pub fn value(&self, x: u32, y: u32) -> u8 {
        self.values[(y * self.width + x) as usize]
    }

    /// Pixel drawn with probability `value(x, y) / total_mass()`, using exact
    /// integer arithmetic.
    pub fn sample(&self, r: &mut impl Rng) -> (u32, u32) {
        let k = r.gen_range(0..self.total_mass());
        let y = self.row_cum.partition_point(|&c| c <= k);
        let mut rest = k - if y == 0 { 0 } else { self.row_cum[y - 1] };
        let row = &self.values[y * self.width as usize..(y + 1) * self.width as usize];
        for (x, &v) in row.iter().enumerate() {
            if rest < v as u64 {
                return (x as u32, y as u32);
            }
            rest -= v as u64;
        }
        unreachable!("row mass covers k")
    }
}

/// Draws a pixel from `map`; see [`HeatMap::sample`].
pub fn sample_position(map: &HeatMap, r: &mut impl Rng) -> (u32, u32) {
    map.sample(r)
}
