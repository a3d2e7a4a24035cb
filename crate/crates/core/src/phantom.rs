//! Synthetic FMO instances: Gaussian pencil-beam kernels on a 1D or 2D voxel
//! lattice, with a rectangular target region.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmo::{FmoProblem, InnerParams, OuterParams, VoxelTag};
use crate::sparse::{SparseDoseMatrix, Triplet};

/// Kernel values below this are dropped before the matrix is assembled.
pub const KERNEL_TRUNCATION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grid {
    Line { voxels: usize },
    Plane { nx: usize, ny: usize },
}

impl Grid {
    pub fn voxel_count(&self) -> usize {
        match *self {
            Grid::Line { voxels } => voxels,
            Grid::Plane { nx, ny } => nx * ny,
        }
    }

    /// Voxel-center position of linear index `i` (row-major, x fastest).
    fn position(&self, i: usize) -> (f64, f64) {
        match *self {
            Grid::Line { .. } => (i as f64, 0.0),
            Grid::Plane { nx, .. } => ((i % nx) as f64, (i / nx) as f64),
        }
    }
}

/// Half-open voxel index ranges; `y` is ignored on a line grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Range {
        start: usize,
        end: usize,
    },
    Rect {
        x0: usize,
        x1: usize,
        y0: usize,
        y1: usize,
    },
}

impl Region {
    fn contains(&self, grid: &Grid, i: usize) -> bool {
        let (x, y) = grid.position(i);
        let (x, y) = (x as usize, y as usize);
        match *self {
            Region::Range { start, end } => match grid {
                Grid::Line { .. } => (start..end).contains(&i),
                Grid::Plane { .. } => (start..end).contains(&x),
            },
            Region::Rect { x0, x1, y0, y1 } => (x0..x1).contains(&x) && (y0..y1).contains(&y),
        }
    }

    fn fits(&self, grid: &Grid) -> bool {
        match (*self, *grid) {
            (Region::Range { start, end }, Grid::Line { voxels }) => start < end && end <= voxels,
            (Region::Range { start, end }, Grid::Plane { nx, .. }) => start < end && end <= nx,
            (Region::Rect { x0, x1, y0, y1 }, Grid::Plane { nx, ny }) => {
                x0 < x1 && x1 <= nx && y0 < y1 && y1 <= ny
            }
            (Region::Rect { x0, x1, y0, y1 }, Grid::Line { voxels }) => {
                x0 < x1 && x1 <= voxels && y0 == 0 && y1 == 1
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub grid: Grid,
    pub n_beamlets: usize,
    /// Gaussian standard deviation in voxel units.
    pub kernel_width: f64,
    pub ptv_region: Region,
    /// Gy.
    pub prescription_ptv: f64,
    /// Gy.
    pub cap_oar: f64,
    pub seed: u64,
    /// Threshold copied into the generated problem.
    #[serde(default)]
    pub tau: f64,
    #[serde(default)]
    pub inner: InnerParams,
    #[serde(default)]
    pub outer: OuterParams,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self {
            grid: Grid::Line { voxels: 100 },
            n_beamlets: 10,
            kernel_width: 3.0,
            ptv_region: Region::Range { start: 40, end: 60 },
            prescription_ptv: 60.0,
            cap_oar: 20.0,
            seed: 7,
            tau: 0.0,
            inner: InnerParams::default(),
            outer: OuterParams::default(),
        }
    }
}

impl PhantomSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.grid.voxel_count() == 0 || self.n_beamlets == 0 {
            return bad("grid and beamlet count must be positive");
        }
        if !(self.kernel_width.is_finite() && self.kernel_width > 0.0) {
            return bad("kernel_width must be positive");
        }
        if !self.ptv_region.fits(&self.grid) {
            return bad("ptv_region does not fit inside the grid");
        }
        if !(self.cap_oar.is_finite()
            && self.cap_oar >= 0.0
            && self.prescription_ptv > self.cap_oar)
        {
            return bad("need prescription_ptv > cap_oar >= 0");
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return bad("tau must be nonnegative");
        }
        Ok(())
    }

    /// Evenly spaced beamlet centers. A plane uses a near-square lattice
    /// filled row by row.
    fn beamlet_centers(&self) -> Vec<(f64, f64)> {
        let n = self.n_beamlets;
        match self.grid {
            Grid::Line { voxels } => {
                let spacing = voxels as f64 / n as f64;
                (0..n)
                    .map(|j| ((j as f64 + 0.5) * spacing - 0.5, 0.0))
                    .collect()
            }
            Grid::Plane { nx, ny } => {
                let cols = ((n as f64 * nx as f64 / ny as f64).sqrt().ceil() as usize).clamp(1, n);
                let rows = n.div_ceil(cols);
                let (sx, sy) = (nx as f64 / cols as f64, ny as f64 / rows as f64);
                (0..n)
                    .map(|j| {
                        let (c, r) = (j % cols, j / cols);
                        ((c as f64 + 0.5) * sx - 0.5, (r as f64 + 0.5) * sy - 0.5)
                    })
                    .collect()
            }
        }
    }
}

/// Builds a deterministic FMO instance from `spec`. Each beamlet's peak
/// amplitude carries a seeded jitter in `[0.9, 1.1)`.
pub fn generate_phantom(spec: &PhantomSpec) -> Result<FmoProblem> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let amplitudes: Vec<f64> = (0..spec.n_beamlets)
        .map(|_| rng.gen_range(0.9..1.1))
        .collect();
    let centers = spec.beamlet_centers();
    let n_voxels = spec.grid.voxel_count();
    let two_var = 2.0 * spec.kernel_width * spec.kernel_width;

    let mut triplets = Vec::new();
    for i in 0..n_voxels {
        let (x, y) = spec.grid.position(i);
        for (j, ((cx, cy), amp)) in centers.iter().zip(&amplitudes).enumerate() {
            let r2 = (x - cx).powi(2) + (y - cy).powi(2);
            let value = amp * (-r2 / two_var).exp();
            if value >= KERNEL_TRUNCATION {
                triplets.push(Triplet {
                    row: i,
                    col: j,
                    value,
                });
            }
        }
    }
    let ddc = SparseDoseMatrix::from_triplets(n_voxels, spec.n_beamlets, triplets)?;

    let labels: Vec<VoxelTag> = (0..n_voxels)
        .map(|i| {
            if spec.ptv_region.contains(&spec.grid, i) {
                VoxelTag::Ptv
            } else {
                VoxelTag::Oar
            }
        })
        .collect();
    let prescription = labels
        .iter()
        .map(|l| match l {
            VoxelTag::Ptv => spec.prescription_ptv,
            VoxelTag::Oar => spec.cap_oar,
        })
        .collect();

    let mut warnings = Vec::new();
    let mut covered = vec![false; n_voxels];
    for t in ddc.triplets() {
        covered[t.row] = true;
    }
    let uncovered = covered.iter().filter(|c| !**c).count();
    if uncovered > 0 {
        warnings.push(format!(
            "{uncovered} voxels receive zero dose from every beamlet"
        ));
    }
    let empty_columns = ddc.column_sums().iter().filter(|s| **s == 0.0).count();
    if empty_columns > 0 {
        warnings.push(format!("{empty_columns} beamlets deposit no dose"));
    }

    Ok(FmoProblem {
        ddc,
        prescription,
        labels,
        tau: spec.tau,
        inner: spec.inner,
        outer: spec.outer,
        warnings,
    })
}
