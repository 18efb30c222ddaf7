//! Exact truncated Euclidean distance transform.
//!
//! `compute_esdf` re-solves the distance transform on the dirty box padded by
//! `2P` voxels and writes results into the box padded by `P`, where
//! `P = ceil(truncation / voxel_size)`. Any Occupied voxel closer than the
//! truncation to a written voxel lies inside the solved box, so written values
//! are exact; voxels beyond `P` of the dirty box cannot have changed.
//!
//! The 1D pass is the lower-envelope-of-parabolas algorithm of Felzenszwalb
//! and Huttenlocher, applied along x, then y, then z.

use super::{Aabb, Occupancy, VoxelGrid, INVALID_ESDF};

const FAR: f64 = 1e20;

/// Squared distance transform of a single line in place. Entries >= FAR are
/// not sites; a line without sites stays at FAR.
/// `v` and `z` are scratch buffers of length >= n and n + 1.
fn edt_1d(f: &mut [f64], v: &mut [usize], z: &mut [f64], out: &mut [f64]) {
    let n = f.len();
    let mut k: isize = -1;
    for q in 0..n {
        if f[q] >= FAR {
            continue;
        }
        if k < 0 {
            k = 0;
            v[0] = q;
            z[0] = f64::NEG_INFINITY;
            z[1] = f64::INFINITY;
            continue;
        }
        let fq = f[q] + (q * q) as f64;
        let mut s;
        loop {
            let p = v[k as usize];
            s = (fq - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
            if s <= z[k as usize] {
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        let ku = k as usize;
        v[ku] = q;
        z[ku] = s;
        z[ku + 1] = f64::INFINITY;
    }
    if k < 0 {
        return;
    }
    let mut j = 0usize;
    for (q, o) in out.iter_mut().enumerate().take(n) {
        while z[j + 1] < q as f64 {
            j += 1;
        }
        let p = v[j];
        let d = q as f64 - p as f64;
        *o = d * d + f[p];
    }
    f[..n].copy_from_slice(&out[..n]);
}

/// Squared distance (in voxel units) from every cell of an `ext`-sized box to
/// the nearest site. `data` holds 0 on sites and anything >= FAR elsewhere on
/// input, laid out x-fastest. Cells with no site on the box return >= FAR.
pub fn squared_edt_in_place(data: &mut [f64], ext: [usize; 3]) {
    let [nx, ny, nz] = ext;
    let longest = nx.max(ny).max(nz);
    let mut line = vec![0.0; longest];
    let mut out = vec![0.0; longest];
    let mut v = vec![0usize; longest];
    let mut z = vec![0.0; longest + 1];
    // x lines are contiguous
    for zz in 0..nz {
        for yy in 0..ny {
            let base = nx * (yy + ny * zz);
            edt_1d(&mut data[base..base + nx], &mut v, &mut z, &mut out);
        }
    }
    for zz in 0..nz {
        for xx in 0..nx {
            for yy in 0..ny {
                line[yy] = data[xx + nx * (yy + ny * zz)];
            }
            edt_1d(&mut line[..ny], &mut v, &mut z, &mut out);
            for yy in 0..ny {
                data[xx + nx * (yy + ny * zz)] = line[yy];
            }
        }
    }
    for yy in 0..ny {
        for xx in 0..nx {
            for zz in 0..nz {
                line[zz] = data[xx + nx * (yy + ny * zz)];
            }
            edt_1d(&mut line[..nz], &mut v, &mut z, &mut out);
            for zz in 0..nz {
                data[xx + nx * (yy + ny * zz)] = line[zz];
            }
        }
    }
}

/// Converts a squared voxel distance into the stored metric ESDF value.
#[inline]
pub fn esdf_value(d2: f64, voxel_size: f64, truncation: f64) -> f32 {
    if d2 >= FAR {
        return truncation as f32;
    }
    (d2.sqrt() * voxel_size).min(truncation) as f32
}

impl VoxelGrid {
    /// Recomputes the ESDF around `dirty`; returns the box that was written.
    pub fn compute_esdf(&mut self, dirty: &Aabb) -> Aabb {
        if dirty.is_empty() {
            return Aabb::EMPTY;
        }
        let pad = self.esdf_padding();
        let written = dirty.padded(pad).clipped(self.dims);
        let solved = dirty.padded(2 * pad).clipped(self.dims);
        let ext = solved.extent();
        let n = ext[0] * ext[1] * ext[2];
        let mut scratch = std::mem::take(&mut self.edt_scratch);
        scratch.clear();
        scratch.resize(n, FAR);
        let mut k = 0;
        for v in solved.iter() {
            if self.occupancy[self.linear_unchecked(v)] == Occupancy::Occupied {
                scratch[k] = 0.0;
            }
            k += 1;
        }
        squared_edt_in_place(&mut scratch, ext);
        let vs = self.voxel_size;
        let trunc = self.truncation;
        for v in written.iter() {
            let gi = self.linear_unchecked(v);
            self.esdf[gi] = if self.occupancy[gi] == Occupancy::Free {
                let l = [
                    (v[0] - solved.min[0]) as usize,
                    (v[1] - solved.min[1]) as usize,
                    (v[2] - solved.min[2]) as usize,
                ];
                let si = l[0] + ext[0] * (l[1] + ext[1] * l[2]);
                esdf_value(scratch[si], vs, trunc)
            } else {
                INVALID_ESDF
            };
        }
        self.edt_scratch = scratch;
        written
    }
}
