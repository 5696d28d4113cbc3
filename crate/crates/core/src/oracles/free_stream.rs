use crate::mesh::Mesh2D;
use crate::radiometry::PhysConstants;
use crate::transport::Particle;

/// Exact translation `x + (c/eps) t omega` with no boundaries.
pub fn free_stream_exact(particles: &[Particle], t: f64, consts: &PhysConstants) -> Vec<Particle> {
    let d = consts.speed() * t;
    particles
        .iter()
        .map(|p| Particle {
            x: p.x + d * p.omega[0],
            y: p.y + d * p.omega[1],
            ..*p
        })
        .collect()
}

/// Cell densities `sum w / V` of an ensemble; particles outside the mesh are ignored.
pub fn free_stream_density(particles: &[Particle], mesh: &Mesh2D) -> Vec<f64> {
    let mut rho = vec![0.0; mesh.n_cells()];
    for p in particles {
        if let Ok((i, j)) = mesh.locate_cell(p.x, p.y) {
            rho[mesh.index(i, j)] += p.w;
        }
    }
    for (k, r) in rho.iter_mut().enumerate() {
        *r /= mesh.volume(k);
    }
    rho
}
