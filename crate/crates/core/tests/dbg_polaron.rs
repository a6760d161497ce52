#[test]
fn dbg_newton() {
    use pamcat_core::polaron::{coulomb_energy, dirichlet_energy, gaussian_radial_profile};
    let sref = 6.0 * std::f64::consts::PI.powf(1.5);
    let p = gaussian_radial_profile(1.0, sref, 2048);
    println!("norm = {}", p.norm_sq());
    let d = coulomb_energy(&p).unwrap();
    let b = dirichlet_energy(&p).unwrap();
    let d_exact = 1.0 / (4.0 * std::f64::consts::PI.powf(1.5) * sref);
    let b_exact = 3.0 / (4.0 * sref * sref);
    println!("D = {d:e} exact {d_exact:e} ratio {}", d / d_exact);
    println!("B = {b:e} exact {b_exact:e} ratio {}", b / b_exact);
}
