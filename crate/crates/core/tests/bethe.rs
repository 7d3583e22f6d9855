use m1chain_core::linalg::residual_norm;
use m1chain_core::{
    append_unit_root, build_bethe_state, build_m1, dress_solution, single_fermion_solutions, Admissibility,
    ConstrainedBasis,
};

#[test]
fn single_fermion_energies_cover_integer_levels() {
    let sols = single_fermion_solutions(12).unwrap();
    let mut ints: Vec<i64> = sols
        .iter()
        .filter(|s| (s.energy - s.energy.round()).abs() < 1e-9)
        .map(|s| s.energy.round() as i64)
        .collect();
    ints.sort();
    assert_eq!(ints, vec![8, 9, 9, 10, 10, 11, 11, 12]);
    let basis = ConstrainedBasis::new(12).unwrap();
    let h = build_m1(&basis).unwrap();
    for s in &sols {
        let psi = build_bethe_state(&s.mus, &basis).unwrap();
        assert!(residual_norm(&h, &psi, s.energy).unwrap() < 1e-10);
    }
}

#[test]
fn dressed_plane_waves_are_eigenstates() {
    let mut checked = 0;
    for n in 4..=9 {
        for base in single_fermion_solutions(n).unwrap() {
            for n_plus in 0..4 {
                for n_minus in 0..4 {
                    if n_plus + n_minus == 0 {
                        continue;
                    }
                    let Ok(Admissibility::Admissible(sol)) = dress_solution(&base, n_plus, n_minus) else {
                        continue;
                    };
                    if sol.n_sites > 14 || sol.fermion_number > sol.n_sites / 2 {
                        continue;
                    }
                    let basis = ConstrainedBasis::new(sol.n_sites).unwrap();
                    let h = build_m1(&basis).unwrap();
                    // a few admissible sets give a vanishing wavefunction
                    let Ok(psi) = build_bethe_state(&sol.mus, &basis) else {
                        continue;
                    };
                    let r = residual_norm(&h, &psi, sol.energy).unwrap();
                    assert!(r < 1e-8, "N = {n}, mu = {}, ({n_plus}, {n_minus}): {r:e}", base.mus[0]);
                    checked += 1;
                }
            }
        }
    }
    assert!(checked >= 15, "only {checked} dressed states built");
}

#[test]
fn augmented_states_are_eigenstates() {
    let basis = ConstrainedBasis::new(11).unwrap();
    let h = build_m1(&basis).unwrap();
    for s in single_fermion_solutions(11).unwrap().into_iter().skip(1) {
        let up = append_unit_root(&s).unwrap();
        let psi = build_bethe_state(&up.mus, &basis).unwrap();
        assert!(residual_norm(&h, &psi, up.energy).unwrap() < 1e-9);
    }
}
