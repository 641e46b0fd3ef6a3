use kpgeo::acceptance::{brute_force_zeta, select, smoothing_corpus, CORPUS_SIZE};
use kpgeo::disc_family::Background;
use kpgeo::fields::{GridField, Support, TorusGrid};
use kpgeo::geodesic::{cosine_profile, solve_geodesic, GeodesicConfig};
use kpgeo::nash_moser::choose_indices;
use kpgeo::oracle::{compare_paths, invariant_geodesic_oracle};

#[test]
fn selection_by_module_and_number() {
    assert_eq!(select(None).len(), 11);
    let ids: Vec<usize> = select(Some("elliptic")).iter().map(|c| c.id).collect();
    assert_eq!(ids, vec![2, 3, 4]);
    assert_eq!(select(Some("10"))[0].name, "end-to-end-geodesic");
    assert!(select(Some("nope")).is_empty());
}

#[test]
fn corpus_is_reproducible() {
    let a = smoothing_corpus();
    let b = smoothing_corpus();
    assert_eq!(a.len(), CORPUS_SIZE);
    assert_eq!(a[3].values, b[3].values);
}

#[test]
fn index_search_matches_scan() {
    for (k, j) in [(5.0, 0.1), (6.0, 0.2), (5.5, 0.15), (7.0, 0.05)] {
        assert_eq!(brute_force_zeta(k, j), Some(choose_indices(k, j).unwrap().zeta));
    }
}

#[test]
fn small_geodesic_tracks_oracle() {
    let torus = TorusGrid::new(16, 1);
    let phi0 = GridField::zeros(Support::Torus, torus);
    let phi1 = cosine_profile(torus, 0.03);
    let cfg = GeodesicConfig { theta: 5.0, window_cells: 8, boundary_spacing: 0.03, ..Default::default() };
    let run = solve_geodesic(&cfg, Background::flat(torus), phi0.clone(), phi1.clone()).unwrap();
    assert!(run.final_residual < 1e-8);
    let (orc, _) = invariant_geodesic_oracle(&phi0, &phi1, 8).unwrap();
    assert!(compare_paths(&run.path, &orc, &[]).unwrap().sup_diff < 1e-6);
}
