mod common;

use common::standard_normal_matrix;
use nalgebra::DMatrix;
use rankgm::pipeline::{fit, FitConfig};
use rankgm::simulation::{generate_precision, sample_observations, PrecisionKind, PrecisionSpec};

fn small_config() -> FitConfig {
    FitConfig {
        burn_in: 100,
        draws: 200,
        seed: 17,
        ..FitConfig::default()
    }
}

#[test]
fn increasing_maps_leave_the_fit_unchanged() {
    let x = standard_normal_matrix(60, 5, 3);
    let g = DMatrix::from_fn(60, 5, |i, j| {
        let v = x[(i, j)];
        match j % 3 {
            0 => v.exp(),
            1 => v.powi(3),
            _ => 1.0 / (1.0 + (-v).exp()),
        }
    });
    let config = small_config();
    assert_eq!(fit(&x, &config).unwrap(), fit(&g, &config).unwrap());
}

#[test]
fn transform_family_does_not_matter() {
    let omega = generate_precision(&PrecisionSpec {
        kind: PrecisionKind::Ar1,
        p: 4,
        seed: 0,
    })
    .unwrap();
    let obs = sample_observations(&omega, 80, 5).unwrap();
    let config = small_config();
    let a = fit(&obs.x, &config).unwrap();
    let b = fit(&obs.y_true, &config).unwrap();
    assert_eq!(a.best().edges, b.best().edges);
    assert_eq!(a, b);
}

#[test]
fn grid_order_and_chain_seeds() {
    let x = standard_normal_matrix(40, 3, 8);
    let config = small_config();
    let forward = fit(&x, &config).unwrap();
    let reversed = fit(
        &x,
        &FitConfig {
            c_grid: config.c_grid.iter().rev().cloned().collect(),
            ..config.clone()
        },
    )
    .unwrap();
    assert_eq!(forward.best().c, reversed.best().c);
    assert_eq!(forward.best().edges, reversed.best().edges);
    assert_eq!(forward.candidates.len(), 4);
}

#[test]
fn strongly_associated_pair_gets_an_edge() {
    let z = standard_normal_matrix(200, 1, 4);
    let noise = standard_normal_matrix(200, 1, 5);
    let x = DMatrix::from_fn(200, 2, |i, j| {
        if j == 0 {
            z[(i, 0)]
        } else {
            (z[(i, 0)] + 0.05 * noise[(i, 0)]).exp()
        }
    });
    let result = fit(&x, &small_config()).unwrap();
    assert!(result.best().edges.has_edge(0, 1));
}

#[test]
fn single_kept_draw_runs() {
    let x = standard_normal_matrix(30, 3, 6);
    let result = fit(
        &x,
        &FitConfig {
            burn_in: 10,
            draws: 1,
            ..small_config()
        },
    )
    .unwrap();
    let best = result.best();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        assert_eq!(best.edges.has_edge(i, j), best.inclusion[(i, j)] == 1.0);
    }
}

#[test]
fn bad_configurations_are_rejected() {
    let x = standard_normal_matrix(30, 3, 6);
    for config in [
        FitConfig {
            c_grid: vec![],
            ..small_config()
        },
        FitConfig {
            c_grid: vec![1.0, 0.0],
            ..small_config()
        },
        FitConfig {
            draws: 0,
            ..small_config()
        },
        FitConfig {
            wishart_df: -1.0,
            ..small_config()
        },
    ] {
        assert!(matches!(fit(&x, &config), Err(rankgm::Error::Argument(_))));
    }
    let mut bad = x.clone();
    bad[(3, 1)] = f64::NAN;
    assert!(matches!(
        fit(&bad, &small_config()),
        Err(rankgm::Error::Input { row: 3, col: 1, .. })
    ));
}
