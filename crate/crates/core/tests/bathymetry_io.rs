use std::fs;
use std::path::{Path, PathBuf};

use proptest::prelude::*;

use harborsim_core::bathymetry::{
    build_occupancy, export_heightmap, load_raster, save_ascii_grid, sidecar_path, split_grid, stitch_tiles, BathyError,
    DepthGrid, GridGeometry, RasterFormat,
};
use harborsim_core::geom::Vec2;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

#[test]
fn fixture_grid_loads_with_header_geometry() {
    let g = load_raster(&fixture("grid3x3.asc"), RasterFormat::AsciiGrid).unwrap();
    let geo = g.geometry();
    assert_eq!((geo.rows, geo.cols, geo.cell_size), (3, 3, 10.0));
    assert_eq!(geo.origin, Vec2::new(100.0, 200.0));
    // last line of the file is the southern row
    assert_eq!(g.get(0, 0), Some(15.0));
    assert_eq!(g.get(0, 2), Some(25.5));
    assert_eq!(g.get(1, 0), Some(10.4));
    assert_eq!(g.get(2, 2), None);
}

#[test]
fn fixture_occupancy_matches_draft_plus_clearance() {
    let g = load_raster(&fixture("grid3x3.asc"), RasterFormat::AsciiGrid).unwrap();
    let occ = build_occupancy(&g, 9.5, 1.0).unwrap();
    assert_eq!(occ.threshold(), 10.5);
    assert!(occ.is_blocked(1, 0), "10.4 m is below 10.5 m");
    assert!(!occ.is_blocked(1, 1), "10.6 m clears 10.5 m");
    assert!(occ.is_blocked(2, 2), "nodata is never navigable");
    assert_eq!(occ.blocked_count(), 4);
    assert!(build_occupancy(&g, 0.0, 1.0).is_err());
}

#[test]
fn load_errors_are_distinct() {
    let dir = tempfile::tempdir().unwrap();
    let short = dir.path().join("short.asc");
    fs::write(&short, "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2 3\n").unwrap();
    assert!(matches!(load_raster(&short, RasterFormat::AsciiGrid), Err(BathyError::DimensionMismatch { expected: 4, found: 3, .. })));

    let header = dir.path().join("header.asc");
    fs::write(&header, "ncols 2\nnrows two\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2 3 4\n").unwrap();
    assert!(matches!(load_raster(&header, RasterFormat::AsciiGrid), Err(BathyError::MalformedHeader { .. })));

    let missing = dir.path().join("nope.asc");
    assert!(matches!(load_raster(&missing, RasterFormat::AsciiGrid), Err(BathyError::Io { .. })));

    // heightmap without its sidecar
    let raw = dir.path().join("lonely.r16");
    fs::write(&raw, [0u8; 8]).unwrap();
    assert!(load_raster(&raw, RasterFormat::Raw16).is_err());
}

#[test]
fn ascii_save_and_heightmap_keep_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let g = load_raster(&fixture("grid3x3.asc"), RasterFormat::AsciiGrid).unwrap();
    let asc = dir.path().join("copy.asc");
    save_ascii_grid(&g, &asc).unwrap();
    assert_eq!(load_raster(&asc, RasterFormat::AsciiGrid).unwrap(), g);

    let raw = dir.path().join("copy.r16");
    export_heightmap(&g, &raw).unwrap();
    assert!(sidecar_path(&raw).exists());
    assert_eq!(fs::metadata(&raw).unwrap().len(), 18);
    let back = load_raster(&raw, RasterFormat::Raw16).unwrap();
    assert_eq!(back.get(1, 0).map(|d| (d - 10.4).abs() < 18.0 / 65535.0), Some(true));
    assert_eq!(back.get(2, 2), None);
}

#[test]
fn channel_fixture_has_a_navigable_channel() {
    let g = load_raster(&fixture("harbor_channel.asc"), RasterFormat::AsciiGrid).unwrap();
    let occ = build_occupancy(&g, 9.5, 1.0).unwrap();
    let geo = *occ.geometry();
    assert!(occ.segment_clear(Vec2::new(0.0, 0.0), Vec2::new(0.0, 4500.0)));
    assert!(occ.is_blocked_at(Vec2::new(2000.0, 500.0)));
    assert!(occ.is_blocked_at(Vec2::new(900.0, 5200.0)), "shoal patch");
    assert!(geo.contains(Vec2::new(0.0, 10_500.0)));
}

fn grid_strategy() -> impl Strategy<Value = DepthGrid> {
    (1usize..20, 1usize..20, 1.0f64..200.0, -1e4f64..1e4, -1e4f64..1e4).prop_flat_map(|(rows, cols, cell, x, y)| {
        prop::collection::vec(prop_oneof![9 => -10.0f64..80.0, 1 => Just(-9999.0)], rows * cols).prop_map(move |mut d| {
            d[0] = 20.0;
            let g = GridGeometry { origin: Vec2::new(x, y), cell_size: cell, rows, cols };
            DepthGrid::new(g, d, -9999.0).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn heightmap_error_within_quantum(grid in grid_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.r16");
        export_heightmap(&grid, &path).unwrap();
        let back = load_raster(&path, RasterFormat::Raw16).unwrap();
        let (lo, hi) = grid.depth_range().unwrap();
        let quantum = (hi - lo) / 65535.0;
        prop_assert_eq!(back.geometry(), grid.geometry());
        for (a, b) in grid.depths().iter().zip(back.depths()) {
            if grid.is_nodata_value(*a) {
                prop_assert!(back.is_nodata_value(*b));
            } else {
                prop_assert!((a - b).abs() <= quantum + 1e-9, "{} vs {}", a, b);
            }
        }
    }

    #[test]
    fn stitch_inverts_split(grid in grid_strategy(), tr in 1usize..8, tc in 1usize..8) {
        prop_assert_eq!(stitch_tiles(&split_grid(&grid, tr, tc)).unwrap(), grid);
    }
}
