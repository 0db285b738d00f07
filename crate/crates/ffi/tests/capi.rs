use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use texnoise_ffi::*;

fn striped(width: usize, height: usize) -> Vec<f64> {
    (0..width * height)
        .map(|i| {
            let (x, y) = (i % width, i / width);
            100.0 + 20.0 * ((x / 2) % 2) as f64 + ((x * 7 + y * 3) % 5) as f64
        })
        .collect()
}

unsafe fn new_raster(width: usize, height: usize, data: &[f64]) -> *mut TnRaster {
    let mut r = ptr::null_mut();
    assert_eq!(tn_raster_new(width, height, 8, data.as_ptr(), &mut r), TnStatus::Ok);
    r
}

fn last_error() -> String {
    let p = tn_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(tn_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn raster_accessors_round_trip() {
    let data = striped(5, 3);
    unsafe {
        let r = new_raster(5, 3, &data);
        assert_eq!(tn_raster_width(r), 5);
        assert_eq!(tn_raster_height(r), 3);
        let view = std::slice::from_raw_parts(tn_raster_data(r), 15);
        assert_eq!(view, &data[..]);
        tn_raster_free(r);
        assert_eq!(tn_raster_width(ptr::null()), 0);
        assert!(tn_raster_data(ptr::null()).is_null());
        tn_raster_free(ptr::null_mut());
    }
}

#[test]
fn null_and_invalid_arguments_report_errors() {
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(tn_raster_new(2, 2, 8, ptr::null(), &mut r), TnStatus::NullPointer);
        assert!(last_error().contains("data"));
        let data = [1.0, f64::NAN, 3.0, 4.0];
        assert_eq!(tn_raster_new(2, 2, 8, data.as_ptr(), &mut r), TnStatus::InvalidArgument);
        assert!(r.is_null());
        let missing = CString::new("/definitely/not/here.pgm").unwrap();
        assert_eq!(tn_raster_read(missing.as_ptr(), &mut r), TnStatus::Io);
        assert!(last_error().contains("not/here.pgm"));
    }
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("x.p2f").to_str().unwrap()).unwrap();
    let data = striped(8, 6);
    unsafe {
        let r = new_raster(8, 6, &data);
        assert_eq!(tn_raster_write(r, path.as_ptr()), TnStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(tn_raster_read(path.as_ptr(), &mut back), TnStatus::Ok);
        assert_eq!(std::slice::from_raw_parts(tn_raster_data(back), 48), &data[..]);
        tn_raster_free(r);
        tn_raster_free(back);
    }
}

#[test]
fn noise_identification_fills_the_record() {
    let data = striped(32, 32);
    unsafe {
        let r = new_raster(32, 32, &data);
        let mut est = TnNoiseEstimate::default();
        assert_eq!(tn_noise_identify(r, 0, 0, 16, 64, &mut est), TnStatus::Ok);
        assert!(est.sigma2 > 0.0);
        assert!((0..3).contains(&est.family));
        assert!(est.distances.iter().all(|d| (0.0..=2f64.sqrt() + 1e-12).contains(d)));
        assert_eq!(tn_noise_identify(r, 20, 20, 16, 64, &mut est), TnStatus::RoiOutOfBounds);

        let flat = new_raster(16, 16, &[5.0; 256]);
        assert_eq!(tn_noise_identify(flat, 0, 0, 16, 64, &mut est), TnStatus::DegenerateNoise);
        tn_raster_free(r);
        tn_raster_free(flat);
    }
}

#[test]
fn filter_residual_distort_compose() {
    let data = striped(24, 24);
    unsafe {
        let orig = new_raster(24, 24, &data);
        let (mut clean, mut eta, mut noisy) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
        assert_eq!(tn_filter(orig, 4.0, 5, 1, &mut clean), TnStatus::Ok);
        assert_eq!(tn_residual(orig, clean, &mut eta), TnStatus::Ok);
        assert_eq!(tn_distort(orig, eta, &mut noisy), TnStatus::Ok);
        let c = std::slice::from_raw_parts(tn_raster_data(clean), 576);
        let n = std::slice::from_raw_parts(tn_raster_data(noisy), 576);
        for i in 0..576 {
            assert!((data[i] - c[i] - (n[i] - data[i])).abs() < 1e-9);
        }
        let mut bad = ptr::null_mut();
        assert_eq!(tn_filter(orig, 4.0, 4, 1, &mut bad), TnStatus::InvalidArgument);
        let small = new_raster(4, 4, &[1.0; 16]);
        assert_eq!(tn_residual(orig, small, &mut bad), TnStatus::DimensionMismatch);
        for r in [orig, clean, eta, noisy, small] {
            tn_raster_free(r);
        }
    }
}

#[test]
fn roundtrip_preserves_a_smooth_disc() {
    let n = 32;
    let data: Vec<f64> = (0..n * n)
        .map(|i| {
            let (x, y) = ((i % n) as f64 - 15.5, (i / n) as f64 - 15.5);
            if x.hypot(y) < 8.0 { 1.0 } else { 0.0 }
        })
        .collect();
    unsafe {
        let r = new_raster(n, n, &data);
        let mut rec = ptr::null_mut();
        assert_eq!(tn_recon_roundtrip(r, 90, TnReconFilter::Ramp, &mut rec), TnStatus::Ok);
        let out = std::slice::from_raw_parts(tn_raster_data(rec), n * n);
        assert!((out[16 * n + 16] - 1.0).abs() < 0.15, "{}", out[16 * n + 16]);
        assert!(out[2 * n + 16].abs() < 0.15);
        tn_raster_free(r);
        tn_raster_free(rec);
    }
}

#[test]
fn features_respect_buffer_capacity() {
    let data = striped(40, 40);
    let methods = [
        TnMethod::Gmrf,
        TnMethod::Fd,
        TnMethod::Cm,
        TnMethod::Rlm,
        TnMethod::Acf,
        TnMethod::Gf,
        TnMethod::Wp,
    ];
    unsafe {
        let r = new_raster(40, 40, &data);
        for m in methods {
            let count = tn_feature_count(m);
            let mut len = 0;
            let mut small = vec![0.0; count - 1];
            assert_eq!(
                tn_features(r, 4, 4, 32, m, small.as_mut_ptr(), small.len(), &mut len),
                TnStatus::BufferTooSmall
            );
            assert_eq!(len, count);
            let mut buf = vec![f64::NAN; count];
            assert_eq!(tn_features(r, 4, 4, 32, m, buf.as_mut_ptr(), count, &mut len), TnStatus::Ok);
            assert!(buf.iter().all(|v| v.is_finite()), "{m:?}");
            for i in 0..count {
                assert!(tn_feature_name(m, i, ptr::null_mut(), 0) > 0);
            }
            assert_eq!(tn_feature_name(m, count, ptr::null_mut(), 0), 0);
        }
        let mut name = [0 as std::ffi::c_char; 6];
        let full = tn_feature_name(TnMethod::Wp, 3, name.as_mut_ptr(), name.len());
        assert_eq!(full, "max_child_hh".len());
        assert_eq!(CStr::from_ptr(name.as_ptr()).to_str().unwrap(), "max_c");

        let mut buf = [0.0; 4];
        let mut len = 0;
        assert_eq!(
            tn_features(r, 20, 20, 32, TnMethod::Wp, buf.as_mut_ptr(), 4, &mut len),
            TnStatus::RoiOutOfBounds
        );
        tn_raster_free(r);
    }
}

#[test]
fn fisher_j_of_shifted_classes() {
    // two 2-D classes, the second shifted along x by 4
    let a: Vec<f64> = vec![0.0, 0.0, 1.0, 1.0, 2.0, 0.0, 1.0, -1.0];
    let b: Vec<f64> = a.chunks(2).flat_map(|p| [p[0] + 4.0, p[1]]).collect();
    let (mut j, mut capped) = (0.0, -1);
    unsafe {
        assert_eq!(tn_fisher_j(a.as_ptr(), 4, b.as_ptr(), 4, 2, 0.0, &mut j, &mut capped), TnStatus::Ok);
        assert!(j > 1.0);
        assert_eq!(capped, 0);
        let mut j2 = 0.0;
        assert_eq!(tn_fisher_j(b.as_ptr(), 4, a.as_ptr(), 4, 2, 0.0, &mut j2, &mut capped), TnStatus::Ok);
        assert_eq!(j, j2);
        assert_eq!(
            tn_fisher_j(a.as_ptr(), 4, b.as_ptr(), 4, 0, 0.0, &mut j, &mut capped),
            TnStatus::InvalidArgument
        );
        assert_eq!(
            tn_fisher_j(a.as_ptr(), 4, b.as_ptr(), 4, 2, -1.0, &mut j, &mut capped),
            TnStatus::InvalidArgument
        );
    }
}

#[test]
fn header_is_valid_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/texnoise.h");
    let src = std::env::temp_dir().join(format!("texnoise_header_{}.c", std::process::id()));
    std::fs::write(
        &src,
        format!(
            "#include \"{header}\"\n\
             int main(void) {{\n\
               TnRaster *r = NULL;\n\
               double px[4] = {{1, 2, 3, 4}};\n\
               TnStatus s = tn_raster_new(2, 2, 8, px, &r);\n\
               tn_raster_free(r);\n\
               return s == TN_STATUS_OK ? 0 : 1;\n\
             }}\n"
        ),
    )
    .unwrap();
    let status = Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"]).arg(&src).status();
    std::fs::remove_file(&src).ok();
    match status {
        Ok(s) => assert!(s.success(), "header failed to compile"),
        Err(e) => eprintln!("skipping header check, no C compiler: {e}"),
    }
}
